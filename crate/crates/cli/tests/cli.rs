use std::path::Path;
use std::process::{Command, Output};

use densel_cli::commands::{bench_rows, write_bench_csv, BenchRow};
use densel_cli::files::{load_empirical, load_family, read_json, write_json, EmpiricalFile, FamilyFile};
use densel_core::instances::random_instance;
use densel_core::selectors::Algorithm;
use densel_core::{l1_distance, Candidate, Family, Support};
use tempfile::TempDir;

fn densel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_densel")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn gen(dir: &Path, args: &[&str]) -> Output {
    let out_dir = dir.to_str().unwrap();
    let mut all = vec!["gen"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", out_dir]);
    densel(&all)
}

fn select(dir: &Path, algorithm: &str) -> serde_json::Value {
    let out = densel(&[
        "select",
        "--family",
        dir.join("family.json").to_str().unwrap(),
        "--empirical",
        dir.join("empirical.json").to_str().unwrap(),
        "--algorithm",
        algorithm,
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn efficient_on_lower_bound_three_uses_one_product() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&gen(dir.path(), &["--example", "three", "--eps", "0.01"])), 0);
    let r = select(dir.path(), "efficient");
    assert_eq!(r["selected_name"], "f1");
    assert_eq!(r["h_products"], 1);
}

#[test]
fn tournament_on_nine_selects_f1() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&gen(dir.path(), &["--example", "nine", "--eps", "0.001"])), 0);
    let r = select(dir.path(), "tournament");
    assert_eq!(r["selected_name"], "f1");
    assert_eq!(r["h_products"], 6);
}

#[test]
fn singleton_family_costs_nothing() {
    let dir = TempDir::new().unwrap();
    let family = Family::new(
        Support::with_size(3).unwrap(),
        vec![Candidate::new("only", vec![0.2, 0.3, 0.5]).unwrap()],
    )
    .unwrap();
    write_json(&dir.path().join("family.json"), &FamilyFile::from_family(&family)).unwrap();
    write_json(&dir.path().join("empirical.json"), &EmpiricalFile::from_mass(&[0.1, 0.1, 0.8])).unwrap();
    for alg in ["tournament", "mindist", "modified", "minloss", "efficient"] {
        let r = select(dir.path(), alg);
        assert_eq!(r["selected_name"], "only");
        assert_eq!((r["h_products"].as_u64(), r["term_evaluations"].as_u64()), (Some(0), Some(0)));
    }
}

#[test]
fn randomized_needs_two_candidates() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&gen(dir.path(), &["--example", "nine"])), 0);
    let out = densel(&[
        "select",
        "--family",
        dir.path().join("family.json").to_str().unwrap(),
        "--empirical",
        dir.path().join("empirical.json").to_str().unwrap(),
        "--algorithm",
        "randomized",
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn randomized_reports_mixture_weights() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&gen(dir.path(), &["--example", "three"])), 0);
    let r = select(dir.path(), "randomized");
    let w: Vec<f64> = r["mixture"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(w, [0.5, 0.5]);
    assert_eq!((r["h_products"].as_u64(), r["term_evaluations"].as_u64()), (Some(1), Some(2)));
}

#[test]
fn malformed_input_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("family.json");
    std::fs::write(&bad, "{ not json").unwrap();
    std::fs::write(dir.path().join("empirical.json"), r#"{"mass": [1.0]}"#).unwrap();
    let out = densel(&[
        "select",
        "--family",
        bad.to_str().unwrap(),
        "--empirical",
        dir.path().join("empirical.json").to_str().unwrap(),
        "--algorithm",
        "tournament",
    ]);
    assert_eq!(code(&out), 2);
    assert_eq!(code(&densel(&["select", "--algorithm", "nope"])), 2);
}

#[test]
fn samples_aggregate_to_frequencies() {
    let dir = TempDir::new().unwrap();
    let support = Support::new(vec!["a".into(), "b".into(), "c".into()]).unwrap();
    let path = dir.path().join("h.json");
    std::fs::write(&path, r#"{"samples": ["a", "c", "c", "a", "c"]}"#).unwrap();
    let h = load_empirical(&path, &support).unwrap();
    assert_eq!(h.mass(), &[0.4, 0.0, 0.6]);
    assert_eq!(h.sample_count(), Some(5));

    std::fs::write(&path, r#"{"samples": ["a", "z"]}"#).unwrap();
    let err = load_empirical(&path, &support).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("\"z\""));
}

#[test]
fn bench_counts_match_closed_forms() {
    let rows = bench_rows(&[1, 8], 5, 7).unwrap();
    let get = |m: usize, alg: Algorithm| {
        let r = rows.iter().find(|r| r.family_size == m && r.algorithm == alg).unwrap();
        (r.h_products, r.term_evaluations)
    };
    assert_eq!(get(8, Algorithm::EfficientMinLossWeight), (7, 0));
    assert_eq!(get(8, Algorithm::Tournament), (28, 0));
    assert_eq!(get(8, Algorithm::MinDistance).1, 448);
    assert_eq!(get(8, Algorithm::ModifiedMinDistance).1, 56);
    for r in rows.iter().filter(|r| r.family_size == 1) {
        assert_eq!((r.h_products, r.term_evaluations), (0, 0), "{r:?}");
    }
    assert!(rows.iter().all(|r| r.algorithm != Algorithm::Randomized));
}

#[test]
fn bench_writes_csv() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bench.csv");
    let out = densel(&["bench", "--sizes", "2,4", "--omega", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let mut reader = csv::Reader::from_path(&path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(str::to_owned).collect();
    assert_eq!(header, ["family_size", "algorithm", "h_products", "term_evaluations", "wall_time_ns"]);
    let rows: Vec<BenchRow> = reader.deserialize().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 6 + 5);
    assert_eq!(rows.iter().filter(|r| r.algorithm == Algorithm::Randomized).count(), 1);

    let mut buf = Vec::new();
    write_bench_csv(&rows, &mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("family_size,algorithm"));

    assert_eq!(code(&densel(&["bench", "--sizes", "0"])), 3);
    let unwritable = dir.path().join("missing").join("bench.csv");
    assert_eq!(code(&densel(&["bench", "--sizes", "2", "--out", unwritable.to_str().unwrap()])), 3);
}

#[test]
fn generated_three_reproduces_closed_forms() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&gen(dir.path(), &["--example", "three", "--eps", "0.001"])), 0);
    let family = load_family(&dir.path().join("family.json")).unwrap();
    let truth = match read_json::<EmpiricalFile>(&dir.path().join("truth.json")).unwrap() {
        EmpiricalFile::Mass { mass, .. } => mass,
        other => panic!("unexpected {other:?}"),
    };
    let eps = 0.001;
    let e1 = l1_distance(family.mass(0).unwrap(), &truth).unwrap();
    let e2 = l1_distance(family.mass(1).unwrap(), &truth).unwrap();
    assert!((e1 - (1.5 - 2.0 * eps)).abs() <= 1e-12);
    assert!((e2 - (0.5 + 2.0 * eps)).abs() <= 1e-12);
    let h = load_empirical(&dir.path().join("empirical.json"), family.support()).unwrap();
    assert_eq!(h.mass(), truth.as_slice());
}

#[test]
fn gen_guards_parameters() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&gen(dir.path(), &["--example", "nine", "--eps", "0.1"])), 3);
    assert_eq!(code(&gen(dir.path(), &["--example", "three", "--eps", "0.3"])), 3);
    assert_eq!(code(&gen(dir.path(), &["--example", "vcdim", "--n", "9"])), 3);
    assert!(!dir.path().join("family.json").exists());
}

#[test]
fn vcdim_family_has_two_to_the_n_plus_one_members() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&gen(dir.path(), &["--example", "vcdim", "--n", "4"])), 0);
    let family = load_family(&dir.path().join("family.json")).unwrap();
    assert_eq!(family.len(), 32);
    assert_eq!(family.support().len(), 5);
    assert!(!dir.path().join("empirical.json").exists());
}

#[test]
fn random_example_is_seeded() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [&a, &b] {
        assert_eq!(code(&gen(dir.path(), &["--example", "random", "--seed", "42"])), 0);
    }
    for file in ["family.json", "empirical.json", "truth.json"] {
        assert_eq!(
            std::fs::read(a.path().join(file)).unwrap(),
            std::fs::read(b.path().join(file)).unwrap()
        );
    }
}

#[test]
fn file_round_trip_is_bit_exact() {
    let dir = TempDir::new().unwrap();
    for seed in 0..50 {
        let inst = random_instance(seed, 7, 5, 0.2).unwrap();
        let fpath = dir.path().join("f.json");
        let hpath = dir.path().join("h.json");
        write_json(&fpath, &FamilyFile::from_family(&inst.family)).unwrap();
        write_json(&hpath, &EmpiricalFile::from_empirical(&inst.empirical)).unwrap();
        let family = load_family(&fpath).unwrap();
        let h = load_empirical(&hpath, family.support()).unwrap();
        for i in 0..family.len() {
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(family.mass(i).unwrap()), bits(inst.family.mass(i).unwrap()));
        }
        assert_eq!(family, inst.family);
        assert_eq!(h, inst.empirical);
    }
}

#[test]
fn verify_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let dump = dir.path().join("cx.json");
    let args = ["verify", "--trials", "1", "--seed", "99", "--dump", dump.to_str().unwrap()];
    let a = densel(&args);
    let b = densel(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let summary: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(summary["first_failure"], serde_json::Value::Null);
    assert!(!dump.exists());
}

#[test]
fn verify_restricted_mode_passes() {
    let out = densel(&["verify", "--trials", "300", "--seed", "4", "--delta-mode", "restricted"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn verify_fault_mode_reports_its_outcome() {
    let dir = TempDir::new().unwrap();
    let dump = dir.path().join("cx.json");
    let out = densel(&[
        "verify",
        "--trials",
        "500",
        "--seed",
        "8",
        "--dump",
        dump.to_str().unwrap(),
        "--fault-draw-removes-first",
    ]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("fault mode"), "{stderr}");
    // either outcome is acceptable, but a failure must leave a counterexample
    match code(&out) {
        0 => assert!(stderr.contains("still passes") && !dump.exists()),
        1 => assert!(dump.exists()),
        c => panic!("unexpected exit {c}: {stderr}"),
    }
}

#[test]
fn verify_rejects_zero_trials() {
    assert_eq!(code(&densel(&["verify", "--trials", "0"])), 3);
}
