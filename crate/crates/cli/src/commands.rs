use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use densel_core::instances::{gen_lower_bound_3, gen_lower_bound_9, gen_vc_family, random_instance, Instance};
use densel_core::oracle::DeltaMode;
use densel_core::selectors::{self, Algorithm, DrawPolicy};
use densel_core::sweep::{run_sweep, SweepConfig, SweepSummary};
use densel_core::{preprocess, Family, Ledger, SelectionReport};
use serde::Serialize;

use crate::files::{load_empirical, load_family, write_json, EmpiricalFile, FamilyFile};
use crate::CliError;

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn select_report(
    algorithm: Algorithm,
    family: &Family,
    h: &densel_core::EmpiricalDistribution,
    seed: u64,
) -> Result<SelectionReport, CliError> {
    if h.len() != family.support().len() {
        return Err(CliError::Invalid(format!(
            "empirical distribution has {} atoms, family support has {}",
            h.len(),
            family.support().len()
        )));
    }
    let prep = preprocess(family).map_err(CliError::invalid)?;
    selectors::run(algorithm, &prep, h, seed, &mut Ledger::new()).map_err(CliError::invalid)
}

/// Runs one selector and returns the report as JSON.
pub fn select(family: &Path, empirical: &Path, algorithm: Algorithm, seed: u64) -> Result<String, CliError> {
    let family = load_family(family)?;
    let h = load_empirical(empirical, family.support())?;
    let report = select_report(algorithm, &family, &h, seed)?;
    Ok(to_json(&report))
}

pub struct VerifyArgs {
    pub trials: u64,
    pub max_omega: usize,
    pub max_family: usize,
    pub seed: u64,
    pub delta_mode: DeltaMode,
    pub fault_draw_removes_first: bool,
    pub dump: PathBuf,
}

pub struct VerifyOutput {
    pub summary: SweepSummary,
    pub json: String,
    /// Where the counterexample went, if any check failed.
    pub dump: Option<PathBuf>,
}

pub fn verify(args: &VerifyArgs) -> Result<VerifyOutput, CliError> {
    if args.trials == 0 || args.max_omega == 0 || args.max_family == 0 {
        return Err(CliError::Invalid("--trials, --max-omega and --max-family must be at least 1".into()));
    }
    let config = SweepConfig {
        trials: args.trials,
        max_omega: args.max_omega,
        max_family: args.max_family,
        seed: args.seed,
        delta_mode: args.delta_mode,
        draw_policy: if args.fault_draw_removes_first {
            DrawPolicy::RemoveFirst
        } else {
            DrawPolicy::RemoveSecond
        },
    };
    let summary = run_sweep(&config).map_err(CliError::invalid)?;
    let dump = match &summary.first_failure {
        Some(failure) => {
            write_json(&args.dump, failure)?;
            Some(args.dump.clone())
        }
        None => None,
    };
    Ok(VerifyOutput {
        json: to_json(&summary),
        summary,
        dump,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct BenchRow {
    pub family_size: usize,
    pub algorithm: Algorithm,
    pub h_products: u64,
    pub term_evaluations: u64,
    pub wall_time_ns: u128,
}

/// One row per (size, algorithm). The randomized selector only takes two
/// candidates, so it appears only for size 2.
pub fn bench_rows(sizes: &[usize], omega: usize, seed: u64) -> Result<Vec<BenchRow>, CliError> {
    if sizes.contains(&0) || omega == 0 {
        return Err(CliError::Invalid("sizes and --omega must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for &m in sizes {
        let inst = random_instance(seed ^ m as u64, omega, m, 0.05).map_err(CliError::invalid)?;
        let prep = preprocess(&inst.family).map_err(CliError::invalid)?;
        for alg in Algorithm::ALL {
            if alg == Algorithm::Randomized && m != 2 {
                continue;
            }
            let start = Instant::now();
            let r = selectors::run(alg, &prep, &inst.empirical, seed, &mut Ledger::new());
            let wall_time_ns = start.elapsed().as_nanos();
            let r = match r {
                Ok(r) => r,
                // two identical members: nothing to randomize over
                Err(densel_core::Error::DegeneratePair) => continue,
                Err(e) => return Err(CliError::invalid(e)),
            };
            rows.push(BenchRow {
                family_size: m,
                algorithm: alg,
                h_products: r.h_products,
                term_evaluations: r.term_evaluations,
                wall_time_ns,
            });
        }
    }
    Ok(rows)
}

pub fn write_bench_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Example {
    Three,
    Nine,
    Vcdim,
    Random,
}

pub struct GenArgs {
    pub example: Example,
    pub eps: f64,
    pub n: usize,
    pub seed: u64,
    pub omega: usize,
    pub family_size: usize,
    pub noise: f64,
    pub out: PathBuf,
}

fn write_instance(inst: &Instance, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let files = [out.join("family.json"), out.join("empirical.json"), out.join("truth.json")];
    write_json(&files[0], &FamilyFile::from_family(&inst.family))?;
    write_json(&files[1], &EmpiricalFile::from_empirical(&inst.empirical))?;
    write_json(&files[2], &EmpiricalFile::from_mass(&inst.truth))?;
    Ok(files.to_vec())
}

/// Writes the chosen example into `out` and returns the written paths.
pub fn gen(args: &GenArgs) -> Result<Vec<PathBuf>, CliError> {
    let inst = match args.example {
        Example::Three => gen_lower_bound_3(args.eps),
        Example::Nine => gen_lower_bound_9(args.eps),
        Example::Random => random_instance(args.seed, args.omega, args.family_size, args.noise),
        Example::Vcdim => {
            let family = gen_vc_family(args.n).map_err(CliError::invalid)?;
            std::fs::create_dir_all(&args.out).map_err(|e| CliError::Io(format!("{}: {e}", args.out.display())))?;
            let path = args.out.join("family.json");
            write_json(&path, &FamilyFile::from_family(&family))?;
            return Ok(vec![path]);
        }
    }
    .map_err(CliError::invalid)?;
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::Io(format!("{}: {e}", args.out.display())))?;
    write_instance(&inst, &args.out)
}
