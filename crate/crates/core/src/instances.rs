//! Instance generators: the two lower-bound constructions, the family whose
//! per-member Scheffé classes are much simpler than the full class, seeded
//! random instances, and i.i.d. sampling of empirical distributions.

use rand::distributions::WeightedIndex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::density::{check_distribution, Candidate, EmpiricalDistribution, Family, Support};
use crate::error::{Error, Result};
use crate::rng::{seeded_rng, SeededRng};

/// A family with a known truth `g` and an empirical distribution `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub family: Family,
    pub truth: Vec<f64>,
    pub empirical: EmpiricalDistribution,
    pub label: String,
}

const SWAP_SUFFIX: &str = " [swapped]";

fn out_of_range(msg: String) -> Error {
    Error::ParameterOutOfRange(msg)
}

/// Two members that any deterministic test-function rule must confuse.
///
/// | | A1 | A2 | A3 | A4 |
/// |---|---|---|---|---|
/// | f1 | 0 | 1/4+ε | 1/2 | 1/4-ε |
/// | f2 | 1/2+ε | 1/4-ε | 0 | 1/4 |
/// | g = h | 1/2 | 1/2 | 0 | 0 |
pub fn gen_lower_bound_3(eps: f64) -> Result<Instance> {
    if !(eps > 0.0 && eps < 0.25) {
        return Err(out_of_range(format!("eps must lie in (0, 1/4), got {eps}")));
    }
    let family = Family::new(
        Support::with_size(4)?,
        vec![
            Candidate::new("f1", vec![0.0, 0.25 + eps, 0.5, 0.25 - eps])?,
            Candidate::new("f2", vec![0.5 + eps, 0.25 - eps, 0.0, 0.25])?,
        ],
    )?;
    let g = vec![0.5, 0.5, 0.0, 0.0];
    Ok(Instance {
        family,
        empirical: EmpiricalDistribution::new(g.clone())?,
        truth: g,
        label: format!("lower-bound-3 eps={eps}"),
    })
}

/// Swaps the two members (names travel with their masses). An involution.
pub fn swap_family(instance: &Instance) -> Result<Instance> {
    let m = instance.family.len();
    if m != 2 {
        return Err(Error::FamilySize {
            expected: 2,
            found: m,
        });
    }
    let label = match instance.label.strip_suffix(SWAP_SUFFIX) {
        Some(base) => base.to_owned(),
        None => format!("{}{SWAP_SUFFIX}", instance.label),
    };
    Ok(Instance {
        family: instance.family.permuted(&[1, 0])?,
        truth: instance.truth.clone(),
        empirical: instance.empirical.clone(),
        label,
    })
}

/// Four members `{f1, f2, f3, f3'}` on which the tournament picks `f1`
/// even with `h = g`, while `f2` is nearly nine times closer to `g`.
pub fn gen_lower_bound_9(eps: f64) -> Result<Instance> {
    if !(eps > 0.0 && eps <= 1.0 / 60.0) {
        return Err(out_of_range(format!("eps must lie in (0, 1/60], got {eps}")));
    }
    let e = eps;
    let g = vec![
        2.0 / 3.0 - 21.0 * e,
        1.0 / 9.0 - 2.0 * e,
        9.0 * e,
        0.0,
        2.0 / 9.0 + 14.0 * e,
        0.0,
    ];
    let f1 = vec![
        0.0,
        18.0 * e,
        2.0 / 3.0 - 12.0 * e,
        2.0 / 9.0 - 13.0 * e,
        9.0 * e,
        1.0 / 9.0 - 2.0 * e,
    ];
    let f2 = vec![
        2.0 / 3.0 - 30.0 * e,
        0.0,
        0.0,
        0.0,
        2.0 / 9.0 + 14.0 * e,
        1.0 / 9.0 + 16.0 * e,
    ];
    let f3 = vec![
        2.0 / 3.0 - 21.0 * e,
        9.0 * e,
        9.0 * e,
        2.0 / 9.0 - 4.0 * e,
        0.0,
        1.0 / 9.0 + 7.0 * e,
    ];
    let family = Family::new(
        Support::with_size(6)?,
        vec![
            Candidate::new("f1", f1)?,
            Candidate::new("f2", f2)?,
            Candidate::new("f3", f3.clone())?,
            Candidate::new("f3'", f3)?,
        ],
    )?;
    Ok(Instance {
        family,
        empirical: EmpiricalDistribution::new(g.clone())?,
        truth: g,
        label: format!("lower-bound-9 eps={eps}"),
    })
}

/// The `2^(n+1)` members indexed by bit strings `a_0 a_1 .. a_n` over atoms
/// `0..=n`:
///
/// `P(k) = (1/(4n)) (1 + (1/2 - a_0)(1/2 - a_k)) 2^(-Σ_{j>=1} a_j 2^j)` for
/// `k >= 1`, with `P(0)` the remaining mass.
pub fn gen_vc_family(n: usize) -> Result<Family> {
    if !(2..=6).contains(&n) {
        return Err(out_of_range(format!("n must lie in 2..=6, got {n}")));
    }
    let support = Support::new((0..=n).map(|k| k.to_string()).collect())?;
    let mut candidates = Vec::with_capacity(1 << (n + 1));
    for code in 0u32..(1 << (n + 1)) {
        // a_0 is the leading character of the name
        let bits: Vec<u32> = (0..=n).map(|b| (code >> (n - b)) & 1).collect();
        let exponent: i32 = (1..=n).map(|j| (bits[j] << j) as i32).sum();
        let scale = 2f64.powi(-exponent) / (4.0 * n as f64);
        let half = |a: u32| 0.5 - f64::from(a);
        let mut mass = vec![0.0; n + 1];
        for k in 1..=n {
            mass[k] = scale * (1.0 + half(bits[0]) * half(bits[k]));
        }
        let residual = 1.0 - mass[1..].iter().sum::<f64>();
        if residual < 0.0 {
            return Err(out_of_range(format!(
                "negative residual mass {residual} for n={n}"
            )));
        }
        mass[0] = residual;
        let name: String = bits.iter().map(|b| char::from(b'0' + *b as u8)).collect();
        candidates.push(Candidate::new(name, mass)?);
    }
    Family::new(support, candidates)
}

fn random_distribution(rng: &mut SeededRng, k: usize) -> Vec<f64> {
    // (0, 1] so every atom carries mass
    let raw: Vec<f64> = (0..k).map(|_| 1.0 - rng.gen::<f64>()).collect();
    normalized(raw)
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let sum: f64 = v.iter().sum();
    v.into_iter().map(|x| x / sum).collect()
}

/// A seeded random instance: `m` members on `k` atoms, a truth that is either
/// fresh or a perturbed member, and `h` equal to the truth plus atomwise
/// uniform noise of amplitude `noise` (clipped at zero, renormalized).
pub fn random_instance(seed: u64, k: usize, m: usize, noise: f64) -> Result<Instance> {
    if k == 0 || m == 0 {
        return Err(out_of_range(format!("need k >= 1 and m >= 1, got k={k}, m={m}")));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(out_of_range(format!("noise must be finite and >= 0, got {noise}")));
    }
    let mut rng = seeded_rng(seed);
    let members: Vec<Vec<f64>> = (0..m).map(|_| random_distribution(&mut rng, k)).collect();
    let truth = if rng.gen_bool(0.5) {
        random_distribution(&mut rng, k)
    } else {
        let base = &members[rng.gen_range(0..m)];
        let jitter = rng.gen_range(0.0..0.3);
        normalized(
            base.iter()
                .map(|&x| (x + jitter * rng.gen::<f64>()).max(0.0))
                .collect(),
        )
    };
    let h = if noise == 0.0 {
        truth.clone()
    } else {
        let noisy: Vec<f64> = truth
            .iter()
            .map(|&x| (x + noise * (2.0 * rng.gen::<f64>() - 1.0)).max(0.0))
            .collect();
        if noisy.iter().sum::<f64>() > 0.0 {
            normalized(noisy)
        } else {
            truth.clone()
        }
    };
    Ok(Instance {
        family: Family::from_masses(members)?,
        empirical: EmpiricalDistribution::new(h)?,
        truth,
        label: format!("random seed={seed} k={k} m={m} noise={noise}"),
    })
}

/// `n` i.i.d. draws from `g`, returned as normalized counts.
pub fn sample_empirical(g: &[f64], n: u64, seed: u64) -> Result<EmpiricalDistribution> {
    check_distribution(g)?;
    if n == 0 {
        return Err(out_of_range("need at least one sample".into()));
    }
    let dist = WeightedIndex::new(g).map_err(|e| out_of_range(e.to_string()))?;
    let mut rng = seeded_rng(seed);
    let mut counts = vec![0u64; g.len()];
    for _ in 0..n {
        counts[rng.sample(&dist)] += 1;
    }
    EmpiricalDistribution::from_counts(&counts)
}
