//! Brute-force verifiers.
//!
//! Nothing here reuses the selectors' shortcuts: the best member is found by
//! exhaustive search, wins are decided from the raw inequality
//! `(f_i - h)·T_ij < (f_j - h)·T_ji`, and loss-weights are recomputed from
//! scratch.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};

use crate::density::{
    delta, delta_restricted, difference, inner_product, l1_distance, scheffe_set, scheffe_win,
    test_function, EmpiricalDistribution, Family, Outcome,
};
use crate::error::{Error, Result};
use crate::ledger::Ledger;
use crate::preprocess::PreprocessedFamily;
use crate::selectors::{LossReading, LossWeightValue};

/// Slack allowed on every bound check.
pub const BOUND_SLACK: f64 = 1e-9;

/// Largest domain the shattering search will enumerate.
pub const MAX_VC_DOMAIN: usize = 12;

/// Largest family whose Scheffé class is handed to the VC search.
pub const MAX_VC_FAMILY: usize = 64;

/// Exhaustive argmin of `‖f - g‖₁`, lowest index on ties.
pub fn best_in_family(family: &Family, g: &[f64]) -> Result<(usize, f64)> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut best = (0, f64::INFINITY);
    for i in 0..family.len() {
        let d = l1_distance(family.mass(i)?, g)?;
        if d < best.1 {
            best = (i, d);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaMode {
    #[default]
    Full,
    /// Only the test-functions of the member closest to `g`.
    Restricted,
}

/// `lhs <= a·d₁ + b·Δ` with `margin = rhs - lhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub a: f64,
    pub b: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

impl BoundCheck {
    fn new(a: f64, b: f64, lhs: f64, d1: f64, delta: f64) -> Self {
        let rhs = a * d1 + b * delta;
        let margin = rhs - lhs;
        Self {
            a,
            b,
            lhs,
            rhs,
            margin,
            pass: margin >= -BOUND_SLACK,
        }
    }
}

fn deviation(
    family: &Family,
    g: &[f64],
    h: &EmpiricalDistribution,
    mode: DeltaMode,
) -> Result<(f64, f64)> {
    let (best, d1) = best_in_family(family, g)?;
    let dev = match mode {
        DeltaMode::Full => delta(g, h, family)?,
        DeltaMode::Restricted => delta_restricted(g, h, family, best)?,
    };
    Ok((d1, dev))
}

/// Checks `‖f_selected - g‖₁ <= a·d₁(g, F) + b·Δ`.
pub fn check_bound(
    selected: usize,
    family: &Family,
    g: &[f64],
    h: &EmpiricalDistribution,
    a: f64,
    b: f64,
    mode: DeltaMode,
) -> Result<BoundCheck> {
    let lhs = l1_distance(family.mass(selected)?, g)?;
    let (d1, dev) = deviation(family, g, h, mode)?;
    Ok(BoundCheck::new(a, b, lhs, d1, dev))
}

/// Same as [`check_bound`] with the expected error of a randomized choice
/// (`weights[i]` = probability of outputting member `i`) on the left.
pub fn check_expected_bound(
    weights: &[f64],
    family: &Family,
    g: &[f64],
    h: &EmpiricalDistribution,
    a: f64,
    b: f64,
    mode: DeltaMode,
) -> Result<BoundCheck> {
    if weights.len() != family.len() {
        return Err(Error::FamilySize {
            expected: family.len(),
            found: weights.len(),
        });
    }
    let mut lhs = 0.0;
    for (i, w) in weights.iter().enumerate() {
        lhs += w * l1_distance(family.mass(i)?, g)?;
    }
    let (d1, dev) = deviation(family, g, h, mode)?;
    Ok(BoundCheck::new(a, b, lhs, d1, dev))
}

/// The win relation evaluated literally from both sides of the defining
/// inequality.
pub fn direct_win(fi: &[f64], fj: &[f64], h: &[f64]) -> Result<Outcome> {
    let tij = test_function(fi, fj)?;
    let tji = test_function(fj, fi)?;
    let lhs = inner_product(&difference(fi, h)?, &tij)?;
    let rhs = inner_product(&difference(fj, h)?, &tji)?;
    // f_i wins when its side is the smaller one
    Ok(Outcome::from_gap(rhs, lhs))
}

/// Loss-weights of every member, from scratch.
pub fn brute_force_loss_weights(
    family: &Family,
    h: &EmpiricalDistribution,
) -> Result<Vec<LossWeightValue>> {
    let m = family.len();
    (0..m)
        .map(|i| {
            let fi = family.mass(i)?;
            let mut lw = LossWeightValue::UNBEATEN;
            for j in (0..m).filter(|&j| j != i) {
                let fj = family.mass(j)?;
                if direct_win(fi, fj, h.mass())? != Outcome::FirstWins {
                    let d = l1_distance(fi, fj)?;
                    if d > lw.value {
                        lw = LossWeightValue {
                            value: d,
                            witness: Some(j),
                        };
                    }
                }
            }
            Ok(lw)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub pass: bool,
    /// Smallest `C·loss-weight(f') - ‖f - f'‖₁` over the checked `f'`;
    /// `None` when nothing is checked.
    pub margin: Option<f64>,
}

/// Output condition of the elimination selector, `‖f - f'‖₁ <=
/// C·loss-weight(f')` for every `f'` that strictly beats `f`, against
/// brute-force loss-weights.
pub fn check_4b_invariant(
    prep: &PreprocessedFamily,
    h: &EmpiricalDistribution,
    selected: usize,
    c: f64,
) -> Result<bool> {
    Ok(check_4b_invariant_with(prep, h, selected, c, LossReading::StrictLoss)?.pass)
}

pub fn check_4b_invariant_with(
    prep: &PreprocessedFamily,
    h: &EmpiricalDistribution,
    selected: usize,
    c: f64,
    reading: LossReading,
) -> Result<InvariantCheck> {
    if c.is_nan() || c < 1.0 {
        return Err(Error::ParameterOutOfRange(format!("C must be >= 1, got {c}")));
    }
    let family = prep.family();
    let fs = family.mass(selected)?;
    let weights = brute_force_loss_weights(family, h)?;
    let mut margin: Option<f64> = None;
    for other in (0..family.len()).filter(|&o| o != selected) {
        let fo = family.mass(other)?;
        if reading.applies(direct_win(fs, fo, h.mass())?) {
            let slack = c * weights[other].value - l1_distance(fs, fo)?;
            margin = Some(margin.map_or(slack, |m| m.min(slack)));
        }
    }
    Ok(InvariantCheck {
        pass: margin.is_none_or(|m| m >= 0.0),
        margin,
    })
}

/// Does the ledgered threshold comparison agree with the Scheffé-set rule?
///
/// The two rules coincide whenever `f_i` and `f_j` differ on every atom, or
/// more generally when `f_i` and `h` put equal mass on the atoms where
/// `f_i = f_j`.
pub fn check_win_equivalence(fi: &[f64], fj: &[f64], h: &[f64]) -> Result<bool> {
    let set_rule = scheffe_win(fi, fj, h)?;
    let family = Family::from_masses(vec![fi.to_vec(), fj.to_vec()])?;
    let prep = PreprocessedFamily::new(family)?;
    let h = EmpiricalDistribution::new(h.to_vec())?;
    let threshold_rule = prep.compare(0, 1, &h, &mut Ledger::new())?;
    Ok(set_rule == threshold_rule)
}

/// `(f_i - f_j)·(T_ij - T_kl)`, which is never negative.
pub fn check_quadruple(fi: &[f64], fj: &[f64], fk: &[f64], fl: &[f64]) -> Result<f64> {
    let tij = test_function(fi, fj)?;
    let tkl = test_function(fk, fl)?;
    if tkl.len() != tij.len() {
        return Err(Error::SupportMismatch {
            expected: tij.len(),
            found: tkl.len(),
        });
    }
    Ok(fi
        .iter()
        .zip(fj)
        .zip(tij.signs().iter().zip(tkl.signs()))
        .map(|((a, b), (s, t))| (a - b) * f64::from(s - t))
        .sum())
}

/// Distinct subsets of `{0, .., domain-1}`, each stored as sorted atoms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetSystem {
    pub domain: usize,
    pub sets: BTreeSet<Vec<usize>>,
}

impl SetSystem {
    pub fn new(domain: usize, sets: impl IntoIterator<Item = Vec<usize>>) -> Result<Self> {
        let mut out = BTreeSet::new();
        for mut s in sets {
            s.sort_unstable();
            s.dedup();
            if let Some(&x) = s.iter().find(|&&x| x >= domain) {
                return Err(Error::IndexOutOfRange {
                    index: x,
                    len: domain,
                });
            }
            out.insert(s);
        }
        Ok(Self { domain, sets: out })
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    fn masks(&self) -> Result<Vec<u32>> {
        if self.domain > MAX_VC_DOMAIN {
            return Err(Error::Capacity {
                what: "domain",
                size: self.domain,
                limit: MAX_VC_DOMAIN,
            });
        }
        Ok(self
            .sets
            .iter()
            .map(|s| s.iter().fold(0u32, |acc, &x| acc | (1 << x)))
            .collect())
    }
}

/// All Scheffé sets `A_ij`, `i != j`.
pub fn yatracos_class(family: &Family) -> Result<SetSystem> {
    let m = family.len();
    let mut sets = Vec::with_capacity(m * m.saturating_sub(1));
    for i in 0..m {
        for j in (0..m).filter(|&j| j != i) {
            sets.push(scheffe_set(family.mass(i)?, family.mass(j)?)?);
        }
    }
    SetSystem::new(family.support().len(), sets)
}

/// The Scheffé sets `A_ij` of one member `i`.
pub fn restricted_yatracos_class(family: &Family, i: usize) -> Result<SetSystem> {
    let fi = family.mass(i)?;
    let sets = (0..family.len())
        .filter(|&j| j != i)
        .map(|j| scheffe_set(fi, family.mass(j)?))
        .collect::<Result<Vec<_>>>()?;
    SetSystem::new(family.support().len(), sets)
}

/// Size of the largest shattered subset, found by checking every subset of
/// the domain. An empty system shatters nothing and reports 0.
pub fn vc_dimension(system: &SetSystem) -> Result<usize> {
    let masks = system.masks()?;
    let mut best = 0;
    let mut seen = vec![false; 1 << system.domain];
    for subset in 0u32..(1 << system.domain) {
        let size = subset.count_ones() as usize;
        if size <= best {
            continue;
        }
        seen.iter_mut().for_each(|s| *s = false);
        let mut distinct = 0usize;
        for &m in &masks {
            let trace = (m & subset) as usize;
            if !seen[trace] {
                seen[trace] = true;
                distinct += 1;
            }
        }
        if distinct == 1 << size {
            best = size;
        }
    }
    Ok(best)
}

/// Same quantity as [`vc_dimension`], grown level by level: `S ∪ {x}` is
/// shattered iff every trace on `S` occurs both with and without `x`.
pub fn vc_dimension_incremental(system: &SetSystem) -> Result<usize> {
    let masks = system.masks()?;
    if masks.is_empty() {
        return Ok(0);
    }
    let mut level: Vec<u32> = vec![0];
    let mut dim = 0;
    loop {
        let mut next = Vec::new();
        for &s in &level {
            let start = 32 - s.leading_zeros() as usize;
            for x in start..system.domain {
                let bit = 1u32 << x;
                let mut flags: HashMap<u32, u8> = HashMap::new();
                for &m in &masks {
                    let with_x = if m & bit != 0 { 2 } else { 1 };
                    *flags.entry(m & s).or_default() |= with_x;
                }
                let size = s.count_ones();
                if flags.len() == 1 << size && flags.values().all(|&f| f == 3) {
                    next.push(s | bit);
                }
            }
        }
        if next.is_empty() {
            return Ok(dim);
        }
        dim += 1;
        level = next;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyVc {
    /// VC dimension of the full Scheffé class.
    pub full: usize,
    /// Largest VC dimension among the per-member classes.
    pub max_restricted: usize,
    pub per_member: Vec<usize>,
}

pub fn family_vc(family: &Family) -> Result<FamilyVc> {
    if family.len() > MAX_VC_FAMILY {
        return Err(Error::Capacity {
            what: "family",
            size: family.len(),
            limit: MAX_VC_FAMILY,
        });
    }
    let full = vc_dimension(&yatracos_class(family)?)?;
    let per_member = (0..family.len())
        .map(|i| vc_dimension(&restricted_yatracos_class(family, i)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(FamilyVc {
        full,
        max_restricted: per_member.iter().copied().max().unwrap_or(0),
        per_member,
    })
}
