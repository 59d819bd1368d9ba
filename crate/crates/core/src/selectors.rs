//! The selection procedures.
//!
//! Each selector takes a family (usually preprocessed), the empirical
//! distribution `h` and a [`Ledger`], and returns a [`SelectionReport`] whose
//! counters are the ledger increments made during that run.
//!
//! | algorithm | rule | `h` products | terms |
//! |-----------|------|--------------|-------|
//! | [`scheffe_tournament`] | most wins | m(m-1)/2 | 0 |
//! | [`min_distance`] | min over f of max over all ordered pairs of \|(f-h)·T\| | m(m-1)/2 | m²(m-1) |
//! | [`modified_min_distance`] | min over i of max over j of \|(f_i-h)·T_ij\| | m(m-1)/2 | m(m-1) |
//! | [`min_loss_weight`] | min loss-weight | m(m-1)/2 | 0 |
//! | [`efficient_min_loss_weight`] | elimination along the sorted pair list | m-1 | 0 |
//! | [`randomized_two`] | mixture of two candidates | 1 | 2 |
//!
//! Ties are always broken towards the lowest index.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::density::{inner_product, test_function, EmpiricalDistribution, Family, Outcome};
use crate::error::{Error, Result};
use crate::ledger::Ledger;
use crate::preprocess::PreprocessedFamily;
use crate::rng::seeded_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Tournament,
    #[serde(rename = "mindist")]
    MinDistance,
    #[serde(rename = "modified")]
    ModifiedMinDistance,
    #[serde(rename = "minloss")]
    MinLossWeight,
    #[serde(rename = "efficient")]
    EfficientMinLossWeight,
    Randomized,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Tournament,
        Algorithm::MinDistance,
        Algorithm::ModifiedMinDistance,
        Algorithm::MinLossWeight,
        Algorithm::EfficientMinLossWeight,
        Algorithm::Randomized,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Tournament => "tournament",
            Algorithm::MinDistance => "mindist",
            Algorithm::ModifiedMinDistance => "modified",
            Algorithm::MinLossWeight => "minloss",
            Algorithm::EfficientMinLossWeight => "efficient",
            Algorithm::Randomized => "randomized",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::ParameterOutOfRange(format!("unknown algorithm {s:?}")))
    }
}

/// One comparison made during a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub i: usize,
    pub j: usize,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub removed: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub algorithm: Algorithm,
    pub selected: usize,
    pub selected_name: String,
    pub h_products: u64,
    pub term_evaluations: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<Vec<TraceEvent>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    /// `(p, 1 - p)`: probabilities of outputting the first and second member.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mixture: Option<(f64, f64)>,
}

impl SelectionReport {
    fn build(
        algorithm: Algorithm,
        family: &Family,
        selected: usize,
        before: Ledger,
        after: &Ledger,
    ) -> Result<Self> {
        Ok(Self {
            algorithm,
            selected,
            selected_name: family.name(selected)?.to_owned(),
            h_products: after.h_products() - before.h_products(),
            term_evaluations: after.term_evaluations() - before.term_evaluations(),
            trace: None,
            seed: None,
            mixture: None,
        })
    }
}

/// `loss-weight(f_i)`: the largest distance to a member `f_i` does not beat.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeightValue {
    /// `-inf` when `f_i` beats everyone.
    pub value: f64,
    pub witness: Option<usize>,
}

impl LossWeightValue {
    pub const UNBEATEN: Self = Self {
        value: f64::NEG_INFINITY,
        witness: None,
    };
}

/// What happens to the pair when the comparison in the elimination loop is
/// a draw.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum DrawPolicy {
    /// Remove `f_j`, the second endpoint (the `else` branch).
    #[default]
    RemoveSecond,
    /// Remove `f_i`. Only used to self-test the verifiers.
    RemoveFirst,
}

/// Which members the loss-weight output condition is checked against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossReading {
    /// Members that strictly beat the selected one.
    #[default]
    StrictLoss,
    /// Members the selected one does not beat (draws included).
    NotWin,
}

impl LossReading {
    pub(crate) fn applies(self, outcome: Outcome) -> bool {
        match self {
            LossReading::StrictLoss => outcome == Outcome::SecondWins,
            LossReading::NotWin => outcome != Outcome::FirstWins,
        }
    }
}

fn nonempty(family: &Family) -> Result<usize> {
    match family.len() {
        0 => Err(Error::EmptyFamily),
        m => Ok(m),
    }
}

/// Outcomes of every unordered pair, stored in both orientations.
/// Costs `m(m-1)/2` products.
pub(crate) fn outcome_matrix(
    prep: &PreprocessedFamily,
    h: &EmpiricalDistribution,
    ledger: &mut Ledger,
) -> Result<Vec<Vec<Outcome>>> {
    let m = prep.len();
    let mut out = vec![vec![Outcome::Draw; m]; m];
    for i in 0..m {
        for j in (i + 1)..m {
            let o = prep.compare(i, j, h, ledger)?;
            out[i][j] = o;
            out[j][i] = o.flipped();
        }
    }
    Ok(out)
}

pub(crate) fn loss_weights_from_outcomes(
    prep: &PreprocessedFamily,
    outcomes: &[Vec<Outcome>],
) -> Result<Vec<LossWeightValue>> {
    let m = prep.len();
    (0..m)
        .map(|i| {
            let mut lw = LossWeightValue::UNBEATEN;
            for j in (0..m).filter(|&j| j != i) {
                if outcomes[i][j] != Outcome::FirstWins {
                    let d = prep.distance(i, j)?;
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

fn argmin_lowest(scores: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, s) in scores.into_iter().enumerate() {
        if i == 0 || s < best.1 {
            best = (i, s);
        }
    }
    best.0
}

/// Algorithm 1: the member with the most wins. A draw scores for nobody.
pub fn scheffe_tournament(
    prep: &PreprocessedFamily,
    h: &EmpiricalDistribution,
    ledger: &mut Ledger,
) -> Result<SelectionReport> {
    let m = nonempty(prep.family())?;
    let before = *ledger;
    let mut wins = vec![0usize; m];
    let mut trace = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        for j in (i + 1)..m {
            let outcome = prep.compare(i, j, h, ledger)?;
            match outcome {
                Outcome::FirstWins => wins[i] += 1,
                Outcome::SecondWins => wins[j] += 1,
                Outcome::Draw => {}
            }
            trace.push(TraceEvent {
                i,
                j,
                outcome,
                removed: None,
            });
        }
    }
    let mut selected = 0;
    for (i, &w) in wins.iter().enumerate() {
        if w > wins[selected] {
            selected = i;
        }
    }
    let mut report = SelectionReport::build(Algorithm::Tournament, prep.family(), selected, before, ledger)?;
    report.trace = Some(trace);
    Ok(report)
}

/// `h · T_ij` for every unordered pair, indexed like the pair matrix.
fn h_product_table(
    prep: &PreprocessedFamily,
    h: &EmpiricalDistribution,
    ledger: &mut Ledger,
) -> Result<Vec<Vec<f64>>> {
    let m = prep.len();
    let mut table = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in (i + 1)..m {
            let v = prep.h_product(h, i, j, ledger)?;
            table[i][j] = v;
            table[j][i] = -v;
        }
    }
    Ok(table)
}

/// `|(f_member - h) · T_ij|`, one charged term.
fn term(
    prep: &PreprocessedFamily,
    h_table: &[Vec<f64>],
    member: usize,
    i: usize,
    j: usize,
    ledger: &mut Ledger,
) -> Result<f64> {
    ledger.charge_term();
    Ok((prep.member_product(member, i, j)? - h_table[i][j]).abs())
}

/// Algorithm 2: the minimum distance estimate.
pub fn min_distance(
    family: &Family,
    h: &EmpiricalDistribution,
    ledger: &mut Ledger,
) -> Result<SelectionReport> {
    let m = nonempty(family)?;
    let prep = PreprocessedFamily::new(family.clone())?;
    let before = *ledger;
    let h_table = h_product_table(&prep, h, ledger)?;
    let mut scores = Vec::with_capacity(m);
    for f in 0..m {
        let mut worst = 0.0f64;
        for i in 0..m {
            for j in (0..m).filter(|&j| j != i) {
                worst = worst.max(term(&prep, &h_table, f, i, j, ledger)?);
            }
        }
        scores.push(worst);
    }
    let selected = argmin_lowest(scores);
    SelectionReport::build(Algorithm::MinDistance, family, selected, before, ledger)
}

/// Algorithm 3: like [`min_distance`] but each member is only scored on
/// its own test-functions.
pub fn modified_min_distance(
    family: &Family,
    h: &EmpiricalDistribution,
    ledger: &mut Ledger,
) -> Result<SelectionReport> {
    let m = nonempty(family)?;
    let prep = PreprocessedFamily::new(family.clone())?;
    let before = *ledger;
    let h_table = h_product_table(&prep, h, ledger)?;
    let mut scores = Vec::with_capacity(m);
    for i in 0..m {
        let mut worst = 0.0f64;
        for j in (0..m).filter(|&j| j != i) {
            worst = worst.max(term(&prep, &h_table, i, i, j, ledger)?);
        }
        scores.push(worst);
    }
    let selected = argmin_lowest(scores);
    SelectionReport::build(Algorithm::ModifiedMinDistance, family, selected, before, ledger)
}

/// Loss-weight of member `i`; costs `m - 1` products.
pub fn loss_weight(
    prep: &PreprocessedFamily,
    h: &EmpiricalDistribution,
    i: usize,
    ledger: &mut Ledger,
) -> Result<LossWeightValue> {
    if i >= prep.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: prep.len(),
        });
    }
    let mut lw = LossWeightValue::UNBEATEN;
    for j in (0..prep.len()).filter(|&j| j != i) {
        if prep.compare(i, j, h, ledger)? != Outcome::FirstWins {
            let d = prep.distance(i, j)?;
            if d > lw.value {
                lw = LossWeightValue {
                    value: d,
                    witness: Some(j),
                };
            }
        }
    }
    Ok(lw)
}

/// Algorithm 4a: the member of minimum loss-weight. Every pair is compared
/// once and the outcome reused for both directions.
pub fn min_loss_weight(
    prep: &PreprocessedFamily,
    h: &EmpiricalDistribution,
    ledger: &mut Ledger,
) -> Result<SelectionReport> {
    nonempty(prep.family())?;
    let before = *ledger;
    let outcomes = outcome_matrix(prep, h, ledger)?;
    let weights = loss_weights_from_outcomes(prep, &outcomes)?;
    let selected = argmin_lowest(weights.iter().map(|w| w.value));
    SelectionReport::build(Algorithm::MinLossWeight, prep.family(), selected, before, ledger)
}

/// Algorithm 4b: repeatedly compare the farthest surviving pair and drop
/// the loser. Uses exactly `m - 1` products.
pub fn efficient_min_loss_weight(
    prep: &PreprocessedFamily,
    h: &EmpiricalDistribution,
    ledger: &mut Ledger,
) -> Result<SelectionReport> {
    efficient_min_loss_weight_with(prep, h, ledger, DrawPolicy::RemoveSecond)
}

pub fn efficient_min_loss_weight_with(
    prep: &PreprocessedFamily,
    h: &EmpiricalDistribution,
    ledger: &mut Ledger,
    policy: DrawPolicy,
) -> Result<SelectionReport> {
    let m = nonempty(prep.family())?;
    let before = *ledger;
    let mut alive = vec![true; m];
    let mut remaining = m;
    let mut trace = Vec::with_capacity(m - 1);
    for pair in prep.pair_list() {
        if remaining == 1 {
            break;
        }
        let (i, j) = (pair.i, pair.j);
        if !alive[i] || !alive[j] {
            continue;
        }
        let outcome = prep.compare(i, j, h, ledger)?;
        let removed = match (outcome, policy) {
            (Outcome::SecondWins, _) | (Outcome::Draw, DrawPolicy::RemoveFirst) => i,
            (Outcome::FirstWins, _) | (Outcome::Draw, DrawPolicy::RemoveSecond) => j,
        };
        alive[removed] = false;
        remaining -= 1;
        trace.push(TraceEvent {
            i,
            j,
            outcome,
            removed: Some(removed),
        });
    }
    let selected = alive.iter().position(|&a| a).expect("one survivor");
    let mut report = SelectionReport::build(
        Algorithm::EfficientMinLossWeight,
        prep.family(),
        selected,
        before,
        ledger,
    )?;
    report.trace = Some(trace);
    Ok(report)
}

/// Algorithm 5 for a two-member family: output `f1` with probability
/// `1/(r+1)` where `r = |(f1-h)·T12| / |(f2-h)·T12|`.
///
/// A zero denominator means `r = inf`, i.e. `f2` with certainty. The exact
/// mixture weights are returned alongside the sampled choice.
pub fn randomized_two(
    family: &Family,
    h: &EmpiricalDistribution,
    seed: u64,
    ledger: &mut Ledger,
) -> Result<SelectionReport> {
    if family.len() != 2 {
        return Err(Error::FamilySize {
            expected: 2,
            found: family.len(),
        });
    }
    let (f1, f2) = (family.mass(0)?, family.mass(1)?);
    let t = test_function(f1, f2)?;
    if t.is_zero() {
        return Err(Error::DegeneratePair);
    }
    let before = *ledger;
    let ht = inner_product(h.mass(), &t)?;
    ledger.charge_h_product();
    let a = (inner_product(f1, &t)? - ht).abs();
    ledger.charge_term();
    let b = (inner_product(f2, &t)? - ht).abs();
    ledger.charge_term();

    let (p1, p2) = if b == 0.0 {
        (0.0, 1.0)
    } else {
        let r = a / b;
        (1.0 / (r + 1.0), r / (r + 1.0))
    };
    let u: f64 = seeded_rng(seed).gen();
    let selected = if u < p1 { 0 } else { 1 };
    let mut report = SelectionReport::build(Algorithm::Randomized, family, selected, before, ledger)?;
    report.seed = Some(seed);
    report.mixture = Some((p1, p2));
    Ok(report)
}

/// Runs `algorithm` on a preprocessed family. `seed` only matters for
/// [`Algorithm::Randomized`].
pub fn run(
    algorithm: Algorithm,
    prep: &PreprocessedFamily,
    h: &EmpiricalDistribution,
    seed: u64,
    ledger: &mut Ledger,
) -> Result<SelectionReport> {
    match algorithm {
        Algorithm::Tournament => scheffe_tournament(prep, h, ledger),
        Algorithm::MinDistance => min_distance(prep.family(), h, ledger),
        Algorithm::ModifiedMinDistance => modified_min_distance(prep.family(), h, ledger),
        Algorithm::MinLossWeight => min_loss_weight(prep, h, ledger),
        Algorithm::EfficientMinLossWeight => efficient_min_loss_weight(prep, h, ledger),
        Algorithm::Randomized => randomized_two(prep.family(), h, seed, ledger),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxedCheck {
    pub pass: bool,
    /// Smallest `C·loss-weight(f') - ‖f - f'‖₁` over the checked `f'`;
    /// `+inf` when nothing is checked.
    pub margin: f64,
}

/// Whether `selected` satisfies `‖f - f'‖₁ <= C·loss-weight(f')` for every
/// `f'` that beats it. `C = 1` is the elimination algorithm's own output
/// condition.
pub fn relaxed_selection_check(
    prep: &PreprocessedFamily,
    h: &EmpiricalDistribution,
    selected: usize,
    c: f64,
) -> Result<RelaxedCheck> {
    relaxed_selection_check_with(prep, h, selected, c, LossReading::StrictLoss)
}

pub fn relaxed_selection_check_with(
    prep: &PreprocessedFamily,
    h: &EmpiricalDistribution,
    selected: usize,
    c: f64,
    reading: LossReading,
) -> Result<RelaxedCheck> {
    if c.is_nan() || c < 1.0 {
        return Err(Error::ParameterOutOfRange(format!("C must be >= 1, got {c}")));
    }
    if selected >= prep.len() {
        return Err(Error::IndexOutOfRange {
            index: selected,
            len: prep.len(),
        });
    }
    // verification only; the cost is not part of any selection run
    let mut scratch = Ledger::new();
    let outcomes = outcome_matrix(prep, h, &mut scratch)?;
    let weights = loss_weights_from_outcomes(prep, &outcomes)?;
    let mut margin = f64::INFINITY;
    for other in (0..prep.len()).filter(|&o| o != selected) {
        if reading.applies(outcomes[selected][other]) {
            let slack = c * weights[other].value - prep.distance(selected, other)?;
            margin = margin.min(slack);
        }
    }
    Ok(RelaxedCheck {
        pass: margin >= 0.0,
        margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::preprocess;

    fn lww(eps: f64) -> (Family, EmpiricalDistribution) {
        let family = Family::from_masses(vec![
            vec![0.0, 0.25 + eps, 0.5, 0.25 - eps],
            vec![0.5 + eps, 0.25 - eps, 0.0, 0.25],
        ])
        .unwrap();
        let h = EmpiricalDistribution::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        (family, h)
    }

    fn singleton() -> (PreprocessedFamily, EmpiricalDistribution) {
        let family = Family::from_masses(vec![vec![0.3, 0.7]]).unwrap();
        let h = EmpiricalDistribution::new(vec![0.5, 0.5]).unwrap();
        (preprocess(&family).unwrap(), h)
    }

    #[test]
    fn singleton_family_everywhere() {
        let (prep, h) = singleton();
        for alg in Algorithm::ALL.into_iter().filter(|a| *a != Algorithm::Randomized) {
            let mut ledger = Ledger::new();
            let r = run(alg, &prep, &h, 0, &mut ledger).unwrap();
            assert_eq!(r.selected, 0, "{alg}");
            assert_eq!((r.h_products, r.term_evaluations), (0, 0), "{alg}");
        }
        let lw = loss_weight(&prep, &h, 0, &mut Ledger::new()).unwrap();
        assert_eq!(lw, LossWeightValue::UNBEATEN);
        assert!(relaxed_selection_check(&prep, &h, 0, 1.0).unwrap().pass);
        assert!(matches!(
            randomized_two(prep.family(), &h, 0, &mut Ledger::new()),
            Err(Error::FamilySize { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn lww_deterministic_selectors_pick_f1() {
        let (family, h) = lww(0.01);
        let prep = preprocess(&family).unwrap();
        for alg in [
            Algorithm::Tournament,
            Algorithm::MinDistance,
            Algorithm::ModifiedMinDistance,
            Algorithm::MinLossWeight,
            Algorithm::EfficientMinLossWeight,
        ] {
            let r = run(alg, &prep, &h, 0, &mut Ledger::new()).unwrap();
            assert_eq!(r.selected_name, "f1", "{alg}");
        }
        let r = efficient_min_loss_weight(&prep, &h, &mut Ledger::new()).unwrap();
        assert_eq!(r.h_products, 1);
        let trace = r.trace.unwrap();
        assert_eq!(trace.len(), 1);
        assert_eq!(trace[0].outcome, Outcome::Draw);
        assert_eq!(trace[0].removed, Some(1));
    }

    #[test]
    fn lww_loss_weight_counts_draw_as_not_winning() {
        let (family, h) = lww(0.01);
        let prep = preprocess(&family).unwrap();
        let mut ledger = Ledger::new();
        let lw = loss_weight(&prep, &h, 0, &mut ledger).unwrap();
        assert!((lw.value - 1.04).abs() < 1e-12);
        assert_eq!(lw.witness, Some(1));
        assert_eq!(ledger.h_products(), 1);
        assert!(matches!(
            loss_weight(&prep, &h, 2, &mut ledger),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));
    }

    #[test]
    fn unbeaten_candidate_has_negative_infinite_loss_weight() {
        let family = Family::from_masses(vec![
            vec![0.9, 0.1],
            vec![0.1, 0.9],
            vec![0.5, 0.5],
        ])
        .unwrap();
        let h = EmpiricalDistribution::new(vec![0.9, 0.1]).unwrap();
        let prep = preprocess(&family).unwrap();
        let lw = loss_weight(&prep, &h, 0, &mut Ledger::new()).unwrap();
        assert_eq!(lw.value, f64::NEG_INFINITY);
        assert_eq!(lw.witness, None);
    }

    #[test]
    fn randomized_on_lww_is_even_split() {
        let (family, h) = lww(0.01);
        let mut ledger = Ledger::new();
        let r = randomized_two(&family, &h, 7, &mut ledger).unwrap();
        let (p, q) = r.mixture.unwrap();
        assert!((p - 0.5).abs() < 1e-12 && (q - 0.5).abs() < 1e-12);
        assert_eq!((r.h_products, r.term_evaluations), (1, 2));
        assert_eq!(r.seed, Some(7));
    }

    #[test]
    fn randomized_point_masses_at_members() {
        let (family, _) = lww(0.01);
        let at_f2 = EmpiricalDistribution::new(family.mass(1).unwrap().to_vec()).unwrap();
        let at_f1 = EmpiricalDistribution::new(family.mass(0).unwrap().to_vec()).unwrap();
        for seed in 0..20 {
            let r = randomized_two(&family, &at_f2, seed, &mut Ledger::new()).unwrap();
            assert_eq!((r.selected, r.mixture), (1, Some((0.0, 1.0))));
            let r = randomized_two(&family, &at_f1, seed, &mut Ledger::new()).unwrap();
            assert_eq!((r.selected, r.mixture), (0, Some((1.0, 0.0))));
        }
    }

    #[test]
    fn randomized_rejects_degenerate_pair() {
        let family = Family::from_masses(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let h = EmpiricalDistribution::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(
            randomized_two(&family, &h, 0, &mut Ledger::new()),
            Err(Error::DegeneratePair)
        );
    }

    #[test]
    fn relaxed_check_rejects_small_c() {
        let (family, h) = lww(0.01);
        let prep = preprocess(&family).unwrap();
        assert!(relaxed_selection_check(&prep, &h, 0, 0.5).is_err());
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.as_str().parse::<Algorithm>().unwrap(), a);
        }
        assert!("bogus".parse::<Algorithm>().is_err());
    }
}
