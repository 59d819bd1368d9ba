//! Finite-support densities and the test-function primitives.
//!
//! Every mass vector lives on a shared, ordered [`Support`]. A test-function
//! `T_ij` is the atomwise sign of `f_i - f_j`; inner products against it
//! recover L1 distances and drive every comparison in [`crate::selectors`].

use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::error::{Error, Result};

/// Tolerance for "sums to one" checks.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Absolute tolerance (scaled by operand magnitude, floor 1) under which
/// the two sides of a win comparison count as equal, i.e. a draw.
pub const DRAW_TOLERANCE: f64 = 1e-12;

/// Ordered atom labels shared by every vector in a computation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Support {
    atoms: Vec<String>,
}

impl Support {
    pub fn new(atoms: Vec<String>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::ParameterOutOfRange(
                "support must have at least one atom".into(),
            ));
        }
        let mut seen = HashSet::with_capacity(atoms.len());
        for a in &atoms {
            if !seen.insert(a.as_str()) {
                return Err(Error::DuplicateLabel(a.clone()));
            }
        }
        Ok(Self { atoms })
    }

    /// Support labelled `A1..Ak`.
    pub fn with_size(k: usize) -> Result<Self> {
        Self::new((1..=k).map(|i| format!("A{i}")).collect())
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a == label)
    }

    pub(crate) fn check(&self, v: &[f64]) -> Result<()> {
        check_len(self.len(), v.len())
    }
}

/// A named member of the candidate family. Need not be normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub name: String,
    pub mass: Vec<f64>,
}

impl Candidate {
    pub fn new(name: impl Into<String>, mass: Vec<f64>) -> Result<Self> {
        check_finite(&mass)?;
        Ok(Self {
            name: name.into(),
            mass,
        })
    }

    pub fn is_distribution(&self) -> bool {
        is_distribution(&self.mass)
    }
}

/// Ordered candidate family over one support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Family {
    support: Support,
    candidates: Vec<Candidate>,
}

impl Family {
    pub fn new(support: Support, candidates: Vec<Candidate>) -> Result<Self> {
        let mut names = HashSet::with_capacity(candidates.len());
        for c in &candidates {
            support.check(&c.mass)?;
            check_finite(&c.mass)?;
            if !names.insert(c.name.as_str()) {
                return Err(Error::DuplicateLabel(c.name.clone()));
            }
        }
        Ok(Self {
            support,
            candidates,
        })
    }

    /// Builds a family named `f1..fm` over a default `A1..Ak` support.
    pub fn from_masses(masses: Vec<Vec<f64>>) -> Result<Self> {
        let k = masses.first().map(Vec::len).ok_or(Error::EmptyFamily)?;
        let support = Support::with_size(k)?;
        let candidates = masses
            .into_iter()
            .enumerate()
            .map(|(i, m)| Candidate::new(format!("f{}", i + 1), m))
            .collect::<Result<Vec<_>>>()?;
        Self::new(support, candidates)
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn mass(&self, i: usize) -> Result<&[f64]> {
        self.candidates
            .get(i)
            .map(|c| c.mass.as_slice())
            .ok_or(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            })
    }

    pub fn name(&self, i: usize) -> Result<&str> {
        self.candidates
            .get(i)
            .map(|c| c.name.as_str())
            .ok_or(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            })
    }

    /// Same family with members reordered so that new position `p` holds
    /// old member `order[p]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.len() {
            return Err(Error::FamilySize {
                expected: self.len(),
                found: order.len(),
            });
        }
        let candidates = order
            .iter()
            .map(|&i| {
                self.candidates.get(i).cloned().ok_or(Error::IndexOutOfRange {
                    index: i,
                    len: self.len(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.support.clone(), candidates)
    }
}

/// The empirical distribution `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    mass: Vec<f64>,
    sample_count: Option<u64>,
}

impl EmpiricalDistribution {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        check_distribution(&mass)?;
        Ok(Self {
            mass,
            sample_count: None,
        })
    }

    /// Normalized counts; every entry is a multiple of `1/n`.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(Error::ParameterOutOfRange(
                "empirical distribution needs at least one sample".into(),
            ));
        }
        let mass = counts.iter().map(|&c| c as f64 / n as f64).collect();
        Ok(Self {
            mass,
            sample_count: Some(n),
        })
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn sample_count(&self) -> Option<u64> {
        self.sample_count
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }
}

/// Atomwise sign vector with entries in {-1, 0, +1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TestFunction {
    signs: Vec<i8>,
}

impl TestFunction {
    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn negated(&self) -> Self {
        Self {
            signs: self.signs.iter().map(|s| -s).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.signs.iter().all(|&s| s == 0)
    }
}

/// Outcome of a pairwise comparison, read from the first member's side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    FirstWins,
    SecondWins,
    Draw,
}

impl Outcome {
    pub fn flipped(self) -> Self {
        match self {
            Outcome::FirstWins => Outcome::SecondWins,
            Outcome::SecondWins => Outcome::FirstWins,
            Outcome::Draw => Outcome::Draw,
        }
    }

    /// Orders `lhs` against `rhs`: `FirstWins` when `lhs` is strictly larger
    /// beyond the draw tolerance.
    pub(crate) fn from_gap(lhs: f64, rhs: f64) -> Self {
        let tol = DRAW_TOLERANCE * 1f64.max(lhs.abs()).max(rhs.abs());
        if lhs - rhs > tol {
            Outcome::FirstWins
        } else if rhs - lhs > tol {
            Outcome::SecondWins
        } else {
            Outcome::Draw
        }
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::SupportMismatch { expected, found })
    }
}

fn check_finite(v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

/// Nonnegative entries summing to one within [`NORMALIZATION_TOLERANCE`].
pub fn is_distribution(v: &[f64]) -> bool {
    check_distribution(v).is_ok()
}

pub(crate) fn check_distribution(v: &[f64]) -> Result<()> {
    check_finite(v)?;
    let sum: f64 = v.iter().sum();
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    if v.is_empty() || min < 0.0 || (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::NotNormalized { sum, min });
    }
    Ok(())
}

pub fn test_function(fi: &[f64], fj: &[f64]) -> Result<TestFunction> {
    check_len(fi.len(), fj.len())?;
    let signs = fi
        .iter()
        .zip(fj)
        .map(|(a, b)| match a.partial_cmp(b) {
            Some(std::cmp::Ordering::Greater) => 1,
            Some(std::cmp::Ordering::Less) => -1,
            _ => 0,
        })
        .collect();
    Ok(TestFunction { signs })
}

pub fn inner_product(v: &[f64], t: &TestFunction) -> Result<f64> {
    check_len(t.len(), v.len())?;
    Ok(v.iter()
        .zip(&t.signs)
        .map(|(x, &s)| x * f64::from(s))
        .sum())
}

/// `Σ |fi - fj|`, summed in atom order so that it is bit-identical to
/// `inner_product(fi - fj, test_function(fi, fj))`.
pub fn l1_distance(fi: &[f64], fj: &[f64]) -> Result<f64> {
    check_len(fi.len(), fj.len())?;
    Ok(fi.iter().zip(fj).map(|(a, b)| (a - b).abs()).sum())
}

pub fn difference(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    check_len(a.len(), b.len())?;
    Ok(a.iter().zip(b).map(|(x, y)| x - y).collect())
}

/// Atoms where `fi` strictly exceeds `fj`.
pub fn scheffe_set(fi: &[f64], fj: &[f64]) -> Result<Vec<usize>> {
    check_len(fi.len(), fj.len())?;
    Ok(fi
        .iter()
        .zip(fj)
        .enumerate()
        .filter(|(_, (a, b))| a > b)
        .map(|(x, _)| x)
        .collect())
}

fn set_mass(v: &[f64], set: &[usize]) -> f64 {
    set.iter().map(|&x| v[x]).sum()
}

/// Set-based win rule: compares `|fi(A) - h(A)|` with `|fj(A) - h(A)|`
/// on the Scheffé set `A = {fi > fj}`; the smaller margin wins.
///
/// All three inputs must be distributions.
pub fn scheffe_win(fi: &[f64], fj: &[f64], h: &[f64]) -> Result<Outcome> {
    check_len(fi.len(), fj.len())?;
    check_len(fi.len(), h.len())?;
    check_distribution(fi)?;
    check_distribution(fj)?;
    check_distribution(h)?;
    let a = scheffe_set(fi, fj)?;
    let h_a = set_mass(h, &a);
    let margin_i = (set_mass(fi, &a) - h_a).abs();
    let margin_j = (set_mass(fj, &a) - h_a).abs();
    // smaller margin wins, so compare j's margin against i's
    Ok(Outcome::from_gap(margin_j, margin_i))
}

/// Empirical deviation: the largest `|(g - h) · T_ij|` over the family's
/// test-functions; zero for families with fewer than two members.
pub fn delta(g: &[f64], h: &EmpiricalDistribution, family: &Family) -> Result<f64> {
    let k = family.support().len();
    check_len(k, g.len())?;
    check_len(k, h.len())?;
    let diff = difference(g, h.mass())?;
    let mut best = 0.0f64;
    let m = family.len();
    for i in 0..m {
        for j in (i + 1)..m {
            let t = test_function(family.mass(i)?, family.mass(j)?)?;
            best = best.max(inner_product(&diff, &t)?.abs());
        }
    }
    Ok(best)
}

/// Deviation seen only through the test-functions touching member `i`.
pub fn delta_restricted(
    g: &[f64],
    h: &EmpiricalDistribution,
    family: &Family,
    i: usize,
) -> Result<f64> {
    let k = family.support().len();
    check_len(k, g.len())?;
    check_len(k, h.len())?;
    let fi = family.mass(i)?;
    let diff = difference(g, h.mass())?;
    let mut best = 0.0f64;
    for j in (0..family.len()).filter(|&j| j != i) {
        let t = test_function(fi, family.mass(j)?)?;
        best = best.max(inner_product(&diff, &t)?.abs());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 0.01;

    fn lww() -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        (
            vec![0.0, 0.25 + EPS, 0.5, 0.25 - EPS],
            vec![0.5 + EPS, 0.25 - EPS, 0.0, 0.25],
            vec![0.5, 0.5, 0.0, 0.0],
        )
    }

    #[test]
    fn test_function_on_lww_pair() {
        let (f1, f2, _) = lww();
        let t = test_function(&f1, &f2).unwrap();
        assert_eq!(t.signs(), &[-1, 1, 1, -1]);
        assert!(test_function(&f1, &f1).unwrap().is_zero());
    }

    #[test]
    fn test_function_length_mismatch() {
        assert_eq!(
            test_function(&[0.5, 0.5], &[1.0]),
            Err(Error::SupportMismatch {
                expected: 2,
                found: 1
            })
        );
    }

    #[test]
    fn inner_products_on_lww() {
        let (f1, f2, h) = lww();
        let t = test_function(&f1, &f2).unwrap();
        assert!((inner_product(&f1, &t).unwrap() - 0.52).abs() < 1e-12);
        assert!((inner_product(&f2, &t).unwrap() + 0.52).abs() < 1e-12);
        assert_eq!(inner_product(&h, &t).unwrap(), 0.0);
        let zero = test_function(&f1, &f1).unwrap();
        assert_eq!(inner_product(&[3.0, -1.0, 2.0, 7.0], &zero).unwrap(), 0.0);
    }

    #[test]
    fn l1_distance_examples() {
        let (f1, f2, _) = lww();
        assert!((l1_distance(&f1, &f2).unwrap() - 1.04).abs() < 1e-12);
        assert_eq!(l1_distance(&f1, &f1).unwrap(), 0.0);
        let t = test_function(&f1, &f2).unwrap();
        let d = difference(&f1, &f2).unwrap();
        assert_eq!(
            l1_distance(&f1, &f2).unwrap().to_bits(),
            inner_product(&d, &t).unwrap().to_bits()
        );
    }

    #[test]
    fn scheffe_sets() {
        let (f1, f2, _) = lww();
        assert_eq!(scheffe_set(&f1, &f2).unwrap(), vec![1, 2]);
        assert!(scheffe_set(&f1, &f1).unwrap().is_empty());
    }

    #[test]
    fn scheffe_win_on_lww_is_draw() {
        let (f1, f2, h) = lww();
        assert_eq!(scheffe_win(&f1, &f2, &h).unwrap(), Outcome::Draw);
        assert_eq!(scheffe_win(&f1, &f1, &h).unwrap(), Outcome::Draw);
    }

    #[test]
    fn scheffe_win_rejects_unnormalized() {
        let (f1, _, h) = lww();
        assert!(matches!(
            scheffe_win(&f1, &[0.5, 0.5, 0.5, 0.5], &h),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn delta_examples() {
        let (f1, f2, g) = lww();
        let family = Family::from_masses(vec![f1, f2]).unwrap();
        let h = EmpiricalDistribution::new(g.clone()).unwrap();
        assert_eq!(delta(&g, &h, &family).unwrap(), 0.0);

        let g = vec![0.5, 0.5, 0.0, 0.0];
        let h = EmpiricalDistribution::new(vec![0.4, 0.6, 0.0, 0.0]).unwrap();
        assert!((delta(&g, &h, &family).unwrap() - 0.2).abs() < 1e-12);
        assert!((delta_restricted(&g, &h, &family, 1).unwrap() - 0.2).abs() < 1e-12);
        assert!(matches!(
            delta_restricted(&g, &h, &family, 2),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));

        let single = Family::from_masses(vec![vec![0.5, 0.5, 0.0, 0.0]]).unwrap();
        assert_eq!(delta(&g, &h, &single).unwrap(), 0.0);
    }

    #[test]
    fn empirical_validation() {
        assert!(EmpiricalDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(EmpiricalDistribution::new(vec![-0.1, 1.1]).is_err());
        let h = EmpiricalDistribution::from_counts(&[1, 3, 0]).unwrap();
        assert_eq!(h.mass(), &[0.25, 0.75, 0.0]);
        assert_eq!(h.sample_count(), Some(4));
    }

    #[test]
    fn family_validation() {
        let s = Support::with_size(2).unwrap();
        assert!(matches!(
            Family::new(
                s.clone(),
                vec![
                    Candidate::new("a", vec![1.0, 0.0]).unwrap(),
                    Candidate::new("a", vec![0.0, 1.0]).unwrap()
                ]
            ),
            Err(Error::DuplicateLabel(_))
        ));
        assert!(matches!(
            Family::new(s, vec![Candidate::new("a", vec![1.0]).unwrap()]),
            Err(Error::SupportMismatch { .. })
        ));
        assert!(Support::new(vec!["x".into(), "x".into()]).is_err());
        assert!(Candidate::new("bad", vec![f64::NAN]).is_err());
    }
}
