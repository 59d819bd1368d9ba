//! One-time family preprocessing and the ledgered win comparison.

use crate::density::{inner_product, l1_distance, test_function, EmpiricalDistribution, Family, Outcome, TestFunction};
use crate::error::{Error, Result};
use crate::ledger::Ledger;

/// Precomputed data for the unordered pair `{i, j}` with `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairData {
    pub i: usize,
    pub j: usize,
    /// `‖f_i - f_j‖₁`
    pub distance: f64,
    /// `(f_i · T_ij + f_j · T_ij) / 2`; `f_i` wins iff `h · T_ij` exceeds it.
    pub threshold: f64,
    pub test: TestFunction,
    /// `f_m · T_ij` for every member `m`.
    pub member_products: Vec<f64>,
}

/// A family together with all member-side quantities the selectors need.
///
/// Immutable once built and safe to share between concurrent runs.
#[derive(Debug, Clone)]
pub struct PreprocessedFamily {
    family: Family,
    pairs: Vec<PairData>,
    /// Indices into `pairs`, by distance descending, ties by `(i, j)`.
    order: Vec<usize>,
}

pub fn preprocess(family: &Family) -> Result<PreprocessedFamily> {
    PreprocessedFamily::new(family.clone())
}

impl PreprocessedFamily {
    pub fn new(family: Family) -> Result<Self> {
        let m = family.len();
        if m == 0 {
            return Err(Error::EmptyFamily);
        }
        let mut pairs = Vec::with_capacity(m * (m - 1) / 2);
        for i in 0..m {
            for j in (i + 1)..m {
                let (fi, fj) = (family.mass(i)?, family.mass(j)?);
                let test = test_function(fi, fj)?;
                let member_products = (0..m)
                    .map(|k| inner_product(family.mass(k)?, &test))
                    .collect::<Result<Vec<_>>>()?;
                pairs.push(PairData {
                    i,
                    j,
                    distance: l1_distance(fi, fj)?,
                    threshold: (member_products[i] + member_products[j]) / 2.0,
                    test,
                    member_products,
                });
            }
        }
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        // pairs are generated in (i, j) order, so a stable sort keeps that as the tiebreak
        order.sort_by(|&a, &b| pairs[b].distance.total_cmp(&pairs[a].distance));
        Ok(Self {
            family,
            pairs,
            order,
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn len(&self) -> usize {
        self.family.len()
    }

    pub fn is_empty(&self) -> bool {
        self.family.is_empty()
    }

    /// Pairs sorted by decreasing distance.
    pub fn pair_list(&self) -> impl ExactSizeIterator<Item = &PairData> + '_ {
        self.order.iter().map(move |&p| &self.pairs[p])
    }

    fn pair_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j);
        let m = self.len();
        i * (2 * m - i - 1) / 2 + (j - i - 1)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            })
        }
    }

    /// Data for `{i, j}` plus the orientation sign (`-1` when `i > j`).
    pub fn pair(&self, i: usize, j: usize) -> Result<(&PairData, f64)> {
        self.check_index(i)?;
        self.check_index(j)?;
        match i.cmp(&j) {
            std::cmp::Ordering::Less => Ok((&self.pairs[self.pair_index(i, j)], 1.0)),
            std::cmp::Ordering::Greater => Ok((&self.pairs[self.pair_index(j, i)], -1.0)),
            std::cmp::Ordering::Equal => Err(Error::InvalidPair(i)),
        }
    }

    pub fn distance(&self, i: usize, j: usize) -> Result<f64> {
        if i == j {
            self.check_index(i)?;
            return Ok(0.0);
        }
        Ok(self.pair(i, j)?.0.distance)
    }

    /// `f_member · T_ij`.
    pub fn member_product(&self, member: usize, i: usize, j: usize) -> Result<f64> {
        self.check_index(member)?;
        let (p, sign) = self.pair(i, j)?;
        Ok(sign * p.member_products[member])
    }

    /// `h · T_ij`, charged to the ledger.
    pub fn h_product(
        &self,
        h: &EmpiricalDistribution,
        i: usize,
        j: usize,
        ledger: &mut Ledger,
    ) -> Result<f64> {
        let (p, sign) = self.pair(i, j)?;
        let v = inner_product(h.mass(), &p.test)?;
        ledger.charge_h_product();
        Ok(sign * v)
    }

    /// Win relation between `f_i` and `f_j` given `h`. Costs one `h` product.
    pub fn compare(
        &self,
        i: usize,
        j: usize,
        h: &EmpiricalDistribution,
        ledger: &mut Ledger,
    ) -> Result<Outcome> {
        let (p, sign) = self.pair(i, j)?;
        let ht = inner_product(h.mass(), &p.test)?;
        ledger.charge_h_product();
        let outcome = Outcome::from_gap(ht, p.threshold);
        Ok(if sign > 0.0 { outcome } else { outcome.flipped() })
    }
}

/// Free-function form of [`PreprocessedFamily::compare`].
pub fn compare(
    prep: &PreprocessedFamily,
    i: usize,
    j: usize,
    h: &EmpiricalDistribution,
    ledger: &mut Ledger,
) -> Result<Outcome> {
    prep.compare(i, j, h, ledger)
}
