//! Density selection in L1 from a finite candidate family.
//!
//! Given candidates `f_1..f_m` on a finite support and an empirical
//! distribution `h`, the selectors pick a member whose L1 error to the
//! unknown truth `g` is within a constant factor of the best member, plus a
//! deviation term measuring how far `h` is from `g` on the family's
//! test-functions. All decisions are made from inner products
//! `h · T_ij`, where `T_ij = sgn(f_i - f_j)`, and every run reports exactly
//! how many of those it evaluated.
//!
//! ```
//! use densel_core::{instances, preprocess, selectors, Ledger};
//!
//! let inst = instances::gen_lower_bound_9(1e-3).unwrap();
//! let prep = preprocess(&inst.family).unwrap();
//! let mut ledger = Ledger::new();
//! let report = selectors::efficient_min_loss_weight(&prep, &inst.empirical, &mut ledger).unwrap();
//! assert_eq!(report.h_products, 3);
//! ```
//!
//! Modules:
//! - [`density`]: supports, candidates, test-functions, the win rules, Δ.
//! - [`preprocess`]: sorted pair list and member-side products; `compare`.
//! - [`selectors`]: the six selection procedures.
//! - [`oracle`]: brute-force verifiers and VC dimension by enumeration.
//! - [`instances`]: lower-bound constructions and random instances.
//! - [`sweep`]: the randomized guarantee sweep used by `densel verify`.

pub mod density;
pub mod error;
pub mod instances;
pub mod ledger;
pub mod oracle;
pub mod preprocess;
pub mod rng;
pub mod selectors;
pub mod sweep;

pub use density::{
    delta, delta_restricted, inner_product, l1_distance, scheffe_set, scheffe_win, test_function, Candidate,
    EmpiricalDistribution, Family, Outcome, Support, TestFunction,
};
pub use error::{Error, Result};
pub use instances::Instance;
pub use ledger::Ledger;
pub use preprocess::{compare, preprocess, PreprocessedFamily};
pub use selectors::{Algorithm, LossWeightValue, SelectionReport};
