//! Fixtures shared by the criterion benches.

use densel_core::{instances::random_instance, preprocess, EmpiricalDistribution, PreprocessedFamily};

/// A preprocessed random family of `m` members on `k` atoms plus a noisy `h`.
pub fn fixture(m: usize, k: usize, seed: u64) -> (PreprocessedFamily, EmpiricalDistribution) {
    let inst = random_instance(seed, k, m, 0.05).expect("valid fixture parameters");
    let prep = preprocess(&inst.family).expect("nonempty family");
    (prep, inst.empirical)
}
