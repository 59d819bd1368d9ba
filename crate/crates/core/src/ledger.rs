use serde::{Deserialize, Serialize};

/// Cost counters for one selection run.
///
/// `h_products` counts evaluations of `h · T` (one per comparison).
/// `term_evaluations` counts scalar terms of the form `(f - h) · T`.
/// Both only ever go up; member-only products computed during
/// preprocessing are free and never touch a ledger.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ledger {
    h_products: u64,
    term_evaluations: u64,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn h_products(&self) -> u64 {
        self.h_products
    }

    pub fn term_evaluations(&self) -> u64 {
        self.term_evaluations
    }

    pub(crate) fn charge_h_product(&mut self) {
        self.h_products += 1;
    }

    pub(crate) fn charge_term(&mut self) {
        self.term_evaluations += 1;
    }
}
