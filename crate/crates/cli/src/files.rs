//! On-disk formats: families and empirical distributions as JSON.
//!
//! Floats are written with the shortest decimal that parses back to the same
//! double, and parsed with correct rounding, so a write/read cycle is
//! bit-exact.

use std::fs;
use std::path::Path;

use densel_core::{Candidate, EmpiricalDistribution, Family, Support};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyFile {
    pub support: Vec<String>,
    pub candidates: Vec<Candidate>,
}

impl FamilyFile {
    pub fn from_family(family: &Family) -> Self {
        Self {
            support: family.support().atoms().to_vec(),
            candidates: family.candidates().to_vec(),
        }
    }

    pub fn into_family(self) -> Result<Family, CliError> {
        let support = Support::new(self.support).map_err(CliError::parse)?;
        Family::new(support, self.candidates).map_err(CliError::parse)
    }
}

/// Either an explicit mass vector or raw samples given by atom label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EmpiricalFile {
    Mass {
        mass: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sample_count: Option<u64>,
    },
    Samples {
        samples: Vec<String>,
    },
}

impl EmpiricalFile {
    pub fn from_mass(mass: &[f64]) -> Self {
        Self::Mass {
            mass: mass.to_vec(),
            sample_count: None,
        }
    }

    pub fn from_empirical(h: &EmpiricalDistribution) -> Self {
        Self::Mass {
            mass: h.mass().to_vec(),
            sample_count: h.sample_count(),
        }
    }

    /// Samples are aggregated to `counts / n` against `support`.
    pub fn into_empirical(self, support: &Support) -> Result<EmpiricalDistribution, CliError> {
        match self {
            Self::Mass { mass, .. } => EmpiricalDistribution::new(mass).map_err(CliError::parse),
            Self::Samples { samples } => {
                let mut counts = vec![0u64; support.len()];
                for label in &samples {
                    let i = support
                        .index_of(label)
                        .ok_or_else(|| CliError::parse(densel_core::Error::UnknownAtom(label.clone())))?;
                    counts[i] += 1;
                }
                EmpiricalDistribution::from_counts(&counts).map_err(CliError::parse)
            }
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn load_family(path: &Path) -> Result<Family, CliError> {
    read_json::<FamilyFile>(path)?.into_family()
}

pub fn load_empirical(path: &Path, support: &Support) -> Result<EmpiricalDistribution, CliError> {
    read_json::<EmpiricalFile>(path)?.into_empirical(support)
}
