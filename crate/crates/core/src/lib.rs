//! Closed testing with Globaltest for logistic models.
//!
//! A feature set `R` is rejected by closed testing when every superset
//! `R ⊆ S ⊆ F` is rejected by its own Globaltest. The [`shortcut`] module
//! decides this without enumerating supersets by comparing a lower bound on
//! superset statistics against an upper bound on superset critical values,
//! both indexed by the set level. [`bnb`] refines inconclusive outcomes by
//! branch and bound, and [`driver`] holds the brute-force reference.

pub mod bnb;
pub mod driver;
pub mod error;
pub mod io;
pub mod linmodel;
pub mod sets;
pub mod shortcut;
pub mod sim;
pub mod wchi2;

pub use error::{Error, Result};
pub use linmodel::{Dataset, FeatureStats, Model, NullModel, Spectrum, SpectrumProvider};

/// Three-valued closed-testing outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Reject,
    NotReject,
    Unsure,
}

impl Decision {
    pub fn as_str(&self) -> &'static str {
        match self {
            Decision::Reject => "reject",
            Decision::NotReject => "not_reject",
            Decision::Unsure => "unsure",
        }
    }
}

impl std::fmt::Display for Decision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
