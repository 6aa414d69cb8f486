//! Membership and refutation engines for the cones `C_i`.

pub mod amgm;
pub mod classify;
pub mod membership;
pub mod refute;
pub mod search;
pub mod sos;
pub mod transfer;

pub use amgm::{amgm_check, AmgmCertificate, AmgmError};
pub use membership::{verify_membership, ChartHint, ChartProof, MembershipCertificate};
pub use refute::{refute_exact, refute_membership, RefutationCertificate, RefuteOutcome};
pub use classify::{classify, Classification, ClassifyConfig};
pub use search::{refute_search, RefuteStrategy, SearchBudget};
pub use sos::{sos_search, SosConfig, SosOutcome};
pub use transfer::{lift_gram, separate, transfer_separation, Lift, Separation};

use crate::forms::{FormError, Rat};
use crate::gram::GramError;
use crate::variety::VarietyError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertifyError {
    #[error("matrix is not a Gram matrix of the form")]
    GramMismatch,
    #[error("chart proof fails: {0}")]
    ChartProofFails(String),
    #[error("boundary stratum {zero_set:?} is not PSD")]
    BoundaryNotPsd { zero_set: Vec<usize>, witness: Vec<Rat>, value: Rat },
    #[error("boundary proofs do not match the strata")]
    BoundaryMissing,
    #[error("boundary factorization for stratum {zero_set:?} does not reproduce the submatrix")]
    BoundaryProofInvalid { zero_set: Vec<usize> },
    #[error("Farkas multipliers do not certify infeasibility")]
    FarkasInvalid,
    #[error("transfer failed: {0}")]
    Transfer(String),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Gram(#[from] GramError),
    #[error(transparent)]
    Variety(#[from] VarietyError),
}
