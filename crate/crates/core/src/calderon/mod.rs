//! Calderón sums `C_ψ`, their tails `Ψ_M`, and local integrability of the
//! tails on boxes away from the identity.

pub(crate) mod engine;
pub(crate) mod geometry;
mod integrability;
mod sum;

pub use crate::profile::{FrequencyProfile, Representation, ValueBox};
pub use engine::{CalderonOptions, Truncation, Weighting};
pub(crate) use integrability::member_integral;
pub use integrability::{
    calderon_box_integral, local_integrability_check, BoxIntegral, IntegrabilityVerdict, LocalIntegrability,
};
pub use sum::{calderon_restricted, calderon_sum, gabor_calderon_direct, psi_m, CalderonEvaluation};
