//! Families of dual automorphisms: jacobians, bi-Lipschitz constants,
//! level sets, expansiveness classifiers and the level-band measure u_c.

mod automorphism;
mod expansiveness;
mod family;
mod level;
mod lipschitz;
mod subspace;

pub use automorphism::{Automorphism, AutomorphismKind};
pub use expansiveness::{classify_expansiveness, Envelope, Expansiveness, ExpansivenessProbe, ExpansivenessReport};
pub use family::{AutomorphismFamily, Generator, IndexSet, LevelSet, Member, Weight, DEFAULT_TRUNCATION};
pub use level::{u_c_profile, UcOptions, UcProfile};
pub use lipschitz::{
    lipschitz_constants, lipschitz_oracle, shearlet_gram_eigenvalues, LipschitzConstants, LipschitzMethod,
};
pub use subspace::{expanding_on_subspace, SubspaceVerdict};
