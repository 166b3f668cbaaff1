//! Deterministic steady-state solver for the stationary relativistic
//! Boltzmann equation with hard-sphere interactions in a slab x1 in [0,1].
//!
//! The crate is organized around the mild formulation of the transport
//! equation: the loss operator acts as an integrating factor along
//! characteristics and the gain operator is evaluated in the
//! center-of-momentum parametrization. A damped Picard iteration on the
//! resulting solution operator produces the steady state, and the `norms`
//! module provides the weighted-norm diagnostics used to check coercivity,
//! gain-term, and hyperplane estimates on the computed field.
//!
//! All numerical kernels are generic over the floating-point scalar via
//! [`Real`]; `f64` aliases for the main types live at the crate root.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

pub mod collision;
pub mod field;
pub mod norms;
pub mod quad;
pub mod relkin;
pub mod steady;

/// Scalar type the numerical kernels are generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + NumAssign
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Converts an `f64` literal into the working scalar type.
#[inline]
pub(crate) fn lit<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("literal representable in scalar type")
}

/// Errors produced by the solver and its supporting modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("degenerate pair: scattering angle undefined for g = 0")]
    DegeneratePair,
    #[error("undefined rotation target: |a| = 0")]
    UndefinedRotation,
    #[error("coercivity undefined for vacuum field")]
    VacuumField,
    #[error("ratio undefined for zero field")]
    ZeroFieldRatio,
    #[error("state corruption at iteration {iteration}: {what}")]
    StateCorruption { iteration: usize, what: String },
    #[error("fixed-point iteration did not converge in {max_iter} iterations (last residual {residual})")]
    NonConvergence { max_iter: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub use collision::Kernel;
pub use field::{DistField, PhaseGrid};
pub use norms::NormReport;
pub use quad::{MomentumQuadrature, SphereQuadrature};
pub use relkin::{CollisionPair, FourVector, LorentzTransform, Momentum3};
pub use steady::{BoundaryProfile, ConvergenceTrace, SolverConfig};

/// Concrete `f64` aliases for the main domain types.
pub type Momentum3f = Momentum3<f64>;
pub type FourVectorF = FourVector<f64>;
pub type LorentzTransformF = LorentzTransform<f64>;
pub type SphereQuadratureF = SphereQuadrature<f64>;
pub type MomentumQuadratureF = MomentumQuadrature<f64>;
pub type KernelF = Kernel<f64>;
pub type PhaseGridF = PhaseGrid<f64>;
pub type DistFieldF = DistField<f64>;
pub type BoundaryProfileF = BoundaryProfile<f64>;
pub type SolverConfigF = SolverConfig<f64>;
pub type NormReportF = NormReport<f64>;
