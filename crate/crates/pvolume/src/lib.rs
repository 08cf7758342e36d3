//! Generalized p-wave scattering volume under a dipolar plus van der Waals interaction.
//!
//! The numerical core is generic over the scalar type; the aliases at the
//! bottom fix it to `f64`, which is what the CLI uses.

mod compensated;
pub mod ccsolve;
pub mod error;
pub mod levy_keller;
pub mod linalg;
pub mod ode;
pub mod potentials;
pub mod refpairs;
pub mod scalar;
pub mod scan;
pub mod specfun;
pub mod units;
pub mod volfit;

pub use error::{Error, Result};
pub use scalar::{lit, Real};

pub type UnitSystem = units::UnitSystem<f64>;
pub type Multipole = potentials::Multipole<f64>;
pub type RefPairSpec = refpairs::RefPairSpec<f64>;
pub type AsymptoticExpansion = levy_keller::AsymptoticExpansion<f64>;
pub type RiccatiTrace = levy_keller::RiccatiTrace<f64>;
pub type PhaseParams = levy_keller::PhaseParams<f64>;
pub type NodalLine = ccsolve::NodalLine<f64>;
pub type SolveRequest = ccsolve::SolveRequest<f64>;
pub type ThresholdSolution = ccsolve::ThresholdSolution<f64>;
pub type VolumeConfig = volfit::VolumeConfig<f64>;
pub type MTrace = volfit::MTrace<f64>;
pub type FitResult = volfit::FitResult<f64>;
pub type ScatteringParams = scan::ScatteringParams<f64>;
pub type ScanCurve = scan::ScanCurve<f64>;
pub type Resonance = scan::Resonance<f64>;
