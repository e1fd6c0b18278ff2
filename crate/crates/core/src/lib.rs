//! Synthesis and exceptional-point analysis of PT-symmetric supersymmetric
//! coupled-resonator arrays.
//!
//! * [`synthesis`] builds the chain by intertwining-operator recursion, in
//!   closed form, from spin operators and from a two-site Fock model.
//! * [`ep`] measures phase rigidity, its scaling toward the exceptional point
//!   and the Jordan structure at it.
//! * [`perturbation`] applies coupling perturbations at the exceptional point
//!   and fits Newton–Puiseux splitting exponents.
//! * [`linalg`] is the small dense complex eigensolver everything runs on,
//!   generic over `f64` and double-double [`scalar::Extended`].

pub mod ep;
pub mod fit;
pub mod linalg;
pub mod perturbation;
pub mod scalar;
pub mod synthesis;
pub mod tracking;

pub use scalar::Precision;
pub use synthesis::ChainSpec;
