//! Toeplitz-type groupoids, their convolution *-algebras, and the odd
//! quantum spheres realized inside them.
//!
//! The ambient object is the n-dimensional Toeplitz groupoid: the
//! transformation groupoid of ℤⁿ acting by translation on ℤ̄ⁿ (with ∞
//! fixed), restricted to the nonnegative units, with an extra global ℤ
//! coordinate.  Inside it live
//!
//! - the subgroupoid F̃ₙ cut out by a linear condition on shifts over
//!   ∞-coordinates ([`groupoid`]),
//! - the quotient groupoid Fₙ = F̃ₙ/∼ obtained by saturating every unit
//!   from its first ∞ entry onward ([`groupoid::CanonicalClass`]),
//! - a convolution *-algebra of shift-band-limited functions with exact
//!   symbolic coefficients ([`algebra`], coefficients in [`coeff`]),
//! - the quantum-sphere generator family and a battery of structure
//!   checks ([`spheres`]),
//! - truncated matrix representations serving as the numeric oracle for
//!   every symbolic claim ([`rep`]).
//!
//! Everything is exact where it can be: identities between algebra
//! elements are certified by an expression normal form, and only then
//! cross-checked against dense complex matrices on finite windows.
//! A certificate of `Unknown` is always a failure, never a silent pass.

pub mod algebra;
pub mod coeff;
pub mod groupoid;
pub mod rep;
pub mod report;
pub mod rng;
pub mod spheres;

pub use algebra::{AlgebraElement, BoundaryElement, Certificate};
pub use coeff::{CoeffExpr, NormalForm, ZeroStatus};
pub use groupoid::{CanonicalClass, ExtNat, GroupoidElement, Shift, Unit};
pub use rep::{ReprConfig, TruncatedMatrix};
pub use report::{CheckItem, CheckReport, CheckStatus, Witness};
pub use rng::Lcg64;
pub use spheres::GeneratorSet;
