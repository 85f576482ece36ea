//! Homotopy Rota-Baxter systems: minimal models, their homotopy transfer data,
//! Yang-Baxter correspondences and the L-infinity deformation complex, all
//! computed with exact rational arithmetic.

pub mod signs;
pub mod tree_operad;
pub mod rbs_minimal_model;
pub mod monomial_model;
pub mod graded_linear;
pub mod homotopy_rbs_checker;
pub mod yang_baxter;
pub mod linfty_deformation;

pub use signs::Scalar;

/// Exact rational scalars used throughout.
pub type Rational = num_rational::BigRational;

pub type Element = tree_operad::OperadElement<Rational>;
