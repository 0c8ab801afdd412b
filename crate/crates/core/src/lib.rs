pub mod analytic;
pub mod correction;
pub mod error;
pub mod fuchsian;
pub mod linearize;
pub mod matching;
pub mod matrix;
pub mod pn_space;
pub mod poly;
pub mod rhs;
pub mod rodrigues;
pub mod scalar;
pub mod wseries;

pub use analytic::{solve_analytic, AnalyticCorrection, AnalyticOptions, PathSpec};
pub use correction::{solve_polynomial, CorrectionResult};
pub use error::{Error, Result};
pub use fuchsian::{FuchsianSystem, NonlinearSystem, ResidueLabel, RESONANCE_TOL};
pub use linearize::{linearize, normal_form, verify_conjugacy, ConjugacyReport, LinearizeOptions, Mode, Normalization, SeriesTable};
pub use matrix::Matrix;
pub use pn_space::MultiIndex;
pub use poly::{MatPoly, Poly, VecPoly};
pub use rodrigues::RodriguesFamily;
pub use scalar::{CRational, Scalar, C64};
