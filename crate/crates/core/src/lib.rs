//! Length-spectrum laboratory for compact hyperbolic surfaces.
//!
//! Enumerates closed geodesics of explicit Fuchsian groups, pairs them with
//! harmonic 1-forms given by their periods, and evaluates orbit sums:
//! pressure, stable norm, critical exponent, trace-formula geometric sums,
//! Gaussian correlation averages, arithmetic `L(m)` sums, truncated twisted
//! zeta values and spectral-gap bound formulas.

pub mod bounds;
pub mod cli;
pub mod forms;
pub mod fuchsian;
pub mod geodesics;
pub mod numeric;
pub mod surfaces;
pub mod thermo;
pub mod traceformula;

pub use fuchsian::{length_from_trace, power_trace, GroupElement, LengthValue, Mat2, QuadInt};
pub use forms::HarmonicForm;
pub use geodesics::{GeodesicRecord, GeodesicTable, Word};
pub use surfaces::{octagon_group, Model, SurfacePresentation};
