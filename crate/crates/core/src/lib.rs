//! Conjugate loci of points on smooth parameterized surfaces.
//!
//! The library integrates geodesics together with the scalar hierarchy
//! `ξ₁, ξ₂, ξ₃` (normal components of the first three `ψ`-derivatives of the
//! exponential map) and uses it to build conjugate loci, find and classify
//! their cusps, and locate the base points where cusps are created or
//! annihilated. No integral of the geodesic flow is assumed.
//!
//! Module map:
//!
//! - [`jet`]: truncated bivariate Taylor arithmetic.
//! - [`diffgeo`]: metric, Christoffel symbols, `K` and its derivatives.
//! - [`surfaces`]: sphere, triaxial ellipsoid, sectoral harmonics; charts.
//! - [`ode`]: geodesic + variational integration with events.
//! - [`locus`]: conjugate locus sweeps, cusps, classification, β-curve.
//! - [`scan`]: path scans of `ξ₃(R)` and cusp-count region maps.
//! - [`oracle`]: tensor-form second-order equation used as a cross-check.
//! - [`cli`]: configuration, CSV/JSON/SVG output for the `conjloc` binary.

pub mod cli;
pub mod diffgeo;
pub mod error;
pub mod integrator;
pub mod jet;
pub mod locus;
pub mod oracle;
pub mod ode;
pub mod roots;
pub mod scan;
pub mod surfaces;

pub use diffgeo::{ChartId, ChartPoint, CurvatureSample, FirstFundamental};
pub use error::{Error, Result};
pub use jet::Jet2;
pub use ode::{GeodesicState, IntegrateOptions, Trajectory};
pub use surfaces::{Family, SurfaceModel, SurfacePoint, SymmetryLine};
