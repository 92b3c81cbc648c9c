//! Numerical laboratory for weighted Schwarz symmetrization of the planar
//! Robin-Laplacian
//!
//! ```text
//!   -Δu = f(x)|x|^l            in Ω
//!   ∂u/∂ν + β|x|^{l/2} u = 0   on ∂Ω
//! ```
//!
//! on polygons containing the origin, with `l ∈ (-2, 0]` and `β > 0`. The
//! crate solves the problem with P1 finite elements, rearranges the data and
//! the solution with respect to the measure `|x|^l dx`, solves the radial
//! problem on the disk of equal weighted measure and compares the two.
//!
//! Module map:
//!
//! * [`geometry`]: weighted area and perimeter of polygons, symmetrized disk
//! * [`mesh`]: graded conforming triangulations and uniform refinement
//! * [`fem`]: assembly, Robin solves and the first eigenpair
//! * [`rearrange`]: distribution functions, decreasing rearrangements
//! * [`radial`]: the symmetrized problem on the disk and its eigenvalue
//! * [`compare`]: comparison reports with discretization margins

pub mod compare;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod io;
pub mod mesh;
pub mod point;
pub mod quadrature;
pub mod radial;
pub mod rearrange;
pub mod source;
pub mod sparse;

pub use error::{Error, Result};
pub use point::Point;

/// Convenient re-exports
pub mod prelude {
    pub use crate::compare::{
        faber_krahn_report, full_suite, min_comparison, theorem1_report, theorem2_report,
        Check, CheckKind, ComparisonReport, Pipeline, SuiteConfig,
    };
    pub use crate::fem::{smallest_eigenpair, solve_robin, EigenResult, FemField};
    pub use crate::geometry::{
        isoperimetric_ratio, symmetrized_disk, weighted_area, weighted_perimeter, Shape,
        SymmetrizedDisk, WeightedDomain,
    };
    pub use crate::mesh::{refine, triangulate, TriangleMesh};
    pub use crate::radial::{radial_distribution, radial_eigen, solve_symmetrized, RadialField};
    pub use crate::rearrange::{
        decreasing_rearrangement, distribution_function, hardy_littlewood_check,
        rearranged_source, schwarz_value, DistributionCurve, RearrangementProfile,
    };
    pub use crate::source::Source;
    pub use crate::{Error, Point, Result};
}
