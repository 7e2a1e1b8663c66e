pub mod curve;
pub mod domain;
pub mod measures;
pub mod mesh;

pub use curve::{BoundaryCurve, Component, Vec2};
pub use domain::{DomainConfig, DomainSpec};
pub use measures::{
    curvature_l1_deviation, curvature_moments, measures, minkowski_integral, reference_constants, total_curvature,
    touching_radii, GeometricSummary, Measures,
};
pub use mesh::{triangulate, BoundaryEdge, Mesh};
