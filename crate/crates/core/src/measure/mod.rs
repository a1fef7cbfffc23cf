//! Source densities and the quadrature used to integrate against them.

mod density;
mod quadrature;

pub use density::{
    Density, DensitySpec, LineFamily, PlaneFamily, GAUSSIAN_TRUNCATION, LAPLACE_TRUNCATION,
};
pub use quadrature::{
    integrate_1d, integrate_1d_vec, integrate_polygon, integrate_polygon_vec, integrate_segment,
    refined_breakpoints, split_along_lines, GaussLegendre, LineRefinement, QuadError,
    QuadratureSpec, Refinement,
};
