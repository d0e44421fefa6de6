//! Exact Voronoi cells of hierarchically refined simple-cubic lattices.

pub mod analysis;
pub mod error;
pub mod exactnum;
pub mod figures;
pub mod lattice;
pub mod meshio;
pub mod planar;
pub mod voronoi;

pub use error::{Error, Result};
pub use exactnum::{solve3, triple_product, Mat3R, Rat, Vec3R};
pub use lattice::{BoxR, RefinementPlan, ShellHistogram, Site, SiteClass, Stage};
pub use voronoi::{CellBuilder, ConvexCell, FVector};
