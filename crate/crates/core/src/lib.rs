//! Extremal-set computations in finite discretizations of `L_p`: relative
//! Chebyshev radii and centers, the Williams–Wells inequality, Jung-constant
//! extremality, and witnesses of diameter-scale structure.

pub mod certify;
pub mod chebyshev;
pub mod cli;
pub mod error;
pub mod extremal;
pub mod gallery;
pub mod io;
mod minimax;
pub mod report;
pub mod oracle;
pub mod simplex;
pub mod space;
pub mod williams_wells;

pub use chebyshev::{
    ambient_radius, equidistant_core, relative_radius, ChebyshevSolution, EquidistantCore,
    SolverConfig,
};
pub use error::{Error, Result};
pub use extremal::{
    chain_diagnostics, extract_simplex, extremality_ratio, gulevich_margin, heavy_indices,
    jung_constant, neighbor_indices, separated_subset, Classification, HeavyIndexReport,
    SimplexSearch, SimplexWitness,
};
pub use simplex::SimplexWeights;
pub use space::{Point, PointSet, WeightedSpace};
pub use williams_wells::{alpha_exponent, ww_gap, ww_sides, WwSides};
