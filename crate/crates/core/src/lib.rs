pub mod bounds;
pub mod cli;
pub mod error;
pub mod format;
pub mod hypercube;
pub mod martingale;
pub mod measure;
pub mod montecarlo;
pub mod report;
pub mod suites;
pub mod threshold;

pub use error::{Error, Result};
pub use hypercube::{
    BooleanFunction, FamilySpec, Permutation, PermutationGenerators, DEFAULT_MAX_ARITY,
};
pub use measure::{Bias, CubeFunction, InfluenceVector};
pub use report::{BoundReport, Orientation};
