pub mod cli;
pub mod clustering;
pub mod color;
pub mod connectivity;
pub mod contour_prior;
pub mod error;
pub mod hard_constraint;
pub mod io;
pub mod metrics;
pub mod moments;
pub mod noise;
pub mod path;
pub mod report;
pub mod supervoxel;
pub mod types;

pub use error::{Result, ScalpError};
pub use types::{ClusterState, ContourMap, Dims, LabImage, LabelMap, PathCache, ScalpParams};
