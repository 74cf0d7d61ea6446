//! Finite metric measure geometry: κ-cones, mm-space invariants, generalized
//! Cauchy laws and their half-line limit, and weighted Ricci curvature.

pub mod cauchy;
pub mod cone;
pub mod curvature;
pub mod experiments;
pub mod invariants;
pub mod mm;
pub mod numeric;
pub mod rng;

pub use cauchy::{CauchyError, CauchyParams, Density1D, SampleBatch};
pub use curvature::{CurvatureError, RadialDensityModel, RicciEval};
pub use cone::{cone_distance, cone_space, ConeError, ConePoint, ConeSpec};
pub use experiments::{ExperimentConfig, ExperimentError, ExperimentId, ExperimentReport, OutputFormat};
pub use invariants::{EpsMmIsomCert, InvariantError, LipschitzFamily, Mode};
pub use mm::{certify_lipschitz, empirical, euclidean, pushforward, pushforward_weights, FiniteMmSpace, MmError, PointMap};
