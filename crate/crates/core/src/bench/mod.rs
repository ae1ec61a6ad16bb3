//! Verification bench: discrete comparison, convergence, calibration,
//! distance and cone checks, and the planar discontinuity analysis. Every
//! check produces a [`BenchReport`].

pub mod calibrate;
pub mod cones;
pub mod converge;
pub mod domain;
pub mod ordering;
pub mod report;
pub mod twod;

pub use calibrate::{calibration_oracle, calibration_suite, Calibration, CalibrationSuite};
pub use cones::{cone_comparison_test, cone_suite, ConeOutcome, ConeSide, ConeSuite, GridField, IndexBox};
pub use converge::{convergence_test, ConvergenceConfig};
pub use domain::{distance_report, eigen_estimate, eigen_report, eikonal_residual, finsler_distance, segment_distance, DistanceConfig, DistanceField, Domain2Poly};
pub use ordering::{ordering_suite, ordering_test, OrderingSuite, PairOutcome};
pub use report::{BenchReport, Cell, Check, Table};
pub use twod::{twod_analysis, twod_report, twod_smooth, TwoDAnalysis};
