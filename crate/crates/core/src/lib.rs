//! Estimation of planar sets from point samples by stochastic cone erasing.
//!
//! The crate is organised around the estimator in [`eraser`]: the frame
//! minus every random empty cone found, approximating the cone-convex hull
//! by complement of the sample. [`shapes`] supplies ground-truth sets and
//! samplers, [`metrics`] the set distances, [`oracle`] brute-force
//! certificates, and [`experiments`] the replicated harness behind the CLI.

pub mod eraser;
pub mod experiments;
pub mod geom;
pub mod metrics;
pub mod oracle;
pub mod shapes;
pub mod svg;

pub use eraser::{
    run, run_ball_eraser, EraseMode, EraserConfig, EraserError, ErasedRegion, Sample, SweepResult,
};
pub use geom::{Frame, FiniteCone, Height, Membership, Point, Sector, UnitVector};
