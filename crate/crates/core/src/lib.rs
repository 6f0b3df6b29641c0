//! Self-similar sets, fractal percolation, and box-counting estimates of the
//! dimensions of their sections and projections.
//!
//! Geometry is generic over [`Scalar`] (`f32` or `f64`); the `*64` aliases below are
//! what most callers want. Random measures and the exceptional-direction scan work
//! in `f64` and arbitrary precision respectively.

pub mod config;
pub mod error;
pub mod exceptional;
pub mod ifs;
pub mod intervals;
pub mod measures;
pub mod percolation;
pub mod regression;
pub mod rng;
pub mod scalar;
pub mod sections;

pub use config::{catalog, catalog_names, resolve, IfsConfig};
pub use error::{Error, Result};
pub use exceptional::{
    grid_scan, membership_fraction, ExceptionalParams, ExceptionalScanner, GridScan,
    MembershipResult,
};
pub use ifs::{
    attractor_points, compose, enclosing_ball, overlap_count, peres_shmerkin_subsystem,
    stopping_set, Ball, Composition, CylinderGeometry, DiskSet, Ifs, Metadata, PointCloud,
    Separation, Similarity, StoppingSet, Subsystem, Word, DEFAULT_WORD_BUDGET,
};
pub use measures::{
    convolution_split, cylinder_mass, fourier_decay, fourier_mu, fourier_psi, measure_dimension,
    sample_measure, select_q, sq_law, FourierPoint, FourierSystem, MeasureSample, RandomWeightLaw,
};
pub use percolation::{
    mandelbrot_config, moran_dimension, percolation_dimension, sample_surviving, sample_tree,
    standard_law, survival_probability, BranchingStats, OffspringLaw, PercolationSample,
};
pub use regression::DimEstimate;
pub use scalar::Scalar;
pub use sections::{
    conservation_profile, count_slice, probe_sections, projection_measure, projection_measures,
    section_dim, CellSource, ConservationProfile, Direction, Grid, ProbeResult, SliceCount,
};

pub type Similarity64 = Similarity<f64>;
pub type Ifs64 = Ifs<f64>;
pub type StoppingSet64 = StoppingSet<f64>;
pub type DimEstimate64 = DimEstimate<f64>;
pub type Direction64 = Direction<f64>;
pub type ConservationProfile64 = ConservationProfile<f64>;

pub type Similarity32 = Similarity<f32>;
pub type Ifs32 = Ifs<f32>;
