//! Numerical verification and reconstruction engine for Lagrangian
//! submanifolds of the nearly Kähler S³ × S³.
//!
//! The crate is organized bottom-up:
//!
//! * [`jet`], [`quat`]: differentiable scalars and quaternion arithmetic.
//! * [`ambient`]: the homogeneous nearly Kähler structure on S³ × S³ —
//!   frames, the almost complex structure J, the almost product structure P,
//!   both metrics, the tensors G = ∇̃J and ∇̃P, the curvature tensor, and
//!   conversions between the Euclidean, product, and nearly Kähler
//!   connections.
//! * [`lagrangian`]: everything attached to a Lagrangian immersion — jets,
//!   induced frames, the A/B operators and angle functions, the second
//!   fundamental form, connection coefficients, identity residuals, and the
//!   curvature-based classifier.
//! * [`catalog`]: the eight closed-form example immersions with their
//!   expected property records.
//! * [`reconstruct`]: frame-ODE and coordinate-PDE integrators that rebuild
//!   the two non-totally-geodesic examples from their structure equations,
//!   plus isometry alignment between sampled immersions.
//! * [`grid`], [`report`]: sampled-immersion files with finite-difference
//!   jets, and machine-readable verification reports.

pub mod ambient;
pub mod catalog;
pub mod error;
pub mod grid;
pub mod reconstruct;
pub mod report;
pub mod jet;
pub mod lagrangian;
pub mod quat;

pub use ambient::{AmbientDeriv, AmbientPoint, AmbientVector, Isometry};
pub use catalog::{
    all_examples, construct_example, expected_properties, Example, ExampleParams,
    ExpectedProperties, EXAMPLE_NAMES,
};
pub use error::{GeomError, Result};
pub use grid::{FileImmersion, GridSpec, SampledImmersionFile};
pub use reconstruct::{
    case1a_chart_records, integrate_case1a, integrate_case1b, isometry_align, AlignResult,
    FrameStateS3, PathSegment, TorusGrid, TorusInit, TorusState,
};
pub use report::{
    all_checks, ambient_checks, example_checks, ChartGrid, Check, ReportFormat, RunConfig,
    VerificationReport, REPORT_SCHEMA_VERSION,
};
pub use jet::{Jet1, Jet2, Real};
pub use lagrangian::classify::{classify, Classification, ClassificationLabel};
pub use lagrangian::residuals::{residual, ResidualReport, RESIDUAL_IDS};
pub use lagrangian::{
    sectional_from_analysis, AnalysisConfig, Immersion, ImmersionJet, LagrangianFrame,
    PointAnalysis,
};
pub use quat::Quat;
