//! Multi-view clustering by jointly factorizing several base kernels.
//!
//! Each view supplies an `n × n` kernel `K_v`. The solver learns a shared
//! row-orthonormal embedding `H` (`k × n`), per-view coefficient matrices
//! `G_v` with `K_v ≈ G_v H`, and simplex view weights `ω`, by closed-form
//! alternating updates. The columns of `H` are then clustered with
//! multi-restart k-means.
//!
//! ```no_run
//! use mvkmf::prelude::*;
//!
//! let (views, truth) = make_synthetic(50, 4, 3, 10.0, 1.0, 7).unwrap();
//! let kernels = views
//!     .iter()
//!     .map(|f| build_kernel(f, &KernelSpec::default()).unwrap())
//!     .collect();
//! let ks = KernelSet::new(kernels).unwrap();
//! let cfg = SolverConfig::new(4).with_alpha(128.0);
//! let res = run_algorithm(&ks, Algorithm::Umklmf, &cfg, 50, Some(&truth)).unwrap();
//! println!("{:?}", res.metrics);
//! ```
//!
//! Modules:
//! - [`kernels`]: kernel construction, normalization and validation
//! - [`solver`]: the factorization and the KKM / MKKM baselines
//! - [`kmeans`], [`metrics`]: discretization and scoring
//! - [`stats`]: Friedman / Iman–Davenport test and Nemenyi CD
//! - [`io`], [`pipeline`], [`bench`], [`cli`]: files and orchestration

pub mod bench;
pub mod cli;
pub mod error;
pub mod io;
pub mod kernels;
pub mod kmeans;
pub mod linalg;
pub mod metrics;
pub mod pipeline;
pub mod solver;
pub mod stats;

pub use error::{Error, Result};

/// The commonly used types and functions in one import.
pub mod prelude {
    pub use crate::bench::{run_plan, ExperimentPlan};
    pub use crate::error::{Error, Result};
    pub use crate::io::{load_manifest, make_synthetic, read_matrix, write_matrix, DatasetManifest};
    pub use crate::kernels::{
        build_kernel, normalize_kernel, validate_kernel_set, FeatureMatrix, KernelMatrix, KernelSet, KernelSpec,
        NormalizeMode,
    };
    pub use crate::kmeans::{kmeans, KMeansConfig};
    pub use crate::metrics::{Metric, MetricReport};
    pub use crate::pipeline::{run_algorithm, Algorithm, ClusteringResult};
    pub use crate::solver::{fit, fit_kkm, fit_mkkm, ObjectiveVariant, SolverConfig, SolverState};
    pub use crate::stats::{friedman, nemenyi_cd, ResultsTable};
}
