//! Top-k subdimensional motif discovery in multidimensional time series.
//!
//! A subdimensional motif is the closest pair of non-overlapping
//! subsequences when distance is measured over the best `d` of `D`
//! dimensions. Discovery hashes every dimension of every subsequence with
//! tensored discretized random projections, walks the resulting index from
//! long to short hash prefixes and stops as soon as the probability of
//! having missed a closer pair falls below a user-given δ.
//!
//! ```no_run
//! use mdmotif_core::{discover_motifs, generate_planted, DiscoveryParams, PlantedSpec};
//!
//! let planted = generate_planted(&PlantedSpec::new(2000, 5, 2, 100), 42).unwrap();
//! let params = DiscoveryParams::new(100, 1, 2).with_seed(7);
//! let result = discover_motifs(&planted.series, &params).unwrap();
//! println!("{:?}", result.motifs[0]);
//! ```

pub mod data;
pub mod discovery;
pub mod distance;
pub mod error;
pub mod index;
pub mod lsh;
pub mod oracle;
pub mod params;
pub mod series;

pub use data::{generate_planted, load_csv, write_csv, CsvOptions, Planted, PlantedSpec};
pub use discovery::{
    discover_motifs, discover_motifs_multi, exhaustive_scan, failure_bound, pair_weight, BoundGeometry, Counters,
    Discovery, DiscoveryOutcome, MotifResult, RepetitionTrace, StopPoint,
};
pub use distance::{dist_d, is_trivial_match, znorm_distance, DistanceProfile, MotifPair};
pub use error::{Error, Result};
pub use index::{build_index, HashIndex};
pub use lsh::{build_hash_pool, collision_probability, compute_all_hashes, estimate_quantization_width, HashMatrix, HashPool};
pub use oracle::{contrast, contrast_with_kth, exact_topk, non_trivial_pairs, ContrastReport};
pub use params::{BoundKind, DimRange, DiscoveryParams};
pub use series::{sliding_stats, StatsTable, TimeSeries};
