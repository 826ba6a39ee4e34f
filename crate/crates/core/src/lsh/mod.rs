//! Discretized random projections of z-normalized subsequences.
//!
//! A scalar hash is `floor((a . z + b) / r)` for a standard-normal direction
//! `a`, a uniform offset `b` in `[0, r)` and the z-normalized subsequence `z`.
//! Words of `K` symbols are built by interleaving two half-words drawn from a
//! left and a right bank of `m` functions each, giving `L = m^2` repetitions
//! out of `K * m` distinct direction vectors per dimension.

mod collision;
mod hashing;
mod pool;

pub use collision::{collision_probability, standard_normal_cdf};
pub use hashing::{compute_all_hashes, sliding_dot_products, HashMatrix};
pub use pool::{
    build_hash_pool, estimate_quantization_width, BankSide, HashPool, WidthEstimate, MAX_CONCATENATIONS,
};
