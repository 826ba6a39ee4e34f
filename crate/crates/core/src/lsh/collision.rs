use std::f64::consts::PI;

use crate::error::{input, Result};

pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Probability that a single discretized random projection with width `r`
/// maps two points at Euclidean distance `distance` to the same bucket.
pub fn collision_probability(distance: f64, r: f64) -> Result<f64> {
    if distance.is_nan() || distance < 0.0 {
        return input(format!("distance {distance} must be non-negative"));
    }
    if r.is_nan() || r <= 0.0 {
        return input(format!("quantization width {r} must be positive"));
    }
    if distance == 0.0 {
        return Ok(1.0);
    }
    let c = r / distance;
    let p = 1.0
        - 2.0 * standard_normal_cdf(-c)
        - 2.0 / ((2.0 * PI).sqrt() * c) * (1.0 - (-c * c / 2.0).exp());
    Ok(p.clamp(0.0, 1.0))
}
