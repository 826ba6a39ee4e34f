//! Multidimensional time series storage and rolling window statistics.

use crate::error::{input, Result};

/// Standard deviation below which a subsequence is treated as flat.
pub const FLAT_THRESHOLD: f64 = 1e-10;

/// Rolling statistics are recomputed from scratch every this many steps so
/// that incremental updates cannot drift.
const REFRESH_PERIOD: usize = 512;

/// A `D`-dimensional time series of length `n`, stored column-major so that
/// every dimension is a contiguous slice.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    columns: Vec<Vec<f64>>,
    dim_names: Option<Vec<String>>,
}

impl TimeSeries {
    /// Builds a series from one vector per dimension.
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        if columns.is_empty() {
            return input("a time series needs at least one dimension");
        }
        let n = columns[0].len();
        if n == 0 {
            return input("a time series needs at least one time step");
        }
        for (f, col) in columns.iter().enumerate() {
            if col.len() != n {
                return input(format!(
                    "dimension {f} has length {}, expected {n}",
                    col.len()
                ));
            }
            if let Some(t) = col.iter().position(|v| !v.is_finite()) {
                return input(format!("non-finite value at time {t}, dimension {f}"));
            }
        }
        Ok(Self {
            columns,
            dim_names: None,
        })
    }

    /// Builds a series from row-major data (one row per time step).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dims = rows.first().map(Vec::len).unwrap_or(0);
        let mut columns = vec![Vec::with_capacity(rows.len()); dims];
        for (t, row) in rows.iter().enumerate() {
            if row.len() != dims {
                return input(format!("row {t} has {} values, expected {dims}", row.len()));
            }
            for (col, &v) in columns.iter_mut().zip(row) {
                col.push(v);
            }
        }
        Self::from_columns(columns)
    }

    pub fn with_dim_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.dims() {
            return input(format!(
                "{} dimension names given for {} dimensions",
                names.len(),
                self.dims()
            ));
        }
        self.dim_names = Some(names);
        Ok(self)
    }

    /// Number of time steps.
    pub fn len(&self) -> usize {
        self.columns[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of dimensions.
    pub fn dims(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, f: usize) -> &[f64] {
        &self.columns[f]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn dim_names(&self) -> Option<&[String]> {
        self.dim_names.as_deref()
    }

    pub fn value(&self, t: usize, f: usize) -> f64 {
        self.columns[f][t]
    }

    /// Number of subsequences of length `w`.
    pub fn num_subsequences(&self, w: usize) -> usize {
        (self.len() + 1).saturating_sub(w)
    }

    /// The subsequence of dimension `f` starting at `a`.
    pub fn subsequence(&self, f: usize, a: usize, w: usize) -> &[f64] {
        &self.columns[f][a..a + w]
    }
}

/// Per-window means and population standard deviations for every offset
/// and every dimension.
#[derive(Clone, Debug)]
pub struct StatsTable {
    w: usize,
    means: Vec<Vec<f64>>,
    stds: Vec<Vec<f64>>,
    flat: Vec<Vec<bool>>,
}

impl StatsTable {
    pub fn window(&self) -> usize {
        self.w
    }

    pub fn num_subsequences(&self) -> usize {
        self.means[0].len()
    }

    pub fn mean(&self, a: usize, f: usize) -> f64 {
        self.means[f][a]
    }

    pub fn std(&self, a: usize, f: usize) -> f64 {
        self.stds[f][a]
    }

    pub fn is_flat(&self, a: usize, f: usize) -> bool {
        self.flat[f][a]
    }

    pub fn means(&self, f: usize) -> &[f64] {
        &self.means[f]
    }

    pub fn stds(&self, f: usize) -> &[f64] {
        &self.stds[f]
    }

    pub fn flat_flags(&self, f: usize) -> &[bool] {
        &self.flat[f]
    }
}

/// Computes the rolling mean and population standard deviation of every
/// length-`w` window of every dimension.
pub fn sliding_stats(ts: &TimeSeries, w: usize) -> Result<StatsTable> {
    if w == 0 {
        return input("window length must be positive");
    }
    if w > ts.len() {
        return input(format!(
            "window length {w} exceeds series length {}",
            ts.len()
        ));
    }
    let mut means = Vec::with_capacity(ts.dims());
    let mut stds = Vec::with_capacity(ts.dims());
    let mut flat = Vec::with_capacity(ts.dims());
    for col in ts.columns() {
        let (m, s) = rolling_column(col, w);
        flat.push(s.iter().map(|&s| s < FLAT_THRESHOLD).collect());
        means.push(m);
        stds.push(s);
    }
    Ok(StatsTable {
        w,
        means,
        stds,
        flat,
    })
}

fn exact_window(x: &[f64]) -> (f64, f64) {
    let w = x.len() as f64;
    let mean = x.iter().sum::<f64>() / w;
    let m2 = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, m2)
}

fn rolling_column(col: &[f64], w: usize) -> (Vec<f64>, Vec<f64>) {
    let count = col.len() + 1 - w;
    let wf = w as f64;
    let mut means = Vec::with_capacity(count);
    let mut stds = Vec::with_capacity(count);
    let (mut mean, mut m2) = exact_window(&col[..w]);
    for a in 0..count {
        if a > 0 {
            if a % REFRESH_PERIOD == 0 {
                (mean, m2) = exact_window(&col[a..a + w]);
            } else {
                let x_out = col[a - 1];
                let x_in = col[a + w - 1];
                let old = mean;
                mean += (x_in - x_out) / wf;
                m2 += (x_in - x_out) * (x_in - mean + x_out - old);
            }
        }
        let mut sd = (m2.max(0.0) / wf).sqrt();
        if sd < FLAT_THRESHOLD * 1e3 {
            // incremental updates cannot resolve tiny variances reliably
            let (mx, exact) = exact_window(&col[a..a + w]);
            mean = mx;
            m2 = exact;
            sd = (m2 / wf).sqrt();
        }
        means.push(mean);
        stds.push(sd);
    }
    (means, stds)
}
