//! CSV ingestion and synthetic planted-motif datasets.

use std::f64::consts::PI;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{input, Error, Result};
use crate::series::TimeSeries;

#[derive(Clone, Copy, Debug)]
pub struct CsvOptions {
    pub has_header: bool,
    pub delimiter: u8,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            has_header: false,
            delimiter: b',',
        }
    }
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: Some(path.to_path_buf()),
        source,
    }
}

/// Reads a CSV file with one time step per row and one dimension per column.
/// Rows and columns in errors are 1-based and count the header line.
pub fn load_csv(path: impl AsRef<Path>, options: CsvOptions) -> Result<TimeSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(options.has_header)
        .delimiter(options.delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let names = if options.has_header {
        let header = reader.headers().map_err(|e| Error::Input(e.to_string()))?;
        Some(header.iter().map(str::to_owned).collect::<Vec<_>>())
    } else {
        None
    };
    let mut columns: Vec<Vec<f64>> = names.as_ref().map(|n| vec![Vec::new(); n.len()]).unwrap_or_default();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Input(e.to_string()))?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if columns.is_empty() {
            columns = vec![Vec::new(); record.len()];
        }
        if record.len() != columns.len() {
            return Err(Error::Ragged {
                row,
                found: record.len(),
                expected: columns.len(),
            });
        }
        for (c, (cell, col)) in record.iter().zip(columns.iter_mut()).enumerate() {
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => col.push(v),
                _ => {
                    return Err(Error::Parse {
                        row,
                        column: c + 1,
                        value: cell.to_owned(),
                    })
                }
            }
        }
    }
    if columns.is_empty() || columns[0].is_empty() {
        return input(format!("{} contains no data rows", path.display()));
    }
    let ts = TimeSeries::from_columns(columns)?;
    match names {
        Some(names) => ts.with_dim_names(names),
        None => Ok(ts),
    }
}

/// Writes the series as CSV, with a header row when it has dimension names.
/// Values use the shortest representation that parses back exactly.
pub fn write_csv(ts: &TimeSeries, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = std::io::BufWriter::new(File::create(path).map_err(|e| io_error(path, e))?);
    let write = |out: &mut std::io::BufWriter<File>| -> std::io::Result<()> {
        if let Some(names) = ts.dim_names() {
            writeln!(out, "{}", names.join(","))?;
        }
        for t in 0..ts.len() {
            let row: Vec<String> = (0..ts.dims()).map(|f| format!("{:?}", ts.value(t, f))).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        out.flush()
    };
    write(&mut out).map_err(|e| io_error(path, e))
}

/// Shape of a synthetic dataset: a `dims`-dimensional random walk with a
/// sinusoidal pattern planted twice in `d` dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantedSpec {
    pub n: usize,
    pub dims: usize,
    pub d: usize,
    pub w: usize,
    /// Standard deviation of the noise added to the second copy, relative
    /// to the unit amplitude of the pattern.
    pub noise_sigma: f64,
    pub exclusion: usize,
}

impl PlantedSpec {
    pub fn new(n: usize, dims: usize, d: usize, w: usize) -> Self {
        Self {
            n,
            dims,
            d,
            w,
            noise_sigma: 0.01,
            exclusion: w / 2,
        }
    }

    pub fn with_noise(mut self, noise_sigma: f64) -> Self {
        self.noise_sigma = noise_sigma;
        self
    }
}

#[derive(Clone, Debug)]
pub struct Planted {
    pub series: TimeSeries,
    /// Start offsets of the two copies, `a < b`.
    pub positions: (usize, usize),
    /// Dimensions carrying the pattern, increasing.
    pub dims: Vec<usize>,
}

/// Cycles of the sinusoid within one window.
const PATTERN_CYCLES: f64 = 3.0;

pub fn generate_planted(spec: &PlantedSpec, seed: u64) -> Result<Planted> {
    let PlantedSpec { n, dims, d, w, noise_sigma, exclusion } = *spec;
    if dims == 0 || d == 0 || d > dims {
        return input(format!("need 1 <= d <= D, got d = {d}, D = {dims}"));
    }
    if w == 0 || n < 2 * w + exclusion {
        return input(format!(
            "n = {n} is too short for two non-overlapping windows of length {w}"
        ));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return input(format!("noise scale {noise_sigma} must be non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns: Vec<Vec<f64>> = (0..dims)
        .map(|_| {
            let mut level = 0.0;
            (0..n)
                .map(|_| {
                    level += rng.sample::<f64, _>(StandardNormal);
                    level
                })
                .collect()
        })
        .collect();

    let mut planted_dims = sample(&mut rng, dims, d).into_vec();
    planted_dims.sort_unstable();
    let gap = w.max(exclusion + 1);
    let (a, b) = loop {
        let x = rng.gen_range(0..=n - w);
        let y = rng.gen_range(0..=n - w);
        if x.abs_diff(y) >= gap {
            break (x.min(y), x.max(y));
        }
    };
    let noise = Normal::new(0.0, noise_sigma).map_err(|e| Error::Input(e.to_string()))?;
    for &f in &planted_dims {
        let phase = rng.gen_range(0.0..2.0 * PI);
        let pattern: Vec<f64> = (0..w)
            .map(|t| (2.0 * PI * PATTERN_CYCLES * t as f64 / w as f64 + phase).sin())
            .collect();
        let col = &mut columns[f];
        let (base_a, base_b) = (col[a], col[b]);
        for t in 0..w {
            col[a + t] = base_a + pattern[t];
            col[b + t] = base_b + pattern[t] + noise.sample(&mut rng);
        }
    }
    Ok(Planted {
        series: TimeSeries::from_columns(columns)?,
        positions: (a, b),
        dims: planted_dims,
    })
}
