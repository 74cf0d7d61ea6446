//! Seeded sampling of generalized Cauchy vectors as `z / √W`, with `z`
//! standard Gaussian and `W` an independent chi-square with `β` degrees of
//! freedom.
//!
//! Row `i` is produced by the stream of its chunk: the `n` Gaussian
//! coordinates are drawn first, then `W`.

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{radial_law, CauchyError, CauchyParams};
use crate::numeric::ks_from_sorted_cdf;
use crate::rng::{chunks, stream_rng, CHUNK_ROWS, GENERATOR_ID};

fn chi_squared(beta: f64) -> Result<ChiSquared<f64>, CauchyError> {
    ChiSquared::new(beta).map_err(|_| CauchyError::InvalidBeta(beta))
}

fn draw_row(rng: &mut ChaCha8Rng, chi: &ChiSquared<f64>, factor: f64, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
    let scale = factor / chi.sample(rng).sqrt();
    out.iter_mut().for_each(|v| *v *= scale);
}

/// Sidecar metadata of a persisted batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    #[serde(rename = "N")]
    pub rows: usize,
    pub n: usize,
    pub beta: f64,
    pub seed: u64,
    pub generator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

/// `N` seeded draws in `ℝⁿ`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    params: CauchyParams,
    seed: u64,
    data: Vec<f64>,
}

impl SampleBatch {
    pub fn params(&self) -> &CauchyParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.params.n
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.params.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.params.n..(i + 1) * self.params.n]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn norms(&self) -> Vec<f64> {
        self.data
            .par_chunks(self.params.n)
            .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect()
    }

    pub fn meta(&self) -> SampleMeta {
        SampleMeta {
            rows: self.rows(),
            n: self.params.n,
            beta: self.params.beta,
            seed: self.seed,
            generator: GENERATOR_ID.to_owned(),
            scale: self.params.scale,
        }
    }

    /// The sidecar path belonging to a binary file.
    pub fn sidecar_path(path: &Path) -> PathBuf {
        let mut s = path.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    }

    /// Writes little-endian `f64` rows to `path` and metadata to
    /// `path.json`.
    pub fn write(&self, path: &Path) -> Result<(), CauchyError> {
        let bytes: Vec<u8> = self.data.iter().flat_map(|v| v.to_le_bytes()).collect();
        fs::write(path, bytes).map_err(|e| CauchyError::Io(e.to_string()))?;
        let meta = serde_json::to_string_pretty(&self.meta()).map_err(|e| CauchyError::Format(e.to_string()))?;
        fs::write(Self::sidecar_path(path), meta).map_err(|e| CauchyError::Io(e.to_string()))
    }

    /// Reads a batch written by [`write`](Self::write).
    pub fn read(path: &Path) -> Result<Self, CauchyError> {
        let meta_text =
            fs::read_to_string(Self::sidecar_path(path)).map_err(|e| CauchyError::Io(e.to_string()))?;
        let meta: SampleMeta =
            serde_json::from_str(&meta_text).map_err(|e| CauchyError::Format(e.to_string()))?;
        if meta.generator != GENERATOR_ID {
            return Err(CauchyError::Format(format!("unknown generator {}", meta.generator)));
        }
        let bytes = fs::read(path).map_err(|e| CauchyError::Io(e.to_string()))?;
        if bytes.len() != meta.rows * meta.n * 8 {
            return Err(CauchyError::Format(format!(
                "{} bytes for {} x {} values",
                bytes.len(),
                meta.rows,
                meta.n
            )));
        }
        let data = bytes
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("chunk of 8")))
            .collect();
        let mut params = CauchyParams::new(meta.n, meta.beta)?;
        if let Some(s) = meta.scale {
            params = params.with_scale(s)?;
        }
        Ok(SampleBatch {
            params,
            seed: meta.seed,
            data,
        })
    }
}

/// Draws `rows` i.i.d. vectors.
pub fn sample(params: &CauchyParams, rows: usize, seed: u64) -> Result<SampleBatch, CauchyError> {
    if rows == 0 {
        return Err(CauchyError::EmptyBatch);
    }
    let chi = chi_squared(params.beta)?;
    let n = params.n;
    let factor = params.factor();
    let mut data = vec![0.0; rows * n];
    data.par_chunks_mut(CHUNK_ROWS * n)
        .enumerate()
        .for_each(|(c, block)| {
            let mut rng = stream_rng(seed, c as u64);
            for row in block.chunks_mut(n) {
                draw_row(&mut rng, &chi, factor, row);
            }
        });
    Ok(SampleBatch {
        params: *params,
        seed,
        data,
    })
}

/// Applies `f` to each row of the batch `sample(params, rows, seed)`
/// without materializing it.
pub fn sample_map<T, F>(params: &CauchyParams, rows: usize, seed: u64, f: F) -> Result<Vec<T>, CauchyError>
where
    T: Send,
    F: Fn(&[f64]) -> T + Sync,
{
    if rows == 0 {
        return Err(CauchyError::EmptyBatch);
    }
    let chi = chi_squared(params.beta)?;
    let factor = params.factor();
    let blocks: Vec<Vec<T>> = chunks(rows)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(c, start, end)| {
            let mut rng = stream_rng(seed, c);
            let mut buf = vec![0.0; params.n];
            (start..end)
                .map(|_| {
                    draw_row(&mut rng, &chi, factor, &mut buf);
                    f(&buf)
                })
                .collect()
        })
        .collect();
    Ok(blocks.into_iter().flatten().collect())
}

/// Euclidean norms of the rows of `sample(params, rows, seed)`.
pub fn sample_radii(params: &CauchyParams, rows: usize, seed: u64) -> Result<Vec<f64>, CauchyError> {
    sample_map(params, rows, seed, |r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// KS distance between the norm of the first `k` coordinates of an
/// `n`-dimensional batch and the exact `k`-dimensional radial law.
pub fn projection_consistency(
    params: &CauchyParams,
    k: usize,
    rows: usize,
    seed: u64,
) -> Result<f64, CauchyError> {
    if k == 0 || k >= params.n {
        return Err(CauchyError::InvalidProjection { k, n: params.n });
    }
    let mut radii = sample_map(params, rows, seed, |r| {
        r[..k].iter().map(|v| v * v).sum::<f64>().sqrt()
    })?;
    radii.sort_by(f64::total_cmp);
    let law = radial_law(&CauchyParams {
        n: k,
        ..*params
    });
    Ok(ks_from_sorted_cdf(&law.cdf_sorted(&radii)?))
}

/// Running averages `(1/m) Σ_{i ≤ m} (z_i/√W)²` at each checkpoint `m`, one
/// row per path; each path shares a single `W` across its terms.
pub fn exchangeable_sequence(
    beta: f64,
    checkpoints: &[usize],
    paths: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, CauchyError> {
    if beta <= 2.0 {
        return Err(CauchyError::MomentDiverges {
            beta,
            moment: "second moment",
        });
    }
    if checkpoints.is_empty() || checkpoints[0] == 0 || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CauchyError::InvalidArgument(checkpoints.first().copied().unwrap_or(0) as f64));
    }
    let chi = chi_squared(beta)?;
    let last = *checkpoints.last().unwrap();
    Ok((0..paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = stream_rng(seed, p as u64);
            let w = chi.sample(&mut rng);
            let mut out = Vec::with_capacity(checkpoints.len());
            let mut next = 0;
            let mut sum = 0.0;
            for m in 1..=last {
                let z: f64 = rng.sample(StandardNormal);
                sum += z * z;
                if m == checkpoints[next] {
                    out.push(sum / (m as f64 * w));
                    next += 1;
                }
            }
            out
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{ks_critical_99, ks_statistic};
    use std::f64::consts::PI;

    #[test]
    fn reproducible_and_thread_independent() {
        let p = CauchyParams::new(3, 1.5).unwrap();
        let a = sample(&p, 3000, 11).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| sample(&p, 3000, 11).unwrap());
        assert_eq!(a, b);
        assert_ne!(a, sample(&p, 3000, 12).unwrap());
        assert_eq!(a.norms(), sample_radii(&p, 3000, 11).unwrap());
    }

    #[test]
    fn normalized_batch_is_rescaled_batch() {
        let n = 16;
        let raw = sample(&CauchyParams::new(n, 2.0).unwrap(), 500, 3).unwrap();
        let scaled = sample(&CauchyParams::normalized(n, 2.0).unwrap(), 500, 3).unwrap();
        let s = 1.0 / (n as f64).sqrt();
        for (a, b) in raw.data().iter().zip(scaled.data()) {
            assert!((a * s - b).abs() <= 1e-15 * b.abs().max(1e-300) * 4.0);
        }
    }

    #[test]
    fn first_coordinate_is_standard_cauchy() {
        let rows = 20_000;
        let b = sample(&CauchyParams::new(4, 1.0).unwrap(), rows, 5).unwrap();
        let x1: Vec<f64> = (0..rows).map(|i| b.row(i)[0]).collect();
        let d = ks_statistic(&x1, |x| 0.5 + x.atan() / PI);
        assert!(d < ks_critical_99(rows), "{d}");
    }

    #[test]
    fn projection_single_sample() {
        let p = CauchyParams::new(3, 1.0).unwrap();
        let d = projection_consistency(&p, 1, 1, 9).unwrap();
        let b = sample(&p, 1, 9).unwrap();
        let f = 2.0 / PI * b.row(0)[0].abs().atan();
        assert!((d - f.max(1.0 - f)).abs() < 1e-9);
        assert!(projection_consistency(&p, 3, 10, 9).is_err());
    }

    #[test]
    fn persisted_batch_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("batch.bin");
        let b = sample(&CauchyParams::normalized(5, 3.0).unwrap(), 77, 42).unwrap();
        b.write(&path).unwrap();
        let meta: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(SampleBatch::sidecar_path(&path)).unwrap()).unwrap();
        assert_eq!(meta["N"], 77);
        assert_eq!(meta["n"], 5);
        assert_eq!(meta["seed"], 42);
        assert_eq!(SampleBatch::read(&path).unwrap(), b);
    }

    #[test]
    fn exchangeable_paths_converge_within_path() {
        let avg = exchangeable_sequence(4.0, &[100, 1000, 10_000], 50, 1).unwrap();
        assert_eq!(avg.len(), 50);
        let spread = |k: usize| {
            avg.iter()
                .map(|r| (r[k + 1] - r[k]).abs() * r[2].recip())
                .sum::<f64>()
        };
        assert!(spread(1) < spread(0));
        assert!(exchangeable_sequence(2.0, &[10], 3, 1).is_err());
    }
}
