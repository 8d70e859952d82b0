//! Numeric evaluation against a covariance matrix, and a Monte Carlo
//! estimator used as an independent check on symbolic cumulants.

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinat::enumerate_set_partitions;
use crate::cumulants::{partition_weight, query_indices, CumulantQuery};
use crate::error::Error;
use crate::polyalg::Poly;

/// Relative tolerance for the symmetry check.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Negative pivots down to `-PSD_TOL * scale` are treated as zero.
pub const PSD_TOL: f64 = 1e-10;
/// Largest total order accepted by [`mc_estimate_cumulant`].
pub const MC_MAX_ORDER: usize = 8;

/// Symmetric covariance matrix over variables `1..=dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovMatrix {
    dim: usize,
    entries: Vec<f64>,
}

/// On-disk form: `{ "dim": n, "entries": [[...], ...] }`, row-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovMatrixFile {
    pub dim: usize,
    pub entries: Vec<Vec<f64>>,
}

impl CovMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, Error> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidMatrix("dimension must be positive".into()));
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::InvalidMatrix(format!(
                    "row {} has {} entries, expected {dim}",
                    r + 1,
                    row.len()
                )));
            }
            if let Some(c) = row.iter().position(|x| !x.is_finite()) {
                return Err(Error::InvalidMatrix(format!(
                    "entry ({},{}) is not finite",
                    r + 1,
                    c + 1
                )));
            }
            entries.extend_from_slice(row);
        }
        for i in 0..dim {
            for j in i + 1..dim {
                let (a, b) = (entries[i * dim + j], entries[j * dim + i]);
                if (a - b).abs() > SYMMETRY_TOL * a.abs().max(b.abs()) {
                    return Err(Error::InvalidMatrix(format!(
                        "not symmetric at ({},{}): {a} vs {b}",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(CovMatrix { dim, entries })
    }

    pub fn from_file(file: &CovMatrixFile) -> Result<Self, Error> {
        if file.dim != file.entries.len() {
            return Err(Error::InvalidMatrix(format!(
                "dim is {} but {} rows were given",
                file.dim,
                file.entries.len()
            )));
        }
        CovMatrix::from_rows(&file.entries)
    }

    pub fn to_file(&self) -> CovMatrixFile {
        CovMatrixFile {
            dim: self.dim,
            entries: self.entries.chunks(self.dim).map(<[f64]>::to_vec).collect(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        CovMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry for one-based variable indices.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i - 1) * self.dim + (j - 1)]
    }

    /// Correlation matrix of the same variables. Fails on a non-positive
    /// variance.
    pub fn correlation(&self) -> Result<CovMatrix, Error> {
        let n = self.dim;
        let sd: Vec<f64> = (0..n).map(|i| self.entries[i * n + i].sqrt()).collect();
        if let Some(i) = sd
            .iter()
            .position(|s| s.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater))
        {
            return Err(Error::InvalidMatrix(format!(
                "variable {} has non-positive variance and cannot be standardized",
                i + 1
            )));
        }
        let mut entries = self.entries.clone();
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = if i == j {
                    1.0
                } else {
                    self.entries[i * n + j] / (sd[i] * sd[j])
                };
            }
        }
        Ok(CovMatrix { dim: n, entries })
    }

    /// Lower-triangular `L` with `L L^T = self`, row-major. Zero pivots are
    /// allowed, so singular PSD matrices factor too.
    pub fn psd_factor(&self) -> Result<Vec<f64>, Error> {
        let n = self.dim;
        let scale = (0..n).map(|i| self.entries[i * n + i].abs()).fold(1.0, f64::max);
        let tol = PSD_TOL * scale;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let d = self.entries[j * n + j] - (0..j).map(|k| l[j * n + k] * l[j * n + k]).sum::<f64>();
            if d < -tol {
                return Err(Error::NotPsd { row: j + 1, pivot: d });
            }
            if d <= tol {
                // Zero pivot: the rest of the column must already vanish.
                for i in j + 1..n {
                    let r =
                        self.entries[i * n + j] - (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum::<f64>();
                    if r.abs() > tol.sqrt() {
                        return Err(Error::NotPsd { row: j + 1, pivot: d });
                    }
                }
                continue;
            }
            let root = d.sqrt();
            l[j * n + j] = root;
            for i in j + 1..n {
                let r = self.entries[i * n + j] - (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum::<f64>();
                l[i * n + j] = r / root;
            }
        }
        Ok(l)
    }
}

/// Substitutes the matrix entries for the covariance symbols.
pub fn eval_numeric(p: &Poly, cov: &CovMatrix) -> Result<f64, Error> {
    p.evaluate(|s| {
        if s.hi() as usize > cov.dim() {
            return Err(Error::SymbolOutOfRange {
                symbol: s,
                dim: cov.dim(),
            });
        }
        Ok(cov.get(s.lo() as usize, s.hi() as usize))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    /// Independent sample streams. Each shard uses ChaCha8 seeded from
    /// `seed` with stream id equal to its shard number, and the shards also
    /// serve as the jackknife groups for the standard error.
    pub shards: usize,
}

impl McConfig {
    pub const DEFAULT_SHARDS: usize = 64;

    pub fn new(samples: u64, seed: u64) -> Self {
        McConfig {
            samples,
            seed,
            shards: Self::DEFAULT_SHARDS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    /// Grouped-jackknife standard error; NaN with fewer than two non-empty
    /// shards.
    pub std_error: f64,
}

// Power sums of the group products over every non-empty subset of groups.
#[derive(Clone, Debug)]
struct ShardSums {
    count: u64,
    sums: Vec<f64>,
}

/// Estimates the joint cumulant of the query's group products by sampling
/// `N(0, cov)`, forming empirical product moments for every subset of
/// groups, and combining them with the partition formula.
pub fn mc_estimate_cumulant(q: &CumulantQuery, cov: &CovMatrix, cfg: &McConfig) -> Result<McEstimate, Error> {
    if cfg.samples == 0 || cfg.shards == 0 {
        return Err(Error::NoSamples);
    }
    if q.order() > MC_MAX_ORDER {
        return Err(Error::OrderLimit {
            order: q.order(),
            limit: MC_MAX_ORDER,
        });
    }
    if let Some(&index) = query_indices(q).iter().find(|&&i| i as usize > cov.dim()) {
        return Err(Error::IndexOutOfRange {
            index,
            dim: cov.dim(),
        });
    }
    let factor = cov.psd_factor()?;
    let dim = cov.dim();
    let groups: Vec<Vec<usize>> = q
        .groups()
        .iter()
        .map(|g| g.indices().iter().map(|&i| i as usize - 1).collect())
        .collect();
    let subsets = 1usize << groups.len();

    let shards = cfg.shards as u64;
    let per_shard = cfg.samples / shards;
    let extra = cfg.samples % shards;

    let shard_sums: Vec<ShardSums> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let n = per_shard + u64::from(shard < extra);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(shard);
            let mut z = vec![0.0; dim];
            let mut x = vec![0.0; dim];
            let mut prod = vec![0.0; subsets];
            let mut sums = vec![0.0; subsets];
            for _ in 0..n {
                for zi in z.iter_mut() {
                    *zi = rng.sample(StandardNormal);
                }
                for i in 0..dim {
                    x[i] = (0..=i).map(|k| factor[i * dim + k] * z[k]).sum();
                }
                prod[0] = 1.0;
                for mask in 1..subsets {
                    let low = mask.trailing_zeros() as usize;
                    let y: f64 = groups[low].iter().map(|&i| x[i]).product();
                    prod[mask] = prod[mask & (mask - 1)] * y;
                    sums[mask] += prod[mask];
                }
            }
            ShardSums { count: n, sums }
        })
        .collect();

    let plan: Vec<(f64, Vec<usize>)> = enumerate_set_partitions(groups.len())
        .map(|p| {
            let w = partition_weight(p.num_blocks()).to_f64().expect("small weight");
            let masks = p
                .blocks()
                .iter()
                .map(|b| b.iter().map(|&g| 1usize << g).sum())
                .collect();
            (w, masks)
        })
        .collect();
    let combine = |sums: &[f64], n: f64| -> f64 {
        plan.iter()
            .map(|(w, masks)| w * masks.iter().map(|&m| sums[m] / n).product::<f64>())
            .sum()
    };

    let mut total = vec![0.0; subsets];
    let mut count = 0u64;
    for s in &shard_sums {
        count += s.count;
        for (t, v) in total.iter_mut().zip(&s.sums) {
            *t += v;
        }
    }
    let estimate = combine(&total, count as f64);

    let leave_out: Vec<f64> = shard_sums
        .iter()
        .filter(|s| s.count > 0 && s.count < count)
        .map(|s| {
            let rest: Vec<f64> = total.iter().zip(&s.sums).map(|(t, v)| t - v).collect();
            combine(&rest, (count - s.count) as f64)
        })
        .collect();
    let groups_used = leave_out.len();
    let std_error = if groups_used < 2 {
        f64::NAN
    } else {
        let b = groups_used as f64;
        let mean = leave_out.iter().sum::<f64>() / b;
        let ss: f64 = leave_out.iter().map(|t| (t - mean).powi(2)).sum();
        ((b - 1.0) / b * ss).sqrt()
    };
    Ok(McEstimate { estimate, std_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cumulants::CumulantEngine;

    fn equicorrelated(dim: usize, rho: f64) -> CovMatrix {
        let rows: Vec<Vec<f64>> = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { rho }).collect())
            .collect();
        CovMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(
            eval_numeric(&Poly::symbol(1, 2), &CovMatrix::identity(2)).unwrap(),
            0.0
        );
        let p = &(&Poly::symbol(1, 1) * &Poly::symbol(2, 2))
            + &(&Poly::symbol(1, 2) * &Poly::symbol(1, 2)).scale(2);
        assert!((eval_numeric(&p, &equicorrelated(2, 0.5)).unwrap() - 1.5).abs() < 1e-15);
        let k = CumulantEngine::default()
            .cumulant(&CumulantQuery::from_slices(&[&[1, 2], &[3, 4]]).unwrap())
            .unwrap();
        assert!((eval_numeric(&k, &equicorrelated(4, 0.3)).unwrap() - 0.18).abs() < 1e-12);
    }

    #[test]
    fn eval_out_of_range() {
        let err = eval_numeric(&Poly::symbol(1, 3), &CovMatrix::identity(2)).unwrap_err();
        assert!(err.to_string().contains("V[1,3]"), "{err}");
    }

    #[test]
    fn matrix_validation() {
        assert!(CovMatrix::from_rows(&[]).is_err());
        assert!(CovMatrix::from_rows(&[vec![1.0, 0.2], vec![0.3, 1.0]]).is_err());
        assert!(CovMatrix::from_rows(&[vec![1.0, 0.2]]).is_err());
        let file = CovMatrixFile {
            dim: 3,
            entries: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        };
        assert!(CovMatrix::from_file(&file).is_err());
    }

    #[test]
    fn factor_reproduces_matrix() {
        let c =
            CovMatrix::from_rows(&[vec![2.0, 0.5, 0.1], vec![0.5, 1.0, 0.3], vec![0.1, 0.3, 0.8]]).unwrap();
        let l = c.psd_factor().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| l[i * 3 + k] * l[j * 3 + k]).sum();
                assert!((s - c.get(i + 1, j + 1)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn correlation_of_scaled_matrix() {
        let c = CovMatrix::from_rows(&[vec![4.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let r = c.correlation().unwrap();
        assert_eq!(r.get(1, 1), 1.0);
        assert!((r.get(1, 2) - 0.5).abs() < 1e-15);
        let degenerate = CovMatrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(degenerate.correlation().is_err());
    }

    #[test]
    fn singular_psd_factors() {
        // Rank one: x2 = x1.
        let c = CovMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(c.psd_factor().is_ok());
    }

    #[test]
    fn indefinite_rejected() {
        let c = CovMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(c.psd_factor(), Err(Error::NotPsd { row: 2, .. })));
        let q = CumulantQuery::from_slices(&[&[1], &[2]]).unwrap();
        assert!(mc_estimate_cumulant(&q, &c, &McConfig::new(10, 1)).is_err());
    }

    #[test]
    fn mc_guards() {
        let q = CumulantQuery::from_slices(&[&[1, 2, 3], &[1, 2, 3], &[1, 2, 3]]).unwrap();
        let c = CovMatrix::identity(3);
        assert!(matches!(
            mc_estimate_cumulant(&q, &c, &McConfig::new(10, 1)),
            Err(Error::OrderLimit { order: 9, .. })
        ));
        let q = CumulantQuery::from_slices(&[&[1], &[4]]).unwrap();
        assert!(matches!(
            mc_estimate_cumulant(&q, &c, &McConfig::new(10, 1)),
            Err(Error::IndexOutOfRange { index: 4, .. })
        ));
        let q = CumulantQuery::from_slices(&[&[1], &[2]]).unwrap();
        assert_eq!(
            mc_estimate_cumulant(&q, &c, &McConfig::new(0, 1)),
            Err(Error::NoSamples)
        );
    }

    #[test]
    fn mc_covariance() {
        let c = equicorrelated(2, 0.7);
        let q = CumulantQuery::from_slices(&[&[1], &[2]]).unwrap();
        let r = mc_estimate_cumulant(&q, &c, &McConfig::new(1_000_000, 7)).unwrap();
        assert!((r.estimate - 0.7).abs() < 3.0 * r.std_error, "{r:?}");
    }

    #[test]
    fn mc_independent_doublets() {
        let q = CumulantQuery::from_slices(&[&[1, 2], &[3, 4]]).unwrap();
        let r = mc_estimate_cumulant(&q, &CovMatrix::identity(4), &McConfig::new(1_000_000, 11)).unwrap();
        assert!(r.estimate.abs() < 3.0 * r.std_error, "{r:?}");
    }

    #[test]
    fn mc_two_doublets_correlated() {
        let q = CumulantQuery::from_slices(&[&[1, 2], &[3, 4]]).unwrap();
        let r = mc_estimate_cumulant(&q, &equicorrelated(4, 0.3), &McConfig::new(1_000_000, 3)).unwrap();
        assert!((r.estimate - 0.18).abs() < 3.0 * r.std_error, "{r:?}");
    }

    #[test]
    fn mc_is_reproducible() {
        let q = CumulantQuery::from_slices(&[&[1, 2], &[2]]).unwrap();
        let c = equicorrelated(2, 0.4);
        let cfg = McConfig::new(20_000, 99);
        let a = mc_estimate_cumulant(&q, &c, &cfg).unwrap();
        let b = mc_estimate_cumulant(&q, &c, &cfg).unwrap();
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn mc_single_sample_has_no_error_estimate() {
        let q = CumulantQuery::from_slices(&[&[1], &[2]]).unwrap();
        let r = mc_estimate_cumulant(&q, &CovMatrix::identity(2), &McConfig::new(1, 5)).unwrap();
        assert!(r.estimate.is_finite());
        assert!(r.std_error.is_nan());
    }
}
