//! Deterministic generation of PSD matrices and structured pairs.
//!
//! Every draw comes from a `ChaCha8` stream seeded with a 64-bit value.
//! Parallel trials use [`derive_seed`] to get independent streams, so
//! output never depends on evaluation order. Gaussian variates use the
//! ziggurat method from `rand_distr::StandardNormal`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symla::SymMatrix;

/// Range of eigenvalues drawn for commuting pairs.
pub const COMMUTING_SPECTRUM: (f64, f64) = (0.1, 4.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleKind {
    /// `GᵀG` with `G` an `n × n` standard Gaussian matrix.
    Wishart,
    /// `Q diag(λ) Qᵀ` with a Haar-random orthogonal `Q`.
    SpectrumGiven { eigenvalues: Vec<f64> },
    /// `B` Wishart, `A = B + W` with `W` an independent Wishart increment.
    OrderedPair,
    /// Independent spectra in a shared random eigenbasis.
    CommutingPair,
    /// Two random orthogonal projections of random rank.
    ProjectionPair,
    /// `GᵀG` with `G` a `rank × n` Gaussian matrix.
    RankDeficient { rank: usize },
}

impl fmt::Display for SampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleKind::Wishart => f.write_str("wishart"),
            SampleKind::SpectrumGiven { eigenvalues } => {
                let v: Vec<String> = eigenvalues.iter().map(|x| x.to_string()).collect();
                write!(f, "spectrum:{}", v.join(","))
            }
            SampleKind::OrderedPair => f.write_str("ordered"),
            SampleKind::CommutingPair => f.write_str("commuting"),
            SampleKind::ProjectionPair => f.write_str("projection"),
            SampleKind::RankDeficient { rank } => write!(f, "rank_deficient:{rank}"),
        }
    }
}

/// `wishart` | `ordered` | `commuting` | `projection` |
/// `rank_deficient:<r>` | `spectrum:<λ1>,<λ2>,...`
impl FromStr for SampleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::Parse(format!("bad sample kind `{s}`: {msg}"));
        match s.split_once(':') {
            None => match s {
                "wishart" => Ok(SampleKind::Wishart),
                "ordered" | "ordered_pair" => Ok(SampleKind::OrderedPair),
                "commuting" | "commuting_pair" => Ok(SampleKind::CommutingPair),
                "projection" | "projection_pair" => Ok(SampleKind::ProjectionPair),
                _ => Err(bad("unknown kind".into())),
            },
            Some(("rank_deficient", r)) => Ok(SampleKind::RankDeficient {
                rank: r.parse().map_err(|e| bad(format!("{e}")))?,
            }),
            Some(("spectrum", list)) => Ok(SampleKind::SpectrumGiven {
                eigenvalues: list
                    .split(',')
                    .map(|x| x.trim().parse::<f64>().map_err(|e| bad(format!("{e}"))))
                    .collect::<Result<_>>()?,
            }),
            _ => Err(bad("unknown kind".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub dim: usize,
    pub kind: SampleKind,
    pub seed: u64,
}

impl SampleSpec {
    pub fn new(dim: usize, kind: SampleKind, seed: u64) -> Self {
        SampleSpec { dim, kind, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        match &self.kind {
            SampleKind::RankDeficient { rank } if *rank > self.dim => Err(Error::InvalidParameter(format!(
                "rank {rank} exceeds dimension {}",
                self.dim
            ))),
            SampleKind::SpectrumGiven { eigenvalues } => {
                if eigenvalues.len() != self.dim {
                    return Err(Error::InvalidParameter(format!(
                        "{} eigenvalues given for dimension {}",
                        eigenvalues.len(),
                        self.dim
                    )));
                }
                if eigenvalues.iter().any(|&l| !(l >= 0.0 && l.is_finite())) {
                    return Err(Error::InvalidParameter("eigenvalues must be finite and nonnegative".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of stream `index` under `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

/// Row-major `rows × dim` Gaussian factor `G`; its Gram matrix `GᵀG` is PSD
/// with rank at most `rows`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianFactor {
    pub rows: usize,
    pub dim: usize,
    pub entries: Vec<f64>,
}

impl GaussianFactor {
    pub fn sample<R: Rng + ?Sized>(rows: usize, dim: usize, rng: &mut R) -> Self {
        GaussianFactor {
            rows,
            dim,
            entries: (0..rows * dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect(),
        }
    }

    /// `GᵀG`.
    pub fn gram(&self) -> SymMatrix {
        let n = self.dim;
        let g = &self.entries;
        SymMatrix::from_upper(n, |i, j| (0..self.rows).map(|r| g[r * n + i] * g[r * n + j]).sum())
    }
}

/// Haar-distributed orthogonal matrix (row-major) from Gram–Schmidt on a
/// Gaussian matrix, with one re-orthogonalization pass.
pub fn random_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    let n = dim;
    // columns stored contiguously while orthogonalizing
    let mut cols: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    for k in 0..n {
        for _pass in 0..2 {
            for j in 0..k {
                let dot: f64 = (0..n).map(|r| cols[k][r] * cols[j][r]).sum();
                for r in 0..n {
                    cols[k][r] -= dot * cols[j][r];
                }
            }
        }
        let norm = cols[k].iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in cols[k].iter_mut() {
            *x /= norm;
        }
    }
    let mut q = vec![0.0; n * n];
    for (k, col) in cols.iter().enumerate() {
        for r in 0..n {
            q[r * n + k] = col[r];
        }
    }
    q
}

pub(crate) fn conjugate(q: &[f64], values: &[f64]) -> SymMatrix {
    let n = values.len();
    SymMatrix::from_upper(n, |i, j| (0..n).map(|k| q[i * n + k] * values[k] * q[j * n + k]).sum())
}

fn single<R: Rng + ?Sized>(dim: usize, kind: &SampleKind, rng: &mut R) -> Result<SymMatrix> {
    match kind {
        SampleKind::Wishart => Ok(GaussianFactor::sample(dim, dim, rng).gram()),
        SampleKind::RankDeficient { rank } => Ok(GaussianFactor::sample(*rank, dim, rng).gram()),
        SampleKind::SpectrumGiven { eigenvalues } => {
            let q = random_orthogonal(dim, rng);
            Ok(conjugate(&q, eigenvalues))
        }
        other => Err(Error::InvalidParameter(format!("`{other}` describes a pair, not a single matrix"))),
    }
}

/// One PSD matrix of kind `wishart`, `spectrum_given` or `rank_deficient`.
pub fn random_psd(spec: &SampleSpec) -> Result<SymMatrix> {
    spec.validate()?;
    single(spec.dim, &spec.kind, &mut spec.rng())
}

/// A pair with its shared eigenbasis and the two spectra.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutingPair {
    pub a: SymMatrix,
    pub b: SymMatrix,
    pub a_eigenvalues: Vec<f64>,
    pub b_eigenvalues: Vec<f64>,
}

pub fn random_commuting_pair(dim: usize, seed: u64) -> Result<CommutingPair> {
    SampleSpec::new(dim, SampleKind::CommutingPair, seed).validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = random_orthogonal(dim, &mut rng);
    let (lo, hi) = COMMUTING_SPECTRUM;
    let a_eigenvalues: Vec<f64> = (0..dim).map(|_| rng.random_range(lo..hi)).collect();
    let b_eigenvalues: Vec<f64> = (0..dim).map(|_| rng.random_range(lo..hi)).collect();
    Ok(CommutingPair {
        a: conjugate(&q, &a_eigenvalues),
        b: conjugate(&q, &b_eigenvalues),
        a_eigenvalues,
        b_eigenvalues,
    })
}

/// A pair `(A, B)` of PSD matrices of the requested kind.
pub fn random_pair(spec: &SampleSpec) -> Result<(SymMatrix, SymMatrix)> {
    spec.validate()?;
    let n = spec.dim;
    let mut rng = spec.rng();
    match &spec.kind {
        SampleKind::OrderedPair => {
            let b = GaussianFactor::sample(n, n, &mut rng).gram();
            let inc = GaussianFactor::sample(n, n, &mut rng).gram();
            Ok((&b + &inc, b))
        }
        SampleKind::CommutingPair => {
            let p = random_commuting_pair(n, spec.seed)?;
            Ok((p.a, p.b))
        }
        SampleKind::ProjectionPair => {
            let projection = |rng: &mut ChaCha8Rng| {
                let rank = if n == 1 { 1 } else { rng.random_range(1..n) };
                let q = random_orthogonal(n, rng);
                let values: Vec<f64> = (0..n).map(|k| if k < rank { 1.0 } else { 0.0 }).collect();
                conjugate(&q, &values)
            };
            let a = projection(&mut rng);
            let b = projection(&mut rng);
            Ok((a, b))
        }
        kind => {
            let a = single(n, kind, &mut rng)?;
            let b = single(n, kind, &mut rng)?;
            Ok((a, b))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symla::{jacobi_eigh, psd_spectrum};

    #[test]
    fn spectrum_given_is_reproduced() {
        let spec = SampleSpec::new(3, SampleKind::SpectrumGiven { eigenvalues: vec![1.0, 2.0, 3.0] }, 7);
        let m = random_psd(&spec).unwrap();
        let d = jacobi_eigh(&m).unwrap();
        for (got, want) in d.eigenvalues().iter().zip([3.0, 2.0, 1.0]) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn wishart_is_psd_and_deterministic() {
        for seed in 0..20 {
            let spec = SampleSpec::new(6, SampleKind::Wishart, seed);
            let m = random_psd(&spec).unwrap();
            let d = jacobi_eigh(&m).unwrap();
            assert!(d.min_eigenvalue() >= -1e-12 * d.max_eigenvalue());
            assert_eq!(random_psd(&spec).unwrap(), m);
        }
    }

    #[test]
    fn orthogonal_factor_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..10 {
            let q = random_orthogonal(n, &mut rng);
            for a in 0..n {
                for b in 0..n {
                    let dot: f64 = (0..n).map(|r| q[r * n + a] * q[r * n + b]).sum();
                    assert!((dot - if a == b { 1.0 } else { 0.0 }).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn ordered_pair_is_ordered() {
        for seed in 0..20 {
            let (a, b) = random_pair(&SampleSpec::new(5, SampleKind::OrderedPair, seed)).unwrap();
            assert!(jacobi_eigh(&(&a - &b)).unwrap().min_eigenvalue() >= -1e-12);
        }
    }

    #[test]
    fn commuting_pair_commutes() {
        for seed in 0..20 {
            let (a, b) = random_pair(&SampleSpec::new(5, SampleKind::CommutingPair, seed)).unwrap();
            let comm = &a.matmul(&b) - &b.matmul(&a);
            assert!(comm.frobenius_norm() <= 1e-10 * a.frobenius_norm() * b.frobenius_norm());
        }
    }

    #[test]
    fn projections_are_idempotent() {
        for seed in 0..20 {
            let (a, b) = random_pair(&SampleSpec::new(4, SampleKind::ProjectionPair, seed)).unwrap();
            for p in [a, b] {
                assert!((&p.matmul(&p) - &p.to_square()).frobenius_norm() < 1e-10);
                psd_spectrum(&p).unwrap();
            }
        }
    }

    #[test]
    fn rank_deficient_has_requested_rank() {
        let m = random_psd(&SampleSpec::new(5, SampleKind::RankDeficient { rank: 2 }, 1)).unwrap();
        let d = jacobi_eigh(&m).unwrap();
        assert!(d.eigenvalues()[1] > 1e-3);
        assert!(d.eigenvalues()[2].abs() < 1e-12 * d.max_eigenvalue());
    }

    #[test]
    fn invalid_specs() {
        assert!(random_psd(&SampleSpec::new(0, SampleKind::Wishart, 1)).is_err());
        assert!(random_psd(&SampleSpec::new(2, SampleKind::RankDeficient { rank: 3 }, 1)).is_err());
        assert!(random_psd(&SampleSpec::new(2, SampleKind::SpectrumGiven { eigenvalues: vec![1.0] }, 1)).is_err());
        assert!(random_psd(&SampleSpec::new(2, SampleKind::SpectrumGiven { eigenvalues: vec![1.0, -1.0] }, 1)).is_err());
        assert!(random_psd(&SampleSpec::new(2, SampleKind::OrderedPair, 1)).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for s in ["wishart", "ordered", "commuting", "projection", "rank_deficient:2", "spectrum:1,2.5"] {
            let k: SampleKind = s.parse().unwrap();
            assert_eq!(k.to_string(), s);
        }
        assert!("gue".parse::<SampleKind>().is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| derive_seed(42, i)).collect();
        assert_eq!(seeds.len(), 1000);
    }
}
