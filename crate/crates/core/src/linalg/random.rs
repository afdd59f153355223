//! Seeded sampling of states, unitaries, and channels.
//!
//! Every sampler is a deterministic function of its seed: the same seed and
//! the same call sequence reproduce outputs bit-exactly. ChaCha is used as
//! the stream cipher RNG because its output is stable across platforms and
//! crate versions.

use num_complex::Complex;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::matrix::{Complex64, ComplexMatrix};

/// Seed for all randomized operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn new(seed: u64) -> Self {
        RngSeed(seed)
    }

    pub fn value(&self) -> u64 {
        self.0
    }

    /// Independent deterministic stream for a salted sub-task.
    pub fn stream(&self, salt: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(splitmix64(self.0 ^ splitmix64(salt)))
    }

    pub fn rng(&self) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(self.0)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Standard normal via Box-Muller; two uniforms per sample pair.
fn gaussian_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let th = std::f64::consts::TAU * u2;
    (r * th.cos(), r * th.sin())
}

/// Complex standard Gaussian entry (variance 1 split over re/im).
fn complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    let (a, b) = gaussian_pair(rng);
    Complex::new(a * std::f64::consts::FRAC_1_SQRT_2, b * std::f64::consts::FRAC_1_SQRT_2)
}

/// Ginibre matrix: iid complex Gaussian entries.
pub fn ginibre_with<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    ComplexMatrix::new(rows, cols, data)
}

/// Householder QR of a complex matrix, returning (Q, R) with Q unitary.
fn qr(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let m = a.rows();
    let n = a.cols();
    let mut r = a.clone();
    let mut q = ComplexMatrix::identity(m);

    for k in 0..n.min(m.saturating_sub(1)) {
        // Reflect column k below the diagonal onto +- e_k.
        let mut norm_sq = 0.0;
        for i in k..m {
            norm_sq += r.get(i, k).norm_sqr();
        }
        let norm = norm_sq.sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = r.get(k, k);
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex::new(1.0, 0.0) };
        let beta = -phase * norm;

        let mut v: Vec<Complex64> = (k..m).map(|i| r.get(i, k)).collect();
        v[0] -= beta;
        let vnorm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm_sq;

        // r <- H r  with H = I - tau v v^dag acting on rows k..m.
        for col in 0..n {
            let mut dot = Complex::new(0.0, 0.0);
            for (idx, vi) in v.iter().enumerate() {
                dot += vi.conj() * r.get(k + idx, col);
            }
            let f = dot * tau;
            for (idx, vi) in v.iter().enumerate() {
                let cur = r.get(k + idx, col);
                r.set(k + idx, col, cur - f * vi);
            }
        }
        // q <- q H (accumulate from the right so q = H_1 ... H_k).
        for row in 0..m {
            let mut dot = Complex::new(0.0, 0.0);
            for (idx, vi) in v.iter().enumerate() {
                dot += q.get(row, k + idx) * vi;
            }
            let f = dot * tau;
            for (idx, vi) in v.iter().enumerate() {
                let cur = q.get(row, k + idx);
                q.set(row, k + idx, cur - f * vi.conj());
            }
        }
    }
    (q, r)
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the R-diagonal
/// phases divided out so the decomposition is the canonical one.
pub fn haar_unitary_with<R: Rng>(d: usize, rng: &mut R) -> ComplexMatrix {
    assert!(d >= 1, "haar_unitary dimension must be positive");
    let g = ginibre_with(d, d, rng);
    let (q, r) = qr(&g);
    let mut u = q;
    for j in 0..d {
        let rjj = r.get(j, j);
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { Complex::new(1.0, 0.0) };
        for i in 0..d {
            let cur = u.get(i, j);
            u.set(i, j, cur * phase);
        }
    }
    u
}

pub fn haar_unitary(d: usize, seed: RngSeed) -> ComplexMatrix {
    haar_unitary_with(d, &mut seed.rng())
}

/// Haar-random unit ket.
pub fn random_pure_with<R: Rng>(d: usize, rng: &mut R) -> ComplexMatrix {
    assert!(d >= 1);
    ginibre_with(d, 1, rng).normalized()
}

pub fn random_pure(d: usize, seed: RngSeed) -> ComplexMatrix {
    random_pure_with(d, &mut seed.rng())
}

/// Trace-one positive matrix from a normalized Wishart draw.
pub fn random_density_with<R: Rng>(d: usize, rng: &mut R) -> ComplexMatrix {
    assert!(d >= 1);
    let g = ginibre_with(d, d, rng);
    let w = g.matmul(&g.dagger());
    let t = w.trace().re;
    w.scale_re(1.0 / t)
}

pub fn random_density(d: usize, seed: RngSeed) -> ComplexMatrix {
    random_density_with(d, &mut seed.rng())
}

/// Kraus operators of a random channel A -> B via a Stinespring dilation:
/// a Haar isometry from A into B (x) E with an environment of size `rank`,
/// sliced along the environment basis. Requires rank * dim_out >= dim_in so
/// that an isometry exists.
pub fn random_kraus_channel_with<R: Rng>(
    dim_in: usize,
    dim_out: usize,
    rank: usize,
    rng: &mut R,
) -> Vec<ComplexMatrix> {
    assert!(dim_in >= 1 && dim_out >= 1 && rank >= 1);
    assert!(rank <= dim_in * dim_out, "rank exceeds dim_in * dim_out");
    assert!(
        dim_out * rank >= dim_in,
        "no trace-preserving channel exists with dim_out * rank < dim_in"
    );
    let total = dim_out * rank;
    let u = haar_unitary_with(total, rng);
    // Isometry = first dim_in columns; rows indexed (b, e) -> b * rank + e.
    (0..rank)
        .map(|e| {
            ComplexMatrix::from_fn(dim_out, dim_in, |b, a| u.get(b * rank + e, a))
        })
        .collect()
}

pub fn random_kraus_channel(
    dim_in: usize,
    dim_out: usize,
    rank: usize,
    seed: RngSeed,
) -> Vec<ComplexMatrix> {
    random_kraus_channel_with(dim_in, dim_out, rank, &mut seed.rng())
}

/// Rank-`rank` projector onto a Haar-random subspace.
pub fn haar_projector_with<R: Rng>(d: usize, rank: usize, rng: &mut R) -> ComplexMatrix {
    assert!(rank >= 1 && rank <= d);
    let u = haar_unitary_with(d, rng);
    let mut p = ComplexMatrix::zeros(d, d);
    for col in 0..rank {
        let col_ket = ComplexMatrix::from_fn(d, 1, |r, _| u.get(r, col));
        p = p.add_m(&col_ket.projector());
    }
    p
}
