//! Seeded random test matrices. Construction happens in binary64; the
//! result is mirrored so it is exactly Hermitian and then rounded to the
//! working width.

use crate::error::Result;
use crate::fparith::{FpMatrix, PrecisionConfig};
use crate::linalg::{orthonormalize, singular_values_f64, CMat, C};
use crate::primitives::{normal, RngState};

/// `count` standard complex Gaussians (`E|z|^2 = 1`) in binary64.
pub fn gaussians(count: usize, rng: &mut RngState) -> Vec<(f64, f64)> {
    let cfg = PrecisionConfig::default();
    (0..count)
        .map(|_| {
            let (z, r) = normal(*rng, &cfg).expect("binary64 sampling");
            *rng = r;
            z.to_f64()
        })
        .collect()
}

/// Orthonormal columns from Gram-Schmidt on a Gaussian matrix.
pub fn haar(n: usize, cols: usize, rng: &mut RngState) -> CMat<f64> {
    let mut m = CMat::<f64>::from_f64(n, cols, &gaussians(n * cols, rng));
    orthonormalize(&mut m);
    m
}

/// Upper triangle mirrored onto the lower, real diagonal, then rounded.
pub fn hermitian_from(m: &CMat<f64>, cfg: &PrecisionConfig) -> Result<FpMatrix> {
    let n = m.rows;
    let mut v = m.to_f64();
    for i in 0..n {
        v[i * n + i].1 = 0.0;
        for j in 0..i {
            let (re, im) = v[j * n + i];
            v[i * n + j] = (re, -im);
        }
    }
    FpMatrix::from_f64(n, n, &v, cfg)
}

/// `Q diag(spectrum) Q*` with a random unitary `Q`.
pub fn with_spectrum(spectrum: &[f64], seed: u64, cfg: &PrecisionConfig) -> Result<FpMatrix> {
    let n = spectrum.len();
    let mut rng = RngState::new(seed);
    let q = haar(n, n, &mut rng);
    let mut qd = q.clone();
    for (j, &s) in spectrum.iter().enumerate() {
        for i in 0..n {
            let v = qd.at(i, j).scale(&s);
            qd.set(i, j, v);
        }
    }
    hermitian_from(&qd.matmul(&q.adjoint()), cfg)
}

/// Eigenvalues uniform in `±[lo, hi]` with random signs, both signs present.
pub fn spectrum_pm(n: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    let mut rng = RngState::new(seed).split(0x5bec);
    let mut out: Vec<f64> = (0..n)
        .map(|_| {
            let k = rng.next_u128();
            let x = lo + (hi - lo) * ((k >> 75) as f64 * 2f64.powi(-53));
            if k & 1 == 1 {
                x
            } else {
                -x
            }
        })
        .collect();
    if n >= 2 {
        out[0] = out[0].abs();
        out[1] = -out[1].abs();
    }
    out
}

/// `(G + G*)/(2 sqrt(n))` with standard complex Gaussian `G`; the spectrum
/// fills roughly `[-sqrt2, sqrt2]`.
pub fn gue(n: usize, seed: u64, cfg: &PrecisionConfig) -> Result<FpMatrix> {
    let mut rng = RngState::new(seed);
    let g = CMat::<f64>::from_f64(n, n, &gaussians(n * n, &mut rng));
    let ga = g.adjoint();
    let s = 1.0 / (2.0 * (n as f64).sqrt());
    let mut h = CMat::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            h.set(i, j, g.at(i, j).add(ga.at(i, j)).scale(&s));
        }
    }
    hermitian_from(&h, cfg)
}

/// A random Hermitian matrix with spectral norm `norm`, in binary64.
pub fn hermitian_with_norm(n: usize, norm: f64, rng: &mut RngState) -> CMat<f64> {
    let g = CMat::<f64>::from_f64(n, n, &gaussians(n * n, rng));
    let mut h = CMat::<f64>::zeros(n, n);
    let ga = g.adjoint();
    for i in 0..n {
        for j in 0..n {
            let mut z = g.at(i, j).add(ga.at(i, j));
            if i == j {
                z.im = 0.0;
            }
            h.set(i, j, z);
        }
    }
    let s = singular_values_f64(n, n, &h.to_f64())[0];
    let k = norm / s;
    for z in h.data.iter_mut() {
        *z = z.scale(&k);
    }
    h
}

/// Random Hermitian matrix with `||A|| <= bound`, the norm drawn in
/// `[bound/2, bound)` and kept clear of `bound` after rounding.
pub fn bounded(n: usize, bound: f64, seed: u64, cfg: &PrecisionConfig) -> Result<FpMatrix> {
    let mut rng = RngState::new(seed);
    let frac = 0.5 + 0.5 * ((rng.next_u128() >> 75) as f64 * 2f64.powi(-53));
    let target = bound * frac * (1.0 - 2.0 * n as f64 * cfg.unit_roundoff());
    hermitian_from(&hermitian_with_norm(n, target, &mut rng), cfg)
}

/// Orthogonal projector onto a random `r`-dimensional subspace, with its basis.
pub fn projector(n: usize, r: usize, seed: u64, cfg: &PrecisionConfig) -> Result<(FpMatrix, CMat<f64>)> {
    let mut rng = RngState::new(seed);
    let q = haar(n, r, &mut rng);
    Ok((hermitian_from(&q.matmul(&q.adjoint()), cfg)?, q))
}

/// Sum of two binary64 matrices, mirrored and rounded.
pub fn perturbed(a: &FpMatrix, e: &CMat<f64>, cfg: &PrecisionConfig) -> Result<FpMatrix> {
    let n = a.rows();
    let am = CMat::<f64>::from_f64(n, n, &a.to_f64());
    let s = CMat {
        rows: n,
        cols: n,
        data: am.data.iter().zip(&e.data).map(|(x, y)| x.add(y)).collect::<Vec<C<f64>>>(),
    };
    hermitian_from(&s, cfg)
}
