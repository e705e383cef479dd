//! The black-box subroutines (matrix multiply, QR, uniform and Gaussian
//! sampling), their error model, norms and matrix file I/O.

pub mod io;
mod mm;
mod qr;
mod rng;

pub use mm::mm;
pub(crate) use mm::{mm_herm_k, mm_k};
pub use qr::qr;
pub(crate) use qr::qr_thin_q_k;
pub use rng::{normal, unif, RngState};
pub(crate) use rng::{normals_k, unif_k};

use serde::{Deserialize, Serialize};

use crate::fparith::FpMatrix;
use crate::linalg::{eigh_f64, CMat};

/// Error and cost constants of the primitives.
///
/// `mu_mm(n) = max(mm_floor, mm_slope * n)` and
/// `mu_qr(n) = qr_coeff * n^qr_exponent`. Costs count rounded real operations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    pub mm_floor: f64,
    pub mm_slope: f64,
    pub qr_coeff: f64,
    pub qr_exponent: f64,
    /// Gaussian sampling constant: `|normal() - z| <= c_normal * u * |z|`.
    pub c_normal: f64,
    pub t_unif: u64,
    pub t_normal: u64,
}

impl Default for ErrorModel {
    fn default() -> Self {
        ErrorModel {
            mm_floor: 10.0,
            mm_slope: 2.0,
            qr_coeff: 30.0,
            qr_exponent: 1.5,
            c_normal: 16.0,
            t_unif: 1,
            t_normal: 2,
        }
    }
}

impl ErrorModel {
    pub fn mu_mm(&self, n: usize) -> f64 {
        self.mm_floor.max(self.mm_slope * n as f64)
    }

    pub fn mu_qr(&self, n: usize) -> f64 {
        self.qr_coeff * (n as f64).powf(self.qr_exponent)
    }

    /// Real flops of an n x n product: n^2 entries of n complex products
    /// (6 flops) and n - 1 complex sums (2 flops).
    pub fn t_mm(&self, n: usize) -> u64 {
        let n = n as u64;
        n * n * (8 * n - 2)
    }

    /// Upper bound on the real flops of an n x n QR with Q formed explicitly.
    pub fn t_qr(&self, n: usize) -> u64 {
        let n = n as u64;
        16 * n * n * n + 64 * n * n
    }
}

/// Spectral, Frobenius and max-entry norms in binary64.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Norms {
    pub spectral: f64,
    pub frobenius: f64,
    pub max_entry: f64,
}

/// Frobenius norm with compensated summation.
pub fn frobenius(a: &FpMatrix) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for z in a.data() {
        let (x, y) = z.to_f64();
        for t in [x * x, y * y] {
            let s = sum + t;
            comp += if sum.abs() >= t.abs() {
                (sum - s) + t
            } else {
                (t - s) + sum
            };
            sum = s;
        }
    }
    (sum + comp).sqrt()
}

/// Largest entry modulus.
pub fn max_entry(a: &FpMatrix) -> f64 {
    a.data().iter().map(|z| z.abs_f64()).fold(0.0, f64::max)
}

/// Spectral norm from a Jacobi eigendecomposition of `A` (Hermitian input)
/// or of `A* A`.
pub fn spectral(a: &FpMatrix) -> f64 {
    if a.rows() == 0 || a.cols() == 0 {
        return 0.0;
    }
    let vals = if a.is_hermitian() {
        eigh_f64(a.rows(), &a.to_f64()).0
    } else {
        let m = CMat::<f64>::from_f64(a.rows(), a.cols(), &a.to_f64());
        let g = m.adjoint().matmul(&m);
        eigh_f64(a.cols(), &g.to_f64())
            .0
            .into_iter()
            .map(|x| x.max(0.0).sqrt())
            .collect()
    };
    vals.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

pub fn norms(a: &FpMatrix) -> Norms {
    Norms {
        spectral: spectral(a),
        frobenius: frobenius(a),
        max_entry: max_entry(a),
    }
}
