use serde::{Deserialize, Serialize};

use super::real::Fp;
use super::scalar::FpScalar;
use super::PrecisionConfig;
use crate::error::{Error, Result};

/// Dense row-major complex matrix of working-precision entries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FpMatrix {
    rows: usize,
    cols: usize,
    data: Vec<FpScalar>,
}

impl FpMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FpMatrix {
            rows,
            cols,
            data: vec![FpScalar::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = FpMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = FpScalar::ONE;
        }
        m
    }

    pub fn from_data(rows: usize, cols: usize, data: Vec<FpScalar>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(FpMatrix { rows, cols, data })
    }

    /// Real diagonal matrix from exact f64 values rounded to the working width.
    pub fn from_real_diag(d: &[f64], cfg: &PrecisionConfig) -> Result<Self> {
        let n = d.len();
        let mut m = FpMatrix::zeros(n, n);
        for (i, &v) in d.iter().enumerate() {
            m.data[i * n + i] = FpScalar::real(Fp::fl_f64(v, cfg)?);
        }
        Ok(m)
    }

    /// Build from f64 (re, im) pairs in row-major order, rounding each part.
    pub fn from_f64(
        rows: usize,
        cols: usize,
        entries: &[(f64, f64)],
        cfg: &PrecisionConfig,
    ) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        let data = entries
            .iter()
            .map(|&(re, im)| {
                Ok(FpScalar::new(
                    Fp::fl_f64(re, cfg)?,
                    Fp::fl_f64(im, cfg)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FpMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[FpScalar] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> FpScalar {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: FpScalar) {
        self.data[i * self.cols + j] = v;
    }

    /// Exact conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = FpMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).conj();
            }
        }
        out
    }

    /// Bit-level Hermitian check: `a[i][j] == conj(a[j][i])`, real diagonal.
    pub fn is_hermitian(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        (0..self.rows).all(|i| (i..self.cols).all(|j| self.get(i, j) == self.get(j, i).conj()))
    }

    pub fn is_representable(&self, cfg: &PrecisionConfig) -> bool {
        self.data.iter().all(|x| x.is_representable(cfg))
    }

    /// Round every entry to the given configuration.
    pub fn round_to(&self, cfg: &PrecisionConfig) -> Result<Self> {
        let data = self
            .data
            .iter()
            .map(|x| Ok(FpScalar::new(x.re.round_to(cfg)?, x.im.round_to(cfg)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(FpMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Nearest f64 rendering, row-major (re, im) pairs.
    pub fn to_f64(&self) -> Vec<(f64, f64)> {
        self.data.iter().map(|x| x.to_f64()).collect()
    }

    /// Leading `k` columns.
    pub fn first_cols(&self, k: usize) -> Self {
        let mut m = FpMatrix::zeros(self.rows, k);
        for i in 0..self.rows {
            for j in 0..k {
                m.set(i, j, self.get(i, j));
            }
        }
        m
    }
}
