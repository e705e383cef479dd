//! Sufficient versus necessary mantissa widths.

use std::fmt::Write as _;

use serde::Serialize;

use crate::analysis::lower_bound::{necessary_bits, necessary_bits_real};
use crate::eigh::{eigh_precision, eigh_precision_real};
use crate::error::{Error, Result};
use crate::primitives::ErrorModel;

/// Figures quoted in the abstract of the source analysis for
/// `eps = 1e-15, n = 4000`.
pub const QUOTED_SUFFICIENT: u32 = 92;
pub const QUOTED_NECESSARY: u32 = 59;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrecisionReport {
    pub eps: f64,
    pub theta: f64,
    pub n: usize,
    pub sufficient_bits: u32,
    pub sufficient_real: f64,
    pub necessary_bits: u32,
    pub necessary_real: f64,
    pub gap: i64,
    pub quoted_sufficient: u32,
    pub quoted_necessary: u32,
    pub notes: Vec<String>,
}

pub fn precision_report(eps: f64, theta: f64, n: usize, em: &ErrorModel) -> Result<PrecisionReport> {
    if !(eps > 0.0 && eps < 1.0) || !(theta > 0.0 && theta < 1.0) || n < 2 {
        return Err(Error::Domain("need eps, theta in (0, 1) and n >= 2".into()));
    }
    let suff = eigh_precision(eps, theta, n, em);
    let nec = necessary_bits(eps, n);
    let mut notes = vec![format!(
        "quoted figures for eps = 1e-15, n = 4000: {QUOTED_SUFFICIENT} sufficient, {QUOTED_NECESSARY} necessary"
    )];
    if (eps - 1e-15).abs() < 1e-30 && n == 4000 {
        if suff != QUOTED_SUFFICIENT {
            notes.push(format!(
                "sufficient bound evaluates to {suff} under mu_MM(n) = max({}, {} n), mu_QR(n) = {} n^{}, c_N = {}, not {QUOTED_SUFFICIENT}",
                em.mm_floor, em.mm_slope, em.qr_coeff, em.qr_exponent, em.c_normal
            ));
        }
        if nec != QUOTED_NECESSARY {
            notes.push(format!(
                "necessary bound lg(1/eps) + 0.5 lg n - 2 evaluates to {nec}, not {QUOTED_NECESSARY}"
            ));
        }
    }
    Ok(PrecisionReport {
        eps,
        theta,
        n,
        sufficient_bits: suff,
        sufficient_real: eigh_precision_real(eps, theta, n, em),
        necessary_bits: nec,
        necessary_real: necessary_bits_real(eps, n),
        gap: suff as i64 - nec as i64,
        quoted_sufficient: QUOTED_SUFFICIENT,
        quoted_necessary: QUOTED_NECESSARY,
        notes,
    })
}

impl PrecisionReport {
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "eps        {:e}", self.eps);
        let _ = writeln!(s, "theta      {}", self.theta);
        let _ = writeln!(s, "n          {}", self.n);
        let _ = writeln!(s, "sufficient {:>4}  ({:.2})", self.sufficient_bits, self.sufficient_real);
        let _ = writeln!(s, "necessary  {:>4}  ({:.2})", self.necessary_bits, self.necessary_real);
        let _ = writeln!(s, "gap        {:>4}", self.gap);
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        s
    }
}

pub const SWEEP_N: [usize; 5] = [16, 64, 256, 1024, 4096];
pub const SWEEP_EPS: [f64; 5] = [1e-3, 1e-6, 1e-9, 1e-12, 1e-15];

/// `(n, eps, sufficient, necessary)` over the standard grid.
pub fn precision_sweep(theta: f64, em: &ErrorModel) -> Vec<(usize, f64, u32, u32)> {
    let mut out = Vec::new();
    for &n in &SWEEP_N {
        for &eps in &SWEEP_EPS {
            out.push((n, eps, eigh_precision(eps, theta, n, em), necessary_bits(eps, n)));
        }
    }
    out
}
