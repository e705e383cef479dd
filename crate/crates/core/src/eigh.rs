//! Recursive spectral bisection.
//!
//! Each node shifts by a random `c` near the window centre, takes the sign
//! of `A - cI`, splits the space with the two spectral projectors and
//! recurses on the compressed blocks with a window shrunk to
//! `(1/2 + 2/l) R` and accuracy `(1 - 1/l) eps`.

use serde::{Deserialize, Serialize};

use crate::deflate::deflate_k;
use crate::error::{Error, Result};
use crate::fparith::{Arith, Cx, Fp, FpMatrix, Mat, PrecisionConfig};
use crate::analysis::gen::gaussians;
use crate::primitives::{mm_herm_k, mm_k, unif_k, ErrorModel, RngState};
use crate::sign::{estimate_b, sign_k, SignParams};
use crate::with_arith;

/// Parameters of one recursive call. `theta`, `n_root` and `ell_root`
/// describe the root call and only feed diagnostics and the sign
/// iteration cap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecursionParams {
    pub r0: f64,
    pub r: f64,
    pub eps: f64,
    pub ell: u32,
    pub rho: f64,
    pub depth: u32,
    pub theta: f64,
    pub n_root: usize,
    pub ell_root: u32,
}

impl RecursionParams {
    /// Root parameters: `R0 = R = ||A||`, `l = ceil(lg(1/eps)) + 5`,
    /// `rho = theta/(4n)`.
    pub fn root(norm: f64, eps: f64, theta: f64, n: usize) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Domain(format!("eps must lie in (0, 1), got {eps}")));
        }
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::Domain(format!("theta must lie in (0, 1), got {theta}")));
        }
        let ell = root_ell(eps);
        Ok(RecursionParams {
            r0: norm,
            r: norm,
            eps,
            ell,
            rho: theta / (4.0 * n as f64),
            depth: 0,
            theta,
            n_root: n,
            ell_root: ell,
        })
    }
}

pub fn root_ell(eps: f64) -> u32 {
    (1.0 / eps).log2().ceil() as u32 + 5
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Scalar,
    Collapsed,
    TrivialSplit,
    Deflate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeLog {
    pub n: usize,
    pub r: f64,
    pub eps: f64,
    pub ell: u32,
    pub depth: u32,
    pub kind: NodeKind,
    pub shift: Option<f64>,
    pub k_plus: Option<usize>,
    pub k_minus: Option<usize>,
    /// `w_x = theta R_x / (2 n_x n d)` with `d` bounded by the root `l`.
    pub w: Option<f64>,
    pub sign_iterations: Option<usize>,
    pub sign_stagnated: bool,
    /// `||A_x||` (binary64 Jacobi), when requested.
    pub a_norm: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RecursionStats {
    pub node_count: usize,
    pub max_depth: u32,
    pub deflate_count: usize,
    pub nodes: Vec<NodeLog>,
}

impl RecursionStats {
    fn push(&mut self, log: NodeLog) {
        self.node_count += 1;
        self.max_depth = self.max_depth.max(log.depth);
        if log.kind == NodeKind::Deflate {
            self.deflate_count += 1;
        }
        self.nodes.push(log);
    }

    /// Check the structural invariants of a finished run; returns the first
    /// violated one.
    pub fn check_invariants(&self, n: usize, ell_root: u32) -> std::result::Result<(), String> {
        if self.max_depth > ell_root {
            return Err(format!("depth {} exceeds l = {ell_root}", self.max_depth));
        }
        if self.deflate_count > n.saturating_sub(1) {
            return Err(format!("{} deflating nodes for n = {n}", self.deflate_count));
        }
        if self.node_count > n * ell_root as usize {
            return Err(format!("{} nodes exceed n l", self.node_count));
        }
        for x in &self.nodes {
            if let (Some(p), Some(m)) = (x.k_plus, x.k_minus) {
                if p + m != x.n {
                    return Err(format!("k+ + k- = {} at a node of size {}", p + m, x.n));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EighResult {
    pub u: FpMatrix,
    pub d: Vec<Fp>,
    /// `eps (R0 + R)`.
    pub residual_bound_target: f64,
    /// `eps / 3`.
    pub sv_window: f64,
    /// `eps >= 2^-15` or `theta` outside `(16 n e^(-7.4 n), 1)`.
    pub outside_theorem_regime: bool,
}

impl EighResult {
    pub fn d_f64(&self) -> Vec<f64> {
        self.d.iter().map(|x| x.to_f64()).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EighOptions {
    /// Record `||A_x||` at every node (costly, for tests).
    pub record_norms: bool,
}

struct Ctx {
    stats: RecursionStats,
    opts: EighOptions,
    theta: f64,
    n_root: usize,
    ell_root: u32,
    rho: f64,
    r0: Fp,
}

fn wide() -> PrecisionConfig {
    PrecisionConfig::with_exponent_bits(128, 24).expect("valid")
}

/// `fl(x * num / den)` with a single rounding.
fn ratio<A: Arith>(ar: &A, x: A::R, num: i64, den: i64) -> Result<A::R> {
    let w = wide();
    let p = ar.export(x).mul(&Fp::from_i64(num), &w)?;
    Ok(ar.import(&p.div(&Fp::from_i64(den), ar.config())?))
}

/// `fl(a + s I)` touching only the diagonal.
fn shift_diag<A: Arith>(ar: &A, a: &Mat<A::R>, s: A::R) -> Mat<A::R> {
    let mut out = a.clone();
    for i in 0..a.rows {
        let z = a.at(i, i);
        out.set(i, i, Cx::new(ar.add(z.re, s), z.im));
    }
    ar.count(a.rows as u64, 0);
    out
}

fn round_half_away(x: f64) -> i64 {
    x.round() as i64
}

fn next_up(x: f64) -> f64 {
    if x > 0.0 {
        f64::from_bits(x.to_bits() + 1)
    } else {
        x
    }
}

struct Node<R> {
    r: R,
    eps: R,
    ell: u32,
    depth: u32,
}

fn node<A: Arith>(
    ar: &A,
    a: &Mat<A::R>,
    p: Node<A::R>,
    rng: RngState,
    ctx: &mut Ctx,
) -> Result<(Mat<A::R>, Vec<A::R>)> {
    let n = a.rows;
    let cfg = ar.config().clone();
    if p.depth > ctx.ell_root + 2 {
        return Err(Error::Invariant(format!(
            "recursion depth {} exceeds l + 2 = {}",
            p.depth,
            ctx.ell_root + 2
        )));
    }
    let mut log = NodeLog {
        n,
        r: ar.approx(p.r),
        eps: ar.approx(p.eps),
        ell: p.ell,
        depth: p.depth,
        kind: NodeKind::Scalar,
        shift: None,
        k_plus: None,
        k_minus: None,
        w: None,
        sign_iterations: None,
        sign_stagnated: false,
        a_norm: None,
    };
    if ctx.opts.record_norms {
        let (vals, _) = crate::linalg::eigh_f64(n, &ar.approx_mat(a));
        log.a_norm = Some(vals.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
    if n == 1 {
        ctx.stats.push(log);
        return Ok((Mat::identity(1, ar.one()), vec![a.at(0, 0).re]));
    }
    // R <= eps R0, compared exactly
    let eps_r0 = ar.export(p.eps).mul(&ctx.r0, &wide())?;
    if ar.export(p.r).cmp_value(&eps_r0).is_le() {
        log.kind = NodeKind::Collapsed;
        ctx.stats.push(log);
        return Ok((Mat::identity(n, ar.one()), vec![ar.zero(); n]));
    }
    let ell = p.ell as i64;
    let eps_c = ratio(ar, p.eps, ell - 1, ell)?;
    let r_c = ratio(ar, p.r, ell + 4, 2 * ell)?;
    let nf = n as f64;
    let rho = ctx.rho;
    let eta = ar.approx(eps_c) / (5.0 * ell as f64);
    let delta = 0.75 * (rho.sqrt() * eta / nf) * (1.0 / 3.0)
        * (1.0 / (12.0 * 2f64.sqrt() + 6.0 * ((4.0 / rho).ln() / nf).sqrt()));
    let own = rng.split(0);
    let s = ratio(ar, p.r, 1, ell)?;
    let (c, own) = unif_k(ar, s, own)?;
    log.shift = Some(ar.approx(c));
    let a_shift = shift_diag(ar, a, ar.neg(c));
    let r_f = ar.approx(p.r);
    let w = ctx.theta * r_f / (2.0 * nf * ctx.n_root as f64 * ctx.ell_root as f64);
    log.w = Some(w);
    let two_r = if cfg.mantissa_bits() <= 53 { 2.0 * r_f } else { next_up(2.0 * r_f) };
    let sp = SignParams {
        epsilon: delta,
        b: two_r,
        a_inv_norm: 2.0 / w,
        n,
        track_norms: false,
    };
    let (b, trace) = sign_k(ar, &a_shift, &sp)?;
    log.sign_iterations = Some(trace.iterations);
    log.sign_stagnated = trace.stagnated;
    // P+- = (I +- B)/2 and their traces
    let mut pp = Mat::zeros(n, n);
    let mut pm = Mat::zeros(n, n);
    let (mut tp, mut tm) = (ar.zero(), ar.zero());
    for i in 0..n {
        for j in 0..n {
            let z = b.at(i, j);
            if i == j {
                let dp = ar.half(ar.add(ar.one(), z.re));
                let dm = ar.half(ar.sub(ar.one(), z.re));
                pp.set(i, i, Cx::new(dp, ar.zero()));
                pm.set(i, i, Cx::new(dm, ar.zero()));
                tp = ar.add(tp, dp);
                tm = ar.add(tm, dm);
            } else {
                pp.set(i, j, ar.chalf(z));
                pm.set(i, j, ar.chalf(ar.cneg(z)));
            }
        }
    }
    ar.count(6 * n as u64, 2 * (n * n) as u64);
    let kp = round_half_away(ar.approx(tp));
    let km = round_half_away(ar.approx(tm));
    log.k_plus = Some(kp.max(0) as usize);
    log.k_minus = Some(km.max(0) as usize);
    if kp < 0 || km < 0 || kp + km != n as i64 {
        ctx.stats.push(log);
        return Err(Error::Invariant(format!(
            "projector traces round to k+ = {kp}, k- = {km} at a node of size {n}"
        )));
    }
    let half_r = ar.half(p.r);
    let child = |d: u32| Node {
        r: r_c,
        eps: eps_c,
        ell: p.ell + 1,
        depth: d,
    };
    if kp == n as i64 || km == n as i64 {
        log.kind = NodeKind::TrivialSplit;
        ctx.stats.push(log);
        let plus = kp == n as i64;
        let s = if plus { ar.neg(half_r) } else { half_r };
        let a_next = shift_diag(ar, a, s);
        let (u, d) = node(ar, &a_next, child(p.depth + 1), rng.split(1), ctx)?;
        let back = ar.neg(s);
        ar.count(n as u64, 0);
        return Ok((u, d.into_iter().map(|x| ar.add(x, back)).collect()));
    }
    log.kind = NodeKind::Deflate;
    ctx.stats.push(log);
    let (qp, own) = deflate_k(ar, &pp, kp as usize, own)?;
    let (qm, _) = deflate_k(ar, &pm, km as usize, own)?;
    let mut u = Mat::zeros(n, n);
    let mut d = Vec::with_capacity(n);
    let mut col = 0;
    for (q, sgn, tag) in [(qp, -1.0, 1u64), (qm, 1.0, 2u64)] {
        let qa = mm_k(ar, &ar.adjoint(&q), a);
        let cm = mm_herm_k(ar, &qa, &q);
        let s = if sgn < 0.0 { ar.neg(half_r) } else { half_r };
        let a_next = shift_diag(ar, &cm, s);
        let (uc, dc) = node(ar, &a_next, child(p.depth + 1), rng.split(tag), ctx)?;
        let wm = mm_k(ar, &q, &uc);
        let back = ar.neg(s);
        for j in 0..wm.cols {
            for i in 0..n {
                u.set(i, col + j, wm.at(i, j));
            }
            d.push(ar.add(dc[j], back));
        }
        ar.count(wm.cols as u64, 0);
        col += wm.cols;
    }
    Ok((u, d))
}

fn require_hermitian(a: &FpMatrix) -> Result<()> {
    if !a.is_square() || a.rows() == 0 {
        return Err(Error::Dimension(format!("expected a non-empty square matrix, got {}x{}", a.rows(), a.cols())));
    }
    if !a.is_hermitian() {
        return Err(Error::Domain("matrix is not exactly Hermitian".into()));
    }
    Ok(())
}

fn round_up(x: f64, cfg: &PrecisionConfig) -> Result<Fp> {
    let exact = Fp::from_f64_exact(x);
    let r = exact.round_to(cfg)?;
    if r.cmp_value(&exact).is_lt() {
        let ulp = Fp::from_int_scaled(false, 1, r.exponent() + 1 - cfg.mantissa_bits() as i32);
        r.add(&ulp, cfg)
    } else {
        Ok(r)
    }
}

/// One recursive call with explicit parameters.
pub fn eigh_internal(
    a: &FpMatrix,
    p: &RecursionParams,
    rng: RngState,
    cfg: &PrecisionConfig,
    opts: EighOptions,
) -> Result<(EighResult, RecursionStats)> {
    require_hermitian(a)?;
    if !(p.eps > 0.0 && p.eps < 1.0) || !(p.rho > 0.0) || !(p.r >= 0.0) || !(p.r0 >= 0.0) {
        return Err(Error::Domain("invalid recursion parameters".into()));
    }
    let a = a.round_to(cfg)?;
    let r0 = round_up(p.r0, cfg)?;
    let r = round_up(p.r, cfg)?;
    let eps = Fp::fl_f64(p.eps, cfg)?;
    let n = a.rows();
    let outside = p.eps >= 2f64.powi(-15) || !(p.theta > 16.0 * n as f64 * (-7.4 * n as f64).exp() && p.theta < 1.0);
    let target = p.eps * (p.r0 + p.r);
    with_arith!(cfg, |ar| {
        let mut ctx = Ctx {
            stats: RecursionStats::default(),
            opts,
            theta: p.theta,
            n_root: p.n_root.max(1),
            ell_root: p.ell_root.max(p.ell),
            rho: p.rho,
            r0,
        };
        let root = Node {
            r: ar.import(&r),
            eps: ar.import(&eps),
            ell: p.ell,
            depth: p.depth,
        };
        let (u, d) = node(&ar, &ar.import_mat(&a), root, rng, &mut ctx)?;
        ar.check()?;
        Ok((
            EighResult {
                u: ar.export_mat(&u),
                d: d.into_iter().map(|x| ar.export(x)).collect(),
                residual_bound_target: target,
                sv_window: p.eps / 3.0,
                outside_theorem_regime: outside,
            },
            ctx.stats,
        ))
    })
}

/// Root call: `R0 = R = ||A||_F`, `l = ceil(lg(1/eps)) + 5`, `rho = theta/(4n)`.
pub fn eigh(a: &FpMatrix, eps: f64, theta: f64, rng: RngState, cfg: &PrecisionConfig) -> Result<(EighResult, RecursionStats)> {
    eigh_with(a, eps, theta, rng, cfg, EighOptions::default())
}

pub fn eigh_with(
    a: &FpMatrix,
    eps: f64,
    theta: f64,
    rng: RngState,
    cfg: &PrecisionConfig,
    opts: EighOptions,
) -> Result<(EighResult, RecursionStats)> {
    require_hermitian(a)?;
    let norm = estimate_b(a);
    let p = RecursionParams::root(norm, eps, theta, a.rows())?;
    eigh_internal(a, &p, rng, cfg, opts)
}

/// Sufficient mantissa width:
/// `ceil(lg(1/eps) + lg max(n^1.5 mu_QR, n^2 c_N, n^4.5 mu_MM) + 2 lg lg(1/eps)
///   + 1.5 lg(1/theta) + lg lg(n lg(1/eps)/theta) + 23)`.
pub fn eigh_precision_real(eps: f64, theta: f64, n: usize, em: &ErrorModel) -> f64 {
    let nf = n as f64;
    let l = (1.0 / eps).log2();
    let m = (nf.powf(1.5) * em.mu_qr(n))
        .max(nf.powf(1.5) * nf.sqrt() * em.c_normal)
        .max(nf.powf(4.5) * em.mu_mm(n));
    l + m.log2() + 2.0 * l.log2() + 1.5 * (1.0 / theta).log2() + (nf * l / theta).log2().log2() + 23.0
}

pub fn eigh_precision(eps: f64, theta: f64, n: usize, em: &ErrorModel) -> u32 {
    eigh_precision_real(eps, theta, n, em).ceil() as u32
}

/// `max_x ||(U D U* - A) x||` over `samples` random unit vectors, using
/// matrix-vector products only.
pub fn residual_check(a: &FpMatrix, res: &EighResult, rng: RngState, samples: usize) -> f64 {
    let n = a.rows();
    let av = a.to_f64();
    let uv = res.u.to_f64();
    let d = res.d_f64();
    let mut rng = rng;
    let mut best = 0.0f64;
    let cmul = |x: (f64, f64), y: (f64, f64)| (x.0 * y.0 - x.1 * y.1, x.0 * y.1 + x.1 * y.0);
    for _ in 0..samples {
        let mut x = gaussians(n, &mut rng);
        let norm = x.iter().map(|z| z.0 * z.0 + z.1 * z.1).sum::<f64>().sqrt();
        for z in x.iter_mut() {
            *z = (z.0 / norm, z.1 / norm);
        }
        // y = U (D (U* x)) - A x
        let k = res.u.cols();
        let mut w = vec![(0.0, 0.0); k];
        for (j, wj) in w.iter_mut().enumerate() {
            let mut s = (0.0, 0.0);
            for i in 0..n {
                let u = uv[i * k + j];
                let p = cmul((u.0, -u.1), x[i]);
                s = (s.0 + p.0, s.1 + p.1);
            }
            *wj = (s.0 * d[j], s.1 * d[j]);
        }
        let mut acc = 0.0;
        for i in 0..n {
            let mut s = (0.0, 0.0);
            for (j, wj) in w.iter().enumerate() {
                let p = cmul(uv[i * k + j], *wj);
                s = (s.0 + p.0, s.1 + p.1);
            }
            for (j, xj) in x.iter().enumerate() {
                let p = cmul(av[i * n + j], *xj);
                s = (s.0 - p.0, s.1 - p.1);
            }
            acc += s.0 * s.0 + s.1 * s.1;
        }
        best = best.max(acc.sqrt());
    }
    best
}

#[derive(Clone, Debug, Serialize)]
pub struct BoostedResult {
    pub result: EighResult,
    pub stats: RecursionStats,
    pub attempts: usize,
    pub residual_estimate: f64,
}

/// Number of attempts for a target failure probability: `ceil(lg(1/theta')) + 1`.
pub fn boost_attempts(theta_prime: f64) -> usize {
    (1.0 / theta_prime).log2().ceil().max(0.0) as usize + 1
}

/// Repeat `eigh` with `theta = 1/2` on fresh streams until the residual
/// estimate is at most `1.5 eps ||A||`.
pub fn eigh_boosted(
    a: &FpMatrix,
    eps: f64,
    theta_prime: f64,
    rng: RngState,
    cfg: &PrecisionConfig,
) -> Result<BoostedResult> {
    boosted_with(a, eps, theta_prime, rng, |attempt, stream| eigh(a, eps, 0.5, stream, cfg).map(|r| (attempt, r)).map(|(_, r)| r))
}

/// The retry loop with a pluggable attempt, for fault injection.
pub fn boosted_with(
    a: &FpMatrix,
    eps: f64,
    theta_prime: f64,
    rng: RngState,
    mut attempt: impl FnMut(usize, RngState) -> Result<(EighResult, RecursionStats)>,
) -> Result<BoostedResult> {
    if !(theta_prime > 0.0 && theta_prime < 1.0) {
        return Err(Error::Domain(format!("theta' must lie in (0, 1), got {theta_prime}")));
    }
    let total = boost_attempts(theta_prime);
    let limit = 1.5 * eps * estimate_b(a);
    for k in 0..total {
        let stream = rng.split(k as u64);
        if let Ok((res, stats)) = attempt(k, stream) {
            let est = residual_check(a, &res, stream.split(u64::MAX), 32);
            if est <= limit {
                return Ok(BoostedResult {
                    result: res,
                    stats,
                    attempts: k + 1,
                    residual_estimate: est,
                });
            }
        }
    }
    Err(Error::AllAttemptsFailed(total))
}
