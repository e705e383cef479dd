//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Select criteria by number: `cargo test --test acceptance -- 3 6`.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use specbisect::analysis::oracle::{f64_checks, oracle_residual, oracle_sign, oracle_spectral_norm_big, to_big};
use specbisect::analysis::{check_claims, convergence_raster, gen, lower_bound_run, necessary_bits, Region, Scheme};
use specbisect::analysis::lower_bound::necessary_bits_real;
use specbisect::deflate::{deflate, deflate_checked, procrustes_distance, DeflateParams};
use specbisect::eigh::{eigh, eigh_precision, root_ell, EighResult};
use specbisect::fparith::{fp_half, Fp, FpMatrix, FpScalar, PrecisionConfig};
use specbisect::hp::Big;
use specbisect::linalg::CMat;
use specbisect::primitives::{ErrorModel, RngState};
use specbisect::report::precision_report;
use specbisect::sign::scalar::check_all;
use specbisect::sign::{estimate_b, g_matrix, mu_g, sign_matrix, SignParams};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

// ---------------------------------------------------------------- 1

/// `m * 2^e` with `m` a big integer.
#[derive(Clone)]
struct Dyadic {
    m: BigInt,
    e: i64,
}

impl Dyadic {
    fn of(x: &Fp) -> Dyadic {
        let m = BigInt::from(x.mantissa());
        Dyadic {
            m: if x.is_negative() { -m } else { m },
            e: x.exponent() as i64 - 127,
        }
    }

    fn align(a: &Dyadic, b: &Dyadic) -> (BigInt, BigInt, i64) {
        let e = a.e.min(b.e);
        (&a.m << (a.e - e) as usize, &b.m << (b.e - e) as usize, e)
    }

    fn add(&self, o: &Dyadic) -> Dyadic {
        let (a, b, e) = Self::align(self, o);
        Dyadic { m: a + b, e }
    }

    fn sub(&self, o: &Dyadic) -> Dyadic {
        let (a, b, e) = Self::align(self, o);
        Dyadic { m: a - b, e }
    }

    fn mul(&self, o: &Dyadic) -> Dyadic {
        Dyadic {
            m: &self.m * &o.m,
            e: self.e + o.e,
        }
    }

    fn abs(&self) -> Dyadic {
        Dyadic {
            m: self.m.abs(),
            e: self.e,
        }
    }

    fn shifted(&self, k: i64) -> Dyadic {
        Dyadic {
            m: self.m.clone(),
            e: self.e + k,
        }
    }

    fn le(&self, o: &Dyadic) -> bool {
        let (a, b, _) = Self::align(self, o);
        a <= b
    }

    fn eq_value(&self, o: &Dyadic) -> bool {
        let (a, b, _) = Self::align(self, o);
        a == b
    }
}

fn random_fp(rng: &mut ChaCha8Rng, t: u32) -> Fp {
    let m: u128 = (rng.gen::<u128>() >> (128 - t)) | (1u128 << (t - 1));
    Fp::from_int_scaled(rng.gen(), m, rng.gen_range(-60..60))
}

fn criterion_1() -> Outcome {
    let per_width = 250_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc1);
    let mut bad = 0usize;
    let mut checked = 0usize;
    let mut half_bad = 0usize;
    for t in [8u32, 16, 24, 53] {
        let cfg = PrecisionConfig::new(t).unwrap();
        for k in 0..per_width {
            let x = random_fp(&mut rng, t);
            let y = random_fp(&mut rng, t);
            let (dx, dy) = (Dyadic::of(&x), Dyadic::of(&y));
            // |fl(x o y) - x o y| <= u |x o y|; for division the equivalent
            // |fl(x/y) y - x| <= u |x|
            let ok = match k % 4 {
                0 => {
                    let exact = dx.add(&dy);
                    let got = Dyadic::of(&x.add(&y, &cfg).unwrap());
                    got.sub(&exact).abs().le(&exact.abs().shifted(-(t as i64)))
                }
                1 => {
                    let exact = dx.sub(&dy);
                    let got = Dyadic::of(&x.sub(&y, &cfg).unwrap());
                    got.sub(&exact).abs().le(&exact.abs().shifted(-(t as i64)))
                }
                2 => {
                    let exact = dx.mul(&dy);
                    let got = Dyadic::of(&x.mul(&y, &cfg).unwrap());
                    got.sub(&exact).abs().le(&exact.abs().shifted(-(t as i64)))
                }
                _ => {
                    let q = Dyadic::of(&x.div(&y, &cfg).unwrap());
                    q.mul(&dy).sub(&dx).abs().le(&dx.abs().shifted(-(t as i64)))
                }
            };
            checked += 1;
            if !ok {
                bad += 1;
            }
            let z = FpScalar::new(x, y);
            let h = fp_half(&z, &cfg).unwrap();
            if !Dyadic::of(&h.re).eq_value(&dx.shifted(-1)) || !Dyadic::of(&h.im).eq_value(&dy.shifted(-1)) {
                half_bad += 1;
            }
        }
    }
    outcome(
        bad == 0 && half_bad == 0,
        format!("{checked} op triples over t = 8, 16, 24, 53: {bad} bound violations; fp_half inexact in {half_bad}"),
    )
}

// ---------------------------------------------------------------- 2

fn criterion_2() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for u in [2f64.powi(-10), 2f64.powi(-24)] {
        for eps in [10.0 * u, 3.0 / 80.0] {
            let rep = check_all(u, eps, 1e-4).unwrap();
            pass &= rep.passed();
            details.push(format!("u=2^{} eps={eps:.3e}: {} checks, {} violations", u.log2(), rep.checked, rep.violations.len()));
        }
    }
    outcome(pass, details.join("; "))
}

// ---------------------------------------------------------------- 3

fn criterion_3() -> Outcome {
    let cfg = PrecisionConfig::default();
    let n = 16;
    let eps = 1e-8;
    let (mut ok_err, mut ok_iter) = (0, 0);
    let mut worst = 0.0f64;
    let mut max_iter = 0;
    let mut cap = 0.0;
    for seed in 0..100u64 {
        let spec = gen::spectrum_pm(n, 0.2, 1.0, seed);
        let min_abs = spec.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
        let a = gen::with_spectrum(&spec, seed, &cfg).unwrap();
        let params = SignParams::new(eps, estimate_b(&a), (1.0 / min_abs) * (1.0 + 1e-9), n).unwrap();
        let (s, trace) = sign_matrix(&a, &params, &cfg).unwrap();
        let err = oracle_spectral_norm_big(&to_big(&s).sub(&oracle_sign(&a).unwrap()));
        worst = worst.max(err);
        if err <= eps {
            ok_err += 1;
        }
        cap = params.n_sign().ceil();
        max_iter = max_iter.max(trace.iterations);
        if trace.iterations as f64 <= params.n_sign().ceil() {
            ok_iter += 1;
        }
    }
    outcome(
        ok_err == 100 && ok_iter == 100,
        format!("error <= 1e-8 in {ok_err}/100 (worst {worst:.2e}); iterations <= ceil(N_SIGN) in {ok_iter}/100 (max {max_iter}, last cap {cap})"),
    )
}

// ---------------------------------------------------------------- 4

fn criterion_4() -> Outcome {
    let cfg = PrecisionConfig::new(24).unwrap();
    let em = ErrorModel::default();
    let bound = mu_g(8, 1.1, &em) * 2f64.powi(-24);
    let (mut ok, mut worst) = (0, 0.0f64);
    let (three, half) = (<Big as specbisect::linalg::Real>::from_f64(3.0), <Big as specbisect::linalg::Real>::from_f64(0.5));
    for seed in 0..1000u64 {
        let a = gen::bounded(8, 1.1, seed, &cfg).unwrap();
        let got = to_big(&g_matrix(&a, &cfg).unwrap());
        let ab = to_big(&a);
        let a3 = ab.matmul(&ab).matmul(&ab);
        let mut exact = CMat::<Big>::zeros(8, 8);
        for i in 0..8 {
            for j in 0..8 {
                let x = ab.at(i, j).scale(&three).sub(&a3.at(i, j)).scale(&half);
                exact.set(i, j, x);
            }
        }
        let err = oracle_spectral_norm_big(&got.sub(&exact));
        worst = worst.max(err);
        if err <= bound {
            ok += 1;
        }
    }
    outcome(ok == 1000, format!("{ok}/1000 within mu_g(8, 1.1) u = {bound:.3e}; worst {worst:.3e}"))
}

// ---------------------------------------------------------------- 5

fn criterion_5() -> Outcome {
    let cfg = PrecisionConfig::default();
    let (n, r, beta, rho) = (16, 4, 1e-6, 0.1);
    let params = DeflateParams::convenient(n, r, beta, rho, 1.0).unwrap();
    let bound = params.error_bound(n, 1.0, 1.0);
    let trials = 500;
    let mut failures = 0;
    let mut worst = 0.0f64;
    for seed in 0..trials as u64 {
        let (p, q) = gen::projector(n, r, seed, &cfg).unwrap();
        let mut rng = RngState::new(seed).split(7);
        let e = gen::hermitian_with_norm(n, beta, &mut rng);
        let pt = gen::perturbed(&p, &e, &cfg).unwrap();
        let (qt, _) = deflate_checked(&pt, &params, RngState::new(seed).split(8), &cfg).unwrap();
        let d = procrustes_distance(&to_big(&qt), &CMat::<Big>::from_f64(n, r, &q.to_f64()));
        worst = worst.max(d);
        if d > bound {
            failures += 1;
        }
    }
    let rate = failures as f64 / trials as f64;
    let theory = params.failure_probability(n);
    let slack = 3.0 * (theory * (1.0 - theory) / trials as f64).sqrt();
    let ok_rate = rate <= theory + slack;

    let exact_bound = 100.0 * ErrorModel::default().mu_qr(n) * cfg.unit_roundoff();
    let mut exact_ok = 0;
    let mut exact_worst = 0.0f64;
    for seed in 0..100u64 {
        let (p, q) = gen::projector(n, r, 1000 + seed, &cfg).unwrap();
        let (qt, _) = deflate(&p, r, RngState::new(seed).split(9), &cfg).unwrap();
        let d = procrustes_distance(&to_big(&qt), &CMat::<Big>::from_f64(n, r, &q.to_f64()));
        exact_worst = exact_worst.max(d);
        if d <= exact_bound {
            exact_ok += 1;
        }
    }
    outcome(
        ok_rate && exact_ok == 100,
        format!(
            "beta=1e-6: failure rate {rate:.3} vs {theory:.3} + {slack:.3} (bound {bound:.2e}, worst {worst:.2e}); beta=0: {exact_ok}/100 within {exact_bound:.2e} (worst {exact_worst:.2e})"
        ),
    )
}

// ---------------------------------------------------------------- 6

struct EighCheck {
    ok: bool,
    invariants: bool,
}

fn check_eigh(a: &FpMatrix, res: &EighResult, eps: f64, oracle: bool) -> (f64, f64, bool) {
    let norm = f64_checks::spectral_norm(a);
    let resid = if oracle {
        oracle_residual(a, &res.u, &res.d_f64())
    } else {
        f64_checks::residual(a, &res.u, &res.d_f64())
    };
    let sv = f64_checks::singular_values(&res.u);
    let dev = sv.iter().fold(0.0f64, |m, s| m.max((s - 1.0).abs()));
    let ok = resid <= 2.0 * eps * norm && dev <= eps / 3.0;
    (resid / norm, dev, ok)
}

fn run_eigh(n: usize, seed: u64, eps: f64, theta: f64, cfg: &PrecisionConfig) -> EighCheck {
    let a = gen::gue(n, seed, cfg).unwrap();
    match eigh(&a, eps, theta, RngState::new(seed).split(0xe16), cfg) {
        Ok((res, stats)) => {
            let (_, _, ok) = check_eigh(&a, &res, eps, n <= 8);
            let inv = stats.check_invariants(n, root_ell(eps)).is_ok() && res.u.cols() == n;
            EighCheck { ok, invariants: inv }
        }
        Err(_) => EighCheck {
            ok: false,
            invariants: true,
        },
    }
}

fn criterion_6() -> Outcome {
    let cfg = PrecisionConfig::default();
    let (eps, theta) = (1e-6, 0.25);
    let need = ((1.0 - theta) * 100.0 - 13.0) as usize;
    let mut pass = true;
    let mut details = Vec::new();
    for n in [8usize, 32, 128] {
        let start = Instant::now();
        let (mut ok, mut inv) = (0, 0);
        for seed in 0..100u64 {
            let c = run_eigh(n, seed, eps, theta, &cfg);
            ok += c.ok as usize;
            inv += c.invariants as usize;
        }
        let secs = start.elapsed().as_secs_f64();
        let time_ok = n != 128 || secs < 900.0;
        pass &= ok >= need && inv == 100 && time_ok;
        details.push(format!("n={n}: {ok}/100 accurate (need {need}), invariants {inv}/100, {secs:.1}s"));
    }
    outcome(pass, details.join("; "))
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Outcome {
    let (n, eps, theta) = (16, 1e-3, 0.5);
    let bits = eigh_precision(eps, theta, n, &ErrorModel::default());
    let hi = PrecisionConfig::new(bits).unwrap();
    let low_bits = (1.0 / eps).log2().ceil() as u32 - 2;
    let lo = PrecisionConfig::new(low_bits).unwrap();
    let (mut ok_hi, mut fail_lo, mut err_lo) = (0, 0, 0);
    for seed in 0..100u64 {
        let a = gen::gue(n, seed, &PrecisionConfig::default()).unwrap();
        for (cfg, high) in [(&hi, true), (&lo, false)] {
            let a = a.round_to(cfg).unwrap();
            let out = eigh(&a, eps, theta, RngState::new(seed).split(0x7), cfg);
            let good = match &out {
                Ok((res, _)) => check_eigh(&a, res, eps, true).2,
                Err(_) => false,
            };
            if high {
                ok_hi += good as usize;
            } else {
                fail_lo += (!good) as usize;
                err_lo += out.is_err() as usize;
            }
        }
    }
    outcome(
        ok_hi >= 40 && fail_lo >= 50,
        format!(
            "t={bits}: {ok_hi}/100 succeed (need 40); t={low_bits}: {fail_lo}/100 miss the target (need 50; {err_lo} of them returned an error)"
        ),
    )
}

// ---------------------------------------------------------------- 8

fn criterion_8() -> Outcome {
    let cfg = PrecisionConfig::default();
    let u = 2f64.powi(-10);
    let rep = lower_bound_run(16, u, 1e-2, 1, &cfg).unwrap();
    let formula = necessary_bits_real(2f64.powi(-50), 1 << 10);
    let pass = rep.fl_identity && rep.bound_met && rep.bound == 2f64.powi(-8) && formula == 53.0 && necessary_bits(2f64.powi(-50), 1 << 10) == 53;
    outcome(
        pass,
        format!(
            "residual vs A' = {:.4e} >= un/4 = 2^{} ({}), fl-identity {}, B sign {:+}; lg(1/u) >= {formula} for (2^-50, 2^10)",
            rep.residual_perturbed,
            rep.bound.log2(),
            rep.bound_met,
            rep.fl_identity,
            rep.b_sign
        ),
    )
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Outcome {
    let region = Region::square(2.5);
    let ns = convergence_raster(Scheme::NewtonSchulz, region, 400, 1e-15, 200).unwrap();
    let nw = convergence_raster(Scheme::Newton, region, 400, 1e-15, 200).unwrap();
    let c = check_claims(&ns, &nw);
    outcome(
        c.holds(),
        format!(
            "NS wedge: {}/{} converged; NS real |x|>sqrt5 converged {}, |x|<sqrt5 diverged {} of {}; Newton real diverged {}/{}; symmetry violations {}",
            c.ns_wedge_converged,
            c.ns_wedge_points,
            c.ns_real_outside_converged,
            c.ns_real_inside_diverged,
            c.ns_real_points,
            c.newton_real_diverged,
            c.newton_real_points,
            c.symmetry_violations
        ),
    )
}

// ---------------------------------------------------------------- 10

fn criterion_10() -> Outcome {
    let r = precision_report(1e-15, 0.5, 4000, &ErrorModel::default()).unwrap();
    let flagged = r.notes.iter().any(|n| n.contains("92")) && r.notes.iter().any(|n| n.contains("59"));
    outcome(
        r.necessary_bits < r.sufficient_bits && (60..=200).contains(&r.sufficient_bits) && flagged,
        format!(
            "sufficient {} ({:.2}), necessary {} ({:.2}); quoted {}/{} flagged: {flagged}",
            r.sufficient_bits, r.sufficient_real, r.necessary_bits, r.necessary_real, r.quoted_sufficient, r.quoted_necessary
        ),
    )
}

type Criterion = (usize, &'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "rounding model", criterion_1, Duration::from_secs(60)),
        (2, "scalar lemmas", criterion_2, Duration::from_secs(120)),
        (3, "matrix sign", criterion_3, Duration::from_secs(60)),
        (4, "one-step bound", criterion_4, Duration::from_secs(60)),
        (5, "deflate", criterion_5, Duration::from_secs(120)),
        (6, "end-to-end eigh", criterion_6, Duration::from_secs(3600)),
        (7, "reduced precision", criterion_7, Duration::from_secs(3600)),
        (8, "lower bound", criterion_8, Duration::from_secs(60)),
        (9, "iteration raster", criterion_9, Duration::from_secs(120)),
        (10, "precision report", criterion_10, Duration::from_secs(1)),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (k, name, f, limit) in criteria {
        if !selected.is_empty() && !selected.contains(&k) {
            continue;
        }
        let start = Instant::now();
        let out = f();
        let el = start.elapsed();
        let in_time = el <= limit;
        let pass = out.pass && in_time;
        if !pass {
            failed += 1;
        }
        let timing = if in_time { String::new() } else { format!(" [over the {}s limit]", limit.as_secs()) };
        println!(
            "criterion {k:>2} {} {name}: {} ({:.1}s){timing}",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            el.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
