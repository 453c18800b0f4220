//! Acceptance suite: one PASS/FAIL line per criterion. Runs as a plain
//! binary (no libtest harness) so the lines are never captured.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use dhj::explicit_family::{euler_exponents, exponent_ordering_report, u_t_residual, u_t_residual_analytic};
use dhj::fixed_point::{
    apply_j, picard_solve, random_ball_element, verify_solution, LinearRoute, Perturbation, PicardConfig,
};
use dhj::lemma_lab::{
    check_inequality, liouville_halfspace_evidence, liouville_strip_evidence, EulerFitConfig, InequalityId,
};
use dhj::linear_solver::{
    assemble, exhaustion_study, rescaled_drift_matrix, solve, solve_from, unit_bump, ExhaustionConfig,
    OperatorKind, SolverConfig,
};
use dhj::spaces::{norm, Axis, Field, FiniteDifference, Grid, NormKind, Parameters};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn params(p: f64) -> Parameters {
    Parameters::with_p(p).expect("p inside the window")
}

fn tight() -> SolverConfig {
    SolverConfig {
        tol: 1e-13,
        max_iters: 50_000,
    }
}

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn fmt_err(e: dhj::Error) -> String {
    e.to_string()
}

fn slope(hs: &[f64], errs: &[f64]) -> f64 {
    let n = hs.len() as f64;
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// 1. Explicit-solution identity.
fn explicit_identity() -> Check {
    let pr = params(1.5);
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    let mut analytic = 0.0f64;
    for n in [80usize, 160, 320] {
        let axis = Axis::graded(0.0, 10.0, n + 1, 1.02f64.powf(80.0 / n as f64)).map_err(fmt_err)?;
        let grid = Arc::new(Grid::vertical_only(axis).map_err(fmt_err)?);
        hs.push(10.0 / n as f64);
        errs.push(u_t_residual(&grid, &pr).map_err(fmt_err)?);
        analytic = analytic.max(u_t_residual_analytic(&grid, &pr).map_err(fmt_err)?);
    }
    let order = slope(&hs, &errs);
    ensure(
        order >= 1.9 && analytic <= 1e-12,
        format!("order {order:.3} (≥ 1.9), analytic residual {analytic:.2e} (≤ 1e-12)"),
    )
}

/// 2. Parameter window.
fn parameter_window() -> Check {
    let lo = 4.0 / 3.0;
    let mut inside = 0;
    for k in 1..=200 {
        let p = lo + (2.0 - lo) * k as f64 / 201.0;
        let pr = Parameters::with_p(p).map_err(|e| format!("p = {p}: {e}"))?;
        let kappa = pr.mu + 1.0 - pr.alpha;
        if kappa > 0.0 && kappa < 1.0 {
            inside += 1;
        }
    }
    let edges = [
        (lo - 1e-9, false),
        (lo, false),
        (lo + 1e-9, true),
        (2.0 - 1e-9, true),
        (2.0, false),
        (2.0 + 1e-9, false),
    ];
    let edge_ok = edges.iter().all(|&(p, expect)| Parameters::with_p(p).is_ok() == expect);
    ensure(
        inside == 200 && edge_ok,
        format!("{inside}/200 interior values inside (0,1); endpoint checks at 4/3 ± 1e-9, 2 ± 1e-9 {}", if edge_ok { "ok" } else { "wrong" }),
    )
}

/// 3. Euler exponents.
fn euler() -> Check {
    let pr = params(1.5);
    let e0 = euler_exponents(0.0, &pr).map_err(fmt_err)?;
    let e1 = euler_exponents(1.0, &pr).map_err(fmt_err)?;
    let ends = (e0.beta_plus, e0.beta_minus) == (1.0, 0.0)
        && (e1.beta_plus - pr.mu).abs() <= 1e-15
        && (e1.beta_minus - (1.0 - pr.mu)).abs() <= 1e-15;
    let mut defect = 0.0f64;
    let mut min_margin = f64::INFINITY;
    for p in [1.34, 1.4, 1.5, 1.6, 1.75, 1.9, 1.99] {
        let pr = params(p);
        let taus: Vec<f64> = (0..=1000).map(|k| k as f64 / 1000.0).collect();
        for &tau in &taus {
            let (a, b) = euler_exponents(tau, &pr).map_err(fmt_err)?.indicial_defect(&pr);
            defect = defect.max(a.abs()).max(b.abs());
        }
        let rep = exponent_ordering_report(&pr, &taus).map_err(fmt_err)?;
        min_margin = min_margin.min(rep.min_upper_margin).min(rep.min_lower_margin);
    }
    ensure(
        ends && defect <= 1e-12 && min_margin > 0.0,
        format!("endpoints {}, indicial defect {defect:.2e}, min ordering margin {min_margin:.3e}", if ends { "exact" } else { "wrong" }),
    )
}

// ψ* = (y−ε)(R−y) e^{−y} cos(πx/(2R)) vanishes on every face of the box.
fn mms_error(n: usize) -> Result<f64, String> {
    let (eps, r) = (0.25, 4.0);
    let pr = params(1.5);
    let grid = Arc::new(
        Grid::new(vec![
            Axis::uniform(-r, r, 2 * n + 1).map_err(fmt_err)?,
            Axis::geometric(eps, r, n + 1).map_err(fmt_err)?,
        ])
        .map_err(fmt_err)?,
    );
    let k = std::f64::consts::PI / (2.0 * r);
    let psi = |x: f64, y: f64| (y - eps) * (r - y) * (-y).exp() * (k * x).cos();
    let minus_lap = |x: f64, y: f64| {
        let q = (y - eps) * (r - y);
        let dq = -2.0 * y + r + eps;
        let a2 = (-y).exp() * (-2.0 - 2.0 * dq + q);
        -a2 * (k * x).cos() + k * k * q * (-y).exp() * (k * x).cos()
    };
    let c = pr.potential();
    let h = Field::from_fn(&grid, |p| minus_lap(p[0], p[1]) + c * psi(p[0], p[1]) / (p[1] + pr.t).powi(2))
        .map_err(fmt_err)?;
    let sys = assemble(OperatorKind::Schrodinger, &pr, &grid, &h).map_err(fmt_err)?;
    let rep = solve(&sys, &tight()).map_err(fmt_err)?;
    Ok((0..grid.len())
        .map(|i| {
            let p = grid.point(i);
            (rep.solution.values()[i] - psi(p[0], p[1])).abs()
        })
        .fold(0.0, f64::max))
}

/// 4. Linear theory.
fn linear_theory() -> Check {
    let pr = params(1.5);
    let errs = [mms_error(16)?, mms_error(32)?, mms_error(64)?];
    let order = slope(&[1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0], &errs);

    let grid = Arc::new(Grid::half_space(2, 0.05, 10.0, 60, 41, 0.0).map_err(fmt_err)?);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let start = Field::from_values(&grid, (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect(), true)
        .map_err(fmt_err)?;
    let sys = assemble(OperatorKind::Schrodinger, &pr, &grid, &Field::zeros(&grid)).map_err(fmt_err)?;
    let kernel = solve_from(&sys, &tight(), &start).map_err(fmt_err)?.solution.max_abs();

    let shifted = pr.with_shift(pr.t / (pr.p - 1.0)).map_err(fmt_err)?;
    let drift = assemble(OperatorKind::Drift, &shifted, &grid, &Field::zeros(&grid)).map_err(fmt_err)?;
    let w = rescaled_drift_matrix(&grid, &pr);
    let mut identity = 0.0f64;
    for _ in 0..100 {
        let x: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a = w.matvec(&x);
        let b = drift.matrix().matvec(&x);
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in (0..grid.len()).filter(|&i| !grid.is_boundary(i)) {
            identity = identity.max((a[i] + b[i]).abs() / scale);
        }
    }

    let cfg = ExhaustionConfig::default();
    let drift_data = |g: &Arc<Grid>, p: &Parameters| unit_bump(g, p, NormKind::Y);
    let stab = exhaustion_study(OperatorKind::Drift, &pr, &drift_data, &cfg, &SolverConfig::default())
        .map_err(fmt_err)?;
    let variation = stab.ratio_variation.unwrap_or(f64::INFINITY);
    let psi_data = |g: &Arc<Grid>, p: &Parameters| unit_bump(g, p, NormKind::Ypsi);
    let dom = exhaustion_study(OperatorKind::Schrodinger, &pr, &psi_data, &cfg, &SolverConfig::default())
        .map_err(fmt_err)?;
    let worst_dom = dom.rows.iter().map(|r| r.domination).fold(0.0, f64::max);
    ensure(
        order >= 1.9 && kernel <= 1e-8 && identity <= 1e-12 && variation <= 2.0 && dom.dominated,
        format!(
            "MMS order {order:.3}, kernel {kernel:.2e}, identity {identity:.2e}, ratio variation {variation:.3} over R ∈ {{8,16,32}}, max |ψ|/H̃₀ {worst_dom:.3}"
        ),
    )
}

/// 5. Inequality lemma.
fn inequality_lemma() -> Check {
    let mut worst_var = 0.0f64;
    let mut lower = 0u64;
    let mut summary = Vec::new();
    for p in [1.4, 1.5, 1.75, 1.9] {
        let mut cs = Vec::new();
        for id in InequalityId::ALL {
            let a = check_inequality(id, p, 1_000_000, 2, 1, None).map_err(fmt_err)?;
            let b = check_inequality(id, p, 1_000_000, 2, 2, None).map_err(fmt_err)?;
            lower += a.lower_bound_violations + b.lower_bound_violations;
            if !(a.minimal_constant.is_finite() && b.minimal_constant.is_finite()) {
                return Err(format!("{id} at p={p}: non-finite constant"));
            }
            let var = (a.minimal_constant - b.minimal_constant).abs() / a.minimal_constant.max(b.minimal_constant);
            worst_var = worst_var.max(var);
            cs.push(format!("{:.4}", a.minimal_constant));
        }
        summary.push(format!("p={p}: C=({})", cs.join(", ")));
    }
    ensure(
        lower == 0 && worst_var <= 0.05,
        format!("{lower} lower-bound violations, seed variation {worst_var:.2e}; {}", summary.join("; ")),
    )
}

fn picard_setup() -> Result<(Arc<Grid>, Parameters, Perturbation, PicardConfig), String> {
    let grid = Arc::new(Grid::half_space(2, 1e-3, 32.0, 120, 121, 6.0).map_err(fmt_err)?);
    let pr = params(1.5).with_lambda(20.0).map_err(fmt_err)?;
    let g = Perturbation::CompactBump { amplitude: 1.0, radius: 1.0 };
    Ok((grid, pr, g, PicardConfig::default()))
}

/// 6. Fixed point.
fn fixed_point() -> Check {
    let (grid, pr, g, cfg) = picard_setup()?;
    let tail = g.tail(pr.lambda * cfg.delta);
    let (trace, phi) = picard_solve(&g, &pr, &cfg, &grid).map_err(fmt_err)?;
    let q = trace.max_ratio().unwrap_or(0.0);
    let rep = verify_solution(&phi, &g, &pr).map_err(fmt_err)?;
    let bound = 10.0 * (cfg.tol + rep.truncation_max);
    let (zero_trace, zero_phi) = picard_solve(&Perturbation::Zero, &pr, &cfg, &grid).map_err(fmt_err)?;
    let zero_ok = zero_trace.converged && zero_trace.steps.len() == 1 && zero_phi.max_abs() == 0.0;
    ensure(
        tail == 0.0 && trace.converged && q <= 0.8 && rep.max_residual <= bound && rep.nonzero && zero_ok,
        format!(
            "A(λδ) = {tail}, {} steps, max q {q:.4}, residual {:.3e} ≤ {bound:.3e}, min_{{x_N>1}} |∇u| = {:.4}, g ≡ 0 {}",
            trace.steps.len(),
            rep.max_residual,
            rep.certificate,
            if zero_ok { "stops at φ = 0 in one step" } else { "did not stop in one step" }
        ),
    )
}

/// 7. Contraction empiricism.
fn contraction() -> Check {
    let (grid, pr, g, cfg) = picard_setup()?;
    let x = |f: &Field| norm(f, &pr, NormKind::X, &FiniteDifference).map(|r| r.total).map_err(fmt_err);
    let mut worst = 0.0f64;
    for k in 0..20u64 {
        let a = random_ball_element(&grid, &pr, cfg.radius, 1.0, 1000 + 2 * k).map_err(fmt_err)?;
        let b = random_ball_element(&grid, &pr, cfg.radius, 0.5, 1001 + 2 * k).map_err(fmt_err)?;
        let ja = apply_j(&a, &g, &pr, &cfg.solver, LinearRoute::Conjugated).map_err(fmt_err)?;
        let jb = apply_j(&b, &g, &pr, &cfg.solver, LinearRoute::Conjugated).map_err(fmt_err)?;
        let q = x(&ja.difference(&jb).map_err(fmt_err)?)? / x(&a.difference(&b).map_err(fmt_err)?)?;
        worst = worst.max(q);
    }
    ensure(worst <= 0.8, format!("max ratio over 20 pairs {worst:.4} (≤ 0.8)"))
}

/// 8. Liouville evidence.
fn liouville() -> Check {
    let pr = params(1.5);
    let grid = Arc::new(Grid::half_space(2, 0.05, 4.0, 40, 33, 0.0).map_err(fmt_err)?);
    let mut worst = 0.0f64;
    for tau in [0.25, 0.5, 1.0] {
        let r = liouville_strip_evidence(tau, 1.0, &pr, &grid, &EulerFitConfig::default(), &SolverConfig::default(), 3)
            .map_err(fmt_err)?;
        for fit in [&r.decay, &r.growth] {
            worst = worst.max((fit.fitted - fit.expected).abs());
        }
    }
    let h = liouville_halfspace_evidence(1.0, &pr, &[10.0, 100.0]).map_err(fmt_err)?;
    let shrink = h.shrink_plus[0].min(h.shrink_minus[0]);
    ensure(
        worst <= 0.02 && shrink >= 10.0,
        format!("max exponent misfit {worst:.2e} (≤ 0.02), coefficient shrink {shrink:.3} (≥ 10)"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check, Duration); 8] = [
        ("explicit-solution identity", explicit_identity, Duration::from_secs(1)),
        ("parameter window", parameter_window, Duration::from_secs(1)),
        ("Euler exponents", euler, Duration::from_secs(1)),
        ("linear theory", linear_theory, Duration::from_secs(600)),
        ("inequality lemma", inequality_lemma, Duration::from_secs(30)),
        ("fixed point", fixed_point, Duration::from_secs(600)),
        ("contraction empiricism", contraction, Duration::from_secs(600)),
        ("Liouville evidence", liouville, Duration::from_secs(10)),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *limit;
        let (ok, detail) = match result {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {}: {name}: {detail}; {:.2} s (limit {} s{})",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            limit.as_secs(),
            if in_time { "" } else { ", exceeded" }
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
