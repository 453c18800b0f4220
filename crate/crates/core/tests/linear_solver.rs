use std::sync::Arc;

use dhj::linear_solver::{
    assemble, continuation_sweep, exhaustion_study, rescaled_drift_matrix, solve, solve_direct,
    solve_from, unit_bump, ExhaustionConfig, OperatorKind, SolverConfig,
};
use dhj::spaces::{Axis, Field, Grid, NormKind, Parameters};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params() -> Parameters {
    Parameters::with_p(1.5).unwrap()
}

fn tight() -> SolverConfig {
    SolverConfig {
        tol: 1e-13,
        max_iters: 50_000,
    }
}

// ψ* = (y−ε)(R−y) e^{−y} cos(πx/(2R)) vanishes on every face of the box.
fn manufactured(eps: f64, r: f64) -> (impl Fn(f64, f64) -> f64, impl Fn(f64, f64) -> f64) {
    let k = std::f64::consts::PI / (2.0 * r);
    let psi = move |x: f64, y: f64| (y - eps) * (r - y) * (-y).exp() * (k * x).cos();
    let minus_lap = move |x: f64, y: f64| {
        let q = (y - eps) * (r - y);
        let dq = -2.0 * y + r + eps;
        let a = q * (-y).exp();
        let a2 = (-y).exp() * (-2.0 - 2.0 * dq + q);
        let b = (k * x).cos();
        -a2 * b + k * k * a * b
    };
    (psi, minus_lap)
}

fn mms_error(n: usize) -> f64 {
    let (eps, r) = (0.25, 4.0);
    let pr = params();
    let grid = Arc::new(
        Grid::new(vec![
            Axis::uniform(-r, r, 2 * n + 1).unwrap(),
            Axis::geometric(eps, r, n + 1).unwrap(),
        ])
        .unwrap(),
    );
    let (psi, minus_lap) = manufactured(eps, r);
    let c = pr.potential();
    let h = Field::from_fn(&grid, |p| {
        minus_lap(p[0], p[1]) + c * psi(p[0], p[1]) / (p[1] + pr.t).powi(2)
    })
    .unwrap();
    let sys = assemble(OperatorKind::Schrodinger, &pr, &grid, &h).unwrap();
    let rep = solve(&sys, &tight()).unwrap();
    (0..grid.len())
        .map(|i| {
            let p = grid.point(i);
            (rep.solution.values()[i] - psi(p[0], p[1])).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn manufactured_solution_converges_at_second_order() {
    let errs: Vec<f64> = [16, 32, 64].iter().map(|&n| mms_error(n)).collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.9, "errors {errs:?}, order {order}");
    }
}

#[test]
fn zero_data_gives_zero_solution_and_no_ratio() {
    let pr = params();
    let grid = Arc::new(Grid::half_space(2, 0.1, 8.0, 40, 33, 0.0).unwrap());
    let sys = assemble(OperatorKind::Schrodinger, &pr, &grid, &Field::zeros(&grid)).unwrap();
    let rep = solve(&sys, &SolverConfig::default()).unwrap();
    assert_eq!(rep.solution.max_abs(), 0.0);
    assert!(rep.stability_ratio.is_none());
    assert!(rep.to_kv().contains("stability_ratio=n/a"));
}

#[test]
fn homogeneous_problem_has_trivial_kernel_from_random_start() {
    let pr = params();
    let grid = Arc::new(Grid::half_space(2, 0.05, 10.0, 60, 41, 0.0).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let values = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let start = Field::from_values(&grid, values, true).unwrap();
    for kind in [OperatorKind::Schrodinger, OperatorKind::Continuation { tau: 0.0 }] {
        let sys = assemble(kind, &pr, &grid, &Field::zeros(&grid)).unwrap();
        let rep = solve_from(&sys, &tight(), &start).unwrap();
        assert!(rep.solution.max_abs() <= 1e-8, "{kind}: {}", rep.solution.max_abs());
    }
}

#[test]
fn rescaled_drift_is_minus_drift_with_rescaled_shift() {
    let pr = params();
    let grid = Arc::new(Grid::half_space(2, 0.05, 12.0, 50, 31, 0.0).unwrap());
    let shifted = pr.with_shift(pr.t / (pr.p - 1.0)).unwrap();
    let drift = assemble(OperatorKind::Drift, &shifted, &grid, &Field::zeros(&grid)).unwrap();
    let w = rescaled_drift_matrix(&grid, &pr);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let x: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a = w.matvec(&x);
        let b = drift.matrix().matvec(&x);
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in (0..grid.len()).filter(|&i| !grid.is_boundary(i)) {
            assert!((a[i] + b[i]).abs() <= 1e-12 * scale);
        }
    }
}

// Independent Thomas solve of a tridiagonal system `sub, diag, sup`.
fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / m;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

#[test]
fn one_dimensional_solves_match_tridiagonal_oracle() {
    let pr = params();
    let axis = Axis::geometric(0.01, 20.0, 200).unwrap();
    let xs = axis.nodes().to_vec();
    let grid = Arc::new(Grid::vertical_only(axis).unwrap());
    let f = Field::from_fn(&grid, |p| -(p[0]).powf(-0.5) * (-p[0]).exp()).unwrap();
    let n = xs.len();
    let (mut sub, mut diag, mut sup) = (vec![0.0; n], vec![1.0; n], vec![0.0; n]);
    let (mut dsub, mut ddiag, mut dsup) = (vec![0.0; n], vec![1.0; n], vec![0.0; n]);
    let mut h = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for i in 1..n - 1 {
        let (hm, hp) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
        let s = xs[i] + pr.t;
        sub[i] = -2.0 / (hm * (hm + hp));
        sup[i] = -2.0 / (hp * (hm + hp));
        diag[i] = 2.0 / (hm * hp) + pr.mu * (pr.mu - 1.0) / (s * s);
        h[i] = -s.powf(pr.mu) * f.values()[i];
        let b = pr.gamma / s;
        dsub[i] = -sub[i] - b * hp / (hm * (hm + hp));
        dsup[i] = -sup[i] + b * hm / (hp * (hm + hp));
        ddiag[i] = -2.0 / (hm * hp) + b * (hp - hm) / (hm * hp);
        rhs[i] = f.values()[i];
    }
    let psi = thomas(&sub, &diag, &sup, &h);
    let phi_direct = thomas(&dsub, &ddiag, &dsup, &rhs);
    let sys = assemble(OperatorKind::Drift, &pr, &grid, &f).unwrap();
    let cfg = SolverConfig { tol: 1e-14, max_iters: 100 };
    let rep = solve(&sys, &cfg).unwrap();
    let direct = solve_direct(&sys, &cfg).unwrap();
    for i in 0..n {
        let phi = psi[i] / (xs[i] + pr.t).powf(pr.mu);
        assert!((rep.solution.values()[i] - phi).abs() <= 1e-10 * phi.abs().max(1e-3));
        let d = phi_direct[i];
        assert!((direct.solution.values()[i] - d).abs() <= 1e-10 * d.abs().max(1e-3));
    }
}

#[test]
fn conjugated_and_direct_drift_solves_agree_at_second_order() {
    let pr = params();
    let mut diffs = Vec::new();
    for n in [40, 80, 160] {
        let grid = Arc::new(Grid::vertical_only(Axis::geometric(0.05, 10.0, n + 1).unwrap()).unwrap());
        let f = Field::from_fn(&grid, |p| (-(p[0] - 1.0).powi(2)).exp()).unwrap();
        let sys = assemble(OperatorKind::Drift, &pr, &grid, &f).unwrap();
        let a = solve(&sys, &tight()).unwrap();
        let b = solve_direct(&sys, &tight()).unwrap();
        diffs.push(a.solution.difference(&b.solution).unwrap().max_abs());
    }
    for w in diffs.windows(2) {
        assert!((w[0] / w[1]).log2() > 1.8, "{diffs:?}");
    }
}

#[test]
fn nonnegative_data_gives_nonnegative_solution() {
    let pr = params();
    let grid = Arc::new(Grid::half_space(2, 0.05, 8.0, 50, 41, 0.0).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let values = (0..grid.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
    let h = Field::from_values(&grid, values, true).unwrap();
    for kind in [OperatorKind::Schrodinger, OperatorKind::Continuation { tau: 0.3 }] {
        let sys = assemble(kind, &pr, &grid, &h).unwrap();
        let rep = solve(&sys, &tight()).unwrap();
        assert!(rep.solution.values().iter().all(|&v| v >= -1e-12));
    }
}

#[test]
fn drift_solve_of_unit_bump_has_finite_norm_and_small_residual() {
    let pr = params();
    let grid = Arc::new(Grid::half_space(2, 0.05, 16.0, 100, 129, 0.0).unwrap());
    let f = unit_bump(&grid, &pr, NormKind::Y).unwrap();
    let sys = assemble(OperatorKind::Drift, &pr, &grid, &f).unwrap();
    let rep = solve(&sys, &SolverConfig::default()).unwrap();
    assert!((rep.rhs_norm.total - 1.0).abs() < 1e-12);
    let ratio = rep.stability_ratio.unwrap();
    assert!(ratio.is_finite() && ratio > 0.0);
    assert!(rep.pde_residual < 0.05, "{}", rep.pde_residual);
    assert!(rep.to_kv().contains("kind=drift"));
}

#[test]
fn matrix_dump_lists_every_entry() {
    let pr = params();
    let grid = Arc::new(Grid::half_space(2, 0.1, 4.0, 8, 7, 0.0).unwrap());
    let sys = assemble(OperatorKind::Schrodinger, &pr, &grid, &Field::zeros(&grid)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.coo");
    sys.write_matrix(&path).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().count(), sys.matrix().nnz());
    for line in text.lines() {
        let t: Vec<&str> = line.split_whitespace().collect();
        let (i, j, v): (usize, usize, f64) = (t[0].parse().unwrap(), t[1].parse().unwrap(), t[2].parse().unwrap());
        assert_eq!(sys.matrix().get(i, j), v);
    }
}

#[test]
fn exhaustion_with_zero_data_is_zero() {
    let pr = params();
    let cfg = ExhaustionConfig {
        radii: vec![4.0, 8.0],
        transverse_spacing: 0.5,
        core_half_width: 2.0,
        core_heights: (0.5, 2.0),
        ..ExhaustionConfig::default()
    };
    let zero = |g: &Arc<Grid>, _: &Parameters| Ok(Field::zeros(g));
    let table = exhaustion_study(OperatorKind::Schrodinger, &pr, &zero, &cfg, &SolverConfig::default()).unwrap();
    for row in &table.rows {
        assert_eq!(row.core_norm, 0.0);
        assert_eq!(row.domination, 0.0);
        assert!(row.stability_ratio.is_none());
    }
}

#[test]
fn exhaustion_of_unit_bump_is_stable_and_dominated() {
    let pr = params();
    let cfg = ExhaustionConfig::default();
    let bump = |g: &Arc<Grid>, p: &Parameters| unit_bump(g, p, NormKind::Ypsi);
    let table = exhaustion_study(OperatorKind::Schrodinger, &pr, &bump, &cfg, &SolverConfig::default()).unwrap();
    eprintln!("{table:#?}");
    assert!(table.dominated);
    assert!(table.cauchy_decreasing);
    assert!(table.ratio_variation.unwrap() <= 2.0);
    let drift = |g: &Arc<Grid>, p: &Parameters| unit_bump(g, p, NormKind::Y);
    let table = exhaustion_study(OperatorKind::Drift, &pr, &drift, &cfg, &SolverConfig::default()).unwrap();
    eprintln!("{table:#?}");
    assert!(table.dominated);
    assert!(table.ratio_variation.unwrap() <= 2.0);
}

#[test]
fn continuation_sweep_is_uniformly_bounded() {
    let pr = params();
    let grid = Arc::new(Grid::half_space(2, 0.05, 16.0, 80, 65, 0.0).unwrap());
    let h = unit_bump(&grid, &pr, NormKind::Ypsi).unwrap();
    let taus: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let table = continuation_sweep(&pr, &grid, &h, &taus, &SolverConfig::default()).unwrap();
    assert!(!table.blow_up, "{table:?}");
    let lap = assemble(OperatorKind::Continuation { tau: 0.0 }, &pr, &grid, &h).unwrap();
    let lap = solve(&lap, &SolverConfig::default()).unwrap();
    assert_eq!(table.rows[0].ratio, lap.stability_ratio);
    assert!(table.rows.last().unwrap().ratio.unwrap().is_finite());
    assert!(continuation_sweep(&pr, &grid, &h, &[1.2], &SolverConfig::default()).is_err());
}
