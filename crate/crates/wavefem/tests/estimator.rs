mod common;

use common::{benchmark_run, operators};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavefem::benchmarks::BenchmarkCase;
use wavefem::estimator::*;
use wavefem::fem1d::{CompositeQuadrature, FemOperators, LagrangeSpace, QuadratureRule, UniformMesh1D};
use wavefem::reconstruct::{delta, reconstruct_l, reconstruct_r, SourceReconstruction};
use wavefem::timestepping::{StateSequence, TimeGrid};

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[test]
fn flux_examples() {
    let ops = operators(10, 2);
    let space = ops.space();
    let zero = vec![0.0; ops.n_dofs()];
    let s = SigmaFlux::new(space, |_| 0.0, &zero).unwrap();
    for x in [-10.0, -3.3, 0.0, 7.1, 10.0] {
        assert_eq!(s.value(x).unwrap(), 0.0);
    }

    // Constant source c: c(x + L) − cL = c·x on the symmetric domain.
    let c = 1.7;
    let s = SigmaFlux::new(space, |_| c, &zero).unwrap();
    for x in [-10.0, -3.3, 0.0, 7.1, 9.99] {
        assert!((s.value(x).unwrap() - c * x).abs() < 1e-12);
    }

    // Pure FE part: σ′ = −v_h and zero mean.
    let v = space.interpolate(|x| (0.4 * x).sin() * (100.0 - x * x) / 50.0);
    let s = SigmaFlux::new(space, |_| 0.0, &v).unwrap();
    let eps = 1e-5;
    for x in [-8.2, -1.1, 0.3, 6.6] {
        let d = (s.value(x + eps).unwrap() - s.value(x - eps).unwrap()) / (2.0 * eps);
        assert!((d + space.evaluate(&v, x, 0).unwrap()).abs() < 1e-7);
    }
    let quad = CompositeQuadrature::new(space, 12);
    let mut vals = vec![0.0; quad.len()];
    s.values_into(&quad, &mut vals);
    assert!(quad.integrate_samples(&vals).abs() < 1e-12);
    for (i, &x) in quad.positions().iter().enumerate().step_by(7) {
        assert!((vals[i] - s.value(x).unwrap()).abs() < 1e-13);
    }
}

struct Run {
    ops: FemOperators,
    seq: StateSequence,
    grid: TimeGrid,
    case: BenchmarkCase,
}

fn run(case: BenchmarkCase, cells: usize, k: usize, tau: f64, steps: usize) -> Run {
    let ops = operators(cells, k);
    let seq = benchmark_run(&ops, &case, tau, steps, 2);
    Run {
        ops,
        seq,
        grid: TimeGrid::new(tau, steps).unwrap(),
        case,
    }
}

fn long(grid: &TimeGrid) -> TimeGrid {
    TimeGrid::new(grid.tau(), grid.n_steps() + 2).unwrap()
}

/// `(f_τ − ẅ, v_h) + (σ, ∂ₓv_h) = 0` for every `v_h`.
#[test]
fn flux_integrates_by_parts() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for r in [
        run(BenchmarkCase::standing(), 16, 2, 0.1, 80),
        run(BenchmarkCase::propagating(), 24, 3, 0.05, 120),
    ] {
        let space = *r.ops.space();
        let case = r.case.clone();
        let f_tau = SourceReconstruction::new(move |t, x| case.forcing(t, x), &r.grid);
        let w = reconstruct_l(&r.seq, &long(&r.grid)).unwrap();
        let quad = CompositeQuadrature::new(&space, space.degree() + 6);
        let mut sig = vec![0.0; quad.len()];
        let mut dv = vec![0.0; quad.len()];
        for _ in 0..5 {
            let t = rng.gen_range(0.0..r.grid.t_star());
            let s = sigma_flux(&space, &f_tau, &w, t).unwrap();
            s.values_into(&quad, &mut sig);
            let wdd = w.evaluate(t, 2).unwrap();
            let load = f_tau.load_vector(&space, space.degree() + 6, t).unwrap();
            let accel = r.ops.mass().matvec(&wdd);
            let v = random_vector(&mut rng, space.n_dofs());
            quad.derivatives_into(&v, &mut dv);
            let lhs: f64 = load
                .iter()
                .zip(&accel)
                .zip(&v)
                .map(|((a, b), c)| (a - b) * c)
                .sum::<f64>();
            let rhs = quad.dot(&sig, &dv);
            let scale = quad.dot(&sig, &sig).sqrt() * quad.dot(&dv, &dv).sqrt();
            assert!((lhs + rhs).abs() <= 1e-8 * scale.max(1e-12), "{lhs} vs {rhs}");
        }
    }
}

/// `(f_τ, v_h) − (ẅ_hτ, v_h) − (∂ₓu_hτ, ∂ₓv_h) = 0` for discrete test functions.
#[test]
fn galerkin_orthogonality() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let r = run(BenchmarkCase::propagating(), 16, 2, 0.05, 200);
    let space = *r.ops.space();
    let case = r.case.clone();
    let f_tau = SourceReconstruction::new(move |t, x| case.forcing(t, x), &r.grid);
    let u = reconstruct_r(&r.seq, &long(&r.grid)).unwrap();
    let w = reconstruct_l(&r.seq, &long(&r.grid)).unwrap();
    for _ in 0..10 {
        let t = rng.gen_range(0.0..r.grid.t_star());
        let v = random_vector(&mut rng, space.n_dofs());
        let load = f_tau.load_vector(&space, space.degree() + 6, t).unwrap();
        let wdd = w.evaluate(t, 2).unwrap();
        let uu = u.evaluate(t, 0).unwrap();
        let a: f64 = load.iter().zip(&v).map(|(x, y)| x * y).sum();
        let b = r.ops.mass().bilinear(&wdd, &v);
        let c = r.ops.stiffness().bilinear(&uu, &v);
        let scale = a.abs() + b.abs() + c.abs();
        assert!((a - b - c).abs() <= 1e-8 * scale.max(1e-12));
    }
}

/// `|⟨R(t), v⟩| ≤ ‖∂ₓw_hτ + σ‖ ‖∂ₓv‖` for test functions outside the
/// discrete space.
#[test]
fn residual_is_bounded_by_flux_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let r = run(BenchmarkCase::standing(), 8, 1, 0.1, 60);
    let space = *r.ops.space();
    let fine = LagrangeSpace::new(UniformMesh1D::new(-10.0, 10.0, 32).unwrap(), 3).unwrap();
    let case = r.case.clone();
    let f_tau = SourceReconstruction::new(move |t, x| case.forcing(t, x), &r.grid);
    let w = reconstruct_l(&r.seq, &long(&r.grid)).unwrap();
    let quad = CompositeQuadrature::new(&fine, 12);
    let np = quad.len();
    let (mut dvq, mut vq) = (vec![0.0; np], vec![0.0; np]);
    for _ in 0..4 {
        let t = rng.gen_range(0.0..r.grid.t_star());
        let s = sigma_flux(&space, &f_tau, &w, t).unwrap();
        let wv = w.evaluate(t, 0).unwrap();
        let wdd = w.evaluate(t, 2).unwrap();
        let mut flux = vec![0.0; np];
        let mut rhs = vec![0.0; np];
        for (i, &x) in quad.positions().iter().enumerate() {
            flux[i] = space.evaluate(&wv, x, 1).unwrap() + s.value(x).unwrap();
            rhs[i] = f_tau.value(t, x).unwrap() - space.evaluate(&wdd, x, 0).unwrap();
        }
        let bound = quad.dot(&flux, &flux).sqrt();
        for _ in 0..50 {
            let v = random_vector(&mut rng, fine.n_dofs());
            quad.values_into(&v, &mut vq);
            quad.derivatives_into(&v, &mut dvq);
            let norm = quad.dot(&dvq, &dvq).sqrt();
            let mut dw = vec![0.0; np];
            for (i, &x) in quad.positions().iter().enumerate() {
                dw[i] = space.evaluate(&wv, x, 1).unwrap();
            }
            let pairing = (quad.dot(&rhs, &vq) - quad.dot(&dw, &dvq)) / norm;
            assert!(pairing.abs() <= bound * (1.0 + 1e-6), "{pairing} > {bound}");
        }
    }
}

#[test]
fn zero_solution_gives_zero_estimator() {
    let r = run(BenchmarkCase::quiescent(), 8, 2, 0.1, 40);
    let case = r.case.clone();
    let f_tau = SourceReconstruction::new(move |t, x| case.forcing(t, x), &r.grid);
    let w = reconstruct_l(&r.seq, &long(&r.grid)).unwrap();
    let d = delta(&r.seq, &long(&r.grid)).unwrap();
    assert_eq!(estimator_r(&r.ops, &r.grid, &w, &f_tau, 0.5).unwrap(), 0.0);
    assert_eq!(estimator_m(&r.ops, &r.grid, &d, 0.5).unwrap(), 0.0);
    assert_eq!(data_oscillation(r.ops.space(), &r.grid, &f_tau, 0.5).unwrap(), 0.0);
}

/// For `f = t·g(x)` the quadratic source reconstruction is exact from the
/// second interval on; on the first it sees the zero start value.
#[test]
fn data_oscillation_of_linear_in_time_source() {
    let ops = operators(10, 1);
    let space = *ops.space();
    let g = |x: f64| (-(x * x) / 4.0).exp();
    let (tau, rho) = (0.2, 0.4);
    let grid = TimeGrid::new(tau, 150).unwrap();
    let f_tau = SourceReconstruction::new(move |t, x| t * g(x), &grid);
    let got = data_oscillation(&space, &grid, &f_tau, rho).unwrap();

    let rule = QuadratureRule::gauss_legendre(20);
    let g_sq = (0..space.mesh().n_cells())
        .map(|c| {
            let a = space.mesh().cell_left(c);
            rule.integrate(a, a + space.h(), |x| g(x) * g(x))
        })
        .sum::<f64>();
    let first = rule.integrate(0.0, tau, |t| {
        let e = t * (tau - t) / (2.0 * tau);
        e * e * (-2.0 * rho * t).exp()
    });
    let expect = (first * g_sq).sqrt();
    assert!((got - expect).abs() <= 1e-10 * expect, "{got} vs {expect}");
}

#[test]
fn total_estimator_bookkeeping() {
    let b = total_estimator(3.0, 1.0, 0.25, Some(2.0)).unwrap();
    assert!((b.lambda - 29f64.sqrt()).abs() < 1e-14);
    assert!((b.effectivity.unwrap() - 29f64.sqrt() / 2.0).abs() < 1e-14);
    assert_eq!(b.eta_f, 0.25);
    assert_eq!(
        total_estimator(0.0, 0.5, 0.0, Some(0.0)).unwrap().effectivity,
        Some(f64::INFINITY)
    );
    assert_eq!(
        total_estimator(0.0, 0.0, 0.0, Some(0.0)).unwrap().effectivity,
        Some(0.0)
    );
    assert_eq!(total_estimator(1.0, 0.0, 0.0, None).unwrap().effectivity, None);
    assert!(total_estimator(-1.0, 0.0, 0.0, None).is_err());
    assert!(total_estimator(f64::NAN, 0.0, 0.0, None).is_err());
    // Λ ≥ R and Λ ≥ √20·M.
    for (r, m) in [(0.1, 2.0), (5.0, 0.01), (1.0, 1.0)] {
        let l = combine(r, m);
        assert!(l >= r && l >= 20f64.sqrt() * m * (1.0 - 1e-15));
    }
}

#[test]
fn dual_approximation_bound() {
    let v = gamma_bound(1.0, 1.0, 0.1, 1.0, 1.0, 1.0, 20.0).unwrap();
    assert!((v - 0.2).abs() < 1e-15);
    // Large frequencies are capped by |s|/ρ.
    let v = gamma_bound(100.0, 2.0, 0.5, 0.75, 1.0, 1.0, 20.0).unwrap();
    assert_eq!(v, 50.0);
    for theta in [0.5, 0.2, 1.01, f64::NAN] {
        assert!(gamma_bound(1.0, 1.0, 0.1, theta, 1.0, 1.0, 20.0).is_err());
    }
    assert!(gamma_bound(1.0, 0.0, 0.1, 1.0, 1.0, 1.0, 20.0).is_err());
}

fn time_part(tau: f64) -> f64 {
    let rho = 0.5;
    let ops = operators(16, 1);
    let grid = TimeGrid::covering(tau, 25.0).unwrap();
    let seq = benchmark_run(&ops, &BenchmarkCase::standing(), tau, grid.n_steps(), 2);
    let d = delta(&seq, &long(&grid)).unwrap();
    estimator_m(&ops, &grid, &d, rho).unwrap()
}

#[test]
fn time_part_converges_at_second_order() {
    let ratio = time_part(0.04) / time_part(0.02);
    assert!((ratio - 4.0).abs() <= 0.8, "ratio = {ratio}");
}

/// `M ≈ c·τ²‖∂ₓ∂ₜ³u‖_ρ/ρ` with `c² = ∫₀¹ (1/12 − s²/2)² ds = 7/240`, the
/// leading term of `u̇_hτ − ẇ_hτ` on a slab. The time factor of the standing
/// wave is integrated here by RK4 from `T̈ + a²T = φ`.
#[test]
fn time_part_matches_leading_order_expansion() {
    let case = BenchmarkCase::standing();
    let a = 5.0 * std::f64::consts::PI / 20.0;
    let rho = 1.0;
    let pulse = |t: f64| -2.0 * (t - 4.0) * (-(t - 4.0f64).powi(2)).exp();
    let dpulse = |t: f64| (4.0 * (t - 4.0f64).powi(2) - 2.0) * (-(t - 4.0f64).powi(2)).exp();
    let rhs = |t: f64, y: [f64; 2]| [y[1], pulse(t) - a * a * y[0]];
    let (dt, mut y, mut t) = (1e-3, [0.0, 0.0], 0.0);
    let mut integral = 0.0;
    let third = |t: f64, y: [f64; 2]| (dpulse(t) - a * a * y[1]).powi(2) * (-2.0 * rho * t).exp();
    while t < 20.0 {
        let k1 = rhs(t, y);
        let k2 = rhs(t + dt / 2.0, [y[0] + dt / 2.0 * k1[0], y[1] + dt / 2.0 * k1[1]]);
        let k3 = rhs(t + dt / 2.0, [y[0] + dt / 2.0 * k2[0], y[1] + dt / 2.0 * k2[1]]);
        let k4 = rhs(t + dt, [y[0] + dt * k3[0], y[1] + dt * k3[1]]);
        let next = [
            y[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
        integral += 0.5 * dt * (third(t, y) + third(t + dt, next));
        y = next;
        t += dt;
    }
    // ‖∂ₓ sin(a(x − L))‖² over (−L, L) is L·a² for this wavenumber.
    let space_norm = (10.0 * a * a).sqrt();

    for (cells, tau) in [(32, 0.086), (32, 0.043)] {
        let ops = operators(cells, 3);
        let grid = TimeGrid::covering(tau, 20.0).unwrap();
        let seq = benchmark_run(&ops, &case, tau, grid.n_steps(), 2);
        let d = delta(&seq, &long(&grid)).unwrap();
        let m = estimator_m(&ops, &grid, &d, rho).unwrap();
        let expected = (7.0f64 / 240.0).sqrt() * tau * tau * space_norm * integral.sqrt() / rho;
        assert!(
            (m / expected - 1.0).abs() <= 0.05,
            "tau = {tau}: M = {m:e}, leading order {expected:e}"
        );
    }
}
