use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavefem::benchmarks::faddeeva::{erf, erf_real, erfc, erfcx, w};
use wavefem::benchmarks::{free_space_solution, BenchmarkCase};
use wavefem_oracles::{erf_series, erf_series_real};

fn close(a: Complex64, b: (f64, f64), tol: f64) -> bool {
    let b = Complex64::new(b.0, b.1);
    (a - b).norm() <= tol * b.norm().max(1.0)
}

#[test]
fn real_erf_matches_series_oracle() {
    let mut worst: f64 = 0.0;
    for i in 0..=1200 {
        let x = -6.0 + 12.0 * i as f64 / 1200.0;
        let err = (erf_real(x) - erf_series_real(x)).abs();
        worst = worst.max(err);
    }
    assert!(worst <= 1e-12, "worst real deviation {worst:e}");
}

#[test]
fn complex_erf_matches_series_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let z = Complex64::new(rng.gen_range(-6.0..6.0), rng.gen_range(-5.0..5.0));
        let got = erf(z);
        let want = erf_series(z.re, z.im);
        assert!(close(got, want, 1e-12), "z = {z}: {got} vs {want:?}");
    }
}

#[test]
fn erf_symmetries() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    assert_eq!(erf(Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));
    for _ in 0..100 {
        let z = Complex64::new(rng.gen_range(-8.0..8.0), rng.gen_range(-5.0..5.0));
        let e = erf(z);
        assert!((erf(-z) + e).norm() <= 1e-12 * e.norm().max(1.0));
        assert!((erf(z.conj()) - e.conj()).norm() <= 1e-12 * e.norm().max(1.0));
        assert!((erfc(z) + e - 1.0).norm() <= 1e-12 * e.norm().max(1.0));
    }
}

#[test]
fn faddeeva_identities() {
    assert!((w(Complex64::new(0.0, 0.0)) - 1.0).norm() < 1e-15);
    // w(iy) = erfcx(y) is real; w(x) on the real line has Re = e^{−x²}.
    for &x in &[0.3, 1.7, 4.0, 9.5] {
        let v = w(Complex64::new(x, 0.0));
        assert!((v.re - (-x * x as f64).exp()).abs() < 1e-15);
        assert!(w(Complex64::new(0.0, x)).im.abs() < 1e-15);
    }
    // Large-|z| asymptotics: w(z) ≈ i/(√π z)(1 + 1/(2z²)).
    let z = Complex64::new(20.0, 25.0);
    let asym =
        Complex64::new(0.0, 1.0) / (std::f64::consts::PI.sqrt() * z) * (1.0 + 0.5 / (z * z) + 0.75 / (z * z * z * z));
    assert!((w(z) - asym).norm() < 1e-8 * asym.norm());
    assert!((erfcx(0.0) - 1.0).abs() < 1e-15);
}

#[test]
fn psi_derivative_matches_finite_differences() {
    let c = BenchmarkCase::standing();
    let d = 1e-5;
    for i in 0..=200 {
        let t = -10.0 + 20.0 * i as f64 / 200.0;
        let fd = (c.psi(t + d).0 - c.psi(t - d).0) / (2.0 * d);
        assert!((fd - c.psi(t).1).norm() < 1e-7, "t = {t}");
    }
}

#[test]
fn g_prime_relation() {
    // g(s) = e^{s²/2} √(π/2)(1 + erf(s/√2)) satisfies g′ = s g + 1.
    let root = (std::f64::consts::PI / 2.0).sqrt();
    let g = |s: f64| {
        if s < 0.0 {
            root * erfcx(-s / 2f64.sqrt())
        } else {
            (0.5 * s * s).exp() * root * (1.0 + erf_real(s / 2f64.sqrt()))
        }
    };
    let d = 1e-6;
    for i in 0..=400 {
        let s = -20.0 + 40.0 * i as f64 / 400.0;
        let fd = (g(s + d) - g(s - d)) / (2.0 * d);
        let exact = s * g(s) + 1.0;
        assert!(
            (fd - exact).abs() <= 1e-7 * exact.abs().max(1.0),
            "s = {s}: {fd} vs {exact}"
        );
    }
}

fn pde_residual(case: &BenchmarkCase, t: f64, x: f64) -> f64 {
    let d = 1e-4;
    let u = |t: f64, x: f64| case.solution(t, x).u;
    let utt = (u(t + d, x) - 2.0 * u(t, x) + u(t - d, x)) / (d * d);
    let uxx = (u(t, x + d) - 2.0 * u(t, x) + u(t, x - d)) / (d * d);
    utt - uxx - case.forcing(t, x)
}

fn derivative_errors(case: &BenchmarkCase, t: f64, x: f64) -> (f64, f64) {
    let d = 1e-6;
    let s = case.solution(t, x);
    let ut = (case.solution(t + d, x).u - case.solution(t - d, x).u) / (2.0 * d);
    let ux = (case.solution(t, x + d).u - case.solution(t, x - d).u) / (2.0 * d);
    ((ut - s.u_t).abs(), (ux - s.u_x).abs())
}

#[test]
fn standing_wave_solves_the_pde() {
    let c = BenchmarkCase::standing();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let t = rng.gen_range(0.0..40.0);
        let x = rng.gen_range(-9.9..9.9);
        assert!(pde_residual(&c, t, x).abs() <= 1e-5, "t = {t}, x = {x}");
        let (et, ex) = derivative_errors(&c, t, x);
        assert!(et < 1e-7 && ex < 1e-7, "t = {t}, x = {x}: {et:e} {ex:e}");
    }
}

#[test]
fn propagating_wave_solves_the_pde() {
    let c = BenchmarkCase::propagating();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let t = rng.gen_range(0.0..60.0);
        let x = rng.gen_range(-9.9..9.9);
        // Mirror images see the unmirrored forcing only through e^{−(2L−|x|)²}.
        assert!(pde_residual(&c, t, x).abs() <= 1e-5, "t = {t}, x = {x}");
        let (et, ex) = derivative_errors(&c, t, x);
        assert!(et < 1e-7 && ex < 1e-7, "t = {t}, x = {x}: {et:e} {ex:e}");
    }
}

#[test]
fn free_space_derivatives_match_finite_differences() {
    let d = 1e-6;
    for &(s, y) in &[
        (-3.0, 0.5),
        (0.0, 0.0),
        (2.5, -1.0),
        (30.0, 29.0),
        (80.0, -81.5),
        (-6.0, 6.5),
    ] {
        let v = free_space_solution(s, y);
        let ut = (free_space_solution(s + d, y).u - free_space_solution(s - d, y).u) / (2.0 * d);
        let uy = (free_space_solution(s, y + d).u - free_space_solution(s, y - d).u) / (2.0 * d);
        assert!((ut - v.u_t).abs() < 1e-8 && (uy - v.u_x).abs() < 1e-8, "({s}, {y})");
    }
}

#[test]
fn propagating_wave_symmetry_and_boundary() {
    let c = BenchmarkCase::propagating();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let t = rng.gen_range(0.0..60.0);
        let x = rng.gen_range(0.0..10.0);
        assert!((c.solution(t, x).u - c.solution(t, -x).u).abs() <= 1e-10);
    }
    for i in 0..100 {
        let t = 60.0 * i as f64 / 99.0;
        assert!(c.solution(t, 10.0).u.abs() <= 1e-8, "t = {t}");
        assert!(c.solution(t, -10.0).u.abs() <= 1e-8, "t = {t}");
    }
}

#[test]
fn mirror_series_is_converged() {
    let c50 = BenchmarkCase::propagating();
    let c60 = c50.with_mirror_terms(60);
    for i in 0..=60 {
        for &x in &[-9.0, -2.5, 0.0, 4.0, 9.75] {
            let t = i as f64;
            assert!((c50.solution(t, x).u - c60.solution(t, x).u).abs() <= 1e-12);
        }
    }
}

#[test]
fn smallness_at_initial_time() {
    let st = BenchmarkCase::standing();
    let pr = BenchmarkCase::propagating();
    let mut max_f: f64 = 0.0;
    for i in 0..=2000 {
        let x = -10.0 + 20.0 * i as f64 / 2000.0;
        let bound = 8.0 * (-16.0f64).exp() * (1.0 + 1e-12);
        assert!(st.forcing(0.0, x).abs() <= bound);
        assert!(pr.forcing(0.0, x).abs() <= bound);
        assert!(st.pulse_derivative(0.0, 1).abs() <= 62.0 * (-16.0f64).exp() * (1.0 + 1e-12));
        assert!(st.pulse_derivative(0.0, 2).abs() <= 464.0 * (-16.0f64).exp() * (1.0 + 1e-12));
        assert!(st.solution(3.7, x).u.abs() < 10.0);
        for j in 0..40 {
            max_f = max_f.max(st.forcing(j as f64 * 0.2, x).abs());
        }
    }
    assert!(max_f >= 0.5);
    // Initial values against the series oracle: u(0, x) = Re ψ(−t0)·sin(a(x−L)).
    let a = st.wavenumber();
    let (er, ei) = erf_series(-4.0, 0.5 * a);
    let pref = Complex64::new(-0.25 * a * a, -4.0 * a).exp() * (0.5 * std::f64::consts::PI.sqrt());
    let psi = pref * Complex64::new(1.0 + er, ei);
    let dpsi = Complex64::new(0.0, a) * psi + (-16.0f64).exp();
    let x_peak = -8.0; // sin(a(x−L)) = −1
    let s = st.solution(0.0, x_peak);
    assert!((s.u + psi.re).abs() <= 1e-6 * psi.re.abs());
    assert!((s.u_t + dpsi.re).abs() <= 1e-6 * dpsi.re.abs());
    assert!(st.solution(2.0, -10.0).u.abs() <= 1e-6);
}
