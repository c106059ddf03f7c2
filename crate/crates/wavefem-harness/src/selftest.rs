//! Quick invariant suite run by the `selftest` subcommand.

use wavefem::benchmarks::BenchmarkCase;
use wavefem::damped_norms::error_measures;
use wavefem::estimator::{data_oscillation, estimator_m, estimator_r};
use wavefem::fem1d::{FemOperators, LagrangeSpace, UniformMesh1D};
use wavefem::reconstruct::{
    delta, reconstruct_l, reconstruct_r, verify_commuting, verify_reconstructed_equation, SourceReconstruction,
};
use wavefem::streaming::{ExactField, SeparableSource, StreamingEvaluator};
use wavefem::timestepping::{
    check_damped_stability, lambda_max, run_leapfrog, run_leapfrog_generic, stability_constant, StateSequence, TimeGrid,
};

use crate::config::{Benchmark, RunConfig};
use crate::experiment::run_experiment;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, value: f64, limit: f64) -> Check {
    Check {
        name,
        passed: value <= limit,
        detail: format!("{value:.3e} (limit {limit:.0e})"),
    }
}

fn operators(cells: usize, k: usize) -> wavefem::Result<FemOperators> {
    FemOperators::new(LagrangeSpace::new(UniformMesh1D::new(-10.0, 10.0, cells)?, k)?)
}

fn driven(ops: &FemOperators, case: &BenchmarkCase, tau: f64, steps: usize) -> wavefem::Result<StateSequence> {
    let grid = TimeGrid::new(tau, steps)?;
    let k = ops.space().degree();
    let shape = ops.space().load_vector(k + 6, |x| case.profile(x));
    run_leapfrog(ops, &grid, |n, f| {
        let phi = case.pulse(grid.t(n));
        f.iter_mut().zip(&shape).for_each(|(fi, s)| *fi = phi * s);
    })
}

/// Runs every check; errors in the library count as failures.
pub fn run_selftest() -> Vec<Check> {
    let mut out = Vec::new();
    if let Err(e) = checks(&mut out) {
        out.push(Check {
            name: "library error",
            passed: false,
            detail: e.to_string(),
        });
    }
    out
}

fn checks(out: &mut Vec<Check>) -> Result<(), Box<dyn std::error::Error>> {
    let case = BenchmarkCase::standing();
    let ops = operators(8, 2)?;
    let (tau, steps) = (0.1, 200);
    let seq = driven(&ops, &case, tau, steps + 2)?;
    let long = TimeGrid::new(tau, steps + 2)?;
    let grid = TimeGrid::new(tau, steps)?;

    let l = reconstruct_l(&seq, &long)?;
    let jump = l.continuity_jumps().iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    out.push(check("C2 continuity of the quartic reconstruction", jump, 1e-10));
    out.push(check("commuting identity", verify_commuting(&seq, &long)?, 1e-10));
    let f_tau = SourceReconstruction::new(|t, x| case.forcing(t, x), &long);
    out.push(check(
        "time-reconstructed equation",
        verify_reconstructed_equation(&ops, &seq, &long, &f_tau)?,
        1e-9,
    ));

    // Damped stability on a generic run with a smooth load.
    let stab_ops = operators(8, 1)?;
    let stab_tau = 1.0 / lambda_max(&stab_ops).sqrt();
    let stab_grid = TimeGrid::new(stab_tau, 2000)?;
    let shape = stab_ops.space().load_vector(7, |x| (0.7 * x).sin());
    let load = |n: usize, f: &mut [f64]| {
        let c = (0.3 * stab_grid.t(n)).cos();
        f.iter_mut().zip(&shape).for_each(|(fi, s)| *fi = c * s);
    };
    let stab_seq = run_leapfrog_generic(&stab_ops, &stab_grid, load)?;
    let norms: Vec<f64> = (0..stab_grid.n_steps())
        .map(|n| {
            let mut f = vec![0.0; stab_ops.n_dofs()];
            load(n, &mut f);
            let x = stab_ops.mass_factor().solve(&f);
            x.iter().zip(&f).map(|(a, b)| a * b).sum()
        })
        .collect();
    let s = check_damped_stability(&stab_ops, &stab_seq, &stab_grid, 0.05, &norms)?;
    out.push(Check {
        name: "damped stability inequality",
        passed: s.satisfied,
        detail: format!("lhs {:.3e} <= rhs {:.3e}", s.lhs, s.rhs),
    });
    out.push(check(
        "stability constant limit 13/12",
        (stability_constant(1e-9) - 13.0 / 12.0).abs(),
        1e-4,
    ));

    // Single-pass evaluation against direct quadrature.
    let rho = 0.5;
    let u = reconstruct_r(&seq, &long)?;
    let d = delta(&seq, &long)?;
    let direct = error_measures(&ops, &seq, &u, &l, &case, &grid, rho)?;
    let direct_est = [
        estimator_r(&ops, &grid, &l, &f_tau, rho)?,
        estimator_m(&ops, &grid, &d, rho)?,
        data_oscillation(ops.space(), &grid, &f_tau, rho)?,
    ];
    let pulse = |t: f64| case.pulse(t);
    let profile = |x: f64| case.profile(x);
    let source = SeparableSource {
        pulse: &pulse,
        profile: &profile,
    };
    let mut eval = StreamingEvaluator::new(&ops, &grid, rho, source, Some(ExactField::Pointwise(&case)))?;
    for s in seq.states() {
        eval.push(s)?;
    }
    let streamed = eval.finish()?;
    let e = streamed.errors.unwrap_or_default();
    let pairs = [
        (e.e_w, direct.e_w),
        (e.ex_w, direct.ex_w),
        (e.et_w, direct.et_w),
        (e.e_nodes, direct.e_nodes),
        (streamed.r, direct_est[0]),
        (streamed.m, direct_est[1]),
        (streamed.eta_f, direct_est[2]),
    ];
    let worst = pairs
        .iter()
        .map(|(a, b)| (a - b).abs() / b.abs())
        .fold(0.0f64, f64::max);
    out.push(check("single-pass evaluation matches direct quadrature", worst, 1e-9));

    let zero = run_experiment(&RunConfig {
        t_star: 20.0,
        ..RunConfig::new(Benchmark::Zero, 2, 8)
    })?;
    let largest = [zero.e_rho, zero.e_w, zero.lambda, zero.r, zero.m, zero.eta_f]
        .iter()
        .fold(0.0f64, |a, &b| a.max(b));
    out.push(check("zero forcing gives zero error and estimate", largest, 0.0));
    Ok(())
}
