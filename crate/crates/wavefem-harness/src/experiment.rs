//! Single runs and mesh sweeps.

use std::time::Instant;

use wavefem::benchmarks::BenchmarkKind;
use wavefem::estimator::total_estimator;
use wavefem::fem1d::{FemOperators, LagrangeSpace, UniformMesh1D};
use wavefem::streaming::{ExactField, SeparableSource, StreamingEvaluator};
use wavefem::timestepping::{verify_cfl, Leapfrog, TimeGrid};

use crate::alpha::cfl_alpha;
use crate::config::{RunConfig, HALF_WIDTH};
use crate::error::{HarnessError, Result};
use crate::rates::RateTable;

/// One CSV row. `*_nodes` are the columns `e_U`, `ex_U`, `et_U` (discrete
/// sums over time nodes).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunRecord {
    pub h: f64,
    pub tau: f64,
    pub dofs: usize,
    pub steps: usize,
    pub e_nodes: f64,
    pub e_u: f64,
    pub e_w: f64,
    pub ex_nodes: f64,
    pub ex_u: f64,
    pub ex_w: f64,
    pub et_nodes: f64,
    pub et_u: f64,
    pub et_w: f64,
    pub e_rho: f64,
    pub r: f64,
    pub m: f64,
    pub eta_f: f64,
    pub lambda: f64,
    pub effectivity: f64,
    pub wall_time: f64,
}

impl RunRecord {
    /// Equality of everything except the wall time.
    pub fn same_results(&self, other: &Self) -> bool {
        Self {
            wall_time: 0.0,
            ..*self
        } == Self {
            wall_time: 0.0,
            ..*other
        }
    }
}

/// Runs the solver and evaluates every error and estimator quantity in one
/// pass over the time steps.
pub fn run_experiment(config: &RunConfig) -> Result<RunRecord> {
    config.validate()?;
    let start = Instant::now();
    let alpha = cfl_alpha(config.degree, config.alpha_probe_steps)?;
    let tau = config.time_step(alpha);
    if config.rho * tau > 1.0 {
        return Err(HarnessError::Config(format!(
            "rho*tau = {} exceeds 1",
            config.rho * tau
        )));
    }
    let mesh = UniformMesh1D::new(-HALF_WIDTH, HALF_WIDTH, config.n_cells)?;
    let space = LagrangeSpace::new(mesh, config.degree)?;
    let ops = FemOperators::new(space)?;
    verify_cfl(&ops, tau)?;
    let grid = TimeGrid::covering(tau, config.t_star)?;

    let case = config.benchmark.case();
    let pulse = |t: f64| case.pulse(t);
    let profile = |x: f64| case.profile(x);
    let time = |t: f64| case.separable_time_factor(t).unwrap_or((0.0, 0.0));
    let space_factor = |x: f64| case.separable_space_factor(x).unwrap_or((0.0, 0.0));
    let exact = match case.kind() {
        BenchmarkKind::Propagating => ExactField::Pointwise(&case),
        BenchmarkKind::Standing | BenchmarkKind::Quiescent => ExactField::Separable {
            time: &time,
            space: &space_factor,
        },
    };
    let source = SeparableSource {
        pulse: &pulse,
        profile: &profile,
    };
    let mut eval = StreamingEvaluator::new(&ops, &grid, config.rho, source, Some(exact))?;

    // Driven scheme: U⁰ = U¹ = 0, loads Fⁿ = φ(tⁿ)·(g, φᵢ) from n = 1.
    let shape = space.load_vector(space.degree() + 6, profile);
    let zero = vec![0.0; ops.n_dofs()];
    eval.push(&zero)?;
    eval.push(&zero)?;
    let mut stepper = Leapfrog::with_initial(&ops, tau, &zero, &zero)?;
    let mut load = zero.clone();
    while !eval.is_complete() {
        let phi = pulse(grid.t(stepper.index()));
        for (l, s) in load.iter_mut().zip(&shape) {
            *l = phi * s;
        }
        eval.push(stepper.step(&load)?)?;
    }
    let summary = eval.finish()?;
    let errors = summary.errors.unwrap_or_default();
    let e_rho = errors.energy_error();
    let parts = total_estimator(summary.r, summary.m, summary.eta_f, Some(e_rho))?;

    let record = RunRecord {
        h: config.mesh_size(),
        tau,
        dofs: ops.n_dofs(),
        steps: grid.n_steps(),
        e_nodes: errors.e_nodes,
        e_u: errors.e_u,
        e_w: errors.e_w,
        ex_nodes: errors.ex_nodes,
        ex_u: errors.ex_u,
        ex_w: errors.ex_w,
        et_nodes: errors.et_nodes,
        et_u: errors.et_u,
        et_w: errors.et_w,
        e_rho,
        r: parts.r,
        m: parts.m,
        eta_f: parts.eta_f,
        lambda: parts.lambda,
        effectivity: parts.effectivity.unwrap_or(f64::NAN),
        wall_time: start.elapsed().as_secs_f64(),
    };
    log::info!(
        "{} k={} cells={} tau={:.3e} steps={}: E={:.3e} Lambda={:.3e} eff={:.3} ({:.1}s)",
        config.benchmark,
        config.degree,
        config.n_cells,
        tau,
        record.steps,
        record.e_rho,
        record.lambda,
        record.effectivity,
        record.wall_time
    );
    Ok(record)
}

/// Records of a ladder together with their empirical orders.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub records: Vec<RunRecord>,
    pub rates: RateTable,
}

/// Runs `base` on every mesh of an ascending ladder.
pub fn sweep(base: &RunConfig, ladder: &[usize]) -> Result<Sweep> {
    if ladder.is_empty() || ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HarnessError::Config(format!(
            "ladder {ladder:?} must be nonempty and strictly ascending"
        )));
    }
    let records = ladder
        .iter()
        .map(|&n| run_experiment(&base.with_cells(n)))
        .collect::<Result<Vec<_>>>()?;
    let rates = RateTable::from_records(&records);
    Ok(Sweep { records, rates })
}
