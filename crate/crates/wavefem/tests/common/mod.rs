#![allow(dead_code)]

use wavefem::benchmarks::BenchmarkCase;
use wavefem::fem1d::{FemOperators, LagrangeSpace, UniformMesh1D};
use wavefem::timestepping::{run_leapfrog, StateSequence, TimeGrid};

pub fn operators(n_cells: usize, k: usize) -> FemOperators {
    let mesh = UniformMesh1D::new(-10.0, 10.0, n_cells).unwrap();
    FemOperators::new(LagrangeSpace::new(mesh, k).unwrap()).unwrap()
}

/// Leapfrog run of a benchmark on `N + extra` steps, loads by `k + 6`-point
/// quadrature of the analytic forcing.
pub fn benchmark_run(
    ops: &FemOperators,
    case: &BenchmarkCase,
    tau: f64,
    n_steps: usize,
    extra: usize,
) -> StateSequence {
    let grid = TimeGrid::new(tau, n_steps + extra).unwrap();
    let k = ops.space().degree();
    run_leapfrog(ops, &grid, |n, f| {
        f.copy_from_slice(&ops.space().load_vector(k + 6, |x| case.forcing(grid.t(n), x)))
    })
    .unwrap()
}

pub fn slope(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}
