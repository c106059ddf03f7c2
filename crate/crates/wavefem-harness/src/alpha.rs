//! Empirical CFL constants `α_k`, probed once per degree and cached.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use wavefem::fem1d::{LagrangeSpace, UniformMesh1D};
use wavefem::timestepping::find_cfl_alpha;

use crate::config::{HALF_WIDTH, PROBE_CELLS};
use crate::error::Result;

fn cache() -> &'static Mutex<HashMap<(usize, usize), f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), f64>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Largest stable `τ/h` of the leapfrog scheme in degree `k`, found by a
/// `probe_steps`-step run on a fixed mesh.
pub fn cfl_alpha(degree: usize, probe_steps: usize) -> Result<f64> {
    let key = (degree, probe_steps);
    if let Some(&a) = cache().lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return Ok(a);
    }
    let mesh = UniformMesh1D::new(-HALF_WIDTH, HALF_WIDTH, PROBE_CELLS)?;
    let space = LagrangeSpace::new(mesh, degree)?;
    let alpha = find_cfl_alpha(&space, probe_steps)?;
    log::info!("alpha_{degree} = {alpha:.4} ({probe_steps}-step probe)");
    cache().lock().unwrap_or_else(|e| e.into_inner()).insert(key, alpha);
    Ok(alpha)
}
