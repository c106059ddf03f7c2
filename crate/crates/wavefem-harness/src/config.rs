//! Run configuration, parsed from `key = value` files and command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use wavefem::benchmarks::BenchmarkCase;
use wavefem::damped_norms::TAIL_TOLERANCE;

use crate::error::{HarnessError, Result};

/// Half width `L` of the computational domain `(−L, L)`.
pub const HALF_WIDTH: f64 = 10.0;

/// Mesh the CFL probe runs on.
pub const PROBE_CELLS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Benchmark {
    Standing,
    Propagating,
    /// Zero forcing: every error and estimator value must vanish.
    Zero,
}

impl Benchmark {
    pub fn case(self) -> BenchmarkCase {
        match self {
            Benchmark::Standing => BenchmarkCase::standing(),
            Benchmark::Propagating => BenchmarkCase::propagating(),
            Benchmark::Zero => BenchmarkCase::quiescent(),
        }
    }

    /// Damping used when none is given: the short-horizon value of each
    /// experiment family.
    pub fn default_rho(self) -> f64 {
        match self {
            Benchmark::Standing | Benchmark::Zero => 1.0,
            Benchmark::Propagating => 0.2,
        }
    }
}

impl FromStr for Benchmark {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "standing" => Ok(Benchmark::Standing),
            "propagating" => Ok(Benchmark::Propagating),
            "zero" => Ok(Benchmark::Zero),
            other => Err(HarnessError::Config(format!(
                "unknown benchmark `{other}` (expected standing, propagating or zero)"
            ))),
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Benchmark::Standing => "standing",
            Benchmark::Propagating => "propagating",
            Benchmark::Zero => "zero",
        })
    }
}

/// How the time step follows the mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeMode {
    /// `τ = r·α_k·h`.
    Cfl,
    /// `τ²/h³` fixed at its value `(r·α_k·h₀)²/h₀³` on the coarse mesh.
    Scaled,
}

impl FromStr for TimeMode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cfl" => Ok(TimeMode::Cfl),
            "scaled" => Ok(TimeMode::Scaled),
            other => Err(HarnessError::Config(format!(
                "unknown time mode `{other}` (expected cfl or scaled)"
            ))),
        }
    }
}

impl fmt::Display for TimeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimeMode::Cfl => "cfl",
            TimeMode::Scaled => "scaled",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub benchmark: Benchmark,
    pub degree: usize,
    pub n_cells: usize,
    pub rho: f64,
    pub cfl_ratio: f64,
    pub time_mode: TimeMode,
    /// Cells of the mesh that fixes `τ²/h³` in scaled mode.
    pub coarse_cells: usize,
    pub t_star: f64,
    /// Leapfrog steps of the CFL probe that determines `α_k`.
    pub alpha_probe_steps: usize,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            benchmark: Benchmark::Standing,
            degree: 1,
            n_cells: 32,
            rho: Benchmark::Standing.default_rho(),
            cfl_ratio: 0.9,
            time_mode: TimeMode::Cfl,
            coarse_cells: 2,
            t_star: 1000.0,
            alpha_probe_steps: 20_000,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn new(benchmark: Benchmark, degree: usize, n_cells: usize) -> Self {
        Self {
            benchmark,
            degree,
            n_cells,
            rho: benchmark.default_rho(),
            ..Self::default()
        }
    }

    pub fn with_cells(&self, n_cells: usize) -> Self {
        Self {
            n_cells,
            ..self.clone()
        }
    }

    pub fn mesh_size(&self) -> f64 {
        2.0 * HALF_WIDTH / self.n_cells as f64
    }

    /// Time step for a given CFL constant `α_k`.
    pub fn time_step(&self, alpha: f64) -> f64 {
        let h = self.mesh_size();
        match self.time_mode {
            TimeMode::Cfl => self.cfl_ratio * alpha * h,
            TimeMode::Scaled => {
                let h0 = 2.0 * HALF_WIDTH / self.coarse_cells as f64;
                self.cfl_ratio * alpha * h0 * (h / h0).powf(1.5)
            }
        }
    }

    /// Checks ranges; a horizon with `e^{−ρT⋆} > 5·10⁻⁶` only warns.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if !(1..=3).contains(&self.degree) {
            return bad(format!("degree {} not in 1..=3", self.degree));
        }
        for (name, n) in [("cells", self.n_cells), ("coarse cells", self.coarse_cells)] {
            if !(2..=512).contains(&n) || !n.is_power_of_two() {
                return bad(format!("{name} = {n} must be a power of two in 2..=512"));
            }
        }
        if self.time_mode == TimeMode::Scaled && self.coarse_cells > self.n_cells {
            return bad(format!(
                "coarse mesh ({} cells) is finer than the run mesh ({} cells)",
                self.coarse_cells, self.n_cells
            ));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad(format!("rho = {} must be positive", self.rho));
        }
        if !(self.cfl_ratio > 0.0 && self.cfl_ratio < 1.0) {
            return bad(format!("cfl ratio {} not in (0, 1)", self.cfl_ratio));
        }
        if !(self.t_star > 0.0 && self.t_star.is_finite()) {
            return bad(format!("tstar = {} must be positive", self.t_star));
        }
        if self.alpha_probe_steps < 100 {
            return bad(format!("alpha probe of {} steps is too short", self.alpha_probe_steps));
        }
        let tail = (-self.rho * self.t_star).exp();
        if tail > TAIL_TOLERANCE {
            log::warn!(
                "e^(-rho*tstar) = {tail:.3e} exceeds {TAIL_TOLERANCE:e}: the damped integrals are truncated early"
            );
        }
        Ok(())
    }

    /// Applies one `key = value` setting. Keys match the long flag names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = |v: &str| -> Result<f64> {
            v.trim()
                .parse()
                .map_err(|_| HarnessError::Config(format!("{key}: `{v}` is not a number")))
        };
        let int = |v: &str| -> Result<usize> {
            v.trim()
                .parse()
                .map_err(|_| HarnessError::Config(format!("{key}: `{v}` is not a count")))
        };
        match key.trim().replace('_', "-").as_str() {
            "benchmark" => {
                self.benchmark = value.parse()?;
            }
            "degree" => self.degree = int(value)?,
            "cells" => self.n_cells = int(value)?,
            "rho" => self.rho = num(value)?,
            "cfl-ratio" => self.cfl_ratio = num(value)?,
            "time-mode" => self.time_mode = value.parse()?,
            "coarse-cells" => self.coarse_cells = int(value)?,
            "tstar" => self.t_star = num(value)?,
            "alpha-probe" => self.alpha_probe_steps = int(value)?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            other => return Err(HarnessError::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of a file; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| HarnessError::Parse {
                path: path.to_path_buf(),
                line: i as u64 + 1,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            self.set(key, value).map_err(|e| HarnessError::Parse {
                path: path.to_path_buf(),
                line: i as u64 + 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_mode_keeps_tau_squared_over_h_cubed() {
        let mut cfg = RunConfig::new(Benchmark::Standing, 3, 2);
        cfg.time_mode = TimeMode::Scaled;
        let ratio = |n: usize| {
            let c = cfg.with_cells(n);
            c.time_step(0.15).powi(2) / c.mesh_size().powi(3)
        };
        let base = ratio(2);
        for n in [4, 8, 16, 32, 64, 128, 256, 512] {
            assert!((ratio(n) - base).abs() <= 1e-12 * base);
        }
    }

    #[test]
    fn settings_and_validation() {
        let mut cfg = RunConfig::default();
        cfg.set("benchmark", "propagating").unwrap();
        cfg.set("cfl_ratio", "0.5").unwrap();
        cfg.set("time-mode", "scaled").unwrap();
        assert_eq!(cfg.benchmark, Benchmark::Propagating);
        assert_eq!(cfg.cfl_ratio, 0.5);
        assert_eq!(cfg.time_mode, TimeMode::Scaled);
        assert!(cfg.set("colour", "red").is_err());
        assert!(cfg.set("degree", "two").is_err());
        cfg.validate().unwrap();
        for bad in [
            ("degree", "4"),
            ("cells", "48"),
            ("cells", "1024"),
            ("rho", "0"),
            ("cfl-ratio", "1"),
        ] {
            let mut c = cfg.clone();
            c.set(bad.0, bad.1).unwrap();
            assert!(c.validate().is_err(), "{bad:?}");
        }
    }
}
