//! Empirical convergence orders between consecutive meshes.

use std::fmt;

use crate::experiment::RunRecord;

/// Quantities whose orders are tabulated, by CSV column name.
pub const RATE_COLUMNS: [&str; 13] = [
    "e_U", "e_u", "e_w", "ex_U", "ex_u", "ex_w", "et_u", "et_w", "E_rho", "R", "M", "eta_f", "Lambda",
];

fn quantities(r: &RunRecord) -> [f64; 13] {
    [
        r.e_nodes, r.e_u, r.e_w, r.ex_nodes, r.ex_u, r.ex_w, r.et_u, r.et_w, r.e_rho, r.r, r.m, r.eta_f, r.lambda,
    ]
}

/// One row per refinement step: `log(qᵢ/qᵢ₊₁) / log(hᵢ/hᵢ₊₁)`, which is
/// `log₂(qᵢ/qᵢ₊₁)` on a doubling ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    /// `(h_coarse, h_fine, orders)`.
    pub rows: Vec<(f64, f64, [f64; 13])>,
}

impl RateTable {
    pub fn from_records(records: &[RunRecord]) -> Self {
        let rows = records
            .windows(2)
            .map(|w| {
                let (a, b) = (quantities(&w[0]), quantities(&w[1]));
                let dh = (w[0].h / w[1].h).ln();
                let orders = std::array::from_fn(|i| order(a[i], b[i], dh));
                (w[0].h, w[1].h, orders)
            })
            .collect();
        Self { rows }
    }

    /// Order of `column` on the last refinement step.
    pub fn last(&self, column: &str) -> Option<f64> {
        let i = RATE_COLUMNS.iter().position(|&c| c == column)?;
        self.rows.last().map(|r| r.2[i])
    }

    /// Orders of `column` on every refinement step.
    pub fn column(&self, column: &str) -> Option<Vec<f64>> {
        let i = RATE_COLUMNS.iter().position(|&c| c == column)?;
        Some(self.rows.iter().map(|r| r.2[i]).collect())
    }
}

fn order(coarse: f64, fine: f64, dh: f64) -> f64 {
    if coarse > 0.0 && fine > 0.0 && dh != 0.0 {
        (coarse / fine).ln() / dh
    } else {
        f64::NAN
    }
}

impl fmt::Display for RateTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>10} {:>10}", "h", "h_fine")?;
        for c in RATE_COLUMNS {
            write!(f, " {c:>7}")?;
        }
        writeln!(f)?;
        for (h0, h1, orders) in &self.rows {
            write!(f, "{h0:>10.4e} {h1:>10.4e}")?;
            for o in orders {
                write!(f, " {o:>7.3}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
