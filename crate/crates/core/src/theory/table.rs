use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::scalar::Scalar;
use crate::theory::{complexity_iterations, Setting, TheoryInputs};

pub const TABLE_COLUMNS: [&str; 4] = ["convex L-smooth", "convex G-Lipschitz", "mu-strongly convex", "mu-PL"];

const LAYOUT: [(&str, [Option<Setting>; 4]); 6] = {
    use Setting::*;
    [
        ("GD", [Some(GdConvex), Some(SsdConvexGeneral), Some(GdStronglyConvex), Some(GdPl)]),
        ("SGD", [Some(SgdConvexConst), Some(SsdConvexGeneral), Some(SgdStronglyConvex), Some(SgdPl)]),
        ("mini-SGD", [Some(MiniConvexConst), None, Some(MiniStronglyConvex), None]),
        ("momentum", [Some(MomentumConvex), None, None, None]),
        ("prox-GD", [Some(PgdConvex), None, Some(PgdStronglyConvex), None]),
        ("prox-SGD", [Some(SpgdConvexConst), None, Some(SpgdStronglyConvex), None]),
    ]
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Cell {
    Value {
        setting: Setting,
        t_min: usize,
        gamma: Option<f64>,
    },
    /// Corollary exists but the inputs do not support it.
    Unavailable { setting: Setting, reason: String },
    NotCovered,
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Value { t_min, .. } => t_min.to_string(),
            Cell::Unavailable { reason, .. } => format!("n/a ({reason})"),
            Cell::NotCovered => "not covered".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub method: String,
    pub cells: Vec<Cell>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityTable {
    pub epsilon: f64,
    pub rows: Vec<TableRow>,
}

/// Evaluates every populated cell of the method-by-class table at `ε`.
///
/// Composite constants that are absent are taken from the smooth part, as
/// for a zero regularizer (`σ*_F = σ*_f`, `F₀ = f₀`). Strongly convex and
/// PŁ cells for the deterministic methods are relative to the initial
/// quantity.
pub fn complexity_table<S: Scalar>(inputs: &TheoryInputs<S>, epsilon: S) -> ComplexityTable {
    let mut inputs = inputs.clone();
    if inputs.constants.sigma_star_cap_f.is_none() {
        inputs.constants.sigma_star_cap_f = inputs.constants.sigma_star_f;
    }
    if inputs.init.cap_f0_gap.is_none() {
        inputs.init.cap_f0_gap = Some(inputs.init.f0_gap);
    }
    let rows = LAYOUT
        .iter()
        .map(|(method, settings)| TableRow {
            method: method.to_string(),
            cells: settings
                .iter()
                .map(|s| match s {
                    None => Cell::NotCovered,
                    Some(s) => match complexity_iterations(*s, &inputs, epsilon) {
                        Ok(a) => Cell::Value {
                            setting: *s,
                            t_min: a.t_min,
                            gamma: a.recommended_gamma.map(|g| g.as_f64()),
                        },
                        Err(e) => Cell::Unavailable {
                            setting: *s,
                            reason: match e {
                                Error::MissingConstant(name) => format!("missing {name}"),
                                Error::Hypothesis { constraint, .. } => {
                                    let short = constraint.split(" (").next().unwrap_or(&constraint);
                                    format!("needs {short}")
                                }
                                other => other.to_string(),
                            },
                        },
                    },
                })
                .collect(),
        })
        .collect();
    ComplexityTable {
        epsilon: epsilon.as_f64(),
        rows,
    }
}

impl ComplexityTable {
    /// First constant a populated cell was missing, if any.
    pub fn missing_constant(&self) -> Option<String> {
        self.rows.iter().flat_map(|r| &r.cells).find_map(|c| match c {
            Cell::Unavailable { reason, .. } => reason.strip_prefix("missing ").map(str::to_string),
            _ => None,
        })
    }

    pub fn to_text(&self) -> String {
        let mut grid: Vec<Vec<String>> = vec![std::iter::once("method".to_string())
            .chain(TABLE_COLUMNS.iter().map(|c| c.to_string()))
            .collect()];
        for row in &self.rows {
            grid.push(
                std::iter::once(row.method.clone())
                    .chain(row.cells.iter().map(Cell::render))
                    .collect(),
            );
        }
        let widths: Vec<usize> = (0..grid[0].len())
            .map(|j| grid.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = format!("epsilon = {:e}\n", self.epsilon);
        for r in &grid {
            let line: Vec<String> = r
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:<w$}"))
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("method");
        for c in TABLE_COLUMNS {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.method);
            for c in &row.cells {
                out.push(',');
                let s = c.render();
                if s.contains(',') {
                    let _ = write!(out, "\"{s}\"");
                } else {
                    out.push_str(&s);
                }
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::fixture;

    #[test]
    fn gd_convex_cell_and_uncovered() {
        let fx = fixture::<f64>("ls_4x2").unwrap();
        let inputs = TheoryInputs::new(fx.instance.constants.clone(), fx.init()).with_batch_size(2);
        let t = complexity_table(&inputs, 1e-3);
        let d2 = fx.init().d_sq;
        match &t.rows[0].cells[0] {
            Cell::Value { t_min, .. } => assert_eq!(*t_min, (0.75 * d2 / 2e-3f64).ceil() as usize),
            c => panic!("{c:?}"),
        }
        let uncovered = t.rows.iter().flat_map(|r| &r.cells).filter(|c| **c == Cell::NotCovered).count();
        assert_eq!(uncovered, 9);
        assert!(t.to_text().contains("not covered"));
        assert_eq!(t.to_csv().matches("not covered").count(), 9);
        // ls_4x2 has no G
        assert_eq!(t.rows[0].cells[1].render(), "n/a (missing G)");
    }
}
