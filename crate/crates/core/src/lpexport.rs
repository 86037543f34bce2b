//! CPLEX-LP export of the linearized selection model.
//!
//! Variables:
//! - `x_i`, `g_i` binary; `g_i` is the switch that ties `y` to `θ` when
//!   `x_i = 1` and to zero otherwise.
//! - `theta_i_k`, `y_i_k` continuous in `[0, 1]`, with `y_i_k = x_i θ_i_k`.
//!
//! Indices in names are 1-based, value types too (`k = 1` is economic).
//! `theta`/`y` variables exist only where requirement `i` has a nonzero
//! influence in type `k`; elsewhere the penalty is identically zero.

use std::fmt::{self, Write};

use crate::model::{SorsModel, StructuralKind};
use crate::vdg::InfluenceMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(f64, String)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarBound {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpDocument {
    pub objective: Vec<(f64, String)>,
    pub rows: Vec<Row>,
    pub bounds: Vec<VarBound>,
    pub binaries: Vec<String>,
}

impl LpDocument {
    /// Every variable name, in declaration order.
    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.binaries.iter().chain(self.bounds.iter().map(|b| &b.name)).map(String::as_str)
    }
}

/// Fixed-point rendering with 12 significant digits and no exponent.
pub fn format_number(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return "0".to_string();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    let mut s = format!("{v:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

fn write_terms(out: &mut String, terms: &[(f64, String)]) -> fmt::Result {
    if terms.is_empty() {
        return out.write_str(" 0 x_1");
    }
    for (idx, (c, name)) in terms.iter().enumerate() {
        let sign = if *c < 0.0 { "-" } else { "+" };
        let mag = c.abs();
        if idx == 0 && sign == "+" {
            out.write_str(" ")?;
        } else {
            write!(out, " {sign} ")?;
        }
        if mag == 1.0 {
            out.write_str(name)?;
        } else {
            write!(out, "{} {name}", format_number(mag))?;
        }
    }
    Ok(())
}

impl fmt::Display for LpDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        out.push_str("Maximize\n obj:");
        write_terms(&mut out, &self.objective)?;
        out.push_str("\nSubject To\n");
        for row in &self.rows {
            write!(out, " {}:", row.name)?;
            write_terms(&mut out, &row.terms)?;
            writeln!(out, " {} {}", row.sense.symbol(), format_number(row.rhs))?;
        }
        if !self.bounds.is_empty() {
            out.push_str("Bounds\n");
            for b in &self.bounds {
                writeln!(out, " {} <= {} <= {}", format_number(b.lower), b.name, format_number(b.upper))?;
            }
        }
        if !self.binaries.is_empty() {
            out.push_str("Binary\n");
            for b in &self.binaries {
                writeln!(out, " {b}")?;
            }
        }
        out.push_str("End\n");
        f.write_str(&out)
    }
}

fn x(i: usize) -> String {
    format!("x_{}", i + 1)
}

fn g(i: usize) -> String {
    format!("g_{}", i + 1)
}

fn theta(i: usize, k: usize) -> String {
    format!("theta_{}_{}", i + 1, k + 1)
}

fn y(i: usize, k: usize) -> String {
    format!("y_{}_{}", i + 1, k + 1)
}

fn nonzero(terms: impl IntoIterator<Item = (f64, String)>) -> Vec<(f64, String)> {
    terms.into_iter().filter(|(c, _)| *c != 0.0).collect()
}

pub fn export_lp(model: &SorsModel, influences: &[InfluenceMatrix]) -> LpDocument {
    let n = model.len();
    let kinds = model.value_types();
    assert_eq!(influences.len(), kinds, "one influence matrix per value type");

    // penalized[i][k]: whether θ_{i,k} can be nonzero
    let penalized: Vec<Vec<bool>> =
        (0..n).map(|i| (0..kinds).map(|k| influences[k].row_has_influence(i)).collect()).collect();
    let has_g: Vec<bool> = penalized.iter().map(|row| row.iter().any(|&p| p)).collect();

    let typed_total = |k: usize| {
        let mut terms = Vec::new();
        for (i, row) in penalized.iter().enumerate() {
            let v = model.value(i, k);
            terms.push((v, x(i)));
            if row[k] {
                terms.push((-v, y(i, k)));
            }
        }
        nonzero(terms)
    };

    let objective = typed_total(0);
    let mut rows = vec![Row {
        name: "budget".into(),
        terms: nonzero((0..n).map(|i| (model.cost(i), x(i)))),
        sense: Sense::Le,
        rhs: model.budget(),
    }];

    for (idx, &alpha) in model.social_bounds().iter().enumerate() {
        let k = idx + 1;
        rows.push(Row { name: format!("social_{}", k + 1), terms: typed_total(k), sense: Sense::Ge, rhs: alpha });
    }

    for (idx, c) in model.structural().iter().enumerate() {
        let (terms, rhs) = match c.kind {
            StructuralKind::Precedes => (vec![(1.0, x(c.i)), (-1.0, x(c.j))], 0.0),
            StructuralKind::ConflictsWith => (vec![(1.0, x(c.i)), (1.0, x(c.j))], 1.0),
        };
        let tag = match c.kind {
            StructuralKind::Precedes => "prec",
            StructuralKind::ConflictsWith => "conf",
        };
        rows.push(Row { name: format!("{tag}_{}", idx + 1), terms, sense: Sense::Le, rhs });
    }

    for i in 0..n {
        for (k, m) in influences.iter().enumerate() {
            for j in 0..n {
                let v = m.get(i, j);
                if i == j || v == 0.0 {
                    continue;
                }
                rows.push(Row {
                    name: format!("pen_{}_{}_{}", i + 1, j + 1, k + 1),
                    terms: vec![(1.0, theta(i, k)), (v, x(j))],
                    sense: Sense::Ge,
                    rhs: (v.abs() + v) / 2.0,
                });
            }
        }
    }

    for i in (0..n).filter(|&i| has_g[i]) {
        let id = i + 1;
        let link = |name: String, terms: Vec<(f64, String)>, sense, rhs| Row { name, terms, sense, rhs };
        rows.push(link(format!("xg_lo_{id}"), vec![(1.0, x(i)), (1.0, g(i))], Sense::Ge, 0.0));
        rows.push(link(format!("xg_hi_{id}"), vec![(1.0, x(i)), (-1.0, g(i))], Sense::Le, 0.0));
        rows.push(link(format!("xg_on_lo_{id}"), vec![(1.0, x(i)), (-1.0, g(i))], Sense::Ge, 0.0));
        rows.push(link(format!("xg_on_hi_{id}"), vec![(1.0, x(i)), (1.0, g(i))], Sense::Le, 2.0));
        for k in (0..kinds).filter(|&k| penalized[i][k]) {
            let ik = format!("{id}_{}", k + 1);
            rows.push(link(format!("yg_lo_{ik}"), vec![(1.0, y(i, k)), (1.0, g(i))], Sense::Ge, 0.0));
            rows.push(link(format!("yg_hi_{ik}"), vec![(1.0, y(i, k)), (-1.0, g(i))], Sense::Le, 0.0));
            rows.push(link(
                format!("yt_lo_{ik}"),
                vec![(1.0, y(i, k)), (-1.0, theta(i, k)), (-1.0, g(i))],
                Sense::Ge,
                -1.0,
            ));
            rows.push(link(
                format!("yt_hi_{ik}"),
                vec![(1.0, y(i, k)), (-1.0, theta(i, k)), (1.0, g(i))],
                Sense::Le,
                1.0,
            ));
        }
    }

    let mut bounds = Vec::new();
    for (i, row) in penalized.iter().enumerate() {
        for k in (0..kinds).filter(|&k| row[k]) {
            bounds.push(VarBound { name: theta(i, k), lower: 0.0, upper: 1.0 });
            bounds.push(VarBound { name: y(i, k), lower: 0.0, upper: 1.0 });
        }
    }

    let mut binaries: Vec<String> = (0..n).map(x).collect();
    binaries.extend((0..n).filter(|&i| has_g[i]).map(g));

    LpDocument { objective, rows, bounds, binaries }
}
