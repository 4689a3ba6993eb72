//! Factor-revealing linear programs for phase-based migration algorithms.
//!
//! The variables of a model are average distances between the elements of
//! one phase (points and request multisets) plus a handful of cost scalars.
//! Maximizing the algorithm's amortized cost with OPT's cost fixed to 1
//! bounds the competitive ratio of every algorithm the constraints describe.

mod build;
mod concrete;
mod format;
mod simplex;
mod witness;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use build::{build_dlm_lp, build_mtlm_lp, DlmLpOptions, DlmLpParams, MtlmLpParams};
pub use concrete::{
    evaluate_constraints, instantiate_dlm, instantiate_mtlm, ConcretePhase, ConstraintCheck, SOUNDNESS_EXCLUDED,
};
pub use format::{export_lp, export_mps, parse_lp};
pub use simplex::{solve_lp, solve_lp_with, LpSolution, LpStatus, SolverOptions};
pub use witness::{extract_witness, Witness};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Maximize,
    Minimize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

impl Variable {
    pub fn is_free(&self) -> bool {
        self.lower == f64::NEG_INFINITY && self.upper == f64::INFINITY
    }
}

/// `sum terms  sense  rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the constraint (0 if satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let l = self.lhs(x);
        match self.sense {
            Sense::Le => (l - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - l).max(0.0),
            Sense::Eq => (l - self.rhs).abs(),
        }
    }

    /// Distance from the boundary; zero when tight.
    pub fn slack(&self, x: &[f64]) -> f64 {
        let l = self.lhs(x);
        match self.sense {
            Sense::Le => self.rhs - l,
            Sense::Ge => l - self.rhs,
            Sense::Eq => -(l - self.rhs).abs(),
        }
    }

    /// Constraint class: the name up to the first underscore.
    pub fn class(&self) -> &str {
        self.name.split('_').next().unwrap_or("")
    }
}

/// A point or request multiset of the modeled phase.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Element {
    pub name: String,
    pub multiset: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpModel {
    pub name: String,
    pub params: Vec<(String, f64)>,
    pub elements: Vec<Element>,
    pub vars: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub direction: Direction,
    pub objective: Vec<(usize, f64)>,
}

impl LpModel {
    pub fn new(name: impl Into<String>, direction: Direction) -> Self {
        LpModel {
            name: name.into(),
            params: Vec::new(),
            elements: Vec::new(),
            vars: Vec::new(),
            constraints: Vec::new(),
            direction,
            objective: Vec::new(),
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> usize {
        self.vars.push(Variable { name: name.into(), lower, upper });
        self.vars.len() - 1
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == name).map(|&(_, v)| v)
    }

    /// Adds `lhs sense rhs`, moving variables left and constants right.
    pub fn add_constraint(&mut self, name: impl Into<String>, lhs: Expr, sense: Sense, rhs: Expr) {
        let e = lhs - rhs;
        self.constraints.push(Constraint { name: name.into(), terms: e.terms(), sense, rhs: -e.constant });
    }

    pub fn set_objective(&mut self, e: Expr) {
        self.objective = e.terms();
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, c)| c * x[j]).sum()
    }

    /// Distance variable of an element pair, `None` for an element with itself.
    pub fn pair_var(&self, a: &str, b: &str) -> Option<usize> {
        if a == b {
            return None;
        }
        self.var_index(&pair_name(a, b, &self.elements))
    }

    /// Element pair behind a distance variable.
    pub fn var_pair(&self, var: usize) -> Option<(&Element, &Element)> {
        let name = self.vars[var].name.strip_prefix("d_")?;
        self.elements.iter().find_map(|a| {
            let rest = name.strip_prefix(a.name.as_str())?.strip_prefix('_')?;
            self.elements.iter().find(|b| b.name == rest).map(|b| (a, b))
        })
    }

    /// Largest violation of any constraint or bound by `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.constraints.iter().map(|c| c.violation(x));
        let bounds = self.vars.iter().zip(x).map(|(v, &xi)| (v.lower - xi).max(xi - v.upper).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }
}

/// Canonical name of the distance variable between two distinct elements,
/// in element order.
pub(crate) fn pair_name(a: &str, b: &str, elements: &[Element]) -> String {
    let pos = |n: &str| elements.iter().position(|e| e.name == n);
    let (x, y) = match (pos(a), pos(b)) {
        (Some(i), Some(j)) if j < i => (b, a),
        _ => (a, b),
    };
    format!("d_{x}_{y}")
}

/// Affine expression over model variables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Expr {
    coefs: BTreeMap<usize, f64>,
    pub constant: f64,
}

impl Expr {
    pub fn var(j: usize) -> Self {
        Expr::term(j, 1.0)
    }

    pub fn term(j: usize, c: f64) -> Self {
        let mut e = Expr::default();
        e.add(j, c);
        e
    }

    pub fn constant(c: f64) -> Self {
        Expr { coefs: BTreeMap::new(), constant: c }
    }

    pub fn add(&mut self, j: usize, c: f64) {
        *self.coefs.entry(j).or_insert(0.0) += c;
    }

    pub fn terms(&self) -> Vec<(usize, f64)> {
        self.coefs.iter().filter(|(_, &c)| c != 0.0).map(|(&j, &c)| (j, c)).collect()
    }

    pub fn scaled(mut self, k: f64) -> Self {
        for c in self.coefs.values_mut() {
            *c *= k;
        }
        self.constant *= k;
        self
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;

    fn add(mut self, rhs: Expr) -> Expr {
        for (j, c) in rhs.coefs {
            Expr::add(&mut self, j, c);
        }
        self.constant += rhs.constant;
        self
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;

    fn sub(self, rhs: Expr) -> Expr {
        self + rhs.scaled(-1.0)
    }
}

impl std::ops::Mul<Expr> for f64 {
    type Output = Expr;

    fn mul(self, rhs: Expr) -> Expr {
        rhs.scaled(self)
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::default(), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::paper_constants;

    fn solve_value(m: &LpModel) -> f64 {
        let s = solve_lp(m);
        assert!(s.is_optimal(), "{:?} {:?}", s.status, s.message);
        s.objective_value
    }

    #[test]
    fn mtlm_value_is_r0() {
        let v = solve_value(&build_mtlm_lp(&MtlmLpParams::default()));
        assert!((v - paper_constants().r0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn dlm_value_is_four() {
        for multiset_pairs in [true, false] {
            for share_opt_start in [true, false] {
                let opts = DlmLpOptions { multiset_pairs, share_opt_start, ..Default::default() };
                let v = solve_value(&build_dlm_lp(&DlmLpParams::default(), &opts));
                assert!((v - 4.0).abs() < 1e-6, "{opts:?}: {v}");
            }
        }
    }

    #[test]
    fn printed_beta2_gives_five() {
        let v = solve_value(&build_dlm_lp(&DlmLpParams::with_beta2(0.25), &DlmLpOptions::default()));
        assert!((v - 5.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn long_block_alone_is_no_better_than_r0() {
        let r0 = paper_constants().r0;
        let no_short = DlmLpOptions { include_short: false, ..Default::default() };
        let s = solve_lp(&build_dlm_lp(&DlmLpParams::default(), &no_short));
        assert_eq!(s.status, LpStatus::Unbounded);
        for phi in [3.25, 3.5, 4.0, 6.0] {
            let params = DlmLpParams { phi, ..Default::default() };
            let long = solve_value(&build_dlm_lp(&params, &no_short));
            assert!(long >= r0 - 1e-6, "phi {phi}: {long}");
            let both = solve_value(&build_dlm_lp(&params, &DlmLpOptions::default()));
            assert!(both <= long + 1e-6);
        }
    }

    #[test]
    fn literal_point_set_is_unbounded() {
        let opts = DlmLpOptions { a2_in_points: false, ..Default::default() };
        assert_eq!(solve_lp(&build_dlm_lp(&DlmLpParams::default(), &opts)).status, LpStatus::Unbounded);
    }

    #[test]
    fn export_round_trip_is_canonical() {
        for m in [build_mtlm_lp(&MtlmLpParams::default()), build_dlm_lp(&DlmLpParams::default(), &DlmLpOptions::default())] {
            let text = export_lp(&m);
            let back = parse_lp(&text).unwrap();
            assert_eq!(export_lp(&back), text);
            assert_eq!(back.elements, m.elements);
            assert_eq!(back.params, m.params);
            assert_eq!(back.constraints.len(), m.constraints.len());
            assert!((solve_value(&back) - solve_value(&m)).abs() < 1e-9);
        }
    }

    #[test]
    fn witness_is_a_pseudometric() {
        let m = build_mtlm_lp(&MtlmLpParams::default());
        let s = solve_lp(&m);
        let w = extract_witness(&s, &m).unwrap();
        assert!(w.max_triangle_violation <= 1e-7);
        assert!(w.tight.iter().any(|n| n == "optlb_req"));
        assert_eq!(w.distance("A0", "A0"), Some(0.0));
        assert_eq!(w.distance("R", "R"), None);
        assert!((w.cost("C_ALG").unwrap() - s.objective_value).abs() < 1e-12);
        let failed = LpSolution { status: LpStatus::Infeasible, ..s };
        assert!(matches!(extract_witness(&failed, &m), Err(crate::Error::NotOptimal(_))));
    }

    #[test]
    fn objective_is_continuous_in_phi() {
        // below phi = 1 + delta the LP is unbounded; above it the value grows
        // with slope one
        let base = MtlmLpParams::default();
        let at = |phi: f64| solve_value(&build_mtlm_lp(&MtlmLpParams { phi, ..base }));
        let r0 = at(base.phi);
        for h in [1e-6, 1e-4, 1e-2] {
            let v = at(base.phi + h);
            assert!(((v - r0) / h - 1.0).abs() < 1e-3, "h = {h}: {v}");
        }
        let below = build_mtlm_lp(&MtlmLpParams { phi: base.phi - 1e-3, ..base });
        assert_eq!(solve_lp(&below).status, LpStatus::Unbounded);
        let mut prev = r0;
        for k in 1..=20 {
            let v = at(base.phi + 0.1 * k as f64);
            assert!(v >= prev - 1e-9 && v - prev < 0.1 + 1e-6, "step {k}");
            prev = v;
        }
    }

    #[test]
    fn duals_certify_the_mtlm_bound() {
        let m = build_mtlm_lp(&MtlmLpParams::default());
        let s = solve_lp(&m);
        let dual_obj: f64 = m.constraints.iter().zip(&s.duals).map(|(c, y)| c.rhs * y).sum();
        assert!((dual_obj - s.objective_value).abs() < 1e-7, "{dual_obj}");
    }
}
