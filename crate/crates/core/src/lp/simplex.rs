//! Dense two-phase primal simplex on a full tableau.

use serde::Serialize;

use super::{Direction, LpModel, Sense};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
    SolverFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective_value: f64,
    /// Indexed like the model's variables.
    pub values: Vec<f64>,
    /// One dual value per model constraint.
    pub duals: Vec<f64>,
    pub iterations: usize,
    pub message: Option<String>,
}

impl LpSolution {
    fn failed(status: LpStatus, iterations: usize, msg: impl Into<String>) -> Self {
        LpSolution {
            status,
            objective_value: f64::NAN,
            values: Vec::new(),
            duals: Vec::new(),
            iterations,
            message: Some(msg.into()),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn value(&self, model: &LpModel, name: &str) -> Option<f64> {
        model.var_index(name).and_then(|j| self.values.get(j).copied())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    pub eps: f64,
    pub feasibility_tol: f64,
    pub max_iterations: usize,
    /// Degenerate pivots in a row before switching to Bland's rule.
    pub bland_after: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { eps: 1e-9, feasibility_tol: 1e-7, max_iterations: 100_000, bland_after: 200 }
    }
}

/// How a model variable maps onto nonnegative tableau columns.
#[derive(Clone, Copy, Debug)]
enum ColMap {
    /// `x = offset + col`
    Shift { col: usize, offset: f64 },
    /// `x = offset - col`
    Flip { col: usize, offset: f64 },
    /// `x = pos - neg`
    Split { pos: usize, neg: usize },
}

/// Pivots between rebuilds of the tableau from the original rows.
const REINVERT_EVERY: usize = 500;

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    orig_rows: Vec<Vec<f64>>,
    orig_rhs: Vec<f64>,
    basis: Vec<usize>,
    ncols: usize,
    /// Cost vector of the current phase (maximized).
    cost: Vec<f64>,
    /// Reduced costs `c_j - z_j`.
    obj: Vec<f64>,
    iterations: usize,
    since_reinvert: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

impl Tableau {
    fn set_cost(&mut self, cost: Vec<f64>) {
        self.cost = cost;
        self.refresh_obj();
    }

    fn refresh_obj(&mut self) {
        let mut obj = self.cost.clone();
        for r in 0..self.rows.len() {
            let cb = self.cost[self.basis[r]];
            if cb != 0.0 {
                for (o, a) in obj.iter_mut().zip(&self.rows[r]) {
                    *o -= cb * a;
                }
            }
        }
        for &b in &self.basis {
            obj[b] = 0.0;
        }
        self.obj = obj;
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = 1.0 / self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v *= inv;
        }
        self.rhs[r] *= inv;
        self.rows[r][c] = 1.0;
        let nz: Vec<usize> = (0..self.ncols).filter(|&j| self.rows[r][j] != 0.0).collect();
        let prow = std::mem::take(&mut self.rows[r]);
        let prhs = self.rhs[r];
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.rows[i];
            for &j in &nz {
                row[j] -= f * prow[j];
            }
            row[c] = 0.0;
            self.rhs[i] -= f * prhs;
        }
        let f = self.obj[c];
        if f != 0.0 {
            for &j in &nz {
                self.obj[j] -= f * prow[j];
            }
            self.obj[c] = 0.0;
        }
        self.rows[r] = prow;
        self.basis[r] = c;
        self.since_reinvert += 1;
    }

    /// Rebuilds `B^-1 [A | b]` from the original rows for the current basis.
    fn reinvert(&mut self, eps: f64) -> bool {
        let m = self.rows.len();
        let saved = (std::mem::take(&mut self.rows), std::mem::take(&mut self.rhs), self.basis.clone());
        self.rows = self.orig_rows.clone();
        self.rhs = self.orig_rhs.clone();
        let cols = saved.2.clone();
        let mut assigned = vec![false; m];
        let mut new_basis = vec![usize::MAX; m];
        for &c in &cols {
            let pick = (0..m)
                .filter(|&i| !assigned[i])
                .max_by(|&a, &b| self.rows[a][c].abs().total_cmp(&self.rows[b][c].abs()));
            let Some(r) = pick.filter(|&r| self.rows[r][c].abs() > eps) else {
                (self.rows, self.rhs, self.basis) = saved;
                return false;
            };
            assigned[r] = true;
            new_basis[r] = c;
            // eliminate without touching the objective row
            let inv = 1.0 / self.rows[r][c];
            for v in self.rows[r].iter_mut() {
                *v *= inv;
            }
            self.rhs[r] *= inv;
            let prow = std::mem::take(&mut self.rows[r]);
            for i in 0..m {
                if i == r {
                    continue;
                }
                let f = self.rows[i][c];
                if f != 0.0 {
                    for (x, p) in self.rows[i].iter_mut().zip(&prow) {
                        *x -= f * p;
                    }
                    self.rows[i][c] = 0.0;
                    self.rhs[i] -= f * self.rhs[r];
                }
            }
            self.rows[r] = prow;
        }
        self.basis = new_basis;
        for v in self.rhs.iter_mut() {
            if *v < 0.0 && *v > -1e-9 {
                *v = 0.0;
            }
        }
        self.refresh_obj();
        self.since_reinvert = 0;
        true
    }

    fn objective(&self) -> f64 {
        self.basis.iter().zip(&self.rhs).map(|(&b, &v)| self.cost[b] * v).sum()
    }

    fn optimize(&mut self, enter_ok: &dyn Fn(usize) -> bool, opts: &SolverOptions) -> Outcome {
        let mut degenerate = 0usize;
        let mut confirmed = false;
        loop {
            if self.iterations >= opts.max_iterations {
                return Outcome::IterationLimit;
            }
            if self.since_reinvert >= REINVERT_EVERY && !self.reinvert(opts.eps) {
                // keep the drifted tableau; the final feasibility check guards it
                self.since_reinvert = 0;
            }
            let bland = degenerate >= opts.bland_after;
            let candidates = (0..self.ncols).filter(|&j| enter_ok(j) && self.obj[j] > opts.eps);
            let enter = if bland {
                candidates.min()
            } else {
                candidates.max_by(|&a, &b| self.obj[a].total_cmp(&self.obj[b]).then(b.cmp(&a)))
            };
            let Some(c) = enter else {
                if self.since_reinvert == 0 || confirmed {
                    return Outcome::Optimal;
                }
                // confirm optimality on a freshly rebuilt tableau
                confirmed = !self.reinvert(opts.eps);
                continue;
            };
            let Some(r) = self.ratio_test(c, bland, opts) else {
                return Outcome::Unbounded;
            };
            if self.rhs[r] <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, c);
            self.iterations += 1;
        }
    }

    /// Harris two-pass ratio test; Bland's variant uses the exact minimum
    /// with the lowest basic index.
    fn ratio_test(&self, c: usize, bland: bool, opts: &SolverOptions) -> Option<usize> {
        let piv_tol = if bland { 1e-7 } else { 1e-9 };
        let rows = (0..self.rows.len()).filter(|&i| self.rows[i][c] > piv_tol);
        if bland {
            return rows.min_by(|&a, &b| {
                let (ra, rb) = (self.rhs[a] / self.rows[a][c], self.rhs[b] / self.rows[b][c]);
                ra.total_cmp(&rb).then(self.basis[a].cmp(&self.basis[b]))
            });
        }
        let delta = opts.eps;
        let theta = rows
            .clone()
            .map(|i| (self.rhs[i].max(0.0) + delta) / self.rows[i][c])
            .fold(f64::INFINITY, f64::min);
        if theta == f64::INFINITY {
            return None;
        }
        rows.filter(|&i| self.rhs[i].max(0.0) / self.rows[i][c] <= theta)
            .max_by(|&a, &b| self.rows[a][c].total_cmp(&self.rows[b][c]).then(b.cmp(&a)))
    }
}

/// Solves the model. Returned optimal assignments satisfy every constraint
/// and bound within the feasibility tolerance; otherwise the status is
/// [`LpStatus::SolverFailure`].
pub fn solve_lp(model: &LpModel) -> LpSolution {
    solve_lp_with(model, &SolverOptions::default())
}

pub fn solve_lp_with(model: &LpModel, opts: &SolverOptions) -> LpSolution {
    let mut maps = Vec::with_capacity(model.vars.len());
    let mut ncols = 0usize;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for v in &model.vars {
        if v.lower > v.upper {
            return LpSolution::failed(LpStatus::Infeasible, 0, format!("empty bounds on {}", v.name));
        }
        let m = if v.lower.is_finite() {
            if v.upper.is_finite() {
                bound_rows.push((ncols, v.upper - v.lower));
            }
            ColMap::Shift { col: ncols, offset: v.lower }
        } else if v.upper.is_finite() {
            ColMap::Flip { col: ncols, offset: v.upper }
        } else {
            ncols += 1;
            ColMap::Split { pos: ncols - 1, neg: ncols }
        };
        ncols += 1;
        maps.push(m);
    }

    struct Row {
        coefs: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
    }
    let mut rows: Vec<Row> = Vec::with_capacity(model.constraints.len() + bound_rows.len());
    for c in &model.constraints {
        let mut coefs = Vec::new();
        let mut rhs = c.rhs;
        for &(j, a) in &c.terms {
            match maps[j] {
                ColMap::Shift { col, offset } => {
                    coefs.push((col, a));
                    rhs -= a * offset;
                }
                ColMap::Flip { col, offset } => {
                    coefs.push((col, -a));
                    rhs -= a * offset;
                }
                ColMap::Split { pos, neg } => {
                    coefs.push((pos, a));
                    coefs.push((neg, -a));
                }
            }
        }
        rows.push(Row { coefs, sense: c.sense, rhs });
    }
    for &(col, ub) in &bound_rows {
        rows.push(Row { coefs: vec![(col, 1.0)], sense: Sense::Le, rhs: ub });
    }

    // rhs >= 0, then one identity column per row (slack or artificial)
    let m = rows.len();
    let mut negated = vec![false; m];
    for (i, r) in rows.iter_mut().enumerate() {
        if r.rhs < 0.0 {
            negated[i] = true;
            r.rhs = -r.rhs;
            for c in r.coefs.iter_mut() {
                c.1 = -c.1;
            }
            r.sense = match r.sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }
    let mut identity_col = vec![0usize; m];
    let mut surplus_col = vec![None; m];
    for (i, r) in rows.iter().enumerate() {
        if r.sense == Sense::Ge {
            surplus_col[i] = Some(ncols);
            ncols += 1;
        }
        identity_col[i] = ncols;
        ncols += 1;
    }
    let mut artificial = vec![false; ncols];
    for (i, r) in rows.iter().enumerate() {
        if r.sense != Sense::Le {
            artificial[identity_col[i]] = true;
        }
    }
    let mut dense = vec![vec![0.0; ncols]; m];
    for (i, r) in rows.iter().enumerate() {
        for &(j, a) in &r.coefs {
            dense[i][j] += a;
        }
        dense[i][identity_col[i]] = 1.0;
        if let Some(s) = surplus_col[i] {
            dense[i][s] = -1.0;
        }
    }
    let rhs: Vec<f64> = rows.iter().map(|r| r.rhs).collect();
    let mut tab = Tableau {
        orig_rows: dense.clone(),
        orig_rhs: rhs.clone(),
        rows: dense,
        rhs,
        basis: identity_col.clone(),
        ncols,
        cost: Vec::new(),
        obj: Vec::new(),
        iterations: 0,
        since_reinvert: 0,
    };

    let fail = |tab: &Tableau, o: Outcome, phase: u8| {
        let (status, msg) = match o {
            Outcome::Unbounded if phase == 2 => (LpStatus::Unbounded, "objective unbounded"),
            Outcome::Unbounded => (LpStatus::SolverFailure, "phase 1 reported unbounded"),
            Outcome::IterationLimit => (LpStatus::SolverFailure, "iteration limit reached"),
            Outcome::Optimal => unreachable!(),
        };
        LpSolution::failed(status, tab.iterations, format!("{msg} in phase {phase}"))
    };

    // phase 1: maximize -sum(artificials)
    if artificial.iter().any(|&a| a) {
        tab.set_cost(artificial.iter().map(|&a| if a { -1.0 } else { 0.0 }).collect());
        match tab.optimize(&|j| !artificial[j], opts) {
            Outcome::Optimal => {}
            o => return fail(&tab, o, 1),
        }
        let infeas = -tab.objective();
        let scale = 1.0 + tab.orig_rhs.iter().fold(0.0f64, |a, &b| a.max(b));
        if infeas > opts.feasibility_tol * scale {
            return LpSolution::failed(LpStatus::Infeasible, tab.iterations, format!("phase 1 residual {infeas:e}"));
        }
        for r in 0..m {
            if !artificial[tab.basis[r]] {
                continue;
            }
            let col = (0..ncols)
                .filter(|&j| !artificial[j])
                .max_by(|&a, &b| tab.rows[r][a].abs().total_cmp(&tab.rows[r][b].abs()));
            if let Some(c) = col.filter(|&c| tab.rows[r][c].abs() > 1e-7) {
                tab.pivot(r, c);
            }
        }
    }

    // phase 2
    let sign = match model.direction {
        Direction::Maximize => 1.0,
        Direction::Minimize => -1.0,
    };
    let mut cost = vec![0.0; ncols];
    for &(j, c) in &model.objective {
        let c = sign * c;
        match maps[j] {
            ColMap::Shift { col, .. } => cost[col] += c,
            ColMap::Flip { col, .. } => cost[col] -= c,
            ColMap::Split { pos, neg } => {
                cost[pos] += c;
                cost[neg] -= c;
            }
        }
    }
    tab.set_cost(cost);
    match tab.optimize(&|j| !artificial[j], opts) {
        Outcome::Optimal => {}
        o => return fail(&tab, o, 2),
    }

    let mut col_val = vec![0.0; ncols];
    for r in 0..m {
        col_val[tab.basis[r]] = tab.rhs[r];
    }
    let values: Vec<f64> = maps
        .iter()
        .map(|mp| match *mp {
            ColMap::Shift { col, offset } => offset + col_val[col],
            ColMap::Flip { col, offset } => offset - col_val[col],
            ColMap::Split { pos, neg } => col_val[pos] - col_val[neg],
        })
        .collect();
    let duals: Vec<f64> = (0..model.constraints.len())
        .map(|i| {
            let y = -tab.obj[identity_col[i]] * sign;
            if negated[i] {
                -y
            } else {
                y
            }
        })
        .collect();
    let viol = model.max_violation(&values);
    if !viol.is_finite() || viol > opts.feasibility_tol {
        return LpSolution::failed(
            LpStatus::SolverFailure,
            tab.iterations,
            format!("returned point violates the model by {viol:e}"),
        );
    }
    LpSolution {
        status: LpStatus::Optimal,
        objective_value: model.objective_value(&values),
        values,
        duals,
        iterations: tab.iterations,
        message: None,
    }
}

#[cfg(test)]
mod tests {
    use super::super::{Expr, LpModel};
    use super::*;

    fn model_1d(ub: f64) -> LpModel {
        let mut m = LpModel::new("t", Direction::Maximize);
        let x = m.add_var("x", 0.0, f64::INFINITY);
        m.add_constraint("c", Expr::var(x), Sense::Le, Expr::constant(ub));
        m.set_objective(Expr::var(x));
        m
    }

    #[test]
    fn one_variable() {
        let s = solve_lp(&model_1d(3.0));
        assert!(s.is_optimal());
        assert_eq!(s.objective_value, 3.0);
        assert_eq!(s.duals, vec![1.0]);
    }

    #[test]
    fn unbounded_and_infeasible() {
        let mut m = LpModel::new("u", Direction::Maximize);
        let x = m.add_var("x", 0.0, f64::INFINITY);
        m.set_objective(Expr::var(x));
        assert_eq!(solve_lp(&m).status, LpStatus::Unbounded);
        let mut m = model_1d(3.0);
        m.add_constraint("big", Expr::var(0), Sense::Ge, Expr::constant(5.0));
        assert_eq!(solve_lp(&m).status, LpStatus::Infeasible);
    }

    #[test]
    fn free_and_bounded_variables() {
        // min x + y  s.t. x - y = 2, y in [-3, 1], x free  ->  x = -1, y = -3
        let mut m = LpModel::new("b", Direction::Minimize);
        let x = m.add_var("x", f64::NEG_INFINITY, f64::INFINITY);
        let y = m.add_var("y", -3.0, 1.0);
        m.add_constraint("e", Expr::var(x) - Expr::var(y), Sense::Eq, Expr::constant(2.0));
        m.set_objective(Expr::var(x) + Expr::var(y));
        let s = solve_lp(&m);
        assert!(s.is_optimal());
        assert!((s.values[0] + 1.0).abs() < 1e-12 && (s.values[1] + 3.0).abs() < 1e-12);
        assert!((s.objective_value + 4.0).abs() < 1e-12);
        // upper-bounded only
        let mut m = LpModel::new("f", Direction::Maximize);
        let z = m.add_var("z", f64::NEG_INFINITY, 2.5);
        m.set_objective(Expr::var(z));
        assert_eq!(solve_lp(&m).objective_value, 2.5);
    }

    #[test]
    fn classic_textbook_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
        let mut m = LpModel::new("w", Direction::Maximize);
        let x = m.add_var("x", 0.0, f64::INFINITY);
        let y = m.add_var("y", 0.0, f64::INFINITY);
        m.add_constraint("a", Expr::var(x), Sense::Le, Expr::constant(4.0));
        m.add_constraint("b", Expr::term(y, 2.0), Sense::Le, Expr::constant(12.0));
        m.add_constraint("c", 3.0 * Expr::var(x) + 2.0 * Expr::var(y), Sense::Le, Expr::constant(18.0));
        m.set_objective(3.0 * Expr::var(x) + 5.0 * Expr::var(y));
        let s = solve_lp(&m);
        assert!((s.objective_value - 36.0).abs() < 1e-12);
        // dual prices (0, 1.5, 1) certify optimality: b^T y = 36
        let dual_obj: f64 = [4.0, 12.0, 18.0].iter().zip(&s.duals).map(|(b, y)| b * y).sum();
        assert!((dual_obj - 36.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Beale's cycling example (cycles under the textbook Dantzig rule)
        let mut m = LpModel::new("beale", Direction::Minimize);
        let x: Vec<usize> = (0..4).map(|i| m.add_var(format!("x{i}"), 0.0, f64::INFINITY)).collect();
        let row = |c: [f64; 4]| c.iter().zip(&x).map(|(&a, &j)| Expr::term(j, a)).sum::<Expr>();
        m.add_constraint("r1", row([0.25, -60.0, -0.04, 9.0]), Sense::Le, Expr::constant(0.0));
        m.add_constraint("r2", row([0.5, -90.0, -0.02, 3.0]), Sense::Le, Expr::constant(0.0));
        m.add_constraint("r3", row([0.0, 0.0, 1.0, 0.0]), Sense::Le, Expr::constant(1.0));
        m.set_objective(row([-0.75, 150.0, -0.02, 6.0]));
        let s = solve_lp(&m);
        assert!(s.is_optimal());
        assert!((s.objective_value + 0.05).abs() < 1e-9);
    }
}
