use serde::{Deserialize, Serialize};

use super::{pair_name, Direction, Element, Expr, LpModel, Sense};
use crate::algorithms::paper_constants;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MtlmLpParams {
    pub delta: f64,
    pub beta: f64,
    pub phi: f64,
}

impl Default for MtlmLpParams {
    fn default() -> Self {
        let c0 = paper_constants().c0;
        MtlmLpParams { delta: c0, beta: 1.0 + c0, phi: 1.0 + c0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DlmLpParams {
    /// Part lengths in units of `D`.
    pub delta: [f64; 3],
    /// Weights of `h`.
    pub beta: [f64; 3],
    /// Weights of `g`.
    pub beta_short: [f64; 2],
    pub phi: f64,
}

impl Default for DlmLpParams {
    fn default() -> Self {
        DlmLpParams { delta: [1.0, 0.75, 0.5], beta: [1.0, 1.25, 0.75], beta_short: [2.0, 1.0], phi: 3.0 }
    }
}

impl DlmLpParams {
    /// Same as the default with `beta[1]` replaced.
    pub fn with_beta2(beta2: f64) -> Self {
        let mut p = DlmLpParams::default();
        p.beta[1] = beta2;
        p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DlmLpOptions {
    pub include_short: bool,
    /// Distance variables and triangle rows between two multisets.
    pub multiset_pairs: bool,
    /// Use one global coefficient on the OPT move term instead of each
    /// part's own length.
    pub strict_delta: Option<f64>,
    /// Identify the short-phase OPT start with the long-phase one.
    pub share_opt_start: bool,
    /// Treat `A2` as a member of the point set: it joins the triangle rows
    /// and the minimizer quantifiers.
    pub a2_in_points: bool,
}

impl Default for DlmLpOptions {
    fn default() -> Self {
        DlmLpOptions {
            include_short: true,
            multiset_pairs: true,
            strict_delta: None,
            share_opt_start: true,
            a2_in_points: true,
        }
    }
}

/// Distance variables and triangle rows over a list of elements.
struct Geometry {
    model: LpModel,
    /// Elements that take part in triangle rows.
    closed: Vec<String>,
}

impl Geometry {
    fn new(name: &str, elements: &[(&str, bool)]) -> Self {
        let mut model = LpModel::new(name, Direction::Maximize);
        model.elements = elements.iter().map(|&(n, m)| Element { name: n.to_string(), multiset: m }).collect();
        Geometry { closed: model.elements.iter().map(|e| e.name.clone()).collect(), model }
    }

    fn distance_vars(&mut self, multiset_pairs: bool) {
        let els = self.model.elements.clone();
        for (i, a) in els.iter().enumerate() {
            for b in &els[i + 1..] {
                if a.multiset && b.multiset && !multiset_pairs {
                    continue;
                }
                let name = pair_name(&a.name, &b.name, &els);
                self.model.add_var(name, 0.0, f64::INFINITY);
            }
        }
    }

    /// `[a, b]` as an expression. Panics on an undefined pair.
    fn d(&self, a: &str, b: &str) -> Expr {
        if a == b {
            return Expr::default();
        }
        let j = self.model.pair_var(a, b).unwrap_or_else(|| panic!("no distance variable for {a},{b}"));
        Expr::var(j)
    }

    fn scalar(&mut self, name: &str) -> Expr {
        let j = self.model.add_var(name, f64::NEG_INFINITY, f64::INFINITY);
        Expr::var(j)
    }

    fn triangles(&mut self) {
        let names = self.closed.clone();
        for mid in &names {
            for (i, a) in names.iter().enumerate() {
                for b in &names[i + 1..] {
                    if a == mid || b == mid {
                        continue;
                    }
                    let (Some(ab), Some(am), Some(mb)) =
                        (self.model.pair_var(a, b), self.model.pair_var(a, mid), self.model.pair_var(mid, b))
                    else {
                        continue;
                    };
                    self.model.add_constraint(
                        format!("tri_{mid}_{a}_{b}"),
                        Expr::var(ab),
                        Sense::Le,
                        Expr::var(am) + Expr::var(mb),
                    );
                }
            }
        }
    }
}

/// Factor-revealing LP for one phase of an MTLM-like algorithm.
pub fn build_mtlm_lp(params: &MtlmLpParams) -> LpModel {
    let MtlmLpParams { delta, beta, phi } = *params;
    let mut g = Geometry::new("mtlm", &[("A0", false), ("A1", false), ("O0", false), ("O1", false), ("R", true)]);
    g.model.params = vec![("delta".into(), delta), ("beta".into(), beta), ("phi".into(), phi)];
    g.distance_vars(true);
    let alg = g.scalar("C_ALG");
    let opt = g.scalar("C_OPT");
    let req = g.scalar("C_OPT_req");
    let mv = g.scalar("C_OPT_move");

    let rhs = delta * g.d("A0", "R") + g.d("A0", "A1") + phi * (g.d("A1", "O1") - g.d("A0", "O0"));
    g.model.add_constraint("def_alg", alg.clone(), Sense::Eq, rhs);
    g.model.add_constraint("norm_opt", opt.clone(), Sense::Eq, Expr::constant(1.0));
    g.model.add_constraint("def_opt", opt, Sense::Eq, req.clone() + mv.clone());
    g.model.add_constraint("optlb_move", mv.clone(), Sense::Ge, g.d("O0", "O1"));
    g.model.add_constraint(
        "optlb_req",
        2.0 * req + delta * mv,
        Sense::Ge,
        delta * (g.d("O0", "R") + g.d("O1", "R")),
    );
    let f = |g: &Geometry, x: &str| g.d("A0", x) + beta * g.d(x, "R");
    for v in ["A0", "O0", "O1"] {
        g.model.add_constraint(format!("min_{v}"), f(&g, "A1"), Sense::Le, f(&g, v));
    }
    g.triangles();
    g.model.set_objective(alg);
    g.model
}

/// Factor-revealing LP for one phase of a DLM-like algorithm, optionally
/// strengthened by the short-phase block.
pub fn build_dlm_lp(params: &DlmLpParams, opts: &DlmLpOptions) -> LpModel {
    let DlmLpParams { delta, beta, beta_short, phi } = *params;
    let short = opts.include_short;
    let mut points = vec!["A0", "A3", "OL0", "OL1", "OL2", "OL3"];
    if short {
        points.push("A2");
        if !opts.share_opt_start {
            points.push("OS0");
        }
        points.extend(["OS1", "OS2"]);
    }
    let mut els: Vec<(&str, bool)> = points.iter().map(|&p| (p, false)).collect();
    els.extend([("R1", true), ("R2", true), ("R3", true)]);
    let name = if short { "dlm" } else { "dlm-no-short" };
    let mut g = Geometry::new(name, &els);
    let mut ps = vec![
        ("delta1".to_string(), delta[0]),
        ("delta2".to_string(), delta[1]),
        ("delta3".to_string(), delta[2]),
        ("beta1".to_string(), beta[0]),
        ("beta2".to_string(), beta[1]),
        ("beta3".to_string(), beta[2]),
    ];
    if short {
        ps.push(("beta_short1".into(), beta_short[0]));
        ps.push(("beta_short2".into(), beta_short[1]));
    }
    ps.push(("phi".into(), phi));
    if let Some(d) = opts.strict_delta {
        ps.push(("strict_delta".into(), d));
    }
    g.model.params = ps;
    g.distance_vars(opts.multiset_pairs);
    if short && !opts.a2_in_points {
        g.closed.retain(|n| n != "A2");
    }
    let quantified: Vec<String> = g.closed.iter().filter(|n| !n.starts_with('R')).cloned().collect();
    let parts = ["R1", "R2", "R3"];
    let move_coef = |i: usize| opts.strict_delta.unwrap_or(delta[i]);

    // long phase
    let alg = g.scalar("C_ALGL");
    let opt = g.scalar("C_OPTL");
    let reqs: Vec<Expr> = (1..=3).map(|i| g.scalar(&format!("C_OPTL_req{i}"))).collect();
    let moves: Vec<Expr> = (1..=3).map(|i| g.scalar(&format!("C_OPTL_move{i}"))).collect();
    let mut rhs = g.d("A0", "A3") + phi * (g.d("A3", "OL3") - g.d("A0", "OL0"));
    for (i, r) in parts.iter().enumerate() {
        rhs = rhs + delta[i] * g.d("A0", r);
    }
    g.model.add_constraint("def_algl", alg.clone(), Sense::Eq, rhs);
    g.model.add_constraint("norm_optl", opt.clone(), Sense::Eq, Expr::constant(1.0));
    let total: Expr = reqs.iter().chain(&moves).cloned().sum();
    g.model.add_constraint("def_optl", opt, Sense::Eq, total);
    for i in 0..3 {
        let (o0, o1) = (format!("OL{i}"), format!("OL{}", i + 1));
        g.model.add_constraint(format!("optlb_move_L{}", i + 1), moves[i].clone(), Sense::Ge, g.d(&o0, &o1));
        g.model.add_constraint(
            format!("optlb_req_L{}", i + 1),
            2.0 * reqs[i].clone() + move_coef(i) * moves[i].clone(),
            Sense::Ge,
            delta[i] * (g.d(&o0, parts[i]) + g.d(&o1, parts[i])),
        );
    }
    let h = |g: &Geometry, x: &str| {
        g.d("A0", x) + parts.iter().zip(beta).map(|(r, b)| b * g.d(x, r)).sum::<Expr>()
    };
    for v in quantified.iter().filter(|v| *v != "A3") {
        g.model.add_constraint(format!("min_h_{v}"), h(&g, "A3"), Sense::Le, h(&g, v));
    }

    // short phase
    if short {
        let os0 = if opts.share_opt_start { "OL0" } else { "OS0" };
        let alg_s = g.scalar("C_ALGS");
        let opt_s = g.scalar("C_OPTS");
        let reqs: Vec<Expr> = (1..=2).map(|i| g.scalar(&format!("C_OPTS_req{i}"))).collect();
        let moves: Vec<Expr> = (1..=2).map(|i| g.scalar(&format!("C_OPTS_move{i}"))).collect();
        let mut rhs = g.d("A0", "A2") + phi * (g.d("A2", "OS2") - g.d("A0", os0));
        for (i, r) in parts[..2].iter().enumerate() {
            rhs = rhs + delta[i] * g.d("A0", r);
        }
        g.model.add_constraint("def_algs", alg_s.clone(), Sense::Eq, rhs);
        let total: Expr = reqs.iter().chain(&moves).cloned().sum();
        g.model.add_constraint("def_opts", opt_s.clone(), Sense::Eq, total);
        let traj = [os0, "OS1", "OS2"];
        for i in 0..2 {
            let (o0, o1) = (traj[i], traj[i + 1]);
            g.model.add_constraint(format!("optlb_move_S{}", i + 1), moves[i].clone(), Sense::Ge, g.d(o0, o1));
            g.model.add_constraint(
                format!("optlb_req_S{}", i + 1),
                2.0 * reqs[i].clone() + move_coef(i) * moves[i].clone(),
                Sense::Ge,
                delta[i] * (g.d(o0, parts[i]) + g.d(o1, parts[i])),
            );
        }
        let gf = |g: &Geometry, x: &str| {
            g.d("A0", x) + beta_short[0] * g.d(x, "R1") + beta_short[1] * g.d(x, "R2")
        };
        for v in quantified.iter().filter(|v| *v != "A2") {
            g.model.add_constraint(format!("min_g_{v}"), gf(&g, "A2"), Sense::Le, gf(&g, v));
        }
        g.model.add_constraint("case_short", alg_s, Sense::Ge, 4.0 * opt_s);
    }
    g.triangles();
    g.model.set_objective(alg);
    g.model
}
