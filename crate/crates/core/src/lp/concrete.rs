//! Evaluation of LP constraints on concrete phases.
//!
//! A concrete phase fixes every element of the model to a point or a request
//! multiset of a real metric, and every cost scalar to the cost actually
//! paid. All constraints outside [`SOUNDNESS_EXCLUDED`] must then hold.

use std::collections::HashMap;

use serde::Serialize;

use super::{build_dlm_lp, build_mtlm_lp, DlmLpOptions, DlmLpParams, LpModel, MtlmLpParams};
use crate::algorithms::{argmin_point, trajectory_cost};
use crate::error::{Error, Result};
use crate::metric::{MetricSpace, PathElement, PointId, RequestMultiset};

/// Constraint classes that do not describe every phase: the normalization
/// of OPT's cost and the case assumption of the short-phase block.
pub const SOUNDNESS_EXCLUDED: [&str; 2] = ["norm", "case"];

#[derive(Clone, Debug)]
pub struct ConcretePhase {
    pub model: LpModel,
    /// Indexed like `model.vars`.
    pub values: Vec<f64>,
}

impl ConcretePhase {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.model.var_index(name).map(|j| self.values[j])
    }

    pub fn checks(&self) -> Vec<ConstraintCheck> {
        evaluate_constraints(&self.model, &self.values)
    }

    /// Smallest slack over the constraints that must hold on every phase.
    pub fn min_sound_slack(&self) -> f64 {
        self.checks().iter().filter(|c| !c.excluded()).map(|c| c.slack).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintCheck {
    pub name: String,
    pub class: String,
    /// Nonnegative iff the constraint holds.
    pub slack: f64,
}

impl ConstraintCheck {
    pub fn excluded(&self) -> bool {
        SOUNDNESS_EXCLUDED.contains(&self.class.as_str())
    }
}

pub fn evaluate_constraints(model: &LpModel, values: &[f64]) -> Vec<ConstraintCheck> {
    model
        .constraints
        .iter()
        .map(|c| ConstraintCheck { name: c.name.clone(), class: c.class().to_string(), slack: c.slack(values) })
        .collect()
}

enum Item {
    Point(PointId),
    Set(RequestMultiset),
}

impl Item {
    fn elem(&self) -> PathElement<'_> {
        match self {
            Item::Point(p) => PathElement::Point(*p),
            Item::Set(s) => PathElement::Multiset(s),
        }
    }
}

fn fill(model: LpModel, space: &MetricSpace, items: &HashMap<&str, Item>, scalars: &[(String, f64)]) -> Result<ConcretePhase> {
    let mut values = vec![f64::NAN; model.vars.len()];
    for j in 0..model.vars.len() {
        if let Some((a, b)) = model.var_pair(j) {
            let (x, y) = (&items[a.name.as_str()], &items[b.name.as_str()]);
            values[j] = space.bracket_elems(x.elem(), y.elem(), true)?;
        }
    }
    for (name, v) in scalars {
        let j = model.var_index(name).ok_or_else(|| Error::InvalidParameter(format!("no variable {name}")))?;
        values[j] = *v;
    }
    if let Some(v) = model.vars.iter().zip(&values).find(|(_, x)| x.is_nan()) {
        return Err(Error::InvalidParameter(format!("variable {} left unassigned", v.0.name)));
    }
    Ok(ConcretePhase { model, values })
}

fn check_traj(space: &MetricSpace, traj: &[PointId], requests: usize, what: &str) -> Result<()> {
    if traj.len() != requests + 1 {
        return Err(Error::LengthMismatch(format!("{what} has {} positions for {requests} requests", traj.len())));
    }
    for p in traj {
        space.point(p.0)?;
    }
    Ok(())
}

fn split_cost(space: &MetricSpace, requests: &[PointId], traj: &[PointId]) -> (f64, f64) {
    let serve = requests.iter().zip(traj).map(|(&r, &p)| space.d(p, r)).sum();
    (serve, trajectory_cost(space, requests, traj) - serve)
}

/// MTLM-like phase starting at `a0` with OPT following `opt`; `delta` is
/// taken from the phase length.
pub fn instantiate_mtlm(
    space: &MetricSpace,
    a0: PointId,
    requests: &[PointId],
    opt: &[PointId],
    beta: f64,
    phi: f64,
) -> Result<ConcretePhase> {
    check_traj(space, opt, requests.len(), "OPT trajectory")?;
    space.point(a0.0)?;
    let r = RequestMultiset::from_requests(requests)?;
    let delta = requests.len() as f64 / space.big_d();
    let model = build_mtlm_lp(&MtlmLpParams { delta, beta, phi });
    let (a1, _) = argmin_point(space, a0, |x| space.bracket(a0, x) + beta * space.bracket_multiset(x, &r));
    let (o0, o1) = (opt[0], *opt.last().unwrap());
    let c_alg = delta * space.bracket_multiset(a0, &r) + space.bracket(a0, a1)
        + phi * (space.bracket(a1, o1) - space.bracket(a0, o0));
    let (req, mv) = split_cost(space, requests, opt);
    let items: HashMap<&str, Item> = [
        ("A0", Item::Point(a0)),
        ("A1", Item::Point(a1)),
        ("O0", Item::Point(o0)),
        ("O1", Item::Point(o1)),
        ("R", Item::Set(r)),
    ]
    .into_iter()
    .collect();
    let scalars =
        [("C_ALG".into(), c_alg), ("C_OPT".into(), req + mv), ("C_OPT_req".into(), req), ("C_OPT_move".into(), mv)];
    fill(model, space, &items, &scalars)
}

/// DLM-like phase of `9D/4` requests starting at `a0`. `opt_long` covers
/// all three parts, `opt_short` the first two; part lengths override
/// `params.delta`.
pub fn instantiate_dlm(
    space: &MetricSpace,
    a0: PointId,
    requests: &[PointId],
    opt_long: &[PointId],
    opt_short: &[PointId],
    params: &DlmLpParams,
    opts: &DlmLpOptions,
) -> Result<ConcretePhase> {
    let d = space.file_size() as usize;
    if !d.is_multiple_of(4) {
        return Err(Error::InvalidParameter(format!("D = {d} is not divisible by 4")));
    }
    let q = d / 4;
    if requests.len() != 9 * q {
        return Err(Error::LengthMismatch(format!("a phase has {} requests, got {}", 9 * q, requests.len())));
    }
    space.point(a0.0)?;
    check_traj(space, opt_long, 9 * q, "long OPT trajectory")?;
    let cuts = [0, 4 * q, 7 * q, 9 * q];
    let dd = space.big_d();
    let mut params = *params;
    for i in 0..3 {
        params.delta[i] = (cuts[i + 1] - cuts[i]) as f64 / dd;
    }
    let model = build_dlm_lp(&params, opts);
    let parts: Vec<RequestMultiset> =
        (0..3).map(|i| RequestMultiset::from_requests(&requests[cuts[i]..cuts[i + 1]])).collect::<Result<_>>()?;
    let b = params.beta;
    let h = |x: PointId| space.bracket(a0, x) + (0..3).map(|i| b[i] * space.bracket_multiset(x, &parts[i])).sum::<f64>();
    let (a3, _) = argmin_point(space, a0, h);
    let ol: Vec<PointId> = cuts.iter().map(|&c| opt_long[c]).collect();
    let mut c_alg = space.bracket(a0, a3) + params.phi * (space.bracket(a3, ol[3]) - space.bracket(a0, ol[0]));
    for i in 0..3 {
        c_alg += params.delta[i] * space.bracket_multiset(a0, &parts[i]);
    }
    let mut scalars = vec![("C_ALGL".to_string(), c_alg)];
    let mut total = 0.0;
    for i in 0..3 {
        let (s, m) = split_cost(space, &requests[cuts[i]..cuts[i + 1]], &opt_long[cuts[i]..=cuts[i + 1]]);
        scalars.push((format!("C_OPTL_req{}", i + 1), s));
        scalars.push((format!("C_OPTL_move{}", i + 1), m));
        total += s + m;
    }
    scalars.push(("C_OPTL".into(), total));
    let mut items: HashMap<&str, Item> = HashMap::new();
    items.insert("A0", Item::Point(a0));
    items.insert("A3", Item::Point(a3));
    for (i, name) in ["OL0", "OL1", "OL2", "OL3"].into_iter().enumerate() {
        items.insert(name, Item::Point(ol[i]));
    }
    if opts.include_short {
        check_traj(space, opt_short, 7 * q, "short OPT trajectory")?;
        if opts.share_opt_start && opt_short[0] != opt_long[0] {
            return Err(Error::InvalidParameter("shared OPT start differs between trajectories".into()));
        }
        let bs = params.beta_short;
        let g = |x: PointId| {
            space.bracket(a0, x) + bs[0] * space.bracket_multiset(x, &parts[0]) + bs[1] * space.bracket_multiset(x, &parts[1])
        };
        let (a2, _) = argmin_point(space, a0, g);
        let os: Vec<PointId> = cuts[..3].iter().map(|&c| opt_short[c]).collect();
        let mut c_alg_s = space.bracket(a0, a2) + params.phi * (space.bracket(a2, os[2]) - space.bracket(a0, os[0]));
        for i in 0..2 {
            c_alg_s += params.delta[i] * space.bracket_multiset(a0, &parts[i]);
        }
        scalars.push(("C_ALGS".into(), c_alg_s));
        let mut total = 0.0;
        for i in 0..2 {
            let (s, m) = split_cost(space, &requests[cuts[i]..cuts[i + 1]], &opt_short[cuts[i]..=cuts[i + 1]]);
            scalars.push((format!("C_OPTS_req{}", i + 1), s));
            scalars.push((format!("C_OPTS_move{}", i + 1), m));
            total += s + m;
        }
        scalars.push(("C_OPTS".into(), total));
        items.insert("A2", Item::Point(a2));
        if !opts.share_opt_start {
            items.insert("OS0", Item::Point(os[0]));
        }
        items.insert("OS1", Item::Point(os[1]));
        items.insert("OS2", Item::Point(os[2]));
    }
    for (i, p) in parts.into_iter().enumerate() {
        items.insert(["R1", "R2", "R3"][i], Item::Set(p));
    }
    fill(model, space, &items, &scalars)
}
