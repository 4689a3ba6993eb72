//! Phase-by-phase checking of DLM's 4-competitiveness argument.
//!
//! Every complete phase is cut into its parts, paired with the positions of a
//! reference OPT trajectory at the part boundaries, and the potential
//! `Phi = 3 [dlm, op]` is evaluated at both ends. [`verify_dlm_phase`] checks
//! the per-phase inequality, [`verify_proof_chain`] re-evaluates every step
//! of the argument that establishes it.

use std::io::Write;

use serde::Serialize;

use crate::algorithms::{dlm_g, dlm_h, PhaseKind, RunRecord};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::metric::{tolerance, MetricSpace, PathElement as E, PointId, RequestMultiset};
use crate::opt::OptResult;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseLedger {
    pub phase_id: usize,
    pub kind: PhaseKind,
    /// The phase covers steps `start + 1 ..= end`.
    pub start: usize,
    pub end: usize,
    pub dlm_start: PointId,
    pub dlm_end: PointId,
    /// OPT positions at the part boundaries, `op^0 ..= op^parts`.
    pub opt_marks: Vec<PointId>,
    pub parts: Vec<RequestMultiset>,
    /// OPT cost within each part.
    pub c_opt_parts: Vec<f64>,
    pub c_alg: f64,
    pub c_opt: f64,
    pub phi_start: f64,
    pub phi_end: f64,
}

impl PhaseLedger {
    pub fn op(&self, i: usize) -> PointId {
        self.opt_marks[i]
    }

    pub fn part(&self, i: usize) -> &RequestMultiset {
        &self.parts[i - 1]
    }
}

/// Ledgers of all complete phases of `run` plus the number of trailing steps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Partition {
    pub ledgers: Vec<PhaseLedger>,
    pub tail_steps: usize,
    pub tail_alg: f64,
    pub tail_opt: f64,
}

fn part_bounds(kind: PhaseKind, len: usize, file_size: usize) -> Vec<usize> {
    let q = file_size / 4;
    match kind {
        PhaseKind::Short if len == 7 * q => vec![0, 4 * q, 7 * q],
        PhaseKind::Long if len == 9 * q => vec![0, 4 * q, 7 * q, 9 * q],
        _ => vec![0, len],
    }
}

fn opt_cost(space: &MetricSpace, requests: &[PointId], traj: &[PointId], from: usize, to: usize) -> f64 {
    (from..to).map(|i| space.d(traj[i], requests[i]) + space.bracket(traj[i], traj[i + 1])).sum()
}

/// Splits a run into per-phase ledgers against the OPT trajectory `opt`.
pub fn phase_partition(space: &MetricSpace, run: &RunRecord, opt: &OptResult) -> Result<Partition> {
    let t = run.steps();
    if opt.trajectory.len() != t + 1 || run.positions.len() != t + 1 {
        return Err(Error::LengthMismatch(format!(
            "run has {} steps, opt trajectory has {} positions",
            t,
            opt.trajectory.len()
        )));
    }
    let reqs = &run.requests;
    let traj = &opt.trajectory;
    let d = space.file_size() as usize;
    let phi = |i: usize| 3.0 * space.bracket(run.positions[i], traj[i]);
    let mut ledgers = Vec::with_capacity(run.phases.len());
    for (phase_id, ph) in run.phases.iter().enumerate() {
        let bounds: Vec<usize> = part_bounds(ph.kind, ph.len(), d).into_iter().map(|b| ph.start + b).collect();
        let parts = bounds.windows(2).map(|w| RequestMultiset::from_requests(&reqs[w[0]..w[1]])).collect::<Result<_>>()?;
        let c_opt_parts: Vec<f64> = bounds.windows(2).map(|w| opt_cost(space, reqs, traj, w[0], w[1])).collect();
        ledgers.push(PhaseLedger {
            phase_id,
            kind: ph.kind,
            start: ph.start,
            end: ph.end,
            dlm_start: run.positions[ph.start],
            dlm_end: run.positions[ph.end],
            opt_marks: bounds.iter().map(|&b| traj[b]).collect(),
            parts,
            c_alg: run.cost_between(ph.start, ph.end),
            c_opt: c_opt_parts.iter().sum(),
            c_opt_parts,
            phi_start: phi(ph.start),
            phi_end: phi(ph.end),
        });
    }
    let tail = run.tail_start();
    Ok(Partition {
        ledgers,
        tail_steps: run.trailing_partial,
        tail_alg: run.cost_between(tail, t),
        tail_opt: opt_cost(space, reqs, traj, tail, t),
    })
}

/// `4 c_opt + phi_start - c_alg - phi_end`.
pub fn verify_dlm_phase(ledger: &PhaseLedger) -> f64 {
    4.0 * ledger.c_opt + ledger.phi_start - ledger.c_alg - ledger.phi_end
}

/// One inequality `lhs <= rhs` of the argument, evaluated on a concrete phase.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainStep {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    /// Holds with equality by definition; its slack is rounding noise.
    pub identity: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProofChain {
    pub kind: PhaseKind,
    pub steps: Vec<ChainStep>,
}

impl ProofChain {
    pub fn min_slack(&self) -> f64 {
        self.steps.iter().map(|s| s.slack).fold(f64::INFINITY, f64::min)
    }

    /// The steps telescope, so this equals [`verify_dlm_phase`].
    pub fn total_slack(&self) -> f64 {
        self.steps.iter().map(|s| s.slack).sum()
    }

    pub fn step(&self, name: &str) -> Option<&ChainStep> {
        self.steps.iter().find(|s| s.name == name)
    }
}

struct Chain {
    steps: Vec<ChainStep>,
}

impl Chain {
    fn le(&mut self, name: &'static str, lhs: f64, rhs: f64) {
        self.steps.push(ChainStep { name, lhs, rhs, slack: rhs - lhs, identity: false });
    }

    fn eq(&mut self, name: &'static str, lhs: f64, rhs: f64) {
        self.steps.push(ChainStep { name, lhs, rhs, slack: rhs - lhs, identity: true });
    }
}

/// Evaluates every inequality of the short- or long-phase argument.
pub fn verify_proof_chain(space: &MetricSpace, l: &PhaseLedger) -> Result<ProofChain> {
    let parts = match l.kind {
        PhaseKind::Short => 2,
        PhaseKind::Long => 3,
        PhaseKind::Fixed => {
            return Err(Error::InvalidParameter("proof chains exist for DLM phases only".into()));
        }
    };
    if l.parts.len() != parts || l.opt_marks.len() != parts + 1 {
        return Err(Error::LengthMismatch(format!("{:?} ledger needs {parts} parts", l.kind)));
    }
    let p = |path: &[E<'_>]| space.path(path);
    let b = |u: PointId, v: PointId| space.bracket(u, v);
    let m = |v: PointId, s: &RequestMultiset| space.bracket_multiset(v, s);
    let (dlm, v) = (E::Point(l.dlm_start), l.dlm_end);
    let (o0, o1, o2) = (l.op(0), l.op(1), l.op(2));
    let (e0, e1, e2) = (E::Point(o0), E::Point(o1), E::Point(o2));
    let (r1, r2) = (l.part(1), l.part(2));
    let (s1, s2) = (E::Multiset(r1), E::Multiset(r2));
    let x = l.c_alg + l.phi_end;
    let mut c = Chain { steps: Vec::new() };

    let segment_bound = |c_opt: f64, w: f64, a: PointId, r: &RequestMultiset, z: PointId| {
        (w * (m(a, r) + m(z, r)) + (4.0 - w) * b(a, z), 4.0 * c_opt)
    };
    let (lhs, rhs) = segment_bound(l.c_opt_parts[0], 2.0, o0, r1, o1);
    c.le("budget.segment_bound_r1", lhs, rhs);
    let (lhs, rhs) = segment_bound(l.c_opt_parts[1], 1.5, o1, r2, o2);
    c.le("budget.segment_bound_r2", lhs, rhs);
    let mut budget = 3.0 * b(l.dlm_start, o0)
        + 2.0 * b(o0, o1)
        + 2.0 * p(&[e0, s1, e1])
        + 2.5 * b(o1, o2)
        + 1.5 * p(&[e1, s2, e2]);

    let dlm0 = l.dlm_start;
    let g_op0 = dlm_g(space, dlm0, o0, r1, r2);
    if parts == 2 {
        let x0 = m(dlm0, r1) + 0.75 * m(dlm0, r2) + b(dlm0, v) + 3.0 * b(v, o2);
        c.eq("short.alg_accounting", x, x0);
        let x1 = m(dlm0, r1) + 0.75 * m(dlm0, r2) + b(dlm0, v) + 2.0 * p(&[E::Point(v), s1, e2]) + p(&[E::Point(v), s2, e2]);
        c.le("short.potential_triangle", x0, x1);
        let f4 = m(dlm0, r1) + 0.75 * m(dlm0, r2) + 2.0 * m(o2, r1) + m(o2, r2);
        let g_v = dlm_g(space, dlm0, v, r1, r2);
        c.eq("short.regroup_g", x1, f4 + g_v);
        let rhs4 = p(&[dlm, e0, s1]) + 0.75 * p(&[dlm, e0, e1, s2]) + 2.0 * p(&[e2, e1, s1]) + m(o2, r2);
        c.le("short.alg_terms_triangle", f4, rhs4);
        let mid = 0.5 * g_op0 + 0.75 * m(dlm0, r2);
        c.le("short.g_minimizer_and_condition", g_v, mid);
        let g_path = 0.5 * p(&[dlm, e0, s1, e0, s2]) + 0.75 * m(dlm0, r2);
        c.eq("short.g_op0_as_path", mid, g_path);
        let rhs5 = 0.5 * p(&[dlm, e0, s1, e0, e1, e2, s2]) + 0.75 * p(&[dlm, e0, e1, s2]);
        c.le("short.g_path_triangle", g_path, rhs5);
        c.le("short.budget_cover", rhs4 + rhs5, budget);
    } else {
        let o3 = l.op(3);
        let e3 = E::Point(o3);
        let r3 = l.part(3);
        let s3 = E::Multiset(r3);
        let (lhs, rhs) = segment_bound(l.c_opt_parts[2], 1.0, o2, r3, o3);
        c.le("budget.segment_bound_r3", lhs, rhs);
        budget += 3.0 * b(o2, o3) + p(&[e2, s3, e3]);
        let head = m(dlm0, r1) + 0.75 * m(dlm0, r2) + 0.5 * m(dlm0, r3);
        let x0 = head + b(dlm0, v) + 3.0 * b(v, o3);
        c.eq("long.alg_accounting", x, x0);
        let ev = E::Point(v);
        let x1 = head + b(dlm0, v) + p(&[ev, s1, e3]) + 1.25 * p(&[ev, s2, e3]) + 0.75 * p(&[ev, s3, e3]);
        c.le("long.potential_triangle", x0, x1);
        let mid = m(o3, r1) + 1.25 * m(o3, r2) + 0.75 * m(o3, r3);
        let h_v = dlm_h(space, dlm0, v, r1, r2, r3);
        c.eq("long.regroup_h", x1, head + mid + h_v);
        // first three summands
        c.le("long.no_short_condition", 0.75 * m(dlm0, r2), 0.5 * g_op0);
        c.le("long.g_op0_path", 0.5 * g_op0, 0.5 * p(&[dlm, e0, s1, e0, e1, s2]));
        let tri_lhs = m(dlm0, r1) + 0.5 * m(dlm0, r3);
        let tri_rhs = p(&[dlm, e0, s1]) + 0.5 * p(&[dlm, e0, e1, e2, s3]);
        c.le("long.head_triangle", tri_lhs, tri_rhs);
        let rhs8 = tri_rhs + 0.5 * p(&[dlm, e0, s1, e0, e1, s2]);
        // next three summands
        let rhs9a = p(&[e3, e2, e1, s1]) + 1.25 * p(&[e3, e2, s2]) + 0.75 * m(o3, r3);
        c.le("long.opt_terms_triangle", mid, rhs9a);
        // h(v_h)
        let h_op1 = dlm_h(space, dlm0, o1, r1, r2, r3);
        c.le("long.h_minimizer", h_v, h_op1);
        c.le("long.split_dlm_edge", b(o1, dlm0), p(&[e1, e0, dlm]));
        c.le("long.split_r2_path", 1.25 * m(o1, r2), m(o1, r2) + 0.25 * p(&[e1, e2, s2]));
        c.le("long.split_r3_path", 0.75 * m(o1, r3), 0.5 * p(&[e1, e2, s3]) + 0.25 * p(&[e1, e2, e3, s3]));
        let rhs9 = p(&[e1, e0, dlm])
            + m(o1, r1)
            + m(o1, r2)
            + 0.25 * p(&[e1, e2, s2])
            + 0.5 * p(&[e1, e2, s3])
            + 0.25 * p(&[e1, e2, e3, s3]);
        c.le("long.budget_cover", rhs8 + rhs9a + rhs9, budget);
    }
    Ok(ProofChain { kind: l.kind, steps: c.steps })
}

/// `|sum of chain slacks - phase slack|`.
pub fn chain_residual(ledger: &PhaseLedger, chain: &ProofChain) -> f64 {
    (chain.total_slack() - verify_dlm_phase(ledger)).abs()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseSlack {
    pub run: usize,
    pub phase_id: usize,
    pub kind: PhaseKind,
    pub slack: f64,
    pub min_chain_slack: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompetitiveReport {
    pub total_alg: f64,
    pub total_opt: f64,
    /// `None` when `total_opt` is zero.
    pub ratio: Option<f64>,
    /// Potential at the start minus potential at the end, plus the cost of
    /// trailing partial phases, summed over runs.
    pub additive_offset: f64,
    pub phases: Vec<PhaseSlack>,
    pub negative_slack_phases: usize,
    pub warnings: Vec<String>,
}

impl CompetitiveReport {
    /// `total_alg <= factor * total_opt + additive_offset` up to tolerance.
    pub fn within(&self, factor: f64) -> bool {
        self.total_alg <= factor * self.total_opt + self.additive_offset + tolerance() * (1.0 + self.total_alg)
    }
}

/// Aggregates runs. Phase slacks are computed for DLM phases only.
pub fn competitive_report(runs: &[(&Instance, &RunRecord, &OptResult)]) -> Result<CompetitiveReport> {
    if runs.is_empty() {
        return Err(Error::InvalidParameter("no runs to report on".into()));
    }
    let tol = tolerance();
    let mut total_alg = 0.0;
    let mut total_opt = 0.0;
    let mut offset = 0.0;
    let mut phases = Vec::new();
    let mut warnings = Vec::new();
    for (i, &(inst, run, opt)) in runs.iter().enumerate() {
        total_alg += run.total_cost();
        total_opt += opt.cost;
        let part = phase_partition(&inst.space, run, opt)?;
        let t = run.steps();
        let phi = |k: usize| 3.0 * inst.space.bracket(run.positions[k], opt.trajectory[k]);
        offset += phi(0) - phi(run.tail_start()) + part.tail_alg;
        for l in &part.ledgers {
            if l.kind == PhaseKind::Fixed {
                continue;
            }
            let chain = verify_proof_chain(&inst.space, l)?;
            phases.push(PhaseSlack {
                run: i,
                phase_id: l.phase_id,
                kind: l.kind,
                slack: verify_dlm_phase(l),
                min_chain_slack: Some(chain.min_slack()),
            });
        }
        if part.tail_steps > 0 && t > 0 {
            warnings.push(format!("run {i}: {} trailing steps outside complete phases", part.tail_steps));
        }
    }
    let negative = phases
        .iter()
        .filter(|p| p.slack < -tol || p.min_chain_slack.is_some_and(|s| s < -tol))
        .count();
    let ratio = if total_opt > 0.0 {
        Some(total_alg / total_opt)
    } else {
        if total_alg > 0.0 {
            warnings.push("OPT cost is zero while the algorithm paid; ratio is infinite".into());
        } else {
            warnings.push("all costs are zero; ratio undefined".into());
        }
        None
    };
    Ok(CompetitiveReport { total_alg, total_opt, ratio, additive_offset: offset, phases, negative_slack_phases: negative, warnings })
}

/// `phase_id, kind, c_alg, c_opt, phi_start, phi_end, slack, min_chain_slack`.
pub fn write_ledger_csv(space: &MetricSpace, ledgers: &[PhaseLedger], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["phase_id", "kind", "c_alg", "c_opt", "phi_start", "phi_end", "slack", "min_chain_slack"])?;
    for l in ledgers {
        let chain = match l.kind {
            PhaseKind::Fixed => String::new(),
            _ => verify_proof_chain(space, l)?.min_slack().to_string(),
        };
        out.write_record([
            l.phase_id.to_string(),
            l.kind.as_str().to_string(),
            l.c_alg.to_string(),
            l.c_opt.to_string(),
            l.phi_start.to_string(),
            l.phi_end.to_string(),
            verify_dlm_phase(l).to_string(),
            chain,
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{run_online, Dlm, Mtlm};
    use crate::instance::{linear_instance_split, random_instance, RandomKind};
    use crate::opt::opt_dp;
    use proptest::prelude::*;

    fn analyze(inst: &Instance) -> (RunRecord, OptResult, Partition) {
        let run = run_online(&mut Dlm::new(inst.file_size()).unwrap(), inst).unwrap();
        let opt = opt_dp(inst);
        let part = phase_partition(&inst.space, &run, &opt).unwrap();
        (run, opt, part)
    }

    #[test]
    fn single_point_phase_is_all_zero() {
        let inst = linear_instance_split(7, 0, 4).unwrap();
        let (_, _, part) = analyze(&inst);
        assert_eq!(part.ledgers.len(), 1);
        let l = &part.ledgers[0];
        assert_eq!(l.kind, PhaseKind::Short);
        assert_eq!(verify_dlm_phase(l), 0.0);
        let chain = verify_proof_chain(&inst.space, l).unwrap();
        assert!(chain.steps.iter().all(|s| s.slack == 0.0));
    }

    #[test]
    fn short_then_long() {
        // D = 4: a short phase of 7 requests at b, then a long phase whose
        // R2 sits at the new home
        let mut reqs = vec![PointId(1); 7];
        reqs.extend([0, 0, 0, 0, 1, 1, 1, 0, 0].map(PointId));
        let space = MetricSpace::with_default_names(vec![vec![0.0, 1.0], vec![1.0, 0.0]], 4).unwrap();
        let inst = Instance::new(space, PointId(0), reqs).unwrap();
        let (run, _, part) = analyze(&inst);
        let kinds: Vec<_> = part.ledgers.iter().map(|l| l.kind).collect();
        assert_eq!(kinds, vec![PhaseKind::Short, PhaseKind::Long]);
        assert_eq!(part.tail_steps, 0);
        let sum: f64 = part.ledgers.iter().map(|l| l.c_alg).sum::<f64>() + part.tail_alg;
        assert!((sum - run.total_cost()).abs() < 1e-12);
        for l in &part.ledgers {
            assert!(verify_dlm_phase(l) >= -1e-9);
            let chain = verify_proof_chain(&inst.space, l).unwrap();
            assert!(chain.min_slack() >= -1e-9);
            assert!(chain_residual(l, &chain) < 1e-9);
        }
    }

    #[test]
    fn fixed_phases_have_no_chain() {
        let inst = random_instance(4, 4, 20, 3, RandomKind::EuclideanSample).unwrap();
        let run = run_online(&mut Mtlm::new(4), &inst).unwrap();
        let part = phase_partition(&inst.space, &run, &opt_dp(&inst)).unwrap();
        assert!(part.ledgers.iter().all(|l| l.parts.len() == 1));
        assert!(verify_proof_chain(&inst.space, &part.ledgers[0]).is_err());
    }

    #[test]
    fn mismatched_lengths() {
        let inst = random_instance(4, 4, 20, 3, RandomKind::EuclideanSample).unwrap();
        let run = run_online(&mut Dlm::new(4).unwrap(), &inst).unwrap();
        let mut opt = opt_dp(&inst);
        opt.trajectory.pop();
        assert!(phase_partition(&inst.space, &run, &opt).is_err());
    }

    #[test]
    fn bipartite_phase_is_nearly_tight() {
        // requests pile up at s_0 where OPT already sits; DLM pays 1.75 [a, s_0]
        // for serving and [a, s_0] for moving against a budget of 3 [a, s_0]
        let space = crate::instance::bipartite_space(3, 1.0, 0.324, 4).unwrap();
        let s0 = PointId(4);
        let inst = Instance::new(space, PointId(0), vec![s0; 7]).unwrap();
        let run = run_online(&mut Dlm::new(4).unwrap(), &inst).unwrap();
        let opt = OptResult { cost: 0.0, trajectory: vec![s0; 8] };
        let l = &phase_partition(&inst.space, &run, &opt).unwrap().ledgers[0];
        assert_eq!((l.kind, l.dlm_end), (PhaseKind::Short, s0));
        let a_s0 = inst.space.bracket(PointId(0), s0);
        assert!((verify_dlm_phase(l) - 0.25 * a_s0).abs() < 1e-12);
        assert!(verify_proof_chain(&inst.space, l).unwrap().min_slack() >= -1e-12);
    }

    #[test]
    fn zero_cost_report_warns() {
        let inst = linear_instance_split(7, 0, 4).unwrap();
        let (run, opt, _) = analyze(&inst);
        let rep = competitive_report(&[(&inst, &run, &opt)]).unwrap();
        assert_eq!(rep.ratio, None);
        assert_eq!(rep.additive_offset, 0.0);
        assert!(!rep.warnings.is_empty());
    }

    #[test]
    fn report_bounds_the_ratio() {
        let insts: Vec<Instance> =
            (0..20).map(|s| random_instance(5, 8, 180, s, RandomKind::EuclideanSample).unwrap()).collect();
        let data: Vec<(RunRecord, OptResult)> = insts
            .iter()
            .map(|i| (run_online(&mut Dlm::new(8).unwrap(), i).unwrap(), opt_dp(i)))
            .collect();
        let items: Vec<_> = insts.iter().zip(&data).map(|(i, (r, o))| (i, r, o)).collect();
        let rep = competitive_report(&items).unwrap();
        assert_eq!(rep.negative_slack_phases, 0);
        assert!(rep.within(4.0));
        let ratio = rep.ratio.unwrap();
        assert!(ratio <= 4.0 + rep.additive_offset / rep.total_opt + 1e-9);
    }

    #[test]
    fn ledger_csv_columns() {
        let inst = random_instance(4, 4, 40, 9, RandomKind::EuclideanSample).unwrap();
        let (_, _, part) = analyze(&inst);
        let mut buf = Vec::new();
        write_ledger_csv(&inst.space, &part.ledgers, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("phase_id,kind,c_alg,c_opt,phi_start,phi_end,slack,min_chain_slack\n"));
        assert_eq!(text.lines().count(), part.ledgers.len() + 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn every_phase_and_step_holds(seed in any::<u64>(), n in 1usize..=6, di in 0usize..3, graph in any::<bool>()) {
            let d = [4u64, 8, 12][di];
            let kind = if graph { RandomKind::RandomGraphShortestPath } else { RandomKind::EuclideanSample };
            let inst = random_instance(n, d, 5 * d as usize, seed, kind).unwrap();
            let (_, _, part) = analyze(&inst);
            prop_assert!(part.ledgers.len() >= 2);
            for l in &part.ledgers {
                prop_assert!(verify_dlm_phase(l) >= -1e-9);
                let chain = verify_proof_chain(&inst.space, l).unwrap();
                for s in &chain.steps {
                    prop_assert!(s.slack >= -1e-9, "{}: {}", s.name, s.slack);
                }
                prop_assert!(chain_residual(l, &chain) <= 1e-9 * (1.0 + l.c_alg));
            }
        }
    }
}
