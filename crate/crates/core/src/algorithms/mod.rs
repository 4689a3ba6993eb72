//! Online policies and the serve-then-move simulation loop.
//!
//! In step `t` a policy sitting at `pos_{t-1}` pays `d(pos_{t-1}, r_t)` to
//! serve the request, then picks `pos_t` and pays `D * d(pos_{t-1}, pos_t)`.

mod constants;
mod dlm;
mod policies;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::instance::Instance;
use crate::metric::{tolerance, MetricSpace, PointId};

pub use constants::{c0_poly, paper_constants, r0_poly, PaperConstants};
pub use dlm::{dlm_g, dlm_h, dlm_long_target, dlm_phase, dlm_short_test, Dlm, DlmPhase, DlmPhaseOutcome, ShortTest};
pub use policies::{
    mtlm_move, mtlm_phase_len, mtm_move, FixedPhase, Mtlm, MtlmRule, Mtm, MtmRule, PhaseRule, Stay, StayRule,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    Short,
    Long,
    Fixed,
}

impl PhaseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseKind::Short => "short",
            PhaseKind::Long => "long",
            PhaseKind::Fixed => "fixed",
        }
    }
}

/// A complete phase covering steps `start + 1 ..= end`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseMark {
    pub start: usize,
    pub end: usize,
    pub kind: PhaseKind,
}

impl PhaseMark {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// What a policy does after serving a request.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepOutcome {
    pub target: PointId,
    /// Set when this step closes a phase.
    pub phase_end: Option<PhaseKind>,
}

impl StepOutcome {
    pub fn stay(pos: PointId) -> Self {
        StepOutcome { target: pos, phase_end: None }
    }
}

pub trait OnlinePolicy {
    fn name(&self) -> String;

    fn reset(&mut self, start: PointId);

    /// Called once per step after `request` was served from `pos`.
    fn step(&mut self, pos: PointId, request: PointId, space: &MetricSpace) -> StepOutcome;
}

impl<P: OnlinePolicy + ?Sized> OnlinePolicy for Box<P> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn reset(&mut self, start: PointId) {
        (**self).reset(start)
    }

    fn step(&mut self, pos: PointId, request: PointId, space: &MetricSpace) -> StepOutcome {
        (**self).step(pos, request, space)
    }
}

/// Trajectory and per-step costs of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub policy: String,
    pub file_size: u64,
    pub requests: Vec<PointId>,
    /// `positions[0]` is the start, `positions[t]` the position after step `t`.
    pub positions: Vec<PointId>,
    pub serve_costs: Vec<f64>,
    pub move_costs: Vec<f64>,
    pub phases: Vec<PhaseMark>,
    /// Steps after the last complete phase (served without migrating).
    pub trailing_partial: usize,
}

impl RunRecord {
    pub fn steps(&self) -> usize {
        self.requests.len()
    }

    pub fn total_serve(&self) -> f64 {
        self.serve_costs.iter().sum()
    }

    pub fn total_move(&self) -> f64 {
        self.move_costs.iter().sum()
    }

    pub fn total_cost(&self) -> f64 {
        self.total_serve() + self.total_move()
    }

    /// Cost of steps `from + 1 ..= to`.
    pub fn cost_between(&self, from: usize, to: usize) -> f64 {
        (from..to).map(|i| self.serve_costs[i] + self.move_costs[i]).sum()
    }

    /// Step index where the trailing partial phase starts.
    pub fn tail_start(&self) -> usize {
        self.steps() - self.trailing_partial
    }

    pub fn write_json(&self, w: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    /// One row per step: `step, request, pos_before, pos_after, serve_cost,
    /// move_cost, phase_id, phase_kind`. Trailing steps get phase kind `tail`.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "step", "request", "pos_before", "pos_after", "serve_cost", "move_cost", "phase_id", "phase_kind",
        ])?;
        let mut phase = 0usize;
        for t in 0..self.steps() {
            while phase < self.phases.len() && self.phases[phase].end <= t {
                phase += 1;
            }
            let kind = self.phases.get(phase).map(|p| p.kind.as_str()).unwrap_or("tail");
            out.write_record([
                (t + 1).to_string(),
                self.requests[t].to_string(),
                self.positions[t].to_string(),
                self.positions[t + 1].to_string(),
                self.serve_costs[t].to_string(),
                self.move_costs[t].to_string(),
                phase.to_string(),
                kind.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Serve and move costs of a trajectory, recomputed from positions alone.
/// `positions` has one more entry than `requests`.
pub fn account(space: &MetricSpace, requests: &[PointId], positions: &[PointId]) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(positions.len(), requests.len() + 1);
    let serve = requests.iter().zip(positions).map(|(&r, &p)| space.d(p, r)).collect();
    let moves = positions.windows(2).map(|w| space.bracket(w[0], w[1])).collect();
    (serve, moves)
}

/// Total cost of a trajectory.
pub fn trajectory_cost(space: &MetricSpace, requests: &[PointId], positions: &[PointId]) -> f64 {
    let (s, m) = account(space, requests, positions);
    s.iter().sum::<f64>() + m.iter().sum::<f64>()
}

/// Runs `policy` over the instance.
pub fn run_online<P: OnlinePolicy + ?Sized>(policy: &mut P, instance: &Instance) -> Result<RunRecord> {
    let space = &instance.space;
    let t_max = instance.requests.len();
    let mut positions = Vec::with_capacity(t_max + 1);
    let mut serve_costs = Vec::with_capacity(t_max);
    let mut move_costs = Vec::with_capacity(t_max);
    let mut phases = Vec::new();
    let mut phase_start = 0;
    let mut pos = instance.start;
    positions.push(pos);
    policy.reset(pos);
    for (t, &r) in instance.requests.iter().enumerate() {
        serve_costs.push(space.d(pos, r));
        let out = policy.step(pos, r, space);
        space.point(out.target.0)?;
        move_costs.push(space.bracket(pos, out.target));
        pos = out.target;
        positions.push(pos);
        if let Some(kind) = out.phase_end {
            phases.push(PhaseMark { start: phase_start, end: t + 1, kind });
            phase_start = t + 1;
        }
    }
    Ok(RunRecord {
        policy: policy.name(),
        file_size: space.file_size(),
        requests: instance.requests.clone(),
        positions,
        serve_costs,
        move_costs,
        phases,
        trailing_partial: t_max - phase_start,
    })
}

/// Global minimizer of `f` over all points. Ties within tolerance go to
/// `current`, then to the lowest index.
pub fn argmin_point(space: &MetricSpace, current: PointId, f: impl Fn(PointId) -> f64) -> (PointId, f64) {
    let values: Vec<f64> = space.points().map(&f).collect();
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = tolerance();
    if values[current.0] <= best + tol {
        return (current, values[current.0]);
    }
    let i = values.iter().position(|&v| v <= best + tol).expect("nonempty space");
    (PointId(i), values[i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{linear_instance_split, random_instance, RandomKind};

    #[test]
    fn stay_pays_distance_per_request() {
        let inst = linear_instance_split(0, 7, 4).unwrap();
        let run = run_online(&mut Stay, &inst).unwrap();
        assert_eq!(run.total_cost(), 7.0);
        assert_eq!(run.total_move(), 0.0);
    }

    #[test]
    fn everything_at_start_costs_nothing() {
        let inst = linear_instance_split(40, 0, 8).unwrap();
        let mut policies: Vec<Box<dyn OnlinePolicy>> = vec![
            Box::new(Stay),
            Box::new(Mtm::new(8)),
            Box::new(Mtlm::new(8)),
            Box::new(Dlm::new(8).unwrap()),
        ];
        for p in policies.iter_mut() {
            let run = run_online(p, &inst).unwrap();
            assert_eq!(run.total_cost(), 0.0, "{}", p.name());
            assert!(run.positions.iter().all(|&x| x == inst.start));
        }
    }

    #[test]
    fn costs_reaccount_from_positions() {
        for seed in 0..20 {
            let inst = random_instance(5, 8, 60, seed, RandomKind::EuclideanSample).unwrap();
            let mut policies: Vec<Box<dyn OnlinePolicy>> =
                vec![Box::new(Mtm::new(8)), Box::new(Mtlm::new(8)), Box::new(Dlm::new(8).unwrap())];
            for p in policies.iter_mut() {
                let run = run_online(p, &inst).unwrap();
                let (s, m) = account(&inst.space, &inst.requests, &run.positions);
                let re: f64 = s.iter().sum::<f64>() + m.iter().sum::<f64>();
                assert!((re - run.total_cost()).abs() < 1e-9);
                let path: f64 = run.positions.windows(2).map(|w| inst.space.d(w[0], w[1])).sum();
                assert!((run.total_move() - inst.space.big_d() * path).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn csv_has_one_row_per_step() {
        let inst = random_instance(4, 4, 10, 1, RandomKind::EuclideanSample).unwrap();
        let run = run_online(&mut Dlm::new(4).unwrap(), &inst).unwrap();
        let mut buf = Vec::new();
        run.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 11);
        assert!(text.starts_with("step,request,pos_before,pos_after,serve_cost,move_cost,phase_id,phase_kind"));
        assert!(text.lines().last().unwrap().ends_with("tail"));
    }

    #[test]
    fn argmin_tie_break() {
        let inst = linear_instance_split(1, 1, 2).unwrap();
        let s = &inst.space;
        // constant function: current position wins
        assert_eq!(argmin_point(s, PointId(1), |_| 1.0).0, PointId(1));
        // strict minimum elsewhere
        assert_eq!(argmin_point(s, PointId(1), |p| p.0 as f64).0, PointId(0));
    }
}
