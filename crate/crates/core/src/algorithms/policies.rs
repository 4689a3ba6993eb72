use super::{argmin_point, paper_constants, OnlinePolicy, PhaseKind, StepOutcome};
use crate::instance::round_half_up;
use crate::metric::{MetricSpace, PointId};

/// A migration decision taken at the end of a fixed-length phase from the
/// current position and that phase's requests only.
pub trait PhaseRule {
    fn name(&self) -> String;

    fn decide(&mut self, pos: PointId, requests: &[PointId], space: &MetricSpace) -> PointId;
}

impl<R: PhaseRule + ?Sized> PhaseRule for Box<R> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn decide(&mut self, pos: PointId, requests: &[PointId], space: &MetricSpace) -> PointId {
        (**self).decide(pos, requests, space)
    }
}

fn sum_dist(space: &MetricSpace, x: PointId, requests: &[PointId]) -> f64 {
    requests.iter().map(|&r| space.d(x, r)).sum()
}

/// MTM target: minimizer of `sum_i d(x, r_i)`.
pub fn mtm_move(pos: PointId, requests: &[PointId], space: &MetricSpace) -> PointId {
    argmin_point(space, pos, |x| sum_dist(space, x, requests)).0
}

/// MTLM target: minimizer of `D d(pos, x) + ((c + 1)/c) sum_i d(x, r_i)`.
pub fn mtlm_move(pos: PointId, requests: &[PointId], space: &MetricSpace, c: f64) -> PointId {
    let w = (c + 1.0) / c;
    argmin_point(space, pos, |x| space.bracket(pos, x) + w * sum_dist(space, x, requests)).0
}

/// `round(c0 D)`, ties up.
pub fn mtlm_phase_len(file_size: u64) -> usize {
    round_half_up(paper_constants().c0 * file_size as f64).max(1) as usize
}

#[derive(Clone, Copy, Debug, Default)]
pub struct StayRule;

impl PhaseRule for StayRule {
    fn name(&self) -> String {
        "stay".into()
    }

    fn decide(&mut self, pos: PointId, _: &[PointId], _: &MetricSpace) -> PointId {
        pos
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct MtmRule;

impl PhaseRule for MtmRule {
    fn name(&self) -> String {
        "mtm".into()
    }

    fn decide(&mut self, pos: PointId, requests: &[PointId], space: &MetricSpace) -> PointId {
        mtm_move(pos, requests, space)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct MtlmRule {
    pub c: f64,
}

impl Default for MtlmRule {
    fn default() -> Self {
        MtlmRule { c: paper_constants().c0 }
    }
}

impl PhaseRule for MtlmRule {
    fn name(&self) -> String {
        "mtlm".into()
    }

    fn decide(&mut self, pos: PointId, requests: &[PointId], space: &MetricSpace) -> PointId {
        mtlm_move(pos, requests, space, self.c)
    }
}

/// Wraps a [`PhaseRule`] into an online policy with phases of `len`
/// requests. The rule sees nothing but the current phase.
#[derive(Clone, Debug)]
pub struct FixedPhase<R> {
    rule: R,
    len: usize,
    buf: Vec<PointId>,
}

impl<R: PhaseRule> FixedPhase<R> {
    pub fn new(rule: R, len: usize) -> Self {
        assert!(len >= 1, "phase length must be positive");
        FixedPhase { rule, len, buf: Vec::with_capacity(len) }
    }

    /// Phase of `round(c D)` requests.
    pub fn with_factor(rule: R, c: f64, file_size: u64) -> Self {
        Self::new(rule, round_half_up(c * file_size as f64).max(1) as usize)
    }

    pub fn phase_len(&self) -> usize {
        self.len
    }

    pub fn rule_mut(&mut self) -> &mut R {
        &mut self.rule
    }
}

impl<R: PhaseRule> OnlinePolicy for FixedPhase<R> {
    fn name(&self) -> String {
        format!("fixed({},{})", self.rule.name(), self.len)
    }

    fn reset(&mut self, _start: PointId) {
        self.buf.clear();
    }

    fn step(&mut self, pos: PointId, request: PointId, space: &MetricSpace) -> StepOutcome {
        self.buf.push(request);
        if self.buf.len() < self.len {
            return StepOutcome::stay(pos);
        }
        let target = self.rule.decide(pos, &self.buf, space);
        self.buf.clear();
        StepOutcome { target, phase_end: Some(PhaseKind::Fixed) }
    }
}

/// Never moves.
#[derive(Clone, Copy, Debug, Default)]
pub struct Stay;

impl OnlinePolicy for Stay {
    fn name(&self) -> String {
        "stay".into()
    }

    fn reset(&mut self, _: PointId) {}

    fn step(&mut self, pos: PointId, _: PointId, _: &MetricSpace) -> StepOutcome {
        StepOutcome::stay(pos)
    }
}

/// Move-To-Min: phases of `D` requests, then move to the point minimizing
/// the sum of distances to the phase's requests.
#[derive(Clone, Debug)]
pub struct Mtm {
    len: usize,
    buf: Vec<PointId>,
}

impl Mtm {
    pub fn new(file_size: u64) -> Self {
        Mtm { len: file_size as usize, buf: Vec::new() }
    }
}

impl OnlinePolicy for Mtm {
    fn name(&self) -> String {
        "mtm".into()
    }

    fn reset(&mut self, _: PointId) {
        self.buf.clear();
    }

    fn step(&mut self, pos: PointId, request: PointId, space: &MetricSpace) -> StepOutcome {
        self.buf.push(request);
        if self.buf.len() < self.len {
            return StepOutcome::stay(pos);
        }
        let target = mtm_move(pos, &self.buf, space);
        self.buf.clear();
        StepOutcome { target, phase_end: Some(PhaseKind::Fixed) }
    }
}

/// Move-To-Local-Min: phases of `round(c0 D)` requests, then move to the
/// minimizer of `D d(pos, x) + ((c0 + 1)/c0) sum_i d(x, r_i)`.
#[derive(Clone, Debug)]
pub struct Mtlm {
    c: f64,
    len: usize,
    buf: Vec<PointId>,
}

impl Mtlm {
    pub fn new(file_size: u64) -> Self {
        Mtlm { c: paper_constants().c0, len: mtlm_phase_len(file_size), buf: Vec::new() }
    }

    pub fn phase_len(&self) -> usize {
        self.len
    }
}

impl OnlinePolicy for Mtlm {
    fn name(&self) -> String {
        "mtlm".into()
    }

    fn reset(&mut self, _: PointId) {
        self.buf.clear();
    }

    fn step(&mut self, pos: PointId, request: PointId, space: &MetricSpace) -> StepOutcome {
        self.buf.push(request);
        if self.buf.len() < self.len {
            return StepOutcome::stay(pos);
        }
        let w = (self.c + 1.0) / self.c;
        let buf = &self.buf;
        let target = argmin_point(space, pos, |x| {
            space.bracket(pos, x) + w * buf.iter().map(|&r| space.d(x, r)).sum::<f64>()
        })
        .0;
        self.buf.clear();
        StepOutcome { target, phase_end: Some(PhaseKind::Fixed) }
    }
}
