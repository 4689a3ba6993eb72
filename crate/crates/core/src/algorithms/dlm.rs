use serde::Serialize;

use super::{argmin_point, OnlinePolicy, PhaseKind, StepOutcome};
use crate::error::{Error, Result};
use crate::metric::{tolerance, MetricSpace, PointId, RequestMultiset};

/// `g(v) = [pos, v] + 2 [v, R1] + [v, R2]`.
pub fn dlm_g(space: &MetricSpace, pos: PointId, v: PointId, r1: &RequestMultiset, r2: &RequestMultiset) -> f64 {
    space.bracket(pos, v) + 2.0 * space.bracket_multiset(v, r1) + space.bracket_multiset(v, r2)
}

/// `h(v) = [pos, v] + [v, R1] + 1.25 [v, R2] + 0.75 [v, R3]`.
pub fn dlm_h(
    space: &MetricSpace,
    pos: PointId,
    v: PointId,
    r1: &RequestMultiset,
    r2: &RequestMultiset,
    r3: &RequestMultiset,
) -> f64 {
    space.bracket(pos, v)
        + space.bracket_multiset(v, r1)
        + 1.25 * space.bracket_multiset(v, r2)
        + 0.75 * space.bracket_multiset(v, r3)
}

/// Outcome of the short-phase test after `1.75 D` requests.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShortTest {
    pub v_g: PointId,
    pub g_value: f64,
    /// `1.5 [pos, R2]`.
    pub threshold: f64,
    pub short: bool,
}

pub fn dlm_short_test(space: &MetricSpace, pos: PointId, r1: &RequestMultiset, r2: &RequestMultiset) -> ShortTest {
    let (v_g, g_value) = argmin_point(space, pos, |v| dlm_g(space, pos, v, r1, r2));
    let threshold = 1.5 * space.bracket_multiset(pos, r2);
    ShortTest { v_g, g_value, threshold, short: g_value <= threshold + tolerance() }
}

/// Long-phase target `v_h` and `h(v_h)`.
pub fn dlm_long_target(
    space: &MetricSpace,
    pos: PointId,
    r1: &RequestMultiset,
    r2: &RequestMultiset,
    r3: &RequestMultiset,
) -> (PointId, f64) {
    argmin_point(space, pos, |v| dlm_h(space, pos, v, r1, r2, r3))
}

/// One complete DLM phase.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DlmPhase {
    pub kind: PhaseKind,
    pub target: PointId,
    pub len: usize,
    pub r1: RequestMultiset,
    pub r2: RequestMultiset,
    pub r3: Option<RequestMultiset>,
    pub test: ShortTest,
    pub h_value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum DlmPhaseOutcome {
    Complete(DlmPhase),
    /// The stream ended after `consumed` requests, before the phase closed.
    Partial { consumed: usize },
}

pub(crate) fn check_quarter(file_size: u64) -> Result<usize> {
    if file_size == 0 || !file_size.is_multiple_of(4) {
        return Err(Error::InvalidParameter(format!("DLM needs D divisible by 4, got {file_size}")));
    }
    Ok(file_size as usize / 4)
}

/// Evaluates the DLM phase that starts at `pos` on the head of `stream`.
pub fn dlm_phase(pos: PointId, stream: &[PointId], space: &MetricSpace) -> Result<DlmPhaseOutcome> {
    let q = check_quarter(space.file_size())?;
    let (n1, n2, n3) = (4 * q, 7 * q, 9 * q);
    if stream.len() < n2 {
        return Ok(DlmPhaseOutcome::Partial { consumed: stream.len() });
    }
    let r1 = RequestMultiset::from_requests(&stream[..n1])?;
    let r2 = RequestMultiset::from_requests(&stream[n1..n2])?;
    let test = dlm_short_test(space, pos, &r1, &r2);
    if test.short {
        return Ok(DlmPhaseOutcome::Complete(DlmPhase {
            kind: PhaseKind::Short,
            target: test.v_g,
            len: n2,
            r1,
            r2,
            r3: None,
            test,
            h_value: None,
        }));
    }
    if stream.len() < n3 {
        return Ok(DlmPhaseOutcome::Partial { consumed: stream.len() });
    }
    let r3 = RequestMultiset::from_requests(&stream[n2..n3])?;
    let (v_h, h) = dlm_long_target(space, pos, &r1, &r2, &r3);
    Ok(DlmPhaseOutcome::Complete(DlmPhase {
        kind: PhaseKind::Long,
        target: v_h,
        len: n3,
        r1,
        r2,
        r3: Some(r3),
        test,
        h_value: Some(h),
    }))
}

/// Dynamic-Local-Min.
#[derive(Clone, Debug)]
pub struct Dlm {
    quarter: usize,
    buf: Vec<PointId>,
    long: bool,
}

impl Dlm {
    pub fn new(file_size: u64) -> Result<Self> {
        Ok(Dlm { quarter: check_quarter(file_size)?, buf: Vec::new(), long: false })
    }
}

impl OnlinePolicy for Dlm {
    fn name(&self) -> String {
        "dlm".into()
    }

    fn reset(&mut self, _: PointId) {
        self.buf.clear();
        self.long = false;
    }

    fn step(&mut self, pos: PointId, request: PointId, space: &MetricSpace) -> StepOutcome {
        self.buf.push(request);
        let q = self.quarter;
        let n = self.buf.len();
        let r = |a: usize, b: usize| RequestMultiset::from_requests(&self.buf[a..b]).expect("nonempty part");
        let done = if n == 7 * q && !self.long {
            let test = dlm_short_test(space, pos, &r(0, 4 * q), &r(4 * q, 7 * q));
            if test.short {
                Some((test.v_g, PhaseKind::Short))
            } else {
                self.long = true;
                None
            }
        } else if n == 9 * q {
            let (v_h, _) = dlm_long_target(space, pos, &r(0, 4 * q), &r(4 * q, 7 * q), &r(7 * q, 9 * q));
            Some((v_h, PhaseKind::Long))
        } else {
            None
        };
        match done {
            Some((target, kind)) => {
                self.buf.clear();
                self.long = false;
                StepOutcome { target, phase_end: Some(kind) }
            }
            None => StepOutcome::stay(pos),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::run_online;
    use crate::instance::{bipartite_instance, linear_instance_split, random_instance, Instance, RandomKind};
    use crate::metric::MetricSpace;

    fn complete(o: DlmPhaseOutcome) -> DlmPhase {
        match o {
            DlmPhaseOutcome::Complete(p) => p,
            DlmPhaseOutcome::Partial { .. } => panic!("partial phase"),
        }
    }

    #[test]
    fn rejects_d_not_divisible_by_four() {
        assert!(Dlm::new(6).is_err());
        let inst = linear_instance_split(10, 0, 6).unwrap();
        assert!(dlm_phase(PointId(0), &inst.requests, &inst.space).is_err());
    }

    #[test]
    fn all_home_is_short_and_stays() {
        let inst = linear_instance_split(7, 0, 4).unwrap();
        let p = complete(dlm_phase(PointId(0), &inst.requests, &inst.space).unwrap());
        assert_eq!(p.kind, PhaseKind::Short);
        assert_eq!(p.target, PointId(0));
        assert_eq!(p.test.g_value, 0.0);
        assert_eq!(p.test.threshold, 0.0);
    }

    #[test]
    fn all_far_is_short_and_moves() {
        let inst = linear_instance_split(0, 7, 4).unwrap();
        let p = complete(dlm_phase(PointId(0), &inst.requests, &inst.space).unwrap());
        assert_eq!(p.kind, PhaseKind::Short);
        assert_eq!(p.target, PointId(1));
        assert_eq!(p.test.g_value, 4.0);
        assert_eq!(p.test.threshold, 6.0);
    }

    #[test]
    fn long_phase_when_r2_is_home() {
        // R1 far, R2 at home: threshold 0 but g > 0 everywhere
        let s = MetricSpace::with_default_names(vec![vec![0.0, 1.0], vec![1.0, 0.0]], 4).unwrap();
        let reqs: Vec<PointId> = [1, 1, 1, 1, 0, 0, 0, 1, 1].iter().map(|&i| PointId(i)).collect();
        let p = complete(dlm_phase(PointId(0), &reqs, &s).unwrap());
        assert_eq!(p.kind, PhaseKind::Long);
        assert_eq!(p.len, 9);
        assert!(dlm_phase(PointId(0), &reqs[..8], &s).unwrap() == DlmPhaseOutcome::Partial { consumed: 8 });
    }

    fn brute(space: &MetricSpace, pos: PointId, reqs: &[PointId]) -> (PhaseKind, PointId) {
        let q = space.file_size() as usize / 4;
        let avg = |v: PointId, part: &[PointId]| {
            space.big_d() * part.iter().map(|&r| space.d(v, r)).sum::<f64>() / part.len() as f64
        };
        let (r1, r2, r3) = (&reqs[..4 * q], &reqs[4 * q..7 * q], &reqs[7 * q..9 * q]);
        let g = |v: PointId| space.bracket(pos, v) + 2.0 * avg(v, r1) + avg(v, r2);
        let h = |v: PointId| space.bracket(pos, v) + avg(v, r1) + 1.25 * avg(v, r2) + 0.75 * avg(v, r3);
        let pick = |f: &dyn Fn(PointId) -> f64| {
            let best = space.points().map(f).fold(f64::INFINITY, f64::min);
            if f(pos) <= best + 1e-9 {
                pos
            } else {
                space.points().find(|&v| f(v) <= best + 1e-9).unwrap()
            }
        };
        let vg = pick(&g);
        if g(vg) <= 1.5 * avg(pos, r2) + 1e-9 {
            (PhaseKind::Short, vg)
        } else {
            (PhaseKind::Long, pick(&h))
        }
    }

    #[test]
    fn bipartite_matches_exhaustive_scan() {
        for (c, d) in [(1.75, 8u64), (2.25, 8), (2.25, 12), (2.5, 16)] {
            let inst = bipartite_instance(3, 1.0, 0.324, c, d).unwrap();
            assert_eq!(inst.space.len(), 7);
            let mut reqs = inst.requests.clone();
            reqs.resize(9 * d as usize / 4, PointId(4));
            for pos in inst.space.points() {
                let p = complete(dlm_phase(pos, &reqs, &inst.space).unwrap());
                assert_eq!((p.kind, p.target), brute(&inst.space, pos, &reqs));
            }
        }
    }

    #[test]
    fn argmin_property_on_random_phases() {
        for seed in 0..40 {
            let inst = random_instance(6, 8, 18, seed, RandomKind::RandomGraphShortestPath).unwrap();
            let s = &inst.space;
            let pos = PointId(seed as usize % 6);
            let p = complete(dlm_phase(pos, &inst.requests, s).unwrap());
            assert!(s.points().all(|v| p.test.g_value <= dlm_g(s, pos, v, &p.r1, &p.r2) + 1e-9));
            assert_eq!((p.kind, p.target), brute(s, pos, &inst.requests));
            if let (Some(r3), Some(hv)) = (&p.r3, p.h_value) {
                assert!(s.points().all(|v| hv <= dlm_h(s, pos, v, &p.r1, &p.r2, r3) + 1e-9));
            }
        }
    }

    #[test]
    fn policy_matches_phase_function() {
        for seed in 0..30 {
            let inst = random_instance(5, 8, 100, seed, RandomKind::EuclideanSample).unwrap();
            let run = run_online(&mut Dlm::new(8).unwrap(), &inst).unwrap();
            let mut t = 0;
            let mut pos = inst.start;
            let mut marks = Vec::new();
            while let DlmPhaseOutcome::Complete(p) = dlm_phase(pos, &inst.requests[t..], &inst.space).unwrap() {
                marks.push((t, t + p.len, p.kind));
                t += p.len;
                pos = p.target;
                assert_eq!(run.positions[t], pos);
            }
            let got: Vec<_> = run.phases.iter().map(|m| (m.start, m.end, m.kind)).collect();
            assert_eq!(got, marks);
            assert_eq!(run.trailing_partial, 100 - t);
            for m in &run.phases {
                assert_eq!(m.len(), if m.kind == PhaseKind::Short { 14 } else { 18 });
                let p0 = run.positions[m.start];
                assert!(run.positions[m.start..m.end].iter().all(|&x| x == p0));
            }
            assert!(run.positions[t..].iter().all(|&x| x == pos));
        }
    }

    #[test]
    fn trailing_partial_stays_put() {
        let inst = Instance::new(
            MetricSpace::with_default_names(vec![vec![0.0, 1.0], vec![1.0, 0.0]], 4).unwrap(),
            PointId(0),
            vec![PointId(1); 6],
        )
        .unwrap();
        let run = run_online(&mut Dlm::new(4).unwrap(), &inst).unwrap();
        assert!(run.phases.is_empty());
        assert_eq!(run.trailing_partial, 6);
        assert_eq!(run.total_move(), 0.0);
    }
}
