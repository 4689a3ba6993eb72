//! Exact offline optimum and the per-segment lower bound on OPT's cost.

use serde::{Deserialize, Serialize};

use crate::algorithms::trajectory_cost;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::metric::{tolerance, MetricSpace, PointId, RequestMultiset};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub cost: f64,
    /// `op_0 ... op_T`.
    pub trajectory: Vec<PointId>,
}

/// Optimal trajectory starting at the instance's start point.
pub fn opt_dp(instance: &Instance) -> OptResult {
    opt_dp_from(&instance.space, Some(instance.start), &instance.requests)
}

/// Optimal trajectory when OPT may choose its initial position freely.
pub fn opt_dp_free_start(instance: &Instance) -> OptResult {
    opt_dp_from(&instance.space, None, &instance.requests)
}

/// `C_t(v) = min_u C_{t-1}(u) + d(u, r_t) + D d(u, v)`. Ties in the
/// reconstruction keep the previous position, then take the lowest index.
pub fn opt_dp_from(space: &MetricSpace, start: Option<PointId>, requests: &[PointId]) -> OptResult {
    let n = space.len();
    let tol = tolerance();
    let mut cost: Vec<f64> = match start {
        Some(s) => (0..n).map(|v| if v == s.0 { 0.0 } else { f64::INFINITY }).collect(),
        None => vec![0.0; n],
    };
    let mut parent = vec![vec![0usize; n]; requests.len()];
    let mut next = vec![0.0; n];
    for (t, &r) in requests.iter().enumerate() {
        let served: Vec<f64> = (0..n).map(|u| cost[u] + space.d(PointId(u), r)).collect();
        for v in 0..n {
            let pv = PointId(v);
            let via = |u: usize| served[u] + space.bracket(PointId(u), pv);
            let best = (0..n).map(via).fold(f64::INFINITY, f64::min);
            let u = if via(v) <= best + tol { v } else { (0..n).find(|&u| via(u) <= best + tol).unwrap() };
            parent[t][v] = u;
            next[v] = best;
        }
        std::mem::swap(&mut cost, &mut next);
    }
    let best = cost.iter().copied().fold(f64::INFINITY, f64::min);
    let tied = |v: usize| cost[v] <= best + tol;
    let last = match requests.len() {
        0 => start.map(|s| s.0).unwrap_or(0),
        t => (0..n).find(|&v| tied(v) && parent[t - 1][v] == v).or_else(|| (0..n).find(|&v| tied(v))).unwrap(),
    };
    let mut traj = vec![PointId(last); requests.len() + 1];
    let mut v = last;
    for t in (0..requests.len()).rev() {
        v = parent[t][v];
        traj[t] = PointId(v);
    }
    let cost = trajectory_cost(space, requests, &traj);
    OptResult { cost, trajectory: traj }
}

/// Exhaustive minimum over all `n^T` trajectories from `start`.
pub fn opt_bruteforce(space: &MetricSpace, start: PointId, requests: &[PointId]) -> f64 {
    fn go(space: &MetricSpace, pos: PointId, rest: &[PointId], acc: f64, best: &mut f64) {
        let Some((&r, tail)) = rest.split_first() else {
            *best = best.min(acc);
            return;
        };
        let served = acc + space.d(pos, r);
        for v in space.points() {
            go(space, v, tail, served + space.bracket(pos, v), best);
        }
    }
    let mut best = f64::INFINITY;
    go(space, start, requests, 0.0, &mut best);
    best
}

/// Segment-bound slack `4 C_OPT(R) - (2|R|/D)([op_t, R] + [R, op_end]) -
/// (4 - 2|R|/D)[op_t, op_end]` for a segment of at most `2D` requests,
/// where `C_OPT(R)` is the segment's own serve and move cost.
pub fn check_opt_lower_bound(segment: &[PointId], requests: &[PointId], space: &MetricSpace) -> Result<f64> {
    let d = space.file_size() as usize;
    if requests.len() > 2 * d {
        return Err(Error::SegmentTooLong { len: requests.len(), limit: 2 * d });
    }
    if segment.len() != requests.len() + 1 {
        return Err(Error::LengthMismatch(format!(
            "segment has {} positions for {} requests",
            segment.len(),
            requests.len()
        )));
    }
    for &p in segment.iter().chain(requests) {
        space.point(p.0)?;
    }
    let r = RequestMultiset::from_requests(requests)?;
    let c_opt = trajectory_cost(space, requests, segment);
    let (op0, op1) = (segment[0], *segment.last().unwrap());
    let w = 2.0 * requests.len() as f64 / d as f64;
    let rhs = w * (space.bracket_multiset(op0, &r) + space.bracket_multiset(op1, &r)) + (4.0 - w) * space.bracket(op0, op1);
    Ok(4.0 * c_opt - rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{run_online, Dlm, Mtlm, Mtm, Stay};
    use crate::instance::{linear_instance_split, random_instance, RandomKind};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn all_at_start_is_free() {
        let inst = linear_instance_split(9, 0, 4).unwrap();
        let o = opt_dp(&inst);
        assert_eq!(o.cost, 0.0);
        assert!(o.trajectory.iter().all(|&p| p == inst.start));
    }

    #[test]
    fn serve_one_then_migrate() {
        let inst = linear_instance_split(0, 8, 4).unwrap();
        let o = opt_dp(&inst);
        assert_eq!(o.cost, 5.0);
        assert_eq!(opt_bruteforce(&inst.space, inst.start, &inst.requests), 5.0);
        assert_eq!(o.trajectory[0], PointId(0));
        assert!(o.trajectory[1..].iter().all(|&p| p == PointId(1)));
    }

    #[test]
    fn empty_requests() {
        let inst = linear_instance_split(1, 0, 4).unwrap();
        let o = opt_dp_from(&inst.space, Some(PointId(1)), &[]);
        assert_eq!(o.cost, 0.0);
        assert_eq!(o.trajectory, vec![PointId(1)]);
    }

    #[test]
    fn matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(1..=4);
            let t = rng.gen_range(0..=6);
            let d = rng.gen_range(1..=5);
            let kind = if rng.gen_bool(0.5) { RandomKind::EuclideanSample } else { RandomKind::RandomGraphShortestPath };
            let inst = random_instance(n, d, t.max(1), rng.gen(), kind).unwrap();
            let reqs = &inst.requests[..t];
            let o = opt_dp_from(&inst.space, Some(inst.start), reqs);
            let b = opt_bruteforce(&inst.space, inst.start, reqs);
            assert!((o.cost - b).abs() <= 1e-9, "{} vs {}", o.cost, b);
            assert_eq!(o.trajectory[0], inst.start);
        }
    }

    #[test]
    fn free_start_is_no_worse() {
        for seed in 0..30 {
            let inst = random_instance(5, 4, 20, seed, RandomKind::EuclideanSample).unwrap();
            let fixed = opt_dp(&inst);
            let free = opt_dp_free_start(&inst);
            assert!(free.cost <= fixed.cost + 1e-9);
            let best = inst.space.points().map(|s| opt_dp_from(&inst.space, Some(s), &inst.requests).cost);
            assert!((best.fold(f64::INFINITY, f64::min) - free.cost).abs() < 1e-9);
        }
    }

    #[test]
    fn dominates_online_policies() {
        for seed in 0..30 {
            let inst = random_instance(6, 4, 60, seed, RandomKind::RandomGraphShortestPath).unwrap();
            let o = opt_dp(&inst);
            for cost in [
                run_online(&mut Stay, &inst).unwrap().total_cost(),
                run_online(&mut Mtm::new(4), &inst).unwrap().total_cost(),
                run_online(&mut Mtlm::new(4), &inst).unwrap().total_cost(),
                run_online(&mut Dlm::new(4).unwrap(), &inst).unwrap().total_cost(),
            ] {
                assert!(o.cost <= cost + 1e-9);
            }
        }
    }

    #[test]
    fn segment_bound_stationary_cases_are_tight() {
        let inst = linear_instance_split(0, 6, 4).unwrap();
        let seg = vec![PointId(0); 7];
        assert!(check_opt_lower_bound(&seg, &inst.requests, &inst.space).unwrap().abs() < 1e-12);
        let home = vec![PointId(0); 4];
        let seg = vec![PointId(0); 5];
        assert_eq!(check_opt_lower_bound(&seg, &home, &inst.space).unwrap(), 0.0);
    }

    #[test]
    fn segment_bound_rejects_long_segments() {
        let inst = linear_instance_split(0, 9, 4).unwrap();
        let seg = vec![PointId(0); 10];
        assert!(matches!(
            check_opt_lower_bound(&seg, &inst.requests, &inst.space),
            Err(Error::SegmentTooLong { len: 9, limit: 8 })
        ));
    }

    proptest! {
        #[test]
        fn segment_bound_holds_for_arbitrary_segments(seed in any::<u64>(), n in 1usize..6, d in 1u64..7, frac in 0.0f64..1.0) {
            let len = 1 + ((2 * d as usize - 1) as f64 * frac) as usize;
            let inst = random_instance(n, d, len, seed, RandomKind::RandomGraphShortestPath).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let seg: Vec<PointId> = (0..=len).map(|_| PointId(rng.gen_range(0..n))).collect();
            prop_assert!(check_opt_lower_bound(&seg, &inst.requests, &inst.space).unwrap() >= -1e-9);
            let o = opt_dp_from(&inst.space, Some(seg[0]), &inst.requests);
            prop_assert!(check_opt_lower_bound(&o.trajectory, &inst.requests, &inst.space).unwrap() >= -1e-9);
        }

        #[test]
        fn appending_never_decreases_cost(seed in any::<u64>(), t in 1usize..30) {
            let inst = random_instance(5, 3, t + 1, seed, RandomKind::EuclideanSample).unwrap();
            let a = opt_dp_from(&inst.space, Some(inst.start), &inst.requests[..t]).cost;
            let b = opt_dp(&inst).cost;
            prop_assert!(b >= a - 1e-9);
        }
    }
}
