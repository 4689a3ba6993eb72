//! Problem instances: the tight linear and bipartite geometries, seeded
//! random instances and the JSON instance file.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algorithms::paper_constants;
use crate::error::{Error, Result};
use crate::metric::{MetricSpace, PointId};

/// A metric space, a common start position and a request sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub space: MetricSpace,
    pub start: PointId,
    pub requests: Vec<PointId>,
    /// Rounding and construction notes.
    pub notes: Vec<String>,
}

impl Instance {
    pub fn new(space: MetricSpace, start: PointId, requests: Vec<PointId>) -> Result<Self> {
        space.point(start.0)?;
        for r in &requests {
            space.point(r.0)?;
        }
        Ok(Instance { space, start, requests, notes: Vec::new() })
    }

    pub fn file_size(&self) -> u64 {
        self.space.file_size()
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            file_size: self.space.file_size(),
            points: self.space.names().to_vec(),
            dist: self.space.dist_matrix(),
            start: self.start.0,
            requests: self.requests.iter().map(|p| p.0).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.into_instance()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// On-disk instance format:
/// `{ "D": int, "points": [string], "dist": [[real]], "start": int, "requests": [int] }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(rename = "D")]
    pub file_size: u64,
    pub points: Vec<String>,
    pub dist: Vec<Vec<f64>>,
    pub start: usize,
    pub requests: Vec<usize>,
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<Instance> {
        let space = MetricSpace::new(self.points, self.dist, self.file_size)?;
        let start = space.point(self.start)?;
        let requests = self.requests.iter().map(|&r| space.point(r)).collect::<Result<Vec<_>>>()?;
        Instance::new(space, start, requests)
    }
}

/// Nearest integer, ties up.
pub fn round_half_up(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

/// Rounds `x` to a count, noting the rounding when `x` is not integral.
pub(crate) fn rounded_count(x: f64, what: &str, notes: &mut Vec<String>) -> usize {
    let n = round_half_up(x).max(0) as usize;
    if (x - n as f64).abs() > 1e-9 {
        notes.push(format!("{what} = {x} rounded to {n}"));
    }
    n
}

/// Cyclic repetition of `points` until `count` entries.
pub fn round_robin(points: &[PointId], count: usize) -> Result<Vec<PointId>> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("round robin over an empty point list".into()));
    }
    Ok(points.iter().copied().cycle().take(count).collect())
}

fn two_point_space(len: f64, file_size: u64) -> Result<MetricSpace> {
    MetricSpace::new(vec!["a".into(), "b".into()], vec![vec![0.0, len], vec![len, 0.0]], file_size)
}

/// Two points `a`, `b` at distance 1; `at_a` requests at `a` followed by
/// `at_b` requests at `b`; start at `a`.
pub fn linear_instance_split(at_a: usize, at_b: usize, file_size: u64) -> Result<Instance> {
    let space = two_point_space(1.0, file_size)?;
    let (a, b) = (PointId(0), PointId(1));
    let mut requests = vec![a; at_a];
    requests.extend(std::iter::repeat_n(b, at_b));
    Instance::new(space, a, requests)
}

/// The linear play geometry for phase factor `c`: `round(c D)` requests,
/// the first `round((c - t) D)` at `a` and the rest at `b`, with
/// `t = 1 + 1/R0`.
pub fn linear_instance(c: f64, file_size: u64) -> Result<Instance> {
    if file_size < 1 {
        return Err(Error::InvalidParameter("D must be at least 1".into()));
    }
    let t = paper_constants().t_lin;
    if !(c > t) {
        return Err(Error::InvalidParameter(format!("linear play needs c > t = {t}, got c = {c}")));
    }
    let d = file_size as f64;
    let mut notes = Vec::new();
    let total = rounded_count(c * d, "c*D", &mut notes);
    let at_a = rounded_count((c - t) * d, "(c-t)*D", &mut notes).min(total);
    let mut inst = linear_instance_split(at_a, total - at_a, file_size)?;
    inst.notes = notes;
    Ok(inst)
}

/// Index layout of the bipartite geometry: `a = 0`, `q_i = i`,
/// `s_i = k + i` for `i = 1..=k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BipartiteLayout {
    pub k: usize,
}

impl BipartiteLayout {
    pub fn a(&self) -> PointId {
        PointId(0)
    }

    /// `q_i` for `i` in `1..=k`.
    pub fn q(&self, i: usize) -> PointId {
        debug_assert!((1..=self.k).contains(&i));
        PointId(i)
    }

    /// `s_i` for `i` in `1..=k`.
    pub fn s(&self, i: usize) -> PointId {
        debug_assert!((1..=self.k).contains(&i));
        PointId(self.k + i)
    }

    pub fn q_points(&self) -> Vec<PointId> {
        (1..=self.k).map(|i| self.q(i)).collect()
    }

    pub fn s_points(&self) -> Vec<PointId> {
        (1..=self.k).map(|i| self.s(i)).collect()
    }

    /// `Some(i)` if `p = q_i`.
    pub fn q_index(&self, p: PointId) -> Option<usize> {
        (1..=self.k).contains(&p.0).then_some(p.0)
    }

    /// `Some(i)` if `p = s_i`.
    pub fn s_index(&self, p: PointId) -> Option<usize> {
        (self.k + 1..=2 * self.k).contains(&p.0).then(|| p.0 - self.k)
    }
}

/// Shortest-path metric of the bipartite graph: `a` joined to every `q_i`
/// by an edge of length `f`, and `q_i` joined to `s_j` iff `i != j` by an
/// edge of length `alpha * f`.
pub fn bipartite_space(k: usize, f: f64, alpha: f64, file_size: u64) -> Result<MetricSpace> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!(
            "bipartite geometry needs k >= 3 so every pair of S shares a neighbour, got {k}"
        )));
    }
    if !(f > 0.0) || !(alpha > 0.0) {
        return Err(Error::InvalidParameter("f and alpha must be positive".into()));
    }
    let layout = BipartiteLayout { k };
    let mut names = vec!["a".to_string()];
    names.extend((1..=k).map(|i| format!("q{i}")));
    names.extend((1..=k).map(|i| format!("s{i}")));
    let mut edges = Vec::with_capacity(k * k);
    for i in 1..=k {
        edges.push((layout.a().0, layout.q(i).0, f));
        for j in 1..=k {
            if i != j {
                edges.push((layout.q(i).0, layout.s(j).0, alpha * f));
            }
        }
    }
    MetricSpace::from_edges(names, &edges, file_size)
}

/// The bipartite play geometry with `round(c D)` requests issued round
/// robin over `S`, starting at `a`.
pub fn bipartite_instance(k: usize, f: f64, alpha: f64, c: f64, file_size: u64) -> Result<Instance> {
    let space = bipartite_space(k, f, alpha, file_size)?;
    let mut notes = Vec::new();
    let n = rounded_count(c * file_size as f64, "c*D", &mut notes);
    if n < k {
        return Err(Error::InvalidParameter(format!("c*D = {n} requests cannot cover k = {k} points")));
    }
    let layout = BipartiteLayout { k };
    let requests = round_robin(&layout.s_points(), n)?;
    let mut inst = Instance::new(space, layout.a(), requests)?;
    inst.notes = notes;
    Ok(inst)
}

/// Families of random metrics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RandomKind {
    /// Points uniform in the unit square, straight-line distances.
    EuclideanSample,
    /// Random connected graph with uniform edge weights, shortest paths.
    RandomGraphShortestPath,
}

pub fn random_space(n: usize, file_size: u64, kind: RandomKind, rng: &mut impl Rng) -> Result<MetricSpace> {
    if n < 1 {
        return Err(Error::InvalidParameter("need at least one point".into()));
    }
    let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    match kind {
        RandomKind::EuclideanSample => {
            let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen(), rng.gen())).collect();
            let dist = pts
                .iter()
                .map(|a| pts.iter().map(|b| (a.0 - b.0).hypot(a.1 - b.1)).collect())
                .collect();
            MetricSpace::new(names, dist, file_size)
        }
        RandomKind::RandomGraphShortestPath => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            let mut edges = Vec::new();
            // random spanning tree keeps the graph connected
            for i in 1..n {
                let parent = order[rng.gen_range(0..i)];
                edges.push((order[i], parent, rng.gen_range(0.1..=1.0)));
            }
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.3) {
                        edges.push((u, v, rng.gen_range(0.1..=1.0)));
                    }
                }
            }
            MetricSpace::from_edges(names, &edges, file_size)
        }
    }
}

/// A seeded random instance with `len` uniform requests. Start is point 0.
pub fn random_instance(n: usize, file_size: u64, len: usize, seed: u64, kind: RandomKind) -> Result<Instance> {
    if len < 1 {
        return Err(Error::InvalidParameter("need at least one request".into()));
    }
    if file_size < 1 {
        return Err(Error::InvalidParameter("D must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = random_space(n, file_size, kind, &mut rng)?;
    let requests = (0..len).map(|_| PointId(rng.gen_range(0..n))).collect();
    Instance::new(space, PointId(0), requests)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::validate_metric;
    use proptest::prelude::*;

    #[test]
    fn linear_split_at_threshold_length() {
        let k = paper_constants();
        let inst = linear_instance(k.c_t, 1000).unwrap();
        let a = inst.requests.iter().filter(|&&p| p == PointId(0)).count();
        let b = inst.requests.iter().filter(|&&p| p == PointId(1)).count();
        assert_eq!((inst.requests.len(), a, b), (1352, 107, 1245));
        // all a's precede all b's
        assert!(inst.requests[..a].iter().all(|&p| p == PointId(0)));
        assert!(!inst.notes.is_empty());
    }

    #[test]
    fn linear_small_split() {
        let inst = linear_instance(2.0, 2).unwrap();
        let a = inst.requests.iter().filter(|&&p| p == PointId(0)).count();
        assert_eq!((inst.requests.len(), a), (4, 2));
        assert!(inst.requests.iter().all(|p| p.0 < 2));
        assert!(linear_instance(1.2, 10).is_err());
    }

    #[test]
    fn bipartite_geometry_k3() {
        let alpha = paper_constants().alpha;
        let inst = bipartite_instance(3, 1.0, alpha, 2.0, 6).unwrap();
        let s = &inst.space;
        let l = BipartiteLayout { k: 3 };
        for i in 1..=3 {
            assert!((s.d(l.a(), l.q(i)) - 1.0).abs() < 1e-12);
            assert!((s.d(l.a(), l.s(i)) - (1.0 + alpha)).abs() < 1e-12);
            for j in 1..=3 {
                let dq = s.d(l.q(i), l.s(j));
                if i != j {
                    assert!((dq - alpha).abs() < 1e-12);
                    assert!((s.d(l.s(i), l.s(j)) - 2.0 * alpha).abs() < 1e-12);
                } else {
                    assert!((dq - 3.0 * alpha).abs() < 1e-12);
                }
            }
        }
        assert_eq!(inst.requests.len(), 12);
        assert_eq!(inst.requests[..4], [l.s(1), l.s(2), l.s(3), l.s(1)]);
        assert!(bipartite_instance(2, 1.0, alpha, 2.0, 6).is_err());
    }

    #[test]
    fn random_is_deterministic() {
        for kind in [RandomKind::EuclideanSample, RandomKind::RandomGraphShortestPath] {
            let a = random_instance(5, 4, 20, 7, kind).unwrap();
            let b = random_instance(5, 4, 20, 7, kind).unwrap();
            assert_eq!(a, b);
            let c = random_instance(5, 4, 20, 8, kind).unwrap();
            assert_ne!(a.requests, c.requests);
        }
        let one = random_instance(1, 3, 10, 1, RandomKind::EuclideanSample).unwrap();
        assert!(one.requests.iter().all(|&p| p == PointId(0)));
    }

    #[test]
    fn round_robin_basics() {
        let (x, y) = (PointId(3), PointId(5));
        assert_eq!(round_robin(&[x], 5).unwrap(), vec![x; 5]);
        assert_eq!(round_robin(&[x, y], 3).unwrap(), vec![x, y, x]);
        assert!(round_robin(&[], 3).is_err());
    }

    #[test]
    fn json_round_trip_and_rejection() {
        let inst = random_instance(4, 8, 10, 3, RandomKind::RandomGraphShortestPath).unwrap();
        let back = Instance::from_json(&inst.to_json().unwrap()).unwrap();
        assert_eq!(back.requests, inst.requests);
        assert_eq!(back.space, inst.space);
        let bad = r#"{"D": 2, "points": ["a","b","c"], "dist": [[0,1,5],[1,0,1],[5,1,0]], "start": 0, "requests": [1]}"#;
        assert!(Instance::from_json(bad).is_err());
        let bad_req = r#"{"D": 2, "points": ["a","b"], "dist": [[0,1],[1,0]], "start": 0, "requests": [2]}"#;
        assert!(Instance::from_json(bad_req).is_err());
    }

    proptest! {
        #[test]
        fn round_robin_is_balanced(k in 1usize..9, count in 0usize..60) {
            let pts: Vec<PointId> = (0..k).map(PointId).collect();
            let seq = round_robin(&pts, count).unwrap();
            let counts: Vec<usize> = pts.iter().map(|p| seq.iter().filter(|&q| q == p).count()).collect();
            let (mx, mn) = (*counts.iter().max().unwrap(), *counts.iter().min().unwrap());
            prop_assert!(mx - mn <= 1);
            prop_assert!(mx <= count.div_ceil(k));
        }

        #[test]
        fn generated_metrics_validate(n in 1usize..8, seed in 0u64..1000, graph in any::<bool>()) {
            let kind = if graph { RandomKind::RandomGraphShortestPath } else { RandomKind::EuclideanSample };
            let inst = random_instance(n, 4, 5, seed, kind).unwrap();
            let r = validate_metric(&inst.space.dist_matrix(), 4, 1e-9).unwrap();
            prop_assert!(r.is_valid());
        }

        #[test]
        fn bipartite_metrics_validate(k in 3usize..8, f in 0.01f64..5.0, scale in 0.05f64..0.9) {
            let s = bipartite_space(k, f, scale, 3).unwrap();
            prop_assert!(validate_metric(&s.dist_matrix(), 3, 1e-9).unwrap().is_valid());
            let l = BipartiteLayout { k };
            for i in 1..=k {
                prop_assert!((s.d(l.a(), l.s(i)) - (1.0 + scale) * f).abs() < 1e-9);
            }
        }
    }
}
