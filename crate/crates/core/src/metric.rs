//! Finite metric spaces and the bracket notation.
//!
//! `[u, v]` is `D * d(u, v)`, where `D` is the file size. The bracket extends
//! to a point and a request multiset (`D` times the average distance from the
//! point to the multiset) and to paths, where it sums consecutive pairs.
//! Two multisets next to each other are only allowed when the mean-pairwise
//! extension is switched on.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used for every metric and proof comparison.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// The active tolerance: `MIGRATIONLAB_TOL` if set to a positive number,
/// otherwise [`DEFAULT_TOLERANCE`]. Read once per process.
pub fn tolerance() -> f64 {
    static TOL: OnceLock<f64> = OnceLock::new();
    *TOL.get_or_init(|| {
        std::env::var("MIGRATIONLAB_TOL")
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|t| t.is_finite() && *t > 0.0)
            .unwrap_or(DEFAULT_TOLERANCE)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointId(pub usize);

impl PointId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NotFinite { i: usize, j: usize },
    Negative { i: usize, j: usize, value: f64 },
    NonZeroDiagonal { i: usize, value: f64 },
    Asymmetric { i: usize, j: usize, diff: f64 },
    Triangle { i: usize, j: usize, k: usize, excess: f64 },
    FileSize { value: u64 },
}

impl Violation {
    pub fn magnitude(&self) -> f64 {
        match *self {
            Violation::NotFinite { .. } => f64::INFINITY,
            Violation::Negative { value, .. } => -value,
            Violation::NonZeroDiagonal { value, .. } => value.abs(),
            Violation::Asymmetric { diff, .. } => diff,
            Violation::Triangle { excess, .. } => excess,
            Violation::FileSize { .. } => 1.0,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub worst: f64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, v: Violation) {
        self.worst = self.worst.max(v.magnitude());
        self.violations.push(v);
    }
}

/// Checks the metric axioms on a raw distance matrix. Violations beyond
/// `tol` are reported; only a non-square matrix is a hard error.
pub fn validate_metric(dist: &[Vec<f64>], file_size: u64, tol: f64) -> Result<ValidationReport> {
    let n = dist.len();
    for (row, r) in dist.iter().enumerate() {
        if r.len() != n {
            return Err(Error::NonSquare { row, len: r.len(), expected: n });
        }
    }
    let mut report = ValidationReport::default();
    if file_size < 1 {
        report.push(Violation::FileSize { value: file_size });
    }
    let mut finite = true;
    for i in 0..n {
        for j in 0..n {
            let x = dist[i][j];
            if !x.is_finite() {
                report.push(Violation::NotFinite { i, j });
                finite = false;
                continue;
            }
            if x < -tol {
                report.push(Violation::Negative { i, j, value: x });
            }
            if i == j && x.abs() > tol {
                report.push(Violation::NonZeroDiagonal { i, value: x });
            }
            if i < j {
                let diff = (x - dist[j][i]).abs();
                if diff > tol {
                    report.push(Violation::Asymmetric { i, j, diff });
                }
            }
        }
    }
    if !finite {
        return Ok(report);
    }
    for i in 0..n {
        for k in 0..n {
            if k == i {
                continue;
            }
            let direct = dist[i][k];
            for j in 0..n {
                let excess = direct - dist[i][j] - dist[j][k];
                if excess > tol {
                    report.push(Violation::Triangle { i, j, k, excess });
                }
            }
        }
    }
    Ok(report)
}

/// A finite metric space with a file size `D`. Distances are stored
/// row-major; point identity is the index, names are labels only.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSpace {
    names: Vec<String>,
    dist: Vec<f64>,
    file_size: u64,
}

impl MetricSpace {
    /// Builds a space from a full distance matrix, rejecting anything that
    /// fails [`validate_metric`] at the active tolerance.
    pub fn new(names: Vec<String>, dist: Vec<Vec<f64>>, file_size: u64) -> Result<Self> {
        let report = validate_metric(&dist, file_size, tolerance())?;
        if !report.is_valid() {
            return Err(Error::InvalidMetric(format!(
                "{} violation(s), worst {:.3e}: {:?}",
                report.violations.len(),
                report.worst,
                report.violations.first()
            )));
        }
        let n = dist.len();
        if names.len() != n {
            return Err(Error::LengthMismatch(format!("{} names for {} points", names.len(), n)));
        }
        let mut flat = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                // symmetrize within tolerance, clamp tiny negatives
                let x = if i == j { 0.0 } else { 0.5 * (dist[i][j] + dist[j][i]) };
                flat.push(x.max(0.0));
            }
        }
        Ok(MetricSpace { names, dist: flat, file_size })
    }

    /// Shortest-path metric of an undirected weighted graph.
    pub fn from_edges(
        names: Vec<String>,
        edges: &[(usize, usize, f64)],
        file_size: u64,
    ) -> Result<Self> {
        let n = names.len();
        let mut d = vec![vec![f64::INFINITY; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidPoint { index: u.max(v), len: n });
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter(format!("edge ({u},{v}) has weight {w}")));
            }
            if w < d[u][v] {
                d[u][v] = w;
                d[v][u] = w;
            }
        }
        floyd_warshall(&mut d);
        if d.iter().flatten().any(|x| x.is_infinite()) {
            return Err(Error::InvalidMetric("graph is disconnected".into()));
        }
        MetricSpace::new(names, d, file_size)
    }

    /// Points labelled `p0, p1, ...`.
    pub fn with_default_names(dist: Vec<Vec<f64>>, file_size: u64) -> Result<Self> {
        let names = (0..dist.len()).map(|i| format!("p{i}")).collect();
        MetricSpace::new(names, dist, file_size)
    }

    /// Same points with every distance multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> MetricSpace {
        assert!(factor > 0.0 && factor.is_finite());
        MetricSpace {
            names: self.names.clone(),
            dist: self.dist.iter().map(|x| x * factor).collect(),
            file_size: self.file_size,
        }
    }

    /// Same metric, different file size.
    pub fn with_file_size(&self, file_size: u64) -> Result<MetricSpace> {
        if file_size < 1 {
            return Err(Error::InvalidParameter("file size must be at least 1".into()));
        }
        Ok(MetricSpace { file_size, ..self.clone() })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn file_size(&self) -> u64 {
        self.file_size
    }

    /// `D` as a float, for cost arithmetic.
    pub fn big_d(&self) -> f64 {
        self.file_size as f64
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, p: PointId) -> &str {
        &self.names[p.0]
    }

    pub fn points(&self) -> impl Iterator<Item = PointId> + '_ {
        (0..self.len()).map(PointId)
    }

    pub fn point(&self, index: usize) -> Result<PointId> {
        if index < self.len() {
            Ok(PointId(index))
        } else {
            Err(Error::InvalidPoint { index, len: self.len() })
        }
    }

    pub fn point_by_name(&self, name: &str) -> Option<PointId> {
        self.names.iter().position(|n| n == name).map(PointId)
    }

    pub fn dist_matrix(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.len().max(1)).map(|r| r.to_vec()).take(self.len()).collect()
    }

    /// Raw distance `d(u, v)`.
    #[inline]
    pub fn d(&self, u: PointId, v: PointId) -> f64 {
        self.dist[u.0 * self.names.len() + v.0]
    }

    /// `[u, v] = D * d(u, v)`.
    #[inline]
    pub fn bracket(&self, u: PointId, v: PointId) -> f64 {
        self.big_d() * self.d(u, v)
    }

    pub fn checked_bracket(&self, u: PointId, v: PointId) -> Result<f64> {
        self.point(u.0)?;
        self.point(v.0)?;
        Ok(self.bracket(u, v))
    }

    /// Sum of distances from `v` to every request in `s`, multiplicities
    /// counted.
    pub fn sum_dist(&self, v: PointId, s: &RequestMultiset) -> f64 {
        s.iter().map(|(x, c)| c as f64 * self.d(v, x)).sum()
    }

    /// `[v, S] = D * (1/|S|) * sum_{x in S} d(v, x)`.
    pub fn bracket_multiset(&self, v: PointId, s: &RequestMultiset) -> f64 {
        self.big_d() * self.sum_dist(v, s) / s.total() as f64
    }

    /// Mean-pairwise extension `[S, T] = D * (1/(|S||T|)) * sum_s sum_t d(s, t)`.
    pub fn bracket_multiset_pair(&self, s: &RequestMultiset, t: &RequestMultiset) -> f64 {
        let mut acc = 0.0;
        for (x, cx) in s.iter() {
            for (y, cy) in t.iter() {
                acc += (cx * cy) as f64 * self.d(x, y);
            }
        }
        self.big_d() * acc / (s.total() as f64 * t.total() as f64)
    }

    /// Bracket between two path elements.
    pub fn bracket_elems(&self, a: PathElement<'_>, b: PathElement<'_>, allow_pairs: bool) -> Result<f64> {
        Ok(match (a, b) {
            (PathElement::Point(u), PathElement::Point(v)) => self.checked_bracket(u, v)?,
            (PathElement::Point(u), PathElement::Multiset(s))
            | (PathElement::Multiset(s), PathElement::Point(u)) => {
                self.point(u.0)?;
                self.bracket_multiset(u, s)
            }
            (PathElement::Multiset(s), PathElement::Multiset(t)) => {
                if !allow_pairs {
                    return Err(Error::ConsecutiveMultisets(0));
                }
                self.bracket_multiset_pair(s, t)
            }
        })
    }

    /// `[e1, e2, ..., ej] = [e1, e2] + [e2, e3] + ...`.
    pub fn bracket_path(&self, path: &[PathElement<'_>], allow_pairs: bool) -> Result<f64> {
        if path.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "a bracket path needs at least 2 elements, got {}",
                path.len()
            )));
        }
        let mut total = 0.0;
        for (i, w) in path.windows(2).enumerate() {
            total += self.bracket_elems(w[0], w[1], allow_pairs).map_err(|e| match e {
                Error::ConsecutiveMultisets(_) => Error::ConsecutiveMultisets(i),
                other => other,
            })?;
        }
        Ok(total)
    }

    /// Path bracket for paths known to be well formed (no multiset pairs,
    /// ids from this space). Panics otherwise.
    pub fn path(&self, path: &[PathElement<'_>]) -> f64 {
        self.bracket_path(path, false).expect("well-formed bracket path")
    }
}

fn floyd_warshall(d: &mut [Vec<f64>]) {
    let n = d.len();
    for k in 0..n {
        let dk = d[k].clone();
        for row in d.iter_mut() {
            let dik = row[k];
            if dik.is_infinite() {
                continue;
            }
            for (x, &dkj) in row.iter_mut().zip(dk.iter()) {
                let via = dik + dkj;
                if via < *x {
                    *x = via;
                }
            }
        }
    }
}

/// A nonempty multiset of request points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestMultiset {
    counts: BTreeMap<PointId, usize>,
    total: usize,
}

impl RequestMultiset {
    pub fn from_requests(requests: &[PointId]) -> Result<Self> {
        if requests.is_empty() {
            return Err(Error::EmptyMultiset);
        }
        let mut counts = BTreeMap::new();
        for &r in requests {
            *counts.entry(r).or_insert(0) += 1;
        }
        Ok(RequestMultiset { counts, total: requests.len() })
    }

    pub fn from_counts(pairs: impl IntoIterator<Item = (PointId, usize)>) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for (p, c) in pairs {
            if c > 0 {
                *counts.entry(p).or_insert(0) += c;
            }
        }
        let total = counts.values().sum();
        if total == 0 {
            return Err(Error::EmptyMultiset);
        }
        Ok(RequestMultiset { counts, total })
    }

    pub fn singleton(p: PointId, count: usize) -> Result<Self> {
        Self::from_counts([(p, count)])
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn count(&self, p: PointId) -> usize {
        self.counts.get(&p).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (PointId, usize)> + '_ {
        self.counts.iter().map(|(&p, &c)| (p, c))
    }

    /// Multiset union `S ⊎ T`.
    pub fn union(&self, other: &RequestMultiset) -> RequestMultiset {
        let mut counts = self.counts.clone();
        for (p, c) in other.iter() {
            *counts.entry(p).or_insert(0) += c;
        }
        RequestMultiset { counts, total: self.total + other.total }
    }

    /// Checks that every key is a point of `space`.
    pub fn validate_in(&self, space: &MetricSpace) -> Result<()> {
        for (p, _) in self.iter() {
            space.point(p.0)?;
        }
        Ok(())
    }
}

/// One entry of a bracket path.
#[derive(Clone, Copy, Debug)]
pub enum PathElement<'a> {
    Point(PointId),
    Multiset(&'a RequestMultiset),
}

impl From<PointId> for PathElement<'_> {
    fn from(p: PointId) -> Self {
        PathElement::Point(p)
    }
}

impl<'a> From<&'a RequestMultiset> for PathElement<'a> {
    fn from(s: &'a RequestMultiset) -> Self {
        PathElement::Multiset(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line3() -> MetricSpace {
        MetricSpace::with_default_names(
            vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 2.0], vec![3.0, 2.0, 0.0]],
            4,
        )
        .unwrap()
    }

    #[test]
    fn degenerate_spaces_validate() {
        assert!(validate_metric(&[vec![0.0]], 1, 1e-9).unwrap().is_valid());
        assert!(validate_metric(&[vec![0.0, 1.0], vec![1.0, 0.0]], 4, 1e-9).unwrap().is_valid());
    }

    #[test]
    fn triangle_violation_magnitude() {
        let d = vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]];
        let r = validate_metric(&d, 1, 1e-9).unwrap();
        assert!(!r.is_valid());
        assert!((r.worst - 3.0).abs() < 1e-12);
        assert!(r.violations.iter().all(|v| matches!(v, Violation::Triangle { .. })));
        assert!(MetricSpace::with_default_names(d, 1).is_err());
    }

    #[test]
    fn non_square_is_structural() {
        let d = vec![vec![0.0, 1.0], vec![1.0]];
        assert!(matches!(validate_metric(&d, 1, 1e-9), Err(Error::NonSquare { .. })));
    }

    #[test]
    fn asymmetry_and_diagonal_reported() {
        let d = vec![vec![0.5, 1.0], vec![2.0, 0.0]];
        let r = validate_metric(&d, 0, 1e-9).unwrap();
        assert!(r.violations.iter().any(|v| matches!(v, Violation::NonZeroDiagonal { .. })));
        assert!(r.violations.iter().any(|v| matches!(v, Violation::Asymmetric { .. })));
        assert!(r.violations.iter().any(|v| matches!(v, Violation::FileSize { .. })));
    }

    #[test]
    fn point_brackets() {
        let s = MetricSpace::with_default_names(vec![vec![0.0, 1.0], vec![1.0, 0.0]], 8).unwrap();
        assert_eq!(s.bracket(PointId(0), PointId(1)), 8.0);
        assert_eq!(s.bracket(PointId(1), PointId(1)), 0.0);
        let h = MetricSpace::with_default_names(vec![vec![0.0, 0.5], vec![0.5, 0.0]], 4).unwrap();
        assert_eq!(h.bracket(PointId(0), PointId(1)), 2.0);
        assert!(h.checked_bracket(PointId(0), PointId(2)).is_err());
    }

    #[test]
    fn multiset_brackets() {
        let s = line3();
        let v = PointId(1);
        let all_at_v = RequestMultiset::singleton(v, 3).unwrap();
        assert_eq!(s.bracket_multiset(v, &all_at_v), 0.0);
        // d(p0,p1) = 1, d(p0,p2) = 3, D = 4
        let m = RequestMultiset::from_counts([(PointId(1), 1), (PointId(2), 1)]).unwrap();
        assert_eq!(s.bracket_multiset(PointId(0), &m), 8.0);
        assert!(RequestMultiset::from_requests(&[]).is_err());
    }

    #[test]
    fn path_brackets() {
        let s = line3();
        let (a, b) = (PointId(0), PointId(2));
        let p = s.bracket_path(&[a.into(), b.into(), a.into()], false).unwrap();
        assert_eq!(p, 2.0 * s.bracket(a, b));
        let m = RequestMultiset::from_requests(&[PointId(1), PointId(2)]).unwrap();
        let p = s.bracket_path(&[a.into(), (&m).into(), b.into()], false).unwrap();
        assert_eq!(p, s.bracket_multiset(a, &m) + s.bracket_multiset(b, &m));
        let err = s.bracket_path(&[a.into(), (&m).into(), (&m).into()], false);
        assert!(matches!(err, Err(Error::ConsecutiveMultisets(1))));
        assert!(s.bracket_path(&[a.into(), (&m).into(), (&m).into()], true).is_ok());
        assert!(s.bracket_path(&[a.into()], false).is_err());
    }

    #[test]
    fn five_point_path_term_by_term() {
        let d = vec![
            vec![0.0, 2.0, 3.0, 4.0, 1.0],
            vec![2.0, 0.0, 1.0, 2.0, 2.0],
            vec![3.0, 1.0, 0.0, 1.5, 2.5],
            vec![4.0, 2.0, 1.5, 0.0, 3.0],
            vec![1.0, 2.0, 2.5, 3.0, 0.0],
        ];
        let s = MetricSpace::with_default_names(d.clone(), 4).unwrap();
        let (dlm, op0) = (PointId(0), PointId(4));
        let r1 = RequestMultiset::from_counts([(PointId(1), 2), (PointId(2), 2)]).unwrap();
        let r2 = RequestMultiset::from_counts([(PointId(3), 3)]).unwrap();
        let got = s.path(&[dlm.into(), op0.into(), (&r1).into(), op0.into(), (&r2).into()]);
        // by hand: [0,4] = 4; [4,R1] = 4*(2*2 + 2*2.5)/4 = 9; twice; [4,R2] = 4*3 = 12
        assert!((got - (4.0 + 9.0 + 9.0 + 12.0)).abs() < 1e-12);
    }

    #[test]
    fn multiset_pair_reductions() {
        let s = line3();
        let a = RequestMultiset::singleton(PointId(0), 1).unwrap();
        let b = RequestMultiset::singleton(PointId(2), 1).unwrap();
        assert_eq!(s.bracket_multiset_pair(&a, &b), s.bracket(PointId(0), PointId(2)));
        let same = RequestMultiset::singleton(PointId(1), 5).unwrap();
        assert_eq!(s.bracket_multiset_pair(&same, &same), 0.0);
    }

    #[test]
    fn graph_conversion_uses_shortest_paths() {
        let names = (0..4).map(|i| i.to_string()).collect();
        let s = MetricSpace::from_edges(names, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 5.0)], 2)
            .unwrap();
        assert_eq!(s.d(PointId(0), PointId(3)), 3.0);
        let names = (0..3).map(|i| i.to_string()).collect();
        assert!(MetricSpace::from_edges(names, &[(0, 1, 1.0)], 2).is_err());
    }

    fn arb_space() -> impl Strategy<Value = MetricSpace> {
        (1usize..7, 1u64..6).prop_flat_map(|(n, dsize)| {
            prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), n).prop_map(move |pts| {
                let d = pts
                    .iter()
                    .map(|a| pts.iter().map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()).collect())
                    .collect();
                MetricSpace::with_default_names(d, dsize).unwrap()
            })
        })
    }

    fn arb_multiset(n: usize) -> impl Strategy<Value = RequestMultiset> {
        prop::collection::vec(0..n, 1..12)
            .prop_map(|v| RequestMultiset::from_requests(&v.into_iter().map(PointId).collect::<Vec<_>>()).unwrap())
    }

    fn brute_point_multiset(space: &MetricSpace, v: PointId, s: &RequestMultiset) -> f64 {
        let expanded: Vec<PointId> = s.iter().flat_map(|(p, c)| std::iter::repeat_n(p, c)).collect();
        let sum: f64 = expanded.iter().map(|&x| space.d(v, x)).sum();
        sum / expanded.len() as f64 * space.big_d()
    }

    proptest! {
        #[test]
        fn multiset_bracket_matches_expansion(
            (space, s, t, v) in arb_space().prop_flat_map(|sp| {
                let n = sp.len();
                (Just(sp), arb_multiset(n), arb_multiset(n), 0..n)
            })
        ) {
            let v = PointId(v);
            let got = space.bracket_multiset(v, &s);
            prop_assert!((got - brute_point_multiset(&space, v, &s)).abs() < 1e-9);

            let es: Vec<PointId> = s.iter().flat_map(|(p, c)| std::iter::repeat_n(p, c)).collect();
            let et: Vec<PointId> = t.iter().flat_map(|(p, c)| std::iter::repeat_n(p, c)).collect();
            let mut sum = 0.0;
            for &x in &es { for &y in &et { sum += space.d(x, y); } }
            let brute = space.big_d() * sum / (es.len() * et.len()) as f64;
            prop_assert!((space.bracket_multiset_pair(&s, &t) - brute).abs() < 1e-9);
        }

        #[test]
        fn triangle_inequalities(
            (space, s, t, a, b, c) in arb_space().prop_flat_map(|sp| {
                let n = sp.len();
                (Just(sp), arb_multiset(n), arb_multiset(n), 0..n, 0..n, 0..n)
            })
        ) {
            let (a, b, c) = (PointId(a), PointId(b), PointId(c));
            let tol = 1e-9;
            prop_assert!(space.bracket(a, c) <= space.bracket(a, b) + space.bracket(b, c) + tol);
            prop_assert!(space.bracket(a, b) <= space.bracket_multiset(a, &s) + space.bracket_multiset(b, &s) + tol);
            prop_assert!(space.bracket_multiset(a, &t) <= space.bracket_multiset(a, &s) + space.bracket_multiset_pair(&s, &t) + tol);
            prop_assert!(space.bracket_multiset_pair(&s, &t) <= space.bracket_multiset(a, &s) + space.bracket_multiset(a, &t) + tol);
        }

        #[test]
        fn multiset_bracket_is_linear_in_mixture(
            (space, s, t, v) in arb_space().prop_flat_map(|sp| {
                let n = sp.len();
                (Just(sp), arb_multiset(n), arb_multiset(n), 0..n)
            })
        ) {
            let v = PointId(v);
            let u = s.union(&t);
            let lhs = space.bracket_multiset(v, &u) * u.total() as f64;
            let rhs = space.bracket_multiset(v, &s) * s.total() as f64 + space.bracket_multiset(v, &t) * t.total() as f64;
            prop_assert!((lhs - rhs).abs() < 1e-8);
        }
    }
}
