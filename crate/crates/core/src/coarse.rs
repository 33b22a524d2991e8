//! Controlled sets of finite extended metric spaces, their growth, and the
//! greedy decomposition of a controlled set into orthogonal partial
//! bijections.
//!
//! Conventions: `E_x = { y : (y, x) ∈ E }` and `E^x = { y : (x, y) ∈ E }`.
//! A pair `(x, y) ∈ E` belongs to the graph of `τ` when `τ(y) = x`.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::convolution::{data_lines, parse_num};
use crate::error::{Error, Result};
use crate::groupoid::{FiniteGroupoid, LengthFunction, ValidationReport, Violation};
use crate::par::{self, Exec};

/// A finite metric taking values in `[0, ∞]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    d: Vec<Vec<f64>>,
}

impl Metric {
    /// Checks zero diagonal, symmetry, nonnegativity and the triangle
    /// inequality where the values involved are finite.
    pub fn new(d: Vec<Vec<f64>>) -> Result<Self> {
        let n = d.len();
        if n == 0 {
            return Err(Error::Empty("metric on no points"));
        }
        for (i, row) in d.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Structural(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            if row[i] != 0.0 {
                return Err(Error::Precondition(format!("d({i},{i}) = {} is not zero", row[i])));
            }
            for (j, &v) in row.iter().enumerate() {
                if v.is_nan() || v < 0.0 {
                    return Err(Error::Precondition(format!("d({i},{j}) = {v} is not a distance")));
                }
                if v != d[j][i] {
                    return Err(Error::Precondition(format!(
                        "asymmetric metric: d({i},{j}) = {v} but d({j},{i}) = {}",
                        d[j][i]
                    )));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let via = d[i][k] + d[k][j];
                    if via.is_finite() && d[i][j] > via * (1.0 + 1e-12) {
                        return Err(Error::Precondition(format!(
                            "triangle inequality fails: d({i},{j}) > d({i},{k}) + d({k},{j})"
                        )));
                    }
                }
            }
        }
        Ok(Metric { d })
    }

    /// `d(i, j) = |i − j|` on `{0, …, n − 1}`.
    pub fn segment(n: usize) -> Result<Self> {
        Metric::new((0..n).map(|i| (0..n).map(|j| (i as f64 - j as f64).abs()).collect()).collect())
    }

    /// Shortest-path metric of an undirected graph (∞ between components).
    pub fn from_graph(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            for v in [a, b] {
                if v >= n {
                    return Err(Error::IndexOutOfRange {
                        what: "point",
                        index: v,
                        size: n,
                    });
                }
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        let d = (0..n)
            .map(|s| {
                let mut dist = vec![f64::INFINITY; n];
                dist[s] = 0.0;
                let mut queue = std::collections::VecDeque::from([s]);
                while let Some(u) = queue.pop_front() {
                    for &v in &adj[u] {
                        if dist[v].is_infinite() {
                            dist[v] = dist[u] + 1.0;
                            queue.push_back(v);
                        }
                    }
                }
                dist
            })
            .collect();
        Metric::new(d)
    }

    /// Vertices of the complete rooted binary tree of the given depth
    /// (heap order) with the path metric.
    pub fn binary_tree(depth: u32) -> Result<Self> {
        let n = (1usize << (depth + 1)) - 1;
        let edges: Vec<(usize, usize)> = (1..n).map(|v| ((v - 1) / 2, v)).collect();
        Metric::from_graph(n, &edges)
    }

    pub fn n_points(&self) -> usize {
        self.d.len()
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.d[i][j]
    }

    /// Largest finite distance.
    pub fn diameter(&self) -> f64 {
        self.d.iter().flatten().copied().filter(|v| v.is_finite()).fold(0.0, f64::max)
    }

    /// Parses `points <n>` then `dist <i> <j> <value|inf>`; the symmetric
    /// closure is taken, unspecified pairs are `∞`, the diagonal is zero.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = data_lines(text);
        let n = parse_points_header(lines.next())?;
        let mut d = vec![vec![f64::INFINITY; n]; n];
        let mut given: HashMap<(usize, usize), f64> = HashMap::new();
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        for (line_no, line) in lines {
            let tok: Vec<&str> = line.split_whitespace().collect();
            let ["dist", a, b, v] = tok.as_slice() else {
                return Err(Error::parse(line_no, format!("unexpected line `{line}`")));
            };
            let a = parse_point(line_no, a, n)?;
            let b = parse_point(line_no, b, n)?;
            let v = if *v == "inf" {
                f64::INFINITY
            } else {
                parse_num(v, line_no)?
            };
            let key = (a.min(b), a.max(b));
            if let Some(&old) = given.get(&key) {
                if old != v {
                    return Err(Error::parse(line_no, format!("asymmetric metric: d({a},{b}) given as {old} and {v}")));
                }
            }
            given.insert(key, v);
            d[a][b] = v;
            d[b][a] = v;
        }
        Metric::new(d)
    }

    pub fn to_text(&self) -> String {
        let n = self.n_points();
        let mut out = format!("points {n}\n");
        for i in 0..n {
            for j in i + 1..n {
                let v = self.d[i][j];
                if v.is_finite() {
                    writeln!(out, "dist {i} {j} {v}").unwrap();
                }
            }
        }
        out
    }
}

fn parse_points_header(first: Option<(usize, &str)>) -> Result<usize> {
    let (i, line) = first.ok_or(Error::Empty("missing `points` line"))?;
    match line.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["points", n] => n.parse().map_err(|_| Error::parse(i, "bad point count")),
        _ => Err(Error::parse(i, "expected `points <n>`")),
    }
}

fn parse_point(line: usize, tok: &str, n: usize) -> Result<usize> {
    let v: usize = tok.parse().map_err(|_| Error::parse(line, format!("bad point `{tok}`")))?;
    if v >= n {
        return Err(Error::parse(line, format!("point {v} out of range (n = {n})")));
    }
    Ok(v)
}

/// A relation `E ⊆ X × X` on `X = {0, …, n − 1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlledSet {
    n: usize,
    pairs: BTreeSet<(usize, usize)>,
    // fibers[x] = E_x, cofibers[x] = E^x, both sorted
    fibers: Vec<Vec<usize>>,
    cofibers: Vec<Vec<usize>>,
}

impl ControlledSet {
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let pairs: BTreeSet<(usize, usize)> = pairs.into_iter().collect();
        let mut fibers = vec![Vec::new(); n];
        let mut cofibers = vec![Vec::new(); n];
        for &(x, y) in &pairs {
            for v in [x, y] {
                if v >= n {
                    return Err(Error::IndexOutOfRange {
                        what: "point",
                        index: v,
                        size: n,
                    });
                }
            }
            fibers[y].push(x);
            cofibers[x].push(y);
        }
        for f in fibers.iter_mut() {
            f.sort_unstable();
        }
        Ok(ControlledSet {
            n,
            pairs,
            fibers,
            cofibers,
        })
    }

    pub fn diagonal(n: usize) -> Self {
        ControlledSet::new(n, (0..n).map(|i| (i, i))).expect("indices in range")
    }

    pub fn full(n: usize) -> Self {
        ControlledSet::new(n, (0..n).flat_map(|i| (0..n).map(move |j| (i, j)))).expect("indices in range")
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.pairs.contains(&(x, y))
    }

    /// `E_x`.
    pub fn fiber(&self, x: usize) -> &[usize] {
        &self.fibers[x]
    }

    /// `E^x`.
    pub fn cofiber(&self, x: usize) -> &[usize] {
        &self.cofibers[x]
    }

    /// `N(E) = max_x max(|E_x|, |E^x|)`.
    pub fn bound(&self) -> usize {
        (0..self.n)
            .map(|x| self.fibers[x].len().max(self.cofibers[x].len()))
            .max()
            .unwrap_or(0)
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.n).all(|x| self.contains(x, x))
    }

    /// `E ∘ F = { (x, z) : (x, y) ∈ E, (y, z) ∈ F }`, computed by row.
    pub fn compose(&self, other: &ControlledSet, exec: Exec) -> Result<ControlledSet> {
        if self.n != other.n {
            return Err(Error::Precondition(format!(
                "relations on {} and {} points cannot be composed",
                self.n, other.n
            )));
        }
        let rows = par::map_range(exec, self.n, |x| {
            let mut row: Vec<usize> = self.cofibers[x].iter().flat_map(|&y| other.cofibers[y].iter().copied()).collect();
            row.sort_unstable();
            row.dedup();
            row
        });
        ControlledSet::new(
            self.n,
            rows.into_iter().enumerate().flat_map(|(x, row)| row.into_iter().map(move |z| (x, z))),
        )
    }

    /// `Eⁿ` for `n ≥ 1`.
    pub fn power(&self, n: u32, exec: Exec) -> Result<ControlledSet> {
        if n == 0 {
            return Err(Error::Domain("relation power needs n ≥ 1".into()));
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = self.compose(&acc, exec)?;
        }
        Ok(acc)
    }

    /// Parses `points <n>` then `pair <i> <j>` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = data_lines(text);
        let n = parse_points_header(lines.next())?;
        let mut pairs = Vec::new();
        for (line_no, line) in lines {
            let tok: Vec<&str> = line.split_whitespace().collect();
            let ["pair", a, b] = tok.as_slice() else {
                return Err(Error::parse(line_no, format!("unexpected line `{line}`")));
            };
            pairs.push((parse_point(line_no, a, n)?, parse_point(line_no, b, n)?));
        }
        ControlledSet::new(n, pairs)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("points {}\n", self.n);
        for (x, y) in self.pairs() {
            writeln!(out, "pair {x} {y}").unwrap();
        }
        out
    }
}

/// `E_r = { (x, y) : d(x, y) ≤ r }`.
pub fn controlled_set_from_metric(d: &Metric, r: f64) -> Result<ControlledSet> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("radius {r} is negative")));
    }
    let n = d.n_points();
    ControlledSet::new(n, (0..n).flat_map(|x| (0..n).filter(move |&y| d.dist(x, y) <= r).map(move |y| (x, y))))
}

/// `|(Eⁿ)_x|`, grown one factor at a time from `E_x`.
pub fn coarse_growth(e: &ControlledSet, x: usize, n: u32) -> Result<usize> {
    if n == 0 {
        return Err(Error::Domain("growth is defined for n ≥ 1".into()));
    }
    if x >= e.n {
        return Err(Error::IndexOutOfRange {
            what: "point",
            index: x,
            size: e.n,
        });
    }
    let mut current: BTreeSet<usize> = e.fiber(x).iter().copied().collect();
    for _ in 1..n {
        current = current.iter().flat_map(|&z| e.fiber(z).iter().copied()).collect();
    }
    Ok(current.len())
}

/// A bijection `τ: D → R`, stored as its graph `{ (τ(y), y) : y ∈ D }`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartialBijection {
    graph: Vec<(usize, usize)>,
}

impl PartialBijection {
    pub fn new(mut graph: Vec<(usize, usize)>) -> Result<Self> {
        graph.sort_unstable();
        graph.dedup();
        let mut dom = HashSet::new();
        let mut ran = HashSet::new();
        for &(x, y) in &graph {
            if !dom.insert(y) || !ran.insert(x) {
                return Err(Error::Precondition(format!("pair ({x},{y}) breaks injectivity")));
            }
        }
        Ok(PartialBijection { graph })
    }

    pub fn graph(&self) -> &[(usize, usize)] {
        &self.graph
    }

    pub fn domain(&self) -> BTreeSet<usize> {
        self.graph.iter().map(|&(_, y)| y).collect()
    }

    pub fn range(&self) -> BTreeSet<usize> {
        self.graph.iter().map(|&(x, _)| x).collect()
    }

    pub fn apply(&self, y: usize) -> Option<usize> {
        self.graph.iter().find(|&&(_, d)| d == y).map(|&(x, _)| x)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Decomposition {
    pub parts: Vec<PartialBijection>,
    pub colors: usize,
    pub bound: usize,
}

/// Pairwise check that no graph meets `R_j × D_j` of another part.
pub fn verify_orthogonality(parts: &[PartialBijection]) -> ValidationReport {
    let sets: Vec<(HashSet<usize>, HashSet<usize>)> = parts
        .iter()
        .map(|p| (p.range().into_iter().collect(), p.domain().into_iter().collect()))
        .collect();
    let mut violations = Vec::new();
    for (i, p) in parts.iter().enumerate() {
        for (j, (ran, dom)) in sets.iter().enumerate() {
            if i == j {
                continue;
            }
            if let Some(&(x, y)) = p.graph.iter().find(|(x, y)| ran.contains(x) && dom.contains(y)) {
                violations.push(Violation {
                    axiom: "orthogonal",
                    witness: vec![i, j, x, y],
                });
            }
        }
    }
    ValidationReport::from_violations(violations)
}

/// Neighbors of each point of `E` in the conflict graph: `(x, y)` and
/// `(x', y')` are linked when `(x, y') ∈ E` or `(x', y) ∈ E`.
fn conflict_graph(e: &ControlledSet, points: &[(usize, usize)], index: &HashMap<(usize, usize), usize>, exec: Exec) -> Vec<Vec<usize>> {
    par::map(exec, points, |&(x, y)| {
        let mut nb = Vec::new();
        for &y2 in e.cofiber(x) {
            for &x2 in e.fiber(y2) {
                nb.push(index[&(x2, y2)]);
            }
        }
        for &x2 in e.fiber(y) {
            for &y2 in e.cofiber(x2) {
                nb.push(index[&(x2, y2)]);
            }
        }
        let me = index[&(x, y)];
        nb.sort_unstable();
        nb.dedup();
        nb.retain(|&v| v != me);
        nb
    })
}

/// Largest conflict-graph degree and the bound `2N(N − 1)`.
pub fn conflict_degree_bound(e: &ControlledSet) -> (usize, usize) {
    let points: Vec<(usize, usize)> = e.pairs().collect();
    let index: HashMap<(usize, usize), usize> = points.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let graph = conflict_graph(e, &points, &index, Exec::default());
    let n = e.bound();
    let degree = graph.iter().map(Vec::len).max().unwrap_or(0);
    let bound = 2 * n * n.saturating_sub(1);
    assert!(degree <= bound, "conflict degree {degree} exceeds {bound}");
    (degree, bound)
}

/// First-fit coloring of the conflict graph in lexicographic order of
/// `(x, y)`; each color class is the graph of a partial bijection.
pub fn decompose_orthogonal(e: &ControlledSet) -> Decomposition {
    let points: Vec<(usize, usize)> = e.pairs().collect();
    let index: HashMap<(usize, usize), usize> = points.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let graph = conflict_graph(e, &points, &index, Exec::default());
    let mut color = vec![usize::MAX; points.len()];
    let mut colors = 0;
    for v in 0..points.len() {
        let used: HashSet<usize> = graph[v].iter().map(|&u| color[u]).collect();
        let c = (0..).find(|c| !used.contains(c)).expect("unbounded search");
        color[v] = c;
        colors = colors.max(c + 1);
    }
    let mut classes = vec![Vec::new(); colors];
    for (v, &c) in color.iter().enumerate() {
        classes[c].push(points[v]);
    }
    let parts: Vec<PartialBijection> = classes
        .into_iter()
        .map(|g| PartialBijection::new(g).expect("linked pairs get distinct colors"))
        .collect();
    let n = e.bound();
    let bound = 2 * n * n.saturating_sub(1) + 1;
    let d = Decomposition { parts, colors, bound };
    assert!(d.colors <= d.bound || e.is_empty(), "{} colors exceed {}", d.colors, d.bound);
    assert!(verify_orthogonality(&d.parts).ok, "color classes are not orthogonal");
    assert!(union_equals(&d, e), "color classes do not cover the relation");
    d
}

/// Whether the graphs of the parts are disjoint and cover `E` exactly.
pub fn union_equals(d: &Decomposition, e: &ControlledSet) -> bool {
    let mut seen = BTreeSet::new();
    for p in &d.parts {
        for &pair in p.graph() {
            if !seen.insert(pair) {
                return false;
            }
        }
    }
    seen.len() == e.len() && seen.iter().all(|&(x, y)| e.contains(x, y))
}

/// The coarse groupoid of a finite extended metric space: pairs `(y, x)`
/// at finite distance, with length `d(y, x)`. Element `(y, x)` has range
/// `y` and source `x`.
pub fn coarse_groupoid(d: &Metric) -> Result<(FiniteGroupoid, LengthFunction, Vec<(usize, usize)>)> {
    let n = d.n_points();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|y| (0..n).map(move |x| (y, x)))
        .filter(|&(y, x)| d.dist(y, x).is_finite())
        .collect();
    let index: HashMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let src = pairs.iter().map(|&(_, x)| index[&(x, x)]).collect();
    let rng = pairs.iter().map(|&(y, _)| index[&(y, y)]).collect();
    let inv = pairs.iter().map(|&(y, x)| index[&(x, y)]).collect();
    let units = (0..n).map(|x| index[&(x, x)]).collect();
    let mut comp = Vec::new();
    for (a, &(z, y)) in pairs.iter().enumerate() {
        for x in 0..n {
            if let (Some(&b), Some(&c)) = (index.get(&(y, x)), index.get(&(z, x))) {
                comp.push((a, b, c));
            }
        }
    }
    let g = FiniteGroupoid::from_tables(pairs.len(), units, src, rng, inv, comp)?;
    let l = LengthFunction::from_fn(&g, |a| d.dist(pairs[a].0, pairs[a].1));
    Ok((g, l, pairs))
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricGrowthReport {
    pub pass: bool,
    pub max_radius: u64,
    /// `(x, r, |B̄(x, r)|, f(r))` where the bound first fails.
    pub witness: Option<(usize, u64, usize, f64)>,
    /// Ball sizes in the groupoid fibers over points of `X` agree with the
    /// metric balls.
    pub fiber_counts_match: bool,
}

fn poly(coeffs: &[f64], r: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * r + c)
}

/// Checks `|B̄(x, r)| ≤ f(r)` for every point and integer radius up to the
/// diameter, where `f(r) = Σ_i coeffs[i] rⁱ`.
pub fn metric_growth_check(d: &Metric, coeffs: &[f64]) -> Result<MetricGrowthReport> {
    let max_radius = d.diameter().floor() as u64;
    let (g, l, pairs) = coarse_groupoid(d)?;
    let n = d.n_points();
    let mut witness = None;
    let mut fiber_counts_match = true;
    for x in 0..n {
        let unit = g.units()[x];
        for r in 0..=max_radius {
            let rf = r as f64;
            let bound = poly(coeffs, rf);
            if bound < 0.0 {
                return Err(Error::Precondition(format!("growth polynomial is negative at r = {r}")));
            }
            let ball = (0..n).filter(|&y| d.dist(x, y) <= rf).count();
            let fiber = g.source_fiber(unit).iter().filter(|&&a| l.get(a) <= rf).count();
            debug_assert!(g.source_fiber(unit).iter().all(|&a| pairs[a].1 == x));
            fiber_counts_match &= fiber == ball;
            if witness.is_none() && ball as f64 > bound {
                witness = Some((x, r, ball, bound));
            }
        }
    }
    Ok(MetricGrowthReport {
        pass: witness.is_none(),
        max_radius,
        witness,
        fiber_counts_match,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{validate_groupoid, validate_length};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn metric_relations() {
        let seg = Metric::segment(21).unwrap();
        assert_eq!(controlled_set_from_metric(&seg, 0.0).unwrap(), ControlledSet::diagonal(21));
        let e1 = controlled_set_from_metric(&seg, 1.0).unwrap();
        assert_eq!(e1.bound(), 3);
        let split = Metric::parse("points 4\ndist 0 1 1\ndist 2 3 1\ndist 0 2 inf").unwrap();
        let e = controlled_set_from_metric(&split, 1e9).unwrap();
        assert!(!e.contains(0, 2) && !e.contains(3, 1));
        let bad = Metric::new(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap_err();
        assert!(bad.to_string().contains("asymmetric"));
        assert!(Metric::parse("points 2\ndist 0 1 1\ndist 1 0 2").is_err());
    }

    #[test]
    fn growth_functions() {
        let delta = ControlledSet::diagonal(5);
        assert!((1..6).all(|n| coarse_growth(&delta, 2, n).unwrap() == 1));
        let e1 = controlled_set_from_metric(&Metric::segment(41).unwrap(), 1.0).unwrap();
        for n in 1..=20 {
            assert_eq!(coarse_growth(&e1, 20, n).unwrap(), 2 * n as usize + 1);
            assert_eq!(coarse_growth(&e1, 20, n).unwrap(), e1.power(n, Exec::Sequential).unwrap().fiber(20).len());
        }
        assert_eq!(coarse_growth(&e1, 0, 50).unwrap(), 41);
        let tree = controlled_set_from_metric(&Metric::binary_tree(8).unwrap(), 1.0).unwrap();
        let grow: Vec<usize> = (1..=8).map(|n| coarse_growth(&tree, 0, n).unwrap()).collect();
        assert_eq!(grow, (1..=8).map(|n| (1usize << (n + 1)) - 1).collect::<Vec<_>>());
        assert!(coarse_growth(&e1, 0, 0).is_err());
    }

    #[test]
    fn composition_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let e = ControlledSet::new(12, (0..30).map(|_| (rng.random_range(0..12), rng.random_range(0..12)))).unwrap();
            let left = e.compose(&e, Exec::Parallel).unwrap().compose(&e, Exec::Sequential).unwrap();
            let right = e.compose(&e.compose(&e, Exec::Sequential).unwrap(), Exec::Parallel).unwrap();
            assert_eq!(left, right);
        }
    }

    #[test]
    fn decompositions() {
        let d = decompose_orthogonal(&ControlledSet::diagonal(10));
        assert_eq!(d.colors, 1);
        assert!((0..10).all(|i| d.parts[0].apply(i) == Some(i)));

        let e1 = controlled_set_from_metric(&Metric::segment(21).unwrap(), 1.0).unwrap();
        let d = decompose_orthogonal(&e1);
        assert!(d.colors <= 13 && d.bound == 13);
        let (degree, bound) = conflict_degree_bound(&e1);
        assert!(degree <= 12 && bound == 12);

        let full = decompose_orthogonal(&ControlledSet::full(3));
        assert!(full.colors <= 13);
        assert_eq!(conflict_degree_bound(&ControlledSet::diagonal(4)), (0, 0));
    }

    #[test]
    fn orthogonality_witness() {
        let id = PartialBijection::new(vec![(0, 0), (1, 1)]).unwrap();
        let swap = PartialBijection::new(vec![(1, 0), (0, 1)]).unwrap();
        assert!(verify_orthogonality(&[id.clone()]).ok);
        let r = verify_orthogonality(&[id, swap]);
        assert!(!r.ok && r.has("orthogonal"));
        assert!(PartialBijection::new(vec![(0, 1), (0, 2)]).is_err());
    }

    #[test]
    fn random_decompositions() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..200 {
            let n = rng.random_range(1..=200);
            let cap = rng.random_range(1..=6usize);
            // each point relates to up to `cap` nearby points on both sides
            let mut pairs = Vec::new();
            let mut out = vec![0usize; n];
            let mut inn = vec![0usize; n];
            for _ in 0..n * cap {
                let x = rng.random_range(0..n);
                let y = (x + rng.random_range(0..8)) % n;
                if out[x] < cap && inn[y] < cap && !pairs.contains(&(x, y)) {
                    out[x] += 1;
                    inn[y] += 1;
                    pairs.push((x, y));
                }
            }
            let e = ControlledSet::new(n, pairs).unwrap();
            assert!(e.bound() <= 6, "trial {trial}");
            let d = decompose_orthogonal(&e);
            assert!(union_equals(&d, &e));
            assert!(verify_orthogonality(&d.parts).ok);
            assert!(d.colors <= 2 * e.bound() * e.bound().saturating_sub(1) + 1 || e.is_empty());
        }
    }

    #[test]
    fn metric_growth() {
        let single = Metric::new(vec![vec![0.0]]).unwrap();
        assert!(metric_growth_check(&single, &[1.0]).unwrap().pass);
        let seg = metric_growth_check(&Metric::segment(15).unwrap(), &[1.0, 2.0]).unwrap();
        assert!(seg.pass && seg.fiber_counts_match);
        let tree = metric_growth_check(&Metric::binary_tree(5).unwrap(), &[1.0, 2.0]).unwrap();
        assert!(!tree.pass);
        let (_, r, count, bound) = tree.witness.unwrap();
        assert!(count as f64 > bound && r >= 1);
        assert!(tree.fiber_counts_match);

        let split = Metric::parse("points 3\ndist 0 1 2").unwrap();
        let (g, l, _) = coarse_groupoid(&split).unwrap();
        assert!(validate_groupoid(&g).ok);
        assert!(validate_length(&g, &l, 0.0).unwrap().ok);
        assert_eq!(g.n_elements(), 5);
    }

    #[test]
    fn text_round_trip() {
        let e = controlled_set_from_metric(&Metric::segment(5).unwrap(), 1.0).unwrap();
        assert_eq!(ControlledSet::parse(&e.to_text()).unwrap(), e);
        let m = Metric::binary_tree(2).unwrap();
        assert_eq!(Metric::parse(&m.to_text()).unwrap(), m);
        assert!(matches!(ControlledSet::parse("points 2\npair 0 5"), Err(Error::Parse { line: 2, .. })));
    }
}
