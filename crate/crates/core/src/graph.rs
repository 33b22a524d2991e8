//! Directed graphs, path counting, the simple-cycle growth criterion, and
//! ball-truncated fiber models of graph groupoids.
//!
//! Edges run `s(e) → r(e)` and a path `α_1 … α_m` satisfies
//! `r(α_i) = s(α_{i+1})`. A boundary path is an infinite path or a finite
//! path ending at a sink; the shift `σ` drops the first edge.
//!
//! In the fiber over a boundary path `x`, every element has the form
//! `(α σ^k(x), |α| − k, x)` with `r(α) = s(σ^k x)`. The representation is
//! unique once it is *reduced*: `k = 0`, `α` empty, or `α_{|α|} ≠ x_k`.
//! Lengths use the surrogate `L(y, m, z) = min { a + b : σ^a y = σ^b z,
//! a − b = m }`, which is `|α| + k` on the reduced form of a fiber element.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::convolution::{data_lines, GroupoidFunction};
use crate::error::{Error, Result};
use crate::groupoid::{pair_groupoid, FiniteGroupoid, LengthFunction};
use crate::rep::{left_regular_matrix, FiberOperator};

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub name: String,
    pub src: VertexId,
    pub rng: VertexId,
}

#[derive(Debug, Clone, Default)]
pub struct DirectedGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    vertex_ids: HashMap<String, VertexId>,
    edge_ids: HashMap<String, EdgeId>,
    out_edges: Vec<Vec<EdgeId>>,
    in_edges: Vec<Vec<EdgeId>>,
}

impl DirectedGraph {
    pub fn new() -> Self {
        DirectedGraph::default()
    }

    pub fn add_vertex(&mut self, name: &str) -> Result<VertexId> {
        if self.vertex_ids.contains_key(name) {
            return Err(Error::Structural(format!("duplicate vertex `{name}`")));
        }
        let id = self.vertices.len();
        self.vertices.push(name.to_string());
        self.vertex_ids.insert(name.to_string(), id);
        self.out_edges.push(Vec::new());
        self.in_edges.push(Vec::new());
        Ok(id)
    }

    pub fn add_edge(&mut self, name: &str, src: VertexId, rng: VertexId) -> Result<EdgeId> {
        if self.edge_ids.contains_key(name) {
            return Err(Error::Structural(format!("duplicate edge `{name}`")));
        }
        for v in [src, rng] {
            if v >= self.vertices.len() {
                return Err(Error::IndexOutOfRange {
                    what: "vertex",
                    index: v,
                    size: self.vertices.len(),
                });
            }
        }
        let id = self.edges.len();
        self.edges.push(Edge {
            name: name.to_string(),
            src,
            rng,
        });
        self.edge_ids.insert(name.to_string(), id);
        self.out_edges[src].push(id);
        self.in_edges[rng].push(id);
        Ok(id)
    }

    /// Builds a graph from vertex names and `(edge, src, dst)` triples.
    pub fn from_lists(vertices: &[&str], edges: &[(&str, &str, &str)]) -> Result<Self> {
        let mut g = DirectedGraph::new();
        for v in vertices {
            g.add_vertex(v)?;
        }
        for (e, s, t) in edges {
            let (s, t) = (g.vertex(s)?, g.vertex(t)?);
            g.add_edge(e, s, t)?;
        }
        Ok(g)
    }

    /// Loop `f` at `v` and an edge `e: v → w` into the sink `w`.
    pub fn toeplitz() -> Self {
        DirectedGraph::from_lists(&["v", "w"], &[("f", "v", "v"), ("e", "v", "w")]).expect("valid graph")
    }

    pub fn single_loop() -> Self {
        DirectedGraph::from_lists(&["v"], &[("f", "v", "v")]).expect("valid graph")
    }

    pub fn double_loop() -> Self {
        DirectedGraph::from_lists(&["v"], &[("f", "v", "v"), ("g", "v", "v")]).expect("valid graph")
    }

    /// `v0 → v1 → … → v{n-1}`.
    pub fn chain(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty("chain with no vertices"));
        }
        let mut g = DirectedGraph::new();
        for i in 0..n {
            g.add_vertex(&format!("v{i}"))?;
        }
        for i in 1..n {
            g.add_edge(&format!("e{i}"), i - 1, i)?;
        }
        Ok(g)
    }

    /// The directed cycle `v0 → v1 → … → v{n-1} → v0`.
    pub fn cycle(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty("cycle with no vertices"));
        }
        let mut g = DirectedGraph::new();
        for i in 0..n {
            g.add_vertex(&format!("v{i}"))?;
        }
        for i in 0..n {
            g.add_edge(&format!("e{i}"), i, (i + 1) % n)?;
        }
        Ok(g)
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex(&self, name: &str) -> Result<VertexId> {
        self.vertex_ids
            .get(name)
            .copied()
            .ok_or_else(|| Error::Precondition(format!("unknown vertex `{name}`")))
    }

    pub fn edge_id(&self, name: &str) -> Result<EdgeId> {
        self.edge_ids
            .get(name)
            .copied()
            .ok_or_else(|| Error::Precondition(format!("unknown edge `{name}`")))
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertices[v]
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out_edges[v]
    }

    pub fn in_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.in_edges[v]
    }

    pub fn is_sink(&self, v: VertexId) -> bool {
        self.out_edges[v].is_empty()
    }

    fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v >= self.vertices.len() {
            Err(Error::Precondition(format!("unknown vertex {v}")))
        } else {
            Ok(())
        }
    }

    /// Parses `vertex <name>` and `edge <name> <src> <dst>` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut g = DirectedGraph::new();
        for (i, line) in data_lines(text) {
            let tok: Vec<&str> = line.split_whitespace().collect();
            let res = match tok.as_slice() {
                ["vertex", name] => g.add_vertex(name).map(|_| ()),
                ["edge", name, s, t] => {
                    let (s, t) = (
                        g.vertex(s).map_err(|e| Error::parse(i, e.to_string()))?,
                        g.vertex(t).map_err(|e| Error::parse(i, e.to_string()))?,
                    );
                    g.add_edge(name, s, t).map(|_| ())
                }
                _ => return Err(Error::parse(i, format!("unexpected line `{line}`"))),
            };
            res.map_err(|e| Error::parse(i, e.to_string()))?;
        }
        if g.n_vertices() == 0 {
            return Err(Error::Empty("graph has no vertices"));
        }
        Ok(g)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            writeln!(out, "vertex {v}").unwrap();
        }
        for e in &self.edges {
            writeln!(out, "edge {} {} {}", e.name, self.vertices[e.src], self.vertices[e.rng]).unwrap();
        }
        out
    }
}

/// A finite path given by its start vertex and edges.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Path {
    pub start: VertexId,
    pub edges: Vec<EdgeId>,
}

impl Path {
    pub fn vertex(v: VertexId) -> Self {
        Path {
            start: v,
            edges: Vec::new(),
        }
    }

    /// Validates consecutive edges and the start vertex.
    pub fn new(g: &DirectedGraph, start: VertexId, edges: Vec<EdgeId>) -> Result<Self> {
        g.check_vertex(start)?;
        let mut at = start;
        for &e in &edges {
            if e >= g.n_edges() {
                return Err(Error::IndexOutOfRange {
                    what: "edge",
                    index: e,
                    size: g.n_edges(),
                });
            }
            if g.edge(e).src != at {
                return Err(Error::Precondition(format!(
                    "edge `{}` does not continue the path",
                    g.edge(e).name
                )));
            }
            at = g.edge(e).rng;
        }
        Ok(Path { start, edges })
    }

    pub fn from_names(g: &DirectedGraph, names: &[&str]) -> Result<Self> {
        let edges = names.iter().map(|n| g.edge_id(n)).collect::<Result<Vec<_>>>()?;
        let start = match edges.first() {
            Some(&e) => g.edge(e).src,
            None => return Err(Error::Empty("use Path::vertex for a vertex path")),
        };
        Path::new(g, start, edges)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Range vertex `r(α)`.
    pub fn end(&self, g: &DirectedGraph) -> VertexId {
        self.edges.last().map_or(self.start, |&e| g.edge(e).rng)
    }

    pub fn display(&self, g: &DirectedGraph) -> String {
        if self.edges.is_empty() {
            g.vertex_name(self.start).to_string()
        } else {
            self.edges.iter().map(|&e| g.edge(e).name.as_str()).collect::<Vec<_>>().join(" ")
        }
    }
}

/// All paths `α` with `|α| ≤ n` and `r(α) = v`, shortest first.
pub fn enumerate_paths(g: &DirectedGraph, v: VertexId, n: usize) -> Result<Vec<Path>> {
    g.check_vertex(v)?;
    let mut out = vec![Path::vertex(v)];
    let mut layer = vec![Path::vertex(v)];
    for _ in 0..n {
        let mut next = Vec::new();
        for p in &layer {
            for &e in g.in_edges(p.start) {
                let mut edges = Vec::with_capacity(p.len() + 1);
                edges.push(e);
                edges.extend_from_slice(&p.edges);
                next.push(Path {
                    start: g.edge(e).src,
                    edges,
                });
            }
        }
        if next.is_empty() {
            break;
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    Ok(out)
}

/// `φ_v(n) = |E^{≤n} v|` by dynamic programming (saturating at `u64::MAX`).
pub fn phi_growth(g: &DirectedGraph, v: VertexId, n: usize) -> Result<u64> {
    g.check_vertex(v)?;
    // ends[u] = number of paths of the current length from u to v
    let mut ends = vec![0u64; g.n_vertices()];
    ends[v] = 1;
    let mut total = 1u64;
    for _ in 0..n {
        let mut next = vec![0u64; g.n_vertices()];
        for (u, slot) in next.iter_mut().enumerate() {
            for &e in g.out_edges(u) {
                *slot = slot.saturating_add(ends[g.edge(e).rng]);
            }
        }
        let layer: u64 = next.iter().fold(0u64, |a, &b| a.saturating_add(b));
        if layer == 0 {
            break;
        }
        total = total.saturating_add(layer);
        ends = next;
    }
    Ok(total)
}

/// Simple cycles at `v` (returning to `v` only at the end), shortest first,
/// at most `limit` of them, among cycles of length ≤ `|E^0| · |E^1|`.
///
/// Walk counts to `v` avoiding `v` internally are tabulated per length
/// (saturating at `limit`), so the search only follows productive edges.
pub fn simple_cycles_at(g: &DirectedGraph, v: VertexId, limit: usize) -> Result<Vec<Path>> {
    g.check_vertex(v)?;
    let cap = (g.n_vertices() * g.n_edges()).max(1);
    let nv = g.n_vertices();
    // reach[r][u]: walks of length r from u to v whose vertices before the
    // end avoid v (u itself must differ from v unless r = 0)
    let mut reach = vec![vec![0usize; nv]];
    reach[0][v] = 1;
    for r in 1..cap {
        let prev = &reach[r - 1];
        let row: Vec<usize> = (0..nv)
            .map(|u| {
                if u == v {
                    return 0;
                }
                g.out_edges(u)
                    .iter()
                    .map(|&e| prev[g.edge(e).rng])
                    .fold(0usize, |a, b| a.saturating_add(b).min(limit.max(1)))
            })
            .collect();
        reach.push(row);
    }
    let mut out = Vec::new();
    for len in 1..=cap {
        for &e in g.out_edges(v) {
            let t = g.edge(e).rng;
            if reach[len - 1][t] == 0 {
                continue;
            }
            let mut stack = vec![e];
            extend_cycles(g, &reach, t, len - 1, &mut stack, &mut out, limit);
            if out.len() >= limit {
                return Ok(out);
            }
        }
    }
    Ok(out)
}

fn extend_cycles(
    g: &DirectedGraph,
    reach: &[Vec<usize>],
    at: VertexId,
    remaining: usize,
    stack: &mut Vec<EdgeId>,
    out: &mut Vec<Path>,
    limit: usize,
) {
    if out.len() >= limit {
        return;
    }
    if remaining == 0 {
        out.push(Path {
            start: g.edge(stack[0]).src,
            edges: stack.clone(),
        });
        return;
    }
    for &e in g.out_edges(at) {
        let t = g.edge(e).rng;
        if reach[remaining - 1][t] == 0 {
            continue;
        }
        stack.push(e);
        extend_cycles(g, reach, t, remaining - 1, stack, out, limit);
        stack.pop();
        if out.len() >= limit {
            return;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CycleCensus {
    pub vertex: VertexId,
    pub cycle: Option<Path>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthVerdict {
    pub polynomial: bool,
    /// Per vertex, its unique simple cycle if any (filled when polynomial).
    pub census: Vec<CycleCensus>,
    /// A center with two distinct simple cycles (filled otherwise).
    pub witness: Option<(VertexId, Path, Path)>,
}

/// Polynomial growth holds iff every vertex has at most one simple cycle.
pub fn has_polynomial_growth(g: &DirectedGraph) -> GrowthVerdict {
    let mut census = Vec::new();
    for v in 0..g.n_vertices() {
        let mut cycles = simple_cycles_at(g, v, 2).expect("vertex exists");
        if cycles.len() >= 2 {
            let b = cycles.pop().unwrap();
            let a = cycles.pop().unwrap();
            return GrowthVerdict {
                polynomial: false,
                census: Vec::new(),
                witness: Some((v, a, b)),
            };
        }
        census.push(CycleCensus {
            vertex: v,
            cycle: cycles.pop(),
        });
    }
    GrowthVerdict {
        polynomial: true,
        census,
        witness: None,
    }
}

/// Data showing exponential growth: with cycles `α, β` at `v` and
/// `K = |α||β|`, the fiber over `α^∞` has `|B(nK)| ≥ 2^n`.
#[derive(Debug, Clone)]
pub struct ExponentialWitness {
    pub vertex: VertexId,
    pub alpha: Path,
    pub beta: Path,
    pub k: usize,
    pub base: BoundaryPath,
}

pub fn exponential_witness(g: &DirectedGraph, verdict: &GrowthVerdict) -> Option<ExponentialWitness> {
    let (v, a, b) = verdict.witness.clone()?;
    let base = BoundaryPath::new(g, v, Vec::new(), a.edges.clone()).ok()?;
    Some(ExponentialWitness {
        vertex: v,
        k: a.len() * b.len(),
        alpha: a,
        beta: b,
        base,
    })
}

/// A boundary path given by a root, a prefix and an optional repeating
/// block. Without a block the path is finite if it ends at a sink and is a
/// truncated prefix (unknown continuation) otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundaryPath {
    root: VertexId,
    prefix: Vec<EdgeId>,
    cycle: Vec<EdgeId>,
    sink_terminated: bool,
}

impl BoundaryPath {
    pub fn new(g: &DirectedGraph, root: VertexId, prefix: Vec<EdgeId>, cycle: Vec<EdgeId>) -> Result<Self> {
        let p = Path::new(g, root, prefix.clone())?;
        let end = p.end(g);
        let mut sink_terminated = false;
        if cycle.is_empty() {
            sink_terminated = g.is_sink(end);
        } else {
            let c = Path::new(g, end, cycle.clone())?;
            if c.end(g) != end {
                return Err(Error::Precondition("repeating block is not a cycle".into()));
            }
        }
        Ok(BoundaryPath {
            root,
            prefix,
            cycle,
            sink_terminated,
        })
    }

    /// The finite boundary path consisting of the sink `w` alone.
    pub fn sink(g: &DirectedGraph, w: VertexId) -> Result<Self> {
        g.check_vertex(w)?;
        if !g.is_sink(w) {
            return Err(Error::Precondition(format!("vertex `{}` is not a sink", g.vertex_name(w))));
        }
        BoundaryPath::new(g, w, Vec::new(), Vec::new())
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn is_periodic(&self) -> bool {
        !self.cycle.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.sink_terminated
    }

    /// Number of edges known: `None` if the path is infinite.
    pub fn known_len(&self) -> Option<usize> {
        (!self.is_periodic()).then_some(self.prefix.len())
    }

    /// Edge at 0-based position `i`, `None` past the end of a finite or
    /// truncated path.
    pub fn edge_at(&self, i: usize) -> Option<EdgeId> {
        if i < self.prefix.len() {
            Some(self.prefix[i])
        } else if self.cycle.is_empty() {
            None
        } else {
            Some(self.cycle[(i - self.prefix.len()) % self.cycle.len()])
        }
    }

    /// A window holding the first `depth` edges, or the whole finite path.
    pub fn window(&self, depth: usize) -> Result<BaseWindow> {
        if !self.is_periodic() && !self.sink_terminated && self.prefix.len() < depth {
            return Err(Error::Precondition(format!(
                "boundary path prefix has {} edges; at least {depth} are required",
                self.prefix.len()
            )));
        }
        let len = if self.sink_terminated {
            self.prefix.len().min(depth)
        } else {
            depth
        };
        Ok(BaseWindow {
            root: self.root,
            edges: (0..len).map(|i| self.edge_at(i).expect("within window")).collect(),
            complete: self.sink_terminated && self.prefix.len() <= depth,
        })
    }

    /// Parses `path <root> <edge>... [cycle <edge>...]`.
    pub fn parse(g: &DirectedGraph, text: &str) -> Result<Self> {
        let (i, line) = data_lines(text)
            .next()
            .ok_or(Error::Empty("no `path` line"))?;
        let tok: Vec<&str> = line.split_whitespace().collect();
        if tok.len() < 2 || tok[0] != "path" {
            return Err(Error::parse(i, "expected `path <root> <edge>... [cycle <edge>...]`"));
        }
        let root = g.vertex(tok[1]).map_err(|e| Error::parse(i, e.to_string()))?;
        let mut prefix = Vec::new();
        let mut cycle = Vec::new();
        let mut in_cycle = false;
        for t in &tok[2..] {
            if *t == "cycle" {
                if in_cycle {
                    return Err(Error::parse(i, "`cycle` given twice"));
                }
                in_cycle = true;
                continue;
            }
            let e = g.edge_id(t).map_err(|e| Error::parse(i, e.to_string()))?;
            if in_cycle { cycle.push(e) } else { prefix.push(e) }
        }
        if in_cycle && cycle.is_empty() {
            return Err(Error::parse(i, "empty repeating block"));
        }
        BoundaryPath::new(g, root, prefix, cycle).map_err(|e| Error::parse(i, e.to_string()))
    }

    pub fn to_text(&self, g: &DirectedGraph) -> String {
        let mut out = format!("path {}", g.vertex_name(self.root));
        for &e in &self.prefix {
            write!(out, " {}", g.edge(e).name).unwrap();
        }
        if !self.cycle.is_empty() {
            out.push_str(" cycle");
            for &e in &self.cycle {
                write!(out, " {}", g.edge(e).name).unwrap();
            }
        }
        out.push('\n');
        out
    }
}

/// One boundary path from every vertex, following first out-edges until a
/// vertex repeats (periodic) or a sink is reached (finite).
pub fn sample_boundary_paths(g: &DirectedGraph) -> Vec<BoundaryPath> {
    (0..g.n_vertices())
        .map(|v| {
            let mut seen = HashMap::new();
            let mut edges = Vec::new();
            let mut at = v;
            loop {
                if let Some(&pos) = seen.get(&at) {
                    let cycle = edges.split_off(pos);
                    break BoundaryPath::new(g, v, edges, cycle).expect("walk is a path");
                }
                seen.insert(at, edges.len());
                match g.out_edges(at).first() {
                    Some(&e) => {
                        edges.push(e);
                        at = g.edge(e).rng;
                    }
                    None => break BoundaryPath::new(g, v, edges, Vec::new()).expect("walk is a path"),
                }
            }
        })
        .collect()
}

/// The first edges of a base point `x`; all fiber computations read `x`
/// through this window.
#[derive(Debug, Clone)]
pub struct BaseWindow {
    root: VertexId,
    edges: Vec<EdgeId>,
    complete: bool,
}

impl BaseWindow {
    /// Edge `x_i` (1-based); `None` past the end of a finite path.
    fn edge(&self, i: usize) -> Option<EdgeId> {
        assert!(i >= 1);
        match self.edges.get(i - 1) {
            Some(&e) => Some(e),
            None if self.complete => None,
            None => panic!("base window too short: edge {i} of {}", self.edges.len()),
        }
    }

    /// Whether `σ^k x` is defined.
    fn has_shift(&self, k: usize) -> bool {
        !self.complete || k <= self.edges.len()
    }

    /// `s(σ^k x)`.
    fn vertex_at(&self, g: &DirectedGraph, k: usize) -> VertexId {
        if k == 0 {
            self.root
        } else {
            g.edge(self.edge(k).expect("shift within path")).rng
        }
    }

    /// Length of `x` when finite.
    fn finite_len(&self) -> Option<usize> {
        self.complete.then_some(self.edges.len())
    }
}

/// The fiber element `(α σ^k(x), |α| − k, x)` in reduced form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FiberElement {
    pub alpha: Vec<EdgeId>,
    pub k: usize,
}

impl FiberElement {
    pub fn unit() -> Self {
        FiberElement {
            alpha: Vec::new(),
            k: 0,
        }
    }

    pub fn lag(&self) -> i64 {
        self.alpha.len() as i64 - self.k as i64
    }

    pub fn is_unit(&self) -> bool {
        self.alpha.is_empty() && self.k == 0
    }

    /// Reduces `(α, k)` by cancelling a trailing `α_{|α|} = x_k`.
    fn reduced(mut alpha: Vec<EdgeId>, mut k: usize, x: &BaseWindow) -> Self {
        while k > 0 && alpha.last().is_some() && alpha.last().copied() == x.edge(k) {
            alpha.pop();
            k -= 1;
        }
        FiberElement { alpha, k }
    }
}

/// `|α| + k`; on reduced elements this is the surrogate length.
pub fn canonical_length_surrogate(e: &FiberElement) -> u64 {
    (e.alpha.len() + e.k) as u64
}

/// Edge at 1-based position `p` of the point `α σ^k(x)`.
fn point_edge(x: &BaseWindow, e: &FiberElement, p: usize) -> Option<EdgeId> {
    if p <= e.alpha.len() {
        Some(e.alpha[p - 1])
    } else {
        x.edge(p - e.alpha.len() + e.k)
    }
}

fn point_start(g: &DirectedGraph, x: &BaseWindow, e: &FiberElement) -> VertexId {
    match e.alpha.first() {
        Some(&a) => g.edge(a).src,
        None => x.vertex_at(g, e.k),
    }
}

/// Whether `σ^a(y1) = σ^b(y2)` for range points of fiber elements, given
/// `a − lag(e1) = b − lag(e2)` (so both tails are the same shift of `x`).
fn tails_agree(x: &BaseWindow, e1: &FiberElement, a: usize, e2: &FiberElement, b: usize) -> bool {
    debug_assert_eq!(a as i64 - e1.lag(), b as i64 - e2.lag());
    let offset = a as i64 - e1.lag();
    if let Some(n) = x.finite_len() {
        if offset > n as i64 {
            return false;
        }
    }
    let t_max = (e1.alpha.len().saturating_sub(a)).max(e2.alpha.len().saturating_sub(b));
    (1..=t_max).all(|t| point_edge(x, e1, a + t) == point_edge(x, e2, b + t))
}

/// Surrogate length of the arrow `g1 g2⁻¹` between fiber elements.
pub fn arrow_length(x: &BaseWindow, g1: &FiberElement, g2: &FiberElement) -> u64 {
    let d = g1.lag() - g2.lag();
    let b_min = (-d).max(0) as usize;
    let b_max = (g2.alpha.len() as i64).max(g1.alpha.len() as i64 - d) as usize;
    for b in b_min..=b_max.max(b_min) {
        let a = (b as i64 + d) as usize;
        if tails_agree(x, g1, a, g2, b) {
            return (a + b) as u64;
        }
    }
    unreachable!("tails agree once both α-parts are shifted away")
}

/// The ball `{ g ∈ G_x : L(g) ≤ n }` with its base window.
#[derive(Debug, Clone)]
pub struct FiberBall {
    pub base: BaseWindow,
    pub radius: usize,
    pub elements: Vec<FiberElement>,
}

impl FiberBall {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn surrogate(&self, i: usize) -> u64 {
        canonical_length_surrogate(&self.elements[i])
    }

    /// Sizes `|B(m)|` for `m = 0..=radius`.
    pub fn profile(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.radius + 1];
        for e in &self.elements {
            counts[canonical_length_surrogate(e) as usize] += 1;
        }
        let mut acc = 0;
        counts
            .into_iter()
            .map(|c| {
                acc += c;
                acc
            })
            .collect()
    }

    /// The pair groupoid on the ball points; `(i, j)` is the arrow
    /// `g_i g_j⁻¹` with index `i * len + j`.
    pub fn groupoid(&self) -> FiniteGroupoid {
        pair_groupoid(self.len()).expect("ball contains the unit")
    }

    /// `L(g_i g_j⁻¹)` pulled back to [`FiberBall::groupoid`].
    pub fn length(&self) -> LengthFunction {
        let n = self.len();
        LengthFunction::new(
            (0..n * n)
                .map(|a| arrow_length(&self.base, &self.elements[a / n], &self.elements[a % n]) as f64)
                .collect(),
        )
    }

    /// Index of the base unit in the ball; its pair-groupoid unit is
    /// `unit_index * (len + 1)`.
    pub fn unit_index(&self) -> usize {
        self.elements.iter().position(FiberElement::is_unit).expect("ball contains the unit")
    }

    /// The compression of a cylinder function: `(i, j) ↦ F(g_i g_j⁻¹)`.
    pub fn compress(&self, g: &DirectedGraph, f: &CylinderFunction) -> GroupoidFunction {
        let n = self.len();
        GroupoidFunction::from_pairs((0..n * n).map(|a| {
            (a, f.eval(g, &self.base, &self.elements[a / n], &self.elements[a % n]))
        }))
    }

    /// `λ_x(F)` compressed to the ball, marked as a window of the fiber.
    pub fn window_operator(&self, g: &DirectedGraph, f: &CylinderFunction) -> Result<FiberOperator> {
        let model = self.groupoid();
        let unit = self.unit_index() * (self.len() + 1);
        let a = left_regular_matrix(&model, &self.compress(g, f), unit)?;
        FiberOperator::new(a.fiber().to_vec(), a.entries(), false)
    }
}

fn ball_window(x: &BoundaryPath, n: usize) -> Result<BaseWindow> {
    x.window(n)
}

/// All fiber elements over `x` with surrogate length `≤ n`, in reduced
/// form, ordered by `k` and then by path enumeration order.
pub fn graph_fiber_ball(g: &DirectedGraph, x: &BoundaryPath, n: usize) -> Result<FiberBall> {
    fiber_ball_impl(g, x, n, true)
}

/// Every representation `(α, k)` with `|α| + k ≤ n`, reduced or not. Its
/// size is the upper sandwich bound; distinct entries may denote the same
/// groupoid element.
pub fn fiber_ball_representations(g: &DirectedGraph, x: &BoundaryPath, n: usize) -> Result<FiberBall> {
    fiber_ball_impl(g, x, n, false)
}

fn fiber_ball_impl(g: &DirectedGraph, x: &BoundaryPath, n: usize, reduced: bool) -> Result<FiberBall> {
    let base = ball_window(x, n)?;
    let mut elements = Vec::new();
    for k in 0..=n {
        if !base.has_shift(k) {
            break;
        }
        let t = base.vertex_at(g, k);
        for p in enumerate_paths(g, t, n - k)? {
            let keep = !reduced || k == 0 || p.edges.last().copied() != base.edge(k);
            if keep {
                elements.push(FiberElement { alpha: p.edges, k });
            }
        }
    }
    Ok(FiberBall {
        base,
        radius: n,
        elements,
    })
}

/// Sandwich bounds on `|B_{G_x}(n)|` from `φ`.
pub fn ball_growth_bound(g: &DirectedGraph, x: &BoundaryPath, n: usize) -> Result<(u64, u64)> {
    let base = ball_window(x, n)?;
    let mut lower = 0u64;
    let mut upper = 0u64;
    for j in 0..=n {
        if !base.has_shift(j) {
            break;
        }
        let phi = phi_growth(g, base.vertex_at(g, j), n - j)?;
        lower = lower.max(phi);
        upper = upper.saturating_add(phi);
    }
    Ok((lower, upper))
}

/// A finite linear combination of bisection indicators `χ_{Z(μ,ν)}`, where
/// `Z(μ,ν) = { (μz, |μ| − |ν|, νz) }`.
#[derive(Debug, Clone, Default)]
pub struct CylinderFunction {
    terms: Vec<(Path, Path, Complex64)>,
}

impl CylinderFunction {
    pub fn new() -> Self {
        CylinderFunction::default()
    }

    /// Adds `c · χ_{Z(μ,ν)}`; requires `r(μ) = r(ν)`.
    pub fn add(&mut self, g: &DirectedGraph, mu: Path, nu: Path, c: Complex64) -> Result<()> {
        if mu.end(g) != nu.end(g) {
            return Err(Error::Precondition(format!(
                "cylinder Z({}, {}) needs paths with a common range",
                mu.display(g),
                nu.display(g)
            )));
        }
        self.terms.push((mu, nu, c));
        Ok(())
    }

    /// `f*(γ) = conj f(γ⁻¹)`: swaps `μ` and `ν`.
    pub fn adjoint(&self) -> CylinderFunction {
        CylinderFunction {
            terms: self.terms.iter().map(|(m, n, c)| (n.clone(), m.clone(), c.conj())).collect(),
        }
    }

    /// Value at the arrow `g1 g2⁻¹` of the fiber over `x`.
    pub fn eval(&self, g: &DirectedGraph, x: &BaseWindow, g1: &FiberElement, g2: &FiberElement) -> Complex64 {
        self.terms
            .iter()
            .filter(|(mu, nu, _)| in_cylinder(g, x, g1, g2, mu, nu))
            .map(|(_, _, c)| *c)
            .sum()
    }

    /// `(self ∗ other)(h)` for `h` in the fiber over `x`, summing over the
    /// finitely many `k ∈ G_x` where `other` can be nonzero.
    pub fn convolve_at(&self, other: &CylinderFunction, g: &DirectedGraph, x: &BaseWindow, h: &FiberElement) -> Complex64 {
        let unit = FiberElement::unit();
        let mut candidates = BTreeSet::new();
        for (mu, nu, _) in &other.terms {
            if starts_with(g, x, &unit, nu) && x.has_shift(nu.len()) {
                candidates.insert(FiberElement::reduced(mu.edges.clone(), nu.len(), x));
            }
        }
        candidates
            .iter()
            .map(|k| self.eval(g, x, h, k) * other.eval(g, x, k, &unit))
            .sum()
    }
}

/// Whether the range point of `e` begins with the path `p`.
fn starts_with(g: &DirectedGraph, x: &BaseWindow, e: &FiberElement, p: &Path) -> bool {
    if point_start(g, x, e) != p.start {
        return false;
    }
    p.edges
        .iter()
        .enumerate()
        .all(|(i, &edge)| point_edge(x, e, i + 1) == Some(edge))
}

/// Whether the arrow `g1 g2⁻¹` lies in `Z(μ, ν)`.
fn in_cylinder(g: &DirectedGraph, x: &BaseWindow, g1: &FiberElement, g2: &FiberElement, mu: &Path, nu: &Path) -> bool {
    g1.lag() - g2.lag() == mu.len() as i64 - nu.len() as i64
        && starts_with(g, x, g1, mu)
        && starts_with(g, x, g2, nu)
        && tails_agree(x, g1, mu.len(), g2, nu.len())
}

/// The Toeplitz generator `a = χ_{Z(e,w)} + χ_{Z(f,v)}`.
pub fn toeplitz_generator(g: &DirectedGraph) -> Result<CylinderFunction> {
    let (v, w) = (g.vertex("v")?, g.vertex("w")?);
    let mut a = CylinderFunction::new();
    let one = Complex64::new(1.0, 0.0);
    a.add(g, Path::from_names(g, &["e"])?, Path::vertex(w), one)?;
    a.add(g, Path::from_names(g, &["f"])?, Path::vertex(v), one)?;
    Ok(a)
}
