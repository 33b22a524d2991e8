//! Bratteli diagrams, their level-`M` AF groupoid truncations, and the
//! weighted disagreement length.
//!
//! A point of the truncation is a path from a source (a vertex with no
//! incoming edge, or any vertex of level 0) up to level `M`. Two paths are
//! related when they end at the same vertex of level `M`. Per level the path
//! carries its edge, or the padding symbol `None` below its start level.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::convolution::data_lines;
use crate::error::{Error, Result};
use crate::groupoid::{FiniteGroupoid, LengthFunction};
use crate::par::{self, Exec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BratteliEdge {
    pub name: String,
    /// Vertex index in level `k − 1`.
    pub init: usize,
    /// Vertex index in level `k`.
    pub term: usize,
}

#[derive(Debug, Clone)]
pub struct BratteliDiagram {
    levels: Vec<Vec<String>>,
    // edges[k] joins level k-1 to level k; edges[0] is always empty
    edges: Vec<Vec<BratteliEdge>>,
}

impl BratteliDiagram {
    pub fn new(levels: Vec<Vec<String>>) -> Result<Self> {
        if levels.is_empty() || levels[0].is_empty() {
            return Err(Error::Empty("Bratteli diagram needs a nonempty level 0"));
        }
        for (k, vs) in levels.iter().enumerate() {
            let mut seen = HashMap::new();
            for v in vs {
                if seen.insert(v.as_str(), ()).is_some() {
                    return Err(Error::Structural(format!("vertex `{v}` repeated at level {k}")));
                }
            }
        }
        let edges = vec![Vec::new(); levels.len()];
        Ok(BratteliDiagram { levels, edges })
    }

    /// Adds an edge of `E_k` from vertex `init` of level `k − 1` to vertex
    /// `term` of level `k`.
    pub fn add_edge(&mut self, k: usize, name: &str, init: usize, term: usize) -> Result<()> {
        if k == 0 || k >= self.levels.len() {
            return Err(Error::Precondition(format!("edge level {k} outside 1..={}", self.top())));
        }
        if init >= self.levels[k - 1].len() {
            return Err(Error::IndexOutOfRange {
                what: "initial vertex",
                index: init,
                size: self.levels[k - 1].len(),
            });
        }
        if term >= self.levels[k].len() {
            return Err(Error::IndexOutOfRange {
                what: "terminal vertex",
                index: term,
                size: self.levels[k].len(),
            });
        }
        if self.edges[k].iter().any(|e| e.name == name) {
            return Err(Error::Structural(format!("edge `{name}` repeated at level {k}")));
        }
        self.edges[k].push(BratteliEdge {
            name: name.to_string(),
            init,
            term,
        });
        Ok(())
    }

    /// One vertex per level and two parallel edges between consecutive
    /// levels: `2^k` paths reach level `k`.
    pub fn dyadic(top: usize) -> Self {
        let levels = (0..=top).map(|k| vec![format!("v{k}")]).collect();
        let mut b = BratteliDiagram::new(levels).expect("nonempty");
        for k in 1..=top {
            b.add_edge(k, &format!("a{k}"), 0, 0).expect("valid edge");
            b.add_edge(k, &format!("b{k}"), 0, 0).expect("valid edge");
        }
        b
    }

    pub fn top(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, k: usize) -> &[String] {
        &self.levels[k]
    }

    pub fn edges(&self, k: usize) -> &[BratteliEdge] {
        &self.edges[k]
    }

    /// Vertices of level `k` with no incoming edge (all of level 0).
    pub fn sources(&self, k: usize) -> Vec<usize> {
        (0..self.levels[k].len())
            .filter(|&v| k == 0 || self.edges[k].iter().all(|e| e.term != v))
            .collect()
    }

    /// Paths from sources at levels `≤ k` to level `k`, grouped by their
    /// terminal vertex.
    fn paths_to(&self, k: usize) -> Vec<Vec<AfPath>> {
        let mut at: Vec<Vec<AfPath>> = vec![Vec::new(); self.levels[0].len()];
        for (v, paths) in at.iter_mut().enumerate() {
            paths.push(AfPath {
                start_level: 0,
                source: v,
                symbols: Vec::new(),
                terminal: v,
            });
        }
        for level in 1..=k {
            let mut next: Vec<Vec<AfPath>> = vec![Vec::new(); self.levels[level].len()];
            for (ei, e) in self.edges[level].iter().enumerate() {
                for p in &at[e.init] {
                    let mut symbols = p.symbols.clone();
                    symbols.push(Some(ei));
                    next[e.term].push(AfPath {
                        symbols,
                        terminal: e.term,
                        ..p.clone()
                    });
                }
            }
            for s in self.sources(level) {
                next[s].push(AfPath {
                    start_level: level,
                    source: s,
                    symbols: vec![None; level],
                    terminal: s,
                });
            }
            at = next;
        }
        at
    }

    /// `w_k = |S_{≤k}(B) E V_k|` for `k = 1..=m`.
    pub fn default_weights(&self, m: usize) -> Result<Vec<u64>> {
        if m > self.top() {
            return Err(Error::Precondition(format!("level {m} above top level {}", self.top())));
        }
        Ok((1..=m)
            .map(|k| self.paths_to(k).iter().map(|ps| ps.len() as u64).sum())
            .collect())
    }

    /// Parses `level <k> <vertex>...` then `bedge <k> <name> <init> <term>`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut levels: Vec<Vec<String>> = Vec::new();
        let mut pending = Vec::new();
        for (i, line) in data_lines(text) {
            let tok: Vec<&str> = line.split_whitespace().collect();
            match tok.as_slice() {
                ["level", k, vs @ ..] => {
                    let k: usize = k.parse().map_err(|_| Error::parse(i, "bad level index"))?;
                    if k != levels.len() {
                        return Err(Error::parse(i, format!("expected level {}", levels.len())));
                    }
                    if !pending.is_empty() {
                        return Err(Error::parse(i, "`level` after `bedge`"));
                    }
                    levels.push(vs.iter().map(|s| s.to_string()).collect());
                }
                ["bedge", k, name, a, b] => {
                    let k: usize = k.parse().map_err(|_| Error::parse(i, "bad level index"))?;
                    pending.push((i, k, name.to_string(), a.to_string(), b.to_string()));
                }
                _ => return Err(Error::parse(i, format!("unexpected line `{line}`"))),
            }
        }
        let mut b = BratteliDiagram::new(levels)?;
        for (i, k, name, a, t) in pending {
            if k == 0 || k > b.top() {
                return Err(Error::parse(i, format!("edge level {k} outside 1..={}", b.top())));
            }
            let find = |lvl: usize, v: &str| {
                b.levels[lvl]
                    .iter()
                    .position(|x| x == v)
                    .ok_or_else(|| Error::parse(i, format!("no vertex `{v}` at level {lvl}")))
            };
            let (init, term) = (find(k - 1, &a)?, find(k, &t)?);
            b.add_edge(k, &name, init, term).map_err(|e| Error::parse(i, e.to_string()))?;
        }
        Ok(b)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, vs) in self.levels.iter().enumerate() {
            writeln!(out, "level {k} {}", vs.join(" ")).unwrap();
        }
        for k in 1..self.levels.len() {
            for e in &self.edges[k] {
                writeln!(out, "bedge {k} {} {} {}", e.name, self.levels[k - 1][e.init], self.levels[k][e.term]).unwrap();
            }
        }
        out
    }
}

/// A path from a source to the truncation level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AfPath {
    pub start_level: usize,
    pub source: usize,
    /// Edge index within `E_k` at position `k − 1`, `None` below the start.
    pub symbols: Vec<Option<usize>>,
    pub terminal: usize,
}

/// The AF groupoid truncated at level `M`: pairs of paths with a common
/// terminal vertex.
#[derive(Debug, Clone)]
pub struct AfTruncation {
    level: usize,
    paths: Vec<AfPath>,
    pairs: Vec<(usize, usize)>,
    groupoid: FiniteGroupoid,
    default_weights: Vec<u64>,
    next_weight: Option<u64>,
}

pub fn af_groupoid_truncation(b: &BratteliDiagram, m: usize) -> Result<AfTruncation> {
    if m > b.top() {
        return Err(Error::Precondition(format!("level {m} above top level {}", b.top())));
    }
    let grouped = b.paths_to(m);
    let paths: Vec<AfPath> = grouped.iter().flatten().cloned().collect();
    if paths.is_empty() {
        return Err(Error::Empty("no paths reach the truncation level"));
    }
    let mut pairs = Vec::new();
    let mut offset = 0;
    for class in &grouped {
        for i in 0..class.len() {
            for j in 0..class.len() {
                pairs.push((offset + i, offset + j));
            }
        }
        offset += class.len();
    }
    let index: HashMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(a, &p)| (p, a)).collect();
    let n = pairs.len();
    let src: Vec<usize> = pairs.iter().map(|&(_, j)| index[&(j, j)]).collect();
    let rng: Vec<usize> = pairs.iter().map(|&(i, _)| index[&(i, i)]).collect();
    let inv: Vec<usize> = pairs.iter().map(|&(i, j)| index[&(j, i)]).collect();
    let units: Vec<usize> = (0..paths.len()).map(|i| index[&(i, i)]).collect();
    let mut comp = Vec::new();
    let mut by_first: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for (a, &(i, j)) in pairs.iter().enumerate() {
        by_first.entry(i).or_default().push((a, j));
    }
    for (a, &(i, j)) in pairs.iter().enumerate() {
        for &(c, k) in &by_first[&j] {
            comp.push((a, c, index[&(i, k)]));
        }
    }
    let groupoid = FiniteGroupoid::from_tables(n, units, src, rng, inv, comp)?;
    let default_weights = b.default_weights(m)?;
    let next_weight = (m < b.top()).then(|| b.default_weights(m + 1).expect("level exists")[m]);
    Ok(AfTruncation {
        level: m,
        paths,
        pairs,
        groupoid,
        default_weights,
        next_weight,
    })
}

impl AfTruncation {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn groupoid(&self) -> &FiniteGroupoid {
        &self.groupoid
    }

    pub fn paths(&self) -> &[AfPath] {
        &self.paths
    }

    /// Element `a` as the pair of path indices `(μ, λ)`.
    pub fn pair(&self, a: usize) -> (usize, usize) {
        self.pairs[a]
    }

    pub fn default_weights(&self) -> &[u64] {
        &self.default_weights
    }

    fn disagreement(&self, a: usize, weights: &[u64]) -> u64 {
        let (i, j) = self.pairs[a];
        let (x, y) = (&self.paths[i].symbols, &self.paths[j].symbols);
        (0..self.level).filter(|&k| x[k] != y[k]).map(|k| weights[k]).sum()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AfLength {
    pub length: LengthFunction,
    pub weights: Vec<u64>,
    /// The default weights were not strictly increasing, so the 0/1 length
    /// (zero on units, one elsewhere) is used.
    pub fallback: bool,
}

fn strictly_increasing(w: &[u64]) -> bool {
    w.windows(2).all(|p| p[0] < p[1])
}

/// `l(μ, λ) = Σ_k w_k ε(μ_k, λ_k)`, with default weights unless given.
pub fn af_length(t: &AfTruncation, weights: Option<&[u64]>) -> Result<AfLength> {
    let g = &t.groupoid;
    if let Some(w) = weights {
        if w.len() != t.level {
            return Err(Error::Precondition(format!("{} weights given for {} levels", w.len(), t.level)));
        }
        if let Some(k) = w.iter().position(|&x| x == 0) {
            return Err(Error::Domain(format!("weight at level {} is not positive", k + 1)));
        }
        return Ok(AfLength {
            length: LengthFunction::from_fn(g, |a| t.disagreement(a, w) as f64),
            weights: w.to_vec(),
            fallback: false,
        });
    }
    let w = t.default_weights.clone();
    if strictly_increasing(&w) {
        Ok(AfLength {
            length: LengthFunction::from_fn(g, |a| t.disagreement(a, &w) as f64),
            weights: w,
            fallback: false,
        })
    } else {
        Ok(AfLength {
            length: LengthFunction::from_fn(g, |a| if g.is_unit(a) { 0.0 } else { 1.0 }),
            weights: w,
            fallback: true,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AfBall {
    pub unit: usize,
    pub count: usize,
    pub bound: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AfBallReport {
    pub radius: f64,
    pub balls: Vec<AfBall>,
    pub fallback: bool,
    /// The true groupoid may have more elements within this radius than
    /// the truncation shows.
    pub radius_guard: bool,
    pub pass: bool,
}

/// Counts `|{x : l(x, y) ≤ R}|` per unit `y` against `w_m` with `m` the
/// largest level whose weight is at most `R` (1 if there is none).
pub fn af_ball_check(t: &AfTruncation, r: f64, exec: Exec) -> Result<AfBallReport> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("radius {r} is negative")));
    }
    let len = af_length(t, None)?;
    let g = &t.groupoid;
    let bound = if len.fallback {
        None
    } else {
        Some(
            len.weights
                .iter()
                .take_while(|&&w| (w as f64) <= r)
                .last()
                .copied()
                .unwrap_or(1),
        )
    };
    let balls = par::map(exec, g.units(), |&u| {
        let count = g.range_fiber(u).iter().filter(|&&a| len.length.get(a) <= r).count();
        let bound = bound.unwrap_or(if r < 1.0 { 1 } else { g.range_fiber(u).len() as u64 });
        AfBall { unit: u, count, bound }
    });
    let pass = balls.iter().all(|b| b.count as u64 <= b.bound);
    let radius_guard = !len.fallback && t.next_weight.is_some_and(|w| r >= w as f64);
    Ok(AfBallReport {
        radius: r,
        balls,
        fallback: len.fallback,
        radius_guard,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{validate_groupoid, validate_length};

    #[test]
    fn small_truncations() {
        let mut chain = BratteliDiagram::new(vec![vec!["a".into()], vec!["b".into()], vec!["c".into()]]).unwrap();
        chain.add_edge(1, "x", 0, 0).unwrap();
        chain.add_edge(2, "y", 0, 0).unwrap();
        let t = af_groupoid_truncation(&chain, 2).unwrap();
        assert_eq!(t.paths().len(), 1);
        assert_eq!(t.groupoid().n_elements(), 1);

        let mut two = BratteliDiagram::new(vec![vec!["v".into()], vec!["w".into()]]).unwrap();
        two.add_edge(1, "p", 0, 0).unwrap();
        two.add_edge(1, "q", 0, 0).unwrap();
        assert_eq!(af_groupoid_truncation(&two, 1).unwrap().groupoid().n_elements(), 4);

        let d = af_groupoid_truncation(&BratteliDiagram::dyadic(3), 3).unwrap();
        assert_eq!(d.paths().len(), 8);
        assert_eq!(d.groupoid().n_elements(), 64);
        assert!(validate_groupoid(d.groupoid()).ok);
        assert!(af_groupoid_truncation(&BratteliDiagram::dyadic(3), 4).is_err());
    }

    #[test]
    fn dyadic_length() {
        let t = af_groupoid_truncation(&BratteliDiagram::dyadic(2), 2).unwrap();
        let l = af_length(&t, None).unwrap();
        assert!(!l.fallback);
        assert_eq!(l.weights, vec![2, 4]);
        assert!(validate_length(t.groupoid(), &l.length, 0.0).unwrap().ok);
        for a in 0..t.groupoid().n_elements() {
            let (i, j) = t.pair(a);
            let (x, y) = (&t.paths()[i].symbols, &t.paths()[j].symbols);
            let want = match (x[0] != y[0], x[1] != y[1]) {
                (false, false) => 0.0,
                (true, false) => 2.0,
                (false, true) => 4.0,
                (true, true) => 6.0,
            };
            assert_eq!(l.length.get(a), want);
        }
        assert!(af_length(&t, Some(&[1, 0])).is_err());
    }

    #[test]
    fn late_sources_are_padded() {
        let levels = vec![vec!["a".to_string()], vec!["b".to_string(), "s".to_string()], vec!["c".to_string()]];
        let mut b = BratteliDiagram::new(levels).unwrap();
        b.add_edge(1, "x", 0, 0).unwrap();
        b.add_edge(2, "y", 0, 0).unwrap();
        b.add_edge(2, "z", 1, 0).unwrap();
        assert_eq!(b.sources(1), vec![1]);
        let t = af_groupoid_truncation(&b, 2).unwrap();
        assert_eq!(t.paths().len(), 2);
        let padded = t.paths().iter().find(|p| p.start_level == 1).unwrap();
        assert_eq!(padded.symbols, vec![None, Some(1)]);
        // w_1 counts the length-zero path at the level-1 source
        assert_eq!(t.default_weights(), &[2, 2]);
        let l = af_length(&t, None).unwrap();
        assert!(l.fallback);
        assert!(validate_length(t.groupoid(), &l.length, 0.0).unwrap().ok);
    }

    #[test]
    fn ball_bounds() {
        let t = af_groupoid_truncation(&BratteliDiagram::dyadic(3), 3).unwrap();
        let zero = af_ball_check(&t, 0.0, Exec::Sequential).unwrap();
        assert!(zero.pass && zero.balls.iter().all(|b| b.count == 1));
        let two = af_ball_check(&t, 2.0, Exec::Parallel).unwrap();
        assert!(two.pass && two.balls.iter().all(|b| b.count <= 2 && b.bound == 2));
        let all = af_ball_check(&t, 14.0, Exec::Sequential).unwrap();
        assert!(all.balls.iter().all(|b| b.count == 8));
        assert!(!all.radius_guard);
        let partial = af_groupoid_truncation(&BratteliDiagram::dyadic(3), 2).unwrap();
        assert!(af_ball_check(&partial, 8.0, Exec::Sequential).unwrap().radius_guard);
        assert!(!af_ball_check(&partial, 7.0, Exec::Sequential).unwrap().radius_guard);
    }

    #[test]
    fn text_round_trip() {
        let b = BratteliDiagram::dyadic(2);
        let back = BratteliDiagram::parse(&b.to_text()).unwrap();
        assert_eq!(back.to_text(), b.to_text());
        assert!(matches!(
            BratteliDiagram::parse("level 0 v\nlevel 1 w\nbedge 1 e v nope"),
            Err(Error::Parse { line: 3, .. })
        ));
    }
}
