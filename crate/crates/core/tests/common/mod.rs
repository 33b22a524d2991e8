//! Shared models and independent oracles for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};

use ggl::bratteli::{af_groupoid_truncation, af_length, BratteliDiagram};
use ggl::coarse::ControlledSet;
use ggl::convolution::GroupoidFunction;
use ggl::graph::{graph_fiber_ball, BoundaryPath, DirectedGraph};
use ggl::groupoid::{
    disjoint_union, group_groupoid, pair_groupoid, product, restrict, transformation_groupoid, word_length, FiniteGroup,
};
use ggl::{FiniteGroupoid, LengthFunction};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Pair groupoid on `n` points with `l(i, j) = |i − j|`.
pub fn segment(n: usize) -> (FiniteGroupoid, LengthFunction) {
    let g = pair_groupoid(n).unwrap();
    let l = LengthFunction::from_fn(&g, |a| ((a / n) as f64 - (a % n) as f64).abs());
    (g, l)
}

/// `Z/n` with the word length of `{±1}`.
pub fn cyclic_word(n: usize) -> (FiniteGroupoid, LengthFunction) {
    let g = group_groupoid(&FiniteGroup::cyclic(n).unwrap()).unwrap();
    let gens: Vec<usize> = match n {
        1 => vec![],
        2 => vec![1],
        _ => vec![1, n - 1],
    };
    let l = word_length(&g, &gens).unwrap();
    (g, l)
}

/// A permutation of `0..m` whose cycle lengths divide `n`, so that
/// `γ ↦ π^γ` is an action of `Z/n`.
pub fn random_cyclic_action(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<Vec<usize>> {
    let divisors: Vec<usize> = (1..=n).filter(|d| n % d == 0).collect();
    let mut points: Vec<usize> = (0..m).collect();
    points.shuffle(rng);
    let mut perm: Vec<usize> = (0..m).collect();
    let mut i = 0;
    while i < m {
        let fits: Vec<usize> = divisors.iter().copied().filter(|&d| d <= m - i).collect();
        let d = fits[rng.random_range(0..fits.len())];
        for j in 0..d {
            perm[points[i + j]] = points[i + (j + 1) % d];
        }
        i += d;
    }
    let mut act = vec![(0..m).collect::<Vec<_>>()];
    for _ in 1..n {
        let last = act.last().unwrap();
        act.push(last.iter().map(|&x| perm[x]).collect());
    }
    act
}

/// `Z/n ⋉ X` with `l(x, γ) = |γ|` for the word length on `Z/n`.
pub fn transformation_model(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (FiniteGroupoid, LengthFunction, Vec<Vec<usize>>) {
    let group = FiniteGroup::cyclic(n).unwrap();
    let act = random_cyclic_action(rng, n, m);
    let g = transformation_groupoid(m, &group, &act).unwrap();
    let word = cyclic_word(n).1;
    let l = LengthFunction::from_fn(&g, |a| word.get(a % n));
    (g, l, act)
}

/// A random groupoid with at most 40 elements built from the library's
/// constructions.
pub fn random_groupoid(rng: &mut ChaCha8Rng) -> FiniteGroupoid {
    fn base(rng: &mut ChaCha8Rng) -> FiniteGroupoid {
        match rng.random_range(0..4) {
            0 => pair_groupoid(rng.random_range(1..=4)).unwrap(),
            1 => group_groupoid(&FiniteGroup::cyclic(rng.random_range(1..=6)).unwrap()).unwrap(),
            2 => {
                let n = rng.random_range(1..=4);
                let m = rng.random_range(1..=4);
                let act = random_cyclic_action(rng, n, m);
                transformation_groupoid(m, &FiniteGroup::cyclic(n).unwrap(), &act).unwrap()
            }
            _ => {
                let a = FiniteGroup::cyclic(2).unwrap();
                group_groupoid(&a.product(&FiniteGroup::cyclic(rng.random_range(1..=3)).unwrap())).unwrap()
            }
        }
    }
    loop {
        let a = base(rng);
        let g = match rng.random_range(0..4) {
            0 => a,
            1 => disjoint_union(&a, &base(rng)),
            2 => product(&a, &base(rng)),
            _ => {
                let units = a.units().to_vec();
                let keep: Vec<usize> = units.iter().copied().filter(|_| rng.random_bool(0.7)).collect();
                if keep.is_empty() {
                    a
                } else {
                    restrict(&a, &keep).unwrap()
                }
            }
        };
        if g.n_elements() <= 40 {
            return g;
        }
    }
}

/// A random length on a pair groupoid from a metric on its points.
pub fn random_pair_metric(rng: &mut ChaCha8Rng, n: usize) -> (FiniteGroupoid, LengthFunction) {
    let g = pair_groupoid(n).unwrap();
    let h: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..4.0)).collect();
    let gap = rng.random_range(0.1..1.0);
    let l = LengthFunction::from_fn(&g, |a| {
        let (i, j) = (a / n, a % n);
        if i == j {
            0.0
        } else {
            (h[i] - h[j]).abs() + gap
        }
    });
    (g, l)
}

pub fn random_function(rng: &mut ChaCha8Rng, n: usize, density: f64) -> GroupoidFunction {
    let mut f = GroupoidFunction::zero();
    for x in 0..n {
        if rng.random_bool(density) {
            f.set(x, c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        }
    }
    f
}

/// `f ∗ g` summed over composable pairs of the supports.
pub fn pairwise_convolve(g: &FiniteGroupoid, f: &GroupoidFunction, h: &GroupoidFunction) -> GroupoidFunction {
    let mut out = GroupoidFunction::zero();
    for (a, fa) in f.iter() {
        for (b, hb) in h.iter() {
            if let Some(ab) = g.comp(a, b) {
                out.add_at(ab, fa * hb);
            }
        }
    }
    out
}

pub fn pairwise_involution(g: &FiniteGroupoid, f: &GroupoidFunction) -> GroupoidFunction {
    GroupoidFunction::from_pairs(f.iter().map(|(x, z)| (g.inv(x), z.conj())))
}

/// Singular values by one-sided Jacobi rotations on the columns.
pub fn jacobi_singular_values(rows: usize, cols: usize, entry: impl Fn(usize, usize) -> Complex64) -> Vec<f64> {
    let mut a: Vec<Vec<Complex64>> = (0..cols).map(|j| (0..rows).map(|i| entry(i, j)).collect()).collect();
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = a[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = a[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = a[p].iter().zip(&a[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= 1e-17 * (alpha * beta).sqrt() {
                    continue;
                }
                off = off.max(g / (alpha * beta).sqrt());
                // rotate the phase away, then a real Jacobi rotation
                let phase = gamma / g;
                for z in a[q].iter_mut() {
                    *z /= phase;
                }
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..rows {
                    let (x, y) = (a[p][i], a[q][i]);
                    a[p][i] = x * cs - y * sn;
                    a[q][i] = x * sn + y * cs;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut s: Vec<f64> = a.iter().map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

/// The polynomial-growth models used by the rapid decay checks.
pub fn polynomial_models(rng: &mut ChaCha8Rng) -> Vec<(String, FiniteGroupoid, LengthFunction)> {
    let mut out = Vec::new();
    let (g, l) = segment(8);
    out.push(("segment-8".to_string(), g, l));
    let (g, l) = cyclic_word(10);
    out.push(("z10-word".to_string(), g, l));
    let t = DirectedGraph::toeplitz();
    for (name, base, radius) in [("toeplitz-loop", "path v cycle f", 6), ("toeplitz-sink", "path w", 8)] {
        let x = BoundaryPath::parse(&t, base).unwrap();
        let ball = graph_fiber_ball(&t, &x, radius).unwrap();
        out.push((name.to_string(), ball.groupoid(), ball.length()));
    }
    let af = af_groupoid_truncation(&BratteliDiagram::dyadic(3), 3).unwrap();
    out.push(("dyadic-af-3".to_string(), af.groupoid().clone(), af_length(&af, None).unwrap().length));
    let (g, l, _) = transformation_model(rng, 6, 5);
    out.push(("z6-on-5".to_string(), g, l));
    out
}

/// Radii `0..=⌈max l⌉`, so a fit over them bounds every ball.
pub fn covering_radii(l: &LengthFunction) -> Vec<u64> {
    (0..=(l.max_value().ceil() as u64).max(2)).collect()
}

/// First violated axiom of the composition table, by brute force.
pub fn axiom_violation(g: &FiniteGroupoid) -> Option<String> {
    let n = g.n_elements();
    let units: HashSet<usize> = g.units().iter().copied().collect();
    for x in 0..n {
        let (s, r, i) = (g.src(x), g.rng(x), g.inv(x));
        if !units.contains(&s) || !units.contains(&r) {
            return Some(format!("source or range of {x} is not a unit"));
        }
        if units.contains(&x) != (s == x && r == x) {
            return Some(format!("unit status of {x}"));
        }
        if g.comp(r, x) != Some(x) || g.comp(x, s) != Some(x) {
            return Some(format!("units do not act trivially on {x}"));
        }
        if g.comp(x, i) != Some(r) || g.comp(i, x) != Some(s) {
            return Some(format!("inverse of {x}"));
        }
        for y in 0..n {
            let xy = g.comp(x, y);
            if xy.is_some() != (s == g.rng(y)) {
                return Some(format!("composability of ({x},{y})"));
            }
            let Some(xy) = xy else { continue };
            if g.src(xy) != g.src(y) || g.rng(xy) != r {
                return Some(format!("source or range of {x}{y}"));
            }
            for z in 0..n {
                if let Some(yz) = g.comp(y, z) {
                    if g.comp(xy, z) != g.comp(x, yz) {
                        return Some(format!("associativity at ({x},{y},{z})"));
                    }
                }
            }
        }
    }
    None
}

/// A random directed graph; `acyclic` keeps every edge increasing.
pub fn random_graph(rng: &mut ChaCha8Rng, max_vertices: usize, max_edges: usize, acyclic: bool) -> DirectedGraph {
    let nv = rng.random_range(1..=max_vertices);
    let mut g = DirectedGraph::new();
    for v in 0..nv {
        g.add_vertex(&format!("v{v}")).unwrap();
    }
    let ne = rng.random_range(0..=max_edges);
    for e in 0..ne {
        let (mut a, mut b) = (rng.random_range(0..nv), rng.random_range(0..nv));
        if acyclic {
            if a == b {
                continue;
            }
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
        }
        g.add_edge(&format!("e{e}"), a, b).unwrap();
    }
    g
}

/// Polynomial growth via strongly connected components: every component
/// carries at most as many internal edges as vertices, i.e. it is a point
/// or a single cycle.
pub fn scc_polynomial(g: &DirectedGraph) -> bool {
    let nv = g.n_vertices();
    let mut reach = vec![vec![false; nv]; nv];
    for (v, row) in reach.iter_mut().enumerate() {
        row[v] = true;
    }
    for e in 0..g.n_edges() {
        reach[g.edge(e).src][g.edge(e).rng] = true;
    }
    for k in 0..nv {
        for i in 0..nv {
            for j in 0..nv {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    let comp = |v: usize| -> Vec<usize> { (0..nv).filter(|&u| reach[v][u] && reach[u][v]).collect() };
    (0..nv).all(|v| {
        let c = comp(v);
        let internal = (0..g.n_edges())
            .filter(|&e| c.contains(&g.edge(e).src) && c.contains(&g.edge(e).rng))
            .count();
        internal <= c.len()
    })
}

/// All edge sequences `α` with `|α| ≤ n` ending at `v`.
pub fn brute_paths(g: &DirectedGraph, v: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for p in &layer {
            let head = p.first().map_or(v, |&e| g.edge(e).src);
            for e in 0..g.n_edges() {
                if g.edge(e).rng == head {
                    let mut q = vec![e];
                    q.extend_from_slice(p);
                    next.push(q);
                }
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// `|B(m)|` for `m = 0..=n` over the boundary path `x`, counting distinct
/// elements `(α σ^k x, |α| − k, x)` over every representation with
/// `|α| + k ≤ m`. Two points with equal lag agree past position `n`, so
/// the key keeps the lag, the start vertex and the first `n + 1` edges.
pub fn brute_ball_profile(g: &DirectedGraph, x: &BoundaryPath, n: usize) -> Vec<usize> {
    let known = x.known_len().filter(|_| x.is_finite());
    let mut seen: BTreeMap<(i64, usize, Vec<Option<usize>>), usize> = BTreeMap::new();
    for k in 0..=n {
        if known.is_some_and(|len| k > len) {
            break;
        }
        let t = if k == 0 { x.root() } else { g.edge(x.edge_at(k - 1).unwrap()).rng };
        for alpha in brute_paths(g, t, n - k) {
            let start = alpha.first().map_or(t, |&e| g.edge(e).src);
            let point: Vec<Option<usize>> = (0..=n)
                .map(|p| if p < alpha.len() { Some(alpha[p]) } else { x.edge_at(p - alpha.len() + k) })
                .collect();
            let key = (alpha.len() as i64 - k as i64, start, point);
            let len = alpha.len() + k;
            let slot = seen.entry(key).or_insert(len);
            *slot = (*slot).min(len);
        }
    }
    let mut counts = vec![0usize; n + 1];
    for &len in seen.values() {
        counts[len] += 1;
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

/// A union of at most `n_max` random partial bijections on `n` points.
pub fn random_controlled_set(rng: &mut ChaCha8Rng, n: usize, n_max: usize) -> ControlledSet {
    let layers = rng.random_range(1..=n_max);
    let mut pairs = BTreeSet::new();
    for _ in 0..layers {
        let mut targets: Vec<usize> = (0..n).collect();
        targets.shuffle(rng);
        let density = rng.random_range(0.1..1.0);
        for (y, &x) in targets.iter().enumerate() {
            if rng.random_bool(density) {
                pairs.insert((x, y));
            }
        }
    }
    ControlledSet::new(n, pairs).unwrap()
}
