//! Finite groupoids given by explicit tables, their standard constructions,
//! and length functions.
//!
//! Elements are dense indices `0..n`. Units are ordinary elements with
//! `src(u) = rng(u) = inv(u) = u`. Composition `comp(g, h)` is defined iff
//! `src(g) == rng(h)` and is stored sparsely.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One failed axiom together with the elements that witness it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub axiom: &'static str,
    pub witness: Vec<usize>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn from_violations(violations: Vec<Violation>) -> Self {
        ValidationReport {
            ok: violations.is_empty(),
            violations,
        }
    }

    pub fn has(&self, axiom: &str) -> bool {
        self.violations.iter().any(|v| v.axiom == axiom)
    }
}

#[derive(Debug, Clone)]
pub struct FiniteGroupoid {
    units: Vec<usize>,
    src: Vec<usize>,
    rng: Vec<usize>,
    inv: Vec<usize>,
    comp: HashMap<(usize, usize), usize>,
    is_unit: Vec<bool>,
    source_fibers: Vec<Vec<usize>>,
    range_fibers: Vec<Vec<usize>>,
}

/// JSON wire form of a [`FiniteGroupoid`].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GroupoidFile {
    pub n_elements: usize,
    pub units: Vec<usize>,
    pub src: Vec<usize>,
    pub rng: Vec<usize>,
    pub inv: Vec<usize>,
    pub comp: Vec<[usize; 3]>,
}

fn check_index(what: &'static str, index: usize, size: usize) -> Result<()> {
    if index >= size {
        Err(Error::IndexOutOfRange { what, index, size })
    } else {
        Ok(())
    }
}

impl FiniteGroupoid {
    /// Builds a groupoid from raw tables, checking only that every index is
    /// in range. Axioms are checked by [`validate_groupoid`].
    pub fn from_tables(
        n_elements: usize,
        units: Vec<usize>,
        src: Vec<usize>,
        rng: Vec<usize>,
        inv: Vec<usize>,
        comp: impl IntoIterator<Item = (usize, usize, usize)>,
    ) -> Result<Self> {
        if n_elements == 0 {
            return Err(Error::Empty("groupoid has no elements"));
        }
        for (name, table) in [("src", &src), ("rng", &rng), ("inv", &inv)] {
            if table.len() != n_elements {
                return Err(Error::Structural(format!(
                    "{name} table has {} entries, expected {n_elements}",
                    table.len()
                )));
            }
        }
        let mut is_unit = vec![false; n_elements];
        for &u in &units {
            check_index("unit", u, n_elements)?;
            if is_unit[u] {
                return Err(Error::Structural(format!("unit {u} listed twice")));
            }
            is_unit[u] = true;
        }
        for g in 0..n_elements {
            check_index("src", src[g], n_elements)?;
            check_index("rng", rng[g], n_elements)?;
            check_index("inv", inv[g], n_elements)?;
        }
        let mut table = HashMap::new();
        for (g, h, gh) in comp {
            check_index("comp", g, n_elements)?;
            check_index("comp", h, n_elements)?;
            check_index("comp", gh, n_elements)?;
            if table.insert((g, h), gh).is_some() {
                return Err(Error::Structural(format!("comp({g},{h}) given twice")));
            }
        }
        let mut units = units;
        units.sort_unstable();
        let mut source_fibers = vec![Vec::new(); n_elements];
        let mut range_fibers = vec![Vec::new(); n_elements];
        for g in 0..n_elements {
            source_fibers[src[g]].push(g);
            range_fibers[rng[g]].push(g);
        }
        Ok(FiniteGroupoid {
            units,
            src,
            rng,
            inv,
            comp: table,
            is_unit,
            source_fibers,
            range_fibers,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.src.len()
    }

    pub fn units(&self) -> &[usize] {
        &self.units
    }

    pub fn is_unit(&self, g: usize) -> bool {
        self.is_unit[g]
    }

    pub fn src(&self, g: usize) -> usize {
        self.src[g]
    }

    pub fn rng(&self, g: usize) -> usize {
        self.rng[g]
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inv[g]
    }

    pub fn comp(&self, g: usize, h: usize) -> Option<usize> {
        self.comp.get(&(g, h)).copied()
    }

    /// All stored composable pairs `(g, h, gh)`, sorted.
    pub fn composable_pairs(&self) -> Vec<(usize, usize, usize)> {
        let mut out: Vec<_> = self.comp.iter().map(|(&(g, h), &gh)| (g, h, gh)).collect();
        out.sort_unstable();
        out
    }

    /// Source fiber `G_u` in increasing index order.
    pub fn source_fiber(&self, u: usize) -> &[usize] {
        &self.source_fibers[u]
    }

    /// Range fiber `G^u` in increasing index order.
    pub fn range_fiber(&self, u: usize) -> &[usize] {
        &self.range_fibers[u]
    }

    /// Partition of the units into orbits (`u ~ v` iff some `g: u -> v`).
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n_elements()];
        let mut out = Vec::new();
        for &u in &self.units {
            if seen[u] {
                continue;
            }
            let mut orbit: Vec<usize> = self.source_fibers[u].iter().map(|&g| self.rng[g]).collect();
            orbit.sort_unstable();
            orbit.dedup();
            for &v in &orbit {
                seen[v] = true;
            }
            out.push(orbit);
        }
        out
    }

    pub fn to_file(&self) -> GroupoidFile {
        GroupoidFile {
            n_elements: self.n_elements(),
            units: self.units.clone(),
            src: self.src.clone(),
            rng: self.rng.clone(),
            inv: self.inv.clone(),
            comp: self
                .composable_pairs()
                .into_iter()
                .map(|(g, h, gh)| [g, h, gh])
                .collect(),
        }
    }

    pub fn from_file(file: &GroupoidFile) -> Result<Self> {
        FiniteGroupoid::from_tables(
            file.n_elements,
            file.units.clone(),
            file.src.clone(),
            file.rng.clone(),
            file.inv.clone(),
            file.comp.iter().map(|t| (t[0], t[1], t[2])),
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GroupoidFile = serde_json::from_str(text)?;
        FiniteGroupoid::from_file(&file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("groupoid file serializes")
    }
}

/// Checks every groupoid axiom exhaustively and lists each failure with a
/// witness.
pub fn validate_groupoid(g: &FiniteGroupoid) -> ValidationReport {
    let n = g.n_elements();
    let mut v = Vec::new();
    let mut push = |axiom: &'static str, witness: Vec<usize>| v.push(Violation { axiom, witness });

    for &u in g.units() {
        if g.src(u) != u || g.rng(u) != u || g.inv(u) != u {
            push("unit-fixed", vec![u]);
        }
    }
    for x in 0..n {
        if !g.is_unit(g.src(x)) {
            push("src-is-unit", vec![x]);
        }
        if !g.is_unit(g.rng(x)) {
            push("rng-is-unit", vec![x]);
        }
        if g.inv(g.inv(x)) != x {
            push("inv-involution", vec![x]);
        }
        if g.src(g.inv(x)) != g.rng(x) || g.rng(g.inv(x)) != g.src(x) {
            push("inv-swaps-ends", vec![x]);
        }
    }
    for (&(x, y), &xy) in &g.comp {
        if g.src(x) != g.rng(y) {
            push("comp-domain", vec![x, y]);
            continue;
        }
        if g.src(xy) != g.src(y) || g.rng(xy) != g.rng(x) {
            push("comp-ends", vec![x, y, xy]);
        }
    }
    for x in 0..n {
        for &h in g.range_fiber(g.src(x)) {
            if g.comp(x, h).is_none() {
                push("comp-missing", vec![x, h]);
            }
        }
        let (r, s, xi) = (g.rng(x), g.src(x), g.inv(x));
        if g.comp(r, x) != Some(x) {
            push("unit-left", vec![r, x]);
        }
        if g.comp(x, s) != Some(x) {
            push("unit-right", vec![x, s]);
        }
        if g.comp(x, xi) != Some(r) {
            push("inverse-right", vec![x]);
        }
        if g.comp(xi, x) != Some(s) {
            push("inverse-left", vec![x]);
        }
    }
    let mut triples: Vec<_> = g.comp.iter().map(|(&(x, y), &xy)| (x, y, xy)).collect();
    triples.sort_unstable();
    for (x, y, xy) in triples {
        for &z in g.range_fiber(g.src(y)) {
            let (Some(yz), Some(left)) = (g.comp(y, z), g.comp(xy, z)) else {
                continue;
            };
            if let Some(right) = g.comp(x, yz) {
                if left != right {
                    push("associativity", vec![x, y, z]);
                }
            }
        }
    }
    ValidationReport::from_violations(v)
}

/// The pair groupoid on `n` points; `(i, j)` has index `i * n + j`,
/// range `i` and source `j`.
pub fn pair_groupoid(n: usize) -> Result<FiniteGroupoid> {
    if n == 0 {
        return Err(Error::Empty("pair groupoid needs at least one point"));
    }
    let idx = |i: usize, j: usize| i * n + j;
    let mut src = Vec::with_capacity(n * n);
    let mut rng = Vec::with_capacity(n * n);
    let mut inv = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            src.push(idx(j, j));
            rng.push(idx(i, i));
            inv.push(idx(j, i));
        }
    }
    let units = (0..n).map(|i| idx(i, i)).collect();
    let comp = (0..n).flat_map(move |i| {
        (0..n).flat_map(move |j| (0..n).map(move |k| (idx(i, j), idx(j, k), idx(i, k))))
    });
    FiniteGroupoid::from_tables(n * n, units, src, rng, inv, comp)
}

/// A finite group given by its multiplication table.
#[derive(Debug, Clone)]
pub struct FiniteGroup {
    mul: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

impl FiniteGroup {
    /// Validates the table (closure, identity, inverses, associativity).
    pub fn from_table(mul: Vec<Vec<usize>>) -> Result<Self> {
        let n = mul.len();
        if n == 0 {
            return Err(Error::Empty("group has no elements"));
        }
        for row in &mul {
            if row.len() != n {
                return Err(Error::Structural("group table is not square".into()));
            }
            for &c in row {
                check_index("group element", c, n)?;
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| mul[e][a] == a && mul[a][e] == a))
            .ok_or_else(|| Error::Precondition("group table has no identity".into()))?;
        let mut inverse = Vec::with_capacity(n);
        for a in 0..n {
            let b = (0..n)
                .find(|&b| mul[a][b] == identity && mul[b][a] == identity)
                .ok_or_else(|| Error::Precondition(format!("element {a} has no inverse")))?;
            inverse.push(b);
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                        return Err(Error::Precondition(format!(
                            "group table not associative at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        Ok(FiniteGroup {
            mul,
            identity,
            inverse,
        })
    }

    /// `Z/n` with elements `0..n` under addition.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty("cyclic group of order zero"));
        }
        let mul = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        FiniteGroup::from_table(mul)
    }

    /// Direct product; `(a, b)` has index `a * |H| + b`.
    pub fn product(&self, other: &FiniteGroup) -> FiniteGroup {
        let (n, m) = (self.order(), other.order());
        let mul = (0..n * m)
            .map(|x| {
                (0..n * m)
                    .map(|y| self.mul(x / m, y / m) * m + other.mul(x % m, y % m))
                    .collect()
            })
            .collect();
        FiniteGroup {
            mul,
            identity: self.identity * m + other.identity,
            inverse: (0..n * m)
                .map(|x| self.inverse[x / m] * m + other.inverse[x % m])
                .collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.mul.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverse[a]
    }
}

/// The transformation groupoid `X ⋊ Γ` for an action `act[γ][x] = γ·x`.
///
/// Element `(x, γ)` has index `x * |Γ| + γ`, source `(x, e)` and range
/// `(γ·x, e)`; `(γ·x, τ)(x, γ) = (x, τγ)`.
pub fn transformation_groupoid(
    n_points: usize,
    group: &FiniteGroup,
    act: &[Vec<usize>],
) -> Result<FiniteGroupoid> {
    if n_points == 0 {
        return Err(Error::Empty("transformation groupoid over empty space"));
    }
    let order = group.order();
    if act.len() != order || act.iter().any(|row| row.len() != n_points) {
        return Err(Error::Structural("action table has wrong shape".into()));
    }
    for row in act {
        for &y in row {
            check_index("action image", y, n_points)?;
        }
    }
    let e = group.identity();
    for x in 0..n_points {
        if act[e][x] != x {
            return Err(Error::Precondition(format!(
                "identity moves point {x} (witness ({e},{e},{x}))"
            )));
        }
        for a in 0..order {
            for b in 0..order {
                if act[a][act[b][x]] != act[group.mul(a, b)][x] {
                    return Err(Error::Precondition(format!(
                        "not an action: witness ({a},{b},{x})"
                    )));
                }
            }
        }
    }
    let idx = |x: usize, g: usize| x * order + g;
    let n = n_points * order;
    let mut src = vec![0; n];
    let mut rng = vec![0; n];
    let mut inv = vec![0; n];
    let mut comp = Vec::new();
    for x in 0..n_points {
        for g in 0..order {
            let gx = act[g][x];
            src[idx(x, g)] = idx(x, e);
            rng[idx(x, g)] = idx(gx, e);
            inv[idx(x, g)] = idx(gx, group.inverse(g));
            for t in 0..order {
                comp.push((idx(gx, t), idx(x, g), idx(x, group.mul(t, g))));
            }
        }
    }
    let units = (0..n_points).map(|x| idx(x, e)).collect();
    FiniteGroupoid::from_tables(n, units, src, rng, inv, comp)
}

/// A group viewed as a one-unit groupoid.
pub fn group_groupoid(group: &FiniteGroup) -> Result<FiniteGroupoid> {
    let act: Vec<Vec<usize>> = vec![vec![0]; group.order()];
    transformation_groupoid(1, group, &act)
}

/// Disjoint union; elements of `b` are shifted by `a.n_elements()`.
pub fn disjoint_union(a: &FiniteGroupoid, b: &FiniteGroupoid) -> FiniteGroupoid {
    let off = a.n_elements();
    let shift = |v: &[usize]| v.iter().map(|&x| x + off).collect::<Vec<_>>();
    let mut units = a.units.clone();
    units.extend(shift(&b.units));
    let cat = |x: &[usize], y: &[usize]| {
        let mut out = x.to_vec();
        out.extend(shift(y));
        out
    };
    let comp = a
        .composable_pairs()
        .into_iter()
        .chain(
            b.composable_pairs()
                .into_iter()
                .map(|(g, h, gh)| (g + off, h + off, gh + off)),
        );
    FiniteGroupoid::from_tables(
        off + b.n_elements(),
        units,
        cat(&a.src, &b.src),
        cat(&a.rng, &b.rng),
        cat(&a.inv, &b.inv),
        comp,
    )
    .expect("disjoint union of valid tables is well-formed")
}

/// Cartesian product; `(g, h)` has index `g * |b| + h`.
pub fn product(a: &FiniteGroupoid, b: &FiniteGroupoid) -> FiniteGroupoid {
    let m = b.n_elements();
    let n = a.n_elements() * m;
    let idx = |g: usize, h: usize| g * m + h;
    let mut src = vec![0; n];
    let mut rng = vec![0; n];
    let mut inv = vec![0; n];
    for g in 0..a.n_elements() {
        for h in 0..m {
            src[idx(g, h)] = idx(a.src(g), b.src(h));
            rng[idx(g, h)] = idx(a.rng(g), b.rng(h));
            inv[idx(g, h)] = idx(a.inv(g), b.inv(h));
        }
    }
    let units = a
        .units()
        .iter()
        .flat_map(|&u| b.units().iter().map(move |&v| idx(u, v)))
        .collect();
    let pa = a.composable_pairs();
    let pb = b.composable_pairs();
    let comp: Vec<_> = pa
        .iter()
        .flat_map(|&(g1, g2, g12)| {
            pb.iter()
                .map(move |&(h1, h2, h12)| (idx(g1, h1), idx(g2, h2), idx(g12, h12)))
        })
        .collect();
    FiniteGroupoid::from_tables(n, units, src, rng, inv, comp)
        .expect("product of valid tables is well-formed")
}

/// Reduction `G|_U`, returned with the old index of each new element.
pub fn restrict_with_map(g: &FiniteGroupoid, units: &[usize]) -> Result<(FiniteGroupoid, Vec<usize>)> {
    if units.is_empty() {
        return Err(Error::Empty("restriction to an empty unit set"));
    }
    let mut keep_unit = vec![false; g.n_elements()];
    for &u in units {
        check_index("unit", u, g.n_elements())?;
        if !g.is_unit(u) {
            return Err(Error::Precondition(format!("element {u} is not a unit")));
        }
        keep_unit[u] = true;
    }
    let old: Vec<usize> = (0..g.n_elements())
        .filter(|&x| keep_unit[g.src(x)] && keep_unit[g.rng(x)])
        .collect();
    let mut new_of = vec![usize::MAX; g.n_elements()];
    for (i, &x) in old.iter().enumerate() {
        new_of[x] = i;
    }
    let map = |x: usize| new_of[x];
    let comp: Vec<_> = g
        .composable_pairs()
        .into_iter()
        .filter(|&(x, y, _)| new_of[x] != usize::MAX && new_of[y] != usize::MAX)
        .map(|(x, y, xy)| (map(x), map(y), map(xy)))
        .collect();
    let new_units = g.units().iter().filter(|&&u| keep_unit[u]).map(|&u| map(u)).collect();
    let h = FiniteGroupoid::from_tables(
        old.len(),
        new_units,
        old.iter().map(|&x| map(g.src(x))).collect(),
        old.iter().map(|&x| map(g.rng(x))).collect(),
        old.iter().map(|&x| map(g.inv(x))).collect(),
        comp,
    )?;
    Ok((h, old))
}

pub fn restrict(g: &FiniteGroupoid, units: &[usize]) -> Result<FiniteGroupoid> {
    restrict_with_map(g, units).map(|(h, _)| h)
}

/// A nonnegative weight on every element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LengthFunction {
    values: Vec<f64>,
}

impl LengthFunction {
    pub fn new(values: Vec<f64>) -> Self {
        LengthFunction { values }
    }

    pub fn zero(n: usize) -> Self {
        LengthFunction { values: vec![0.0; n] }
    }

    pub fn from_fn(g: &FiniteGroupoid, f: impl Fn(usize) -> f64) -> Self {
        LengthFunction {
            values: (0..g.n_elements()).map(f).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, g: usize) -> f64 {
        self.values[g]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Length on a disjoint union: each summand keeps its own length.
    pub fn disjoint_union(&self, other: &LengthFunction) -> LengthFunction {
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        LengthFunction { values }
    }

    /// Length on a product: `l(g, h) = l_1(g) + l_2(h)`.
    pub fn product(&self, other: &LengthFunction) -> LengthFunction {
        let values = self
            .values
            .iter()
            .flat_map(|&a| other.values.iter().map(move |&b| a + b))
            .collect();
        LengthFunction { values }
    }

    /// Pulls the length back along the element map of a restriction.
    pub fn pull_back(&self, old_indices: &[usize]) -> LengthFunction {
        LengthFunction {
            values: old_indices.iter().map(|&x| self.values[x]).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.values).expect("length serializes")
    }
}

/// Checks the length axioms; subadditivity uses absolute tolerance `tol`.
pub fn validate_length(g: &FiniteGroupoid, l: &LengthFunction, tol: f64) -> Result<ValidationReport> {
    if l.len() != g.n_elements() {
        return Err(Error::Structural(format!(
            "length has {} values for {} elements",
            l.len(),
            g.n_elements()
        )));
    }
    let mut v = Vec::new();
    for x in 0..g.n_elements() {
        let lx = l.get(x);
        if !lx.is_finite() || lx < 0.0 {
            v.push(Violation {
                axiom: "nonnegative",
                witness: vec![x],
            });
        }
        if g.is_unit(x) && lx != 0.0 {
            v.push(Violation {
                axiom: "zero-on-units",
                witness: vec![x],
            });
        }
        if l.get(g.inv(x)) != lx {
            v.push(Violation {
                axiom: "symmetric",
                witness: vec![x, g.inv(x)],
            });
        }
    }
    for (x, y, xy) in g.composable_pairs() {
        if l.get(xy) > l.get(x) + l.get(y) + tol {
            v.push(Violation {
                axiom: "subadditive",
                witness: vec![x, y],
            });
        }
    }
    Ok(ValidationReport::from_violations(v))
}

/// Word length w.r.t. a symmetric generating set of non-units.
pub fn word_length(g: &FiniteGroupoid, generators: &[usize]) -> Result<LengthFunction> {
    let n = g.n_elements();
    let mut in_set = vec![false; n];
    for &s in generators {
        check_index("generator", s, n)?;
        if g.is_unit(s) {
            return Err(Error::Precondition(format!("generator {s} is a unit")));
        }
        in_set[s] = true;
    }
    if let Some(&s) = generators.iter().find(|&&s| !in_set[g.inv(s)]) {
        return Err(Error::Precondition(format!(
            "generating set not symmetric: inverse of {s} missing"
        )));
    }
    let gens: Vec<usize> = {
        let set: HashSet<usize> = generators.iter().copied().collect();
        let mut v: Vec<_> = set.into_iter().collect();
        v.sort_unstable();
        v
    };
    let mut dist: Vec<Option<u64>> = (0..n).map(|x| g.is_unit(x).then_some(0)).collect();
    let mut queue = VecDeque::new();
    for &s in &gens {
        dist[s] = Some(1);
        queue.push_back(s);
    }
    while let Some(x) = queue.pop_front() {
        let d = dist[x].expect("queued elements have a distance");
        for &s in &gens {
            if let Some(xs) = g.comp(x, s) {
                if dist[xs].is_none() {
                    dist[xs] = Some(d + 1);
                    queue.push_back(xs);
                }
            }
        }
    }
    let unreachable: Vec<usize> = (0..n).filter(|&x| dist[x].is_none()).collect();
    if !unreachable.is_empty() {
        return Err(Error::Precondition(format!(
            "generating set does not generate; unreachable elements {unreachable:?}"
        )));
    }
    Ok(LengthFunction {
        values: dist.into_iter().map(|d| d.unwrap() as f64).collect(),
    })
}
