//! Finitely supported functions on a groupoid: convolution, twisted
//! convolution, involutions, 2-cocycles and the I / I^p / (p,k) norms.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::exact_sum;
use crate::groupoid::{FiniteGroupoid, LengthFunction, ValidationReport, Violation};
use crate::par::{self, Exec};

/// Partial composition structure shared by finite groupoids and the boxed
/// `Z^n` group model (where out-of-box sums are undefined).
pub trait PartialComposition: Sync {
    fn n_elements(&self) -> usize;
    fn src(&self, g: usize) -> usize;
    fn rng(&self, g: usize) -> usize;
    fn inv(&self, g: usize) -> usize;
    fn comp(&self, g: usize, h: usize) -> Option<usize>;
    fn source_fiber(&self, u: usize) -> &[usize];
    fn composable_pairs(&self) -> Vec<(usize, usize, usize)>;
}

impl PartialComposition for FiniteGroupoid {
    fn n_elements(&self) -> usize {
        FiniteGroupoid::n_elements(self)
    }
    fn src(&self, g: usize) -> usize {
        FiniteGroupoid::src(self, g)
    }
    fn rng(&self, g: usize) -> usize {
        FiniteGroupoid::rng(self, g)
    }
    fn inv(&self, g: usize) -> usize {
        FiniteGroupoid::inv(self, g)
    }
    fn comp(&self, g: usize, h: usize) -> Option<usize> {
        FiniteGroupoid::comp(self, g, h)
    }
    fn source_fiber(&self, u: usize) -> &[usize] {
        FiniteGroupoid::source_fiber(self, u)
    }
    fn composable_pairs(&self) -> Vec<(usize, usize, usize)> {
        FiniteGroupoid::composable_pairs(self)
    }
}

/// A complex function on group(oid) elements; zeros are never stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroupoidFunction {
    values: BTreeMap<usize, Complex64>,
}

impl GroupoidFunction {
    pub fn zero() -> Self {
        GroupoidFunction::default()
    }

    pub fn delta(g: usize) -> Self {
        GroupoidFunction::from_pairs([(g, Complex64::new(1.0, 0.0))])
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, Complex64)>) -> Self {
        let mut f = GroupoidFunction::zero();
        for (g, z) in pairs {
            f.add_at(g, z);
        }
        f
    }

    pub fn from_dense(values: &[Complex64]) -> Self {
        GroupoidFunction::from_pairs(values.iter().copied().enumerate())
    }

    /// Indicator function of a set of elements.
    pub fn indicator(elements: impl IntoIterator<Item = usize>) -> Self {
        let mut f = GroupoidFunction::zero();
        for g in elements {
            f.set(g, Complex64::new(1.0, 0.0));
        }
        f
    }

    pub fn units_indicator(g: &FiniteGroupoid) -> Self {
        GroupoidFunction::indicator(g.units().iter().copied())
    }

    pub fn get(&self, g: usize) -> Complex64 {
        self.values.get(&g).copied().unwrap_or_default()
    }

    pub fn set(&mut self, g: usize, z: Complex64) {
        if z == Complex64::default() {
            self.values.remove(&g);
        } else {
            self.values.insert(g, z);
        }
    }

    pub fn add_at(&mut self, g: usize, z: Complex64) {
        let sum = self.get(g) + z;
        self.set(g, sum);
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.values.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.values.iter().map(|(&g, &z)| (g, z))
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    pub fn to_dense(&self, n: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); n];
        for (g, z) in self.iter() {
            out[g] = z;
        }
        out
    }

    pub fn map(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        GroupoidFunction::from_pairs(self.iter().map(|(g, z)| (g, f(g, z))))
    }

    pub fn abs(&self) -> Self {
        self.map(|_, z| Complex64::new(z.norm(), 0.0))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|_, z| z * c)
    }

    pub fn add(&self, other: &GroupoidFunction) -> Self {
        let mut out = self.clone();
        for (g, z) in other.iter() {
            out.add_at(g, z);
        }
        out
    }

    pub fn sub(&self, other: &GroupoidFunction) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// `‖f‖_∞`.
    pub fn sup_norm(&self) -> f64 {
        self.values.values().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &GroupoidFunction) -> f64 {
        self.sub(other).sup_norm()
    }

    /// Rejects support elements outside `0..n`.
    pub fn check_indices(&self, n: usize) -> Result<()> {
        match self.values.keys().next_back() {
            Some(&g) if g >= n => Err(Error::IndexOutOfRange {
                what: "function support",
                index: g,
                size: n,
            }),
            _ => Ok(()),
        }
    }

    /// Parses `val <element> <re> <im>` lines.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let mut f = GroupoidFunction::zero();
        for (i, line) in data_lines(text) {
            let tok: Vec<&str> = line.split_whitespace().collect();
            match tok.as_slice() {
                ["val", g, re, im] => {
                    let g = parse_num::<usize>(g, i)?;
                    if g >= n {
                        return Err(Error::IndexOutOfRange {
                            what: "function support",
                            index: g,
                            size: n,
                        });
                    }
                    f.add_at(g, Complex64::new(parse_num(re, i)?, parse_num(im, i)?));
                }
                _ => return Err(Error::parse(i, format!("expected `val <g> <re> <im>`, got `{line}`"))),
            }
        }
        Ok(f)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (g, z) in self.iter() {
            writeln!(out, "val {g} {:e} {:e}", z.re, z.im).unwrap();
        }
        out
    }
}

pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

pub(crate) fn parse_num<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::parse(line, format!("bad number `{tok}`")))
}

/// `f ∗ g(x) = Σ_{y ∈ G_{s(x)}} f(xy⁻¹) g(y)`, evaluated per output point.
pub fn convolve<G: PartialComposition>(g: &G, f: &GroupoidFunction, h: &GroupoidFunction) -> GroupoidFunction {
    convolve_with(Exec::default(), g, f, h)
}

pub fn convolve_with<G: PartialComposition>(
    exec: Exec,
    g: &G,
    f: &GroupoidFunction,
    h: &GroupoidFunction,
) -> GroupoidFunction {
    twisted_convolve_inner(exec, g, f, h, |_, _| Complex64::new(1.0, 0.0))
}

fn twisted_convolve_inner<G: PartialComposition>(
    exec: Exec,
    g: &G,
    f: &GroupoidFunction,
    h: &GroupoidFunction,
    phase: impl Fn(usize, usize) -> Complex64 + Sync + Send,
) -> GroupoidFunction {
    if f.support_len() == 0 || h.support_len() == 0 {
        return GroupoidFunction::zero();
    }
    let values = par::map_range(exec, g.n_elements(), |x| {
        let mut acc = Complex64::default();
        for &y in g.source_fiber(g.src(x)) {
            let hy = h.get(y);
            if hy == Complex64::default() {
                continue;
            }
            let Some(xy) = g.comp(x, g.inv(y)) else { continue };
            let fxy = f.get(xy);
            if fxy != Complex64::default() {
                acc += fxy * hy * phase(xy, y);
            }
        }
        acc
    });
    GroupoidFunction::from_dense(&values)
}

/// `f*(x) = conj f(x⁻¹)`.
pub fn involution<G: PartialComposition>(g: &G, f: &GroupoidFunction) -> GroupoidFunction {
    GroupoidFunction::from_pairs(f.iter().map(|(x, z)| (g.inv(x), z.conj())))
}

/// Unit-modulus values on composable pairs.
#[derive(Debug, Clone, Default)]
pub struct TwoCocycle {
    values: HashMap<(usize, usize), Complex64>,
}

impl TwoCocycle {
    pub fn new() -> Self {
        TwoCocycle::default()
    }

    pub fn trivial<G: PartialComposition>(g: &G) -> Self {
        TwoCocycle::from_fn(g, |_, _| Complex64::new(1.0, 0.0))
    }

    /// Tabulates `phase` on every composable pair of `g`.
    pub fn from_fn<G: PartialComposition>(g: &G, mut phase: impl FnMut(usize, usize) -> Complex64) -> Self {
        TwoCocycle {
            values: g
                .composable_pairs()
                .into_iter()
                .map(|(a, b, _)| ((a, b), phase(a, b)))
                .collect(),
        }
    }

    pub fn insert(&mut self, a: usize, b: usize, z: Complex64) {
        self.values.insert((a, b), z);
    }

    pub fn get(&self, a: usize, b: usize) -> Option<Complex64> {
        self.values.get(&(a, b)).copied()
    }

    /// Value on a pair, 1 if absent (only used after validation).
    fn at(&self, a: usize, b: usize) -> Complex64 {
        self.get(a, b).unwrap_or(Complex64::new(1.0, 0.0))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Parses `cval <g> <h> <re> <im>` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = TwoCocycle::new();
        for (i, line) in data_lines(text) {
            let tok: Vec<&str> = line.split_whitespace().collect();
            match tok.as_slice() {
                ["cval", a, b, re, im] => {
                    let z = Complex64::new(parse_num(re, i)?, parse_num(im, i)?);
                    s.insert(parse_num(a, i)?, parse_num(b, i)?, z);
                }
                _ => {
                    return Err(Error::parse(
                        i,
                        format!("expected `cval <g> <h> <re> <im>`, got `{line}`"),
                    ))
                }
            }
        }
        Ok(s)
    }

    pub fn to_text(&self) -> String {
        let mut pairs: Vec<_> = self.values.iter().collect();
        pairs.sort_unstable_by_key(|(k, _)| **k);
        let mut out = String::new();
        for ((a, b), z) in pairs {
            writeln!(out, "cval {a} {b} {:e} {:e}", z.re, z.im).unwrap();
        }
        out
    }
}

/// Checks modulus, normalization and the cocycle identity on every
/// composable triple whose partial products exist.
pub fn validate_cocycle<G: PartialComposition>(g: &G, sigma: &TwoCocycle, tol: f64) -> Result<ValidationReport> {
    let pairs = g.composable_pairs();
    for &(a, b, _) in &pairs {
        if sigma.get(a, b).is_none() {
            return Err(Error::Structural(format!("cocycle missing value on ({a},{b})")));
        }
    }
    let mut v = Vec::new();
    for &(a, b, _) in &pairs {
        if (sigma.at(a, b).norm() - 1.0).abs() > tol {
            v.push(Violation {
                axiom: "unit-modulus",
                witness: vec![a, b],
            });
        }
    }
    let one = Complex64::new(1.0, 0.0);
    for x in 0..g.n_elements() {
        let (r, s) = (g.rng(x), g.src(x));
        if g.comp(r, x).is_some() && (sigma.at(r, x) - one).norm() > tol {
            v.push(Violation {
                axiom: "normalized-left",
                witness: vec![r, x],
            });
        }
        if g.comp(x, s).is_some() && (sigma.at(x, s) - one).norm() > tol {
            v.push(Violation {
                axiom: "normalized-right",
                witness: vec![x, s],
            });
        }
    }
    let mut by_left: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for &(a, b, ab) in &pairs {
        by_left.entry(a).or_default().push((b, ab));
    }
    for &(x, y, xy) in &pairs {
        let Some(ys) = by_left.get(&y) else { continue };
        for &(z, yz) in ys {
            let (Some(_), Some(_)) = (g.comp(xy, z), g.comp(x, yz)) else {
                continue;
            };
            let lhs = sigma.at(x, y) * sigma.at(xy, z);
            let rhs = sigma.at(x, yz) * sigma.at(y, z);
            if (lhs - rhs).norm() > tol {
                v.push(Violation {
                    axiom: "cocycle-identity",
                    witness: vec![x, y, z],
                });
            }
        }
    }
    Ok(ValidationReport::from_violations(v))
}

/// Checks `σ(x, x⁻¹) = σ(x⁻¹, x)`, the condition under which the twisted
/// involution is involutive.
pub fn check_involution_symmetry<G: PartialComposition>(g: &G, sigma: &TwoCocycle, tol: f64) -> ValidationReport {
    let mut v = Vec::new();
    for x in 0..g.n_elements() {
        let xi = g.inv(x);
        if g.comp(x, xi).is_none() {
            continue;
        }
        if (sigma.at(x, xi) - sigma.at(xi, x)).norm() > tol {
            v.push(Violation {
                axiom: "involution-symmetry",
                witness: vec![x],
            });
        }
    }
    ValidationReport::from_violations(v)
}

/// Whether `σ(x,y) = γ(x) γ(y) conj γ(xy) τ(x,y)` on all composable pairs
/// for the supplied candidate `γ` (values of modulus one).
pub fn cohomologous_via<G: PartialComposition>(
    g: &G,
    sigma: &TwoCocycle,
    tau: &TwoCocycle,
    gamma: &GroupoidFunction,
    tol: f64,
) -> bool {
    g.composable_pairs().into_iter().all(|(x, y, xy)| {
        let rhs = gamma.get(x) * gamma.get(y) * gamma.get(xy).conj() * tau.at(x, y);
        (sigma.at(x, y) - rhs).norm() <= tol
    })
}

/// `f ∗_σ g(x) = Σ_{y ∈ G_{s(x)}} f(xy⁻¹) g(y) σ(xy⁻¹, y)`.
pub fn twisted_convolve<G: PartialComposition>(
    g: &G,
    f: &GroupoidFunction,
    h: &GroupoidFunction,
    sigma: &TwoCocycle,
) -> GroupoidFunction {
    twisted_convolve_inner(Exec::default(), g, f, h, |a, b| sigma.at(a, b))
}

/// `f*(x) = conj f(x⁻¹) · conj σ(x⁻¹, x)`.
pub fn twisted_involution<G: PartialComposition>(
    g: &G,
    f: &GroupoidFunction,
    sigma: &TwoCocycle,
) -> GroupoidFunction {
    GroupoidFunction::from_pairs(f.iter().map(|(x, z)| {
        let xi = g.inv(x);
        (xi, z.conj() * sigma.at(x, xi).conj())
    }))
}

fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        Err(Error::Domain(format!("exponent p = {p} must satisfy p >= 1")))
    } else {
        Ok(())
    }
}

/// Largest source or range fiber sum of `term(|f(x)|)`, each fiber summed
/// with correct rounding.
fn max_fiber_sum(g: &FiniteGroupoid, f: &GroupoidFunction, term: impl Fn(f64) -> f64) -> f64 {
    let n = g.n_elements();
    let mut by_src = vec![Vec::new(); n];
    let mut by_rng = vec![Vec::new(); n];
    for (x, z) in f.iter() {
        let t = term(z.norm());
        by_src[g.src(x)].push(t);
        by_rng[g.rng(x)].push(t);
    }
    by_src
        .into_iter()
        .chain(by_rng)
        .map(exact_sum)
        .fold(0.0, f64::max)
}

/// `‖f‖_I = max_u max(Σ_{G_u} |f|, Σ_{G^u} |f|)`.
pub fn i_norm(g: &FiniteGroupoid, f: &GroupoidFunction) -> f64 {
    max_fiber_sum(g, f, |t| t)
}

/// The I^p-norm: the I-norm with fiber ℓ^p sums.
pub fn ip_norm(g: &FiniteGroupoid, f: &GroupoidFunction, p: f64) -> Result<f64> {
    check_p(p)?;
    if p.is_infinite() {
        return Ok(f.sup_norm());
    }
    if p == 1.0 {
        return Ok(i_norm(g, f));
    }
    Ok(max_fiber_sum(g, f, |t| t.powf(p)).powf(1.0 / p))
}

/// `f^(k)(x) = |f(x)| (1 + l(x))^k`.
pub fn weight(f: &GroupoidFunction, l: &LengthFunction, k: f64) -> GroupoidFunction {
    f.map(|x, z| Complex64::new(z.norm() * (1.0 + l.get(x)).powf(k), 0.0))
}

/// `‖f‖_{p,k} = ‖f (1+l)^k‖_{I^p}`.
pub fn pk_norm(g: &FiniteGroupoid, f: &GroupoidFunction, p: f64, k: f64, l: &LengthFunction) -> Result<f64> {
    check_p(p)?;
    if l.len() != g.n_elements() {
        return Err(Error::Structural("length does not match groupoid".into()));
    }
    if k.is_nan() || k < 0.0 {
        return Err(Error::Domain(format!("weight exponent k = {k} must be >= 0")));
    }
    ip_norm(g, &weight(f, l, k), p)
}

/// `Z^n` truncated to the box `[-radius, radius]^n` with partial addition.
/// The origin is the only unit and every element is in its fiber.
#[derive(Debug, Clone)]
pub struct BoxGroup {
    dim: usize,
    radius: i64,
    all: Vec<usize>,
}

impl BoxGroup {
    pub fn new(dim: usize, radius: i64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty("box group of dimension zero"));
        }
        if radius < 0 {
            return Err(Error::Domain(format!("box radius {radius} is negative")));
        }
        let side = (2 * radius + 1) as usize;
        let size = side
            .checked_pow(dim as u32)
            .ok_or_else(|| Error::Domain("box too large".into()))?;
        Ok(BoxGroup {
            dim,
            radius,
            all: (0..size).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    fn side(&self) -> i64 {
        2 * self.radius + 1
    }

    pub fn index_of(&self, v: &[i64]) -> Option<usize> {
        if v.len() != self.dim || v.iter().any(|c| c.abs() > self.radius) {
            return None;
        }
        Some(v.iter().fold(0i64, |acc, &c| acc * self.side() + c + self.radius) as usize)
    }

    pub fn coords(&self, mut g: usize) -> Vec<i64> {
        let side = self.side() as usize;
        let mut v = vec![0; self.dim];
        for c in v.iter_mut().rev() {
            *c = (g % side) as i64 - self.radius;
            g /= side;
        }
        v
    }

    pub fn origin(&self) -> usize {
        self.index_of(&vec![0; self.dim]).expect("origin lies in the box")
    }

    /// Standard basis vector `e_i` (requires radius ≥ 1).
    pub fn basis(&self, i: usize) -> Option<usize> {
        let mut v = vec![0; self.dim];
        *v.get_mut(i)? = 1;
        self.index_of(&v)
    }

    /// The translation groupoid on box points: `(y, x)` is the arrow
    /// `x → y` labelled by `y − x`, index `y * |box| + x`.
    pub fn to_groupoid(&self) -> FiniteGroupoid {
        crate::groupoid::pair_groupoid(self.all.len()).expect("box is nonempty")
    }

    /// Difference `y − x` labelling the pair-groupoid arrow `(y, x)`.
    pub fn label(&self, arrow: usize) -> Vec<i64> {
        let n = self.all.len();
        let (y, x) = (self.coords(arrow / n), self.coords(arrow % n));
        y.iter().zip(&x).map(|(a, b)| a - b).collect()
    }

    /// Pulls a function on the box back to the translation groupoid,
    /// `f̃(y, x) = f(y − x)`; labels leaving the box get value 0.
    pub fn pull_back_function(&self, f: &GroupoidFunction) -> GroupoidFunction {
        let n = self.all.len();
        GroupoidFunction::from_pairs(
            (0..n * n).filter_map(|a| self.index_of(&self.label(a)).map(|l| (a, f.get(l)))),
        )
    }
}

impl PartialComposition for BoxGroup {
    fn n_elements(&self) -> usize {
        self.all.len()
    }
    fn src(&self, _g: usize) -> usize {
        self.origin()
    }
    fn rng(&self, _g: usize) -> usize {
        self.origin()
    }
    fn inv(&self, g: usize) -> usize {
        let v: Vec<i64> = self.coords(g).into_iter().map(|c| -c).collect();
        self.index_of(&v).expect("box is symmetric")
    }
    fn comp(&self, g: usize, h: usize) -> Option<usize> {
        let v: Vec<i64> = self.coords(g).iter().zip(self.coords(h)).map(|(a, b)| a + b).collect();
        self.index_of(&v)
    }
    fn source_fiber(&self, _u: usize) -> &[usize] {
        &self.all
    }
    fn composable_pairs(&self) -> Vec<(usize, usize, usize)> {
        let n = self.all.len();
        (0..n)
            .flat_map(|g| (0..n).filter_map(move |h| self.comp(g, h).map(|gh| (g, h, gh))))
            .collect()
    }
}

/// `σ(v, w) = e^{πi v·Θw}` on the box model; `Θ` must be skew-symmetric.
pub fn nc_torus_cocycle(theta: &[Vec<f64>], group: &BoxGroup) -> Result<TwoCocycle> {
    let n = group.dim();
    if theta.len() != n || theta.iter().any(|row| row.len() != n) {
        return Err(Error::Structural(format!("Θ must be {n}×{n}")));
    }
    for i in 0..n {
        for j in 0..n {
            if (theta[i][j] + theta[j][i]).abs() > 1e-12 {
                return Err(Error::Precondition(format!(
                    "Θ not skew-symmetric at ({i},{j})"
                )));
            }
        }
    }
    Ok(TwoCocycle::from_fn(group, |a, b| {
        let form = skew_form(theta, &group.coords(a), &group.coords(b));
        Complex64::from_polar(1.0, std::f64::consts::PI * form)
    }))
}

fn skew_form(theta: &[Vec<f64>], v: &[i64], w: &[i64]) -> f64 {
    let mut form = 0.0;
    for (i, row) in theta.iter().enumerate() {
        for (j, t) in row.iter().enumerate() {
            form += v[i] as f64 * t * w[j] as f64;
        }
    }
    form
}

/// The NC-torus cocycle pulled back to the translation groupoid of the box:
/// `σ̃((z,y),(y,x)) = e^{πi (z−y)·Θ(y−x)}`, defined on every composable pair.
pub fn nc_torus_translation(theta: &[Vec<f64>], group: &BoxGroup) -> Result<(FiniteGroupoid, TwoCocycle)> {
    nc_torus_cocycle(theta, group)?;
    let g = group.to_groupoid();
    let sigma = TwoCocycle::from_fn(&g, |a, b| {
        Complex64::from_polar(1.0, std::f64::consts::PI * skew_form(theta, &group.label(a), &group.label(b)))
    });
    Ok((g, sigma))
}
