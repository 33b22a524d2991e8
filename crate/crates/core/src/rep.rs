//! Left regular representation matrices on fibers, certified ℓ^p operator
//! norm intervals, propagation, and the commutator derivation.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::convolution::{data_lines, i_norm, parse_num, GroupoidFunction, TwoCocycle};
use crate::error::{Error, Result};
use crate::groupoid::{FiniteGroupoid, LengthFunction};
use crate::numeric::exact_sum;
use crate::par::{self, Exec};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A sparse matrix on an ordered list of fiber elements. Rows and columns
/// are positions in `fiber`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberOperator {
    fiber: Vec<usize>,
    entries: BTreeMap<(usize, usize), Complex64>,
    exact: bool,
}

impl FiberOperator {
    /// `exact` marks a whole fiber; `false` marks a compression to a window.
    pub fn new(fiber: Vec<usize>, entries: impl IntoIterator<Item = ((usize, usize), Complex64)>, exact: bool) -> Result<Self> {
        let n = fiber.len();
        let mut map = BTreeMap::new();
        for ((i, j), z) in entries {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange {
                    what: "operator entry",
                    index: i.max(j),
                    size: n,
                });
            }
            if z != ZERO {
                map.insert((i, j), z);
            }
        }
        Ok(FiberOperator {
            fiber,
            entries: map,
            exact,
        })
    }

    pub fn identity(fiber: Vec<usize>) -> Self {
        let n = fiber.len();
        FiberOperator {
            fiber,
            entries: (0..n).map(|i| ((i, i), Complex64::new(1.0, 0.0))).collect(),
            exact: true,
        }
    }

    pub fn from_dense(fiber: Vec<usize>, m: &DMatrix<Complex64>, exact: bool) -> Self {
        let n = fiber.len();
        let entries = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| ((i, j), m[(i, j)]))
            .filter(|(_, z)| *z != ZERO)
            .collect();
        FiberOperator { fiber, entries, exact }
    }

    pub fn dim(&self) -> usize {
        self.fiber.len()
    }

    pub fn fiber(&self) -> &[usize] {
        &self.fiber
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries.get(&(i, j)).copied().unwrap_or(ZERO)
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), Complex64)> + '_ {
        self.entries.iter().map(|(&k, &z)| (k, z))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut m = DMatrix::from_element(n, n, ZERO);
        for (&(i, j), &z) in &self.entries {
            m[(i, j)] = z;
        }
        m
    }

    fn same_fiber(&self, other: &FiberOperator) -> Result<()> {
        if self.fiber != other.fiber {
            return Err(Error::Precondition("operators act on different fibers".into()));
        }
        Ok(())
    }

    pub fn mul(&self, other: &FiberOperator) -> Result<FiberOperator> {
        self.same_fiber(other)?;
        let prod = self.to_dense() * other.to_dense();
        Ok(FiberOperator::from_dense(self.fiber.clone(), &prod, self.exact && other.exact))
    }

    pub fn sub(&self, other: &FiberOperator) -> Result<FiberOperator> {
        self.same_fiber(other)?;
        let diff = self.to_dense() - other.to_dense();
        Ok(FiberOperator::from_dense(self.fiber.clone(), &diff, self.exact && other.exact))
    }

    fn map_entries(&self, f: impl Fn(usize, usize, Complex64) -> Complex64) -> FiberOperator {
        FiberOperator {
            fiber: self.fiber.clone(),
            entries: self
                .entries
                .iter()
                .map(|(&(i, j), &z)| ((i, j), f(i, j, z)))
                .filter(|(_, z)| *z != ZERO)
                .collect(),
            exact: self.exact,
        }
    }

    pub fn max_abs_diff(&self, other: &FiberOperator) -> f64 {
        let keys: std::collections::BTreeSet<_> = self.entries.keys().chain(other.entries.keys()).collect();
        keys.into_iter()
            .map(|&(i, j)| (self.get(i, j) - other.get(i, j)).norm())
            .fold(0.0, f64::max)
    }

    /// `dim <n>` then `entry <i> <j> <re> <im>` lines.
    pub fn dump(&self) -> String {
        let mut out = format!("dim {}\n", self.dim());
        for (&(i, j), z) in &self.entries {
            writeln!(out, "entry {i} {j} {:e} {:e}", z.re, z.im).unwrap();
        }
        out
    }

    /// Reads a matrix dump; the fiber becomes `0..n` and the operator is
    /// marked as a window.
    pub fn parse_dump(text: &str) -> Result<FiberOperator> {
        let mut dim = None;
        let mut entries = Vec::new();
        for (i, line) in data_lines(text) {
            let tok: Vec<&str> = line.split_whitespace().collect();
            match tok.as_slice() {
                ["dim", n] if dim.is_none() => dim = Some(parse_num::<usize>(n, i)?),
                ["entry", a, b, re, im] if dim.is_some() => {
                    let z = Complex64::new(parse_num(re, i)?, parse_num(im, i)?);
                    entries.push(((parse_num(a, i)?, parse_num(b, i)?), z));
                }
                _ => return Err(Error::parse(i, format!("unexpected line `{line}`"))),
            }
        }
        let n = dim.ok_or(Error::Empty("matrix dump without a dim line"))?;
        FiberOperator::new((0..n).collect(), entries, false)
    }
}

fn check_unit(g: &FiniteGroupoid, u: usize) -> Result<()> {
    if u >= g.n_elements() {
        return Err(Error::IndexOutOfRange {
            what: "unit",
            index: u,
            size: g.n_elements(),
        });
    }
    if !g.is_unit(u) {
        return Err(Error::Precondition(format!("element {u} is not a unit")));
    }
    Ok(())
}

fn regular_matrix(g: &FiniteGroupoid, u: usize, entry: impl Fn(usize, usize) -> Complex64) -> Result<FiberOperator> {
    check_unit(g, u)?;
    let fiber = g.source_fiber(u).to_vec();
    let mut entries = BTreeMap::new();
    for (i, &x) in fiber.iter().enumerate() {
        for (j, &y) in fiber.iter().enumerate() {
            let xy = g.comp(x, g.inv(y)).expect("fiber elements compose with inverses");
            let z = entry(xy, y);
            if z != ZERO {
                entries.insert((i, j), z);
            }
        }
    }
    Ok(FiberOperator {
        fiber,
        entries,
        exact: true,
    })
}

/// `λ_u(f)` on `ℓ^p(G_u)`: `T_{xy} = f(xy⁻¹)`.
pub fn left_regular_matrix(g: &FiniteGroupoid, f: &GroupoidFunction, u: usize) -> Result<FiberOperator> {
    regular_matrix(g, u, |xy, _| f.get(xy))
}

/// `λ^σ_u(f)`: `T_{xy} = f(xy⁻¹) σ(xy⁻¹, y)`.
pub fn twisted_left_regular_matrix(
    g: &FiniteGroupoid,
    f: &GroupoidFunction,
    u: usize,
    sigma: &TwoCocycle,
) -> Result<FiberOperator> {
    regular_matrix(g, u, |xy, y| {
        let v = f.get(xy);
        if v == ZERO {
            return ZERO;
        }
        v * sigma.get(xy, y).unwrap_or(Complex64::new(1.0, 0.0))
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormOptions {
    pub p: f64,
    pub restarts: usize,
    pub iters: usize,
    pub tol: f64,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions {
            p: 2.0,
            restarts: 8,
            iters: 200,
            tol: 1e-10,
            seed: 0,
            exec: Exec::default(),
        }
    }
}

impl NormOptions {
    pub fn with_p(p: f64) -> Self {
        NormOptions {
            p,
            ..NormOptions::default()
        }
    }
}

/// Certified bounds `lower ≤ ‖A‖_{p→p} ≤ upper`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormInterval {
    pub lower: f64,
    pub upper: f64,
    pub lower_method: String,
    pub upper_method: String,
}

impl NormInterval {
    pub fn zero() -> Self {
        NormInterval {
            lower: 0.0,
            upper: 0.0,
            lower_method: "zero".into(),
            upper_method: "zero".into(),
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn overlaps(&self, other: &NormInterval) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }

    /// Interval containing the supremum of two norms.
    pub fn max(self, other: NormInterval) -> NormInterval {
        let (lower, lower_method) = if other.lower > self.lower {
            (other.lower, other.lower_method)
        } else {
            (self.lower, self.lower_method)
        };
        let (upper, upper_method) = if other.upper > self.upper {
            (other.upper, other.upper_method)
        } else {
            (self.upper, self.upper_method)
        };
        NormInterval {
            lower,
            upper,
            lower_method,
            upper_method,
        }
    }
}

fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

fn lp_norm(v: &[Complex64], p: f64) -> f64 {
    if p.is_infinite() {
        return v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    exact_sum(v.iter().map(|z| z.norm().powf(p))).powf(1.0 / p)
}

/// `z ↦ sgn(z) |z|^{p-1} / ‖v‖_p^{p-1}`, the norming functional of `v`.
fn dual_vector(v: &[Complex64], p: f64, norm: f64) -> Vec<Complex64> {
    v.iter()
        .map(|&z| {
            let a = z.norm();
            if a == 0.0 {
                ZERO
            } else {
                z / a * (a / norm).powf(p - 1.0)
            }
        })
        .collect()
}

struct Dense {
    n: usize,
    a: DMatrix<Complex64>,
}

impl Dense {
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.a[(i, j)] * x[j]).sum())
            .collect()
    }

    fn apply_adjoint(&self, z: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.a[(i, j)].conj() * z[i]).sum())
            .collect()
    }

    /// `‖Ax‖_p / ‖x‖_p`.
    fn ratio(&self, x: &[Complex64], p: f64) -> f64 {
        let nx = lp_norm(x, p);
        if nx == 0.0 {
            0.0
        } else {
            lp_norm(&self.apply(x), p) / nx
        }
    }

    /// Boyd's nonlinear power method from `x`; returns the best ratio seen.
    fn power_method(&self, mut x: Vec<Complex64>, p: f64, q: f64, iters: usize, tol: f64) -> f64 {
        let mut best = 0.0f64;
        let mut prev = f64::NAN;
        for _ in 0..iters.max(1) {
            let nx = lp_norm(&x, p);
            if nx == 0.0 {
                break;
            }
            let y = self.apply(&x);
            let ny = lp_norm(&y, p);
            let value = ny / nx;
            best = best.max(value);
            if ny == 0.0 || (value - prev).abs() <= tol * value {
                break;
            }
            prev = value;
            let w = self.apply_adjoint(&dual_vector(&y, p, ny));
            let nw = lp_norm(&w, q);
            if nw == 0.0 {
                break;
            }
            x = dual_vector(&w, q, nw);
        }
        best
    }
}

fn random_start(n: usize, seed: u64, index: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let phased = index % 2 == 1;
    (0..n)
        .map(|_| {
            let m: f64 = rng.random_range(0.05..1.0);
            if phased {
                Complex64::from_polar(m, rng.random_range(0.0..std::f64::consts::TAU))
            } else {
                Complex64::new(m, 0.0)
            }
        })
        .collect()
}

/// Certified `ℓ^p → ℓ^p` operator-norm interval for `A`.
///
/// The lower bound is the best of the largest entry modulus, the basis
/// vectors, and Boyd's power method from random and basis starts (at `p = 2`
/// the top right singular vector); values from floating-point iterations
/// are deflated by a rounding margin. The upper bound is the Riesz–Thorin
/// interpolation bound `‖A‖_1^{1/p} ‖A‖_∞^{1/q}` and, at `p = 2`, the largest
/// singular value, each inflated by a rounding margin. For `p ∈ {1, ∞}`
/// both bounds are the exact column / row sum maximum.
pub fn p_operator_norm(a: &FiberOperator, opts: &NormOptions) -> Result<NormInterval> {
    let p = opts.p;
    if p.is_nan() || p < 1.0 {
        return Err(Error::Domain(format!("exponent p = {p} must satisfy p >= 1")));
    }
    let n = a.dim();
    if n == 0 || a.nnz() == 0 {
        return Ok(NormInterval::zero());
    }
    let q = conjugate(p);
    let mut cols = vec![Vec::new(); n];
    let mut rows = vec![Vec::new(); n];
    let mut max_entry = 0.0f64;
    for ((i, j), z) in a.entries() {
        let m = z.norm();
        rows[i].push(m);
        cols[j].push(m);
        max_entry = max_entry.max(m);
    }
    let col_max = cols.into_iter().map(exact_sum).fold(0.0, f64::max);
    let row_max = rows.into_iter().map(exact_sum).fold(0.0, f64::max);
    if p == 1.0 {
        return Ok(exact_interval(col_max, "max-column-sum"));
    }
    if p.is_infinite() {
        return Ok(exact_interval(row_max, "max-row-sum"));
    }

    let eps = f64::EPSILON;
    let deflate = 1.0 - 16.0 * (n as f64 + 4.0) * p.max(q) * eps;
    let inflate = 1.0 + 16.0 * (n as f64 + 4.0) * eps;

    let (mut upper, mut upper_method) = if col_max == row_max {
        (col_max, "interpolation".to_string())
    } else {
        let interp = col_max.powf(1.0 / p) * row_max.powf(1.0 / q) * inflate;
        (interp.min(col_max.max(row_max)), "interpolation".to_string())
    };
    let mut lower = max_entry;
    let mut lower_method = "max-entry".to_string();
    let dense = Dense { n, a: a.to_dense() };

    for j in 0..n {
        let mut e = vec![ZERO; n];
        e[j] = Complex64::new(1.0, 0.0);
        let v = dense.ratio(&e, p) * deflate;
        if v > lower {
            lower = v;
            lower_method = "basis-vector".into();
        }
    }

    if p == 2.0 {
        if let Some(svd) = dense.a.clone().try_svd(false, true, eps, 0) {
            let (k, &s) = svd
                .singular_values
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.total_cmp(y.1))
                .expect("nonempty matrix");
            let s_up = s * (1.0 + 64.0 * (n as f64 + 1.0) * eps);
            if s_up < upper {
                upper = s_up;
                upper_method = "singular-value".into();
            }
            let v_t = svd.v_t.expect("requested right singular vectors");
            let v: Vec<Complex64> = (0..n).map(|j| v_t[(k, j)].conj()).collect();
            let val = dense.ratio(&v, 2.0) * deflate;
            if val > lower {
                lower = val;
                lower_method = "singular-vector".into();
            }
        }
    } else {
        let starts = opts.restarts + n;
        let values = par::map_range(opts.exec, starts, |s| {
            let x = if s < opts.restarts {
                random_start(n, opts.seed, s)
            } else {
                let mut e = vec![ZERO; n];
                e[s - opts.restarts] = Complex64::new(1.0, 0.0);
                e
            };
            dense.power_method(x, p, q, opts.iters, opts.tol)
        });
        for v in values {
            let v = v * deflate;
            if v > lower {
                lower = v;
                lower_method = "power-method".into();
            }
        }
    }
    Ok(NormInterval {
        lower,
        upper,
        lower_method,
        upper_method,
    })
}

fn exact_interval(v: f64, method: &str) -> NormInterval {
    NormInterval {
        lower: v,
        upper: v,
        lower_method: method.into(),
        upper_method: method.into(),
    }
}

/// `‖f‖ = sup_u ‖λ_u(f)‖`, with the upper bound clamped by `‖f‖_I`.
pub fn reduced_norm(g: &FiniteGroupoid, f: &GroupoidFunction, opts: &NormOptions) -> Result<NormInterval> {
    reduced_norm_by(g, f, opts, |u| left_regular_matrix(g, f, u))
}

/// The twisted analogue of [`reduced_norm`]; `‖|f|‖_I` still bounds it.
pub fn twisted_reduced_norm(
    g: &FiniteGroupoid,
    f: &GroupoidFunction,
    sigma: &TwoCocycle,
    opts: &NormOptions,
) -> Result<NormInterval> {
    reduced_norm_by(g, f, opts, |u| twisted_left_regular_matrix(g, f, u, sigma))
}

fn reduced_norm_by(
    g: &FiniteGroupoid,
    f: &GroupoidFunction,
    opts: &NormOptions,
    matrix: impl Fn(usize) -> Result<FiberOperator> + Sync + Send,
) -> Result<NormInterval> {
    f.check_indices(g.n_elements())?;
    let inner = NormOptions {
        exec: Exec::Sequential,
        ..*opts
    };
    let per_unit = par::map(opts.exec, g.units(), |&u| {
        matrix(u).and_then(|a| p_operator_norm(&a, &inner))
    });
    let mut out = NormInterval::zero();
    for r in per_unit {
        out = out.max(r?);
    }
    let bound = i_norm(g, f);
    if bound < out.upper {
        out.upper = bound;
        out.upper_method = "i-norm".into();
    }
    Ok(out)
}

/// `Prop(A) = sup { l(xy⁻¹) : A_{xy} ≠ 0 }`, and 0 for the zero operator.
pub fn propagation(g: &FiniteGroupoid, a: &FiberOperator, l: &LengthFunction) -> Result<f64> {
    let mut best = 0.0f64;
    for ((i, j), _) in a.entries() {
        let (x, y) = (a.fiber[i], a.fiber[j]);
        let xy = g
            .comp(x, g.inv(y))
            .ok_or_else(|| Error::Precondition(format!("fiber elements {x}, {y} do not share a source")))?;
        best = best.max(l.get(xy));
    }
    Ok(best)
}

/// `(δ^k A)_{xy} = A_{xy} (l(x) − l(y))^k`.
pub fn derivation(a: &FiberOperator, l: &LengthFunction, k: u32) -> FiberOperator {
    a.map_entries(|i, j, z| z * (l.get(a.fiber[i]) - l.get(a.fiber[j])).powi(k as i32))
}

/// `a_t(A)_{xy} = e^{it(l(x) − l(y))} A_{xy}`.
pub fn modulate(a: &FiberOperator, l: &LengthFunction, t: f64) -> FiberOperator {
    a.map_entries(|i, j, z| z * Complex64::from_polar(1.0, t * (l.get(a.fiber[i]) - l.get(a.fiber[j]))))
}

/// Entrywise modulus `|A|`.
pub fn abs_operator(a: &FiberOperator) -> FiberOperator {
    a.map_entries(|_, _, z| Complex64::new(z.norm(), 0.0))
}
