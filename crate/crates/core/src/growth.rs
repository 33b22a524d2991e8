//! Ball growth, polynomial-growth fits, and finite-scale checks of the
//! rapid decay inequalities with explicit constants.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::convolution::{convolve, i_norm, ip_norm, pk_norm, GroupoidFunction};
use crate::error::{Error, Result};
use crate::groupoid::{FiniteGroupoid, LengthFunction};
use crate::numeric::exact_sum;
use crate::par::{self, Exec};
use crate::rep::{reduced_norm, NormOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BallCount {
    pub unit: usize,
    pub count: usize,
}

/// `|B_{G_u}(m)|` for every unit, checked against `|B_{G^u}(m)|`.
pub fn ball_count(g: &FiniteGroupoid, l: &LengthFunction, m: f64) -> Result<Vec<BallCount>> {
    if l.len() != g.n_elements() {
        return Err(Error::Structural("length does not match groupoid".into()));
    }
    let counts = par::map(Exec::default(), g.units(), |&u| {
        let src = g.source_fiber(u).iter().filter(|&&x| l.get(x) <= m).count();
        let rng = g.range_fiber(u).iter().filter(|&&x| l.get(x) <= m).count();
        (u, src, rng)
    });
    counts
        .into_iter()
        .map(|(u, src, rng)| {
            if src != rng {
                Err(Error::Precondition(format!(
                    "unit {u}: source ball has {src} elements, range ball {rng}; length is not symmetric"
                )))
            } else {
                Ok(BallCount { unit: u, count: src })
            }
        })
        .collect()
}

/// Sup-ball sizes at the given radii.
pub fn sup_ball_profile(g: &FiniteGroupoid, l: &LengthFunction, radii: &[u64]) -> Result<Vec<u64>> {
    radii
        .iter()
        .map(|&m| Ok(ball_count(g, l, m as f64)?.iter().map(|b| b.count as u64).max().unwrap_or(0)))
        .collect()
}

/// Exponents above this are reported as non-polynomial at the tested scale.
pub const MAX_POLY_EXPONENT: f64 = 8.0;

#[derive(Debug, Clone, Serialize)]
pub struct GrowthProfile {
    pub radii: Vec<u64>,
    pub sup_counts: Vec<u64>,
    pub c: f64,
    pub r: f64,
    /// Least-squares slope of `log B` against `log(1 + m)`.
    pub ls_slope: f64,
    /// Root mean square residual of that least-squares line.
    pub residual: f64,
    /// The profile is constant.
    pub degenerate: bool,
    /// The fitted exponent stays at most [`MAX_POLY_EXPONENT`].
    pub polynomial: bool,
}

/// Fits `B(m) ≤ c (1 + m)^r`.
///
/// `r` is the smallest integer ≥ 1 not below the local log-log slopes over
/// the upper half of the radius range, then `c = max_m B(m) / (1 + m)^r`, so
/// the inequality holds exactly at every observed radius.
pub fn fit_polynomial_growth(radii: &[u64], sup_counts: &[u64]) -> Result<GrowthProfile> {
    if radii.len() != sup_counts.len() {
        return Err(Error::Structural("radii and counts differ in length".into()));
    }
    if radii.len() < 3 {
        return Err(Error::Precondition(format!("{} radii given; at least 3 are needed", radii.len())));
    }
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("radii must be strictly increasing".into()));
    }
    if sup_counts.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Precondition("ball sizes decrease with the radius".into()));
    }
    if sup_counts[0] == 0 {
        return Err(Error::Precondition("empty ball".into()));
    }
    let xs: Vec<f64> = radii.iter().map(|&m| (1.0 + m as f64).ln()).collect();
    let ys: Vec<f64> = sup_counts.iter().map(|&b| (b as f64).ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let ls_slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - ls_slope * mx;
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - ls_slope * x).powi(2)).sum::<f64>() / n).sqrt();

    let degenerate = sup_counts.iter().all(|&b| b == sup_counts[0]);
    let pairs = xs.len() - 1;
    let tail_slope = (pairs / 2..pairs)
        .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
        .fold(0.0f64, f64::max);
    let r = if degenerate { 1.0 } else { (tail_slope - 1e-9).ceil().max(1.0) };
    let c = if degenerate {
        sup_counts[0] as f64
    } else {
        radii
            .iter()
            .zip(sup_counts)
            .map(|(&m, &b)| b as f64 / (1.0 + m as f64).powf(r))
            .fold(1.0f64, f64::max)
    };
    // make the inequality exact after rounding
    let c = c * (1.0 + 4.0 * f64::EPSILON);
    Ok(GrowthProfile {
        radii: radii.to_vec(),
        sup_counts: sup_counts.to_vec(),
        c,
        r,
        ls_slope,
        residual,
        degenerate,
        polynomial: r <= MAX_POLY_EXPONENT,
    })
}

/// Profile and fit on a finite groupoid.
pub fn growth_profile(g: &FiniteGroupoid, l: &LengthFunction, radii: &[u64]) -> Result<GrowthProfile> {
    fit_polynomial_growth(radii, &sup_ball_profile(g, l, radii)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RdConstants {
    pub p: f64,
    pub k: f64,
    pub c_tilde: f64,
    /// `c̃^{1/q}`, the constant in `‖f‖_I ≤ C ‖f‖_{p,k}`.
    pub constant: f64,
}

const ZETA_TERMS: u32 = 1_000_000;

/// An upper bound for `ζ(s) = Σ_{n≥1} n^{-s}`, `s > 1`: a partial sum plus
/// the integral bound on the tail, rounded up.
pub fn zeta_upper(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::Domain(format!("zeta series diverges at s = {s}")));
    }
    let n = ZETA_TERMS as f64;
    let head = exact_sum((1..=ZETA_TERMS).map(|i| (i as f64).powf(-s)));
    let tail = n.powf(1.0 - s) / (s - 1.0);
    Ok((head + tail) * (1.0 + 1e-9))
}

/// `k = 2 + r` and `c̃ = 2^r c ζ(2q)` with `q` the conjugate exponent of `p`.
pub fn rd_constants_from_growth(c: f64, r: f64, p: f64) -> Result<RdConstants> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Domain(format!("exponent p = {p} must satisfy p >= 1")));
    }
    if !(c >= 1.0 && r >= 0.0) {
        return Err(Error::Domain(format!("growth constants c = {c}, r = {r} out of range")));
    }
    if p == 1.0 {
        return Ok(RdConstants {
            p,
            k: 0.0,
            c_tilde: 1.0,
            constant: 1.0,
        });
    }
    let q = if p.is_infinite() { 1.0 } else { p / (p - 1.0) };
    let c_tilde = 2f64.powf(r) * c * zeta_upper(2.0 * q)? * (1.0 + 1e-9);
    Ok(RdConstants {
        p,
        k: 2.0 + r,
        c_tilde,
        constant: c_tilde.powf(1.0 / q) * (1.0 + 1e-9),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrictCheck {
    /// Largest certified operator-norm lower bound over `C ‖f‖_{p,k}`.
    pub worst_ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RdReport {
    pub p: f64,
    pub k: f64,
    #[serde(rename = "C")]
    pub constant: f64,
    pub corpus: String,
    pub functions: usize,
    /// Largest `‖f‖_I / ‖f‖_{p,k}`.
    pub worst_ratio: f64,
    pub pass: bool,
    pub strict: Option<StrictCheck>,
}

#[derive(Serialize)]
struct RdSummary {
    p: f64,
    k: f64,
    #[serde(rename = "C")]
    constant: f64,
    worst_ratio: f64,
    pass: bool,
}

impl RdReport {
    /// `{"p":…, "k":…, "C":…, "worst_ratio":…, "pass":…}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&RdSummary {
            p: self.p,
            k: self.k,
            constant: self.constant,
            worst_ratio: self.worst_ratio,
            pass: self.pass && self.strict.is_none_or(|s| s.pass),
        })
        .expect("plain data")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{:<12} {:>14}", "corpus", self.corpus).unwrap();
        writeln!(out, "{:<12} {:>14}", "functions", self.functions).unwrap();
        writeln!(out, "{:<12} {:>14}", "p", self.p).unwrap();
        writeln!(out, "{:<12} {:>14}", "k", self.k).unwrap();
        writeln!(out, "{:<12} {:>14.9}", "C", self.constant).unwrap();
        writeln!(out, "{:<12} {:>14.9}", "worst_ratio", self.worst_ratio).unwrap();
        if let Some(s) = &self.strict {
            writeln!(out, "{:<12} {:>14.9}", "strict_ratio", s.worst_ratio).unwrap();
        }
        writeln!(out, "{:<12} {:>14}", "pass", self.pass && self.strict.is_none_or(|s| s.pass)).unwrap();
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RdCheckOptions {
    /// Also compare `C ‖f‖_{p,k}` with the certified operator-norm lower bound.
    pub strict: bool,
    pub norm: NormOptions,
    pub exec: Exec,
}

impl Default for RdCheckOptions {
    fn default() -> Self {
        RdCheckOptions {
            strict: false,
            norm: NormOptions::default(),
            exec: Exec::default(),
        }
    }
}

/// Checks `‖f‖_I ≤ C ‖f‖_{p,k}` on every corpus function.
#[allow(clippy::too_many_arguments)]
pub fn check_rd_inequality(
    g: &FiniteGroupoid,
    l: &LengthFunction,
    p: f64,
    k: f64,
    constant: f64,
    corpus: &[GroupoidFunction],
    corpus_name: &str,
    opts: &RdCheckOptions,
) -> Result<RdReport> {
    let norm_opts = NormOptions {
        p,
        exec: Exec::Sequential,
        ..opts.norm
    };
    let rows = par::map(opts.exec, corpus, |f| -> Result<(f64, bool, Option<f64>)> {
        let lhs = i_norm(g, f);
        let weighted = pk_norm(g, f, p, k, l)?;
        let ratio = if weighted > 0.0 { lhs / weighted } else { 0.0 };
        let strict = if opts.strict {
            let lower = reduced_norm(g, f, &norm_opts)?.lower;
            Some(if weighted > 0.0 { lower / (constant * weighted) } else { 0.0 })
        } else {
            None
        };
        Ok((ratio, lhs <= constant * weighted, strict))
    });
    let mut worst_ratio = 0.0f64;
    let mut pass = true;
    let mut strict_worst = 0.0f64;
    for row in rows {
        let (ratio, ok, strict) = row?;
        worst_ratio = worst_ratio.max(ratio);
        pass &= ok;
        if let Some(s) = strict {
            strict_worst = strict_worst.max(s);
        }
    }
    Ok(RdReport {
        p,
        k,
        constant,
        corpus: corpus_name.to_string(),
        functions: corpus.len(),
        worst_ratio,
        pass,
        strict: opts.strict.then_some(StrictCheck {
            worst_ratio: strict_worst,
            pass: strict_worst <= 1.0,
        }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallFormCheck {
    pub radius: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// For `f ≡ 1` on `B(R)`, `R ≥ 1`: `‖f‖_I ≤ 2^k C R^k ‖f‖_{I^p}`.
pub fn check_rd_ball_form(g: &FiniteGroupoid, l: &LengthFunction, p: f64, k: f64, constant: f64, radius: f64) -> Result<BallFormCheck> {
    if !(radius >= 1.0) {
        return Err(Error::Domain(format!("ball radius {radius} must be at least 1")));
    }
    let f = GroupoidFunction::indicator((0..g.n_elements()).filter(|&x| l.get(x) <= radius));
    let lhs = i_norm(g, &f);
    let rhs = 2f64.powf(k) * constant * radius.powf(k) * ip_norm(g, &f, p)?;
    Ok(BallFormCheck {
        radius,
        lhs,
        rhs,
        pass: lhs <= rhs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InheritanceReport {
    pub d: f64,
    pub p: f64,
    pub k_d: f64,
    pub constant_d: f64,
    /// `k d / p`, the weight exponent at `p`.
    pub k_p: f64,
    /// `C^{d/p}`.
    pub constant_p: f64,
    /// `(|f| ∗ |ξ|)^α ≤ |f|^α ∗ |ξ|^α` pointwise, `α = p/d`.
    pub pointwise_ok: bool,
    /// `‖f‖_{F^p}^p ≤ ‖|f|^α‖_{F^d}^d` with certified bounds on each side.
    pub power_step_ok: bool,
    /// `‖|f|^α‖_I ≤ C ‖|f|^α‖_{d,k}`.
    pub rd_step_ok: bool,
    /// Largest `‖f‖_{F^p}` lower bound over `C^{d/p} ‖f‖_{p, kd/p}`.
    pub worst_ratio: f64,
    pub pass: bool,
}

/// Replays the inequality chain deriving RD at `p ≤ d` from RD at `d`.
#[allow(clippy::too_many_arguments)]
pub fn check_rd_inheritance(
    g: &FiniteGroupoid,
    l: &LengthFunction,
    d: f64,
    p: f64,
    k_d: f64,
    constant_d: f64,
    corpus: &[GroupoidFunction],
    vectors: &[GroupoidFunction],
    opts: &NormOptions,
) -> Result<InheritanceReport> {
    if !(1.0 <= p && p <= d && d.is_finite()) {
        return Err(Error::Domain(format!("need 1 <= p <= d < inf, got p = {p}, d = {d}")));
    }
    let alpha = p / d;
    let k_p = k_d * d / p;
    let constant_p = constant_d.powf(d / p);
    let mut pointwise_ok = true;
    let mut power_step_ok = true;
    let mut rd_step_ok = true;
    let mut worst_ratio = 0.0f64;
    let norm_p = NormOptions { p, ..*opts };
    let norm_d = NormOptions { p: d, ..*opts };
    for f in corpus {
        let fa = f.map(|_, z| Complex64::new(z.norm().powf(alpha), 0.0));
        let fabs = f.abs();
        for xi in vectors {
            let lhs = convolve(g, &fabs, &xi.abs());
            let rhs = convolve(g, &fa, &xi.map(|_, z| Complex64::new(z.norm().powf(alpha), 0.0)));
            for (x, v) in lhs.iter() {
                let (a, b) = (v.re.powf(alpha), rhs.get(x).re);
                if a > b * (1.0 + 1e-12) {
                    pointwise_ok = false;
                }
            }
        }
        let lower = reduced_norm(g, f, &norm_p)?.lower;
        let upper_a = reduced_norm(g, &fa, &norm_d)?.upper;
        if lower.powf(p) > upper_a.powf(d) * (1.0 + 1e-12) {
            power_step_ok = false;
        }
        if i_norm(g, &fa) > constant_d * pk_norm(g, &fa, d, k_d, l)? {
            rd_step_ok = false;
        }
        let weighted = pk_norm(g, f, p, k_p, l)?;
        if weighted > 0.0 {
            worst_ratio = worst_ratio.max(lower / (constant_p * weighted));
        }
    }
    Ok(InheritanceReport {
        d,
        p,
        k_d,
        constant_d,
        k_p,
        constant_p,
        pointwise_ok,
        power_step_ok,
        rd_step_ok,
        worst_ratio,
        pass: pointwise_ok && power_step_ok && rd_step_ok && worst_ratio <= 1.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrechetCheck {
    pub worst_ratio: f64,
    pub pass: bool,
}

/// `‖f ∗ h‖_{p,n} ≤ c ‖f‖_{p,n+k} ‖h‖_{p,n+k}` over all corpus pairs.
pub fn check_frechet(
    g: &FiniteGroupoid,
    l: &LengthFunction,
    p: f64,
    n: f64,
    c: f64,
    k: f64,
    corpus: &[GroupoidFunction],
) -> Result<FrechetCheck> {
    let mut worst_ratio = 0.0f64;
    let mut pass = true;
    for f in corpus {
        let nf = pk_norm(g, f, p, n + k, l)?;
        for h in corpus {
            let lhs = pk_norm(g, &convolve(g, f, h), p, n, l)?;
            let rhs = c * nf * pk_norm(g, h, p, n + k, l)?;
            pass &= lhs <= rhs;
            if rhs > 0.0 {
                worst_ratio = worst_ratio.max(lhs / rhs);
            }
        }
    }
    Ok(FrechetCheck { worst_ratio, pass })
}

/// A deterministic mixture of δ-functions, ball indicators and random
/// complex functions whose modulus decays slowly in `l`.
pub fn function_corpus(g: &FiniteGroupoid, l: &LengthFunction, count: usize, seed: u64) -> Vec<GroupoidFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.n_elements();
    let lmax = l.max_value().max(1.0);
    (0..count)
        .map(|i| match i % 3 {
            0 => {
                let x = rng.random_range(0..n);
                let c = Complex64::from_polar(rng.random_range(0.5..2.0), rng.random_range(0.0..std::f64::consts::TAU));
                GroupoidFunction::delta(x).scale(c)
            }
            1 => {
                let r = rng.random_range(0.0..=lmax);
                GroupoidFunction::indicator((0..n).filter(|&x| l.get(x) <= r))
            }
            _ => {
                let density = rng.random_range(0.2..1.0);
                let decay = rng.random_range(0.0..1.5);
                let value = |rng: &mut ChaCha8Rng, x: usize| {
                    let modulus = rng.random_range(0.05..1.0) * (1.0 + l.get(x)).powf(-decay);
                    Complex64::from_polar(modulus, rng.random_range(0.0..std::f64::consts::TAU))
                };
                let mut f = GroupoidFunction::zero();
                for x in 0..n {
                    if rng.random_bool(density) {
                        f.set(x, value(&mut rng, x));
                    }
                }
                // keep every corpus function nonzero
                if f.support_len() == 0 {
                    let x = rng.random_range(0..n);
                    f.set(x, value(&mut rng, x));
                }
                f
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{pair_groupoid, word_length, FiniteGroup};
    use crate::groupoid::group_groupoid;

    fn segment(n: usize) -> (FiniteGroupoid, LengthFunction) {
        let g = pair_groupoid(n).unwrap();
        let l = LengthFunction::from_fn(&g, |a| ((a / n) as f64 - (a % n) as f64).abs());
        (g, l)
    }

    #[test]
    fn ball_counts() {
        let (g, l) = segment(5);
        let counts = ball_count(&g, &l, 2.0).unwrap();
        assert_eq!(counts[2].count, 5);
        assert!(ball_count(&g, &l, 0.5).unwrap().iter().all(|b| b.count == 1));
        let z6 = group_groupoid(&FiniteGroup::cyclic(6).unwrap()).unwrap();
        let l6 = word_length(&z6, &[1, 5]).unwrap();
        assert_eq!(ball_count(&z6, &l6, 2.0).unwrap()[0].count, 5);
        let mut bad = l.values().to_vec();
        bad[1] = 9.0;
        assert!(ball_count(&g, &LengthFunction::new(bad), 2.0).is_err());
    }

    #[test]
    fn fits() {
        let (g, l) = segment(9);
        let radii: Vec<u64> = (0..12).collect();
        let fit = growth_profile(&g, &l, &radii).unwrap();
        assert_eq!(fit.r, 1.0);
        assert!(fit.c <= 3.0);
        let big: Vec<u64> = (20..25).collect();
        let flat = growth_profile(&g, &l, &big).unwrap();
        assert!(flat.degenerate && flat.r == 1.0);
        assert!(flat.c >= 9.0 && flat.c < 9.0 + 1e-12);

        let quad: Vec<u64> = (0..10u64).map(|m| (m + 1) * (m + 1)).collect();
        let q = fit_polynomial_growth(&(0..10).collect::<Vec<_>>(), &quad).unwrap();
        assert_eq!(q.r, 2.0);
        assert!((q.ls_slope - 2.0).abs() < 1e-12 && q.residual < 1e-12);

        let expo: Vec<u64> = (0..13u32).map(|m| (1u64 << (m + 1)) - 1).collect();
        let e = fit_polynomial_growth(&(0..13).collect::<Vec<_>>(), &expo).unwrap();
        assert!(!e.polynomial && e.r > 8.0);
        assert!(fit_polynomial_growth(&[0, 1], &[1, 2]).is_err());
    }

    #[test]
    fn fit_bounds_hold_on_data() {
        let data: Vec<u64> = vec![1, 3, 7, 12, 18, 25, 33];
        let radii: Vec<u64> = (0..7).collect();
        let f = fit_polynomial_growth(&radii, &data).unwrap();
        for (&m, &b) in radii.iter().zip(&data) {
            assert!(b as f64 <= f.c * (1.0 + m as f64).powf(f.r));
        }
    }

    #[test]
    fn constants() {
        let c = rd_constants_from_growth(1.0, 1.0, 2.0).unwrap();
        assert_eq!(c.k, 3.0);
        let zeta4 = std::f64::consts::PI.powi(4) / 90.0;
        assert!(c.c_tilde >= 2.0 * zeta4 && (c.c_tilde - 2.0 * zeta4).abs() < 1e-7);
        assert!((c.constant - (2.0 * zeta4).sqrt()).abs() < 1e-7);
        let one = rd_constants_from_growth(5.0, 3.0, 1.0).unwrap();
        assert_eq!((one.k, one.constant), (0.0, 1.0));
        assert_eq!(rd_constants_from_growth(1.0, 2.0, 2.0).unwrap().k, 4.0);
        assert!(rd_constants_from_growth(1.0, 1.0, 0.5).is_err());
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        let z = zeta_upper(2.0).unwrap();
        assert!(z >= zeta2 && z - zeta2 < 1e-8);
    }

    #[test]
    fn rd_on_segment() {
        let (g, l) = segment(8);
        let fit = growth_profile(&g, &l, &(0..10).collect::<Vec<_>>()).unwrap();
        let corpus = function_corpus(&g, &l, 100, 4);
        let opts = RdCheckOptions {
            strict: true,
            ..RdCheckOptions::default()
        };
        for p in [1.5, 2.0, 3.0] {
            let c = rd_constants_from_growth(fit.c, fit.r, p).unwrap();
            let rep = check_rd_inequality(&g, &l, p, c.k, c.constant, &corpus, "segment", &opts).unwrap();
            assert!(rep.pass && rep.strict.unwrap().pass, "{}", rep.to_table());
            let ball = check_rd_ball_form(&g, &l, p, c.k, c.constant, 3.0).unwrap();
            assert!(ball.pass);
        }
        let deltas: Vec<GroupoidFunction> = (0..64).map(GroupoidFunction::delta).collect();
        let rep = check_rd_inequality(&g, &l, 2.0, 0.0, 1.0, &deltas, "deltas", &RdCheckOptions::default()).unwrap();
        assert!(rep.worst_ratio <= 1.0);
        assert!(rep.to_json().starts_with("{\"p\":2.0,\"k\":0.0,\"C\":1.0,"));
    }

    #[test]
    fn inheritance_and_frechet() {
        let (g, l) = segment(6);
        let fit = growth_profile(&g, &l, &(0..8).collect::<Vec<_>>()).unwrap();
        let c4 = rd_constants_from_growth(fit.c, fit.r, 4.0).unwrap();
        let corpus = function_corpus(&g, &l, 12, 9);
        let vectors = function_corpus(&g, &l, 6, 10);
        let opts = NormOptions::default();
        let rep = check_rd_inheritance(&g, &l, 4.0, 2.0, c4.k, c4.constant, &corpus, &vectors, &opts).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.k_p, 2.0 * c4.k);
        let same = check_rd_inheritance(&g, &l, 2.0, 2.0, c4.k, c4.constant, &corpus, &vectors, &opts).unwrap();
        assert_eq!(same.k_p, c4.k);
        let c2 = rd_constants_from_growth(fit.c, fit.r, 2.0).unwrap();
        for n in [0.0, 1.0, 2.0] {
            assert!(check_frechet(&g, &l, 2.0, n, c2.constant, c2.k, &corpus).unwrap().pass);
        }
    }

    #[test]
    fn corpus_is_deterministic() {
        let (g, l) = segment(5);
        assert_eq!(function_corpus(&g, &l, 30, 1), function_corpus(&g, &l, 30, 1));
        assert_ne!(function_corpus(&g, &l, 30, 1), function_corpus(&g, &l, 30, 2));
    }
}
