//! Slow, independent floating-point cross-checks. Nothing here is used on the exact path.

use num_integer::Integer;
use std::f64::consts::PI;
use thiserror::Error;

use crate::algebra::{coeff_e, example_double_constants};
use crate::gluing::{canonical_mn, end_to_end_weight_mt, two_loop_weight_mt, GluingMatrix, LensSpace};
use crate::numtheory::{dedekind_sum_direct, dedekind_sum_fast, harmonic_real, reciprocity_rhs, to_f64, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("grid size {0} below 8")]
    GridTooSmall(usize),
    #[error("smearing width {width} exceeds 1/(4N) for N = {n}")]
    WidthTooLarge { width: f64, n: usize },
    #[error("grid size {n} is not a multiple of p = {p}")]
    GridNotMultiple { n: usize, p: i64 },
    #[error("quadrature did not reach tolerance {0:e}")]
    NoConvergence(f64),
    #[error("reciprocity fails at (q, p) = ({0}, {1})")]
    Reciprocity(i64, i64),
    #[error("invalid argument: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smearing {
    Fejer,
    Gaussian,
}

/// Grid and nascent-delta data for torus Riemann sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub n: usize,
    pub width: f64,
    pub kernel: Smearing,
}

impl QuadratureSpec {
    pub fn new(n: usize, width: f64, kernel: Smearing) -> Result<Self, OracleError> {
        if n < 8 {
            return Err(OracleError::GridTooSmall(n));
        }
        if !(width > 0.0 && width <= 1.0 / (4.0 * n as f64)) {
            return Err(OracleError::WidthTooLarge { width, n });
        }
        Ok(QuadratureSpec { n, width, kernel })
    }

    /// Fejér smearing of order `4N + 1`.
    pub fn fejer(n: usize) -> Result<Self, OracleError> {
        Self::new(n, 1.0 / (4 * n + 1) as f64, Smearing::Fejer)
    }

    /// The symmetric nascent delta sampled on the nodes `l/N`.
    fn delta_table(&self) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|l| {
                let x = l as f64 / n as f64;
                match self.kernel {
                    Smearing::Fejer => {
                        let m = (1.0 / self.width).ceil();
                        if l == 0 {
                            m
                        } else {
                            let r = (PI * m * x).sin() / (PI * x).sin();
                            r * r / m
                        }
                    }
                    Smearing::Gaussian => (-3..=3)
                        .map(|k| {
                            let d = x + k as f64;
                            (-d * d / (2.0 * self.width * self.width)).exp()
                        })
                        .sum(),
                }
            })
            .collect()
    }
}

/// `((r/N))` from the integer numerator, exactly odd under `r ↦ −r`.
fn saw_node(r: i64, n: i64) -> f64 {
    let r = r.rem_euclid(n);
    if r == 0 {
        0.0
    } else {
        (2 * r - n) as f64 / (2 * n) as f64
    }
}

/// `s(q,p)` summed in floating point.
pub fn dedekind_numeric(q: i64, p: i64) -> Result<Real, OracleError> {
    if p <= 0 || q.gcd(&p) != 1 {
        return Err(OracleError::Domain(format!("({q}, {p}) is not a lens pair")));
    }
    let saw = |x: f64| {
        let f = x - x.floor();
        if f == 0.0 {
            0.0
        } else {
            f - 0.5
        }
    };
    let mut s = 0.0;
    for k in 0..p {
        let r = (q * k).rem_euclid(p);
        s += saw(k as f64 / p as f64) * saw(r as f64 / p as f64);
    }
    Ok(Real::new(s, 10.0 * f64::EPSILON * p as f64))
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

#[allow(clippy::too_many_arguments)]
fn adaptive(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64, whole: f64, m: f64, fm: f64, tol: f64, depth: u32) -> Option<(f64, f64)> {
    let (lm, flm, left) = simpson(f, a, fa, m, fm);
    let (rm, frm, right) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Some((left + right + delta / 15.0, delta.abs() / 15.0));
    }
    if depth == 0 {
        return None;
    }
    let (l, el) = adaptive(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)?;
    let (r, er) = adaptive(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)?;
    Some((l + r, el + er))
}

/// `H_x = ∫₀¹ (1 − tˣ)/(1 − t) dt` by adaptive Simpson quadrature.
pub fn harmonic_integral(x: f64, tol: f64) -> Result<Real, OracleError> {
    if x.is_nan() || x <= 0.0 {
        return Err(OracleError::Domain(format!("x = {x} must be positive")));
    }
    // t = sᵏ with kx ≥ 2 removes the endpoint singularity of tˣ.
    let k = (2.0 / x).ceil().max(1.0);
    let f = |s: f64| {
        if s >= 1.0 {
            x * k
        } else {
            let t = s.powf(k);
            (1.0 - t.powf(x)) / (1.0 - t) * k * s.powf(k - 1.0)
        }
    };
    let (fa, fb) = (f(0.0), f(1.0));
    let (m, fm, whole) = simpson(&f, 0.0, fa, 1.0, fb);
    let (v, e) = adaptive(&f, 0.0, fa, 1.0, fb, whole, m, fm, tol, 60).ok_or(OracleError::NoConvergence(tol))?;
    Ok(Real::new(v, e.max(f64::EPSILON)))
}

fn det_f64(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for c in 0..n {
        let k = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        if m[k][c] == 0.0 {
            return 0.0;
        }
        if k != c {
            m.swap(k, c);
            det = -det;
        }
        det *= m[c][c];
        for i in c + 1..n {
            let f = m[i][c] / m[c][c];
            for j in c..n {
                m[i][j] -= f * m[c][j];
            }
        }
    }
    det
}

/// Pairing of two boundary kernels `η(a·Δ) δ(Δt) dt₂` (A side) and the pullback of
/// `η(b·Δ) δ(Δt) dt₂` (B side), `Δ = (t₁−t₂, θ₁−θ₂)`, summed over both leg matchings.
///
/// The deltas are Fejér or Gaussian nascent deltas sampled on an `N×N` grid of the
/// differences and normalised to unit mass on that grid.
pub fn circle_pairing_numeric(a: [i64; 2], b: [i64; 2], g: GluingMatrix, spec: &QuadratureSpec) -> Result<Real, OracleError> {
    let n = spec.n as i64;
    if g.p != 0 && n % g.p != 0 {
        return Err(OracleError::GridNotMultiple { n: spec.n, p: g.p });
    }
    let (m, p, nn, q) = (g.m, g.p, g.n, g.q);
    let bp = [b[0] * m + b[1] * nn, b[0] * p + b[1] * q];
    // 1-forms on (t₁, θ₁, t₂, θ₂): d(Δt), dt₂, φ*d(Δt), φ*dt₂
    let rows = vec![
        vec![1.0, 0.0, -1.0, 0.0],
        vec![0.0, 0.0, 1.0, 0.0],
        vec![m as f64, p as f64, -m as f64, -p as f64],
        vec![0.0, 0.0, m as f64, p as f64],
    ];
    let jac = det_f64(rows);
    let delta = spec.delta_table();
    let idx = |r: i64| r.rem_euclid(n) as usize;
    let (mut mass, mut acc, mut off) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let di = delta[idx(i)];
        for j in 0..n {
            let w = di * delta[idx(m * i + p * j)];
            if w == 0.0 {
                continue;
            }
            mass += w;
            let v = saw_node(a[0] * i + a[1] * j, n) * saw_node(bp[0] * i + bp[1] * j, n);
            acc += w * v;
            if idx(i) != 0 || idx(m * i + p * j) != 0 {
                off += w;
            }
        }
    }
    let value = 0.5 * jac * acc / mass;
    Ok(Real::new(value, (0.5 * jac).abs() * 0.25 * off / mass))
}

/// `∫_{T²} dt ∧ φ*dt` as a Riemann sum of its constant density.
pub fn gamma0_pairing_numeric(g: GluingMatrix, spec: &QuadratureSpec) -> Real {
    let n = spec.n;
    let h = 1.0 / (n * n) as f64;
    let density = det_f64(vec![vec![1.0, 0.0], vec![g.m as f64, g.p as f64]]);
    let mut s = 0.0;
    for _ in 0..n * n {
        s += density * h;
    }
    Real::new(s, (n * n) as f64 * f64::EPSILON * density.abs())
}

/// The smeared coincident product `∫ δ(t) η(t) dt` behind the type-A loop.
pub fn loop_a_numeric(spec: &QuadratureSpec) -> Real {
    let n = spec.n as i64;
    let delta = spec.delta_table();
    let mass: f64 = delta.iter().sum();
    // Pair r with −r so that the odd integrand cancels term by term.
    let mut acc = 0.0;
    for r in 1..=n / 2 {
        let (x, y) = (r as usize, (n - r) as usize);
        if x == y {
            acc += delta[x] * saw_node(r, n);
        } else {
            acc += delta[x] * saw_node(r, n) + delta[y] * saw_node(n - r, n);
        }
    }
    Real::new(acc / mass, 0.0)
}

/// Checks `s(q,p) + s(p,q)` against the reciprocity law for all coprime pairs up to `pmax`.
pub fn reciprocity_check(pmax: i64) -> Result<usize, OracleError> {
    let mut count = 0;
    for p in 1..=pmax {
        for q in 1..=pmax {
            if p.gcd(&q) != 1 {
                continue;
            }
            let lhs = dedekind_sum_fast(q, p).map_err(|e| OracleError::Domain(e.to_string()))?
                + dedekind_sum_fast(p, q).map_err(|e| OracleError::Domain(e.to_string()))?;
            if lhs != reciprocity_rhs(q, p) {
                return Err(OracleError::Reciprocity(q, p));
            }
            count += 1;
        }
    }
    Ok(count)
}

/// One line of the verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    pub max_err: f64,
}

fn check(name: &str, max_err: f64, tol: f64) -> CheckLine {
    CheckLine { name: name.to_string(), pass: max_err.is_finite() && max_err <= tol, max_err }
}

/// Floating-point and exact cross-checks of the main computation.
///
/// `full` widens every range; the quick run takes a few seconds in release builds.
pub fn verify_suite(full: bool) -> Vec<CheckLine> {
    let (pmax, qmax, grid_p, e2e_p) = if full { (2000, 200, 5, 30) } else { (200, 50, 3, 8) };
    let mut out = Vec::new();

    let mut err = 0.0f64;
    for p in 1..=pmax {
        for q in 0..p {
            if q.gcd(&p) != 1 {
                continue;
            }
            match (dedekind_sum_direct(q, p), dedekind_sum_fast(q, p)) {
                (Ok(a), Ok(b)) if a == b => {}
                _ => err = f64::INFINITY,
            }
        }
    }
    out.push(check("dedekind direct = fast", err, 0.0));

    let err = match reciprocity_check(qmax) {
        Ok(_) => 0.0,
        Err(_) => f64::INFINITY,
    };
    out.push(check("dedekind reciprocity", err, 0.0));

    let mut err = 0.0f64;
    for p in 1..=qmax {
        for q in 0..p {
            if q.gcd(&p) != 1 {
                continue;
            }
            let exact = dedekind_sum_direct(q, p).map(|s| to_f64(&s)).unwrap_or(f64::NAN);
            let num = dedekind_numeric(q, p).map(|r| r.value).unwrap_or(f64::NAN);
            err = err.max((exact - num).abs());
        }
    }
    out.push(check("dedekind cotangent form", err, 1e-12));

    let mut err = 0.0f64;
    for p in 1..=50 {
        let x = 1.0 / p as f64;
        let quad = harmonic_integral(x, 1e-13).map(|r| r.value).unwrap_or(f64::NAN);
        let series = harmonic_real(x).map(|r| r.value).unwrap_or(f64::NAN);
        err = err.max((quad - series).abs());
    }
    out.push(check("harmonic H(1/p) integral = series", err, 1e-10));

    let mut err = 0.0f64;
    let mut g0 = 0.0f64;
    let mut loop_a = 0.0f64;
    for p in 1..=grid_p {
        for q in 1..=p {
            if q.gcd(&p) != 1 {
                continue;
            }
            let Ok(g) = canonical_mn(p, q) else { return vec![check("canonical matrix", f64::INFINITY, 0.0)] };
            let exact = -(p as f64) / 2.0 * dedekind_sum_direct(q, p).map(|s| to_f64(&s)).unwrap_or(f64::NAN);
            let Ok(spec) = QuadratureSpec::fejer(240 * p as usize) else { continue };
            let v = circle_pairing_numeric([0, 1], [0, 1], g, &spec).map(|r| r.value).unwrap_or(f64::NAN);
            err = err.max((v - exact).abs());
            g0 = g0.max((gamma0_pairing_numeric(g, &spec).value - p as f64).abs());
            loop_a = loop_a.max(loop_a_numeric(&spec).value.abs());
        }
    }
    out.push(check("theta pairing Riemann sum", err, 1e-3));
    out.push(check("gamma0 pairing Riemann sum", g0, 1e-9));
    out.push(check("type-A loop Riemann sum", loop_a, 1e-15));

    let sc = example_double_constants();
    let e = coeff_e(&sc);
    let mut err = 0.0f64;
    for p in 1..=e2e_p {
        for q in 0..p {
            if q.gcd(&p) != 1 {
                continue;
            }
            let ok = LensSpace::new(p, q).ok().and_then(|l| {
                let a = end_to_end_weight_mt(&l, &sc).ok()?;
                let b = two_loop_weight_mt(&l, &e).ok()?;
                Some(a == b)
            });
            if ok != Some(true) {
                err = f64::INFINITY;
            }
        }
    }
    out.push(check("diagram pipeline = closed form", err, 0.0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_rules() {
        assert!(matches!(QuadratureSpec::new(4, 0.01, Smearing::Fejer), Err(OracleError::GridTooSmall(4))));
        assert!(matches!(QuadratureSpec::new(16, 0.1, Smearing::Fejer), Err(OracleError::WidthTooLarge { .. })));
        assert!(QuadratureSpec::fejer(16).is_ok());
    }

    #[test]
    fn dedekind_floats() {
        assert!((dedekind_numeric(1, 3).unwrap().value - 1.0 / 18.0).abs() < 1e-15);
        assert_eq!(dedekind_numeric(0, 1).unwrap().value, 0.0);
    }

    #[test]
    fn harmonic_quadrature() {
        assert!((harmonic_integral(1.0, 1e-12).unwrap().value - 1.0).abs() < 1e-10);
        assert!((harmonic_integral(2.0, 1e-12).unwrap().value - 1.5).abs() < 1e-10);
        let h = harmonic_integral(0.5, 1e-12).unwrap().value;
        assert!((h - (2.0 - 2.0 * 2f64.ln())).abs() < 1e-10);
    }

    #[test]
    fn pairing_numeric() {
        let g = canonical_mn(3, 1).unwrap();
        let spec = QuadratureSpec::fejer(720).unwrap();
        let v = circle_pairing_numeric([0, 1], [0, 1], g, &spec).unwrap();
        assert!((v.value + 1.0 / 12.0).abs() < 1e-3, "{v}");
        assert!((gamma0_pairing_numeric(g, &spec).value - 3.0).abs() < 1e-9);
        assert!(loop_a_numeric(&spec).value.abs() < 1e-15);
        assert!(circle_pairing_numeric([0, 1], [0, 1], g, &QuadratureSpec::fejer(100).unwrap()).is_err());
    }

    #[test]
    fn reciprocity_small() {
        assert_eq!(reciprocity_check(1).unwrap(), 1);
        assert!(reciprocity_check(30).unwrap() > 0);
    }
}
