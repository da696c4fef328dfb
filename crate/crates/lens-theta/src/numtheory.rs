//! Sawtooth, Dedekind sums, `f(θ)` and the analytic harmonic numbers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use std::f64::consts::PI;
use std::fmt;
use thiserror::Error;

use crate::Q;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("q = {q} and p = {p} are not coprime")]
    NotCoprime { q: i64, p: i64 },
    #[error("modulus must be positive, got {0}")]
    NonPositiveModulus(i64),
    #[error("pole of the harmonic extension at x = {0}")]
    Pole(f64),
}

/// A floating value with an absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real {
    pub value: f64,
    pub err: f64,
}

impl Real {
    pub fn new(value: f64, err: f64) -> Self {
        debug_assert!(err >= 0.0 && err.is_finite());
        Real { value, err }
    }

    pub fn exact(value: f64) -> Self {
        Real { value, err: 0.0 }
    }

    pub fn scale(self, k: f64) -> Self {
        Real::new(self.value * k, self.err * k.abs())
    }
}

impl std::ops::Add for Real {
    type Output = Real;
    fn add(self, o: Real) -> Real {
        Real::new(self.value + o.value, self.err + o.err + f64::EPSILON * (self.value + o.value).abs())
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.15} ± {:.1e}", self.value, self.err)
    }
}

/// `n / d` as an exact rational.
pub fn rat(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn to_f64(x: &Q) -> f64 {
    // Reduce first so huge numerators and denominators do not overflow to inf/inf.
    let (i, frac) = (x.floor(), x - x.floor());
    let fi = i.to_integer().to_f64().unwrap_or(f64::NAN);
    let ff = frac.numer().to_f64().unwrap_or(f64::NAN) / frac.denom().to_f64().unwrap_or(f64::NAN);
    fi + ff
}

/// `((x))`: zero at integers, otherwise `x − ⌊x⌋ − 1/2`.
pub fn sawtooth(x: &Q) -> Q {
    if x.is_integer() {
        Q::zero()
    } else {
        x - x.floor() - rat(1, 2)
    }
}

/// The circle propagator `η_{S¹}` evaluated on a difference `s − s'`.
pub fn eta_circle(x: &Q) -> Q {
    sawtooth(x)
}

fn check_lens(q: i64, p: i64) -> Result<(), NumError> {
    if p <= 0 {
        return Err(NumError::NonPositiveModulus(p));
    }
    if q.gcd(&p) != 1 {
        return Err(NumError::NotCoprime { q, p });
    }
    Ok(())
}

/// `s(q,p) = Σ_{k=0}^{p−1} ((k/p))((qk/p))`, summed term by term.
///
/// For `0 < k < p` the summand is `(2k − p)(2r − p) / 4p²` with `r = qk mod p`,
/// so the whole sum is accumulated as one integer numerator.
pub fn dedekind_sum_direct(q: i64, p: i64) -> Result<Q, NumError> {
    check_lens(q, p)?;
    let qr = q.rem_euclid(p) as i128;
    let p128 = p as i128;
    let mut acc: i128 = 0;
    let mut r: i128 = 0;
    for k in 1..p128 {
        r += qr;
        if r >= p128 {
            r -= p128;
        }
        if r != 0 {
            acc += (2 * k - p128) * (2 * r - p128);
        }
    }
    Ok(Q::new(BigInt::from(acc), BigInt::from(4 * p128 * p128)))
}

/// `s(q,p)` by Euclid-style descent on the reciprocity law.
pub fn dedekind_sum_fast(q: i64, p: i64) -> Result<Q, NumError> {
    check_lens(q, p)?;
    if let Some((n, d)) = descent_i128(q.rem_euclid(p) as i128, p as i128) {
        return Ok(Q::new(BigInt::from(n), BigInt::from(d)));
    }
    let mut h = BigInt::from(q.rem_euclid(p));
    let mut k = BigInt::from(p);
    let mut sign = Q::one();
    let mut acc = Q::zero();
    let quarter = rat(1, 4);
    let twelfth = rat(1, 12);
    // s(h,k) = −s(k mod h, h) − 1/4 + (h/k + k/h + 1/(hk)) / 12
    while !h.is_zero() {
        let hq = Q::from_integer(h.clone());
        let kq = Q::from_integer(k.clone());
        let corr = -&quarter + &twelfth * (&hq / &kq + &kq / &hq + Q::one() / (&hq * &kq));
        acc += &sign * corr;
        sign = -sign;
        let next = k.mod_floor(&h);
        k = h;
        h = next;
    }
    debug_assert!(k.is_one());
    Ok(acc)
}

/// The same descent in machine integers; `None` on overflow.
fn descent_i128(mut h: i128, mut k: i128) -> Option<(i128, i128)> {
    let (mut num, mut den, mut sign) = (0i128, 1i128, 1i128);
    while h != 0 {
        // −1/4 + (h² + k² + 1)/(12hk) = (h² + k² + 1 − 3hk)/(12hk)
        let hk = h.checked_mul(k)?;
        let sq = h.checked_mul(h)?.checked_add(k.checked_mul(k)?)?.checked_add(1)?;
        let a = sign * sq.checked_sub(hk.checked_mul(3)?)?;
        let b = hk.checked_mul(12)?;
        num = num.checked_mul(b)?.checked_add(a.checked_mul(den)?)?;
        den = den.checked_mul(b)?;
        let g = num.gcd(&den);
        (num, den) = (num / g, den / g);
        sign = -sign;
        (h, k) = (k.rem_euclid(h), h);
    }
    Some((num, den))
}

/// The classical reciprocity right-hand side `−1/4 + (p/q + q/p + 1/(pq))/12`.
pub fn reciprocity_rhs(q: i64, p: i64) -> Q {
    let (qq, pq) = (int(q), int(p));
    rat(-1, 4) + rat(1, 12) * (&pq / &qq + &qq / &pq + Q::one() / (&pq * &qq))
}

/// `ψ(x)` for `x ≥ 10` by the Stirling-type asymptotic series.
fn digamma_asymptotic(x: f64) -> f64 {
    // B_{2k} / (2k) for k = 1..8
    const C: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 120.0,
        1.0 / 252.0,
        -1.0 / 240.0,
        1.0 / 132.0,
        -691.0 / 32760.0,
        1.0 / 12.0,
        -3617.0 / 8160.0,
    ];
    let inv2 = 1.0 / (x * x);
    let mut pow = inv2;
    let mut s = 0.0;
    for c in C {
        s += c * pow;
        pow *= inv2;
    }
    x.ln() - 0.5 / x - s
}

/// The analytic harmonic numbers `H_x = ψ(x+1) + γ`.
pub fn harmonic_real(x: f64) -> Result<Real, NumError> {
    if !x.is_finite() {
        return Err(NumError::Pole(x));
    }
    if x <= -1.0 && (x + 1.0).fract() == 0.0 {
        return Err(NumError::Pole(x));
    }
    if x.fract() == 0.0 && (0.0..=1.0e6).contains(&x) {
        let n = x as u64;
        let mut h = 0.0;
        // Smallest terms first.
        for k in (1..=n).rev() {
            h += 1.0 / k as f64;
        }
        return Ok(Real::new(h, 2.0 * f64::EPSILON * (n as f64 + 1.0)));
    }
    // ψ(x+1) = ψ(x+1+N) − Σ_{k=1}^{N} 1/(x+k)
    let shift = (30.0 - x).max(0.0).ceil() as u64;
    let mut tail = 0.0;
    for k in (1..=shift).rev() {
        tail += 1.0 / (x + k as f64);
    }
    let z = x + 1.0 + shift as f64;
    let h = digamma_asymptotic(z) - tail + EULER_GAMMA;
    let err = 8.0 * f64::EPSILON * (z.ln() + tail.abs() + 1.0);
    Ok(Real::new(h, err))
}

/// `f(θ) = cos(2πθ)((θ)) − sin(2πθ) ln(2|sin πθ|) / π`, with `f(k) = 0` on integers.
pub fn f_theta(x: &Q) -> Real {
    if x.is_integer() {
        return Real::exact(0.0);
    }
    let t = to_f64(&(x - x.floor()));
    let saw = to_f64(&sawtooth(x));
    let v = (2.0 * PI * t).cos() * saw - (2.0 * PI * t).sin() * (2.0 * (PI * t).sin().abs()).ln() / PI;
    Real::new(v, 16.0 * f64::EPSILON * (1.0 + v.abs()))
}

/// Formats an exact rational as `a/b`, or `a` when integral.
pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `a/b` or `a` into an exact rational.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Q::new(n.trim().parse().ok()?, d))
        }
        None => Some(Q::from_integer(s.parse().ok()?)),
    }
}
