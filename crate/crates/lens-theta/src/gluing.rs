//! Gluing two solid tori into `L(p,q)`: boundary pullback, the torus pairing of
//! A- and B-states, reduction of the redshirt residual fields, and the
//! two-loop weights both from the pipeline and in closed form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use thiserror::Error;

use crate::algebra::{classify_splitting, coeff_e, coeff_e_prime, SplitConstants, SplittingClass};
use crate::forms::{Coord, Factor, FormError, FormExpr, Lin, Pt};
use crate::graphs::{catalogue, evaluate_diagram, GraphError, RKind, Rep, ResVar, ResidualMonomial, Side, StateTerm};
use crate::numtheory::{dedekind_sum_direct, eta_circle, f_theta, harmonic_real, int, rat, sawtooth, NumError, Real};
use crate::Q;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GluingError {
    #[error("p = {p} and q = {q} are not coprime")]
    NotCoprime { p: i64, q: i64 },
    #[error("mq - np = {0}, expected 1")]
    Determinant(i64),
    #[error("p must be non-negative, got {0}")]
    NegativeP(i64),
    #[error("bulk factor {0} in a boundary form")]
    BulkFactor(String),
    #[error("torus integral outside the evaluable family: {0}")]
    NotEvaluable(String),
    #[error("p = 0 has no redshirt residual fields")]
    NoReduction,
    #[error("S^1 x S^2 branch; the theta pairing coefficient is {0}")]
    S1xS2(Q),
    #[error("splitting is {0}, end-to-end evaluation needs a Manin triple")]
    NotManin(SplittingClass),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Num(#[from] NumError),
}

/// `φ = (m p; n q)` with `mq − np = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GluingMatrix {
    pub m: i64,
    pub p: i64,
    pub n: i64,
    pub q: i64,
}

impl GluingMatrix {
    pub fn new(m: i64, p: i64, n: i64, q: i64) -> Result<Self, GluingError> {
        if p < 0 {
            return Err(GluingError::NegativeP(p));
        }
        let det = m * q - n * p;
        if det != 1 {
            return Err(GluingError::Determinant(det));
        }
        Ok(GluingMatrix { m, p, n, q })
    }

    pub fn det(&self) -> i64 {
        self.m * self.q - self.n * self.p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwistSide {
    Left,
    Right,
}

/// The extended-Euclid gluing matrix, `0 ≤ m < p`.
pub fn canonical_mn(p: i64, q: i64) -> Result<GluingMatrix, GluingError> {
    if p < 0 {
        return Err(GluingError::NegativeP(p));
    }
    if p.gcd(&q) != 1 {
        return Err(GluingError::NotCoprime { p, q });
    }
    match p {
        0 => GluingMatrix::new(q, 0, 0, q),
        1 => GluingMatrix::new(0, 1, -1, q),
        _ => {
            let e = q.extended_gcd(&p);
            // e.x·q + e.y·p = ±1
            let m = (e.x * e.gcd.signum()).rem_euclid(p);
            let n = (m * q - 1) / p;
            GluingMatrix::new(m, p, n, q)
        }
    }
}

/// Composes with the twist `T^k` on one side.
pub fn dehn_twist(g: GluingMatrix, side: TwistSide, k: i64) -> GluingMatrix {
    let out = match side {
        TwistSide::Left => GluingMatrix { q: g.q + k * g.p, n: g.n + k * g.m, ..g },
        TwistSide::Right => GluingMatrix { m: g.m + k * g.p, n: g.n + k * g.q, ..g },
    };
    debug_assert_eq!(out.det(), 1);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LensSpace {
    pub matrix: GluingMatrix,
}

impl LensSpace {
    pub fn new(p: i64, q: i64) -> Result<Self, GluingError> {
        Ok(LensSpace { matrix: canonical_mn(p, q)? })
    }

    pub fn with_mn(p: i64, q: i64, m: i64, n: i64) -> Result<Self, GluingError> {
        if p.gcd(&q) != 1 {
            return Err(GluingError::NotCoprime { p, q });
        }
        Ok(LensSpace { matrix: GluingMatrix::new(m, p, n, q)? })
    }

    pub fn is_s1_s2(&self) -> bool {
        self.matrix.p == 0
    }
}

/// `φ*` on boundary forms: `t ↦ mt + pθ`, `θ ↦ nt + qθ`.
pub fn pullback_boundary(e: &FormExpr, g: GluingMatrix) -> Result<FormExpr, GluingError> {
    check_boundary(e)?;
    Ok(e.map_circle(|c| match c {
        Coord::T(x) => Lin::new([(Coord::T(x), g.m), (Coord::Theta(x), g.p)]),
        Coord::Theta(x) => Lin::new([(Coord::T(x), g.n), (Coord::Theta(x), g.q)]),
    })?)
}

fn check_boundary(e: &FormExpr) -> Result<(), GluingError> {
    for (fs, _) in e.terms() {
        for f in fs {
            let bulk = matches!(f, Factor::Mu(_) | Factor::DeltaD(..) | Factor::EtaD(..) | Factor::Psi(_))
                || f.points().iter().any(Pt::is_bulk);
            if bulk {
                return Err(GluingError::BulkFactor(f.to_string()));
            }
        }
    }
    Ok(())
}

type QVec = Vec<Q>;

/// Row-reduces `rows` and returns pivot columns, or `None` if rank-deficient.
fn pivot_columns(rows: &[Vec<i64>], width: usize) -> Option<Vec<usize>> {
    let mut m: Vec<QVec> = rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
    let mut piv = Vec::new();
    let mut row = 0;
    for col in 0..width {
        if row == m.len() {
            break;
        }
        let Some(k) = (row..m.len()).find(|&k| !m[k][col].is_zero()) else { continue };
        m.swap(row, k);
        for k in 0..m.len() {
            if k != row && !m[k][col].is_zero() {
                let f = &m[k][col] / &m[row][col];
                for c in 0..width {
                    let d = &f * &m[row][c];
                    m[k][c] -= d;
                }
            }
        }
        piv.push(col);
        row += 1;
    }
    (row == m.len()).then_some(piv)
}

fn det_q(mut m: Vec<QVec>) -> Q {
    let n = m.len();
    let mut det = Q::one();
    for c in 0..n {
        let Some(k) = (c..n).find(|&k| !m[k][c].is_zero()) else { return Q::zero() };
        if k != c {
            m.swap(k, c);
            det = -det;
        }
        det *= &m[c][c];
        for k in c + 1..n {
            let f = &m[k][c] / &m[c][c];
            for j in c..n {
                let d = &f * &m[c][j];
                m[k][j] -= d;
            }
        }
    }
    det
}

fn inverse_q(m: &[QVec]) -> Vec<QVec> {
    let n = m.len();
    let mut a: Vec<QVec> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = r.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    for c in 0..n {
        let k = (c..n).find(|&k| !a[k][c].is_zero()).expect("invertible");
        a.swap(k, c);
        let inv = Q::one() / &a[c][c];
        for x in a[c].iter_mut() {
            *x *= &inv;
        }
        for k in 0..n {
            if k != c && !a[k][c].is_zero() {
                let f = a[k][c].clone();
                for j in 0..2 * n {
                    let d = &f * &a[c][j];
                    a[k][j] -= d;
                }
            }
        }
    }
    a.into_iter().map(|r| r[n..].to_vec()).collect()
}

fn frac(x: &Q) -> Q {
    x - x.floor()
}

/// `B₂({x}) = {x}² − {x} + 1/6`.
fn bernoulli2(x: &Q) -> Q {
    let f = frac(x);
    &f * &f - &f + rat(1, 6)
}

/// `∫₀¹ ((c₁ + a s))((c₂ + b s)) ds` for non-zero integers `a, b`.
pub fn shifted_circle_product_mean(a: i64, c1: &Q, b: i64, c2: &Q) -> Q {
    let g = a.gcd(&b);
    let (a1, b1) = (a / g, b / g);
    let d = int(b1) * c1 - int(a1) * c2;
    bernoulli2(&d) / int(2 * a1 * b1)
}

/// `∫_{(T²)^k}` of a boundary form: every point is integrated out.
///
/// Circle deltas are solved on the finite set of torus points they cut out; circle
/// functions are then constant on each solution component or integrated over it.
pub fn torus_integral(e: &FormExpr) -> Result<Q, GluingError> {
    check_boundary(e)?;
    let pts = e.points();
    let index: BTreeMap<Coord, usize> = pts
        .iter()
        .enumerate()
        .flat_map(|(k, &p)| [(Coord::T(p), 2 * k), (Coord::Theta(p), 2 * k + 1)])
        .collect();
    let mut total = Q::zero();
    for (fs, c) in e.terms() {
        total += c * integrate_term(fs, &index)?;
    }
    Ok(total)
}

fn lin_vec(l: &Lin, index: &BTreeMap<Coord, usize>) -> Vec<i64> {
    let mut v = vec![0; index.len()];
    for &(c, a) in l.parts() {
        v[index[&c]] += a;
    }
    v
}

fn integrate_term(fs: &[Factor], index: &BTreeMap<Coord, usize>) -> Result<Q, GluingError> {
    let dim = index.len();
    let mut one_forms: Vec<Vec<i64>> = Vec::new();
    let mut deltas: Vec<Vec<i64>> = Vec::new();
    let mut etas: Vec<Vec<i64>> = Vec::new();
    for f in fs {
        match f {
            Factor::Dt(p) | Factor::Dtheta(p) => {
                let c = if matches!(f, Factor::Dt(_)) { Coord::T(*p) } else { Coord::Theta(*p) };
                let mut v = vec![0; dim];
                v[index[&c]] = 1;
                one_forms.push(v);
            }
            Factor::DeltaC(l) => {
                let v = lin_vec(l, index);
                one_forms.push(v.clone());
                deltas.push(v);
            }
            Factor::EtaC(l) => etas.push(lin_vec(l, index)),
            f => return Err(GluingError::NotEvaluable(f.to_string())),
        }
    }
    if one_forms.len() != dim {
        return Ok(Q::zero());
    }
    let vol = det_q(one_forms.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect());
    if vol.is_zero() {
        return Ok(Q::zero());
    }
    let piv = pivot_columns(&deltas, dim).ok_or_else(|| GluingError::NotEvaluable("dependent circle deltas".into()))?;
    let free: Vec<usize> = (0..dim).filter(|c| !piv.contains(c)).collect();
    let bmat: Vec<QVec> = deltas.iter().map(|r| piv.iter().map(|&c| int(r[c])).collect()).collect();
    let binv = inverse_q(&bmat);
    let scale = det_q(bmat).abs();
    // B⁻¹C, the dependence of pivot coordinates on free ones.
    let dep: Vec<QVec> = (0..piv.len())
        .map(|i| free.iter().map(|&f| (0..piv.len()).map(|k| &binv[i][k] * int(deltas[k][f])).sum()).collect())
        .collect();
    let branches = lattice_points(&binv);
    debug_assert_eq!(int(branches.len() as i64), scale);
    // Integer slope of each eta along the free torus, rescaled by |det B|.
    let mut slopes = Vec::new();
    for m in &etas {
        let mut w = Vec::new();
        for (j, &f) in free.iter().enumerate() {
            let mut x = int(m[f]);
            for (i, &pc) in piv.iter().enumerate() {
                x -= int(m[pc]) * &dep[i][j];
            }
            let y = x * &scale;
            debug_assert!(y.is_integer());
            w.push(y.to_integer().to_i64().expect("small slope"));
        }
        slopes.push(w);
    }
    let mut sum = Q::zero();
    for u0 in &branches {
        let offs: Vec<Q> = etas.iter().map(|m| piv.iter().enumerate().map(|(i, &pc)| int(m[pc]) * &u0[i]).sum()).collect();
        sum += branch_integral(&offs, &slopes)?;
    }
    Ok(vol * sum / scale)
}

/// The finite group `B⁻¹ℤʳ / ℤʳ`.
fn lattice_points(binv: &[QVec]) -> Vec<QVec> {
    let r = binv.len();
    let gens: Vec<QVec> = (0..r).map(|k| (0..r).map(|i| frac(&binv[i][k])).collect()).collect();
    let mut seen: BTreeSet<QVec> = BTreeSet::new();
    let zero: QVec = vec![Q::zero(); r];
    seen.insert(zero.clone());
    let mut queue = vec![zero];
    while let Some(x) = queue.pop() {
        for g in &gens {
            let y: QVec = x.iter().zip(g).map(|(a, b)| frac(&(a + b))).collect();
            if seen.insert(y.clone()) {
                queue.push(y);
            }
        }
    }
    seen.into_iter().collect()
}

/// `∫_{T^f} Π ((cᵢ + wᵢ·y)) dy` with integer `wᵢ`.
fn branch_integral(offs: &[Q], slopes: &[Vec<i64>]) -> Result<Q, GluingError> {
    let mut value = Q::one();
    let mut moving = Vec::new();
    for (c, w) in offs.iter().zip(slopes) {
        if w.iter().all(|&x| x == 0) {
            value *= sawtooth(c);
        } else {
            moving.push((c, w));
        }
    }
    if value.is_zero() {
        return Ok(value);
    }
    match moving.as_slice() {
        [] => Ok(value),
        [_] => Ok(Q::zero()),
        [(c1, w1), (c2, w2)] => {
            let parallel = (0..w1.len()).all(|i| (0..w1.len()).all(|j| w1[i] * w2[j] == w1[j] * w2[i]));
            if !parallel {
                return Ok(Q::zero());
            }
            let g = w1.iter().fold(0i64, |g, &x| g.gcd(&x));
            let lead = w1.iter().position(|&x| x != 0).expect("non-zero slope");
            let a = w1[lead] / g;
            let unit = w1[lead] / a;
            let b = w2[lead] / unit;
            Ok(value * shifted_circle_product_mean(a, c1, b, c2))
        }
        _ => Err(GluingError::NotEvaluable(format!("{} circle functions along a common torus", moving.len()))),
    }
}

/// The kernel with its odd-degree part multiplied by `sign`.
fn twist_odd(k: &FormExpr, sign: i64) -> Result<FormExpr, GluingError> {
    if sign == 1 {
        return Ok(k.clone());
    }
    let mut out = FormExpr::zero();
    for (fs, c) in k.terms() {
        let deg: u32 = fs.iter().map(Factor::degree).sum();
        let c = if deg % 2 == 1 { -c.clone() } else { c.clone() };
        out = out.add(&FormExpr::product(c, fs.clone())?);
    }
    Ok(out)
}

fn residual_parity(r: &ResidualMonomial) -> i64 {
    if r.vars.iter().filter(|v| v.odd).count() % 2 == 1 {
        -1
    } else {
        1
    }
}

fn max_point(t: &StateTerm) -> u32 {
    let k = t.kernel.points().iter().map(|p| p.id).max().unwrap_or(0);
    t.legs.iter().map(|l| l.0).max().unwrap_or(0).max(k)
}

fn max_label(t: &StateTerm) -> u32 {
    t.labels().last().copied().unwrap_or(0)
}

fn shift_points(t: &StateTerm, f: impl Fn(u32) -> u32) -> Result<StateTerm, GluingError> {
    let mut out = t.clone();
    out.kernel = t.kernel.relabel(|p| Pt { id: f(p.id), loc: p.loc })?;
    for l in &mut out.legs {
        l.0 = f(l.0);
    }
    Ok(out)
}

/// The product `a·b` of two state terms on the same side, labels kept apart.
pub fn multiply(a: &StateTerm, b: &StateTerm) -> Result<Option<StateTerm>, GluingError> {
    let (pa, la) = (max_point(a), max_label(a));
    let b = shift_points(&b.relabel_indices(|l| l + la + 1), |x| x + pa + 1)?;
    let mut vars = a.residual.vars.clone();
    vars.extend(b.residual.vars.iter().copied());
    let Some((s, residual)) = ResidualMonomial::normalize(vars) else { return Ok(None) };
    let kernel = twist_odd(&a.kernel, residual_parity(&b.residual))?.wedge(&b.kernel)?;
    if kernel.is_zero() {
        return Ok(None);
    }
    let mut lie = a.lie.clone();
    lie.extend(b.lie.iter().cloned());
    let mut legs = a.legs.clone();
    legs.extend(b.legs.iter().copied());
    Ok(Some(StateTerm {
        coeff: &a.coeff * &b.coeff * int(s),
        lie,
        residual,
        kernel,
        legs,
        eps_power: a.eps_power + b.eps_power,
        vertices: a.vertices + b.vertices,
        source: format!("{}·{}", a.source, b.source),
    }))
}

fn perm_sign(sigma: &[usize]) -> i64 {
    let mut s = 1;
    for i in 0..sigma.len() {
        for j in i + 1..sigma.len() {
            if sigma[i] > sigma[j] {
                s = -s;
            }
        }
    }
    s
}

/// Pairs an A-term with a B-term along a leg bijection: A leg `k` meets B leg `sigma[k]`.
/// Boundary superfields are odd, so the bijection enters with its sign.
pub fn pair_terms(a: &StateTerm, b: &StateTerm, sigma: &[usize], g: GluingMatrix) -> Result<Option<StateTerm>, GluingError> {
    if a.legs.len() != b.legs.len() || sigma.len() != a.legs.len() {
        return Ok(None);
    }
    let (pa, la) = (max_point(a), max_label(a));
    let mut pmap: BTreeMap<u32, u32> = BTreeMap::new();
    let mut lmap: BTreeMap<u32, u32> = BTreeMap::new();
    for (k, &s) in sigma.iter().enumerate() {
        pmap.insert(b.legs[s].0, a.legs[k].0);
        lmap.insert(b.legs[s].1, a.legs[k].1);
    }
    let b = b.relabel_indices(|l| lmap.get(&l).copied().unwrap_or(l + la + 1));
    let b = shift_points(&b, |x| pmap.get(&x).copied().unwrap_or(x + pa + 1))?;
    let mut vars = a.residual.vars.clone();
    vars.extend(b.residual.vars.iter().copied());
    let Some((s, residual)) = ResidualMonomial::normalize(vars) else { return Ok(None) };
    let ka = twist_odd(&a.kernel, residual_parity(&b.residual))?;
    let form = ka.wedge(&pullback_boundary(&b.kernel, g)?)?;
    let value = torus_integral(&form)?;
    if value.is_zero() {
        return Ok(None);
    }
    let mut lie = a.lie.clone();
    lie.extend(b.lie.iter().cloned());
    Ok(Some(StateTerm {
        coeff: &a.coeff * &b.coeff * int(s * perm_sign(sigma)) * value,
        lie,
        residual,
        kernel: FormExpr::one(),
        legs: vec![],
        eps_power: a.eps_power + b.eps_power + sigma.len() as i32,
        vertices: a.vertices + b.vertices,
        source: format!("{} * {}", a.source, b.source),
    }))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut v: Vec<usize> = (0..n).collect();
    let mut out = vec![v.clone()];
    while crate::graphs::next_permutation(&mut v) {
        out.push(v.clone());
    }
    out
}

/// Every pairing of an A-term with a B-term with matching leg counts, summed over leg bijections.
pub fn pair_states(sa: &[StateTerm], sb: &[StateTerm], g: GluingMatrix, max_order: u32) -> Result<Vec<StateTerm>, GluingError> {
    let mut out = Vec::new();
    for a in sa {
        for b in sb {
            if a.legs.len() != b.legs.len() || a.vertices + b.vertices > max_order {
                continue;
            }
            for sigma in permutations(a.legs.len()) {
                out.extend(pair_terms(a, b, &sigma, g)?);
            }
        }
    }
    Ok(out)
}

/// Integrates out the redshirt pair `z⁺₂^A, z^{2,B}` with `⟨z⁺₂ᵢ, z^{2j}⟩ = δᵢʲ/p` and renames the rest.
pub fn reduce_residuals(terms: &[StateTerm], g: GluingMatrix) -> Result<Vec<StateTerm>, GluingError> {
    if g.p == 0 {
        return Err(GluingError::NoReduction);
    }
    let inv_p = rat(1, g.p);
    let mut out = Vec::new();
    for t in terms {
        let r = &t.residual;
        if r.count(RKind::Z2, Side::A) > 0 || r.count(RKind::Zp2, Side::B) > 0 {
            continue;
        }
        let ups: Vec<&ResVar> = r.vars.iter().filter(|v| v.kind == RKind::Zp2 && v.side == Side::A).collect();
        let downs: Vec<&ResVar> = r.vars.iter().filter(|v| v.kind == RKind::Z2 && v.side == Side::B).collect();
        if ups.len() != downs.len() {
            continue;
        }
        let rest: Vec<ResVar> = r
            .vars
            .iter()
            .filter(|v| !matches!((v.kind, v.side), (RKind::Zp2, Side::A) | (RKind::Z2, Side::B)))
            .map(|v| ResVar {
                kind: match (v.kind, v.side) {
                    (RKind::Z1, Side::B) => RKind::Z1,
                    (RKind::Z1, _) => RKind::Z2,
                    (RKind::Zp1, Side::B) => RKind::Zp1,
                    _ => RKind::Zp2,
                },
                side: Side::Glued,
                ..*v
            })
            .collect();
        let Some((s, residual)) = ResidualMonomial::normalize(rest) else { continue };
        let weight = num_traits::pow(inv_p.clone(), ups.len());
        for sigma in permutations(ups.len()) {
            let map: BTreeMap<u32, u32> = sigma.iter().enumerate().map(|(k, &j)| (downs[j].label, ups[k].label)).collect();
            let mut u = t.relabel_indices(|l| map.get(&l).copied().unwrap_or(l));
            u.residual = residual.clone();
            u.coeff = &t.coeff * &weight * int(s);
            out.push(u);
        }
    }
    Ok(out)
}

/// Whether a paired term can reduce to a constant.
fn constant_candidate(r: &ResidualMonomial) -> bool {
    let ups = r.count(RKind::Zp2, Side::A);
    ups == r.count(RKind::Z2, Side::B) && ups == r.vars.len() / 2 && r.vars.len().is_multiple_of(2)
}

/// Evaluated catalogue, split into the boundary term `Γ₀` and the rest.
#[derive(Debug, Clone)]
pub struct Evaluated {
    pub gamma0_a: Vec<StateTerm>,
    pub gamma0_b: Vec<StateTerm>,
    pub rest_a: Vec<StateTerm>,
    pub rest_b: Vec<StateTerm>,
}

pub fn evaluate_catalogue(sc: &SplitConstants) -> Result<Evaluated, GluingError> {
    let cat = catalogue();
    let mut ev = Evaluated { gamma0_a: vec![], gamma0_b: vec![], rest_a: vec![], rest_b: vec![] };
    for (list, rep) in [(&cat.a, Rep::A), (&cat.b, Rep::B)] {
        for d in list {
            let terms: Vec<StateTerm> = evaluate_diagram(d, rep, sc)?.into_iter().filter(|t| !t.lie_vanishes(sc)).collect();
            let slot = match (d.name == "G0", rep) {
                (true, Rep::A) => &mut ev.gamma0_a,
                (true, Rep::B) => &mut ev.gamma0_b,
                (false, Rep::A) => &mut ev.rest_a,
                (false, Rep::B) => &mut ev.rest_b,
            };
            slot.extend(terms);
        }
    }
    Ok(ev)
}

fn factorial(n: usize) -> Q {
    int((1..=n as i64).product())
}

/// `x·Γ₀^k/k!` for every choice of `Γ₀` components; `Γ₀` legs come after those of `x`.
fn with_gamma0(x: &StateTerm, g0: &[StateTerm], k: usize) -> Result<Vec<StateTerm>, GluingError> {
    let mut acc = vec![x.clone()];
    for _ in 0..k {
        let mut next = Vec::new();
        for t in &acc {
            for c in g0 {
                next.extend(multiply(t, c)?);
            }
        }
        acc = next;
    }
    let w = Q::one() / factorial(k);
    for t in &mut acc {
        t.coeff *= &w;
    }
    Ok(acc)
}

/// One connected pairing family and its terms before reduction.
#[derive(Debug, Clone)]
pub struct PairingRecord {
    pub label: String,
    pub terms: Vec<StateTerm>,
}

/// All connected pairings with `order` interaction vertices between `X·Γ₀^j` on the A side
/// and `Y·Γ₀^i` on the B side. `filter` is applied to the residual monomial before integration.
pub fn connected_pairings(
    ev: &Evaluated,
    g: GluingMatrix,
    order: u32,
    filter: impl Fn(&ResidualMonomial) -> bool,
) -> Result<Vec<PairingRecord>, GluingError> {
    let unit = StateTerm::unit();
    let xs: Vec<&StateTerm> = std::iter::once(&unit).chain(&ev.rest_a).collect();
    let ys: Vec<&StateTerm> = std::iter::once(&unit).chain(&ev.rest_b).collect();
    let mut out = Vec::new();
    for x in &xs {
        for y in &ys {
            if x.vertices + y.vertices != order || (x.vertices == 0 && y.vertices == 0) {
                continue;
            }
            let (kx, ky) = (x.legs.len(), y.legs.len());
            let both = x.vertices > 0 && y.vertices > 0;
            for c in usize::from(both)..=kx.min(ky) {
                let (j, i) = (ky - c, kx - c);
                let a_side = with_gamma0(x, &ev.gamma0_a, j)?;
                let b_side = with_gamma0(y, &ev.gamma0_b, i)?;
                let total = kx + j;
                let mut terms = Vec::new();
                for sigma in permutations(total) {
                    // A legs of Γ₀ copies must meet legs of Y, never B copies of Γ₀.
                    if (kx..total).any(|k| sigma[k] >= ky) {
                        continue;
                    }
                    for a in &a_side {
                        for b in &b_side {
                            let mut vars = a.residual.vars.clone();
                            vars.extend(b.residual.vars.iter().copied());
                            match ResidualMonomial::normalize(vars) {
                                Some((_, r)) if filter(&r) => {}
                                _ => continue,
                            }
                            terms.extend(pair_terms(a, b, &sigma, g)?);
                        }
                    }
                }
                if !terms.is_empty() {
                    let name = |s: &StateTerm, k: usize| {
                        let base = if s.vertices == 0 { String::new() } else { s.source.clone() };
                        match (base.is_empty(), k) {
                            (true, k) => format!("G0^{k}"),
                            (false, 0) => base,
                            (false, k) => format!("{base}·G0^{k}"),
                        }
                    };
                    out.push(PairingRecord { label: format!("{} * {}", name(x, j), name(y, i)), terms });
                }
            }
        }
    }
    Ok(out)
}

/// A line of the end-to-end trace: pairing family, its reduced constant.
#[derive(Debug, Clone)]
pub struct TraceLine {
    pub label: String,
    pub raw: Vec<String>,
    pub constant: Q,
}

/// The reduced two-loop constant of every pairing family, and `S_eff^{(2)}`.
pub fn pipeline_trace(lens: &LensSpace, sc: &SplitConstants, ev: &Evaluated) -> Result<(Vec<TraceLine>, Q), GluingError> {
    let g = lens.matrix;
    if g.p == 0 {
        return Err(GluingError::S1xS2(s1s2_theta_coefficient(g.q)));
    }
    let mut lines = Vec::new();
    let mut sum = Q::zero();
    for rec in connected_pairings(ev, g, 2, constant_candidate)? {
        let mut constant = Q::zero();
        for t in reduce_residuals(&rec.terms, g)? {
            if t.residual.is_empty() {
                constant += &t.coeff * t.lie_value(sc)?;
            }
        }
        sum += &constant;
        lines.push(TraceLine { label: rec.label, raw: rec.terms.iter().map(StateTerm::display).collect(), constant });
    }
    Ok((lines, -sum))
}

/// Full pipeline: catalogue, evaluation, duals, pairing, reduction.
pub fn end_to_end_weight_mt(lens: &LensSpace, sc: &SplitConstants) -> Result<Q, GluingError> {
    let class = classify_splitting(sc);
    if class != SplittingClass::ManinTriple {
        return Err(GluingError::NotManin(class));
    }
    let ev = evaluate_catalogue(sc)?;
    Ok(pipeline_trace(lens, sc, &ev)?.1)
}

/// `∫₀¹ ((v))((qv)) dv`, the theta pairing coefficient when `p = 0`.
pub fn s1s2_theta_coefficient(q: i64) -> Q {
    crate::forms::circle_product_mean(1, q)
}

/// `e·(½ s(q,p) + (q+m)/(12p))`.
pub fn two_loop_weight_mt(lens: &LensSpace, e: &Q) -> Result<Q, GluingError> {
    let g = lens.matrix;
    if g.p == 0 {
        return Err(GluingError::S1xS2(s1s2_theta_coefficient(g.q)));
    }
    let s = dedekind_sum_direct(g.q, g.p)?;
    Ok(e * (s / int(2) + rat(g.q + g.m, 12 * g.p)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Theorem,
    SeffEq,
}

/// `Σ_{k<p} ((k/p))(f(qk/p) + f(mk/p))`.
pub fn nmt_k_sum(p: i64, q: i64, m: i64) -> Real {
    let mut acc = Real::exact(0.0);
    for k in 0..p {
        let eta = crate::numtheory::to_f64(&eta_circle(&rat(k, p)));
        if eta == 0.0 {
            continue;
        }
        acc = acc + (f_theta(&rat(q * k, p)) + f_theta(&rat(m * k, p))).scale(eta);
    }
    acc
}

/// The exact `e`-part and the real `e′`-part of the non-Manin weight.
pub fn two_loop_weight_nmt(lens: &LensSpace, e: &Q, e_prime: &Q, variant: Variant) -> Result<(Q, Real), GluingError> {
    let exact = two_loop_weight_mt(lens, e)?;
    let g = lens.matrix;
    let s = crate::numtheory::to_f64(&dedekind_sum_direct(g.q, g.p)?);
    let h = harmonic_real(1.0 / g.p as f64)?;
    let ksum = nmt_k_sum(g.p, g.q, g.m);
    let ep = crate::numtheory::to_f64(e_prime);
    let bracket = match variant {
        Variant::Theorem => Real::exact(0.5 * s) + ksum + h.scale((g.q + g.m) as f64 / (2.0 * PI * PI)),
        Variant::SeffEq => (Real::exact(s) + ksum + h.scale((g.m + g.p) as f64 / (2.0 * PI * PI))).scale(0.5),
    };
    Ok((exact, bracket.scale(ep)))
}

#[derive(Debug, Clone)]
pub struct EffectiveAction {
    pub cubic: Vec<StateTerm>,
    pub two_loop_exact: Q,
    pub two_loop_real: Real,
    pub class_used: SplittingClass,
}

/// Cubic part from the one-vertex pairings; constant part from the closed forms.
pub fn assemble_seff(lens: &LensSpace, sc: &SplitConstants, ev: &Evaluated, variant: Variant) -> Result<EffectiveAction, GluingError> {
    let class = classify_splitting(sc);
    let g = lens.matrix;
    let mut cubic = Vec::new();
    if g.p != 0 {
        for rec in connected_pairings(ev, g, 1, |_| true)? {
            cubic.extend(reduce_residuals(&rec.terms, g)?.into_iter().filter(|t| !t.residual.is_empty()));
        }
    }
    let cubic = crate::graphs::simplify_terms(cubic);
    let e = coeff_e(sc);
    let (two_loop_exact, two_loop_real) = if class == SplittingClass::ManinTriple {
        (two_loop_weight_mt(lens, &e)?, Real::exact(0.0))
    } else {
        two_loop_weight_nmt(lens, &e, &coeff_e_prime(sc), variant)?
    };
    Ok(EffectiveAction { cubic, two_loop_exact, two_loop_real, class_used: class })
}

/// The rational `a/b` as a pair of machine integers, when it fits.
pub fn q_parts(x: &Q) -> Option<(i64, i64)> {
    let n: &BigInt = x.numer();
    Some((n.to_i64()?, x.denom().to_i64()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::example_double_constants;
    use crate::forms::build::*;

    fn lens(p: i64, q: i64) -> LensSpace {
        LensSpace::new(p, q).unwrap()
    }

    #[test]
    fn canonical_matrices() {
        assert_eq!(canonical_mn(1, 0).unwrap(), GluingMatrix { m: 0, p: 1, n: -1, q: 0 });
        assert_eq!(canonical_mn(2, 1).unwrap(), GluingMatrix { m: 1, p: 2, n: 0, q: 1 });
        let g = canonical_mn(5, 2).unwrap();
        assert_eq!((g.det(), g.m), (1, 3));
        assert_eq!(canonical_mn(7, -3).unwrap().det(), 1);
        assert_eq!(canonical_mn(0, -1).unwrap(), GluingMatrix { m: -1, p: 0, n: 0, q: -1 });
        assert!(matches!(canonical_mn(4, 2), Err(GluingError::NotCoprime { .. })));
        assert!(matches!(GluingMatrix::new(1, 2, 1, 1), Err(GluingError::Determinant(-1))));
    }

    #[test]
    fn twists() {
        let g = canonical_mn(2, 1).unwrap();
        assert_eq!(dehn_twist(g, TwistSide::Right, 0), g);
        assert_eq!(dehn_twist(g, TwistSide::Right, 1), GluingMatrix { m: 3, p: 2, n: 1, q: 1 });
    }

    #[test]
    fn pullbacks() {
        let g = canonical_mn(5, 2).unwrap();
        let x = bd(1);
        let dt = f(Factor::Dt(x));
        let want = prod(int(g.m), vec![Factor::Dt(x)]).add(&prod(int(g.p), vec![Factor::Dtheta(x)]));
        assert_eq!(pullback_boundary(&dt, g).unwrap(), want);
        let vol = prod(Q::one(), vec![Factor::Dt(x), Factor::Dtheta(x)]);
        assert_eq!(pullback_boundary(&vol, g).unwrap(), vol);
        assert_eq!(pullback_boundary(&FormExpr::one(), g).unwrap(), FormExpr::one());
        assert!(matches!(pullback_boundary(&f(Factor::Mu(b(1))), g), Err(GluingError::BulkFactor(_))));
    }

    #[test]
    fn lattice_integrals() {
        let (x, y) = (bd(1), bd(2));
        // ∫ dt φ*dt = p
        let g = canonical_mn(5, 2).unwrap();
        let e = f(Factor::Dt(x)).wedge(&pullback_boundary(&f(Factor::Dt(x)), g).unwrap()).unwrap();
        assert_eq!(torus_integral(&e).unwrap(), int(5));
        // ∫ dt δ(3θ) d(3θ) = 3
        let d = Lin::new([(Coord::Theta(x), 3)]);
        let e = prod(Q::one(), vec![Factor::Dt(x), Factor::DeltaC(d)]);
        assert_eq!(torus_integral(&e).unwrap(), int(3));
        // ∫ η(t₁−t₂)² = 1/12
        let l = Lin::diff(x, y);
        let e = prod(Q::one(), vec![Factor::EtaC(l.clone()), Factor::EtaC(l), Factor::Dt(x), Factor::Dtheta(x), Factor::Dt(y), Factor::Dtheta(y)]);
        assert_eq!(torus_integral(&e).unwrap(), rat(1, 12));
    }

    #[test]
    fn shifted_means() {
        assert_eq!(shifted_circle_product_mean(1, &Q::zero(), 1, &Q::zero()), rat(1, 12));
        assert_eq!(shifted_circle_product_mean(1, &Q::zero(), -1, &Q::zero()), rat(-1, 12));
        assert_eq!(shifted_circle_product_mean(2, &Q::zero(), 3, &Q::zero()), rat(1, 72));
        // ((s + 1/2)) against ((s)): B₂(1/2)/2
        assert_eq!(shifted_circle_product_mean(1, &rat(1, 2), 1, &Q::zero()), rat(-1, 24));
    }

    #[test]
    fn closed_forms() {
        let one = Q::one();
        assert_eq!(two_loop_weight_mt(&lens(1, 0), &one).unwrap(), Q::zero());
        assert_eq!(two_loop_weight_mt(&lens(2, 1), &one).unwrap(), rat(1, 12));
        assert_eq!(two_loop_weight_mt(&lens(3, 1), &one).unwrap(), rat(1, 12));
        assert!(matches!(two_loop_weight_mt(&lens(0, 1), &one), Err(GluingError::S1xS2(_))));
        assert_eq!(s1s2_theta_coefficient(1), rat(1, 12));
        assert_eq!(s1s2_theta_coefficient(-1), rat(-1, 12));
    }

    #[test]
    fn end_to_end_small() {
        let sc = example_double_constants();
        let ev = evaluate_catalogue(&sc).unwrap();
        for (p, q) in [(1, 0), (2, 1), (3, 1), (3, 2), (5, 2), (7, 3)] {
            let l = lens(p, q);
            let (lines, w) = pipeline_trace(&l, &sc, &ev).unwrap();
            let shown: Vec<String> = lines.iter().map(|t| format!("{} {}", t.label, t.constant)).collect();
            assert_eq!(w, two_loop_weight_mt(&l, &int(2)).unwrap(), "L({p},{q}): {shown:?}");
        }
    }
}
