//! Distributional differential forms on labeled points of `S¹×D` and its boundary torus.
//!
//! A bulk point `i` carries a disk coordinate `z_i` and a circle coordinate `t_i`;
//! a boundary point carries the torus coordinates `(t_i, θ_i)`. Circle functions and
//! deltas take integer-linear combinations of circle coordinates as arguments, which
//! is what lets the same calculus describe kernels after a torus pullback.
//!
//! Fiber integration is from the left: the fiber differentials are moved to the
//! front and stripped, with `∫_{D×S¹} μ dt = 1` and `∫_{T²} dt dθ = 1`.

use num_integer::Integer;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

use crate::numtheory::{int, rat};
use crate::Q;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormError {
    #[error("{0} attached to a bulk point {1}")]
    NeedsBoundary(&'static str, u32),
    #[error("{0} attached to a boundary point {1}")]
    NeedsBulk(&'static str, u32),
    #[error("point {0} used both as bulk and boundary label")]
    LabelClash(u32),
    #[error("no boundary value for {0}")]
    NoBoundaryValue(String),
    #[error("integral over point {point} outside the evaluable family: {what}")]
    NotEvaluable { point: u32, what: String },
    #[error("point {0} still appears after integration")]
    Unsaturated(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Loc {
    Bulk,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pt {
    pub id: u32,
    pub loc: Loc,
}

impl Pt {
    pub fn bulk(id: u32) -> Self {
        Pt { id, loc: Loc::Bulk }
    }

    pub fn bdry(id: u32) -> Self {
        Pt { id, loc: Loc::Boundary }
    }

    pub fn is_bulk(&self) -> bool {
        self.loc == Loc::Bulk
    }
}

/// A circle coordinate: the `S¹` factor `t`, or the boundary circle `θ` of `∂D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Coord {
    T(Pt),
    Theta(Pt),
}

impl Coord {
    pub fn point(&self) -> Pt {
        match *self {
            Coord::T(p) | Coord::Theta(p) => p,
        }
    }

    /// The exact 1-form `dc`.
    pub fn d(&self) -> Factor {
        match *self {
            Coord::T(p) => Factor::Dt(p),
            Coord::Theta(p) => Factor::Dtheta(p),
        }
    }
}

/// Integer-linear combination of circle coordinates, sorted, no zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Lin(Vec<(Coord, i64)>);

impl Lin {
    pub fn new(parts: impl IntoIterator<Item = (Coord, i64)>) -> Self {
        let mut m: BTreeMap<Coord, i64> = BTreeMap::new();
        for (c, a) in parts {
            *m.entry(c).or_insert(0) += a;
        }
        Lin(m.into_iter().filter(|&(_, a)| a != 0).collect())
    }

    /// `t_i − t_j`.
    pub fn diff(i: Pt, j: Pt) -> Self {
        Lin::new([(Coord::T(i), 1), (Coord::T(j), -1)])
    }

    pub fn parts(&self) -> &[(Coord, i64)] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeff(&self, c: Coord) -> i64 {
        self.0.iter().find(|(k, _)| *k == c).map_or(0, |&(_, a)| a)
    }

    pub fn scale(&self, k: i64) -> Self {
        Lin::new(self.0.iter().map(|&(c, a)| (c, a * k)))
    }

    pub fn add(&self, o: &Lin) -> Self {
        Lin::new(self.0.iter().chain(o.0.iter()).copied())
    }

    /// Sign-normalised so that the leading coefficient is positive.
    pub fn canonical(&self) -> (Lin, i64) {
        match self.0.first() {
            Some(&(_, a)) if a < 0 => (self.scale(-1), -1),
            _ => (self.clone(), 1),
        }
    }

    /// Replaces `c` by `repl`.
    pub fn substitute(&self, c: Coord, repl: &Lin) -> Lin {
        let a = self.coeff(c);
        if a == 0 {
            return self.clone();
        }
        let rest = Lin::new(self.0.iter().filter(|(k, _)| *k != c).copied());
        rest.add(&repl.scale(a))
    }

    pub fn map_coords(&self, f: impl Fn(Coord) -> Lin) -> Lin {
        let mut out = Lin::default();
        for &(c, a) in &self.0 {
            out = out.add(&f(c).scale(a));
        }
        out
    }

    pub fn mentions(&self, p: Pt) -> bool {
        self.0.iter().any(|(c, _)| c.point() == p)
    }

    /// `i − j` when the combination is `t_i − t_j` with `i < j`.
    fn as_pair(&self) -> Option<(u32, u32)> {
        match self.0.as_slice() {
            [(Coord::T(i), 1), (Coord::T(j), -1)] => Some((i.id, j.id)),
            _ => None,
        }
    }

    /// Content of the gcd of the coefficients (0 for the empty combination).
    pub fn content(&self) -> i64 {
        self.0.iter().fold(0i64, |g, &(_, a)| g.gcd(&a))
    }
}

impl fmt::Display for Lin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        for (n, &(c, a)) in self.0.iter().enumerate() {
            let name = match c {
                Coord::T(p) => format!("t{}", p.id),
                Coord::Theta(p) => format!("th{}", p.id),
            };
            let sign = if a < 0 { "-" } else if n > 0 { "+" } else { "" };
            let mag = a.abs();
            if n > 0 {
                f.write_str(" ")?;
            }
            if mag == 1 {
                write!(f, "{sign}{name}")?;
            } else {
                write!(f, "{sign}{mag}{name}")?;
            }
        }
        Ok(())
    }
}

/// Generators of the calculus. Variant order is the canonical symbol rank.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Factor {
    Mu(Pt),
    DeltaD(Pt, Pt),
    EtaD(Pt, Pt),
    Psi(Pt),
    EtaC(Lin),
    DeltaC(Lin),
    Dt(Pt),
    Dtheta(Pt),
}

impl Factor {
    /// `(disk degree, circle degree)`.
    pub fn bidegree(&self) -> (u32, u32) {
        match self {
            Factor::Dt(_) | Factor::Dtheta(_) | Factor::DeltaC(_) => (0, 1),
            Factor::Mu(_) | Factor::DeltaD(..) => (2, 0),
            Factor::Psi(_) | Factor::EtaD(..) => (1, 0),
            Factor::EtaC(_) => (0, 0),
        }
    }

    pub fn degree(&self) -> u32 {
        let (a, b) = self.bidegree();
        a + b
    }

    pub fn is_odd(&self) -> bool {
        self.degree() % 2 == 1
    }

    pub fn points(&self) -> Vec<Pt> {
        match self {
            Factor::Mu(p) | Factor::Psi(p) | Factor::Dt(p) | Factor::Dtheta(p) => vec![*p],
            Factor::DeltaD(a, b) | Factor::EtaD(a, b) => vec![*a, *b],
            Factor::EtaC(l) | Factor::DeltaC(l) => l.0.iter().map(|(c, _)| c.point()).collect(),
        }
    }

    fn check(&self) -> Result<(), FormError> {
        match self {
            Factor::Dtheta(p) if p.is_bulk() => Err(FormError::NeedsBoundary("Dtheta", p.id)),
            Factor::Mu(p) if !p.is_bulk() => Err(FormError::NeedsBulk("Mu", p.id)),
            Factor::Psi(p) if !p.is_bulk() => Err(FormError::NeedsBulk("Psi", p.id)),
            Factor::EtaD(a, b) | Factor::DeltaD(a, b) => {
                let name = if matches!(self, Factor::EtaD(..)) { "EtaD" } else { "DeltaD" };
                for p in [a, b] {
                    if !p.is_bulk() {
                        return Err(FormError::NeedsBulk(name, p.id));
                    }
                }
                Ok(())
            }
            Factor::EtaC(l) | Factor::DeltaC(l) => {
                for (c, _) in &l.0 {
                    if let Coord::Theta(p) = c {
                        if p.is_bulk() {
                            return Err(FormError::NeedsBoundary("θ coordinate", p.id));
                        }
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Canonical representative and sign; `None` when the factor vanishes.
    fn canonical(self) -> Option<(Factor, i64)> {
        match self {
            Factor::EtaC(l) | Factor::DeltaC(l) if l.is_zero() => None,
            Factor::EtaC(l) => {
                let (l, s) = l.canonical();
                Some((Factor::EtaC(l), s))
            }
            Factor::DeltaC(l) => {
                let (l, s) = l.canonical();
                Some((Factor::DeltaC(l), s))
            }
            Factor::DeltaD(a, b) if b < a => Some((Factor::DeltaD(b, a), 1)),
            f => Some((f, 1)),
        }
    }

    fn mentions(&self, p: Pt) -> bool {
        self.points().contains(&p)
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let circle = |f: &mut fmt::Formatter<'_>, name: &str, l: &Lin| match l.as_pair() {
            Some((i, j)) => write!(f, "{name}({i},{j})"),
            None => write!(f, "{name}[{l}]"),
        };
        match self {
            Factor::Mu(p) => write!(f, "Mu({})", p.id),
            Factor::DeltaD(a, b) => write!(f, "DeltaD({},{})", a.id, b.id),
            Factor::EtaD(a, b) => write!(f, "EtaD({},{})", a.id, b.id),
            Factor::Psi(p) => write!(f, "Psi({})", p.id),
            Factor::EtaC(l) => circle(f, "EtaC", l),
            Factor::DeltaC(l) => circle(f, "DeltaC", l),
            Factor::Dt(p) => write!(f, "Dt({})", p.id),
            Factor::Dtheta(p) => write!(f, "Dtheta({})", p.id),
        }
    }
}

/// Koszul-sorts a product into canonical order. `None` when it vanishes.
fn normalize_product(coeff: Q, factors: Vec<Factor>) -> Option<(Q, Vec<Factor>)> {
    if coeff.is_zero() {
        return None;
    }
    let mut sign = 1i64;
    let mut fs = Vec::with_capacity(factors.len());
    for f in factors {
        let (f, s) = f.canonical()?;
        sign *= s;
        fs.push(f);
    }
    for i in 1..fs.len() {
        let mut j = i;
        while j > 0 && fs[j - 1] > fs[j] {
            if fs[j - 1].is_odd() && fs[j].is_odd() {
                sign = -sign;
            }
            fs.swap(j - 1, j);
            j -= 1;
        }
    }
    if fs.windows(2).any(|w| w[0] == w[1] && w[0].is_odd()) {
        return None;
    }
    // At most a 2-form per disk point.
    let mut disk: BTreeMap<Pt, u32> = BTreeMap::new();
    for f in &fs {
        match f {
            Factor::Mu(p) => *disk.entry(*p).or_insert(0) += 2,
            Factor::Psi(p) => *disk.entry(*p).or_insert(0) += 1,
            _ => {}
        }
    }
    if disk.values().any(|&d| d > 2) {
        return None;
    }
    Some((coeff * int(sign), fs))
}

/// Sign of moving `fs[idx]` to the front.
fn front_sign(fs: &[Factor], idx: usize) -> i64 {
    if !fs[idx].is_odd() {
        return 1;
    }
    let before: u32 = fs[..idx].iter().map(Factor::degree).sum();
    if before % 2 == 1 {
        -1
    } else {
        1
    }
}

/// A normal-formed sum of signed products.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FormExpr {
    terms: BTreeMap<Vec<Factor>, Q>,
}

impl FormExpr {
    pub fn zero() -> Self {
        FormExpr::default()
    }

    pub fn one() -> Self {
        FormExpr::scalar(Q::one())
    }

    pub fn scalar(c: Q) -> Self {
        let mut e = FormExpr::zero();
        e.push(c, vec![]);
        e
    }

    pub fn factor(f: Factor) -> Result<Self, FormError> {
        FormExpr::product(Q::one(), vec![f])
    }

    /// A single normalised product.
    pub fn product(coeff: Q, factors: Vec<Factor>) -> Result<Self, FormError> {
        for f in &factors {
            f.check()?;
        }
        check_labels(factors.iter())?;
        let mut e = FormExpr::zero();
        e.push(coeff, factors);
        Ok(e)
    }

    fn push(&mut self, coeff: Q, factors: Vec<Factor>) {
        if let Some((c, fs)) = normalize_product(coeff, factors) {
            let slot = self.terms.entry(fs.clone()).or_insert_with(Q::zero);
            *slot += c;
            if slot.is_zero() {
                self.terms.remove(&fs);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Factor>, &Q)> {
        self.terms.iter()
    }

    /// The coefficient of the empty product.
    pub fn constant(&self) -> Q {
        self.terms.get(&Vec::new()).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add(&self, o: &FormExpr) -> FormExpr {
        let mut e = self.clone();
        for (fs, c) in &o.terms {
            e.push(c.clone(), fs.clone());
        }
        e
    }

    pub fn sub(&self, o: &FormExpr) -> FormExpr {
        self.add(&o.scale(&-Q::one()))
    }

    pub fn scale(&self, k: &Q) -> FormExpr {
        let mut e = FormExpr::zero();
        for (fs, c) in &self.terms {
            e.push(c * k, fs.clone());
        }
        e
    }

    pub fn points(&self) -> Vec<Pt> {
        let mut v: Vec<Pt> = self.terms.keys().flatten().flat_map(Factor::points).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Graded-commutative product.
    pub fn wedge(&self, o: &FormExpr) -> Result<FormExpr, FormError> {
        check_labels(self.terms.keys().chain(o.terms.keys()).flatten())?;
        let mut e = FormExpr::zero();
        for (fa, ca) in &self.terms {
            for (fb, cb) in &o.terms {
                let mut fs = fa.clone();
                fs.extend(fb.iter().cloned());
                e.push(ca * cb, fs);
            }
        }
        Ok(e)
    }

    /// Applies `f` to every term and sums the results.
    fn flat_map_terms(
        &self,
        mut f: impl FnMut(&Q, &[Factor]) -> Result<FormExpr, FormError>,
    ) -> Result<FormExpr, FormError> {
        let mut out = FormExpr::zero();
        for (fs, c) in &self.terms {
            out = out.add(&f(c, fs)?);
        }
        Ok(out)
    }

    /// Graded Leibniz extension of the generator differentials.
    pub fn differential(&self) -> FormExpr {
        let mut out = FormExpr::zero();
        for (fs, c) in &self.terms {
            let mut deg_before = 0u32;
            for (k, f) in fs.iter().enumerate() {
                let sign = if deg_before % 2 == 1 { -Q::one() } else { Q::one() };
                for (dc, dfs) in d_generator(f) {
                    let mut prod: Vec<Factor> = fs[..k].to_vec();
                    prod.extend(dfs);
                    prod.extend(fs[k + 1..].iter().cloned());
                    out.push(c * &sign * dc, prod);
                }
                deg_before += f.degree();
            }
        }
        out
    }

    /// Sets circle deltas against circle propagators of the same argument to zero.
    pub fn regularize(&self) -> FormExpr {
        let mut out = FormExpr::zero();
        for (fs, c) in &self.terms {
            let killed = fs.iter().any(|f| match f {
                Factor::DeltaC(l) => fs.contains(&Factor::EtaC(l.clone())),
                _ => false,
            });
            if !killed {
                out.push(c.clone(), fs.clone());
            }
        }
        out
    }

    /// Integrates out point `p` (bulk: `S¹` then `D`; boundary: `t` then `θ`).
    pub fn pushforward(&self, p: Pt) -> Result<FormExpr, FormError> {
        let first = self.flat_map_terms(|c, fs| integrate_circle(c, fs, Coord::T(p)))?;
        let out = if p.is_bulk() {
            first.flat_map_terms(|c, fs| integrate_disk(c, fs, p))?
        } else {
            first.flat_map_terms(|c, fs| integrate_circle(c, fs, Coord::Theta(p)))?
        };
        if out.terms.keys().flatten().any(|f| f.mentions(p)) {
            return Err(FormError::Unsaturated(p.id));
        }
        Ok(out)
    }

    /// Integrates out every bulk point, in increasing id order.
    pub fn pushforward_bulk_all(&self) -> Result<FormExpr, FormError> {
        let mut e = self.clone();
        for p in self.points().into_iter().filter(Pt::is_bulk) {
            e = e.pushforward(p)?;
        }
        Ok(e)
    }

    /// Moves a bulk label to the boundary.
    pub fn restrict_boundary(&self, p: Pt) -> Result<FormExpr, FormError> {
        let b = Pt::bdry(p.id);
        let mv = |c: Coord| match c {
            Coord::T(x) if x == p => Lin::new([(Coord::T(b), 1)]),
            c => Lin::new([(c, 1)]),
        };
        self.flat_map_terms(|c, fs| {
            let mut acc = FormExpr::scalar(c.clone());
            for f in fs {
                let piece = match f {
                    Factor::Mu(x) if *x == p => return Err(FormError::NoBoundaryValue(f.to_string())),
                    Factor::DeltaD(x, y) if *x == p || *y == p => {
                        return Err(FormError::NoBoundaryValue(f.to_string()))
                    }
                    Factor::EtaD(x, _) if *x == p => return Err(FormError::NoBoundaryValue(f.to_string())),
                    Factor::Psi(x) if *x == p => FormExpr::factor(Factor::Dtheta(b))?,
                    Factor::Dt(x) if *x == p => FormExpr::factor(Factor::Dt(b))?,
                    Factor::EtaD(x, y) if *y == p => eta_d(*x, b)?,
                    Factor::EtaC(l) => FormExpr::factor(Factor::EtaC(l.map_coords(mv)))?,
                    Factor::DeltaC(l) => FormExpr::factor(Factor::DeltaC(l.map_coords(mv)))?,
                    f => FormExpr::factor(f.clone())?,
                };
                acc = acc.wedge(&piece)?;
            }
            Ok(acc)
        })
    }

    /// Substitutes circle coordinates and their differentials, `c ↦ f(c)`.
    pub fn map_circle(&self, f: impl Fn(Coord) -> Lin) -> Result<FormExpr, FormError> {
        self.flat_map_terms(|c, fs| {
            let mut acc = FormExpr::scalar(c.clone());
            for x in fs {
                let piece = match x {
                    Factor::Dt(p) => d_lin(&f(Coord::T(*p))),
                    Factor::Dtheta(p) => d_lin(&f(Coord::Theta(*p))),
                    Factor::EtaC(l) => FormExpr::factor(Factor::EtaC(l.map_coords(&f)))?,
                    Factor::DeltaC(l) => FormExpr::factor(Factor::DeltaC(l.map_coords(&f)))?,
                    x => FormExpr::factor(x.clone())?,
                };
                acc = acc.wedge(&piece)?;
            }
            Ok(acc)
        })
    }

    /// Renames point labels.
    pub fn relabel(&self, f: impl Fn(Pt) -> Pt) -> Result<FormExpr, FormError> {
        let mc = |c: Coord| match c {
            Coord::T(p) => Coord::T(f(p)),
            Coord::Theta(p) => Coord::Theta(f(p)),
        };
        let ml = |l: &Lin| Lin::new(l.0.iter().map(|&(c, a)| (mc(c), a)));
        let mut out = FormExpr::zero();
        for (fs, c) in &self.terms {
            let nf: Vec<Factor> = fs
                .iter()
                .map(|x| match x {
                    Factor::Mu(p) => Factor::Mu(f(*p)),
                    Factor::Psi(p) => Factor::Psi(f(*p)),
                    Factor::Dt(p) => Factor::Dt(f(*p)),
                    Factor::Dtheta(p) => Factor::Dtheta(f(*p)),
                    Factor::DeltaD(a, b) => Factor::DeltaD(f(*a), f(*b)),
                    Factor::EtaD(a, b) => Factor::EtaD(f(*a), f(*b)),
                    Factor::EtaC(l) => Factor::EtaC(ml(l)),
                    Factor::DeltaC(l) => Factor::DeltaC(ml(l)),
                })
                .collect();
            out = out.add(&FormExpr::product(c.clone(), nf)?);
        }
        Ok(out)
    }

    /// One term per line, `coeff * factor * factor …`.
    pub fn dump(&self) -> String {
        if self.is_zero() {
            return "0\n".into();
        }
        let mut s = String::new();
        for (fs, c) in &self.terms {
            s.push_str(&crate::numtheory::fmt_q(c));
            if fs.is_empty() {
                s.push_str(" * One");
            }
            for f in fs {
                s.push_str(" * ");
                s.push_str(&f.to_string());
            }
            s.push('\n');
        }
        s
    }
}

impl fmt::Display for FormExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.dump().trim_end())
    }
}

fn check_labels<'a>(fs: impl Iterator<Item = &'a Factor>) -> Result<(), FormError> {
    let mut seen: BTreeMap<u32, Loc> = BTreeMap::new();
    for f in fs {
        for p in f.points() {
            match seen.insert(p.id, p.loc) {
                Some(l) if l != p.loc => return Err(FormError::LabelClash(p.id)),
                _ => {}
            }
        }
    }
    Ok(())
}

/// `d` of a linear combination of circle coordinates.
pub fn d_lin(l: &Lin) -> FormExpr {
    let mut e = FormExpr::zero();
    for &(c, a) in l.parts() {
        e.push(int(a), vec![c.d()]);
    }
    e
}

fn d_generator(f: &Factor) -> Vec<(Q, Vec<Factor>)> {
    match f {
        Factor::EtaD(a, b) => vec![(Q::one(), vec![Factor::DeltaD(*a, *b)]), (-Q::one(), vec![Factor::Mu(*a)])],
        Factor::EtaC(l) => {
            let mut v = vec![(Q::one(), vec![Factor::DeltaC(l.clone())])];
            for &(c, a) in l.parts() {
                v.push((int(-a), vec![c.d()]));
            }
            v
        }
        Factor::Psi(p) => vec![(Q::one(), vec![Factor::Mu(*p)])],
        _ => vec![],
    }
}

/// The disk propagator from `a` to `b`; with `b` on the boundary it is `dθ_b + ψ_a`.
pub fn eta_d(a: Pt, b: Pt) -> Result<FormExpr, FormError> {
    if b.is_bulk() {
        FormExpr::factor(Factor::EtaD(a, b))
    } else {
        if !a.is_bulk() {
            return Err(FormError::NoBoundaryValue(format!("EtaD({},{}) with tail on the boundary", a.id, b.id)));
        }
        Ok(FormExpr::factor(Factor::Dtheta(b))?.add(&FormExpr::factor(Factor::Psi(a))?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagatorKind {
    Horizontal,
    Axial,
}

pub fn propagator(kind: PropagatorKind, i: Pt, j: Pt) -> Result<FormExpr, FormError> {
    if !i.is_bulk() {
        return Err(FormError::NeedsBulk("propagator tail", i.id));
    }
    let l = Lin::diff(i, j);
    match kind {
        PropagatorKind::Horizontal => {
            let a = eta_d(i, j)?.wedge(&FormExpr::factor(Factor::DeltaC(l.clone()))?)?;
            let b = FormExpr::product(Q::one(), vec![Factor::Mu(i), Factor::EtaC(l)])?;
            Ok(a.add(&b))
        }
        PropagatorKind::Axial => {
            if !j.is_bulk() {
                return Err(FormError::NeedsBulk("axial propagator head", j.id));
            }
            let a = FormExpr::product(Q::one(), vec![Factor::DeltaD(i, j), Factor::EtaC(l)])?;
            let dt = FormExpr::factor(Factor::Dt(i))?.sub(&FormExpr::factor(Factor::Dt(j))?);
            Ok(a.add(&eta_d(i, j)?.wedge(&dt)?))
        }
    }
}

/// `∫_{c}` of one product, for a single circle coordinate `c`.
fn integrate_circle(coeff: &Q, fs: &[Factor], c: Coord) -> Result<FormExpr, FormError> {
    let p = c.point();
    let not_eval = |what: String| FormError::NotEvaluable { point: p.id, what };
    if let Some(idx) = fs.iter().position(|f| matches!(f, Factor::DeltaC(l) if l.coeff(c) != 0)) {
        let Factor::DeltaC(l) = &fs[idx] else { unreachable!() };
        let a = l.coeff(c);
        if a.abs() != 1 {
            return Err(not_eval(format!("delta with coefficient {a} on the fiber")));
        }
        // ∫ δ(L) dL ∧ ω = a · ω|_{c = −a(L − a c)}
        let rest_l = l.substitute(c, &Lin::default());
        let repl = rest_l.scale(-a);
        let sign = front_sign(fs, idx) * a;
        let rest: Vec<Factor> = fs.iter().enumerate().filter(|&(k, _)| k != idx).map(|(_, f)| f.clone()).collect();
        let e = FormExpr::product(coeff * int(sign), rest)?;
        return e.map_circle(|x| if x == c { repl.clone() } else { Lin::new([(x, 1)]) });
    }
    let Some(idx) = fs.iter().position(|f| *f == c.d()) else {
        return Ok(FormExpr::zero());
    };
    let sign = front_sign(fs, idx);
    let mut rest: Vec<Factor> = Vec::new();
    let mut funcs: Vec<Lin> = Vec::new();
    for (k, f) in fs.iter().enumerate() {
        if k == idx {
            continue;
        }
        match f {
            Factor::EtaC(l) if l.coeff(c) != 0 => funcs.push(l.clone()),
            f => rest.push(f.clone()),
        }
    }
    let value = match funcs.as_slice() {
        [] => Q::one(),
        // A circle propagator has zero mean.
        [_] => Q::zero(),
        [l1, l2] if l1 == l2 => rat(1, 12),
        [l1, l2] if l1.parts().len() == 1 && l2.parts().len() == 1 => {
            let (a, b) = (l1.parts()[0].1, l2.parts()[0].1);
            circle_product_mean(a, b)
        }
        _ => {
            let shown: Vec<String> = funcs.iter().map(|l| format!("EtaC[{l}]")).collect();
            return Err(not_eval(shown.join(" * ")));
        }
    };
    FormExpr::product(coeff * int(sign) * value, rest)
}

/// `∫₀¹ ((a x)) ((b x)) dx = gcd(a,b)² / (12ab)`.
pub fn circle_product_mean(a: i64, b: i64) -> Q {
    let g = a.gcd(&b);
    rat(g * g, 12 * a * b)
}

/// `∫_{D_p}` of one product.
fn integrate_disk(coeff: &Q, fs: &[Factor], p: Pt) -> Result<FormExpr, FormError> {
    let not_eval = |what: String| FormError::NotEvaluable { point: p.id, what };
    if let Some(idx) = fs.iter().position(|f| matches!(f, Factor::DeltaD(a, b) if *a == p || *b == p)) {
        let Factor::DeltaD(a, b) = &fs[idx] else { unreachable!() };
        let q = if *a == p { *b } else { *a };
        let rest: Vec<Factor> = fs.iter().enumerate().filter(|&(k, _)| k != idx).map(|(_, f)| f.clone()).collect();
        let mv = |x: Pt| if x == p { q } else { x };
        let moved: Vec<Factor> = rest
            .into_iter()
            .map(|f| match f {
                Factor::Mu(x) => Factor::Mu(mv(x)),
                Factor::Psi(x) => Factor::Psi(mv(x)),
                Factor::EtaD(x, y) => Factor::EtaD(mv(x), mv(y)),
                Factor::DeltaD(x, y) => Factor::DeltaD(mv(x), mv(y)),
                f => f,
            })
            .collect();
        return FormExpr::product(coeff.clone(), moved);
    }
    let touching: Vec<usize> = (0..fs.len())
        .filter(|&k| matches!(&fs[k], Factor::Mu(x) | Factor::Psi(x) if *x == p) || matches!(&fs[k], Factor::EtaD(a, b) if *a == p || *b == p))
        .collect();
    let keep = |skip: &[usize]| -> Vec<Factor> {
        fs.iter().enumerate().filter(|(k, _)| !skip.contains(k)).map(|(_, f)| f.clone()).collect()
    };
    let kinds: Vec<&Factor> = touching.iter().map(|&k| &fs[k]).collect();
    match kinds.as_slice() {
        [] | [Factor::Psi(_)] | [Factor::EtaD(..)] => Ok(FormExpr::zero()),
        [Factor::Mu(_)] => FormExpr::product(coeff.clone(), keep(&touching)),
        // ∫_{D_2} η_{D,12} μ_2 = 0
        [Factor::Mu(_), Factor::EtaD(_, b)] if *b == p => Ok(FormExpr::zero()),
        // ∫_{D_2} η_{D,12} η_{D,23} = 0, in every orientation, for three distinct points
        [Factor::EtaD(a1, b1), Factor::EtaD(a2, b2)] => {
            let o1 = if *a1 == p { b1 } else { a1 };
            let o2 = if *a2 == p { b2 } else { a2 };
            if o1 != o2 && *o1 != p && *o2 != p {
                Ok(FormExpr::zero())
            } else {
                Err(not_eval(format!("{} * {}", kinds[0], kinds[1])))
            }
        }
        _ => {
            let shown: Vec<String> = kinds.iter().map(|f| f.to_string()).collect();
            Err(not_eval(shown.join(" * ")))
        }
    }
}

/// Shorthands for tests and the catalogue.
pub mod build {
    use super::*;

    pub fn b(id: u32) -> Pt {
        Pt::bulk(id)
    }

    pub fn bd(id: u32) -> Pt {
        Pt::bdry(id)
    }

    pub fn f(x: Factor) -> FormExpr {
        FormExpr::factor(x).expect("valid factor")
    }

    pub fn prod(c: Q, fs: Vec<Factor>) -> FormExpr {
        FormExpr::product(c, fs).expect("valid product")
    }

    pub fn eta_c(i: Pt, j: Pt) -> Factor {
        Factor::EtaC(Lin::diff(i, j))
    }

    pub fn delta_c(i: Pt, j: Pt) -> Factor {
        Factor::DeltaC(Lin::diff(i, j))
    }

    pub fn hor(i: Pt, j: Pt) -> FormExpr {
        propagator(PropagatorKind::Horizontal, i, j).expect("valid propagator")
    }

    pub fn ax(i: Pt, j: Pt) -> FormExpr {
        propagator(PropagatorKind::Axial, i, j).expect("valid propagator")
    }
}
