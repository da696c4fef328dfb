//! Feynman diagrams on the solid torus, their evaluation into state terms, and A↔B duality.
//!
//! Tails of edges are A-type half-edges, heads are B-type. A vertex with A-type count
//! 3, 2, 1, 0 carries `g_{ijk}`, `g^k_{ij}`, `h_i^{jk}`, `h^{ijk}`; slots of the same
//! type are filled by decorations first, then edges, in listing order.

use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

use crate::algebra::SplitConstants;
use crate::forms::{build, Factor, FormError, FormExpr, Lin, Coord, PropagatorKind, Pt};
use crate::numtheory::{fmt_q, int, parse_q};
use crate::Q;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("diagram {0} is not admissible: {1}")]
    Inadmissible(String, String),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("index {0} is not contracted")]
    OpenIndex(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rep {
    A,
    B,
}

impl Rep {
    pub fn other(self) -> Rep {
        match self {
            Rep::A => Rep::B,
            Rep::B => Rep::A,
        }
    }
}

/// Residual decorations: `a = z¹χ₁ + z²χ₂`, `b = z⁺₁χ¹ + z⁺₂χ²`, or one component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dec {
    A,
    B,
    A1,
    A2,
    B1,
    B2,
}

impl Dec {
    fn components(self) -> &'static [Dec] {
        match self {
            Dec::A => &[Dec::A1, Dec::A2],
            Dec::B => &[Dec::B1, Dec::B2],
            Dec::A1 => &[Dec::A1],
            Dec::A2 => &[Dec::A2],
            Dec::B1 => &[Dec::B1],
            Dec::B2 => &[Dec::B2],
        }
    }

    fn is_a(self) -> bool {
        matches!(self, Dec::A | Dec::A1 | Dec::A2)
    }

    fn dual(self) -> Dec {
        match self {
            Dec::A => Dec::B,
            Dec::B => Dec::A,
            Dec::A1 => Dec::B1,
            Dec::A2 => Dec::B2,
            Dec::B1 => Dec::A1,
            Dec::B2 => Dec::A2,
        }
    }

    fn kind(self) -> RKind {
        match self {
            Dec::A1 => RKind::Z1,
            Dec::A2 => RKind::Z2,
            Dec::B1 => RKind::Zp1,
            Dec::B2 => RKind::Zp2,
            _ => unreachable!("expanded before use"),
        }
    }

    /// The representative form at a bulk point (`χ₁ = μdt, χ₂ = μ, χ¹ = 1, χ² = dt`),
    /// or its boundary restriction.
    fn form(self, p: Pt) -> FormExpr {
        use build::*;
        match (self, p.is_bulk()) {
            (Dec::A1, true) => prod(Q::one(), vec![Factor::Mu(p), Factor::Dt(p)]),
            (Dec::A2, true) => f(Factor::Mu(p)),
            (Dec::A1 | Dec::A2, false) => FormExpr::zero(),
            (Dec::B1, _) => FormExpr::one(),
            (Dec::B2, _) => f(Factor::Dt(p)),
            _ => unreachable!("expanded before use"),
        }
    }

    fn parse(s: &str) -> Option<Dec> {
        Some(match s {
            "a" => Dec::A,
            "b" => Dec::B,
            "a1" => Dec::A1,
            "a2" => Dec::A2,
            "b1" => Dec::B1,
            "b2" => Dec::B2,
            _ => return None,
        })
    }
}

impl fmt::Display for Dec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dec::A => "a",
            Dec::B => "b",
            Dec::A1 => "a1",
            Dec::A2 => "a2",
            Dec::B1 => "b1",
            Dec::B2 => "b2",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagram {
    pub name: String,
    pub rep: Rep,
    pub vertices: Vec<u32>,
    pub legs: Vec<u32>,
    pub edges: Vec<(u32, u32)>,
    pub decorations: Vec<(u32, Dec)>,
    pub sym_factor: Q,
    /// `(−1)^{#E}` accumulated by dualization.
    pub sign: i64,
    /// Kernels taken as given for a decoration component instead of being pushed forward.
    pub kernel_axioms: Vec<(Dec, FormExpr)>,
}

impl Diagram {
    /// Parses the literal format: `name`, `rep`, `vertex`, `leg`, `edge u->v`, `dec u a2`, `sym`.
    pub fn parse(text: &str) -> Result<Diagram, GraphError> {
        let mut d = Diagram {
            name: String::new(),
            rep: Rep::A,
            vertices: vec![],
            legs: vec![],
            edges: vec![],
            decorations: vec![],
            sym_factor: Q::one(),
            sign: 1,
            kernel_axioms: vec![],
        };
        for (n, raw) in text.lines().enumerate() {
            let err = |msg: &str| GraphError::Parse { line: n + 1, msg: msg.to_string() };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let key = words.next().unwrap_or("");
            let rest: Vec<&str> = words.collect();
            let id = |s: &str| s.parse::<u32>().map_err(|_| err(&format!("bad id `{s}`")));
            match key {
                "name" => d.name = rest.join(" "),
                "rep" => {
                    d.rep = match rest.as_slice() {
                        ["A"] => Rep::A,
                        ["B"] => Rep::B,
                        _ => return Err(err("rep must be A or B")),
                    }
                }
                "vertex" | "vertices" => {
                    for w in rest {
                        d.vertices.push(id(w)?);
                    }
                }
                "leg" | "legs" => {
                    for w in rest {
                        d.legs.push(id(w)?);
                    }
                }
                "edge" => {
                    let joined = rest.join("");
                    let (u, v) = joined.split_once("->").ok_or_else(|| err("edge needs u->v"))?;
                    d.edges.push((id(u)?, id(v)?));
                }
                "dec" => match rest.as_slice() {
                    [u, s] => d.decorations.push((id(u)?, Dec::parse(s).ok_or_else(|| err("unknown decoration"))?)),
                    _ => return Err(err("dec needs a vertex and a symbol")),
                },
                "sym" => {
                    let s = rest.first().ok_or_else(|| err("sym needs a value"))?;
                    d.sym_factor = parse_q(s).ok_or_else(|| err("bad rational"))?;
                }
                _ => return Err(err(&format!("unknown keyword `{key}`"))),
            }
        }
        d.check()?;
        Ok(d)
    }

    pub fn is_leg(&self, x: u32) -> bool {
        self.legs.contains(&x)
    }

    fn pt(&self, x: u32) -> Pt {
        if self.is_leg(x) {
            Pt::bdry(x)
        } else {
            Pt::bulk(x)
        }
    }

    /// Trivalent vertices; each leg carries exactly one half-edge, incoming in the
    /// A-representation and outgoing in the B-representation.
    pub fn check(&self) -> Result<(), GraphError> {
        let bad = |m: String| Err(GraphError::Inadmissible(self.name.clone(), m));
        let mut ids = self.vertices.clone();
        ids.extend(&self.legs);
        ids.sort();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return bad("repeated label".into());
        }
        for &(u, v) in &self.edges {
            if !ids.contains(&u) || !ids.contains(&v) || u == v {
                return bad(format!("edge {u}->{v}"));
            }
        }
        for &(u, _) in &self.decorations {
            if !ids.contains(&u) {
                return bad(format!("decoration on unknown {u}"));
            }
        }
        for &v in &self.vertices {
            let deg = self.edges.iter().filter(|e| e.0 == v).count()
                + self.edges.iter().filter(|e| e.1 == v).count()
                + self.decorations.iter().filter(|d| d.0 == v).count();
            if deg != 3 {
                return bad(format!("vertex {v} has valence {deg}"));
            }
        }
        for &l in &self.legs {
            let inc = self.edges.iter().filter(|e| e.1 == l).count();
            let out = self.edges.iter().filter(|e| e.0 == l).count();
            let dec = self.decorations.iter().filter(|d| d.0 == l).count();
            let ok = match self.rep {
                Rep::A => out == 0 && inc + dec == 1,
                Rep::B => inc == 0 && out + dec == 1,
            };
            if !ok {
                return bad(format!("leg {l} has wrong half-edges"));
            }
        }
        Ok(())
    }

    pub fn eps_power(&self) -> i32 {
        self.edges.len() as i32 - self.vertices.len() as i32
    }

    /// Text literal accepted by [`Diagram::parse`].
    pub fn to_text(&self) -> String {
        let mut s = format!("name {}\nrep {:?}\n", self.name, self.rep);
        let join = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
        if !self.vertices.is_empty() {
            s += &format!("vertex {}\n", join(&self.vertices));
        }
        if !self.legs.is_empty() {
            s += &format!("leg {}\n", join(&self.legs));
        }
        for (u, v) in &self.edges {
            s += &format!("edge {u}->{v}\n");
        }
        for (u, d) in &self.decorations {
            s += &format!("dec {u} {d}\n");
        }
        s += &format!("sym {}\n", fmt_q(&self.sym_factor));
        s
    }
}

/// Reverses arrows, swaps `a ↔ b`, flips the representation and multiplies the sign by `(−1)^{#E}`.
pub fn dualize(d: &Diagram) -> Diagram {
    let mut out = d.clone();
    out.rep = d.rep.other();
    out.edges = d.edges.iter().map(|&(u, v)| (v, u)).collect();
    out.decorations = d.decorations.iter().map(|&(u, x)| (u, x.dual())).collect();
    out.sign = d.sign * if d.edges.len() % 2 == 1 { -1 } else { 1 };
    out.kernel_axioms = d.kernel_axioms.iter().map(|(x, k)| (x.dual(), k.clone())).collect();
    out
}

/// Residual coordinate kinds `z¹, z², z⁺₁, z⁺₂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RKind {
    Z1,
    Z2,
    Zp1,
    Zp2,
}

/// Which residual space a coordinate belongs to; `Glued` after reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    A,
    B,
    Glued,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ResVar {
    pub kind: RKind,
    pub side: Side,
    pub label: u32,
    pub odd: bool,
}

impl ResVar {
    /// A-side parities follow from total degree 1 of `a` and `b`.
    pub fn a_side(kind: RKind, label: u32) -> Self {
        let odd = matches!(kind, RKind::Z2 | RKind::Zp1);
        ResVar { kind, side: Side::A, label, odd }
    }

    fn key(&self) -> (Side, RKind) {
        (self.side, self.kind)
    }
}

/// Normal-ordered product of residual coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResidualMonomial {
    pub vars: Vec<ResVar>,
}

impl ResidualMonomial {
    /// Sorts by side then kind (stable), returning the Koszul sign; `None` if it vanishes.
    pub fn normalize(mut vars: Vec<ResVar>) -> Option<(i64, ResidualMonomial)> {
        let mut sign = 1;
        for i in 1..vars.len() {
            let mut j = i;
            while j > 0 && vars[j - 1].key() > vars[j].key() {
                if vars[j - 1].odd && vars[j].odd {
                    sign = -sign;
                }
                vars.swap(j - 1, j);
                j -= 1;
            }
        }
        for i in 0..vars.len() {
            for j in i + 1..vars.len() {
                if vars[i].odd && vars[i].key() == vars[j].key() && vars[i].label == vars[j].label {
                    return None;
                }
            }
        }
        Some((sign, ResidualMonomial { vars }))
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn count(&self, kind: RKind, side: Side) -> usize {
        self.vars.iter().filter(|v| v.kind == kind && v.side == side).count()
    }
}

/// Structure-constant slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    GLow,
    GMid,
    HMid,
    HUp,
}

impl Slot {
    fn dual(self) -> Slot {
        match self {
            Slot::GLow => Slot::HUp,
            Slot::GMid => Slot::HMid,
            Slot::HMid => Slot::GMid,
            Slot::HUp => Slot::GLow,
        }
    }

    fn tensor(self, sc: &SplitConstants) -> &crate::algebra::Vec3 {
        match self {
            Slot::GLow => &sc.g_low,
            Slot::GMid => &sc.g_mid,
            Slot::HMid => &sc.h_mid,
            Slot::HUp => &sc.h_up,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LieFactor {
    pub slot: Slot,
    pub idx: [u32; 3],
}

#[derive(Debug, Clone)]
pub struct StateTerm {
    pub coeff: Q,
    pub lie: Vec<LieFactor>,
    pub residual: ResidualMonomial,
    pub kernel: FormExpr,
    /// Boundary leg point and the index label it carries.
    pub legs: Vec<(u32, u32)>,
    pub eps_power: i32,
    /// Interaction vertices; the loop order used to truncate pairings.
    pub vertices: u32,
    pub source: String,
}

impl StateTerm {
    pub fn unit() -> Self {
        StateTerm {
            coeff: Q::one(),
            lie: vec![],
            residual: ResidualMonomial::default(),
            kernel: FormExpr::one(),
            legs: vec![],
            eps_power: 0,
            vertices: 0,
            source: "1".into(),
        }
    }

    pub fn labels(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.lie.iter().flat_map(|f| f.idx).collect();
        v.extend(self.residual.vars.iter().map(|x| x.label));
        v.extend(self.legs.iter().map(|l| l.1));
        v.sort();
        v.dedup();
        v
    }

    /// Renames index labels.
    pub fn relabel_indices(&self, f: impl Fn(u32) -> u32) -> StateTerm {
        let mut t = self.clone();
        for lf in &mut t.lie {
            for i in &mut lf.idx {
                *i = f(*i);
            }
        }
        for v in &mut t.residual.vars {
            v.label = f(v.label);
        }
        for l in &mut t.legs {
            l.1 = f(l.1);
        }
        t
    }

    /// Whether some structure constant of this term vanishes identically for `sc`.
    pub fn lie_vanishes(&self, sc: &SplitConstants) -> bool {
        self.lie.iter().any(|f| f.slot.tensor(sc).iter().flatten().flatten().all(Zero::is_zero))
    }

    /// Full contraction of the Lie factors; every label must occur exactly twice.
    pub fn lie_value(&self, sc: &SplitConstants) -> Result<Q, GraphError> {
        let mut count: BTreeMap<u32, usize> = BTreeMap::new();
        for f in &self.lie {
            for i in f.idx {
                *count.entry(i).or_insert(0) += 1;
            }
        }
        if let Some((&l, _)) = count.iter().find(|(_, &c)| c != 2) {
            return Err(GraphError::OpenIndex(l));
        }
        let labels: Vec<u32> = count.keys().copied().collect();
        let pos: BTreeMap<u32, usize> = labels.iter().enumerate().map(|(k, &l)| (l, k)).collect();
        let n = sc.n;
        let mut assign = vec![0usize; labels.len()];
        let mut total = Q::zero();
        loop {
            let mut prod = Q::one();
            for f in &self.lie {
                let t = f.slot.tensor(sc);
                let [a, b, c] = f.idx.map(|i| assign[pos[&i]]);
                let v = &t[a][b][c];
                if v.is_zero() {
                    prod = Q::zero();
                    break;
                }
                prod *= v;
            }
            total += prod;
            let mut k = 0;
            loop {
                if k == assign.len() {
                    return Ok(total);
                }
                assign[k] += 1;
                if assign[k] < n {
                    break;
                }
                assign[k] = 0;
                k += 1;
            }
        }
    }

    /// Human-readable rendering with letters for labels.
    pub fn display(&self) -> String {
        let mut names: BTreeMap<u32, char> = BTreeMap::new();
        let mut next = 0u8;
        let mut name = |l: u32| {
            *names.entry(l).or_insert_with(|| {
                let c = (b'i' + next % 18) as char;
                next += 1;
                c
            })
        };
        let mut s = fmt_q(&self.coeff);
        for f in &self.lie {
            let [a, b, c] = f.idx.map(&mut name);
            s += &match f.slot {
                Slot::GLow => format!(" g_{{{a}{b}{c}}}"),
                Slot::GMid => format!(" g^{a}_{{{b}{c}}}"),
                Slot::HMid => format!(" h_{a}^{{{b}{c}}}"),
                Slot::HUp => format!(" h^{{{a}{b}{c}}}"),
            };
        }
        for v in &self.residual.vars {
            let side = match v.side {
                Side::A => ",A",
                Side::B => ",B",
                Side::Glued => "",
            };
            let l = name(v.label);
            s += &match v.kind {
                RKind::Z1 => format!(" z1^{l}{side}"),
                RKind::Z2 => format!(" z2^{l}{side}"),
                RKind::Zp1 => format!(" zp1_{l}{side}"),
                RKind::Zp2 => format!(" zp2_{l}{side}"),
            };
        }
        for (p, l) in &self.legs {
            s += &format!(" [leg {p}:{}]", name(*l));
        }
        let k = self.kernel.to_string();
        if k != "1 * One" {
            s += &format!(" {{ {} }}", k.replace('\n', " + "));
        }
        s
    }
}

/// The B-representation image of an A-state term of the dual diagram.
fn translate_to_b(t: &StateTerm, sign: i64) -> Option<StateTerm> {
    let mut out = t.clone();
    for f in &mut out.lie {
        f.slot = f.slot.dual();
    }
    let vars = t
        .residual
        .vars
        .iter()
        .map(|v| ResVar {
            kind: match v.kind {
                RKind::Z1 => RKind::Zp1,
                RKind::Z2 => RKind::Zp2,
                RKind::Zp1 => RKind::Z1,
                RKind::Zp2 => RKind::Z2,
            },
            side: Side::B,
            label: v.label,
            odd: v.odd,
        })
        .collect();
    let (s, m) = ResidualMonomial::normalize(vars)?;
    out.residual = m;
    out.coeff = &t.coeff * int(s * sign);
    Some(out)
}

/// Evaluates a diagram to state terms: wedge, regularize, push forward every bulk point.
pub fn evaluate_diagram(d: &Diagram, rep: Rep, _sc: &SplitConstants) -> Result<Vec<StateTerm>, GraphError> {
    if d.rep != rep {
        return Err(GraphError::Inadmissible(d.name.clone(), format!("diagram is in the {:?}-representation", d.rep)));
    }
    d.check()?;
    if rep == Rep::B {
        let a = dualize(d);
        let terms = evaluate_a(&a)?;
        return Ok(simplify_terms(terms.iter().filter_map(|t| translate_to_b(t, d.sign * a.sign)).collect()));
    }
    Ok(simplify_terms(evaluate_a(d)?))
}

fn lie_normal(f: &LieFactor) -> (i64, LieFactor) {
    let mut idx = f.idx;
    let lo = match f.slot {
        Slot::GLow | Slot::HUp => 0,
        Slot::GMid | Slot::HMid => 1,
    };
    let mut sign = 1;
    for _ in 0..2 {
        for j in lo..2 {
            if idx[j] > idx[j + 1] {
                idx.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    if (lo..2).any(|j| idx[j] == idx[j + 1]) {
        sign = 0;
    }
    (sign, LieFactor { slot: f.slot, idx })
}

/// Canonical key of a term up to renaming of index labels and slot antisymmetry.
fn canonical_key(t: &StateTerm) -> Option<(String, i64)> {
    let labels = t.labels();
    if labels.len() > 8 {
        return None;
    }
    let mut best: Option<(String, i64)> = None;
    let mut perm: Vec<usize> = (0..labels.len()).collect();
    loop {
        let map: BTreeMap<u32, u32> = labels.iter().zip(&perm).map(|(&l, &k)| (l, k as u32)).collect();
        let r = t.relabel_indices(|l| map[&l]);
        let mut sign = 1;
        let mut lie = Vec::new();
        for f in &r.lie {
            let (s, g) = lie_normal(f);
            sign *= s;
            lie.push(g);
        }
        if sign == 0 {
            return Some((String::new(), 0));
        }
        lie.sort_by_key(|f| (f.slot, f.idx));
        if let Some((s, m)) = ResidualMonomial::normalize(r.residual.vars.clone()) {
            let key = format!("{lie:?}|{:?}|{:?}|{}", m.vars, r.legs, r.kernel.dump());
            if best.as_ref().is_none_or(|b| key < b.0) {
                best = Some((key, sign * s));
            }
        }
        if !next_permutation(&mut perm) {
            return best;
        }
    }
}

pub(crate) fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Merges terms that agree up to relabeling of dummy indices.
pub fn simplify_terms(terms: Vec<StateTerm>) -> Vec<StateTerm> {
    let mut out: Vec<(Option<String>, StateTerm)> = Vec::new();
    for t in terms {
        match canonical_key(&t) {
            Some((_, 0)) => continue,
            Some((key, sign)) => {
                if let Some((_, u)) = out.iter_mut().find(|(k, _)| k.as_deref() == Some(key.as_str())) {
                    // u is the first representative; t equals sign_t/sign_u times u.
                    let su = canonical_key(u).map_or(1, |x| x.1);
                    u.coeff += &t.coeff * int(sign * su);
                } else {
                    out.push((Some(key), t));
                }
            }
            None => out.push((None, t)),
        }
    }
    out.into_iter().map(|(_, t)| t).filter(|t| !t.coeff.is_zero()).collect()
}

fn evaluate_a(d: &Diagram) -> Result<Vec<StateTerm>, GraphError> {
    // Index labels: edges 0.., decorations after.
    let ne = d.edges.len() as u32;
    let dec_label = |k: usize| ne + k as u32;
    let mut lie = Vec::new();
    for &v in &d.vertices {
        let mut a_slots = Vec::new();
        let mut b_slots = Vec::new();
        for (k, &(u, x)) in d.decorations.iter().enumerate() {
            if u == v {
                if x.is_a() {
                    a_slots.push(dec_label(k));
                } else {
                    b_slots.push(dec_label(k));
                }
            }
        }
        for (k, &(u, w)) in d.edges.iter().enumerate() {
            if u == v {
                a_slots.push(k as u32);
            }
            if w == v {
                b_slots.push(k as u32);
            }
        }
        let (slot, idx) = match a_slots.len() {
            3 => (Slot::GLow, [a_slots[0], a_slots[1], a_slots[2]]),
            2 => (Slot::GMid, [b_slots[0], a_slots[0], a_slots[1]]),
            1 => (Slot::HMid, [a_slots[0], b_slots[0], b_slots[1]]),
            _ => (Slot::HUp, [b_slots[0], b_slots[1], b_slots[2]]),
        };
        lie.push(LieFactor { slot, idx });
    }
    let mut legs: Vec<(u32, u32)> = Vec::new();
    for &l in &d.legs {
        if let Some(k) = d.edges.iter().position(|e| e.1 == l) {
            legs.push((l, k as u32));
        } else if let Some(k) = d.decorations.iter().position(|x| x.0 == l) {
            legs.push((l, dec_label(k)));
        }
    }
    let mut props = FormExpr::one();
    for &(u, v) in &d.edges {
        let e = crate::forms::propagator(PropagatorKind::Horizontal, d.pt(u), d.pt(v))?;
        props = props.wedge(&e)?;
    }
    // Expand decoration components.
    let choices: Vec<&[Dec]> = d.decorations.iter().map(|x| x.1.components()).collect();
    let mut pick = vec![0usize; choices.len()];
    let mut out = Vec::new();
    loop {
        let comps: Vec<Dec> = pick.iter().enumerate().map(|(k, &c)| choices[k][c]).collect();
        if let Some(t) = evaluate_choice(d, &comps, &props, &lie, &legs)? {
            out.push(t);
        }
        let mut k = 0;
        loop {
            if k == pick.len() {
                return Ok(out);
            }
            pick[k] += 1;
            if pick[k] < choices[k].len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
    }
}

fn form_parity(e: &FormExpr) -> u32 {
    e.terms().next().map_or(0, |(fs, _)| fs.iter().map(Factor::degree).sum::<u32>() % 2)
}

fn evaluate_choice(
    d: &Diagram,
    comps: &[Dec],
    props: &FormExpr,
    lie: &[LieFactor],
    legs: &[(u32, u32)],
) -> Result<Option<StateTerm>, GraphError> {
    let ne = d.edges.len() as u32;
    let mut integrand = FormExpr::one();
    let mut vars = Vec::new();
    let mut sign = 1i64;
    let mut deg_before = 0u32;
    for (k, (&(u, _), &c)) in d.decorations.iter().zip(comps).enumerate() {
        let form = c.form(d.pt(u));
        let var = ResVar::a_side(c.kind(), ne + k as u32);
        // Move the coordinate left past the forms already written down.
        if var.odd && deg_before % 2 == 1 {
            sign = -sign;
        }
        vars.push(var);
        deg_before += form_parity(&form);
        integrand = integrand.wedge(&form)?;
    }
    let Some((rs, residual)) = ResidualMonomial::normalize(vars) else {
        return Ok(None);
    };
    sign *= rs;
    let axiom = comps.iter().find_map(|c| d.kernel_axioms.iter().find(|(x, _)| x == c).map(|(_, k)| k.clone()));
    let kernel = match axiom {
        Some(k) => k,
        None => {
            let full = integrand.wedge(props)?.regularize();
            let mut e = full;
            for &v in &d.vertices {
                e = e.pushforward(Pt::bulk(v))?;
            }
            e
        }
    };
    if kernel.is_zero() {
        return Ok(None);
    }
    Ok(Some(StateTerm {
        coeff: &d.sym_factor * int(sign * d.sign),
        lie: lie.to_vec(),
        residual,
        kernel,
        legs: legs.to_vec(),
        eps_power: d.eps_power(),
        vertices: d.vertices.len() as u32,
        source: d.name.clone(),
    }))
}

/// The axiom kernel of the `z⁺₂` component of `Γ₁,₂^b` on legs `(2,3)`:
/// `η_{S¹}(θ₂−θ₃) δ_{S¹}(t₂−t₃) dt₃`.
pub fn gamma12b_kernel(l1: u32, l2: u32) -> FormExpr {
    let (a, b) = (Pt::bdry(l1), Pt::bdry(l2));
    let theta = Lin::new([(Coord::Theta(a), 1), (Coord::Theta(b), -1)]);
    build::prod(Q::one(), vec![Factor::EtaC(theta), Factor::DeltaC(Lin::diff(a, b)), Factor::Dt(b)])
}

const LITERALS: &[&str] = &[
    "name G0\nleg 1\ndec 1 b\nsym -1",
    "name G10\nvertex 1\ndec 1 a\ndec 1 b\ndec 1 b\nsym 1/2",
    "name G11\nvertex 1\nleg 2\ndec 1 b\ndec 1 a\nedge 1->2\nsym -1",
    "name G12a\nvertex 1\nleg 2 3\ndec 1 a\nedge 1->2\nedge 1->3\nsym 1/2",
    "name G12b\nvertex 1\nleg 2 3\ndec 1 b\nedge 1->2\nedge 1->3\nsym 1/2",
    "name G13\nvertex 1\nleg 2 3 4\nedge 1->2\nedge 1->3\nedge 1->4\nsym 1/6",
    "name G20A\nvertex 1 2\ndec 1 b\ndec 2 b\nedge 1->2\nedge 1->2\nsym 1/2",
    "name G20\nvertex 1 2\ndec 1 b\ndec 2 b\nedge 1->2\nedge 2->1\nsym 1/2",
    "name G21\nvertex 1 2\nleg 3\ndec 1 b2\nedge 1->2\nedge 2->1\nedge 2->3\nsym 1",
    "name G22\nvertex 1 2\nleg 3 4\nedge 1->2\nedge 2->1\nedge 1->3\nedge 2->4\nsym 1/2",
];

#[derive(Debug, Clone)]
pub struct Catalogue {
    pub a: Vec<Diagram>,
    pub b: Vec<Diagram>,
}

impl Catalogue {
    pub fn get(&self, name: &str, rep: Rep) -> Option<&Diagram> {
        let list = if rep == Rep::A { &self.a } else { &self.b };
        list.iter().find(|d| d.name == name)
    }
}

/// The diagrams through two interaction vertices, A-representation and duals.
pub fn catalogue() -> Catalogue {
    let a: Vec<Diagram> = LITERALS
        .iter()
        .map(|t| {
            let mut d = Diagram::parse(t).expect("catalogue literal");
            if d.name == "G12b" {
                d.kernel_axioms.push((Dec::B2, gamma12b_kernel(2, 3)));
            }
            d
        })
        .collect();
    let b = a.iter().map(dualize).collect();
    Catalogue { a, b }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::example_double_constants;

    #[test]
    fn literals_roundtrip() {
        for d in catalogue().a {
            assert_eq!(Diagram::parse(&d.to_text()).unwrap().to_text(), d.to_text());
        }
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(Diagram::parse("vertex 1\nedge 1-2"), Err(GraphError::Parse { line: 2, .. })));
        assert!(matches!(Diagram::parse("vertex 1\ndec 1 b"), Err(GraphError::Inadmissible(..))));
        assert!(matches!(Diagram::parse("frob 1"), Err(GraphError::Parse { line: 1, .. })));
    }

    #[test]
    fn dual_is_involution_up_to_data() {
        for d in catalogue().a {
            let dd = dualize(&dualize(&d));
            assert_eq!(dd, d);
        }
        let g11 = catalogue().get("G11", Rep::B).unwrap().clone();
        assert_eq!(g11.sign, -1);
    }

    #[test]
    fn theta_type_a_vanishes() {
        let sc = example_double_constants();
        let d = catalogue().get("G20A", Rep::A).unwrap().clone();
        assert!(evaluate_diagram(&d, Rep::A, &sc).unwrap().is_empty());
    }

    #[test]
    fn g10_terms() {
        let sc = example_double_constants();
        let d = catalogue().get("G10", Rep::A).unwrap().clone();
        let ts = evaluate_diagram(&d, Rep::A, &sc).unwrap();
        let shown: Vec<String> = ts.iter().map(StateTerm::display).collect();
        assert_eq!(ts.len(), 2, "{shown:?}");
    }
}
