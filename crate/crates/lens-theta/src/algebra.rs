//! Quadratic Lie algebras, isotropic splittings and their structure constants.
//!
//! Ambient tensors use `bracket[a][b][c] = c^a_{bc}`, i.e. `[e_b, e_c] = Σ_a c^a_{bc} e_a`.
//! Split tensors keep V-indices lowered and W-indices raised:
//! `g_low[i][j][k] = g_{ijk}`, `g_mid[i][j][k] = g^i_{jk}`,
//! `h_mid[i][j][k] = h_i^{jk}`, `h_up[i][j][k] = h^{ijk}`.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use crate::numtheory::{fmt_q, parse_q};
use crate::Q;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("ambient dimension {0} is odd; no maximal isotropic splitting exists")]
    OddDimension(usize),
    #[error("splitting invalid: {0}")]
    BadSplit(String),
    #[error("bialgebra cocycle condition fails at (c,d,a,b) = {0:?}")]
    Cocycle([usize; 4]),
    #[error("bialgebra bracket invalid: {0}")]
    BadBialgebra(Violation),
    #[error("matrix is singular")]
    Singular,
    #[error("cannot parse algebra input: {0}")]
    Parse(String),
}

/// First failed identity found by [`validate_algebra`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Antisymmetry { a: usize, b: usize, c: usize },
    Jacobi { a: usize, b: usize, c: usize, e: usize },
    FormNotSymmetric { a: usize, b: usize },
    Degenerate,
    Invariance { a: usize, b: usize, c: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Antisymmetry { a, b, c } => write!(f, "antisymmetry fails at ({a},{b},{c})"),
            Violation::Jacobi { a, b, c, e } => write!(f, "Jacobi fails at ({a},{b},{c};{e})"),
            Violation::FormNotSymmetric { a, b } => write!(f, "form not symmetric at ({a},{b})"),
            Violation::Degenerate => write!(f, "form is degenerate"),
            Violation::Invariance { a, b, c } => write!(f, "invariance fails at ({a},{b},{c})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validation {
    Pass,
    Fail(Violation),
}

impl Validation {
    pub fn is_pass(&self) -> bool {
        matches!(self, Validation::Pass)
    }
}

pub type Vec3 = Vec<Vec<Vec<Q>>>;
pub type Mat = Vec<Vec<Q>>;

pub fn zeros3(n: usize) -> Vec3 {
    vec![vec![vec![Q::zero(); n]; n]; n]
}

pub fn zeros2(n: usize) -> Mat {
    vec![vec![Q::zero(); n]; n]
}

pub fn identity(n: usize) -> Mat {
    let mut m = zeros2(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Q::one();
    }
    m
}

/// Determinant by Gaussian elimination over the rationals.
pub fn det(m: &Mat) -> Q {
    let n = m.len();
    let mut a = m.clone();
    let mut d = Q::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Q::zero();
        };
        if piv != col {
            a.swap(piv, col);
            d = -d;
        }
        d *= &a[col][col];
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &a[col][col];
            for c in col..n {
                let t = &f * &a[col][c];
                a[r][c] -= t;
            }
        }
    }
    d
}

pub fn inverse(m: &Mat) -> Result<Mat, AlgebraError> {
    let n = m.len();
    let mut a = m.clone();
    let mut inv = identity(n);
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero()).ok_or(AlgebraError::Singular)?;
        a.swap(piv, col);
        inv.swap(piv, col);
        let p = a[col][col].clone();
        for c in 0..n {
            a[col][c] /= &p;
            inv[col][c] /= &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..n {
                let t = &f * &a[col][c];
                a[r][c] -= t;
                let t = &f * &inv[col][c];
                inv[r][c] -= t;
            }
        }
    }
    Ok(inv)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticLieAlgebra {
    pub dim: usize,
    pub bracket: Vec3,
    pub form: Mat,
}

impl QuadraticLieAlgebra {
    pub fn new(dim: usize, bracket: Vec3, form: Mat) -> Result<Self, AlgebraError> {
        let alg = QuadraticLieAlgebra { dim, bracket, form };
        alg.check_shape()?;
        Ok(alg)
    }

    pub fn abelian(dim: usize) -> Self {
        QuadraticLieAlgebra { dim, bracket: zeros3(dim), form: identity(dim) }
    }

    fn check_shape(&self) -> Result<(), AlgebraError> {
        let n = self.dim;
        let ok3 = self.bracket.len() == n
            && self.bracket.iter().all(|m| m.len() == n && m.iter().all(|r| r.len() == n));
        let ok2 = self.form.len() == n && self.form.iter().all(|r| r.len() == n);
        if !ok3 {
            return Err(AlgebraError::Dimension(format!("bracket is not {n}x{n}x{n}")));
        }
        if !ok2 {
            return Err(AlgebraError::Dimension(format!("form is not {n}x{n}")));
        }
        Ok(())
    }

    /// `[u, v]` for ambient coordinate vectors.
    pub fn lie(&self, u: &[Q], v: &[Q]) -> Vec<Q> {
        let n = self.dim;
        let mut out = vec![Q::zero(); n];
        for b in 0..n {
            if u[b].is_zero() {
                continue;
            }
            for c in 0..n {
                if v[c].is_zero() {
                    continue;
                }
                let uv = &u[b] * &v[c];
                for (a, o) in out.iter_mut().enumerate() {
                    if !self.bracket[a][b][c].is_zero() {
                        *o += &uv * &self.bracket[a][b][c];
                    }
                }
            }
        }
        out
    }

    /// `B(u, v)`.
    pub fn pair(&self, u: &[Q], v: &[Q]) -> Q {
        let mut s = Q::zero();
        for a in 0..self.dim {
            if u[a].is_zero() {
                continue;
            }
            for b in 0..self.dim {
                if !v[b].is_zero() && !self.form[a][b].is_zero() {
                    s += &u[a] * &self.form[a][b] * &v[b];
                }
            }
        }
        s
    }

    /// `⟨e_a, [e_b, e_c]⟩ = Σ_d B_{ad} c^d_{bc}`.
    pub fn structure_tensor(&self) -> Vec3 {
        let n = self.dim;
        let mut t = zeros3(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut s = Q::zero();
                    for d in 0..n {
                        s += &self.form[a][d] * &self.bracket[d][b][c];
                    }
                    t[a][b][c] = s;
                }
            }
        }
        t
    }
}

fn check_antisymmetry(br: &Vec3) -> Option<Violation> {
    let n = br.len();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if br[a][b][c] != -br[a][c][b].clone() {
                    return Some(Violation::Antisymmetry { a, b, c });
                }
            }
        }
    }
    None
}

fn check_jacobi(br: &Vec3) -> Option<Violation> {
    let n = br.len();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for e in 0..n {
                    let mut s = Q::zero();
                    for d in 0..n {
                        s += &br[d][a][b] * &br[e][d][c];
                        s += &br[d][b][c] * &br[e][d][a];
                        s += &br[d][c][a] * &br[e][d][b];
                    }
                    if !s.is_zero() {
                        return Some(Violation::Jacobi { a, b, c, e });
                    }
                }
            }
        }
    }
    None
}

/// Checks antisymmetry, Jacobi, symmetry and nondegeneracy of `B`, and invariance.
pub fn validate_algebra(alg: &QuadraticLieAlgebra) -> Result<Validation, AlgebraError> {
    alg.check_shape()?;
    let n = alg.dim;
    if let Some(v) = check_antisymmetry(&alg.bracket).or_else(|| check_jacobi(&alg.bracket)) {
        return Ok(Validation::Fail(v));
    }
    for a in 0..n {
        for b in 0..n {
            if alg.form[a][b] != alg.form[b][a] {
                return Ok(Validation::Fail(Violation::FormNotSymmetric { a, b }));
            }
        }
    }
    if det(&alg.form).is_zero() {
        return Ok(Validation::Fail(Violation::Degenerate));
    }
    let t = alg.structure_tensor();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                // t[a][b][c] = ⟨e_a,[e_b,e_c]⟩; invariance means total antisymmetry.
                if t[a][b][c] != -t[b][a][c].clone() || t[a][b][c] != -t[a][c][b].clone() {
                    return Ok(Validation::Fail(Violation::Invariance { a, b, c }));
                }
            }
        }
    }
    Ok(Validation::Pass)
}

/// Bases `ξ_i` of V and `ξ^i` of W in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropicSplitting {
    pub v: Vec<Vec<Q>>,
    pub w: Vec<Vec<Q>>,
}

impl IsotropicSplitting {
    pub fn new(alg: &QuadraticLieAlgebra, v: Vec<Vec<Q>>, w: Vec<Vec<Q>>) -> Result<Self, AlgebraError> {
        if !alg.dim.is_multiple_of(2) {
            return Err(AlgebraError::OddDimension(alg.dim));
        }
        let h = alg.dim / 2;
        if v.len() != h || w.len() != h || v.iter().chain(&w).any(|x| x.len() != alg.dim) {
            return Err(AlgebraError::Dimension(format!("split needs {h} vectors of length {} on each side", alg.dim)));
        }
        for i in 0..h {
            for j in 0..h {
                if !alg.pair(&v[i], &v[j]).is_zero() {
                    return Err(AlgebraError::BadSplit(format!("B(ξ_{i}, ξ_{j}) ≠ 0")));
                }
                if !alg.pair(&w[i], &w[j]).is_zero() {
                    return Err(AlgebraError::BadSplit(format!("B(ξ^{i}, ξ^{j}) ≠ 0")));
                }
                let want = if i == j { Q::one() } else { Q::zero() };
                if alg.pair(&v[i], &w[j]) != want {
                    return Err(AlgebraError::BadSplit(format!("B(ξ_{i}, ξ^{j}) ≠ δ")));
                }
            }
        }
        // Isotropy plus duality already force independence; keep the explicit check cheap insurance.
        let basis: Mat = v.iter().chain(&w).cloned().collect();
        if det(&basis).is_zero() {
            return Err(AlgebraError::BadSplit("ξ_i ∪ ξ^i does not span".into()));
        }
        Ok(IsotropicSplitting { v, w })
    }

    pub fn half_dim(&self) -> usize {
        self.v.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplittingClass {
    ManinTriple,
    QuasiManinV,
    QuasiManinW,
    General,
}

impl fmt::Display for SplittingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SplittingClass::ManinTriple => "ManinTriple",
            SplittingClass::QuasiManinV => "QuasiManinV",
            SplittingClass::QuasiManinW => "QuasiManinW",
            SplittingClass::General => "General",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitConstants {
    pub n: usize,
    pub g_low: Vec3,
    pub g_mid: Vec3,
    pub h_mid: Vec3,
    pub h_up: Vec3,
}

fn is_zero3(t: &Vec3) -> bool {
    t.iter().flatten().flatten().all(Zero::is_zero)
}

impl SplitConstants {
    pub fn zero(n: usize) -> Self {
        SplitConstants { n, g_low: zeros3(n), g_mid: zeros3(n), h_mid: zeros3(n), h_up: zeros3(n) }
    }

    /// Checks the antisymmetry pattern of the four tensors.
    pub fn is_valid(&self) -> bool {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let anti_jk = |t: &Vec3| t[i][j][k] == -t[i][k][j].clone();
                    let anti_ij = |t: &Vec3| t[i][j][k] == -t[j][i][k].clone();
                    if !(anti_jk(&self.g_low) && anti_ij(&self.g_low)) {
                        return false;
                    }
                    if !(anti_jk(&self.h_up) && anti_ij(&self.h_up)) {
                        return false;
                    }
                    if !anti_jk(&self.g_mid) || !anti_jk(&self.h_mid) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// `g_{ijk}, g^i_{jk}, h_i^{jk}, h^{ijk}` from the ambient data.
pub fn build_split_constants(alg: &QuadraticLieAlgebra, split: &IsotropicSplitting) -> Result<SplitConstants, AlgebraError> {
    let split = IsotropicSplitting::new(alg, split.v.clone(), split.w.clone())?;
    let n = split.half_dim();
    let mut sc = SplitConstants::zero(n);
    let vv: Vec<Vec<Vec<Q>>> = (0..n).map(|j| (0..n).map(|k| alg.lie(&split.v[j], &split.v[k])).collect()).collect();
    let ww: Vec<Vec<Vec<Q>>> = (0..n).map(|j| (0..n).map(|k| alg.lie(&split.w[j], &split.w[k])).collect()).collect();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                sc.g_low[i][j][k] = alg.pair(&split.v[i], &vv[j][k]);
                sc.g_mid[i][j][k] = alg.pair(&split.w[i], &vv[j][k]);
                sc.h_mid[i][j][k] = alg.pair(&split.v[i], &ww[j][k]);
                sc.h_up[i][j][k] = alg.pair(&split.w[i], &ww[j][k]);
            }
        }
    }
    Ok(sc)
}

pub fn classify_splitting(sc: &SplitConstants) -> SplittingClass {
    match (is_zero3(&sc.g_low), is_zero3(&sc.h_up)) {
        (true, true) => SplittingClass::ManinTriple,
        (true, false) => SplittingClass::QuasiManinV,
        (false, true) => SplittingClass::QuasiManinW,
        (false, false) => SplittingClass::General,
    }
}

/// `e(𝔤) = Σ g^k_{ij} h_k^{ij}`.
pub fn coeff_e(sc: &SplitConstants) -> Q {
    let mut s = Q::zero();
    for k in 0..sc.n {
        for i in 0..sc.n {
            for j in 0..sc.n {
                s += &sc.g_mid[k][i][j] * &sc.h_mid[k][i][j];
            }
        }
    }
    s
}

/// `e′(𝔤) = Σ g_{ijk} h^{ijk}`.
pub fn coeff_e_prime(sc: &SplitConstants) -> Q {
    let mut s = Q::zero();
    for i in 0..sc.n {
        for j in 0..sc.n {
            for k in 0..sc.n {
                s += &sc.g_low[i][j][k] * &sc.h_up[i][j][k];
            }
        }
    }
    s
}

/// `T'_{ijk} = Σ m1[a][i] m2[b][j] m3[c][k] T_{abc}`, one slot at a time.
fn transform3(t: &Vec3, m1: &Mat, m2: &Mat, m3: &Mat) -> Vec3 {
    let n = t.len();
    let mut s1 = zeros3(n);
    for i in 0..n {
        for a in 0..n {
            if m1[a][i].is_zero() {
                continue;
            }
            for b in 0..n {
                for c in 0..n {
                    s1[i][b][c] += &m1[a][i] * &t[a][b][c];
                }
            }
        }
    }
    let mut s2 = zeros3(n);
    for i in 0..n {
        for j in 0..n {
            for b in 0..n {
                if m2[b][j].is_zero() {
                    continue;
                }
                for c in 0..n {
                    s2[i][j][c] += &m2[b][j] * &s1[i][b][c];
                }
            }
        }
    }
    let mut s3 = zeros3(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for c in 0..n {
                    if !m3[c][k].is_zero() {
                        s3[i][j][k] += &m3[c][k] * &s2[i][j][c];
                    }
                }
            }
        }
    }
    s3
}

/// New bases `ξ'_i = Σ_a gl[a][i] ξ_a` and `ξ'^i = Σ_a gl⁻¹[i][a] ξ^a`.
pub fn change_split_basis(sc: &SplitConstants, gl: &Mat) -> Result<SplitConstants, AlgebraError> {
    let n = sc.n;
    if gl.len() != n || gl.iter().any(|r| r.len() != n) {
        return Err(AlgebraError::Dimension(format!("basis change must be {n}x{n}")));
    }
    let inv = inverse(gl)?;
    let lo = gl.clone();
    let up: Mat = (0..n).map(|a| (0..n).map(|i| inv[i][a].clone()).collect()).collect();
    Ok(SplitConstants {
        n,
        g_low: transform3(&sc.g_low, &lo, &lo, &lo),
        g_mid: transform3(&sc.g_mid, &up, &lo, &lo),
        h_mid: transform3(&sc.h_mid, &lo, &up, &up),
        h_up: transform3(&sc.h_up, &up, &up, &up),
    })
}

/// A Lie bialgebra: `[ξ_i, ξ_j] = f^k_{ij} ξ_k` and `[ξ^i, ξ^j] = F^{ij}_k ξ^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieBialgebra {
    pub dim: usize,
    /// `bracket[k][i][j] = f^k_{ij}`
    pub bracket: Vec3,
    /// `cobracket[k][i][j] = F^{ij}_k`
    pub cobracket: Vec3,
}

impl LieBialgebra {
    pub fn abelian(dim: usize) -> Self {
        LieBialgebra { dim, bracket: zeros3(dim), cobracket: zeros3(dim) }
    }

    /// The two-dimensional example `[x,y] = y`, `[x*,y*] = y*`.
    pub fn two_dim_example() -> Self {
        let mut b = LieBialgebra::abelian(2);
        b.bracket[1][0][1] = Q::one();
        b.bracket[1][1][0] = -Q::one();
        b.cobracket[1][0][1] = Q::one();
        b.cobracket[1][1][0] = -Q::one();
        b
    }

    /// Componentwise 1-cocycle identity for `δ(ξ_c)^{ab} = F^{ab}_c`.
    pub fn cocycle_violation(&self) -> Option<[usize; 4]> {
        let n = self.dim;
        let (f, cf) = (&self.bracket, &self.cobracket);
        for c in 0..n {
            for d in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        let mut lhs = Q::zero();
                        let mut rhs = Q::zero();
                        for e in 0..n {
                            lhs += &f[e][c][d] * &cf[e][a][b];
                            rhs += &f[a][c][e] * &cf[d][e][b];
                            rhs += &f[b][c][e] * &cf[d][a][e];
                            rhs -= &f[a][d][e] * &cf[c][e][b];
                            rhs -= &f[b][d][e] * &cf[c][a][e];
                        }
                        if lhs != rhs {
                            return Some([c, d, a, b]);
                        }
                    }
                }
            }
        }
        None
    }
}

/// `𝔡 = 𝔤 ⊕ 𝔤*` with the canonical pairing; V = 𝔤, W = 𝔤*.
pub fn drinfeld_double(b: &LieBialgebra) -> Result<(QuadraticLieAlgebra, IsotropicSplitting), AlgebraError> {
    let n = b.dim;
    for t in [&b.bracket, &b.cobracket] {
        if t.len() != n || t.iter().any(|m| m.len() != n || m.iter().any(|r| r.len() != n)) {
            return Err(AlgebraError::Dimension(format!("bialgebra tensors must be {n}x{n}x{n}")));
        }
        if let Some(v) = check_antisymmetry(t).or_else(|| check_jacobi(t)) {
            return Err(AlgebraError::BadBialgebra(v));
        }
    }
    if let Some(idx) = b.cocycle_violation() {
        return Err(AlgebraError::Cocycle(idx));
    }
    let dim = 2 * n;
    let mut br = zeros3(dim);
    let (f, cf) = (&b.bracket, &b.cobracket);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                br[k][i][j] = f[k][i][j].clone();
                br[n + k][n + i][n + j] = cf[k][i][j].clone();
                // [ξ_i, ξ^j] = F^{jk}_i ξ_k − f^j_{ik} ξ^k
                br[k][i][n + j] = cf[i][j][k].clone();
                br[n + k][i][n + j] = -f[j][i][k].clone();
                br[k][n + j][i] = -cf[i][j][k].clone();
                br[n + k][n + j][i] = f[j][i][k].clone();
            }
        }
    }
    let mut form = zeros2(dim);
    for i in 0..n {
        form[i][n + i] = Q::one();
        form[n + i][i] = Q::one();
    }
    let alg = QuadraticLieAlgebra::new(dim, br, form)?;
    let unit = |a: usize| (0..dim).map(|x| if x == a { Q::one() } else { Q::zero() }).collect::<Vec<Q>>();
    let v = (0..n).map(unit).collect();
    let w = (n..dim).map(unit).collect();
    let split = IsotropicSplitting::new(&alg, v, w)?;
    Ok((alg, split))
}

/// Split constants of the double of [`LieBialgebra::two_dim_example`].
pub fn example_double_constants() -> SplitConstants {
    let (alg, split) = drinfeld_double(&LieBialgebra::two_dim_example()).expect("example bialgebra is valid");
    build_split_constants(&alg, &split).expect("double splitting is valid")
}

/// On-disk algebra description; indices are 0-based and rationals are `"p/q"` strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub dim: usize,
    /// `[a, b, c, v]`: the coefficient of `e_c` in `[e_a, e_b]` is `v`.
    pub bracket: Vec<(usize, usize, usize, String)>,
    /// `[a, b, v]`: `B(e_a, e_b) = v`.
    pub form: Vec<(usize, usize, String)>,
    #[serde(rename = "splitV", default, skip_serializing_if = "Option::is_none")]
    pub split_v: Option<Vec<Vec<String>>>,
    #[serde(rename = "splitW", default, skip_serializing_if = "Option::is_none")]
    pub split_w: Option<Vec<Vec<String>>>,
}

fn parse_entry(s: &str) -> Result<Q, AlgebraError> {
    parse_q(s).ok_or_else(|| AlgebraError::Parse(format!("bad rational {s:?}")))
}

impl AlgebraFile {
    pub fn from_json(text: &str) -> Result<Self, AlgebraError> {
        serde_json::from_str(text).map_err(|e| AlgebraError::Parse(e.to_string()))
    }

    pub fn to_algebra(&self) -> Result<QuadraticLieAlgebra, AlgebraError> {
        let n = self.dim;
        let mut br = zeros3(n);
        for (a, b, c, v) in &self.bracket {
            if *a >= n || *b >= n || *c >= n {
                return Err(AlgebraError::Dimension(format!("bracket index ({a},{b},{c}) out of range")));
            }
            br[*c][*a][*b] = parse_entry(v)?;
        }
        let mut form = zeros2(n);
        for (a, b, v) in &self.form {
            if *a >= n || *b >= n {
                return Err(AlgebraError::Dimension(format!("form index ({a},{b}) out of range")));
            }
            form[*a][*b] = parse_entry(v)?;
        }
        QuadraticLieAlgebra::new(n, br, form)
    }

    pub fn to_split(&self, alg: &QuadraticLieAlgebra) -> Result<Option<IsotropicSplitting>, AlgebraError> {
        let conv = |vs: &Vec<Vec<String>>| -> Result<Vec<Vec<Q>>, AlgebraError> {
            vs.iter().map(|v| v.iter().map(|s| parse_entry(s)).collect()).collect()
        };
        match (&self.split_v, &self.split_w) {
            (Some(v), Some(w)) => Ok(Some(IsotropicSplitting::new(alg, conv(v)?, conv(w)?)?)),
            (None, None) => Ok(None),
            _ => Err(AlgebraError::Parse("splitV and splitW must be given together".into())),
        }
    }

    pub fn from_parts(alg: &QuadraticLieAlgebra, split: Option<&IsotropicSplitting>) -> Self {
        let n = alg.dim;
        let mut bracket = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let v = &alg.bracket[c][a][b];
                    if !v.is_zero() {
                        bracket.push((a, b, c, fmt_q(v)));
                    }
                }
            }
        }
        let mut form = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if !alg.form[a][b].is_zero() {
                    form.push((a, b, fmt_q(&alg.form[a][b])));
                }
            }
        }
        let enc = |vs: &Vec<Vec<Q>>| vs.iter().map(|v| v.iter().map(fmt_q).collect()).collect();
        AlgebraFile {
            dim: n,
            bracket,
            form,
            split_v: split.map(|s| enc(&s.v)),
            split_w: split.map(|s| enc(&s.w)),
        }
    }
}
