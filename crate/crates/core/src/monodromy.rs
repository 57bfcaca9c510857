//! Stokes data and topological monodromy.
//!
//! Rank 2: formal monodromy `diag(α, 1/α)` times four unipotent Stokes factors,
//! the map to `(trace, α)` and the optional level parameter β.
//!
//! Rank 3: the point `x = (x₁,…,x₄)` of the monodromy space, the matrix `M(x)`, its
//! characteristic polynomial `λ³ − e₁λ² + e₂λ − 1`, the singular points of the fibres
//! of `x ↦ (e₁, e₂)` and the invariant flags `L₁ ⊂ L₂` over a chosen ordering of
//! the eigenvalues.
//!
//! The closed forms are written once, generically over any commutative ring with
//! `Copy` elements, so that they can be checked exactly over `Rational64` and
//! evaluated over `Complex64`.

use std::f64::consts::PI;
use std::ops::Neg;

use num_rational::Rational64;
use num_traits::Num;
use serde::Serialize;

use crate::linalg::{cmat, identity, max_abs, null_space, singular_values, CMat};
use crate::{Error, Result, C64};

/// Singular values below this count as zero.
pub const RANK_THRESHOLD: f64 = 1e-8;
/// Singular values inside `[lo, hi]` are too close to call.
pub const INDETERMINATE_BAND: (f64, f64) = (1e-10, 1e-6);
/// Tolerance for `top = ±I` in the rank-2 fibre map.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Tolerance used to validate user-supplied eigenvalues.
pub const SPECTRUM_TOL: f64 = 1e-8;
/// Tolerance on the defining equations of a returned flag.
pub const FLAG_TOL: f64 = 1e-9;

/// Anything we can multiply 3×3 matrices over.
pub trait Ring: Num + Neg<Output = Self> + Copy {}
impl<T: Num + Neg<Output = T> + Copy> Ring for T {}

pub type Mat3<T> = [[T; 3]; 3];

pub fn mat3_mul<T: Ring>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = T::zero();
            for k in 0..3 {
                s = s + a[i][k] * b[k][j];
            }
            out[i][j] = s;
        }
    }
    out
}

fn unipotent<T: Ring>(i: usize, j: usize, x: T) -> Mat3<T> {
    let mut m = [[T::zero(); 3]; 3];
    for (k, row) in m.iter_mut().enumerate() {
        row[k] = T::one();
    }
    m[i][j] = x;
    m
}

/// The cyclic formal monodromy followed by the four Stokes factors, in product order.
pub fn rank3_factors<T: Ring>(x: [T; 4]) -> [Mat3<T>; 5] {
    let (o, l) = (T::zero(), T::one());
    let cyclic = [[o, o, l], [l, o, o], [o, l, o]];
    [
        cyclic,
        unipotent(2, 0, x[3]),
        unipotent(1, 0, x[2]),
        unipotent(1, 2, x[1]),
        unipotent(0, 2, x[0]),
    ]
}

pub fn stokes_product<T: Ring>(x: [T; 4]) -> Mat3<T> {
    rank3_factors(x)
        .iter()
        .fold(unipotent(0, 0, T::one()), |acc, f| mat3_mul(&acc, f))
}

/// `M(x)` as displayed.
pub fn closed_form<T: Ring>(x: [T; 4]) -> Mat3<T> {
    let [x1, x2, x3, x4] = x;
    let (o, l) = (T::zero(), T::one());
    [[x4, o, x1 * x4 + l], [l, o, x1], [x3, l, x1 * x3 + x2]]
}

/// `(e₁, e₂)` from the displayed formula.
pub fn charpoly_formula<T: Ring>(x: [T; 4]) -> (T, T) {
    let [x1, x2, x3, x4] = x;
    (x2 + x4 + x1 * x3, -x1 - x3 + x2 * x4)
}

/// `(tr M, sum of principal 2-minors, det M)`, i.e. `det(λ − M) = λ³ − c₀λ² + c₁λ − c₂`.
pub fn matrix_invariants<T: Ring>(m: &Mat3<T>) -> (T, T, T) {
    let tr = m[0][0] + m[1][1] + m[2][2];
    let minor = |i: usize, j: usize| m[i][i] * m[j][j] - m[i][j] * m[j][i];
    let m2 = minor(0, 1) + minor(0, 2) + minor(1, 2);
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    (tr, m2, det)
}

/// Exact version of [`rank3_top_monodromy`].
pub fn rank3_top_monodromy_exact(x: [Rational64; 4]) -> Result<Mat3<Rational64>> {
    let p = stokes_product(x);
    if p != closed_form(x) {
        return Err(Error::Consistency(format!(
            "Stokes product {p:?} differs from the closed form"
        )));
    }
    Ok(p)
}

fn mat3_to_cmat(m: &Mat3<C64>) -> CMat {
    CMat::from_fn(3, 3, |i, j| m[i][j])
}

// ---------------------------------------------------------------- rank 2

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rank2Stokes {
    pub alpha: C64,
    pub a: [C64; 4],
}

impl Rank2Stokes {
    pub fn new(alpha: C64, a: [C64; 4]) -> Result<Self> {
        if alpha == C64::new(0.0, 0.0) {
            return Err(Error::InvalidInput("α must be nonzero".into()));
        }
        if a.iter().all(|v| *v == C64::new(0.0, 0.0)) {
            return Err(Error::InvalidInput(
                "a₁ = a₂ = a₃ = a₄ = 0 is the direct-sum case".into(),
            ));
        }
        Ok(Rank2Stokes { alpha, a })
    }

    /// The Stokes data whose topological monodromy is the identity, normalised by `a₂ = 1`.
    pub fn identity_point(alpha: C64) -> Result<Self> {
        let one = C64::new(1.0, 0.0);
        Rank2Stokes::new(alpha, [alpha - one, one, one / alpha - one, -alpha])
    }
}

fn mat2(a: C64, b: C64, c: C64, d: C64) -> CMat {
    cmat(2, 2, &[a, b, c, d])
}

pub fn rank2_top_monodromy(s: &Rank2Stokes) -> Result<CMat> {
    let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    if s.alpha == o {
        return Err(Error::InvalidInput("α must be nonzero".into()));
    }
    let [a1, a2, a3, a4] = s.a;
    Ok(mat2(s.alpha, o, o, l / s.alpha)
        * mat2(l, o, a1, l)
        * mat2(l, a2, o, l)
        * mat2(l, o, a3, l)
        * mat2(l, a4, o, l))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Rank2Singular {
    PlusIdentity,
    MinusIdentity,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Rank2Fiber {
    pub trace: C64,
    pub alpha: C64,
    pub singular: Option<Rank2Singular>,
}

pub fn rank2_fiber_data(s: &Rank2Stokes) -> Result<Rank2Fiber> {
    let top = rank2_top_monodromy(s)?;
    let id = identity(2);
    let singular = if max_abs(&(&top - &id)) <= IDENTITY_TOL {
        Some(Rank2Singular::PlusIdentity)
    } else if max_abs(&(&top + &id)) <= IDENTITY_TOL {
        Some(Rank2Singular::MinusIdentity)
    } else {
        None
    };
    Ok(Rank2Fiber {
        trace: top.trace(),
        alpha: s.alpha,
        singular,
    })
}

/// Which triangular shape the Stokes data force on `top∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Rank2Reducible {
    /// `a₂ = a₄ = 0`: `e₂` spans an invariant line.
    Lower,
    /// `a₁ = a₃ = 0`: `e₁` spans an invariant line.
    Upper,
}

pub fn rank2_reducibility(s: &Rank2Stokes, tol: f64) -> Option<Rank2Reducible> {
    let small = |v: C64| v.norm() <= tol;
    if small(s.a[1]) && small(s.a[3]) {
        Some(Rank2Reducible::Lower)
    } else if small(s.a[0]) && small(s.a[2]) {
        Some(Rank2Reducible::Upper)
    } else {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EigenChoice {
    /// `(tr + √(tr² − 4))/2` with the principal square root.
    First,
    Second,
    Value(C64),
}

/// The level parameter `(β, α)`: an eigenvalue β of `top∞` together with α.
pub fn rank2_level_param(s: &Rank2Stokes, choice: EigenChoice) -> Result<(C64, C64)> {
    let top = rank2_top_monodromy(s)?;
    let tr = top.trace();
    let disc = (tr * tr - 4.0).sqrt();
    let beta = match choice {
        EigenChoice::First => (tr + disc) / 2.0,
        EigenChoice::Second => (tr - disc) / 2.0,
        EigenChoice::Value(b) => {
            let scale = 1.0 + b.norm_sqr() + (tr * b).norm();
            let r = (b * b - tr * b + 1.0).norm();
            if r > SPECTRUM_TOL * scale {
                return Err(Error::Spectrum(format!(
                    "{b} is not an eigenvalue of top∞ (characteristic residual {r:.3e})"
                )));
            }
            b
        }
    };
    if beta.norm() == 0.0 {
        return Err(Error::Spectrum("β = 0".into()));
    }
    let r = (beta + 1.0 / beta - tr).norm();
    if r > 1e-12 * (1.0 + tr.norm() + beta.norm() + 1.0 / beta.norm()) {
        return Err(Error::Spectrum(format!(
            "β + 1/β differs from the trace by {r:.3e}"
        )));
    }
    Ok((beta, s.alpha))
}

// ---------------------------------------------------------------- rank 3

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rank3Stokes {
    pub x: [C64; 4],
}

impl Rank3Stokes {
    pub fn new(x: [C64; 4]) -> Self {
        Rank3Stokes { x }
    }

    pub fn real(x: [f64; 4]) -> Self {
        Rank3Stokes {
            x: x.map(|v| C64::new(v, 0.0)),
        }
    }

    /// `(−1/a, a, −1/a, a)`, the singular point of its fibre.
    pub fn special(a: C64) -> Self {
        let m = -1.0 / a;
        Rank3Stokes { x: [m, a, m, a] }
    }

    pub fn matrix(&self) -> CMat {
        mat3_to_cmat(&closed_form(self.x))
    }

    pub fn charpoly(&self) -> CharPoly3 {
        let (e1, e2) = charpoly_formula(self.x);
        CharPoly3 { e1, e2 }
    }

    fn scale(&self) -> f64 {
        1.0 + self.x.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Product of the formal monodromy and the Stokes factors, checked against the closed form.
pub fn rank3_top_monodromy(x: &Rank3Stokes) -> Result<CMat> {
    let p = stokes_product(x.x);
    let c = closed_form(x.x);
    let mut dev: f64 = 0.0;
    let mut size: f64 = 1.0;
    for i in 0..3 {
        for j in 0..3 {
            dev = dev.max((p[i][j] - c[i][j]).norm());
            size = size.max(c[i][j].norm());
        }
    }
    if dev > 1e-13 * size {
        return Err(Error::Consistency(format!(
            "Stokes product differs from the closed form by {dev:.3e}"
        )));
    }
    Ok(mat3_to_cmat(&p))
}

pub fn rank3_charpoly(x: &Rank3Stokes) -> CharPoly3 {
    x.charpoly()
}

/// `λ³ − e₁λ² + e₂λ − 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CharPoly3 {
    pub e1: C64,
    pub e2: C64,
}

impl CharPoly3 {
    pub fn from_roots(mu: [C64; 3]) -> (Self, C64) {
        let [a, b, c] = mu;
        (
            CharPoly3 {
                e1: a + b + c,
                e2: a * b + a * c + b * c,
            },
            a * b * c,
        )
    }

    /// Coefficients of `λ³, λ², λ, 1`.
    pub fn coefficients(&self) -> [C64; 4] {
        [C64::new(1.0, 0.0), -self.e1, self.e2, C64::new(-1.0, 0.0)]
    }

    pub fn eval(&self, l: C64) -> C64 {
        ((l - self.e1) * l + self.e2) * l - 1.0
    }

    /// Roots via the Schur form of the companion matrix.
    pub fn roots(&self) -> Result<[C64; 3]> {
        let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        let comp = cmat(3, 3, &[o, o, l, l, o, -self.e2, o, l, self.e1]);
        let ev = comp
            .eigenvalues()
            .ok_or_else(|| Error::Spectrum("Schur iteration did not converge".into()))?;
        Ok([ev[0], ev[1], ev[2]])
    }

    /// Roots grouped by proximity; each group is represented by its mean, which is
    /// far more accurate than the individual members of a multiple root.
    pub fn clustered_roots(&self, rel_tol: f64) -> Result<Vec<(C64, usize)>> {
        let roots = self.roots()?;
        let mut groups: Vec<Vec<C64>> = Vec::new();
        for r in roots {
            let hit = groups
                .iter_mut()
                .find(|g| (g[0] - r).norm() <= rel_tol * (1.0 + r.norm()));
            match hit {
                Some(g) => g.push(r),
                None => groups.push(vec![r]),
            }
        }
        Ok(groups
            .into_iter()
            .map(|g| (g.iter().sum::<C64>() / g.len() as f64, g.len()))
            .collect())
    }
}

/// Rows `∂e₁/∂x` and `∂e₂/∂x`.
pub fn charpoly_jacobian(x: &Rank3Stokes) -> [[C64; 4]; 2] {
    let [x1, x2, x3, x4] = x.x;
    let (l, m) = (C64::new(1.0, 0.0), C64::new(-1.0, 0.0));
    [[x3, l, x1, l], [m, x4, m, x2]]
}

/// Rank from singular values, or `None` when one of them sits in the indeterminate band.
pub fn banded_rank(sv: &[f64]) -> Option<usize> {
    let (lo, hi) = INDETERMINATE_BAND;
    if sv.iter().any(|&s| s >= lo && s <= hi) {
        None
    } else {
        Some(sv.iter().filter(|&&s| s > RANK_THRESHOLD).count())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FiberClass {
    Regular,
    A1,
    A2,
    Indeterminate,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EigenCluster {
    pub value: C64,
    pub algebraic: usize,
    /// `3 − rank(M − μ)`, `None` when the rank is indeterminate.
    pub geometric: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FiberReport {
    pub class: FiberClass,
    pub jacobian_singular_values: Vec<f64>,
    pub jacobian_rank: Option<usize>,
    /// The `a` with `x = (−1/a, a, −1/a, a)` when the Jacobian drops rank.
    pub special_parameter: Option<C64>,
    pub eigenvalues: Vec<EigenCluster>,
    /// Number of Jordan blocks of `M(x)`.
    pub jordan_blocks: Option<usize>,
}

const CLUSTER_TOL: f64 = 1e-4;

pub fn fiber_singularity(x: &Rank3Stokes) -> Result<FiberReport> {
    let jac = charpoly_jacobian(x);
    let j = cmat(2, 4, &[jac[0], jac[1]].concat());
    let jsv = singular_values(&j);
    let jrank = banded_rank(&jsv);

    let m = x.matrix();
    let mut clusters = Vec::new();
    for (mu, alg) in x.charpoly().clustered_roots(CLUSTER_TOL)? {
        let shifted = &m - identity(3) * mu;
        let geometric = banded_rank(&singular_values(&shifted)).map(|r| 3 - r);
        clusters.push(EigenCluster {
            value: mu,
            algebraic: alg,
            geometric,
        });
    }
    let jordan_blocks = clusters.iter().map(|c| c.geometric).sum::<Option<usize>>();

    let (class, special_parameter) = match jrank {
        None => (FiberClass::Indeterminate, None),
        Some(2) => (FiberClass::Regular, None),
        Some(_) => {
            let a = x.x[1];
            let expected = Rank3Stokes::special(a);
            let off = expected
                .x
                .iter()
                .zip(x.x.iter())
                .map(|(p, q)| (p - q).norm())
                .fold(0.0, f64::max);
            if off > 1e-6 * x.scale() {
                return Err(Error::Consistency(format!(
                    "Jacobian rank drop away from the special locus (distance {off:.3e})"
                )));
            }
            let cube = (a * a * a - 1.0).norm();
            if cube < 1e-8 {
                (FiberClass::A2, Some(a))
            } else if cube > 1e-6 {
                (FiberClass::A1, Some(a))
            } else {
                (FiberClass::Indeterminate, Some(a))
            }
        }
    };
    Ok(FiberReport {
        class,
        jacobian_singular_values: jsv,
        jacobian_rank: jrank,
        special_parameter,
        eigenvalues: clusters,
        jordan_blocks,
    })
}

// ---------------------------------------------------------------- flags

/// `L₁ = ℂy`, `L₂ = ker z`, with the eigenvalue triple it lies over.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Flag {
    pub y: [C64; 3],
    pub z: [C64; 3],
    pub mu: [C64; 3],
}

impl Flag {
    /// `(|My − μ₁y|, |zM − μ₃z|, |Σyⱼzⱼ|)` for unit-normalised `y`, `z`.
    pub fn residuals(&self, m: &CMat) -> [f64; 3] {
        let ny = self.y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let nz = self.z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let y: Vec<C64> = self.y.iter().map(|v| v / ny).collect();
        let z: Vec<C64> = self.z.iter().map(|v| v / nz).collect();
        let mut r = [0.0f64; 3];
        for i in 0..3 {
            let my: C64 = (0..3).map(|k| m[(i, k)] * y[k]).sum();
            let zm: C64 = (0..3).map(|k| z[k] * m[(k, i)]).sum();
            r[0] = r[0].max((my - self.mu[0] * y[i]).norm());
            r[1] = r[1].max((zm - self.mu[2] * z[i]).norm());
        }
        r[2] = (0..3).map(|k| y[k] * z[k]).sum::<C64>().norm();
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FlagComponents {
    Empty,
    Point,
    ProjectiveLine,
    TwoIntersectingLines,
    /// `P¹ × P¹`; does not occur over the monodromy space but is reported if found.
    Quadric,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlagSet {
    pub components: FlagComponents,
    pub eigenspace_dims: (usize, usize),
    /// Sample flags; for two lines the last one is the intersection point.
    pub representatives: Vec<Flag>,
}

fn column(m: &CMat, j: usize) -> [C64; 3] {
    [m[(0, j)], m[(1, j)], m[(2, j)]]
}

fn combine(basis: &CMat, u: [C64; 2]) -> [C64; 3] {
    let mut out = [C64::new(0.0, 0.0); 3];
    for (i, o) in out.iter_mut().enumerate() {
        *o = basis[(i, 0)] * u[0] + basis[(i, 1)] * u[1];
    }
    out
}

/// A nonzero vector orthogonal (bilinearly) to `g`.
fn perp(g: [C64; 2]) -> [C64; 2] {
    if g[0].norm() + g[1].norm() == 0.0 {
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
    } else {
        [-g[1], g[0]]
    }
}

fn validate_mu(x: &Rank3Stokes, mu: [C64; 3]) -> Result<()> {
    let (p, prod) = CharPoly3::from_roots(mu);
    let cp = x.charpoly();
    let scale = 1.0 + mu.iter().map(|v| v.norm()).fold(0.0, f64::max).powi(2);
    let dev = (p.e1 - cp.e1)
        .norm()
        .max((p.e2 - cp.e2).norm())
        .max((prod - 1.0).norm());
    if dev > SPECTRUM_TOL * scale {
        return Err(Error::Spectrum(format!(
            "μ = {mu:?} is not the spectrum of M(x) (deviation {dev:.3e})"
        )));
    }
    Ok(())
}

/// Invariant flags `L₁ ⊂ L₂` with `M|L₁ = μ₁` and `M|(ℂ³/L₂) = μ₃`.
pub fn invariant_flags(x: &Rank3Stokes, mu: [C64; 3]) -> Result<FlagSet> {
    validate_mu(x, mu)?;
    let m = x.matrix();
    let id = identity(3);
    // threshold between the round-off floor and the band: eigenvalues come in to ~1e-12
    let thr = INDETERMINATE_BAND.0.max(1e-9 * x.scale());
    let ys = null_space(&(&m - &id * mu[0]), thr);
    let zs = null_space(&(m.transpose() - &id * mu[2]), thr);
    let (dy, dz) = (ys.ncols(), zs.ncols());
    if dy == 0 || dz == 0 {
        return Err(Error::Spectrum(format!(
            "empty eigenspace (dims {dy}, {dz}) for μ = {mu:?}"
        )));
    }
    let gram = zs.transpose() * &ys;
    let gsv = singular_values(&gram);
    let grank = gsv.iter().filter(|&&s| s > 1e-8).count();
    let flag = |y: [C64; 3], z: [C64; 3]| Flag { y, z, mu };

    let (components, representatives) = match (dy, dz) {
        (1, 1) => {
            let f = flag(column(&ys, 0), column(&zs, 0));
            if grank == 0 {
                (FlagComponents::Point, vec![f])
            } else {
                (FlagComponents::Empty, vec![])
            }
        }
        (2, 1) => {
            let z = column(&zs, 0);
            if grank == 0 {
                let reps = vec![flag(column(&ys, 0), z), flag(column(&ys, 1), z)];
                (FlagComponents::ProjectiveLine, reps)
            } else {
                let u = perp([gram[(0, 0)], gram[(0, 1)]]);
                (FlagComponents::Point, vec![flag(combine(&ys, u), z)])
            }
        }
        (1, 2) => {
            let y = column(&ys, 0);
            if grank == 0 {
                let reps = vec![flag(y, column(&zs, 0)), flag(y, column(&zs, 1))];
                (FlagComponents::ProjectiveLine, reps)
            } else {
                let w = perp([gram[(0, 0)], gram[(1, 0)]]);
                (FlagComponents::Point, vec![flag(y, combine(&zs, w))])
            }
        }
        (2, 2) => {
            let e = |k: usize| {
                let mut u = [C64::new(0.0, 0.0); 2];
                u[k] = C64::new(1.0, 0.0);
                u
            };
            // zᵀ G u = 0 for z = zs·w, y = ys·u
            let z_for = |u: [C64; 2]| {
                let gu = [
                    gram[(0, 0)] * u[0] + gram[(0, 1)] * u[1],
                    gram[(1, 0)] * u[0] + gram[(1, 1)] * u[1],
                ];
                combine(&zs, perp(gu))
            };
            match grank {
                2 => {
                    let reps = (0..2)
                        .map(|k| flag(combine(&ys, e(k)), z_for(e(k))))
                        .collect();
                    (FlagComponents::ProjectiveLine, reps)
                }
                1 => {
                    let kr = null_space(&gram, 1e-8);
                    let kl = null_space(&gram.transpose(), 1e-8);
                    let u0 = [kr[(0, 0)], kr[(1, 0)]];
                    let w0 = [kl[(0, 0)], kl[(1, 0)]];
                    let (y0, z0) = (combine(&ys, u0), combine(&zs, w0));
                    let reps = vec![
                        flag(y0, column(&zs, 0)),
                        flag(y0, column(&zs, 1)),
                        flag(column(&ys, 0), z0),
                        flag(column(&ys, 1), z0),
                        flag(y0, z0),
                    ];
                    (FlagComponents::TwoIntersectingLines, reps)
                }
                _ => {
                    let reps = vec![flag(column(&ys, 0), column(&zs, 0))];
                    (FlagComponents::Quadric, reps)
                }
            }
        }
        _ => {
            return Err(Error::Spectrum(format!(
                "eigenspace dimensions ({dy}, {dz}) for μ = {mu:?}"
            )))
        }
    };
    for f in &representatives {
        let r = f.residuals(&m);
        if r.iter().any(|&v| v > FLAG_TOL * x.scale()) {
            return Err(Error::Invariant {
                what: "flag equations",
                residual: r[0].max(r[1]).max(r[2]),
            });
        }
    }
    Ok(FlagSet {
        components,
        eigenspace_dims: (dy, dz),
        representatives,
    })
}

// ---------------------------------------------------------------- directions

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DirectionRow {
    pub k: u8,
    pub l: u8,
    /// `arg(ζ^{2k} − ζ^{2ℓ})` in `[0, 2π)`.
    pub phi: f64,
    /// Singular direction in `[0, 3π)`; the sector lives on the threefold cover.
    pub d: f64,
}

pub fn singular_direction(k: u8, l: u8) -> DirectionRow {
    let zeta = C64::from_polar(1.0, 2.0 * PI / 3.0);
    let w = zeta.powu(2 * k as u32) - zeta.powu(2 * l as u32);
    let phi = w.arg().rem_euclid(2.0 * PI);
    let d = (1.5 * PI - 1.5 * phi).rem_euclid(3.0 * PI);
    DirectionRow { k, l, phi, d }
}

/// The printed table in units of π: `(k, ℓ, φ/π, d/π)`.
pub const DIRECTION_TABLE: [(u8, u8, f64, f64); 6] = [
    (0, 1, 1.0 / 6.0, 5.0 / 4.0),
    (1, 0, 7.0 / 6.0, 11.0 / 4.0),
    (0, 2, 11.0 / 6.0, 7.0 / 4.0),
    (2, 0, 5.0 / 6.0, 1.0 / 4.0),
    (1, 2, 9.0 / 6.0, 9.0 / 4.0),
    (2, 1, 3.0 / 6.0, 3.0 / 4.0),
];

/// Largest deviation of [`singular_directions`] from [`DIRECTION_TABLE`].
pub fn direction_table_deviation() -> f64 {
    singular_directions()
        .iter()
        .zip(DIRECTION_TABLE.iter())
        .map(|(r, &(k, l, phi, d))| {
            if (r.k, r.l) != (k, l) {
                return f64::INFINITY;
            }
            (r.phi - phi * PI).abs().max((r.d - d * PI).abs())
        })
        .fold(0.0, f64::max)
}

/// Rows in the order `(0,1), (1,0), (0,2), (2,0), (1,2), (2,1)`.
pub fn singular_directions() -> Vec<DirectionRow> {
    [(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)]
        .into_iter()
        .map(|(k, l)| singular_direction(k, l))
        .collect()
}
