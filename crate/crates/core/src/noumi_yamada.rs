//! The symmetric form of PIV
//!
//! ```text
//! f0' = f0 (f1 - f2) + α0,  f1' = f1 (f2 - f0) + α1,  f2' = f2 (f0 - f1) + α2,
//! α0 = 1 - ε1 + ε3,  α1 = ε1 - ε2,  α2 = ε2 - ε3,  ε1 + ε2 + ε3 = 0,
//! ```
//!
//! its 3×3 Lax pair, the passage to PIV, the invariant lattices at infinity and the
//! normal-form equations relating the two.

use num_rational::Rational64;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::{gauge_transform, MatPoly, ThirdPoly};
use crate::isomonodromy::{piv_rhs, PivState, Trajectory};
use crate::linalg::{self, CMat, CVec};
use crate::rank2_moduli::ThetaParams;
use crate::{Error, Result, C64};

const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsTriple {
    e: [C64; 3],
}

impl EpsTriple {
    /// `ε3` is determined by the zero sum.
    pub fn new(e1: C64, e2: C64) -> Self {
        Self {
            e: [e1, e2, -e1 - e2],
        }
    }

    pub fn try_new(e1: C64, e2: C64, e3: C64) -> Result<Self> {
        let s = (e1 + e2 + e3).norm();
        if s > 1e-12 * (1.0 + e1.norm() + e2.norm() + e3.norm()) {
            return Err(Error::Invariant {
                what: "eps sum",
                residual: s,
            });
        }
        Ok(Self { e: [e1, e2, e3] })
    }

    pub fn real(e1: f64, e2: f64) -> Self {
        Self::new(C64::new(e1, 0.0), C64::new(e2, 0.0))
    }

    pub fn values(&self) -> [C64; 3] {
        self.e
    }

    /// `(α0, α1, α2)`
    pub fn alphas(&self) -> [C64; 3] {
        let [e1, e2, e3] = self.e;
        [-e1 + e3 + 1.0, e1 - e2, e2 - e3]
    }

    /// Inverse of [`Self::alphas`]; `α0` follows from `α0 + α1 + α2 = 1`.
    pub fn from_alphas(alpha1: C64, alpha2: C64) -> Self {
        let e1 = (alpha1 * 2.0 + alpha2) / 3.0;
        let e2 = (alpha2 - alpha1) / 3.0;
        Self {
            e: [e1, e2, -e1 - e2],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NyState {
    pub t: C64,
    pub f: [C64; 3],
}

impl NyState {
    /// Fills in `f0 = t - f1 - f2`.
    pub fn on_locus(t: C64, f1: C64, f2: C64) -> Self {
        Self {
            t,
            f: [t - f1 - f2, f1, f2],
        }
    }

    pub fn locus_residual(&self) -> C64 {
        self.f[0] + self.f[1] + self.f[2] - self.t
    }
}

pub fn ny_rhs(s: &NyState, e: &EpsTriple) -> [C64; 3] {
    let [f0, f1, f2] = s.f;
    let [a0, a1, a2] = e.alphas();
    [
        f0 * (f1 - f2) + a0,
        f1 * (f2 - f0) + a1,
        f2 * (f0 - f1) + a2,
    ]
}

/// The zero-sum `q` with `f1 - f2 = q3 - q1` and its cyclic analogues.
pub fn ny_q_from_f(f: &[C64; 3]) -> [C64; 3] {
    let [f0, f1, f2] = *f;
    [
        (f2 * 2.0 - f0 - f1) / 3.0,
        (f0 * 2.0 - f1 - f2) / 3.0,
        (f1 * 2.0 - f2 - f0) / 3.0,
    ]
}

fn k(c: C64) -> ThirdPoly {
    ThirdPoly::constant(c)
}

fn zk(c: C64) -> ThirdPoly {
    ThirdPoly::zpow(c, 1)
}

fn mat3(rows: [[ThirdPoly; 3]; 3]) -> MatPoly {
    MatPoly::from_rows(rows.into_iter().map(|r| r.into_iter().collect()).collect()).expect("3x3")
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

pub fn ny_lax_pair(s: &NyState, e: &EpsTriple) -> (MatPoly, MatPoly) {
    let [f0, f1, f2] = s.f;
    let [e1, e2, e3] = e.values();
    let [q1, q2, q3] = ny_q_from_f(&s.f);
    let z = || zk(one());
    let o = ThirdPoly::zero;
    let a = mat3([
        [k(e1), k(f1), k(one())],
        [z(), k(e2), k(f2)],
        [zk(f0), z(), k(e3)],
    ]);
    let b = mat3([
        [k(-q1), k(one()), o()],
        [o(), k(-q2), k(one())],
        [z(), o(), k(-q3)],
    ]);
    (a, b)
}

/// `dA/dt - z dB/dz - [A, B]` with `dA/dt` built from the supplied `f'`.
pub fn ny_lax_residual_with(s: &NyState, e: &EpsTriple, fdot: &[C64; 3]) -> MatPoly {
    let (a, b) = ny_lax_pair(s, e);
    let o = ThirdPoly::zero;
    let a_dot = mat3([
        [o(), k(fdot[1]), o()],
        [o(), o(), k(fdot[2])],
        [zk(fdot[0]), o(), o()],
    ]);
    &(&a_dot - &b.euler_derivative()) - &a.commutator(&b)
}

pub fn ny_lax_residual(s: &NyState, e: &EpsTriple) -> MatPoly {
    ny_lax_residual_with(s, e, &ny_rhs(s, e))
}

/// `(θ0, θ∞) = (1 + α1, α2 - α0) = (1 + ε1 - ε2, -1 - 3ε3)`.
///
/// This is the assignment under which the rescaled `f1` solves PIV; the variant
/// `θ∞ = 1 + ε1 - ε3` is kept as [`theta_from_eps_as_printed`].
pub fn theta_from_eps(e: &EpsTriple) -> ThetaParams {
    let [a0, a1, a2] = e.alphas();
    ThetaParams::new(a1 + 1.0, a2 - a0)
}

pub fn eps_from_theta(p: &ThetaParams) -> EpsTriple {
    let a1 = p.theta0 - 1.0;
    let a2 = (p.theta_inf + 2.0 - p.theta0) * 0.5;
    EpsTriple::from_alphas(a1, a2)
}

/// `(θ0, θ∞) = (1 + ε1 - ε2, 1 + ε1 - ε3)`.
pub fn theta_from_eps_as_printed(e: &EpsTriple) -> ThetaParams {
    let [e1, e2, e3] = e.values();
    ThetaParams::new(e1 - e2 + 1.0, e1 - e3 + 1.0)
}

pub fn eps_from_theta_as_printed(p: &ThetaParams) -> EpsTriple {
    let e1 = (p.theta0 + p.theta_inf - 2.0) / 3.0;
    EpsTriple::new(e1, e1 - (p.theta0 - 1.0))
}

/// Cyclic permutation `π`: `(α0, α1, α2) -> (α1, α2, α0)`.
pub fn eps_cycle(e: &EpsTriple) -> EpsTriple {
    let [a0, _, a2] = e.alphas();
    EpsTriple::from_alphas(a2, a0)
}

/// `π` on states: `(f0, f1, f2) -> (f1, f2, f0)`.
pub fn state_cycle(s: &NyState) -> NyState {
    NyState {
        t: s.t,
        f: [s.f[1], s.f[2], s.f[0]],
    }
}

/// `PIV` in the variables of the symmetric form (time `T`, `y = f1`).
pub fn ny_form_piv_rhs(tt: C64, y: C64, yp: C64, p: &ThetaParams) -> Result<C64> {
    if y.norm() == 0.0 {
        return Err(Error::Pole("f1 = 0"));
    }
    let nu = (p.theta0 - 1.0) * (p.theta0 - 1.0);
    Ok(
        yp * yp / (y * 2.0) + y * y * y * 1.5 - tt * y * y * 2.0
            + (tt * tt * 0.5 + p.theta_inf) * y
            - nu / (y * 2.0),
    )
}

/// `f1''` along the symmetric flow.
pub fn f1_second(s: &NyState, e: &EpsTriple) -> C64 {
    let d = ny_rhs(s, e);
    let [f0, f1, f2] = s.f;
    d[1] * (f2 - f0) + f1 * (d[2] - d[0])
}

/// How a symmetric-form solution becomes a PIV solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rescaling {
    /// `q(t) = -f1(t/√2)/√2`
    Contract,
    /// `q(t) = -√2 f1(√2 t)`
    Expand,
}

/// The direction that makes the PIV residual vanish; found once by the residual
/// test and frozen.
pub const RESCALING: Rescaling = Rescaling::Contract;

fn map_state(s: &NyState, e: &EpsTriple, dir: Rescaling) -> (PivState, C64) {
    let f1p = ny_rhs(s, e)[1];
    let f1pp = f1_second(s, e);
    match dir {
        Rescaling::Contract => (
            PivState {
                t: s.t * SQRT2,
                q: -s.f[1] / SQRT2,
                qprime: -f1p * 0.5,
            },
            -f1pp / (2.0 * SQRT2),
        ),
        Rescaling::Expand => (
            PivState {
                t: s.t / SQRT2,
                q: -s.f[1] * SQRT2,
                qprime: -f1p * 2.0,
            },
            -f1pp * (2.0 * SQRT2),
        ),
    }
}

/// Maps one state with the frozen rescaling.
pub fn ny_to_piv_state(s: &NyState, e: &EpsTriple) -> PivState {
    map_state(s, e, RESCALING).0
}

/// Inverse of [`ny_to_piv_state`] on the locus `f0 + f1 + f2 = T`.
pub fn piv_to_ny_state(s: &PivState, e: &EpsTriple) -> Result<NyState> {
    if s.q.norm() == 0.0 {
        return Err(Error::Pole("q = 0"));
    }
    let tt = s.t / SQRT2;
    let f1 = -s.q * SQRT2;
    let f1p = -s.qprime * 2.0;
    let diff = (f1p - e.alphas()[1]) / f1;
    let sum = tt - f1;
    Ok(NyState {
        t: tt,
        f: [(sum - diff) * 0.5, f1, (sum + diff) * 0.5],
    })
}

/// Relative PIV residual of a mapped state, using the exact `f1''`.
fn mapped_residual(s: &NyState, e: &EpsTriple, p: &ThetaParams, dir: Rescaling) -> Result<f64> {
    let (ps, qpp) = map_state(s, e, dir);
    let rhs = piv_rhs(&ps, p)?;
    Ok((qpp - rhs).norm() / (1.0 + rhs.norm()))
}

/// Turns a trajectory of the symmetric system (components `f0, f1, f2`) into samples
/// of a PIV solution, together with the PIV parameters.
pub fn f1_to_piv(traj: &Trajectory, e: &EpsTriple) -> Result<(Vec<PivState>, ThetaParams)> {
    let p = theta_from_eps(e);
    let states: Vec<NyState> = traj
        .samples
        .iter()
        .map(|s| NyState {
            t: s.t,
            f: [s.y[0], s.y[1], s.y[2]],
        })
        .collect();
    if states.iter().any(|s| s.f[1].norm() == 0.0) {
        return Err(Error::Pole("f1 vanishes on the trajectory"));
    }
    let worst = |dir| -> Result<f64> {
        states
            .iter()
            .map(|s| mapped_residual(s, e, &p, dir))
            .try_fold(0.0f64, |m, r| Ok(m.max(r?)))
    };
    if worst(RESCALING)? > 1e-8 {
        let other = match RESCALING {
            Rescaling::Contract => Rescaling::Expand,
            Rescaling::Expand => Rescaling::Contract,
        };
        return Err(Error::Convention(format!(
            "rescaled f1 does not solve PIV (residual {:e}, other direction {:e})",
            worst(RESCALING)?,
            worst(other)?
        )));
    }
    Ok((
        states
            .iter()
            .map(|s| map_state(s, e, RESCALING).0)
            .collect(),
        p,
    ))
}

/// The extra generator on a PIV solution point: pass to the symmetric form,
/// permute cyclically, and come back.
pub fn missing_generator_on_solution(
    s: &PivState,
    p: &ThetaParams,
) -> Result<(PivState, ThetaParams)> {
    let e = eps_from_theta(p);
    let ny = piv_to_ny_state(s, &e)?;
    let (ny2, e2) = (state_cycle(&ny), eps_cycle(&e));
    Ok((ny_to_piv_state(&ny2, &e2), theta_from_eps(&e2)))
}

/// `Λ_index` with twist `z^twist`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticeId {
    pub index: u8,
    pub twist: i32,
}

fn zeta() -> C64 {
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0)
}

/// `D` in the basis `e_k` of generalised eigenvectors: `z d/dz + diag(q0, q1, q2)`
/// with `q_k = ζ^{2k} z^{2/3} + ζ^k (t/3) z^{1/3}`.
pub fn formal_eigen_operator(t: C64) -> MatPoly {
    let zt = zeta();
    MatPoly::diag(
        (0..3)
            .map(|kk| {
                let mut p = ThirdPoly::monomial(zt.powi(2 * kk), 2);
                p.add_term(1, zt.powi(kk) * t / 3.0);
                p
            })
            .collect(),
    )
}

/// Columns `h0 = Σ e_k`, `h1 = z^{1/3} Σ ζ^k e_k`, `h2 = z^{-1/3} Σ ζ^{2k} e_k`.
pub fn h_basis_matrix() -> MatPoly {
    let zt = zeta();
    let mut m = MatPoly::zero(3);
    for row in 0..3i32 {
        m.set(row as usize, 0, ThirdPoly::one());
        m.set(row as usize, 1, ThirdPoly::monomial(zt.powi(row), 1));
        m.set(row as usize, 2, ThirdPoly::monomial(zt.powi(2 * row), -1));
    }
    m
}

fn lattice_shift(index: u8) -> Result<MatPoly> {
    let zi = || ThirdPoly::zpow(one(), -1);
    match index {
        0 => Ok(MatPoly::identity(3)),
        1 => Ok(MatPoly::diag(vec![
            ThirdPoly::one(),
            zi(),
            ThirdPoly::one(),
        ])),
        2 => Ok(MatPoly::diag(vec![zi(), zi(), ThirdPoly::one()])),
        _ => Err(Error::InvalidInput(format!(
            "lattice index {index} is not 0, 1 or 2"
        ))),
    }
}

fn lambda0_literal(t: C64) -> MatPoly {
    let t3 = t / 3.0;
    let o = ThirdPoly::zero;
    mat3([
        [o(), zk(one()), k(t3)],
        [k(t3), k(one() / 3.0), k(one())],
        [zk(one()), zk(t3), k(-one() / 3.0)],
    ])
}

fn lambda1_literal(t: C64) -> MatPoly {
    let t3 = t / 3.0;
    mat3([
        [ThirdPoly::zero(), k(one()), k(t3)],
        [zk(t3), k(-one() * 2.0 / 3.0), zk(one())],
        [zk(one()), k(t3), k(-one() / 3.0)],
    ])
}

/// Matrix of `D` on the lattice `z^n Λ_i`. `Λ0` and `Λ1` are the displayed
/// matrices; `Λ2` is obtained from `Λ0` with the basis `(z^{-1}h0, z^{-1}h1, h2)`.
pub fn lattice_matrix(id: LatticeId, t: C64) -> Result<MatPoly> {
    let base = match id.index {
        0 => lambda0_literal(t),
        1 => lambda1_literal(t),
        2 => gauge_transform(&lambda0_literal(t), &lattice_shift(2)?)?,
        i => {
            return Err(Error::InvalidInput(format!(
                "lattice index {i} is not 0, 1 or 2"
            )))
        }
    };
    if id.twist == 0 {
        return Ok(base);
    }
    let zn = MatPoly::diag(vec![ThirdPoly::zpow(one(), id.twist); 3]);
    gauge_transform(&base, &zn)
}

/// `D` on `Λ_i` computed from the formal eigen-decomposition.
pub fn lattice_from_h_basis(index: u8, t: C64) -> Result<MatPoly> {
    let g = &h_basis_matrix() * &lattice_shift(index)?;
    gauge_transform(&formal_eigen_operator(t), &g)
}

/// Largest coefficient deviation between the h-basis computation and the
/// displayed matrix of `Λ0`.
pub fn verify_h_basis_change(t: C64) -> Result<f64> {
    Ok(lattice_from_h_basis(0, t)?.max_deviation(&lambda0_literal(t)))
}

/// Same for `Λ1`.
pub fn verify_lambda1(t: C64) -> Result<f64> {
    Ok(lattice_from_h_basis(1, t)?.max_deviation(&lambda1_literal(t)))
}

/// Entries are polynomials in `z` of degree at most one.
pub fn is_invariant_lattice_form(m: &MatPoly) -> bool {
    m.exponents()
        .iter()
        .all(|&e| e % 3 == 0 && (0..=3).contains(&e))
}

/// `A(z) = A0 + A1 z` for the symmetric-form Lax matrix.
pub fn ny_operator_parts(s: &NyState, e: &EpsTriple) -> (CMat, CMat) {
    let (a, _) = ny_lax_pair(s, e);
    (a.coeff_matrix(0), a.coeff_matrix(3))
}

#[derive(Clone, Debug)]
pub struct NormalFormOptions {
    /// Number of `z^{-1}` orders of the gauge included in the linear system.
    pub depth: usize,
    /// When set, the solution is extracted from a random element of the solution
    /// space instead of the dominant singular direction.
    pub seed: Option<u64>,
    pub tol: f64,
}

impl Default for NormalFormOptions {
    fn default() -> Self {
        Self {
            depth: 3,
            seed: None,
            tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NormalFormReport {
    /// Normalised to unit Frobenius norm with its largest entry real positive.
    pub u0: CMat,
    pub u_m1: CMat,
    /// `|U0 A1 - N U0|`
    pub residual_a1: f64,
    /// `|A0 - U0^{-1} M U0 - [A1, U_{-1}]|`
    pub residual_a0: f64,
    /// Dimension of the space of admissible `U0` (1 means unique up to scalar).
    pub u0_dimension: usize,
    pub u0_condition: f64,
}

fn split_lambda0(t: C64) -> (CMat, CMat) {
    let l = lambda0_literal(t);
    (l.coeff_matrix(3), l.coeff_matrix(0))
}

fn normalise(u: &CMat) -> CMat {
    let (mut best, mut idx) = (0.0, 0);
    for (i, v) in u.iter().enumerate() {
        if v.norm() > best * (1.0 + 1e-9) {
            best = v.norm();
            idx = i;
        }
    }
    let phase = u[idx] / u[idx].norm();
    u / (phase * u.norm())
}

/// Looks for a formal gauge `U = U0 (1 + U_{-1} z^{-1} + …)` carrying
/// `z d/dz + A0 + A1 z` to the `Λ0` normal form at infinity, solving the equations
/// order by order as one linear system.
pub fn ny_normal_form_check(
    a0: &CMat,
    a1: &CMat,
    t: C64,
    opts: &NormalFormOptions,
) -> Result<NormalFormReport> {
    if a0.shape() != (3, 3) || a1.shape() != (3, 3) {
        return Err(Error::InvalidInput("expected 3x3 matrices".into()));
    }
    let depth = opts.depth.max(1);
    let (n, m) = split_lambda0(t);
    let id = linalg::identity(3);
    // vec(W X) = kron(I, X^T) vec(W), vec(X W) = kron(X, I) vec(W)
    let right = |x: &CMat| linalg::kron(&id, &x.transpose());
    let left = |x: &CMat| linalg::kron(x, &id);
    let blocks = depth + 1;
    let mut big = CMat::zeros(9 * blocks, 9 * blocks);
    let diag_op = right(a1) - left(&n);
    for j in 0..blocks {
        big.view_mut((9 * j, 9 * j), (9, 9)).copy_from(&diag_op);
        if j >= 1 {
            let sub = linalg::identity(9) * C64::new(j as f64 - 1.0, 0.0) + right(a0) - left(&m);
            big.view_mut((9 * j, 9 * (j - 1)), (9, 9)).copy_from(&sub);
        }
    }
    let smax = linalg::singular_values(&big)[0];
    let null = linalg::null_space(&big, 1e-9 * smax.max(1.0));
    let fail = |why: String| Err(Error::NoNormalForm(why));
    if null.ncols() == 0 {
        return fail("the order-by-order system has only the zero solution".into());
    }
    let proj = null.rows(0, 9).into_owned();
    let u0_dimension = linalg::rank(&proj, 1e-8);
    if u0_dimension == 0 {
        return fail("no nonzero U0 solves the equations".into());
    }
    let coeffs: CVec = match opts.seed {
        None => {
            let svd = proj.clone().svd(true, true);
            let v_t = svd.v_t.expect("requested");
            let (imax, _) =
                svd.singular_values
                    .iter()
                    .enumerate()
                    .fold(
                        (0, -1.0),
                        |acc, (i, &s)| if s > acc.1 { (i, s) } else { acc },
                    );
            v_t.row(imax).adjoint()
        }
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            CVec::from_fn(null.ncols(), |_, _| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                C64::new(re, im)
            })
        }
    };
    let x = &null * coeffs;
    let w0 = linalg::unvec_rows(&x.rows(0, 9).into_owned(), 3, 3);
    let w1 = linalg::unvec_rows(&x.rows(9, 9).into_owned(), 3, 3);
    let u0_condition = linalg::cond(&w0);
    if !u0_condition.is_finite() || u0_condition > 1e10 {
        return fail(format!("U0 is singular (condition {u0_condition:e})"));
    }
    let inv = w0
        .clone()
        .try_inverse()
        .ok_or(Error::NoNormalForm("U0 is singular".into()))?;
    let u_m1 = &inv * &w1;
    let residual_a1 = linalg::max_abs(&(&w0 * a1 - &n * &w0)) / linalg::max_abs(&w0);
    let residual_a0 = linalg::max_abs(&(a0 - &inv * &m * &w0 - (a1 * &u_m1 - &u_m1 * a1)));
    if residual_a1 > opts.tol || residual_a0 > opts.tol {
        return fail(format!(
            "residuals {residual_a1:e}, {residual_a0:e} exceed tolerance"
        ));
    }
    Ok(NormalFormReport {
        u0: normalise(&w0),
        u_m1,
        residual_a1,
        residual_a0,
        u0_dimension,
        u0_condition,
    })
}

fn congruent_mod_z(a: Rational64, b: Rational64) -> bool {
    (a - b).is_integer()
}

/// Cases in which the map to monodromy data is bijective, for rational `ε`
/// (`μ_j = exp(2πi ε_j)`).
pub fn bijectivity_cases(e: [Rational64; 3]) -> Result<bool> {
    if !(e[0] + e[1] + e[2]).is_zero() {
        return Err(Error::InvalidInput("eps must sum to zero".into()));
    }
    let [e1, e2, e3] = e;
    let zero = Rational64::zero();
    let (m12, m13, m23) = (
        congruent_mod_z(e1, e2),
        congruent_mod_z(e1, e3),
        congruent_mod_z(e2, e3),
    );
    Ok(match (m12, m13, m23) {
        (false, false, false) => true,
        (true, true, true) => e2 - e1 >= zero && e3 - e2 >= zero,
        (true, false, false) => e2 - e1 >= zero,
        (false, true, false) => e3 - e1 >= zero,
        (false, false, true) => e3 - e2 >= zero,
        _ => unreachable!("congruence is transitive"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn cplx() -> impl Strategy<Value = C64> {
        (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| C64::new(a, b))
    }

    #[test]
    fn rhs_examples() {
        let e = EpsTriple::real(0.0, 0.0);
        let s = NyState {
            t: r(3.0),
            f: [r(1.0); 3],
        };
        assert_eq!(ny_rhs(&s, &e), [r(1.0), r(0.0), r(0.0)]);
    }

    #[test]
    fn q_examples() {
        assert_eq!(ny_q_from_f(&[r(1.0); 3]), [r(0.0); 3]);
        let q = ny_q_from_f(&[r(3.0), r(0.0), r(0.0)]);
        assert!(
            (q[1] - r(2.0)).norm() < 1e-15
                && (q[0] + 1.0).norm() < 1e-15
                && (q[2] + 1.0).norm() < 1e-15
        );
    }

    #[test]
    fn eps_rejects_nonzero_sum() {
        assert!(EpsTriple::try_new(r(1.0), r(0.0), r(0.0)).is_err());
    }

    #[test]
    fn printed_dictionary_examples() {
        let p = theta_from_eps_as_printed(&EpsTriple::real(0.0, 0.0));
        assert_eq!((p.theta0, p.theta_inf), (r(1.0), r(1.0)));
        let p = theta_from_eps_as_printed(&EpsTriple::real(1.0, 0.0));
        assert_eq!((p.theta0, p.theta_inf), (r(2.0), r(3.0)));
    }

    #[test]
    fn dictionary_examples() {
        let p = theta_from_eps(&EpsTriple::real(0.0, 0.0));
        assert_eq!((p.theta0, p.theta_inf), (r(1.0), r(-1.0)));
        let p = theta_from_eps(&EpsTriple::real(1.0, 0.0));
        assert_eq!((p.theta0, p.theta_inf), (r(2.0), r(2.0)));
    }

    #[test]
    fn cycle_reproduces_displayed_missing_generator() {
        let p = ThetaParams::new(C64::new(0.3, 0.1), C64::new(-1.2, 0.4));
        let via = theta_from_eps(&eps_cycle(&eps_from_theta(&p)));
        let shown = crate::backlund::missing_generator(&p);
        assert!(
            (via.theta0 - shown.theta0).norm() < 1e-14
                && (via.theta_inf - shown.theta_inf).norm() < 1e-14
        );
    }

    #[test]
    fn lattice_examples() {
        let t = C64::new(0.7, -0.3);
        let l0 = lattice_matrix(LatticeId { index: 0, twist: 0 }, t).unwrap();
        assert_eq!(l0.get(0, 1).zcoeff(1), r(1.0));
        assert_eq!(l0.get(0, 2).zcoeff(0), t / 3.0);
        assert!(l0.trace().is_zero());
        for i in 0..3 {
            assert!(is_invariant_lattice_form(
                &lattice_matrix(LatticeId { index: i, twist: 0 }, t).unwrap()
            ));
        }
        let l2 = lattice_matrix(LatticeId { index: 2, twist: 0 }, t).unwrap();
        assert!((l2.trace() - ThirdPoly::constant(r(-2.0))).is_zero());
        let tw = lattice_matrix(LatticeId { index: 0, twist: 2 }, t).unwrap();
        assert!(tw.max_deviation(&(&l0 + &MatPoly::identity(3).scale(r(2.0)))) < 1e-15);
        assert!(lattice_matrix(LatticeId { index: 3, twist: 0 }, t).is_err());
    }

    #[test]
    fn lattice_at_t_zero() {
        let l0 = lattice_matrix(LatticeId { index: 0, twist: 0 }, r(0.0)).unwrap();
        assert!(l0.get(0, 2).is_zero() && l0.get(1, 0).is_zero());
        assert!(verify_h_basis_change(r(0.0)).unwrap() < 1e-12);
    }

    #[test]
    fn h_basis_is_invertible() {
        let h = h_basis_matrix();
        let hi = h.inverse().unwrap();
        assert!((&h * &hi).max_deviation(&MatPoly::identity(3)) < 1e-14);
    }

    #[test]
    fn bijectivity_examples() {
        let q = |n, d| Rational64::new(n, d);
        assert!(bijectivity_cases([q(0, 1), q(0, 1), q(0, 1)]).unwrap());
        assert!(!bijectivity_cases([q(1, 1), q(0, 1), q(-1, 1)]).unwrap());
        assert!(bijectivity_cases([q(1, 4), q(0, 1), q(-1, 4)]).unwrap());
        assert!(bijectivity_cases([q(1, 1), q(1, 1), q(0, 1)]).is_err());
    }

    #[test]
    fn normal_form_off_locus_fails() {
        let e = EpsTriple::new(C64::new(0.13, 0.02), C64::new(-0.31, 0.05));
        let s = NyState {
            t: r(1.0),
            f: [r(0.3), r(0.2), r(0.5)],
        };
        let (a0, a1) = ny_operator_parts(&s, &e);
        assert!(ny_normal_form_check(&a0, &a1, s.t, &NormalFormOptions::default()).is_ok());
        let bad = NyState {
            t: r(1.0),
            f: [r(0.3), r(0.2), r(0.6)],
        };
        let (a0, a1) = ny_operator_parts(&bad, &e);
        assert!(matches!(
            ny_normal_form_check(&a0, &a1, bad.t, &NormalFormOptions::default()),
            Err(Error::NoNormalForm(_))
        ));
    }

    proptest! {
        #[test]
        fn sum_derivative_is_one(f in prop::array::uniform3(cplx()), t in cplx(), e1 in cplx(), e2 in cplx()) {
            let d = ny_rhs(&NyState { t, f }, &EpsTriple::new(e1, e2));
            prop_assert!((d[0] + d[1] + d[2] - 1.0).norm() < 1e-14 * (1.0 + f.iter().map(|v| v.norm_sqr()).sum::<f64>()));
        }

        #[test]
        fn lax_identity(f1 in cplx(), f2 in cplx(), t in cplx(), e1 in cplx(), e2 in cplx()) {
            let s = NyState::on_locus(t, f1, f2);
            prop_assert!(ny_lax_residual(&s, &EpsTriple::new(e1, e2)).max_abs() < 1e-12 * (1.0 + t.norm()).powi(2));
        }

        #[test]
        fn lax_residual_tracks_fdot(f1 in cplx(), f2 in cplx(), t in cplx(), e1 in cplx(), e2 in cplx(), delta in -1.0f64..1.0) {
            let s = NyState::on_locus(t, f1, f2);
            let e = EpsTriple::new(e1, e2);
            let mut fd = ny_rhs(&s, &e);
            fd[0] += delta;
            let res = ny_lax_residual_with(&s, &e, &fd);
            prop_assert!((res.get(2, 0).zcoeff(1) - r(delta)).norm() < 1e-12 * (1.0 + t.norm()).powi(2));
            let mut others = res.clone();
            others.set(2, 0, ThirdPoly::zero());
            prop_assert!(others.max_abs() < 1e-12 * (1.0 + t.norm()).powi(2));
        }

        #[test]
        fn dictionary_round_trip(a in cplx(), b in cplx()) {
            let p = ThetaParams::new(a, b);
            let back = theta_from_eps(&eps_from_theta(&p));
            prop_assert!((back.theta0 - a).norm() < 1e-14 && (back.theta_inf - b).norm() < 1e-14);
            let back = theta_from_eps_as_printed(&eps_from_theta_as_printed(&p));
            prop_assert!((back.theta0 - a).norm() < 1e-14 && (back.theta_inf - b).norm() < 1e-14);
        }

        #[test]
        fn cyclic_equivariance(f in prop::array::uniform3(cplx()), t in cplx(), e1 in cplx(), e2 in cplx()) {
            let e = EpsTriple::new(e1, e2);
            let s = NyState { t, f };
            let lhs = ny_rhs(&state_cycle(&s), &eps_cycle(&e));
            let d = ny_rhs(&s, &e);
            let rhs = [d[1], d[2], d[0]];
            for i in 0..3 {
                prop_assert!((lhs[i] - rhs[i]).norm() < 1e-13 * (1.0 + t.norm() + f.iter().map(|v| v.norm_sqr()).sum::<f64>()));
            }
        }

        #[test]
        fn piv_state_round_trip(f1 in cplx(), f2 in cplx(), t in cplx(), e1 in cplx(), e2 in cplx()) {
            prop_assume!(f1.norm() > 0.1);
            let e = EpsTriple::new(e1, e2);
            let s = NyState::on_locus(t, f1, f2);
            let back = piv_to_ny_state(&ny_to_piv_state(&s, &e), &e).unwrap();
            for i in 0..3 {
                prop_assert!((back.f[i] - s.f[i]).norm() < 1e-10 * (1.0 + s.f[i].norm()));
            }
        }

        #[test]
        fn h_basis_reproduces_lattices(t in cplx()) {
            prop_assert!(verify_h_basis_change(t).unwrap() < 1e-12);
            prop_assert!(verify_lambda1(t).unwrap() < 1e-12);
        }
    }
}
