//! The rank-2 isomonodromic family above the second chart, PIV, and the Riccati
//! families coming from reducible connections.
//!
//! Compatibility of `z d/dz + A` and `d/dt + B` is written as
//! `dA/dt - z dB/dz - [A, B] = 0`.

pub mod ode;

use crate::algebra::{MatPoly, ThirdPoly};
use crate::fd;
use crate::rank2_moduli::{ST2Point, ThetaParams};
use crate::{Error, Result, C64};

pub use ode::{
    integrate, integrate_fixed, IntegrateOptions, Path, Sample, Termination, Trajectory,
};

/// Below this modulus `q` is treated as zero.
pub const Q_MIN: f64 = 1e-300;

fn require_q(q: C64) -> Result<()> {
    if q.norm() <= Q_MIN || !q.re.is_finite() || !q.im.is_finite() {
        Err(Error::Pole("q = 0"))
    } else {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PivState {
    pub t: C64,
    pub q: C64,
    pub qprime: C64,
}

/// `q''` from PIV.
pub fn piv_rhs(s: &PivState, p: &ThetaParams) -> Result<C64> {
    require_q(s.q)?;
    let (t, q, qp) = (s.t, s.q, s.qprime);
    let nu = (p.theta0 - 1.0) * (p.theta0 - 1.0);
    Ok(
        qp * qp / (q * 2.0) + q * q * q * 1.5 + t * q * q + q / 8.0 * (p.theta_inf * 4.0 + t * t)
            - nu / (q * 8.0),
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaxPairData {
    pub q: C64,
    pub a0: C64,
    pub t: C64,
    pub params: ThetaParams,
}

impl LaxPairData {
    pub fn new(q: C64, a0: C64, t: C64, params: ThetaParams) -> Result<Self> {
        require_q(q)?;
        Ok(Self { q, a0, t, params })
    }

    pub fn b1(&self) -> C64 {
        self.t + self.q
    }

    pub fn b0(&self) -> C64 {
        self.q * (self.t + self.q) + self.params.inf_constant(self.t)
    }

    fn zero_numerator(&self) -> C64 {
        let u = self.a0 - 0.5;
        let v = self.params.theta0 * 0.5 - 0.5;
        u * u - v * v
    }

    pub fn b_m1(&self) -> C64 {
        self.zero_numerator() / self.q
    }

    /// The same point in the second chart (`c1 = -q`).
    pub fn st2_point(&self) -> Result<ST2Point> {
        ST2Point::new(self.a0, -self.q, self.t, self.b_m1(), self.params)
    }
}

fn zpoly(lowest: i32, coeffs: &[C64]) -> ThirdPoly {
    ThirdPoly::from_int_coeffs(lowest, coeffs)
}

fn mat2(a: ThirdPoly, b: ThirdPoly, c: ThirdPoly, d: ThirdPoly) -> MatPoly {
    MatPoly::from_rows(vec![vec![a, b], vec![c, d]]).expect("2x2")
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

pub fn lax_a(d: &LaxPairData) -> MatPoly {
    let a = ThirdPoly::constant(d.a0);
    let b = zpoly(-1, &[d.b_m1(), d.b0(), d.b1(), one()]);
    let c = zpoly(1, &[-d.q, one()]);
    mat2(a.clone(), b, c, -a)
}

pub fn lax_b(d: &LaxPairData) -> MatPoly {
    let q = d.q;
    let b1 = d.b1();
    let top = zpoly(
        -1,
        &[
            (q * (q + b1) + d.b0()) * 0.5,
            (b1 + q) * 0.5,
            C64::new(0.5, 0.0),
        ],
    );
    mat2(
        ThirdPoly::zero(),
        top,
        ThirdPoly::zpow(C64::new(0.5, 0.0), 1),
        ThirdPoly::zero(),
    )
}

/// `dA/dt` with the `t`-dependence through `q` and `a0` expanded by the chain rule.
fn lax_a_dot(d: &LaxPairData, qdot: C64, a0dot: C64) -> MatPoly {
    let (q, t) = (d.q, d.t);
    let b1dot = one() + qdot;
    let b0dot = qdot * (t + q) + q * (one() + qdot) + t * 0.5;
    let bm1dot = (d.a0 - 0.5) * a0dot * 2.0 / q - d.zero_numerator() * qdot / (q * q);
    let a = ThirdPoly::constant(a0dot);
    mat2(
        a.clone(),
        zpoly(-1, &[bm1dot, b0dot, b1dot]),
        ThirdPoly::zpow(-qdot, 1),
        -a,
    )
}

/// `dA/dt - z dB/dz - [A, B]` for prescribed `dq/dt` and `da0/dt`.
pub fn lax_residual(d: &LaxPairData, qdot: C64, a0dot: C64) -> MatPoly {
    let a = lax_a(d);
    let b = lax_b(d);
    &(&lax_a_dot(d, qdot, a0dot) - &b.euler_derivative()) - &a.commutator(&b)
}

/// The isomonodromy flow `(dq/dt, da0/dt)`.
pub fn flow_rhs(t: C64, q: C64, a0: C64, p: &ThetaParams) -> Result<(C64, C64)> {
    let d = LaxPairData::new(q, a0, t, *p)?;
    let qdot = a0 - 0.5;
    let a0dot = (d.b_m1() + q * (q * (d.b1() + q) + d.b0())) * 0.5;
    Ok((qdot, a0dot))
}

/// Integrates PIV as the system `(q, q')`.
pub fn integrate_piv(
    p: &ThetaParams,
    start: PivState,
    path_end: &Path,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    if (path_end.start() - start.t).norm() > 0.0 {
        return Err(Error::InvalidInput(
            "path must start at the initial time".into(),
        ));
    }
    let p = *p;
    integrate(
        move |t, y| {
            Ok(vec![
                y[1],
                piv_rhs(
                    &PivState {
                        t,
                        q: y[0],
                        qprime: y[1],
                    },
                    &p,
                )?,
            ])
        },
        &[start.q, start.qprime],
        path_end,
        opts,
    )
}

/// Integrates the isomonodromy flow in the variables `(q, a0)`.
pub fn integrate_flow(
    p: &ThetaParams,
    q0: C64,
    a00: C64,
    path: &Path,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    let p = *p;
    integrate(
        move |t, y| {
            let (qd, ad) = flow_rhs(t, y[0], y[1], &p)?;
            Ok(vec![qd, ad])
        },
        &[q0, a00],
        path,
        opts,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RiccatiSign {
    Plus,
    Minus,
}

impl RiccatiSign {
    fn s(self) -> f64 {
        match self {
            RiccatiSign::Plus => 1.0,
            RiccatiSign::Minus => -1.0,
        }
    }
}

pub fn riccati_rhs(t: C64, q: C64, d: C64, sign: RiccatiSign) -> C64 {
    match sign {
        RiccatiSign::Plus => q * q + t * q * 0.5 + (d - 1.0) * 0.5,
        RiccatiSign::Minus => -q * q - t * q * 0.5 - (d + 1.0) * 0.5,
    }
}

/// Derivative of the Riccati right-hand side along its own flow, i.e. `q''`.
pub fn riccati_second(t: C64, q: C64, d: C64, sign: RiccatiSign) -> C64 {
    let qd = riccati_rhs(t, q, d, sign);
    (q * 2.0 * qd + q * 0.5 + t * qd * 0.5) * sign.s()
}

/// The two PIV parameter pairs containing the Riccati family `(d, sign)`:
/// `θ∞ = d` with `θ0 ∈ {d, 2 - d}` for `+` and `θ0 ∈ {d + 2, -d}` for `-`.
pub fn riccati_parameters(d: C64, sign: RiccatiSign) -> [ThetaParams; 2] {
    match sign {
        RiccatiSign::Plus => [ThetaParams::new(d, d), ThetaParams::new(-d + 2.0, d)],
        RiccatiSign::Minus => [ThetaParams::new(d + 2.0, d), ThetaParams::new(-d, d)],
    }
}

/// Residual of the reducible Lax pair
/// `z d/dz + s[[ω, 0], [z^2 - qz, -ω]]`, `d/dt + s[[τ, 0], [z/2, -τ]]` (off-diagonal
/// entry unsigned), `ω = z^2 + tz/2 + d/2`, `τ = (2z + 2q + t)/4`, `s = ±1`.
pub fn reducible_lax_residual(q: C64, qdot: C64, t: C64, d: C64, sign: RiccatiSign) -> MatPoly {
    let s = C64::new(sign.s(), 0.0);
    let omega = zpoly(0, &[d * 0.5, t * 0.5, one()]).scale(s);
    let tau = zpoly(0, &[(q * 2.0 + t) * 0.25, C64::new(0.5, 0.0)]).scale(s);
    let c = zpoly(1, &[-q, one()]);
    let a = mat2(omega.clone(), ThirdPoly::zero(), c, -omega);
    let b = mat2(
        tau.clone(),
        ThirdPoly::zero(),
        ThirdPoly::zpow(C64::new(0.5, 0.0), 1),
        -tau,
    );
    let adiag = ThirdPoly::zpow(s * 0.5, 1);
    let a_dot = mat2(
        adiag.clone(),
        ThirdPoly::zero(),
        ThirdPoly::zpow(-qdot, 1),
        -adiag,
    );
    &(&a_dot - &b.euler_derivative()) - &a.commutator(&b)
}

/// Integrates the Riccati equation, returning samples of `q` with `dy = q'`.
pub fn integrate_riccati(
    d: C64,
    sign: RiccatiSign,
    q0: C64,
    path: &Path,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    integrate(
        move |t, y| Ok(vec![riccati_rhs(t, y[0], d, sign)]),
        &[q0],
        path,
        opts,
    )
}

/// `|q'' - piv_rhs|` at every sample of uniformly spaced data, where `q''` is the
/// fourth-order finite difference of the `q'` samples.
pub fn piv_fd_residuals(ts: &[C64], q: &[C64], qp: &[C64], p: &ThetaParams) -> Result<Vec<f64>> {
    if ts.len() != q.len() || ts.len() != qp.len() {
        return Err(Error::InvalidInput("sample arrays differ in length".into()));
    }
    if ts.len() < 5 {
        return Err(Error::InvalidInput("need at least five samples".into()));
    }
    let h = ts[1] - ts[0];
    for w in ts.windows(2) {
        if ((w[1] - w[0]) - h).norm() > 1e-9 * h.norm() {
            return Err(Error::InvalidInput(
                "samples are not uniformly spaced".into(),
            ));
        }
    }
    let qpp = fd::derivative(qp, h).expect("length checked");
    ts.iter()
        .zip(q.iter().zip(qp))
        .zip(&qpp)
        .map(|((&t, (&q, &qprime)), &dd)| Ok((dd - piv_rhs(&PivState { t, q, qprime }, p)?).norm()))
        .collect()
}
