//! Rank-2 connections `z d/dz + [[a, b], [c, -a]]` with
//! `a = a0 + a1 z + a2 z^2`, `b = b_{-1}/z + b0 + b1 z + b2 z^2`, `c = c1 z + c2 z^2`,
//! the two standard charts, the gauge group `e2 -> λ e2 + (x0 + x1/z) e1`, and the
//! reducible locus.

use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::algebra::{gauge_transform, MatPoly, ThirdPoly};
use crate::{Error, Result, C64};

/// Relations of the charts are enforced at this absolute tolerance.
pub const RELATION_TOL: f64 = 1e-10;
/// Coefficients below this are treated as zero when deciding chart membership.
pub const CHART_TOL: f64 = 1e-12;

fn half() -> C64 {
    C64::new(0.5, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaParams {
    pub theta0: C64,
    pub theta_inf: C64,
}

impl ThetaParams {
    pub fn new(theta0: C64, theta_inf: C64) -> Self {
        Self { theta0, theta_inf }
    }

    pub fn real(theta0: f64, theta_inf: f64) -> Self {
        Self::new(C64::new(theta0, 0.0), C64::new(theta_inf, 0.0))
    }

    /// `β = exp(iπ θ0)`
    pub fn beta(&self) -> C64 {
        (C64::i() * std::f64::consts::PI * self.theta0).exp()
    }

    /// `α = exp(iπ θ∞)`
    pub fn alpha(&self) -> C64 {
        (C64::i() * std::f64::consts::PI * self.theta_inf).exp()
    }

    pub fn shifted(&self, d0: f64, dinf: f64) -> Self {
        Self::new(self.theta0 + d0, self.theta_inf + dinf)
    }

    /// `(θ0/2)(θ0/2 - 1)`, the value of `a0(a0-1) + b_{-1}c1` on the moduli space.
    pub fn zero_constant(&self) -> C64 {
        let h = self.theta0 * 0.5;
        h * (h - 1.0)
    }

    /// `θ∞ + t²/4`
    pub fn inf_constant(&self, t: C64) -> C64 {
        self.theta_inf + t * t * 0.25
    }
}

/// First standard chart: `a = a2 z^2`, `c = z + c2 z^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ST1Point {
    pub a2: C64,
    pub c2: C64,
    pub t: C64,
    pub b0: C64,
    pub params: ThetaParams,
}

impl ST1Point {
    pub fn new(a2: C64, c2: C64, t: C64, b0: C64, params: ThetaParams) -> Result<Self> {
        let p = Self {
            a2,
            c2,
            t,
            b0,
            params,
        };
        let r = p.relation_residual().norm();
        if r > RELATION_TOL {
            return Err(Error::Invariant {
                what: "ST1 relation",
                residual: r,
            });
        }
        Ok(p)
    }

    /// Solves the relation for `a2` given the other coordinates (principal square root).
    pub fn solve_a2(c2: C64, t: C64, b0: C64, params: ThetaParams) -> Result<Self> {
        let k = params.inf_constant(t) - b0 * c2;
        let a2 = (C64::new(1.0, 0.0) - c2 * t + c2 * c2 * k).sqrt();
        Self::new(a2, c2, t, b0, params)
    }

    pub fn relation_residual(&self) -> C64 {
        let k = self.params.inf_constant(self.t) - self.b0 * self.c2;
        self.a2 * self.a2 + self.c2 * self.t - self.c2 * self.c2 * k - 1.0
    }

    pub fn to_general(&self) -> GeneralPoint {
        let k = self.params.inf_constant(self.t) - self.b0 * self.c2;
        GeneralPoint {
            a: [C64::zero(), C64::zero(), self.a2],
            b: [
                self.params.zero_constant(),
                self.b0,
                k,
                -self.c2 * k + self.t,
            ],
            c: [C64::one(), self.c2],
            t: self.t,
            params: self.params,
        }
    }
}

/// Second standard chart: `a = a0`, `c = c1 z + z^2`, `b = z^2 + b1 z + b0 + b_{-1}/z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ST2Point {
    pub a0: C64,
    pub c1: C64,
    pub t: C64,
    pub b_m1: C64,
    pub params: ThetaParams,
}

impl ST2Point {
    pub fn new(a0: C64, c1: C64, t: C64, b_m1: C64, params: ThetaParams) -> Result<Self> {
        let p = Self {
            a0,
            c1,
            t,
            b_m1,
            params,
        };
        let r = p.relation_residual().norm();
        if r > RELATION_TOL {
            return Err(Error::Invariant {
                what: "ST2 relation",
                residual: r,
            });
        }
        Ok(p)
    }

    /// Solves the relation for `b_{-1}`; needs `c1 != 0`.
    pub fn solve_b_m1(a0: C64, c1: C64, t: C64, params: ThetaParams) -> Result<Self> {
        if c1.norm() <= CHART_TOL {
            return Err(Error::InvalidInput(
                "b_{-1} is undetermined when c1 = 0".into(),
            ));
        }
        let b_m1 = (params.zero_constant() - a0 * (a0 - 1.0)) / c1;
        Self::new(a0, c1, t, b_m1, params)
    }

    pub fn relation_residual(&self) -> C64 {
        self.a0 * (self.a0 - 1.0) + self.b_m1 * self.c1 - self.params.zero_constant()
    }

    pub fn b1(&self) -> C64 {
        self.t - self.c1
    }

    pub fn b0(&self) -> C64 {
        self.params.inf_constant(self.t) - self.b1() * self.c1
    }

    pub fn to_general(&self) -> GeneralPoint {
        GeneralPoint {
            a: [self.a0, C64::zero(), C64::zero()],
            b: [self.b_m1, self.b0(), self.b1(), C64::one()],
            c: [self.c1, C64::one()],
            t: self.t,
            params: self.params,
        }
    }
}

/// A point of the space of connections before dividing out the gauge group.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneralPoint {
    /// `(a0, a1, a2)`
    pub a: [C64; 3],
    /// `(b_{-1}, b0, b1, b2)`
    pub b: [C64; 4],
    /// `(c1, c2)`
    pub c: [C64; 2],
    pub t: C64,
    pub params: ThetaParams,
}

impl GeneralPoint {
    pub fn matrix(&self) -> MatPoly {
        let a = ThirdPoly::from_int_coeffs(0, &self.a);
        let b = ThirdPoly::from_int_coeffs(-1, &self.b);
        let c = ThirdPoly::from_int_coeffs(1, &self.c);
        MatPoly::from_rows(vec![vec![a.clone(), b], vec![c, -a]]).expect("2x2")
    }

    /// Reads the coefficients back from a matrix, rejecting anything outside the
    /// shape `[[a, b], [c, -a]]` described above.
    pub fn from_matrix(m: &MatPoly, t: C64, params: ThetaParams) -> Result<Self> {
        if m.dim() != 2 {
            return Err(Error::InvalidInput("expected a 2x2 matrix".into()));
        }
        let shape_ok = |p: &ThirdPoly, lo: i32, hi: i32| {
            p.terms()
                .all(|(k, v)| (k % 3 == 0 && k >= 3 * lo && k <= 3 * hi) || v.norm() <= 1e-11)
        };
        let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
        if !(shape_ok(a, 0, 2) && shape_ok(b, -1, 2) && shape_ok(c, 1, 2)) {
            return Err(Error::InvalidInput(
                "matrix is not of the rank-2 connection shape".into(),
            ));
        }
        if (a + d).max_abs() > 1e-10 * (1.0 + a.max_abs()) {
            return Err(Error::InvalidInput("matrix is not traceless".into()));
        }
        Ok(Self {
            a: [a.zcoeff(0), a.zcoeff(1), a.zcoeff(2)],
            b: [b.zcoeff(-1), b.zcoeff(0), b.zcoeff(1), b.zcoeff(2)],
            c: [c.zcoeff(1), c.zcoeff(2)],
            t,
            params,
        })
    }
}

/// Residuals of the three equations at infinity and the one at zero.
pub fn check_local_data(g: &GeneralPoint) -> [C64; 4] {
    let [a0, a1, a2] = g.a;
    let [bm1, b0, b1, b2] = g.b;
    let [c1, c2] = g.c;
    let t = g.t;
    [
        a2 * a2 + b2 * c2 - 1.0,
        a1 * a2 * 2.0 + b2 * c1 + b1 * c2 - t,
        a0 * a2 * 2.0 + a1 * a1 + b1 * c1 + b0 * c2 - g.params.inf_constant(t),
        a0 * (a0 - 1.0) + bm1 * c1 - g.params.zero_constant(),
    ]
}

pub fn max_local_residual(g: &GeneralPoint) -> f64 {
    check_local_data(g)
        .iter()
        .map(|r| r.norm())
        .fold(0.0, f64::max)
}

pub fn st1_matrix(p: &ST1Point) -> Result<MatPoly> {
    let r = p.relation_residual().norm();
    if r > RELATION_TOL {
        return Err(Error::Invariant {
            what: "ST1 relation",
            residual: r,
        });
    }
    Ok(p.to_general().matrix())
}

pub fn st2_matrix(p: &ST2Point) -> Result<MatPoly> {
    let r = p.relation_residual().norm();
    if r > RELATION_TOL {
        return Err(Error::Invariant {
            what: "ST2 relation",
            residual: r,
        });
    }
    Ok(p.to_general().matrix())
}

/// Element of `G`: `e1 -> e1`, `e2 -> λ e2 + (x0 + x1/z) e1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaugeElement {
    pub lambda: C64,
    pub x0: C64,
    pub x1: C64,
}

impl GaugeElement {
    pub fn identity() -> Self {
        Self {
            lambda: C64::one(),
            x0: C64::zero(),
            x1: C64::zero(),
        }
    }

    pub fn matrix(&self) -> MatPoly {
        MatPoly::from_rows(vec![
            vec![
                ThirdPoly::one(),
                ThirdPoly::from_int_coeffs(-1, &[self.x1, self.x0]),
            ],
            vec![ThirdPoly::zero(), ThirdPoly::constant(self.lambda)],
        ])
        .expect("2x2")
    }
}

pub fn apply_gauge(g: &GeneralPoint, e: &GaugeElement) -> Result<GeneralPoint> {
    if e.lambda.norm() <= CHART_TOL {
        return Err(Error::SingularGauge(format!("lambda = {}", e.lambda)));
    }
    let m = gauge_transform(&g.matrix(), &e.matrix())?;
    GeneralPoint::from_matrix(&m, g.t, g.params)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Chart {
    ST1,
    #[default]
    ST2,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChartPoint {
    ST1(ST1Point),
    ST2(ST2Point),
}

impl ChartPoint {
    pub fn to_general(&self) -> GeneralPoint {
        match self {
            ChartPoint::ST1(p) => p.to_general(),
            ChartPoint::ST2(p) => p.to_general(),
        }
    }
}

/// The gauge element that brings `g` into the requested chart.
pub fn normalizing_gauge(g: &GeneralPoint, chart: Chart) -> Result<GaugeElement> {
    let [a0, a1, a2] = g.a;
    let [c1, c2] = g.c;
    match chart {
        Chart::ST2 => {
            if c2.norm() <= CHART_TOL {
                return Err(Error::ChartDomain("ST2 needs c2 != 0"));
            }
            let c1n = c1 / c2;
            Ok(GaugeElement {
                lambda: c2,
                x0: a2,
                x1: a1 - a2 * c1n,
            })
        }
        Chart::ST1 => {
            if c1.norm() <= CHART_TOL {
                return Err(Error::ChartDomain("ST1 needs c1 != 0"));
            }
            let c2n = c2 / c1;
            Ok(GaugeElement {
                lambda: c1,
                x0: a1 - a0 * c2n,
                x1: a0,
            })
        }
    }
}

pub fn normalize_to_chart(g: &GeneralPoint, prefer: Chart) -> Result<ChartPoint> {
    let e = normalizing_gauge(g, prefer)?;
    let n = apply_gauge(g, &e)?;
    match prefer {
        Chart::ST2 => ST2Point::new(n.a[0], n.c[0], n.t, n.b[0], n.params).map(ChartPoint::ST2),
        Chart::ST1 => ST1Point::new(n.a[2], n.c[1], n.t, n.b[1], n.params).map(ChartPoint::ST1),
    }
}

pub fn st1_to_st2(p: &ST1Point) -> Result<ST2Point> {
    match normalize_to_chart(&p.to_general(), Chart::ST2)? {
        ChartPoint::ST2(q) => Ok(q),
        ChartPoint::ST1(_) => unreachable!(),
    }
}

pub fn st2_to_st1(p: &ST2Point) -> Result<ST1Point> {
    match normalize_to_chart(&p.to_general(), Chart::ST1)? {
        ChartPoint::ST1(q) => Ok(q),
        ChartPoint::ST2(_) => unreachable!(),
    }
}

/// The unique singular point of the ST2 chart: `θ0 = 1`, `a0 = 1/2`, `b_{-1} = c1 = 0`.
pub fn detect_singular_st2(p: &ST2Point) -> bool {
    let tol = RELATION_TOL;
    (p.params.theta0 - 1.0).norm() <= tol
        && (p.a0 - half()).norm() <= tol
        && p.b_m1.norm() <= tol
        && p.c1.norm() <= tol
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReducibleTypes {
    pub type1: bool,
    pub type2: bool,
}

fn is_integer(r: Rational64) -> bool {
    r.is_integer()
}

/// Presence of the two reducible types as exact predicates on rational `(θ0, θ∞)`.
pub fn reducible_presence(theta0: Rational64, theta_inf: Rational64) -> ReducibleTypes {
    let two = Rational64::from_integer(2);
    let plus = is_integer((theta0 - theta_inf) / two);
    let minus = is_integer((theta0 + theta_inf) / two);
    let t1a = theta0 >= theta_inf;
    let t1b = theta0 <= two - theta_inf;
    let t2a = theta0 <= theta_inf + two;
    let t2b = theta0 >= -theta_inf;
    let (type1, type2) = match (plus, minus) {
        (true, false) => (t1a, t2a),
        (false, true) => (t1b, t2b),
        (true, true) => (t1a || t1b, t2a || t2b),
        (false, false) => (false, false),
    };
    ReducibleTypes { type1, type2 }
}

/// Parses `"p/q"`, an integer, or a finite decimal into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational64> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("not an exact rational: {s}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational64::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        if fp.is_empty() || !fp.chars().all(|ch| ch.is_ascii_digit()) || fp.len() > 15 {
            return Err(bad());
        }
        let neg = ip.trim_start().starts_with('-');
        let ip: i64 = if ip.is_empty() || ip == "-" {
            0
        } else {
            ip.parse().map_err(|_| bad())?
        };
        let den = 10i64.pow(fp.len() as u32);
        let frac = Rational64::new(fp.parse::<i64>().map_err(|_| bad())?, den);
        let whole = Rational64::from_integer(ip.abs());
        let v = whole + frac;
        return Ok(if neg { -v } else { v });
    }
    s.parse::<i64>()
        .map(Rational64::from_integer)
        .map_err(|_| bad())
}

/// The four `b = 0` families. `Pos`/`Neg` is the sign of `a2`, `Plus`/`Minus` the
/// choice of sign in front of `(θ0/2 - 1/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReducibleBranch {
    PosPlus,
    PosMinus,
    NegPlus,
    NegMinus,
}

impl ReducibleBranch {
    pub const ALL: [ReducibleBranch; 4] = [
        ReducibleBranch::PosPlus,
        ReducibleBranch::PosMinus,
        ReducibleBranch::NegPlus,
        ReducibleBranch::NegMinus,
    ];

    pub fn a2_sign(self) -> f64 {
        match self {
            ReducibleBranch::PosPlus | ReducibleBranch::PosMinus => 1.0,
            _ => -1.0,
        }
    }

    fn choice(self) -> f64 {
        match self {
            ReducibleBranch::PosPlus | ReducibleBranch::NegPlus => 1.0,
            _ => -1.0,
        }
    }

    /// `θ∞` forced by the branch for a given `θ0`.
    pub fn theta_inf_for(self, theta0: C64) -> C64 {
        let v = half() + (theta0 * 0.5 - half()) * self.choice();
        v * 2.0 * self.a2_sign()
    }

    pub fn constraint_residual(self, params: &ThetaParams) -> C64 {
        params.theta_inf - self.theta_inf_for(params.theta0)
    }

    /// [`Self::theta_inf_for`] over the rationals.
    pub fn theta_inf_exact(self, theta0: Rational64) -> Rational64 {
        let one = Rational64::one();
        let v = one + (theta0 - one) * Rational64::from_integer(self.choice() as i64);
        v * Rational64::from_integer(self.a2_sign() as i64)
    }

    pub fn constraint_holds_exact(self, theta0: Rational64, theta_inf: Rational64) -> bool {
        theta_inf == self.theta_inf_exact(theta0)
    }
}

/// Member of a `b = 0` family, with `c = c1 z + c2 z^2` given by `c`
/// (the default caller choice is `c = z^2`).
pub fn reducible_family_b0(
    params: ThetaParams,
    t: C64,
    branch: ReducibleBranch,
    c: [C64; 2],
) -> Result<GeneralPoint> {
    let r = branch.constraint_residual(&params).norm();
    if r > RELATION_TOL {
        return Err(Error::Constraint(format!(
            "branch {branch:?} needs theta_inf = {}, got {}",
            branch.theta_inf_for(params.theta0),
            params.theta_inf
        )));
    }
    if c[0].norm() <= CHART_TOL && c[1].norm() <= CHART_TOL {
        return Err(Error::InvalidInput("c must be nonzero".into()));
    }
    let s = branch.a2_sign();
    Ok(GeneralPoint {
        a: [params.theta_inf * 0.5 * s, t * 0.5 * s, C64::new(s, 0.0)],
        b: [C64::zero(); 4],
        c,
        t,
        params,
    })
}

/// Normalised `c` for the families: `c2 = 1` when possible, otherwise `c1 = 1`.
pub fn normalized_c(c: [C64; 2]) -> Result<[C64; 2]> {
    if c[1].norm() > CHART_TOL {
        Ok([c[0] / c[1], C64::one()])
    } else if c[0].norm() > CHART_TOL {
        Ok([C64::one(), C64::zero()])
    } else {
        Err(Error::InvalidInput("c must be nonzero".into()))
    }
}
