//! Polynomials and matrices over `C[z^{1/3}, z^{-1/3}]`.
//!
//! Exponents are stored as integer numerators over 3, so `z` is the key `3` and
//! `z^{-1/3}` is the key `-1`. Everything here is exact up to floating point; small
//! coefficients are pruned at [`PRUNE`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::linalg::{self, CMat};
use crate::{Error, Result, C64};

pub const PRUNE: f64 = 1e-14;

/// Laurent polynomial in `z^{1/3}`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ThirdPoly {
    terms: BTreeMap<i32, C64>,
}

impl ThirdPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: C64) -> Self {
        Self::monomial(c, 0)
    }

    pub fn one() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }

    /// `c * z^{num/3}`
    pub fn monomial(c: C64, num: i32) -> Self {
        let mut p = Self::zero();
        p.add_term(num, c);
        p
    }

    /// `c * z^k` for an integer power.
    pub fn zpow(c: C64, k: i32) -> Self {
        Self::monomial(c, 3 * k)
    }

    /// Integer-power coefficients starting at `z^lowest`.
    pub fn from_int_coeffs(lowest: i32, coeffs: &[C64]) -> Self {
        let mut p = Self::zero();
        for (i, &c) in coeffs.iter().enumerate() {
            p.add_term(3 * (lowest + i as i32), c);
        }
        p
    }

    pub fn add_term(&mut self, num: i32, c: C64) {
        let e = self.terms.entry(num).or_insert(C64::new(0.0, 0.0));
        *e += c;
        if e.norm() <= PRUNE {
            self.terms.remove(&num);
        }
    }

    /// Coefficient of `z^{num/3}`.
    pub fn coeff(&self, num: i32) -> C64 {
        self.terms.get(&num).copied().unwrap_or_default()
    }

    /// Coefficient of `z^k`.
    pub fn zcoeff(&self, k: i32) -> C64 {
        self.coeff(3 * k)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, C64)> + '_ {
        self.terms.iter().map(|(&k, &v)| (k, v))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn exponents(&self) -> impl Iterator<Item = i32> + '_ {
        self.terms.keys().copied()
    }

    pub fn min_exponent(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut p = Self::zero();
        for (k, v) in self.terms() {
            p.add_term(k, v * s);
        }
        p
    }

    /// `z d/dz`, which multiplies `z^{n/3}` by `n/3`.
    pub fn euler_derivative(&self) -> Self {
        let mut p = Self::zero();
        for (k, v) in self.terms() {
            p.add_term(k, v * (k as f64 / 3.0));
        }
        p
    }

    /// Evaluation on the principal branch of `z^{1/3}`.
    pub fn eval(&self, z: C64) -> C64 {
        self.terms()
            .map(|(k, v)| {
                if k % 3 == 0 {
                    v * z.powi(k / 3)
                } else {
                    v * z.powc(C64::new(k as f64 / 3.0, 0.0))
                }
            })
            .sum()
    }

    /// Largest coefficient modulus (0 for the zero polynomial).
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `Some((c, num))` when the polynomial is a single nonzero monomial.
    pub fn as_monomial(&self, rel_tol: f64) -> Option<(C64, i32)> {
        let big = self.max_abs();
        if big == 0.0 {
            return None;
        }
        let mut it = self.terms().filter(|(_, v)| v.norm() > rel_tol * big);
        let first = it.next()?;
        if it.next().is_some() {
            None
        } else {
            Some((first.1, first.0))
        }
    }
}

impl fmt::Display for ThirdPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms()
            .map(|(k, v)| match k {
                0 => format!("({v})"),
                k if k % 3 == 0 => format!("({v})z^{}", k / 3),
                k => format!("({v})z^({k}/3)"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Add for &ThirdPoly {
    type Output = ThirdPoly;
    fn add(self, rhs: &ThirdPoly) -> ThirdPoly {
        let mut p = self.clone();
        for (k, v) in rhs.terms() {
            p.add_term(k, v);
        }
        p
    }
}

impl Sub for &ThirdPoly {
    type Output = ThirdPoly;
    fn sub(self, rhs: &ThirdPoly) -> ThirdPoly {
        let mut p = self.clone();
        for (k, v) in rhs.terms() {
            p.add_term(k, -v);
        }
        p
    }
}

impl Mul for &ThirdPoly {
    type Output = ThirdPoly;
    fn mul(self, rhs: &ThirdPoly) -> ThirdPoly {
        let mut p = ThirdPoly::zero();
        for (k1, v1) in self.terms() {
            for (k2, v2) in rhs.terms() {
                p.add_term(k1 + k2, v1 * v2);
            }
        }
        p
    }
}

impl Neg for &ThirdPoly {
    type Output = ThirdPoly;
    fn neg(self) -> ThirdPoly {
        self.scale(C64::new(-1.0, 0.0))
    }
}

macro_rules! forward_owned {
    ($ty:ty, $tr:ident, $m:ident) => {
        impl $tr for $ty {
            type Output = $ty;
            fn $m(self, rhs: $ty) -> $ty {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&$ty> for $ty {
            type Output = $ty;
            fn $m(self, rhs: &$ty) -> $ty {
                (&self).$m(rhs)
            }
        }
        impl $tr<$ty> for &$ty {
            type Output = $ty;
            fn $m(self, rhs: $ty) -> $ty {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(ThirdPoly, Add, add);
forward_owned!(ThirdPoly, Sub, sub);
forward_owned!(ThirdPoly, Mul, mul);

impl Neg for ThirdPoly {
    type Output = ThirdPoly;
    fn neg(self) -> ThirdPoly {
        -&self
    }
}

/// Square `n × n` matrix with [`ThirdPoly`] entries.
#[derive(Clone, Debug, PartialEq)]
pub struct MatPoly {
    n: usize,
    entries: Vec<ThirdPoly>,
}

impl MatPoly {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            entries: vec![ThirdPoly::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.set(i, i, ThirdPoly::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<ThirdPoly>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("matrix rows must form a square".into()));
        }
        Ok(Self {
            n,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn diag(d: Vec<ThirdPoly>) -> Self {
        let n = d.len();
        let mut m = Self::zero(n);
        for (i, p) in d.into_iter().enumerate() {
            m.set(i, i, p);
        }
        m
    }

    /// Constant matrix times `z^{num/3}`.
    pub fn from_const(c: &CMat, num: i32) -> Self {
        let n = c.nrows();
        let mut m = Self::zero(n);
        for i in 0..n {
            for j in 0..n {
                m.entry_mut(i, j).add_term(num, c[(i, j)]);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &ThirdPoly {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: ThirdPoly) {
        self.entries[i * self.n + j] = p;
    }

    pub fn entry_mut(&mut self, i: usize, j: usize) -> &mut ThirdPoly {
        &mut self.entries[i * self.n + j]
    }

    fn zip(&self, other: &Self, f: impl Fn(&ThirdPoly, &ThirdPoly) -> ThirdPoly) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        Self {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|p| p.scale(s)).collect(),
        }
    }

    pub fn scale_poly(&self, s: &ThirdPoly) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|p| p * s).collect(),
        }
    }

    pub fn euler_derivative(&self) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|p| p.euler_derivative()).collect(),
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn trace(&self) -> ThirdPoly {
        (0..self.n).fold(ThirdPoly::zero(), |acc, i| &acc + self.get(i, i))
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zero(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m.set(i, j, self.get(j, i).clone());
            }
        }
        m
    }

    fn minor(&self, row: usize, col: usize) -> Self {
        let n = self.n - 1;
        let mut m = Self::zero(n);
        for (ii, i) in (0..self.n).filter(|&i| i != row).enumerate() {
            for (jj, j) in (0..self.n).filter(|&j| j != col).enumerate() {
                m.set(ii, jj, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn det(&self) -> ThirdPoly {
        match self.n {
            0 => ThirdPoly::one(),
            1 => self.get(0, 0).clone(),
            2 => &(self.get(0, 0) * self.get(1, 1)) - &(self.get(0, 1) * self.get(1, 0)),
            _ => {
                let mut acc = ThirdPoly::zero();
                for j in 0..self.n {
                    let term = self.get(0, j) * &self.minor(0, j).det();
                    acc = if j % 2 == 0 {
                        &acc + &term
                    } else {
                        &acc - &term
                    };
                }
                acc
            }
        }
    }

    pub fn adjugate(&self) -> Self {
        let n = self.n;
        let mut m = Self::zero(n);
        if n == 1 {
            m.set(0, 0, ThirdPoly::one());
            return m;
        }
        for i in 0..n {
            for j in 0..n {
                let cof = self.minor(j, i).det();
                m.set(i, j, if (i + j) % 2 == 0 { cof } else { -cof });
            }
        }
        m
    }

    /// Inverse inside the Laurent ring, which exists only when the determinant is a
    /// monomial.
    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        let (c, k) = det
            .as_monomial(1e-12)
            .ok_or_else(|| Error::SingularGauge(det.to_string()))?;
        Ok(self
            .adjugate()
            .scale_poly(&ThirdPoly::monomial(C64::new(1.0, 0.0) / c, -k)))
    }

    /// Coefficient matrix of `z^{num/3}`.
    pub fn coeff_matrix(&self, num: i32) -> CMat {
        CMat::from_fn(self.n, self.n, |i, j| self.get(i, j).coeff(num))
    }

    pub fn exponents(&self) -> BTreeSet<i32> {
        self.entries.iter().flat_map(|p| p.exponents()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|p| p.max_abs()).fold(0.0, f64::max)
    }

    pub fn max_deviation(&self, other: &Self) -> f64 {
        (self - other).max_abs()
    }

    pub fn eval(&self, z: C64) -> CMat {
        CMat::from_fn(self.n, self.n, |i, j| self.get(i, j).eval(z))
    }

    /// `Σ c_k z^{k/3}` built from coefficient matrices keyed by numerator.
    pub fn from_coeff_matrices<'a>(
        n: usize,
        it: impl IntoIterator<Item = (i32, &'a CMat)>,
    ) -> Self {
        let mut m = Self::zero(n);
        for (k, c) in it {
            for i in 0..n {
                for j in 0..n {
                    m.entry_mut(i, j).add_term(k, c[(i, j)]);
                }
            }
        }
        m
    }
}

impl fmt::Display for MatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Add for &MatPoly {
    type Output = MatPoly;
    fn add(self, rhs: &MatPoly) -> MatPoly {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &MatPoly {
    type Output = MatPoly;
    fn sub(self, rhs: &MatPoly) -> MatPoly {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Mul for &MatPoly {
    type Output = MatPoly;
    fn mul(self, rhs: &MatPoly) -> MatPoly {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let n = self.n;
        let mut m = MatPoly::zero(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = ThirdPoly::zero();
                for k in 0..n {
                    let (a, b) = (self.get(i, k), rhs.get(k, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &(a * b);
                    }
                }
                m.set(i, j, acc);
            }
        }
        m
    }
}

impl Neg for &MatPoly {
    type Output = MatPoly;
    fn neg(self) -> MatPoly {
        self.scale(C64::new(-1.0, 0.0))
    }
}

forward_owned!(MatPoly, Add, add);
forward_owned!(MatPoly, Sub, sub);
forward_owned!(MatPoly, Mul, mul);

/// `g^{-1} A g + g^{-1} z dg/dz`.
pub fn gauge_transform(a: &MatPoly, g: &MatPoly) -> Result<MatPoly> {
    let ginv = g.inverse()?;
    Ok(&ginv * &(&(a * g) + &g.euler_derivative()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpansionPoint {
    Zero,
    Infinity,
}

impl ExpansionPoint {
    fn name(self) -> &'static str {
        match self {
            ExpansionPoint::Zero => "z = 0",
            ExpansionPoint::Infinity => "z = infinity",
        }
    }

    /// Sign `s` with `z d/dz (w^k) = s k w^k` for the local coordinate `w`.
    fn sign(self) -> f64 {
        match self {
            ExpansionPoint::Zero => 1.0,
            ExpansionPoint::Infinity => -1.0,
        }
    }

    /// `z`-exponent numerator of `w^k`.
    fn num(self, k: usize) -> i32 {
        let k = 3 * k as i32;
        match self {
            ExpansionPoint::Zero => k,
            ExpansionPoint::Infinity => -k,
        }
    }
}

/// Truncated formal gauge `U = Σ_{k≤order} U_k w^k` with `w = z` or `w = 1/z`.
#[derive(Clone, Debug)]
pub struct GaugeSeries {
    pub point: ExpansionPoint,
    pub terms: Vec<CMat>,
    /// Largest condition number among the per-order linear systems.
    pub condition: f64,
}

impl GaugeSeries {
    pub fn order(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn to_matpoly(&self) -> MatPoly {
        let n = self.terms[0].nrows();
        MatPoly::from_coeff_matrices(
            n,
            self.terms
                .iter()
                .enumerate()
                .map(|(k, c)| (self.point.num(k), c)),
        )
    }

    /// Largest coefficient of `A U + z dU/dz - U B` up to the truncation order.
    pub fn residual(&self, a: &MatPoly, b: &MatPoly) -> f64 {
        let u = self.to_matpoly();
        let r = &(&(a * &u) + &u.euler_derivative()) - &(&u * b);
        (0..=self.order())
            .map(|k| linalg::max_abs(&r.coeff_matrix(self.point.num(k))))
            .fold(0.0, f64::max)
    }
}

fn local_coeffs(a: &MatPoly, point: ExpansionPoint, order: usize) -> Result<Vec<CMat>> {
    for k in a.exponents() {
        let bad = k % 3 != 0
            || match point {
                ExpansionPoint::Zero => k < 0,
                ExpansionPoint::Infinity => k > 0,
            };
        if bad {
            return Err(Error::PoleStructure(point.name()));
        }
    }
    Ok((0..=order).map(|k| a.coeff_matrix(point.num(k))).collect())
}

/// Solves `A U + z dU/dz = U B` order by order with `U_0 = I`, for connections
/// holomorphic in the local coordinate at the chosen point.
pub fn formal_gauge_equivalence(
    a: &MatPoly,
    b: &MatPoly,
    point: ExpansionPoint,
    order: usize,
) -> Result<GaugeSeries> {
    if a.dim() != b.dim() {
        return Err(Error::InvalidInput(
            "connection matrices differ in size".into(),
        ));
    }
    let n = a.dim();
    let ac = local_coeffs(a, point, order)?;
    let bc = local_coeffs(b, point, order)?;
    let scale = 1.0 + linalg::max_abs(&ac[0]).max(linalg::max_abs(&bc[0]));
    if linalg::max_abs(&(&ac[0] - &bc[0])) > 1e-10 * scale {
        return Err(Error::Resonance { order: 0 });
    }
    let id = linalg::identity(n);
    let base = linalg::kron(&ac[0], &id) - linalg::kron(&id, &bc[0].transpose());
    let mut terms = vec![id.clone()];
    let mut condition: f64 = 1.0;
    for k in 1..=order {
        let mut rhs = CMat::zeros(n, n);
        for j in 0..k {
            rhs += &terms[j] * &bc[k - j] - &ac[k - j] * &terms[j];
        }
        let op = &base + linalg::kron(&id, &id) * C64::new(point.sign() * k as f64, 0.0);
        condition = condition.max(linalg::cond(&op));
        let x = linalg::solve_consistent(&op, &linalg::vec_rows(&rhs), 1e-12, 1e-9)
            .ok_or(Error::Resonance { order: k })?;
        terms.push(linalg::unvec_rows(&x, n, n));
    }
    Ok(GaugeSeries {
        point,
        terms,
        condition,
    })
}
