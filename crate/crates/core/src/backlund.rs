//! Symmetries of PIV: the order-16 group on `(β, α, t, z)`, its lift to
//! `(θ0, θ∞, t, z)`, and the action on solutions.
//!
//! Words are sequences of generators evaluated right to left: the word
//! `s2 s1` applies `s1` first.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::isomonodromy::{piv_rhs, PivState};
use crate::noumi_yamada;
use crate::rank2_moduli::ThetaParams;
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Generator {
    S1,
    S2,
    S3,
}

impl Generator {
    pub const ALL: [Generator; 3] = [Generator::S1, Generator::S2, Generator::S3];
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Generator::S1 => "s1",
            Generator::S2 => "s2",
            Generator::S3 => "s3",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct GroupWord(pub Vec<Generator>);

impl GroupWord {
    pub fn identity() -> Self {
        Self(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Generators in the order they act.
    pub fn acting_order(&self) -> impl Iterator<Item = Generator> + '_ {
        self.0.iter().rev().copied()
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("id");
        }
        let parts: Vec<String> = self.0.iter().map(|g| g.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Splits `"s2 s1"`, `"s2,s1"` or `"s2s1"` into tokens `s<digit>` / `p`.
pub(crate) fn tokenize_word(s: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut chars = s
        .chars()
        .filter(|c| !c.is_whitespace() && *c != ',' && *c != '*')
        .peekable();
    while let Some(c) = chars.next() {
        match c {
            's' | 'S' => match chars.next() {
                Some(d) if d.is_ascii_digit() => out.push(format!("s{d}")),
                _ => return Err(Error::InvalidInput(format!("bad word: {s}"))),
            },
            'p' | 'P' => out.push("p".into()),
            _ => return Err(Error::InvalidInput(format!("bad word: {s}"))),
        }
    }
    Ok(out)
}

impl FromStr for GroupWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "id" || s == "1" {
            return Ok(Self::identity());
        }
        tokenize_word(s)?
            .into_iter()
            .map(|t| match t.as_str() {
                "s1" => Ok(Generator::S1),
                "s2" => Ok(Generator::S2),
                "s3" => Ok(Generator::S3),
                _ => Err(Error::InvalidInput(format!("unknown generator {t}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(GroupWord)
    }
}

/// `(β, α)` together with the factor `i^k` multiplying both `t` and `z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonodromyParamState {
    pub beta: C64,
    pub alpha: C64,
    pub quarter_turns: u8,
}

impl MonodromyParamState {
    pub fn new(beta: C64, alpha: C64) -> Result<Self> {
        if beta.norm() == 0.0 || alpha.norm() == 0.0 {
            return Err(Error::InvalidInput("beta and alpha must be nonzero".into()));
        }
        Ok(Self {
            beta,
            alpha,
            quarter_turns: 0,
        })
    }

    pub fn scale_factor(&self) -> C64 {
        C64::i().powi(self.quarter_turns as i32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiftedParamState {
    pub theta0: C64,
    pub theta_inf: C64,
    pub quarter_turns: u8,
}

impl LiftedParamState {
    pub fn new(p: ThetaParams) -> Self {
        Self {
            theta0: p.theta0,
            theta_inf: p.theta_inf,
            quarter_turns: 0,
        }
    }

    pub fn params(&self) -> ThetaParams {
        ThetaParams::new(self.theta0, self.theta_inf)
    }

    pub fn project(&self) -> MonodromyParamState {
        let p = self.params();
        MonodromyParamState {
            beta: p.beta(),
            alpha: p.alpha(),
            quarter_turns: self.quarter_turns,
        }
    }
}

fn sigma_gen(g: Generator, s: MonodromyParamState) -> MonodromyParamState {
    match g {
        Generator::S1 => MonodromyParamState {
            beta: s.beta.inv(),
            ..s
        },
        Generator::S2 => MonodromyParamState {
            beta: -s.beta,
            alpha: -s.alpha,
            ..s
        },
        Generator::S3 => MonodromyParamState {
            alpha: s.alpha.inv(),
            quarter_turns: (s.quarter_turns + 1) % 4,
            ..s
        },
    }
}

fn tilde_gen(g: Generator, s: LiftedParamState) -> LiftedParamState {
    match g {
        Generator::S1 => LiftedParamState {
            theta0: -s.theta0 + 2.0,
            ..s
        },
        Generator::S2 => LiftedParamState {
            theta0: s.theta0 + 1.0,
            theta_inf: s.theta_inf + 1.0,
            ..s
        },
        Generator::S3 => LiftedParamState {
            theta_inf: -s.theta_inf,
            quarter_turns: (s.quarter_turns + 1) % 4,
            ..s
        },
    }
}

pub fn sigma_apply(w: &GroupWord, s: MonodromyParamState) -> MonodromyParamState {
    w.acting_order().fold(s, |acc, g| sigma_gen(g, acc))
}

pub fn tilde_apply(w: &GroupWord, s: LiftedParamState) -> LiftedParamState {
    w.acting_order().fold(s, |acc, g| tilde_gen(g, acc))
}

/// Exact form of a group element acting on `(β, α, t, z)`:
/// `β -> sβ β^{eβ}`, `α -> sα α^{eα}`, `(t, z) -> i^k (t, z)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SigmaElement {
    pub beta_sign: i8,
    pub beta_exp: i8,
    pub alpha_sign: i8,
    pub alpha_exp: i8,
    pub quarter_turns: u8,
}

impl SigmaElement {
    pub fn identity() -> Self {
        Self {
            beta_sign: 1,
            beta_exp: 1,
            alpha_sign: 1,
            alpha_exp: 1,
            quarter_turns: 0,
        }
    }

    pub fn generator(g: Generator) -> Self {
        let id = Self::identity();
        match g {
            Generator::S1 => Self { beta_exp: -1, ..id },
            Generator::S2 => Self {
                beta_sign: -1,
                alpha_sign: -1,
                ..id
            },
            Generator::S3 => Self {
                alpha_exp: -1,
                quarter_turns: 1,
                ..id
            },
        }
    }

    /// `self ∘ other`: apply `other` first. Signs are ±1, so `s^{±1} = s`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            beta_sign: self.beta_sign * other.beta_sign,
            beta_exp: self.beta_exp * other.beta_exp,
            alpha_sign: self.alpha_sign * other.alpha_sign,
            alpha_exp: self.alpha_exp * other.alpha_exp,
            quarter_turns: (self.quarter_turns + other.quarter_turns) % 4,
        }
    }

    pub fn from_word(w: &GroupWord) -> Self {
        w.0.iter()
            .fold(Self::identity(), |acc, &g| acc.compose(&Self::generator(g)))
    }

    pub fn apply(&self, s: MonodromyParamState) -> MonodromyParamState {
        MonodromyParamState {
            beta: s.beta.powi(self.beta_exp as i32) * self.beta_sign as f64,
            alpha: s.alpha.powi(self.alpha_exp as i32) * self.alpha_sign as f64,
            quarter_turns: (s.quarter_turns + self.quarter_turns) % 4,
        }
    }
}

/// Closure of the generators under composition.
pub fn sigma_group() -> Vec<SigmaElement> {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([SigmaElement::identity()]);
    seen.insert(SigmaElement::identity());
    while let Some(e) = queue.pop_front() {
        for g in Generator::ALL {
            let n = SigmaElement::generator(g).compose(&e);
            if seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen.into_iter().collect()
}

pub fn is_commutative(elems: &[SigmaElement]) -> bool {
    elems
        .iter()
        .all(|a| elems.iter().all(|b| a.compose(b) == b.compose(a)))
}

/// Exact affine action of a lifted word: `θ0 -> s0 θ0 + c0`, `θ∞ -> s∞ θ∞ + c∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AffineLift {
    pub s0: i8,
    pub c0: i32,
    pub sinf: i8,
    pub cinf: i32,
    pub quarter_turns: u8,
}

impl AffineLift {
    pub fn identity() -> Self {
        Self {
            s0: 1,
            c0: 0,
            sinf: 1,
            cinf: 0,
            quarter_turns: 0,
        }
    }

    pub fn generator(g: Generator) -> Self {
        let id = Self::identity();
        match g {
            Generator::S1 => Self {
                s0: -1,
                c0: 2,
                ..id
            },
            Generator::S2 => Self {
                c0: 1,
                cinf: 1,
                ..id
            },
            Generator::S3 => Self {
                sinf: -1,
                quarter_turns: 1,
                ..id
            },
        }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            s0: self.s0 * other.s0,
            c0: self.s0 as i32 * other.c0 + self.c0,
            sinf: self.sinf * other.sinf,
            cinf: self.sinf as i32 * other.cinf + self.cinf,
            quarter_turns: (self.quarter_turns + other.quarter_turns) % 4,
        }
    }

    pub fn from_word(w: &GroupWord) -> Self {
        w.0.iter()
            .fold(Self::identity(), |acc, &g| acc.compose(&Self::generator(g)))
    }
}

/// Shortest words (length ≤ `max_len`) acting as `θ0 -> θ0 + 2` and as
/// `θ∞ -> θ∞ + 2` with the other parameter fixed. Among words of equal length one
/// with no net rotation of `(t, z)` is preferred.
pub fn find_shift_words(max_len: usize) -> (Option<GroupWord>, Option<GroupWord>) {
    let mut best0: Option<(GroupWord, u8)> = None;
    let mut bestinf: Option<(GroupWord, u8)> = None;
    let mut layer = vec![GroupWord::identity()];
    for _ in 1..=max_len {
        let mut next = Vec::with_capacity(layer.len() * 3);
        for w in &layer {
            for g in Generator::ALL {
                let mut v = vec![g];
                v.extend_from_slice(&w.0);
                next.push(GroupWord(v));
            }
        }
        for w in &next {
            let a = AffineLift::from_word(w);
            let better = |cur: &Option<(GroupWord, u8)>| match cur {
                None => true,
                Some((cw, cq)) => cw.len() == w.len() && *cq != 0 && a.quarter_turns == 0,
            };
            if a.s0 == 1 && a.sinf == 1 && a.c0 == 2 && a.cinf == 0 && better(&best0) {
                best0 = Some((w.clone(), a.quarter_turns));
            }
            if a.s0 == 1 && a.sinf == 1 && a.c0 == 0 && a.cinf == 2 && better(&bestinf) {
                bestinf = Some((w.clone(), a.quarter_turns));
            }
        }
        layer = next;
    }
    (best0.map(|b| b.0), bestinf.map(|b| b.0))
}

/// `q' + q² + tq/2 + (1 - θ0)/2`; the explicit map is undefined where this vanishes.
pub fn riccati_leaf_value(q: C64, qprime: C64, t: C64, p: &ThetaParams) -> C64 {
    qprime + q * q + t * q * 0.5 + (-p.theta0 + 1.0) * 0.5
}

struct Parts {
    num: C64,
    den: C64,
    dnum: [C64; 3],
    dden: [C64; 3],
}

/// Numerator, denominator and their partials in `(q, a, t)`, `a = q' + 1/2`.
fn parts(q: C64, qprime: C64, t: C64, p: &ThetaParams) -> Result<Parts> {
    if q.norm() == 0.0 {
        return Err(Error::Pole("q = 0"));
    }
    let leaf = riccati_leaf_value(q, qprime, t, p);
    let scale =
        1.0 + qprime.norm() + q.norm_sqr() + (t * q).norm() * 0.5 + (p.theta0 - 1.0).norm() * 0.5;
    if leaf.norm() <= 8.0 * f64::EPSILON * scale {
        return Err(Error::SingularLocus { leaf });
    }
    let (th0, thi) = (p.theta0, p.theta_inf);
    let a = qprime + 0.5;
    let (q2, q3) = (q * q, q * q * q);
    let num =
        -q2 * thi * 4.0 + a * a * 4.0 - q3 * t * 4.0 - q2 * t * t - q2 * q2 * 4.0 - q2 * th0 * 4.0
            + th0 * th0
            - a * th0 * 4.0;
    let den = q * (q * t - th0 + a * 2.0 + q2 * 2.0) * 4.0;
    let dnum = [
        -q * thi * 8.0 - q2 * t * 12.0 - q * t * t * 2.0 - q3 * 16.0 - q * th0 * 8.0,
        a * 8.0 - th0 * 4.0,
        -q3 * 4.0 - q2 * t * 2.0,
    ];
    let dden = [
        q * t * 8.0 - th0 * 4.0 + a * 8.0 + q2 * 24.0,
        q * 8.0,
        q2 * 4.0,
    ];
    Ok(Parts {
        num,
        den,
        dnum,
        dden,
    })
}

/// The transformed solution value for the lift `θ -> (θ0 + 1, θ∞ + 1)`.
pub fn backlund_q(q: C64, qprime: C64, t: C64, p: &ThetaParams) -> Result<C64> {
    let x = parts(q, qprime, t, p)?;
    Ok(x.num / x.den)
}

/// Total `t`-derivative of [`backlund_q`] along PIV.
pub fn backlund_qprime(q: C64, qprime: C64, t: C64, p: &ThetaParams) -> Result<C64> {
    let x = parts(q, qprime, t, p)?;
    let qpp = piv_rhs(&PivState { t, q, qprime }, p)?;
    let total = |d: &[C64; 3]| d[0] * qprime + d[1] * qpp + d[2];
    Ok((total(&x.dnum) * x.den - x.num * total(&x.dden)) / (x.den * x.den))
}

/// Parameter map of the extra generator obtained from the symmetric form.
pub fn missing_generator(p: &ThetaParams) -> ThetaParams {
    let (a, b) = (p.theta0, p.theta_inf);
    ThetaParams::new(-a * 0.5 + b * 0.5 + 2.0, -a * 1.5 - b * 0.5 + 2.0)
}

/// Generators acting on solutions, including the extra one (`P`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolutionGenerator {
    S1,
    S2,
    S3,
    P,
}

pub fn parse_solution_word(s: &str) -> Result<Vec<SolutionGenerator>> {
    let s = s.trim();
    if s.is_empty() || s == "id" || s == "1" {
        return Ok(Vec::new());
    }
    tokenize_word(s)?
        .into_iter()
        .map(|t| match t.as_str() {
            "s1" => Ok(SolutionGenerator::S1),
            "s2" => Ok(SolutionGenerator::S2),
            "s3" => Ok(SolutionGenerator::S3),
            "p" => Ok(SolutionGenerator::P),
            _ => Err(Error::InvalidInput(format!("unknown generator {t}"))),
        })
        .collect()
}

/// Applies one generator to a point `(t, q, q')` of a PIV solution.
///
/// * `S1` changes only `θ0 -> 2 - θ0`, which leaves the equation unchanged.
/// * `S2` is the explicit rational map.
/// * `S3` sends `q(t)` to `Y(s) = -i q(i s)`, so the sample moves to `s = -i t`
///   with `Y = -i q`, `Y' = q'`; the parameters become `(θ0, -θ∞)`.
/// * `P` goes through the symmetric form and permutes it cyclically.
pub fn apply_to_solution(
    g: SolutionGenerator,
    s: &PivState,
    p: &ThetaParams,
) -> Result<(PivState, ThetaParams)> {
    let mi = -C64::i();
    match g {
        SolutionGenerator::S1 => Ok((*s, ThetaParams::new(-p.theta0 + 2.0, p.theta_inf))),
        SolutionGenerator::S2 => Ok((
            PivState {
                t: s.t,
                q: backlund_q(s.q, s.qprime, s.t, p)?,
                qprime: backlund_qprime(s.q, s.qprime, s.t, p)?,
            },
            p.shifted(1.0, 1.0),
        )),
        SolutionGenerator::S3 => Ok((
            PivState {
                t: mi * s.t,
                q: mi * s.q,
                qprime: s.qprime,
            },
            ThetaParams::new(p.theta0, -p.theta_inf),
        )),
        SolutionGenerator::P => noumi_yamada::missing_generator_on_solution(s, p),
    }
}

/// Applies a word right to left.
pub fn apply_word_to_solution(
    word: &[SolutionGenerator],
    s: &PivState,
    p: &ThetaParams,
) -> Result<(PivState, ThetaParams)> {
    word.iter()
        .rev()
        .try_fold((*s, *p), |(s, p), &g| apply_to_solution(g, &s, &p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn w(s: &str) -> GroupWord {
        s.parse().unwrap()
    }

    fn state() -> MonodromyParamState {
        MonodromyParamState::new(C64::new(0.3, 1.1), C64::new(-0.7, 0.2)).unwrap()
    }

    fn close(a: &MonodromyParamState, b: &MonodromyParamState) -> bool {
        (a.beta - b.beta).norm() < 1e-12
            && (a.alpha - b.alpha).norm() < 1e-12
            && a.quarter_turns == b.quarter_turns
    }

    #[test]
    fn word_parsing() {
        assert_eq!(w("s2 s1"), GroupWord(vec![Generator::S2, Generator::S1]));
        assert_eq!(
            w("s2s1,s3"),
            GroupWord(vec![Generator::S2, Generator::S1, Generator::S3])
        );
        assert!(w("id").is_empty());
        assert!("s4".parse::<GroupWord>().is_err());
        assert!("x".parse::<GroupWord>().is_err());
    }

    #[test]
    fn generator_orders() {
        let s = state();
        assert!(close(&sigma_apply(&w("s1 s1"), s), &s));
        assert!(close(&sigma_apply(&w("s3 s3 s3 s3"), s), &s));
        let half = sigma_apply(&w("s3 s3"), s);
        assert_eq!(half.scale_factor(), r(-1.0));
        assert!((half.alpha - s.alpha).norm() < 1e-15);
    }

    #[test]
    fn group_has_order_16_and_commutes() {
        let g = sigma_group();
        assert_eq!(g.len(), 16);
        assert!(is_commutative(&g));
    }

    #[test]
    fn shift_words() {
        let s = LiftedParamState::new(ThetaParams::real(0.3, -0.8));
        let out = tilde_apply(&w("s2 s1 s2 s1"), s);
        assert!(
            (out.theta0 - s.theta0).norm() < 1e-15
                && (out.theta_inf - s.theta_inf - 2.0).norm() < 1e-15
        );
        let out = tilde_apply(&w("s2 s3 s2 s3"), s);
        assert!(
            (out.theta0 - s.theta0 - 2.0).norm() < 1e-15
                && (out.theta_inf - s.theta_inf).norm() < 1e-15
        );
        assert_eq!(out.quarter_turns, 2);
        let (w0, winf) = find_shift_words(6);
        let (w0, winf) = (w0.unwrap(), winf.unwrap());
        assert_eq!(winf.len(), 4);
        assert_eq!(w0.len(), 4);
        let a = AffineLift::from_word(&winf);
        assert_eq!((a.c0, a.cinf, a.s0, a.sinf), (0, 2, 1, 1));
    }

    #[test]
    fn missing_generator_examples() {
        let p = missing_generator(&ThetaParams::real(0.0, 0.0));
        assert_eq!((p.theta0, p.theta_inf), (r(2.0), r(2.0)));
        let p = missing_generator(&p);
        assert_eq!((p.theta0, p.theta_inf), (r(2.0), r(-2.0)));
    }

    #[test]
    fn singular_locus_error_carries_leaf_value() {
        let p = ThetaParams::real(0.4, 0.1);
        let (t, q) = (r(0.2), r(0.7));
        let qprime = -(q * q + t * q * 0.5 + (-p.theta0 + 1.0) * 0.5);
        assert!(matches!(
            backlund_q(q, qprime, t, &p),
            Err(Error::SingularLocus { .. })
        ));
    }

    #[test]
    fn s3_on_solutions_preserves_piv() {
        let p = ThetaParams::real(0.4, 0.9);
        let s = PivState {
            t: C64::new(0.3, -0.2),
            q: C64::new(0.8, 0.1),
            qprime: C64::new(-0.2, 0.5),
        };
        let (n, np) = apply_to_solution(SolutionGenerator::S3, &s, &p).unwrap();
        // Y''(s) = c k^2 q''(t) with c = -i, k = i
        let ypp = -C64::i() * C64::i() * C64::i() * piv_rhs(&s, &p).unwrap();
        assert!((ypp - piv_rhs(&n, &np).unwrap()).norm() < 1e-13);
    }

    proptest! {
        #[test]
        fn projection_commutes(
            th0 in -3.0f64..3.0, thi in -3.0f64..3.0,
            word in prop::collection::vec(0usize..3, 0..8)
        ) {
            let word = GroupWord(word.into_iter().map(|i| Generator::ALL[i]).collect());
            let lifted = LiftedParamState::new(ThetaParams::real(th0, thi));
            let a = tilde_apply(&word, lifted).project();
            let b = sigma_apply(&word, lifted.project());
            prop_assert!(close(&a, &b));
            prop_assert!(close(&SigmaElement::from_word(&word).apply(lifted.project()), &b));
        }

        #[test]
        fn association_independent(
            w1 in prop::collection::vec(0usize..3, 0..5),
            w2 in prop::collection::vec(0usize..3, 0..5),
        ) {
            let g = |v: &Vec<usize>| GroupWord(v.iter().map(|&i| Generator::ALL[i]).collect());
            let (a, b) = (g(&w1), g(&w2));
            let mut joined = a.0.clone();
            joined.extend(b.0.iter().copied());
            let s = LiftedParamState::new(ThetaParams::real(0.25, -0.6));
            let lhs = tilde_apply(&GroupWord(joined), s);
            let rhs = tilde_apply(&a, tilde_apply(&b, s));
            prop_assert!((lhs.theta0 - rhs.theta0).norm() < 1e-12 && (lhs.theta_inf - rhs.theta_inf).norm() < 1e-12);
        }

        #[test]
        fn denominator_vanishes_with_leaf(
            q in (-2.0f64..2.0, -2.0f64..2.0), qp in (-2.0f64..2.0, -2.0f64..2.0),
            t in (-2.0f64..2.0, -2.0f64..2.0), th0 in -3.0f64..3.0, thi in -3.0f64..3.0,
        ) {
            let (q, qp, t) = (C64::new(q.0, q.1), C64::new(qp.0, qp.1), C64::new(t.0, t.1));
            prop_assume!(q.norm() > 0.1);
            let p = ThetaParams::real(th0, thi);
            let leaf = riccati_leaf_value(q, qp, t, &p);
            prop_assume!(leaf.norm() > 1e-6);
            let x = parts(q, qp, t, &p).unwrap();
            prop_assert!((x.den - q * leaf * 8.0).norm() < 1e-12 * (1.0 + x.den.norm()));
        }
    }
}
