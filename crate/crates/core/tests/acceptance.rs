//! Acceptance run: one line per criterion, non-zero exit when any fails.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::DMatrix;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use painleve_core::backlund::{
    backlund_q, backlund_qprime, find_shift_words, is_commutative, riccati_leaf_value, sigma_group,
    tilde_apply, LiftedParamState,
};
use painleve_core::isomonodromy::ode::{integrate, IntegrateOptions, Path, Trajectory};
use painleve_core::isomonodromy::{
    flow_rhs, integrate_flow, integrate_piv, integrate_riccati, lax_residual, piv_rhs,
    reducible_lax_residual, riccati_parameters, riccati_rhs, riccati_second, LaxPairData, PivState,
    RiccatiSign,
};
use painleve_core::monodromy::{
    charpoly_formula, closed_form, fiber_singularity, invariant_flags, rank3_top_monodromy,
    rank3_top_monodromy_exact, singular_directions, FiberClass, FlagComponents, Rank3Stokes,
};
use painleve_core::noumi_yamada::{
    f1_to_piv, ny_lax_residual, ny_rhs, theta_from_eps, theta_from_eps_as_printed,
    verify_h_basis_change, verify_lambda1, EpsTriple, NyState,
};
use painleve_core::rank2_moduli::{
    apply_gauge, normalize_to_chart, reducible_presence, Chart, ChartPoint, GaugeElement, ST2Point,
    ThetaParams,
};
use painleve_core::C64;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rc(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> C64 {
    C64::new(r.gen_range(lo..hi), r.gen_range(lo..hi))
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Sixth-order central differences at interior points `3..n-3`.
fn central_fd(v: &[C64], h: C64) -> Vec<(usize, C64)> {
    (3..v.len().saturating_sub(3))
        .map(|i| {
            let d =
                (v[i + 3] - v[i - 3]) - (v[i + 2] - v[i - 2]) * 9.0 + (v[i + 1] - v[i - 1]) * 45.0;
            (i, d / (h * 60.0))
        })
        .collect()
}

/// Grid spacing for the finite-difference oracle; keeps truncation far below the tolerances.
const FD_STEP: f64 = 0.005;

/// `max |FD(q') − q''_PIV|` over interior samples.
fn piv_residual(states: &[PivState], p: &ThetaParams) -> Result<f64, String> {
    if states.len() < 7 {
        return Err("too few samples".into());
    }
    let h = states[1].t - states[0].t;
    let qp: Vec<C64> = states.iter().map(|s| s.qprime).collect();
    let mut worst: f64 = 0.0;
    for (i, d) in central_fd(&qp, h) {
        let rhs = piv_rhs(&states[i], p).map_err(|e| e.to_string())?;
        worst = worst.max((d - rhs).norm());
    }
    Ok(worst)
}

fn grid_opts(step: f64, watch: Vec<usize>) -> IntegrateOptions {
    IntegrateOptions {
        tol: 1e-10,
        sample_step: Some(step),
        watch,
        ..IntegrateOptions::default()
    }
}

fn bounded(traj: &Trajectory, bound: f64) -> bool {
    traj.completed()
        && traj
            .samples
            .iter()
            .all(|s| s.y.iter().all(|v| v.norm() < bound))
}

// 1
fn rank2_lax() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let mut r = rng(1000 + i);
        let q = loop {
            let q = rc(&mut r, -2.0, 2.0);
            if q.norm() >= 0.1 {
                break q;
            }
        };
        let (a0, t) = (rc(&mut r, -2.0, 2.0), rc(&mut r, -2.0, 2.0));
        let p = ThetaParams::new(rc(&mut r, -2.0, 2.0), rc(&mut r, -2.0, 2.0));
        let d = LaxPairData::new(q, a0, t, p).map_err(|e| e.to_string())?;
        // the flow as displayed: q' = a0 − 1/2; a0' from the flow
        let (qd, ad) = flow_rhs(t, q, a0, &p).map_err(|e| e.to_string())?;
        if (qd - (a0 - 0.5)).norm() != 0.0 {
            return Err("q' differs from a0 − 1/2".into());
        }
        worst = worst.max(lax_residual(&d, qd, ad).max_abs());
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst < 1e-12 && secs < 5.0,
        format!("max residual {worst:.2e}, {secs:.2}s, 100 samples"),
    )
}

// 2
fn ny_lax() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let mut r = rng(2000 + i);
        let e = EpsTriple::new(rc(&mut r, -1.0, 1.0), rc(&mut r, -1.0, 1.0));
        let s = NyState::on_locus(
            rc(&mut r, -2.0, 2.0),
            rc(&mut r, -2.0, 2.0),
            rc(&mut r, -2.0, 2.0),
        );
        worst = worst.max(ny_lax_residual(&s, &e).max_abs());
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst < 1e-12 && secs < 5.0,
        format!("max residual {worst:.2e}, {secs:.2}s, 100 samples"),
    )
}

// 3
fn piv_consistency() -> Outcome {
    let path = Path::segment(re(0.0), re(1.0));
    let (mut worst, mut used, mut seed) = (0.0f64, 0, 3000u64);
    while used < 10 {
        seed += 1;
        if seed > 3500 {
            return Err(format!("only {used} pole-free initial conditions found"));
        }
        let mut r = rng(seed);
        let q0 = re(r.gen_range(0.3..1.2)) * if r.gen_bool(0.5) { 1.0 } else { -1.0 };
        let a00 = re(r.gen_range(0.0..1.0));
        let p = ThetaParams::real(r.gen_range(-1.0..2.0), r.gen_range(-1.0..1.0));
        let traj = integrate_flow(&p, q0, a00, &path, &grid_opts(FD_STEP, vec![0, 1]))
            .map_err(|e| e.to_string())?;
        if !bounded(&traj, 3.0) || traj.samples.iter().any(|s| s.y[0].norm() < 0.1) {
            continue;
        }
        used += 1;
        let states: Vec<PivState> = traj
            .samples
            .iter()
            .map(|s| PivState {
                t: s.t,
                q: s.y[0],
                qprime: s.y[1] - 0.5,
            })
            .collect();
        worst = worst.max(piv_residual(&states, &p)?);
    }
    check(
        worst < 1e-7,
        format!("max |FD q'' − PIV| {worst:.2e} over {used} trajectories (seeds ≤ {seed})"),
    )
}

// 4
fn symmetric_reduction() -> Outcome {
    let (mut worst, mut printed, mut used, mut seed) = (0.0f64, 0.0f64, 0, 4000u64);
    while used < 5 {
        seed += 1;
        if seed > 4500 {
            return Err(format!("only {used} usable symmetric-form trajectories"));
        }
        let mut r = rng(seed);
        let e = EpsTriple::real(r.gen_range(-0.5..0.5), r.gen_range(-0.5..0.5));
        let t0 = r.gen_range(0.5..1.5);
        let s0 = NyState::on_locus(re(t0), re(r.gen_range(0.4..1.0)), re(r.gen_range(0.2..0.8)));
        let path = Path::segment(re(t0), re(t0 + 0.8));
        let traj = integrate(
            move |t, y| {
                Ok(ny_rhs(
                    &NyState {
                        t,
                        f: [y[0], y[1], y[2]],
                    },
                    &e,
                )
                .to_vec())
            },
            &s0.f,
            &path,
            &grid_opts(FD_STEP, vec![0, 1, 2]),
        )
        .map_err(|x| x.to_string())?;
        if !bounded(&traj, 5.0) || traj.samples.iter().any(|s| s.y[1].norm() < 0.2) {
            continue;
        }
        let (states, p) = f1_to_piv(&traj, &e).map_err(|x| x.to_string())?;
        let expect = theta_from_eps(&e);
        if p != expect {
            return Err("parameters differ from the ε dictionary".into());
        }
        used += 1;
        worst = worst.max(piv_residual(&states, &p)?);
        printed = printed.max(piv_residual(&states, &theta_from_eps_as_printed(&e))?);
    }
    check(
        worst < 1e-6,
        format!(
            "max PIV residual of rescaled f1 {worst:.2e} over {used} trajectories \
             (θ∞ = 1 + ε1 − ε3 instead would leave {printed:.2e})"
        ),
    )
}

// 5
fn backlund_shift() -> Outcome {
    let path = Path::segment(re(0.0), re(0.6));
    let (mut worst, mut used, mut seed) = (0.0f64, 0, 5000u64);
    while used < 20 {
        seed += 1;
        if seed > 6000 {
            return Err(format!("only {used} cases with denominator margin > 0.1"));
        }
        let mut r = rng(seed);
        let p = ThetaParams::real(r.gen_range(-1.0..2.0), r.gen_range(-1.0..1.0));
        let start = PivState {
            t: re(0.0),
            q: re(r.gen_range(0.4..1.2)),
            qprime: re(r.gen_range(-1.0..1.0)),
        };
        let traj = integrate_piv(&p, start, &path, &grid_opts(FD_STEP, vec![0]))
            .map_err(|e| e.to_string())?;
        if !bounded(&traj, 4.0) {
            continue;
        }
        let margin = traj
            .samples
            .iter()
            .map(|s| (s.y[0] * 8.0 * riccati_leaf_value(s.y[0], s.y[1], s.t, &p)).norm())
            .fold(f64::INFINITY, f64::min);
        if margin <= 0.1 {
            continue;
        }
        let mut out = Vec::new();
        for s in &traj.samples {
            let q = backlund_q(s.y[0], s.y[1], s.t, &p).map_err(|e| e.to_string())?;
            let qp = backlund_qprime(s.y[0], s.y[1], s.t, &p).map_err(|e| e.to_string())?;
            out.push(PivState {
                t: s.t,
                q,
                qprime: qp,
            });
        }
        used += 1;
        worst = worst.max(piv_residual(&out, &p.shifted(1.0, 1.0))?);
    }
    check(
        worst < 1e-6,
        format!("max PIV(θ0+1, θ∞+1) residual {worst:.2e} over {used} cases"),
    )
}

// 6
fn riccati_inclusion() -> Outcome {
    let path = Path::segment(re(0.0), re(0.5));
    let (mut fd_worst, mut exact_worst, mut lax_worst, mut runs) = (0.0f64, 0.0f64, 0.0f64, 0);
    for sign in [RiccatiSign::Plus, RiccatiSign::Minus] {
        for d in [re(0.3), re(-0.7), re(1.0), C64::new(0.4, 0.3)] {
            let traj = integrate_riccati(d, sign, re(0.5), &path, &grid_opts(FD_STEP, vec![0]))
                .map_err(|e| e.to_string())?;
            if !traj.completed() {
                return Err(format!("Riccati run d={d} stopped early"));
            }
            for p in riccati_parameters(d, sign) {
                let states: Vec<PivState> = traj
                    .samples
                    .iter()
                    .map(|s| PivState {
                        t: s.t,
                        q: s.y[0],
                        qprime: s.dy[0],
                    })
                    .collect();
                fd_worst = fd_worst.max(piv_residual(&states, &p)?);
                for s in &states {
                    let e = riccati_second(s.t, s.q, d, sign)
                        - piv_rhs(s, &p).map_err(|e| e.to_string())?;
                    exact_worst = exact_worst.max(e.norm());
                }
                runs += 1;
            }
            for s in &traj.samples {
                let qd = riccati_rhs(s.t, s.y[0], d, sign);
                lax_worst =
                    lax_worst.max(reducible_lax_residual(s.y[0], qd, s.t, d, sign).max_abs());
            }
        }
    }
    check(
        fd_worst < 1e-7 && exact_worst < 1e-7 && lax_worst < 1e-12,
        format!(
            "PIV residual FD {fd_worst:.2e}, exact {exact_worst:.2e}; reducible Lax {lax_worst:.2e}; {runs} (family, θ) pairs"
        ),
    )
}

// 7
fn group_structure() -> Outcome {
    let g = sigma_group();
    let comm = is_commutative(&g);
    let (w0, winf) = find_shift_words(6);
    let (w0, winf) = match (w0, winf) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(format!(
                "order {}, commutative {comm}, shift words missing",
                g.len()
            ))
        }
    };
    let base = LiftedParamState::new(ThetaParams::new(C64::new(0.37, 0.1), C64::new(-0.21, 0.4)));
    let a = tilde_apply(&w0, base);
    let b = tilde_apply(&winf, base);
    let ok0 = (a.theta0 - base.theta0 - 2.0).norm() < 1e-14
        && (a.theta_inf - base.theta_inf).norm() < 1e-14;
    let okinf = (b.theta_inf - base.theta_inf - 2.0).norm() < 1e-14
        && (b.theta0 - base.theta0).norm() < 1e-14;
    check(
        g.len() == 16 && comm && ok0 && okinf,
        format!(
            "order {}, commutative {comm}; θ0+2 by `{w0}`, θ∞+2 by `{winf}`",
            g.len()
        ),
    )
}

type Q = Rational64;

fn qmul(a: &[[Q; 3]; 3], b: &[[Q; 3]; 3]) -> [[Q; 3]; 3] {
    let mut o = [[Q::from_integer(0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                o[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    o
}

fn qdet(m: &[[Q; 3]; 3]) -> Q {
    // Sarrus
    m[0][0] * m[1][1] * m[2][2] + m[0][1] * m[1][2] * m[2][0] + m[0][2] * m[1][0] * m[2][1]
        - m[0][2] * m[1][1] * m[2][0]
        - m[0][0] * m[1][2] * m[2][1]
        - m[0][1] * m[1][0] * m[2][2]
}

/// `det(λ − M)` at λ = 0, 1, −1, 2, interpolated to `λ³ + c2 λ² + c1 λ + c0`.
fn qcharpoly(m: &[[Q; 3]; 3]) -> [Q; 4] {
    let f = |l: i64| {
        let l = Q::from_integer(l);
        let mut a = [[Q::from_integer(0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] = if i == j { l } else { Q::from_integer(0) } - m[i][j];
            }
        }
        qdet(&a)
    };
    let (p0, p1, pm, p2) = (f(0), f(1), f(-1), f(2));
    let c0 = p0;
    let even = (p1 + pm) / Q::from_integer(2) - c0; // c2
    let odd = (p1 - pm) / Q::from_integer(2) - Q::from_integer(1); // c1
    let lead =
        (p2 - c0 - odd * Q::from_integer(2) - even * Q::from_integer(4)) / Q::from_integer(8);
    [lead, even, odd, c0]
}

// 8
fn monodromy_closed_forms() -> Outcome {
    let z = Q::from_integer(0);
    let o = Q::from_integer(1);
    let mut r = rng(8000);
    for _ in 0..1000 {
        let x: [Q; 4] = std::array::from_fn(|_| Q::new(r.gen_range(-40..40), r.gen_range(1..25)));
        let [x1, x2, x3, x4] = x;
        let factors = [
            [[z, z, o], [o, z, z], [z, o, z]],
            [[o, z, z], [z, o, z], [x4, z, o]],
            [[o, z, z], [x3, o, z], [z, z, o]],
            [[o, z, z], [z, o, x2], [z, z, o]],
            [[o, z, x1], [z, o, z], [z, z, o]],
        ];
        let prod = factors[1..].iter().fold(factors[0], |acc, f| qmul(&acc, f));
        let lib = rank3_top_monodromy_exact(x).map_err(|e| e.to_string())?;
        if prod != lib || prod != closed_form(x) {
            return Err(format!("exact product mismatch at {x:?}"));
        }
        let cp = qcharpoly(&prod);
        let (e1, e2) = charpoly_formula(x);
        if cp != [o, -e1, e2, -o] {
            return Err(format!("exact charpoly mismatch at {x:?}"));
        }
    }
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let xs: [C64; 4] = std::array::from_fn(|_| rc(&mut r, -1.0, 1.0));
        let [x1, x2, x3, x4] = xs;
        let (zc, oc) = (re(0.0), re(1.0));
        let m = |v: [C64; 9]| DMatrix::from_row_slice(3, 3, &v);
        let prod = m([zc, zc, oc, oc, zc, zc, zc, oc, zc])
            * m([oc, zc, zc, zc, oc, zc, x4, zc, oc])
            * m([oc, zc, zc, x3, oc, zc, zc, zc, oc])
            * m([oc, zc, zc, zc, oc, x2, zc, zc, oc])
            * m([oc, zc, x1, zc, oc, zc, zc, zc, oc]);
        let lib = rank3_top_monodromy(&Rank3Stokes::new(xs)).map_err(|e| e.to_string())?;
        worst = worst.max((&prod - &lib).iter().map(|v| v.norm()).fold(0.0, f64::max));
        let cp = Rank3Stokes::new(xs).charpoly();
        // det(λ − M) = λ³ − e1 λ² + e2 λ − 1 at three sample λ
        for l in [re(0.3), C64::new(-0.7, 0.5), re(1.9)] {
            let d = (DMatrix::identity(3, 3) * l - &prod).determinant();
            let p = ((l - cp.e1) * l + cp.e2) * l - 1.0;
            worst = worst.max((d - p).norm());
        }
    }
    check(
        worst < 1e-12,
        format!("1000 exact samples identical; float max deviation {worst:.2e} over 1000 samples"),
    )
}

// 9
fn singularity_suite() -> Outcome {
    let mut r = rng(9000);
    let mut notes = Vec::new();
    for _ in 0..50 {
        let a = loop {
            let a = rc(&mut r, -2.0, 2.0);
            if a.norm() > 0.3 && (a * a * a - 1.0).norm() > 1e-2 {
                break a;
            }
        };
        let rep = fiber_singularity(&Rank3Stokes::special(a)).map_err(|e| e.to_string())?;
        if rep.jacobian_rank != Some(1)
            || rep.class != FiberClass::A1
            || rep.jordan_blocks != Some(3)
        {
            return Err(format!("special point a = {a}: {rep:?}"));
        }
    }
    notes.push("50 special points: rank 1, A1, three blocks".to_string());
    let mut generic = 0;
    while generic < 50 {
        let x: [C64; 4] = std::array::from_fn(|_| rc(&mut r, -2.0, 2.0));
        let x = Rank3Stokes::new(x);
        let roots = x.charpoly().roots().map_err(|e| e.to_string())?;
        let sep = [(0, 1), (0, 2), (1, 2)]
            .iter()
            .map(|&(i, j)| (roots[i] - roots[j]).norm())
            .fold(9.0, f64::min);
        if sep < 0.05 {
            continue;
        }
        generic += 1;
        let rep = fiber_singularity(&x).map_err(|e| e.to_string())?;
        if rep.jacobian_rank != Some(2)
            || rep.class != FiberClass::Regular
            || rep.jordan_blocks != Some(3)
        {
            return Err(format!("generic point {x:?}: {rep:?}"));
        }
        let fs = invariant_flags(&x, roots).map_err(|e| e.to_string())?;
        if fs.components != FlagComponents::Point {
            return Err(format!("generic flags {:?}", fs.components));
        }
    }
    notes.push("50 generic points: rank 2, one flag".into());

    let one = re(1.0);
    let x1 = Rank3Stokes::special(one);
    let m = x1.matrix();
    let rank = painleve_core::linalg::rank(&(m - DMatrix::identity(3, 3)), 1e-8);
    let rep = fiber_singularity(&x1).map_err(|e| e.to_string())?;
    if rank != 1 || rep.jordan_blocks != Some(2) || rep.class != FiberClass::A2 {
        return Err(format!("a = 1: rank(M − I) = {rank}, {rep:?}"));
    }
    let two_lines = invariant_flags(&x1, [one; 3])
        .map_err(|e| e.to_string())?
        .components;
    notes.push(format!(
        "a=1: rank(M−I)=1, two blocks, A2, flags {two_lines:?}"
    ));

    let a = re(2.0);
    let b = one / (a * a);
    let xa = Rank3Stokes::special(a);
    let p1 = invariant_flags(&xa, [a, a, b])
        .map_err(|e| e.to_string())?
        .components;
    let p1b = invariant_flags(&xa, [b, a, a])
        .map_err(|e| e.to_string())?
        .components;
    notes.push(format!("a=2 double root: flags {p1:?}/{p1b:?}"));
    check(
        two_lines == FlagComponents::TwoIntersectingLines
            && p1 == FlagComponents::ProjectiveLine
            && p1b == FlagComponents::ProjectiveLine,
        notes.join("; "),
    )
}

// 10
fn stokes_directions() -> Outcome {
    let table: [(u8, u8, f64, f64); 6] = [
        (0, 1, PI / 6.0, 5.0 * PI / 4.0),
        (1, 0, 7.0 * PI / 6.0, 11.0 * PI / 4.0),
        (0, 2, 11.0 * PI / 6.0, 7.0 * PI / 4.0),
        (2, 0, 5.0 * PI / 6.0, PI / 4.0),
        (1, 2, 9.0 * PI / 6.0, 9.0 * PI / 4.0),
        (2, 1, 3.0 * PI / 6.0, 3.0 * PI / 4.0),
    ];
    let rows = singular_directions();
    let mut worst: f64 = 0.0;
    for &(k, l, phi, d) in &table {
        let row = rows
            .iter()
            .find(|r| r.k == k && r.l == l)
            .ok_or(format!("row ({k},{l}) missing"))?;
        worst = worst.max((row.phi - phi).abs()).max((row.d - d).abs());
    }
    check(
        rows.len() == 6 && worst < 1e-12,
        format!("6 rows, max deviation {worst:.2e}"),
    )
}

// 11
fn lattices() -> Outcome {
    let mut r = rng(11000);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let t = rc(&mut r, -3.0, 3.0);
        worst = worst
            .max(verify_h_basis_change(t).map_err(|e| e.to_string())?)
            .max(verify_lambda1(t).map_err(|e| e.to_string())?);
    }
    check(
        worst < 1e-12,
        format!("Λ0, Λ1 from the h-basis, max deviation {worst:.2e} at 20 t"),
    )
}

/// Literal case lists on `θ0 = n0/d0`, `θ∞ = n1/d1` in integer arithmetic.
fn presence_literal(n0: i128, d0: i128, n1: i128, d1: i128) -> (bool, bool) {
    // θ0/2 − θ∞/2 ∈ ℤ  ⇔  n0 d1 − n1 d0 ≡ 0 mod 2 d0 d1
    let m = 2 * d0 * d1;
    let in_plus = (n0 * d1 - n1 * d0) % m == 0;
    let in_minus = (n0 * d1 + n1 * d0) % m == 0;
    // comparisons after multiplying through by d0 d1 > 0
    let (a, b, dd) = (n0 * d1, n1 * d0, d0 * d1);
    let ge_inf = a >= b; // θ0 ≥ θ∞
    let le_2_minus_inf = a <= -b + 2 * dd; // θ0 ≤ −θ∞ + 2
    let le_inf_plus_2 = a <= b + 2 * dd; // θ0 ≤ θ∞ + 2
    let ge_minus_inf = a >= -b; // θ0 ≥ −θ∞
    let type1 = (in_plus && !in_minus && ge_inf)
        || (!in_plus && in_minus && le_2_minus_inf)
        || (in_plus && in_minus && (ge_inf || le_2_minus_inf));
    let type2 = (in_plus && !in_minus && le_inf_plus_2)
        || (!in_plus && in_minus && ge_minus_inf)
        || (in_plus && in_minus && (le_inf_plus_2 || ge_minus_inf));
    (type1, type2)
}

// 12
fn presence_grid() -> Outcome {
    let grid: Vec<(i64, i64)> = (0..40)
        .map(|i| (i as i64 - 20, [1, 2, 3, 4][i % 4]))
        .collect();
    let (mut agree, mut hits) = (0, [0usize; 2]);
    for &(n0, d0) in &grid {
        for &(n1, d1) in &grid {
            let lib = reducible_presence(Q::new(n0, d0), Q::new(n1, d1));
            let lit = presence_literal(n0 as i128, d0 as i128, n1 as i128, d1 as i128);
            if (lib.type1, lib.type2) != lit {
                return Err(format!(
                    "disagree at θ0 = {n0}/{d0}, θ∞ = {n1}/{d1}: {lib:?} vs {lit:?}"
                ));
            }
            agree += 1;
            hits[0] += lit.0 as usize;
            hits[1] += lit.1 as usize;
        }
    }
    check(
        true,
        format!(
            "{agree} grid points agree (type 1 present at {}, type 2 at {})",
            hits[0], hits[1]
        ),
    )
}

// 13
fn chart_round_trips() -> Outcome {
    let mut r = rng(13000);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let p = ThetaParams::new(rc(&mut r, -2.0, 2.0), rc(&mut r, -2.0, 2.0));
        let st2 = ST2Point::solve_b_m1(
            rc(&mut r, -2.0, 2.0),
            loop {
                let c1 = rc(&mut r, -2.0, 2.0);
                if c1.norm() > 0.1 {
                    break c1;
                }
            },
            rc(&mut r, -2.0, 2.0),
            p,
        )
        .map_err(|e| e.to_string())?;
        let lambda = loop {
            let l = rc(&mut r, -2.0, 2.0);
            if l.norm() > 0.2 {
                break l;
            }
        };
        let g = GaugeElement {
            lambda,
            x0: rc(&mut r, -2.0, 2.0),
            x1: rc(&mut r, -2.0, 2.0),
        };
        let moved = apply_gauge(&st2.to_general(), &g).map_err(|e| e.to_string())?;
        let back = match normalize_to_chart(&moved, Chart::ST2).map_err(|e| e.to_string())? {
            ChartPoint::ST2(b) => b,
            ChartPoint::ST1(_) => return Err("normalised into the wrong chart".into()),
        };
        for (u, v) in [
            (back.a0, st2.a0),
            (back.c1, st2.c1),
            (back.b_m1, st2.b_m1),
            (back.t, st2.t),
        ] {
            worst = worst.max((u - v).norm() / (1.0 + v.norm()));
        }
    }
    check(
        worst < 1e-9,
        format!("200 gauge round trips, max deviation {worst:.2e}"),
    )
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("rank-2 Lax identity", rank2_lax),
        ("symmetric-form Lax identity", ny_lax),
        ("PIV consistency of the flow", piv_consistency),
        ("symmetric form to PIV", symmetric_reduction),
        ("Bäcklund shift (θ0+1, θ∞+1)", backlund_shift),
        ("Riccati families inside PIV", riccati_inclusion),
        ("symmetry group structure", group_structure),
        ("monodromy closed forms", monodromy_closed_forms),
        (
            "fibre singularities, Jordan blocks, flags",
            singularity_suite,
        ),
        ("singular directions table", stokes_directions),
        ("invariant lattices", lattices),
        ("reducible presence predicates", presence_grid),
        ("chart round trips", chart_round_trips),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(d) => println!("criterion {:>2} PASS  {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {d}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
