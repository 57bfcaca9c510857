//! C ABI over `painleve-core`.
//!
//! Every entry point returns a [`PvStatus`]; on failure the message is kept in a
//! thread-local slot readable through [`pv_last_error`]. Outputs are written
//! through caller-owned pointers. Trajectories are opaque handles released with
//! [`pv_trajectory_free`].

use std::cell::RefCell;
use std::os::raw::c_char;
use std::ptr;

use painleve_core::backlund::{backlund_q, backlund_qprime, missing_generator};
use painleve_core::isomonodromy::ode::{IntegrateOptions, Path, Trajectory};
use painleve_core::isomonodromy::{
    flow_rhs, integrate_piv, lax_residual, piv_rhs, LaxPairData, PivState,
};
use painleve_core::monodromy::{
    fiber_singularity, rank3_top_monodromy, singular_directions, FiberClass, Rank3Stokes,
};
use painleve_core::noumi_yamada::{ny_rhs, theta_from_eps, EpsTriple, NyState};
use painleve_core::rank2_moduli::{reducible_presence, ThetaParams};
use painleve_core::{Error, C64};

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PvComplex {
    pub re: f64,
    pub im: f64,
}

impl From<PvComplex> for C64 {
    fn from(z: PvComplex) -> Self {
        C64::new(z.re, z.im)
    }
}

impl From<C64> for PvComplex {
    fn from(z: C64) -> Self {
        PvComplex { re: z.re, im: z.im }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Pole = 3,
    SingularLocus = 4,
    Spectrum = 5,
    Consistency = 6,
    OutOfRange = 7,
    Other = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PvFiberClass {
    Regular = 0,
    A1 = 1,
    A2 = 2,
    Indeterminate = 3,
}

/// A PIV trajectory sampled on a uniform grid.
pub struct PvTrajectory {
    inner: Trajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn fail(status: PvStatus, msg: impl Into<String>) -> PvStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
    status
}

fn from_error(e: Error) -> PvStatus {
    let status = match &e {
        Error::InvalidInput(_) | Error::Constraint(_) | Error::ChartDomain(_) => {
            PvStatus::InvalidInput
        }
        Error::Pole(_) => PvStatus::Pole,
        Error::SingularLocus { .. } => PvStatus::SingularLocus,
        Error::Spectrum(_) => PvStatus::Spectrum,
        Error::Consistency(_) | Error::Invariant { .. } => PvStatus::Consistency,
        _ => PvStatus::Other,
    };
    fail(status, e.to_string())
}

fn run(f: impl FnOnce() -> Result<(), PvStatus>) -> PvStatus {
    LAST_ERROR.with(|e| e.borrow_mut().clear());
    match f() {
        Ok(()) => PvStatus::Ok,
        Err(s) => s,
    }
}

trait OrStatus<T> {
    fn st(self) -> Result<T, PvStatus>;
}

impl<T> OrStatus<T> for painleve_core::Result<T> {
    fn st(self) -> Result<T, PvStatus> {
        self.map_err(from_error)
    }
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, PvStatus> {
    p.as_mut()
        .ok_or_else(|| fail(PvStatus::NullPointer, "null output pointer"))
}

unsafe fn read<const N: usize>(p: *const PvComplex) -> Result<[C64; N], PvStatus> {
    if p.is_null() {
        return Err(fail(PvStatus::NullPointer, "null input pointer"));
    }
    let s = std::slice::from_raw_parts(p, N);
    Ok(std::array::from_fn(|i| s[i].into()))
}

unsafe fn write_slice(p: *mut PvComplex, vals: &[C64]) -> Result<(), PvStatus> {
    if p.is_null() {
        return Err(fail(PvStatus::NullPointer, "null output pointer"));
    }
    let s = std::slice::from_raw_parts_mut(p, vals.len());
    for (o, v) in s.iter_mut().zip(vals) {
        *o = (*v).into();
    }
    Ok(())
}

fn params(theta0: PvComplex, theta_inf: PvComplex) -> ThetaParams {
    ThetaParams::new(theta0.into(), theta_inf.into())
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn pv_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// `q''` from PIV at `(t, q, q')`.
///
/// # Safety
/// `out_qpp` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pv_piv_rhs(
    t: PvComplex,
    q: PvComplex,
    qprime: PvComplex,
    theta0: PvComplex,
    theta_inf: PvComplex,
    out_qpp: *mut PvComplex,
) -> PvStatus {
    run(|| {
        let s = PivState {
            t: t.into(),
            q: q.into(),
            qprime: qprime.into(),
        };
        *out(out_qpp)? = piv_rhs(&s, &params(theta0, theta_inf)).st()?.into();
        Ok(())
    })
}

/// The Bäcklund image `(q̃, q̃')` for the shift `(θ0, θ∞) → (θ0 + 1, θ∞ + 1)`.
///
/// # Safety
/// `out_q` and `out_qprime` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn pv_backlund_q(
    t: PvComplex,
    q: PvComplex,
    qprime: PvComplex,
    theta0: PvComplex,
    theta_inf: PvComplex,
    out_q: *mut PvComplex,
    out_qprime: *mut PvComplex,
) -> PvStatus {
    run(|| {
        let p = params(theta0, theta_inf);
        let (t, q, qp) = (t.into(), q.into(), qprime.into());
        let nq = backlund_q(q, qp, t, &p).st()?;
        let nqp = backlund_qprime(q, qp, t, &p).st()?;
        *out(out_q)? = nq.into();
        *out(out_qprime)? = nqp.into();
        Ok(())
    })
}

/// Largest coefficient of the rank-2 Lax compatibility residual along the flow.
///
/// # Safety
/// `out_max` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pv_lax_residual(
    t: PvComplex,
    q: PvComplex,
    a0: PvComplex,
    theta0: PvComplex,
    theta_inf: PvComplex,
    out_max: *mut f64,
) -> PvStatus {
    run(|| {
        let p = params(theta0, theta_inf);
        let (t, q, a0) = (t.into(), q.into(), a0.into());
        let d = LaxPairData::new(q, a0, t, p).st()?;
        let (qd, ad) = flow_rhs(t, q, a0, &p).st()?;
        *out(out_max)? = lax_residual(&d, qd, ad).max_abs();
        Ok(())
    })
}

/// `(f0', f1', f2')` of the symmetric system.
///
/// # Safety
/// `eps` and `f` must point to 3 values, `out_fdot` to 3 writable values.
#[no_mangle]
pub unsafe extern "C" fn pv_ny_rhs(
    eps: *const PvComplex,
    t: PvComplex,
    f: *const PvComplex,
    out_fdot: *mut PvComplex,
) -> PvStatus {
    run(|| {
        let e = read::<3>(eps)?;
        let e = EpsTriple::try_new(e[0], e[1], e[2]).st()?;
        let s = NyState {
            t: t.into(),
            f: read::<3>(f)?,
        };
        write_slice(out_fdot, &ny_rhs(&s, &e))
    })
}

/// `(θ0, θ∞)` belonging to an ε-triple.
///
/// # Safety
/// `eps` must point to 3 values; the outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn pv_theta_from_eps(
    eps: *const PvComplex,
    out_theta0: *mut PvComplex,
    out_theta_inf: *mut PvComplex,
) -> PvStatus {
    run(|| {
        let e = read::<3>(eps)?;
        let p = theta_from_eps(&EpsTriple::try_new(e[0], e[1], e[2]).st()?);
        *out(out_theta0)? = p.theta0.into();
        *out(out_theta_inf)? = p.theta_inf.into();
        Ok(())
    })
}

/// Parameter action of the extra generator.
///
/// # Safety
/// The outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn pv_missing_generator(
    theta0: PvComplex,
    theta_inf: PvComplex,
    out_theta0: *mut PvComplex,
    out_theta_inf: *mut PvComplex,
) -> PvStatus {
    run(|| {
        let p = missing_generator(&params(theta0, theta_inf));
        *out(out_theta0)? = p.theta0.into();
        *out(out_theta_inf)? = p.theta_inf.into();
        Ok(())
    })
}

/// Reducible types present at rational `(n0/d0, ninf/dinf)`; each output is 0 or 1.
///
/// # Safety
/// The outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn pv_reducible_presence(
    n0: i64,
    d0: i64,
    ninf: i64,
    dinf: i64,
    out_type1: *mut i32,
    out_type2: *mut i32,
) -> PvStatus {
    run(|| {
        if d0 == 0 || dinf == 0 {
            return Err(fail(PvStatus::InvalidInput, "zero denominator"));
        }
        let r = reducible_presence(
            num_rational::Rational64::new(n0, d0),
            num_rational::Rational64::new(ninf, dinf),
        );
        *out(out_type1)? = r.type1 as i32;
        *out(out_type2)? = r.type2 as i32;
        Ok(())
    })
}

/// `M(x)` in row-major order, checked against the Stokes product.
///
/// # Safety
/// `x` must point to 4 values and `out_m` to 9 writable values.
#[no_mangle]
pub unsafe extern "C" fn pv_rank3_monodromy(
    x: *const PvComplex,
    out_m: *mut PvComplex,
) -> PvStatus {
    run(|| {
        let m = rank3_top_monodromy(&Rank3Stokes::new(read::<4>(x)?)).st()?;
        let v: Vec<C64> = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|ij| m[ij])
            .collect();
        write_slice(out_m, &v)
    })
}

/// `e1`, `e2` of `λ³ − e1 λ² + e2 λ − 1`.
///
/// # Safety
/// `x` must point to 4 values; the outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn pv_rank3_charpoly(
    x: *const PvComplex,
    out_e1: *mut PvComplex,
    out_e2: *mut PvComplex,
) -> PvStatus {
    run(|| {
        let cp = Rank3Stokes::new(read::<4>(x)?).charpoly();
        *out(out_e1)? = cp.e1.into();
        *out(out_e2)? = cp.e2.into();
        Ok(())
    })
}

/// Fibre class of `x` and the number of Jordan blocks of `M(x)` (-1 when indeterminate).
///
/// # Safety
/// `x` must point to 4 values; the outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn pv_fiber_class(
    x: *const PvComplex,
    out_class: *mut PvFiberClass,
    out_jordan_blocks: *mut i32,
) -> PvStatus {
    run(|| {
        let rep = fiber_singularity(&Rank3Stokes::new(read::<4>(x)?)).st()?;
        *out(out_class)? = match rep.class {
            FiberClass::Regular => PvFiberClass::Regular,
            FiberClass::A1 => PvFiberClass::A1,
            FiberClass::A2 => PvFiberClass::A2,
            FiberClass::Indeterminate => PvFiberClass::Indeterminate,
        };
        *out(out_jordan_blocks)? = rep.jordan_blocks.map_or(-1, |b| b as i32);
        Ok(())
    })
}

/// Six rows `(φ, d)` ordered `(0,1), (1,0), (0,2), (2,0), (1,2), (2,1)`.
///
/// # Safety
/// Both outputs must point to 6 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pv_singular_directions(out_phi: *mut f64, out_d: *mut f64) -> PvStatus {
    run(|| {
        if out_phi.is_null() || out_d.is_null() {
            return Err(fail(PvStatus::NullPointer, "null output pointer"));
        }
        for (i, r) in singular_directions().iter().enumerate() {
            *out_phi.add(i) = r.phi;
            *out_d.add(i) = r.d;
        }
        Ok(())
    })
}

/// Integrates PIV from `(t0, q0, q0')` to `t1`, sampling every `step` along the segment.
/// The handle is written even when a pole stops the integration early; query
/// [`pv_trajectory_completed`].
///
/// # Safety
/// `out_handle` must be a valid pointer; release the handle with [`pv_trajectory_free`].
#[no_mangle]
pub unsafe extern "C" fn pv_piv_integrate(
    theta0: PvComplex,
    theta_inf: PvComplex,
    t0: PvComplex,
    t1: PvComplex,
    q0: PvComplex,
    qprime0: PvComplex,
    tol: f64,
    step: f64,
    out_handle: *mut *mut PvTrajectory,
) -> PvStatus {
    run(|| {
        let slot = out(out_handle)?;
        *slot = ptr::null_mut();
        if !(tol > 0.0 && step > 0.0) {
            return Err(fail(
                PvStatus::InvalidInput,
                "tol and step must be positive",
            ));
        }
        let opts = IntegrateOptions {
            tol,
            sample_step: Some(step),
            ..IntegrateOptions::default()
        };
        let start = PivState {
            t: t0.into(),
            q: q0.into(),
            qprime: qprime0.into(),
        };
        let path = Path::segment(t0.into(), t1.into());
        let inner = integrate_piv(&params(theta0, theta_inf), start, &path, &opts).st()?;
        *slot = Box::into_raw(Box::new(PvTrajectory { inner }));
        Ok(())
    })
}

/// Number of samples, 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pv_trajectory_len(h: *const PvTrajectory) -> usize {
    h.as_ref().map_or(0, |h| h.inner.samples.len())
}

/// 1 when the integration reached the end of the path, 0 otherwise.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pv_trajectory_completed(h: *const PvTrajectory) -> i32 {
    h.as_ref().map_or(0, |h| h.inner.completed() as i32)
}

/// Sample `i` as `(t, q, q')`.
///
/// # Safety
/// `h` must be a live handle and the outputs valid pointers.
#[no_mangle]
pub unsafe extern "C" fn pv_trajectory_sample(
    h: *const PvTrajectory,
    i: usize,
    out_t: *mut PvComplex,
    out_q: *mut PvComplex,
    out_qprime: *mut PvComplex,
) -> PvStatus {
    run(|| {
        let h = h
            .as_ref()
            .ok_or_else(|| fail(PvStatus::NullPointer, "null handle"))?;
        let s = h.inner.samples.get(i).ok_or_else(|| {
            fail(
                PvStatus::OutOfRange,
                format!("sample {i} of {}", h.inner.samples.len()),
            )
        })?;
        *out(out_t)? = s.t.into();
        *out(out_q)? = s.y[0].into();
        *out(out_qprime)? = s.y[1].into();
        Ok(())
    })
}

/// Releases a trajectory. Null is ignored.
///
/// # Safety
/// `h` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pv_trajectory_free(h: *mut PvTrajectory) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}
