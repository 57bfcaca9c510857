//! Dormand–Prince 5(4) over polygonal paths in the complex plane.
//!
//! Each segment is parametrised by arc length `s`, so step sizes are real and the
//! local problem is `dy/ds = u f(t0 + s u, y)` with `u` the unit direction.

use crate::{Error, Result, C64};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth-order weights equal the last row of A; E = b5 - b4
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    vertices: Vec<C64>,
}

impl Path {
    pub fn segment(from: C64, to: C64) -> Self {
        Self {
            vertices: vec![from, to],
        }
    }

    pub fn polygon(vertices: Vec<C64>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidInput(
                "a path needs at least one vertex".into(),
            ));
        }
        Ok(Self { vertices })
    }

    pub fn start(&self) -> C64 {
        self.vertices[0]
    }

    pub fn end(&self) -> C64 {
        *self.vertices.last().expect("nonempty")
    }

    pub fn vertices(&self) -> &[C64] {
        &self.vertices
    }

    pub fn length(&self) -> f64 {
        self.vertices.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }
}

#[derive(Clone, Debug)]
pub struct IntegrateOptions {
    pub tol: f64,
    /// Components whose modulus signals a pole.
    pub watch: Vec<usize>,
    pub pole_threshold: f64,
    /// Record samples on a uniform arc-length grid of this spacing (per segment)
    /// instead of at every accepted step. The grid points are hit exactly.
    pub sample_step: Option<f64>,
    pub max_steps: usize,
    /// Initial trial step.
    pub initial_step: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            watch: vec![0],
            pole_threshold: 1e6,
            sample_step: None,
            max_steps: 1_000_000,
            initial_step: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub t: C64,
    pub y: Vec<C64>,
    /// `dy/dt` at the sample.
    pub dy: Vec<C64>,
    /// Local error estimate of the step that ended here (0 for the first sample).
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    Completed,
    PoleDetected { at: C64, estimate: C64 },
    StepUnderflow { at: C64 },
    MaxSteps { at: C64 },
}

impl Termination {
    pub fn label(&self) -> String {
        match self {
            Termination::Completed => "completed".into(),
            Termination::PoleDetected { estimate, .. } => {
                format!("pole-detected({:.16e}{:+.16e}i)", estimate.re, estimate.im)
            }
            Termination::StepUnderflow { at } => {
                format!("step-underflow({:.16e}{:+.16e}i)", at.re, at.im)
            }
            Termination::MaxSteps { at } => format!("max-steps({:.16e}{:+.16e}i)", at.re, at.im),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub termination: Termination,
    pub max_error: f64,
}

impl Trajectory {
    pub fn completed(&self) -> bool {
        self.termination == Termination::Completed
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectories are never empty")
    }
}

fn axpy(y: &[C64], terms: &[(f64, &Vec<C64>)], h: f64) -> Vec<C64> {
    let mut out = y.to_vec();
    for (w, k) in terms {
        if *w != 0.0 {
            for (o, ki) in out.iter_mut().zip(k.iter()) {
                *o += *ki * (w * h);
            }
        }
    }
    out
}

struct StepResult {
    y: Vec<C64>,
    err: Vec<C64>,
    k_last: Vec<C64>,
}

/// One Dormand–Prince step in the arc-length parameter.
fn dopri_step<F>(f: &F, t: C64, u: C64, y: &[C64], k1: &[C64], h: f64) -> Result<StepResult>
where
    F: Fn(C64, &[C64]) -> Result<Vec<C64>>,
{
    let g = |s: f64, y: &[C64]| -> Result<Vec<C64>> {
        Ok(f(t + u * s, y)?.into_iter().map(|v| v * u).collect())
    };
    let mut ks: Vec<Vec<C64>> = Vec::with_capacity(7);
    ks.push(k1.to_vec());
    for i in 1..7 {
        let terms: Vec<(f64, &Vec<C64>)> = (0..i).map(|j| (A[i][j], &ks[j])).collect();
        let yi = axpy(y, &terms, h);
        ks.push(g(C[i] * h, &yi)?);
    }
    let terms: Vec<(f64, &Vec<C64>)> = (0..6).map(|j| (A[6][j], &ks[j])).collect();
    let ynew = axpy(y, &terms, h);
    let err: Vec<C64> = (0..y.len())
        .map(|i| (0..7).map(|j| ks[j][i] * (E[j] * h)).sum())
        .collect();
    if ynew
        .iter()
        .chain(err.iter())
        .any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::Pole("non-finite stage value"));
    }
    Ok(StepResult {
        y: ynew,
        err,
        k_last: ks.pop().expect("7 stages"),
    })
}

/// Adaptive integration of `dy/dt = f(t, y)` along `path`.
pub fn integrate<F>(f: F, y0: &[C64], path: &Path, opts: &IntegrateOptions) -> Result<Trajectory>
where
    F: Fn(C64, &[C64]) -> Result<Vec<C64>>,
{
    if opts.tol <= 0.0 || opts.tol.is_nan() {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let t0 = path.start();
    let watched = |y: &[C64]| {
        opts.watch
            .iter()
            .filter_map(|&i| y.get(i).map(|v| (i, v.norm())))
            .fold(None, |best: Option<(usize, f64)>, (i, v)| match best {
                Some((_, b)) if b >= v => best,
                _ => Some((i, v)),
            })
    };
    if matches!(watched(y0), Some((_, v)) if v > opts.pole_threshold) {
        return Err(Error::Pole("initial condition is at a pole"));
    }
    let dy0 =
        f(t0, y0).map_err(|_| Error::Pole("right-hand side undefined at the initial point"))?;
    let mut samples = vec![Sample {
        t: t0,
        y: y0.to_vec(),
        dy: dy0.clone(),
        error: 0.0,
    }];
    let total = path.length();
    let min_step = 1e-12 * total.max(f64::MIN_POSITIVE);
    let mut h = opts.initial_step.min(total.max(f64::MIN_POSITIVE));
    let mut max_error: f64 = 0.0;
    let mut steps = 0usize;
    let mut y = y0.to_vec();
    let mut dy = dy0;

    for w in path.vertices().windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = (b - a).norm();
        if len == 0.0 {
            continue;
        }
        let u = (b - a) / len;
        let mut s = 0.0;
        let grid = opts.sample_step.filter(|&d| d > 0.0);
        let n_grid = grid.map(|d| ((len / d) - 1e-9).ceil().max(1.0) as usize);
        let stop_at = |k: usize| -> f64 {
            match (grid, n_grid) {
                (Some(d), Some(n)) if k < n => (k as f64 * d).min(len),
                _ => len,
            }
        };
        let mut next_k = 1usize;
        while s < len {
            if steps >= opts.max_steps {
                let t = a + u * s;
                return Ok(Trajectory {
                    samples,
                    termination: Termination::MaxSteps { at: t },
                    max_error,
                });
            }
            let target = stop_at(next_k);
            let hit = target - s <= h;
            let h_try = if hit { target - s } else { h };
            let t = a + u * s;
            let k1: Vec<C64> = dy.iter().map(|v| v * u).collect();
            let attempt = dopri_step(&f, t, u, &y, &k1, h_try);
            steps += 1;
            let (accepted, factor) = match &attempt {
                Ok(r) => {
                    let errn = r
                        .err
                        .iter()
                        .zip(y.iter().zip(&r.y))
                        .map(|(e, (y1, y2))| {
                            e.norm() / (opts.tol * (1.0 + y1.norm().max(y2.norm())))
                        })
                        .fold(0.0, f64::max);
                    let fac = if errn == 0.0 {
                        5.0
                    } else {
                        (0.9 * errn.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    (errn <= 1.0, fac)
                }
                Err(_) => (false, 0.25),
            };
            if !accepted {
                h = h_try * factor.min(0.9);
                if h < min_step {
                    return Ok(Trajectory {
                        samples,
                        termination: Termination::StepUnderflow { at: t },
                        max_error,
                    });
                }
                continue;
            }
            let r = attempt.expect("accepted");
            let s_new = if hit { target } else { s + h_try };
            let t_new = a + u * s_new;
            let dy_new: Vec<C64> = r.k_last.iter().map(|v| v / u).collect();
            let local = r
                .err
                .iter()
                .zip(&r.y)
                .map(|(e, yv)| e.norm() / (1.0 + yv.norm()))
                .fold(0.0, f64::max);
            max_error = max_error.max(local);
            y = r.y;
            dy = dy_new;
            s = s_new;
            if !hit {
                h = h_try * factor;
            }
            let record = grid.is_none() || hit;
            if hit {
                next_k += 1;
            }
            if record {
                samples.push(Sample {
                    t: t_new,
                    y: y.clone(),
                    dy: dy.clone(),
                    error: local,
                });
            }
            if let Some((i, v)) = watched(&y) {
                if v > opts.pole_threshold {
                    if !record {
                        samples.push(Sample {
                            t: t_new,
                            y: y.clone(),
                            dy: dy.clone(),
                            error: local,
                        });
                    }
                    let estimate = if dy[i].norm() > 0.0 {
                        t_new + y[i] / dy[i]
                    } else {
                        t_new
                    };
                    return Ok(Trajectory {
                        samples,
                        termination: Termination::PoleDetected {
                            at: t_new,
                            estimate,
                        },
                        max_error,
                    });
                }
            }
            if h < min_step {
                return Ok(Trajectory {
                    samples,
                    termination: Termination::StepUnderflow { at: t_new },
                    max_error,
                });
            }
        }
    }
    Ok(Trajectory {
        samples,
        termination: Termination::Completed,
        max_error,
    })
}

/// Fixed-step Dormand–Prince (fifth-order solution) from `t0` to `t1` in `n` steps.
pub fn integrate_fixed<F>(f: F, y0: &[C64], t0: C64, t1: C64, n: usize) -> Result<Vec<C64>>
where
    F: Fn(C64, &[C64]) -> Result<Vec<C64>>,
{
    let len = (t1 - t0).norm();
    if n == 0 || len == 0.0 {
        return Ok(y0.to_vec());
    }
    let u = (t1 - t0) / len;
    let h = len / n as f64;
    let mut y = y0.to_vec();
    for i in 0..n {
        let t = t0 + u * (i as f64 * h);
        let k1: Vec<C64> = f(t, &y)?.into_iter().map(|v| v * u).collect();
        y = dopri_step(&f, t, u, &y, &k1, h)?.y;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn constant_rhs_zero() {
        let traj = integrate(
            |_, y| Ok(vec![C64::default(); y.len()]),
            &[r(2.0)],
            &Path::segment(r(0.0), r(1.0)),
            &IntegrateOptions::default(),
        )
        .unwrap();
        assert!(traj.completed());
        assert!(traj.samples.iter().all(|s| s.y[0] == r(2.0)));
    }

    #[test]
    fn exponential_calibration() {
        let traj = integrate(
            |_, y| Ok(vec![y[0]]),
            &[r(1.0)],
            &Path::segment(r(0.0), r(1.0)),
            &IntegrateOptions::default(),
        )
        .unwrap();
        assert!((traj.last().y[0] - r(std::f64::consts::E)).norm() < 1e-9);
        assert!(traj.max_error <= 1e-10);
    }

    #[test]
    fn complex_direction_and_polygon() {
        // y' = i y around a closed triangle returns to the start value
        let path = Path::polygon(vec![
            r(0.0),
            C64::new(1.0, 1.0),
            C64::new(-1.0, 0.5),
            r(0.0),
        ])
        .unwrap();
        let traj = integrate(
            |_, y| Ok(vec![y[0] * C64::i()]),
            &[r(1.0)],
            &path,
            &IntegrateOptions::default(),
        )
        .unwrap();
        assert!((traj.last().y[0] - r(1.0)).norm() < 1e-8);
        assert_eq!(traj.last().t, r(0.0));
    }

    #[test]
    fn pole_is_detected_and_located() {
        // y' = y^2, y(0) = 1 blows up at t = 1
        let traj = integrate(
            |_, y| Ok(vec![y[0] * y[0]]),
            &[r(1.0)],
            &Path::segment(r(0.0), r(2.0)),
            &IntegrateOptions::default(),
        )
        .unwrap();
        match traj.termination {
            Termination::PoleDetected { estimate, .. } => {
                assert!((estimate - r(1.0)).norm() < 1e-6)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn initial_pole_is_an_error() {
        let e = integrate(
            |_, y| Ok(vec![y[0]]),
            &[r(1e7)],
            &Path::segment(r(0.0), r(1.0)),
            &IntegrateOptions::default(),
        );
        assert!(matches!(e, Err(Error::Pole(_))));
    }

    #[test]
    fn grid_sampling_hits_points() {
        let opts = IntegrateOptions {
            sample_step: Some(0.1),
            ..Default::default()
        };
        let traj = integrate(
            |t, _| Ok(vec![t]),
            &[r(0.0)],
            &Path::segment(r(0.0), r(1.0)),
            &opts,
        )
        .unwrap();
        assert_eq!(traj.samples.len(), 11);
        for (k, s) in traj.samples.iter().enumerate() {
            assert!((s.t - r(k as f64 * 0.1)).norm() < 1e-14);
            assert!((s.y[0] - s.t * s.t * 0.5).norm() < 1e-13);
        }
    }

    #[test]
    fn zero_length_path_is_one_sample() {
        let traj = integrate(
            |_, y| Ok(vec![y[0]]),
            &[r(1.0)],
            &Path::segment(r(3.0), r(3.0)),
            &IntegrateOptions::default(),
        )
        .unwrap();
        assert_eq!(traj.samples.len(), 1);
        assert!(traj.completed());
    }

    #[test]
    fn fixed_step_order_is_at_least_four() {
        let f = |_: C64, y: &[C64]| Ok(vec![y[0]]);
        let err = |n| {
            (integrate_fixed(f, &[r(1.0)], r(0.0), r(1.0), n).unwrap()[0] - r(std::f64::consts::E))
                .norm()
        };
        let ratio = err(8) / err(16);
        assert!(ratio.log2() >= 4.0, "observed order {}", ratio.log2());
    }
}
