//! Thin helpers over `nalgebra` for the small dense complex problems that show up
//! everywhere: Kronecker products, consistent solves, null spaces, numerical rank.

use nalgebra::{DMatrix, DVector};

use crate::C64;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub fn cmat(rows: usize, cols: usize, data: &[C64]) -> CMat {
    CMat::from_row_slice(rows, cols, data)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Row-major vectorisation, `vec(X)[i*n+j] = X[i,j]`.
pub fn vec_rows(x: &CMat) -> CVec {
    let (r, c) = x.shape();
    CVec::from_iterator(r * c, (0..r).flat_map(|i| (0..c).map(move |j| x[(i, j)])))
}

pub fn unvec_rows(v: &CVec, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |i, j| v[i * cols + j])
}

/// Singular values in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Numerical rank with an absolute singular-value threshold.
pub fn rank(m: &CMat, threshold: f64) -> usize {
    singular_values(m)
        .iter()
        .filter(|&&s| s > threshold)
        .count()
}

pub fn cond(m: &CMat) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Orthonormal basis (as columns) of the right null space of `m`, using singular
/// values below `threshold` as zero.
pub fn null_space(m: &CMat, threshold: f64) -> CMat {
    let (r, c) = m.shape();
    // pad to a square matrix so that the SVD returns a full V
    let padded = if r < c {
        let mut p = CMat::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let cols: Vec<CVec> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= threshold)
        .map(|(i, _)| v_t.row(i).adjoint())
        .collect();
    if cols.is_empty() {
        CMat::zeros(c, 0)
    } else {
        CMat::from_columns(&cols)
    }
}

/// Solves `m x = b` when the system is consistent. Singular directions of `m`
/// (relative threshold `rcond`) are dropped; returns `None` when the residual of
/// the least-squares solution exceeds `tol * max(1, |b|)`.
pub fn solve_consistent(m: &CMat, b: &CVec, rcond: f64, tol: f64) -> Option<CVec> {
    let smax = singular_values(m).first().copied().unwrap_or(0.0);
    let eps = rcond * smax.max(1.0);
    let svd = m.clone().svd(true, true);
    let x = svd.solve(b, eps).ok()?;
    let resid = (m * &x - b).norm();
    if resid <= tol * b.norm().max(1.0) {
        Some(x)
    } else {
        None
    }
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
