//! Fourth-order finite differences on uniformly spaced samples.

use crate::C64;

const CENTRAL: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const CENTRAL_DEN: f64 = 12.0;
// one-sided stencils for the first two and last two points
const FORWARD0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
const FORWARD1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];

/// First derivative of uniformly spaced complex samples with spacing `h` (complex
/// to allow straight paths in any direction). Needs at least five samples.
pub fn derivative(values: &[C64], h: C64) -> Option<Vec<C64>> {
    let n = values.len();
    if n < 5 {
        return None;
    }
    let apply = |start: usize, w: &[f64; 5], sign: f64| -> C64 {
        let s: C64 = (0..5).map(|i| values[start + i] * w[i]).sum();
        s * sign / (CENTRAL_DEN * h)
    };
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let d = match i {
            0 => apply(0, &FORWARD0, 1.0),
            1 => apply(0, &FORWARD1, 1.0),
            i if i + 2 < n => apply(i - 2, &CENTRAL, 1.0),
            i if i + 2 == n => {
                // mirror of FORWARD1 on the reversed window
                let s: C64 = (0..5).map(|k| values[n - 1 - k] * FORWARD1[k]).sum();
                -s / (CENTRAL_DEN * h)
            }
            _ => {
                let s: C64 = (0..5).map(|k| values[n - 1 - k] * FORWARD0[k]).sum();
                -s / (CENTRAL_DEN * h)
            }
        };
        out.push(d);
    }
    Some(out)
}
