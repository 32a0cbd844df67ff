//! Adaptive Simpson quadrature with a Richardson error estimate.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Sum of the local `|S2 - S1| / 15` estimates over accepted panels.
    pub error_estimate: f64,
    pub evaluations: usize,
}

const MAX_DEPTH: u32 = 48;

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    if a == b {
        return Ok(Quadrature { value: 0.0, error_estimate: 0.0, evaluations: 0 });
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut q = Quadrature { value: 0.0, error_estimate: 0.0, evaluations: 3 };
    let mut failed = false;
    recurse(&mut f, a, b, fa, fm, fb, whole, tol.max(1e-15), 0, &mut q, &mut failed);
    if failed || !q.value.is_finite() {
        return Err(Error::Accuracy(format!("adaptive Simpson on [{a}, {b}] could not reach tolerance {tol}")));
    }
    Ok(q)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    q: &mut Quadrature,
    failed: &mut bool,
) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    q.evaluations += 2;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if diff.abs() <= 15.0 * tol || depth >= MAX_DEPTH {
        if depth >= MAX_DEPTH && diff.abs() > 15.0 * tol {
            *failed = true;
        }
        q.value += left + right + diff / 15.0;
        q.error_estimate += diff.abs() / 15.0;
        return;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, q, failed);
    recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, q, failed);
}

/// Integrate over consecutive panels split at `breaks` (sorted, inside `[a, b]`).
pub fn piecewise<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> Result<Quadrature> {
    let mut nodes = vec![a];
    nodes.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    nodes.push(b);
    nodes.sort_by(|x, y| x.total_cmp(y));
    nodes.dedup();
    let panels = (nodes.len() - 1).max(1) as f64;
    let mut total = Quadrature { value: 0.0, error_estimate: 0.0, evaluations: 0 };
    for w in nodes.windows(2) {
        let q = adaptive_simpson(&mut f, w[0], w[1], tol / panels)?;
        total.value += q.value;
        total.error_estimate += q.error_estimate;
        total.evaluations += q.evaluations;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let q = adaptive_simpson(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((q.value - 0.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_weight_has_unit_mass() {
        let q = piecewise(|t| 0.5 * (-t.abs()).exp(), -40.0, 40.0, &[0.0], 1e-12).unwrap();
        let tail = (-40.0f64).exp();
        assert!((q.value + tail - 1.0).abs() < 1e-11, "{}", q.value);
    }

    #[test]
    fn kinks_at_breaks_are_handled() {
        let q = piecewise(|t| (t - 0.3).abs(), -1.0, 1.0, &[0.3], 1e-13).unwrap();
        let exact = 0.5 * 1.3 * 1.3 + 0.5 * 0.7 * 0.7;
        assert!((q.value - exact).abs() < 1e-13);
    }
}
