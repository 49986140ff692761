//! Adaptive quadrature on finite intervals.

/// Adaptive Simpson integration of `f` over [a, b].
///
/// Subdivides until the local Richardson error estimate meets
/// `rel_tol * |panel|` (with `abs_floor` guarding near-zero panels), down to
/// a depth of 40 halvings.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64, abs_floor: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, rel_tol, abs_floor, 40)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    rel_tol: f64,
    abs_floor: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let refined = left + right;
    let err = (refined - whole) / 15.0;
    if depth == 0 || err.abs() <= rel_tol * refined.abs() + abs_floor {
        refined + err
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, rel_tol, abs_floor * 0.5, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, rel_tol, abs_floor * 0.5, depth - 1)
    }
}
