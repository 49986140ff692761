//! Roots of real monic cubics.
//!
//! Closed-form (trigonometric / Cardano) start values polished by Newton
//! iterations, with deflation to a quadratic for the remaining pair. The
//! polished roots satisfy |P(lambda)| <= 1e-12 relative to the polynomial
//! scale at lambda.

use num_complex::Complex64;

/// Evaluates lambda^3 + a2 lambda^2 + a1 lambda + a0.
pub fn eval(a2: f64, a1: f64, a0: f64, x: Complex64) -> Complex64 {
    ((x + a2) * x + a1) * x + a0
}

/// Magnitude scale of the cubic at x, used to normalize residuals.
pub fn scale_at(a2: f64, a1: f64, a0: f64, x: Complex64) -> f64 {
    let ax = x.norm();
    ax * ax * ax + a2.abs() * ax * ax + a1.abs() * ax + a0.abs()
}

/// Relative residual |P(x)| / scale(x).
pub fn relative_residual(a2: f64, a1: f64, a0: f64, x: Complex64) -> f64 {
    let s = scale_at(a2, a1, a0, x).max(f64::MIN_POSITIVE);
    eval(a2, a1, a0, x).norm() / s
}

fn newton_real(a2: f64, a1: f64, a0: f64, mut x: f64) -> f64 {
    for _ in 0..50 {
        let f = ((x + a2) * x + a1) * x + a0;
        let df = (3.0 * x + 2.0 * a2) * x + a1;
        if df == 0.0 {
            break;
        }
        let dx = f / df;
        x -= dx;
        if dx.abs() <= 1e-16 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

/// All three roots of lambda^3 + a2 lambda^2 + a1 lambda + a0 = 0.
///
/// Complex roots come in a conjugate pair; ordering is not specified.
pub fn roots(a2: f64, a1: f64, a0: f64) -> [Complex64; 3] {
    // Depressed form x = lambda + a2/3: x^3 + px + q.
    let shift = a2 / 3.0;
    let p = a1 - a2 * a2 / 3.0;
    let q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
    let disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);

    let real_root = if disc > 0.0 {
        // One real root (Cardano, with the sign trick to avoid cancellation).
        let sq = disc.sqrt();
        let u = if q <= 0.0 { -q / 2.0 + sq } else { -q / 2.0 - sq };
        let cu = u.cbrt();
        let x = if cu == 0.0 { 0.0 } else { cu - p / (3.0 * cu) };
        x - shift
    } else {
        // Three real roots (trigonometric form); take any one and deflate.
        let m = 2.0 * (-p / 3.0).max(0.0).sqrt();
        let arg = if m == 0.0 { 0.0 } else { (3.0 * q / (p * m)).clamp(-1.0, 1.0) };
        let theta = arg.acos() / 3.0;
        m * theta.cos() - shift
    };
    let r1 = newton_real(a2, a1, a0, real_root);

    // Synthetic division by (lambda - r1): lambda^2 + c1 lambda + c0.
    let c1 = a2 + r1;
    let c0 = a1 + r1 * c1;
    let half = -c1 / 2.0;
    let quad_disc = half * half - c0;
    let (r2, r3) = if quad_disc >= 0.0 {
        let sq = quad_disc.sqrt();
        // Stable quadratic formula: compute the larger-magnitude root first.
        let big = if half >= 0.0 { half + sq } else { half - sq };
        let small = if big == 0.0 { 0.0 } else { c0 / big };
        (
            Complex64::new(newton_real(a2, a1, a0, big), 0.0),
            Complex64::new(newton_real(a2, a1, a0, small), 0.0),
        )
    } else {
        let im = (-quad_disc).sqrt();
        (Complex64::new(half, im), Complex64::new(half, -im))
    };

    [Complex64::new(r1, 0.0), r2, r3]
}
