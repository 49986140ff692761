//! Least-squares line fits (used for log-log slope estimation).

/// Result of an ordinary least-squares line fit y = slope * x + intercept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square of the fit residuals.
    pub rms_residual: f64,
    /// Standard error of the slope estimate (sigma-hat / sqrt(Sxx)).
    pub slope_stderr: f64,
    pub n: usize,
}

/// Fits a line through (xs, ys). Panics if the inputs differ in length;
/// returns `None` for fewer than two points or degenerate abscissae.
pub fn line_fit(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mean_x = xs.iter().sum::<f64>() / nf;
    let mean_y = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        let dx = xs[i] - mean_x;
        sxx += dx * dx;
        sxy += dx * (ys[i] - mean_y);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;

    let mut ssr = 0.0;
    for i in 0..n {
        let e = ys[i] - (slope * xs[i] + intercept);
        ssr += e * e;
    }
    let rms_residual = (ssr / nf).sqrt();
    let sigma2 = if n > 2 { ssr / (n - 2) as f64 } else { ssr };
    let slope_stderr = (sigma2 / sxx).sqrt();

    Some(LineFit {
        slope,
        intercept,
        rms_residual,
        slope_stderr,
        n,
    })
}
