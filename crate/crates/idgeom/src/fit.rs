use crate::error::{Error, Result};

/// Ordinary least-squares line fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Sum of squared residuals.
    pub residual_sum: f64,
}

/// Fit `ys ~ slope * xs + intercept` by ordinary least squares.
///
/// Exact on collinear data (the centered normal equations introduce no
/// systematic error there).
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} xs vs {} ys",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 points for a line fit".into(),
        ));
    }
    if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite fit input".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all xs are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual_sum = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    Ok(LineFit {
        slope,
        intercept,
        residual_sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let f = fit_line(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert_eq!(f.slope, 2.0);
        assert_eq!(f.intercept, 1.0);
        assert!(f.residual_sum.abs() < 1e-12);
    }

    #[test]
    fn flat_line() {
        let f = fit_line(&[0.0, 1.0], &[5.0, 5.0]).unwrap();
        assert_eq!(f.slope, 0.0);
        assert_eq!(f.intercept, 5.0);
    }

    #[test]
    fn degenerate_xs() {
        let err = fit_line(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap_err();
        assert!(matches!(err, Error::DegenerateFit(_)));
    }

    #[test]
    fn short_input() {
        assert!(matches!(
            fit_line(&[1.0], &[1.0]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn residual_of_noisy_fit() {
        // y = x with one point off by 3: residuals minimized by OLS.
        let f = fit_line(&[0.0, 1.0, 2.0, 3.0], &[0.0, 1.0, 5.0, 3.0]).unwrap();
        assert!(f.residual_sum > 0.0);
    }
}
