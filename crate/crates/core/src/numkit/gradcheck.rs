use crate::{Error, Result};

/// Compares an analytic gradient against central differences.
///
/// `f` returns the scalar value and its analytic gradient at the given
/// parameters. The result is the largest per-coordinate
/// `|numeric - analytic| / max(1, |analytic|)`.
pub fn grad_check<F>(mut f: F, params: &[f64], h: f64) -> Result<f64>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let (value, analytic) = f(params);
    if !value.is_finite() {
        return Err(Error::NonFinite("objective at base point".into()));
    }
    if analytic.len() != params.len() {
        return Err(Error::Shape(format!(
            "gradient has {} entries for {} parameters",
            analytic.len(),
            params.len()
        )));
    }
    let mut p = params.to_vec();
    let mut worst = 0.0f64;
    for k in 0..p.len() {
        let orig = p[k];
        p[k] = orig + h;
        let plus = f(&p).0;
        p[k] = orig - h;
        let minus = f(&p).0;
        p[k] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFinite(format!("objective near coordinate {k}")));
        }
        let numeric = (plus - minus) / (2.0 * h);
        let err = (numeric - analytic[k]).abs() / analytic[k].abs().max(1.0);
        worst = worst.max(err);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_is_exact() {
        let err = grad_check(|p| (p[0] * p[0], vec![2.0 * p[0]]), &[3.0], 1e-5).unwrap();
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn wrong_gradient_is_detected() {
        let err = grad_check(|p| (p[0] * p[0], vec![p[0]]), &[3.0], 1e-5).unwrap();
        assert!(err > 0.4);
    }

    #[test]
    fn non_finite_objective_errors() {
        assert!(grad_check(|p| (p[0].ln(), vec![1.0 / p[0]]), &[-1.0], 1e-5).is_err());
    }
}
