//! Roots of small complex polynomials by Aberth-Ehrlich iteration.

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_ITER: usize = 500;

/// Evaluates `Σ c_k x^k` and its derivative by Horner's rule.
/// Coefficients are ordered from the constant term up.
pub fn eval_with_derivative(coeffs: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Backward-error style residual `|p(x)| / Σ|c_k||x|^k`.
pub fn relative_residual(coeffs: &[Complex64], x: Complex64) -> f64 {
    let (p, _) = eval_with_derivative(coeffs, x);
    let ax = x.norm();
    let mut scale = 0.0;
    for c in coeffs.iter().rev() {
        scale = scale * ax + c.norm();
    }
    if scale == 0.0 {
        0.0
    } else {
        p.norm() / scale
    }
}

/// All roots of the polynomial with coefficients `coeffs` (constant term first).
///
/// The leading and constant coefficients must be nonzero. Roots are refined
/// until the relative residual drops below `1e-13` where attainable; a residual
/// above `1e-12` after polishing is reported as non-convergence.
pub fn roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let d = coeffs.len().saturating_sub(1);
    if d == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[d];
    let c0 = coeffs[0];
    if lead.norm() == 0.0 || c0.norm() == 0.0 {
        return Err(Error::Domain(
            "leading and constant coefficients must be nonzero".into(),
        ));
    }
    if d == 1 {
        return Ok(vec![-c0 / lead]);
    }

    let radius = (c0.norm() / lead.norm()).powf(1.0 / d as f64);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / d as f64 + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect();

    let mut trace = Vec::new();
    let mut converged = false;
    for _ in 0..MAX_ITER {
        let mut max_step: f64 = 0.0;
        for i in 0..d {
            let (p, dp) = eval_with_derivative(coeffs, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..d {
                if k != i {
                    s += 1.0 / (z[i] - z[k]);
                }
            }
            let w = ratio / (1.0 - ratio * s);
            if !w.is_finite() {
                continue;
            }
            z[i] -= w;
            max_step = max_step.max(w.norm() / z[i].norm().max(1e-300));
        }
        trace.push(max_step);
        if trace.len() > 10 {
            trace.remove(0);
        }
        if max_step < 1e-15 {
            converged = true;
            break;
        }
    }

    // Newton polish on the full polynomial.
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = eval_with_derivative(coeffs, *zi);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if !step.is_finite() {
                break;
            }
            let cand = *zi - step;
            if relative_residual(coeffs, cand) <= relative_residual(coeffs, *zi) {
                *zi = cand;
            } else {
                break;
            }
        }
    }

    let worst = z
        .iter()
        .map(|&x| relative_residual(coeffs, x))
        .fold(0.0, f64::max);
    if !converged && worst > 1e-12 {
        return Err(Error::RootConvergence {
            iterations: MAX_ITER,
            trace,
        });
    }
    if worst > 1e-12 {
        return Err(Error::RootConvergence {
            iterations: MAX_ITER,
            trace: vec![worst],
        });
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn quadratic_roots() {
        // 5x² − 6x + 1 = (x − 1)(5x − 1)
        let mut r = roots(&[c(1.0), c(-6.0), c(5.0)]).unwrap();
        r.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((r[0] - c(0.2)).norm() < 1e-14);
        assert!((r[1] - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn roots_of_unity() {
        let mut coeffs = vec![c(0.0); 8];
        coeffs[0] = c(-1.0);
        coeffs[7] = c(1.0);
        let r = roots(&coeffs).unwrap();
        for x in r {
            assert!((x.norm() - 1.0).abs() < 1e-13);
            assert!((x.powu(7) - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_constant_rejected() {
        assert!(roots(&[c(0.0), c(1.0), c(1.0)]).is_err());
    }

    #[test]
    fn widely_spread_roots() {
        // (x − 1e-3)(x − 1)(x − 1e3)
        let a = 1e-3;
        let b = 1e3;
        let coeffs = [c(-a * b), c(a + b + a * b), c(-(1.0 + a + b)), c(1.0)];
        let mut r = roots(&coeffs).unwrap();
        r.sort_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap());
        assert!((r[0].re - a).abs() < 1e-14);
        assert!((r[1].re - 1.0).abs() < 1e-12);
        assert!((r[2].re - b).abs() < 1e-9);
    }
}
