//! Unconstrained minimization by BFGS with Armijo backtracking.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    /// Stop once the infinity norm of the gradient falls below
    /// `gtol * max(1, |f|)`.
    pub gtol: f64,
    pub max_iter: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            gtol: 1e-8,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BfgsResult {
    pub x: DVector<f64>,
    pub f: f64,
    pub grad: DVector<f64>,
    pub iterations: usize,
    /// The gradient tolerance was met.
    pub converged: bool,
    /// Final inverse-Hessian approximation.
    pub inv_hessian: DMatrix<f64>,
}

const ARMIJO_C: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

/// Minimize `f`, which returns the value and gradient or `None` where the
/// objective is undefined (treated as +inf by the line search).
///
/// Returns `None` only when the starting point itself is undefined.
pub fn minimize<F>(f: F, x0: DVector<f64>, opts: BfgsOptions) -> Option<BfgsResult>
where
    F: FnMut(&DVector<f64>) -> Option<(f64, DVector<f64>)>,
{
    minimize_from(f, x0, None, opts)
}

/// [`minimize`] seeded with an inverse-Hessian approximation, typically the
/// one returned by a previous solve of a nearby problem.
pub fn minimize_from<F>(
    mut f: F,
    x0: DVector<f64>,
    inv_hessian: Option<DMatrix<f64>>,
    opts: BfgsOptions,
) -> Option<BfgsResult>
where
    F: FnMut(&DVector<f64>) -> Option<(f64, DVector<f64>)>,
{
    let n = x0.len();
    let mut x = x0;
    let (mut fx, mut g) = f(&x).filter(|(v, g)| v.is_finite() && g.iter().all(|e| e.is_finite()))?;
    let seeded = inv_hessian.filter(|h| h.nrows() == n && h.ncols() == n && h.iter().all(|e| e.is_finite()));
    let mut first = seeded.is_none();
    let mut h = seeded.unwrap_or_else(|| DMatrix::<f64>::identity(n, n));
    let mut iterations = 0;
    // Predicted decrease -g^T H g at the last failed quasi-Newton line search.
    let mut stuck_decrease = f64::INFINITY;
    while iterations < opts.max_iter {
        if g.amax() <= opts.gtol * fx.abs().max(1.0) {
            return Some(BfgsResult { x, f: fx, grad: g, iterations, converged: true, inv_hessian: h });
        }
        let mut dir = -(&h * &g);
        let mut slope = g.dot(&dir);
        if slope >= 0.0 {
            h = DMatrix::identity(n, n);
            dir = -g.clone();
            slope = -g.norm_squared();
        }
        if first {
            // Keep the very first trial step at unit length.
            let dn = dir.norm();
            if dn > 1.0 {
                dir /= dn;
                slope /= dn;
            }
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let xn = &x + t * &dir;
            if let Some((fv, gv)) = f(&xn) {
                if fv.is_finite() && gv.iter().all(|e| e.is_finite()) && fv <= fx + ARMIJO_C * t * slope {
                    accepted = Some((xn, fv, gv));
                    break;
                }
            }
            t *= 0.5;
        }
        iterations += 1;
        let Some((xn, fn_, gn)) = accepted else {
            stuck_decrease = stuck_decrease.min(-slope);
            if first {
                break;
            }
            // Restart from steepest descent once before giving up.
            h = DMatrix::identity(n, n);
            first = true;
            continue;
        };
        let s = &xn - &x;
        let y = &gn - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            if first {
                h *= sy / y.norm_squared();
            }
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            h += (rho * rho * yhy + rho) * (&s * s.transpose()) - rho * (&hy * s.transpose() + &s * hy.transpose());
            first = false;
        }
        let stalled = (fx - fn_).abs() <= 1e-16 * fx.abs().max(1.0) && s.amax() <= 1e-15 * x.amax().max(1.0);
        x = xn;
        fx = fn_;
        g = gn;
        if stalled {
            stuck_decrease = -slope;
            break;
        }
        stuck_decrease = f64::INFINITY;
    }
    let scale = fx.abs().max(1.0);
    // When no step can lower f any more and the quadratic model promises
    // less than 1e-10 relative improvement, the gradient is at the noise
    // floor of the objective.
    let converged = g.amax() <= opts.gtol * scale || stuck_decrease <= 1e-10 * scale;
    Some(BfgsResult { x, f: fx, grad: g, iterations, converged, inv_hessian: h })
}

/// Central-difference Hessian of a gradient function.
pub fn numerical_hessian<G>(grad: G, x: &DVector<f64>, rel_step: f64) -> DMatrix<f64>
where
    G: Fn(&DVector<f64>) -> DVector<f64>,
{
    let n = x.len();
    let mut h = DMatrix::zeros(n, n);
    for j in 0..n {
        let step = rel_step * x[j].abs().max(1.0);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += step;
        xm[j] -= step;
        let col = (grad(&xp) - grad(&xm)) / (2.0 * step);
        h.set_column(j, &col);
    }
    crate::linalg::symmetrize(&mut h);
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &DVector<f64>| {
            let (a, b) = (x[0], x[1]);
            let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = DVector::from_vec(vec![
                -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                200.0 * (b - a * a),
            ]);
            Some((v, g))
        };
        let r = minimize(f, DVector::from_vec(vec![-1.2, 1.0]), BfgsOptions { gtol: 1e-10, max_iter: 500 }).unwrap();
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-8 && (r.x[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn undefined_region_is_avoided() {
        // -ln x + x has its minimum at 1 and is undefined for x <= 0.
        let f = |x: &DVector<f64>| {
            if x[0] <= 0.0 {
                None
            } else {
                Some((-x[0].ln() + x[0], DVector::from_vec(vec![-1.0 / x[0] + 1.0])))
            }
        };
        let r = minimize(f, DVector::from_vec(vec![0.01]), BfgsOptions::default()).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn hessian_of_quadratic() {
        let g = |x: &DVector<f64>| DVector::from_vec(vec![2.0 * x[0] + x[1], x[0] + 6.0 * x[1]]);
        let h = numerical_hessian(g, &DVector::from_vec(vec![0.3, -2.0]), 1e-5);
        assert!((h[(0, 0)] - 2.0).abs() < 1e-8 && (h[(0, 1)] - 1.0).abs() < 1e-8 && (h[(1, 1)] - 6.0).abs() < 1e-8);
    }
}
