//! Scalar root finding and a small damped Newton solver used by the boundary
//! and coupling modules.

use crate::error::{Error, Result};

const MAX_SCALAR_ITER: usize = 200;

/// Real roots of `a x² + b x + c`, computed without cancellation.
///
/// Degenerates to the linear root when `a` vanishes. Roots are returned in no
/// particular order; a double root is returned once.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        if b == 0.0 {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let mut disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        // Tolerate a discriminant that is negative only through rounding.
        if disc > -1e-14 * (b * b + (4.0 * a * c).abs()) {
            disc = 0.0;
        } else {
            return Vec::new();
        }
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    if q == 0.0 {
        // b == 0 and c == 0.
        return vec![0.0];
    }
    let x1 = q / a;
    let x2 = c / q;
    if disc == 0.0 || x1 == x2 {
        vec![x2]
    } else {
        vec![x1, x2]
    }
}

/// Refines a root of `f` inside `[lo, hi]`, where `f(lo)` and `f(hi)` have
/// opposite signs, by Newton steps safeguarded with bisection.
pub fn refine_bracketed(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.signum() * fhi.signum() < 0.0) {
        return Err(Error::NoRoot(format!("[{lo}, {hi}] does not bracket a root")));
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..MAX_SCALAR_ITER {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if !fx.is_finite() {
            return Err(Error::NoRoot(format!("function undefined at {x}")));
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
        } else {
            hi = x;
        }
        if (hi - lo).abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return Ok(x);
        }
        let h = 1e-7 * x.abs().max(1e-300);
        let d = (f(x + h) - f(x - h)) / (2.0 * h);
        let newton = x - fx / d;
        let (a, b) = if lo < hi { (lo, hi) } else { (hi, lo) };
        x = if d.is_finite() && d != 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if x == lo || x == hi {
            return Ok(x);
        }
    }
    Ok(x)
}

/// All roots of `f` on `[lo, hi]` (with `0 < lo < hi`) detected as sign
/// changes on a geometric sampling grid, each refined to machine precision.
/// Samples where `f` is not finite break the scan.
pub fn roots_geometric(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    debug_assert!(lo > 0.0 && hi > lo && samples >= 2);
    let ratio = (hi / lo).powf(1.0 / (samples - 1) as f64);
    let mut roots = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    let mut x = lo;
    for i in 0..samples {
        let xi = if i + 1 == samples { hi } else { x };
        let fi = f(xi);
        if fi.is_finite() {
            if fi == 0.0 {
                roots.push(xi);
            } else if let Some((xp, fp)) = prev {
                if fp != 0.0 && fp.signum() != fi.signum() {
                    if let Ok(r) = refine_bracketed(f, xp, xi) {
                        roots.push(r);
                    }
                }
            }
            prev = Some((xi, fi));
        } else {
            prev = None;
        }
        x *= ratio;
    }
    roots
}

/// Solves the dense system `m x = b` by Gaussian elimination with partial pivoting.
pub fn solve_dense<const N: usize>(mut m: [[f64; N]; N], mut b: [f64; N]) -> Result<[f64; N]> {
    for col in 0..N {
        let piv = (col..N)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap_or(col);
        if m[piv][col] == 0.0 || !m[piv][col].is_finite() {
            return Err(Error::SingularPivot(col));
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..N {
            let factor = m[row][col] / m[col][col];
            if factor != 0.0 {
                for k in col..N {
                    m[row][k] -= factor * m[col][k];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut x = [0.0; N];
    for row in (0..N).rev() {
        let mut acc = b[row];
        for k in row + 1..N {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Ok(x)
}

/// Settings of [`damped_newton`].
#[derive(Clone, Copy, Debug)]
pub struct NewtonSettings {
    pub max_iter: usize,
    /// Stop once the infinity norm of the residual falls below this value.
    pub tol: f64,
    /// Maximum number of step halvings per iteration.
    pub max_halvings: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        NewtonSettings {
            max_iter: 50,
            tol: 1e-13,
            max_halvings: 30,
        }
    }
}

fn inf_norm<const N: usize>(r: &[f64; N]) -> f64 {
    r.iter()
        .fold(0.0f64, |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) })
}

/// Newton iteration with step halving until the residual norm decreases.
///
/// `system` returns the residual and its Jacobian at a point, or `None` when
/// the point is inadmissible (for example a nonpositive area); inadmissible
/// trial points are halved like non-decreasing ones. Returns the solution and
/// the final residual norm.
pub fn damped_newton<const N: usize>(
    system: impl Fn(&[f64; N]) -> Option<([f64; N], [[f64; N]; N])>,
    x0: [f64; N],
    settings: NewtonSettings,
) -> Result<([f64; N], f64)> {
    let mut x = x0;
    let (mut r, mut jac) = system(&x).ok_or_else(|| Error::NewtonDiverged { history: vec![] })?;
    let mut norm = inf_norm(&r);
    let mut history = vec![norm];
    for _ in 0..settings.max_iter {
        if norm <= settings.tol {
            return Ok((x, norm));
        }
        let neg: [f64; N] = std::array::from_fn(|i| -r[i]);
        let step = solve_dense(jac, neg)?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=settings.max_halvings {
            let trial: [f64; N] = std::array::from_fn(|i| x[i] + t * step[i]);
            if let Some((rt, jt)) = system(&trial) {
                let nt = inf_norm(&rt);
                if nt < norm {
                    x = trial;
                    r = rt;
                    jac = jt;
                    norm = nt;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        history.push(norm);
        if !accepted {
            // No decrease is possible: either converged to rounding level or stuck.
            if norm <= settings.tol * 1e3 {
                return Ok((x, norm));
            }
            return Err(Error::NewtonDiverged { history });
        }
    }
    if norm <= settings.tol {
        Ok((x, norm))
    } else {
        Err(Error::NewtonDiverged { history })
    }
}
