//! Semi-implicit treatment of the viscoelastic wall term.
//!
//! The parabolic term `gamma sqrt(pi) A / (2 rho A0^{3/2}) Q_xx` is added to
//! the momentum update with `A` frozen at the old time level and `Q` taken
//! implicitly, which gives one tridiagonal solve per edge and step.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{EdgeState, ModelForm, VesselParams};

/// Tridiagonal system `sub[i-1] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl Tridiagonal {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.sub[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.sup[i] * x[i + 1];
                }
                y
            })
            .collect()
    }
}

/// Thomas algorithm.
pub fn thomas_solve(t: &Tridiagonal) -> Result<Vec<f64>> {
    let n = t.diag.len();
    if n == 0 || t.sub.len() + 1 != n || t.sup.len() + 1 != n || t.rhs.len() != n {
        return Err(Error::domain(format!(
            "tridiagonal shape mismatch: diag {n}, sub {}, sup {}, rhs {}",
            t.sub.len(),
            t.sup.len(),
            t.rhs.len()
        )));
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = t.diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return Err(Error::SingularPivot(0));
    }
    if n > 1 {
        c[0] = t.sup[0] / pivot;
    }
    d[0] = t.rhs[0] / pivot;
    for i in 1..n {
        pivot = t.diag[i] - t.sub[i - 1] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::SingularPivot(i));
        }
        if i + 1 < n {
            c[i] = t.sup[i] / pivot;
        }
        d[i] = (t.rhs[i] - t.sub[i - 1] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Closure of the second difference at one end of an edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EndClosure {
    /// Mirror the adjacent cell (zero gradient).
    Neumann,
    /// Use the given mass flux as the outer neighbour.
    Dirichlet(f64),
}

/// Diffusion coefficient `gamma sqrt(pi) A / (2 rho A0^{3/2})`.
pub fn viscoelastic_coefficient(a: f64, params: &VesselParams) -> f64 {
    params.gamma * PI.sqrt() * a / (2.0 * params.rho * params.a0.powf(1.5))
}

/// Solves `(I - dt D(Aⁿ) L) Q⁺ = Q̂` in place, where `L` is the three-point
/// second difference over `dx²` and `Q̂` the hyperbolic update stored in
/// `edge`. `a_old` holds the areas at the old time level. `A` is unchanged;
/// the caller re-closes `V`.
pub fn viscoelastic_step(
    edge: &mut EdgeState,
    a_old: &[f64],
    params: &VesselParams,
    dt: f64,
    dx: f64,
    ends: (EndClosure, EndClosure),
) -> Result<()> {
    if params.gamma == 0.0 {
        return Ok(());
    }
    if edge.form != ModelForm::Flow {
        return Err(Error::domain("the viscoelastic term is defined for the flow form only"));
    }
    let n = edge.n_cells();
    if a_old.len() != n {
        return Err(Error::domain("old area array length mismatch"));
    }
    let kappa: Vec<f64> = a_old
        .iter()
        .map(|&a| dt * viscoelastic_coefficient(a, params) / (dx * dx))
        .collect();
    let mut sys = Tridiagonal {
        sub: (1..n).map(|i| -kappa[i]).collect(),
        diag: kappa.iter().map(|k| 1.0 + 2.0 * k).collect(),
        sup: (0..n - 1).map(|i| -kappa[i]).collect(),
        rhs: edge.u.iter().map(|c| c.q).collect(),
    };
    match ends.0 {
        EndClosure::Neumann => sys.diag[0] -= kappa[0],
        EndClosure::Dirichlet(qb) => sys.rhs[0] += kappa[0] * qb,
    }
    match ends.1 {
        EndClosure::Neumann => sys.diag[n - 1] -= kappa[n - 1],
        EndClosure::Dirichlet(qb) => sys.rhs[n - 1] += kappa[n - 1] * qb,
    }
    let q = thomas_solve(&sys)?;
    for (c, qn) in edge.u.iter_mut().zip(q) {
        c.q = qn;
    }
    Ok(())
}
