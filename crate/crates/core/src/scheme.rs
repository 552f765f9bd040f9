//! Relaxation-limit Lax-Friedrichs update, its MUSCL extension and the
//! finite-relaxation-rate unsplit scheme.
//!
//! Interface `j` of an edge with `n` cells separates cells `j - 1` and `j`
//! (zero based); interfaces `0` and `n` are the boundary interfaces whose
//! outer states come from the boundary or coupling modules.

use crate::boundary::BoundaryState;
use crate::error::{Error, Result};
use crate::model::{Cons, EdgeState, SchemeOrder, VesselParams};

/// Outer states at both ends of an edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ghosts {
    pub left: BoundaryState,
    pub right: BoundaryState,
}

/// Limited slopes of the characteristic variables `V + lambda U` (`plus`)
/// and `V - lambda U` (`minus`), scaled by `1 / (2 dx)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Slopes {
    pub plus: Cons,
    pub minus: Cons,
}

#[inline]
pub fn minmod(a: f64, b: f64) -> f64 {
    if a.signum() != b.signum() || a == 0.0 || b == 0.0 {
        0.0
    } else if a.abs() <= b.abs() {
        a
    } else {
        b
    }
}

#[inline]
fn minmod2(a: Cons, b: Cons) -> Cons {
    Cons::new(minmod(a.a, b.a), minmod(a.q, b.q))
}

/// Lax-Friedrichs flux `(V_l + V_r)/2 - lambda/2 (U_r - U_l)`.
#[inline]
pub fn lf_interface_flux(ul: Cons, ur: Cons, vl: Cons, vr: Cons, lambda: f64) -> Cons {
    Cons::new(
        0.5 * (vl.a + vr.a) - 0.5 * lambda * (ur.a - ul.a),
        0.5 * (vl.q + vr.q) - 0.5 * lambda * (ur.q - ul.q),
    )
}

/// Flux of the auxiliary variable `V` in the relaxation system.
#[inline]
fn relaxation_v_flux(ul: Cons, ur: Cons, vl: Cons, vr: Cons, lambda: f64) -> Cons {
    (ul + ur) * (0.5 * lambda * lambda) - (vr - vl) * (0.5 * lambda)
}

/// `dt = CFL dx / lambda`.
pub fn compute_dt(lambda: f64, dx: f64, cfl: f64) -> Result<f64> {
    if !(lambda > 0.0 && dx > 0.0 && cfl > 0.0 && cfl <= 1.0) || !lambda.is_finite() || !dx.is_finite() {
        return Err(Error::domain(format!(
            "time step needs lambda > 0, dx > 0, 0 < CFL <= 1 (got {lambda}, {dx}, {cfl})"
        )));
    }
    Ok(cfl * dx / lambda)
}

fn neighbours<'a>(u: &'a [Cons], v: &'a [Cons], ghosts: &'a Ghosts, j: usize) -> [(Cons, Cons); 3] {
    let n = u.len();
    let left = if j == 0 {
        (ghosts.left.u, ghosts.left.v)
    } else {
        (u[j - 1], v[j - 1])
    };
    let right = if j + 1 == n {
        (ghosts.right.u, ghosts.right.v)
    } else {
        (u[j + 1], v[j + 1])
    };
    [left, (u[j], v[j]), right]
}

/// Minmod-limited characteristic slopes of every cell; the outermost cells
/// use the ghost states as their missing neighbour.
pub fn characteristic_slopes(u: &[Cons], v: &[Cons], ghosts: &Ghosts, lambda: f64, dx: f64) -> Vec<Slopes> {
    let inv = 1.0 / (2.0 * dx);
    (0..u.len())
        .map(|j| {
            let [(ul, vl), (uc, vc), (ur, vr)] = neighbours(u, v, ghosts, j);
            let dl_u = uc - ul;
            let dr_u = ur - uc;
            let dl_v = vc - vl;
            let dr_v = vr - vc;
            Slopes {
                plus: minmod2((dl_v + dl_u * lambda) * inv, (dr_v + dr_u * lambda) * inv),
                minus: minmod2((dl_v - dl_u * lambda) * inv, (dr_v - dr_u * lambda) * inv),
            }
        })
        .collect()
}

/// MUSCL corrections for all `n + 1` interfaces.
///
/// The right-moving variable `V + lambda U` is reconstructed from the cell
/// left of the interface and the left-moving `V - lambda U` from the right,
/// giving `dx/2 (s⁺_{j-1} - s⁻_j)`. Boundary interfaces get no correction.
pub fn muscl_correction(u: &[Cons], v: &[Cons], ghosts: &Ghosts, lambda: f64, dx: f64) -> Vec<Cons> {
    let slopes = characteristic_slopes(u, v, ghosts, lambda, dx);
    let n = u.len();
    let mut h = vec![Cons::ZERO; n + 1];
    for j in 1..n {
        h[j] = (slopes[j - 1].plus - slopes[j].minus) * (0.5 * dx);
    }
    h
}

/// Numerical fluxes at all interfaces, including the MUSCL correction for
/// second order.
pub fn interface_fluxes(edge: &EdgeState, ghosts: &Ghosts, lambda: f64, dx: f64, order: SchemeOrder) -> Vec<Cons> {
    let (u, v) = (&edge.u, &edge.v);
    let n = u.len();
    let mut f = Vec::with_capacity(n + 1);
    f.push(lf_interface_flux(ghosts.left.u, u[0], ghosts.left.v, v[0], lambda));
    for j in 1..n {
        f.push(lf_interface_flux(u[j - 1], u[j], v[j - 1], v[j], lambda));
    }
    f.push(lf_interface_flux(
        u[n - 1],
        ghosts.right.u,
        v[n - 1],
        ghosts.right.v,
        lambda,
    ));
    if order == SchemeOrder::Second {
        for (fj, hj) in f.iter_mut().zip(muscl_correction(u, v, ghosts, lambda, dx)) {
            *fj += hj;
        }
    }
    f
}

fn check_positive(u: &[Cons], t: f64) -> Result<()> {
    match u.iter().position(|c| !(c.a > 0.0) || !c.q.is_finite()) {
        None => Ok(()),
        Some(cell) => Err(Error::NonPositiveArea {
            cell,
            area: u[cell].a,
            t,
        }),
    }
}

/// One step of the limit scheme
/// `U⁺ = U - dt/dx (F_{j+1/2} - F_{j-1/2}) + dt S(U)`, followed by `V = F(U⁺)`.
pub fn step_limit(
    edge: &mut EdgeState,
    params: &VesselParams,
    ghosts: &Ghosts,
    dt: f64,
    lambda: f64,
    dx: f64,
    order: SchemeOrder,
) -> Result<()> {
    let f = interface_fluxes(edge, ghosts, lambda, dx, order);
    let r = dt / dx;
    let form = edge.form;
    for (j, c) in edge.u.iter_mut().enumerate() {
        let s = params.source(form, *c);
        *c = *c - (f[j + 1] - f[j]) * r + s * dt;
    }
    edge.t += dt;
    check_positive(&edge.u, edge.t)?;
    edge.close_relaxation(params);
    Ok(())
}

/// One step of the unsplit implicit-explicit scheme for the relaxation system
/// with rate `epsilon > 0`. The stiff relaxation term is solved in closed form.
pub fn step_relaxation(
    edge: &mut EdgeState,
    params: &VesselParams,
    ghosts: &Ghosts,
    dt: f64,
    lambda: f64,
    dx: f64,
    epsilon: f64,
) -> Result<()> {
    if !(epsilon > 0.0) {
        return Err(Error::domain(format!(
            "relaxation rate must be positive, got {epsilon}"
        )));
    }
    let n = edge.n_cells();
    let fu = interface_fluxes(edge, ghosts, lambda, dx, SchemeOrder::First);
    let (u, v) = (&edge.u, &edge.v);
    let mut fv = Vec::with_capacity(n + 1);
    fv.push(relaxation_v_flux(ghosts.left.u, u[0], ghosts.left.v, v[0], lambda));
    for j in 1..n {
        fv.push(relaxation_v_flux(u[j - 1], u[j], v[j - 1], v[j], lambda));
    }
    fv.push(relaxation_v_flux(
        u[n - 1],
        ghosts.right.u,
        v[n - 1],
        ghosts.right.v,
        lambda,
    ));

    let r = dt / dx;
    let form = edge.form;
    let new_u: Vec<Cons> = (0..n)
        .map(|j| edge.u[j] - (fu[j + 1] - fu[j]) * r + params.source(form, edge.u[j]) * dt)
        .collect();
    check_positive(&new_u, edge.t + dt)?;
    let k = dt / epsilon;
    for j in 0..n {
        let v_star = edge.v[j] - (fv[j + 1] - fv[j]) * r;
        edge.v[j] = (v_star + params.flux(form, new_u[j]) * k) * (1.0 / (1.0 + k));
    }
    edge.u = new_u;
    edge.t += dt;
    Ok(())
}
