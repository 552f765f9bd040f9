//! Coupling states at junctions.
//!
//! The incoming (parent) edge meets the node with its right end, the
//! outgoing edges with their left ends. Unknowns are the boundary states
//! `U_b` of all ends; `V_b` follows from the Lax-curve relation. The
//! conditions are conservation of mass flux, continuity of total pressure,
//! and their relaxation counterparts for `V^A` and `V^Q`:
//!
//! ```text
//! Q_p = sum Q_d                  V^A_p = sum V^A_d
//! pt_p = pt_d                    (A_d / A_p) G_p = G_d
//! ```
//!
//! with `G = V^Q - alpha/2 Q²/A + P(A)/rho`.

use crate::boundary::{lax_curve, BoundaryState, Side, Trace};
use crate::error::{Error, Result};
use crate::model::{Cons, ModelForm, VesselParams};
use crate::roots::{damped_newton, roots_geometric, NewtonSettings};

/// Tolerance on the scaled residual of every returned coupling state.
pub const COUPLING_TOLERANCE: f64 = 1e-9;

/// Samples of the scalar scan in the one-to-one reduction.
const SCAN_SAMPLES: usize = 400;

/// Interior data of one edge end at a junction.
#[derive(Clone, Copy, Debug)]
pub struct EndTrace<'a> {
    pub trace: Trace,
    pub params: &'a VesselParams,
}

fn mean_area(ends: &[EndTrace]) -> f64 {
    ends.iter().map(|e| e.trace.u1.a).sum::<f64>() / ends.len() as f64
}

fn side_of(i: usize) -> Side {
    if i == 0 {
        Side::Right
    } else {
        Side::Left
    }
}

/// `G = V^Q - alpha/2 Q²/A + P(A)/rho` of a flow-form boundary state.
fn g_term(b: &BoundaryState, p: &VesselParams) -> f64 {
    b.v.q - 0.5 * p.alpha * b.u.q * b.u.q / b.u.a + p.pressure_antiderivative(b.u.a) / p.rho
}

fn total_pressure(u: Cons, form: ModelForm, p: &VesselParams) -> f64 {
    match form {
        ModelForm::Flow => p.total_pressure(u.a, u.q),
        ModelForm::Velocity => 0.5 * p.rho * u.q * u.q + p.pressure(u.a),
    }
}

/// Scaled residuals of the coupling conditions at the given boundary states,
/// ordered as mass, `V^A`, then per outgoing edge total pressure and the
/// second auxiliary condition.
pub fn junction_residuals(ends: &[EndTrace], states: &[BoundaryState], lambda: f64, form: ModelForm) -> Vec<f64> {
    let abar = mean_area(ends);
    let rho = ends[0].params.rho;
    let q_scale = lambda * abar;
    let p_scale = rho * lambda * lambda;
    let (bp, pp) = (&states[0], ends[0].params);
    let mut mass = form.mass_flux(bp.u);
    let mut va = bp.v.a;
    for b in &states[1..] {
        mass -= form.mass_flux(b.u);
        va -= b.v.a;
    }
    let mut r = vec![mass / q_scale, va / q_scale];
    let pt_p = total_pressure(bp.u, form, pp);
    for (e, b) in ends[1..].iter().zip(&states[1..]) {
        r.push((pt_p - total_pressure(b.u, form, e.params)) / p_scale);
        r.push(match form {
            ModelForm::Flow => (b.u.a / bp.u.a * g_term(bp, pp) - g_term(b, e.params)) / (lambda * lambda * abar),
            ModelForm::Velocity => (bp.v.q - b.v.q) / (lambda * lambda),
        });
    }
    r
}

fn max_abs(r: &[f64]) -> f64 {
    r.iter()
        .fold(0.0f64, |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) })
}

fn states_from(ends: &[EndTrace], us: &[Cons], lambda: f64) -> Vec<BoundaryState> {
    ends.iter()
        .zip(us)
        .enumerate()
        .map(|(i, (e, u))| lax_curve(side_of(i), &e.trace, *u, lambda))
        .collect()
}

fn check(ends: &[EndTrace], states: &[BoundaryState], lambda: f64, form: ModelForm) -> Result<f64> {
    if let Some(b) = states.iter().find(|b| !(b.u.a > 0.0) || !b.u.q.is_finite()) {
        return Err(Error::NoRoot(format!("inadmissible coupling state {:?}", b.u)));
    }
    let res = max_abs(&junction_residuals(ends, states, lambda, form));
    if !(res <= COUPLING_TOLERANCE) {
        return Err(Error::Residual {
            what: "coupling conditions",
            residual: res,
            tolerance: COUPLING_TOLERANCE,
        });
    }
    Ok(res)
}

/// Dimensionless L¹ distance of candidate states to the traces: areas
/// relative to the trace area, the second component additionally over
/// `lambda` (flow form) or relative to `lambda` alone (velocity form).
fn l1_to_traces(ends: &[EndTrace], us: &[Cons], lambda: f64, form: ModelForm) -> f64 {
    ends.iter()
        .zip(us)
        .map(|(e, u)| {
            let t = e.trace.u1;
            let q_scale = match form {
                ModelForm::Flow => lambda * t.a,
                ModelForm::Velocity => lambda,
            };
            (u.a - t.a).abs() / t.a + (u.q - t.q).abs() / q_scale
        })
        .sum()
}

fn validate_traces(ends: &[EndTrace]) -> Result<()> {
    for e in ends {
        if !(e.trace.u1.a > 0.0) || !e.trace.u1.q.is_finite() || !e.trace.v1.a.is_finite() || !e.trace.v1.q.is_finite()
        {
            return Err(Error::domain(format!("inadmissible junction trace {:?}", e.trace.u1)));
        }
    }
    Ok(())
}

/// One-to-one coupling in flow form.
///
/// For `alpha = 1` the `V^A` condition gives `A_L` as an affine function of
/// `A_R`, the `V^Q` condition a quadratic in `Q_R = Q_L`, and total-pressure
/// continuity a scalar equation in `A_R`. All roots of the scalar equation on
/// both quadratic branches are collected and the one closest to the traces
/// in scaled L¹ is returned. Other values of `alpha` use [`couple_newton`].
pub fn couple_one_to_one(inc: &EndTrace, out: &EndTrace, lambda: f64) -> Result<[BoundaryState; 2]> {
    let ends = [*inc, *out];
    validate_traces(&ends)?;
    if inc.params.alpha != 1.0 || out.params.alpha != 1.0 {
        let s = couple_newton::<4>(&ends, lambda)?;
        return Ok([s[0], s[1]]);
    }
    let (pi, pii) = (inc.params, out.params);
    let (un, vn) = (inc.trace.u1, inc.trace.v1);
    let (u1, v1) = (out.trace.u1, out.trace.v1);
    let a_sum = (vn.a - v1.a) / lambda + un.a + u1.a;
    let a_left = |r: f64| a_sum - r;
    // Coefficients of the quadratic in Q_R for a given A_R.
    let coeffs = |r: f64| {
        let l = a_left(r);
        let ratio = r / l;
        let a = 0.5 * (1.0 / r - ratio / l);
        let b = lambda * (1.0 + ratio);
        let c = ratio * (v1.q - lambda * u1.q)
            + (ratio * pii.pressure_antiderivative(l) - pi.pressure_antiderivative(r)) / pi.rho
            - vn.q
            - lambda * un.q;
        (a, b, c)
    };
    // Branch 0 stays finite where the leading coefficient vanishes, branch 1 has a pole there.
    let branch = |r: f64, which: usize| -> f64 {
        let l = a_left(r);
        if !(r > 0.0 && l > 0.0) {
            return f64::NAN;
        }
        let (a, b, c) = coeffs(r);
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return f64::NAN;
        }
        let qq = -0.5 * (b + disc.sqrt());
        match which {
            0 => c / qq,
            _ => qq / a,
        }
    };
    let g = |r: f64, which: usize| -> f64 {
        let q = branch(r, which);
        let l = a_left(r);
        pi.total_pressure(r, q) - pii.total_pressure(l, q)
    };
    let lo = 0.25 * un.a.min(u1.a);
    let hi = (4.0 * un.a.max(u1.a)).min(a_sum * (1.0 - 1e-12));
    let mut best: Option<([Cons; 2], f64)> = None;
    let mut best_err = None;
    if hi > lo {
        for which in 0..2 {
            let f = |r: f64| g(r, which);
            for r in roots_geometric(&f, lo, hi, SCAN_SAMPLES) {
                let q = branch(r, which);
                let us = [Cons::new(r, q), Cons::new(a_left(r), q)];
                let states = states_from(&ends, &us, lambda);
                match check(&ends, &states, lambda, ModelForm::Flow) {
                    Ok(_) => {
                        let d = l1_to_traces(&ends, &us, lambda, ModelForm::Flow);
                        if best.is_none_or(|(_, bd)| d < bd) {
                            best = Some((us, d));
                        }
                    }
                    Err(e) => best_err = Some(e),
                }
            }
        }
    }
    match best {
        Some((us, _)) => {
            let s = states_from(&ends, &us, lambda);
            Ok([s[0], s[1]])
        }
        None => Err(best_err.unwrap_or_else(|| {
            Error::NoRoot(format!(
                "one-to-one coupling: no admissible solution for traces {un:?}, {u1:?}"
            ))
        })),
    }
}

/// One-to-one coupling of two velocity-form edges (`alpha = 1`).
///
/// The two auxiliary conditions fix `A_R + A_L` and `u_R + u_L`; mass
/// conservation then gives both velocities in terms of the areas, leaving a
/// scalar total-pressure equation in `A_R`.
pub fn couple_one_to_one_velocity(inc: &EndTrace, out: &EndTrace, lambda: f64) -> Result<[BoundaryState; 2]> {
    let ends = [*inc, *out];
    validate_traces(&ends)?;
    if inc.params.alpha != 1.0 || out.params.alpha != 1.0 {
        return Err(Error::domain("velocity-form coupling requires alpha = 1"));
    }
    let (pi, pii) = (inc.params, out.params);
    let (un, vn) = (inc.trace.u1, inc.trace.v1);
    let (u1, v1) = (out.trace.u1, out.trace.v1);
    let a0 = (vn.a - v1.a) / lambda + un.a + u1.a;
    let b0 = (vn.q - v1.q) / lambda + un.q + u1.q;
    if !(a0 > 0.0) {
        return Err(Error::NoRoot(format!(
            "velocity coupling: area sum {a0} is not positive"
        )));
    }
    let state = |r: f64| {
        let l = a0 - r;
        [Cons::new(r, b0 * l / a0), Cons::new(l, b0 * r / a0)]
    };
    let g = |r: f64| {
        let [ur, ul] = state(r);
        0.5 * pi.rho * ur.q * ur.q + pi.pressure(ur.a) - 0.5 * pii.rho * ul.q * ul.q - pii.pressure(ul.a)
    };
    let mut best: Option<([Cons; 2], f64)> = None;
    let mut best_err = None;
    for r in roots_geometric(&g, a0 * 1e-4, a0 * (1.0 - 1e-4), SCAN_SAMPLES) {
        let us = state(r);
        let states = states_from(&ends, &us, lambda);
        match check(&ends, &states, lambda, ModelForm::Velocity) {
            Ok(_) => {
                let d = l1_to_traces(&ends, &us, lambda, ModelForm::Velocity);
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((us, d));
                }
            }
            Err(e) => best_err = Some(e),
        }
    }
    match best {
        Some((us, _)) => {
            let s = states_from(&ends, &us, lambda);
            Ok([s[0], s[1]])
        }
        None => Err(best_err.unwrap_or_else(|| {
            Error::NoRoot(format!(
                "velocity coupling: no admissible solution for traces {un:?}, {u1:?}"
            ))
        })),
    }
}

/// One-to-two coupling by damped Newton on the six flow-form conditions.
pub fn couple_one_to_two(inc: &EndTrace, out1: &EndTrace, out2: &EndTrace, lambda: f64) -> Result<[BoundaryState; 3]> {
    let ends = [*inc, *out1, *out2];
    validate_traces(&ends)?;
    let s = couple_newton::<6>(&ends, lambda)?;
    Ok([s[0], s[1], s[2]])
}

/// Residual and analytic Jacobian of the flow-form coupling system with
/// unknowns `(A_p, Q_p, A_d1, Q_d1, ...)`.
fn newton_system(ends: &[EndTrace], x: &[f64], lambda: f64) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = x.len();
    let k = ends.len() - 1;
    if (0..=k).any(|i| !(x[2 * i] > 0.0) || !x[2 * i + 1].is_finite()) {
        return None;
    }
    let abar = mean_area(ends);
    let rho = ends[0].params.rho;
    let (sq, sp, sg) = (
        1.0 / (lambda * abar),
        1.0 / (rho * lambda * lambda),
        1.0 / (lambda * lambda * abar),
    );
    let mut r = vec![0.0; n];
    let mut j = vec![vec![0.0; n]; n];

    let us: Vec<Cons> = (0..=k).map(|i| Cons::new(x[2 * i], x[2 * i + 1])).collect();
    let states = states_from(ends, &us, lambda);

    // Mass and V^A balance.
    r[0] = us[0].q;
    r[1] = states[0].v.a;
    j[0][1] = 1.0;
    j[1][0] = -lambda;
    for d in 1..=k {
        r[0] -= us[d].q;
        r[1] -= states[d].v.a;
        j[0][2 * d + 1] = -1.0;
        j[1][2 * d] = -lambda;
    }
    r[0] *= sq;
    r[1] *= sq;
    for c in 0..n {
        j[0][c] *= sq;
        j[1][c] *= sq;
    }

    let pp = ends[0].params;
    let (ap, qp) = (us[0].a, us[0].q);
    let pt_p = pp.total_pressure(ap, qp);
    let dpt_p = (
        -pp.alpha * rho * qp * qp / (ap * ap * ap) + pp.pressure_slope(ap),
        pp.alpha * rho * qp / (ap * ap),
    );
    let gp = g_term(&states[0], pp);
    let dgp = (
        0.5 * pp.alpha * qp * qp / (ap * ap) + pp.pressure(ap) / pp.rho,
        -lambda - pp.alpha * qp / ap,
    );
    for d in 1..=k {
        let pd = ends[d].params;
        let (ad, qd) = (us[d].a, us[d].q);
        let row = 2 * d;
        r[row] = (pt_p - pd.total_pressure(ad, qd)) * sp;
        j[row][0] = dpt_p.0 * sp;
        j[row][1] = dpt_p.1 * sp;
        j[row][2 * d] = -(-pd.alpha * rho * qd * qd / (ad * ad * ad) + pd.pressure_slope(ad)) * sp;
        j[row][2 * d + 1] = -(pd.alpha * rho * qd / (ad * ad)) * sp;

        let gd = g_term(&states[d], pd);
        let dgd = (
            0.5 * pd.alpha * qd * qd / (ad * ad) + pd.pressure(ad) / pd.rho,
            lambda - pd.alpha * qd / ad,
        );
        let row = 2 * d + 1;
        r[row] = (ad / ap * gp - gd) * sg;
        j[row][0] = (-ad / (ap * ap) * gp + ad / ap * dgp.0) * sg;
        j[row][1] = (ad / ap * dgp.1) * sg;
        j[row][2 * d] = (gp / ap - dgd.0) * sg;
        j[row][2 * d + 1] = -dgd.1 * sg;
    }
    Some((r, j))
}

/// Flow-form coupling of `N / 2` ends (parent first) by damped Newton with
/// the traces as initial guess.
pub fn couple_newton<const N: usize>(ends: &[EndTrace], lambda: f64) -> Result<Vec<BoundaryState>> {
    if 2 * ends.len() != N || ends.len() < 2 {
        return Err(Error::domain(format!(
            "{} junction ends do not match {N} unknowns",
            ends.len()
        )));
    }
    let x0: [f64; N] = std::array::from_fn(|i| {
        let u = ends[i / 2].trace.u1;
        if i % 2 == 0 {
            u.a
        } else {
            u.q
        }
    });
    let system = |x: &[f64; N]| {
        newton_system(ends, x, lambda).map(|(r, j)| {
            let r: [f64; N] = std::array::from_fn(|i| r[i]);
            let j: [[f64; N]; N] = std::array::from_fn(|i| std::array::from_fn(|c| j[i][c]));
            (r, j)
        })
    };
    let (x, _) = damped_newton(system, x0, NewtonSettings::default())?;
    let us: Vec<Cons> = (0..N / 2).map(|i| Cons::new(x[2 * i], x[2 * i + 1])).collect();
    let states = states_from(ends, &us, lambda);
    check(ends, &states, lambda, ModelForm::Flow)?;
    Ok(states)
}

/// Coupling states for a junction of any supported kind, parent first.
pub fn solve_junction(ends: &[EndTrace], lambda: f64, form: ModelForm) -> Result<Vec<BoundaryState>> {
    match (ends.len(), form) {
        (2, ModelForm::Flow) => Ok(couple_one_to_one(&ends[0], &ends[1], lambda)?.to_vec()),
        (2, ModelForm::Velocity) => Ok(couple_one_to_one_velocity(&ends[0], &ends[1], lambda)?.to_vec()),
        (3, ModelForm::Flow) => Ok(couple_one_to_two(&ends[0], &ends[1], &ends[2], lambda)?.to_vec()),
        (n, f) => Err(Error::domain(format!("unsupported junction: {n} ends in {f:?} form"))),
    }
}

/// Coupling errors `(|Q_N - Q_1|, |pt_N - pt_1|)` of the traces next to a
/// one-to-one junction.
pub fn coupling_errors(
    incoming: Cons,
    inc_params: &VesselParams,
    outgoing: Cons,
    out_params: &VesselParams,
    form: ModelForm,
) -> (f64, f64) {
    let e1 = (form.mass_flux(incoming) - form.mass_flux(outgoing)).abs();
    let e2 = (total_pressure(incoming, form, inc_params) - total_pressure(outgoing, form, out_params)).abs();
    (e1, e2)
}

/// Net mass flux into the node through the boundary interfaces, relative to
/// `lambda` times the mean trace area.
pub fn node_flux_imbalance(ends: &[EndTrace], states: &[BoundaryState], lambda: f64) -> f64 {
    let flux = |i: usize| {
        let (t, b) = (&ends[i].trace, &states[i]);
        match side_of(i) {
            Side::Right => crate::scheme::lf_interface_flux(t.u1, b.u, t.v1, b.v, lambda).a,
            Side::Left => crate::scheme::lf_interface_flux(b.u, t.u1, b.v, t.v1, lambda).a,
        }
    };
    let mut net = flux(0);
    for i in 1..ends.len() {
        net -= flux(i);
    }
    net.abs() / (lambda * mean_area(ends))
}
