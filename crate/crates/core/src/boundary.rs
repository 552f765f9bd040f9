//! Boundary states of the relaxation system.
//!
//! A boundary state `(U_b, V_b)` is built from a boundary law for `U_b` and
//! the Lax-curve relation for `V_b`:
//! `V_L - V_1 = lambda (U_L - U_1)` on the left and
//! `V_R - V_N = lambda (U_N - U_R)` on the right.
//! The Lax-Friedrichs flux of the boundary interface then equals `V_b`.
//!
//! Boundary laws with a datum are closed by the non-reflecting relation
//! `l(U_b)ᵀ [k (U_t - U_b) + d] = 0`, which admits only an incoming wave
//! between the trace `U_t` and the boundary state. The first order closure
//! has `k = 1, d = 0`; the second order closure uses the three point
//! difference, `k = 3 lambda` and `d = V_1 - V_2` (left) or
//! `d = V_{N-1} - V_N` (right).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Cons, EdgeState, ModelForm, SchemeOrder, VesselParams};
use crate::physics::pressure_inverse;
use crate::roots::{quadratic_roots, roots_geometric};
use crate::signal::Signal;

/// Which end of an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// `+1` on the left (incoming waves move right), `-1` on the right.
    pub fn sigma(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }
}

/// Outer state of a boundary or coupling interface.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BoundaryState {
    pub u: Cons,
    pub v: Cons,
}

/// Interior data next to an edge end: the adjacent cell and the one behind it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Trace {
    pub u1: Cons,
    pub v1: Cons,
    pub u2: Cons,
    pub v2: Cons,
}

impl Trace {
    pub fn of(edge: &EdgeState, side: Side) -> Trace {
        let n = edge.n_cells();
        let (i1, i2) = match side {
            Side::Left => (0, 1),
            Side::Right => (n - 1, n - 2),
        };
        Trace {
            u1: edge.u[i1],
            v1: edge.v[i1],
            u2: edge.u[i2],
            v2: edge.v[i2],
        }
    }

    /// Trace of a single cell; the second cell is a copy.
    pub fn flat(u: Cons, v: Cons) -> Trace {
        Trace {
            u1: u,
            v1: v,
            u2: u,
            v2: v,
        }
    }
}

/// Wave speed used inside the non-reflecting relation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedConvention {
    /// `c² = beta sqrt(A) / (2 rho)`, as implied by the pressure law.
    #[default]
    Consistent,
    /// `c² = beta sqrt(A) / (2 rho A0)`.
    Literal,
}

/// Difference formula of the non-reflecting relation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Closure {
    #[default]
    First,
    /// Three point one-sided difference, for the MUSCL scheme.
    Second,
}

impl Closure {
    pub fn for_order(order: SchemeOrder) -> Closure {
        match order {
            SchemeOrder::First => Closure::First,
            SchemeOrder::Second => Closure::Second,
        }
    }
}

/// Settings shared by all boundary computations of one step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryContext {
    pub lambda: f64,
    pub form: ModelForm,
    pub closure: Closure,
    pub convention: SpeedConvention,
}

/// When a heart valve is open.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ValveSchedule {
    /// Open while the inlet pressure is positive.
    #[default]
    PressureSign,
    /// Open during `[offset + k period, offset + k period + open)`.
    Periodic {
        period: f64,
        open: f64,
        #[serde(default)]
        offset: f64,
    },
}

impl ValveSchedule {
    pub fn is_open(&self, t: f64, pressure: f64) -> bool {
        match self {
            ValveSchedule::PressureSign => pressure > 0.0,
            ValveSchedule::Periodic { period, open, offset } => (t - offset).rem_euclid(*period) < *open,
        }
    }
}

/// Boundary law at one edge end.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum BoundarySpec {
    /// Zero-gradient: the boundary state copies the trace.
    #[default]
    Neumann,
    /// Pure outflow closure without a datum; behaves like `Neumann`.
    NonReflecting,
    PrescribedPressure(Signal),
    PrescribedVelocity(Signal),
    PrescribedFlow(Signal),
    /// Closed wall with zero mass flux through the boundary interface.
    Reflecting,
    /// Prescribed pressure while the valve is open, zero velocity while closed.
    HeartValve {
        pressure: Signal,
        schedule: ValveSchedule,
    },
}

impl BoundarySpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            BoundarySpec::PrescribedPressure(s)
            | BoundarySpec::PrescribedVelocity(s)
            | BoundarySpec::PrescribedFlow(s) => s.validate(),
            BoundarySpec::HeartValve { pressure, schedule } => {
                pressure.validate()?;
                if let ValveSchedule::Periodic { period, open, offset } = schedule {
                    if !(*period > 0.0 && *open >= 0.0 && offset.is_finite() && period.is_finite()) {
                        return Err(Error::domain("valve schedule needs period > 0 and open >= 0"));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Computes the boundary state at time `t`.
    pub fn evaluate(
        &self,
        t: f64,
        side: Side,
        trace: &Trace,
        ctx: &BoundaryContext,
        params: &VesselParams,
    ) -> Result<BoundaryState> {
        match self {
            BoundarySpec::Neumann | BoundarySpec::NonReflecting => Ok(BoundaryState {
                u: trace.u1,
                v: trace.v1,
            }),
            BoundarySpec::PrescribedPressure(p) => boundary_from_pressure(p.eval(t), side, trace, ctx, params),
            BoundarySpec::PrescribedVelocity(u) => boundary_from_velocity(u.eval(t), side, trace, ctx, params),
            BoundarySpec::PrescribedFlow(q) => boundary_from_flow(q.eval(t), side, trace, ctx, params),
            BoundarySpec::Reflecting => reflecting_wall(side, trace, ctx),
            BoundarySpec::HeartValve { pressure, schedule } => {
                heart_valve(t, pressure, schedule, side, trace, ctx, params)
            }
        }
    }

    /// Mass flux imposed at time `t`, for ends that fix it; `None` otherwise.
    /// Used to close the viscoelastic term.
    pub fn imposed_mass_flux(&self, t: f64, state: &BoundaryState, form: ModelForm) -> Option<f64> {
        match self {
            BoundarySpec::PrescribedFlow(_) | BoundarySpec::PrescribedVelocity(_) | BoundarySpec::Reflecting => {
                Some(form.mass_flux(state.u))
            }
            BoundarySpec::HeartValve { pressure, schedule } if !schedule.is_open(t, pressure.eval(t)) => {
                Some(form.mass_flux(state.u))
            }
            _ => None,
        }
    }
}

/// Completes `U_b` with `V_b` from the Lax-curve relation.
pub fn lax_curve(side: Side, trace: &Trace, ub: Cons, lambda: f64) -> BoundaryState {
    let v = match side {
        Side::Left => trace.v1 + (ub - trace.u1) * lambda,
        Side::Right => trace.v1 + (trace.u1 - ub) * lambda,
    };
    BoundaryState { u: ub, v }
}

/// Relative violation of the Lax-curve relation.
pub fn lax_residual(side: Side, trace: &Trace, b: &BoundaryState, lambda: f64) -> f64 {
    let expected = lax_curve(side, trace, b.u, lambda).v;
    let scale = expected.max_abs().max(lambda * b.u.max_abs()).max(f64::MIN_POSITIVE);
    (b.v - expected).max_abs() / scale
}

fn relation_terms(side: Side, trace: &Trace, ctx: &BoundaryContext) -> (f64, Cons) {
    match ctx.closure {
        Closure::First => (1.0, Cons::ZERO),
        Closure::Second => (3.0 * ctx.lambda, (trace.v1 - trace.v2) * side.sigma()),
    }
}

fn wave_speed_sq(a: f64, params: &VesselParams, convention: SpeedConvention) -> f64 {
    match convention {
        SpeedConvention::Consistent => params.wave_speed_sq(a),
        SpeedConvention::Literal => params.wave_speed_sq(a) / params.a0,
    }
}

/// Slope `s(U_b)` of the relation `Δ second = s Δ A`: the characteristic
/// speed of the incoming family in flow form, `± c / A` in velocity form.
fn speed_factor(ub: Cons, side: Side, ctx: &BoundaryContext, params: &VesselParams) -> f64 {
    let c2 = wave_speed_sq(ub.a, params, ctx.convention);
    match ctx.form {
        ModelForm::Flow => {
            let vel = ub.q / ub.a;
            let alpha = params.alpha;
            alpha * vel + side.sigma() * (alpha * (alpha - 1.0) * vel * vel + c2).sqrt()
        }
        ModelForm::Velocity => side.sigma() * c2.sqrt() / ub.a,
    }
}

/// Residual of the non-reflecting relation at a candidate boundary state.
pub fn nonreflecting_residual(
    side: Side,
    trace: &Trace,
    ub: Cons,
    ctx: &BoundaryContext,
    params: &VesselParams,
) -> f64 {
    let (k, d) = relation_terms(side, trace, ctx);
    let lhs = k * (trace.u1.q - ub.q) + d.q;
    let rhs = speed_factor(ub, side, ctx, params) * (k * (trace.u1.a - ub.a) + d.a);
    lhs - rhs
}

/// Scale of the terms in [`nonreflecting_residual`], for relative checks.
pub fn nonreflecting_scale(side: Side, trace: &Trace, ub: Cons, ctx: &BoundaryContext, params: &VesselParams) -> f64 {
    let (k, d) = relation_terms(side, trace, ctx);
    let s = speed_factor(ub, side, ctx, params).abs();
    (k * (trace.u1.q.abs() + ub.q.abs()) + d.q.abs() + s * (k * (trace.u1.a + ub.a) + d.a.abs())).max(f64::MIN_POSITIVE)
}

/// Second component of the boundary state for a given area.
fn second_from_area(a_b: f64, side: Side, trace: &Trace, ctx: &BoundaryContext, params: &VesselParams) -> Result<f64> {
    let (k, d) = relation_terms(side, trace, ctx);
    let big_d = k * (trace.u1.a - a_b) + d.a;
    let r0 = k * trace.u1.q + d.q;
    let sigma = side.sigma();
    let c2 = wave_speed_sq(a_b, params, ctx.convention);
    let no_root = || {
        Error::NoRoot(format!(
            "non-reflecting relation has no admissible solution for A_b = {a_b}, trace {:?}",
            trace.u1
        ))
    };
    match ctx.form {
        ModelForm::Velocity => Ok((r0 - sigma * c2.sqrt() / a_b * big_d) / k),
        ModelForm::Flow if params.alpha == 1.0 => {
            let den = k + big_d / a_b;
            if den == 0.0 {
                return Err(no_root());
            }
            Ok((r0 - sigma * c2.sqrt() * big_d) / den)
        }
        ModelForm::Flow => {
            // (r0 - Q m)² = D² (alpha (alpha - 1) Q²/A² + c²) with m = k + alpha D / A,
            // keeping roots where r0 - Q m has the sign of sigma D.
            let alpha = params.alpha;
            let m = k + alpha * big_d / a_b;
            let aa = m * m - big_d * big_d * alpha * (alpha - 1.0) / (a_b * a_b);
            let bb = -2.0 * r0 * m;
            let cc = r0 * r0 - big_d * big_d * c2;
            let scale = r0.abs().max(m.abs() * trace.u1.q.abs()).max(big_d.abs() * c2.sqrt());
            quadratic_roots(aa, bb, cc)
                .into_iter()
                .filter(|&q| {
                    let lhs = r0 - q * m;
                    lhs.abs() <= 1e-12 * scale || lhs.signum() == (sigma * big_d).signum()
                })
                .min_by(|x, y| (x - trace.u1.q).abs().total_cmp(&(y - trace.u1.q).abs()))
                .ok_or_else(no_root)
        }
    }
}

/// Boundary state for a prescribed pressure `p_b`.
pub fn boundary_from_pressure(
    p_b: f64,
    side: Side,
    trace: &Trace,
    ctx: &BoundaryContext,
    params: &VesselParams,
) -> Result<BoundaryState> {
    let a_b = pressure_inverse(p_b, params)?;
    let second = second_from_area(a_b, side, trace, ctx, params)?;
    Ok(lax_curve(side, trace, Cons::new(a_b, second), ctx.lambda))
}

/// Solves the relation for `A_b` when the second component is a given
/// function of `A_b`; returns the positive root closest to the trace.
fn solve_for_area(
    second: impl Fn(f64) -> f64,
    side: Side,
    trace: &Trace,
    ctx: &BoundaryContext,
    params: &VesselParams,
    what: &str,
) -> Result<f64> {
    let at = trace.u1.a;
    let g = |a: f64| nonreflecting_residual(side, trace, Cons::new(a, second(a)), ctx, params);
    if g(at) == 0.0 {
        return Ok(at);
    }
    let mut roots = roots_geometric(&g, at / 64.0, at, 160);
    roots.extend(roots_geometric(&g, at, at * 64.0, 160));
    roots
        .into_iter()
        .filter(|a| *a > 0.0)
        .min_by(|x, y| (x - at).abs().total_cmp(&(y - at).abs()))
        .ok_or_else(|| Error::NoRoot(format!("no positive boundary area for {what}, trace {:?}", trace.u1)))
}

/// Boundary state for a prescribed mean velocity `u_b`.
pub fn boundary_from_velocity(
    u_b: f64,
    side: Side,
    trace: &Trace,
    ctx: &BoundaryContext,
    params: &VesselParams,
) -> Result<BoundaryState> {
    if !u_b.is_finite() {
        return Err(Error::domain(format!("prescribed velocity must be finite, got {u_b}")));
    }
    let form = ctx.form;
    let second = move |a: f64| match form {
        ModelForm::Flow => a * u_b,
        ModelForm::Velocity => u_b,
    };
    let a_b = solve_for_area(second, side, trace, ctx, params, &format!("velocity {u_b}"))?;
    Ok(lax_curve(side, trace, Cons::new(a_b, second(a_b)), ctx.lambda))
}

/// Boundary state for a prescribed mass flux `q_b`.
pub fn boundary_from_flow(
    q_b: f64,
    side: Side,
    trace: &Trace,
    ctx: &BoundaryContext,
    params: &VesselParams,
) -> Result<BoundaryState> {
    if !q_b.is_finite() {
        return Err(Error::domain(format!("prescribed mass flux must be finite, got {q_b}")));
    }
    let form = ctx.form;
    let second = move |a: f64| match form {
        ModelForm::Flow => q_b,
        ModelForm::Velocity => q_b / a,
    };
    let a_b = solve_for_area(second, side, trace, ctx, params, &format!("mass flux {q_b}"))?;
    Ok(lax_curve(side, trace, Cons::new(a_b, second(a_b)), ctx.lambda))
}

/// Closed wall: zero mass flux and `V_b^A = 0`, so the Lax-curve relation
/// fixes `A_b` and the boundary interface carries no mass.
pub fn reflecting_wall(side: Side, trace: &Trace, ctx: &BoundaryContext) -> Result<BoundaryState> {
    let lambda = ctx.lambda;
    let a_b = trace.u1.a - side.sigma() * trace.v1.a / lambda;
    if !(a_b > 0.0) {
        return Err(Error::NoRoot(format!(
            "reflecting wall needs a positive area, got {a_b} from trace {:?}",
            trace.u1
        )));
    }
    let mut b = lax_curve(side, trace, Cons::new(a_b, 0.0), lambda);
    b.v.a = 0.0;
    Ok(b)
}

/// Heart-valve inlet: prescribed pressure while open, zero velocity while closed.
pub fn heart_valve(
    t: f64,
    pressure: &Signal,
    schedule: &ValveSchedule,
    side: Side,
    trace: &Trace,
    ctx: &BoundaryContext,
    params: &VesselParams,
) -> Result<BoundaryState> {
    let p = pressure.eval(t);
    if schedule.is_open(t, p) {
        boundary_from_pressure(p, side, trace, ctx, params)
    } else {
        boundary_from_velocity(0.0, side, trace, ctx, params)
    }
}

fn first_order_flow() -> BoundaryContext {
    BoundaryContext {
        lambda: 1.0,
        form: ModelForm::Flow,
        closure: Closure::First,
        convention: SpeedConvention::Consistent,
    }
}

/// Boundary state `U_L = (A_L, Q_L)` left of trace `u1` for an imposed area.
pub fn nonreflecting_left(u1: Cons, a_l: f64, params: &VesselParams) -> Result<Cons> {
    nonreflecting_end(Side::Left, u1, a_l, params)
}

/// Boundary state `U_R = (A_R, Q_R)` right of trace `u_n` for an imposed area.
pub fn nonreflecting_right(u_n: Cons, a_r: f64, params: &VesselParams) -> Result<Cons> {
    nonreflecting_end(Side::Right, u_n, a_r, params)
}

fn nonreflecting_end(side: Side, u: Cons, a_b: f64, params: &VesselParams) -> Result<Cons> {
    if !(u.a > 0.0 && a_b > 0.0) {
        return Err(Error::domain(format!("areas must be positive, got {} and {a_b}", u.a)));
    }
    let trace = Trace::flat(u, params.flux(ModelForm::Flow, u));
    let q = second_from_area(a_b, side, &trace, &first_order_flow(), params)?;
    Ok(Cons::new(a_b, q))
}

/// Second order non-reflecting state for an imposed pressure.
pub fn nonreflecting_order2(
    p_b: f64,
    side: Side,
    trace: &Trace,
    lambda: f64,
    form: ModelForm,
    params: &VesselParams,
) -> Result<BoundaryState> {
    let ctx = BoundaryContext {
        lambda,
        form,
        closure: Closure::Second,
        convention: SpeedConvention::Consistent,
    };
    boundary_from_pressure(p_b, side, trace, &ctx, params)
}
