//! Closed-form physical laws of the reduced model.
//!
//! The methods on [`VesselParams`] assume `A > 0` and are used on hot paths.
//! The free functions check their domain and are the public entry points.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{Cons, ModelForm, VesselParams};

/// Profile exponent used by the viscous source when the profile is flat
/// (`alpha = 1`): the Poiseuille profile.
const FLAT_PROFILE_PSI: f64 = 2.0;

impl VesselParams {
    /// Algebraic pressure law `p = P_ext + beta (sqrt(A) - sqrt(A0))`.
    #[inline]
    pub fn pressure(&self, a: f64) -> f64 {
        self.p_ext + self.beta * (a.sqrt() - self.a0.sqrt())
    }

    /// `dp/dA`.
    #[inline]
    pub fn pressure_slope(&self, a: f64) -> f64 {
        0.5 * self.beta / a.sqrt()
    }

    /// `P(A) = A0 P_ext + int_{A0}^{A} p(s) ds`.
    #[inline]
    pub fn pressure_antiderivative(&self, a: f64) -> f64 {
        let sa0 = self.a0.sqrt();
        self.a0 * self.p_ext
            + self.p_ext * (a - self.a0)
            + self.beta * ((2.0 / 3.0) * (a * a.sqrt() - self.a0 * sa0) - sa0 * (a - self.a0))
    }

    /// Square of the wave speed, `A p'(A) / rho = beta sqrt(A) / (2 rho)`.
    #[inline]
    pub fn wave_speed_sq(&self, a: f64) -> f64 {
        self.beta * a.sqrt() / (2.0 * self.rho)
    }

    #[inline]
    pub fn wave_speed(&self, a: f64) -> f64 {
        self.wave_speed_sq(a).sqrt()
    }

    /// Total pressure `alpha rho/2 (Q/A)² + p(A)` for a flow-form state.
    #[inline]
    pub fn total_pressure(&self, a: f64, q: f64) -> f64 {
        let u = q / a;
        0.5 * self.alpha * self.rho * u * u + self.pressure(a)
    }

    /// Physical flux of the selected model form.
    #[inline]
    pub fn flux(&self, form: ModelForm, u: Cons) -> Cons {
        match form {
            ModelForm::Flow => Cons::new(
                u.q,
                self.alpha * u.q * u.q / u.a
                    + (u.a * self.pressure(u.a) - self.pressure_antiderivative(u.a)) / self.rho,
            ),
            ModelForm::Velocity => Cons::new(u.a * u.q, 0.5 * u.q * u.q + self.pressure(u.a) / self.rho),
        }
    }

    /// Viscous friction `S_v(A, Q) = -2 pi mu (psi + 2) Q / A`.
    #[inline]
    pub fn viscous_friction(&self, a: f64, q: f64) -> f64 {
        if self.mu == 0.0 {
            return 0.0;
        }
        let psi = self.psi.unwrap_or(FLAT_PROFILE_PSI);
        -2.0 * PI * self.mu * (psi + 2.0) * q / a
    }

    /// Source vector `S(U)` of the selected model form.
    #[inline]
    pub fn source(&self, form: ModelForm, u: Cons) -> Cons {
        match form {
            ModelForm::Flow => Cons::new(0.0, self.viscous_friction(u.a, u.q)),
            ModelForm::Velocity => Cons::new(0.0, self.viscous_friction(u.a, u.a * u.q) / u.a),
        }
    }

    /// Characteristic speeds `(lambda_-, lambda_+)`.
    #[inline]
    pub fn char_speeds(&self, form: ModelForm, u: Cons) -> (f64, f64) {
        let c2 = self.wave_speed_sq(u.a);
        match form {
            ModelForm::Flow => {
                let vel = u.q / u.a;
                let root = (self.alpha * (self.alpha - 1.0) * vel * vel + c2).sqrt();
                (self.alpha * vel - root, self.alpha * vel + root)
            }
            ModelForm::Velocity => {
                let c = c2.sqrt();
                (u.q - c, u.q + c)
            }
        }
    }

    /// Largest characteristic speed magnitude.
    #[inline]
    pub fn max_speed(&self, form: ModelForm, u: Cons) -> f64 {
        let (lm, lp) = self.char_speeds(form, u);
        lm.abs().max(lp.abs())
    }
}

fn check_area(a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("section area must be positive, got {a}")))
    }
}

pub fn pressure(a: f64, params: &VesselParams) -> Result<f64> {
    check_area(a)?;
    Ok(params.pressure(a))
}

/// Section area producing pressure `p`.
pub fn pressure_inverse(p: f64, params: &VesselParams) -> Result<f64> {
    if params.beta <= 0.0 {
        return Err(Error::domain("pressure law is not invertible for beta = 0"));
    }
    let root = (p - params.p_ext) / params.beta + params.a0.sqrt();
    if !(root > 0.0) || !root.is_finite() {
        return Err(Error::domain(format!(
            "pressure {p} lies below the collapse pressure {}",
            params.p_ext - params.beta * params.a0.sqrt()
        )));
    }
    Ok(root * root)
}

pub fn pressure_antiderivative(a: f64, params: &VesselParams) -> Result<f64> {
    check_area(a)?;
    Ok(params.pressure_antiderivative(a))
}

/// Flux `(Q, alpha Q²/A + (A p - P)/rho)` of the flow form.
pub fn flux_flow(u: Cons, params: &VesselParams) -> Result<Cons> {
    check_area(u.a)?;
    Ok(params.flux(ModelForm::Flow, u))
}

/// Flux `(A u, u²/2 + p/rho)` of the velocity form.
pub fn flux_velocity(u: Cons, params: &VesselParams) -> Result<Cons> {
    check_area(u.a)?;
    if params.alpha != 1.0 {
        return Err(Error::domain(format!(
            "velocity-form flux is conservative only for alpha = 1, got {}",
            params.alpha
        )));
    }
    Ok(params.flux(ModelForm::Velocity, u))
}

/// Viscous source for a flow-form state `(A, Q)`.
pub fn viscous_source(u: Cons, params: &VesselParams) -> Result<f64> {
    check_area(u.a)?;
    Ok(params.viscous_friction(u.a, u.q))
}

pub fn char_speeds(u: Cons, form: ModelForm, params: &VesselParams) -> Result<(f64, f64)> {
    check_area(u.a)?;
    Ok(params.char_speeds(form, u))
}

/// Minimal relaxation speed satisfying the subcharacteristic condition for
/// every state in the collection.
pub fn lambda_bound<'a, I>(states: I) -> Result<f64>
where
    I: IntoIterator<Item = (Cons, ModelForm, &'a VesselParams)>,
{
    let mut lambda: f64 = 0.0;
    let mut any = false;
    for (u, form, params) in states {
        check_area(u.a)?;
        lambda = lambda.max(params.max_speed(form, u));
        any = true;
    }
    if !any {
        return Err(Error::domain("lambda bound over an empty state collection"));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::domain(format!("degenerate relaxation speed {lambda}")));
    }
    Ok(lambda)
}
