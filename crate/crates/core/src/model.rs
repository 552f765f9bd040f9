//! Domain types shared by all solver modules.
//!
//! All quantities are in CGS units (cm, g, s, dyne).

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// A pair of conserved (or auxiliary) quantities.
///
/// `a` is the section area (or its flux component), `q` the second component:
/// the mass flux `Q` in flow form, the mean velocity `u` in velocity form.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Cons {
    pub a: f64,
    pub q: f64,
}

impl Cons {
    pub const ZERO: Cons = Cons { a: 0.0, q: 0.0 };

    pub const fn new(a: f64, q: f64) -> Self {
        Cons { a, q }
    }

    pub fn abs_sum(self) -> f64 {
        self.a.abs() + self.q.abs()
    }

    pub fn max_abs(self) -> f64 {
        self.a.abs().max(self.q.abs())
    }

    pub fn map(self, f: impl Fn(f64) -> f64) -> Self {
        Cons::new(f(self.a), f(self.q))
    }

    pub fn zip(self, other: Cons, f: impl Fn(f64, f64) -> f64) -> Self {
        Cons::new(f(self.a, other.a), f(self.q, other.q))
    }
}

impl Add for Cons {
    type Output = Cons;
    fn add(self, rhs: Cons) -> Cons {
        Cons::new(self.a + rhs.a, self.q + rhs.q)
    }
}

impl Sub for Cons {
    type Output = Cons;
    fn sub(self, rhs: Cons) -> Cons {
        Cons::new(self.a - rhs.a, self.q - rhs.q)
    }
}

impl Mul<f64> for Cons {
    type Output = Cons;
    fn mul(self, rhs: f64) -> Cons {
        Cons::new(self.a * rhs, self.q * rhs)
    }
}

impl Mul<Cons> for f64 {
    type Output = Cons;
    fn mul(self, rhs: Cons) -> Cons {
        rhs * self
    }
}

impl Neg for Cons {
    type Output = Cons;
    fn neg(self) -> Cons {
        Cons::new(-self.a, -self.q)
    }
}

impl AddAssign for Cons {
    fn add_assign(&mut self, rhs: Cons) {
        self.a += rhs.a;
        self.q += rhs.q;
    }
}

impl SubAssign for Cons {
    fn sub_assign(&mut self, rhs: Cons) {
        self.a -= rhs.a;
        self.q -= rhs.q;
    }
}

/// Which pair of variables an edge evolves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ModelForm {
    /// `U = (A, Q)`.
    #[default]
    Flow,
    /// `U = (A, u)`, conservative only for `alpha = 1`.
    Velocity,
}

/// Raw inputs for [`make_vessel_params`].
#[derive(Clone, Debug, PartialEq)]
pub struct VesselInputs {
    /// Young modulus [dyne/cm²].
    pub young_modulus: f64,
    /// Wall thickness [cm].
    pub wall_thickness: f64,
    /// Poisson ratio.
    pub poisson_ratio: f64,
    /// Reference section area [cm²].
    pub a0: f64,
    /// Blood density [g/cm³].
    pub rho: f64,
    /// Momentum-flux correction coefficient.
    pub alpha: f64,
    /// Dynamic viscosity [poise].
    pub mu: f64,
    /// Viscoelasticity coefficient [dyne·s/cm].
    pub gamma: f64,
    /// External pressure [dyne/cm²].
    pub p_ext: f64,
    /// Vessel length [cm].
    pub length: f64,
}

/// Per-edge physical and wall parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct VesselParams {
    pub a0: f64,
    pub h0: f64,
    pub young_modulus: f64,
    pub nu: f64,
    /// Wall stiffness `sqrt(pi) h0 E / ((1 - nu²) A0)` [dyne/cm³].
    pub beta: f64,
    pub rho: f64,
    pub alpha: f64,
    pub mu: f64,
    /// Velocity profile exponent `(2 - alpha) / (alpha - 1)`; absent for a flat profile.
    pub psi: Option<f64>,
    pub gamma: f64,
    pub p_ext: f64,
    pub length: f64,
}

/// Wall stiffness from the wall properties.
pub fn wall_stiffness(young_modulus: f64, h0: f64, nu: f64, a0: f64) -> f64 {
    std::f64::consts::PI.sqrt() * h0 * young_modulus / ((1.0 - nu * nu) * a0)
}

/// Profile exponent for a momentum-flux correction coefficient in (1, 2).
pub fn psi_from_alpha(alpha: f64) -> Option<f64> {
    (alpha > 1.0).then(|| (2.0 - alpha) / (alpha - 1.0))
}

/// Inverse of [`psi_from_alpha`].
pub fn alpha_from_psi(psi: f64) -> f64 {
    (psi + 2.0) / (psi + 1.0)
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain(msg()))
    }
}

/// Builds validated vessel parameters, deriving `beta` and `psi`.
pub fn make_vessel_params(inp: &VesselInputs) -> Result<VesselParams> {
    let finite = [
        inp.young_modulus,
        inp.wall_thickness,
        inp.poisson_ratio,
        inp.a0,
        inp.rho,
        inp.alpha,
        inp.mu,
        inp.gamma,
        inp.p_ext,
        inp.length,
    ]
    .iter()
    .all(|v| v.is_finite());
    require(finite, || "vessel parameters must be finite".into())?;
    require(inp.a0 > 0.0, || format!("A0 must be positive, got {}", inp.a0))?;
    require(inp.rho > 0.0, || format!("rho must be positive, got {}", inp.rho))?;
    require(inp.length > 0.0, || {
        format!("length must be positive, got {}", inp.length)
    })?;
    require((1.0..2.0).contains(&inp.alpha), || {
        format!("alpha must lie in [1, 2), got {}", inp.alpha)
    })?;
    require(inp.gamma >= 0.0, || format!("gamma must be >= 0, got {}", inp.gamma))?;
    require(inp.mu >= 0.0, || format!("mu must be >= 0, got {}", inp.mu))?;
    require((0.0..1.0).contains(&inp.poisson_ratio), || {
        format!("nu must lie in [0, 1), got {}", inp.poisson_ratio)
    })?;
    require(inp.wall_thickness >= 0.0, || "h0 must be >= 0".into())?;
    require(inp.young_modulus >= 0.0, || "E must be >= 0".into())?;

    Ok(VesselParams {
        a0: inp.a0,
        h0: inp.wall_thickness,
        young_modulus: inp.young_modulus,
        nu: inp.poisson_ratio,
        beta: wall_stiffness(inp.young_modulus, inp.wall_thickness, inp.poisson_ratio, inp.a0),
        rho: inp.rho,
        alpha: inp.alpha,
        mu: inp.mu,
        psi: psi_from_alpha(inp.alpha),
        gamma: inp.gamma,
        p_ext: inp.p_ext,
        length: inp.length,
    })
}

/// Uniform partition of one edge into cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub n_cells: usize,
    pub dx: f64,
    pub x_left: f64,
}

impl Grid {
    pub fn new(x_left: f64, length: f64, n_cells: usize) -> Result<Self> {
        require(n_cells >= 2, || format!("need at least 2 cells, got {n_cells}"))?;
        require(length > 0.0 && length.is_finite(), || {
            format!("grid length must be positive, got {length}")
        })?;
        require(x_left.is_finite(), || "x_left must be finite".into())?;
        Ok(Grid {
            n_cells,
            dx: length / n_cells as f64,
            x_left,
        })
    }

    pub fn center(&self, j: usize) -> f64 {
        self.x_left + (j as f64 + 0.5) * self.dx
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|j| self.center(j)).collect()
    }

    pub fn length(&self) -> f64 {
        self.dx * self.n_cells as f64
    }
}

/// Cell averages of one edge.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeState {
    /// Conserved pair per cell.
    pub u: Vec<Cons>,
    /// Auxiliary relaxation variable per cell.
    pub v: Vec<Cons>,
    pub t: f64,
    pub form: ModelForm,
}

impl EdgeState {
    /// State with `V` initialised to zero; callers close it with the flux.
    pub fn new(u: Vec<Cons>, form: ModelForm, params: &VesselParams) -> Result<Self> {
        require(u.len() >= 2, || "edge state needs at least 2 cells".into())?;
        if form == ModelForm::Velocity && params.alpha != 1.0 {
            return Err(Error::domain(format!(
                "velocity form requires alpha = 1, got {}",
                params.alpha
            )));
        }
        if let Some((j, c)) = u.iter().enumerate().find(|(_, c)| !(c.a > 0.0) || !c.q.is_finite()) {
            return Err(Error::domain(format!(
                "initial state in cell {j} is inadmissible: A = {}, second component = {}",
                c.a, c.q
            )));
        }
        let v = vec![Cons::ZERO; u.len()];
        let mut s = EdgeState { u, v, t: 0.0, form };
        s.close_relaxation(params);
        Ok(s)
    }

    pub fn n_cells(&self) -> usize {
        self.u.len()
    }

    /// Sets `V = F(U)` in every cell.
    pub fn close_relaxation(&mut self, params: &VesselParams) {
        for (v, u) in self.v.iter_mut().zip(&self.u) {
            *v = params.flux(self.form, *u);
        }
    }

    /// Mass flux `Q` in each cell regardless of form.
    pub fn mass_flux(&self) -> Vec<f64> {
        self.u.iter().map(|c| self.form.mass_flux(*c)).collect()
    }
}

impl ModelForm {
    pub fn mass_flux(self, u: Cons) -> f64 {
        match self {
            ModelForm::Flow => u.q,
            ModelForm::Velocity => u.a * u.q,
        }
    }

    pub fn velocity(self, u: Cons) -> f64 {
        match self {
            ModelForm::Flow => u.q / u.a,
            ModelForm::Velocity => u.q,
        }
    }
}

/// How the relaxation speed is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum LambdaPolicy {
    /// A single value for the whole run; checked against the bound every step.
    FixedGlobal(f64),
    /// Recomputed each step as the maximal characteristic speed over the network.
    #[default]
    MinimalPerStep,
}

/// Spatial order of the scheme.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SchemeOrder {
    #[default]
    First,
    /// MUSCL reconstruction with the minmod limiter.
    Second,
}

impl SchemeOrder {
    pub fn from_int(order: u32) -> Result<Self> {
        match order {
            1 => Ok(SchemeOrder::First),
            2 => Ok(SchemeOrder::Second),
            o => Err(Error::domain(format!("scheme order must be 1 or 2, got {o}"))),
        }
    }
}

/// Global run settings.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSettings {
    pub cfl: f64,
    pub lambda_policy: LambdaPolicy,
    pub t_end: f64,
    pub order: SchemeOrder,
    /// Relaxation rate; `0` selects the limit scheme.
    pub epsilon: f64,
    /// Snapshot times in `[0, t_end]`; `t_end` is always recorded.
    pub snapshots: Vec<f64>,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            cfl: 1.0,
            lambda_policy: LambdaPolicy::MinimalPerStep,
            t_end: 0.0,
            order: SchemeOrder::First,
            epsilon: 0.0,
            snapshots: Vec::new(),
        }
    }
}

impl RunSettings {
    pub fn validate(&self) -> Result<()> {
        require(self.cfl > 0.0 && self.cfl <= 1.0, || {
            format!("CFL must lie in (0, 1], got {}", self.cfl)
        })?;
        require(self.t_end >= 0.0 && self.t_end.is_finite(), || {
            format!("t_end must be finite and >= 0, got {}", self.t_end)
        })?;
        require(self.epsilon >= 0.0 && self.epsilon.is_finite(), || {
            format!("epsilon must be finite and >= 0, got {}", self.epsilon)
        })?;
        if let LambdaPolicy::FixedGlobal(l) = self.lambda_policy {
            require(l > 0.0 && l.is_finite(), || {
                format!("fixed lambda must be positive, got {l}")
            })?;
        }
        for &s in &self.snapshots {
            require(s >= 0.0 && s <= self.t_end, || {
                format!("snapshot time {s} outside [0, {}]", self.t_end)
            })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn aorta() -> VesselInputs {
        VesselInputs {
            young_modulus: 2.43e6,
            wall_thickness: 0.26,
            poisson_ratio: 0.5,
            a0: 6.6,
            rho: 1.06,
            alpha: 1.0,
            mu: 0.0,
            gamma: 0.0,
            p_ext: 0.0,
            length: 400.0,
        }
    }

    #[test]
    fn beta_for_reference_vessel() {
        let p = make_vessel_params(&aorta()).unwrap();
        let expected = std::f64::consts::PI.sqrt() * 0.26 * 2.43e6 / (0.75 * 6.6);
        assert!((p.beta - expected).abs() / expected < 1e-12);
        assert!((p.beta - 2.2623e5).abs() < 1.0);
        assert_eq!(p.psi, None);
    }

    #[test]
    fn psi_nine_for_alpha_one_point_one() {
        let p = make_vessel_params(&VesselInputs { alpha: 1.1, ..aorta() }).unwrap();
        assert!((p.psi.unwrap() - 9.0).abs() < 1e-12);
    }

    #[test]
    fn zero_wall_gives_zero_beta() {
        let p = make_vessel_params(&VesselInputs {
            wall_thickness: 0.0,
            poisson_ratio: 0.0,
            young_modulus: 123.0,
            ..aorta()
        })
        .unwrap();
        assert_eq!(p.beta, 0.0);
    }

    #[test]
    fn rejects_bad_ranges() {
        for bad in [
            VesselInputs { a0: 0.0, ..aorta() },
            VesselInputs { rho: -1.0, ..aorta() },
            VesselInputs { length: 0.0, ..aorta() },
            VesselInputs { alpha: 2.0, ..aorta() },
            VesselInputs { alpha: 0.99, ..aorta() },
            VesselInputs { gamma: -1.0, ..aorta() },
            VesselInputs {
                poisson_ratio: 1.0,
                ..aorta()
            },
        ] {
            assert!(matches!(make_vessel_params(&bad), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn velocity_form_needs_flat_profile() {
        let p = make_vessel_params(&VesselInputs { alpha: 1.1, ..aorta() }).unwrap();
        let u = vec![Cons::new(6.6, 0.0); 4];
        assert!(EdgeState::new(u.clone(), ModelForm::Velocity, &p).is_err());
        assert!(EdgeState::new(u, ModelForm::Flow, &p).is_ok());
    }

    #[test]
    fn grid_geometry() {
        let g = Grid::new(-400.0, 400.0, 800).unwrap();
        assert_eq!(g.dx, 0.5);
        assert_eq!(g.center(0), -399.75);
        assert!(Grid::new(0.0, 1.0, 1).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn beta_round_trip(e in 1e5f64..1e7, h in 0.01f64..1.0, nu in 0.0f64..0.9, a0 in 0.1f64..20.0) {
                let p = make_vessel_params(&VesselInputs {
                    young_modulus: e, wall_thickness: h, poisson_ratio: nu, a0, ..aorta()
                }).unwrap();
                let closed = std::f64::consts::PI.sqrt() * h * e / ((1.0 - nu * nu) * a0);
                prop_assert!((p.beta - closed).abs() <= 1e-12 * closed);
            }

            #[test]
            fn psi_alpha_inverse(alpha in 1.0001f64..1.9999) {
                let psi = psi_from_alpha(alpha).unwrap();
                prop_assert!((alpha_from_psi(psi) - alpha).abs() < 1e-12);
            }
        }
    }
}
