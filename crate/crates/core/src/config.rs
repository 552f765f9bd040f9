//! TOML network configuration.
//!
//! ```toml
//! [run]
//! t_end = 0.1
//! order = 1
//!
//! [[edge]]
//! id = "aorta"
//! length = 400.0
//! cells = 800
//! a0 = 6.6
//! left = { kind = "pressure", signal = { kind = "sine", amplitude = 6e4, frequency = 2.5 } }
//! right = { kind = "non_reflecting" }
//! ```
//!
//! All quantities are CGS. Wall and blood parameters default to the reference
//! vessel (`E = 2.43e6`, `h0 = 0.26`, `nu = 0.5`, `rho = 1.06`, `alpha = 1`).

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::boundary::{BoundarySpec, Closure, Side, SpeedConvention, ValveSchedule};
use crate::error::{Error, Result};
use crate::model::{
    make_vessel_params, Cons, EdgeState, Grid, LambdaPolicy, ModelForm, RunSettings, SchemeOrder, VesselInputs,
};
use crate::network::{Edge, EndBinding, Endpoint, Junction, Network, SolverOptions};
use crate::signal::Signal;

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub run: RunConfig,
    #[serde(rename = "edge")]
    pub edges: Vec<EdgeConfig>,
    #[serde(rename = "junction", default)]
    pub junctions: Vec<JunctionConfig>,
}

/// `"minimal"` or a fixed positive value.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum LambdaConfig {
    Keyword(String),
    Fixed(f64),
}

impl Default for LambdaConfig {
    fn default() -> Self {
        LambdaConfig::Keyword("minimal".into())
    }
}

fn default_cfl() -> f64 {
    1.0
}

fn default_order() -> u32 {
    1
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_order")]
    pub order: u32,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub lambda: LambdaConfig,
    #[serde(default)]
    pub snapshots: Vec<f64>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub speed_convention: SpeedConvention,
    /// Overrides the closure order implied by `order`.
    pub closure: Option<Closure>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case")]
#[derive(Default)]
pub enum FormConfig {
    #[default]
    Flow,
    Velocity,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    /// `a` defaults to `a0`.
    Constant {
        a: Option<f64>,
        #[serde(default)]
        q: f64,
    },
    /// `base + amplitude exp(-width_coeff (x - center)^2)`, `base` defaults to `a0`.
    Gaussian {
        amplitude: f64,
        center: f64,
        width_coeff: f64,
        base: Option<f64>,
        #[serde(default)]
        q: f64,
    },
    /// Linear interpolation of samples, held constant outside.
    Table { x: Vec<f64>, a: Vec<f64>, q: Vec<f64> },
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig::Constant { a: None, q: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryConfig {
    Neumann,
    NonReflecting,
    Pressure {
        signal: Signal,
    },
    Velocity {
        signal: Signal,
    },
    Flow {
        signal: Signal,
    },
    Reflecting,
    HeartValve {
        pressure: Signal,
        #[serde(default)]
        schedule: ValveSchedule,
    },
}

impl BoundaryConfig {
    pub fn to_spec(&self) -> BoundarySpec {
        match self {
            BoundaryConfig::Neumann => BoundarySpec::Neumann,
            BoundaryConfig::NonReflecting => BoundarySpec::NonReflecting,
            BoundaryConfig::Pressure { signal } => BoundarySpec::PrescribedPressure(signal.clone()),
            BoundaryConfig::Velocity { signal } => BoundarySpec::PrescribedVelocity(signal.clone()),
            BoundaryConfig::Flow { signal } => BoundarySpec::PrescribedFlow(signal.clone()),
            BoundaryConfig::Reflecting => BoundarySpec::Reflecting,
            BoundaryConfig::HeartValve { pressure, schedule } => BoundarySpec::HeartValve {
                pressure: pressure.clone(),
                schedule: schedule.clone(),
            },
        }
    }
}

fn d_young() -> f64 {
    2.43e6
}
fn d_thickness() -> f64 {
    0.26
}
fn d_poisson() -> f64 {
    0.5
}
fn d_rho() -> f64 {
    1.06
}
fn d_alpha() -> f64 {
    1.0
}

/// Upper bound on the total number of cells of a configured network.
pub const MAX_CELLS: usize = 1 << 22;

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeConfig {
    pub id: String,
    pub length: f64,
    #[serde(default)]
    pub x_left: f64,
    pub cells: usize,
    #[serde(default)]
    pub form: FormConfig,
    pub a0: f64,
    #[serde(default = "d_young")]
    pub young_modulus: f64,
    #[serde(default = "d_thickness")]
    pub wall_thickness: f64,
    #[serde(default = "d_poisson")]
    pub poisson_ratio: f64,
    #[serde(default = "d_rho")]
    pub rho: f64,
    #[serde(default = "d_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub p_ext: f64,
    #[serde(default)]
    pub initial: InitialConfig,
    /// Absent when the end is bound to a junction.
    pub left: Option<BoundaryConfig>,
    pub right: Option<BoundaryConfig>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JunctionConfig {
    pub id: String,
    /// Edge whose right end meets the node.
    pub incoming: String,
    /// One or two edges whose left ends meet the node.
    pub outgoing: Vec<String>,
}

/// Command line overrides applied before building.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub cfl: Option<f64>,
    pub cells: Option<usize>,
    pub epsilon: Option<f64>,
    pub order: Option<u32>,
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = xs.partition_point(|&s| s <= x);
    if i == 0 {
        ys[0]
    } else if i == xs.len() {
        ys[xs.len() - 1]
    } else {
        let w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
        ys[i - 1] + w * (ys[i] - ys[i - 1])
    }
}

impl InitialConfig {
    fn validate(&self, path: &str) -> Result<()> {
        match self {
            InitialConfig::Table { x, a, q } => {
                if x.is_empty() || x.len() != a.len() || x.len() != q.len() {
                    return Err(Error::config(path, "table needs equally long nonempty x, a, q"));
                }
                if x.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::config(path, "table x must increase strictly"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Cell-centre values on `grid`.
    pub fn sample(&self, grid: &Grid, a0: f64) -> Vec<Cons> {
        grid.centers()
            .into_iter()
            .map(|x| match self {
                InitialConfig::Constant { a, q } => Cons::new(a.unwrap_or(a0), *q),
                InitialConfig::Gaussian {
                    amplitude,
                    center,
                    width_coeff,
                    base,
                    q,
                } => Cons::new(
                    base.unwrap_or(a0) + amplitude * (-width_coeff * (x - center) * (x - center)).exp(),
                    *q,
                ),
                InitialConfig::Table { x: xs, a, q } => Cons::new(interp(xs, a, x), interp(xs, q, x)),
            })
            .collect()
    }
}

impl NetworkConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let path = e
                .span()
                .map(|s| format!("byte {}..{}", s.start, s.end))
                .unwrap_or_else(|| "document".into());
            Error::config(path, e.message().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        Self::from_toml_str(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(c) = o.cfl {
            self.run.cfl = c;
        }
        if let Some(e) = o.epsilon {
            self.run.epsilon = e;
        }
        if let Some(k) = o.order {
            self.run.order = k;
        }
        if let Some(n) = o.cells {
            for e in &mut self.edges {
                e.cells = n;
            }
        }
    }

    pub fn settings(&self) -> Result<RunSettings> {
        let r = &self.run;
        let lambda_policy = match &r.lambda {
            LambdaConfig::Keyword(k) if k == "minimal" => LambdaPolicy::MinimalPerStep,
            LambdaConfig::Keyword(k) => {
                return Err(Error::config(
                    "run.lambda",
                    format!("expected \"minimal\" or a number, got `{k}`"),
                ))
            }
            LambdaConfig::Fixed(l) => LambdaPolicy::FixedGlobal(*l),
        };
        let order = SchemeOrder::from_int(r.order).map_err(|e| Error::config("run.order", e.to_string()))?;
        let s = RunSettings {
            cfl: r.cfl,
            lambda_policy,
            t_end: r.t_end,
            order,
            epsilon: r.epsilon,
            snapshots: r.snapshots.clone(),
        };
        s.validate().map_err(|e| Error::config("run", e.to_string()))?;
        Ok(s)
    }

    /// Builds and validates the network.
    pub fn build(&self) -> Result<Network> {
        let settings = self.settings()?;
        let mut index: HashMap<&str, usize> = HashMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            if index.insert(e.id.as_str(), i).is_some() {
                return Err(Error::config(
                    format!("edge[{i}].id"),
                    format!("duplicate edge id `{}`", e.id),
                ));
            }
        }
        if self.edges.is_empty() {
            return Err(Error::config("edge", "at least one edge is required"));
        }
        let total = self.edges.iter().fold(0usize, |s, e| s.saturating_add(e.cells));
        if total > MAX_CELLS {
            return Err(Error::config(
                "edge",
                format!("at most {MAX_CELLS} cells in total, got {total}"),
            ));
        }
        let mut bound: Vec<[Option<usize>; 2]> = vec![[None, None]; self.edges.len()];
        let mut junctions = Vec::with_capacity(self.junctions.len());
        for (j, jc) in self.junctions.iter().enumerate() {
            let path = format!("junction[{j}] ({})", jc.id);
            if !(1..=2).contains(&jc.outgoing.len()) {
                return Err(Error::config(&path, "needs one or two outgoing edges"));
            }
            let lookup = |id: &str| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::config(&path, format!("unknown edge `{id}`")))
            };
            let mut ends = vec![Endpoint {
                edge: lookup(&jc.incoming)?,
                side: Side::Right,
            }];
            for o in &jc.outgoing {
                ends.push(Endpoint {
                    edge: lookup(o)?,
                    side: Side::Left,
                });
            }
            for end in &ends {
                let k = if end.side == Side::Left { 0 } else { 1 };
                if let Some(other) = bound[end.edge][k] {
                    return Err(Error::config(
                        &path,
                        format!(
                            "{:?} end of edge `{}` is already bound to junction `{}`",
                            end.side, self.edges[end.edge].id, self.junctions[other].id
                        ),
                    ));
                }
                bound[end.edge][k] = Some(j);
            }
            junctions.push(Junction {
                id: jc.id.clone(),
                ends,
            });
        }
        let mut edges = Vec::with_capacity(self.edges.len());
        for (i, ec) in self.edges.iter().enumerate() {
            let path = format!("edge[{i}] ({})", ec.id);
            let inputs = VesselInputs {
                young_modulus: ec.young_modulus,
                wall_thickness: ec.wall_thickness,
                poisson_ratio: ec.poisson_ratio,
                a0: ec.a0,
                rho: ec.rho,
                alpha: ec.alpha,
                mu: ec.mu,
                gamma: ec.gamma,
                p_ext: ec.p_ext,
                length: ec.length,
            };
            let params = make_vessel_params(&inputs).map_err(|e| Error::config(&path, e.to_string()))?;
            let grid = Grid::new(ec.x_left, ec.length, ec.cells).map_err(|e| Error::config(&path, e.to_string()))?;
            let ipath = format!("{path}.initial");
            ec.initial.validate(&ipath)?;
            let u = ec.initial.sample(&grid, ec.a0);
            if let Some(j) = u
                .iter()
                .position(|c| !(c.a > 0.0) || !c.a.is_finite() || !c.q.is_finite())
            {
                return Err(Error::config(
                    &ipath,
                    format!("nonpositive or nonfinite area {} in cell {j}", u[j].a),
                ));
            }
            let form = match ec.form {
                FormConfig::Flow => ModelForm::Flow,
                FormConfig::Velocity => ModelForm::Velocity,
            };
            let state = EdgeState::new(u, form, &params).map_err(|e| Error::config(&ipath, e.to_string()))?;
            let binding = |b: &Option<BoundaryConfig>, junction: Option<usize>, side: &str| -> Result<EndBinding> {
                match (b, junction) {
                    (Some(_), Some(j)) => Err(Error::config(
                        format!("{path}.{side}"),
                        format!(
                            "end has a boundary law and is bound to junction `{}`",
                            self.junctions[j].id
                        ),
                    )),
                    (None, None) => Err(Error::config(
                        format!("{path}.{side}"),
                        "end needs a boundary law or a junction",
                    )),
                    (Some(b), None) => {
                        let spec = b.to_spec();
                        spec.validate()
                            .map_err(|e| Error::config(format!("{path}.{side}"), e.to_string()))?;
                        Ok(EndBinding::Boundary(spec))
                    }
                    (None, Some(j)) => Ok(EndBinding::Junction(j)),
                }
            };
            edges.push(Edge {
                id: ec.id.clone(),
                params,
                grid,
                left: binding(&ec.left, bound[i][0], "left")?,
                right: binding(&ec.right, bound[i][1], "right")?,
                state,
            });
        }
        let options = SolverOptions {
            convention: self.run.speed_convention,
            closure: self.run.closure,
        };
        Network::new(edges, junctions, settings, options).map_err(|e| Error::config("network", e.to_string()))
    }
}

/// Parses and validates a TOML document into a network.
pub fn parse_config(text: &str) -> Result<Network> {
    NetworkConfig::from_toml_str(text)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_cells_are_bounded() {
        let text = MINIMAL.replace("cells = 20", &format!("cells = {}", MAX_CELLS + 1));
        assert!(parse_config(&text).unwrap_err().is_validation());
    }

    const MINIMAL: &str = r#"
[run]
t_end = 0.01

[[edge]]
id = "a"
length = 100.0
cells = 20
a0 = 6.6
left = { kind = "neumann" }
right = { kind = "neumann" }
"#;

    const COUPLED: &str = r#"
[run]
t_end = 0.5
snapshots = [0.425]
speed_convention = "literal"

[[edge]]
id = "I"
length = 400.0
x_left = -400.0
cells = 800
a0 = 8.25
left = { kind = "pressure", signal = { kind = "sine", amplitude = 6e4, frequency = 2.5 } }

[[edge]]
id = "II"
length = 400.0
cells = 800
a0 = 4.95
right = { kind = "neumann" }

[[junction]]
id = "node"
incoming = "I"
outgoing = ["II"]
"#;

    #[test]
    fn minimal_config() {
        let net = parse_config(MINIMAL).unwrap();
        assert_eq!(net.edges.len(), 1);
        assert!(net.junctions.is_empty());
        assert!(net.edges[0].state.u.iter().all(|c| c.a == 6.6 && c.q == 0.0));
        assert_eq!(net.edges[0].params.young_modulus, 2.43e6);
    }

    #[test]
    fn coupled_config() {
        let net = parse_config(COUPLED).unwrap();
        assert_eq!(net.edges.len(), 2);
        assert_eq!(net.junctions.len(), 1);
        assert_eq!(net.edges[0].right, EndBinding::Junction(0));
        assert_eq!(net.edges[1].left, EndBinding::Junction(0));
        assert_eq!(net.edges[0].grid.x_left, -400.0);
        assert_eq!(net.options.convention, SpeedConvention::Literal);
    }

    #[test]
    fn dangling_reference_names_the_id() {
        let text = COUPLED.replace("outgoing = [\"II\"]", "outgoing = [\"III\"]");
        let err = parse_config(&text).unwrap_err();
        assert!(err.is_validation());
        assert!(err.to_string().contains("III"), "{err}");
    }

    #[test]
    fn unbound_end_rejected() {
        let text = MINIMAL.replace("right = { kind = \"neumann\" }\n", "");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("right"), "{err}");
    }

    #[test]
    fn schema_errors_are_config_errors() {
        assert!(parse_config("[run]\nt_end = \"x\"\n").unwrap_err().is_validation());
        let text = MINIMAL.replace("a0 = 6.6", "a0 = 6.6\nbogus = 1");
        assert!(parse_config(&text).unwrap_err().is_validation());
        let text = MINIMAL.replace("t_end = 0.01", "t_end = 0.01\nlambda = \"fast\"");
        assert!(parse_config(&text).unwrap_err().to_string().contains("run.lambda"));
    }

    #[test]
    fn nonpositive_initial_area_rejected() {
        let text = MINIMAL.replace(
            "a0 = 6.6",
            "a0 = 6.6\ninitial = { kind = \"gaussian\", amplitude = -10.0, center = 50.0, width_coeff = 0.01 }",
        );
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("initial"), "{err}");
    }

    #[test]
    fn gaussian_and_table_initial_data() {
        let text = MINIMAL.replace(
            "a0 = 6.6",
            "a0 = 6.6\ninitial = { kind = \"gaussian\", amplitude = 1.0, center = 52.5, width_coeff = 0.005 }",
        );
        let net = parse_config(&text).unwrap();
        assert_eq!(net.edges[0].state.u[10].a, 7.6);
        let text = MINIMAL.replace(
            "a0 = 6.6",
            "a0 = 6.6\ninitial = { kind = \"table\", x = [0.0, 100.0], a = [6.0, 7.0], q = [0.0, 10.0] }",
        );
        let net = parse_config(&text).unwrap();
        let c = net.edges[0].state.u[0];
        assert!((c.a - 6.025).abs() < 1e-12 && (c.q - 0.25).abs() < 1e-12);
    }

    #[test]
    fn overrides_apply() {
        let mut cfg = NetworkConfig::from_toml_str(MINIMAL).unwrap();
        cfg.apply(&Overrides {
            cfl: Some(0.5),
            cells: Some(40),
            epsilon: Some(1e-6),
            order: None,
        });
        let net = cfg.build().unwrap();
        assert_eq!(net.settings.cfl, 0.5);
        assert_eq!(net.edges[0].grid.n_cells, 40);
        assert_eq!(net.settings.epsilon, 1e-6);
    }
}
