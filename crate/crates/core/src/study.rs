//! Grid convergence and coupling-error studies on the reference experiments.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::boundary::{BoundarySpec, Side, SpeedConvention, ValveSchedule};
use crate::error::{Error, Result};
use crate::model::{
    make_vessel_params, Cons, EdgeState, Grid, LambdaPolicy, ModelForm, RunSettings, SchemeOrder, VesselInputs,
};
use crate::network::{Edge, EdgeSnapshot, EndBinding, Endpoint, Junction, Network, SimulationRecord, SolverOptions};
use crate::signal::Signal;

/// Reference vessel of the experiments (CGS units).
pub fn reference_inputs(length: f64) -> VesselInputs {
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
        length,
    }
}

pub const PULSE_AMPLITUDE: f64 = 6e4;

/// Inlet pressure `amplitude sin(5 pi t)`.
pub fn inlet_pulse(amplitude: f64) -> Signal {
    Signal::sine(amplitude, 2.5)
}

/// How the inlet pulse continues after its first half period.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PulseShape {
    /// The sine keeps oscillating.
    #[default]
    Sine,
    /// A heart valve that closes once the inlet pressure turns negative.
    Valve,
}

impl PulseShape {
    pub fn boundary(self, amplitude: f64) -> BoundarySpec {
        match self {
            PulseShape::Sine => BoundarySpec::PrescribedPressure(inlet_pulse(amplitude)),
            PulseShape::Valve => BoundarySpec::HeartValve {
                pressure: inlet_pulse(amplitude),
                schedule: ValveSchedule::PressureSign,
            },
        }
    }
}

/// Viscoelastic coefficient `120 A0^{3/2} / sqrt(pi)`.
pub fn reference_gamma(a0: f64) -> f64 {
    120.0 * a0.powf(1.5) / PI.sqrt()
}

/// Which wall property jumps at the coupling node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Discontinuity {
    /// `A0` is scaled by 1.25 upstream and 0.75 downstream.
    Area,
    /// `E` is scaled by 1.25 upstream and 1.75 downstream.
    Stiffness,
}

/// Options shared by the study setups.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyOptions {
    pub order: SchemeOrder,
    /// CFL for first order runs.
    pub cfl: f64,
    /// Second order runs use `CFL = cfl2_per_cm * dx` with `dx` in cm.
    pub cfl2_per_cm: f64,
    pub epsilon: f64,
    pub pulse: PulseShape,
    pub pulse_amplitude: f64,
    /// Length of the single-edge pulse domain.
    pub pulse_length: f64,
    /// Length of each edge in the coupled experiments.
    pub coupled_length: f64,
    pub lambda_policy: LambdaPolicy,
    pub solver: SolverOptions,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            order: SchemeOrder::First,
            cfl: 1.0,
            cfl2_per_cm: 0.2,
            epsilon: 0.0,
            pulse: PulseShape::Sine,
            pulse_amplitude: PULSE_AMPLITUDE,
            pulse_length: 400.0,
            coupled_length: 200.0,
            lambda_policy: LambdaPolicy::MinimalPerStep,
            solver: SolverOptions {
                convention: SpeedConvention::Literal,
                closure: None,
            },
        }
    }
}

impl StudyOptions {
    pub fn with_order(order: SchemeOrder) -> Self {
        StudyOptions {
            order,
            ..StudyOptions::default()
        }
    }

    fn settings(&self, dx: f64, t_end: f64) -> RunSettings {
        let cfl = match self.order {
            SchemeOrder::First => self.cfl,
            SchemeOrder::Second => (self.cfl2_per_cm * dx).min(1.0),
        };
        RunSettings {
            cfl,
            lambda_policy: self.lambda_policy,
            t_end,
            order: self.order,
            epsilon: self.epsilon,
            snapshots: Vec::new(),
        }
    }
}

fn flow_edge(
    inputs: &VesselInputs,
    x_left: f64,
    n: usize,
    init: impl Fn(f64) -> Cons,
) -> Result<(Grid, EdgeState, crate::model::VesselParams)> {
    let params = make_vessel_params(inputs)?;
    let grid = Grid::new(x_left, inputs.length, n)?;
    let u = grid.centers().into_iter().map(init).collect();
    let state = EdgeState::new(u, ModelForm::Flow, &params)?;
    Ok((grid, state, params))
}

/// Gaussian bump `A0 + exp(-0.005 (x - 100)^2)` at rest on `[0, 200]`, Neumann ends.
pub fn gaussian_problem(n: usize, t_end: f64, opts: &StudyOptions) -> Result<Network> {
    let inputs = reference_inputs(200.0);
    let a0 = inputs.a0;
    let (grid, state, params) = flow_edge(&inputs, 0.0, n, |x| {
        Cons::new(a0 + (-0.005 * (x - 100.0) * (x - 100.0)).exp(), 0.0)
    })?;
    let settings = opts.settings(grid.dx, t_end);
    let mut net = Network::single_edge(
        "gauss",
        params,
        grid,
        state,
        BoundarySpec::Neumann,
        BoundarySpec::Neumann,
        settings,
    )?;
    net.options = opts.solver;
    Ok(net)
}

/// Inlet pulse entering a vessel at rest; non-reflecting outlet.
pub fn pulse_problem(n: usize, t_end: f64, gamma: f64, opts: &StudyOptions) -> Result<Network> {
    let inputs = VesselInputs {
        gamma,
        ..reference_inputs(opts.pulse_length)
    };
    let a0 = inputs.a0;
    let (grid, state, params) = flow_edge(&inputs, 0.0, n, |_| Cons::new(a0, 0.0))?;
    let settings = opts.settings(grid.dx, t_end);
    let left = opts.pulse.boundary(opts.pulse_amplitude);
    let mut net = Network::single_edge(
        "pulse",
        params,
        grid,
        state,
        left,
        BoundarySpec::NonReflecting,
        settings,
    )?;
    net.options = opts.solver;
    Ok(net)
}

/// Two vessels joined at `x = 0` with a jump in one wall property.
pub fn coupled_problem(kind: Discontinuity, n: usize, t_end: f64, opts: &StudyOptions) -> Result<Network> {
    let l = opts.coupled_length;
    let base = reference_inputs(l);
    let (up, down) = match kind {
        Discontinuity::Area => (
            VesselInputs {
                a0: 1.25 * base.a0,
                ..base.clone()
            },
            VesselInputs {
                a0: 0.75 * base.a0,
                ..base.clone()
            },
        ),
        Discontinuity::Stiffness => (
            VesselInputs {
                young_modulus: 1.25 * base.young_modulus,
                ..base.clone()
            },
            VesselInputs {
                young_modulus: 1.75 * base.young_modulus,
                ..base.clone()
            },
        ),
    };
    let (g1, s1, p1) = flow_edge(&up, -l, n, |_| Cons::new(up.a0, 0.0))?;
    let (g2, s2, p2) = flow_edge(&down, 0.0, n, |_| Cons::new(down.a0, 0.0))?;
    let settings = opts.settings(g1.dx, t_end);
    let edges = vec![
        Edge {
            id: "I".into(),
            params: p1,
            grid: g1,
            state: s1,
            left: EndBinding::Boundary(opts.pulse.boundary(opts.pulse_amplitude)),
            right: EndBinding::Junction(0),
        },
        Edge {
            id: "II".into(),
            params: p2,
            grid: g2,
            state: s2,
            left: EndBinding::Junction(0),
            right: EndBinding::Boundary(BoundarySpec::Neumann),
        },
    ];
    let junctions = vec![Junction {
        id: "node".into(),
        ends: vec![
            Endpoint {
                edge: 0,
                side: Side::Right,
            },
            Endpoint {
                edge: 1,
                side: Side::Left,
            },
        ],
    }];
    Network::new(edges, junctions, settings, opts.solver)
}

/// `dx * sum |c_j - mean of the reference cells inside coarse cell j|`.
pub fn l1_error(coarse: &[f64], reference: &[f64], dx: f64) -> Result<f64> {
    let n = coarse.len();
    if n == 0 || !reference.len().is_multiple_of(n) {
        return Err(Error::GridMismatch(format!(
            "reference with {} cells is not a refinement of {n} cells",
            reference.len()
        )));
    }
    let r = reference.len() / n;
    Ok(dx
        * coarse
            .iter()
            .zip(reference.chunks(r))
            .map(|(c, fine)| (c - fine.iter().sum::<f64>() / r as f64).abs())
            .sum::<f64>())
}

/// L1 errors of `Q` and `A` of one edge snapshot against a finer one.
pub fn snapshot_errors(coarse: &EdgeSnapshot, reference: &EdgeSnapshot) -> Result<(f64, f64)> {
    let lc = coarse.dx * coarse.x.len() as f64;
    let lr = reference.dx * reference.x.len() as f64;
    if (lc - lr).abs() > 1e-9 * lc {
        return Err(Error::GridMismatch(format!("domain lengths differ ({lc} vs {lr})")));
    }
    Ok((
        l1_error(&coarse.q, &reference.q, coarse.dx)?,
        l1_error(&coarse.a, &reference.a, coarse.dx)?,
    ))
}

/// Experimental order `log2(e1 / e2)` of two errors on grids refined by two.
pub fn eoc(e1: f64, e2: f64) -> Result<f64> {
    if !(e1 > 0.0 && e2 > 0.0) || !e1.is_finite() || !e2.is_finite() {
        return Err(Error::domain(format!(
            "EOC needs positive finite errors, got {e1} and {e2}"
        )));
    }
    Ok((e1 / e2).log2())
}

fn eocs(errors: &[f64]) -> Vec<Option<f64>> {
    std::iter::once(None)
        .chain(errors.windows(2).map(|w| eoc(w[0], w[1]).ok()))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub q_error: f64,
    pub q_eoc: Option<f64>,
    pub a_error: f64,
    pub a_eoc: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CouplingRow {
    pub cells: usize,
    pub e1: f64,
    pub e1_eoc: Option<f64>,
    pub e2: f64,
    pub e2_eoc: Option<f64>,
}

fn final_edge(rec: &SimulationRecord, edge: usize) -> Result<EdgeSnapshot> {
    rec.last()
        .and_then(|s| s.edges.get(edge).cloned())
        .ok_or_else(|| Error::domain("run produced no snapshot"))
}

/// Runs `build(n)` for every level and the reference resolution in parallel and
/// tabulates the L1 errors of the first edge at the final time, divided by the
/// domain length (the mean absolute deviation per unit length).
pub fn convergence_study<F>(levels: &[usize], reference: usize, build: F) -> Result<Vec<ConvergenceRow>>
where
    F: Fn(usize) -> Result<Network> + Sync,
{
    let mut all: Vec<usize> = levels.to_vec();
    all.push(reference);
    let finals: Vec<EdgeSnapshot> = all
        .par_iter()
        .map(|&n| {
            let mut net = build(n)?;
            final_edge(&net.run()?, 0)
        })
        .collect::<Result<_>>()?;
    let (coarse, reference) = finals.split_at(levels.len());
    let errors: Vec<(f64, f64)> = coarse
        .iter()
        .map(|c| {
            let len = c.dx * c.x.len() as f64;
            snapshot_errors(c, &reference[0]).map(|(q, a)| (q / len, a / len))
        })
        .collect::<Result<_>>()?;
    let q: Vec<f64> = errors.iter().map(|e| e.0).collect();
    let a: Vec<f64> = errors.iter().map(|e| e.1).collect();
    Ok(levels
        .iter()
        .zip(eocs(&q).into_iter().zip(eocs(&a)))
        .zip(errors)
        .map(|((&cells, (q_eoc, a_eoc)), (q_error, a_error))| ConvergenceRow {
            cells,
            q_error,
            q_eoc,
            a_error,
            a_eoc,
        })
        .collect())
}

/// Coupling errors at the first one-to-one junction at the final time.
pub fn coupling_study<F>(levels: &[usize], build: F) -> Result<Vec<CouplingRow>>
where
    F: Fn(usize) -> Result<Network> + Sync,
{
    let samples: Vec<(f64, f64)> = levels
        .par_iter()
        .map(|&n| {
            let mut net = build(n)?;
            let rec = net.run()?;
            rec.coupling
                .last()
                .map(|c| (c.e1, c.e2))
                .ok_or_else(|| Error::domain("network has no one-to-one junction"))
        })
        .collect::<Result<_>>()?;
    let e1: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let e2: Vec<f64> = samples.iter().map(|s| s.1).collect();
    Ok(levels
        .iter()
        .zip(eocs(&e1).into_iter().zip(eocs(&e2)))
        .zip(samples)
        .map(|((&cells, (e1_eoc, e2_eoc)), (e1, e2))| CouplingRow {
            cells,
            e1,
            e1_eoc,
            e2,
            e2_eoc,
        })
        .collect())
}

pub const TABLE_LEVELS: [usize; 6] = [50, 100, 200, 400, 800, 1600];
pub const REFERENCE_CELLS: usize = 6400;

/// Gaussian data with Neumann ends at `t = 0.05`.
pub fn table1(opts: &StudyOptions) -> Result<Vec<ConvergenceRow>> {
    convergence_study(&TABLE_LEVELS, REFERENCE_CELLS, |n| gaussian_problem(n, 0.05, opts))
}

/// Inlet pulse at `t = 0.1`.
pub fn table2(opts: &StudyOptions) -> Result<Vec<ConvergenceRow>> {
    convergence_study(&TABLE_LEVELS, REFERENCE_CELLS, |n| pulse_problem(n, 0.1, 0.0, opts))
}

/// Coupling errors at `t = 0.5`.
pub fn table3(kind: Discontinuity, opts: &StudyOptions) -> Result<Vec<CouplingRow>> {
    coupling_study(&TABLE_LEVELS, |n| coupled_problem(kind, n, 0.5, opts))
}

/// Pulse solutions at `t = 0.4` without and with the viscoelastic term.
#[derive(Clone, Debug, PartialEq)]
pub struct ViscoelasticComparison {
    pub elastic: EdgeSnapshot,
    pub viscoelastic: EdgeSnapshot,
}

pub fn total_variation(v: &[f64]) -> f64 {
    v.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

pub fn viscoelastic_compare(n: usize, opts: &StudyOptions) -> Result<ViscoelasticComparison> {
    let gamma = reference_gamma(reference_inputs(1.0).a0);
    let runs: Vec<EdgeSnapshot> = [0.0, gamma]
        .par_iter()
        .map(|&g| {
            let mut net = pulse_problem(n, 0.4, g, opts)?;
            final_edge(&net.run()?, 0)
        })
        .collect::<Result<_>>()?;
    Ok(ViscoelasticComparison {
        elastic: runs[0].clone(),
        viscoelastic: runs[1].clone(),
    })
}

fn fmt_eoc(e: Option<f64>) -> String {
    e.map(|v| format!("{v:.3}")).unwrap_or_default()
}

/// CSV and aligned text renderings of a convergence table.
pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("cells,q_error,q_eoc,a_error,a_eoc\n");
    for r in rows {
        let e = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{:.16e},{},{:.16e},{}",
            r.cells,
            r.q_error,
            e(r.q_eoc),
            r.a_error,
            e(r.a_eoc)
        );
    }
    s
}

pub fn convergence_text(title: &str, rows: &[ConvergenceRow]) -> String {
    let mut s = format!(
        "{title}\n{:>6} {:>12} {:>7} {:>12} {:>7}\n",
        "cells", "L1(Q)", "EOC", "L1(A)", "EOC"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:>6} {:>12.4e} {:>7} {:>12.4e} {:>7}",
            r.cells,
            r.q_error,
            fmt_eoc(r.q_eoc),
            r.a_error,
            fmt_eoc(r.a_eoc)
        );
    }
    s
}

pub fn coupling_csv(rows: &[CouplingRow]) -> String {
    let mut s = String::from("cells,e1,e1_eoc,e2,e2_eoc\n");
    for r in rows {
        let e = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{:.16e},{},{:.16e},{}",
            r.cells,
            r.e1,
            e(r.e1_eoc),
            r.e2,
            e(r.e2_eoc)
        );
    }
    s
}

pub fn coupling_text(title: &str, rows: &[CouplingRow]) -> String {
    let mut s = format!(
        "{title}\n{:>6} {:>12} {:>7} {:>12} {:>7}\n",
        "N", "e1", "EOC", "e2", "EOC"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:>6} {:>12.4} {:>7} {:>12.4} {:>7}",
            r.cells,
            r.e1,
            fmt_eoc(r.e1_eoc),
            r.e2,
            fmt_eoc(r.e2_eoc)
        );
    }
    s
}

/// Files and a text summary produced by a study.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyReport {
    pub name: String,
    /// `(file name, CSV contents)`.
    pub files: Vec<(String, String)>,
    pub text: String,
}

impl StudyReport {
    /// Writes the CSV files and `<name>.txt` into `dir`.
    pub fn write(&self, dir: &std::path::Path) -> Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut out = Vec::new();
        for (name, body) in self
            .files
            .iter()
            .chain(std::iter::once(&(format!("{}.txt", self.name), self.text.clone())))
        {
            let path = dir.join(name);
            std::fs::write(&path, body)?;
            out.push(path);
        }
        Ok(out)
    }
}

pub const STUDY_NAMES: [&str; 4] = ["table1", "table2", "table3", "viscoelastic-compare"];

fn order_tag(o: SchemeOrder) -> u32 {
    match o {
        SchemeOrder::First => 1,
        SchemeOrder::Second => 2,
    }
}

/// Runs one of [`STUDY_NAMES`].
pub fn run_study(name: &str, opts: &StudyOptions) -> Result<StudyReport> {
    let k = order_tag(opts.order);
    let (files, text) = match name {
        "table1" | "table2" => {
            let rows = if name == "table1" { table1(opts)? } else { table2(opts)? };
            let title = format!("{name}, order {k}: L1 errors per unit length and EOC");
            (
                vec![(format!("{name}_order{k}.csv"), convergence_csv(&rows))],
                convergence_text(&title, &rows),
            )
        }
        "table3" => {
            let area = table3(Discontinuity::Area, opts)?;
            let stiff = table3(Discontinuity::Stiffness, opts)?;
            (
                vec![
                    (format!("table3_area_order{k}.csv"), coupling_csv(&area)),
                    (format!("table3_stiffness_order{k}.csv"), coupling_csv(&stiff)),
                ],
                coupling_text("table3, discontinuous A0: coupling errors at t = 0.5", &area)
                    + "\n"
                    + &coupling_text("table3, discontinuous E: coupling errors at t = 0.5", &stiff),
            )
        }
        "viscoelastic-compare" => {
            let c = viscoelastic_compare(800, opts)?;
            let (e, v) = (&c.elastic, &c.viscoelastic);
            let mut csv = String::from("x,Q_elastic,Q_viscoelastic,A_elastic,A_viscoelastic\n");
            for i in 0..e.x.len() {
                let _ = writeln!(
                    csv,
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    e.x[i], e.q[i], v.q[i], e.a[i], v.a[i]
                );
            }
            let max = |q: &[f64]| q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let text = format!(
                "viscoelastic-compare at t = 0.4, order {k}\n{:>14} {:>12} {:>12}\n{:>14} {:>12.4} {:>12.4}\n{:>14} {:>12.6} {:>12.6}\n",
                "", "gamma = 0", "gamma > 0", "max Q", max(&e.q), max(&v.q), "TV(A)", total_variation(&e.a), total_variation(&v.a)
            );
            (vec![(format!("viscoelastic_compare_order{k}.csv"), csv)], text)
        }
        other => {
            return Err(Error::domain(format!(
                "unknown study `{other}`, expected one of {STUDY_NAMES:?} or custom"
            )))
        }
    };
    Ok(StudyReport {
        name: format!("{name}_order{k}"),
        files,
        text,
    })
}

/// Convergence of the first edge of a configured network over `levels`
/// cells per edge against `reference` cells.
pub fn custom_study(
    cfg: &crate::config::NetworkConfig,
    levels: &[usize],
    reference: usize,
    cfl2_per_cm: f64,
) -> Result<StudyReport> {
    let build = |n: usize| {
        let mut c = cfg.clone();
        c.apply(&crate::config::Overrides {
            cells: Some(n),
            ..Default::default()
        });
        if c.run.order == 2 {
            let dx = c.edges[0].length / n as f64;
            c.run.cfl = (cfl2_per_cm * dx).min(1.0);
        }
        c.build()
    };
    let rows = convergence_study(levels, reference, build)?;
    Ok(StudyReport {
        name: "custom".into(),
        files: vec![("custom.csv".into(), convergence_csv(&rows))],
        text: convergence_text("custom: L1 errors per unit length and EOC", &rows),
    })
}
