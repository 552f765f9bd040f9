//! Networks of edges joined at junctions, advanced in lockstep.
//!
//! Each step has two phases: first all boundary and coupling states are
//! computed from the data at `t^n`, then every edge is updated with the same
//! `dt`.

use log::{debug, trace};
use rayon::prelude::*;

use crate::boundary::{BoundaryContext, BoundarySpec, BoundaryState, Closure, Side, SpeedConvention, Trace};
use crate::coupling::{coupling_errors, junction_residuals, node_flux_imbalance, solve_junction, EndTrace};
use crate::error::{Error, Result};
use crate::model::{Cons, EdgeState, Grid, LambdaPolicy, ModelForm, RunSettings, SchemeOrder, VesselParams};
use crate::physics::lambda_bound;
use crate::scheme::{compute_dt, step_limit, step_relaxation, Ghosts};
use crate::viscoelastic::{viscoelastic_step, EndClosure};

/// What an edge end is attached to.
#[derive(Clone, Debug, PartialEq)]
pub enum EndBinding {
    Boundary(BoundarySpec),
    /// Index into [`Network::junctions`].
    Junction(usize),
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub id: String,
    pub params: VesselParams,
    pub grid: Grid,
    pub state: EdgeState,
    pub left: EndBinding,
    pub right: EndBinding,
}

impl Edge {
    pub fn binding(&self, side: Side) -> &EndBinding {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }
}

/// One edge end at a junction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Endpoint {
    pub edge: usize,
    pub side: Side,
}

/// A coupling node. The first end is the incoming edge (its right end), the
/// others are outgoing (their left ends).
#[derive(Clone, Debug, PartialEq)]
pub struct Junction {
    pub id: String,
    pub ends: Vec<Endpoint>,
}

/// Solver options beyond [`RunSettings`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SolverOptions {
    pub convention: SpeedConvention,
    /// Non-reflecting closure order; defaults to the scheme order.
    pub closure: Option<Closure>,
}

#[derive(Clone, Debug)]
pub struct Network {
    pub edges: Vec<Edge>,
    pub junctions: Vec<Junction>,
    pub settings: RunSettings,
    pub options: SolverOptions,
}

/// Per-step diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepDiagnostics {
    /// Time reached by the step.
    pub t: f64,
    pub dt: f64,
    pub lambda: f64,
    /// Largest scaled coupling residual over all junctions.
    pub coupling_residual: f64,
    /// Largest relative mass-flux imbalance over all junctions.
    pub node_imbalance: f64,
}

/// Cell data of one edge at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeSnapshot {
    pub edge_id: String,
    pub dx: f64,
    pub x: Vec<f64>,
    pub a: Vec<f64>,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub edges: Vec<EdgeSnapshot>,
}

/// Coupling errors of a one-to-one junction at a snapshot time.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingSample {
    pub t: f64,
    pub junction_id: String,
    pub e1: f64,
    pub e2: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimulationRecord {
    pub snapshots: Vec<Snapshot>,
    pub steps: Vec<StepDiagnostics>,
    pub coupling: Vec<CouplingSample>,
}

impl SimulationRecord {
    pub fn snapshot_at(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.t == t)
    }

    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }
}

impl EdgeSnapshot {
    pub fn of(edge: &Edge) -> EdgeSnapshot {
        let form = edge.state.form;
        EdgeSnapshot {
            edge_id: edge.id.clone(),
            dx: edge.grid.dx,
            x: edge.grid.centers(),
            a: edge.state.u.iter().map(|c| c.a).collect(),
            q: edge.state.mass_flux(),
            p: edge.state.u.iter().map(|c| edge.params.pressure(c.a)).collect(),
            u: edge.state.u.iter().map(|c| form.velocity(*c)).collect(),
        }
    }
}

impl Network {
    /// Builds and validates a network.
    pub fn new(
        edges: Vec<Edge>,
        junctions: Vec<Junction>,
        settings: RunSettings,
        options: SolverOptions,
    ) -> Result<Self> {
        let net = Network {
            edges,
            junctions,
            settings,
            options,
        };
        net.validate()?;
        Ok(net)
    }

    /// A single edge with boundary laws at both ends.
    pub fn single_edge(
        id: &str,
        params: VesselParams,
        grid: Grid,
        state: EdgeState,
        left: BoundarySpec,
        right: BoundarySpec,
        settings: RunSettings,
    ) -> Result<Self> {
        let edge = Edge {
            id: id.to_string(),
            params,
            grid,
            state,
            left: EndBinding::Boundary(left),
            right: EndBinding::Boundary(right),
        };
        Network::new(vec![edge], Vec::new(), settings, SolverOptions::default())
    }

    pub fn validate(&self) -> Result<()> {
        self.settings.validate()?;
        if self.edges.is_empty() {
            return Err(Error::domain("network has no edges"));
        }
        let eps = self.settings.epsilon;
        if eps > 0.0 && self.settings.order == SchemeOrder::Second {
            return Err(Error::domain("the finite relaxation rate scheme is first order only"));
        }
        for e in &self.edges {
            let n = e.state.n_cells();
            if n != e.grid.n_cells || e.state.v.len() != n {
                return Err(Error::domain(format!(
                    "edge {}: state has {n} cells, grid {}",
                    e.id, e.grid.n_cells
                )));
            }
            if e.params.gamma > 0.0 && e.state.form == ModelForm::Velocity {
                return Err(Error::domain(format!(
                    "edge {}: viscoelastic term needs the flow form",
                    e.id
                )));
            }
            if e.params.gamma > 0.0 && eps > 0.0 {
                return Err(Error::domain(format!(
                    "edge {}: viscoelastic term is not available with a finite relaxation rate",
                    e.id
                )));
            }
            for side in [Side::Left, Side::Right] {
                match e.binding(side) {
                    EndBinding::Boundary(spec) => spec.validate()?,
                    EndBinding::Junction(j) => {
                        let jn = self
                            .junctions
                            .get(*j)
                            .ok_or_else(|| Error::domain(format!("edge {} refers to missing junction {j}", e.id)))?;
                        let idx = self.edges.iter().position(|x| std::ptr::eq(x, e)).unwrap();
                        if !jn.ends.contains(&Endpoint { edge: idx, side }) {
                            return Err(Error::domain(format!(
                                "edge {} {side:?} end is not listed in junction {}",
                                e.id, jn.id
                            )));
                        }
                    }
                }
            }
        }
        for (j, jn) in self.junctions.iter().enumerate() {
            if !(2..=3).contains(&jn.ends.len()) {
                return Err(Error::domain(format!(
                    "junction {} has {} ends, need 2 or 3",
                    jn.id,
                    jn.ends.len()
                )));
            }
            for (k, end) in jn.ends.iter().enumerate() {
                let edge = self
                    .edges
                    .get(end.edge)
                    .ok_or_else(|| Error::domain(format!("junction {} refers to missing edge {}", jn.id, end.edge)))?;
                let expected = if k == 0 { Side::Right } else { Side::Left };
                if end.side != expected {
                    return Err(Error::domain(format!(
                        "junction {}: end {k} must be a {expected:?} end (incoming edge first)",
                        jn.id
                    )));
                }
                if edge.binding(end.side) != &EndBinding::Junction(j) {
                    return Err(Error::domain(format!(
                        "junction {} lists edge {} {:?} end, which is bound elsewhere",
                        jn.id, edge.id, end.side
                    )));
                }
            }
            let form = self.edges[jn.ends[0].edge].state.form;
            if jn.ends.iter().any(|e| self.edges[e.edge].state.form != form) {
                return Err(Error::domain(format!(
                    "junction {} joins edges of different model forms",
                    jn.id
                )));
            }
            if form == ModelForm::Velocity && jn.ends.len() != 2 {
                return Err(Error::domain(format!(
                    "junction {}: velocity form supports one-to-one only",
                    jn.id
                )));
            }
        }
        Ok(())
    }

    /// Common time of all edges.
    pub fn t(&self) -> f64 {
        self.edges[0].state.t
    }

    /// Minimal relaxation speed over the network.
    pub fn lambda_bound(&self) -> Result<f64> {
        lambda_bound(
            self.edges
                .iter()
                .flat_map(|e| e.state.u.iter().map(move |u| (*u, e.state.form, &e.params))),
        )
    }

    /// Relaxation speed for the next step according to the policy.
    pub fn current_lambda(&self) -> Result<f64> {
        let bound = self.lambda_bound()?;
        match self.settings.lambda_policy {
            LambdaPolicy::MinimalPerStep => Ok(bound),
            LambdaPolicy::FixedGlobal(l) => {
                if l < bound {
                    Err(Error::Subcharacteristic {
                        lambda: l,
                        required: bound,
                    })
                } else {
                    Ok(l)
                }
            }
        }
    }

    fn boundary_context(&self, lambda: f64, form: ModelForm) -> BoundaryContext {
        BoundaryContext {
            lambda,
            form,
            closure: self.options.closure.unwrap_or(Closure::for_order(self.settings.order)),
            convention: self.options.convention,
        }
    }

    /// Phase one: boundary and coupling states of all edge ends at the current time.
    /// Returns the ghosts per edge and the worst coupling residual and node imbalance.
    pub fn boundary_states(&self, lambda: f64) -> Result<(Vec<Ghosts>, f64, f64)> {
        let t = self.t();
        let mut ghosts: Vec<Ghosts> = self
            .edges
            .iter()
            .map(|_| Ghosts {
                left: BoundaryState::default(),
                right: BoundaryState::default(),
            })
            .collect();
        for (i, e) in self.edges.iter().enumerate() {
            let ctx = self.boundary_context(lambda, e.state.form);
            for side in [Side::Left, Side::Right] {
                if let EndBinding::Boundary(spec) = e.binding(side) {
                    let b = spec
                        .evaluate(t, side, &Trace::of(&e.state, side), &ctx, &e.params)
                        .map_err(|err| err.at(format!("boundary {}.{side:?}", e.id), t))?;
                    match side {
                        Side::Left => ghosts[i].left = b,
                        Side::Right => ghosts[i].right = b,
                    }
                }
            }
        }
        let mut worst_res: f64 = 0.0;
        let mut worst_imb: f64 = 0.0;
        for jn in &self.junctions {
            let ends: Vec<EndTrace> = jn
                .ends
                .iter()
                .map(|ep| {
                    let e = &self.edges[ep.edge];
                    EndTrace {
                        trace: Trace::of(&e.state, ep.side),
                        params: &e.params,
                    }
                })
                .collect();
            let form = self.edges[jn.ends[0].edge].state.form;
            let states = solve_junction(&ends, lambda, form).map_err(|err| err.at(format!("junction {}", jn.id), t))?;
            let res = junction_residuals(&ends, &states, lambda, form)
                .iter()
                .fold(0.0f64, |m, r| m.max(r.abs()));
            worst_res = worst_res.max(res);
            if form == ModelForm::Flow || form == ModelForm::Velocity {
                worst_imb = worst_imb.max(node_flux_imbalance(&ends, &states, lambda));
            }
            for (ep, st) in jn.ends.iter().zip(states) {
                match ep.side {
                    Side::Left => ghosts[ep.edge].left = st,
                    Side::Right => ghosts[ep.edge].right = st,
                }
            }
        }
        Ok((ghosts, worst_res, worst_imb))
    }

    fn end_closure(&self, edge: &Edge, side: Side, b: &BoundaryState, t: f64) -> EndClosure {
        match edge.binding(side) {
            EndBinding::Boundary(spec) => match spec.imposed_mass_flux(t, b, edge.state.form) {
                Some(q) => EndClosure::Dirichlet(q),
                None => EndClosure::Neumann,
            },
            EndBinding::Junction(_) => EndClosure::Neumann,
        }
    }

    /// Advances all edges by `dt` with relaxation speed `lambda`.
    pub fn advance(&mut self, dt: f64, lambda: f64) -> Result<StepDiagnostics> {
        let t = self.t();
        let (ghosts, coupling_residual, node_imbalance) = self.boundary_states(lambda)?;
        let closures: Vec<(EndClosure, EndClosure)> = self
            .edges
            .iter()
            .zip(&ghosts)
            .map(|(e, g)| {
                (
                    self.end_closure(e, Side::Left, &g.left, t),
                    self.end_closure(e, Side::Right, &g.right, t),
                )
            })
            .collect();
        let order = self.settings.order;
        let eps = self.settings.epsilon;
        let update = |(e, (g, cl)): (&mut Edge, (&Ghosts, &(EndClosure, EndClosure)))| -> Result<()> {
            let dx = e.grid.dx;
            let a_old: Vec<f64> = if e.params.gamma > 0.0 {
                e.state.u.iter().map(|c| c.a).collect()
            } else {
                Vec::new()
            };
            if eps > 0.0 {
                step_relaxation(&mut e.state, &e.params, g, dt, lambda, dx, eps)
            } else {
                step_limit(&mut e.state, &e.params, g, dt, lambda, dx, order)
            }
            .and_then(|_| {
                if e.params.gamma > 0.0 {
                    viscoelastic_step(&mut e.state, &a_old, &e.params, dt, dx, *cl)?;
                    e.state.close_relaxation(&e.params);
                }
                Ok(())
            })
            .map_err(|err| err.at(format!("edge {}", e.id), t))
        };
        if self.edges.len() > 1 {
            self.edges
                .par_iter_mut()
                .zip(ghosts.par_iter().zip(closures.par_iter()))
                .try_for_each(update)?;
        } else {
            self.edges
                .iter_mut()
                .zip(ghosts.iter().zip(closures.iter()))
                .try_for_each(update)?;
        }
        let t_new = t + dt;
        for e in &mut self.edges {
            e.state.t = t_new;
        }
        Ok(StepDiagnostics {
            t: t_new,
            dt,
            lambda,
            coupling_residual,
            node_imbalance,
        })
    }

    /// One step of at most `t_limit - t`, landing exactly on `t_limit` when
    /// the regular step would pass it.
    pub fn step(&mut self, t_limit: f64) -> Result<StepDiagnostics> {
        let t = self.t();
        let lambda = self.current_lambda().map_err(|e| e.at("network", t))?;
        let dx = self.edges.iter().map(|e| e.grid.dx).fold(f64::INFINITY, f64::min);
        let mut dt = compute_dt(lambda, dx, self.settings.cfl)?;
        let landing = t + dt >= t_limit;
        if landing {
            dt = t_limit - t;
        }
        let mut d = self.advance(dt, lambda)?;
        if landing {
            for e in &mut self.edges {
                e.state.t = t_limit;
            }
            d.t = t_limit;
        }
        trace!("t = {:.6e}, dt = {:.3e}, lambda = {:.4}", d.t, d.dt, d.lambda);
        Ok(d)
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            t: self.t(),
            edges: self.edges.iter().map(EdgeSnapshot::of).collect(),
        }
    }

    /// Coupling errors of every one-to-one junction at the current time.
    pub fn coupling_samples(&self) -> Vec<CouplingSample> {
        self.junctions
            .iter()
            .filter(|j| j.ends.len() == 2)
            .map(|j| {
                let (ei, eo) = (&self.edges[j.ends[0].edge], &self.edges[j.ends[1].edge]);
                let un = ei.state.u[ei.state.n_cells() - 1];
                let u1 = eo.state.u[0];
                let (e1, e2) = coupling_errors(un, &ei.params, u1, &eo.params, ei.state.form);
                CouplingSample {
                    t: self.t(),
                    junction_id: j.id.clone(),
                    e1,
                    e2,
                }
            })
            .collect()
    }

    /// Runs to `settings.t_end`, recording snapshots at the scheduled times
    /// and always at `t_end`.
    pub fn run(&mut self) -> Result<SimulationRecord> {
        self.run_observed(|_, _| Ok(()))
    }

    /// Like [`Network::run`], calling `observer` after every step.
    pub fn run_observed(
        &mut self,
        mut observer: impl FnMut(&Network, &StepDiagnostics) -> Result<()>,
    ) -> Result<SimulationRecord> {
        self.validate()?;
        let t_end = self.settings.t_end;
        let mut targets: Vec<f64> = self
            .settings
            .snapshots
            .iter()
            .copied()
            .filter(|&s| s >= self.t())
            .collect();
        targets.push(t_end);
        targets.sort_by(f64::total_cmp);
        targets.dedup();
        let mut record = SimulationRecord::default();
        for target in targets {
            while self.t() < target {
                let d = self.step(target)?;
                observer(self, &d)?;
                record.steps.push(d);
            }
            record.snapshots.push(self.snapshot());
            record.coupling.extend(self.coupling_samples());
        }
        debug!("run finished at t = {} after {} steps", self.t(), record.steps.len());
        Ok(record)
    }

    /// Total `sum A dx` over all edges.
    pub fn total_volume(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| e.state.u.iter().map(|c| c.a).sum::<f64>() * e.grid.dx)
            .sum()
    }
}

/// Initial cell data of an edge from a function of the cell centre.
pub fn sample_initial(grid: &Grid, f: impl Fn(f64) -> Cons) -> Vec<Cons> {
    grid.centers().into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_vessel_params, VesselInputs};
    use crate::signal::Signal;

    fn vessel(a0: f64, e: f64, length: f64) -> VesselParams {
        make_vessel_params(&VesselInputs {
            young_modulus: e,
            wall_thickness: 0.26,
            poisson_ratio: 0.5,
            a0,
            rho: 1.06,
            alpha: 1.0,
            mu: 0.0,
            gamma: 0.0,
            p_ext: 0.0,
            length,
        })
        .unwrap()
    }

    fn settings(t_end: f64) -> RunSettings {
        RunSettings {
            t_end,
            ..RunSettings::default()
        }
    }

    fn rest_edge(p: &VesselParams, x_left: f64, n: usize) -> (Grid, EdgeState) {
        let grid = Grid::new(x_left, p.length, n).unwrap();
        let state = EdgeState::new(vec![Cons::new(p.a0, 0.0); n], ModelForm::Flow, p).unwrap();
        (grid, state)
    }

    fn pulse() -> BoundarySpec {
        BoundarySpec::PrescribedPressure(Signal::sine(6e4, 2.5))
    }

    #[test]
    fn rest_state_invariant() {
        let p = vessel(6.6, 2.43e6, 100.0);
        let (g, s) = rest_edge(&p, 0.0, 50);
        let mut net = Network::single_edge(
            "a",
            p,
            g,
            s.clone(),
            BoundarySpec::Neumann,
            BoundarySpec::Neumann,
            settings(0.05),
        )
        .unwrap();
        let rec = net.run().unwrap();
        assert_eq!(net.edges[0].state.u, s.u);
        assert_eq!(rec.snapshots.len(), 1);
        assert_eq!(rec.snapshots[0].t, 0.05);
    }

    #[test]
    fn t_end_zero_records_initial_data() {
        let p = vessel(6.6, 2.43e6, 100.0);
        let (g, s) = rest_edge(&p, 0.0, 10);
        let mut net = Network::single_edge(
            "a",
            p,
            g,
            s,
            BoundarySpec::Neumann,
            BoundarySpec::Neumann,
            settings(0.0),
        )
        .unwrap();
        let rec = net.run().unwrap();
        assert_eq!(rec.snapshots.len(), 1);
        assert!(rec.steps.is_empty());
        assert!(rec.snapshots[0].edges[0].q.iter().all(|&q| q == 0.0));
    }

    #[test]
    fn snapshots_hit_exact_times() {
        let p = vessel(6.6, 2.43e6, 100.0);
        let (g, s) = rest_edge(&p, 0.0, 40);
        let mut st = settings(0.03);
        st.snapshots = vec![0.0, 0.01234, 0.02];
        let mut net = Network::single_edge("a", p, g, s, pulse(), BoundarySpec::NonReflecting, st).unwrap();
        let rec = net.run().unwrap();
        let times: Vec<f64> = rec.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(times, vec![0.0, 0.01234, 0.02, 0.03]);
        assert!(rec.steps.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn closed_edge_conserves_volume() {
        let p = vessel(6.6, 2.43e6, 100.0);
        let grid = Grid::new(0.0, 100.0, 100).unwrap();
        let init = sample_initial(&grid, |x| Cons::new(6.6 + (-0.005 * (x - 40.0f64).powi(2)).exp(), 10.0));
        let state = EdgeState::new(init, ModelForm::Flow, &p).unwrap();
        let mut net = Network::single_edge(
            "a",
            p,
            grid,
            state,
            BoundarySpec::Reflecting,
            BoundarySpec::Reflecting,
            settings(1.0),
        )
        .unwrap();
        let v0 = net.total_volume();
        for _ in 0..300 {
            net.step(1.0).unwrap();
        }
        assert!((net.total_volume() - v0).abs() <= 1e-12 * v0);
    }

    #[test]
    fn fixed_lambda_is_checked() {
        let p = vessel(6.6, 2.43e6, 100.0);
        let (g, s) = rest_edge(&p, 0.0, 10);
        let mut st = settings(0.01);
        st.lambda_policy = LambdaPolicy::FixedGlobal(100.0);
        let mut net = Network::single_edge("a", p, g, s, BoundarySpec::Neumann, BoundarySpec::Neumann, st).unwrap();
        let err = net.run().unwrap_err();
        assert!(!err.is_validation());
        assert!(err.to_string().contains("subcharacteristic"));
    }

    fn two_edge(pi: VesselParams, pii: VesselParams, n: usize, t_end: f64) -> Network {
        let (gi, si) = rest_edge(&pi, -pi.length, n);
        let (gii, sii) = rest_edge(&pii, 0.0, n);
        let edges = vec![
            Edge {
                id: "I".into(),
                params: pi,
                grid: gi,
                state: si,
                left: EndBinding::Boundary(pulse()),
                right: EndBinding::Junction(0),
            },
            Edge {
                id: "II".into(),
                params: pii,
                grid: gii,
                state: sii,
                left: EndBinding::Junction(0),
                right: EndBinding::Boundary(BoundarySpec::Neumann),
            },
        ];
        let junctions = vec![Junction {
            id: "J".into(),
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
        Network::new(edges, junctions, settings(t_end), SolverOptions::default()).unwrap()
    }

    #[test]
    fn transparent_junction_matches_single_edge() {
        let p = vessel(6.6, 2.43e6, 20.0);
        let mut coupled = two_edge(p.clone(), p.clone(), 40, 0.08);
        let long = vessel(6.6, 2.43e6, 40.0);
        let (g, s) = rest_edge(&long, -20.0, 80);
        let mut single = Network::single_edge("S", long, g, s, pulse(), BoundarySpec::Neumann, settings(0.08)).unwrap();
        while single.t() < 0.08 {
            let d = single.step(0.08).unwrap();
            let dc = coupled.step(0.08).unwrap();
            assert!((d.dt - dc.dt).abs() <= 1e-12 * d.dt);
            let joined: Vec<Cons> = coupled.edges.iter().flat_map(|e| e.state.u.clone()).collect();
            for (a, b) in joined.iter().zip(&single.edges[0].state.u) {
                assert!((*a - *b).max_abs() <= 1e-10 * b.max_abs());
            }
        }
        assert!(coupled.edges[1].state.u.iter().any(|c| c.q.abs() > 1.0));
    }

    #[test]
    fn validation_catches_bad_topology() {
        let p = vessel(6.6, 2.43e6, 20.0);
        let mut net = two_edge(p.clone(), p.clone(), 10, 0.01);
        net.junctions[0].ends.swap(0, 1);
        assert!(net.validate().is_err());
        let mut net = two_edge(p.clone(), p, 10, 0.01);
        net.edges[1].left = EndBinding::Junction(3);
        assert!(net.validate().unwrap_err().is_validation());
    }

    #[test]
    fn relaxation_mode_rejects_second_order() {
        let p = vessel(6.6, 2.43e6, 20.0);
        let mut net = two_edge(p.clone(), p, 10, 0.01);
        net.settings.epsilon = 1e-3;
        net.settings.order = SchemeOrder::Second;
        assert!(net.validate().is_err());
    }

    #[test]
    fn stiffness_jump_reflects_a_wave() {
        let pi = vessel(6.6, 1.25 * 2.43e6, 400.0);
        let pii = vessel(6.6, 1.75 * 2.43e6, 400.0);
        let mut net = two_edge(pi, pii, 200, 0.6);
        let rec = net.run().unwrap();
        assert!(rec
            .steps
            .iter()
            .all(|s| s.coupling_residual <= 1e-9 && s.node_imbalance <= 1e-10));
        assert_eq!(rec.coupling.len(), 1);
    }
}
