//! Explicit first-order finite-volume solver over the whole pipe.
//!
//! Each step builds one ghost cell per pipe end, evaluates the kinetic
//! interface fluxes of both layers, applies
//! `W_i ← W_i - (Δt/h_i)(F⁻_{i+1/2} - F⁺_{i-1/2})` and finally clamps cells
//! that dried out or filled up.

use crate::error::{Error, Result};
use crate::kinetic::{equilibrium_from, potential_jumps, GibbsEquilibrium, InterfaceFlux, SQRT_3};
use crate::model::{CellState, Flux, Model};
use crate::parallel::{self, Execution};

/// Cell-centred mesh with a piecewise-constant bottom elevation.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    faces: Vec<f64>,
    centers: Vec<f64>,
    widths: Vec<f64>,
    bottom: Vec<f64>,
}

impl Mesh {
    /// `cells` equal cells on `[0, length]`, flat bottom at zero.
    pub fn uniform(length: f64, cells: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Mesh(format!("length {length} must be positive")));
        }
        let faces = (0..=cells).map(|k| length * k as f64 / cells as f64).collect();
        Mesh::from_faces(faces, vec![0.0; cells])
    }

    /// Mesh from face positions `x_{1/2} < … < x_{N+1/2}` and one bottom
    /// elevation per cell.
    pub fn from_faces(faces: Vec<f64>, bottom: Vec<f64>) -> Result<Self> {
        if faces.len() < 3 {
            return Err(Error::Mesh(format!("need at least 2 cells, got {}", faces.len().saturating_sub(1))));
        }
        let n = faces.len() - 1;
        if bottom.len() != n {
            return Err(Error::Mesh(format!("{} bottom elevations for {n} cells", bottom.len())));
        }
        if let Some(k) = faces.windows(2).position(|w| !(w[1] > w[0]) || !w[0].is_finite() || !w[1].is_finite()) {
            return Err(Error::Mesh(format!("faces {k} and {} are not increasing", k + 1)));
        }
        if let Some(k) = bottom.iter().position(|z| !z.is_finite()) {
            return Err(Error::Mesh(format!("bottom elevation of cell {k} is not finite")));
        }
        let centers = faces.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let widths = faces.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(Mesh {
            faces,
            centers,
            widths,
            bottom,
        })
    }

    /// Same cells, new bottom elevations.
    pub fn with_bottom(self, bottom: Vec<f64>) -> Result<Self> {
        Mesh::from_faces(self.faces, bottom)
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn faces(&self) -> &[f64] {
        &self.faces
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn bottom(&self) -> &[f64] {
        &self.bottom
    }

    pub fn length(&self) -> f64 {
        self.faces[self.faces.len() - 1] - self.faces[0]
    }

    pub fn min_width(&self) -> f64 {
        self.widths.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Index of the cell containing `x`; faces belong to the cell on their right,
    /// except the last one.
    pub fn locate(&self, x: f64) -> Option<usize> {
        let n = self.len();
        if !(x >= self.faces[0] && x <= self.faces[n]) {
            return None;
        }
        let k = self.faces.partition_point(|f| *f <= x);
        Some(k.saturating_sub(1).min(n - 1))
    }
}

/// Condition at the upstream end (`x = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Upstream {
    /// Reflective: no water or air enters.
    Wall,
    /// Water height above the pipe bottom rising linearly from
    /// `initial_height` to `target_height` over `duration` seconds, then held.
    /// Water discharge is free (the ghost takes the interior velocity), air
    /// discharge is zero.
    HeightRamp {
        initial_height: f64,
        target_height: f64,
        duration: f64,
    },
}

/// Condition at the downstream end (`x = L`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Downstream {
    Wall,
    /// Prescribed air density (kg/m³) with zero water and air discharge.
    AirDensity(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryProgram {
    pub upstream: Upstream,
    pub downstream: Downstream,
}

impl BoundaryProgram {
    pub const WALLS: BoundaryProgram = BoundaryProgram {
        upstream: Upstream::Wall,
        downstream: Downstream::Wall,
    };

    pub fn validate(&self, model: &Model) -> Result<()> {
        let diameter = 2.0 * model.section().radius();
        if let Upstream::HeightRamp {
            initial_height,
            target_height,
            duration,
        } = self.upstream
        {
            for (name, h) in [("ramp initial height", initial_height), ("ramp target height", target_height)] {
                if !(h > 0.0 && h < diameter) {
                    return Err(Error::Config(format!("{name} {h} m is outside (0, {diameter}) m")));
                }
            }
            if !(duration > 0.0 && duration.is_finite()) {
                return Err(Error::Config(format!("ramp duration {duration} s must be positive")));
            }
        }
        if let Downstream::AirDensity(rho) = self.downstream {
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(Error::Config(format!("downstream air density {rho} must be positive")));
            }
        }
        Ok(())
    }

    /// Upstream water height above the bottom at time `t`, if prescribed.
    pub fn upstream_height(&self, t: f64) -> Option<f64> {
        match self.upstream {
            Upstream::Wall => None,
            Upstream::HeightRamp {
                initial_height,
                target_height,
                duration,
            } => {
                let ramp = (t / duration).clamp(0.0, 1.0);
                Some(initial_height + (target_height - initial_height) * ramp)
            }
        }
    }
}

/// Whether the air layer is simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    TwoLayer,
    /// Saint-Venant water flow only; the air layer is identically empty.
    SingleLayer,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::TwoLayer => "two-layer",
            Mode::SingleLayer => "single-layer",
        }
    }
}

/// Ghost cells `(upstream, downstream)` for the interior `states` at time `t`.
/// Ghost bottoms equal the adjacent interior bottoms.
pub fn apply_boundaries(
    states: &[CellState],
    program: &BoundaryProgram,
    t: f64,
    model: &Model,
    mode: Mode,
) -> Result<(CellState, CellState)> {
    let (first, last) = match (states.first(), states.last()) {
        (Some(f), Some(l)) => (*f, *l),
        _ => return Err(Error::Mesh("no cells".into())),
    };
    let upstream = match program.upstream {
        Upstream::Wall => mirror(first),
        Upstream::HeightRamp { .. } => {
            let height = program.upstream_height(t).unwrap_or_default();
            let r = model.section().radius();
            if !(height > 0.0 && height < 2.0 * r) {
                return Err(Error::Config(format!("ramp height {height} m is outside (0, {}) m", 2.0 * r)));
            }
            let a = model.section().wetted_area(height - r)?;
            // Copying Q instead of u would amplify it by A_interior / A_ghost
            // on every step when the two areas differ.
            CellState::new(first.m, -first.d, a, a * first.water_velocity())
        }
    };
    let downstream = match program.downstream {
        Downstream::Wall => mirror(last),
        Downstream::AirDensity(rho) => {
            let m = match mode {
                Mode::TwoLayer => rho / model.constants().water_density * (model.section().full_area() - last.a),
                Mode::SingleLayer => 0.0,
            };
            CellState::new(m, -last.d, last.a, -last.q)
        }
    };
    Ok((upstream, downstream))
}

fn mirror(s: CellState) -> CellState {
    CellState::new(s.m, -s.d, s.a, -s.q)
}

/// Relative floors applied after each update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clamps {
    /// Minimum water area as a fraction of the section.
    pub dry: f64,
    /// Minimum air area as a fraction of the section; also scales the air
    /// mass floor `ε ρ_a,ref / ρ₀ S`.
    pub air: f64,
}

impl Default for Clamps {
    fn default() -> Self {
        Clamps { dry: 1e-8, air: 1e-8 }
    }
}

/// What [`clamp_dry_flood`] did to one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClampAction {
    pub dried: bool,
    /// The water area hit the pressurization limit.
    pub flooded: bool,
    pub air_floored: bool,
}

impl ClampAction {
    pub fn any(&self) -> bool {
        self.dried || self.flooded || self.air_floored
    }
}

/// Pulls a raw updated state back into the admissible set.
pub fn clamp_dry_flood(state: &mut CellState, model: &Model, clamps: &Clamps, mode: Mode) -> ClampAction {
    let s = model.section().full_area();
    let mut action = ClampAction::default();
    let dry = clamps.dry * s;
    let full = (1.0 - clamps.air) * s;
    if !(state.a >= dry) {
        state.a = dry;
        state.q = 0.0;
        action.dried = true;
    } else if state.a > full {
        state.a = full;
        action.flooded = true;
    }
    if mode == Mode::TwoLayer {
        let c = &model.constants();
        let floor = clamps.air * c.air_ref_density / c.water_density * s;
        if !(state.m >= floor) {
            state.m = floor;
            state.d = 0.0;
            action.air_floored = true;
        }
    }
    action
}

/// `Δt = cfl · min_i h_i / max_α(|u_α| + √3 b_α)` over the given cells.
pub fn stable_timestep(states: &[CellState], widths: &[f64], model: &Model, cfl: f64) -> Result<f64> {
    let mut dt = f64::INFINITY;
    for (cell, (state, width)) in states.iter().zip(widths).enumerate() {
        let derived = model.derive(state, None)?;
        let water = equilibrium_from(crate::model::Layer::Water, state, &derived, model)?;
        let air = equilibrium_from(crate::model::Layer::Air, state, &derived, model)?;
        dt = dt.min(cell_timestep(cell, &water, &air, *width)?);
    }
    Ok(cfl * dt)
}

fn cell_timestep(cell: usize, water: &GibbsEquilibrium, air: &GibbsEquilibrium, width: f64) -> Result<f64> {
    let mut speed: f64 = 0.0;
    for (eq, field) in [(water, "water wave speed"), (air, "air wave speed")] {
        if eq.is_empty() {
            continue;
        }
        let s = eq.mean_velocity.abs() + SQRT_3 * eq.spread;
        if !s.is_finite() {
            return Err(Error::NonFinite { cell, field, value: s });
        }
        speed = speed.max(s);
    }
    Ok(if speed > 0.0 { width / speed } else { f64::INFINITY })
}

/// CFL number, final time and step budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeController {
    pub cfl: f64,
    pub t_end: f64,
    pub max_steps: usize,
}

impl TimeController {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config(format!("cfl {} is outside (0, 1]", self.cfl)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end {} must be non-negative", self.t_end)));
        }
        Ok(())
    }
}

/// Everything needed to run one simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub model: Model,
    pub mesh: Mesh,
    pub initial: Vec<CellState>,
    pub boundaries: BoundaryProgram,
    pub time: TimeController,
    pub mode: Mode,
    pub clamps: Clamps,
    /// Spacing of the output times. `None`: first and last state only;
    /// `Some(0.0)`: every step.
    pub output_interval: Option<f64>,
    pub execution: Execution,
}

/// States of all cells at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub step: usize,
    pub states: Vec<CellState>,
}

/// Flux of mass through both pipe ends during one step, per unit time.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundaryFlux {
    /// Into the pipe at the upstream end.
    pub upstream: Flux,
    /// Out of the pipe at the downstream end.
    pub downstream: Flux,
}

/// Outcome of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub dt: f64,
    /// Minimum over cells of the updated water area before clamping, over `S`.
    pub raw_min_water: f64,
    /// Minimum over cells of the updated air mass before clamping, over
    /// `ρ_a,ref S / ρ₀`. Zero in single-layer mode.
    pub raw_min_air: f64,
    pub water: BoundaryFlux,
    pub air: BoundaryFlux,
    pub dried: usize,
    pub flooded: usize,
    pub air_floored: usize,
    /// Cells that reached the pressurization limit.
    pub flooded_cells: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
struct Prepared {
    water: GibbsEquilibrium,
    air: GibbsEquilibrium,
    angle: f64,
}

const EMPTY_PREP: Prepared = Prepared {
    water: GibbsEquilibrium::EMPTY,
    air: GibbsEquilibrium::EMPTY,
    angle: 0.0,
};

/// Time-stepping state of one simulation.
#[derive(Debug, Clone)]
pub struct Solver {
    model: Model,
    mesh: Mesh,
    boundaries: BoundaryProgram,
    mode: Mode,
    clamps: Clamps,
    execution: Execution,
    states: Vec<CellState>,
    t: f64,
    steps: usize,
    // Half-angles of the last water profiles, used to warm-start the area
    // inversion.
    angles: Vec<f64>,
    extended: Vec<CellState>,
    extended_bottom: Vec<f64>,
    prepared: Vec<Prepared>,
    fluxes: Vec<[InterfaceFlux; 2]>,
}

impl Solver {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        let n = scenario.mesh.len();
        if scenario.initial.len() != n {
            return Err(Error::Mesh(format!("{} initial states for {n} cells", scenario.initial.len())));
        }
        scenario.boundaries.validate(&scenario.model)?;
        scenario.time.validate()?;
        let mut states = scenario.initial.clone();
        if scenario.mode == Mode::SingleLayer {
            for s in &mut states {
                s.m = 0.0;
                s.d = 0.0;
            }
        }
        for (cell, s) in states.iter().enumerate() {
            check_finite(cell, s)?;
            scenario.model.derive(s, None)?;
        }
        let b = scenario.mesh.bottom();
        let mut extended_bottom = Vec::with_capacity(n + 2);
        extended_bottom.push(b[0]);
        extended_bottom.extend_from_slice(b);
        extended_bottom.push(b[n - 1]);
        Ok(Solver {
            model: scenario.model,
            mesh: scenario.mesh.clone(),
            boundaries: scenario.boundaries,
            mode: scenario.mode,
            clamps: scenario.clamps,
            execution: scenario.execution,
            states,
            t: 0.0,
            steps: 0,
            angles: vec![f64::NAN; n],
            extended: vec![CellState::default(); n + 2],
            extended_bottom,
            prepared: vec![EMPTY_PREP; n + 2],
            fluxes: vec![[InterfaceFlux::ZERO; 2]; n + 1],
        })
    }

    pub fn states(&self) -> &[CellState] {
        &self.states
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            t: self.t,
            step: self.steps,
            states: self.states.clone(),
        }
    }

    /// Ghost cells and per-cell equilibria at the current time.
    fn prepare(&mut self) -> Result<()> {
        let n = self.states.len();
        let (up, down) = apply_boundaries(&self.states, &self.boundaries, self.t, &self.model, self.mode)?;
        self.extended[0] = up;
        self.extended[1..=n].copy_from_slice(&self.states);
        self.extended[n + 1] = down;

        let model = &self.model;
        let extended = &self.extended;
        let angles = &self.angles;
        parallel::fill(self.execution, &mut self.prepared, |k| {
            let state = &extended[k];
            let hint = angles[k.saturating_sub(1).min(n - 1)];
            let derived = model.derive(state, hint.is_finite().then_some(hint))?;
            Ok(Prepared {
                water: equilibrium_from(crate::model::Layer::Water, state, &derived, model)?,
                air: equilibrium_from(crate::model::Layer::Air, state, &derived, model)?,
                angle: derived.water.angle,
            })
        })
        .map_err(|e| locate_error(e, n))?;
        for (angle, p) in self.angles.iter_mut().zip(&self.prepared[1..=n]) {
            *angle = p.angle;
        }
        Ok(())
    }

    fn prepared_timestep(&self) -> Result<f64> {
        let n = self.states.len();
        let widths = self.mesh.widths();
        let mut dt = f64::INFINITY;
        for (k, p) in self.prepared.iter().enumerate() {
            let cell = k.saturating_sub(1).min(n - 1);
            dt = dt.min(cell_timestep(cell, &p.water, &p.air, widths[cell])?);
        }
        Ok(dt)
    }

    /// Largest stable `Δt` at the current state for the given CFL number,
    /// ghost cells included.
    pub fn stable_timestep(&mut self, cfl: f64) -> Result<f64> {
        self.prepare()?;
        Ok(cfl * self.prepared_timestep()?)
    }

    /// One step of length `dt`.
    pub fn step(&mut self, dt: f64) -> Result<StepReport> {
        self.prepare()?;
        self.update(dt)
    }

    /// One CFL-limited step that does not overshoot `t_end`.
    pub fn advance(&mut self, cfl: f64, t_end: f64) -> Result<StepReport> {
        self.prepare()?;
        let mut dt = cfl * self.prepared_timestep()?;
        if self.t + dt >= t_end {
            dt = t_end - self.t;
        }
        self.update(dt)
    }

    fn update(&mut self, dt: f64) -> Result<StepReport> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("time step {dt} must be positive and finite")));
        }
        let n = self.states.len();
        let model = &self.model;
        let extended = &self.extended;
        let bottom = &self.extended_bottom;
        let prepared = &self.prepared;
        parallel::fill(self.execution, &mut self.fluxes, |k| {
            let (l, r) = (&extended[k], &extended[k + 1]);
            let [water, air] = potential_jumps(l, r, bottom[k], bottom[k + 1], model)?;
            let (pl, pr) = (&prepared[k], &prepared[k + 1]);
            Ok([
                InterfaceFlux::from_equilibria(&pl.water, &pr.water, water.delta_phi),
                InterfaceFlux::from_equilibria(&pl.air, &pr.air, air.delta_phi),
            ])
        })
        .map_err(|e| locate_error(e, n))?;

        let widths = self.mesh.widths();
        let fluxes = &self.fluxes;
        let c = &model.constants();
        let s_full = model.section().full_area();
        let water_unit = s_full;
        let air_unit = c.air_ref_density / c.water_density * s_full;

        let mut report = StepReport {
            dt,
            raw_min_water: f64::INFINITY,
            raw_min_air: if self.mode == Mode::TwoLayer { f64::INFINITY } else { 0.0 },
            water: BoundaryFlux {
                upstream: fluxes[0][0].plus,
                downstream: fluxes[n][0].minus,
            },
            air: BoundaryFlux {
                upstream: fluxes[0][1].plus,
                downstream: fluxes[n][1].minus,
            },
            dried: 0,
            flooded: 0,
            air_floored: 0,
            flooded_cells: Vec::new(),
        };
        for (i, state) in self.states.iter_mut().enumerate() {
            let ratio = dt / widths[i];
            let (left, right) = (&fluxes[i], &fluxes[i + 1]);
            let water = right[0].minus - left[0].plus;
            let air = right[1].minus - left[1].plus;
            state.a -= ratio * water.mass;
            state.q -= ratio * water.momentum;
            state.m -= ratio * air.mass;
            state.d -= ratio * air.momentum;
            check_finite(i, state)?;
            report.raw_min_water = report.raw_min_water.min(state.a / water_unit);
            if self.mode == Mode::TwoLayer {
                report.raw_min_air = report.raw_min_air.min(state.m / air_unit);
            }
            let action = clamp_dry_flood(state, model, &self.clamps, self.mode);
            report.dried += action.dried as usize;
            report.air_floored += action.air_floored as usize;
            if action.flooded {
                report.flooded += 1;
                report.flooded_cells.push(i);
            }
        }
        self.t += dt;
        self.steps += 1;
        Ok(report)
    }
}

fn check_finite(cell: usize, s: &CellState) -> Result<()> {
    for (field, value) in [("A", s.a), ("Q", s.q), ("M", s.m), ("D", s.d)] {
        if !value.is_finite() {
            return Err(Error::NonFinite { cell, field, value });
        }
    }
    Ok(())
}

// Errors from the parallel helpers carry extended-array indices.
fn locate_error(e: parallel::IndexedError, n: usize) -> Error {
    match e.error {
        Error::NonFinite { field, value, .. } => Error::NonFinite {
            cell: e.index.saturating_sub(1).min(n - 1),
            field,
            value,
        },
        other => other,
    }
}

/// A pressurization-limit clamp, kept for the run summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressurizationEvent {
    pub step: usize,
    pub t: f64,
    pub cell: usize,
}

/// At most this many pressurization events are stored; the count is exact.
pub const MAX_STORED_EVENTS: usize = 1024;

/// Totals over a whole run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub t_final: f64,
    pub min_dt: f64,
    pub max_dt: f64,
    pub raw_min_water: f64,
    pub raw_min_air: f64,
    pub dried: usize,
    pub flooded: usize,
    pub air_floored: usize,
    pub pressurization_events: Vec<PressurizationEvent>,
    /// `Σ A_i h_i` at start and end, m³.
    pub water_volume: (f64, f64),
    /// `Σ M_i h_i` at start and end, m³.
    pub air_mass: (f64, f64),
    /// Time-integrated water volume entering minus leaving through the ends.
    pub water_net_inflow: f64,
    pub air_net_inflow: f64,
}

impl RunSummary {
    /// Water volume change not explained by boundary fluxes, relative to the
    /// initial volume. Only meaningful when no clamp fired.
    pub fn water_volume_defect(&self) -> f64 {
        let (start, end) = self.water_volume;
        (end - start - self.water_net_inflow) / start
    }

    pub fn air_mass_defect(&self) -> f64 {
        let (start, end) = self.air_mass;
        if start == 0.0 {
            return 0.0;
        }
        (end - start - self.air_net_inflow) / start
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// One snapshot per output time, nearest-step sampled.
    pub snapshots: Vec<Snapshot>,
    pub final_state: Snapshot,
    pub summary: RunSummary,
}

fn totals(states: &[CellState], widths: &[f64]) -> (f64, f64) {
    states
        .iter()
        .zip(widths)
        .fold((0.0, 0.0), |(w, a), (s, h)| (w + s.a * h, a + s.m * h))
}

/// Output times `0, Δ, 2Δ, …` up to `t_end`, each paired with the step
/// whose time lies nearest.
struct Sampler {
    interval: Option<f64>,
    t_end: f64,
    next: usize,
}

impl Sampler {
    fn target(&self, k: usize) -> Option<f64> {
        match self.interval {
            Some(d) if d > 0.0 => {
                let t = k as f64 * d;
                (t <= self.t_end * (1.0 + 1e-12)).then_some(t)
            }
            _ => None,
        }
    }

    /// Called after a step took the solution from `prev` to `current`.
    fn offer(&mut self, prev: &Snapshot, current: &Snapshot, out: &mut Vec<Snapshot>) {
        if self.interval == Some(0.0) {
            out.push(current.clone());
            return;
        }
        while let Some(target) = self.target(self.next) {
            if current.t < target {
                break;
            }
            let chosen = if (prev.t - target).abs() <= (current.t - target).abs() {
                prev
            } else {
                current
            };
            out.push(chosen.clone());
            self.next += 1;
        }
    }

    fn finish(&mut self, last: &Snapshot, out: &mut Vec<Snapshot>) {
        match self.interval {
            None => out.push(last.clone()),
            Some(d) if d > 0.0 => {
                while self.target(self.next).is_some() {
                    out.push(last.clone());
                    self.next += 1;
                }
            }
            _ => {}
        }
    }
}

/// Runs `scenario` to `t_end`.
pub fn run(scenario: &Scenario) -> Result<RunOutput> {
    let mut solver = Solver::new(scenario)?;
    let time = scenario.time;
    if let Some(d) = scenario.output_interval {
        if !(d >= 0.0 && d.is_finite()) {
            return Err(Error::Config(format!("output interval {d} must be non-negative")));
        }
    }
    let widths = scenario.mesh.widths().to_vec();
    let (water0, air0) = totals(solver.states(), &widths);
    let mut summary = RunSummary {
        steps: 0,
        t_final: 0.0,
        min_dt: f64::INFINITY,
        max_dt: 0.0,
        raw_min_water: f64::INFINITY,
        raw_min_air: f64::INFINITY,
        dried: 0,
        flooded: 0,
        air_floored: 0,
        pressurization_events: Vec::new(),
        water_volume: (water0, water0),
        air_mass: (air0, air0),
        water_net_inflow: 0.0,
        air_net_inflow: 0.0,
    };

    let mut snapshots = Vec::new();
    let mut sampler = Sampler {
        interval: scenario.output_interval,
        t_end: time.t_end,
        next: 0,
    };
    let mut prev = solver.snapshot();
    snapshots.push(prev.clone());
    sampler.next = 1;

    while solver.time() < time.t_end {
        if solver.steps() >= time.max_steps {
            return Err(Error::StepLimit {
                max_steps: time.max_steps,
                t: solver.time(),
            });
        }
        let report = solver.advance(time.cfl, time.t_end)?;
        summary.min_dt = summary.min_dt.min(report.dt);
        summary.max_dt = summary.max_dt.max(report.dt);
        summary.raw_min_water = summary.raw_min_water.min(report.raw_min_water);
        summary.raw_min_air = summary.raw_min_air.min(report.raw_min_air);
        summary.dried += report.dried;
        summary.air_floored += report.air_floored;
        summary.flooded += report.flooded;
        for &cell in &report.flooded_cells {
            if summary.pressurization_events.len() < MAX_STORED_EVENTS {
                summary.pressurization_events.push(PressurizationEvent {
                    step: solver.steps(),
                    t: solver.time(),
                    cell,
                });
            }
        }
        summary.water_net_inflow += report.dt * (report.water.upstream.mass - report.water.downstream.mass);
        summary.air_net_inflow += report.dt * (report.air.upstream.mass - report.air.downstream.mass);

        let current = solver.snapshot();
        sampler.offer(&prev, &current, &mut snapshots);
        prev = current;
    }
    let final_state = solver.snapshot();
    sampler.finish(&final_state, &mut snapshots);

    let (water1, air1) = totals(&final_state.states, &widths);
    summary.steps = solver.steps();
    summary.t_final = solver.time();
    summary.water_volume.1 = water1;
    summary.air_mass.1 = air1;
    if summary.steps == 0 {
        summary.min_dt = 0.0;
    }
    Ok(RunOutput {
        snapshots,
        final_state,
        summary,
    })
}

/// Runs independent scenarios, in parallel when `execution` allows.
pub fn run_batch(scenarios: &[Scenario], execution: Execution) -> Vec<Result<RunOutput>> {
    parallel::map(execution, scenarios, run)
}
