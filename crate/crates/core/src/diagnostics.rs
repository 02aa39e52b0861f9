//! Read-only monitors over solver output: energy budget, still-state
//! residuals, piezometric head and run-to-run comparisons.

use crate::error::{Error, Result};
use crate::model::{CellState, LayerEnergies, Model};
use crate::solver::{apply_boundaries, BoundaryProgram, Mesh, Mode, Snapshot};

/// Piezometric head of one cell in both height conventions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiezometricHead {
    /// `Z + h_w`, with `h_w` measured from the pipe axis.
    pub algebraic: f64,
    /// `Z + h_w + R`, the water level above the pipe bottom plus elevation.
    pub bottom_referenced: f64,
}

pub fn piezometric_head(state: &CellState, model: &Model, z: f64) -> Result<PiezometricHead> {
    let h = model.section().height_from_area(state.a)?;
    let algebraic = z + h;
    Ok(PiezometricHead {
        algebraic,
        bottom_referenced: algebraic + model.section().radius(),
    })
}

/// Energy totals of one snapshot, `Σ E h_i`, per unit water density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyTotals {
    pub t: f64,
    pub air: f64,
    pub water: f64,
}

impl EnergyTotals {
    pub fn total(&self) -> f64 {
        self.air + self.water
    }
}

/// Discrete energy balance between two consecutive snapshots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyStep {
    pub t: f64,
    pub dt: f64,
    /// `Δ(Σ E h)/Δt + H_out - H_in`.
    pub total: f64,
    /// Air balance minus the exchange term.
    pub air: f64,
    /// Water balance plus the exchange term.
    pub water: f64,
    /// `Σ h_i c_a² M/(γ(S-A)) (A^{n+1} - A^n)/Δt`, energy handed from the
    /// water layer to the air layer.
    pub exchange: f64,
    /// Size of the largest term entering the balances, including the stored
    /// totals over `Δt` whose difference sets the rounding floor.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub totals: Vec<EnergyTotals>,
    pub steps: Vec<EnergyStep>,
}

impl EnergyReport {
    /// `Σ |r_E| Δt`: energy created or dissipated over the run.
    pub fn residual_norm(&self) -> f64 {
        self.steps.iter().map(|s| s.total.abs() * s.dt).sum()
    }

    /// Largest `|r_a + r_w - r_E|` relative to the step's scale.
    pub fn max_exchange_defect(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| {
                let defect = (s.air + s.water - s.total).abs();
                if s.scale > 0.0 {
                    defect / s.scale
                } else {
                    defect
                }
            })
            .fold(0.0, f64::max)
    }
}

struct CellEnergies {
    energies: Vec<LayerEnergies>,
    pressure_heads: Vec<f64>,
}

fn cell_energies(states: &[CellState], mesh: &Mesh, model: &Model) -> Result<CellEnergies> {
    let mut energies = Vec::with_capacity(states.len());
    let mut pressure_heads = Vec::with_capacity(states.len());
    for (s, z) in states.iter().zip(mesh.bottom()) {
        let derived = model.derive(s, None)?;
        energies.push(model.energies_from(s, &derived, *z)?);
        pressure_heads.push(derived.air_pressure_head);
    }
    Ok(CellEnergies {
        energies,
        pressure_heads,
    })
}

/// Entropy fluxes `(H_a, H_w)` through both pipe ends, each taken as the
/// mean of the end cell and its ghost. Wall ghosts make them vanish.
fn boundary_fluxes(
    states: &[CellState],
    mesh: &Mesh,
    model: &Model,
    program: &BoundaryProgram,
    mode: Mode,
    t: f64,
) -> Result<[(f64, f64); 2]> {
    let (up, down) = apply_boundaries(states, program, t, model, mode)?;
    let n = states.len();
    let z = mesh.bottom();
    let mut out = [(0.0, 0.0); 2];
    for (k, (ghost, cell, zc)) in [(up, states[0], z[0]), (down, states[n - 1], z[n - 1])].into_iter().enumerate() {
        let g = model.layer_energies(&ghost, zc)?;
        let c = model.layer_energies(&cell, zc)?;
        out[k] = (0.5 * (g.air_flux + c.air_flux), 0.5 * (g.water_flux + c.water_flux));
    }
    Ok(out)
}

/// Discrete energy budget over consecutive snapshots:
///
/// ```text
/// r_E = Δ(Σ E h)/Δt + H(L) - H(0)
/// r_a = Δ(Σ E_a h)/Δt + H_a(L) - H_a(0) - X
/// r_w = Δ(Σ E_w h)/Δt + H_w(L) - H_w(0) + X
/// ```
///
/// with `X` the exchange term at the earlier snapshot. Boundary fluxes are
/// evaluated at the earlier snapshot.
pub fn energy_budget(
    snapshots: &[Snapshot],
    mesh: &Mesh,
    model: &Model,
    program: &BoundaryProgram,
    mode: Mode,
) -> Result<EnergyReport> {
    if snapshots.len() < 2 {
        return Err(Error::Mismatch(format!("energy budget needs 2 snapshots, got {}", snapshots.len())));
    }
    for s in snapshots {
        if s.states.len() != mesh.len() {
            return Err(Error::Mismatch(format!(
                "snapshot at t = {} has {} cells, mesh has {}",
                s.t,
                s.states.len(),
                mesh.len()
            )));
        }
    }
    let widths = mesh.widths();
    let per_cell: Vec<CellEnergies> = snapshots
        .iter()
        .map(|s| cell_energies(&s.states, mesh, model))
        .collect::<Result<_>>()?;
    let totals: Vec<EnergyTotals> = snapshots
        .iter()
        .zip(&per_cell)
        .map(|(s, e)| {
            let (air, water) = e
                .energies
                .iter()
                .zip(widths)
                .fold((0.0, 0.0), |(a, w), (c, h)| (a + c.air * h, w + c.water * h));
            EnergyTotals { t: s.t, air, water }
        })
        .collect();

    let mut steps = Vec::with_capacity(snapshots.len() - 1);
    for k in 0..snapshots.len() - 1 {
        let (before, after) = (&snapshots[k], &snapshots[k + 1]);
        let dt = after.t - before.t;
        if !(dt > 0.0) {
            return Err(Error::Mismatch(format!("snapshots at t = {} and {} are not increasing", before.t, after.t)));
        }
        let [(ha_in, hw_in), (ha_out, hw_out)] = boundary_fluxes(&before.states, mesh, model, program, mode, before.t)?;
        let exchange: f64 = per_cell[k]
            .pressure_heads
            .iter()
            .zip(before.states.iter().zip(&after.states))
            .zip(widths)
            .map(|((p, (b, a)), h)| h * p * (a.a - b.a) / dt)
            .sum();
        let d_air = (totals[k + 1].air - totals[k].air) / dt;
        let d_water = (totals[k + 1].water - totals[k].water) / dt;
        let flux_air = ha_out - ha_in;
        let flux_water = hw_out - hw_in;
        let stored = (totals[k].air.abs() + totals[k].water.abs() + totals[k + 1].air.abs() + totals[k + 1].water.abs()) / dt;
        let scale = [d_air, d_water, flux_air, flux_water, exchange, stored]
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max);
        steps.push(EnergyStep {
            t: before.t,
            dt,
            total: (totals[k + 1].total() - totals[k].total()) / dt + flux_air + flux_water,
            air: d_air + flux_air - exchange,
            water: d_water + flux_water + exchange,
            exchange,
            scale,
        });
    }
    Ok(EnergyReport { totals, steps })
}

/// How far a set of states is from a discrete rest state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StillStateResidual {
    /// Largest jump between neighbours of `h cos θ + Z + M c_a²/(gγ(S-A))`,
    /// with `h` measured from the pipe bottom.
    pub head: f64,
    /// Largest jump between neighbours of `c_a²/(γ-1)`.
    pub sound: f64,
    /// Largest absolute value of each quantity, for relative comparisons.
    pub head_scale: f64,
    pub sound_scale: f64,
    pub max_water_velocity: f64,
    pub max_air_velocity: f64,
}

impl StillStateResidual {
    pub fn relative_head(&self) -> f64 {
        relative(self.head, self.head_scale)
    }

    pub fn relative_sound(&self) -> f64 {
        relative(self.sound, self.sound_scale)
    }
}

fn relative(value: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        value / scale
    } else {
        value
    }
}

pub fn still_state_residual(states: &[CellState], mesh: &Mesh, model: &Model) -> Result<StillStateResidual> {
    if states.len() != mesh.len() {
        return Err(Error::Mismatch(format!("{} states for {} cells", states.len(), mesh.len())));
    }
    let c = model.constants();
    let cos = model.section().cos_theta();
    let r = model.section().radius();
    let mut head = Vec::with_capacity(states.len());
    let mut sound = Vec::with_capacity(states.len());
    let mut out = StillStateResidual {
        head: 0.0,
        sound: 0.0,
        head_scale: 0.0,
        sound_scale: 0.0,
        max_water_velocity: 0.0,
        max_air_velocity: 0.0,
    };
    for (s, z) in states.iter().zip(mesh.bottom()) {
        let derived = model.derive(s, None)?;
        head.push((derived.water.height + r) * cos + z + derived.air_pressure_head / c.gravity);
        sound.push(derived.air_sound_speed_sq / (c.gamma - 1.0));
        out.max_water_velocity = out.max_water_velocity.max(s.water_velocity().abs());
        out.max_air_velocity = out.max_air_velocity.max(s.air_velocity().abs());
    }
    let spread = |v: &[f64]| v.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    let largest = |v: &[f64]| v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    out.head = spread(&head);
    out.sound = spread(&sound);
    out.head_scale = largest(&head);
    out.sound_scale = largest(&sound);
    Ok(out)
}

/// Values at one probe location and output time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSample {
    pub t: f64,
    pub x: f64,
    /// Bottom-referenced piezometric head, m.
    pub piezo: f64,
    pub discharge: f64,
    /// Pa; zero when the cell holds no air.
    pub air_pressure: f64,
}

/// Time series at the cell containing `x`.
pub fn probe_series(snapshots: &[Snapshot], mesh: &Mesh, model: &Model, x: f64) -> Result<Vec<ProbeSample>> {
    let cell = mesh
        .locate(x)
        .ok_or_else(|| Error::Config(format!("probe at x = {x} m lies outside the pipe")))?;
    snapshots
        .iter()
        .map(|snap| {
            let s = snap.states.get(cell).ok_or_else(|| {
                Error::Mismatch(format!("snapshot at t = {} has only {} cells", snap.t, snap.states.len()))
            })?;
            let air_area = s.air_area(model.section());
            let air_pressure = if s.m > 0.0 { model.air_pressure(s.m, air_area)? } else { 0.0 };
            Ok(ProbeSample {
                t: snap.t,
                x,
                piezo: piezometric_head(s, model, mesh.bottom()[cell])?.bottom_referenced,
                discharge: s.q,
                air_pressure,
            })
        })
        .collect()
}

/// Quantities compared between two probe series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeQuantity {
    Piezo,
    Discharge,
    AirPressure,
}

impl ProbeQuantity {
    pub const ALL: [ProbeQuantity; 3] = [ProbeQuantity::Piezo, ProbeQuantity::Discharge, ProbeQuantity::AirPressure];

    pub fn name(self) -> &'static str {
        match self {
            ProbeQuantity::Piezo => "piezo",
            ProbeQuantity::Discharge => "discharge",
            ProbeQuantity::AirPressure => "air_pressure",
        }
    }

    pub fn of(self, s: &ProbeSample) -> f64 {
        match self {
            ProbeQuantity::Piezo => s.piezo,
            ProbeQuantity::Discharge => s.discharge,
            ProbeQuantity::AirPressure => s.air_pressure,
        }
    }
}

/// Deviation of series `a` from reference series `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    pub quantity: ProbeQuantity,
    pub max_abs: f64,
    /// `max_t |a - b| / |b|`, skipping times where both vanish.
    pub max_relative: f64,
    /// `max_t |a - b| / max_t |b|`.
    pub max_normalized: f64,
    pub peak_a: f64,
    pub peak_b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeComparison {
    pub x: f64,
    pub a: Vec<ProbeSample>,
    pub b: Vec<ProbeSample>,
    pub deviations: Vec<Deviation>,
}

impl ProbeComparison {
    pub fn deviation(&self, quantity: ProbeQuantity) -> &Deviation {
        self.deviations
            .iter()
            .find(|d| d.quantity == quantity)
            .expect("every quantity is compared")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub probes: Vec<ProbeComparison>,
}

/// Compares two aligned probe series, sample by sample.
pub fn compare_probe_series(a: &[ProbeSample], b: &[ProbeSample]) -> Result<ProbeComparison> {
    if a.len() != b.len() {
        return Err(Error::Mismatch(format!("probe series have {} and {} samples", a.len(), b.len())));
    }
    let x = a.first().or(b.first()).map(|s| s.x).unwrap_or(f64::NAN);
    for (sa, sb) in a.iter().zip(b) {
        if sa.x != sb.x {
            return Err(Error::Mismatch(format!("probe positions {} and {} differ", sa.x, sb.x)));
        }
    }
    let deviations = ProbeQuantity::ALL
        .iter()
        .map(|&quantity| {
            let mut d = Deviation {
                quantity,
                max_abs: 0.0,
                max_relative: 0.0,
                max_normalized: 0.0,
                peak_a: f64::NEG_INFINITY,
                peak_b: f64::NEG_INFINITY,
            };
            let mut largest_b: f64 = 0.0;
            for (sa, sb) in a.iter().zip(b) {
                let (va, vb) = (quantity.of(sa), quantity.of(sb));
                let diff = (va - vb).abs();
                d.max_abs = d.max_abs.max(diff);
                if vb != 0.0 {
                    d.max_relative = d.max_relative.max(diff / vb.abs());
                } else if diff != 0.0 {
                    d.max_relative = f64::INFINITY;
                }
                largest_b = largest_b.max(vb.abs());
                d.peak_a = d.peak_a.max(va);
                d.peak_b = d.peak_b.max(vb);
            }
            d.max_normalized = relative(d.max_abs, largest_b);
            d
        })
        .collect();
    Ok(ProbeComparison {
        x,
        a: a.to_vec(),
        b: b.to_vec(),
        deviations,
    })
}

/// Probe-by-probe comparison of two runs on the same mesh, aligned by output
/// index. Typically `a` is a two-layer run and `b` its single-layer twin.
pub fn compare_runs(
    a: &[Snapshot],
    b: &[Snapshot],
    mesh: &Mesh,
    model: &Model,
    probes: &[f64],
) -> Result<ComparisonReport> {
    if a.len() != b.len() {
        return Err(Error::Mismatch(format!("runs have {} and {} snapshots", a.len(), b.len())));
    }
    for (sa, sb) in a.iter().zip(b) {
        if sa.states.len() != mesh.len() || sb.states.len() != mesh.len() {
            return Err(Error::Mismatch(format!(
                "snapshots have {} and {} cells, mesh has {}",
                sa.states.len(),
                sb.states.len(),
                mesh.len()
            )));
        }
    }
    let probes = probes
        .iter()
        .map(|&x| {
            let pa = probe_series(a, mesh, model, x)?;
            let pb = probe_series(b, mesh, model, x)?;
            compare_probe_series(&pa, &pb)
        })
        .collect::<Result<_>>()?;
    Ok(ComparisonReport { probes })
}
