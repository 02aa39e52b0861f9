//! Scenario configuration, presets and CSV output.
//!
//! Configuration files are flat `key = value` lines with `#` comments.
//! Lists are comma separated; elevation steps are `x:dz` pairs.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::diagnostics::{compare_probe_series, ComparisonReport, ProbeSample};
use crate::error::{Error, Result};
use crate::geometry::CrossSection;
use crate::model::{CellState, Model, PhysicalConstants};
use crate::parallel::Execution;
use crate::solver::{BoundaryProgram, Clamps, Downstream, Mesh, Mode, Scenario, Snapshot, TimeController, Upstream};

/// Column names of both CSV outputs, in order.
pub const SNAPSHOT_COLUMNS: [&str; 13] =
    ["t", "x", "h_w", "A", "Q", "u", "M", "D", "v", "air_pressure", "piezo", "E_a", "E_w"];

pub const COMPARISON_COLUMNS: [&str; 7] =
    ["x", "quantity", "max_abs", "max_relative", "max_normalized", "peak_a", "peak_b"];

pub const PRESET_NAMES: [&str; 4] = ["paper-low-air", "paper-high-air", "paper-single-layer", "still-state"];

pub const SNAPSHOT_FILE: &str = "snapshots.csv";
pub const PROBE_FILE: &str = "probes.csv";

const HIGH_AIR_DENSITY: f64 = 1.29349;
const LOW_AIR_DENSITY: f64 = 1.29349e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpstreamConfig {
    Wall,
    /// Ramp from the initial height to `target_height` (above the bottom).
    Ramp { target_height: f64, duration: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DownstreamConfig {
    Wall,
    AirDensity(f64),
}

/// Fully validated scenario description. Heights are measured from the
/// pipe bottom, angles in radians, everything else in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub length: f64,
    pub diameter: f64,
    pub slope: f64,
    /// Bottom elevation jumps `(x, dz)`, added to every cell centre past `x`.
    pub elevation_steps: Vec<(f64, f64)>,
    pub cells: usize,
    pub constants: PhysicalConstants,
    pub initial_height: f64,
    pub initial_discharge: f64,
    pub initial_air_discharge: f64,
    pub initial_air_density: f64,
    pub upstream: UpstreamConfig,
    pub downstream: DownstreamConfig,
    pub t_end: f64,
    pub cfl: f64,
    pub output_interval: f64,
    pub max_steps: usize,
    pub mode: Mode,
    pub probes: Vec<f64>,
    pub clamps: Clamps,
}

const KEYS: &[&str] = &[
    "length",
    "diameter",
    "slope",
    "elevation_steps",
    "cells",
    "gravity",
    "gamma",
    "water_density",
    "air_ref_pressure",
    "air_ref_density",
    "initial_height",
    "initial_discharge",
    "initial_air_discharge",
    "initial_air_density",
    "upstream",
    "ramp_target_height",
    "ramp_duration",
    "downstream",
    "downstream_air_density",
    "t_end",
    "cfl",
    "output_interval",
    "max_steps",
    "mode",
    "probes",
    "clamp_dry",
    "clamp_air",
];

struct Entries<'a> {
    values: HashMap<&'a str, (usize, &'a str)>,
}

fn entry_error(line: usize, key: &str, message: impl Into<String>) -> Error {
    Error::ConfigEntry {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

impl<'a> Entries<'a> {
    fn parse(text: &'a str) -> Result<Self> {
        let mut values = HashMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {line}: expected `key = value`, got `{content}`")))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(entry_error(line, key, "unknown key"));
            }
            if let Some((first, _)) = values.insert(key, (line, value.trim())) {
                return Err(entry_error(line, key, format!("already set on line {first}")));
            }
        }
        Ok(Entries { values })
    }

    fn line(&self, key: &str) -> usize {
        self.values.get(key).map_or(0, |(l, _)| *l)
    }

    fn raw(&self, key: &str) -> Option<(usize, &'a str)> {
        self.values.get(key).copied()
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key)
            .map(|(line, v)| {
                let x: f64 = v
                    .parse()
                    .map_err(|_| entry_error(line, key, format!("`{v}` is not a number")))?;
                if !x.is_finite() {
                    return Err(entry_error(line, key, "must be finite"));
                }
                Ok(x)
            })
            .transpose()
    }

    fn required(&self, key: &str) -> Result<f64> {
        self.number(key)?
            .ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
    }

    fn or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.number(key)?.unwrap_or(default))
    }

    fn count(&self, key: &str, default: usize) -> Result<usize> {
        match self.raw(key) {
            None => Ok(default),
            Some((line, v)) => v
                .parse()
                .map_err(|_| entry_error(line, key, format!("`{v}` is not a non-negative integer"))),
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.raw(key)
            .map(|(line, v)| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<f64>()
                            .ok()
                            .filter(|x| x.is_finite())
                            .ok_or_else(|| entry_error(line, key, format!("`{s}` is not a number")))
                    })
                    .collect()
            })
            .transpose()
    }

    fn check(&self, key: &str, ok: bool, message: &str) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(entry_error(self.line(key), key, message))
        }
    }
}

/// Parses and validates a configuration, applying defaults.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let e = Entries::parse(text)?;
    let length = e.required("length")?;
    e.check("length", length > 0.0, "must be positive")?;
    let diameter = e.required("diameter")?;
    e.check("diameter", diameter > 0.0, "must be positive")?;
    let t_end = e.required("t_end")?;
    e.check("t_end", t_end >= 0.0, "must not be negative")?;

    let slope = e.or("slope", 0.0)?;
    e.check("slope", slope.abs() < std::f64::consts::FRAC_PI_2, "must lie in (-pi/2, pi/2)")?;

    let elevation_steps = match e.raw("elevation_steps") {
        None => Vec::new(),
        Some((line, v)) => v
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|pair| {
                let parsed = pair
                    .split_once(':')
                    .and_then(|(x, dz)| Some((x.trim().parse::<f64>().ok()?, dz.trim().parse::<f64>().ok()?)));
                match parsed {
                    Some((x, dz)) if x.is_finite() && dz.is_finite() && (0.0..=length).contains(&x) => Ok((x, dz)),
                    _ => Err(entry_error(
                        line,
                        "elevation_steps",
                        format!("`{pair}` is not an `x:dz` pair with x inside the pipe"),
                    )),
                }
            })
            .collect::<Result<_>>()?,
    };

    let cells = e.count("cells", 200)?;
    e.check("cells", cells >= 1, "must be at least 1")?;

    let defaults = PhysicalConstants::default();
    let constants = PhysicalConstants {
        gravity: e.or("gravity", defaults.gravity)?,
        gamma: e.or("gamma", defaults.gamma)?,
        water_density: e.or("water_density", defaults.water_density)?,
        air_ref_pressure: e.or("air_ref_pressure", defaults.air_ref_pressure)?,
        air_ref_density: e.or("air_ref_density", defaults.air_ref_density)?,
    };
    e.check("gravity", constants.gravity > 0.0, "must be positive")?;
    e.check("gamma", constants.gamma > 1.0, "must exceed 1")?;
    e.check("water_density", constants.water_density > 0.0, "must be positive")?;
    e.check("air_ref_pressure", constants.air_ref_pressure > 0.0, "must be positive")?;
    e.check("air_ref_density", constants.air_ref_density > 0.0, "must be positive")?;

    let initial_height = e.or("initial_height", 0.1 * diameter)?;
    e.check(
        "initial_height",
        initial_height > 0.0 && initial_height < diameter,
        "must lie strictly between 0 and the diameter",
    )?;
    let initial_discharge = e.or("initial_discharge", 0.0)?;
    let initial_air_discharge = e.or("initial_air_discharge", 0.0)?;
    let initial_air_density = e.or("initial_air_density", constants.air_ref_density)?;
    e.check("initial_air_density", initial_air_density >= 0.0, "must not be negative")?;

    let upstream = match e.raw("upstream").map(|(_, v)| v).unwrap_or("wall") {
        "wall" => UpstreamConfig::Wall,
        "ramp" => {
            let target_height = e.required("ramp_target_height")?;
            e.check(
                "ramp_target_height",
                target_height > 0.0 && target_height < diameter,
                "must lie strictly between 0 and the diameter",
            )?;
            let duration = e.required("ramp_duration")?;
            e.check("ramp_duration", duration >= 0.0, "must not be negative")?;
            UpstreamConfig::Ramp {
                target_height,
                duration,
            }
        }
        other => return Err(entry_error(e.line("upstream"), "upstream", format!("`{other}` is not `wall` or `ramp`"))),
    };
    let downstream = match e.raw("downstream").map(|(_, v)| v).unwrap_or("wall") {
        "wall" => DownstreamConfig::Wall,
        "air-density" => {
            let rho = e.required("downstream_air_density")?;
            e.check("downstream_air_density", rho > 0.0, "must be positive")?;
            DownstreamConfig::AirDensity(rho)
        }
        other => {
            return Err(entry_error(
                e.line("downstream"),
                "downstream",
                format!("`{other}` is not `wall` or `air-density`"),
            ))
        }
    };
    for (key, used) in [
        ("ramp_target_height", matches!(upstream, UpstreamConfig::Ramp { .. })),
        ("ramp_duration", matches!(upstream, UpstreamConfig::Ramp { .. })),
        ("downstream_air_density", matches!(downstream, DownstreamConfig::AirDensity(_))),
    ] {
        e.check(key, used || e.raw(key).is_none(), "not used by the selected boundary condition")?;
    }

    let cfl = e.or("cfl", 0.95)?;
    e.check("cfl", cfl > 0.0 && cfl <= 1.0, "must lie in (0, 1]")?;
    let output_interval = e.or("output_interval", t_end / 100.0)?;
    e.check("output_interval", output_interval >= 0.0, "must not be negative")?;
    let max_steps = e.count("max_steps", 10_000_000)?;
    e.check("max_steps", max_steps >= 1, "must be at least 1")?;

    let mode = match e.raw("mode").map(|(_, v)| v).unwrap_or("two-layer") {
        "two-layer" => Mode::TwoLayer,
        "single-layer" => Mode::SingleLayer,
        other => {
            return Err(entry_error(
                e.line("mode"),
                "mode",
                format!("`{other}` is not `two-layer` or `single-layer`"),
            ))
        }
    };

    let probes = e.list("probes")?.unwrap_or_else(|| vec![0.5 * length]);
    e.check(
        "probes",
        probes.iter().all(|x| (0.0..=length).contains(x)),
        "every probe must lie inside the pipe",
    )?;

    let default_clamps = Clamps::default();
    let clamps = Clamps {
        dry: e.or("clamp_dry", default_clamps.dry)?,
        air: e.or("clamp_air", default_clamps.air)?,
    };
    e.check("clamp_dry", (0.0..0.5).contains(&clamps.dry), "must lie in [0, 0.5)")?;
    e.check("clamp_air", (0.0..0.5).contains(&clamps.air), "must lie in [0, 0.5)")?;

    Ok(ScenarioConfig {
        length,
        diameter,
        slope,
        elevation_steps,
        cells,
        constants,
        initial_height,
        initial_discharge,
        initial_air_discharge,
        initial_air_density,
        upstream,
        downstream,
        t_end,
        cfl,
        output_interval,
        max_steps,
        mode,
        probes,
        clamps,
    })
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

fn join(values: impl IntoIterator<Item = String>) -> String {
    values.into_iter().collect::<Vec<_>>().join(", ")
}

impl ScenarioConfig {
    /// Configuration text that parses back to `self`.
    pub fn to_config_text(&self) -> String {
        let c = &self.constants;
        let mut out = String::new();
        let mut put = |key: &str, value: String| {
            let _ = writeln!(out, "{key} = {value}");
        };
        put("length", format!("{:?}", self.length));
        put("diameter", format!("{:?}", self.diameter));
        put("slope", format!("{:?}", self.slope));
        put(
            "elevation_steps",
            join(self.elevation_steps.iter().map(|(x, dz)| format!("{x:?}:{dz:?}"))),
        );
        put("cells", self.cells.to_string());
        put("gravity", format!("{:?}", c.gravity));
        put("gamma", format!("{:?}", c.gamma));
        put("water_density", format!("{:?}", c.water_density));
        put("air_ref_pressure", format!("{:?}", c.air_ref_pressure));
        put("air_ref_density", format!("{:?}", c.air_ref_density));
        put("initial_height", format!("{:?}", self.initial_height));
        put("initial_discharge", format!("{:?}", self.initial_discharge));
        put("initial_air_discharge", format!("{:?}", self.initial_air_discharge));
        put("initial_air_density", format!("{:?}", self.initial_air_density));
        match self.upstream {
            UpstreamConfig::Wall => put("upstream", "wall".into()),
            UpstreamConfig::Ramp {
                target_height,
                duration,
            } => {
                put("upstream", "ramp".into());
                put("ramp_target_height", format!("{target_height:?}"));
                put("ramp_duration", format!("{duration:?}"));
            }
        }
        match self.downstream {
            DownstreamConfig::Wall => put("downstream", "wall".into()),
            DownstreamConfig::AirDensity(rho) => {
                put("downstream", "air-density".into());
                put("downstream_air_density", format!("{rho:?}"));
            }
        }
        put("t_end", format!("{:?}", self.t_end));
        put("cfl", format!("{:?}", self.cfl));
        put("output_interval", format!("{:?}", self.output_interval));
        put("max_steps", self.max_steps.to_string());
        put("mode", self.mode.name().into());
        put("probes", join(self.probes.iter().map(|x| format!("{x:?}"))));
        put("clamp_dry", format!("{:?}", self.clamps.dry));
        put("clamp_air", format!("{:?}", self.clamps.air));
        out
    }

    pub fn model(&self) -> Result<Model> {
        Model::new(CrossSection::new(0.5 * self.diameter, self.slope)?, self.constants)
    }

    /// Mesh with bottom `Z(x) = -x sin θ` plus the elevation steps.
    pub fn mesh(&self) -> Result<Mesh> {
        let mesh = Mesh::uniform(self.length, self.cells)?;
        let sin = self.slope.sin();
        let bottom = mesh
            .centers()
            .iter()
            .map(|&x| {
                -x * sin
                    + self
                        .elevation_steps
                        .iter()
                        .filter(|(at, _)| x > *at)
                        .map(|(_, dz)| dz)
                        .sum::<f64>()
            })
            .collect();
        mesh.with_bottom(bottom)
    }

    pub fn boundaries(&self) -> BoundaryProgram {
        BoundaryProgram {
            upstream: match self.upstream {
                UpstreamConfig::Wall => Upstream::Wall,
                UpstreamConfig::Ramp {
                    target_height,
                    duration,
                } => Upstream::HeightRamp {
                    initial_height: self.initial_height,
                    target_height,
                    duration,
                },
            },
            downstream: match self.downstream {
                DownstreamConfig::Wall => Downstream::Wall,
                DownstreamConfig::AirDensity(rho) => Downstream::AirDensity(rho),
            },
        }
    }

    /// Uniform initial state at the configured height above the bottom.
    pub fn initial_state(&self, model: &Model) -> Result<CellState> {
        let section = model.section();
        let a = section.wetted_area(self.initial_height - section.radius())?;
        let m = match self.mode {
            Mode::TwoLayer => self.initial_air_density / self.constants.water_density * (section.full_area() - a),
            Mode::SingleLayer => 0.0,
        };
        let d = if m > 0.0 { self.initial_air_discharge } else { 0.0 };
        Ok(CellState::new(m, d, a, self.initial_discharge))
    }

    pub fn scenario(&self, execution: Execution) -> Result<Scenario> {
        let model = self.model()?;
        let mesh = self.mesh()?;
        let initial = vec![self.initial_state(&model)?; mesh.len()];
        Ok(Scenario {
            model,
            mesh,
            initial,
            boundaries: self.boundaries(),
            time: TimeController {
                cfl: self.cfl,
                t_end: self.t_end,
                max_steps: self.max_steps,
            },
            mode: self.mode,
            clamps: self.clamps,
            output_interval: Some(self.output_interval),
            execution,
        })
    }
}

/// Built-in scenarios: a 100 m pipe of diameter 2 m, 200 cells, water at
/// rest 0.2 m deep. The transient presets raise the upstream level to 0.4 m over
/// 25 s and run for 80 s.
pub fn preset_scenario(name: &str) -> Result<ScenarioConfig> {
    let base = ScenarioConfig {
        length: 100.0,
        diameter: 2.0,
        slope: 0.0,
        elevation_steps: Vec::new(),
        cells: 200,
        constants: PhysicalConstants::default(),
        initial_height: 0.2,
        initial_discharge: 0.0,
        initial_air_discharge: 0.0,
        initial_air_density: HIGH_AIR_DENSITY,
        upstream: UpstreamConfig::Ramp {
            target_height: 0.4,
            duration: 25.0,
        },
        downstream: DownstreamConfig::AirDensity(HIGH_AIR_DENSITY),
        t_end: 80.0,
        cfl: 0.95,
        output_interval: 0.5,
        max_steps: 10_000_000,
        mode: Mode::TwoLayer,
        probes: vec![25.0, 50.0, 75.0],
        clamps: Clamps::default(),
    };
    match name {
        "paper-high-air" => Ok(base),
        "paper-low-air" => Ok(ScenarioConfig {
            initial_air_density: LOW_AIR_DENSITY,
            downstream: DownstreamConfig::AirDensity(LOW_AIR_DENSITY),
            ..base
        }),
        "paper-single-layer" => Ok(ScenarioConfig {
            mode: Mode::SingleLayer,
            ..base
        }),
        "still-state" => Ok(ScenarioConfig {
            upstream: UpstreamConfig::Wall,
            ..base
        }),
        _ => Err(Error::UnknownPreset {
            name: name.to_string(),
            available: PRESET_NAMES.join(", "),
        }),
    }
}

/// One output row: the `SNAPSHOT_COLUMNS` values of a cell.
pub fn snapshot_row(t: f64, x: f64, z: f64, state: &CellState, model: &Model) -> Result<[f64; 13]> {
    let derived = model.derive(state, None)?;
    let height = derived.water.height + model.section().radius();
    let air_pressure = if state.m > 0.0 {
        model.air_pressure(state.m, derived.air_area)?
    } else {
        0.0
    };
    let energies = model.energies_from(state, &derived, z)?;
    Ok([
        t,
        x,
        height,
        state.a,
        state.q,
        state.water_velocity(),
        state.m,
        state.d,
        state.air_velocity(),
        air_pressure,
        z + height,
        energies.air,
        energies.water,
    ])
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn format_row(row: &[f64]) -> Vec<String> {
    row.iter().map(|v| format!("{v:.16e}")).collect()
}

fn csv_error(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes every cell of every snapshot.
pub fn write_snapshots<W: Write>(w: W, snapshots: &[Snapshot], mesh: &Mesh, model: &Model) -> Result<()> {
    let path = Path::new("<snapshots>");
    let mut out = csv_writer(w);
    out.write_record(SNAPSHOT_COLUMNS).map_err(csv_error(path))?;
    for snap in snapshots {
        if snap.states.len() != mesh.len() {
            return Err(Error::Mismatch(format!(
                "snapshot at t = {} has {} cells, mesh has {}",
                snap.t,
                snap.states.len(),
                mesh.len()
            )));
        }
        for ((s, x), z) in snap.states.iter().zip(mesh.centers()).zip(mesh.bottom()) {
            let row = snapshot_row(snap.t, *x, *z, s, model)?;
            out.write_record(format_row(&row)).map_err(csv_error(path))?;
        }
    }
    out.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes one row per output time per probe, in probe order then time order.
/// The `x` column holds the probe position.
pub fn write_probes<W: Write>(w: W, snapshots: &[Snapshot], mesh: &Mesh, model: &Model, probes: &[f64]) -> Result<()> {
    let path = Path::new("<probes>");
    let mut out = csv_writer(w);
    out.write_record(SNAPSHOT_COLUMNS).map_err(csv_error(path))?;
    for &x in probes {
        let cell = mesh
            .locate(x)
            .ok_or_else(|| Error::Config(format!("probe at x = {x} m lies outside the pipe")))?;
        for snap in snapshots {
            let s = snap.states.get(cell).ok_or_else(|| {
                Error::Mismatch(format!("snapshot at t = {} has only {} cells", snap.t, snap.states.len()))
            })?;
            let row = snapshot_row(snap.t, x, mesh.bottom()[cell], s, model)?;
            out.write_record(format_row(&row)).map_err(csv_error(path))?;
        }
    }
    out.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvFiles {
    pub snapshots: PathBuf,
    pub probes: PathBuf,
}

fn create(path: &Path) -> Result<std::io::BufWriter<fs::File>> {
    fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn relabel(err: Error, path: &Path) -> Error {
    match err {
        Error::Io { source, .. } => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        Error::Csv { source, .. } => Error::Csv {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    }
}

/// Writes `snapshots.csv` and `probes.csv` into `dir`, creating it if needed.
pub fn emit_csv(snapshots: &[Snapshot], mesh: &Mesh, model: &Model, probes: &[f64], dir: &Path) -> Result<CsvFiles> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let files = CsvFiles {
        snapshots: dir.join(SNAPSHOT_FILE),
        probes: dir.join(PROBE_FILE),
    };
    write_snapshots(create(&files.snapshots)?, snapshots, mesh, model).map_err(|e| relabel(e, &files.snapshots))?;
    write_probes(create(&files.probes)?, snapshots, mesh, model, probes).map_err(|e| relabel(e, &files.probes))?;
    Ok(files)
}

/// Reads a probe file back, grouped by probe position in file order.
pub fn read_probes(path: &Path) -> Result<Vec<Vec<ProbeSample>>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_error(path))?;
    let header = reader.headers().map_err(csv_error(path))?;
    if !header.iter().eq(SNAPSHOT_COLUMNS) {
        return Err(Error::Mismatch(format!("{}: unexpected header", path.display())));
    }
    let column = |name: &str| SNAPSHOT_COLUMNS.iter().position(|c| *c == name).expect("known column");
    let (t, x, q, p, piezo) = (column("t"), column("x"), column("Q"), column("air_pressure"), column("piezo"));
    let mut groups: Vec<Vec<ProbeSample>> = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(csv_error(path))?;
        let field = |i: usize| -> Result<f64> {
            record.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| {
                Error::Mismatch(format!("{}: row {}: bad `{}` value", path.display(), k + 2, SNAPSHOT_COLUMNS[i]))
            })
        };
        let sample = ProbeSample {
            t: field(t)?,
            x: field(x)?,
            piezo: field(piezo)?,
            discharge: field(q)?,
            air_pressure: field(p)?,
        };
        match groups.iter_mut().find(|g| g[0].x == sample.x) {
            Some(g) => g.push(sample),
            None => groups.push(vec![sample]),
        }
    }
    Ok(groups)
}

/// Compares the probe files of two output directories. Samples are aligned
/// by output index: with nearest-step sampling the recorded times of two runs
/// differ by up to one time step each.
pub fn compare_output_dirs(a: &Path, b: &Path) -> Result<ComparisonReport> {
    let pa = read_probes(&a.join(PROBE_FILE))?;
    let pb = read_probes(&b.join(PROBE_FILE))?;
    if pa.len() != pb.len() {
        return Err(Error::Mismatch(format!("{} and {} probes", pa.len(), pb.len())));
    }
    let probes = pa
        .iter()
        .zip(&pb)
        .map(|(sa, sb)| compare_probe_series(sa, sb))
        .collect::<Result<_>>()?;
    Ok(ComparisonReport { probes })
}

pub fn write_comparison<W: Write>(w: W, report: &ComparisonReport) -> Result<()> {
    let path = Path::new("<comparison>");
    let mut out = csv_writer(w);
    out.write_record(COMPARISON_COLUMNS).map_err(csv_error(path))?;
    for probe in &report.probes {
        for d in &probe.deviations {
            let num = |v: f64| format!("{v:.16e}");
            out.write_record([
                num(probe.x),
                d.quantity.name().to_string(),
                num(d.max_abs),
                num(d.max_relative),
                num(d.max_normalized),
                num(d.peak_a),
                num(d.peak_b),
            ])
            .map_err(csv_error(path))?;
        }
    }
    out.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One sampled state of the hyperbolicity map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSample {
    pub fill: f64,
    pub water_velocity: f64,
    pub air_velocity: f64,
    pub spectrum: crate::model::Spectrum,
}

pub const EIGEN_COLUMNS: [&str; 13] = [
    "fill",
    "u",
    "v",
    "re1",
    "im1",
    "re2",
    "im2",
    "re3",
    "im3",
    "re4",
    "im4",
    "max_imaginary",
    "hyperbolic",
];

/// Spectra over water fill fractions `k/(fills+1)` and water velocities
/// evenly spread over `[-max_slip, max_slip]`, with still air at the
/// configured initial density.
pub fn hyperbolicity_map(config: &ScenarioConfig, fills: usize, slips: usize, max_slip: f64) -> Result<Vec<EigenSample>> {
    let model = config.model()?;
    let full = model.section().full_area();
    let mut out = Vec::with_capacity(fills * slips);
    for i in 1..=fills {
        let fill = i as f64 / (fills + 1) as f64;
        let a = fill * full;
        let m = config.initial_air_density / config.constants.water_density * (full - a);
        for j in 0..slips {
            let u = if slips > 1 {
                -max_slip + 2.0 * max_slip * j as f64 / (slips - 1) as f64
            } else {
                0.0
            };
            let state = CellState::new(m, 0.0, a, u * a);
            out.push(EigenSample {
                fill,
                water_velocity: u,
                air_velocity: 0.0,
                spectrum: model.eigenvalue_spectrum(&state)?,
            });
        }
    }
    Ok(out)
}

pub fn write_hyperbolicity_map<W: Write>(w: W, samples: &[EigenSample]) -> Result<()> {
    let path = Path::new("<eigen>");
    let mut out = csv_writer(w);
    out.write_record(EIGEN_COLUMNS).map_err(csv_error(path))?;
    for s in samples {
        let mut row = vec![s.fill, s.water_velocity, s.air_velocity];
        for r in &s.spectrum.roots {
            row.push(r.re);
            row.push(r.im);
        }
        row.push(s.spectrum.max_imaginary);
        let mut fields = format_row(&row);
        fields.push(u8::from(s.spectrum.hyperbolic).to_string());
        out.write_record(fields).map_err(csv_error(path))?;
    }
    out.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
