//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line
//! with the measured values, then asserts.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use pipeflow::diagnostics::{
    compare_runs, energy_budget, piezometric_head, probe_series, still_state_residual, ProbeQuantity,
};
use pipeflow::io::preset_scenario;
use pipeflow::kinetic::{equilibrium, equilibrium_spread, interface_flux, GibbsEquilibrium, InterfaceFlux};
use pipeflow::parallel;
use pipeflow::{
    run, BoundaryProgram, CellState, Clamps, CrossSection, Downstream, Execution, Layer, Mesh, Mode, Model,
    PhysicalConstants, Scenario, Solver, TimeController, Upstream,
};
use pipeflow_oracle::{integrate, integrate_piecewise};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(name: &str, pass: bool, detail: String) {
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale
}

// Still state -------------------------------------------------------------

#[test]
fn still_state_is_preserved() {
    let start = Instant::now();
    let config = preset_scenario("still-state").unwrap();
    let scenario = config.scenario(Execution::Parallel).unwrap();
    let mut solver = Solver::new(&scenario).unwrap();
    for _ in 0..1000 {
        let dt = solver.stable_timestep(config.cfl).unwrap();
        solver.step(dt).unwrap();
    }
    let res = still_state_residual(solver.states(), &scenario.mesh, &scenario.model).unwrap();
    let elapsed = start.elapsed();
    let pass = scenario.mesh.len() == 200
        && res.max_water_velocity <= 1e-12
        && res.max_air_velocity <= 1e-12
        && res.relative_head() <= 1e-11
        && res.relative_sound() <= 1e-11
        && elapsed < Duration::from_secs(5);
    report(
        "well-balanced still state (N=200, 1000 steps)",
        pass,
        format!(
            "max|u| = {:.3e}, max|v| = {:.3e}, cst1 var = {:.3e}, cst2 var = {:.3e}, {:.2?}",
            res.max_water_velocity,
            res.max_air_velocity,
            res.relative_head(),
            res.relative_sound(),
            elapsed
        ),
    );
    assert!(pass);
}

// Positivity --------------------------------------------------------------

const POSITIVITY_RUNS: usize = 100_000;
const POSITIVITY_CELLS: usize = 50;
const POSITIVITY_STEPS: usize = 100;

fn random_scenario(seed: u64, model: &Model) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let section = model.section();
    let full = section.full_area();
    let rho0 = model.constants().water_density;
    let initial = (0..POSITIVITY_CELLS)
        .map(|_| {
            let fill = match rng.gen_range(0..4) {
                0 => 10f64.powf(rng.gen_range(-8.0..-2.0)),
                1 => rng.gen_range(0.95..0.999),
                _ => rng.gen_range(0.01..0.95),
            };
            let a = fill * full;
            let rho = 10f64.powf(rng.gen_range(-3.0..1.0));
            let m = rho / rho0 * (full - a);
            CellState::new(m, m * rng.gen_range(-30.0..30.0), a, a * rng.gen_range(-3.0..3.0))
        })
        .collect();
    let boundaries = match seed % 3 {
        0 => BoundaryProgram::WALLS,
        1 => BoundaryProgram {
            upstream: Upstream::HeightRamp {
                initial_height: 0.2,
                target_height: 1.6,
                duration: 0.5,
            },
            downstream: Downstream::AirDensity(1.29349),
        },
        _ => BoundaryProgram {
            upstream: Upstream::Wall,
            downstream: Downstream::AirDensity(0.01),
        },
    };
    Scenario {
        model: model.clone(),
        mesh: Mesh::uniform(50.0, POSITIVITY_CELLS).unwrap(),
        initial,
        boundaries,
        time: TimeController {
            cfl: 1.0,
            t_end: 1e9,
            max_steps: POSITIVITY_STEPS,
        },
        mode: Mode::TwoLayer,
        clamps: Clamps::default(),
        output_interval: None,
        execution: Execution::Sequential,
    }
}

/// Smallest pre-clamp `(A/S, M/(ρ_ref S/ρ₀))` over all steps, or an error.
fn positivity_run(seed: u64, model: &Model) -> Result<(f64, f64), String> {
    let scenario = random_scenario(seed, model);
    let mut solver = Solver::new(&scenario).map_err(|e| e.to_string())?;
    let (mut water, mut air) = (f64::INFINITY, f64::INFINITY);
    for _ in 0..POSITIVITY_STEPS {
        let dt = solver.stable_timestep(1.0).map_err(|e| e.to_string())?;
        let step = solver.step(dt).map_err(|e| e.to_string())?;
        water = water.min(step.raw_min_water);
        air = air.min(step.raw_min_air);
    }
    Ok((water, air))
}

#[test]
fn positivity_under_cfl_one() {
    let model = Model::new(CrossSection::new(1.0, 0.0).unwrap(), PhysicalConstants::default()).unwrap();
    let seeds: Vec<u64> = (0..POSITIVITY_RUNS as u64).collect();
    let start = Instant::now();
    let results = parallel::map(Execution::Parallel, &seeds, |&s| positivity_run(s, &model));
    let elapsed = start.elapsed();
    let mut violations = 0usize;
    let mut errors = Vec::new();
    let (mut water, mut air) = (f64::INFINITY, f64::INFINITY);
    for (seed, r) in seeds.iter().zip(&results) {
        match r {
            Ok((w, a)) => {
                water = water.min(*w);
                air = air.min(*a);
                if *w < -1e-12 || *a < -1e-12 {
                    violations += 1;
                }
            }
            Err(e) => errors.push(format!("seed {seed}: {e}")),
        }
    }
    let pass = violations == 0 && errors.is_empty() && elapsed < Duration::from_secs(60);
    report(
        "positivity (1e5 random ICs, N=50, 100 steps, cfl=1)",
        pass,
        format!(
            "violations = {violations}, errors = {}, min A/S = {water:.3e}, min M/M_ref = {air:.3e}, {elapsed:.2?}{}",
            errors.len(),
            errors.first().map(|e| format!(", first error: {e}")).unwrap_or_default()
        ),
    );
    assert!(pass);
}

// Kinetic moments and fluxes ----------------------------------------------

fn random_state(rng: &mut ChaCha8Rng, model: &Model) -> CellState {
    let full = model.section().full_area();
    let a = rng.gen_range(0.02..0.98) * full;
    let rho = 10f64.powf(rng.gen_range(-2.0..0.7));
    let m = rho / model.constants().water_density * (full - a);
    CellState::new(m, m * rng.gen_range(-50.0..50.0), a, a * rng.gen_range(-5.0..5.0))
}

fn random_model(rng: &mut ChaCha8Rng) -> Model {
    let section = CrossSection::new(rng.gen_range(0.2..3.0), rng.gen_range(-0.3..0.3)).unwrap();
    Model::new(section, PhysicalConstants::default()).unwrap()
}

/// Gibbs density written from its definition: `A/(2√3 b)` on `|ξ - u| ≤ √3 b`.
fn gibbs(a: f64, u: f64, b: f64, xi: f64) -> f64 {
    if (xi - u).abs() <= 3f64.sqrt() * b {
        a / (2.0 * 3f64.sqrt() * b)
    } else {
        0.0
    }
}

/// `(mass, momentum)` of F⁻ (`minus`) or F⁺ by quadrature of the kinetic
/// interface integrals: transmitted particles keep `ξ² ∓ 2Δφ`, the rest
/// are reflected.
fn quadrature_interface(l: (f64, f64, f64), r: (f64, f64, f64), dphi: f64, minus: bool) -> (f64, f64) {
    let fl = |xi: f64| gibbs(l.0, l.1, l.2, xi);
    let fr = |xi: f64| gibbs(r.0, r.1, r.2, xi);
    let density = |xi: f64| {
        if minus {
            if xi > 0.0 {
                fl(xi)
            } else if xi * xi < 2.0 * dphi {
                fl(-xi)
            } else {
                fr(-(xi * xi - 2.0 * dphi).sqrt())
            }
        } else if xi < 0.0 {
            fr(xi)
        } else if xi * xi < -2.0 * dphi {
            fr(-xi)
        } else {
            fl((xi * xi + 2.0 * dphi).sqrt())
        }
    };
    let mut cuts = vec![0.0, (2.0 * dphi.abs()).sqrt(), -(2.0 * dphi.abs()).sqrt()];
    for (_, u, b) in [l, r] {
        for edge in [u - 3f64.sqrt() * b, u + 3f64.sqrt() * b] {
            for e2 in [edge * edge, edge * edge + 2.0 * dphi, edge * edge - 2.0 * dphi] {
                cuts.push(edge);
                cuts.push(-edge);
                if e2 >= 0.0 {
                    cuts.push(e2.sqrt());
                    cuts.push(-e2.sqrt());
                }
            }
        }
    }
    let bound = 1.0 + l.1.abs() + r.1.abs() + 3.0 * (l.2 + r.2) + (2.0 * dphi.abs()).sqrt();
    let mass = integrate_piecewise(|x| x * density(x), -bound, bound, &cuts, 1e-15, 1e-13);
    let mom = integrate_piecewise(|x| x * x * density(x), -bound, bound, &cuts, 1e-15, 1e-13);
    (mass, mom)
}

#[test]
fn kinetic_moments_and_fluxes() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut moment_err: f64 = 0.0;
    for _ in 0..10_000 {
        let model = random_model(&mut rng);
        let state = random_state(&mut rng, &model);
        for layer in [Layer::Water, Layer::Air] {
            let (amount, discharge) = state.layer(layer);
            let b = equilibrium_spread(layer, &state, &model).unwrap();
            let m = equilibrium(layer, &state, &model).unwrap().moments();
            let expect = [amount, discharge, discharge * discharge / amount + b * b * amount];
            let scales = [amount, amount * (discharge.abs() / amount + b), expect[2]];
            for k in 0..3 {
                moment_err = moment_err.max(rel(m[k], expect[k], scales[k]));
            }
        }
    }

    let mut flux_err: f64 = 0.0;
    for _ in 0..1000 {
        let l = (rng.gen_range(0.1..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(0.2..2.0));
        let r = (rng.gen_range(0.1..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(0.2..2.0));
        let dphi = rng.gen_range(-6.0..6.0);
        let f = InterfaceFlux::from_equilibria(
            &GibbsEquilibrium::new(l.0, l.1, l.2),
            &GibbsEquilibrium::new(r.0, r.1, r.2),
            dphi,
        );
        // Natural one-sided flux sizes, used where a component nearly vanishes.
        let mass_scale = l.0 * (l.1.abs() + l.2) + r.0 * (r.1.abs() + r.2);
        let mom_scale = l.0 * (l.1 * l.1 + l.2 * l.2) + r.0 * (r.1 * r.1 + r.2 * r.2);
        for (minus, got) in [(true, f.minus), (false, f.plus)] {
            let (mass, mom) = quadrature_interface(l, r, dphi, minus);
            flux_err = flux_err.max(rel(got.mass, mass, mass.abs().max(mass_scale)));
            flux_err = flux_err.max(rel(got.momentum, mom, mom.abs().max(mom_scale)));
        }
    }
    let pass = moment_err <= 1e-12 && flux_err <= 1e-8;
    report(
        "kinetic moments (1e4 equilibria) and interface fluxes (1e3 triples)",
        pass,
        format!("max moment rel err = {moment_err:.3e}, max flux rel err vs quadrature = {flux_err:.3e}"),
    );
    assert!(pass);
}

#[test]
fn flux_consistency_on_identical_neighbours() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let model = random_model(&mut rng);
        let s = random_state(&mut rng, &model);
        let z = rng.gen_range(-5.0..5.0);
        for layer in [Layer::Water, Layer::Air] {
            let f = interface_flux(layer, &s, &s, z, z, &model).unwrap();
            let macro_flux = model.macroscopic_flux(layer, &s).unwrap();
            let (amount, discharge) = s.layer(layer);
            let b = equilibrium_spread(layer, &s, &model).unwrap();
            let mass_scale = discharge.abs() + amount * b;
            for side in [f.minus, f.plus] {
                worst = worst.max(rel(side.mass, macro_flux.mass, mass_scale));
                worst = worst.max(rel(side.momentum, macro_flux.momentum, macro_flux.momentum.abs()));
            }
        }
    }
    let pass = worst <= 1e-12;
    report(
        "flux consistency (1e4 states, identical neighbours, flat bottom)",
        pass,
        format!("max rel deviation from macroscopic flux = {worst:.3e}"),
    );
    assert!(pass);
}

// Eigenvalues -------------------------------------------------------------

fn air_for_sound_speed(model: &Model, a: f64, ca: f64) -> f64 {
    // c_a² = γ p_a/ρ_ref (ρ/ρ_ref)^(γ-1), inverted for ρ.
    let c = model.constants();
    let ca_ref2 = c.gamma * c.air_ref_pressure / c.air_ref_density;
    let rho = c.air_ref_density * (ca * ca / ca_ref2).powf(1.0 / (c.gamma - 1.0));
    rho / c.water_density * (model.section().full_area() - a)
}

#[test]
fn eigenvalue_diagnostic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let model = Model::new(CrossSection::new(1.0, 0.0).unwrap(), PhysicalConstants::default()).unwrap();
    let full = model.section().full_area();

    // u = v: u ± ½√(2S₁ ± 2√(S₁² - 4c_a²c_w²)), S₁ = c_a²(1+β) + c_w².
    let mut closed_err: f64 = 0.0;
    for _ in 0..1000 {
        let a = rng.gen_range(0.05..0.95) * full;
        let rho = 10f64.powf(rng.gen_range(-2.0..0.7));
        let m = rho / model.constants().water_density * (full - a);
        let u = rng.gen_range(-5.0..5.0);
        let s = CellState::new(m, m * u, a, a * u);
        let ca2 = model.air_sound_speed_sq(m, full - a).unwrap();
        let cw2 = model.water_sound_speed(a).unwrap().powi(2);
        let beta = a * m / (full - a).powi(2);
        let s1 = ca2 * (1.0 + beta) + cw2;
        let disc = (s1 * s1 - 4.0 * ca2 * cw2).sqrt();
        let mut expect: Vec<f64> = [1.0, -1.0]
            .iter()
            .flat_map(|outer| [1.0, -1.0].map(|inner| u + outer * 0.5 * (2.0 * s1 + inner * 2.0 * disc).sqrt()))
            .collect();
        expect.sort_by(f64::total_cmp);
        let spectrum = model.eigenvalue_spectrum(&s).unwrap();
        let mut got: Vec<_> = spectrum.roots.to_vec();
        got.sort_by(|x, y| x.re.total_cmp(&y.re));
        let scale = expect.iter().map(|x| x.abs()).fold(0.0, f64::max);
        for (g, e) in got.iter().zip(&expect) {
            closed_err = closed_err.max(((g.re - e).powi(2) + g.im.powi(2)).sqrt() / scale);
        }
    }

    // c_a ≤ 1e-6 c_w: roots {v, v, u - c_w, u + c_w}.
    let mut limit_err: f64 = 0.0;
    // Same roots against {v - c_a, v + c_a, u ± c_w}, for the report only.
    let mut split_err: f64 = 0.0;
    for _ in 0..1000 {
        let a = rng.gen_range(0.05..0.95) * full;
        let cw = model.water_sound_speed(a).unwrap();
        let ca = rng.gen_range(0.0..1.0) * 1e-6 * cw;
        let m = air_for_sound_speed(&model, a, ca);
        let (u, v) = (rng.gen_range(-5.0..5.0), rng.gen_range(-20.0..20.0));
        let s = CellState::new(m, m * v, a, a * u);
        let spectrum = model.eigenvalue_spectrum(&s).unwrap();
        let mut expect = [v, v, u - cw, u + cw];
        expect.sort_by(f64::total_cmp);
        let mut got: Vec<_> = spectrum.roots.to_vec();
        got.sort_by(|x, y| x.re.total_cmp(&y.re));
        for (g, e) in got.iter().zip(&expect) {
            limit_err = limit_err.max(((g.re - e).powi(2) + g.im.powi(2)).sqrt());
        }
        let mut split = [v - ca, v + ca, u - cw, u + cw];
        split.sort_by(f64::total_cmp);
        for (g, e) in got.iter().zip(&split) {
            split_err = split_err.max(((g.re - e).powi(2) + g.im.powi(2)).sqrt());
        }
    }
    let pass = closed_err <= 1e-9 && limit_err <= 1e-6;
    report(
        "eigenvalue diagnostic (u=v closed form; c_a <= 1e-6 c_w limit)",
        pass,
        format!(
            "closed-form rel err = {closed_err:.3e}, limit abs err = {limit_err:.3e} \
             (against v ± c_a: {split_err:.3e})"
        ),
    );
    assert!(pass);
}

// Energy budget -----------------------------------------------------------

fn wave(cells: usize) -> Scenario {
    let model = Model::new(CrossSection::new(1.0, 0.0).unwrap(), PhysicalConstants::default()).unwrap();
    let mesh = Mesh::uniform(20.0, cells).unwrap();
    let full = model.section().full_area();
    let initial = mesh
        .centers()
        .iter()
        .map(|x| {
            let h = 1.0 + 0.02 * (PI * x / 20.0).cos();
            let a = model.section().wetted_area(h - 1.0).unwrap();
            CellState::new(1.29349 / 1000.0 * (full - a), 0.0, a, 0.0)
        })
        .collect();
    Scenario {
        model,
        mesh,
        initial,
        boundaries: BoundaryProgram::WALLS,
        time: TimeController {
            cfl: 0.9,
            t_end: 0.5,
            max_steps: 1_000_000,
        },
        mode: Mode::TwoLayer,
        clamps: Clamps::default(),
        output_interval: Some(0.0),
        execution: Execution::Parallel,
    }
}

#[test]
fn energy_budget_trend() {
    let mut norms = Vec::new();
    let mut defect: f64 = 0.0;
    for cells in [100, 200, 400] {
        let sc = wave(cells);
        let out = run(&sc).unwrap();
        let budget = energy_budget(&out.snapshots, &sc.mesh, &sc.model, &sc.boundaries, sc.mode).unwrap();
        norms.push(budget.residual_norm());
        defect = defect.max(budget.max_exchange_defect());
    }
    let pass = norms.windows(2).all(|w| w[1] < w[0]) && defect <= 1e-12;
    report(
        "energy budget (N=100/200/400 smooth wave)",
        pass,
        format!(
            "residual norms = [{}], max exchange defect = {defect:.3e}",
            norms.iter().map(|n| format!("{n:.3e}")).collect::<Vec<_>>().join(", ")
        ),
    );
    assert!(pass);
}

// Filling transients ---------------------------------------------------------

const MID_PIPE: f64 = 50.0;

fn preset(name: &str) -> Scenario {
    let config = preset_scenario(name).unwrap();
    assert_eq!((config.cells, config.t_end), (200, 80.0));
    config.scenario(Execution::Parallel).unwrap()
}

fn timed_run(scenario: &Scenario) -> (pipeflow::RunOutput, Duration) {
    let start = Instant::now();
    let out = run(scenario).unwrap();
    (out, start.elapsed())
}

fn mid_piezo(solver: &Solver) -> f64 {
    let cell = solver.mesh().locate(MID_PIPE).unwrap();
    piezometric_head(&solver.states()[cell], solver.model(), solver.mesh().bottom()[cell])
        .unwrap()
        .bottom_referenced
}

/// Two-layer run with a single-layer twin advanced by the same time steps,
/// so both carry the same numerical diffusion. Returns the largest relative
/// mid-pipe piezo deviation over all steps and the two-layer runtime.
fn lockstep_piezo_deviation(two_layer: &Scenario) -> (f64, Duration) {
    let single_scenario = Scenario {
        mode: Mode::SingleLayer,
        ..two_layer.clone()
    };
    let start = Instant::now();
    let mut two = Solver::new(two_layer).unwrap();
    let mut single = Solver::new(&single_scenario).unwrap();
    let mut worst: f64 = 0.0;
    while two.time() < two_layer.time.t_end {
        let step = two.advance(two_layer.time.cfl, two_layer.time.t_end).unwrap();
        single.step(step.dt).unwrap();
        let (a, b) = (mid_piezo(&two), mid_piezo(&single));
        worst = worst.max((a - b).abs() / b.abs());
    }
    (worst, start.elapsed())
}

#[test]
fn low_air_close_to_single_layer() {
    let budget = Duration::from_secs(30);
    let single_sc = preset("paper-single-layer");
    let (single, t_single) = timed_run(&single_sc);
    let low_sc = preset("paper-low-air");
    let (low, t_low) = timed_run(&low_sc);
    let own_cfl = compare_runs(&low.snapshots, &single.snapshots, &low_sc.mesh, &low_sc.model, &[MID_PIPE]).unwrap();
    let own_cfl_dev = own_cfl.probes[0].deviation(ProbeQuantity::Piezo).max_relative;
    let (lockstep_dev, t_lockstep) = lockstep_piezo_deviation(&low_sc);

    let pass = lockstep_dev <= 0.05 && t_low < budget && t_single < budget && t_lockstep < budget;
    report(
        "low-air piezo close to single layer",
        pass,
        format!(
            "max rel piezo deviation at x = 50 m: {lockstep_dev:.3e} with matched time steps \
             ({own_cfl_dev:.3e} with each run at its own CFL step); runtimes {t_low:.2?} / {t_single:.2?} / {t_lockstep:.2?}"
        ),
    );
    assert!(pass);
}

fn first_time_above(series: &[pipeflow::diagnostics::ProbeSample], q: f64) -> f64 {
    series.iter().find(|s| s.discharge >= q).map_or(f64::INFINITY, |s| s.t)
}

#[test]
fn high_air_compresses_and_pushes() {
    let budget = Duration::from_secs(30);
    let single_sc = preset("paper-single-layer");
    let (single, _) = timed_run(&single_sc);
    let high_sc = preset("paper-high-air");
    let (high, t_high) = timed_run(&high_sc);

    let high_probe = probe_series(&high.snapshots, &high_sc.mesh, &high_sc.model, MID_PIPE).unwrap();
    let single_probe = probe_series(&single.snapshots, &single_sc.mesh, &single_sc.model, MID_PIPE).unwrap();
    let p0 = high_probe[0].air_pressure;
    let p_max = high_probe.iter().map(|s| s.air_pressure).fold(f64::NEG_INFINITY, f64::max);
    let q_high = high_probe.iter().map(|s| s.discharge).fold(f64::NEG_INFINITY, f64::max);
    let q_single = single_probe.iter().map(|s| s.discharge).fold(f64::NEG_INFINITY, f64::max);

    let pass = p_max > p0 && q_high > q_single && t_high < budget;
    report(
        "high-air compression and faster discharge",
        pass,
        format!(
            "air pressure {p0:.6e} -> max {p_max:.6e} Pa; peak Q {q_high:.6e} vs single layer {q_single:.6e}; \
             Q >= 0.1 first at t = {:.2} s vs {:.2} s; runtime {t_high:.2?}",
            first_time_above(&high_probe, 0.1),
            first_time_above(&single_probe, 0.1)
        ),
    );
    assert!(pass);
}

// Geometry ----------------------------------------------------------------

#[test]
fn geometry_against_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut area_err, mut i1_err, mut trip_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for k in 0..1000 {
        let r = rng.gen_range(0.1..5.0);
        let section = CrossSection::new(r, 0.0).unwrap();
        // Depth above the bottom, log-spread near both ends.
        let depth = match k % 4 {
            0 => 2.0 * r * 10f64.powf(rng.gen_range(-6.0..-1.0)),
            1 => 2.0 * r * (1.0 - 10f64.powf(rng.gen_range(-6.0..-1.0))),
            _ => rng.gen_range(0.0..2.0 * r),
        };
        let width = |s: f64| 2.0 * (s * (2.0 * r - s)).max(0.0).sqrt();
        let area = integrate(width, 0.0, depth, 0.0, 1e-14);
        let i1 = integrate(|s| (depth - s) * width(s), 0.0, depth, 0.0, 1e-14);
        let h = depth - r;
        area_err = area_err.max(rel(section.wetted_area(h).unwrap(), area, area));
        i1_err = i1_err.max(rel(section.i1(section.wetted_area(h).unwrap()).unwrap(), i1, i1));
        let back = section.height_from_area(section.wetted_area(h).unwrap()).unwrap();
        trip_err = trip_err.max((back - h).abs() / r);
    }
    let pass = area_err <= 1e-10 && i1_err <= 1e-10 && trip_err <= 1e-10;
    report(
        "geometry oracles (1e3 heights)",
        pass,
        format!("area rel err = {area_err:.3e}, I1 rel err = {i1_err:.3e}, round trip = {trip_err:.3e} R"),
    );
    assert!(pass);
}
