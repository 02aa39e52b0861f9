//! Two-layer water/air model: state, equations of state, fluxes, energies
//! and the convection-matrix spectrum.
//!
//! Air quantities are rescaled by the water density: `M = ρ̄ 𝒜 / ρ₀` and
//! `D = M v`, where `𝒜 = S - A` is the air-filled part of the section. Air
//! pressure enters the water layer as `P_a / ρ₀ = c_a² M / (γ 𝒜)`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Complex, Matrix4};

use crate::error::{Error, Result};
use crate::geometry::{CrossSection, WaterProfile};

/// Physical constants. The isentropic constant `k = p_a / ρ_a^γ` is always
/// derived from the reference point, never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// m/s²
    pub gravity: f64,
    /// Adiabatic index.
    pub gamma: f64,
    /// Water density ρ₀, kg/m³.
    pub water_density: f64,
    /// Reference air pressure p_a, Pa.
    pub air_ref_pressure: f64,
    /// Air density at the reference pressure, kg/m³.
    pub air_ref_density: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            gravity: 9.81,
            gamma: 1.4,
            water_density: 1000.0,
            air_ref_pressure: 101_325.0,
            air_ref_density: 1.29349,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, ok: bool, v: f64| {
            if ok && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} = {v} is not admissible")))
            }
        };
        check("gravity", self.gravity > 0.0, self.gravity)?;
        check("gamma", self.gamma > 1.0, self.gamma)?;
        check("water_density", self.water_density > 0.0, self.water_density)?;
        check("air_ref_pressure", self.air_ref_pressure > 0.0, self.air_ref_pressure)?;
        check("air_ref_density", self.air_ref_density > 0.0, self.air_ref_density)?;
        Ok(())
    }

    /// `k = p_a / ρ_a^γ`.
    pub fn state_constant(&self) -> f64 {
        self.air_ref_pressure / self.air_ref_density.powf(self.gamma)
    }
}

/// Which of the two layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layer {
    Water,
    Air,
}

impl Layer {
    pub const BOTH: [Layer; 2] = [Layer::Water, Layer::Air];

    pub fn name(self) -> &'static str {
        match self {
            Layer::Water => "water",
            Layer::Air => "air",
        }
    }
}

/// Conservative variables of one cell, `W = (M, D, A, Q)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellState {
    /// Rescaled air mass per unit length, m².
    pub m: f64,
    /// Rescaled air discharge, m³/s.
    pub d: f64,
    /// Wetted area, m².
    pub a: f64,
    /// Water discharge, m³/s.
    pub q: f64,
}

impl CellState {
    pub fn new(m: f64, d: f64, a: f64, q: f64) -> Self {
        CellState { m, d, a, q }
    }

    /// Water-only state (single-layer mode).
    pub fn water(a: f64, q: f64) -> Self {
        CellState { m: 0.0, d: 0.0, a, q }
    }

    /// `(amount, discharge)` of the given layer: `(A, Q)` or `(M, D)`.
    pub fn layer(&self, layer: Layer) -> (f64, f64) {
        match layer {
            Layer::Water => (self.a, self.q),
            Layer::Air => (self.m, self.d),
        }
    }

    /// `u = Q / A`; zero for an empty layer.
    pub fn water_velocity(&self) -> f64 {
        if self.a > 0.0 {
            self.q / self.a
        } else {
            0.0
        }
    }

    /// `v = D / M`; zero for an empty layer.
    pub fn air_velocity(&self) -> f64 {
        if self.m > 0.0 {
            self.d / self.m
        } else {
            0.0
        }
    }

    pub fn velocity(&self, layer: Layer) -> f64 {
        match layer {
            Layer::Water => self.water_velocity(),
            Layer::Air => self.air_velocity(),
        }
    }

    pub fn air_area(&self, section: &CrossSection) -> f64 {
        section.full_area() - self.a
    }

    /// Mean air density `ρ̄ = ρ₀ M / 𝒜` (kg/m³).
    pub fn air_density(&self, section: &CrossSection, constants: &PhysicalConstants) -> f64 {
        constants.water_density * self.m / self.air_area(section)
    }
}

/// A (mass, momentum) flux pair for one layer.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Flux {
    pub mass: f64,
    pub momentum: f64,
}

impl Flux {
    pub const ZERO: Flux = Flux {
        mass: 0.0,
        momentum: 0.0,
    };

    pub fn new(mass: f64, momentum: f64) -> Self {
        Flux { mass, momentum }
    }
}

impl Add for Flux {
    type Output = Flux;
    fn add(self, o: Flux) -> Flux {
        Flux::new(self.mass + o.mass, self.momentum + o.momentum)
    }
}

impl Sub for Flux {
    type Output = Flux;
    fn sub(self, o: Flux) -> Flux {
        Flux::new(self.mass - o.mass, self.momentum - o.momentum)
    }
}

impl Mul<f64> for Flux {
    type Output = Flux;
    fn mul(self, k: f64) -> Flux {
        Flux::new(self.mass * k, self.momentum * k)
    }
}

impl Neg for Flux {
    type Output = Flux;
    fn neg(self) -> Flux {
        Flux::new(-self.mass, -self.momentum)
    }
}

/// Quantities derived from one [`CellState`] that the fluxes and energies
/// share. Recomputed on demand, never cached inside the state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derived {
    pub water: WaterProfile,
    /// `𝒜 = S - A`.
    pub air_area: f64,
    /// `c_a²`.
    pub air_sound_speed_sq: f64,
    /// `P_a / ρ₀ = c_a² M / (γ 𝒜)`.
    pub air_pressure_head: f64,
}

/// Energies and entropy fluxes of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerEnergies {
    pub air: f64,
    pub water: f64,
    pub air_flux: f64,
    pub water_flux: f64,
}

impl LayerEnergies {
    pub fn total(&self) -> f64 {
        self.air + self.water
    }
}

/// Roots of the characteristic quartic of the convection matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    /// Sorted by real part, then imaginary part.
    pub roots: [Complex<f64>; 4],
    pub max_imaginary: f64,
    /// Velocity scale `|u| + |v| + c_a + c_w` used for the classification.
    pub speed_scale: f64,
    pub hyperbolic: bool,
}

/// Relative threshold on imaginary parts separating real roots from
/// genuine complex pairs.
pub const HYPERBOLICITY_TOLERANCE: f64 = 1e-9;

/// Pipe section plus physical constants: everything the pointwise model
/// needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    section: CrossSection,
    constants: PhysicalConstants,
    // k γ ρ₀^(γ-1), so that c_a² = coefficient · (M/𝒜)^(γ-1).
    sound_speed_coefficient: f64,
}

impl Model {
    pub fn new(section: CrossSection, constants: PhysicalConstants) -> Result<Self> {
        constants.validate()?;
        let sound_speed_coefficient =
            constants.state_constant() * constants.gamma * constants.water_density.powf(constants.gamma - 1.0);
        Ok(Model {
            section,
            constants,
            sound_speed_coefficient,
        })
    }

    pub fn section(&self) -> &CrossSection {
        &self.section
    }

    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    fn gamma(&self) -> f64 {
        self.constants.gamma
    }

    /// `c_a² = k γ (ρ₀ M / 𝒜)^(γ-1)`.
    pub fn air_sound_speed_sq(&self, m: f64, air_area: f64) -> Result<f64> {
        if !(air_area > 0.0) {
            return Err(Error::Pressurized { air_area });
        }
        if !(m >= 0.0) {
            return Err(Error::Domain {
                quantity: "air mass",
                value: m,
                min: 0.0,
                max: f64::INFINITY,
            });
        }
        Ok(self.sound_speed_coefficient * (m / air_area).powf(self.constants.gamma - 1.0))
    }

    /// `c_w = √(g A cos θ / T(A))`.
    pub fn water_sound_speed(&self, a: f64) -> Result<f64> {
        let width = self.section.surface_width(a)?;
        Ok((self.constants.gravity * a * self.section.cos_theta() / width).sqrt())
    }

    /// `P_a = k (ρ₀ M / 𝒜)^γ`, in Pa.
    pub fn air_pressure(&self, m: f64, air_area: f64) -> Result<f64> {
        if !(air_area > 0.0) {
            return Err(Error::Pressurized { air_area });
        }
        if !(m >= 0.0) {
            return Err(Error::Domain {
                quantity: "air mass",
                value: m,
                min: 0.0,
                max: f64::INFINITY,
            });
        }
        let c = &self.constants;
        Ok(c.state_constant() * (c.water_density * m / air_area).powf(c.gamma))
    }

    /// Geometry and air quantities of `state`. `hint` is the half-angle of
    /// a nearby water profile, used to warm-start the area inversion.
    pub fn derive(&self, state: &CellState, hint: Option<f64>) -> Result<Derived> {
        let water = self.section.profile_near(state.a, hint)?;
        let air_area = state.air_area(&self.section);
        let (c2, head) = if state.m == 0.0 {
            (0.0, 0.0)
        } else {
            let c2 = self.air_sound_speed_sq(state.m, air_area)?;
            (c2, c2 * state.m / (self.gamma() * air_area))
        };
        Ok(Derived {
            water,
            air_area,
            air_sound_speed_sq: c2,
            air_pressure_head: head,
        })
    }

    /// Conservative flux of one layer:
    /// water `(Q, Q²/A + g I₁ cos θ + A P_a/ρ₀)`, air `(D, D²/M + M c_a²/γ)`.
    pub fn macroscopic_flux(&self, layer: Layer, state: &CellState) -> Result<Flux> {
        let derived = self.derive(state, None)?;
        self.flux_from(layer, state, &derived)
    }

    pub(crate) fn flux_from(&self, layer: Layer, state: &CellState, derived: &Derived) -> Result<Flux> {
        match layer {
            Layer::Water => self.water_flux(state, derived.water.i1, derived.air_pressure_head),
            Layer::Air => {
                if state.m == 0.0 {
                    if state.d == 0.0 {
                        return Ok(Flux::ZERO);
                    }
                    return Err(Error::EmptyLayer {
                        layer: "air",
                        amount: state.m,
                    });
                }
                let pressure = state.m * derived.air_sound_speed_sq / self.gamma();
                Ok(Flux::new(state.d, state.d * state.d / state.m + pressure))
            }
        }
    }

    fn water_flux(&self, state: &CellState, i1: f64, air_pressure_head: f64) -> Result<Flux> {
        if !(state.a > 0.0) {
            return Err(Error::EmptyLayer {
                layer: "water",
                amount: state.a,
            });
        }
        let g = self.constants.gravity;
        let mut momentum = state.q * state.q / state.a + g * i1 * self.section.cos_theta();
        if state.m != 0.0 {
            momentum += state.a * air_pressure_head;
        }
        Ok(Flux::new(state.q, momentum))
    }

    /// Saint-Venant flux of the water layer alone, `(Q, Q²/A + g I₁ cos θ)`;
    /// any air in `state` is ignored.
    pub fn single_layer_flux(&self, state: &CellState) -> Result<Flux> {
        let i1 = self.section.i1(state.a)?;
        self.water_flux(&CellState::water(state.a, state.q), i1, 0.0)
    }

    /// Energies and entropy fluxes at bottom elevation `z`:
    ///
    /// ```text
    /// E_a = M v²/2 + c_a² M / (γ(γ-1))        H_a = (E_a + M c_a²/γ) v
    /// E_w = A u²/2 + g A (h - I₁/A) cos θ + g A Z
    /// H_w = (E_w + g I₁ cos θ + A P_a/ρ₀) u
    /// ```
    pub fn layer_energies(&self, state: &CellState, z: f64) -> Result<LayerEnergies> {
        let derived = self.derive(state, None)?;
        self.energies_from(state, &derived, z)
    }

    pub(crate) fn energies_from(&self, state: &CellState, derived: &Derived, z: f64) -> Result<LayerEnergies> {
        if !(state.a > 0.0) {
            return Err(Error::EmptyLayer {
                layer: "water",
                amount: state.a,
            });
        }
        let g = self.constants.gravity;
        let gamma = self.gamma();
        let cos = self.section.cos_theta();
        let c2 = derived.air_sound_speed_sq;

        let (air, air_flux) = if state.m == 0.0 {
            (0.0, 0.0)
        } else {
            let v = state.air_velocity();
            let e = 0.5 * state.m * v * v + c2 * state.m / (gamma * (gamma - 1.0));
            (e, (e + state.m * c2 / gamma) * v)
        };

        let u = state.water_velocity();
        let i1 = derived.water.i1;
        let water = 0.5 * state.a * u * u
            + g * (state.a * derived.water.height - i1) * cos
            + g * state.a * z;
        let water_flux = (water + g * i1 * cos + state.a * derived.air_pressure_head) * u;

        Ok(LayerEnergies {
            air,
            water,
            air_flux,
            water_flux,
        })
    }

    /// Eigenvalues of the convection matrix, as the roots of
    ///
    /// ```text
    /// (λ² - 2vλ - (c_a² - v²)) (λ² - 2uλ - (c_w² + β c_a² - u²)) = β c_a⁴
    /// ```
    ///
    /// with `β = A M / (S - A)²`, found as eigenvalues of the companion
    /// matrix of the (rescaled) monic quartic.
    pub fn eigenvalue_spectrum(&self, state: &CellState) -> Result<Spectrum> {
        let s = self.section.full_area();
        if !(state.a > 0.0 && state.a < s) {
            return Err(Error::Domain {
                quantity: "wetted area",
                value: state.a,
                min: 0.0,
                max: s,
            });
        }
        if !(state.m > 0.0) {
            return Err(Error::EmptyLayer {
                layer: "air",
                amount: state.m,
            });
        }
        let air_area = s - state.a;
        let ca2 = self.air_sound_speed_sq(state.m, air_area)?;
        let cw = self.water_sound_speed(state.a)?;
        let (u, v) = (state.water_velocity(), state.air_velocity());
        let beta = state.a * state.m / (air_area * air_area);
        let coefficients = characteristic_quartic(u, v, ca2, cw * cw, beta);

        let speed_scale = u.abs() + v.abs() + ca2.sqrt() + cw;
        let mut roots = monic_quartic_roots(coefficients, speed_scale);
        polish_roots(&mut roots, u, v, ca2, cw * cw, beta);
        roots.sort_by(|x, y| {
            x.re.partial_cmp(&y.re)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(x.im.partial_cmp(&y.im).unwrap_or(std::cmp::Ordering::Equal))
        });
        let max_imaginary = roots.iter().map(|r| r.im.abs()).fold(0.0, f64::max);
        Ok(Spectrum {
            roots,
            max_imaginary,
            speed_scale,
            hyperbolic: max_imaginary <= HYPERBOLICITY_TOLERANCE * speed_scale,
        })
    }
}

/// Coefficients `[c₀, c₁, c₂, c₃]` of the monic quartic
/// `λ⁴ + c₃λ³ + c₂λ² + c₁λ + c₀` whose roots are the characteristic speeds.
pub fn characteristic_quartic(u: f64, v: f64, ca2: f64, cw2: f64, beta: f64) -> [f64; 4] {
    // (λ² - 2vλ + p)(λ² - 2uλ + q) - β c_a⁴
    let p = v * v - ca2;
    let q = u * u - cw2 - beta * ca2;
    [
        p * q - beta * ca2 * ca2,
        -2.0 * (v * q + u * p),
        p + q + 4.0 * u * v,
        -2.0 * (u + v),
    ]
}

/// Recomputes the two roots closest to `v` from the factored quartic
/// `μ² = c_a² + βc_a⁴/W(v+μ)`, `μ = λ - v`, `W(λ) = (λ-u)² - c_w² - βc_a²`.
/// When the layers are weakly coupled this is a contraction; the expanded
/// coefficients cannot resolve the pair once `c_a² ≪ ε v²`. Roots are kept
/// as they are when the iteration does not settle.
fn polish_roots(roots: &mut [Complex<f64>; 4], u: f64, v: f64, ca2: f64, cw2: f64, beta: f64) {
    let mut order = [0, 1, 2, 3];
    order.sort_by(|&i, &j| (roots[i] - v).norm().total_cmp(&(roots[j] - v).norm()));
    if !((roots[order[1]] - v).norm() < 0.5 * (roots[order[2]] - v).norm()) {
        return;
    }
    let coupling = beta * ca2 * ca2;
    let water = |mu: Complex<f64>| {
        let d = mu + (v - u);
        d * d - (cw2 + beta * ca2)
    };
    let solve = |sign: f64| {
        let mut mu = Complex::new(0.0, 0.0);
        for _ in 0..50 {
            let next = (Complex::new(ca2, 0.0) + coupling / water(mu)).sqrt() * sign;
            let settled = (next - mu).norm() <= 4.0 * f64::EPSILON * next.norm();
            mu = next;
            if settled {
                return mu.re.is_finite().then_some(mu);
            }
        }
        None
    };
    let Some((plus, minus)) = solve(1.0).zip(solve(-1.0)) else {
        return;
    };
    // Both must belong to the replaced pair, not duplicate a water root.
    let pair_gap = (roots[order[2]] - v).norm().min((roots[order[3]] - v).norm());
    let attached = |mu: Complex<f64>| {
        let own = (mu + v - roots[order[0]]).norm().min((mu + v - roots[order[1]]).norm());
        let other = (mu + v - roots[order[2]]).norm().min((mu + v - roots[order[3]]).norm());
        own < other && mu.norm() < 0.5 * pair_gap
    };
    if attached(plus) && attached(minus) {
        roots[order[0]] = plus + v;
        roots[order[1]] = minus + v;
    }
}

/// Roots of a monic quartic via the eigenvalues of its companion matrix,
/// after rescaling `λ = scale·μ` so the coefficients are O(1).
fn monic_quartic_roots(c: [f64; 4], scale: f64) -> [Complex<f64>; 4] {
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let scaled = [
        c[0] / scale.powi(4),
        c[1] / scale.powi(3),
        c[2] / scale.powi(2),
        c[3] / scale,
    ];
    #[rustfmt::skip]
    let companion = Matrix4::new(
        0.0, 0.0, 0.0, -scaled[0],
        1.0, 0.0, 0.0, -scaled[1],
        0.0, 1.0, 0.0, -scaled[2],
        0.0, 0.0, 1.0, -scaled[3],
    );
    let eig = companion.complex_eigenvalues();
    [eig[0] * scale, eig[1] * scale, eig[2] * scale, eig[3] * scale]
}
