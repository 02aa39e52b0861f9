//! Kinetic layer of the scheme.
//!
//! Each layer is represented by a Gibbs equilibrium in velocity space,
//! `𝓜(ξ) = (A/b) χ((ξ - u)/b)`, with `χ` the centred indicator of unit mass
//! and unit variance. Interface fluxes are the first two `ξ`-moments of the
//! upwinded densities: particles cross the interface, are reflected by the
//! potential barrier `Δφ`, or cross it with their kinetic energy shifted by
//! `Δφ`. With an indicator `χ` every moment is a piecewise polynomial, so
//! the fluxes are evaluated in closed form.

use crate::error::{Error, Result};
use crate::model::{CellState, Derived, Flux, Layer, Model};

pub const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// `χ(ω) = 1/(2√3)` on `[-√3, √3]`, zero elsewhere.
pub fn chi_indicator(omega: f64) -> f64 {
    if omega.abs() <= SQRT_3 {
        0.5 / SQRT_3
    } else {
        0.0
    }
}

/// Gibbs equilibrium of one layer in one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsEquilibrium {
    /// Layer amount `A_α` (wetted area or rescaled air mass).
    pub amplitude: f64,
    pub mean_velocity: f64,
    /// Spread `b_α`; the support is `u ± √3 b`.
    pub spread: f64,
}

impl GibbsEquilibrium {
    pub const EMPTY: GibbsEquilibrium = GibbsEquilibrium {
        amplitude: 0.0,
        mean_velocity: 0.0,
        spread: 0.0,
    };

    pub fn new(amplitude: f64, mean_velocity: f64, spread: f64) -> Self {
        GibbsEquilibrium {
            amplitude,
            mean_velocity,
            spread,
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.amplitude > 0.0 && self.spread > 0.0)
    }

    /// `𝓜(ξ)`.
    pub fn density(&self, xi: f64) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.amplitude / self.spread * chi_indicator((xi - self.mean_velocity) / self.spread)
    }

    /// Velocity interval outside which `𝓜` vanishes.
    pub fn support(&self) -> (f64, f64) {
        let half = SQRT_3 * self.spread;
        (self.mean_velocity - half, self.mean_velocity + half)
    }

    fn height(&self) -> f64 {
        self.amplitude / (2.0 * SQRT_3 * self.spread)
    }

    /// `(∫𝓜, ∫ξ𝓜, ∫ξ²𝓜)` over the whole line, integrated over the support.
    pub fn moments(&self) -> [f64; 3] {
        if self.is_empty() {
            return [0.0; 3];
        }
        let (lo, hi) = self.support();
        let w = self.window(f64::NEG_INFINITY, f64::INFINITY);
        [self.height() * (hi - lo), w.mass, w.momentum]
    }

    /// `(∫ξ𝓜, ∫ξ²𝓜)` over `[a, b]`.
    fn window(&self, a: f64, b: f64) -> Flux {
        if self.is_empty() {
            return Flux::ZERO;
        }
        let (lo, hi) = self.support();
        let x0 = a.max(lo);
        let x1 = b.min(hi);
        if x1 <= x0 {
            return Flux::ZERO;
        }
        let h = self.height();
        let width = x1 - x0;
        Flux::new(
            h * width * (x1 + x0) * 0.5,
            h * width * (x1 * x1 + x1 * x0 + x0 * x0) / 3.0,
        )
    }

    /// `∫|η|√(η² + shift) 𝓜(η) dη` over `[a, b]`, an interval on one side
    /// of zero on which `η² + shift ≥ 0`. This is the momentum carried by
    /// particles that cross a barrier and come out with `ξ² = η² + shift`.
    fn shifted_momentum(&self, a: f64, b: f64, shift: f64) -> f64 {
        if shift == 0.0 {
            return self.window(a, b).momentum;
        }
        if self.is_empty() {
            return 0.0;
        }
        let (lo, hi) = self.support();
        let x0 = a.max(lo);
        let x1 = b.min(hi);
        if x1 <= x0 {
            return 0.0;
        }
        let cube = |x: f64| {
            let e = (x * x + shift).max(0.0);
            e * e.sqrt()
        };
        let primitive = self.height() * (cube(x1) - cube(x0)) / 3.0;
        // Antiderivative of |η|√(η²+s) is ±(η²+s)^{3/2}/3.
        if x1 <= 0.0 {
            -primitive
        } else {
            primitive
        }
    }
}

/// Spread of the Gibbs equilibrium:
/// water `b_w² = g I₁ cos θ / A + c_a² M / (γ(S - A))`, air `b_a² = c_a²/γ`.
pub fn equilibrium_spread(layer: Layer, state: &CellState, model: &Model) -> Result<f64> {
    let derived = model.derive(state, None)?;
    spread_from(layer, state, &derived, model)
}

fn spread_from(layer: Layer, state: &CellState, derived: &Derived, model: &Model) -> Result<f64> {
    match layer {
        Layer::Water => {
            if !(state.a > 0.0) {
                return Err(Error::EmptyLayer {
                    layer: "water",
                    amount: state.a,
                });
            }
            let g = model.constants().gravity;
            let b2 = g * derived.water.i1 * model.section().cos_theta() / state.a + derived.air_pressure_head;
            Ok(b2.sqrt())
        }
        Layer::Air => {
            if !(state.m > 0.0) {
                return Err(Error::EmptyLayer {
                    layer: "air",
                    amount: state.m,
                });
            }
            Ok((derived.air_sound_speed_sq / model.constants().gamma).sqrt())
        }
    }
}

/// Gibbs equilibrium of `layer` in `state`. An empty air layer yields
/// [`GibbsEquilibrium::EMPTY`].
pub fn equilibrium(layer: Layer, state: &CellState, model: &Model) -> Result<GibbsEquilibrium> {
    let derived = model.derive(state, None)?;
    equilibrium_from(layer, state, &derived, model)
}

pub(crate) fn equilibrium_from(
    layer: Layer,
    state: &CellState,
    derived: &Derived,
    model: &Model,
) -> Result<GibbsEquilibrium> {
    if layer == Layer::Air && state.m == 0.0 {
        return Ok(GibbsEquilibrium::EMPTY);
    }
    let spread = spread_from(layer, state, derived, model)?;
    let (amount, _) = state.layer(layer);
    Ok(GibbsEquilibrium::new(amount, state.velocity(layer), spread))
}

/// Potential jump seen by one layer at an interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialJump {
    /// `Δφ`, m²/s².
    pub delta_phi: f64,
    /// Straight-line path average of the non-conservative coefficient:
    /// `c_a²/(S - A)` for air, `c_a² M/(S - A)` for water.
    pub path_average: f64,
}

// 5-point Gauss–Legendre on [0, 1].
const PATH_NODES: [f64; 5] = [
    0.046_910_077_030_668_004,
    0.230_765_344_947_158_45,
    0.5,
    0.769_234_655_052_841_6,
    0.953_089_922_969_332,
];
const PATH_WEIGHTS: [f64; 5] = [
    0.118_463_442_528_094_54,
    0.239_314_335_249_683_23,
    0.284_444_444_444_444_45,
    0.239_314_335_249_683_23,
    0.118_463_442_528_094_54,
];

/// Path averages `(c_a²/𝒜, c_a² M/𝒜)` along `Φ(s) = (1-s) W_L + s W_R`.
fn path_averages(left: &CellState, right: &CellState, model: &Model) -> Result<(f64, f64)> {
    if left.m == 0.0 && right.m == 0.0 {
        return Ok((0.0, 0.0));
    }
    let s_full = model.section().full_area();
    let (mut air, mut water) = (0.0, 0.0);
    for (s, w) in PATH_NODES.iter().zip(PATH_WEIGHTS) {
        let m = (1.0 - s) * left.m + s * right.m;
        let air_area = s_full - ((1.0 - s) * left.a + s * right.a);
        let ratio = model.air_sound_speed_sq(m, air_area)? / air_area;
        air += w * ratio;
        water += w * ratio * m;
    }
    Ok((air, water))
}

/// Potential jumps of both layers, `[water, air]`, across the interface
/// between `left` (bottom `z_left`) and `right` (bottom `z_right`):
///
/// ```text
/// Δφ_w = g (Z_R - Z_L) - (1/γ) ⟨c_a² M/(S-A)⟩ ln(A_R / A_L)
/// Δφ_a = (1/γ) ⟨c_a²/(S-A)⟩ (A_R - A_L)
/// ```
pub fn potential_jumps(
    left: &CellState,
    right: &CellState,
    z_left: f64,
    z_right: f64,
    model: &Model,
) -> Result<[PotentialJump; 2]> {
    for s in [left, right] {
        if !(s.a > 0.0) {
            return Err(Error::EmptyLayer {
                layer: "water",
                amount: s.a,
            });
        }
    }
    let (air_avg, water_avg) = path_averages(left, right, model)?;
    let gamma = model.constants().gamma;
    let log_ratio = (right.a / left.a).ln();
    let water = model.constants().gravity * (z_right - z_left) - water_avg * log_ratio / gamma;
    let air = air_avg * (right.a - left.a) / gamma;
    Ok([
        PotentialJump {
            delta_phi: water,
            path_average: water_avg,
        },
        PotentialJump {
            delta_phi: air,
            path_average: air_avg,
        },
    ])
}

/// Potential jump of one layer; see [`potential_jumps`].
pub fn delta_phi(
    layer: Layer,
    left: &CellState,
    right: &CellState,
    z_left: f64,
    z_right: f64,
    model: &Model,
) -> Result<PotentialJump> {
    let [water, air] = potential_jumps(left, right, z_left, z_right, model)?;
    Ok(match layer {
        Layer::Water => water,
        Layer::Air => air,
    })
}

/// Which side of an interface a numerical flux feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `F⁻_{i+1/2}`: used by the cell on the left.
    Minus,
    /// `F⁺_{i+1/2}`: used by the cell on the right.
    Plus,
}

/// Moments `∫(ξ, ξ²) 𝓜^±(ξ) dξ` of the upwinded microscopic flux on one
/// side; see [`InterfaceFlux::from_equilibria`].
pub fn upwind_microscopic_flux(
    left: &GibbsEquilibrium,
    right: &GibbsEquilibrium,
    delta_phi: f64,
    side: Side,
) -> Flux {
    let pair = InterfaceFlux::from_equilibria(left, right, delta_phi);
    match side {
        Side::Minus => pair.minus,
        Side::Plus => pair.plus,
    }
}

/// The `F⁻`/`F⁺` pair of one layer at one interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceFlux {
    pub minus: Flux,
    pub plus: Flux,
}

impl InterfaceFlux {
    pub const ZERO: InterfaceFlux = InterfaceFlux {
        minus: Flux::ZERO,
        plus: Flux::ZERO,
    };

    /// Upwinded fluxes for a barrier `Δφ` between two equilibria.
    ///
    /// For `F⁻` (the left cell's view) the density is: left particles moving
    /// right; left particles with `ξ² < 2Δφ` bounced back; right particles
    /// moving left, accelerated or slowed by the barrier. `F⁺` mirrors this.
    /// The mass components of `F⁻` and `F⁺` are sums of the same two terms,
    /// so they agree bit for bit.
    pub fn from_equilibria(left: &GibbsEquilibrium, right: &GibbsEquilibrium, delta_phi: f64) -> Self {
        const INF: f64 = f64::INFINITY;
        if left.is_empty() && right.is_empty() {
            return InterfaceFlux::ZERO;
        }
        let shift = 2.0 * delta_phi;
        if delta_phi >= 0.0 {
            // Uphill to the right: slow left particles are reflected.
            let r = shift.sqrt();
            let crossing = left.window(r, INF);
            let reflected = left.window(0.0, r).momentum;
            let incoming = right.window(-INF, 0.0);
            InterfaceFlux {
                minus: Flux::new(crossing.mass, crossing.momentum + 2.0 * reflected)
                    + Flux::new(incoming.mass, right.shifted_momentum(-INF, 0.0, shift)),
                plus: incoming + Flux::new(crossing.mass, left.shifted_momentum(r, INF, -shift)),
            }
        } else {
            // Uphill to the left: slow right particles are reflected.
            let r = (-shift).sqrt();
            let crossing = right.window(-INF, -r);
            let reflected = right.window(-r, 0.0).momentum;
            let outgoing = left.window(0.0, INF);
            InterfaceFlux {
                minus: outgoing + Flux::new(crossing.mass, right.shifted_momentum(-INF, -r, shift)),
                plus: Flux::new(crossing.mass, crossing.momentum + 2.0 * reflected)
                    + Flux::new(outgoing.mass, left.shifted_momentum(0.0, INF, -shift)),
            }
        }
    }
}

/// Numerical flux pair of `layer` between two cells.
pub fn interface_flux(
    layer: Layer,
    left: &CellState,
    right: &CellState,
    z_left: f64,
    z_right: f64,
    model: &Model,
) -> Result<InterfaceFlux> {
    let jump = delta_phi(layer, left, right, z_left, z_right, model)?;
    let l = equilibrium(layer, left, model)?;
    let r = equilibrium(layer, right, model)?;
    Ok(InterfaceFlux::from_equilibria(&l, &r, jump.delta_phi))
}
