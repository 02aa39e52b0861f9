//! Circular cross-section geometry.
//!
//! Heights are algebraic: measured from the pipe axis, so the water surface
//! sits at `h ∈ [-R, R]`. Internally everything is parametrised by the
//! half-angle `φ ∈ [0, π]` subtended by the free surface at the axis,
//! with `h = -R cos φ`:
//!
//! ```text
//! A(φ)  = R² (φ - sin φ cos φ)
//! T(φ)  = 2 R sin φ
//! I₁(φ) = R³ (sin φ - φ cos φ - sin³φ / 3)
//! ```
//!
//! The last line is `∫_{-R}^{h} (h - z) σ(z) dz` with `σ(z) = 2√(R² - z²)`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Uniform circular pipe section with a constant inclination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossSection {
    radius: f64,
    full_area: f64,
    cos_theta: f64,
}

/// Everything the solver needs about the water layer at one wetted area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaterProfile {
    pub area: f64,
    /// Half-angle of the wetted arc, the internal parameter.
    pub angle: f64,
    /// Algebraic height of the free surface.
    pub height: f64,
    /// Free-surface width `T`.
    pub width: f64,
    /// Hydrostatic pressure integral `I₁`.
    pub i1: f64,
}

impl CrossSection {
    /// Section of radius `radius` (m), inclined at `theta` (rad) to the horizontal.
    pub fn new(radius: f64, theta: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Domain {
                quantity: "radius",
                value: radius,
                min: f64::MIN_POSITIVE,
                max: f64::INFINITY,
            });
        }
        if !(theta.is_finite() && theta.abs() <= FRAC_PI_2) {
            return Err(Error::Domain {
                quantity: "theta",
                value: theta,
                min: -FRAC_PI_2,
                max: FRAC_PI_2,
            });
        }
        Ok(CrossSection {
            radius,
            full_area: PI * radius * radius,
            cos_theta: theta.cos(),
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `S = πR²`.
    pub fn full_area(&self) -> f64 {
        self.full_area
    }

    pub fn cos_theta(&self) -> f64 {
        self.cos_theta
    }

    fn check_height(&self, h: f64) -> Result<()> {
        if h.is_nan() || h < -self.radius || h > self.radius {
            return Err(Error::Domain {
                quantity: "water height",
                value: h,
                min: -self.radius,
                max: self.radius,
            });
        }
        Ok(())
    }

    fn check_area(&self, a: f64) -> Result<()> {
        if a.is_nan() || a < 0.0 || a > self.full_area {
            return Err(Error::Domain {
                quantity: "wetted area",
                value: a,
                min: 0.0,
                max: self.full_area,
            });
        }
        Ok(())
    }

    /// Wetted area below the algebraic height `h`.
    pub fn wetted_area(&self, h: f64) -> Result<f64> {
        self.check_height(h)?;
        Ok(self.area_of_height(h))
    }

    fn area_of_height(&self, h: f64) -> f64 {
        // The upper half mirrors the lower one: A(h) = S - A(-h).
        if h > 0.0 {
            return self.full_area - self.area_of_height(-h);
        }
        let r = self.radius;
        let s = ((r + h) / (2.0 * r)).max(0.0).sqrt().min(1.0);
        let angle = 2.0 * s.asin();
        self.area_of_angle(angle)
    }

    fn area_of_angle(&self, angle: f64) -> f64 {
        0.5 * self.radius * self.radius * x_minus_sin(2.0 * angle)
    }

    /// Inverse of [`wetted_area`](Self::wetted_area).
    pub fn height_from_area(&self, a: f64) -> Result<f64> {
        self.check_area(a)?;
        Ok(self.solve_angle(a, None).height)
    }

    /// Free-surface width `T(A) = 2√(R² - h²)`.
    pub fn surface_width(&self, a: f64) -> Result<f64> {
        self.check_area(a)?;
        if a == 0.0 || a == self.full_area {
            return Err(Error::DegenerateWidth {
                area: a,
                full_area: self.full_area,
            });
        }
        let solved = self.solve_angle(a, None);
        Ok(2.0 * self.radius * solved.sin)
    }

    /// Hydrostatic pressure integral `I₁(A) = ∫_{-R}^{h} (h - z) σ(z) dz`.
    pub fn i1(&self, a: f64) -> Result<f64> {
        self.check_area(a)?;
        Ok(self.i1_of(&self.solve_angle(a, None)))
    }

    /// Pressure source integral `I₂ = ∫ (h - z) ∂ₓσ dz`, identically zero for
    /// a uniform section.
    pub fn i2(&self, a: f64) -> Result<f64> {
        self.check_area(a)?;
        Ok(0.0)
    }

    /// All water-layer geometry for area `a` in one inversion.
    pub fn profile(&self, a: f64) -> Result<WaterProfile> {
        self.profile_near(a, None)
    }

    /// Like [`profile`](Self::profile), starting the inversion from the
    /// angle of a nearby, previously computed profile.
    pub fn profile_near(&self, a: f64, hint: Option<f64>) -> Result<WaterProfile> {
        self.check_area(a)?;
        let solved = self.solve_angle(a, hint);
        Ok(WaterProfile {
            area: a,
            angle: solved.angle,
            height: solved.height,
            width: 2.0 * self.radius * solved.sin,
            i1: self.i1_of(&solved),
        })
    }

    fn i1_of(&self, solved: &Solved) -> f64 {
        let r3 = self.radius * self.radius * self.radius;
        let angle = solved.angle;
        if angle < 0.3 {
            // sin φ - φ cos φ - sin³φ/3 cancels to O(φ⁵) near an empty pipe.
            const C: [f64; 9] = [
                2.0 / 15.0,
                -11.0 / 315.0,
                17.0 / 3780.0,
                -461.0 / 1_247_400.0,
                8303.0 / 389_188_800.0,
                -24911.0 / 27_243_216_000.0,
                168_151.0 / 5_557_616_064_000.0,
                -1_513_361.0 / 1_900_704_693_888_000.0,
                7913.0 / 463_788_509_184_000.0,
            ];
            let p2 = angle * angle;
            let series = C.iter().rev().fold(0.0, |acc, c| acc * p2 + c);
            r3 * series * p2 * p2 * angle
        } else {
            let (s, c) = (solved.sin, solved.cos);
            r3 * (s - angle * c - s * s * s / 3.0)
        }
    }

    /// Solves `A(φ) = a` for the half-angle.
    ///
    /// Works on the lower half `φ ∈ [0, π/2]`, using `A(h) = S - A(-h)` for
    /// the upper half.
    fn solve_angle(&self, a: f64, hint: Option<f64>) -> Solved {
        let s_full = self.full_area;
        let r = self.radius;
        if a <= 0.0 {
            return Solved {
                angle: 0.0,
                sin: 0.0,
                cos: 1.0,
                height: -r,
            };
        }
        if a >= s_full {
            return Solved {
                angle: PI,
                sin: 0.0,
                cos: -1.0,
                height: r,
            };
        }
        let upper = a > 0.5 * s_full;
        let target = if upper { s_full - a } else { a };
        let hint = hint.map(|p| if upper { PI - p } else { p });
        let (angle, sin, cos) = self.halley_lower_half(target, hint);
        let below_axis = if cos > 0.5 {
            // R cos φ = R - R sin²φ/(1 + cos φ), without cancellation near the bottom.
            r - r * sin * sin / (1.0 + cos)
        } else {
            r * cos
        };
        if upper {
            Solved {
                angle: PI - angle,
                sin,
                cos: -cos,
                height: below_axis,
            }
        } else {
            Solved {
                angle,
                sin,
                cos,
                height: -below_axis,
            }
        }
    }

    /// Halley iteration on `A(φ) = R²(φ - sin φ cos φ)`, safeguarded by a
    /// shrinking bisection bracket, with `A' = 2R² sin²φ` and
    /// `A'' = 4R² sin φ cos φ`. Returns `(φ, sin φ, cos φ)`.
    fn halley_lower_half(&self, target: f64, hint: Option<f64>) -> (f64, f64, f64) {
        let r2 = self.radius * self.radius;
        let (mut lo, mut hi) = (0.0_f64, FRAC_PI_2);
        let mut phi = match hint {
            Some(p) if p > 0.0 && p <= FRAC_PI_2 => p,
            // A ≈ (2/3) R² φ³ for a shallow layer.
            _ => (1.5 * target / r2).cbrt().min(FRAC_PI_2),
        };
        let tolerance = 8.0 * f64::EPSILON * target;
        let mut trig = sin_cos_first_quadrant(phi);
        for _ in 0..100 {
            let (s, c) = trig;
            let f = 0.5 * r2 * x_minus_sin_given(2.0 * phi, 2.0 * s * c) - target;
            let d1 = 2.0 * r2 * s * s;
            if f.abs() <= tolerance && d1 > 0.0 {
                // Final Newton correction, with sin and cos moved to first order.
                let delta = -f / d1;
                return (phi + delta, s + c * delta, c - s * delta);
            }
            if f < 0.0 {
                lo = phi;
            } else {
                hi = phi;
            }
            let d2 = 4.0 * r2 * s * c;
            let halley = -2.0 * f * d1 / (2.0 * d1 * d1 - f * d2);
            if halley.abs() <= 1e-6 * phi {
                // Cubic convergence: the remaining error is below 1e-18 φ.
                let h2 = 0.5 * halley * halley;
                return (phi + halley, s + c * halley - s * h2, c - s * halley - c * h2);
            }
            let mut next = phi + halley;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let step = (next - phi).abs();
            phi = next;
            trig = sin_cos_first_quadrant(phi);
            if step <= 2.0 * f64::EPSILON * phi || hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        (phi, trig.0, trig.1)
    }
}

/// `(sin φ, cos φ)` on `[0, π/2]` with one libm call: the smaller of the two
/// is derived from the other through `√((1-x)(1+x))`.
fn sin_cos_first_quadrant(phi: f64) -> (f64, f64) {
    if phi < 1.0 {
        let s = phi.sin();
        (s, ((1.0 - s) * (1.0 + s)).sqrt())
    } else {
        let c = phi.cos();
        (((1.0 - c) * (1.0 + c)).sqrt(), c)
    }
}

/// A solved half-angle with its trigonometric values and the algebraic height.
struct Solved {
    angle: f64,
    sin: f64,
    cos: f64,
    height: f64,
}

/// `x - sin x`, accurate for small `x`.
fn x_minus_sin(x: f64) -> f64 {
    if x < 1.0 {
        x_minus_sin_series(x)
    } else {
        x - x.sin()
    }
}

/// `x - sin x` when `sin x` is already known.
fn x_minus_sin_given(x: f64, sin_x: f64) -> f64 {
    if x < 1.0 {
        x_minus_sin_series(x)
    } else {
        x - sin_x
    }
}

/// `x³/3! - x⁵/5! + … + x¹⁹/19!`; the first omitted term is below 1e-19
/// relative on `[0, 1]`.
fn x_minus_sin_series(x: f64) -> f64 {
    const C: [f64; 9] = [
        1.0 / 6.0,
        -1.0 / 120.0,
        1.0 / 5040.0,
        -1.0 / 362_880.0,
        1.0 / 39_916_800.0,
        -1.0 / 6_227_020_800.0,
        1.0 / 1_307_674_368_000.0,
        -1.0 / 355_687_428_096_000.0,
        1.0 / 121_645_100_408_832_000.0,
    ];
    let x2 = x * x;
    x * x2 * C.iter().rev().fold(0.0, |acc, c| acc * x2 + c)
}
