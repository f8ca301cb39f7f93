//! Pairwise interaction forces.
//!
//! All laws share the anisotropic form
//! `F(d) = f_s(|d|) (s·d) s + f_l(|d|) (l·d) l`, where `(s, l)` is the frame at
//! the particle feeling the force. Positive coefficients push particles apart.
//! Forces vanish for `|d| ≥ cutoff`, and the rescaled argument `η d` is used
//! everywhere inside the cutoff.

use crate::error::{Error, Result};
use crate::field::Frame;
use crate::torus::TorusVector;

/// Coefficients of the repulsion `f_R(r) = (α r² + β) e^{-e_R r}` and
/// attraction `f_A(r) = -γ r e^{-e_A r}` terms plus the anisotropy `χ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KcParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub e_a: f64,
    pub e_r: f64,
    pub chi: f64,
}

impl KcParams {
    /// Original repulsion/attraction balance (long-range attractive along `l`).
    pub const ORIGINAL: KcParams = KcParams {
        alpha: 270.0,
        beta: 0.1,
        gamma: 35.0,
        e_a: 95.0,
        e_r: 100.0,
        chi: 0.2,
    };

    /// Attraction weakened to 0.3 of the original strength.
    pub const STATIONARY: KcParams = KcParams {
        gamma: 10.5,
        ..KcParams::ORIGINAL
    };

    #[inline]
    pub fn repulsion(&self, r: f64) -> f64 {
        (self.alpha * r * r + self.beta) * (-self.e_r * r).exp()
    }

    #[inline]
    pub fn attraction(&self, r: f64) -> f64 {
        -self.gamma * r * (-self.e_a * r).exp()
    }

    /// `scale · f_A(r) + f_R(r)`.
    #[inline]
    pub fn combined(&self, r: f64, scale: f64) -> f64 {
        scale * self.attraction(r) + self.repulsion(r)
    }

    fn validate(&self) -> Result<()> {
        let named = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("e_a", self.e_a),
            ("e_r", self.e_r),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(format!("force.{name}"), "must be finite and nonnegative"));
            }
        }
        if !(0.0..=1.0).contains(&self.chi) {
            return Err(Error::config("force.chi", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Damped-oscillator coefficients
/// `f_s = c e^{e_s1 r} + c_s sin(π r / a_s) e^{e_s2 r}` and
/// `f_l = c cos(π r / a_l) e^{e_l1 r} + c_l sin(π r / a_l) e^{e_l2 r}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarmonicParams {
    pub c: f64,
    pub c_s: f64,
    pub c_l: f64,
    pub e_s1: f64,
    pub e_s2: f64,
    pub e_l1: f64,
    pub e_l2: f64,
    pub a_s: f64,
    pub a_l: f64,
}

impl HarmonicParams {
    pub const BIO: HarmonicParams = HarmonicParams {
        c: 0.1,
        c_s: -0.05,
        c_l: 0.005,
        e_s1: -65.0,
        e_s2: -100.0,
        e_l1: -160.0,
        e_l2: -40.0,
        a_s: 0.03,
        a_l: 0.022,
    };

    #[inline]
    pub fn f_s(&self, r: f64) -> f64 {
        let pi = std::f64::consts::PI;
        self.c * (self.e_s1 * r).exp() + self.c_s * (pi * r / self.a_s).sin() * (self.e_s2 * r).exp()
    }

    #[inline]
    pub fn f_l(&self, r: f64) -> f64 {
        let (sin, cos) = (std::f64::consts::PI * r / self.a_l).sin_cos();
        self.c * cos * (self.e_l1 * r).exp() + self.c_l * sin * (self.e_l2 * r).exp()
    }

    fn validate(&self) -> Result<()> {
        let all = [
            self.c, self.c_s, self.c_l, self.e_s1, self.e_s2, self.e_l1, self.e_l2, self.a_s, self.a_l,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("force", "harmonic parameters must be finite"));
        }
        if self.a_s == 0.0 {
            return Err(Error::config("force.a_s", "must be nonzero"));
        }
        if self.a_l == 0.0 {
            return Err(Error::config("force.a_l", "must be nonzero"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ForceLaw {
    /// Repulsion plus tensor-weighted attraction: `f_s = χ f_A + f_R`,
    /// `f_l = δ_l f_A + f_R`.
    Kc { params: KcParams, delta_l: f64 },
    /// `f_s = χ f_A + f_R`; `f_l` follows `f_A + f_R` below `c1`, its negative
    /// above `c2`, and interpolates linearly in between.
    Piecewise { params: KcParams, c1: f64, c2: f64 },
    Harmonic(HarmonicParams),
}

/// Coefficient pair at a given separation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coefficients {
    pub f_l: f64,
    pub f_s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForceModel {
    law: ForceLaw,
    eta: f64,
    cutoff: f64,
    // per-axis bound beyond which a pair is certainly out of range
    reject: f64,
}

pub const FORCE_PRESETS: &[&str] = &["kc_original", "kc_stationary", "bio_harmonic", "kc_piecewise"];

pub const DEFAULT_CUTOFF: f64 = 0.1;

impl ForceModel {
    pub fn new(law: ForceLaw, eta: f64, cutoff: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::config("force.eta", "must be positive"));
        }
        if !(cutoff > 0.0 && cutoff <= 0.5) {
            return Err(Error::config("force.cutoff", "must lie in (0, 0.5]"));
        }
        match &law {
            ForceLaw::Kc { params, delta_l } => {
                params.validate()?;
                if !(delta_l.is_finite() && *delta_l >= 0.0) {
                    return Err(Error::config("force.delta_l", "must be finite and nonnegative"));
                }
            }
            ForceLaw::Piecewise { params, c1, c2 } => {
                params.validate()?;
                if !(0.0 < *c1 && c1 < c2 && *c2 < 0.5) {
                    return Err(Error::config("force.c1", "need 0 < c1 < c2 < 0.5"));
                }
            }
            ForceLaw::Harmonic(h) => h.validate()?,
        }
        Ok(ForceModel {
            law,
            eta,
            cutoff,
            reject: cutoff * (1.0 + 1e-9),
        })
    }

    pub fn preset(name: &str) -> Result<Self> {
        let law = match name {
            "kc_original" => ForceLaw::Kc {
                params: KcParams::ORIGINAL,
                delta_l: 1.0,
            },
            "kc_stationary" => ForceLaw::Kc {
                params: KcParams::STATIONARY,
                delta_l: 1.0,
            },
            "bio_harmonic" => ForceLaw::Harmonic(HarmonicParams::BIO),
            "kc_piecewise" => ForceLaw::Piecewise {
                params: KcParams::STATIONARY,
                c1: 0.06,
                c2: 0.07,
            },
            _ => return Err(Error::lookup("force preset", name, FORCE_PRESETS)),
        };
        ForceModel::new(law, 1.0, DEFAULT_CUTOFF)
    }

    pub fn law(&self) -> &ForceLaw {
        &self.law
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn with_eta(self, eta: f64) -> Result<Self> {
        ForceModel::new(self.law, eta, self.cutoff)
    }

    pub fn with_cutoff(self, cutoff: f64) -> Result<Self> {
        ForceModel::new(self.law, self.eta, cutoff)
    }

    pub fn with_law(self, law: ForceLaw) -> Result<Self> {
        ForceModel::new(law, self.eta, self.cutoff)
    }

    /// Coefficients at separation `r`. Callers pass the already rescaled
    /// separation `η |d|`.
    #[inline]
    pub fn coefficients(&self, r: f64) -> Coefficients {
        match &self.law {
            ForceLaw::Kc { params, delta_l } => {
                let f_r = params.repulsion(r);
                let f_a = params.attraction(r);
                Coefficients {
                    f_l: delta_l * f_a + f_r,
                    f_s: params.chi * f_a + f_r,
                }
            }
            ForceLaw::Piecewise { params, c1, c2 } => {
                let f_s = params.combined(r, params.chi);
                let f_l = if r < *c1 {
                    params.combined(r, 1.0)
                } else if r <= *c2 {
                    let lo = params.combined(*c1, 1.0);
                    let hi = params.combined(*c2, 1.0);
                    lo + (r - c1) / (c2 - c1) * (-hi - lo)
                } else {
                    -params.combined(r, 1.0)
                };
                Coefficients { f_l, f_s }
            }
            ForceLaw::Harmonic(h) => Coefficients {
                f_l: h.f_l(r),
                f_s: h.f_s(r),
            },
        }
    }

    /// Force exerted across displacement `d`, or `None` when `|d|` is at or
    /// beyond the cutoff.
    #[inline]
    pub fn pair_force_within(&self, d: TorusVector, frame: &Frame) -> Option<[f64; 2]> {
        if d.dx.abs() > self.reject || d.dy.abs() > self.reject {
            return None;
        }
        let r = d.norm();
        if r >= self.cutoff {
            return None;
        }
        let (dx, dy) = (self.eta * d.dx, self.eta * d.dy);
        let c = self.coefficients(self.eta * r);
        let ps = c.f_s * (frame.s[0] * dx + frame.s[1] * dy);
        let pl = c.f_l * (frame.l[0] * dx + frame.l[1] * dy);
        Some([ps * frame.s[0] + pl * frame.l[0], ps * frame.s[1] + pl * frame.l[1]])
    }

    #[inline]
    pub fn pair_force(&self, d: TorusVector, frame: &Frame) -> [f64; 2] {
        self.pair_force_within(d, frame).unwrap_or([0.0, 0.0])
    }

    /// Sample `(r, f_l, f_s)` at `samples` evenly spaced separations in `[0, 0.5]`.
    pub fn coefficient_curve(&self, samples: usize) -> Vec<(f64, Coefficients)> {
        let n = samples.max(2);
        (0..n)
            .map(|i| {
                let r = 0.5 * i as f64 / (n - 1) as f64;
                (r, self.coefficients(r))
            })
            .collect()
    }
}
