use serde::{Deserialize, Serialize};

use crate::constants::{k_eff_counterpropagating, AMU, RB_D2_WAVELENGTH};
use crate::error::{Error, Result};

/// Timing and kinematics of one interferometer shot.
///
/// `t`, `t0` and `tau` are the drift time T, the half gap T₀ around the
/// microwave π pulse and the spacing between successive LMT pulses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterferometerGeometry {
    /// LMT order; arm splitting is 2nħk_eff.
    pub n: u32,
    pub t: f64,
    pub t0: f64,
    pub tau: f64,
    /// rad/m
    pub k_eff: f64,
    /// Acceleration projected on k̂_eff, m/s².
    pub accel: f64,
    /// kg
    pub mass: f64,
    pub v0: f64,
    pub r0: f64,
}

impl InterferometerGeometry {
    /// Rb-like defaults: D2 Raman wavenumber, ⁸⁷Rb mass, at rest, no acceleration.
    pub fn new(n: u32, t: f64, t0: f64, tau: f64) -> Self {
        InterferometerGeometry {
            n,
            t,
            t0,
            tau,
            k_eff: k_eff_counterpropagating(RB_D2_WAVELENGTH),
            accel: 0.0,
            mass: 86.909_180_527 * AMU,
            v0: 0.0,
            r0: 0.0,
        }
    }

    pub fn with_accel(mut self, accel: f64) -> Self {
        self.accel = accel;
        self
    }

    pub fn with_k_eff(mut self, k_eff: f64) -> Self {
        self.k_eff = k_eff;
        self
    }

    pub fn with_mass(mut self, mass: f64) -> Self {
        self.mass = mass;
        self
    }

    pub fn with_launch(mut self, r0: f64, v0: f64) -> Self {
        self.r0 = r0;
        self.v0 = v0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        for (name, x) in [
            ("T", self.t),
            ("T0", self.t0),
            ("tau", self.tau),
            ("k_eff", self.k_eff),
            ("a", self.accel),
            ("mass", self.mass),
            ("v0", self.v0),
            ("r0", self.r0),
        ] {
            if !x.is_finite() {
                return bad(format!("{name} must be finite, got {x}"));
            }
        }
        if self.n < 1 {
            return bad("LMT order n must be at least 1".into());
        }
        if self.t <= 0.0 {
            return bad(format!("T must be positive, got {}", self.t));
        }
        if self.t0 < 0.0 {
            return bad(format!("T0 must be non-negative, got {}", self.t0));
        }
        if self.tau < 0.0 {
            return bad(format!("tau must be non-negative, got {}", self.tau));
        }
        if self.k_eff <= 0.0 {
            return bad(format!("k_eff must be positive, got {}", self.k_eff));
        }
        if self.mass <= 0.0 {
            return bad(format!("mass must be positive, got {}", self.mass));
        }
        let lmt_span = (self.n - 1) as f64 * self.tau;
        if lmt_span >= self.t {
            return bad(format!("(n-1)·tau = {lmt_span} must be shorter than T = {}", self.t));
        }
        Ok(())
    }

    /// T² + 2TT₀ − (n−1)Tτ, the effective squared interrogation time.
    pub fn effective_t_squared(&self) -> f64 {
        let t = self.t;
        t * t + 2.0 * t * self.t0 - (self.n - 1) as f64 * t * self.tau
    }

    /// Phase per unit acceleration, 2nk_eff[T² + 2TT₀ − (n−1)Tτ], rad/(m/s²).
    pub fn phase_scale(&self) -> f64 {
        2.0 * self.n as f64 * self.k_eff * self.effective_t_squared()
    }

    /// Closed-form acceleration phase 2nk_eff·a[T² + 2TT₀ − (n−1)Tτ].
    pub fn closed_form_phase(&self) -> f64 {
        self.phase_scale() * self.accel
    }

    /// Midpoint of the two arms; kicks are equal and opposite so it never jumps.
    pub fn center_of_mass(&self, time: f64) -> f64 {
        self.r0 + self.v0 * time + 0.5 * self.accel * time * time
    }
}
