//! Velocity- and species-selective Raman transfer with Blackman π pulses.
//!
//! Each channel is an independent two-level system in the rotating frame,
//! H = [[−δ/2, Ω(t)/2], [Ω(t)/2, δ/2]], integrated over the pulse window
//! [−π/Ω_eff, π/Ω_eff] in the dimensionless time s = Ω_eff·t.

mod integrator;
mod quadrature;

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{two_pi_hz, HBAR, K_B};
use crate::error::{Error, Result};
use crate::output::CsvTable;

pub use integrator::{integrate, Solution, Spinor, Tolerances};
pub use quadrature::gauss_hermite;

/// Ω_eff range, rad/s, over which both selectivity targets hold.
pub const FEASIBLE_OMEGA: (f64, f64) = (2.0 * PI * 1.0e3, 2.0 * PI * 10.0e3);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlackmanPulse {
    /// rad/s
    pub omega_eff: f64,
}

impl BlackmanPulse {
    pub fn new(omega_eff: f64) -> Result<Self> {
        if !(omega_eff.is_finite() && omega_eff > 0.0) {
            return Err(Error::InvalidArgument(format!("omega_eff must be positive, got {omega_eff}")));
        }
        Ok(BlackmanPulse { omega_eff })
    }

    pub fn duration(&self) -> f64 {
        2.0 * PI / self.omega_eff
    }

    /// Envelope in units of Ω_eff at dimensionless time s = Ω_eff·t.
    fn shape(s: f64) -> f64 {
        if s.abs() > PI {
            0.0
        } else {
            (0.42 + 0.5 * s.cos() + 0.08 * (2.0 * s).cos()) / 0.84
        }
    }

    /// Instantaneous Rabi frequency Ω(t), rad/s; zero outside the window.
    pub fn rabi(&self, t: f64) -> f64 {
        self.omega_eff * Self::shape(self.omega_eff * t)
    }

    /// ∫Ω(t)dt by composite Simpson quadrature over the window.
    pub fn area(&self) -> f64 {
        let intervals = 4096;
        let half = 0.5 * self.duration();
        let h = 2.0 * half / intervals as f64;
        let mut sum = self.rabi(-half) + self.rabi(half);
        for i in 1..intervals {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * self.rabi(-half + i as f64 * h);
        }
        sum * h / 3.0
    }

    /// Final spinor for initial state (1, 0) at two-photon detuning `detuning`.
    pub fn evolve(&self, detuning: f64) -> Result<Solution> {
        if !detuning.is_finite() {
            return Err(Error::InvalidArgument(format!("detuning must be finite, got {detuning}")));
        }
        let d = detuning / self.omega_eff;
        let rhs = move |s: f64, y: &Spinor| {
            let half_rabi = 0.5 * Self::shape(s);
            let mi = C64::new(0.0, -1.0);
            [
                mi * (y[0] * (-0.5 * d) + y[1] * half_rabi),
                mi * (y[0] * half_rabi + y[1] * (0.5 * d)),
            ]
        };
        integrate(rhs, -PI, PI, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)], &Tolerances::default())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Desired,
    Undesired,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferChannel {
    /// Two-photon detuning of the addressed transition at zero velocity, rad/s.
    pub detuning: f64,
    pub kind: ChannelKind,
}

impl TransferChannel {
    pub fn desired() -> Self {
        TransferChannel { detuning: 0.0, kind: ChannelKind::Desired }
    }

    pub fn undesired(recoil_detuning: f64) -> Self {
        TransferChannel { detuning: recoil_detuning, kind: ChannelKind::Undesired }
    }
}

/// Two-photon recoil detuning ħk_eff²/m, rad/s.
pub fn recoil_detuning(k_eff: f64, mass: f64) -> f64 {
    HBAR * k_eff * k_eff / mass
}

/// Excited-state population after the pulse for an atom at rest.
pub fn transfer_efficiency(pulse: &BlackmanPulse, channel: &TransferChannel) -> Result<f64> {
    Ok(pulse.evolve(channel.detuning)?.state[1].norm_sqr().min(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Averaging {
    GaussHermite { order: usize },
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalEnsemble {
    /// K
    pub temperature: f64,
    /// Standard deviation of k_eff·v, rad/s.
    pub doppler_sigma: f64,
    pub averaging: Averaging,
}

impl ThermalEnsemble {
    pub fn new(temperature: f64, k_eff: f64, mass: f64) -> Result<Self> {
        if !(temperature.is_finite() && temperature >= 0.0) {
            return Err(Error::InvalidArgument(format!("temperature must be ≥ 0 K, got {temperature}")));
        }
        if !(k_eff > 0.0 && mass > 0.0) {
            return Err(Error::InvalidArgument("k_eff and mass must be positive".into()));
        }
        Ok(ThermalEnsemble {
            temperature,
            doppler_sigma: k_eff * (K_B * temperature / mass).sqrt(),
            averaging: Averaging::GaussHermite { order: 32 },
        })
    }

    pub fn with_averaging(mut self, averaging: Averaging) -> Result<Self> {
        match averaging {
            Averaging::GaussHermite { order: 0 } => {
                return Err(Error::InvalidArgument("quadrature order must be positive".into()))
            }
            Averaging::MonteCarlo { samples: 0, .. } => {
                return Err(Error::InvalidArgument("sample count must be positive".into()))
            }
            _ => {}
        }
        self.averaging = averaging;
        Ok(self)
    }

    /// Doppler offsets and weights (summing to 1) for the ensemble average.
    pub fn doppler_samples(&self) -> Vec<(f64, f64)> {
        if self.doppler_sigma == 0.0 {
            return vec![(0.0, 1.0)];
        }
        match self.averaging {
            Averaging::GaussHermite { order } => {
                let (x, w) = gauss_hermite(order);
                let norm = PI.sqrt();
                x.iter()
                    .zip(&w)
                    .map(|(x, w)| (std::f64::consts::SQRT_2 * self.doppler_sigma * x, w / norm))
                    .collect()
            }
            Averaging::MonteCarlo { samples, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let normal = Normal::new(0.0, self.doppler_sigma).expect("sigma is finite and positive");
                let w = 1.0 / samples as f64;
                (0..samples).map(|_| (normal.sample(&mut rng), w)).collect()
            }
        }
    }

    /// Transfer efficiency averaged over the Doppler distribution.
    pub fn average_efficiency(&self, pulse: &BlackmanPulse, channel: &TransferChannel) -> Result<f64> {
        let samples = self.doppler_samples();
        let values: Vec<f64> = samples
            .par_iter()
            .map(|&(dv, _)| {
                transfer_efficiency(pulse, &TransferChannel { detuning: channel.detuning + dv, ..*channel })
            })
            .collect::<Result<_>>()?;
        Ok(values.iter().zip(&samples).map(|(v, s)| v * s.1).sum())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyPoint {
    /// rad/s
    pub omega_eff: f64,
    pub desired: f64,
    pub undesired: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyCurve {
    pub undesired_detuning: f64,
    pub doppler_sigma: f64,
    pub points: Vec<EfficiencyPoint>,
}

impl EfficiencyCurve {
    /// Columns omega_eff_hz (Ω_eff/2π), desired, undesired.
    pub fn to_csv_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["omega_eff_hz", "desired", "undesired"]);
        for p in &self.points {
            t.push_floats(&[p.omega_eff / (2.0 * PI), p.desired, p.undesired]);
        }
        t
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        self.to_csv_table().write(w)
    }
}

/// Ensemble-averaged desired and undesired efficiencies per Ω_eff.
pub fn efficiency_curve(
    omega_grid: &[f64],
    ensemble: &ThermalEnsemble,
    undesired_detuning: f64,
) -> Result<EfficiencyCurve> {
    if !undesired_detuning.is_finite() {
        return Err(Error::InvalidArgument("undesired detuning must be finite".into()));
    }
    let points = omega_grid
        .par_iter()
        .map(|&omega| {
            let pulse = BlackmanPulse::new(omega)?;
            Ok(EfficiencyPoint {
                omega_eff: omega,
                desired: ensemble.average_efficiency(&pulse, &TransferChannel::desired())?,
                undesired: ensemble
                    .average_efficiency(&pulse, &TransferChannel::undesired(undesired_detuning))?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(EfficiencyCurve {
        undesired_detuning,
        doppler_sigma: ensemble.doppler_sigma,
        points,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseReport {
    /// Pulse centre, s.
    pub time: f64,
    pub desired: f64,
    /// Population wrongly kicked through the recoil-detuned channel.
    pub undesired: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulsePair {
    /// Internal state addressed by this pair of Raman beams.
    pub internal_state: String,
    pub kick: PulseReport,
    pub stop: PulseReport,
    /// kick.desired × stop.desired
    pub net_fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapPlan {
    pub separation: f64,
    /// ħk_eff/m, m/s.
    pub recoil_velocity: f64,
    /// separation·m/(ħk_eff), s.
    pub drift_time: f64,
    pub omega_eff: f64,
    pub pulse_duration: f64,
    pub pairs: Vec<PulsePair>,
    /// Set when Ω_eff leaves [`FEASIBLE_OMEGA`].
    pub warning: Option<String>,
}

/// Kick-and-stop plan moving one isotope over `separation` to overlap the other.
///
/// Both internal-state components get their own beam pair, fired together
/// at t = 0 (kick) and again after the drift time (stop).
pub fn overlap_maneuver(
    separation: f64,
    mass: f64,
    k_eff: f64,
    omega_eff: f64,
    ensemble: &ThermalEnsemble,
) -> Result<OverlapPlan> {
    if !(separation.is_finite() && separation >= 0.0) {
        return Err(Error::InvalidArgument(format!("separation must be ≥ 0, got {separation}")));
    }
    if !(mass > 0.0 && k_eff > 0.0) {
        return Err(Error::InvalidArgument("mass and k_eff must be positive".into()));
    }
    let pulse = BlackmanPulse::new(omega_eff)?;
    let v_r = HBAR * k_eff / mass;
    let drift = separation / v_r;
    let undesired = recoil_detuning(k_eff, mass);
    let desired_eff = ensemble.average_efficiency(&pulse, &TransferChannel::desired())?;
    let undesired_eff = ensemble.average_efficiency(&pulse, &TransferChannel::undesired(undesired))?;
    let pairs = ["upper", "lower"]
        .iter()
        .map(|state| PulsePair {
            internal_state: state.to_string(),
            kick: PulseReport { time: 0.0, desired: desired_eff, undesired: undesired_eff },
            stop: PulseReport { time: drift, desired: desired_eff, undesired: undesired_eff },
            net_fidelity: desired_eff * desired_eff,
        })
        .collect();
    let (lo, hi) = FEASIBLE_OMEGA;
    let warning = (omega_eff < lo || omega_eff > hi).then(|| {
        format!(
            "omega_eff = 2π×{:.4} kHz lies outside the 2π×1–10 kHz selectivity window",
            omega_eff / two_pi_hz(1e3)
        )
    });
    Ok(OverlapPlan {
        separation,
        recoil_velocity: v_r,
        drift_time: drift,
        omega_eff,
        pulse_duration: pulse.duration(),
        pairs,
        warning,
    })
}
