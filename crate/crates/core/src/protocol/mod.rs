//! Echo-squeezing interferometer protocols on the collective spin.
//!
//! Every protocol starts from |+ẑ⟩ (all atoms in the upper clock state) and
//! reads out the signal ⟨S_z⟩, half the population difference.
//!
//! | family | first π/2 | twist | interferometer block | final π/2 |
//! |--------|-----------|-------|----------------------|-----------|
//! | Conventional | x | none | exp(−iψS_x) | x |
//! | SCSP-e, GESP-e | y | μ | exp(−iψS_x) | y |
//! | SCSP-o, GESP-o | y | μ | exp(+iψS_y) | y |
//! | CESP | y | μ | exp(+iψS_y) | x |
//!
//! SCSP is GESP at μ = π/2. In explicit form the block is the auxiliary
//! π/2, the Raman π pulses and microwave π of the schedule, and the
//! anti-auxiliary π/2, all microwaves about y for the `-e` variants and
//! about x for the others.

mod scan;
mod sensitivity;

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dicke::{Axis, DickeState, Polarity, SqueezeParams, DEFAULT_N_MAX};
use crate::error::{ensure_finite, Error, Result};
use crate::trajectory::{build_schedule, InterferometerGeometry};

pub use scan::{fringe_scan, uniform_grid, FringeScan};
pub use sensitivity::{
    estimated_magnification, gesp_optimal_window, gesp_plateau, max_slope_magnification,
    sensitivity, PlateauRow, PlateauTable, SearchSettings, SensitivityReport,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "conventional")]
    Conventional,
    #[serde(rename = "scsp-e")]
    ScspE,
    #[serde(rename = "scsp-o")]
    ScspO,
    #[serde(rename = "gesp-e")]
    GespE,
    #[serde(rename = "gesp-o")]
    GespO,
    #[serde(rename = "cesp")]
    Cesp,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Conventional,
        Family::ScspE,
        Family::ScspO,
        Family::GespE,
        Family::GespO,
        Family::Cesp,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Conventional => "conventional",
            Family::ScspE => "scsp-e",
            Family::ScspO => "scsp-o",
            Family::GespE => "gesp-e",
            Family::GespO => "gesp-o",
            Family::Cesp => "cesp",
        }
    }

    fn first_axis(&self) -> Axis {
        match self {
            Family::Conventional => Axis::X,
            _ => Axis::Y,
        }
    }

    fn final_axis(&self) -> Axis {
        match self {
            Family::Conventional | Family::Cesp => Axis::X,
            _ => Axis::Y,
        }
    }

    /// Axis of the auxiliary, anti-auxiliary and mid-sequence microwave pulses.
    fn block_axis(&self) -> Axis {
        match self {
            Family::Conventional | Family::ScspE | Family::GespE => Axis::Y,
            Family::ScspO | Family::GespO | Family::Cesp => Axis::X,
        }
    }

    /// The block as a single rotation (axis, angle per unit ψ).
    fn reduced_block(&self) -> (Axis, f64) {
        match self.block_axis() {
            Axis::Y => (Axis::X, 1.0),
            _ => (Axis::Y, -1.0),
        }
    }

    pub fn is_squeezed(&self) -> bool {
        !matches!(self, Family::Conventional)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown protocol family '{s}' (expected one of conventional, scsp-e, scsp-o, gesp-e, gesp-o, cesp)"
                ))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    /// Interferometer block collapsed to one rotation by the injected phase.
    Reduced,
    /// Every Raman and microwave pulse, with laser phases from the trajectory.
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    family: Family,
    n_atoms: usize,
    mu: f64,
    form: Form,
    geometry: Option<InterferometerGeometry>,
    common_laser_phase: f64,
    aux_phase: f64,
    n_max: usize,
}

impl ProtocolSpec {
    /// Reduced-form protocol. μ is forced to 0 for Conventional and π/2 for
    /// SCSP; GESP and CESP accept μ in [0, π/2].
    pub fn new(family: Family, n_atoms: usize, mu: f64) -> Result<Self> {
        let mu = match family {
            Family::Conventional => 0.0,
            Family::ScspE | Family::ScspO => FRAC_PI_2,
            Family::GespE | Family::GespO | Family::Cesp => {
                if !(mu.is_finite() && (0.0..=FRAC_PI_2).contains(&mu)) {
                    return Err(Error::InvalidArgument(format!(
                        "{family}: mu must lie in [0, π/2], got {mu}"
                    )));
                }
                mu
            }
        };
        let spec = ProtocolSpec {
            family,
            n_atoms,
            mu,
            form: Form::Reduced,
            geometry: None,
            common_laser_phase: 0.0,
            aux_phase: 0.0,
            n_max: DEFAULT_N_MAX,
        };
        spec.check_n()?;
        Ok(spec)
    }

    /// Switches to explicit form driven by `geometry`.
    pub fn explicit(mut self, geometry: InterferometerGeometry) -> Result<Self> {
        geometry.validate()?;
        self.form = Form::Explicit;
        self.geometry = Some(geometry);
        Ok(self)
    }

    pub fn with_form(mut self, form: Form) -> Self {
        self.form = form;
        self
    }

    /// Offset added to every Raman laser phase (explicit form only).
    pub fn with_common_laser_phase(mut self, phase: f64) -> Result<Self> {
        ensure_finite("common laser phase", phase)?;
        self.common_laser_phase = phase;
        Ok(self)
    }

    /// Phase imprinted on the z-cat by the auxiliary pulse and removed by the
    /// anti-auxiliary pulse (explicit form only).
    pub fn with_aux_phase(mut self, phase: f64) -> Result<Self> {
        ensure_finite("auxiliary phase", phase)?;
        self.aux_phase = phase;
        Ok(self)
    }

    pub fn with_n_max(mut self, n_max: usize) -> Result<Self> {
        self.n_max = n_max;
        self.check_n()?;
        Ok(self)
    }

    fn check_n(&self) -> Result<()> {
        if self.n_atoms < 1 || self.n_atoms > self.n_max {
            return Err(Error::InvalidArgument(format!(
                "n_atoms = {} outside [1, {}]",
                self.n_atoms, self.n_max
            )));
        }
        Ok(())
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn form(&self) -> Form {
        self.form
    }

    pub fn geometry(&self) -> Option<&InterferometerGeometry> {
        self.geometry.as_ref()
    }

    /// Full-contrast signal amplitude N/2.
    pub fn amplitude(&self) -> f64 {
        self.n_atoms as f64 / 2.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PulseOp {
    MicrowaveRotation { axis: Axis, angle: f64 },
    RamanPi { laser_phase: f64 },
    Squeeze(SqueezeParams),
    /// Stand-in for the whole interferometer block; reduced form only.
    InjectRotation { axis: Axis, angle: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub form: Form,
    pub ops: Vec<PulseOp>,
}

impl PulseSequence {
    pub fn new(form: Form, ops: Vec<PulseOp>) -> Result<Self> {
        if form == Form::Explicit && ops.iter().any(|o| matches!(o, PulseOp::InjectRotation { .. })) {
            return Err(Error::InvalidArgument(
                "injected rotations are only legal in reduced-form sequences".into(),
            ));
        }
        Ok(PulseSequence { form, ops })
    }

    pub fn apply(&self, state: &DickeState) -> Result<DickeState> {
        let mut s = state.clone();
        for op in &self.ops {
            match *op {
                PulseOp::MicrowaveRotation { axis, angle } | PulseOp::InjectRotation { axis, angle } => {
                    ensure_finite("rotation angle", angle)?;
                    s.rotate_in_place(axis, angle);
                }
                PulseOp::RamanPi { laser_phase } => {
                    ensure_finite("laser phase", laser_phase)?;
                    s.raman_pi_in_place(laser_phase);
                }
                PulseOp::Squeeze(p) => {
                    ensure_finite("squeezing parameter", p.mu)?;
                    s.squeeze_in_place(p);
                }
            }
        }
        Ok(s)
    }
}

/// Ordered pulses of `spec` with total injected phase `injected_phase`.
///
/// In explicit form the injected phase rides on the last Raman pulse as a
/// laser-phase offset of half its value, since a π-pulse pair doubles phases.
pub fn build_sequence(spec: &ProtocolSpec, injected_phase: f64) -> Result<PulseSequence> {
    ensure_finite("injected phase", injected_phase)?;
    let fam = spec.family;
    let mut ops = Vec::new();
    ops.push(PulseOp::MicrowaveRotation { axis: fam.first_axis(), angle: FRAC_PI_2 });
    if fam.is_squeezed() {
        ops.push(PulseOp::Squeeze(SqueezeParams::squeeze(spec.mu)));
    }
    match spec.form {
        Form::Reduced => {
            let (axis, sign) = fam.reduced_block();
            ops.push(PulseOp::InjectRotation { axis, angle: sign * injected_phase });
        }
        Form::Explicit => {
            let geom = spec.geometry.as_ref().ok_or_else(|| {
                Error::InvalidArgument("explicit form needs an interferometer geometry".into())
            })?;
            explicit_block(spec, geom, injected_phase, &mut ops)?;
        }
    }
    if fam.is_squeezed() {
        ops.push(PulseOp::Squeeze(SqueezeParams::unsqueeze(spec.mu)));
    }
    ops.push(PulseOp::MicrowaveRotation { axis: fam.final_axis(), angle: FRAC_PI_2 });
    PulseSequence::new(spec.form, ops)
}

fn explicit_block(
    spec: &ProtocolSpec,
    geom: &InterferometerGeometry,
    injected_phase: f64,
    ops: &mut Vec<PulseOp>,
) -> Result<()> {
    let axis = spec.family.block_axis();
    let schedule = build_schedule(geom)?;
    ops.push(PulseOp::MicrowaveRotation { axis, angle: FRAC_PI_2 });
    if spec.aux_phase != 0.0 {
        ops.push(PulseOp::MicrowaveRotation { axis: Axis::Z, angle: spec.aux_phase });
    }
    let last_raman = schedule
        .events
        .iter()
        .rposition(|e| e.label.is_raman())
        .expect("schedule has Raman pulses");
    // Every pulse swaps the internal states, so the arm sitting in |+ẑ⟩
    // alternates; its kick sets the sign of the imprinted laser phase.
    for (i, e) in schedule.events.iter().enumerate() {
        if e.label.is_raman() {
            let kick = if i % 2 == 0 { e.kick_upper } else { e.kick_lower };
            let mut phase = kick as f64 * geom.k_eff * geom.center_of_mass(e.time) + spec.common_laser_phase;
            if i == last_raman {
                phase += 0.5 * injected_phase;
            }
            ops.push(PulseOp::RamanPi { laser_phase: phase });
        } else {
            ops.push(PulseOp::MicrowaveRotation { axis, angle: PI });
        }
    }
    if spec.aux_phase != 0.0 {
        ops.push(PulseOp::MicrowaveRotation { axis: Axis::Z, angle: spec.aux_phase });
    }
    ops.push(PulseOp::MicrowaveRotation { axis, angle: FRAC_PI_2 });
    Ok(())
}

/// Final state of the protocol started from |+ẑ⟩.
pub fn run_sequence(spec: &ProtocolSpec, injected_phase: f64) -> Result<DickeState> {
    let seq = build_sequence(spec, injected_phase)?;
    let start = DickeState::coherent(spec.n_atoms, Axis::Z, Polarity::Plus)?;
    seq.apply(&start)
}

/// ⟨S_z⟩ of the final state.
pub fn signal(spec: &ProtocolSpec, injected_phase: f64) -> Result<f64> {
    Ok(run_sequence(spec, injected_phase)?.expectation(Axis::Z))
}

/// (⟨S_z⟩, ΔS_z) of the final state.
pub fn signal_and_noise(spec: &ProtocolSpec, injected_phase: f64) -> Result<(f64, f64)> {
    let s = run_sequence(spec, injected_phase)?;
    Ok((s.expectation(Axis::Z), s.variance(Axis::Z).sqrt()))
}
