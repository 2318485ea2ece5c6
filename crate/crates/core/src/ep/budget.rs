use serde::{Deserialize, Serialize};

use crate::constants::{k_eff_counterpropagating, AMU, G_EARTH, HBAR, RB_D2_WAVELENGTH};
use crate::error::{Error, Result};
use crate::output::CsvTable;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetParams {
    /// LMT order
    pub n: u32,
    /// s
    pub t: f64,
    pub n_atoms: f64,
    pub shots: f64,
    /// rad/m
    pub k_eff: f64,
    /// Mean acceleration, m/s².
    pub accel: f64,
    /// kg
    pub mass: f64,
    /// Vacuum chamber length x, m; `None` skips the constraint check.
    pub chamber_length: Option<f64>,
    /// Plain multiplier from ideal to practical sensitivity.
    pub derating: f64,
}

impl BudgetParams {
    /// Rb D2 Raman beams, ⁸⁵Rb mass, 9.8 m/s², one shot, no chamber limit.
    pub fn new(n: u32, t: f64, n_atoms: f64) -> Self {
        BudgetParams {
            n,
            t,
            n_atoms,
            shots: 1.0,
            k_eff: k_eff_counterpropagating(RB_D2_WAVELENGTH),
            accel: G_EARTH,
            mass: 84.911_789_738 * AMU,
            chamber_length: None,
            derating: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidArgument("LMT order n must be at least 1".into()));
        }
        for (name, v) in [
            ("T", self.t),
            ("N", self.n_atoms),
            ("shots", self.shots),
            ("k_eff", self.k_eff),
            ("a", self.accel),
            ("mass", self.mass),
            ("derating", self.derating),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be finite and positive, got {v}")));
            }
        }
        if let Some(x) = self.chamber_length {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::InvalidArgument(format!("chamber length must be positive, got {x}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MissionBudget {
    pub params: BudgetParams,
    /// √2/(N·2n·k_eff·T²), m/s².
    pub delta_a_per_shot: f64,
    pub eta_per_shot: f64,
    /// eta_per_shot/√shots
    pub eta_accumulated: f64,
    /// eta_accumulated × derating
    pub eta_derated: f64,
    /// Arm separation 2nħk_eff·T/m, m.
    pub excursion: f64,
    pub constraint_satisfied: Option<bool>,
    /// m·a·x·T/ħ, the phase reached when the chamber constraint is saturated.
    pub phi_max: Option<f64>,
}

impl MissionBudget {
    pub fn to_csv_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&[
            "n",
            "t_s",
            "n_atoms",
            "shots",
            "delta_a_per_shot",
            "eta_per_shot",
            "eta_accumulated",
            "eta_derated",
            "excursion_m",
            "constraint_satisfied",
            "phi_max",
        ]);
        let p = &self.params;
        let f = crate::output::sig12;
        t.push_raw(vec![
            p.n.to_string(),
            f(p.t),
            f(p.n_atoms),
            f(p.shots),
            f(self.delta_a_per_shot),
            f(self.eta_per_shot),
            f(self.eta_accumulated),
            f(self.eta_derated),
            f(self.excursion),
            self.constraint_satisfied.map(|b| b.to_string()).unwrap_or_default(),
            self.phi_max.map(f).unwrap_or_default(),
        ]);
        t
    }
}

/// Shot-noise-limited budget at the squeezed-protocol scaling √2/N.
/// A violated chamber constraint is flagged, not an error.
pub fn mission_budget(params: &BudgetParams) -> Result<MissionBudget> {
    params.validate()?;
    let p = params;
    let two_n = 2.0 * p.n as f64;
    let delta_a = std::f64::consts::SQRT_2 / (p.n_atoms * two_n * p.k_eff * p.t * p.t);
    let eta = delta_a / p.accel;
    let eta_acc = eta / p.shots.sqrt();
    let excursion = two_n * HBAR * p.k_eff * p.t / p.mass;
    Ok(MissionBudget {
        params: *p,
        delta_a_per_shot: delta_a,
        eta_per_shot: eta,
        eta_accumulated: eta_acc,
        eta_derated: eta_acc * p.derating,
        excursion,
        constraint_satisfied: p.chamber_length.map(|x| excursion <= x),
        phi_max: p.chamber_length.map(|x| p.mass * p.accel * x * p.t / HBAR),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constraint_flagged_not_error() {
        let mut p = BudgetParams::new(5, 1.0, 1e5);
        p.chamber_length = Some(1e-3);
        let b = mission_budget(&p).unwrap();
        assert_eq!(b.constraint_satisfied, Some(false));
        p.chamber_length = Some(1.0);
        assert_eq!(mission_budget(&p).unwrap().constraint_satisfied, Some(true));
    }

    #[test]
    fn invalid_inputs() {
        let mut p = BudgetParams::new(5, 1.0, 1e5);
        p.shots = 0.0;
        assert!(mission_budget(&p).is_err());
        let p = BudgetParams::new(0, 1.0, 1e5);
        assert!(mission_budget(&p).is_err());
    }

    #[test]
    fn derating_is_multiplier() {
        let mut p = BudgetParams::new(5, 1.0, 1e5);
        p.derating = 45.0;
        let b = mission_budget(&p).unwrap();
        assert_eq!(b.eta_derated, 45.0 * b.eta_accumulated);
    }
}
