//! Cavity-probe light shifts of the two clock states and the probe offset
//! Δω that cancels their sum.
//!
//! The probe sits Δω below the highest excited hyperfine level, referenced
//! to the midpoint of the two ground states. Excited level j lies ω_j3
//! below the highest one, so the signed detunings are
//! ω_HFS/2 + ω_j3 − Δω from the upper ground state and
//! −ω_HFS/2 + ω_j3 − Δω from the lower one, and each ground state shifts by
//! Γ² Σ_j |α_j|² / (4 D_j).

mod species;

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::output::CsvTable;

pub use species::{
    load_species, load_species_file, parse_species_file, Coupling, ExcitedLevel, Ground,
    SpeciesData,
};

/// Minimum distance kept from any pole, rad/s.
pub const POLE_GUARD: f64 = 2.0 * PI * 1.0e3;

fn detuning(species: &SpeciesData, ground: Ground, offset: f64, delta_omega: f64) -> f64 {
    let half = 0.5 * species.omega_hfs;
    match ground {
        Ground::Upper => half + offset - delta_omega,
        Ground::Lower => -half + offset - delta_omega,
    }
}

/// Value of Δω at which the ground → F′ detuning vanishes.
fn pole(species: &SpeciesData, ground: Ground, offset: f64) -> f64 {
    detuning(species, ground, offset, 0.0)
}

fn shift_unchecked(species: &SpeciesData, ground: Ground, delta_omega: f64) -> f64 {
    let g2 = species.gamma * species.gamma;
    species
        .couplings(ground)
        .iter()
        .filter(|c| c.alpha_sq > 0.0)
        .map(|c| {
            let off = species.offset_of(c.f).expect("validated species");
            g2 * c.alpha_sq / (4.0 * detuning(species, ground, off, delta_omega))
        })
        .sum()
}

/// Light shift of one ground state at probe offset `delta_omega`, rad/s.
pub fn light_shift(species: &SpeciesData, ground: Ground, delta_omega: f64) -> Result<f64> {
    if !delta_omega.is_finite() {
        return Err(Error::InvalidArgument(format!("delta_omega must be finite, got {delta_omega}")));
    }
    species.validate()?;
    for c in species.couplings(ground).iter().filter(|c| c.alpha_sq > 0.0) {
        let off = species.offset_of(c.f).expect("validated species");
        let d = detuning(species, ground, off, delta_omega);
        if d.abs() < POLE_GUARD {
            return Err(Error::Singularity { ground: ground.name(), f_prime: c.f, detuning: d });
        }
    }
    Ok(shift_unchecked(species, ground, delta_omega))
}

/// ω_LS(lower) + ω_LS(upper).
pub fn total_shift(species: &SpeciesData, delta_omega: f64) -> Result<f64> {
    Ok(light_shift(species, Ground::Lower, delta_omega)? + light_shift(species, Ground::Upper, delta_omega)?)
}

/// Gap between the highest lower-state pole and the lowest upper-state pole,
/// shrunk by twice the guard band at both ends so the endpoints evaluate.
pub fn default_bracket(species: &SpeciesData) -> Result<(f64, f64)> {
    species.validate()?;
    let poles = |g: Ground| -> Vec<f64> {
        species
            .couplings(g)
            .iter()
            .filter(|c| c.alpha_sq > 0.0)
            .map(|c| pole(species, g, species.offset_of(c.f).expect("validated species")))
            .collect()
    };
    let lo = poles(Ground::Lower).into_iter().fold(f64::NEG_INFINITY, f64::max) + 2.0 * POLE_GUARD;
    let hi = poles(Ground::Upper).into_iter().fold(f64::INFINITY, f64::min) - 2.0 * POLE_GUARD;
    if lo >= hi {
        return Err(Error::SpeciesData(format!(
            "{}: lower- and upper-state poles overlap, no pole-free gap",
            species.name
        )));
    }
    Ok((lo, hi))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceResult {
    pub species: String,
    /// rad/s
    pub delta_omega: f64,
    /// |ω_LS1 + ω_LS2| at the root, rad/s.
    pub residual: f64,
    pub shift_lower: f64,
    pub shift_upper: f64,
    pub bracket: (f64, f64),
    /// Strongest Rabi frequency Γ·max|α| over ω_HFS/2; should be ≪ 1.
    pub weak_drive_ratio: f64,
}

impl BalanceResult {
    /// Δω/2π in MHz.
    pub fn delta_omega_mhz(&self) -> f64 {
        self.delta_omega / (2.0 * PI * 1e6)
    }

    pub fn to_csv_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&[
            "species",
            "delta_omega_mhz",
            "residual_rad_s",
            "shift_lower_rad_s",
            "shift_upper_rad_s",
            "bracket_lo_mhz",
            "bracket_hi_mhz",
            "weak_drive_ratio",
        ]);
        let mhz = 2.0 * PI * 1e6;
        let nums = [
            self.delta_omega_mhz(),
            self.residual,
            self.shift_lower,
            self.shift_upper,
            self.bracket.0 / mhz,
            self.bracket.1 / mhz,
            self.weak_drive_ratio,
        ];
        let mut row = vec![self.species.clone()];
        row.extend(nums.iter().map(|&x| crate::output::sig12(x)));
        t.push_raw(row);
        t
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        self.to_csv_table().write(w)
    }
}

/// Solves ω_LS1 + ω_LS2 = 0 in the default pole-free bracket.
pub fn balance(species: &SpeciesData) -> Result<BalanceResult> {
    balance_in(species, default_bracket(species)?)
}

/// Bisection to a tight interval, then secant polish, within `bracket`.
pub fn balance_in(species: &SpeciesData, bracket: (f64, f64)) -> Result<BalanceResult> {
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidArgument(format!("bad bracket [{lo}, {hi}]")));
    }
    let f = |x: f64| total_shift(species, x);
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a)?, f(b)?);
    if fa.signum() == fb.signum() {
        let profile = (0..=64)
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / 64.0;
                (x, shift_unchecked(species, Ground::Lower, x) + shift_unchecked(species, Ground::Upper, x))
            })
            .collect();
        return Err(Error::NoRoot { bracket, profile });
    }
    let scale = lo.abs().max(hi.abs()).max(species.omega_hfs);
    while b - a > 1e-9 * scale {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fm == 0.0 {
            a = m;
            b = m;
            break;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let mut x0 = a;
    let mut x1 = b;
    let mut f0 = f(x0)?;
    let mut f1 = f(x1)?;
    for _ in 0..8 {
        if f1 == f0 || f1 == 0.0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        if !(x2 > lo && x2 < hi) {
            break;
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f(x1)?;
    }
    let root = if f1.abs() <= f0.abs() { x1 } else { x0 };
    let shift_lower = light_shift(species, Ground::Lower, root)?;
    let shift_upper = light_shift(species, Ground::Upper, root)?;
    let max_alpha = species
        .lower
        .iter()
        .chain(&species.upper)
        .map(|c| c.alpha_sq.sqrt())
        .fold(0.0, f64::max);
    Ok(BalanceResult {
        species: species.name.clone(),
        delta_omega: root,
        residual: (shift_lower + shift_upper).abs(),
        shift_lower,
        shift_upper,
        bracket,
        weak_drive_ratio: species.gamma * max_alpha / (0.5 * species.omega_hfs),
    })
}
