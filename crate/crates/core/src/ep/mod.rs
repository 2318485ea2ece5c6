//! Dual-isotope equivalence-principle test: fringes, peak locking, Eötvös
//! parameter extraction and the closed-form mission budget.
//!
//! Sign convention: δa = a_B − a_A, so η > 0 when isotope B falls faster.

mod budget;

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::output::CsvTable;
use crate::protocol::{estimated_magnification, signal_and_noise, Form, FringeScan, ProtocolSpec};
use crate::trajectory::InterferometerGeometry;

pub use budget::{mission_budget, BudgetParams, MissionBudget};

/// One isotope of a dual run. `geometry.accel` is the true acceleration.
///
/// The two isotopes live in separate Hilbert spaces; nothing here couples them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotopeRun {
    pub name: String,
    pub protocol: ProtocolSpec,
    pub geometry: InterferometerGeometry,
}

impl IsotopeRun {
    /// An explicit-form protocol must carry this same geometry; its Raman
    /// pulses then imprint the acceleration phase themselves.
    pub fn new(name: impl Into<String>, protocol: ProtocolSpec, geometry: InterferometerGeometry) -> Result<Self> {
        geometry.validate()?;
        if protocol.form() == Form::Explicit && protocol.geometry() != Some(&geometry) {
            return Err(Error::Configuration(
                "explicit protocol geometry differs from the run geometry".into(),
            ));
        }
        Ok(IsotopeRun { name: name.into(), protocol, geometry })
    }

    /// Phase per unit acceleration, rad/(m/s²).
    pub fn phase_scale(&self) -> f64 {
        self.geometry.phase_scale()
    }

    /// φ_p at which the central dip sits for the true acceleration.
    pub fn expected_peak(&self) -> f64 {
        -self.phase_scale() * self.geometry.accel
    }

    /// (⟨S_z⟩, ΔS_z) with total phase phase_scale·a + φ_p.
    pub fn signal_and_noise(&self, phi_p: f64) -> Result<(f64, f64)> {
        match self.protocol.form() {
            Form::Reduced => signal_and_noise(&self.protocol, self.phase_scale() * self.geometry.accel + phi_p),
            Form::Explicit => signal_and_noise(&self.protocol, phi_p),
        }
    }

    pub fn signal(&self, phi_p: f64) -> Result<f64> {
        Ok(self.signal_and_noise(phi_p)?.0)
    }

    pub fn fringe(&self, phi_grid: &[f64]) -> Result<FringeScan> {
        if phi_grid.is_empty() || phi_grid.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument("φ_p grid must be non-empty and finite".into()));
        }
        let pts: Vec<(f64, f64)> = phi_grid
            .par_iter()
            .map(|&p| self.signal_and_noise(p))
            .collect::<Result<_>>()?;
        Ok(FringeScan {
            phases: phi_grid.to_vec(),
            signals: pts.iter().map(|p| p.0).collect(),
            noises: pts.iter().map(|p| p.1).collect(),
            amplitude: self.protocol.amplitude(),
        })
    }

    /// Period of the central fringe estimated from the magnification.
    fn fringe_period(&self) -> f64 {
        2.0 * PI / estimated_magnification(&self.protocol)
    }
}

fn check_pair(a: &IsotopeRun, b: &IsotopeRun) -> Result<()> {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs());
    if !close(a.geometry.k_eff, b.geometry.k_eff) {
        return Err(Error::Configuration(format!(
            "k_eff differs between {} ({}) and {} ({})",
            a.name, a.geometry.k_eff, b.name, b.geometry.k_eff
        )));
    }
    if !close(a.geometry.t, b.geometry.t) {
        return Err(Error::Configuration(format!(
            "T differs between {} ({}) and {} ({})",
            a.name, a.geometry.t, b.name, b.geometry.t
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualFringes {
    pub a: FringeScan,
    pub b: FringeScan,
}

impl DualFringes {
    pub fn to_csv_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["phi_p", "signal_A", "noise_A", "signal_B", "noise_B"]);
        for i in 0..self.a.len() {
            t.push_floats(&[
                self.a.phases[i],
                self.a.signals[i],
                self.a.noises[i],
                self.b.signals[i],
                self.b.noises[i],
            ]);
        }
        t
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        self.to_csv_table().write(w)
    }
}

/// Both isotopes' fringes over a shared φ_p grid.
pub fn dual_fringes(a: &IsotopeRun, b: &IsotopeRun, phi_grid: &[f64]) -> Result<DualFringes> {
    check_pair(a, b)?;
    let (fa, fb) = rayon::join(|| a.fringe(phi_grid), || b.fringe(phi_grid));
    Ok(DualFringes { a: fa?, b: fb? })
}

const LOCK_SCAN_POINTS: usize = 129;

/// Centre of the central dip of `run`, seeded at its expected position.
///
/// A local scan over one estimated period finds the lowest grid point; the
/// dip centre is then the zero of the error signal S(φ + d) − S(φ − d),
/// located by bisection. Squeezed fringes carry an odd cubic term about the
/// dip, which shifts that zero by ~d², so d is kept at 10⁻⁵ of a period.
pub fn locate_peak(run: &IsotopeRun) -> Result<f64> {
    let seed = run.expected_peak();
    let period = run.fringe_period();
    let step = period / (LOCK_SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..LOCK_SCAN_POINTS)
        .map(|i| seed - 0.5 * period + step * i as f64)
        .collect();
    let sig: Vec<f64> = grid.par_iter().map(|&p| run.signal(p)).collect::<Result<_>>()?;
    let lowest = sig.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * run.protocol.amplitude();
    let candidates: Vec<usize> = (0..sig.len()).filter(|&i| sig[i] - lowest <= tol).collect();
    let first = candidates[0];
    if candidates.iter().any(|&i| i > first + 2) || run.protocol.amplitude() - lowest <= tol {
        return Err(Error::AmbiguousPeak { candidates: candidates.iter().map(|&i| grid[i]).collect() });
    }
    let d = 1e-5 * period;
    let err = |p: f64| -> Result<f64> { Ok(run.signal(p + d)? - run.signal(p - d)?) };
    let (mut lo, mut hi) = (grid[first] - step, grid[first] + step);
    let mut e_lo = err(lo)?;
    let e_hi = err(hi)?;
    if e_lo > 0.0 || e_hi < 0.0 {
        return Err(Error::AmbiguousPeak { candidates: vec![grid[first]] });
    }
    let floor = 4.0 * f64::EPSILON * seed.abs().max(period);
    for _ in 0..200 {
        if hi - lo <= floor {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let e = err(mid)?;
        if e == 0.0 {
            return Ok(mid);
        }
        if (e < 0.0) == (e_lo < 0.0) {
            lo = mid;
            e_lo = e;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EotvosResult {
    pub eta: f64,
    /// a_B − a_A recovered from the peak positions, m/s².
    pub delta_a: f64,
    pub mean_a: f64,
    /// φ_p locked to isotope A's central dip.
    pub lock_phase: f64,
    pub peak_a: f64,
    pub peak_b: f64,
    /// φ_B* − φ_A*
    pub delta_phi: f64,
}

/// Locks φ_p to isotope A, measures isotope B's offset and converts both
/// peak positions to accelerations.
pub fn lock_and_extract(a: &IsotopeRun, b: &IsotopeRun) -> Result<EotvosResult> {
    check_pair(a, b)?;
    let (pa, pb) = rayon::join(|| locate_peak(a), || locate_peak(b));
    let (pa, pb) = (pa?, pb?);
    let acc_a = -pa / a.phase_scale();
    let acc_b = -pb / b.phase_scale();
    let mean_a = 0.5 * (acc_a + acc_b);
    if mean_a == 0.0 {
        return Err(Error::InvalidArgument("mean acceleration is zero, η undefined".into()));
    }
    let delta_a = acc_b - acc_a;
    Ok(EotvosResult {
        eta: delta_a / mean_a,
        delta_a,
        mean_a,
        lock_phase: pa,
        peak_a: pa,
        peak_b: pb,
        delta_phi: pb - pa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::Family;

    fn run(name: &str, n: usize, mu: f64, accel: f64) -> IsotopeRun {
        let g = InterferometerGeometry::new(1, 0.01, 0.0, 0.0).with_accel(accel);
        IsotopeRun::new(name, ProtocolSpec::new(Family::GespE, n, mu).unwrap(), g).unwrap()
    }

    #[test]
    fn peak_at_expected_position() {
        let r = run("A", 16, 0.5, 9.8);
        let p = locate_peak(&r).unwrap();
        assert!((p - r.expected_peak()).abs() < 1e-9 * r.expected_peak().abs());
    }

    #[test]
    fn mismatched_t_rejected() {
        let a = run("A", 8, 0.5, 9.8);
        let mut b = run("B", 8, 0.5, 9.8);
        b.geometry.t = 0.02;
        assert!(matches!(lock_and_extract(&a, &b), Err(Error::Configuration(_))));
    }

    #[test]
    fn explicit_geometry_must_match() {
        let g = InterferometerGeometry::new(1, 0.01, 0.0, 0.0);
        let spec = ProtocolSpec::new(Family::GespE, 4, 0.5).unwrap().explicit(g).unwrap();
        assert!(IsotopeRun::new("A", spec, g.with_accel(1.0)).is_err());
    }

    #[test]
    fn dual_csv_columns() {
        let a = run("A", 4, 0.5, 9.8);
        let f = dual_fringes(&a, &a, &[-1.0, 0.0, 1.0]).unwrap();
        let csv = f.to_csv_table().render();
        assert!(csv.starts_with("phi_p,signal_A,noise_A,signal_B,noise_B\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}
