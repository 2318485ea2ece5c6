//! Phase sensitivity Δψ = √(ΔS_z² + σ²)/|∂⟨S_z⟩/∂ψ| and fringe magnification.
//!
//! The operating point minimizes Δψ over one estimated fringe period: a
//! coarse grid that straddles ψ = 0 without sampling it, then golden-section
//! refinement. Points where the slope is below a small floor are excluded,
//! so protocols whose optimum is the limit ψ → 0 (GESP) converge onto that
//! limit from the side.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{signal, signal_and_noise, Family, ProtocolSpec};
use crate::dicke::warm_rotation_cache;
use crate::error::{Error, Result};
use crate::output::{sig12, CsvTable};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSettings {
    /// Coarse grid size over one estimated fringe period.
    pub grid_points: usize,
    /// Finite-difference step as a fraction of the fringe period.
    pub fd_step_fraction: f64,
    /// Golden-section stopping width as a fraction of the fringe period.
    pub refine_tolerance: f64,
    /// Slopes below this fraction of (N/2)·M_est count as zero.
    pub slope_floor: f64,
}

impl Default for SearchSettings {
    fn default() -> Self {
        SearchSettings {
            grid_points: 512,
            fd_step_fraction: 1e-4,
            refine_tolerance: 1e-10,
            slope_floor: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub family: Family,
    pub n_atoms: usize,
    pub mu: f64,
    pub operating_phase: f64,
    /// |∂⟨S_z⟩/∂ψ| at the operating point.
    pub gradient: f64,
    /// Quantum noise ΔS_z at the operating point.
    pub noise: f64,
    pub delta_psi: f64,
    /// (1/√N)/Δψ.
    pub sql_ratio: f64,
    pub detection_noise_sigma: Option<f64>,
    /// Local fringe wavenumber relative to a conventional cosine fringe.
    pub fringe_magnification: f64,
}

impl SensitivityReport {
    pub fn to_csv_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&[
            "family",
            "n_atoms",
            "mu",
            "operating_phase",
            "gradient",
            "noise",
            "delta_psi",
            "sql_ratio",
            "detection_noise_sigma",
            "fringe_magnification",
        ]);
        t.push_raw(vec![
            self.family.to_string(),
            self.n_atoms.to_string(),
            sig12(self.mu),
            sig12(self.operating_phase),
            sig12(self.gradient),
            sig12(self.noise),
            sig12(self.delta_psi),
            sig12(self.sql_ratio),
            sig12(self.detection_noise_sigma.unwrap_or(0.0)),
            sig12(self.fringe_magnification),
        ]);
        t
    }
}

/// Expected fringe magnification used to size the search window.
///
/// Conventional 1, SCSP N, GESP N·sinμ/√2, CESP Nμ·exp(−Nμ²/2); never below 1.
pub fn estimated_magnification(spec: &ProtocolSpec) -> f64 {
    let n = spec.n_atoms() as f64;
    let mu = spec.mu();
    let m = match spec.family() {
        Family::Conventional => 1.0,
        Family::ScspE | Family::ScspO => n,
        Family::GespE | Family::GespO => n * mu.sin() / std::f64::consts::SQRT_2,
        Family::Cesp => n * mu * (-n * mu * mu / 2.0).exp(),
    };
    m.max(1.0)
}

struct Probe {
    slope: f64,
    curvature: f64,
    noise: f64,
}

fn probe(spec: &ProtocolSpec, psi: f64, h: f64) -> Result<Probe> {
    let (s0, noise) = signal_and_noise(spec, psi)?;
    let sp = signal(spec, psi + h)?;
    let sm = signal(spec, psi - h)?;
    Ok(Probe {
        slope: (sp - sm) / (2.0 * h),
        curvature: (sp - 2.0 * s0 + sm) / (h * h),
        noise,
    })
}

fn delta_psi_of(p: &Probe, sigma: f64, floor: f64) -> f64 {
    if p.slope.abs() <= floor {
        f64::INFINITY
    } else {
        (p.noise * p.noise + sigma * sigma).sqrt() / p.slope.abs()
    }
}

/// √u with u = [(S'/A)² + √((S'/A)⁴ + 4(S''/A)²)]/2.
///
/// Equals k for a fringe A·cos(kψ + c) at any ψ, reduces to |S'|/A at a
/// zero crossing of the curvature and to √(|S''|/A) at an extremum.
fn local_magnification(p: &Probe, amplitude: f64) -> f64 {
    let g = p.slope / amplitude;
    let c = p.curvature / amplitude;
    let u = 0.5 * (g * g + (g.powi(4) + 4.0 * c * c).sqrt());
    u.sqrt()
}

pub fn sensitivity(spec: &ProtocolSpec, detection_noise_sigma: Option<f64>) -> Result<SensitivityReport> {
    sensitivity_with(spec, detection_noise_sigma, &SearchSettings::default())
}

pub fn sensitivity_with(
    spec: &ProtocolSpec,
    detection_noise_sigma: Option<f64>,
    settings: &SearchSettings,
) -> Result<SensitivityReport> {
    let sigma = detection_noise_sigma.unwrap_or(0.0);
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::InvalidArgument(format!("detection noise sigma must be ≥ 0, got {sigma}")));
    }
    if settings.grid_points < 4 {
        return Err(Error::InvalidArgument("need at least 4 grid points".into()));
    }
    warm_rotation_cache(spec.n_atoms());
    let amp = spec.amplitude();
    let m_est = estimated_magnification(spec);
    let period = 2.0 * PI / m_est;
    let h = settings.fd_step_fraction * period;
    let floor = settings.slope_floor * amp * m_est;
    let npts = settings.grid_points;
    let step = period / npts as f64;
    // cell centres: symmetric about 0 and never on it
    let grid: Vec<f64> = (0..npts)
        .map(|i| -0.5 * period + (i as f64 + 0.5) * step)
        .collect();
    let coarse: Vec<f64> = grid
        .par_iter()
        .map(|&psi| probe(spec, psi, h).map(|p| delta_psi_of(&p, sigma, floor)))
        .collect::<Result<_>>()?;
    let (best, &best_val) = coarse
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    if !best_val.is_finite() {
        return Err(Error::DegenerateProtocol(format!(
            "{} with N={} and mu={}: signal slope vanishes over the whole fringe",
            spec.family(),
            spec.n_atoms(),
            spec.mu()
        )));
    }

    let objective = |psi: f64| -> Result<f64> { Ok(delta_psi_of(&probe(spec, psi, h)?, sigma, floor)) };
    let (mut lo, mut hi) = (grid[best] - step, grid[best] + step);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = objective(c)?;
    let mut fd = objective(d)?;
    while hi - lo > settings.refine_tolerance * period {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = objective(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = objective(d)?;
        }
    }
    let mut psi_star = 0.5 * (lo + hi);
    let mut p = probe(spec, psi_star, h)?;
    let mut dpsi = delta_psi_of(&p, sigma, floor);
    if dpsi.is_nan() || dpsi > best_val {
        psi_star = grid[best];
        p = probe(spec, psi_star, h)?;
        dpsi = delta_psi_of(&p, sigma, floor);
    }
    Ok(SensitivityReport {
        family: spec.family(),
        n_atoms: spec.n_atoms(),
        mu: spec.mu(),
        operating_phase: psi_star,
        gradient: p.slope.abs(),
        noise: p.noise,
        delta_psi: dpsi,
        sql_ratio: (1.0 / (spec.n_atoms() as f64).sqrt()) / dpsi,
        detection_noise_sigma,
        fringe_magnification: local_magnification(&p, amp),
    })
}

/// Largest |∂⟨S_z⟩/∂ψ|/(N/2) over ψ ∈ [−π, π], from a dense central-difference scan.
pub fn max_slope_magnification(spec: &ProtocolSpec) -> Result<f64> {
    warm_rotation_cache(spec.n_atoms());
    let m_est = estimated_magnification(spec).max(spec.n_atoms() as f64);
    let points = ((64.0 * m_est) as usize).max(2048);
    let h = 1e-4 * 2.0 * PI / m_est;
    let grid = super::uniform_grid(-PI, PI, points);
    let slopes: Vec<f64> = grid
        .par_iter()
        .map(|&psi| Ok(((signal(spec, psi + h)? - signal(spec, psi - h)?) / (2.0 * h)).abs()))
        .collect::<Result<_>>()?;
    Ok(slopes.into_iter().fold(0.0, f64::max) / spec.amplitude())
}

/// The μ interval 4√(2/N) ≤ μ ≤ π/2 − √(2/N) where GESP sits on its plateau.
pub fn gesp_optimal_window(n_atoms: usize) -> Option<(f64, f64)> {
    let r = (2.0 / n_atoms as f64).sqrt();
    let (lo, hi) = (4.0 * r, FRAC_PI_2 - r);
    (lo <= hi).then_some((lo, hi))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateauRow {
    pub mu: f64,
    pub delta_psi: f64,
    pub sql_ratio: f64,
    pub in_window: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateauTable {
    pub n_atoms: usize,
    /// None when the plateau interval is empty for this N.
    pub window: Option<(f64, f64)>,
    pub rows: Vec<PlateauRow>,
}

impl PlateauTable {
    pub fn to_csv_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["mu", "delta_psi", "sql_ratio"]);
        for r in &self.rows {
            t.push_floats(&[r.mu, r.delta_psi, r.sql_ratio]);
        }
        t
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        self.to_csv_table().write(w)
    }
}

/// GESP-e sensitivity across `mu_grid`.
pub fn gesp_plateau(n_atoms: usize, mu_grid: &[f64]) -> Result<PlateauTable> {
    let window = gesp_optimal_window(n_atoms);
    warm_rotation_cache(n_atoms);
    let rows = mu_grid
        .par_iter()
        .map(|&mu| {
            let spec = ProtocolSpec::new(Family::GespE, n_atoms, mu)?;
            let r = sensitivity(&spec, None)?;
            Ok(PlateauRow {
                mu,
                delta_psi: r.delta_psi,
                sql_ratio: r.sql_ratio,
                in_window: window.is_some_and(|(lo, hi)| mu >= lo && mu <= hi),
            })
        })
        .collect::<Result<_>>()?;
    Ok(PlateauTable { n_atoms, window, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_bounds() {
        let (lo, hi) = gesp_optimal_window(256).unwrap();
        assert!((lo - 0.353_553_390_593_273_8).abs() < 1e-15);
        assert!((hi - (FRAC_PI_2 - 0.088_388_347_648_318_44)).abs() < 1e-15);
        assert!(gesp_optimal_window(16).is_none());
    }

    #[test]
    fn cosine_magnification_is_wavenumber() {
        // A·cos(kψ+c) sampled analytically
        let (a, k, c) = (3.0_f64, 7.0_f64, 0.4_f64);
        for psi in [0.0, 0.1, 0.3, 1.0] {
            let x = k * psi + c;
            let p = Probe {
                slope: -a * k * x.sin(),
                curvature: -a * k * k * x.cos(),
                noise: 0.0,
            };
            assert!((local_magnification(&p, a) - k).abs() < 1e-12);
        }
    }

    #[test]
    fn conventional_is_at_sql() {
        let spec = ProtocolSpec::new(Family::Conventional, 16, 0.0).unwrap();
        let r = sensitivity(&spec, None).unwrap();
        assert!((r.sql_ratio - 1.0).abs() < 1e-6, "{r:?}");
        assert!((r.fringe_magnification - 1.0).abs() < 1e-6);
    }

    #[test]
    fn untwisted_gesp_is_degenerate() {
        let spec = ProtocolSpec::new(Family::GespE, 8, 0.0).unwrap();
        assert!(matches!(sensitivity(&spec, None), Err(Error::DegenerateProtocol(_))));
    }
}
