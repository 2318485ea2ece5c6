//! Scenario file: one TOML document with a section per subcommand.
//!
//! Every section and key is optional; missing values take the defaults
//! below. Unknown keys are rejected. Physical quantities carry a unit
//! suffix (`_s`, `_m`, `_hz`, `_rad`, `_k`, `_u`, `_m_s2`, `_rad_m`).

use std::path::{Path, PathBuf};

use serde::Deserialize;

use lmtsqueeze::constants::{k_eff_counterpropagating, two_pi_hz, AMU, G_EARTH, RB_D2_WAVELENGTH};
use lmtsqueeze::ep::{BudgetParams, IsotopeRun};
use lmtsqueeze::lightshift::{load_species_file, SpeciesData};
use lmtsqueeze::protocol::{Family, Form, ProtocolSpec};
use lmtsqueeze::raman::{recoil_detuning, Averaging, ThermalEnsemble};
use lmtsqueeze::trajectory::InterferometerGeometry;

use crate::error::{CliError, CliResult};

pub const RB87_MASS_U: f64 = 86.909_180_527;
pub const RB85_MASS_U: f64 = 84.911_789_738;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub protocol: ProtocolSection,
    pub geometry: GeometrySection,
    pub species: SpeciesSection,
    pub pulse: PulseSection,
    pub ep: EpSection,
    pub budget: BudgetSection,
    pub output: OutputSection,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    pub family: String,
    pub n_atoms: usize,
    pub mu_rad: f64,
    pub form: Form,
    pub scan_points: usize,
    pub scan_lo_rad: f64,
    pub scan_hi_rad: f64,
    pub detection_noise_sigma: Option<f64>,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        ProtocolSection {
            family: "conventional".into(),
            n_atoms: 16,
            mu_rad: 0.0,
            form: Form::Reduced,
            scan_points: 512,
            scan_lo_rad: -std::f64::consts::PI,
            scan_hi_rad: std::f64::consts::PI,
            detection_noise_sigma: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    pub n: u32,
    pub t_s: f64,
    pub t0_s: f64,
    pub tau_s: f64,
    /// Defaults to counter-propagating Rb D2 beams.
    pub k_eff_rad_m: Option<f64>,
    pub accel_m_s2: f64,
    pub mass_u: f64,
    pub v0_m_s: f64,
    pub r0_m: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        GeometrySection {
            n: 3,
            t_s: 0.1,
            t0_s: 0.01,
            tau_s: 0.001,
            k_eff_rad_m: None,
            accel_m_s2: G_EARTH,
            mass_u: RB87_MASS_U,
            v0_m_s: 0.0,
            r0_m: 0.0,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpeciesSection {
    /// Species data file; the bundled Rb D2 table when absent.
    pub file: Option<PathBuf>,
    pub isotopes: Vec<String>,
}

impl Default for SpeciesSection {
    fn default() -> Self {
        SpeciesSection { file: None, isotopes: vec!["Rb87".into(), "Rb85".into()] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AveragingMethod {
    GaussHermite,
    MonteCarlo,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseSection {
    /// Explicit Ω_eff/2π grid; overrides the log-spaced min/max/points grid.
    pub omega_eff_hz: Option<Vec<f64>>,
    pub omega_min_hz: f64,
    pub omega_max_hz: f64,
    pub omega_points: usize,
    pub temperature_k: f64,
    pub mass_u: f64,
    pub k_eff_rad_m: Option<f64>,
    /// Defaults to the recoil detuning ħk_eff²/m.
    pub undesired_detuning_hz: Option<f64>,
    pub averaging: AveragingMethod,
    pub quadrature_order: usize,
    pub samples: usize,
    pub seed: u64,
    pub overlap_separation_m: f64,
    pub overlap_omega_eff_hz: f64,
}

impl Default for PulseSection {
    fn default() -> Self {
        PulseSection {
            omega_eff_hz: None,
            omega_min_hz: 100.0,
            omega_max_hz: 100e3,
            omega_points: 31,
            temperature_k: 10e-12,
            mass_u: RB85_MASS_U,
            k_eff_rad_m: None,
            undesired_detuning_hz: None,
            averaging: AveragingMethod::GaussHermite,
            quadrature_order: 32,
            samples: 2000,
            seed: 0,
            overlap_separation_m: 1e-3,
            overlap_omega_eff_hz: 5e3,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IsotopeSection {
    pub name: String,
    pub family: String,
    pub n_atoms: usize,
    pub mu_rad: f64,
    pub mass_u: f64,
    pub accel_m_s2: f64,
}

impl Default for IsotopeSection {
    fn default() -> Self {
        IsotopeSection {
            name: "A".into(),
            family: "gesp-e".into(),
            n_atoms: 32,
            mu_rad: 0.5,
            mass_u: RB85_MASS_U,
            accel_m_s2: G_EARTH,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpSection {
    pub a: IsotopeSection,
    pub b: IsotopeSection,
    pub phi_points: usize,
    /// Scan half-width around isotope A's expected central dip.
    pub phi_half_width_rad: f64,
}

impl Default for EpSection {
    fn default() -> Self {
        EpSection {
            a: IsotopeSection { name: "Rb85".into(), ..IsotopeSection::default() },
            b: IsotopeSection {
                name: "Rb87".into(),
                n_atoms: 8,
                mu_rad: 0.3,
                mass_u: RB87_MASS_U,
                ..IsotopeSection::default()
            },
            phi_points: 601,
            phi_half_width_rad: 3.0,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetSection {
    pub n: u32,
    pub t_s: f64,
    pub n_atoms: f64,
    pub shots: f64,
    pub k_eff_rad_m: Option<f64>,
    pub accel_m_s2: f64,
    pub mass_u: f64,
    pub chamber_length_m: Option<f64>,
    pub derating: f64,
}

impl Default for BudgetSection {
    fn default() -> Self {
        BudgetSection {
            n: 5,
            t_s: 1.0,
            n_atoms: 1e5,
            shots: 1.0,
            k_eff_rad_m: None,
            accel_m_s2: G_EARTH,
            mass_u: RB85_MASS_U,
            chamber_length_m: None,
            derating: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { directory: PathBuf::from("out"), formats: vec![Format::Csv] }
    }
}

fn invalid(location: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{location}: {msg}"))
}

fn positive(location: &str, x: f64) -> CliResult<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(invalid(location, format!("must be finite and positive, got {x}")))
    }
}

fn default_k_eff() -> f64 {
    k_eff_counterpropagating(RB_D2_WAVELENGTH)
}

impl Scenario {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("scenario: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| e.at(&path.display().to_string()))
    }

    pub fn geometry(&self) -> CliResult<InterferometerGeometry> {
        let g = &self.geometry;
        let k = positive("geometry.k_eff_rad_m", g.k_eff_rad_m.unwrap_or_else(default_k_eff))?;
        let mass = positive("geometry.mass_u", g.mass_u)? * AMU;
        let geom = InterferometerGeometry::new(g.n, g.t_s, g.t0_s, g.tau_s)
            .with_k_eff(k)
            .with_mass(mass)
            .with_accel(g.accel_m_s2)
            .with_launch(g.r0_m, g.v0_m_s);
        geom.validate().map_err(|e| CliError::from(e).at("geometry"))?;
        Ok(geom)
    }

    pub fn protocol_spec(&self) -> CliResult<ProtocolSpec> {
        let p = &self.protocol;
        let family: Family = p.family.parse().map_err(|e| CliError::from(e).at("protocol.family"))?;
        let spec = ProtocolSpec::new(family, p.n_atoms, p.mu_rad).map_err(|e| CliError::from(e).at("protocol"))?;
        match p.form {
            Form::Reduced => Ok(spec),
            Form::Explicit => spec.explicit(self.geometry()?).map_err(|e| CliError::from(e).at("protocol.form")),
        }
    }

    pub fn scan_grid(&self) -> CliResult<Vec<f64>> {
        let p = &self.protocol;
        if p.scan_points < 3 {
            return Err(invalid("protocol.scan_points", "need at least 3 points"));
        }
        if !(p.scan_lo_rad.is_finite() && p.scan_hi_rad.is_finite() && p.scan_lo_rad < p.scan_hi_rad) {
            return Err(invalid("protocol.scan_lo_rad", "scan range must be finite with lo < hi"));
        }
        Ok(lmtsqueeze::protocol::uniform_grid(p.scan_lo_rad, p.scan_hi_rad, p.scan_points))
    }

    pub fn detection_noise(&self) -> CliResult<Option<f64>> {
        match self.protocol.detection_noise_sigma {
            Some(s) if !(s.is_finite() && s >= 0.0) => {
                Err(invalid("protocol.detection_noise_sigma", format!("must be ≥ 0, got {s}")))
            }
            other => Ok(other),
        }
    }

    pub fn species(&self) -> CliResult<Vec<SpeciesData>> {
        let all = match &self.species.file {
            Some(path) => load_species_file(path).map_err(|e| CliError::from(e).at("species.file"))?,
            None => ["Rb87", "Rb85"]
                .iter()
                .map(|n| SpeciesData::builtin(n))
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::from(e).at("species"))?,
        };
        if self.species.isotopes.is_empty() {
            return Err(invalid("species.isotopes", "list is empty"));
        }
        self.species
            .isotopes
            .iter()
            .map(|name| {
                all.iter().find(|s| &s.name == name).cloned().ok_or_else(|| {
                    let known: Vec<&str> = all.iter().map(|s| s.name.as_str()).collect();
                    invalid("species.isotopes", format!("unknown species {name}; available: {}", known.join(", ")))
                })
            })
            .collect()
    }

    pub fn pulse_k_eff(&self) -> CliResult<f64> {
        positive("pulse.k_eff_rad_m", self.pulse.k_eff_rad_m.unwrap_or_else(default_k_eff))
    }

    pub fn pulse_mass(&self) -> CliResult<f64> {
        Ok(positive("pulse.mass_u", self.pulse.mass_u)? * AMU)
    }

    /// Ω_eff grid in rad/s.
    pub fn omega_grid(&self) -> CliResult<Vec<f64>> {
        let p = &self.pulse;
        let hz = match &p.omega_eff_hz {
            Some(list) => {
                if list.is_empty() {
                    return Err(invalid("pulse.omega_eff_hz", "list is empty"));
                }
                for &f in list {
                    positive("pulse.omega_eff_hz", f)?;
                }
                list.clone()
            }
            None => {
                let lo = positive("pulse.omega_min_hz", p.omega_min_hz)?;
                let hi = positive("pulse.omega_max_hz", p.omega_max_hz)?;
                if hi < lo {
                    return Err(invalid("pulse.omega_max_hz", "must not be below omega_min_hz"));
                }
                match p.omega_points {
                    0 => return Err(invalid("pulse.omega_points", "must be positive")),
                    1 => vec![lo],
                    n => (0..n)
                        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
                        .collect(),
                }
            }
        };
        Ok(hz.into_iter().map(two_pi_hz).collect())
    }

    pub fn ensemble(&self) -> CliResult<ThermalEnsemble> {
        let p = &self.pulse;
        let e = ThermalEnsemble::new(p.temperature_k, self.pulse_k_eff()?, self.pulse_mass()?)
            .map_err(|e| CliError::from(e).at("pulse.temperature_k"))?;
        let averaging = match p.averaging {
            AveragingMethod::GaussHermite => Averaging::GaussHermite { order: p.quadrature_order },
            AveragingMethod::MonteCarlo => Averaging::MonteCarlo { samples: p.samples, seed: p.seed },
        };
        e.with_averaging(averaging).map_err(|e| CliError::from(e).at("pulse.averaging"))
    }

    /// Undesired-channel detuning, rad/s.
    pub fn undesired_detuning(&self) -> CliResult<f64> {
        match self.pulse.undesired_detuning_hz {
            Some(hz) if !hz.is_finite() => Err(invalid("pulse.undesired_detuning_hz", "must be finite")),
            Some(hz) => Ok(two_pi_hz(hz)),
            None => Ok(recoil_detuning(self.pulse_k_eff()?, self.pulse_mass()?)),
        }
    }

    pub fn isotope_runs(&self) -> CliResult<(IsotopeRun, IsotopeRun)> {
        let geom = self.geometry()?;
        let build = |sec: &IsotopeSection, at: &str| -> CliResult<IsotopeRun> {
            let family: Family =
                sec.family.parse().map_err(|e| CliError::from(e).at(&format!("{at}.family")))?;
            let spec = ProtocolSpec::new(family, sec.n_atoms, sec.mu_rad).map_err(|e| CliError::from(e).at(at))?;
            let mass = positive(&format!("{at}.mass_u"), sec.mass_u)? * AMU;
            let g = geom.with_mass(mass).with_accel(sec.accel_m_s2);
            IsotopeRun::new(sec.name.clone(), spec, g).map_err(|e| CliError::from(e).at(at))
        };
        let a = build(&self.ep.a, "ep.a")?;
        let b = build(&self.ep.b, "ep.b")?;
        if self.ep.phi_points < 3 {
            return Err(invalid("ep.phi_points", "need at least 3 points"));
        }
        positive("ep.phi_half_width_rad", self.ep.phi_half_width_rad)?;
        Ok((a, b))
    }

    pub fn budget_params(&self) -> CliResult<BudgetParams> {
        let b = &self.budget;
        let mut p = BudgetParams::new(b.n, b.t_s, b.n_atoms);
        p.shots = b.shots;
        p.k_eff = b.k_eff_rad_m.unwrap_or_else(default_k_eff);
        p.accel = b.accel_m_s2;
        p.mass = b.mass_u * AMU;
        p.chamber_length = b.chamber_length_m;
        p.derating = b.derating;
        p.validate().map_err(|e| CliError::from(e).at("budget"))?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_scenario_uses_defaults() {
        let s = Scenario::from_toml("").unwrap();
        assert_eq!(s.protocol.n_atoms, 16);
        assert_eq!(s.scan_grid().unwrap().len(), 512);
        assert_eq!(s.species().unwrap().len(), 2);
        assert_eq!(s.omega_grid().unwrap().len(), 31);
    }

    #[test]
    fn unknown_key_is_named() {
        let e = Scenario::from_toml("[protocol]\nn_atom = 4\n").unwrap_err();
        assert!(e.to_string().contains("n_atom"), "{e}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn invalid_values_are_located() {
        let s = Scenario::from_toml("[geometry]\nt_s = -1.0\n").unwrap();
        let e = s.geometry().unwrap_err();
        assert!(e.to_string().contains("geometry"), "{e}");
        let s = Scenario::from_toml("[protocol]\nfamily = \"gesp-x\"\n").unwrap();
        assert!(s.protocol_spec().unwrap_err().to_string().contains("protocol.family"));
    }
}
