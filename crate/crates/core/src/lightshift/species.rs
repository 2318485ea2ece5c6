use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::{two_pi_hz, AMU};
use crate::error::{Error, Result};

const BUILTIN: &str = include_str!("../../data/rb_d2.toml");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ground {
    Lower,
    Upper,
}

impl Ground {
    pub fn name(self) -> &'static str {
        match self {
            Ground::Lower => "lower",
            Ground::Upper => "upper",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcitedLevel {
    pub f: u32,
    /// Distance below the highest excited hyperfine level, rad/s.
    pub offset: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    /// Excited-state F′.
    pub f: u32,
    /// |α|², dimensionless.
    pub alpha_sq: f64,
}

/// Atomic data for one isotope, angular frequencies in rad/s.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeciesData {
    pub name: String,
    /// kg
    pub mass: f64,
    pub omega_hfs: f64,
    pub gamma: f64,
    pub lower_f: u32,
    pub upper_f: u32,
    pub excited: Vec<ExcitedLevel>,
    pub lower: Vec<Coupling>,
    pub upper: Vec<Coupling>,
}

impl SpeciesData {
    /// Isotope from the bundled rubidium D2 table ("Rb85" or "Rb87").
    pub fn builtin(name: &str) -> Result<Self> {
        find(parse_species_file(BUILTIN)?, name)
    }

    pub fn rb87() -> Self {
        Self::builtin("Rb87").expect("bundled data is valid")
    }

    pub fn rb85() -> Self {
        Self::builtin("Rb85").expect("bundled data is valid")
    }

    /// Single excited level F′=1 at `offset`, coupled with unit weight
    /// from both lower F=1 and upper F=2. Balances exactly at Δω = offset.
    pub fn toy(omega_hfs: f64, gamma: f64, offset: f64) -> Result<Self> {
        let s = SpeciesData {
            name: "toy".into(),
            mass: 1.0,
            omega_hfs,
            gamma,
            lower_f: 1,
            upper_f: 2,
            excited: vec![ExcitedLevel { f: 1, offset }],
            lower: vec![Coupling { f: 1, alpha_sq: 1.0 }],
            upper: vec![Coupling { f: 1, alpha_sq: 1.0 }],
        };
        s.validate()?;
        Ok(s)
    }

    pub fn couplings(&self, ground: Ground) -> &[Coupling] {
        match ground {
            Ground::Lower => &self.lower,
            Ground::Upper => &self.upper,
        }
    }

    pub fn ground_f(&self, ground: Ground) -> u32 {
        match ground {
            Ground::Lower => self.lower_f,
            Ground::Upper => self.upper_f,
        }
    }

    pub fn offset_of(&self, f_prime: u32) -> Option<f64> {
        self.excited.iter().find(|l| l.f == f_prime).map(|l| l.offset)
    }

    /// Multiplies every α by `factor` (α² by factor²).
    pub fn with_coupling_scale(mut self, factor: f64) -> Self {
        for c in self.lower.iter_mut().chain(self.upper.iter_mut()) {
            c.alpha_sq *= factor * factor;
        }
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::SpeciesData(format!("{}: {msg}", self.name)));
        for (key, v) in [("mass", self.mass), ("omega_hfs", self.omega_hfs), ("gamma", self.gamma)] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{key} must be finite and positive, got {v}"));
            }
        }
        if self.excited.is_empty() {
            return bad("no excited levels".into());
        }
        for (i, l) in self.excited.iter().enumerate() {
            if !l.offset.is_finite() {
                return bad(format!("excited F'={} offset is not finite", l.f));
            }
            if self.excited[..i].iter().any(|o| o.f == l.f) {
                return bad(format!("excited F'={} listed twice", l.f));
            }
        }
        for ground in [Ground::Lower, Ground::Upper] {
            let fg = self.ground_f(ground);
            for (i, c) in self.couplings(ground).iter().enumerate() {
                let at = format!("{} F={fg} -> F'={}", ground.name(), c.f);
                if !(c.alpha_sq.is_finite() && c.alpha_sq >= 0.0) {
                    return bad(format!("{at}: alpha_sq must be finite and ≥ 0"));
                }
                if self.offset_of(c.f).is_none() {
                    return bad(format!("{at}: no such excited level"));
                }
                if self.couplings(ground)[..i].iter().any(|o| o.f == c.f) {
                    return bad(format!("{at}: listed twice"));
                }
                let allowed = c.f >= 1 && c.f.abs_diff(fg) <= 1;
                if c.alpha_sq > 0.0 && !allowed {
                    return bad(format!("{at}: forbidden by σ⁺ selection rules"));
                }
            }
        }
        if self.couplings(Ground::Lower).iter().all(|c| c.alpha_sq == 0.0)
            || self.couplings(Ground::Upper).iter().all(|c| c.alpha_sq == 0.0)
        {
            return bad("each ground state needs at least one non-zero coupling".into());
        }
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    format_version: u32,
    species: Vec<RawSpecies>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpecies {
    name: String,
    mass_u: f64,
    hfs_mhz: f64,
    gamma_mhz: f64,
    lower_f: u32,
    upper_f: u32,
    excited: Vec<RawLevel>,
    lower: Vec<RawCoupling>,
    upper: Vec<RawCoupling>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLevel {
    f: u32,
    offset_mhz: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoupling {
    f: u32,
    alpha_sq: Number,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Number {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Number {
    fn value(&self) -> Result<f64> {
        match self {
            Number::Float(x) => Ok(*x),
            Number::Int(i) => Ok(*i as f64),
            Number::Text(s) => {
                let parse = |t: &str| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::SpeciesData(format!("cannot read \"{s}\" as a number")))
                };
                match s.split_once('/') {
                    Some((p, q)) => Ok(parse(p)? / parse(q)?),
                    None => parse(s),
                }
            }
        }
    }
}

/// Parses a species file (grammar in the bundled `data/rb_d2.toml`).
pub fn parse_species_file(text: &str) -> Result<Vec<SpeciesData>> {
    let raw: RawFile = toml::from_str(text).map_err(|e| Error::SpeciesData(e.to_string()))?;
    if raw.format_version != 1 {
        return Err(Error::SpeciesData(format!(
            "unsupported format_version {}",
            raw.format_version
        )));
    }
    let mut out: Vec<SpeciesData> = Vec::with_capacity(raw.species.len());
    for r in raw.species {
        if out.iter().any(|s| s.name == r.name) {
            return Err(Error::SpeciesData(format!("species {} defined twice", r.name)));
        }
        let couplings = |list: &[RawCoupling]| -> Result<Vec<Coupling>> {
            list.iter()
                .map(|c| Ok(Coupling { f: c.f, alpha_sq: c.alpha_sq.value()? }))
                .collect()
        };
        let s = SpeciesData {
            mass: r.mass_u * AMU,
            omega_hfs: two_pi_hz(r.hfs_mhz * 1e6),
            gamma: two_pi_hz(r.gamma_mhz * 1e6),
            lower_f: r.lower_f,
            upper_f: r.upper_f,
            excited: r
                .excited
                .iter()
                .map(|l| ExcitedLevel { f: l.f, offset: two_pi_hz(l.offset_mhz * 1e6) })
                .collect(),
            lower: couplings(&r.lower)?,
            upper: couplings(&r.upper)?,
            name: r.name,
        };
        s.validate()?;
        out.push(s);
    }
    Ok(out)
}

pub fn load_species_file(path: &Path) -> Result<Vec<SpeciesData>> {
    let text = std::fs::read_to_string(path)?;
    parse_species_file(&text)
}

/// Named isotope from a species file.
pub fn load_species(path: &Path, name: &str) -> Result<SpeciesData> {
    find(load_species_file(path)?, name)
}

fn find(all: Vec<SpeciesData>, name: &str) -> Result<SpeciesData> {
    let names: Vec<String> = all.iter().map(|s| s.name.clone()).collect();
    all.into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::SpeciesData(format!("unknown species {name}; available: {}", names.join(", "))))
}
