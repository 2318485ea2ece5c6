//! Pure states of N two-level atoms in the symmetric subspace |J = N/2, m⟩.
//!
//! Amplitudes are stored with m ascending: index `i` holds m = i − N/2.
//! States are compared through fidelity and operators modulo a global phase,
//! so the sign conventions of individual propagators never leak into results.

mod rotation;

use std::fmt;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::output::CsvTable;

/// Prebuilds the cached rotation basis for `n_atoms`, e.g. before a parallel sweep.
pub fn warm_rotation_cache(n_atoms: usize) {
    let _ = rotation::sx_eigenbasis(n_atoms);
}

/// Default upper bound on the atom number accepted by the protocol layer.
pub const DEFAULT_N_MAX: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Plus,
    Minus,
}

/// One-axis-twist strength; `inverse` selects exp(+iμS_z²).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezeParams {
    pub mu: f64,
    pub inverse: bool,
}

impl SqueezeParams {
    pub fn squeeze(mu: f64) -> Self {
        SqueezeParams { mu, inverse: false }
    }

    pub fn unsqueeze(mu: f64) -> Self {
        SqueezeParams { mu, inverse: true }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DickeState {
    n_atoms: usize,
    amps: Vec<C64>,
}

impl DickeState {
    /// The Dicke state |J, m⟩ with m = `two_m`/2.
    pub fn basis(n_atoms: usize, two_m: i64) -> Result<Self> {
        check_n(n_atoms)?;
        let n = n_atoms as i64;
        if two_m.abs() > n || (two_m + n) % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "2m = {two_m} is not a valid projection for N = {n_atoms}"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); n_atoms + 1];
        amps[((two_m + n) / 2) as usize] = C64::new(1.0, 0.0);
        Ok(DickeState { n_atoms, amps })
    }

    /// Coherent spin state with every atom polarized along ±`axis`.
    pub fn coherent(n_atoms: usize, axis: Axis, polarity: Polarity) -> Result<Self> {
        check_n(n_atoms)?;
        let n = n_atoms as i64;
        if axis == Axis::Z {
            let two_m = if polarity == Polarity::Plus { n } else { -n };
            return Self::basis(n_atoms, two_m);
        }
        // Single-atom state (|↑⟩ + c|↓⟩)/√2; the symmetric product has
        // amplitude √(C(N,k)/2^N) c^(N-k) on the level with k atoms up.
        let c = match (axis, polarity) {
            (Axis::X, Polarity::Plus) => C64::new(1.0, 0.0),
            (Axis::X, Polarity::Minus) => C64::new(-1.0, 0.0),
            (Axis::Y, Polarity::Plus) => C64::new(0.0, 1.0),
            (Axis::Y, Polarity::Minus) => C64::new(0.0, -1.0),
            (Axis::Z, _) => unreachable!(),
        };
        let nf = n_atoms as f64;
        let mut log_binom = 0.0;
        let mut amps = Vec::with_capacity(n_atoms + 1);
        for k in 0..=n_atoms {
            if k > 0 {
                log_binom += ((nf - k as f64 + 1.0) / k as f64).ln();
            }
            let mag = (0.5 * (log_binom - nf * std::f64::consts::LN_2)).exp();
            amps.push(c.powu((n_atoms - k) as u32) * mag);
        }
        let mut s = DickeState { n_atoms, amps };
        s.renormalize();
        Ok(s)
    }

    /// Builds a state from raw amplitudes (m ascending), normalizing them.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(Error::InvalidArgument("need at least 2 amplitudes (N ≥ 1)".into()));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidArgument("amplitudes must be finite".into()));
        }
        let n_atoms = amps.len() - 1;
        let mut s = DickeState { n_atoms, amps };
        if s.norm_sqr() == 0.0 {
            return Err(Error::InvalidArgument("zero vector is not a state".into()));
        }
        s.renormalize();
        Ok(s)
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn j(&self) -> f64 {
        self.n_atoms as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Amplitudes ordered by ascending m.
    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn m_of(&self, index: usize) -> f64 {
        index as f64 - self.j()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn renormalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        self.amps.iter_mut().for_each(|a| *a /= n);
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &DickeState) -> C64 {
        assert_eq!(self.n_atoms, other.n_atoms, "inner product across different N");
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// |⟨self|other⟩|², insensitive to global phase.
    pub fn fidelity(&self, other: &DickeState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// exp(−i·angle·S_axis)|self⟩.
    pub fn rotate(&self, axis: Axis, angle: f64) -> Result<Self> {
        ensure_finite("rotation angle", angle)?;
        let mut out = self.clone();
        if angle != 0.0 {
            out.rotate_in_place(axis, angle);
        }
        Ok(out)
    }

    pub(crate) fn rotate_in_place(&mut self, axis: Axis, angle: f64) {
        match axis {
            Axis::Z => self.phase_z(angle),
            Axis::X => rotation::sx_eigenbasis(self.n_atoms).apply(&mut self.amps, angle),
            Axis::Y => {
                // exp(−iθS_y) = R_z(π/2) exp(−iθS_x) R_z(−π/2)
                let half_pi = std::f64::consts::FRAC_PI_2;
                self.phase_z(-half_pi);
                rotation::sx_eigenbasis(self.n_atoms).apply(&mut self.amps, angle);
                self.phase_z(half_pi);
            }
        }
    }

    fn phase_z(&mut self, angle: f64) {
        let j = self.j();
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= C64::from_polar(1.0, -angle * (i as f64 - j));
        }
    }

    /// Applies exp(∓iμS_z²).
    pub fn squeeze(&self, params: SqueezeParams) -> Result<Self> {
        ensure_finite("squeezing parameter", params.mu)?;
        let mut out = self.clone();
        out.squeeze_in_place(params);
        Ok(out)
    }

    pub(crate) fn squeeze_in_place(&mut self, params: SqueezeParams) {
        if params.mu == 0.0 {
            return;
        }
        let sign = if params.inverse { 1.0 } else { -1.0 };
        let j = self.j();
        for (i, a) in self.amps.iter_mut().enumerate() {
            let m = i as f64 - j;
            *a *= C64::from_polar(1.0, sign * params.mu * m * m);
        }
    }

    /// Collective Raman π pulse exp(−i2φS_z)·exp(−iπS_y).
    pub fn raman_pi(&self, laser_phase: f64) -> Result<Self> {
        ensure_finite("laser phase", laser_phase)?;
        let mut out = self.clone();
        out.raman_pi_in_place(laser_phase);
        Ok(out)
    }

    pub(crate) fn raman_pi_in_place(&mut self, laser_phase: f64) {
        self.rotate_in_place(Axis::Y, std::f64::consts::PI);
        self.phase_z(2.0 * laser_phase);
    }

    /// S_axis|self⟩ as a raw vector.
    fn apply_generator(&self, axis: Axis) -> Vec<C64> {
        let j = self.j();
        let d = self.dim();
        match axis {
            Axis::Z => self
                .amps
                .iter()
                .enumerate()
                .map(|(i, &a)| a * (i as f64 - j))
                .collect(),
            Axis::X | Axis::Y => {
                let b = rotation::sx_offdiag(self.n_atoms);
                // S_+ ψ and S_- ψ with ladder coefficients 2b
                let mut plus = vec![C64::new(0.0, 0.0); d];
                let mut minus = vec![C64::new(0.0, 0.0); d];
                for i in 0..d - 1 {
                    plus[i + 1] = self.amps[i] * (2.0 * b[i]);
                    minus[i] = self.amps[i + 1] * (2.0 * b[i]);
                }
                if axis == Axis::X {
                    plus.iter().zip(&minus).map(|(p, m)| (p + m) * 0.5).collect()
                } else {
                    let half_i = C64::new(0.0, 0.5);
                    plus.iter().zip(&minus).map(|(p, m)| (m - p) * half_i).collect()
                }
            }
        }
    }

    /// ⟨S_axis⟩.
    pub fn expectation(&self, axis: Axis) -> f64 {
        if axis == Axis::Z {
            let j = self.j();
            return self
                .amps
                .iter()
                .enumerate()
                .map(|(i, a)| a.norm_sqr() * (i as f64 - j))
                .sum();
        }
        let s = self.apply_generator(axis);
        self.amps.iter().zip(&s).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// ⟨S_axis²⟩ − ⟨S_axis⟩², computed as ‖(S − ⟨S⟩)ψ‖² so it cannot go negative.
    pub fn variance(&self, axis: Axis) -> f64 {
        let mean = self.expectation(axis);
        if axis == Axis::Z {
            let j = self.j();
            return self
                .amps
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let dm = i as f64 - j - mean;
                    a.norm_sqr() * dm * dm
                })
                .sum::<f64>()
                .max(0.0);
        }
        let s = self.apply_generator(axis);
        s.iter()
            .zip(&self.amps)
            .map(|(sv, a)| (sv - a * mean).norm_sqr())
            .sum::<f64>()
            .max(0.0)
    }

    /// Debug dump: one row per level with columns m, re, im.
    pub fn to_csv_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["m", "re", "im"]);
        for (i, a) in self.amps.iter().enumerate() {
            t.push_floats(&[self.m_of(i), a.re, a.im]);
        }
        t
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        self.to_csv_table().write(w)
    }
}

fn check_n(n_atoms: usize) -> Result<()> {
    if n_atoms < 1 {
        return Err(Error::InvalidArgument("n_atoms must be at least 1".into()));
    }
    Ok(())
}

/// Dense matrix of S_axis in the Dicke basis (m ascending).
pub fn collective_operator(n_atoms: usize, axis: Axis) -> DMatrix<C64> {
    let d = n_atoms + 1;
    let j = n_atoms as f64 / 2.0;
    let b = rotation::sx_offdiag(n_atoms);
    let mut m = DMatrix::zeros(d, d);
    match axis {
        Axis::Z => {
            for i in 0..d {
                m[(i, i)] = C64::new(i as f64 - j, 0.0);
            }
        }
        Axis::X => {
            for i in 0..d - 1 {
                m[(i + 1, i)] = C64::new(b[i], 0.0);
                m[(i, i + 1)] = C64::new(b[i], 0.0);
            }
        }
        Axis::Y => {
            for i in 0..d - 1 {
                m[(i + 1, i)] = C64::new(0.0, -b[i]);
                m[(i, i + 1)] = C64::new(0.0, b[i]);
            }
        }
    }
    m
}

/// Matrix of a state map, built column by column from the basis states.
pub fn operator_of<F>(n_atoms: usize, map: F) -> Result<DMatrix<C64>>
where
    F: Fn(&DickeState) -> Result<DickeState>,
{
    let d = n_atoms + 1;
    let mut m = DMatrix::zeros(d, d);
    for k in 0..d {
        let two_m = 2 * k as i64 - n_atoms as i64;
        let col = map(&DickeState::basis(n_atoms, two_m)?)?;
        for (i, a) in col.amplitudes().iter().enumerate() {
            m[(i, k)] = *a;
        }
    }
    Ok(m)
}

/// Frobenius distance between two unitaries after fitting the best global phase.
pub fn operator_distance_mod_phase(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let overlap: C64 = a.iter().zip(b.iter()).map(|(x, y)| y.conj() * x).sum();
    // subtract explicitly; the expanded form na + nb − 2|⟨b,a⟩| bottoms out at √ε
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
    a.iter().zip(b.iter()).map(|(x, y)| (x - phase * y).norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    #[test]
    fn plus_z_is_top_level() {
        let s = DickeState::coherent(3, Axis::Z, Polarity::Plus).unwrap();
        assert_eq!(s.amplitudes()[3], C64::new(1.0, 0.0));
        assert!(s.amplitudes()[..3].iter().all(|a| *a == C64::new(0.0, 0.0)));
        assert_eq!(s.expectation(Axis::Z), 1.5);
    }

    #[test]
    fn plus_x_binomial_amplitudes() {
        let s = DickeState::coherent(2, Axis::X, Polarity::Plus).unwrap();
        let want = [0.5, FRAC_1_SQRT_2, 0.5];
        for (a, w) in s.amplitudes().iter().zip(want) {
            assert!((a.re - w).abs() < 1e-15 && a.im.abs() < 1e-15);
        }
        assert!((s.expectation(Axis::X) - 1.0).abs() < 1e-12);
        assert!(s.variance(Axis::X) < 1e-12);
    }

    #[test]
    fn zero_atoms_rejected() {
        assert!(matches!(
            DickeState::coherent(0, Axis::Z, Polarity::Plus),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn non_finite_angle_rejected() {
        let s = DickeState::coherent(4, Axis::Z, Polarity::Plus).unwrap();
        assert!(s.rotate(Axis::X, f64::NAN).is_err());
        assert!(s.rotate(Axis::Y, f64::INFINITY).is_err());
    }

    #[test]
    fn zero_rotation_is_exact_identity() {
        let s = DickeState::coherent(5, Axis::Y, Polarity::Minus).unwrap();
        for ax in [Axis::X, Axis::Y, Axis::Z] {
            assert_eq!(s.rotate(ax, 0.0).unwrap(), s);
        }
    }

    #[test]
    fn pi_about_y_flips_polarization() {
        for n in [1, 2, 7, 64] {
            let up = DickeState::coherent(n, Axis::Z, Polarity::Plus).unwrap();
            let down = DickeState::coherent(n, Axis::Z, Polarity::Minus).unwrap();
            assert!(up.rotate(Axis::Y, PI).unwrap().fidelity(&down) > 1.0 - 1e-10);
        }
    }

    #[test]
    fn quarter_turn_about_y_makes_plus_x() {
        let up = DickeState::coherent(6, Axis::Z, Polarity::Plus).unwrap();
        let px = DickeState::coherent(6, Axis::X, Polarity::Plus).unwrap();
        assert!(up.rotate(Axis::Y, FRAC_PI_2).unwrap().fidelity(&px) > 1.0 - 1e-12);
        let py = DickeState::coherent(6, Axis::Y, Polarity::Plus).unwrap();
        assert!(up.rotate(Axis::X, -FRAC_PI_2).unwrap().fidelity(&py) > 1.0 - 1e-12);
    }

    #[test]
    fn coherent_x_statistics() {
        let s = DickeState::coherent(40, Axis::X, Polarity::Plus).unwrap();
        assert!(s.expectation(Axis::Z).abs() < 1e-12);
        assert!((s.variance(Axis::Z) - 10.0).abs() < 1e-9);
        let up = DickeState::coherent(40, Axis::Z, Polarity::Plus).unwrap();
        assert!(up.expectation(Axis::X).abs() < 1e-15);
    }

    #[test]
    fn cat_from_full_twist() {
        for n in [2, 4, 10] {
            let px = DickeState::coherent(n, Axis::X, Polarity::Plus).unwrap();
            let mx = DickeState::coherent(n, Axis::X, Polarity::Minus).unwrap();
            let cat = px.squeeze(SqueezeParams::squeeze(FRAC_PI_2)).unwrap();
            assert!((cat.fidelity(&px) - 0.5).abs() < 1e-8);
            assert!((cat.fidelity(&mx) - 0.5).abs() < 1e-8);
        }
    }

    #[test]
    fn raman_at_zero_phase_is_pi_about_y() {
        let s = DickeState::coherent(5, Axis::X, Polarity::Plus)
            .unwrap()
            .squeeze(SqueezeParams::squeeze(0.3))
            .unwrap();
        let a = s.raman_pi(0.0).unwrap();
        let b = s.rotate(Axis::Y, PI).unwrap();
        assert!(a.fidelity(&b) > 1.0 - 1e-12);
    }

    #[test]
    fn csv_dump_rows() {
        let s = DickeState::coherent(2, Axis::Z, Polarity::Minus).unwrap();
        let t = s.to_csv_table();
        assert_eq!(t.len(), 3);
        assert!(t.render().starts_with("m,re,im\n-1.00000000000e0,1.00000000000e0,"));
    }
}
