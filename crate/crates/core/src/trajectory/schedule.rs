use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::InterferometerGeometry;
use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::output::{sig12, CsvTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventLabel {
    A(u32),
    BMinus(u32),
    Microwave,
    B(u32),
    CMinus(u32),
}

impl EventLabel {
    pub fn is_raman(&self) -> bool {
        !matches!(self, EventLabel::Microwave)
    }
}

impl fmt::Display for EventLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventLabel::A(j) => write!(f, "A{j}"),
            EventLabel::BMinus(j) => write!(f, "B-{j}"),
            EventLabel::Microwave => write!(f, "MW"),
            EventLabel::B(j) => write!(f, "B{j}"),
            EventLabel::CMinus(j) => write!(f, "C-{j}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseEvent {
    pub time: f64,
    pub label: EventLabel,
    /// Momentum kick in units of ħk_eff received by each arm.
    pub kick_upper: i8,
    pub kick_lower: i8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub events: Vec<PulseEvent>,
}

impl PulseSchedule {
    /// Net momentum of each arm after all events, in units of ħk_eff.
    pub fn final_kicks(&self) -> (i64, i64) {
        self.events.iter().fold((0, 0), |(u, l), e| {
            (u + e.kick_upper as i64, l + e.kick_lower as i64)
        })
    }

    pub fn raman_events(&self) -> impl Iterator<Item = &PulseEvent> {
        self.events.iter().filter(|e| e.label.is_raman())
    }

    pub fn to_csv_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["time_s", "label", "kick_upper", "kick_lower"]);
        for e in &self.events {
            t.push_raw(vec![
                sig12(e.time),
                e.label.to_string(),
                e.kick_upper.to_string(),
                e.kick_lower.to_string(),
            ]);
        }
        t
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        self.to_csv_table().write(w)
    }
}

/// Lays out the A/B/MW/B/C events for the geometry; see the module docs.
///
/// Coincident times are allowed (T₀ = 0 puts B₋₁, MW and B₁ together); the
/// event order is then the logical pulse order.
pub fn build_schedule(geom: &InterferometerGeometry) -> Result<PulseSchedule> {
    geom.validate()?;
    let n = geom.n;
    let (t, t0, tau) = (geom.t, geom.t0, geom.tau);
    let lmt_span = (n - 1) as f64 * tau;
    if t0 < lmt_span {
        return Err(Error::InvalidArgument(format!(
            "T0 = {t0} is shorter than the LMT pulse train (n-1)·tau = {lmt_span}; \
             the B blocks would straddle the microwave pulse"
        )));
    }
    let ev = |time, label, kick: i8| PulseEvent {
        time,
        label,
        kick_upper: kick,
        kick_lower: -kick,
    };
    let mut events = Vec::with_capacity(4 * n as usize + 1);
    for j in 1..=n {
        events.push(ev((j - 1) as f64 * tau, EventLabel::A(j), 1));
    }
    for j in (1..=n).rev() {
        events.push(ev(t + (n - j) as f64 * tau, EventLabel::BMinus(j), -1));
    }
    events.push(ev(t + t0, EventLabel::Microwave, 0));
    for j in 1..=n {
        events.push(ev(t + 2.0 * t0 - (n - j) as f64 * tau, EventLabel::B(j), -1));
    }
    for j in (1..=n).rev() {
        events.push(ev(2.0 * t + 2.0 * t0 - (j - 1) as f64 * tau, EventLabel::CMinus(j), 1));
    }
    debug_assert!(events.windows(2).all(|w| w[0].time <= w[1].time));
    Ok(PulseSchedule { events })
}

/// Laser phase difference accumulated between the arms, ψ = φ_upper − φ_lower.
///
/// Each Raman event imprints kick·k_eff·r on every arm it kicks; arms follow
/// r₀ + v₀t + ½at² with velocity jumps of ħk_eff/m per unit kick.
pub fn compute_phase(schedule: &PulseSchedule, geom: &InterferometerGeometry) -> Result<f64> {
    geom.validate()?;
    let (up, low) = schedule.final_kicks();
    if up != low {
        return Err(Error::Geometry(format!(
            "interferometer does not close: final arm momenta {up} and {low} ħk_eff"
        )));
    }
    let recoil = HBAR * geom.k_eff / geom.mass;
    let a = geom.accel;
    let k = geom.k_eff;
    // (position, velocity) per arm
    let mut arms = [(geom.r0, geom.v0), (geom.r0, geom.v0)];
    let mut now = 0.0;
    let mut psi = 0.0;
    for e in &schedule.events {
        if e.time < now {
            return Err(Error::Geometry(format!(
                "event {} at {} precedes the previous event at {now}",
                e.label, e.time
            )));
        }
        let dt = e.time - now;
        for (r, v) in arms.iter_mut() {
            *r += *v * dt + 0.5 * a * dt * dt;
            *v += a * dt;
        }
        now = e.time;
        if e.label.is_raman() {
            psi += k * (e.kick_upper as f64 * arms[0].0 - e.kick_lower as f64 * arms[1].0);
        }
        arms[0].1 += e.kick_upper as f64 * recoil;
        arms[1].1 += e.kick_lower as f64 * recoil;
    }
    Ok(psi)
}

/// Relative size of the (n−1)Tτ term dropped by the T ≫ τ approximation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LmtApproximation {
    pub relative_error: f64,
    /// Set when the error reaches [`LMT_FLAG_THRESHOLD`].
    pub flagged: bool,
}

pub const LMT_FLAG_THRESHOLD: f64 = 0.01;

/// |(n−1)Tτ| / (T² + 2TT₀).
///
/// Only the quantities entering the ratio are checked, so geometries that
/// break the pulse-overlap invariant can still be assessed.
pub fn lmt_approximation_error(geom: &InterferometerGeometry) -> Result<LmtApproximation> {
    let (t, t0, tau) = (geom.t, geom.t0, geom.tau);
    if !(t > 0.0 && t.is_finite() && t0 >= 0.0 && t0.is_finite() && tau >= 0.0 && tau.is_finite())
        || geom.n < 1
    {
        return Err(Error::InvalidArgument(format!(
            "need n ≥ 1, T > 0, T0 ≥ 0, tau ≥ 0 (got n={}, T={t}, T0={t0}, tau={tau})",
            geom.n
        )));
    }
    let rel = ((geom.n - 1) as f64 * t * tau).abs() / (t * t + 2.0 * t * t0);
    Ok(LmtApproximation {
        relative_error: rel,
        flagged: rel >= LMT_FLAG_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(n: u32, t: f64, t0: f64, tau: f64) -> InterferometerGeometry {
        InterferometerGeometry::new(n, t, t0, tau)
    }

    #[test]
    fn single_order_timing() {
        let s = build_schedule(&geom(1, 1.0, 0.1, 0.0)).unwrap();
        let times: Vec<f64> = s.events.iter().map(|e| e.time).collect();
        let want = [0.0, 1.0, 1.1, 1.2, 2.2];
        assert_eq!(times.len(), 5);
        for (a, b) in times.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let labels: Vec<String> = s.events.iter().map(|e| e.label.to_string()).collect();
        assert_eq!(labels, ["A1", "B-1", "MW", "B1", "C-1"]);
    }

    #[test]
    fn zero_gap_is_symmetric_pi_spacing() {
        let s = build_schedule(&geom(1, 0.5, 0.0, 0.0)).unwrap();
        let raman: Vec<f64> = s.raman_events().map(|e| e.time).collect();
        assert_eq!(raman, [0.0, 0.5, 0.5, 1.0]);
    }

    #[test]
    fn closes_in_momentum() {
        for n in 1..=3 {
            let s = build_schedule(&geom(n, 1.0, 0.05, 0.01)).unwrap();
            assert_eq!(s.final_kicks(), (0, 0));
            assert_eq!(s.events.len(), 4 * n as usize + 1);
        }
    }

    #[test]
    fn open_schedule_rejected() {
        let g = geom(1, 1.0, 0.1, 0.0).with_accel(1.0);
        let mut s = build_schedule(&g).unwrap();
        s.events.pop();
        assert!(matches!(compute_phase(&s, &g), Err(Error::Geometry(_))));
    }

    #[test]
    fn short_gap_rejected() {
        assert!(build_schedule(&geom(3, 1.0, 0.001, 0.01)).is_err());
    }

    #[test]
    fn approximation_error_examples() {
        assert_eq!(lmt_approximation_error(&geom(1, 1.0, 0.3, 0.2)).unwrap().relative_error, 0.0);
        let e = lmt_approximation_error(&geom(5, 1.0, 0.0, 1e-3)).unwrap();
        assert!((e.relative_error - 4e-3).abs() < 1e-15 && !e.flagged);
        let e = lmt_approximation_error(&geom(3, 0.01, 0.0, 5e-3)).unwrap();
        assert!((e.relative_error - 1.0).abs() < 1e-12 && e.flagged);
    }

    #[test]
    fn csv_export() {
        let s = build_schedule(&geom(2, 1.0, 0.1, 0.01)).unwrap();
        let csv = s.to_csv_table().render();
        assert!(csv.starts_with("time_s,label,kick_upper,kick_lower\n"));
        assert!(csv.contains(",A2,1,-1\n"));
        assert_eq!(csv.lines().count(), 1 + 9);
    }
}
