use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{signal_and_noise, ProtocolSpec};
use crate::error::{Error, Result};
use crate::output::CsvTable;

/// Signal and quantum noise sampled over injected phases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FringeScan {
    pub phases: Vec<f64>,
    pub signals: Vec<f64>,
    pub noises: Vec<f64>,
    /// Full-contrast amplitude N/2 of the scanned protocol.
    pub amplitude: f64,
}

/// `points` evenly spaced values from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => {
            let step = (hi - lo) / (points - 1) as f64;
            (0..points).map(|i| lo + step * i as f64).collect()
        }
    }
}

pub fn fringe_scan(spec: &ProtocolSpec, phase_grid: &[f64]) -> Result<FringeScan> {
    if phase_grid.is_empty() {
        return Err(Error::InvalidArgument("phase grid is empty".into()));
    }
    if phase_grid.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidArgument("phase grid contains non-finite values".into()));
    }
    if phase_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("phase grid must be ascending".into()));
    }
    let points: Vec<(f64, f64)> = phase_grid
        .par_iter()
        .map(|&p| signal_and_noise(spec, p))
        .collect::<Result<_>>()?;
    Ok(FringeScan {
        phases: phase_grid.to_vec(),
        signals: points.iter().map(|p| p.0).collect(),
        noises: points.iter().map(|p| p.1).collect(),
        amplitude: spec.amplitude(),
    })
}

impl FringeScan {
    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Width of the dip nearest `center`, measured where the signal climbs
    /// halfway from the dip bottom to the full-contrast level +N/2.
    pub fn central_fwhm(&self, center: f64) -> Result<f64> {
        let n = self.len();
        if n < 3 {
            return Err(Error::InvalidArgument("need at least 3 scan points".into()));
        }
        let mut i = (0..n)
            .min_by(|&a, &b| {
                (self.phases[a] - center).abs().total_cmp(&(self.phases[b] - center).abs())
            })
            .unwrap();
        // slide downhill to the bottom of the dip
        loop {
            if i > 0 && self.signals[i - 1] < self.signals[i] {
                i -= 1;
            } else if i + 1 < n && self.signals[i + 1] < self.signals[i] {
                i += 1;
            } else {
                break;
            }
        }
        let level = 0.5 * (self.signals[i] + self.amplitude);
        let crossing = |range: &mut dyn Iterator<Item = (usize, usize)>| -> Option<f64> {
            for (a, b) in range {
                let (sa, sb) = (self.signals[a], self.signals[b]);
                if sb >= level && sa < level {
                    let f = (level - sa) / (sb - sa);
                    return Some(self.phases[a] + f * (self.phases[b] - self.phases[a]));
                }
            }
            None
        };
        let right = crossing(&mut (i..n - 1).map(|k| (k, k + 1)));
        let left = crossing(&mut (1..=i).rev().map(|k| (k, k - 1)));
        match (left, right) {
            (Some(l), Some(r)) => Ok(r - l),
            _ => Err(Error::InvalidArgument(
                "scan does not cover both half-contrast crossings of the central dip".into(),
            )),
        }
    }

    pub fn to_csv_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["psi", "signal", "noise"]);
        for k in 0..self.len() {
            t.push_floats(&[self.phases[k], self.signals[k], self.noises[k]]);
        }
        t
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        self.to_csv_table().write(w)
    }
}
