//! Eigenbasis of `S_x` in the Dicke basis, built once per atom number.
//!
//! `S_x` is real symmetric tridiagonal with zero diagonal and known spectrum
//! `m = -J..J`, so each eigenvector comes from a twisted factorization of
//! `S_x - m` in O(N). The full basis costs O(N²) and is shared read-only.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64 as C64;

pub(crate) struct SxEigenbasis {
    dim: usize,
    /// Row-major `dim × dim`; column `k` is the eigenvector with eigenvalue `k - J`.
    vecs: Vec<f64>,
    vals: Vec<f64>,
}

/// Off-diagonal element ⟨m+1|S_x|m⟩ for the `i`-th rung, m = i - J.
pub(crate) fn sx_offdiag(n_atoms: usize) -> Vec<f64> {
    let j = n_atoms as f64 / 2.0;
    (0..n_atoms)
        .map(|i| {
            let m = i as f64 - j;
            0.5 * (j * (j + 1.0) - m * (m + 1.0)).sqrt()
        })
        .collect()
}

fn twisted_eigenvector(b: &[f64], lambda: f64, out: &mut [f64]) {
    let d = out.len();
    if d == 1 {
        out[0] = 1.0;
        return;
    }
    let bmax = b.iter().cloned().fold(0.0, f64::max);
    let tiny = f64::EPSILON * bmax.max(1.0);
    let guard = |x: f64| if x.abs() < tiny { tiny.copysign(x) } else { x };

    let mut dp = vec![0.0; d];
    let mut dm = vec![0.0; d];
    dp[0] = guard(-lambda);
    for i in 1..d {
        dp[i] = guard(-lambda - b[i - 1] * b[i - 1] / dp[i - 1]);
    }
    dm[d - 1] = guard(-lambda);
    for i in (0..d - 1).rev() {
        dm[i] = guard(-lambda - b[i] * b[i] / dm[i + 1]);
    }
    let mut r = 0;
    let mut best = f64::INFINITY;
    for i in 0..d {
        let gamma = (dp[i] + dm[i] + lambda).abs();
        if gamma < best {
            best = gamma;
            r = i;
        }
    }
    out[r] = 1.0;
    for i in (0..r).rev() {
        out[i] = -b[i] * out[i + 1] / dp[i];
    }
    for i in r..d - 1 {
        out[i + 1] = -b[i] * out[i] / dm[i + 1];
    }
    let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in out.iter_mut() {
        *x /= norm;
    }
}

impl SxEigenbasis {
    fn build(n_atoms: usize) -> Self {
        let dim = n_atoms + 1;
        let j = n_atoms as f64 / 2.0;
        let b = sx_offdiag(n_atoms);
        let vals: Vec<f64> = (0..dim).map(|k| k as f64 - j).collect();
        let mut vecs = vec![0.0; dim * dim];
        let mut col = vec![0.0; dim];
        for (k, &lambda) in vals.iter().enumerate() {
            col.iter_mut().for_each(|x| *x = 0.0);
            twisted_eigenvector(&b, lambda, &mut col);
            for i in 0..dim {
                vecs[i * dim + k] = col[i];
            }
        }
        SxEigenbasis { dim, vecs, vals }
    }

    /// Overwrites `amps` with exp(-i θ S_x) applied to it.
    pub(crate) fn apply(&self, amps: &mut [C64], theta: f64) {
        let d = self.dim;
        debug_assert_eq!(amps.len(), d);
        let mut coeff = vec![C64::new(0.0, 0.0); d];
        for (i, &a) in amps.iter().enumerate() {
            let row = &self.vecs[i * d..(i + 1) * d];
            for (c, &v) in coeff.iter_mut().zip(row) {
                *c += a * v;
            }
        }
        for (c, &lambda) in coeff.iter_mut().zip(&self.vals) {
            *c *= C64::from_polar(1.0, -theta * lambda);
        }
        for (i, a) in amps.iter_mut().enumerate() {
            let row = &self.vecs[i * d..(i + 1) * d];
            *a = row.iter().zip(&coeff).map(|(&v, &c)| c * v).sum();
        }
    }

    #[cfg(test)]
    pub(crate) fn orthogonality_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for k in 0..d {
            for l in k..d {
                let dot: f64 = (0..d).map(|i| self.vecs[i * d + k] * self.vecs[i * d + l]).sum();
                let target = if k == l { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

type Cache = RwLock<HashMap<usize, Arc<SxEigenbasis>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

pub(crate) fn sx_eigenbasis(n_atoms: usize) -> Arc<SxEigenbasis> {
    if let Some(e) = cache().read().expect("eigenbasis cache poisoned").get(&n_atoms) {
        return Arc::clone(e);
    }
    let built = Arc::new(SxEigenbasis::build(n_atoms));
    let mut w = cache().write().expect("eigenbasis cache poisoned");
    Arc::clone(w.entry(n_atoms).or_insert(built))
}
