use std::f64::consts::PI;

use lmtsqueeze::constants::{k_eff_counterpropagating, two_pi_hz, AMU, K_B, RB_D2_WAVELENGTH};
use lmtsqueeze::raman::{
    efficiency_curve, gauss_hermite, overlap_maneuver, recoil_detuning, transfer_efficiency, Averaging,
    BlackmanPulse, ThermalEnsemble, TransferChannel,
};
use nalgebra::Matrix2;
use num_complex::Complex64 as C64;

const RB87_MASS: f64 = 86.909_180_527 * AMU;
const RB85_MASS: f64 = 84.911_789_738 * AMU;

fn k_eff() -> f64 {
    k_eff_counterpropagating(RB_D2_WAVELENGTH)
}

/// Product of exact 2×2 exponentials over midpoint slices of the envelope.
fn sliced_transfer(pulse: &BlackmanPulse, detuning: f64, slices: usize) -> f64 {
    let t = pulse.duration();
    let dt = t / slices as f64;
    let mut u = Matrix2::<C64>::identity();
    for i in 0..slices {
        let rabi = pulse.rabi(-0.5 * t + (i as f64 + 0.5) * dt);
        // H = ½(−δσz + Ωσx); exp(−iHdt) in closed form
        let (hx, hz) = (0.5 * rabi, -0.5 * detuning);
        let w = (hx * hx + hz * hz).sqrt();
        let (c, s) = ((w * dt).cos(), (w * dt).sin());
        let (nx, nz) = if w > 0.0 { (hx / w, hz / w) } else { (0.0, 0.0) };
        let step = Matrix2::new(
            C64::new(c, -s * nz),
            C64::new(0.0, -s * nx),
            C64::new(0.0, -s * nx),
            C64::new(c, s * nz),
        );
        u = step * u;
    }
    u[(1, 0)].norm_sqr()
}

#[test]
fn integrator_agrees_with_sliced_propagator() {
    let p = BlackmanPulse::new(two_pi_hz(2e3)).unwrap();
    for det_hz in [0.0, 700.0, 2.5e3, 9e3] {
        let det = two_pi_hz(det_hz);
        let a = transfer_efficiency(&p, &TransferChannel { detuning: det, ..TransferChannel::desired() }).unwrap();
        let b = sliced_transfer(&p, det, 20_000);
        assert!((a - b).abs() < 1e-7, "δ={det_hz} Hz: {a} vs {b}");
    }
}

#[test]
fn evolution_is_unitary() {
    for f in [1e2, 1e3, 1e4, 1e5] {
        let p = BlackmanPulse::new(two_pi_hz(f)).unwrap();
        for det in [0.0, two_pi_hz(3e4), two_pi_hz(-1.2e3)] {
            let s = p.evolve(det).unwrap().state;
            let norm = s[0].norm_sqr() + s[1].norm_sqr();
            assert!((norm - 1.0).abs() < 1e-8, "f={f} δ={det}: {norm}");
        }
    }
}

#[test]
fn response_is_even_in_detuning() {
    let p = BlackmanPulse::new(two_pi_hz(4e3)).unwrap();
    for det_hz in [150.0, 4e3, 3e4] {
        let up = transfer_efficiency(&p, &TransferChannel::undesired(two_pi_hz(det_hz))).unwrap();
        let down = transfer_efficiency(&p, &TransferChannel::undesired(two_pi_hz(-det_hz))).unwrap();
        assert!((up - down).abs() < 1e-6);
    }
}

#[test]
fn pulse_area_is_pi() {
    for f in [1e3, 3e3, 1e4] {
        assert!((BlackmanPulse::new(two_pi_hz(f)).unwrap().area() - PI).abs() < 1e-6);
    }
}

#[test]
fn gauss_hermite_integrates_gaussian_moments() {
    let (x, w) = gauss_hermite(32);
    let norm = PI.sqrt();
    let m0: f64 = w.iter().sum::<f64>() / norm;
    let m2: f64 = x.iter().zip(&w).map(|(x, w)| x * x * w).sum::<f64>() / norm;
    let m4: f64 = x.iter().zip(&w).map(|(x, w)| x.powi(4) * w).sum::<f64>() / norm;
    assert!((m0 - 1.0).abs() < 1e-13);
    assert!((m2 - 0.5).abs() < 1e-13);
    assert!((m4 - 0.75).abs() < 1e-12);
}

#[test]
fn doppler_width_at_ten_picokelvin() {
    let e = ThermalEnsemble::new(1e-11, k_eff(), RB87_MASS).unwrap();
    let want = k_eff() * (K_B * 1e-11 / RB87_MASS).sqrt();
    assert_eq!(e.doppler_sigma, want);
    assert!((e.doppler_sigma / two_pi_hz(1.0) - 79.3).abs() < 0.1);
}

#[test]
fn recoil_detuning_is_thirty_kilohertz() {
    let d = recoil_detuning(k_eff(), RB87_MASS) / two_pi_hz(1e3);
    assert!((d - 30.17).abs() < 0.05, "{d}");
}

#[test]
fn zero_temperature_equals_single_atom() {
    let e = ThermalEnsemble::new(0.0, k_eff(), RB87_MASS).unwrap();
    let p = BlackmanPulse::new(two_pi_hz(2e3)).unwrap();
    let ch = TransferChannel::undesired(two_pi_hz(6e3));
    assert_eq!(e.average_efficiency(&p, &ch).unwrap(), transfer_efficiency(&p, &ch).unwrap());
}

#[test]
fn quadrature_agrees_with_monte_carlo() {
    let gh = ThermalEnsemble::new(1e-11, k_eff(), RB87_MASS).unwrap();
    let mc = gh.with_averaging(Averaging::MonteCarlo { samples: 4000, seed: 11 }).unwrap();
    let p = BlackmanPulse::new(two_pi_hz(100.0)).unwrap();
    let (a, b) = (
        gh.average_efficiency(&p, &TransferChannel::desired()).unwrap(),
        mc.average_efficiency(&p, &TransferChannel::desired()).unwrap(),
    );
    // MC standard error is ~0.005 here
    assert!((a - b).abs() < 0.02, "{a} vs {b}");
}

#[test]
fn selectivity_window() {
    let e = ThermalEnsemble::new(1e-11, k_eff(), RB87_MASS).unwrap();
    let undesired = two_pi_hz(30e3);
    let grid: Vec<f64> = [100.0, 1e3, 2e3, 5e3, 1e4, 1e5].iter().map(|&f| two_pi_hz(f)).collect();
    let c = efficiency_curve(&grid, &e, undesired).unwrap();
    let p = &c.points;
    // too slow: Doppler spread washes out the π pulse
    assert!(p[0].desired < 0.9);
    // too fast: the recoil-detuned channel is driven
    assert!(p[5].undesired > 0.1);
    for q in &p[1..5] {
        assert!(q.desired >= 0.99 && q.undesired <= 0.01, "{q:?}");
    }
    assert!(p[3].undesired < 0.01);
    // desired rises, undesired grows through the window
    for w in p[1..5].windows(2) {
        assert!(w[1].desired >= w[0].desired - 1e-3);
        assert!(w[1].undesired >= w[0].undesired - 1e-3);
    }
}

#[test]
fn overlap_plan_for_one_millimetre() {
    let e = ThermalEnsemble::new(1e-11, k_eff(), RB85_MASS).unwrap();
    let plan = overlap_maneuver(1e-3, RB85_MASS, k_eff(), two_pi_hz(5e3), &e).unwrap();
    assert!((plan.recoil_velocity * 1e3 - 12.05).abs() < 0.01);
    assert!((plan.drift_time - 0.0830).abs() < 2e-4, "{}", plan.drift_time);
    assert_eq!(plan.pairs.len(), 2);
    for pair in &plan.pairs {
        assert!(pair.net_fidelity >= 0.98);
        assert_eq!(pair.stop.time, plan.drift_time);
    }
    assert!(plan.warning.is_none());
    let slow = overlap_maneuver(1e-3, RB85_MASS, k_eff(), two_pi_hz(200.0), &e).unwrap();
    assert!(slow.warning.is_some());
}

#[test]
fn efficiency_csv_header() {
    let e = ThermalEnsemble::new(0.0, k_eff(), RB87_MASS).unwrap();
    let c = efficiency_curve(&[two_pi_hz(1e3)], &e, two_pi_hz(3e4)).unwrap();
    let text = c.to_csv_table().render();
    assert!(text.starts_with("omega_eff_hz,desired,undesired\n1.00000000000e3,"), "{text}");
}
