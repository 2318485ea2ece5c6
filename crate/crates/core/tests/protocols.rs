use std::f64::consts::{FRAC_PI_2, PI};

use lmtsqueeze::dicke::{collective_operator, operator_distance_mod_phase, operator_of, Axis};
use lmtsqueeze::protocol::{
    build_sequence, fringe_scan, gesp_plateau, max_slope_magnification, sensitivity, signal,
    uniform_grid, Family, Form, ProtocolSpec, PulseOp, PulseSequence,
};
use lmtsqueeze::trajectory::InterferometerGeometry;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

fn dense_exp(n: usize, axis: Axis, theta: f64) -> DMatrix<C64> {
    (collective_operator(n, axis) * C64::new(0.0, -theta)).exp()
}

/// Pulses strictly between the (un)squeezing steps, or between the outer
/// π/2 pulses when there is no twist.
fn interferometer_block(spec: &ProtocolSpec, injected: f64) -> PulseSequence {
    let seq = build_sequence(spec, injected).unwrap();
    let skip = if spec.family().is_squeezed() { 2 } else { 1 };
    let ops = seq.ops[skip..seq.ops.len() - skip].to_vec();
    PulseSequence::new(Form::Explicit, ops).unwrap()
}

#[test]
fn pulse_pair_is_z_rotation() {
    for n in 1..=8 {
        let (pa, pb) = (0.31 * n as f64, -0.77 + 0.2 * n as f64);
        // matrix product U(φ_A)·U(φ_B): B acts first
        let product = operator_of(n, |s| s.raman_pi(pb)?.raman_pi(pa)).unwrap();
        let claimed = dense_exp(n, Axis::Z, -2.0 * (pb - pa));
        assert!(operator_distance_mod_phase(&product, &claimed) < 1e-9, "N={n}");
    }
}

#[test]
fn interferometer_block_is_x_rotation() {
    let g = InterferometerGeometry::new(1, 0.2, 0.01, 0.0).with_accel(3.1e-6).with_launch(0.001, 0.02);
    for n in 1..=8 {
        let spec = ProtocolSpec::new(Family::Conventional, n, 0.0).unwrap().explicit(g).unwrap();
        let block = interferometer_block(&spec, 0.3);
        let op = operator_of(n, |s| block.apply(s)).unwrap();
        let psi = g.closed_form_phase() + 0.3;
        let d = operator_distance_mod_phase(&op, &dense_exp(n, Axis::X, psi));
        assert!(d < 1e-9, "N={n}: {d}");
    }
}

#[test]
fn odd_variant_block_is_y_rotation() {
    let g = InterferometerGeometry::new(2, 0.05, 0.004, 0.001).with_accel(-2.0e-5);
    for n in [3usize, 6] {
        let spec = ProtocolSpec::new(Family::GespO, n, 0.4).unwrap().explicit(g).unwrap();
        let block = interferometer_block(&spec, -0.2);
        let op = operator_of(n, |s| block.apply(s)).unwrap();
        let psi = g.closed_form_phase() - 0.2;
        assert!(operator_distance_mod_phase(&op, &dense_exp(n, Axis::Y, -psi)) < 1e-9, "N={n}");
    }
}

#[test]
fn explicit_matches_reduced_for_every_family() {
    let g = InterferometerGeometry::new(2, 0.02, 0.003, 0.001).with_accel(0.01);
    for fam in Family::ALL {
        for n in [5usize, 12] {
            let red = ProtocolSpec::new(fam, n, 0.6).unwrap();
            let ex = red.clone().explicit(g).unwrap();
            for inj in [0.0, 0.11, -0.4] {
                let a = signal(&ex, inj).unwrap();
                let b = signal(&red, g.closed_form_phase() + inj).unwrap();
                assert!((a - b).abs() < 1e-8, "{fam} N={n} inj={inj}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn common_laser_phase_cancels() {
    let g = InterferometerGeometry::new(3, 0.01, 0.002, 0.0005).with_accel(0.2);
    for fam in [Family::ScspE, Family::GespO, Family::Cesp] {
        let base = ProtocolSpec::new(fam, 9, 0.5).unwrap().explicit(g).unwrap();
        let shifted = base.clone().with_common_laser_phase(2.345).unwrap();
        let (a, b) = (signal(&base, 0.07).unwrap(), signal(&shifted, 0.07).unwrap());
        assert!((a - b).abs() < 1e-10, "{fam}");
    }
}

#[test]
fn auxiliary_phase_cancels() {
    let g = InterferometerGeometry::new(1, 0.01, 0.001, 0.0).with_accel(0.5);
    for fam in [Family::Conventional, Family::GespE, Family::GespO] {
        let base = ProtocolSpec::new(fam, 10, 0.5).unwrap().explicit(g).unwrap();
        let aux = base.clone().with_aux_phase(0.9).unwrap();
        let (a, b) = (signal(&base, 0.2).unwrap(), signal(&aux, 0.2).unwrap());
        assert!((a - b).abs() < 1e-10, "{fam}");
    }
}

#[test]
fn scsp_parity_matching() {
    let matched_e = max_slope_magnification(&ProtocolSpec::new(Family::ScspE, 8, 0.0).unwrap()).unwrap();
    let odd_e = max_slope_magnification(&ProtocolSpec::new(Family::ScspE, 9, 0.0).unwrap()).unwrap();
    let matched_o = max_slope_magnification(&ProtocolSpec::new(Family::ScspO, 9, 0.0).unwrap()).unwrap();
    let even_o = max_slope_magnification(&ProtocolSpec::new(Family::ScspO, 8, 0.0).unwrap()).unwrap();
    assert!((matched_e / 8.0 - 1.0).abs() < 0.01, "{matched_e}");
    assert!((matched_o / 9.0 - 1.0).abs() < 0.01, "{matched_o}");
    assert!(odd_e < 4.5, "{odd_e}");
    assert!(even_o < 4.0, "{even_o}");
}

#[test]
fn conventional_extremum_at_zero() {
    for n in [4usize, 11] {
        let spec = ProtocolSpec::new(Family::Conventional, n, 0.0).unwrap();
        let h = 1e-5;
        let slope = (signal(&spec, h).unwrap() - signal(&spec, -h).unwrap()) / (2.0 * h);
        assert!(slope.abs() < 1e-8);
        assert!((signal(&spec, 0.0).unwrap() + n as f64 / 2.0).abs() < 1e-12);
    }
}

#[test]
fn gesp_at_quarter_turn_is_scsp() {
    let g = ProtocolSpec::new(Family::GespE, 10, FRAC_PI_2).unwrap();
    let s = ProtocolSpec::new(Family::ScspE, 10, 0.0).unwrap();
    for psi in [-0.3, 0.05, 0.21] {
        assert!((signal(&g, psi).unwrap() - signal(&s, psi).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn heisenberg_bound_never_beaten() {
    for fam in Family::ALL {
        for n in [4usize, 9, 32] {
            for mu in [0.1, 0.5, 1.2] {
                let spec = ProtocolSpec::new(fam, n, mu).unwrap();
                let Ok(r) = sensitivity(&spec, None) else { continue };
                assert!(r.delta_psi >= 1.0 / n as f64 - 1e-12, "{fam} N={n} μ={mu}: {}", r.delta_psi);
            }
        }
    }
}

#[test]
fn scsp_fringe_narrower_by_n() {
    let n = 8;
    let grid = uniform_grid(-PI, PI, 4001);
    let conv = fringe_scan(&ProtocolSpec::new(Family::Conventional, n, 0.0).unwrap(), &grid).unwrap();
    let scsp = fringe_scan(&ProtocolSpec::new(Family::ScspE, n, 0.0).unwrap(), &grid).unwrap();
    let ratio = conv.central_fwhm(0.0).unwrap() / scsp.central_fwhm(0.0).unwrap();
    assert!((ratio / n as f64 - 1.0).abs() < 0.05, "{ratio}");
}

#[test]
fn plateau_collapses_below_window() {
    let n = 256;
    let table = gesp_plateau(n, &[0.01, 0.354]).unwrap();
    let target = std::f64::consts::SQRT_2 / n as f64;
    assert!(table.rows[0].delta_psi > 2.0 * target);
    assert!((table.rows[1].delta_psi / target - 1.0).abs() < 0.25);
    assert!(!table.rows[0].in_window);
    assert!(table.to_csv_table().render().starts_with("mu,delta_psi,sql_ratio\n"));
}

#[test]
fn sequence_inventory_for_explicit_lmt() {
    let g = InterferometerGeometry::new(3, 0.01, 0.003, 0.001);
    let spec = ProtocolSpec::new(Family::GespE, 4, 0.5).unwrap().explicit(g).unwrap();
    let seq = build_sequence(&spec, 0.0).unwrap();
    let raman = seq.ops.iter().filter(|o| matches!(o, PulseOp::RamanPi { .. })).count();
    assert_eq!(raman, 4 * 3);
    assert!(seq.ops.iter().all(|o| !matches!(o, PulseOp::InjectRotation { .. })));
}
