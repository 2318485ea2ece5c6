use lmtsqueeze::constants::{k_eff_counterpropagating, AMU, HBAR, RB_D2_WAVELENGTH};
use lmtsqueeze::ep::{dual_fringes, lock_and_extract, locate_peak, mission_budget, BudgetParams, IsotopeRun};
use lmtsqueeze::protocol::{uniform_grid, Family, ProtocolSpec};
use lmtsqueeze::trajectory::InterferometerGeometry;

const G: f64 = 9.8;

fn run(name: &str, n_atoms: usize, mu: f64, accel: f64) -> IsotopeRun {
    let g = InterferometerGeometry::new(1, 0.01, 0.0, 0.0).with_accel(accel);
    IsotopeRun::new(name, ProtocolSpec::new(Family::GespE, n_atoms, mu).unwrap(), g).unwrap()
}

#[test]
fn equal_accelerations_give_zero_eta() {
    let r = lock_and_extract(&run("Rb85", 32, 0.5, G), &run("Rb87", 8, 0.3, G)).unwrap();
    assert!(r.eta.abs() < 1e-12, "{}", r.eta);
    assert!(r.delta_phi.abs() < 1e-12 * r.peak_a.abs());
}

#[test]
fn injected_violation_is_recovered() {
    for eta in [1e-6, -3e-6] {
        let b_accel = G * (1.0 + eta / 2.0) / (1.0 - eta / 2.0);
        let r = lock_and_extract(&run("A", 32, 0.5, G), &run("B", 8, 0.3, b_accel)).unwrap();
        assert!((r.eta / eta - 1.0).abs() < 0.01, "{eta}: {}", r.eta);
    }
}

#[test]
fn heavier_b_fall_gives_positive_eta() {
    let r = lock_and_extract(&run("A", 16, 0.5, G), &run("B", 16, 0.5, G * (1.0 + 1e-5))).unwrap();
    assert!(r.eta > 0.0 && r.delta_a > 0.0);
    let r = lock_and_extract(&run("A", 16, 0.5, G * (1.0 + 1e-5)), &run("B", 16, 0.5, G)).unwrap();
    assert!(r.eta < 0.0);
}

#[test]
fn eta_unchanged_by_common_scaling() {
    let eta = 2e-6;
    let base = lock_and_extract(&run("A", 16, 0.5, G), &run("B", 16, 0.5, G * (1.0 + eta))).unwrap();
    let s = 0.37;
    let scaled = lock_and_extract(&run("A", 16, 0.5, s * G), &run("B", 16, 0.5, s * G * (1.0 + eta))).unwrap();
    assert!((scaled.eta / base.eta - 1.0).abs() < 1e-3);
}

#[test]
fn explicit_and_reduced_runs_lock_alike() {
    let g = InterferometerGeometry::new(1, 0.01, 0.0, 0.0).with_accel(G);
    let spec = ProtocolSpec::new(Family::GespE, 8, 0.5).unwrap();
    let reduced = IsotopeRun::new("r", spec.clone(), g).unwrap();
    let explicit = IsotopeRun::new("e", spec.explicit(g).unwrap(), g).unwrap();
    let (pr, pe) = (locate_peak(&reduced).unwrap(), locate_peak(&explicit).unwrap());
    assert!((pr - pe).abs() < 1e-8, "{pr} vs {pe}");
}

#[test]
fn identical_runs_give_identical_fringes() {
    let a = run("A", 12, 0.4, G);
    let grid = uniform_grid(a.expected_peak() - 1.0, a.expected_peak() + 1.0, 101);
    let f = dual_fringes(&a, &a.clone(), &grid).unwrap();
    assert_eq!(f.a.signals, f.b.signals);
    assert_eq!(f.a.noises, f.b.noises);
}

#[test]
fn larger_squeezed_ensemble_has_narrower_fringe() {
    let (a, b) = (run("A", 32, 0.5, G), run("B", 8, 0.3, G));
    let c = a.expected_peak();
    let grid = uniform_grid(c - 3.0, c + 3.0, 6001);
    let f = dual_fringes(&a, &b, &grid).unwrap();
    let (wa, wb) = (f.a.central_fwhm(c).unwrap(), f.b.central_fwhm(c).unwrap());
    assert!(wa < wb, "{wa} vs {wb}");
}

#[test]
fn budget_reference_values() {
    let b = mission_budget(&BudgetParams::new(5, 1.0, 1e5)).unwrap();
    assert!((b.delta_a_per_shot / 8.7e-14 - 1.0).abs() < 0.05);
    assert!((b.eta_per_shot / 8.8e-15 - 1.0).abs() < 0.05);
    let b = mission_budget(&BudgetParams::new(5, 1.0, 1e6)).unwrap();
    assert!((b.eta_per_shot / 8.8e-16 - 1.0).abs() < 0.05);
}

#[test]
fn budget_scaling_laws() {
    let base = mission_budget(&BudgetParams::new(2, 0.5, 1e4)).unwrap().delta_a_per_shot;
    let cases = [(4, 0.5, 1e4, 2.0), (2, 1.0, 1e4, 4.0), (2, 0.5, 3e4, 3.0)];
    for (n, t, atoms, gain) in cases {
        let d = mission_budget(&BudgetParams::new(n, t, atoms)).unwrap().delta_a_per_shot;
        assert!((base / d / gain - 1.0).abs() < 1e-12);
    }
    let mut p = BudgetParams::new(2, 0.5, 1e4);
    p.shots = 400.0;
    let b = mission_budget(&p).unwrap();
    assert!((b.eta_per_shot / b.eta_accumulated - 20.0).abs() < 1e-9);
    // closed form against hand arithmetic
    let k = k_eff_counterpropagating(RB_D2_WAVELENGTH);
    let want = 2f64.sqrt() / (1e4 * 4.0 * k * 0.25);
    assert!((base / want - 1.0).abs() < 1e-14);
}

#[test]
fn saturated_chamber_phase_independent_of_order() {
    let t = 2.0;
    let mass = 84.911_789_738 * AMU;
    for n in [1u32, 5, 40] {
        let mut p = BudgetParams::new(n, t, 1e5);
        let excursion = mission_budget(&p).unwrap().excursion;
        assert!((excursion - 2.0 * n as f64 * HBAR * p.k_eff * t / mass).abs() < 1e-15);
        p.chamber_length = Some(excursion);
        let b = mission_budget(&p).unwrap();
        let phase = 2.0 * n as f64 * p.k_eff * p.accel * t * t;
        assert!((b.phi_max.unwrap() / phase - 1.0).abs() < 1e-12);
        assert_eq!(b.constraint_satisfied, Some(true));
    }
}
