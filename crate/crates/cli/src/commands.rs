use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use lmtsqueeze::ep::{dual_fringes, lock_and_extract, mission_budget};
use lmtsqueeze::lightshift::balance;
use lmtsqueeze::output::{sig12, CsvTable};
use lmtsqueeze::protocol::{fringe_scan, sensitivity, uniform_grid};
use lmtsqueeze::raman::{efficiency_curve, overlap_maneuver, BlackmanPulse, OverlapPlan};
use lmtsqueeze::trajectory::{build_schedule, compute_phase, lmt_approximation_error, LmtApproximation};

use crate::error::{CliError, CliResult};
use crate::scenario::{Format, OutputSection, Scenario};

pub struct Output {
    dir: PathBuf,
    csv: bool,
    json: bool,
}

impl Output {
    pub fn new(section: &OutputSection) -> CliResult<Self> {
        if section.formats.is_empty() {
            return Err(CliError::Validation("output.formats: list is empty".into()));
        }
        fs::create_dir_all(&section.directory)
            .map_err(|e| CliError::Io(format!("{}: {e}", section.directory.display())))?;
        Ok(Output {
            dir: section.directory.clone(),
            csv: section.formats.contains(&Format::Csv),
            json: section.formats.contains(&Format::Json),
        })
    }

    fn create(&self, name: &str) -> CliResult<(PathBuf, BufWriter<File>)> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok((path, BufWriter::new(file)))
    }

    fn csv(&self, stem: &str, table: &CsvTable) -> CliResult<()> {
        if self.csv {
            let (path, mut w) = self.create(&format!("{stem}.csv"))?;
            table.write(&mut w).map_err(|e| CliError::from(e).at(&path.display().to_string()))?;
            w.flush()?;
        }
        Ok(())
    }

    fn json<T: Serialize>(&self, stem: &str, value: &T) -> CliResult<()> {
        if self.json {
            let (_, mut w) = self.create(&format!("{stem}.json"))?;
            serde_json::to_writer_pretty(&mut w, value)?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
        Ok(())
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

pub fn protocol(s: &Scenario, out: &Output) -> CliResult<()> {
    let spec = s.protocol_spec()?;
    let grid = s.scan_grid()?;
    let sigma = s.detection_noise()?;
    let scan = fringe_scan(&spec, &grid)?;
    let report = sensitivity(&spec, sigma)?;
    out.csv("protocol_fringe", &scan.to_csv_table())?;
    out.csv("protocol_sensitivity", &report.to_csv_table())?;
    out.json("protocol_fringe", &scan)?;
    out.json("protocol_sensitivity", &report)?;
    println!(
        "{} N={} mu={}: delta_psi = {}, sql_ratio = {} -> {}",
        report.family,
        report.n_atoms,
        report.mu,
        sig12(report.delta_psi),
        sig12(report.sql_ratio),
        out.dir().display()
    );
    Ok(())
}

#[derive(Serialize)]
struct PhaseReport {
    n: u32,
    t_s: f64,
    t0_s: f64,
    tau_s: f64,
    k_eff_rad_m: f64,
    accel_m_s2: f64,
    trajectory_phase_rad: f64,
    closed_form_phase_rad: f64,
    relative_difference: f64,
    lmt_approximation: LmtApproximation,
}

pub fn phase(s: &Scenario, out: &Output) -> CliResult<()> {
    let geom = s.geometry()?;
    let schedule = build_schedule(&geom).map_err(|e| CliError::from(e).at("geometry"))?;
    let psi = compute_phase(&schedule, &geom)?;
    let closed = geom.closed_form_phase();
    let rel = if closed == 0.0 { (psi - closed).abs() } else { ((psi - closed) / closed).abs() };
    let lmt = lmt_approximation_error(&geom)?;
    let report = PhaseReport {
        n: geom.n,
        t_s: geom.t,
        t0_s: geom.t0,
        tau_s: geom.tau,
        k_eff_rad_m: geom.k_eff,
        accel_m_s2: geom.accel,
        trajectory_phase_rad: psi,
        closed_form_phase_rad: closed,
        relative_difference: rel,
        lmt_approximation: lmt,
    };
    out.csv("phase_schedule", &schedule.to_csv_table())?;
    let mut t = CsvTable::new(&[
        "n",
        "t_s",
        "t0_s",
        "tau_s",
        "k_eff_rad_m",
        "accel_m_s2",
        "trajectory_phase_rad",
        "closed_form_phase_rad",
        "relative_difference",
        "lmt_relative_error",
        "lmt_flagged",
    ]);
    let mut row = vec![geom.n.to_string()];
    row.extend(
        [geom.t, geom.t0, geom.tau, geom.k_eff, geom.accel, psi, closed, rel, lmt.relative_error]
            .iter()
            .map(|&x| sig12(x)),
    );
    row.push(lmt.flagged.to_string());
    t.push_raw(row);
    out.csv("phase", &t)?;
    out.json("phase_schedule", &schedule)?;
    out.json("phase", &report)?;
    if lmt.flagged {
        eprintln!(
            "warning: (n-1)T·tau term is {:.3}% of T² + 2TT0; the T ≫ tau approximation is poor",
            100.0 * lmt.relative_error
        );
    }
    println!("phase = {} rad (closed form {})", sig12(psi), sig12(closed));
    Ok(())
}

fn overlap_table(plan: &OverlapPlan) -> CsvTable {
    let mut t = CsvTable::new(&[
        "internal_state",
        "kick_time_s",
        "stop_time_s",
        "desired",
        "undesired",
        "net_fidelity",
        "drift_time_s",
        "omega_eff_hz",
        "warning",
    ]);
    for p in &plan.pairs {
        t.push_raw(vec![
            p.internal_state.clone(),
            sig12(p.kick.time),
            sig12(p.stop.time),
            sig12(p.kick.desired),
            sig12(p.kick.undesired),
            sig12(p.net_fidelity),
            sig12(plan.drift_time),
            sig12(plan.omega_eff / (2.0 * std::f64::consts::PI)),
            plan.warning.clone().unwrap_or_default(),
        ]);
    }
    t
}

pub fn blackman(s: &Scenario, out: &Output) -> CliResult<()> {
    let grid = s.omega_grid()?;
    let ensemble = s.ensemble()?;
    let undesired = s.undesired_detuning()?;
    let separation = s.pulse.overlap_separation_m;
    if !(separation.is_finite() && separation >= 0.0) {
        return Err(CliError::Validation(format!(
            "pulse.overlap_separation_m: must be ≥ 0, got {separation}"
        )));
    }
    let overlap_omega = lmtsqueeze::constants::two_pi_hz(s.pulse.overlap_omega_eff_hz);
    BlackmanPulse::new(overlap_omega).map_err(|e| CliError::from(e).at("pulse.overlap_omega_eff_hz"))?;
    let curve = efficiency_curve(&grid, &ensemble, undesired)?;
    let plan = overlap_maneuver(separation, s.pulse_mass()?, s.pulse_k_eff()?, overlap_omega, &ensemble)?;
    out.csv("blackman_efficiency", &curve.to_csv_table())?;
    out.csv("blackman_overlap", &overlap_table(&plan))?;
    out.json("blackman_efficiency", &curve)?;
    out.json("blackman_overlap", &plan)?;
    if let Some(w) = &plan.warning {
        eprintln!("warning: {w}");
    }
    println!(
        "{} Ω_eff points, doppler σ/2π = {} Hz; overlap drift {} s, net fidelity {}",
        curve.points.len(),
        sig12(ensemble.doppler_sigma / (2.0 * std::f64::consts::PI)),
        sig12(plan.drift_time),
        sig12(plan.pairs[0].net_fidelity)
    );
    Ok(())
}

pub fn lightshift(s: &Scenario, out: &Output) -> CliResult<()> {
    let species = s.species()?;
    let mut table: Option<CsvTable> = None;
    for sp in &species {
        let r = balance(sp).map_err(|e| CliError::from(e).at(&sp.name))?;
        out.json(&format!("lightshift_{}", sp.name), &r)?;
        println!("{}: delta_omega = 2π × {:.4} MHz", r.species, r.delta_omega_mhz());
        match table.as_mut() {
            Some(t) => t.append(r.to_csv_table()),
            None => table = Some(r.to_csv_table()),
        }
    }
    if let Some(t) = table {
        out.csv("lightshift", &t)?;
    }
    Ok(())
}

pub fn ep(s: &Scenario, out: &Output) -> CliResult<()> {
    let (a, b) = s.isotope_runs()?;
    let c = a.expected_peak();
    let w = s.ep.phi_half_width_rad;
    let grid = uniform_grid(c - w, c + w, s.ep.phi_points);
    let fringes = dual_fringes(&a, &b, &grid)?;
    let result = lock_and_extract(&a, &b)?;
    out.csv("ep_fringes", &fringes.to_csv_table())?;
    let mut t = CsvTable::new(&["eta", "delta_a", "mean_a", "lock_phase", "peak_a", "peak_b", "delta_phi"]);
    t.push_floats(&[
        result.eta,
        result.delta_a,
        result.mean_a,
        result.lock_phase,
        result.peak_a,
        result.peak_b,
        result.delta_phi,
    ]);
    out.csv("ep_eotvos", &t)?;
    out.json("ep_fringes", &fringes)?;
    out.json("ep_eotvos", &result)?;
    println!("{} vs {}: eta = {}", a.name, b.name, sig12(result.eta));
    Ok(())
}

pub fn budget(s: &Scenario, out: &Output) -> CliResult<()> {
    let p = s.budget_params()?;
    let b = mission_budget(&p)?;
    out.csv("budget", &b.to_csv_table())?;
    out.json("budget", &b)?;
    if b.constraint_satisfied == Some(false) {
        eprintln!(
            "warning: arm excursion {} m exceeds chamber length {} m",
            sig12(b.excursion),
            sig12(p.chamber_length.unwrap_or_default())
        );
    }
    println!(
        "delta_a/shot = {} m/s², eta/shot = {}, accumulated eta = {}",
        sig12(b.delta_a_per_shot),
        sig12(b.eta_per_shot),
        sig12(b.eta_accumulated)
    );
    Ok(())
}
