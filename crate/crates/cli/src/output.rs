//! CSV serialization and plot-script emission.
//!
//! Every file is self-describing (header row), floats are written in Rust's
//! shortest round-trip decimal form, and the bytes are a pure function of the
//! run configuration and seed.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use qndsim_core::trajectory::{EnsembleSummary, TrajectoryRecord};

/// `trajectory.csv`: one row per recorded checkpoint. The physical-time
/// column is appended only when a scaled-time-to-seconds rate is known.
pub fn trajectory_csv(record: &TrajectoryRecord, tau_rate: Option<f64>) -> String {
    let mut out = String::new();
    out.push_str("tau,m,mean_z,mean_abs_z,var_z,var_abs_z,width_abs,is_jump_interval");
    if tau_rate.is_some() {
        out.push_str(",t_phys");
    }
    out.push('\n');
    let mut prev_tau = f64::NEG_INFINITY;
    for s in &record.samples {
        let jumped = record
            .jumps
            .iter()
            .any(|&tj| tj > prev_tau && tj <= s.tau);
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.tau,
            s.photocounts,
            s.mean_z,
            s.mean_abs_z,
            s.var_z,
            s.var_abs_z,
            s.var_abs_z.sqrt(),
            u8::from(jumped)
        );
        if let Some(rate) = tau_rate {
            let _ = write!(out, ",{}", s.tau / rate);
        }
        out.push('\n');
        prev_tau = s.tau;
    }
    out
}

/// `events.csv`: the jump record.
pub fn events_csv(record: &TrajectoryRecord) -> String {
    let mut out = String::from("jump_index,tau_jump\n");
    for (i, &tau) in record.jumps.iter().enumerate() {
        let _ = writeln!(out, "{},{}", i + 1, tau);
    }
    out
}

/// `ensemble.csv`: long-form ensemble-mean posterior with standard errors.
pub fn ensemble_csv(summary: &EnsembleSummary) -> String {
    let mut out = String::from("tau,z,mean_p,stderr_p\n");
    for (k, &tau) in summary.taus.iter().enumerate() {
        for (i, &z) in summary.z_grid.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{}", tau, z, summary.mean_p[k][i], summary.stderr_p[k][i]);
        }
    }
    out
}

/// `outcomes.csv`: folded final-outcome histogram with the chi-square result
/// in header comments.
pub fn outcomes_csv(
    summary: &EnsembleSummary,
    expected_p: &[f64],
    chi_square: f64,
    dof: usize,
    p_value: f64,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# chi_square = {chi_square}");
    let _ = writeln!(out, "# dof = {dof}");
    let _ = writeln!(out, "# p_value = {p_value}");
    out.push_str("z_abs,observed,expected_p,expected_count\n");
    let n = summary.trajectories as f64;
    for ((&z, &obs), &pe) in
        summary.outcome_grid.iter().zip(&summary.outcome_counts).zip(expected_p)
    {
        let _ = writeln!(out, "{},{},{},{}", z, obs, pe, pe * n);
    }
    out
}

/// One comparison row per checkpoint of the reduced-vs-full oracle run.
pub struct OracleRow {
    pub tau: f64,
    pub m_reduced: u64,
    pub m_full: u64,
    pub max_abs_dev: f64,
}

pub fn oracle_report_csv(rows: &[OracleRow], worst: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# max_deviation_overall = {worst}");
    out.push_str("checkpoint,tau,m_reduced,m_full,max_abs_deviation\n");
    for (k, r) in rows.iter().enumerate() {
        let _ = writeln!(out, "{},{},{},{},{}", k, r.tau, r.m_reduced, r.m_full, r.max_abs_dev);
    }
    out
}

/// `coherence.csv`: the proxy `Q(t)` over two revival periods.
pub fn coherence_csv(points: &[(f64, f64)], t_rev: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# t_rev = {t_rev}");
    out.push_str("t,q\n");
    for &(t, q) in points {
        let _ = writeln!(out, "{},{}", t, q);
    }
    out
}

/// `phases.csv`: per-component quadratic phase rates.
pub fn phases_csv(rows: &[(i64, f64, f64, f64)]) -> String {
    let mut out = String::from("n_k,p0,phase_rate,phase_at_t_rev\n");
    for &(n, p0, rate, at_rev) in rows {
        let _ = writeln!(out, "{},{},{},{}", n, p0, rate, at_rev);
    }
    out
}

/// `final_distribution.txt`: the last recorded conditional distribution in
/// the two-column format the custom-distribution loader reads, so a collapsed
/// state can seed another run.
pub fn final_distribution_text(record: &TrajectoryRecord) -> String {
    let snap = record.final_snapshot();
    let sample = record.samples.last().expect("records hold at least one sample");
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# conditional distribution at tau = {}, after {} photocounts",
        sample.tau, sample.photocounts
    );
    for (&z, &p) in snap.z_grid().iter().zip(snap.probabilities()) {
        let _ = writeln!(out, "{} {}", z, p);
    }
    out
}

/// Gnuplot script rendering the collapse width on linear and logarithmic
/// scales, overlaying the jump trajectory and the no-jump post-selected one.
pub fn width_plot_script() -> String {
    "\
# width of the atom number distribution vs scaled time
# render with: gnuplot plot.gp
set datafile separator ','
set terminal pngcairo size 900,800
set output 'width_vs_tau.png'
set multiplot layout 2,1
set xlabel 'tau'
set ylabel 'width (atoms)'
set key top right
plot 'trajectory.csv' skip 1 using 1:7 with lines lw 2 title 'with jumps', \\
     'trajectory_nojump.csv' skip 1 using 1:7 with lines lw 2 title 'no-jump post-selected'
set logscale y
set ylabel 'width (atoms, log scale)'
plot 'trajectory.csv' skip 1 using 1:7 with lines lw 2 title 'with jumps', \\
     'trajectory_nojump.csv' skip 1 using 1:7 with lines lw 2 title 'no-jump post-selected'
unset multiplot
"
    .to_string()
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)
}
