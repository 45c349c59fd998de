//! Plain-Rust implementations behind the wasm exports, kept separate so they
//! run under native `cargo test`.

use qndsim_core::lattice::{InitialDistribution, LatticeConfig};
use qndsim_core::stats::{closed_form_snapshot, fwhm_estimate, moments, peak_estimate};
use qndsim_core::trajectory::{no_count_trajectory, run_trajectory};
use serde_json::json;

fn initial(geometry: &str, atoms: u32) -> Result<InitialDistribution, String> {
    match geometry {
        "maximum" => {
            // a partially illuminated lattice: K = M/2 keeps the binomial broad
            let sites = (atoms as usize).max(2);
            let cfg = LatticeConfig::new(sites, (sites / 2).max(1), atoms)
                .map_err(|e| e.to_string())?;
            Ok(InitialDistribution::superfluid_maximum(&cfg))
        }
        "minimum" => {
            let cfg = LatticeConfig::new(atoms as usize, atoms as usize, atoms)
                .map_err(|e| e.to_string())?;
            InitialDistribution::superfluid_minimum(&cfg).map_err(|e| e.to_string())
        }
        other => Err(format!("geometry must be maximum or minimum, got {other:?}")),
    }
}

pub fn trajectory_curves(
    geometry: &str,
    atoms: u32,
    seed: u64,
    tau_max: f64,
    samples: u32,
) -> Result<String, String> {
    if tau_max.is_nan() || tau_max <= 0.0 || samples < 2 {
        return Err("tau_max must be positive and samples at least 2".into());
    }
    let init = initial(geometry, atoms)?;
    let interval = tau_max / samples as f64;
    let record = run_trajectory(&init, tau_max, interval, seed).map_err(|e| e.to_string())?;
    let nojump = no_count_trajectory(&init, tau_max, interval).map_err(|e| e.to_string())?;

    let taus: Vec<f64> = record.taus();
    // folded width for the jump run (the ±z0 cat calls for the per-peak
    // measure); plain width for the z = 0 centered no-jump branch
    let width_jump: Vec<f64> = record.samples.iter().map(|s| s.var_abs_z.sqrt()).collect();
    let width_nojump: Vec<f64> = nojump.samples.iter().map(|s| s.var_z.sqrt()).collect();
    let folded = record.final_snapshot().fold();
    Ok(json!({
        "taus": taus,
        "width_jump": width_jump,
        "width_nojump": width_nojump,
        "jumps": record.jumps,
        "photocounts": record.jumps.len(),
        "collapsed_z": folded.peak(),
    })
    .to_string())
}

pub fn conditional_distribution(
    geometry: &str,
    atoms: u32,
    photocounts: u32,
    tau: f64,
) -> Result<String, String> {
    if tau < 0.0 {
        return Err("tau must be non-negative".into());
    }
    let init = initial(geometry, atoms)?;
    let snap = closed_form_snapshot(&init, photocounts as u64, tau);
    let m = moments(&snap);
    let peak = if tau > 0.0 { peak_estimate(photocounts as u64, tau).unwrap_or(0.0) } else { 0.0 };
    let fwhm = if tau > 0.0 { fwhm_estimate(tau).ok() } else { None };
    Ok(json!({
        "z": snap.z_grid(),
        "p": snap.probabilities(),
        "p0": init.probabilities(),
        "mean_abs_z": m.mean_abs_z,
        "var_abs_z": m.var_abs_z,
        "peak_estimate": peak,
        "fwhm_estimate": fwhm,
    })
    .to_string())
}

pub fn revival_curve(mean_nk: f64, phase_rate: f64, samples: u32) -> Result<String, String> {
    if phase_rate == 0.0 || !phase_rate.is_finite() {
        return Err("the phase rate delta_p c^2 must be nonzero".into());
    }
    if samples < 2 {
        return Err("samples must be at least 2".into());
    }
    let dist = InitialDistribution::poissonian(mean_nk, 1e-12).map_err(|e| e.to_string())?;
    let t_rev = qndsim_core::dynamics::revival_time(phase_rate.abs(), 1.0)
        .map_err(|e| e.to_string())?;
    let mut ts = Vec::with_capacity(samples as usize + 1);
    let mut qs = Vec::with_capacity(samples as usize + 1);
    for i in 0..=samples {
        let t = 2.0 * t_rev * i as f64 / samples as f64;
        ts.push(t / t_rev);
        qs.push(qndsim_core::dynamics::coherence_proxy(&dist, phase_rate.abs(), 1.0, t));
    }
    Ok(json!({ "t_over_trev": ts, "q": qs, "t_rev": t_rev }).to_string())
}
