//! The four experiment drivers behind the subcommands.

use qndsim_core::dynamics::{coherence_proxy, revival_time};
use qndsim_core::lattice::{
    coupling_marginal, d10, enumerate_configurations, initial_amplitudes, AmplitudePreset,
    FockConfiguration, InitialDistribution,
};
use qndsim_core::stats::{chi_square_test, merge_sparse_bins};
use qndsim_core::trajectory::{
    no_count_trajectory, run_ensemble, run_full_oracle, run_trajectory, TrajectoryRecord,
};

use crate::config::{Engine, InitialSpec, RunConfig};
use crate::output;
use crate::CliError;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Scaled-time-to-physical-time rate `2|C|² kappa`, when a physical block is
/// present.
fn tau_rate(cfg: &RunConfig) -> Result<Option<f64>, CliError> {
    match &cfg.physical {
        None => Ok(None),
        Some(_) => {
            let params = cfg.cavity_params().map_err(config_err)?;
            let rate = 2.0 * params.reduced_scatter().norm_sqr() * params.kappa;
            if rate > 0.0 {
                Ok(Some(rate))
            } else {
                Err(config_err(
                    "[physical] block cannot convert scaled time: needs kappa > 0 and a \
                     nonzero scatter coefficient",
                ))
            }
        }
    }
}

fn amplitude_preset(cfg: &RunConfig) -> Result<AmplitudePreset, CliError> {
    match cfg.initial().map_err(config_err)? {
        InitialSpec::Superfluid => Ok(AmplitudePreset::Superfluid),
        InitialSpec::Mott => Ok(AmplitudePreset::Mott),
        other => Err(config_err(format!(
            "the full engine supports initial = superfluid or mott, got {other:?}"
        ))),
    }
}

/// Initial z-distribution implied by a full-engine amplitude preset: the
/// squared amplitudes marginalized over the coupling coefficient.
fn marginal_initial(cfg: &RunConfig) -> Result<InitialDistribution, CliError> {
    let lattice = cfg.lattice().map_err(config_err)?;
    let geometry = cfg.geometry().map_err(config_err)?;
    let modes = geometry.modes(lattice.sites());
    let preset = amplitude_preset(cfg)?;
    let configs = enumerate_configurations(&lattice).map_err(|e| config_err(e.to_string()))?;
    let amps =
        initial_amplitudes(preset, &lattice, &configs).map_err(|e| config_err(e.to_string()))?;
    let weights: Vec<f64> = amps.iter().map(|a| a * a).collect();
    let marginal = coupling_marginal(&configs, &weights, &modes, lattice.illuminated())
        .map_err(|e| config_err(e.to_string()))?;
    let total: f64 = marginal.iter().map(|&(_, p)| p).sum();
    InitialDistribution::from_points(marginal.into_iter().map(|(z, p)| (z, p / total)).collect())
        .map_err(|e| config_err(e.to_string()))
}

/// Single-trajectory run: the stochastic record, its no-jump post-selected
/// companion, the jump events and a gnuplot script for the two-panel width
/// figure.
pub fn cmd_trajectory(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.n_traj != 1 {
        return Err(config_err(format!(
            "trajectory runs exactly one realization; for n_traj = {} use the ensemble subcommand",
            cfg.n_traj
        )));
    }
    let tau_max = cfg.tau_max().map_err(config_err)?;
    let interval = cfg.record_interval().map_err(config_err)?;
    let rate = tau_rate(cfg)?;

    let (record, nojump) = match cfg.engine {
        Engine::Reduced => {
            let init = cfg.initial_distribution().map_err(config_err)?;
            let record = run_trajectory(&init, tau_max, interval, cfg.seed)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            let nojump = no_count_trajectory(&init, tau_max, interval)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            (record, nojump)
        }
        Engine::Full => {
            let lattice = cfg.lattice().map_err(config_err)?;
            let geometry = cfg.geometry().map_err(config_err)?;
            let modes = geometry.modes(lattice.sites());
            let preset = amplitude_preset(cfg)?;
            let params = cfg.cavity_params().map_err(config_err)?;
            let record = run_full_oracle(
                &lattice, &modes, preset, &params, cfg.seed, tau_max, interval,
            )
            .map_err(|e| CliError::Numerical(e.to_string()))?;
            let init = marginal_initial(cfg)?;
            let nojump = no_count_trajectory(&init, tau_max, interval)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            (record, nojump)
        }
    };

    let dir = &cfg.output_dir;
    output::write_file(dir, "trajectory.csv", &output::trajectory_csv(&record, rate))?;
    output::write_file(dir, "events.csv", &output::events_csv(&record))?;
    output::write_file(dir, "trajectory_nojump.csv", &output::trajectory_csv(&nojump, rate))?;
    output::write_file(dir, "final_distribution.txt", &output::final_distribution_text(&record))?;
    output::write_file(dir, "plot.gp", &output::width_plot_script())?;
    println!(
        "trajectory: {} checkpoints, {} photocounts -> {}",
        record.samples.len(),
        record.jumps.len(),
        dir.display()
    );
    Ok(())
}

/// Ensemble run: per-checkpoint mean posterior and the folded final-outcome
/// histogram with a chi-square test against the initial distribution.
pub fn cmd_ensemble(cfg: &RunConfig, workers: usize) -> Result<(), CliError> {
    if cfg.engine != Engine::Reduced {
        return Err(config_err("ensemble runs use the reduced engine"));
    }
    if cfg.n_traj < 2 {
        return Err(config_err("ensemble needs n_traj >= 2"));
    }
    let tau_max = cfg.tau_max().map_err(config_err)?;
    let interval = cfg.record_interval().map_err(config_err)?;
    let init = cfg.initial_distribution().map_err(config_err)?;

    let summary = run_ensemble(&init, tau_max, interval, cfg.n_traj, cfg.seed, workers)
        .map_err(|e| CliError::Numerical(e.to_string()))?;

    // fold the prior onto |z| and align with the outcome grid
    let mut folded = std::collections::BTreeMap::new();
    for (&z, &p) in init.z_grid().iter().zip(init.probabilities()) {
        *folded.entry(z.abs()).or_insert(0.0) += p;
    }
    let expected_p: Vec<f64> =
        summary.outcome_grid.iter().map(|z| folded.get(z).copied().unwrap_or(0.0)).collect();

    let (obs_merged, exp_merged) = merge_sparse_bins(
        &summary.outcome_counts,
        &expected_p,
        summary.trajectories as u64,
        5.0,
    );
    let chi = chi_square_test(&obs_merged, &exp_merged, summary.trajectories as u64);

    let dir = &cfg.output_dir;
    output::write_file(dir, "ensemble.csv", &output::ensemble_csv(&summary))?;
    output::write_file(
        dir,
        "outcomes.csv",
        &output::outcomes_csv(&summary, &expected_p, chi.statistic, chi.dof, chi.p_value),
    )?;
    println!(
        "ensemble: {} trajectories, outcome chi-square p-value {:.4} -> {}",
        summary.trajectories,
        chi.p_value,
        dir.display()
    );
    Ok(())
}

/// Runs the reduced and the full configuration-space engines on the same
/// uniform-draw sequence and reports the z-marginal deviation per checkpoint.
/// Exits nonzero when the deviation exceeds 1e-8.
pub fn cmd_oracle_compare(cfg: &RunConfig) -> Result<(), CliError> {
    const GATE: f64 = 1e-8;
    let tau_max = cfg.tau_max().map_err(config_err)?;
    let interval = cfg.record_interval().map_err(config_err)?;
    let lattice = cfg.lattice().map_err(config_err)?;
    let geometry = cfg.geometry().map_err(config_err)?;
    let modes = geometry.modes(lattice.sites());
    let preset = amplitude_preset(cfg)?;
    let params = cfg.cavity_params().map_err(config_err)?;

    let full = run_full_oracle(&lattice, &modes, preset, &params, cfg.seed, tau_max, interval)
        .map_err(|e| CliError::Numerical(e.to_string()))?;

    // reduced route: the preset initial distribution, not the marginal, so the
    // two engines share no intermediate results
    let init = match preset {
        AmplitudePreset::Superfluid => cfg.initial_distribution().map_err(config_err)?,
        AmplitudePreset::Mott => {
            let fill = lattice.atoms() / lattice.sites() as u32;
            let uniform = FockConfiguration::new(vec![fill; lattice.sites()]);
            let z = d10(&uniform, &modes, lattice.illuminated()).re.round() as i64;
            match geometry {
                crate::config::Geometry::Maximum => {
                    InitialDistribution::delta_maximum(&lattice, z)
                }
                crate::config::Geometry::Minimum => {
                    InitialDistribution::delta_minimum(&lattice, z)
                }
            }
            .map_err(|e| config_err(e.to_string()))?
        }
    };
    let reduced = run_trajectory(&init, tau_max, interval, cfg.seed)
        .map_err(|e| CliError::Numerical(e.to_string()))?;

    let rows = compare_records(&reduced, &full);
    let worst = rows.iter().map(|r| r.max_abs_dev).fold(0.0f64, f64::max);

    output::write_file(&cfg.output_dir, "oracle_report.csv", &output::oracle_report_csv(&rows, worst))?;
    println!(
        "oracle-compare: max deviation {worst:.3e} over {} checkpoints -> {}",
        rows.len(),
        cfg.output_dir.display()
    );
    if worst > GATE {
        return Err(CliError::Numerical(format!(
            "reduced and full engines deviate by {worst:.3e} (gate {GATE:.0e})"
        )));
    }
    Ok(())
}

pub(crate) fn compare_records(
    reduced: &TrajectoryRecord,
    full: &TrajectoryRecord,
) -> Vec<output::OracleRow> {
    let n = reduced.samples.len().min(full.samples.len());
    let mut rows = Vec::with_capacity(n);
    for k in 0..n {
        let (rs, fs) = (&reduced.snapshots[k], &full.snapshots[k]);
        let mut zs: Vec<i64> = rs.z_grid().iter().chain(fs.z_grid()).copied().collect();
        zs.sort_unstable();
        zs.dedup();
        let dev = zs
            .iter()
            .map(|&z| {
                (rs.probability_at(z).unwrap_or(0.0) - fs.probability_at(z).unwrap_or(0.0)).abs()
            })
            .fold(0.0f64, f64::max);
        rows.push(output::OracleRow {
            tau: reduced.samples[k].tau,
            m_reduced: reduced.samples[k].photocounts,
            m_full: full.samples[k].photocounts,
            max_abs_dev: dev,
        });
    }
    rows
}

/// Dissipation-free sweep: the coherence proxy over two revival periods plus
/// the per-component quadratic phases.
pub fn cmd_unitary(cfg: &RunConfig) -> Result<(), CliError> {
    let block = cfg
        .unitary
        .ok_or_else(|| config_err("unitary runs need a [unitary] section"))?;
    let t_rev = revival_time(block.delta_p, block.c)
        .map_err(|_| config_err("delta_p * c^2 must be nonzero"))?;
    let p0 = InitialDistribution::poissonian(block.mean_nk, block.truncation)
        .map_err(|e| config_err(e.to_string()))?;

    let samples = block.samples.max(2);
    let points: Vec<(f64, f64)> = (0..=samples)
        .map(|i| {
            let t = 2.0 * t_rev * i as f64 / samples as f64;
            (t, coherence_proxy(&p0, block.delta_p, block.c, t))
        })
        .collect();

    let rate = -block.delta_p * block.c * block.c;
    let phases: Vec<(i64, f64, f64, f64)> = p0
        .z_grid()
        .iter()
        .zip(p0.probabilities())
        .map(|(&n, &p)| {
            let r = rate * (n as f64) * (n as f64);
            (n, p, r, r * t_rev)
        })
        .collect();

    let dir = &cfg.output_dir;
    output::write_file(dir, "coherence.csv", &output::coherence_csv(&points, t_rev))?;
    output::write_file(dir, "phases.csv", &output::phases_csv(&phases))?;
    let q_rev = points[samples / 2].1;
    println!(
        "unitary: t_rev = {t_rev}, Q(t_rev) = {q_rev:.12} over {} components -> {}",
        phases.len(),
        dir.display()
    );
    Ok(())
}
