//! Stochastic photocount engine.
//!
//! A trajectory alternates deterministic no-count evolution with quantum
//! jumps. Between counts the weight of the atom-number component `z` decays
//! as `e^{-z² dtau}` in scaled time; a count multiplies it by `z²`. The
//! normalized distribution therefore stays equal to the closed form
//! `p(z) ∝ z^{2m} e^{-z² tau} p0(z)` at all times, and only the jump count
//! `m` — not the jump times — enters the state.
//!
//! Jump times are drawn by the waiting-time method: a uniform draw `u` is
//! matched against the squared conditional norm
//! `S(dtau) = Σ_z p(z) e^{-z² dtau}`, solved by bisection. The jump intensity
//! `⟨z²⟩` per unit scaled time equals [`ReducedState::detection_rate`], so a
//! collapsed component at `z0` emits a Poisson photon train of rate `z0²`.
//!
//! Weights live in log space: `e^{-z² tau}` underflows catastrophically for
//! `z ~ 100`, `tau ≳ 1`, so all weight algebra is additive in logs with
//! max-shift exponential normalization.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::dynamics::{steady_amplitude, CavityParams, DynamicsError};
use crate::lattice::{
    enumerate_configurations, initial_amplitudes, AmplitudePreset, FockConfiguration,
    InitialDistribution, LatticeConfig, LatticeError, ModePreset, ModeProfile,
};
use crate::stats::{exp_normalize, moments, DistributionSnapshot};

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("dark state cannot produce a photocount")]
    DarkState,
    #[error("record interval must be positive")]
    BadInterval,
    #[error("scaled-time horizon must be non-negative and finite")]
    BadHorizon,
    #[error("ensemble needs at least one trajectory")]
    EmptyEnsemble,
    #[error("full engine needs kappa > 0 and a nonzero scatter coefficient")]
    NeedsDissipation,
    #[error("coupling coefficient {0} is not an integer; z-marginal undefined")]
    NonIntegerCoupling(Complex64),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Conditional atom-number distribution of one trajectory, in log space.
#[derive(Debug, Clone)]
pub struct ReducedState {
    z_grid: Vec<i64>,
    log_w: Vec<f64>,
    photocounts: u64,
    tau: f64,
    step: u8,
}

impl ReducedState {
    pub fn new(init: &InitialDistribution) -> Self {
        Self {
            z_grid: init.z_grid().to_vec(),
            log_w: init.probabilities().iter().map(|&p| p.ln()).collect(),
            photocounts: 0,
            tau: 0.0,
            step: init.step(),
        }
    }

    pub fn z_grid(&self) -> &[i64] {
        &self.z_grid
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_w
    }

    pub fn photocounts(&self) -> u64 {
        self.photocounts
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn step(&self) -> u8 {
        self.step
    }

    /// No-count evolution over `dtau`: the log weight of component `z` drops
    /// by `z² dtau`.
    pub fn advance_no_count(&mut self, dtau: f64) {
        debug_assert!(dtau >= 0.0);
        for (lw, &z) in self.log_w.iter_mut().zip(&self.z_grid) {
            *lw -= (z * z) as f64 * dtau;
        }
        self.tau += dtau;
    }

    /// Photocount jump: weights gain a factor `z²`, the dark `z = 0`
    /// component is eliminated and `m` increments.
    pub fn apply_count(&mut self) -> Result<(), TrajectoryError> {
        let emits = self
            .log_w
            .iter()
            .zip(&self.z_grid)
            .any(|(&lw, &z)| lw.is_finite() && z != 0);
        if !emits {
            return Err(TrajectoryError::DarkState);
        }
        for (lw, &z) in self.log_w.iter_mut().zip(&self.z_grid) {
            if z == 0 {
                *lw = f64::NEG_INFINITY;
            } else {
                *lw += 2.0 * (z.abs() as f64).ln();
            }
        }
        self.photocounts += 1;
        Ok(())
    }

    /// Photocount intensity in counts per unit scaled time: `⟨z²⟩` under the
    /// current normalized distribution.
    pub fn detection_rate(&self) -> f64 {
        let p = exp_normalize(&self.log_w);
        p.iter().zip(&self.z_grid).map(|(&pi, &z)| pi * (z * z) as f64).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        exp_normalize(&self.log_w)
    }

    pub fn snapshot(&self) -> DistributionSnapshot {
        DistributionSnapshot::new(self.z_grid.clone(), self.probabilities(), self.step)
            .expect("engine weights normalize by construction")
    }

    /// Shifts log weights so the largest is zero, keeping magnitudes small so
    /// incremental updates stay accurate over long runs.
    pub fn rebalance(&mut self) {
        let max = self.log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max.is_finite() && max != 0.0 {
            for lw in self.log_w.iter_mut() {
                *lw -= max;
            }
        }
    }

    /// Waiting time until the next photocount for the uniform draw `u`, from
    /// the squared-conditional-norm survival law
    /// `S(dtau) = Σ_z p(z) e^{-z² dtau} = u`. `None` when the survival never
    /// drops to `u` (the no-count branch keeps all remaining mass at `z = 0`).
    pub fn sample_next_jump(&self, u: f64) -> Option<f64> {
        let p = exp_normalize(&self.log_w);
        let rates: Vec<f64> = self.z_grid.iter().map(|&z| (z * z) as f64).collect();
        solve_waiting_time(&p, &rates, u)
    }

    /// [`Self::sample_next_jump`] drawing `u` from the generator.
    pub fn sample_next_jump_rng<R: Rng>(&self, rng: &mut R) -> Option<f64> {
        self.sample_next_jump(draw_unit(rng))
    }
}

fn draw_unit<R: Rng>(rng: &mut R) -> f64 {
    // open-interval draw: u = 0 would mean an infinite waiting time
    rng.gen::<f64>().max(1e-300)
}

/// Solves `Σ_i p_i e^{-r_i dt} = u` for `dt` by bisection to 1e-12 relative.
/// Returns `None` when the survival floor (mass on zero-rate components) is
/// at or above `u`.
fn solve_waiting_time(probs: &[f64], rates: &[f64], u: f64) -> Option<f64> {
    debug_assert!(u > 0.0 && u < 1.0 + 1e-9);
    let floor: f64 =
        probs.iter().zip(rates).filter(|&(_, &r)| r == 0.0).map(|(&p, _)| p).sum();
    if u <= floor {
        return None;
    }
    let survival =
        |dt: f64| -> f64 { probs.iter().zip(rates).map(|(&p, &r)| p * (-r * dt).exp()).sum() };
    let mean_rate: f64 = probs.iter().zip(rates).map(|(&p, &r)| p * r).sum();
    if mean_rate <= 0.0 {
        return None;
    }
    let mut hi = 1.0 / mean_rate;
    let mut guard = 0;
    while survival(hi) > u {
        hi *= 2.0;
        guard += 1;
        if guard > 4000 {
            return None;
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if survival(mid) > u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Moments of the conditional distribution at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint {
    pub tau: f64,
    pub photocounts: u64,
    pub mean_z: f64,
    pub mean_abs_z: f64,
    pub var_z: f64,
    pub var_abs_z: f64,
}

/// Full record of one trajectory: checkpoint moments and distributions, jump
/// times and the RNG seed that reproduces it.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub samples: Vec<SamplePoint>,
    pub snapshots: Vec<DistributionSnapshot>,
    pub jumps: Vec<f64>,
    pub seed: u64,
}

impl TrajectoryRecord {
    pub fn taus(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.tau).collect()
    }

    pub fn var_abs(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.var_abs_z).collect()
    }

    pub fn final_snapshot(&self) -> &DistributionSnapshot {
        self.snapshots.last().expect("records hold at least the initial checkpoint")
    }
}

fn checkpoint_grid(tau_max: f64, record_interval: f64) -> Result<Vec<f64>, TrajectoryError> {
    if tau_max.is_nan() || tau_max < 0.0 || !tau_max.is_finite() {
        return Err(TrajectoryError::BadHorizon);
    }
    if tau_max == 0.0 {
        return Ok(vec![0.0]);
    }
    if record_interval.is_nan() || record_interval <= 0.0 {
        return Err(TrajectoryError::BadInterval);
    }
    let n = (tau_max / record_interval * (1.0 + 1e-12)).floor() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|k| k as f64 * record_interval).collect();
    if *grid.last().unwrap() < tau_max * (1.0 - 1e-12) {
        grid.push(tau_max);
    }
    Ok(grid)
}

/// Runs one trajectory with the waiting-time unraveling. Fully deterministic
/// given the seed.
pub fn run_trajectory(
    init: &InitialDistribution,
    tau_max: f64,
    record_interval: f64,
    seed: u64,
) -> Result<TrajectoryRecord, TrajectoryError> {
    run_trajectory_with_stream(init, tau_max, record_interval, seed, 0)
}

/// Like [`run_trajectory`] on an explicit RNG stream; ensembles give
/// trajectory `i` the stream `i`, so stream 0 reproduces [`run_trajectory`].
pub fn run_trajectory_with_stream(
    init: &InitialDistribution,
    tau_max: f64,
    record_interval: f64,
    seed: u64,
    stream: u64,
) -> Result<TrajectoryRecord, TrajectoryError> {
    let checkpoints = checkpoint_grid(tau_max, record_interval)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);

    let mut state = ReducedState::new(init);
    let mut samples = Vec::with_capacity(checkpoints.len());
    let mut snapshots = Vec::with_capacity(checkpoints.len());
    let mut jumps = Vec::new();
    let mut next_jump: Option<f64> = None;
    let mut need_draw = true;

    for &target in &checkpoints {
        loop {
            if need_draw {
                next_jump = state.sample_next_jump_rng(&mut rng).map(|dt| state.tau() + dt);
                need_draw = false;
            }
            match next_jump {
                Some(tj) if tj <= target && tj <= tau_max => {
                    state.advance_no_count((tj - state.tau()).max(0.0));
                    state.apply_count()?;
                    state.rebalance();
                    jumps.push(tj);
                    need_draw = true;
                }
                _ => break,
            }
        }
        state.advance_no_count((target - state.tau()).max(0.0));
        state.rebalance();
        record_checkpoint(&state, &mut samples, &mut snapshots);
    }

    Ok(TrajectoryRecord { samples, snapshots, jumps, seed })
}

fn record_checkpoint(
    state: &ReducedState,
    samples: &mut Vec<SamplePoint>,
    snapshots: &mut Vec<DistributionSnapshot>,
) {
    let snap = state.snapshot();
    let m = moments(&snap);
    samples.push(SamplePoint {
        tau: state.tau(),
        photocounts: state.photocounts(),
        mean_z: m.mean_z,
        mean_abs_z: m.mean_abs_z,
        var_z: m.var_z,
        var_abs_z: m.var_abs_z,
    });
    snapshots.push(snap);
}

/// The no-jump post-selected trajectory: pure no-count evolution,
/// `p ∝ e^{-z² tau} p0`. Deterministic; no RNG involved.
pub fn no_count_trajectory(
    init: &InitialDistribution,
    tau_max: f64,
    record_interval: f64,
) -> Result<TrajectoryRecord, TrajectoryError> {
    let checkpoints = checkpoint_grid(tau_max, record_interval)?;
    let mut state = ReducedState::new(init);
    let mut samples = Vec::with_capacity(checkpoints.len());
    let mut snapshots = Vec::with_capacity(checkpoints.len());
    for &target in &checkpoints {
        state.advance_no_count((target - state.tau()).max(0.0));
        state.rebalance();
        record_checkpoint(&state, &mut samples, &mut snapshots);
    }
    Ok(TrajectoryRecord { samples, snapshots, jumps: Vec::new(), seed: 0 })
}

/// Fixed-step unraveling kept as a cross-check of the waiting-time sampler:
/// per step of at most `0.01/rate`, a count fires with probability
/// `rate · dtau`.
pub fn run_trajectory_fixed_step(
    init: &InitialDistribution,
    tau_max: f64,
    record_interval: f64,
    seed: u64,
) -> Result<TrajectoryRecord, TrajectoryError> {
    const MAX_JUMP_PROB: f64 = 0.01;
    let checkpoints = checkpoint_grid(tau_max, record_interval)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = ReducedState::new(init);
    let mut samples = Vec::new();
    let mut snapshots = Vec::new();
    let mut jumps = Vec::new();

    for &target in &checkpoints {
        while state.tau() < target {
            let rate = state.detection_rate();
            let dt = if rate > 0.0 {
                (MAX_JUMP_PROB / rate).min(target - state.tau())
            } else {
                target - state.tau()
            };
            state.advance_no_count(dt);
            if rate > 0.0 && rng.gen::<f64>() < rate * dt {
                state.apply_count()?;
                jumps.push(state.tau());
            }
            state.rebalance();
        }
        state.advance_no_count((target - state.tau()).max(0.0));
        record_checkpoint(&state, &mut samples, &mut snapshots);
    }
    Ok(TrajectoryRecord { samples, snapshots, jumps, seed })
}

/// Exact configuration-space engine for small systems, used as the oracle the
/// reduced engine is validated against.
///
/// Every Fock configuration carries its steady cavity amplitude from the
/// closed-form solution; no-count evolution decays the squared weight at
/// `2 kappa |alpha_q|²` per unit physical time and a count multiplies it by
/// `|alpha_q|²`. Jump decisions consume the uniform-draw sequence exactly as
/// [`run_trajectory`] does, so records with the same seed line up one to one.
/// Checkpoints and jump times are reported in scaled time.
pub fn run_full_oracle(
    cfg: &LatticeConfig,
    modes: &ModeProfile,
    preset: AmplitudePreset,
    params: &CavityParams,
    seed: u64,
    tau_max: f64,
    record_interval: f64,
) -> Result<TrajectoryRecord, TrajectoryError> {
    let tau_rate = 2.0 * params.reduced_scatter().norm_sqr() * params.kappa;
    if tau_rate.is_nan() || tau_rate <= 0.0 {
        return Err(TrajectoryError::NeedsDissipation);
    }
    let configs = enumerate_configurations(cfg)?;
    let amps = initial_amplitudes(preset, cfg, &configs)?;

    let (z_values, alphas) = configuration_couplings(cfg, modes, &configs, params)?;
    let decay_rates: Vec<f64> = alphas.iter().map(|a| 2.0 * params.kappa * a.norm_sqr()).collect();

    // z-marginal layout
    let grid: Vec<i64> = {
        let mut g = z_values.clone();
        g.sort_unstable();
        g.dedup();
        g
    };
    let step = match modes.preset() {
        ModePreset::DiffractionMinimum => 2,
        _ => 1,
    };
    let bin_of: Vec<usize> =
        z_values.iter().map(|z| grid.binary_search(z).expect("z in grid")).collect();

    let checkpoints = checkpoint_grid(tau_max, record_interval)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);

    // squared weights in log space
    let mut log_w2: Vec<f64> = amps.iter().map(|&a| 2.0 * a.abs().ln()).collect();
    let mut time = 0.0f64;
    let mut photocounts = 0u64;
    let mut samples = Vec::with_capacity(checkpoints.len());
    let mut snapshots = Vec::with_capacity(checkpoints.len());
    let mut jumps = Vec::new();
    let mut next_jump: Option<f64> = None;
    let mut need_draw = true;

    let advance = |log_w2: &mut [f64], from: f64, to: f64| {
        let dt = (to - from).max(0.0);
        for (lw, &r) in log_w2.iter_mut().zip(&decay_rates) {
            *lw -= r * dt;
        }
    };
    let rebalance = |log_w2: &mut [f64]| {
        let max = log_w2.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max.is_finite() && max != 0.0 {
            for lw in log_w2.iter_mut() {
                *lw -= max;
            }
        }
    };

    let t_max = tau_max / tau_rate;
    for &target_tau in &checkpoints {
        let target = target_tau / tau_rate;
        loop {
            if need_draw {
                let u = draw_unit(&mut rng);
                let p = exp_normalize(&log_w2);
                next_jump = solve_waiting_time(&p, &decay_rates, u).map(|dt| time + dt);
                need_draw = false;
            }
            match next_jump {
                Some(tj) if tj <= target && tj <= t_max => {
                    advance(&mut log_w2, time, tj);
                    time = tj;
                    let emits = log_w2
                        .iter()
                        .zip(&alphas)
                        .any(|(&lw, a)| lw.is_finite() && a.norm_sqr() > 0.0);
                    if !emits {
                        return Err(TrajectoryError::DarkState);
                    }
                    for (lw, a) in log_w2.iter_mut().zip(&alphas) {
                        *lw += a.norm_sqr().ln();
                    }
                    photocounts += 1;
                    rebalance(&mut log_w2);
                    jumps.push(tj * tau_rate);
                    need_draw = true;
                }
                _ => break,
            }
        }
        advance(&mut log_w2, time, target);
        time = target;
        rebalance(&mut log_w2);

        // marginal over z
        let p = exp_normalize(&log_w2);
        let mut binned = vec![0.0f64; grid.len()];
        for (&pi, &b) in p.iter().zip(&bin_of) {
            binned[b] += pi;
        }
        let snap = DistributionSnapshot::new(grid.clone(), binned, step)
            .expect("marginal weights normalize by construction");
        let m = moments(&snap);
        samples.push(SamplePoint {
            tau: time * tau_rate,
            photocounts,
            mean_z: m.mean_z,
            mean_abs_z: m.mean_abs_z,
            var_z: m.var_z,
            var_abs_z: m.var_abs_z,
        });
        snapshots.push(snap);
    }
    Ok(TrajectoryRecord { samples, snapshots, jumps, seed })
}

fn configuration_couplings(
    cfg: &LatticeConfig,
    modes: &ModeProfile,
    configs: &[FockConfiguration],
    params: &CavityParams,
) -> Result<(Vec<i64>, Vec<Complex64>), TrajectoryError> {
    let mut z_values = Vec::with_capacity(configs.len());
    let mut alphas = Vec::with_capacity(configs.len());
    for q in configs {
        let d10 = crate::lattice::d10(q, modes, cfg.illuminated());
        let d11 = crate::lattice::d11(q, modes, cfg.illuminated());
        if d10.im.abs() > 1e-9 || (d10.re - d10.re.round()).abs() > 1e-9 {
            return Err(TrajectoryError::NonIntegerCoupling(d10));
        }
        z_values.push(d10.re.round() as i64);
        alphas.push(steady_amplitude(params, d10, d11)?);
    }
    Ok((z_values, alphas))
}

/// Ensemble statistics folded deterministically in trajectory order.
#[derive(Debug, Clone)]
pub struct EnsembleSummary {
    pub taus: Vec<f64>,
    pub z_grid: Vec<i64>,
    pub step: u8,
    /// Mean conditional probability per checkpoint and grid point.
    pub mean_p: Vec<Vec<f64>>,
    /// Standard error of that mean.
    pub stderr_p: Vec<Vec<f64>>,
    /// Folded `|z|` outcome histogram over final-checkpoint peaks.
    pub outcome_grid: Vec<i64>,
    pub outcome_counts: Vec<u64>,
    pub trajectories: usize,
}

struct BatchAccum {
    sum_p: Vec<Vec<f64>>,
    sum_p2: Vec<Vec<f64>>,
    outcomes: Vec<u64>,
    taus: Vec<f64>,
}

/// Trajectories are grouped into fixed-size batches; batch results merge in
/// index order, so the summary is bit-identical for every worker count.
const ENSEMBLE_BATCH: usize = 64;

/// Runs `n_traj` independent trajectories on RNG streams `(seed, 0..n_traj)`
/// and folds them into an [`EnsembleSummary`]. `workers` only sets the thread
/// count; it never changes the result.
pub fn run_ensemble(
    init: &InitialDistribution,
    tau_max: f64,
    record_interval: f64,
    n_traj: usize,
    base_seed: u64,
    workers: usize,
) -> Result<EnsembleSummary, TrajectoryError> {
    if n_traj == 0 {
        return Err(TrajectoryError::EmptyEnsemble);
    }
    let checkpoints = checkpoint_grid(tau_max, record_interval)?;
    let n_check = checkpoints.len();
    let grid = init.z_grid().to_vec();
    let outcome_grid: Vec<i64> = {
        let mut g: Vec<i64> = grid.iter().map(|&z| z.abs()).collect();
        g.sort_unstable();
        g.dedup();
        g
    };

    let run_batch = |batch: usize| -> Result<BatchAccum, TrajectoryError> {
        let lo = batch * ENSEMBLE_BATCH;
        let hi = ((batch + 1) * ENSEMBLE_BATCH).min(n_traj);
        let mut acc = BatchAccum {
            sum_p: vec![vec![0.0; grid.len()]; n_check],
            sum_p2: vec![vec![0.0; grid.len()]; n_check],
            outcomes: vec![0; outcome_grid.len()],
            taus: Vec::new(),
        };
        for traj in lo..hi {
            let record = run_trajectory_with_stream(
                init,
                tau_max,
                record_interval,
                base_seed,
                traj as u64,
            )?;
            if acc.taus.is_empty() {
                acc.taus = record.taus();
            }
            for (k, snap) in record.snapshots.iter().enumerate() {
                for (i, &p) in snap.probabilities().iter().enumerate() {
                    acc.sum_p[k][i] += p;
                    acc.sum_p2[k][i] += p * p;
                }
            }
            let folded = record.final_snapshot().fold();
            let peak = folded.peak();
            let slot = outcome_grid.binary_search(&peak).expect("peak on folded grid");
            acc.outcomes[slot] += 1;
        }
        Ok(acc)
    };

    let n_batches = n_traj.div_ceil(ENSEMBLE_BATCH);
    let batches: Vec<BatchAccum> = if workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool construction");
        pool.install(|| {
            (0..n_batches)
                .into_par_iter()
                .map(run_batch)
                .collect::<Result<Vec<_>, _>>()
        })?
    } else {
        (0..n_batches).map(run_batch).collect::<Result<Vec<_>, _>>()?
    };

    let mut sum_p = vec![vec![0.0; grid.len()]; n_check];
    let mut sum_p2 = vec![vec![0.0; grid.len()]; n_check];
    let mut outcome_counts = vec![0u64; outcome_grid.len()];
    let mut taus = Vec::new();
    for b in &batches {
        if taus.is_empty() {
            taus = b.taus.clone();
        }
        for k in 0..n_check {
            for i in 0..grid.len() {
                sum_p[k][i] += b.sum_p[k][i];
                sum_p2[k][i] += b.sum_p2[k][i];
            }
        }
        for (c, &o) in outcome_counts.iter_mut().zip(&b.outcomes) {
            *c += o;
        }
    }

    let n = n_traj as f64;
    let mut mean_p = vec![vec![0.0; grid.len()]; n_check];
    let mut stderr_p = vec![vec![0.0; grid.len()]; n_check];
    for k in 0..n_check {
        for i in 0..grid.len() {
            let mean = sum_p[k][i] / n;
            mean_p[k][i] = mean;
            if n_traj > 1 {
                let var = ((sum_p2[k][i] - sum_p[k][i] * sum_p[k][i] / n) / (n - 1.0)).max(0.0);
                stderr_p[k][i] = (var / n).sqrt();
            }
        }
    }

    Ok(EnsembleSummary {
        taus,
        z_grid: grid,
        step: init.step(),
        mean_p,
        stderr_p,
        outcome_grid,
        outcome_counts,
        trajectories: n_traj,
    })
}
