//! Moment and width diagnostics, the analytic collapse estimators and
//! regime-fitting utilities, plus the closed-form conditional distribution the
//! stochastic engine is checked against.

use thiserror::Error;

use crate::lattice::InitialDistribution;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("invalid snapshot: {0}")]
    BadSnapshot(String),
    #[error("point z0={z0} or z0±{step} is off the snapshot grid")]
    OffGrid { z0: i64, step: i64 },
    #[error("scaled time must be positive, got {0}")]
    NonPositiveTau(f64),
    #[error("trajectory did not reach regime: {0}")]
    EmptyWindow(&'static str),
}

/// A normalized probability distribution over an integer `z` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSnapshot {
    z_grid: Vec<i64>,
    p: Vec<f64>,
    step: u8,
}

impl DistributionSnapshot {
    pub fn new(z_grid: Vec<i64>, p: Vec<f64>, step: u8) -> Result<Self, StatsError> {
        if z_grid.len() != p.len() || z_grid.is_empty() {
            return Err(StatsError::BadSnapshot("grid and probabilities must match".into()));
        }
        if p.iter().any(|&x| x.is_nan() || x < 0.0) {
            return Err(StatsError::BadSnapshot("negative probability".into()));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(StatsError::BadSnapshot(format!("total mass {total} != 1")));
        }
        Ok(Self { z_grid, p, step })
    }

    pub fn z_grid(&self) -> &[i64] {
        &self.z_grid
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn step(&self) -> u8 {
        self.step
    }

    pub fn probability_at(&self, z: i64) -> Option<f64> {
        self.z_grid.iter().position(|&g| g == z).map(|i| self.p[i])
    }

    /// Folds onto `|z|`: mass at `z` and `-z` is combined. The result is the
    /// per-peak view of the symmetric cat-like states of the minimum geometry.
    pub fn fold(&self) -> DistributionSnapshot {
        let mut acc = std::collections::BTreeMap::new();
        for (&z, &p) in self.z_grid.iter().zip(&self.p) {
            *acc.entry(z.abs()).or_insert(0.0) += p;
        }
        let (z_grid, p): (Vec<i64>, Vec<f64>) = acc.into_iter().unzip();
        DistributionSnapshot { z_grid, p, step: self.step }
    }

    /// Grid point with the largest probability (first one on ties).
    pub fn peak(&self) -> i64 {
        let mut best = 0;
        for i in 1..self.p.len() {
            if self.p[i] > self.p[best] {
                best = i;
            }
        }
        self.z_grid[best]
    }
}

/// First and second moments of `z` and `|z|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean_z: f64,
    pub var_z: f64,
    pub mean_abs_z: f64,
    pub var_abs_z: f64,
}

pub fn moments(d: &DistributionSnapshot) -> Moments {
    let mean_z: f64 = d.z_grid.iter().zip(&d.p).map(|(&z, &p)| z as f64 * p).sum();
    let mean_abs: f64 = d.z_grid.iter().zip(&d.p).map(|(&z, &p)| z.abs() as f64 * p).sum();
    let var_z: f64 = d
        .z_grid
        .iter()
        .zip(&d.p)
        .map(|(&z, &p)| (z as f64 - mean_z).powi(2) * p)
        .sum::<f64>()
        .max(0.0);
    let var_abs: f64 = d
        .z_grid
        .iter()
        .zip(&d.p)
        .map(|(&z, &p)| (z.abs() as f64 - mean_abs).powi(2) * p)
        .sum::<f64>()
        .max(0.0);
    Moments { mean_z, var_z, mean_abs_z: mean_abs, var_abs_z: var_abs }
}

/// Three-point variance estimate `Z²[p(z0-Z) + p(z0+Z)]`, valid once nearly
/// all mass sits on `{z0, z0±Z}`.
pub fn three_point_variance(
    d: &DistributionSnapshot,
    z0: i64,
    step: i64,
) -> Result<f64, StatsError> {
    let lo = d.probability_at(z0 - step);
    let hi = d.probability_at(z0 + step);
    if d.probability_at(z0).is_none() || lo.is_none() || hi.is_none() {
        return Err(StatsError::OffGrid { z0, step });
    }
    Ok((step * step) as f64 * (lo.unwrap() + hi.unwrap()))
}

/// Center of the collapsed distribution, `sqrt(m/tau)`.
pub fn peak_estimate(photocounts: u64, tau: f64) -> Result<f64, StatsError> {
    if tau.is_nan() || tau <= 0.0 {
        return Err(StatsError::NonPositiveTau(tau));
    }
    Ok((photocounts as f64 / tau).sqrt())
}

/// Continuous-regime FWHM of the collapsing distribution, `sqrt(2 ln2 / tau)`.
pub fn fwhm_estimate(tau: f64) -> Result<f64, StatsError> {
    if tau.is_nan() || tau <= 0.0 {
        return Err(StatsError::NonPositiveTau(tau));
    }
    Ok((2.0 * std::f64::consts::LN_2 / tau).sqrt())
}

/// Full width at half maximum measured by linear interpolation between grid
/// points. Returns `None` when either half-maximum crossing is missing or the
/// width is at most `3Z`, where quoting an FWHM stops being meaningful.
pub fn measured_fwhm(d: &DistributionSnapshot) -> Option<f64> {
    let n = d.p.len();
    let mut ipk = 0;
    for i in 1..n {
        if d.p[i] > d.p[ipk] {
            ipk = i;
        }
    }
    let half = d.p[ipk] / 2.0;
    let cross = |i0: usize, i1: usize| -> f64 {
        // linear interpolation of the crossing between grid indices i0, i1
        let (z0, z1) = (d.z_grid[i0] as f64, d.z_grid[i1] as f64);
        let (p0, p1) = (d.p[i0], d.p[i1]);
        z0 + (half - p0) / (p1 - p0) * (z1 - z0)
    };
    let mut left = None;
    for i in (0..ipk).rev() {
        if d.p[i] <= half {
            left = Some(cross(i, i + 1));
            break;
        }
    }
    let mut right = None;
    for i in ipk + 1..n {
        if d.p[i] <= half {
            right = Some(cross(i - 1, i));
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => {
            let width = r - l;
            (width > 3.0 * d.step as f64).then_some(width)
        }
        _ => None,
    }
}

/// Closed-form conditional distribution after `m` photocounts at scaled time
/// `tau`: `p(z) ∝ z^{2m} e^{-z² tau} p0(z)`, evaluated in log space.
///
/// This is the analytic reference the stochastic engine is validated against;
/// it deliberately shares no code with the incremental weight updates.
pub fn closed_form_snapshot(
    init: &InitialDistribution,
    photocounts: u64,
    tau: f64,
) -> DistributionSnapshot {
    let m = photocounts as f64;
    let log_w: Vec<f64> = init
        .z_grid()
        .iter()
        .zip(init.probabilities())
        .map(|(&z, &p0)| {
            if p0 == 0.0 {
                return f64::NEG_INFINITY;
            }
            let zf = z as f64;
            let count_term = if photocounts == 0 {
                0.0
            } else if z == 0 {
                f64::NEG_INFINITY
            } else {
                2.0 * m * zf.abs().ln()
            };
            p0.ln() + count_term - zf * zf * tau
        })
        .collect();
    let p = exp_normalize(&log_w);
    DistributionSnapshot { z_grid: init.z_grid().to_vec(), p, step: init.step() }
}

/// Exponentiates log weights with a max shift and normalizes to unit sum.
/// All-(-inf) input yields all zeros.
pub fn exp_normalize(log_w: &[f64]) -> Vec<f64> {
    let max = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return vec![0.0; log_w.len()];
    }
    let mut w: Vec<f64> = log_w.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    for v in w.iter_mut() {
        *v /= total;
    }
    w
}

/// A least-squares line over a trajectory window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeFit {
    /// Scaled-time window `[tau_lo, tau_hi]` the fit was taken on.
    pub window: (f64, f64),
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; exactly-flat data fits perfectly.
    pub goodness: f64,
}

/// Ordinary least squares of `y` on `x` returning `(slope, intercept, R²)`.
///
/// When the data carry no variance at all, `R²` is 1 if the residuals vanish
/// too (a constant fitted exactly) and 0 otherwise.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "need at least two points to fit a line");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|&v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    let ss_tot: f64 = y.iter().map(|&b| (b - my) * (b - my)).sum();
    let r2 = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else if ss_res <= 1e-300 {
        1.0
    } else {
        0.0
    };
    (slope, intercept, r2)
}

/// Two-regime fit of a width trajectory.
///
/// `taus`/`variances` are the sample times and squared widths (the folded
/// variance for bimodal minimum-geometry runs, the plain variance when the
/// distribution is unimodal); `sigma0` is the unfolded initial width
/// `sqrt(var_z(0))` and `step` the grid step `Z`.
///
/// * square-root regime — samples with `Z < width < sigma0/3`, fitting
///   `width·sqrt(tau)` against `tau` (a flat line when the `1/sqrt(tau)` law
///   holds);
/// * exponential regime — samples with `0 < variance < Z²/4`, fitting
///   `ln(variance)` against `tau`.
pub fn fit_regimes(
    taus: &[f64],
    variances: &[f64],
    sigma0: f64,
    step: u8,
) -> Result<(RegimeFit, RegimeFit), StatsError> {
    assert_eq!(taus.len(), variances.len());
    let z = step as f64;

    let mut sx = Vec::new();
    let mut sy = Vec::new();
    for (&t, &v) in taus.iter().zip(variances) {
        let width = v.sqrt();
        if width > z && width < sigma0 / 3.0 {
            sx.push(t);
            sy.push(width * t.sqrt());
        }
    }
    if sx.len() < 2 {
        return Err(StatsError::EmptyWindow("square-root regime window is empty"));
    }
    let (slope, intercept, r2) = linear_fit(&sx, &sy);
    let sqrt_fit =
        RegimeFit { window: (sx[0], sx[sx.len() - 1]), slope, intercept, goodness: r2 };

    let mut ex = Vec::new();
    let mut ey = Vec::new();
    for (&t, &v) in taus.iter().zip(variances) {
        if v > 0.0 && v < z * z / 4.0 {
            ex.push(t);
            ey.push(v.ln());
        }
    }
    if ex.len() < 2 {
        return Err(StatsError::EmptyWindow("exponential regime window is empty"));
    }
    let (slope, intercept, r2) = linear_fit(&ex, &ey);
    let exp_fit =
        RegimeFit { window: (ex[0], ex[ex.len() - 1]), slope, intercept, goodness: r2 };

    Ok((sqrt_fit, exp_fit))
}

/// Longest window (by `tau` ratio) over which `width·sqrt(tau)` stays within
/// `band` (relative) of its window mean, restricted to samples with
/// `width < sigma0/3`. Returns `(tau_lo, tau_hi, max relative deviation)`.
pub fn sqrt_law_window(
    taus: &[f64],
    variances: &[f64],
    sigma0: f64,
    band: f64,
) -> Option<(f64, f64, f64)> {
    let pts: Vec<(f64, f64)> = taus
        .iter()
        .zip(variances)
        .filter(|&(&t, &v)| t > 0.0 && v.sqrt() < sigma0 / 3.0)
        .map(|(&t, &v)| (t, v.sqrt() * t.sqrt()))
        .collect();
    let n = pts.len();
    let mut best: Option<(f64, f64, f64)> = None;
    for i in 0..n {
        for j in (i + 1)..n {
            let window = &pts[i..=j];
            let mean = window.iter().map(|&(_, y)| y).sum::<f64>() / window.len() as f64;
            if mean <= 0.0 {
                continue;
            }
            let dev = window
                .iter()
                .map(|&(_, y)| (y - mean).abs() / mean)
                .fold(0.0f64, f64::max);
            if dev > band {
                break; // extending j only grows the deviation's upper bound
            }
            let ratio = pts[j].0 / pts[i].0;
            if best.is_none_or(|(lo, hi, _)| ratio > hi / lo) {
                best = Some((pts[i].0, pts[j].0, dev));
            }
        }
    }
    best
}

/// Pearson chi-square result.
#[derive(Debug, Clone, Copy)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson chi-square of observed counts against expected probabilities.
/// `expected_p` must sum to 1; the caller is responsible for merging bins with
/// tiny expectation (see [`merge_sparse_bins`]).
pub fn chi_square_test(observed: &[u64], expected_p: &[f64], total: u64) -> ChiSquare {
    assert_eq!(observed.len(), expected_p.len());
    assert!(observed.len() >= 2);
    let mut stat = 0.0;
    for (&o, &pe) in observed.iter().zip(expected_p) {
        let e = pe * total as f64;
        if e > 0.0 {
            stat += (o as f64 - e).powi(2) / e;
        }
    }
    let dof = observed.len() - 1;
    ChiSquare { statistic: stat, dof, p_value: chi_square_sf(stat, dof as f64) }
}

/// Merges adjacent bins from both ends inward until every expected count is at
/// least `min_expected`. Returns the merged `(observed, expected_p)` pair.
pub fn merge_sparse_bins(
    observed: &[u64],
    expected_p: &[f64],
    total: u64,
    min_expected: f64,
) -> (Vec<u64>, Vec<f64>) {
    let mut obs: Vec<u64> = observed.to_vec();
    let mut exp: Vec<f64> = expected_p.to_vec();
    loop {
        if obs.len() <= 2 {
            break;
        }
        let first_low = exp.first().is_some_and(|&p| p * (total as f64) < min_expected);
        let last_low = exp.last().is_some_and(|&p| p * (total as f64) < min_expected);
        if first_low {
            obs[1] += obs[0];
            exp[1] += exp[0];
            obs.remove(0);
            exp.remove(0);
        } else if last_low {
            let n = obs.len();
            obs[n - 2] += obs[n - 1];
            exp[n - 2] += exp[n - 1];
            obs.pop();
            exp.pop();
        } else {
            break;
        }
    }
    (obs, exp)
}

/// Survival function of the chi-square distribution with `k` degrees of
/// freedom, `Q(k/2, x/2)`.
pub fn chi_square_sf(x: f64, k: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    regularized_gamma_q(k / 2.0, x / 2.0)
}

/// Regularized upper incomplete gamma function `Q(a, x)`, series for
/// `x < a + 1` and continued fraction otherwise.
fn regularized_gamma_q(a: f64, x: f64) -> f64 {
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_cf(a, x)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..500 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_q_cf(a: f64, x: f64) -> f64 {
    // Lentz's algorithm for the continued fraction of Q(a, x)
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Lanczos approximation of `ln Γ(x)` for positive `x`.
pub fn ln_gamma(x: f64) -> f64 {
    #[allow(clippy::excessive_precision)]
    const G: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    assert!(x > 0.0);
    let xm1 = x - 1.0;
    let mut acc = G[0];
    for (i, &g) in G.iter().enumerate().skip(1) {
        acc += g / (xm1 + i as f64);
    }
    let t = xm1 + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (xm1 + 0.5) * t.ln() - t + acc.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn snap(points: &[(i64, f64)], step: u8) -> DistributionSnapshot {
        DistributionSnapshot::new(
            points.iter().map(|&(z, _)| z).collect(),
            points.iter().map(|&(_, p)| p).collect(),
            step,
        )
        .unwrap()
    }

    #[test]
    fn moment_examples() {
        let m = moments(&snap(&[(0, 0.5), (2, 0.5)], 2));
        assert_abs_diff_eq!(m.mean_z, 1.0);
        assert_abs_diff_eq!(m.var_z, 1.0);

        let m = moments(&snap(&[(7, 1.0)], 1));
        assert_abs_diff_eq!(m.var_z, 0.0);

        let m = moments(&snap(&[(-2, 0.25), (0, 0.5), (2, 0.25)], 2));
        assert_abs_diff_eq!(m.var_z, 2.0);
        assert_abs_diff_eq!(m.var_abs_z, 1.0);
    }

    #[test]
    fn three_point_examples() {
        let d = snap(&[(3, 0.05), (4, 0.9), (5, 0.05)], 1);
        assert_abs_diff_eq!(three_point_variance(&d, 4, 1).unwrap(), 0.1, epsilon = 1e-15);

        let d = snap(&[(2, 0.05), (4, 0.9), (6, 0.05)], 2);
        assert_abs_diff_eq!(three_point_variance(&d, 4, 2).unwrap(), 0.4, epsilon = 1e-15);

        assert!(three_point_variance(&d, 6, 2).is_err());
    }

    #[test]
    fn three_point_error_bound() {
        // |estimate - exact| <= (Z(p+ - p-) + residual·R)² + residual·R²,
        // from var - tp = Σ_out p z'² - μ'² with z' centered on z0
        let cases: Vec<Vec<(i64, f64)>> = vec![
            vec![(2, 0.05), (4, 0.8), (6, 0.15)],
            vec![(0, 0.01), (2, 0.1), (4, 0.85), (6, 0.03), (8, 0.01)],
            vec![(2, 0.3), (4, 0.4), (6, 0.3)],
        ];
        for pts in cases {
            let d = snap(&pts, 2);
            let z0 = d.peak();
            let tp = three_point_variance(&d, z0, 2).unwrap();
            let exact = moments(&d).var_z;
            let p_lo = d.probability_at(z0 - 2).unwrap();
            let p_hi = d.probability_at(z0 + 2).unwrap();
            let residual = 1.0 - p_lo - p_hi - d.probability_at(z0).unwrap();
            let r = d
                .z_grid()
                .iter()
                .map(|&z| (z - z0).abs() as f64)
                .fold(0.0f64, f64::max);
            let bound = (2.0 * (p_hi - p_lo).abs() + residual * r).powi(2) + residual * r * r;
            assert!(
                (tp - exact).abs() <= bound + 1e-12,
                "3-point error {} above bound {}",
                (tp - exact).abs(),
                bound
            );
        }
    }

    #[test]
    fn peak_and_fwhm_formulas() {
        assert_abs_diff_eq!(peak_estimate(25, 1.0).unwrap(), 5.0);
        assert_abs_diff_eq!(peak_estimate(0, 2.0).unwrap(), 0.0);
        assert!(peak_estimate(4, 0.0).is_err());

        assert_abs_diff_eq!(fwhm_estimate(2.0 * std::f64::consts::LN_2).unwrap(), 1.0);
        let w = fwhm_estimate(0.1).unwrap();
        assert_abs_diff_eq!(fwhm_estimate(0.4).unwrap(), w / 2.0, epsilon = 1e-12);
        assert!(fwhm_estimate(-1.0).is_err());
    }

    #[test]
    fn measured_fwhm_gaussian() {
        // discrete Gaussian, sigma = 3, step 1: interpolated FWHM within a few
        // percent of 2.3548 sigma
        let sigma = 3.0;
        let pts: Vec<(i64, f64)> = (-20..=20).map(|z| {
            (z, (-((z as f64) * (z as f64)) / (2.0 * sigma * sigma)).exp())
        }).collect();
        let total: f64 = pts.iter().map(|&(_, p)| p).sum();
        let pts: Vec<(i64, f64)> = pts.into_iter().map(|(z, p)| (z, p / total)).collect();
        let d = snap(&pts, 1);
        let fwhm = measured_fwhm(&d).unwrap();
        assert_abs_diff_eq!(fwhm, 2.354_82 * sigma, epsilon = 0.05);

        // narrow distribution: FWHM refused below 3Z
        let d = snap(&[(3, 0.05), (4, 0.9), (5, 0.05)], 1);
        assert!(measured_fwhm(&d).is_none());
    }

    #[test]
    fn closed_form_matches_direct_evaluation() {
        let init = InitialDistribution::from_points(vec![(0, 0.25), (1, 0.25), (2, 0.5)]).unwrap();
        let snap = closed_form_snapshot(&init, 2, 0.3);
        // direct: p ∝ z^4 e^{-z² 0.3} p0
        let raw = [0.0, 0.25 * (-0.3f64).exp(), 16.0 * 0.5 * (-4.0 * 0.3f64).exp()];
        let total: f64 = raw.iter().sum();
        for (i, &r) in raw.iter().enumerate() {
            assert_abs_diff_eq!(snap.probabilities()[i], r / total, epsilon = 1e-14);
        }
        // m = 0 keeps z = 0 alive
        let snap = closed_form_snapshot(&init, 0, 1000.0);
        assert_abs_diff_eq!(snap.probabilities()[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn monotone_width_in_tau() {
        // closed-form variance of |z| is non-increasing in tau once unimodal
        let init = InitialDistribution::from_points(
            (0..=20).map(|z| (z, 1.0 / 21.0)).collect(),
        )
        .unwrap();
        let mut last = f64::INFINITY;
        for i in 1..60 {
            let tau = 0.02 * i as f64;
            let m = (16.0 * tau).round() as u64; // peak near z = 4
            if m == 0 {
                continue;
            }
            let v = moments(&closed_form_snapshot(&init, m, tau)).var_abs_z;
            if tau > 0.3 {
                assert!(v <= last + 1e-9, "variance grew from {last} to {v} at tau={tau}");
                last = v;
            }
        }
    }

    #[test]
    fn linear_fit_recovers_lines() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|&v| 2.5 - 4.0 * v).collect();
        let (slope, intercept, r2) = linear_fit(&x, &y);
        assert_abs_diff_eq!(slope, -4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(intercept, 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r2, 1.0, epsilon = 1e-12);

        // exactly constant data: perfect fit by convention
        let y = vec![0.5; 50];
        let (slope, _, r2) = linear_fit(&x, &y);
        assert_abs_diff_eq!(slope, 0.0);
        assert_abs_diff_eq!(r2, 1.0);
    }

    #[test]
    fn fit_regimes_synthetic() {
        // variance = 1/(4 tau): flat width·sqrt(tau) at 1/2
        let taus: Vec<f64> = (1..=400).map(|i| i as f64 * 0.01).collect();
        let var: Vec<f64> = taus.iter().map(|&t| 1.0 / (4.0 * t)).collect();
        let (sq, _) = fit_regimes(&taus, &var, 10.0, 2).unwrap();
        assert!(sq.slope.abs() < 1e-10);
        assert_abs_diff_eq!(sq.intercept, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(sq.goodness, 1.0, epsilon = 1e-9);

        // variance = 25 e^{-4 tau} passes through both windows; the
        // exponential fit recovers slope -4 exactly
        let var: Vec<f64> = taus.iter().map(|&t| 25.0 * (-4.0 * t).exp()).collect();
        let (_, ex) = fit_regimes(&taus, &var, 10.0, 2).unwrap();
        assert_abs_diff_eq!(ex.slope, -4.0, epsilon = 1e-9);
        assert_abs_diff_eq!(ex.goodness, 1.0, epsilon = 1e-9);

        // a record that never leaves the initial width: no regime windows
        let var = vec![100.0; taus.len()];
        assert!(fit_regimes(&taus, &var, 10.0, 2).is_err());
    }

    #[test]
    fn sqrt_window_finds_decade() {
        let taus: Vec<f64> = (1..=1000).map(|i| i as f64 * 0.005).collect();
        let var: Vec<f64> = taus.iter().map(|&t| 1.0 / (4.0 * t)).collect();
        let (lo, hi, dev) = sqrt_law_window(&taus, &var, 10.0, 0.15).unwrap();
        assert!(hi / lo >= 10.0, "window [{lo}, {hi}] shorter than a decade");
        assert!(dev <= 0.15);
    }

    #[test]
    fn chi_square_reference_values() {
        // oracle: Simpson integration of the chi-square density over the
        // tail [x, x + 400], where the integrand is smooth and the remainder
        // is below e^{-200}
        let simpson_sf = |x: f64, k: f64| -> f64 {
            let pdf = |t: f64| {
                ((k / 2.0 - 1.0) * t.ln() - t / 2.0 - (k / 2.0) * 2.0f64.ln() - ln_gamma(k / 2.0))
                    .exp()
            };
            let n = 400_000;
            let h = 400.0 / n as f64;
            let mut acc = pdf(x) + pdf(x + 400.0);
            for i in 1..n {
                let t = x + i as f64 * h;
                acc += pdf(t) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            acc * h / 3.0
        };
        for (x, k) in [(11.0705, 5.0), (16.27, 3.0), (3.84, 1.0), (30.0, 10.0)] {
            let got = chi_square_sf(x, k);
            let want = simpson_sf(x, k);
            assert_abs_diff_eq!(got, want, epsilon = 1e-7);
        }
        // classical critical point: P(chi2_5 > 11.0705) = 0.05
        assert_abs_diff_eq!(chi_square_sf(11.0705, 5.0), 0.05, epsilon = 1e-4);
    }

    #[test]
    fn ln_gamma_known_values() {
        assert_abs_diff_eq!(ln_gamma(1.0), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ln_gamma(2.0), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ln_gamma(5.0), 24.0f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(
            ln_gamma(0.5),
            std::f64::consts::PI.sqrt().ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn bin_merging() {
        let observed = [1u64, 30, 500, 30, 1];
        let expected = [0.001, 0.05, 0.9, 0.048, 0.001];
        let (obs, exp) = merge_sparse_bins(&observed, &expected, 562, 5.0);
        assert_eq!(obs, vec![31, 500, 31]);
        assert_abs_diff_eq!(exp.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert_eq!(exp.len(), 3);
    }

    #[test]
    fn fold_combines_signed_mass() {
        let d = snap(&[(-2, 0.25), (0, 0.5), (2, 0.25)], 2);
        let f = d.fold();
        assert_eq!(f.z_grid(), &[0, 2]);
        assert_abs_diff_eq!(f.probabilities()[0], 0.5);
        assert_abs_diff_eq!(f.probabilities()[1], 0.5);
    }
}
