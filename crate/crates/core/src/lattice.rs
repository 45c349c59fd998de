//! Lattice geometry, light-mode profiles, Fock configurations and initial
//! atom-number distributions.
//!
//! The statistical variable throughout is `z`: the atom number at the
//! illuminated sites (diffraction maximum, grid step 1) or the odd–even
//! site-population difference (diffraction minimum, grid step 2).

use std::fmt;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use thiserror::Error;

/// Default cap on the number of Fock configurations the full engine will
/// enumerate.
pub const DEFAULT_BASIS_CAP: u128 = 1_000_000;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("invalid lattice geometry: {0}")]
    InvalidGeometry(String),
    #[error("basis too large for full engine: {size} configurations exceed cap {cap}")]
    BasisTooLarge { size: u128, cap: u128 },
    #[error("mott preset needs the atom number divisible by the site count (N={atoms}, M={sites})")]
    MottIncommensurate { atoms: u32, sites: usize },
    #[error("delta preset point z*={0} is off the distribution grid")]
    DeltaOffGrid(i64),
    #[error("invalid distribution: {0}")]
    BadDistribution(String),
    #[error("cannot read distribution file: {0}")]
    Io(#[from] std::io::Error),
}

/// Site count `M`, illuminated count `K` and total atom number `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeConfig {
    sites: usize,
    illuminated: usize,
    atoms: u32,
}

impl LatticeConfig {
    pub fn new(sites: usize, illuminated: usize, atoms: u32) -> Result<Self, LatticeError> {
        if sites == 0 {
            return Err(LatticeError::InvalidGeometry("site count must be positive".into()));
        }
        if illuminated == 0 || illuminated > sites {
            return Err(LatticeError::InvalidGeometry(format!(
                "illuminated count must satisfy 1 <= K <= M (K={illuminated}, M={sites})"
            )));
        }
        if atoms == 0 {
            return Err(LatticeError::InvalidGeometry("atom number must be positive".into()));
        }
        Ok(Self { sites, illuminated, atoms })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn illuminated(&self) -> usize {
        self.illuminated
    }

    pub fn atoms(&self) -> u32 {
        self.atoms
    }

    /// Number of compositions of `N` atoms over `M` sites, `C(N+M-1, M-1)`.
    /// `None` on overflow (certainly above any sensible cap).
    pub fn basis_size(&self) -> Option<u128> {
        binomial_u128(self.atoms as u128 + self.sites as u128 - 1, self.sites as u128 - 1)
    }
}

fn binomial_u128(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)?;
        acc /= i + 1;
    }
    Some(acc)
}

/// Which of the two light modes a coupling index refers to: the probe (`u_0`)
/// or the cavity mode (`u_1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LightMode {
    Probe,
    Cavity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModePreset {
    DiffractionMaximum,
    DiffractionMinimum,
    Custom,
}

/// Per-site values of the probe and cavity mode functions.
#[derive(Debug, Clone)]
pub struct ModeProfile {
    u0: Vec<Complex64>,
    u1: Vec<Complex64>,
    preset: ModePreset,
}

impl ModeProfile {
    /// Diffraction maximum: `u0* u1 = 1` on every site.
    pub fn diffraction_maximum(sites: usize) -> Self {
        let one = Complex64::new(1.0, 0.0);
        Self {
            u0: vec![one; sites],
            u1: vec![one; sites],
            preset: ModePreset::DiffractionMaximum,
        }
    }

    /// Diffraction minimum: `u0* u1` alternates sign site to site. Site 1
    /// carries `+1`, so the coupling sums to `N_odd - N_even`.
    pub fn diffraction_minimum(sites: usize) -> Self {
        let u0 = vec![Complex64::new(1.0, 0.0); sites];
        let u1 = (0..sites)
            .map(|j| Complex64::new(if j % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
            .collect();
        Self { u0, u1, preset: ModePreset::DiffractionMinimum }
    }

    pub fn custom(u0: Vec<Complex64>, u1: Vec<Complex64>) -> Result<Self, LatticeError> {
        if u0.len() != u1.len() || u0.is_empty() {
            return Err(LatticeError::InvalidGeometry(
                "mode profiles must be equal-length, non-empty vectors".into(),
            ));
        }
        Ok(Self { u0, u1, preset: ModePreset::Custom })
    }

    pub fn preset(&self) -> ModePreset {
        self.preset
    }

    pub fn site_count(&self) -> usize {
        self.u0.len()
    }

    pub fn values(&self, mode: LightMode) -> &[Complex64] {
        match mode {
            LightMode::Probe => &self.u0,
            LightMode::Cavity => &self.u1,
        }
    }
}

/// Occupation numbers of one classical configuration of `N` atoms on `M`
/// sites.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FockConfiguration {
    occupations: Vec<u32>,
}

impl FockConfiguration {
    pub fn new(occupations: Vec<u32>) -> Self {
        Self { occupations }
    }

    pub fn occupations(&self) -> &[u32] {
        &self.occupations
    }

    pub fn total_atoms(&self) -> u32 {
        self.occupations.iter().sum()
    }
}

impl fmt::Display for FockConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, q) in self.occupations.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{q}")?;
        }
        write!(f, ")")
    }
}

/// Every composition of `N` atoms into `M` non-negative site occupations, in
/// lexicographic order, using [`DEFAULT_BASIS_CAP`].
pub fn enumerate_configurations(
    cfg: &LatticeConfig,
) -> Result<Vec<FockConfiguration>, LatticeError> {
    enumerate_configurations_capped(cfg, DEFAULT_BASIS_CAP)
}

/// Like [`enumerate_configurations`] with an explicit cap.
pub fn enumerate_configurations_capped(
    cfg: &LatticeConfig,
    cap: u128,
) -> Result<Vec<FockConfiguration>, LatticeError> {
    let size = cfg.basis_size().unwrap_or(u128::MAX);
    if size > cap {
        return Err(LatticeError::BasisTooLarge { size, cap });
    }
    let mut out = Vec::with_capacity(size as usize);
    let mut buf = vec![0u32; cfg.sites()];
    fill_compositions(cfg.atoms(), 0, &mut buf, &mut out);
    Ok(out)
}

fn fill_compositions(
    remaining: u32,
    site: usize,
    buf: &mut Vec<u32>,
    out: &mut Vec<FockConfiguration>,
) {
    if site == buf.len() - 1 {
        buf[site] = remaining;
        out.push(FockConfiguration::new(buf.clone()));
        return;
    }
    for q in 0..=remaining {
        buf[site] = q;
        fill_compositions(remaining - q, site + 1, buf, out);
    }
}

/// Coupling coefficient `D_lm` for one configuration: the sum over the first
/// `illuminated` sites of `u_l*(r_j) u_m(r_j) q_j`.
pub fn coupling_coefficient(
    q: &FockConfiguration,
    modes: &ModeProfile,
    l: LightMode,
    m: LightMode,
    illuminated: usize,
) -> Complex64 {
    let ul = modes.values(l);
    let um = modes.values(m);
    let k = illuminated.min(q.occupations().len()).min(ul.len());
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..k {
        acc += ul[j].conj() * um[j] * q.occupations()[j] as f64;
    }
    acc
}

/// `D_10`: the probe-to-cavity scattering coefficient of a configuration.
pub fn d10(q: &FockConfiguration, modes: &ModeProfile, illuminated: usize) -> Complex64 {
    coupling_coefficient(q, modes, LightMode::Cavity, LightMode::Probe, illuminated)
}

/// `D_11`: the dispersive cavity frequency-shift coefficient.
pub fn d11(q: &FockConfiguration, modes: &ModeProfile, illuminated: usize) -> Complex64 {
    coupling_coefficient(q, modes, LightMode::Cavity, LightMode::Cavity, illuminated)
}

/// Discrete initial distribution `p0(z)` on an integer grid of uniform step
/// 1 or 2.
#[derive(Debug, Clone)]
pub struct InitialDistribution {
    z_grid: Vec<i64>,
    p0: Vec<f64>,
    step: u8,
}

impl InitialDistribution {
    /// Validates ordering, uniform step in `{1, 2}`, non-negativity and unit
    /// normalization (within 1e-12).
    pub fn from_points(mut points: Vec<(i64, f64)>) -> Result<Self, LatticeError> {
        if points.is_empty() {
            return Err(LatticeError::BadDistribution("empty distribution".into()));
        }
        points.sort_by_key(|&(z, _)| z);
        let step = if points.len() == 1 {
            1
        } else {
            let s = points[1].0 - points[0].0;
            if s != 1 && s != 2 {
                return Err(LatticeError::BadDistribution(format!(
                    "grid step must be 1 or 2 atoms, got {s}"
                )));
            }
            for w in points.windows(2) {
                if w[1].0 - w[0].0 != s {
                    return Err(LatticeError::BadDistribution("grid step is not uniform".into()));
                }
            }
            s as u8
        };
        let mut total = 0.0;
        for &(z, p) in &points {
            if p.is_nan() || p < 0.0 {
                return Err(LatticeError::BadDistribution(format!(
                    "negative probability {p} at z={z}"
                )));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(LatticeError::BadDistribution(format!(
                "probabilities sum to {total}, not 1 within 1e-12"
            )));
        }
        Ok(Self {
            z_grid: points.iter().map(|&(z, _)| z).collect(),
            p0: points.iter().map(|&(_, p)| p).collect(),
            step,
        })
    }

    /// Superfluid state observed at a diffraction maximum: the illuminated
    /// atom number is `Binomial(N, K/M)` on the grid `{0..N}`, step 1.
    pub fn superfluid_maximum(cfg: &LatticeConfig) -> Self {
        let n = cfg.atoms() as usize;
        let p = cfg.illuminated() as f64 / cfg.sites() as f64;
        let pmf = binomial_pmf(n, p);
        let points = (0..=n).map(|k| (k as i64, pmf[k])).collect();
        Self::from_points(points).expect("binomial grid is valid by construction")
    }

    /// Superfluid state observed at a diffraction minimum (`K = M`): the
    /// odd–even difference `z = 2k - N` with `k ~ Binomial(N, 1/2)`, on the
    /// grid `{-N..N}`, step 2.
    pub fn superfluid_minimum(cfg: &LatticeConfig) -> Result<Self, LatticeError> {
        if cfg.illuminated() != cfg.sites() {
            return Err(LatticeError::InvalidGeometry(
                "diffraction minimum requires all sites illuminated (K = M)".into(),
            ));
        }
        let n = cfg.atoms() as usize;
        let pmf = binomial_pmf(n, 0.5);
        let points = (0..=n).map(|k| (2 * k as i64 - n as i64, pmf[k])).collect();
        Self::from_points(points)
    }

    /// Unit mass at `z_star` on the full maximum-geometry grid `{0..N}`.
    pub fn delta_maximum(cfg: &LatticeConfig, z_star: i64) -> Result<Self, LatticeError> {
        if z_star < 0 || z_star > cfg.atoms() as i64 {
            return Err(LatticeError::DeltaOffGrid(z_star));
        }
        let points =
            (0..=cfg.atoms() as i64).map(|z| (z, if z == z_star { 1.0 } else { 0.0 })).collect();
        Self::from_points(points)
    }

    /// Unit mass at `z_star` on the full minimum-geometry grid
    /// `{-N..N, step 2}`; `z_star` must share the parity of `N`.
    pub fn delta_minimum(cfg: &LatticeConfig, z_star: i64) -> Result<Self, LatticeError> {
        let n = cfg.atoms() as i64;
        if z_star.abs() > n || (z_star - n) % 2 != 0 {
            return Err(LatticeError::DeltaOffGrid(z_star));
        }
        let points = (-n..=n)
            .step_by(2)
            .map(|z| (z, if z == z_star { 1.0 } else { 0.0 }))
            .collect();
        Self::from_points(points)
    }

    /// Poissonian atom-number statistics truncated where the probability mass
    /// drops below `cutoff`, then renormalized. Step 1.
    pub fn poissonian(mean: f64, cutoff: f64) -> Result<Self, LatticeError> {
        if mean.is_nan() || mean <= 0.0 {
            return Err(LatticeError::BadDistribution("poissonian mean must be positive".into()));
        }
        // log pmf recurrence, then keep the contiguous block above the cutoff
        let mut log_pmf = Vec::new();
        let mut lp = -mean;
        let mut k = 0usize;
        loop {
            log_pmf.push(lp);
            if k as f64 > mean && lp < cutoff.ln() - 30.0 {
                break;
            }
            lp += mean.ln() - ((k + 1) as f64).ln();
            k += 1;
            if k > 10_000_000 {
                return Err(LatticeError::BadDistribution("poissonian mean too large".into()));
            }
        }
        let lc = cutoff.ln();
        let kept: Vec<(i64, f64)> = log_pmf
            .iter()
            .enumerate()
            .filter(|(_, &l)| l >= lc)
            .map(|(k, &l)| (k as i64, l.exp()))
            .collect();
        if kept.is_empty() {
            return Err(LatticeError::BadDistribution("truncation removed all mass".into()));
        }
        let total: f64 = kept.iter().map(|&(_, p)| p).sum();
        Self::from_points(kept.into_iter().map(|(z, p)| (z, p / total)).collect())
    }

    /// Loads a two-column `z p0` text file; `#` starts a comment.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, LatticeError> {
        let text = fs::read_to_string(path)?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self, LatticeError> {
        let mut points = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split_whitespace();
            let (za, pa) = (cols.next(), cols.next());
            if cols.next().is_some() {
                return Err(LatticeError::BadDistribution(format!(
                    "line {}: expected two columns",
                    lineno + 1
                )));
            }
            match (za, pa) {
                (Some(zs), Some(ps)) => {
                    let z = zs.parse::<i64>().map_err(|_| {
                        LatticeError::BadDistribution(format!(
                            "line {}: bad z value {zs:?}",
                            lineno + 1
                        ))
                    })?;
                    let p = ps.parse::<f64>().map_err(|_| {
                        LatticeError::BadDistribution(format!(
                            "line {}: bad probability {ps:?}",
                            lineno + 1
                        ))
                    })?;
                    points.push((z, p));
                }
                _ => {
                    return Err(LatticeError::BadDistribution(format!(
                        "line {}: expected two columns",
                        lineno + 1
                    )))
                }
            }
        }
        Self::from_points(points)
    }

    pub fn z_grid(&self) -> &[i64] {
        &self.z_grid
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p0
    }

    pub fn step(&self) -> u8 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.z_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z_grid.is_empty()
    }
}

/// `Binomial(n, p)` probabilities for k = 0..=n, computed in log space.
fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    assert!((0.0..=1.0).contains(&p));
    if p == 0.0 {
        let mut v = vec![0.0; n + 1];
        v[0] = 1.0;
        return v;
    }
    if p == 1.0 {
        let mut v = vec![0.0; n + 1];
        v[n] = 1.0;
        return v;
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut log_pmf = Vec::with_capacity(n + 1);
    let mut lbin = 0.0; // ln C(n, k)
    for k in 0..=n {
        log_pmf.push(lbin + k as f64 * lp + (n - k) as f64 * lq);
        lbin += ((n - k) as f64).ln() - ((k + 1) as f64).ln();
    }
    let max = log_pmf.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut pmf: Vec<f64> = log_pmf.iter().map(|&l| (l - max).exp()).collect();
    if p == 0.5 {
        // bit-exact symmetry; rounding in the log recurrence must not leave
        // an ulp-level skew that the engine would then preserve forever
        for k in 0..=n / 2 {
            pmf[n - k] = pmf[k];
        }
    }
    let total: f64 = pmf.iter().sum();
    for v in pmf.iter_mut() {
        *v /= total;
    }
    pmf
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplitudePreset {
    Superfluid,
    Mott,
}

/// Initial amplitude for every configuration in `configs` (the order of
/// [`enumerate_configurations`]).
///
/// Superfluid with fixed total atom number carries the multinomial weights
/// `sqrt(N!/(q1!..qM!))/M^(N/2)`; the Mott preset puts unit amplitude on the
/// uniform configuration and requires `M | N`.
pub fn initial_amplitudes(
    preset: AmplitudePreset,
    cfg: &LatticeConfig,
    configs: &[FockConfiguration],
) -> Result<Vec<f64>, LatticeError> {
    match preset {
        AmplitudePreset::Superfluid => {
            let n = cfg.atoms() as usize;
            let m = cfg.sites() as f64;
            let lnf = ln_factorials(n);
            let amps = configs
                .iter()
                .map(|q| {
                    let sum_lnq: f64 =
                        q.occupations().iter().map(|&qi| lnf[qi as usize]).sum();
                    (0.5 * (lnf[n] - sum_lnq - n as f64 * m.ln())).exp()
                })
                .collect();
            Ok(amps)
        }
        AmplitudePreset::Mott => {
            if !(cfg.atoms() as usize).is_multiple_of(cfg.sites()) {
                return Err(LatticeError::MottIncommensurate {
                    atoms: cfg.atoms(),
                    sites: cfg.sites(),
                });
            }
            let fill = cfg.atoms() / cfg.sites() as u32;
            Ok(configs
                .iter()
                .map(|q| {
                    if q.occupations().iter().all(|&qi| qi == fill) {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect())
        }
    }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut lnf = Vec::with_capacity(n + 1);
    lnf.push(0.0);
    for i in 1..=n {
        lnf.push(lnf[i - 1] + (i as f64).ln());
    }
    lnf
}

/// Marginal of per-configuration weights over the coupling coefficient
/// `D_10`, sorted by its (integer) value. Weights need not be normalized.
///
/// Errors if any `D_10` is not an integer to within 1e-9, which only happens
/// for custom mode profiles.
pub fn coupling_marginal(
    configs: &[FockConfiguration],
    weights: &[f64],
    modes: &ModeProfile,
    illuminated: usize,
) -> Result<Vec<(i64, f64)>, LatticeError> {
    assert_eq!(configs.len(), weights.len());
    let mut acc = std::collections::BTreeMap::new();
    for (q, &w) in configs.iter().zip(weights) {
        let d = d10(q, modes, illuminated);
        if d.im.abs() > 1e-9 || (d.re - d.re.round()).abs() > 1e-9 {
            return Err(LatticeError::BadDistribution(format!(
                "coupling coefficient {d} is not an integer; marginal undefined"
            )));
        }
        *acc.entry(d.re.round() as i64).or_insert(0.0) += w;
    }
    Ok(acc.into_iter().collect())
}
