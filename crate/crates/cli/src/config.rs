//! Flat key=value configuration with `[physical]` and `[unitary]` sections.
//!
//! Field names match the run configuration exactly; unknown or duplicate keys
//! are hard errors so a typo cannot silently change the physics.

use std::collections::BTreeSet;
use std::path::PathBuf;

use num_complex::Complex64;
use qndsim_core::dynamics::CavityParams;
use qndsim_core::lattice::{InitialDistribution, LatticeConfig, ModeProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    Maximum,
    Minimum,
}

impl Geometry {
    pub fn modes(&self, sites: usize) -> ModeProfile {
        match self {
            Geometry::Maximum => ModeProfile::diffraction_maximum(sites),
            Geometry::Minimum => ModeProfile::diffraction_minimum(sites),
        }
    }

    /// Grid step of the statistical variable: 1 atom at the maximum, 2 at the
    /// minimum.
    pub fn step(&self) -> u8 {
        match self {
            Geometry::Maximum => 1,
            Geometry::Minimum => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Reduced,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    Superfluid,
    Mott,
    Delta(i64),
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalBlock {
    pub kappa: f64,
    pub delta_p: f64,
    pub delta_a: f64,
    pub g0: f64,
    pub g1: f64,
    pub a0: Complex64,
    pub eta: Complex64,
    pub alpha0: Complex64,
}

impl PhysicalBlock {
    pub fn cavity_params(&self) -> Result<CavityParams, String> {
        CavityParams::new(
            self.kappa,
            self.delta_p,
            self.delta_a,
            self.g0,
            self.g1,
            self.a0,
            self.eta,
            self.alpha0,
        )
        .map_err(|e| format!("[physical] block: {e}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryBlock {
    pub delta_p: f64,
    pub c: f64,
    pub mean_nk: f64,
    pub truncation: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub geometry: Option<Geometry>,
    pub atoms: Option<u32>,
    pub sites: Option<usize>,
    pub illuminated: Option<usize>,
    pub initial: Option<InitialSpec>,
    pub tau_max: Option<f64>,
    pub record_interval: Option<f64>,
    pub n_traj: usize,
    pub seed: u64,
    pub engine: Engine,
    pub output_dir: PathBuf,
    pub physical: Option<PhysicalBlock>,
    pub unitary: Option<UnitaryBlock>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut section = String::new();
        let mut seen: BTreeSet<String> = BTreeSet::new();

        let mut geometry = None;
        let mut atoms = None;
        let mut sites = None;
        let mut illuminated = None;
        let mut initial = None;
        let mut tau_max = None;
        let mut record_interval = None;
        let mut n_traj = 1usize;
        let mut seed = 0u64;
        let mut engine = Engine::Reduced;
        let mut output_dir = PathBuf::from(".");

        let mut phys: Vec<(String, String, usize)> = Vec::new();
        let mut unit: Vec<(String, String, usize)> = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') {
                    return Err(format!("line {}: malformed section header", lineno + 1));
                }
                section = line[1..line.len() - 1].trim().to_string();
                if section != "physical" && section != "unitary" {
                    return Err(format!("line {}: unknown section [{section}]", lineno + 1));
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            let qualified = format!("{section}.{key}");
            if !seen.insert(qualified.clone()) {
                return Err(format!("line {}: duplicate key {key:?}", lineno + 1));
            }
            match section.as_str() {
                "" => match key.as_str() {
                    "geometry" => {
                        geometry = Some(match value.as_str() {
                            "maximum" => Geometry::Maximum,
                            "minimum" => Geometry::Minimum,
                            other => {
                                return Err(format!(
                                    "line {}: geometry must be maximum or minimum, got {other:?}",
                                    lineno + 1
                                ))
                            }
                        })
                    }
                    "N" => atoms = Some(parse_num::<u32>(&key, &value, lineno)?),
                    "M" => sites = Some(parse_num::<usize>(&key, &value, lineno)?),
                    "K" => illuminated = Some(parse_num::<usize>(&key, &value, lineno)?),
                    "initial" => initial = Some(parse_initial(&value, lineno)?),
                    "tau_max" => tau_max = Some(parse_num::<f64>(&key, &value, lineno)?),
                    "record_interval" => {
                        record_interval = Some(parse_num::<f64>(&key, &value, lineno)?)
                    }
                    "n_traj" => n_traj = parse_num::<usize>(&key, &value, lineno)?,
                    "seed" => seed = parse_num::<u64>(&key, &value, lineno)?,
                    "engine" => {
                        engine = match value.as_str() {
                            "reduced" => Engine::Reduced,
                            "full" => Engine::Full,
                            other => {
                                return Err(format!(
                                    "line {}: engine must be reduced or full, got {other:?}",
                                    lineno + 1
                                ))
                            }
                        }
                    }
                    "output_dir" => output_dir = PathBuf::from(&value),
                    other => return Err(format!("line {}: unknown key {other:?}", lineno + 1)),
                },
                "physical" => phys.push((key, value, lineno)),
                "unitary" => unit.push((key, value, lineno)),
                _ => unreachable!(),
            }
        }

        let physical = if phys.is_empty() { None } else { Some(parse_physical(&phys)?) };
        let unitary = if unit.is_empty() { None } else { Some(parse_unitary(&unit)?) };

        Ok(RunConfig {
            geometry,
            atoms,
            sites,
            illuminated,
            initial,
            tau_max,
            record_interval,
            n_traj,
            seed,
            engine,
            output_dir,
            physical,
            unitary,
        })
    }

    fn require<T: Copy>(field: Option<T>, name: &str) -> Result<T, String> {
        field.ok_or_else(|| format!("missing required key {name:?}"))
    }

    pub fn geometry(&self) -> Result<Geometry, String> {
        Self::require(self.geometry, "geometry")
    }

    pub fn tau_max(&self) -> Result<f64, String> {
        Self::require(self.tau_max, "tau_max")
    }

    pub fn record_interval(&self) -> Result<f64, String> {
        Self::require(self.record_interval, "record_interval")
    }

    /// Lattice geometry with the cross-field checks: `1 <= K <= M`, positive
    /// `N`, and `K = M` forced at the diffraction minimum.
    pub fn lattice(&self) -> Result<LatticeConfig, String> {
        let geometry = self.geometry()?;
        let atoms = Self::require(self.atoms, "N")?;
        let sites = Self::require(self.sites, "M")?;
        let illuminated = Self::require(self.illuminated, "K")?;
        if geometry == Geometry::Minimum && illuminated != sites {
            return Err(format!(
                "minimum geometry forces K = M, got K={illuminated}, M={sites}"
            ));
        }
        LatticeConfig::new(sites, illuminated, atoms).map_err(|e| e.to_string())
    }

    pub fn initial(&self) -> Result<&InitialSpec, String> {
        self.initial.as_ref().ok_or_else(|| "missing required key \"initial\"".to_string())
    }

    /// Resolves the initial atom-number distribution for the reduced engine.
    pub fn initial_distribution(&self) -> Result<InitialDistribution, String> {
        let cfg = self.lattice()?;
        let geometry = self.geometry()?;
        match self.initial()? {
            InitialSpec::Superfluid => match geometry {
                Geometry::Maximum => Ok(InitialDistribution::superfluid_maximum(&cfg)),
                Geometry::Minimum => {
                    InitialDistribution::superfluid_minimum(&cfg).map_err(|e| e.to_string())
                }
            },
            InitialSpec::Delta(z) => match geometry {
                Geometry::Maximum => {
                    InitialDistribution::delta_maximum(&cfg, *z).map_err(|e| e.to_string())
                }
                Geometry::Minimum => {
                    InitialDistribution::delta_minimum(&cfg, *z).map_err(|e| e.to_string())
                }
            },
            InitialSpec::File(path) => {
                let dist = InitialDistribution::from_file(path).map_err(|e| e.to_string())?;
                if dist.step() != geometry.step() {
                    return Err(format!(
                        "custom distribution step {} does not match the {} geometry step {}",
                        dist.step(),
                        match geometry {
                            Geometry::Maximum => "maximum",
                            Geometry::Minimum => "minimum",
                        },
                        geometry.step()
                    ));
                }
                Ok(dist)
            }
            InitialSpec::Mott => {
                Err("initial = mott is a full-engine preset; use engine = full".to_string())
            }
        }
    }

    pub fn cavity_params(&self) -> Result<CavityParams, String> {
        self.physical
            .as_ref()
            .ok_or_else(|| "this run needs a [physical] section".to_string())?
            .cavity_params()
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str, lineno: usize) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| format!("line {}: bad value for {key}: {e}", lineno + 1))
}

fn parse_initial(value: &str, lineno: usize) -> Result<InitialSpec, String> {
    if value == "superfluid" {
        return Ok(InitialSpec::Superfluid);
    }
    if value == "mott" {
        return Ok(InitialSpec::Mott);
    }
    if let Some(inner) = value.strip_prefix("delta(").and_then(|s| s.strip_suffix(')')) {
        let z = inner
            .trim()
            .parse::<i64>()
            .map_err(|e| format!("line {}: bad delta target: {e}", lineno + 1))?;
        return Ok(InitialSpec::Delta(z));
    }
    Ok(InitialSpec::File(PathBuf::from(value)))
}

fn parse_physical(entries: &[(String, String, usize)]) -> Result<PhysicalBlock, String> {
    let mut kappa = None;
    let mut delta_p = None;
    let mut delta_a = None;
    let mut g0 = None;
    let mut g1 = None;
    let mut a0 = None;
    let mut eta = None;
    let mut alpha0 = None;
    for (key, value, lineno) in entries {
        match key.as_str() {
            "kappa" => kappa = Some(parse_num::<f64>(key, value, *lineno)?),
            "delta_p" => delta_p = Some(parse_num::<f64>(key, value, *lineno)?),
            "delta_a" => delta_a = Some(parse_num::<f64>(key, value, *lineno)?),
            "g0" => g0 = Some(parse_num::<f64>(key, value, *lineno)?),
            "g1" => g1 = Some(parse_num::<f64>(key, value, *lineno)?),
            "a0" => a0 = Some(parse_complex(value).map_err(|e| at_line(*lineno, &e))?),
            "eta" => eta = Some(parse_complex(value).map_err(|e| at_line(*lineno, &e))?),
            "alpha0" => alpha0 = Some(parse_complex(value).map_err(|e| at_line(*lineno, &e))?),
            other => {
                return Err(format!("line {}: unknown [physical] key {other:?}", lineno + 1))
            }
        }
    }
    let need = |v: Option<f64>, name: &str| {
        v.ok_or_else(|| format!("[physical] section is missing {name:?}"))
    };
    Ok(PhysicalBlock {
        kappa: need(kappa, "kappa")?,
        delta_p: need(delta_p, "delta_p")?,
        delta_a: need(delta_a, "delta_a")?,
        g0: need(g0, "g0")?,
        g1: need(g1, "g1")?,
        a0: a0.ok_or("[physical] section is missing \"a0\"")?,
        eta: eta.unwrap_or(Complex64::new(0.0, 0.0)),
        alpha0: alpha0.unwrap_or(Complex64::new(0.0, 0.0)),
    })
}

fn parse_unitary(entries: &[(String, String, usize)]) -> Result<UnitaryBlock, String> {
    let mut delta_p = None;
    let mut c = None;
    let mut mean_nk = None;
    let mut truncation = 1e-12;
    let mut samples = 2000usize;
    for (key, value, lineno) in entries {
        match key.as_str() {
            "delta_p" => delta_p = Some(parse_num::<f64>(key, value, *lineno)?),
            "c" => c = Some(parse_num::<f64>(key, value, *lineno)?),
            "mean_nk" => mean_nk = Some(parse_num::<f64>(key, value, *lineno)?),
            "truncation" => truncation = parse_num::<f64>(key, value, *lineno)?,
            "samples" => samples = parse_num::<usize>(key, value, *lineno)?,
            other => return Err(format!("line {}: unknown [unitary] key {other:?}", lineno + 1)),
        }
    }
    Ok(UnitaryBlock {
        delta_p: delta_p.ok_or("[unitary] section is missing \"delta_p\"")?,
        c: c.ok_or("[unitary] section is missing \"c\"")?,
        mean_nk: mean_nk.ok_or("[unitary] section is missing \"mean_nk\"")?,
        truncation,
        samples,
    })
}

fn at_line(lineno: usize, msg: &str) -> String {
    format!("line {}: {msg}", lineno + 1)
}

/// Parses `a`, `bi`, or `a±bi` (also accepts `i`/`-i`).
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let s = s.trim().replace(' ', "");
    if s.is_empty() {
        return Err("empty complex value".into());
    }
    if let Some(im) = s.strip_suffix('i') {
        // find the split between the real part and the imaginary coefficient
        let bytes = im.as_bytes();
        for pos in (1..im.len()).rev() {
            if (bytes[pos] == b'+' || bytes[pos] == b'-')
                && bytes[pos - 1] != b'e'
                && bytes[pos - 1] != b'E'
            {
                let re: f64 =
                    im[..pos].parse().map_err(|e| format!("bad complex value {s:?}: {e}"))?;
                let imag = parse_imag_coeff(&im[pos..])?;
                return Ok(Complex64::new(re, imag));
            }
        }
        return Ok(Complex64::new(0.0, parse_imag_coeff(im)?));
    }
    let re: f64 = s.parse().map_err(|e| format!("bad complex value {s:?}: {e}"))?;
    Ok(Complex64::new(re, 0.0))
}

fn parse_imag_coeff(s: &str) -> Result<f64, String> {
    match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        other => other.parse().map_err(|e| format!("bad imaginary part {other:?}: {e}")),
    }
}
