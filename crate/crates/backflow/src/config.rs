//! Flat `key = value` experiment files.
//!
//! ```text
//! # backflow around a delta, left to right
//! experiment = position_scan
//! potential = delta
//! strength = 1
//! sigma = 0.1
//! x0_min = -5
//! x0_max = 5
//! x0_step = 0.25
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use backflow_core::kernels::QuadratureSpec;
use backflow_core::scattering::DEFAULT_TOL;
use backflow_core::smearing::WINDOW_SIGMAS;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Point,
    PositionScan,
    AmplitudeScan,
    Eigenfunction,
    Frames,
    Temporal,
}

impl Experiment {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "point" => Self::Point,
            "position_scan" => Self::PositionScan,
            "amplitude_scan" => Self::AmplitudeScan,
            "eigenfunction" => Self::Eigenfunction,
            "frames" => Self::Frames,
            "temporal" => Self::Temporal,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Point => "point",
            Self::PositionScan => "position_scan",
            Self::AmplitudeScan => "amplitude_scan",
            Self::Eigenfunction => "eigenfunction",
            Self::Frames => "frames",
            Self::Temporal => "temporal",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Potential as written in a config; `Tabulated` is loaded from a file.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Zero,
    Delta { strength: f64 },
    Rectangular { strength: f64 },
    PoeschlTeller { mu: f64 },
    Tabulated { path: PathBuf },
}

impl ModelSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Delta { .. } => "delta",
            Self::Rectangular { .. } => "rectangular",
            Self::PoeschlTeller { .. } => "poeschl_teller",
            Self::Tabulated { .. } => "tabulated",
        }
    }

    /// The same model with its amplitude replaced.
    pub fn with_amplitude(&self, a: f64) -> Option<Self> {
        match self {
            Self::Delta { .. } => Some(Self::Delta { strength: a }),
            Self::Rectangular { .. } => Some(Self::Rectangular { strength: a }),
            Self::PoeschlTeller { .. } => Some(Self::PoeschlTeller { mu: a }),
            _ => None,
        }
    }
}

/// Kernel selection for each solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelPolicy {
    /// Closed form when `f` clears a compact support, quadrature otherwise.
    Auto,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl ScanRange {
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.min + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub model: ModelSpec,
    pub sigma: f64,
    pub x0: f64,
    pub x0_scan: Option<ScanRange>,
    pub amplitude_min: f64,
    pub amplitude_max: f64,
    pub amplitude_points: usize,
    pub amplitude_x0: Vec<f64>,
    pub n: usize,
    pub p_max: f64,
    pub quadrature: QuadratureSpec,
    pub kernel: KernelPolicy,
    pub ode_tol: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub x_step: f64,
    pub times: Vec<f64>,
    pub time_windows: Vec<f64>,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

struct Entry {
    line: usize,
    value: String,
    used: bool,
}

struct Entries(BTreeMap<String, Entry>);

impl Entries {
    fn raw(&mut self, key: &str) -> Option<(usize, String)> {
        self.0.get_mut(key).map(|e| {
            e.used = true;
            (e.line, e.value.clone())
        })
    }

    fn line_of(&self, key: &str) -> Option<usize> {
        self.0.get(key).map(|e| e.line)
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|_| ConfigError::Line {
                line,
                message: format!("cannot parse `{v}` as a value for `{key}`"),
            }),
        }
    }

    fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map(Some)
                .map_err(|_| ConfigError::Line {
                    line,
                    message: format!("`{key}` must be a comma-separated list of numbers, got `{v}`"),
                }),
        }
    }

    fn require<T: std::str::FromStr>(&mut self, key: &str, what: &str) -> Result<T, ConfigError> {
        self.parse(key)?
            .ok_or_else(|| ConfigError::Invalid(format!("missing `{key}` ({what})")))
    }

    fn check(&self, ok: bool, key: &str, message: impl Into<String>) -> Result<(), ConfigError> {
        if ok {
            return Ok(());
        }
        let message = message.into();
        Err(match self.line_of(key) {
            Some(line) => ConfigError::Line { line, message },
            None => ConfigError::Invalid(message),
        })
    }
}

fn tokenize(text: &str) -> Result<Entries, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Line {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            });
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Line {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            });
        }
        if let Some(prev) = map.insert(
            key.clone(),
            Entry {
                line,
                value,
                used: false,
            },
        ) {
            return Err(ConfigError::Line {
                line,
                message: format!("`{key}` already set on line {}", prev.line),
            });
        }
    }
    Ok(Entries(map))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::parse(&text)?;
        // relative potential files are resolved next to the config
        if let ModelSpec::Tabulated { path: p } = &mut cfg.model {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut e = tokenize(text)?;
        let experiment_raw: String = e.require(
            "experiment",
            "one of point, position_scan, amplitude_scan, eigenfunction, frames, temporal",
        )?;
        let experiment = Experiment::parse(&experiment_raw).ok_or_else(|| ConfigError::Line {
            line: e.line_of("experiment").unwrap_or(0),
            message: format!("unknown experiment `{experiment_raw}`"),
        })?;

        let kind: String = e.parse("potential")?.unwrap_or_else(|| "zero".into());
        let model = match kind.as_str() {
            "zero" | "free" => ModelSpec::Zero,
            "delta" => ModelSpec::Delta {
                strength: e.require("strength", "delta strength λ")?,
            },
            "rectangular" => ModelSpec::Rectangular {
                strength: e.require("strength", "well or barrier height λ")?,
            },
            "poeschl_teller" => ModelSpec::PoeschlTeller {
                mu: e.require("mu", "Pöschl–Teller depth μ")?,
            },
            "tabulated" => ModelSpec::Tabulated {
                path: PathBuf::from(e.require::<String>("potential_file", "tabulated potential")?),
            },
            other => {
                return Err(ConfigError::Line {
                    line: e.line_of("potential").unwrap_or(0),
                    message: format!("unknown potential `{other}`"),
                })
            }
        };

        let big = matches!(
            experiment,
            Experiment::Eigenfunction | Experiment::Frames | Experiment::Point
        );
        let (n_default, p_default) = match experiment {
            Experiment::Temporal => (2000, 20.0),
            _ if big => (2000, 200.0),
            _ => (1000, 150.0),
        };
        let n: usize = e.parse("n")?.unwrap_or(n_default);
        e.check(n >= 16, "n", format!("n must be at least 16, got {n}"))?;
        let p_max: f64 = e.parse("p_max")?.unwrap_or(p_default);
        e.check(
            p_max > 0.0 && p_max.is_finite(),
            "p_max",
            format!("p_max must be positive, got {p_max}"),
        )?;
        let sigma: f64 = e.parse("sigma")?.unwrap_or(0.1);
        e.check(
            sigma > 0.0 && sigma.is_finite(),
            "sigma",
            format!("sigma must be positive, got {sigma}"),
        )?;
        let x0: f64 = e.parse("x0")?.unwrap_or(0.0);

        let x0_scan = if experiment == Experiment::PositionScan {
            let r = ScanRange {
                min: e.parse("x0_min")?.unwrap_or(-5.0),
                max: e.parse("x0_max")?.unwrap_or(5.0),
                step: e.parse("x0_step")?.unwrap_or(0.25),
            };
            e.check(
                r.step > 0.0,
                "x0_step",
                format!("x0_step must be positive, got {}", r.step),
            )?;
            e.check(
                r.max >= r.min,
                "x0_max",
                format!("empty scan range [{}, {}]", r.min, r.max),
            )?;
            Some(r)
        } else {
            None
        };

        let amplitude_min: f64 = e.parse("amplitude_min")?.unwrap_or(-6.0);
        let amplitude_max: f64 = e.parse("amplitude_max")?.unwrap_or(0.0);
        let amplitude_points: usize = e.parse("amplitude_points")?.unwrap_or(60);
        let amplitude_x0 = e.list("amplitude_x0")?.unwrap_or_else(|| vec![-5.0, 0.0, 5.0]);
        if experiment == Experiment::AmplitudeScan {
            e.check(
                amplitude_max >= amplitude_min,
                "amplitude_max",
                format!("empty amplitude range [{amplitude_min}, {amplitude_max}]"),
            )?;
            e.check(
                amplitude_points >= 2,
                "amplitude_points",
                "amplitude_points must be at least 2",
            )?;
            e.check(
                !amplitude_x0.is_empty(),
                "amplitude_x0",
                "amplitude_x0 must list at least one position",
            )?;
            e.check(
                model.with_amplitude(1.0).is_some(),
                "potential",
                format!(
                    "amplitude scans need a delta, rectangular or poeschl_teller model, got {}",
                    model.kind()
                ),
            )?;
        }

        let window_sigmas: f64 = e.parse("window_sigmas")?.unwrap_or(WINDOW_SIGMAS);
        e.check(window_sigmas > 0.0, "window_sigmas", "window_sigmas must be positive")?;
        let step: Option<f64> = e.parse("quad_step")?;
        if let Some(h) = step {
            e.check(h > 0.0, "quad_step", format!("quad_step must be positive, got {h}"))?;
        }
        let kernel = match e.parse::<String>("kernel")?.as_deref() {
            None | Some("auto") => KernelPolicy::Auto,
            Some("quadrature") => KernelPolicy::Quadrature,
            Some(other) => {
                return Err(ConfigError::Line {
                    line: e.line_of("kernel").unwrap_or(0),
                    message: format!("kernel must be auto or quadrature, got `{other}`"),
                })
            }
        };
        let ode_tol: f64 = e.parse("ode_tol")?.unwrap_or(DEFAULT_TOL);
        e.check(ode_tol > 0.0, "ode_tol", "ode_tol must be positive")?;

        let x_min: f64 = e.parse("x_min")?.unwrap_or(-10.0);
        let x_max: f64 = e.parse("x_max")?.unwrap_or(10.0);
        let x_step: f64 = e.parse("x_step")?.unwrap_or(0.01);
        e.check(x_step > 0.0, "x_step", "x_step must be positive")?;
        e.check(
            x_max > x_min,
            "x_max",
            format!("empty position grid [{x_min}, {x_max}]"),
        )?;

        let times = match e.list("times")? {
            Some(t) => t,
            None => {
                let t_max: f64 = e.parse("t_max")?.unwrap_or(0.5);
                let frames: usize = e.parse("t_frames")?.unwrap_or(11);
                e.check(frames >= 1, "t_frames", "t_frames must be at least 1")?;
                if frames == 1 {
                    vec![0.0]
                } else {
                    (0..frames).map(|i| t_max * i as f64 / (frames - 1) as f64).collect()
                }
            }
        };
        e.check(!times.is_empty(), "times", "times must not be empty")?;

        let time_windows = match e.list("time_window")? {
            Some(t) => t,
            None => vec![1.0],
        };
        e.check(
            time_windows.iter().all(|&t| t > 0.0) && !time_windows.is_empty(),
            "time_window",
            "time windows must be positive",
        )?;

        let seed: u64 = e.parse("seed")?.unwrap_or(0x5eed);
        let output: Option<PathBuf> = e.parse::<String>("output")?.map(PathBuf::from);

        if let Some((key, entry)) = e.0.iter().find(|(_, v)| !v.used) {
            return Err(ConfigError::Line {
                line: entry.line,
                message: format!("unknown key `{key}`"),
            });
        }

        Ok(Self {
            experiment,
            model,
            sigma,
            x0,
            x0_scan,
            amplitude_min,
            amplitude_max,
            amplitude_points,
            amplitude_x0,
            n,
            p_max,
            quadrature: QuadratureSpec { window_sigmas, step },
            kernel,
            ode_tol,
            x_min,
            x_max,
            x_step,
            times,
            time_windows,
            seed,
            output,
        })
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        let k = self.amplitude_points;
        (0..k)
            .map(|i| self.amplitude_min + (self.amplitude_max - self.amplitude_min) * i as f64 / (k - 1) as f64)
            .collect()
    }

    pub fn x_grid(&self) -> Vec<f64> {
        let count = ((self.x_max - self.x_min) / self.x_step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.x_min + i as f64 * self.x_step).collect()
    }
}
