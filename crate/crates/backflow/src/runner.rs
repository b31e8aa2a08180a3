//! Experiment execution and output files.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use backflow_core::kernels::KernelMethod;
use backflow_core::position::{PositionProfile, WaveTable};
use backflow_core::spectral::{EigenOptions, MomentumGrid};
use backflow_core::{Potential, SmearingFunction};

use crate::config::{Experiment, ExperimentConfig, ModelSpec};
use crate::formats::{load_tabulated_potential, save_kernel, FrameEntry, FrameManifest, ResultRecord};
use crate::solve::{kernel_with, solve_point, solve_temporal_extrapolated, PointSolution, SolveOptions};

pub fn build_potential(model: &ModelSpec) -> Result<Potential> {
    Ok(match model {
        ModelSpec::Zero => Potential::Zero,
        ModelSpec::Delta { strength } => Potential::Delta { strength: *strength },
        ModelSpec::Rectangular { strength } => Potential::Rectangular { strength: *strength },
        ModelSpec::PoeschlTeller { mu } => Potential::PoeschlTeller { mu: *mu },
        ModelSpec::Tabulated { path } => Potential::Generic(load_tabulated_potential(path)?),
    })
}

/// One line of a position or amplitude scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub x0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    pub beta: f64,
    pub bound: f64,
    pub residual: f64,
    pub iterations: usize,
    pub method_tag: String,
    #[serde(skip)]
    pub failure: Option<String>,
}

impl ScanRow {
    fn from_outcome(x0: f64, amplitude: Option<f64>, outcome: Result<PointSolution>) -> Self {
        match outcome {
            Ok(s) => Self {
                x0,
                amplitude,
                beta: s.result.beta,
                bound: s.bound.value,
                residual: s.result.residual,
                iterations: s.result.iterations[0] + s.result.iterations[1],
                method_tag: s.method.tag().into(),
                failure: None,
            },
            Err(e) => Self {
                x0,
                amplitude,
                beta: f64::NAN,
                bound: f64::NAN,
                residual: f64::NAN,
                iterations: 0,
                method_tag: "failed".into(),
                failure: Some(format!("{e:#}")),
            },
        }
    }
}

#[derive(Debug, Default, Clone, Serialize)]
pub struct RunReport {
    pub experiment: String,
    pub files: Vec<PathBuf>,
    pub nan_rows: usize,
    pub failures: Vec<String>,
    pub lines: Vec<String>,
}

impl RunReport {
    fn note(&mut self, line: String) {
        self.lines.push(line);
    }
}

pub fn solve_options(cfg: &ExperimentConfig) -> SolveOptions {
    SolveOptions {
        quadrature: cfg.quadrature,
        kernel: cfg.kernel,
        ode_tol: cfg.ode_tol,
        eigen: EigenOptions {
            seed: cfg.seed,
            ..EigenOptions::default()
        },
    }
}

fn point_at(potential: &Potential, x0: f64, cfg: &ExperimentConfig, grid: &MomentumGrid) -> Result<PointSolution> {
    let f = SmearingFunction::new(x0, cfg.sigma)?;
    Ok(solve_point(potential, &f, grid, &solve_options(cfg))?)
}

pub fn position_scan(cfg: &ExperimentConfig, potential: &Potential) -> Result<Vec<ScanRow>> {
    let grid = MomentumGrid::new(cfg.n, cfg.p_max)?;
    let xs = cfg.x0_scan.as_ref().context("position scan without a range")?.points();
    Ok(xs
        .into_par_iter()
        .map(|x0| ScanRow::from_outcome(x0, None, point_at(potential, x0, cfg, &grid)))
        .collect())
}

pub fn amplitude_scan(cfg: &ExperimentConfig) -> Result<Vec<ScanRow>> {
    let grid = MomentumGrid::new(cfg.n, cfg.p_max)?;
    let jobs: Vec<(f64, f64)> = cfg
        .amplitude_x0
        .iter()
        .flat_map(|&x0| cfg.amplitudes().into_iter().map(move |a| (x0, a)))
        .collect();
    Ok(jobs
        .into_par_iter()
        .map(|(x0, a)| {
            let outcome = cfg
                .model
                .with_amplitude(a)
                .context("model has no amplitude")
                .and_then(|m| build_potential(&m))
                .and_then(|v| point_at(&v, x0, cfg, &grid));
            ScanRow::from_outcome(x0, Some(a), outcome)
        })
        .collect())
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ProfileRow {
    x: f64,
    rho: f64,
    j: f64,
    re_psi: f64,
    im_psi: f64,
}

fn write_profile(path: &Path, p: &PositionProfile) -> Result<()> {
    let rows: Vec<ProfileRow> = (0..p.x_grid.len())
        .map(|i| ProfileRow {
            x: p.x_grid[i],
            rho: p.rho[i],
            j: p.j[i],
            re_psi: p.psi[i].re,
            im_psi: p.psi[i].im,
        })
        .collect();
    write_csv(path, &rows)
}

#[derive(Serialize)]
struct MomentumRow {
    p: f64,
    re: f64,
    im: f64,
    abs2: f64,
}

fn record_for(potential: &Potential, s: &PointSolution, f: &SmearingFunction) -> ResultRecord {
    let mut rec = ResultRecord::new(&s.result, &potential.to_string(), Some(f), s.method);
    rec.bound = Some(s.bound.value);
    rec.bound_formula = Some(s.bound.formula.tag().into());
    rec
}

fn describe(s: &PointSolution, f: &SmearingFunction) -> String {
    format!(
        "x0={} sigma={} beta={:.6} bound={:.3} ({}{}) residual={:.2e} iterations={}+{} method={}",
        f.x0,
        f.sigma,
        s.result.beta,
        s.bound.value,
        s.bound.formula.tag(),
        if s.bound.empirical { ", empirical c_V" } else { "" },
        s.result.residual,
        s.result.iterations[0],
        s.result.iterations[1],
        s.method.tag()
    )
}

/// Runs one experiment, writing into `out`.
pub fn run(cfg: &ExperimentConfig, out: &Path, save_kernel_file: bool) -> Result<RunReport> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut report = RunReport {
        experiment: cfg.experiment.name().into(),
        ..Default::default()
    };
    let potential = build_potential(&cfg.model)?;
    match cfg.experiment {
        Experiment::Point | Experiment::Eigenfunction | Experiment::Frames => {
            let grid = MomentumGrid::new(cfg.n, cfg.p_max)?;
            let f = SmearingFunction::new(cfg.x0, cfg.sigma)?;
            let s = solve_point(&potential, &f, &grid, &solve_options(cfg))?;
            report.note(format!("{potential}: {}", describe(&s, &f)));
            for w in &s.warnings {
                report.note(format!("warning: {w}"));
            }
            let result_path = out.join("result.json");
            record_for(&potential, &s, &f).save(&result_path)?;
            report.files.push(result_path);
            if save_kernel_file {
                let k = kernel_with(s.method, &s.cache, &grid, &f, &cfg.quadrature)?;
                let path = out.join("kernel.bin");
                save_kernel(&path, &k)?;
                report.files.push(path);
            }
            if cfg.experiment == Experiment::Eigenfunction {
                let rows: Vec<MomentumRow> = s
                    .result
                    .eigenvector
                    .iter()
                    .enumerate()
                    .map(|(j, z)| MomentumRow {
                        p: grid.point(j),
                        re: z.re,
                        im: z.im,
                        abs2: z.norm_sqr(),
                    })
                    .collect();
                let path = out.join("eigenvector.csv");
                write_csv(&path, &rows)?;
                report.files.push(path);
                let table = WaveTable::new(&s.cache, &grid, &cfg.x_grid())?;
                let prof = table.profile(&s.result.eigenvector, 0.0)?;
                let path = out.join("profile.csv");
                write_profile(&path, &prof)?;
                report.files.push(path);
                report.note(format!(
                    "smeared current of the profile: {:.6}",
                    prof.smeared_current(&f)
                ));
            }
            if cfg.experiment == Experiment::Frames {
                let table = WaveTable::new(&s.cache, &grid, &cfg.x_grid())?;
                let profiles = cfg
                    .times
                    .par_iter()
                    .map(|&t| table.profile(&s.result.eigenvector, t))
                    .collect::<backflow_core::Result<Vec<_>>>()?;
                let mut entries = Vec::new();
                for (i, p) in profiles.iter().enumerate() {
                    let name = format!("frame_{i:04}.csv");
                    write_profile(&out.join(&name), p)?;
                    report.files.push(out.join(&name));
                    entries.push(FrameEntry {
                        file: name,
                        t: p.t,
                        norm: p.norm(),
                    });
                }
                let manifest = FrameManifest {
                    model: potential.to_string(),
                    x0: cfg.x0,
                    sigma: cfg.sigma,
                    beta: s.result.beta,
                    x_min: cfg.x_min,
                    x_max: cfg.x_max,
                    x_step: cfg.x_step,
                    columns: ["x", "rho", "j", "re_psi", "im_psi"].map(String::from).to_vec(),
                    frames: entries,
                };
                let path = out.join("manifest.json");
                fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
                report.files.push(path);
            }
        }
        Experiment::PositionScan | Experiment::AmplitudeScan => {
            let (rows, name) = if cfg.experiment == Experiment::PositionScan {
                (position_scan(cfg, &potential)?, "position_scan.csv")
            } else {
                (amplitude_scan(cfg)?, "amplitude_scan.csv")
            };
            for r in &rows {
                if let Some(reason) = &r.failure {
                    report.nan_rows += 1;
                    report.failures.push(match r.amplitude {
                        Some(a) => format!("x0={} amplitude={a}: {reason}", r.x0),
                        None => format!("x0={}: {reason}", r.x0),
                    });
                }
            }
            report.note(format!("{} rows, {} failed", rows.len(), report.nan_rows));
            let path = out.join(name);
            write_csv(&path, &rows)?;
            report.files.push(path);
        }
        Experiment::Temporal => {
            #[derive(Serialize)]
            struct Row {
                time_window: f64,
                p_max: f64,
                beta: f64,
                beta_half_cutoff: f64,
                beta_extrapolated: f64,
                residual: f64,
                iterations: usize,
            }
            let eigen = EigenOptions {
                seed: cfg.seed,
                ..EigenOptions::default()
            };
            let grid = MomentumGrid::new(cfg.n, cfg.p_max)?;
            let mut rows = Vec::new();
            for &t in &cfg.time_windows {
                let est = solve_temporal_extrapolated(t, &grid, &eigen)?;
                let r = &est.result;
                report.note(format!(
                    "T={t} beta={:.7} extrapolated={:.7} residual={:.2e}",
                    r.beta, est.extrapolated, r.residual
                ));
                if rows.is_empty() {
                    let mut rec = ResultRecord::new(r, "zero", None, KernelMethod::Temporal);
                    rec.time_window = Some(t);
                    let path = out.join("result.json");
                    rec.save(&path)?;
                    report.files.push(path);
                }
                rows.push(Row {
                    time_window: t,
                    p_max: grid.p_max(),
                    beta: r.beta,
                    beta_half_cutoff: est.half_cutoff,
                    beta_extrapolated: est.extrapolated,
                    residual: r.residual,
                    iterations: r.iterations[0] + r.iterations[1],
                });
            }
            let path = out.join("temporal.csv");
            write_csv(&path, &rows)?;
            report.files.push(path);
        }
    }
    let path = out.join("summary.json");
    fs::write(&path, serde_json::to_string_pretty(&report)?)?;
    Ok(report)
}
