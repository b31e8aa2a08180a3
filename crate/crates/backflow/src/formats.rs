//! On-disk formats: tabulated potentials, kernel matrices, eigen-solve
//! results and the frame manifest.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use backflow_core::kernels::{KernelMatrix, KernelMeta, KernelMethod};
use backflow_core::linalg::ComplexMatrix;
use backflow_core::potential::GenericPotential;
use backflow_core::spectral::{BackflowResult, MomentumGrid};
use backflow_core::{SmearingFunction, C64};

/// Two whitespace- or comma-separated columns `x V(x)`, preceded by a
/// `# support_radius=<float>` header line. Other `#` lines are comments.
pub fn load_tabulated_potential(path: &Path) -> Result<GenericPotential> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    parse_tabulated_potential(BufReader::new(file), &path.display().to_string())
}

pub fn parse_tabulated_potential<R: BufRead>(reader: R, label: &str) -> Result<GenericPotential> {
    let mut radius = None;
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if let Some(comment) = t.strip_prefix('#') {
            if let Some(value) = comment.trim().strip_prefix("support_radius=") {
                let r: f64 = value
                    .trim()
                    .parse()
                    .map_err(|_| anyhow!("{label}:{}: bad support_radius `{value}`", i + 1))?;
                radius = Some(r);
            }
            continue;
        }
        if t.is_empty() {
            continue;
        }
        let cols: Vec<&str> = t
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if cols.len() != 2 {
            bail!("{label}:{}: expected two columns `x V`, got `{t}`", i + 1);
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| anyhow!("{label}:{}: bad number `{s}`", i + 1))
        };
        xs.push(parse(cols[0])?);
        vs.push(parse(cols[1])?);
    }
    let radius = radius.ok_or_else(|| anyhow!("{label}: missing `# support_radius=<float>` header"))?;
    Ok(GenericPotential::tabulated(label, radius, xs, vs)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct KernelHeader {
    n: usize,
    p_max: f64,
    method: String,
    potential: String,
    x0: Option<f64>,
    sigma: Option<f64>,
    time_window: Option<f64>,
    warnings: Vec<String>,
}

/// One JSON header line, then `n²` complex entries as little-endian `f64`
/// pairs `(re, im)` in row-major order.
pub fn write_kernel<W: Write>(mut w: W, k: &KernelMatrix) -> Result<()> {
    let header = KernelHeader {
        n: k.grid.n(),
        p_max: k.grid.p_max(),
        method: k.meta.method.tag().into(),
        potential: k.meta.potential.clone(),
        x0: k.meta.smearing.map(|f| f.x0),
        sigma: k.meta.smearing.map(|f| f.sigma),
        time_window: k.meta.time_window,
        warnings: k.meta.warnings.clone(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(16 * k.entries.as_slice().len());
    for z in k.entries.as_slice() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_kernel<R: BufRead>(mut r: R) -> Result<KernelMatrix> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let h: KernelHeader = serde_json::from_str(line.trim_end()).context("kernel header")?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != 16 * h.n * h.n {
        bail!("kernel body has {} bytes, expected {}", bytes.len(), 16 * h.n * h.n);
    }
    let data = bytes
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    let smearing = match (h.x0, h.sigma) {
        (Some(x0), Some(s)) => Some(SmearingFunction::new(x0, s)?),
        _ => None,
    };
    Ok(KernelMatrix {
        grid: MomentumGrid::new(h.n, h.p_max)?,
        entries: ComplexMatrix::from_row_major(h.n, data)?,
        meta: KernelMeta {
            potential: h.potential,
            smearing,
            time_window: h.time_window,
            method: KernelMethod::from_tag(&h.method).ok_or_else(|| anyhow!("unknown kernel method `{}`", h.method))?,
            warnings: h.warnings,
        },
    })
}

pub fn save_kernel(path: &Path, k: &KernelMatrix) -> Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(f);
    write_kernel(&mut w, k)?;
    w.flush()?;
    Ok(())
}

pub fn load_kernel(path: &Path) -> Result<KernelMatrix> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_kernel(BufReader::new(f))
}

/// Serialised eigen-solve outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub beta: f64,
    pub residual: f64,
    pub iterations: [usize; 2],
    pub n: usize,
    pub p_max: f64,
    pub model: String,
    pub f: Option<SmearingRecord>,
    pub time_window: Option<f64>,
    pub method: String,
    pub bound: Option<f64>,
    pub bound_formula: Option<String>,
    pub eigenvector_re: Vec<f64>,
    pub eigenvector_im: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmearingRecord {
    pub x0: f64,
    pub sigma: f64,
}

impl ResultRecord {
    pub fn new(r: &BackflowResult, model: &str, f: Option<&SmearingFunction>, method: KernelMethod) -> Self {
        Self {
            beta: r.beta,
            residual: r.residual,
            iterations: r.iterations,
            n: r.grid.n(),
            p_max: r.grid.p_max(),
            model: model.to_string(),
            f: f.map(|f| SmearingRecord {
                x0: f.x0,
                sigma: f.sigma,
            }),
            time_window: None,
            method: method.tag().into(),
            bound: None,
            bound_formula: None,
            eigenvector_re: r.eigenvector.iter().map(|z| z.re).collect(),
            eigenvector_im: r.eigenvector.iter().map(|z| z.im).collect(),
        }
    }

    pub fn eigenvector(&self) -> Vec<C64> {
        self.eigenvector_re
            .iter()
            .zip(&self.eigenvector_im)
            .map(|(&re, &im)| C64::new(re, im))
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        serde_json::to_writer_pretty(BufWriter::new(f), self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        Ok(serde_json::from_reader(BufReader::new(f))?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub file: String,
    pub t: f64,
    pub norm: f64,
}

/// Index of per-frame CSV files, read by the plotting scripts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameManifest {
    pub model: String,
    pub x0: f64,
    pub sigma: f64,
    pub beta: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub x_step: f64,
    pub columns: Vec<String>,
    pub frames: Vec<FrameEntry>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use backflow_core::kernels::free_kernel_matrix;

    #[test]
    fn kernel_round_trip() {
        let grid = MomentumGrid::new(7, 3.0).unwrap();
        let f = SmearingFunction::new(0.4, 0.2).unwrap();
        let mut k = free_kernel_matrix(&grid, &f);
        k.meta.warnings.push("test".into());
        let mut buf = Vec::new();
        write_kernel(&mut buf, &k).unwrap();
        let back = read_kernel(&buf[..]).unwrap();
        assert_eq!(back, k);
    }

    #[test]
    fn truncated_kernel_is_rejected() {
        let grid = MomentumGrid::new(4, 3.0).unwrap();
        let k = free_kernel_matrix(&grid, &SmearingFunction::new(0.0, 0.2).unwrap());
        let mut buf = Vec::new();
        write_kernel(&mut buf, &k).unwrap();
        buf.truncate(buf.len() - 8);
        assert!(read_kernel(&buf[..]).is_err());
    }

    #[test]
    fn tabulated_potential_parses() {
        let text = "# a square well\n# support_radius=1.5\n-1.5 0\n-1, -2\n0 -2\n1 -2\n1.5 0\n";
        let v = parse_tabulated_potential(text.as_bytes(), "well").unwrap();
        assert_eq!(v.support_radius(), 1.5);
        assert_eq!(v.value(0.0), -2.0);
        assert_eq!(v.value(3.0), 0.0);
        assert!(parse_tabulated_potential("0 1\n1 2\n".as_bytes(), "x").is_err());
        let err = parse_tabulated_potential("# support_radius=1\n0 1 2\n".as_bytes(), "x").unwrap_err();
        assert!(err.to_string().contains("x:2"));
    }

    #[test]
    fn result_round_trip() {
        let r = BackflowResult {
            beta: -0.24,
            eigenvector: vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)],
            residual: 1e-12,
            iterations: [10, 3],
            shifts: [-1.0, -0.3],
            grid: MomentumGrid::new(2, 1.0).unwrap(),
        };
        let rec = ResultRecord::new(
            &r,
            "zero",
            Some(&SmearingFunction::new(0.0, 0.1).unwrap()),
            KernelMethod::FreeClosedForm,
        );
        let json = serde_json::to_string(&rec).unwrap();
        let back: ResultRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rec);
        assert_eq!(back.eigenvector(), r.eigenvector);
        for key in [
            "beta",
            "residual",
            "iterations",
            "n",
            "p_max",
            "model",
            "eigenvector_re",
            "eigenvector_im",
        ] {
            assert!(json.contains(&format!("\"{key}\"")));
        }
    }
}
