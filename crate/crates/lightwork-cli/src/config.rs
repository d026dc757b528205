//! Typed TOML config file. Every section is optional; command-line flags
//! override whatever the file provides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lightwork::ergotropy::{DensityMatrix, HamiltonianSpectrum, C64};
use lightwork::nalgebra::DMatrix;
use lightwork::nsm::KrausSet;
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub reversible: Scalars,
    #[serde(default)]
    pub photocount: Scalars,
    #[serde(default)]
    pub homodyne: Scalars,
    #[serde(default)]
    pub sign: Scalars,
    #[serde(default)]
    pub coarse: Scalars,
    #[serde(default)]
    pub erasure: Scalars,
    #[serde(default)]
    pub mc: McSection,
    pub nsm: Option<NsmSection>,
    pub sweep: Option<SweepSection>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig> {
        match path {
            None => Ok(FileConfig::default()),
            Some(p) => {
                let raw = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                toml::from_str(&raw).with_context(|| format!("parsing config {}", p.display()))
            }
        }
    }
}

/// Shared scalar knobs for the single-point physics commands.
#[derive(Debug, Default, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scalars {
    pub nbar: Option<f64>,
    pub nbar_cold: Option<f64>,
    pub modes: Option<u32>,
    pub kappa_sq: Option<f64>,
    pub beta: Option<f64>,
    pub resolution: Option<f64>,
    pub theta_d: Option<f64>,
    pub nbar_d: Option<f64>,
}

#[derive(Debug, Default, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

/// Measurement-cycle description: both ladders, the bath temperatures, and
/// the Kraus operators of the non-selective measurement.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NsmSection {
    pub theta_c: f64,
    pub theta_m: f64,
    pub h_i: Vec<f64>,
    pub h_f: Vec<f64>,
    /// Pre-measurement populations; Gibbs of h_i at theta_m when omitted.
    pub p_eq: Option<Vec<f64>>,
    pub kraus: Vec<KrausMatrix>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KrausMatrix {
    pub re: Vec<Vec<f64>>,
    pub im: Option<Vec<Vec<f64>>>,
}

impl KrausMatrix {
    fn to_matrix(&self, dim: usize) -> Result<DMatrix<C64>> {
        let im_zero;
        let im = match &self.im {
            Some(im) => im,
            None => {
                im_zero = vec![vec![0.0; dim]; dim];
                &im_zero
            }
        };
        if self.re.len() != dim || im.len() != dim {
            bail!("kraus matrix must have {dim} rows to match the ladders");
        }
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        for (i, (rrow, irow)) in self.re.iter().zip(im).enumerate() {
            if rrow.len() != dim || irow.len() != dim {
                bail!("kraus matrix row {i} must have {dim} entries");
            }
            for j in 0..dim {
                m[(i, j)] = C64::new(rrow[j], irow[j]);
            }
        }
        Ok(m)
    }
}

pub struct NsmProblem {
    pub h_i: HamiltonianSpectrum,
    pub h_f: HamiltonianSpectrum,
    pub p_eq: Vec<f64>,
    pub kraus: KrausSet,
    pub theta_c: f64,
    pub theta_m: f64,
}

impl NsmSection {
    /// Validate and assemble the typed problem. `theta_override` replaces
    /// (theta_c, theta_m) when sweeping temperatures.
    pub fn build(&self, theta_override: Option<(f64, f64)>) -> Result<NsmProblem> {
        let (theta_c, theta_m) = theta_override.unwrap_or((self.theta_c, self.theta_m));
        let h_i = HamiltonianSpectrum::new(self.h_i.clone())?;
        let h_f = HamiltonianSpectrum::new(self.h_f.clone())?;
        let dim = h_i.dim();
        let operators = self
            .kraus
            .iter()
            .map(|k| k.to_matrix(dim))
            .collect::<Result<Vec<_>>>()?;
        let kraus = KrausSet::new(operators).context("kraus set rejected")?;
        let p_eq = match (&self.p_eq, theta_override) {
            // An explicit p_eq is tied to the file's theta_m; recompute
            // whenever the temperatures are being swept.
            (Some(p), None) => p.clone(),
            _ => DensityMatrix::thermal(&h_i, theta_m)?.diagonal_populations(),
        };
        Ok(NsmProblem {
            h_i,
            h_f,
            p_eq,
            kraus,
            theta_c,
            theta_m,
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// One of: reversible, photocount, homodyne, sign, coarse, erasure, nsm.
    pub scheme: String,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub format: Option<String>,
    /// Axis name -> grid. Axes vary lexicographically, last name fastest.
    pub axes: BTreeMap<String, AxisSpec>,
    /// Parameters held constant across the grid.
    #[serde(default)]
    pub fixed: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    /// "linear" or "log".
    pub kind: AxisKind,
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisKind {
    Linear,
    Log,
}

impl AxisSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            bail!("axis needs at least one point");
        }
        if !(self.from.is_finite() && self.to.is_finite()) {
            bail!("axis endpoints must be finite");
        }
        if self.points == 1 {
            return Ok(vec![self.from]);
        }
        let n = self.points;
        let vals = match self.kind {
            AxisKind::Linear => (0..n)
                .map(|i| {
                    let t = i as f64 / (n - 1) as f64;
                    self.from + t * (self.to - self.from)
                })
                .collect(),
            AxisKind::Log => {
                if self.from <= 0.0 || self.to <= 0.0 {
                    bail!("log axis endpoints must be positive");
                }
                let (lf, lt) = (self.from.ln(), self.to.ln());
                (0..n)
                    .map(|i| {
                        let t = i as f64 / (n - 1) as f64;
                        (lf + t * (lt - lf)).exp()
                    })
                    .collect()
            }
        };
        Ok(vals)
    }
}
