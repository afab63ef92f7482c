//! TOML experiment configuration.

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: Option<SystemConfig>,
    #[serde(default)]
    pub model: ModelConfig,
    pub observable: ObservableConfig,
    pub scheme: SchemeConfig,
    /// Not read by `scf`.
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
    pub scf: Option<ScfConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Chain,
    DefectChain,
    /// Configuration JSON on disk.
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub kind: SystemKind,
    pub length: Option<usize>,
    #[serde(default = "one")]
    pub spacing: f64,
    #[serde(default = "zero_pattern")]
    pub pattern: Vec<f64>,
    pub defect_site: Option<usize>,
    pub defect_potential: Option<f64>,
    pub path: Option<String>,
    /// Site whose local observable is reported; defaults to the middle.
    pub center: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default = "one")]
    pub h0: f64,
    #[serde(default = "one")]
    pub gamma0: f64,
    #[serde(default)]
    pub t0: f64,
    #[serde(default)]
    pub onsite_shift: f64,
    pub cutoff: Option<CutoffConfig>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            h0: 1.0,
            gamma0: 1.0,
            t0: 0.0,
            onsite_shift: 0.0,
            cutoff: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffConfig {
    pub r_cut: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableKind {
    FermiDirac,
    GrandPotential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableConfig {
    pub kind: ObservableKind,
    /// `inf` selects zero temperature.
    pub beta: f64,
    #[serde(default)]
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Exact,
    Fejer,
    Leja,
    Chebyshev,
    Kpm,
    Bop,
    Vacuum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    None,
    Fejer,
    Jackson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminatorKind {
    Vacuum,
    SquareRoot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    /// Interval set such as `"[-1,-0.2]U[0.2,1]"`; derived from the
    /// spectrum when absent.
    pub intervals: Option<String>,
    /// Padding of derived bands and defect intervals.
    #[serde(default = "default_pad")]
    pub pad: f64,
    #[serde(default = "default_kernel")]
    pub kernel: KernelKind,
    #[serde(default = "default_terminator")]
    pub terminator: TerminatorKind,
    /// Fixed node count for commands that do not sweep it.
    pub nodes: Option<usize>,
    #[serde(default = "default_grid")]
    pub grid_points: usize,
    #[serde(default = "default_leja_grid")]
    pub leja_grid: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub values: Vec<f64>,
    /// `[start, stop, step]`, inclusive of `stop` when hit exactly.
    pub range: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<String>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Newton,
    Mixing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScfConfig {
    #[serde(default)]
    pub onsite: [f64; 4],
    #[serde(default)]
    pub yukawa_strength: f64,
    #[serde(default = "one")]
    pub yukawa_tau: f64,
    #[serde(default = "half")]
    pub reference_charge: f64,
    #[serde(default = "half")]
    pub initial_density: f64,
    #[serde(default = "default_solver")]
    pub solver: SolverKind,
    #[serde(default = "half")]
    pub alpha: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn zero_pattern() -> Vec<f64> {
    vec![0.0]
}
fn default_pad() -> f64 {
    0.01
}
fn default_kernel() -> KernelKind {
    KernelKind::Jackson
}
fn default_terminator() -> TerminatorKind {
    TerminatorKind::Vacuum
}
fn default_grid() -> usize {
    2000
}
fn default_leja_grid() -> usize {
    4000
}
fn default_solver() -> SolverKind {
    SolverKind::Newton
}
fn default_tol() -> f64 {
    1e-10
}
fn default_max_iter() -> usize {
    50
}

impl SweepConfig {
    /// Explicit values, or the expanded range.
    pub fn points(&self) -> CliResult<Vec<f64>> {
        let mut out = self.values.clone();
        if let Some([start, stop, step]) = self.range {
            if !out.is_empty() {
                return Err(CliError::config("sweep: give either `values` or `range`"));
            }
            if !(step > 0.0) || !(stop >= start) {
                return Err(CliError::config("sweep.range: need step > 0 and stop >= start"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize;
            out = (0..=count).map(|i| start + step * i as f64).collect();
        }
        if out.is_empty() {
            return Err(CliError::config("sweep: no values"));
        }
        if out.iter().any(|x| !x.is_finite()) || out.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::config("sweep: values must be finite and strictly ascending"));
        }
        Ok(out)
    }

    /// Sweep values that must be non-negative integers.
    pub fn integer_points(&self, field: &str) -> CliResult<Vec<usize>> {
        self.points()?
            .into_iter()
            .map(|x| {
                if x >= 0.0 && x.fract() == 0.0 {
                    Ok(x as usize)
                } else {
                    Err(CliError::config(format!("sweep: {field} values must be non-negative integers, got {x}")))
                }
            })
            .collect()
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    pub fn validate(&self) -> CliResult<()> {
        if !self.sweep.values.is_empty() || self.sweep.range.is_some() {
            self.sweep.points()?;
        }
        let o = &self.observable;
        if !(o.beta > 0.0) {
            return Err(CliError::config("observable.beta: must be positive (or inf)"));
        }
        if !o.mu.is_finite() {
            return Err(CliError::config("observable.mu: must be finite"));
        }
        let m = &self.model;
        if !(m.h0 > 0.0) || !(m.gamma0 > 0.0) {
            return Err(CliError::config("model: h0 and gamma0 must be positive"));
        }
        if !(self.scheme.pad >= 0.0) {
            return Err(CliError::config("scheme.pad: must be non-negative"));
        }
        if self.scheme.grid_points < 2 {
            return Err(CliError::config("scheme.grid_points: need at least 2"));
        }
        if let Some(s) = &self.system {
            match s.kind {
                SystemKind::Chain | SystemKind::DefectChain => {
                    if s.length.unwrap_or(0) == 0 {
                        return Err(CliError::config("system.length: required and positive for chains"));
                    }
                    if !(s.spacing > 0.0) {
                        return Err(CliError::config("system.spacing: must be positive"));
                    }
                }
                SystemKind::File => {
                    if s.path.is_none() {
                        return Err(CliError::config("system.path: required for kind = \"file\""));
                    }
                }
            }
            if s.kind == SystemKind::DefectChain
                && (s.defect_site.is_none() || s.defect_potential.is_none())
            {
                return Err(CliError::config(
                    "system: defect_chain needs defect_site and defect_potential",
                ));
            }
        }
        if let Some(scf) = &self.scf {
            if !(scf.alpha > 0.0 && scf.alpha <= 1.0) {
                return Err(CliError::config("scf.alpha: must lie in (0, 1]"));
            }
            if !(scf.tol > 0.0) {
                return Err(CliError::config("scf.tol: must be positive"));
            }
            if scf.yukawa_strength < 0.0 || !(scf.yukawa_tau > 0.0) {
                return Err(CliError::config("scf: yukawa_strength >= 0 and yukawa_tau > 0"));
            }
        }
        Ok(())
    }
}
