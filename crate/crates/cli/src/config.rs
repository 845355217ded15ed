//! Run configuration: one JSON file describes one reproducible run.
//! Unknown keys are rejected; the parsed struct (all defaults filled in)
//! is echoed next to the results as `resolved_config.json`.

use std::fs;
use std::path::Path;

use nlscyl::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use nlscyl::diagnostics::QuarticMode;
use nlscyl::dynamics::SolverConfig;
use nlscyl::error::{Error, Result};
use nlscyl::estimate_lab::{make_localized_data, BilinearExperiment, DataSpec, SweepAxis};
use nlscyl::field::forward_transform;
use nlscyl::multiplier::BoundRegime;
use nlscyl::snapshot::read_snapshot;
use nlscyl::{Grid, SpectralField};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridBlock,
    #[serde(default)]
    pub multiplier: Option<MultiplierBlock>,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub initial_data: Option<InitialData>,
    #[serde(default)]
    pub experiments: Vec<SweepBlock>,
    #[serde(default)]
    pub energy_increment: Option<EnergyIncrementBlock>,
    #[serde(default)]
    pub symbol_sample: Option<SymbolSampleBlock>,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub l_x: f64,
    pub n_x: usize,
    pub n_y: usize,
}

impl GridBlock {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.l_x, self.n_x, self.n_y)
            .map_err(|e| Error::config("grid", e.to_string()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiplierBlock {
    pub s: f64,
    pub n: f64,
    #[serde(default = "default_smoothing")]
    pub smoothing: String,
}

fn default_smoothing() -> String {
    "log-quintic".to_string()
}

impl MultiplierBlock {
    pub fn build(&self) -> Result<nlscyl::MultiplierSpec> {
        if self.smoothing != "log-quintic" {
            return Err(Error::config(
                "multiplier.smoothing",
                format!("unknown profile `{}`; available: log-quintic", self.smoothing),
            ));
        }
        nlscyl::MultiplierSpec::new(self.s, self.n)
            .map_err(|e| Error::config("multiplier", e.to_string()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverBlock {
    pub dt: f64,
    pub t_end: f64,
    pub dealias: bool,
    pub linear_only: bool,
    pub kappa: f64,
    pub c: f64,
    pub mass_drift_abort: f64,
    pub boundary_mass_threshold: f64,
}

impl Default for SolverBlock {
    fn default() -> Self {
        let d = SolverConfig::default();
        SolverBlock {
            dt: d.dt,
            t_end: d.t_end,
            dealias: d.dealias,
            linear_only: d.linear_only,
            kappa: d.window_kappa,
            c: d.window_exponent,
            mass_drift_abort: d.mass_drift_abort,
            boundary_mass_threshold: d.boundary_mass_threshold,
        }
    }
}

impl SolverBlock {
    pub fn build(&self) -> Result<SolverConfig> {
        let cfg = SolverConfig {
            dt: self.dt,
            t_end: self.t_end,
            dealias: self.dealias,
            linear_only: self.linear_only,
            window_kappa: self.kappa,
            window_exponent: self.c,
            mass_drift_abort: self.mass_drift_abort,
            boundary_mass_threshold: self.boundary_mass_threshold,
        };
        cfg.validate()
            .map_err(|e| Error::config("solver", e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    /// A exp(-x^2 / (2 width^2)), constant in y.
    Gaussian { amplitude: f64, width: f64 },
    /// Explicit list of spectral coefficients.
    Modes { modes: Vec<ModeSpec> },
    /// Unit-L^2 Gaussian coefficients on a dyadic band, scaled.
    RandomBand { band_n: f64, amplitude: f64 },
    /// Load a stored field snapshot; must match the configured grid.
    Snapshot { path: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub xi_index: i64,
    pub eta_index: i64,
    pub re: f64,
    pub im: f64,
}

impl InitialData {
    pub fn build(&self, grid: &Grid, seed: u64) -> Result<SpectralField> {
        match self {
            InitialData::Gaussian { amplitude, width } => {
                if !(*width > 0.0) {
                    return Err(Error::config(
                        "initial_data.width",
                        format!("width must be positive, got {width}"),
                    ));
                }
                let mut phys = Vec::with_capacity(grid.len());
                for _q in 0..grid.n_y() {
                    for p in 0..grid.n_x() {
                        let x = grid.x(p);
                        let v = amplitude * (-x * x / (2.0 * width * width)).exp();
                        phys.push(Complex64::new(v, 0.0));
                    }
                }
                forward_transform(grid, &phys)
            }
            InitialData::Modes { modes } => {
                let mut f = SpectralField::zeros(grid);
                for m in modes {
                    let i = grid.col_of_xi_index(m.xi_index).ok_or_else(|| {
                        Error::config(
                            "initial_data.modes",
                            format!("xi index {} outside the grid", m.xi_index),
                        )
                    })?;
                    let j = grid.row_of_eta_index(m.eta_index).ok_or_else(|| {
                        Error::config(
                            "initial_data.modes",
                            format!("eta index {} outside the grid", m.eta_index),
                        )
                    })?;
                    f.set_coeff(j, i, Complex64::new(m.re, m.im));
                }
                Ok(f)
            }
            InitialData::RandomBand { band_n, amplitude } => {
                let mut f = make_localized_data(grid, &DataSpec::band(*band_n), seed)?;
                f.scale(Complex64::new(*amplitude, 0.0));
                Ok(f)
            }
            InitialData::Snapshot { path } => {
                let f = read_snapshot(Path::new(path))?;
                if f.grid() != grid {
                    return Err(Error::config(
                        "initial_data.path",
                        format!(
                            "snapshot grid ({}, {}, {}) does not match the configured grid",
                            f.grid().l_x(),
                            f.grid().n_x(),
                            f.grid().n_y()
                        ),
                    ));
                }
                Ok(f)
            }
        }
    }

    pub fn snapshot_path(&self) -> Option<&str> {
        match self {
            InitialData::Snapshot { path } => Some(path),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub experiment: BilinearExperiment,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum QuarticModeCfg {
    Exact,
    SplitLow,
    Thresholded { eps_amp: f64, k_max: f64 },
}

impl QuarticModeCfg {
    pub fn build(&self) -> QuarticMode {
        match self {
            QuarticModeCfg::Exact => QuarticMode::Exact,
            QuarticModeCfg::SplitLow => QuarticMode::SplitLow,
            QuarticModeCfg::Thresholded { eps_amp, k_max } => QuarticMode::Thresholded {
                eps_amp: *eps_amp,
                k_max: *k_max,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyIncrementBlock {
    pub n_values: Vec<f64>,
    #[serde(default = "default_quartic_mode")]
    pub quartic_mode: QuarticModeCfg,
    #[serde(default)]
    pub budget: Option<u64>,
    /// Re-run with doubled dt and record the increment sensitivity.
    #[serde(default)]
    pub dt_check: bool,
}

fn default_quartic_mode() -> QuarticModeCfg {
    QuarticModeCfg::SplitLow
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SymbolSampleBlock {
    pub regimes: Vec<BoundRegime>,
    pub samples: usize,
    pub radius: f64,
}

impl Default for SymbolSampleBlock {
    fn default() -> Self {
        SymbolSampleBlock {
            regimes: vec![BoundRegime::Dominant, BoundRegime::ComparablePair],
            samples: 100_000,
            radius: 32.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub directory: String,
    pub plots: bool,
    /// Store every k-th frame as a snapshot; 0 keeps only first and last.
    pub frame_every: usize,
    /// Record diagnostics every k-th step; 0 picks about 1000 rows.
    pub diag_every: usize,
    /// Track the modified energy along simulated trajectories.
    pub modified_energy: bool,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock {
            directory: "out".to_string(),
            plots: false,
            frame_every: 0,
            diag_every: 0,
            modified_energy: false,
        }
    }
}

/// Parse a config file, reporting the JSON path of the offending key on
/// schema violations.
pub fn load(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| {
        Error::config(path.display().to_string(), format!("cannot read config: {e}"))
    })?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| Error::config(e.path().to_string(), e.inner().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"grid": {"l_x": 6.28, "n_x": 32, "n_y": 4}}"#).unwrap();
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.solver.dt, 1e-3);
        assert!(cfg.experiments.is_empty());
        assert_eq!(cfg.output.directory, "out");
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = serde_json::from_str::<RunConfig>(
            r#"{"grid": {"l_x": 6.28, "n_x": 32, "n_y": 4}, "grdi": 1}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("grdi"));
    }

    #[test]
    fn initial_data_recipes_build() {
        let grid = Grid::new(8.0, 32, 4).unwrap();
        let g = InitialData::Gaussian {
            amplitude: 1.0,
            width: 1.0,
        };
        let f = g.build(&grid, 0).unwrap();
        assert!(f.l2_norm() > 0.0);
        let m = InitialData::Modes {
            modes: vec![ModeSpec {
                xi_index: 1,
                eta_index: 0,
                re: 1.0,
                im: 0.0,
            }],
        };
        assert!(m.build(&grid, 0).is_ok());
        let bad = InitialData::Modes {
            modes: vec![ModeSpec {
                xi_index: 9999,
                eta_index: 0,
                re: 1.0,
                im: 0.0,
            }],
        };
        assert_eq!(bad.build(&grid, 0).unwrap_err().exit_code(), 2);
        let r = InitialData::RandomBand {
            band_n: 4.0,
            amplitude: 0.5,
        };
        let f = r.build(&grid, 3).unwrap();
        assert!((f.l2_norm() - 0.5).abs() < 1e-12);
    }
}
