//! Run configuration: a JSON file whose omitted fields fall back to the
//! built-in presets, overlaid with command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spintomo::circuits::{InitialCircuit, DEFAULT_REPETITIONS, DEFAULT_SHOTS};
use spintomo::experiments::{preset, AnalysisOptions, ExperimentIConfig, ExperimentNConfig, Grid, PRESET_LABELS};
use spintomo::indicators::Bipartition;
use spintomo::tomography::FILE_NORM_TOL;
use spintomo::{Error, Result};

pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Experiment {
    I,
    II,
    III,
}

impl std::str::FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "1" => Ok(Experiment::I),
            "II" | "2" => Ok(Experiment::II),
            "III" | "3" => Ok(Experiment::III),
            _ => Err(Error::Config(format!("unknown experiment {s:?}; valid experiments: I, II, III"))),
        }
    }
}

impl Experiment {
    fn cases(self) -> &'static [&'static str] {
        match self {
            Experiment::I => &[],
            Experiment::II => &PRESET_LABELS[..3],
            Experiment::III => &PRESET_LABELS[3..],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitConfig {
    /// Rotation angle in `[0, pi)`; ignored when `initial` is set.
    pub theta: f64,
    pub initial: Option<InitialCircuit>,
    pub shots: usize,
    pub repetitions: usize,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        CircuitConfig {
            theta: std::f64::consts::FRAC_PI_2,
            initial: None,
            shots: DEFAULT_SHOTS,
            repetitions: DEFAULT_REPETITIONS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TomogramConfig {
    pub path: Option<PathBuf>,
    /// Defaults to the first qubit against the rest.
    pub bipartition: Option<Bipartition>,
    /// Slice labels for the reduced average; an explicit request must be present in the file.
    pub reduced_subset: Option<Vec<String>>,
    pub norm_tol: f64,
}

impl Default for TomogramConfig {
    fn default() -> Self {
        TomogramConfig { path: None, bipartition: None, reduced_subset: None, norm_tol: FILE_NORM_TOL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Inferred from `case` when absent; experiment I otherwise.
    pub experiment: Option<Experiment>,
    pub case: Option<String>,
    pub experiment_i: ExperimentIConfig,
    /// Fully specified experiment II/III parameters, used instead of a preset.
    pub custom: Option<ExperimentNConfig>,
    /// Replaces the analysis block of whichever experiment runs.
    pub analysis: Option<AnalysisOptions>,
    /// Overrides the preset time grid (seconds).
    pub t_grid: Option<Grid>,
    pub epsilon: Option<f64>,
    /// Times at which the tomogram is written (nearest grid point).
    pub snapshots: Vec<f64>,
    /// Master seed for every sampled quantity.
    pub seed: u64,
    pub out: PathBuf,
    pub exact: bool,
    pub circuit: CircuitConfig,
    pub tomogram: TomogramConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment: None,
            case: None,
            experiment_i: ExperimentIConfig::default(),
            custom: None,
            analysis: None,
            t_grid: None,
            epsilon: None,
            snapshots: Vec::new(),
            seed: DEFAULT_SEED,
            out: PathBuf::from("out"),
            exact: false,
            circuit: CircuitConfig::default(),
            tomogram: TomogramConfig::default(),
        }
    }
}

/// What an `experiment` run will execute.
#[derive(Clone, Debug)]
pub enum Plan {
    I(ExperimentIConfig),
    N(ExperimentNConfig),
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("invalid config {}: {e}", path.display())))
    }

    fn with_seed(&self, mut analysis: AnalysisOptions) -> AnalysisOptions {
        analysis.squeezing.seed = self.seed;
        analysis.discord.seed = self.seed;
        analysis
    }

    pub fn experiment_plan(&self) -> Result<Plan> {
        if let Some(custom) = &self.custom {
            let expected = match custom.n_qubits {
                2 => Experiment::II,
                _ => Experiment::III,
            };
            if self.experiment.is_some_and(|e| e != expected) {
                return Err(Error::Config(format!("custom {}-qubit parameters do not fit experiment {:?}", custom.n_qubits, self.experiment.unwrap())));
            }
            let mut cfg = custom.clone();
            self.overlay(&mut cfg);
            cfg.validate()?;
            return Ok(Plan::N(cfg));
        }
        let experiment = match (self.experiment, &self.case) {
            (Some(e), _) => e,
            (None, Some(case)) => {
                let label = preset(case)?.case;
                if Experiment::II.cases().contains(&label.as_str()) {
                    Experiment::II
                } else {
                    Experiment::III
                }
            }
            (None, None) => Experiment::I,
        };
        match experiment {
            Experiment::I => {
                if let Some(case) = &self.case {
                    return Err(Error::Config(format!("experiment I has no cases, got {case:?}")));
                }
                let mut cfg = self.experiment_i.clone();
                cfg.analysis = self.with_seed(self.analysis.clone().unwrap_or(cfg.analysis));
                cfg.validate()?;
                Ok(Plan::I(cfg))
            }
            e => {
                let valid = e.cases();
                let case = self.case.clone().unwrap_or_else(|| valid[0].to_string());
                let mut cfg = preset(&case)?;
                if !valid.contains(&cfg.case.as_str()) {
                    return Err(Error::Config(format!(
                        "case {case:?} does not belong to experiment {e:?}; valid cases: {}",
                        valid.join(", ")
                    )));
                }
                self.overlay(&mut cfg);
                cfg.validate()?;
                Ok(Plan::N(cfg))
            }
        }
    }

    fn overlay(&self, cfg: &mut ExperimentNConfig) {
        if let Some(grid) = &self.t_grid {
            cfg.t_grid = grid.clone();
        }
        if let Some(eps) = self.epsilon {
            cfg.epsilon = eps;
        }
        cfg.analysis = self.with_seed(self.analysis.clone().unwrap_or_else(|| cfg.analysis.clone()));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_experiment_one() {
        let cfg: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
        match cfg.experiment_plan().unwrap() {
            Plan::I(c) => assert_eq!(c.chi_t_grid.values().len(), 65),
            Plan::N(_) => panic!("expected experiment I"),
        }
    }

    #[test]
    fn case_selects_experiment() {
        let cfg = RunConfig { case: Some("C".into()), seed: 9, ..Default::default() };
        match cfg.experiment_plan().unwrap() {
            Plan::N(c) => {
                assert_eq!(c.n_qubits, 3);
                assert_eq!(c.analysis.discord.seed, 9);
            }
            Plan::I(_) => panic!("expected experiment III"),
        }
        let wrong = RunConfig { experiment: Some(Experiment::II), case: Some("A".into()), ..Default::default() };
        let msg = wrong.experiment_plan().unwrap_err().to_string();
        assert!(msg.contains("i, ii, iii"), "{msg}");
        let unknown = RunConfig { case: Some("Z".into()), ..Default::default() };
        assert!(unknown.experiment_plan().unwrap_err().to_string().contains("i, ii, iii, A, B, C, D"));
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"sede": 1}"#).is_err());
    }

    #[test]
    fn round_trip() {
        let cfg = RunConfig { case: Some("ii".into()), snapshots: vec![0.001], ..Default::default() };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
    }
}
