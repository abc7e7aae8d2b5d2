use std::path::PathBuf;

use qecarch::control::ControlPlaneConfig;
use qecarch::gate_accuracy::{read_calibration, ExchangeModel};
use qecarch::{default_bs9_21_arch, generate_bs9_21_half_round, ArchModel, Circuit, ExactOptions, IdleWindowPolicy};

use crate::args::{CommonArgs, OnOff};
use crate::{read_text, CliError, CliResult};

const NS: f64 = 1e-9;

/// Everything a command needs, loaded and validated up front.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub circuit: Circuit,
    pub circuit_source: String,
    pub arch: ArchModel,
    pub arch_source: String,
    /// Constraint settings to run, `false` = off.
    pub constraint_settings: Vec<bool>,
    pub policy: IdleWindowPolicy,
    pub control: ControlPlaneConfig,
    pub exchange: ExchangeModel,
    pub exact: ExactOptions,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn load(a: &CommonArgs) -> CliResult<RunConfig> {
        let (circuit, circuit_source) = match &a.circuit {
            Some(p) => {
                let c = Circuit::from_json(&read_text(p)?).map_err(|e| CliError::core(p.display().to_string(), e))?;
                (c, p.display().to_string())
            }
            None => (generate_bs9_21_half_round(), "generated 21-qubit half-round".to_string()),
        };
        let (arch, arch_source) = match &a.arch {
            Some(p) => {
                let arch =
                    ArchModel::from_json(&read_text(p)?).map_err(|e| CliError::core(p.display().to_string(), e))?;
                (arch, p.display().to_string())
            }
            None => (default_bs9_21_arch(), "bundled 21-qubit layout".to_string()),
        };
        let mut control = match &a.config {
            Some(p) => {
                ControlPlaneConfig::from_json(&read_text(p)?).map_err(|e| CliError::core(p.display().to_string(), e))?
            }
            None => ControlPlaneConfig::default(),
        };
        if let Some(t) = a.tclk {
            control.t_clk = t * NS;
        }
        if let Some(t) = a.tqclk {
            control.t_qclk = t * NS;
        }
        if let Some(l) = a.lines {
            control.data_lines = l;
        }
        control.clock().validate().map_err(|e| CliError::core("clock settings", e))?;
        let exchange = match &a.calibration {
            Some(p) => {
                let text = read_text(p)?;
                let ctx = || p.display().to_string();
                let samples = read_calibration(text.as_bytes()).map_err(|e| CliError::core(ctx(), e))?;
                ExchangeModel::from_samples(&samples, false).map_err(|e| CliError::core(ctx(), e))?
            }
            None => ExchangeModel::default_table(),
        };
        if a.workers == Some(0) {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        let mut exact = ExactOptions::with_budget(a.budget_nodes);
        if let Some(w) = a.workers {
            exact.workers = w;
        }
        let constraint_settings = match a.constraints {
            None => vec![false, true],
            Some(OnOff::Off) => vec![false],
            Some(OnOff::On) => vec![true],
        };
        Ok(RunConfig {
            circuit,
            circuit_source,
            arch,
            arch_source,
            constraint_settings,
            policy: a.policy.into(),
            control,
            exchange,
            exact,
            out: a.out.clone(),
        })
    }
}
