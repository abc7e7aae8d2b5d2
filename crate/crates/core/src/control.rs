//! Classical control-plane arithmetic: signal line budgets, control-word
//! serialization over a few data lines, and per-stage cooling power.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bits of CPHASE switch state per quantum tick for the 21-qubit layout.
pub const DEFAULT_CPHASE_BITS: u32 = 24;
/// Bits of MUX/DEMUX select state per quantum tick for the 21-qubit layout.
pub const DEFAULT_MUX_BITS: u32 = 21;
pub const DEFAULT_FRIDGE_LINE_LIMIT: u32 = 64;

// Tolerates representation error in t_qclk / t_clk, e.g. 15 ns / (1/3 ns).
const RATIO_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockConfig {
    /// Classical clock period, seconds.
    pub t_clk: f64,
    /// Quantum clock period, seconds.
    pub t_qclk: f64,
    pub data_lines: u32,
    pub word_bits: u32,
}

impl Default for ClockConfig {
    fn default() -> Self {
        ClockConfig {
            t_clk: 1e-9,
            t_qclk: 30e-9,
            data_lines: 2,
            word_bits: control_word_bits(DEFAULT_CPHASE_BITS, DEFAULT_MUX_BITS),
        }
    }
}

impl ClockConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_clk > 0.0) || !self.t_clk.is_finite() {
            return Err(Error::InvalidParameter(format!("t_clk must be positive, got {}", self.t_clk)));
        }
        if !(self.t_qclk >= self.t_clk) {
            return Err(Error::InvalidParameter(format!(
                "t_qclk ({}) must be at least t_clk ({})",
                self.t_qclk, self.t_clk
            )));
        }
        if self.data_lines == 0 {
            return Err(Error::InvalidParameter("data_lines must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn control_word_bits(n_cphase_switch_bits: u32, n_mux_bits: u32) -> u32 {
    n_cphase_switch_bits + n_mux_bits
}

/// Whole classical cycles that fit in one quantum period.
pub fn cycles_per_quantum_tick(t_qclk: f64, t_clk: f64) -> u64 {
    let r = t_qclk / t_clk;
    if !r.is_finite() || r < 0.0 {
        return 0;
    }
    (r + RATIO_EPS).floor() as u64
}

/// Data lines needed to shift a `word_bits` word within one quantum period.
pub fn serial_lines_required(word_bits: u32, t_qclk: f64, t_clk: f64) -> Result<u32> {
    if !(t_clk > 0.0) {
        return Err(Error::InvalidParameter(format!("t_clk must be positive, got {t_clk}")));
    }
    let cycles = cycles_per_quantum_tick(t_qclk, t_clk);
    if cycles == 0 {
        return Err(Error::InfeasibleClock);
    }
    Ok(u64::from(word_bits).div_ceil(cycles) as u32)
}

/// Shortest quantum period that can carry the word on `data_lines` lines.
pub fn min_qclk(word_bits: u32, data_lines: u32, t_clk: f64) -> Result<f64> {
    if data_lines == 0 {
        return Err(Error::InvalidParameter("data_lines must be at least 1".into()));
    }
    Ok(f64::from(word_bits.div_ceil(data_lines)) * t_clk)
}

pub fn pipeline_feasible(cfg: &ClockConfig) -> Result<bool> {
    let needed = min_qclk(cfg.word_bits, cfg.data_lines, cfg.t_clk)?;
    Ok(needed <= cfg.t_qclk * (1.0 + RATIO_EPS))
}

pub fn direct_line_count(n_qubits: u32, lines_per_qubit: u32, switch_lines: u32) -> u32 {
    n_qubits * lines_per_qubit + switch_lines
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineBudget {
    pub awg_lines: u32,
    pub measurement_lines: u32,
    pub inductor_lines: u32,
    pub shared_bias_lines: u32,
    pub tuning_lines: u32,
    pub serial_control_lines: u32,
    pub fridge_limit: u32,
}

impl Default for LineBudget {
    fn default() -> Self {
        LineBudget {
            awg_lines: 16,
            measurement_lines: 16,
            inductor_lines: 22,
            shared_bias_lines: 10,
            tuning_lines: 1,
            serial_control_lines: 4,
            fridge_limit: DEFAULT_FRIDGE_LINE_LIMIT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineTotal {
    pub total: u32,
    pub within_limit: bool,
}

pub fn line_budget_total(b: &LineBudget) -> LineTotal {
    let total = b.awg_lines
        + b.measurement_lines
        + b.inductor_lines
        + b.shared_bias_lines
        + b.tuning_lines
        + b.serial_control_lines;
    LineTotal { total, within_limit: total <= b.fridge_limit }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stage {
    #[serde(rename = "300K")]
    Room,
    #[serde(rename = "4K")]
    FourKelvin,
    #[serde(rename = "100mK")]
    MixingChamber,
}

impl Stage {
    pub fn label(self) -> &'static str {
        match self {
            Stage::Room => "300K",
            Stage::FourKelvin => "4K",
            Stage::MixingChamber => "100mK",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StagePower {
    pub stage: Stage,
    /// Watts. Ignored for the room-temperature stage.
    pub cooling_budget: Option<f64>,
    /// Watts.
    pub demand: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: Stage,
    pub demand: f64,
    pub cooling_budget: Option<f64>,
    pub feasible: bool,
}

pub fn default_stages() -> Vec<StagePower> {
    vec![
        StagePower { stage: Stage::Room, cooling_budget: None, demand: 100e-3 },
        StagePower { stage: Stage::FourKelvin, cooling_budget: Some(1.5), demand: 0.0 },
        StagePower { stage: Stage::MixingChamber, cooling_budget: Some(400e-6), demand: 1.2e-3 },
    ]
}

pub fn staging_feasible(stages: &[StagePower]) -> Result<Vec<StageReport>> {
    stages
        .iter()
        .map(|s| {
            let feasible = match (s.stage, s.cooling_budget) {
                (Stage::Room, _) => true,
                (_, Some(budget)) if budget > 0.0 => s.demand <= budget,
                (stage, _) => {
                    return Err(Error::InvalidParameter(format!(
                        "stage {} needs a positive cooling budget",
                        stage.label()
                    )))
                }
            };
            Ok(StageReport { stage: s.stage, demand: s.demand, cooling_budget: s.cooling_budget, feasible })
        })
        .collect()
}

/// Everything the control-plane commands read from a config file. Times are
/// in seconds; the control word is `cphase_bits + mux_bits` wide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlPlaneConfig {
    pub t_clk: f64,
    pub t_qclk: f64,
    pub data_lines: u32,
    pub cphase_bits: u32,
    pub mux_bits: u32,
    pub lines: LineBudget,
    pub stages: Vec<StagePower>,
}

impl Default for ControlPlaneConfig {
    fn default() -> Self {
        let clock = ClockConfig::default();
        ControlPlaneConfig {
            t_clk: clock.t_clk,
            t_qclk: clock.t_qclk,
            data_lines: clock.data_lines,
            cphase_bits: DEFAULT_CPHASE_BITS,
            mux_bits: DEFAULT_MUX_BITS,
            lines: LineBudget::default(),
            stages: default_stages(),
        }
    }
}

impl ControlPlaneConfig {
    pub fn clock(&self) -> ClockConfig {
        ClockConfig {
            t_clk: self.t_clk,
            t_qclk: self.t_qclk,
            data_lines: self.data_lines,
            word_bits: control_word_bits(self.cphase_bits, self.mux_bits),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ControlPlaneConfig = serde_json::from_str(text)?;
        cfg.clock().validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SerialLinePoint {
    pub ratio: u32,
    pub t_qclk_ns: f64,
    pub lines_required: u32,
}

/// Lines required at each integer ratio `t_qclk / t_clk` in `ratios`.
pub fn serial_line_sweep(
    word_bits: u32,
    t_clk: f64,
    ratios: impl IntoIterator<Item = u32>,
) -> Result<Vec<SerialLinePoint>> {
    ratios
        .into_iter()
        .map(|r| {
            let t_qclk = f64::from(r) * t_clk;
            let lines_required = serial_lines_required(word_bits, t_qclk, t_clk)?;
            // Rounded to femtoseconds so the CSV does not carry float noise.
            let t_qclk_ns = (t_qclk * 1e15).round() / 1e6;
            Ok(SerialLinePoint { ratio: r, t_qclk_ns, lines_required })
        })
        .collect()
}

pub fn write_serial_line_sweep<W: std::io::Write>(points: &[SerialLinePoint], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const NS: f64 = 1e-9;

    #[test]
    fn word_bits() {
        assert_eq!(control_word_bits(24, 21), 45);
        assert_eq!(control_word_bits(0, 0), 0);
        assert_eq!(control_word_bits(24, 0), 24);
    }

    #[test]
    fn serial_lines_anchor_points() {
        assert_eq!(serial_lines_required(45, 45.0 * NS, NS).unwrap(), 1);
        assert_eq!(serial_lines_required(45, 23.0 * NS, NS).unwrap(), 2);
        assert_eq!(serial_lines_required(45, 15.0 * NS, NS / 3.0).unwrap(), 1);
        assert!(matches!(serial_lines_required(45, 0.5 * NS, NS), Err(Error::InfeasibleClock)));
    }

    #[test]
    fn min_qclk_anchor_points() {
        assert!((min_qclk(45, 2, NS).unwrap() - 23.0 * NS).abs() < 1e-18);
        assert!((min_qclk(45, 1, NS).unwrap() - 45.0 * NS).abs() < 1e-18);
        assert_eq!(min_qclk(0, 4, NS).unwrap(), 0.0);
        assert!(min_qclk(45, 0, NS).is_err());
    }

    #[test]
    fn pipeline_examples() {
        let cfg = ClockConfig::default();
        assert!(pipeline_feasible(&cfg).unwrap());
        assert!(!pipeline_feasible(&ClockConfig { data_lines: 1, ..cfg }).unwrap());
        assert!(pipeline_feasible(&ClockConfig { data_lines: 1, t_qclk: 45.0 * NS, ..cfg }).unwrap());
    }

    #[test]
    fn line_counts() {
        assert_eq!(direct_line_count(21, 15, 24), 339);
        assert_eq!(direct_line_count(1, 15, 0), 15);
        assert_eq!(direct_line_count(0, 15, 24), 24);
        assert_eq!(line_budget_total(&LineBudget::default()), LineTotal { total: 69, within_limit: false });
        let zeros = LineBudget {
            awg_lines: 0,
            measurement_lines: 0,
            inductor_lines: 0,
            shared_bias_lines: 0,
            tuning_lines: 0,
            serial_control_lines: 0,
            fridge_limit: 64,
        };
        assert_eq!(line_budget_total(&zeros), LineTotal { total: 0, within_limit: true });
        let loose = LineBudget { fridge_limit: 69, ..LineBudget::default() };
        assert_eq!(line_budget_total(&loose), LineTotal { total: 69, within_limit: true });
    }

    #[test]
    fn stage_examples() {
        let r = staging_feasible(&default_stages()).unwrap();
        assert!(r[0].feasible);
        assert!(r[1].feasible);
        assert!(!r[2].feasible);
        let idle = StagePower { stage: Stage::MixingChamber, cooling_budget: Some(400e-6), demand: 0.0 };
        assert!(staging_feasible(&[idle]).unwrap()[0].feasible);
        let bad = StagePower { stage: Stage::FourKelvin, cooling_budget: None, demand: 0.0 };
        assert!(staging_feasible(&[bad]).is_err());
    }

    #[test]
    fn config_round_trip_and_partial_files() {
        let cfg = ControlPlaneConfig::default();
        assert_eq!(ControlPlaneConfig::from_json(&cfg.to_json().unwrap()).unwrap(), cfg);
        let partial = ControlPlaneConfig::from_json(r#"{"t_qclk":45e-9,"data_lines":1}"#).unwrap();
        assert_eq!(partial.lines, LineBudget::default());
        assert_eq!(partial.clock().word_bits, 45);
        assert!(pipeline_feasible(&partial.clock()).unwrap());
        assert!(ControlPlaneConfig::from_json(r#"{"t_qclk":0.5e-9}"#).is_err());
        assert!(ControlPlaneConfig::from_json(r#"{"t_qlck":30e-9}"#).is_err());
    }

    #[test]
    fn sweep_csv() {
        let pts = serial_line_sweep(45, NS, [1, 23, 45]).unwrap();
        let mut buf = Vec::new();
        write_serial_line_sweep(&pts, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "ratio,t_qclk_ns,lines_required\n1,1.0,45\n23,23.0,2\n45,45.0,1\n");
    }

    proptest! {
        #[test]
        fn min_qclk_is_enough(bits in 0u32..400, lines in 1u32..32, clk_ps in 50u32..5000) {
            let t = f64::from(clk_ps) * 1e-12;
            let q = min_qclk(bits, lines, t).unwrap().max(t);
            prop_assert!(serial_lines_required(bits, q, t).unwrap() <= lines);
        }

        #[test]
        fn lines_monotone(bits in 0u32..400, r1 in 1u32..200, r2 in 1u32..200, extra in 0u32..50) {
            let (lo, hi) = (r1.min(r2), r1.max(r2));
            let a = serial_lines_required(bits, f64::from(lo) * NS, NS).unwrap();
            let b = serial_lines_required(bits, f64::from(hi) * NS, NS).unwrap();
            prop_assert!(b <= a);
            let c = serial_lines_required(bits + extra, f64::from(lo) * NS, NS).unwrap();
            prop_assert!(c >= a);
        }

        #[test]
        fn pipeline_matches_definition(bits in 0u32..200, lines in 1u32..8, ratio in 1u32..100) {
            let cfg = ClockConfig { t_clk: NS, t_qclk: f64::from(ratio) * NS, data_lines: lines, word_bits: bits };
            // Integer-cycle cross-check: ceil(bits / lines) cycles must fit in `ratio`.
            prop_assert_eq!(pipeline_feasible(&cfg).unwrap(), bits.div_ceil(lines) <= ratio);
        }

        #[test]
        fn sweep_step_curve_is_non_increasing(max in 2u32..200) {
            let pts = serial_line_sweep(45, NS, 1..=max).unwrap();
            prop_assert!(pts.windows(2).all(|w| w[1].lines_required <= w[0].lines_required));
        }
    }
}
