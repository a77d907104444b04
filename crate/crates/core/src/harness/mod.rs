//! Experiment sweeps. A cell is one (axis value, seed, algorithm) triple; all
//! algorithms of a (value, seed) pair see the same instance. Cells run on a
//! worker pool and rows are sorted before they are returned.

mod report;

pub use report::{
    emit_report, load_results_csv, nsd_series, render_svg, write_results_csv, Report, Series,
};

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{ath_frame, zz_frame};
use crate::error::{Error, Result};
use crate::exact::{opt_bruteforce_frame, opt_bruteforce_horizon, OracleGuard};
use crate::learning::{pl_train, ql_train, rl_policy, schedule_for_plan, LearnerConfig, RunRecord};
use crate::model::{count_served, validate_schedule, FrameAssignment, Instance, Schedule};
use crate::online::{bms, ranking_m1, selfish_frame};
use crate::rng::{hash_words, stream};
use crate::scenario::{generate_instance, ScenarioParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Bms,
    Ath,
    Zz,
    Ranking,
    Selfish,
    Opt,
    Pl,
    Ql,
    Rl,
}

impl Algorithm {
    pub const ALL: [Algorithm; 9] = [
        Algorithm::Bms,
        Algorithm::Ath,
        Algorithm::Zz,
        Algorithm::Ranking,
        Algorithm::Selfish,
        Algorithm::Opt,
        Algorithm::Pl,
        Algorithm::Ql,
        Algorithm::Rl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Bms => "bms",
            Algorithm::Ath => "ath",
            Algorithm::Zz => "zz",
            Algorithm::Ranking => "ranking",
            Algorithm::Selfish => "selfish",
            Algorithm::Opt => "opt",
            Algorithm::Pl => "pl",
            Algorithm::Ql => "ql",
            Algorithm::Rl => "rl",
        }
    }

    /// Whether the algorithm needs the whole frame in advance.
    pub fn is_offline(self) -> bool {
        matches!(self, Algorithm::Zz | Algorithm::Opt)
    }

    pub fn is_learner(self) -> bool {
        matches!(self, Algorithm::Pl | Algorithm::Ql | Algorithm::Rl)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::param("algorithm", format!("unknown algorithm `{s}`")))
    }
}

/// Scenario parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Number of devices `m`.
    #[serde(alias = "m")]
    Devices,
    /// Number of slots `n`.
    #[serde(alias = "n")]
    Slots,
    /// Maximum energy in dBm.
    #[serde(alias = "e_max")]
    MaxPowerDbm,
    /// Largest packet size in bits.
    #[serde(alias = "l_max")]
    LMaxBits,
    /// Group cap `M`.
    GroupCap,
    /// Number of frames `k`.
    #[serde(alias = "k")]
    Frames,
}

impl SweepAxis {
    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::Devices => "number of devices m",
            SweepAxis::Slots => "number of RBs n",
            SweepAxis::MaxPowerDbm => "maximum power (dBm)",
            SweepAxis::LMaxBits => "maximum packet size (bits)",
            SweepAxis::GroupCap => "group size M",
            SweepAxis::Frames => "number of frames k",
        }
    }

    /// `params` with this axis set to `value`.
    pub fn apply(self, params: &ScenarioParams, value: f64) -> Result<ScenarioParams> {
        let count = || {
            if value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
                Ok(value as usize)
            } else {
                Err(Error::param(
                    "sweep.values",
                    format!("{value} is not a count"),
                ))
            }
        };
        let mut p = params.clone();
        match self {
            SweepAxis::Devices => p.num_devices = count()?,
            SweepAxis::Slots => p.num_slots = count()?,
            SweepAxis::MaxPowerDbm => p.max_power_dbm = value,
            SweepAxis::LMaxBits => p.l_max_bits = count()? as u64,
            SweepAxis::GroupCap => p.group_cap = count()?,
            SweepAxis::Frames => p.num_frames = count()?,
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// Everything needed to reproduce one figure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub scenario: ScenarioParams,
    pub algorithms: Vec<Algorithm>,
    pub sweep: Sweep,
    /// Replicate ids; each (value, replicate) pair gets its own instance.
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub learner: LearnerConfig,
    #[serde(default)]
    pub guard: OracleGuard,
    /// Measure wall time per cell. Off by default so reruns give identical files.
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::param(
                "algorithms",
                "at least one algorithm is required",
            ));
        }
        if self.seeds.is_empty() {
            return Err(Error::param("seeds", "at least one seed is required"));
        }
        if self.sweep.values.is_empty() {
            return Err(Error::param(
                "sweep.values",
                "at least one value is required",
            ));
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::param("name", "must be a non-empty file stem"));
        }
        for &v in &self.sweep.values {
            let p = self.sweep.axis.apply(&self.scenario, v)?;
            for (algorithm, cap) in [(Algorithm::Zz, 2), (Algorithm::Ranking, 1)] {
                if self.algorithms.contains(&algorithm) && p.group_cap != cap {
                    return Err(Error::GroupCap {
                        algorithm: algorithm.name(),
                        required: cap,
                        actual: p.group_cap,
                    });
                }
            }
        }
        self.learner.validate()
    }

    /// Seed of the instance for `value` and replicate `seed`.
    pub fn cell_seed(&self, value: f64, seed: u64) -> u64 {
        hash_words(&[self.scenario.seed, value.to_bits(), seed])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub axis_value: f64,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub nsd: f64,
    pub runtime_ms: f64,
}

/// Mean power of a learner per frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub axis_value: f64,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub frame: usize,
    pub mean_pc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub axis_value: f64,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub name: String,
    pub axis: SweepAxis,
    pub rows: Vec<ResultRow>,
    pub power: Vec<PowerRow>,
    pub errors: Vec<CellError>,
}

impl ResultTable {
    /// Mean and population standard deviation of NSD for one cell column.
    pub fn summary(&self, algorithm: Algorithm, axis_value: f64) -> Option<(f64, f64)> {
        let values: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.algorithm == algorithm && r.axis_value == axis_value)
            .map(|r| r.nsd)
            .collect();
        mean_std(&values)
    }
}

pub(crate) fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

const STREAM_RANKING: u64 = 0x524B;

/// Outcome of one cell before it is turned into rows.
struct CellOutcome {
    nsd: f64,
    power: Option<Vec<f64>>,
}

/// Runs a single-frame algorithm frame after frame. A device served in one
/// frame has spent its energy and sits out the later ones.
fn per_frame(
    instance: &Instance,
    mut solve: impl FnMut(&Instance) -> Result<FrameAssignment>,
) -> Result<Schedule> {
    let mut spent = vec![false; instance.num_devices()];
    let mut frames = Vec::with_capacity(instance.num_frames());
    for t in 0..instance.num_frames() {
        let view = if instance.num_frames() == 1 {
            instance.clone()
        } else {
            instance.single_frame_excluding(t, &spent)
        };
        let mut a = solve(&view)?;
        a.frame = t;
        for g in &mut a.groups {
            g.frame = t;
            for &i in &g.members {
                spent[i] = true;
            }
        }
        frames.push(a);
    }
    Ok(Schedule::from_assignments(instance, &frames))
}

fn learner_outcome(instance: &Instance, record: RunRecord) -> Result<CellOutcome> {
    if let Some(last) = record.rounds.last() {
        let schedule = schedule_for_plan(instance, &last.spend)?;
        check(instance, &schedule)?;
    }
    Ok(CellOutcome {
        nsd: record.final_score(),
        power: Some(record.power_profile()),
    })
}

fn check(instance: &Instance, schedule: &Schedule) -> Result<usize> {
    let violations = validate_schedule(instance, schedule)?;
    if let Some(v) = violations.first() {
        return Err(Error::Experiment(format!(
            "schedule breaks {} constraint(s), first: {v}",
            violations.len()
        )));
    }
    Ok(count_served(schedule))
}

fn run_cell(
    spec: &ExperimentSpec,
    instance: &Instance,
    algorithm: Algorithm,
    cell_seed: u64,
) -> Result<CellOutcome> {
    let plain = |schedule: Schedule| -> Result<CellOutcome> {
        Ok(CellOutcome {
            nsd: check(instance, &schedule)? as f64,
            power: None,
        })
    };
    match algorithm {
        Algorithm::Bms => plain(per_frame(instance, |v| bms(v, 0, &v.full_budgets()))?),
        Algorithm::Ath => plain(per_frame(instance, |v| Ok(ath_frame(v, 0)))?),
        Algorithm::Zz => plain(per_frame(instance, |v| zz_frame(v, 0))?),
        Algorithm::Selfish => plain(per_frame(instance, |v| Ok(selfish_frame(v, 0)))?),
        Algorithm::Ranking => {
            let mut rank: Vec<usize> = (0..instance.num_devices()).collect();
            rank.shuffle(&mut stream(&[cell_seed, STREAM_RANKING]));
            plain(per_frame(instance, |v| ranking_m1(v, 0, &rank))?)
        }
        Algorithm::Opt => {
            if instance.num_frames() == 1 {
                let o = opt_bruteforce_frame(instance, 0, &instance.full_budgets(), &spec.guard)?;
                plain(Schedule::from_assignments(instance, [&o.assignment]))
            } else {
                let o = opt_bruteforce_horizon(instance, &spec.guard)?;
                plain(Schedule::from_assignments(instance, &o.assignments))
            }
        }
        Algorithm::Pl | Algorithm::Ql => {
            let cfg = LearnerConfig {
                seed: cell_seed,
                ..spec.learner.clone()
            };
            let record = if algorithm == Algorithm::Pl {
                pl_train(instance, &cfg)?
            } else {
                ql_train(instance, &cfg)?
            };
            learner_outcome(instance, record)
        }
        Algorithm::Rl => learner_outcome(
            instance,
            rl_policy(instance, spec.learner.rounds, cell_seed)?,
        ),
    }
}

enum CellResult {
    Done(ResultRow, Vec<PowerRow>),
    Failed(CellError),
}

/// Runs every cell of `spec` on `jobs` worker threads (all cores when `None`).
/// Cells that fail are reported in `errors`; the others still run.
pub fn run_experiment(spec: &ExperimentSpec, jobs: Option<usize>) -> Result<ResultTable> {
    spec.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Experiment(format!("worker pool: {e}")))?;

    let pairs: Vec<(f64, u64)> = spec
        .sweep
        .values
        .iter()
        .flat_map(|&v| spec.seeds.iter().map(move |&s| (v, s)))
        .collect();

    let results: Vec<CellResult> = pool.install(|| {
        pairs
            .par_iter()
            .flat_map_iter(|&(value, seed)| {
                let cell_seed = spec.cell_seed(value, seed);
                let instance = spec
                    .sweep
                    .axis
                    .apply(&spec.scenario, value)
                    .and_then(|p| generate_instance(&p.with_seed(cell_seed)));
                spec.algorithms
                    .iter()
                    .map(|&algorithm| {
                        let fail = |message: String| {
                            CellResult::Failed(CellError {
                                axis_value: value,
                                algorithm,
                                seed,
                                message,
                            })
                        };
                        let instance = match &instance {
                            Ok(i) => i,
                            Err(e) => return fail(e.to_string()),
                        };
                        let start = Instant::now();
                        match run_cell(spec, instance, algorithm, cell_seed) {
                            Ok(out) => {
                                let runtime_ms = if spec.record_timing {
                                    start.elapsed().as_secs_f64() * 1e3
                                } else {
                                    0.0
                                };
                                let power = out
                                    .power
                                    .unwrap_or_default()
                                    .into_iter()
                                    .enumerate()
                                    .map(|(frame, mean_pc)| PowerRow {
                                        axis_value: value,
                                        algorithm,
                                        seed,
                                        frame,
                                        mean_pc,
                                    })
                                    .collect();
                                CellResult::Done(
                                    ResultRow {
                                        axis_value: value,
                                        algorithm,
                                        seed,
                                        nsd: out.nsd,
                                        runtime_ms,
                                    },
                                    power,
                                )
                            }
                            Err(e) => fail(e.to_string()),
                        }
                    })
                    .collect::<Vec<_>>()
            })
            .collect()
    });

    let mut table = ResultTable {
        name: spec.name.clone(),
        axis: spec.sweep.axis,
        rows: Vec::new(),
        power: Vec::new(),
        errors: Vec::new(),
    };
    for r in results {
        match r {
            CellResult::Done(row, power) => {
                table.rows.push(row);
                table.power.extend(power);
            }
            CellResult::Failed(e) => table.errors.push(e),
        }
    }
    table.rows.sort_by(|a, b| {
        a.axis_value
            .total_cmp(&b.axis_value)
            .then(a.algorithm.cmp(&b.algorithm))
            .then(a.seed.cmp(&b.seed))
    });
    table.power.sort_by(|a, b| {
        a.axis_value
            .total_cmp(&b.axis_value)
            .then(a.algorithm.cmp(&b.algorithm))
            .then(a.seed.cmp(&b.seed))
            .then(a.frame.cmp(&b.frame))
    });
    table.errors.sort_by(|a, b| {
        a.axis_value
            .total_cmp(&b.axis_value)
            .then(a.algorithm.cmp(&b.algorithm))
            .then(a.seed.cmp(&b.seed))
    });
    Ok(table)
}
