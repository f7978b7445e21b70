//! Benchmark harness: runs every generator over a seed matrix, collects
//! per-run metric records, summarizes them, and checks the expected
//! method-versus-method rankings.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evo::{evolve, EvoConfig};
use crate::fitness::{evaluate, FitnessWeights};
use crate::grid::Grid;
use crate::metrics::MetricReport;
use crate::stats::{mean, quartiles, sample_std};
use crate::swarm::{run_swarm, SwarmConfig, SwarmMethod};
use crate::wfc::{generate, WfcConfig};

/// Errors from experiment assembly and summarization.
#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown method '{0}'; expected wfc, pso, gwo, ea, or map-elites")]
    UnknownMethod(String),
    #[error("no run records to summarize")]
    NoRecords,
    #[error("method {method} has no successful runs")]
    NoSuccesses { method: Method },
    #[error("rank checks need all five methods; missing {missing:?}")]
    MissingMethods { missing: Vec<Method> },
}

/// One map generator under comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Wfc,
    Pso,
    Gwo,
    Ea,
    MapElites,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Wfc,
        Method::Pso,
        Method::Gwo,
        Method::Ea,
        Method::MapElites,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Wfc => "wfc",
            Method::Pso => "pso",
            Method::Gwo => "gwo",
            Method::Ea => "ea",
            Method::MapElites => "map-elites",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Method, BenchError> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| BenchError::UnknownMethod(s.to_string()))
    }
}

/// Full description of one experiment: which methods, on which grid
/// sizes, how many runs each, and under which configurations.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub methods: Vec<Method>,
    pub sizes: Vec<(usize, usize)>,
    pub runs: usize,
    pub master_seed: u64,
    pub weights: FitnessWeights<f64>,
    pub wfc: WfcConfig,
    pub swarm: SwarmConfig<f64>,
    pub evo: EvoConfig<f64>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            methods: Method::ALL.to_vec(),
            sizes: vec![(12, 12)],
            runs: 10,
            master_seed: 0,
            weights: FitnessWeights::default(),
            wfc: WfcConfig::default(),
            swarm: SwarmConfig::default(),
            evo: EvoConfig::default(),
        }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic per-run seed; changing any coordinate (method, size,
/// run index) decorrelates the stream.
pub fn derive_seed(master: u64, method: Method, height: usize, width: usize, run: usize) -> u64 {
    let mut s = splitmix64(master ^ fnv1a(method.name().as_bytes()));
    s = splitmix64(s ^ ((height as u64) << 32 | width as u64));
    splitmix64(s ^ run as u64)
}

/// What one run produced; degenerate outputs (no network at all) are
/// recorded as failures so every success carries a finite fitness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunOutcome {
    Success {
        grid: Grid,
        report: MetricReport,
        fitness: f64,
    },
    Failed {
        reason: String,
    },
}

/// One benchmark run with enough context to reproduce it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: Method,
    pub height: usize,
    pub width: usize,
    pub run_index: usize,
    pub seed: u64,
    pub wall_time_s: f64,
    pub outcome: RunOutcome,
}

fn outcome_of(grid: Grid, weights: &FitnessWeights<f64>) -> RunOutcome {
    let (report, fitness) = evaluate(&grid, weights);
    if fitness.is_valid() {
        RunOutcome::Success {
            grid,
            report,
            fitness: fitness.value(),
        }
    } else {
        RunOutcome::Failed {
            reason: "degenerate output with no network".into(),
        }
    }
}

fn run_once(
    spec: &ExperimentSpec,
    method: Method,
    height: usize,
    width: usize,
    seed: u64,
) -> RunOutcome {
    match method {
        Method::Wfc => {
            let cfg = WfcConfig {
                seed,
                ..spec.wfc.clone()
            };
            match generate(height, width, &cfg) {
                Ok(grid) => outcome_of(grid, &spec.weights),
                Err(failure) => RunOutcome::Failed {
                    reason: failure.to_string(),
                },
            }
        }
        Method::Pso | Method::Gwo => {
            let rule = if method == Method::Pso {
                SwarmMethod::Pso
            } else {
                SwarmMethod::Gwo
            };
            let cfg = SwarmConfig {
                seed,
                ..spec.swarm.clone()
            };
            let run = run_swarm(rule, height, width, &cfg, &spec.weights);
            outcome_of(run.grid, &spec.weights)
        }
        Method::Ea | Method::MapElites => {
            let cfg = EvoConfig {
                seed,
                map_elites: method == Method::MapElites,
                ..spec.evo.clone()
            };
            let result = evolve(height, width, &cfg, &spec.weights);
            outcome_of(result.best.grid, &spec.weights)
        }
    }
}

/// Runs the whole experiment matrix, invoking `progress` after each run.
pub fn run_experiment_with(
    spec: &ExperimentSpec,
    mut progress: impl FnMut(&RunRecord),
) -> Vec<RunRecord> {
    let mut records = Vec::new();
    for &method in &spec.methods {
        for &(height, width) in &spec.sizes {
            for run_index in 0..spec.runs {
                let seed = derive_seed(spec.master_seed, method, height, width, run_index);
                let start = Instant::now();
                let outcome = run_once(spec, method, height, width, seed);
                let record = RunRecord {
                    method,
                    height,
                    width,
                    run_index,
                    seed,
                    wall_time_s: start.elapsed().as_secs_f64(),
                    outcome,
                };
                progress(&record);
                records.push(record);
            }
        }
    }
    records
}

/// Runs the whole experiment matrix.
pub fn run_experiment(spec: &ExperimentSpec) -> Vec<RunRecord> {
    run_experiment_with(spec, |_| {})
}

/// Metric columns summarized per method, in report order.
pub const METRIC_COLUMNS: [&str; 12] = [
    "components",
    "dead_ends",
    "cyclomatic",
    "boundary_violations",
    "acv_score",
    "coverage",
    "crossings",
    "straight_runs",
    "adjacent_turns",
    "bridges",
    "edges",
    "fitness",
];

fn metric_value(column: &str, report: &MetricReport, fitness: f64) -> f64 {
    match column {
        "components" => report.connected_components as f64,
        "dead_ends" => report.dead_ends as f64,
        "cyclomatic" => report.cyclomatic_complexity as f64,
        "boundary_violations" => report.boundary_violations as f64,
        "acv_score" => report.adjacent_crossing_violation_score as f64,
        "coverage" => report.coverage,
        "crossings" => report.crossings as f64,
        "straight_runs" => report.straight_run_score as f64,
        "adjacent_turns" => report.adjacent_turns as f64,
        "bridges" => report.bridges as f64,
        "edges" => report.edges as f64,
        "fitness" => fitness,
        other => unreachable!("unknown metric column {other}"),
    }
}

/// Five-number summary of one metric over a method's successful runs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stats {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl Stats {
    fn from_values(values: &[f64]) -> Stats {
        let (q1, median, q3) = quartiles(values);
        Stats {
            n: values.len(),
            mean: mean(values),
            std: sample_std(values),
            q1,
            median,
            q3,
        }
    }

    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

/// Per-method aggregate over all sizes in the record set.
#[derive(Clone, Debug, Serialize)]
pub struct MethodSummary {
    pub runs: usize,
    pub successes: usize,
    pub mean_wall_time_s: f64,
    pub cells: BTreeMap<&'static str, Stats>,
}

/// Summary table over every method present in the records.
#[derive(Clone, Debug, Serialize)]
pub struct StatTable {
    pub per_method: BTreeMap<Method, MethodSummary>,
}

impl StatTable {
    pub fn stats(&self, method: Method, column: &str) -> Option<&Stats> {
        self.per_method.get(&method)?.cells.get(column)
    }

    /// Smallest success count across methods; rankings below 10 are
    /// noisy.
    pub fn min_successes(&self) -> usize {
        self.per_method
            .values()
            .map(|m| m.successes)
            .min()
            .unwrap_or(0)
    }

    /// Flat CSV: one row per method and metric.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,metric,n,mean,std,q1,median,q3\n");
        for (method, summary) in &self.per_method {
            for column in METRIC_COLUMNS {
                let s = &summary.cells[column];
                out.push_str(&format!(
                    "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
                    method, column, s.n, s.mean, s.std, s.q1, s.median, s.q3
                ));
            }
        }
        out
    }

    fn markdown_group(&self, title: &str, columns: &[&str]) -> String {
        let mut out = format!("## {title}\n\n| method |");
        for c in columns {
            out.push_str(&format!(" {c} |"));
        }
        out.push_str("\n|--------|");
        for _ in columns {
            out.push_str("------|");
        }
        out.push('\n');
        for (method, summary) in &self.per_method {
            out.push_str(&format!("| {method} |"));
            for c in columns {
                let s = &summary.cells[*c];
                out.push_str(&format!(" {:.2} ± {:.2} |", s.mean, s.std));
            }
            out.push('\n');
        }
        out.push('\n');
        out
    }

    /// Markdown report: success counts plus grouped mean ± std tables.
    pub fn to_markdown(&self) -> String {
        let mut out = String::from("## Runs\n\n| method | runs | successes | mean wall time (s) |\n|--------|------|-----------|--------------------|\n");
        for (method, summary) in &self.per_method {
            out.push_str(&format!(
                "| {} | {} | {} | {:.3} |\n",
                method, summary.runs, summary.successes, summary.mean_wall_time_s
            ));
        }
        out.push('\n');
        out.push_str(&self.markdown_group(
            "Network structure",
            &["components", "dead_ends", "cyclomatic"],
        ));
        out.push_str(&self.markdown_group(
            "Constraint violations",
            &["boundary_violations", "acv_score", "coverage"],
        ));
        out.push_str(&self.markdown_group(
            "Road composition",
            &["crossings", "straight_runs", "adjacent_turns"],
        ));
        out.push_str(&self.markdown_group("Other", &["bridges", "edges", "fitness"]));
        out
    }
}

/// Aggregates records into per-method statistics over successful runs.
pub fn summarize(records: &[RunRecord]) -> Result<StatTable, BenchError> {
    if records.is_empty() {
        return Err(BenchError::NoRecords);
    }
    let mut per_method = BTreeMap::new();
    for record in records {
        per_method
            .entry(record.method)
            .or_insert_with(Vec::new)
            .push(record);
    }
    let mut table = BTreeMap::new();
    for (method, group) in per_method {
        let successes: Vec<(&MetricReport, f64)> = group
            .iter()
            .filter_map(|r| match &r.outcome {
                RunOutcome::Success {
                    report, fitness, ..
                } => Some((report, *fitness)),
                RunOutcome::Failed { .. } => None,
            })
            .collect();
        if successes.is_empty() {
            return Err(BenchError::NoSuccesses { method });
        }
        let mut cells = BTreeMap::new();
        for column in METRIC_COLUMNS {
            let values: Vec<f64> = successes
                .iter()
                .map(|(report, fitness)| metric_value(column, report, *fitness))
                .collect();
            cells.insert(column, Stats::from_values(&values));
        }
        table.insert(
            method,
            MethodSummary {
                runs: group.len(),
                successes: successes.len(),
                mean_wall_time_s: mean(&group.iter().map(|r| r.wall_time_s).collect::<Vec<_>>()),
                cells,
            },
        );
    }
    Ok(StatTable { per_method: table })
}

/// Flat per-run CSV of the raw records.
pub fn records_to_csv(records: &[RunRecord]) -> String {
    let mut out = String::from("method,height,width,run_index,seed,wall_time_s,status");
    for column in METRIC_COLUMNS {
        out.push(',');
        out.push_str(column);
    }
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{:.6},",
            r.method, r.height, r.width, r.run_index, r.seed, r.wall_time_s
        ));
        match &r.outcome {
            RunOutcome::Success {
                report, fitness, ..
            } => {
                out.push_str("success");
                for column in METRIC_COLUMNS {
                    out.push_str(&format!(",{}", metric_value(column, report, *fitness)));
                }
            }
            RunOutcome::Failed { .. } => {
                out.push_str("failed");
                for _ in METRIC_COLUMNS {
                    out.push(',');
                }
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerdictStatus {
    Pass,
    Fail,
    /// The check cannot pass under the chosen configuration and that
    /// is understood, not a defect.
    ExpectedFail,
}

/// Outcome of one ranking expectation.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub name: &'static str,
    pub status: VerdictStatus,
    pub detail: String,
}

fn mean_of(table: &StatTable, method: Method, column: &str) -> f64 {
    table.stats(method, column).expect("method present").mean
}

/// Checks the expected relationships between methods: the optimizers
/// eliminate boundary and adjacency violations, everything covers the
/// grid, collapse-based generation leaves the most dead ends, and the
/// archive-driven search spreads widest in cyclomatic complexity.
pub fn rank_check(table: &StatTable, wfc_hard_boundary: bool) -> Result<Vec<Verdict>, BenchError> {
    let missing: Vec<Method> = Method::ALL
        .into_iter()
        .filter(|m| !table.per_method.contains_key(m))
        .collect();
    if !missing.is_empty() {
        return Err(BenchError::MissingMethods { missing });
    }
    let optimizers = [Method::Pso, Method::Gwo, Method::Ea, Method::MapElites];
    let mut verdicts = Vec::new();

    let dirty: Vec<Method> = optimizers
        .into_iter()
        .filter(|&m| mean_of(table, m, "boundary_violations") != 0.0)
        .collect();
    let wfc_bv = mean_of(table, Method::Wfc, "boundary_violations");
    verdicts.push(if !dirty.is_empty() {
        Verdict {
            name: "optimizers_zero_boundary_violations",
            status: VerdictStatus::Fail,
            detail: format!("nonzero boundary violations from {dirty:?}"),
        }
    } else if wfc_bv > 0.0 {
        Verdict {
            name: "optimizers_zero_boundary_violations",
            status: VerdictStatus::Pass,
            detail: format!("optimizer means all 0, wfc mean {wfc_bv:.2}"),
        }
    } else if wfc_hard_boundary {
        Verdict {
            name: "optimizers_zero_boundary_violations",
            status: VerdictStatus::ExpectedFail,
            detail: "hard boundary also pins wfc to 0, so the gap disappears".into(),
        }
    } else {
        Verdict {
            name: "optimizers_zero_boundary_violations",
            status: VerdictStatus::Fail,
            detail: "wfc shows no boundary violations despite open borders".into(),
        }
    });

    let uncovered: Vec<Method> = Method::ALL
        .into_iter()
        .filter(|&m| mean_of(table, m, "coverage") != 1.0)
        .collect();
    verdicts.push(Verdict {
        name: "full_coverage_everywhere",
        status: if uncovered.is_empty() {
            VerdictStatus::Pass
        } else {
            VerdictStatus::Fail
        },
        detail: if uncovered.is_empty() {
            "coverage mean is exactly 1.0 for every method".into()
        } else {
            format!("coverage below 1.0 for {uncovered:?}")
        },
    });

    let wfc_de = mean_of(table, Method::Wfc, "dead_ends");
    let de_rivals: Vec<Method> = optimizers
        .into_iter()
        .filter(|&m| mean_of(table, m, "dead_ends") >= wfc_de)
        .collect();
    verdicts.push(Verdict {
        name: "wfc_most_dead_ends",
        status: if de_rivals.is_empty() {
            VerdictStatus::Pass
        } else {
            VerdictStatus::Fail
        },
        detail: if de_rivals.is_empty() {
            format!("wfc mean {wfc_de:.2} strictly above every optimizer")
        } else {
            format!("wfc mean {wfc_de:.2} not above {de_rivals:?}")
        },
    });

    let ea_acv = mean_of(table, Method::Ea, "acv_score");
    let pso_acv = mean_of(table, Method::Pso, "acv_score");
    let gwo_acv = mean_of(table, Method::Gwo, "acv_score");
    let ea_wins = ea_acv < pso_acv && ea_acv < gwo_acv;
    verdicts.push(Verdict {
        name: "ea_fewest_adjacent_crossings",
        status: if ea_wins {
            VerdictStatus::Pass
        } else {
            VerdictStatus::Fail
        },
        detail: format!("ea {ea_acv:.2} vs pso {pso_acv:.2}, gwo {gwo_acv:.2}"),
    });

    let elite_iqr = table
        .stats(Method::MapElites, "cyclomatic")
        .expect("present")
        .iqr();
    let narrow: Vec<Method> = [Method::Wfc, Method::Pso, Method::Gwo, Method::Ea]
        .into_iter()
        .filter(|&m| table.stats(m, "cyclomatic").expect("present").iqr() >= elite_iqr)
        .collect();
    verdicts.push(Verdict {
        name: "map_elites_widest_cyclomatic_spread",
        status: if narrow.is_empty() {
            VerdictStatus::Pass
        } else {
            VerdictStatus::Fail
        },
        detail: if narrow.is_empty() {
            format!("map-elites iqr {elite_iqr:.2} strictly widest")
        } else {
            format!("map-elites iqr {elite_iqr:.2} not above {narrow:?}")
        },
    });

    Ok(verdicts)
}

/// Human-readable verdict block, with a noise warning on small samples.
pub fn format_verdicts(verdicts: &[Verdict], min_successes: usize) -> String {
    let mut out = String::new();
    for v in verdicts {
        let tag = match v.status {
            VerdictStatus::Pass => "PASS",
            VerdictStatus::Fail => "FAIL",
            VerdictStatus::ExpectedFail => "EXPECTED-FAIL",
        };
        out.push_str(&format!("{tag} {}: {}\n", v.name, v.detail));
    }
    if min_successes < 10 {
        out.push_str(&format!(
            "warning: only {min_successes} successful runs for the weakest method; rankings need 10+ to be stable\n"
        ));
    }
    out
}
