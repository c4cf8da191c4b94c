//! Seeded sweeps over a scenario family, all three methods per run.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate_throughput, generate_scenario, run_baseline, BaselineKind, Scenario, ScenarioKind};
use crate::channel::ChannelParams;
use crate::planner::{plan_deployment, PlanError};
use crate::positioning::SwarmConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "emtad")]
    Emtad,
    #[serde(rename = "fixed_altitude")]
    FixedAltitude,
    #[serde(rename = "fixed_n")]
    FixedGroupSize,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Emtad, Method::FixedAltitude, Method::FixedGroupSize];

    pub fn name(self) -> &'static str {
        match self {
            Method::Emtad => "emtad",
            Method::FixedAltitude => "fixed_altitude",
            Method::FixedGroupSize => "fixed_n",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub scenario: ScenarioKind,
    pub variant: usize,
    pub method: Method,
    pub run: usize,
    pub seed: u64,
    pub uav_count: Option<usize>,
    pub aggregate_bps: Option<f64>,
    pub demand_satisfied_ratio: Option<f64>,
    /// `ok`, or the error that stopped this run.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub scenario: ScenarioKind,
    pub variant: usize,
    pub variant_value: f64,
    pub method: Method,
    pub runs_ok: usize,
    pub uav_count_mean: f64,
    pub uav_count_std: f64,
    pub uav_count_median: f64,
    pub aggregate_bps_mean: f64,
    pub aggregate_bps_std: f64,
    pub demand_satisfied_ratio_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentTable {
    pub kind: ScenarioKind,
    pub rows: Vec<ExperimentRow>,
    pub summary: Vec<SummaryRow>,
}

fn run_method(method: Method, scenario: &Scenario, params: &ChannelParams, config: &SwarmConfig) -> ExperimentRow {
    let result = match method {
        Method::Emtad => plan_deployment(scenario, params, config),
        Method::FixedAltitude => run_baseline(BaselineKind::FixedAltitude, scenario, params, config),
        Method::FixedGroupSize => run_baseline(BaselineKind::FixedGroupSize, scenario, params, config),
    };
    let mut row = ExperimentRow {
        scenario: ScenarioKind::A,
        variant: 0,
        method,
        run: 0,
        seed: scenario.seed,
        uav_count: None,
        aggregate_bps: None,
        demand_satisfied_ratio: None,
        status: "ok".into(),
    };
    match result {
        Ok(d) => {
            let t = evaluate_throughput(&d, scenario, params);
            row.uav_count = Some(d.uav_count);
            row.aggregate_bps = Some(t.aggregate_bps);
            row.demand_satisfied_ratio = Some(t.demand_satisfied_ratio);
        }
        Err(e @ (PlanError::Unservable(_) | PlanError::CapacityDeadlock(_) | PlanError::Config(_))) => {
            row.status = e.to_string();
        }
    }
    row
}

pub fn run_experiment(
    kind: ScenarioKind,
    params: &ChannelParams,
    config: &SwarmConfig,
    n_runs: usize,
    base_seed: u64,
) -> ExperimentTable {
    run_experiment_with(kind, params, config, n_runs, base_seed, &Method::ALL, &|_| {})
}

/// Sweep with a subset of methods and a hook that adjusts every generated
/// scenario (bandwidth policy, budget, altitude band) before planning.
pub fn run_experiment_with(
    kind: ScenarioKind,
    params: &ChannelParams,
    config: &SwarmConfig,
    n_runs: usize,
    base_seed: u64,
    methods: &[Method],
    adjust: &(dyn Fn(&mut Scenario) + Sync),
) -> ExperimentTable {
    let cells: Vec<(usize, usize, Method)> = (0..kind.variant_count())
        .flat_map(|v| (1..=n_runs).flat_map(move |r| methods.iter().map(move |&m| (v, r, m))))
        .collect();
    let rows: Vec<ExperimentRow> = cells
        .par_iter()
        .map(|&(variant, run, method)| {
            let seed = base_seed.wrapping_add(run as u64);
            let mut row = match generate_scenario(kind, variant, seed) {
                Ok(mut scenario) => {
                    adjust(&mut scenario);
                    let cfg = SwarmConfig { seed, ..*config };
                    run_method(method, &scenario, params, &cfg)
                }
                Err(e) => ExperimentRow {
                    scenario: kind,
                    variant,
                    method,
                    run,
                    seed,
                    uav_count: None,
                    aggregate_bps: None,
                    demand_satisfied_ratio: None,
                    status: e.to_string(),
                },
            };
            row.scenario = kind;
            row.variant = variant;
            row.run = run;
            row.seed = seed;
            row
        })
        .collect();
    let summary = summarize(kind, &rows, methods);
    ExperimentTable { kind, rows, summary }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn summarize(kind: ScenarioKind, rows: &[ExperimentRow], methods: &[Method]) -> Vec<SummaryRow> {
    let mut out = Vec::new();
    for variant in 0..kind.variant_count() {
        for &method in methods {
            let ok: Vec<&ExperimentRow> =
                rows.iter().filter(|r| r.variant == variant && r.method == method && r.uav_count.is_some()).collect();
            let counts: Vec<f64> = ok.iter().filter_map(|r| r.uav_count).map(|c| c as f64).collect();
            let agg: Vec<f64> = ok.iter().filter_map(|r| r.aggregate_bps).collect();
            let ratio: Vec<f64> = ok.iter().filter_map(|r| r.demand_satisfied_ratio).collect();
            let (uav_count_mean, uav_count_std) = mean_std(&counts);
            let (aggregate_bps_mean, aggregate_bps_std) = mean_std(&agg);
            out.push(SummaryRow {
                scenario: kind,
                variant,
                variant_value: kind.variant_value(variant),
                method,
                runs_ok: ok.len(),
                uav_count_mean,
                uav_count_std,
                uav_count_median: median(&counts),
                aggregate_bps_mean,
                aggregate_bps_std,
                demand_satisfied_ratio_mean: mean_std(&ratio).0,
            });
        }
    }
    out
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ExperimentTable {
    pub fn all_failed(&self) -> bool {
        self.rows.iter().all(|r| r.uav_count.is_none())
    }

    pub fn write_runs_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "scenario",
            "variant",
            "method",
            "run",
            "seed",
            "uav_count",
            "aggregate_bps",
            "demand_satisfied_ratio",
            "status",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.scenario.name().to_string(),
                r.variant.to_string(),
                r.method.name().to_string(),
                r.run.to_string(),
                r.seed.to_string(),
                opt(r.uav_count),
                opt(r.aggregate_bps),
                opt(r.demand_satisfied_ratio),
                r.status.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "scenario",
            "variant",
            self.kind.variant_column(),
            "method",
            "runs_ok",
            "uav_count_mean",
            "uav_count_std",
            "uav_count_median",
            "aggregate_bps_mean",
            "aggregate_bps_std",
            "demand_satisfied_ratio_mean",
        ])?;
        for s in &self.summary {
            w.write_record([
                s.scenario.name().to_string(),
                s.variant.to_string(),
                s.variant_value.to_string(),
                s.method.name().to_string(),
                s.runs_ok.to_string(),
                s.uav_count_mean.to_string(),
                s.uav_count_std.to_string(),
                s.uav_count_median.to_string(),
                s.aggregate_bps_mean.to_string(),
                s.aggregate_bps_std.to_string(),
                s.demand_satisfied_ratio_mean.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Wide plot table: one row per variant, mean and std per method of
    /// either `uav_count` or `aggregate_bps`.
    pub fn write_plot_csv<W: Write>(&self, metric: PlotMetric, out: W) -> csv::Result<()> {
        let mut methods: Vec<Method> = self.summary.iter().map(|s| s.method).collect();
        methods.sort();
        methods.dedup();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![self.kind.variant_column().to_string()];
        for m in &methods {
            header.push(format!("{}_{}_mean", m.name(), metric.column()));
            header.push(format!("{}_{}_std", m.name(), metric.column()));
        }
        w.write_record(&header)?;
        for variant in 0..self.kind.variant_count() {
            let mut rec = vec![self.kind.variant_value(variant).to_string()];
            for &m in &methods {
                let s = self.summary.iter().find(|s| s.variant == variant && s.method == m);
                let (mean, std) = match (s, metric) {
                    (Some(s), PlotMetric::UavCount) => (s.uav_count_mean, s.uav_count_std),
                    (Some(s), PlotMetric::Throughput) => (s.aggregate_bps_mean, s.aggregate_bps_std),
                    (None, _) => (f64::NAN, f64::NAN),
                };
                rec.push(mean.to_string());
                rec.push(std.to_string());
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotMetric {
    UavCount,
    Throughput,
}

impl PlotMetric {
    fn column(self) -> &'static str {
        match self {
            PlotMetric::UavCount => "uav_count",
            PlotMetric::Throughput => "aggregate_bps",
        }
    }
}
