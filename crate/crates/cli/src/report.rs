//! Report documents and their table and CSV renderings.
//!
//! JSON is the serde form of each report. Tables round to four decimals for
//! reading; CSV and JSON keep every digit of the underlying doubles.

use std::fmt::Write as _;

use rbdkit::analysis::RankMeasure;
use rbdkit::InstanceId;
use serde::Serialize;

pub trait Render: Serialize {
    fn table(&self) -> String;
    fn csv(&self) -> csv::Result<String>;
}

fn csv_document(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> csv::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Shortest decimal form that reads back to the same double.
fn full(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(full).unwrap_or_default()
}

fn instance_width<'a>(names: impl Iterator<Item = &'a String>) -> usize {
    names
        .map(|n| n.chars().count())
        .max()
        .unwrap_or(0)
        .max("instance".len())
}

#[derive(Serialize)]
pub struct InstanceRow {
    pub instance: String,
    pub component: String,
    pub index: usize,
    pub reliability: f64,
}

impl InstanceRow {
    pub fn new(id: &InstanceId, reliability: f64) -> Self {
        Self {
            instance: id.to_string(),
            component: id.component.clone(),
            index: id.index,
            reliability,
        }
    }
}

#[derive(Serialize)]
pub struct EvalReport {
    pub command: &'static str,
    pub model: String,
    pub mission_time: f64,
    pub reliability: f64,
    pub unreliability: f64,
    pub instances: Vec<InstanceRow>,
}

impl Render for EvalReport {
    fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "model          {}", self.model);
        let _ = writeln!(s, "mission time   {} h", self.mission_time);
        let _ = writeln!(s, "reliability    {:.4}", self.reliability);
        let _ = writeln!(s, "unreliability  {:.4}", self.unreliability);
        let _ = writeln!(s);
        let w = instance_width(self.instances.iter().map(|r| &r.instance));
        let _ = writeln!(s, "{:<w$}  reliability", "instance");
        for r in &self.instances {
            let _ = writeln!(s, "{:<w$}  {:.4}", r.instance, r.reliability);
        }
        s
    }

    fn csv(&self) -> csv::Result<String> {
        let system = vec![
            "system".to_string(),
            self.model.clone(),
            String::new(),
            String::new(),
            full(self.reliability),
            full(self.unreliability),
        ];
        let rows = self.instances.iter().map(|r| {
            vec![
                "instance".to_string(),
                r.instance.clone(),
                r.component.clone(),
                r.index.to_string(),
                full(r.reliability),
                String::new(),
            ]
        });
        csv_document(
            &["kind", "name", "component", "index", "reliability", "unreliability"],
            std::iter::once(system).chain(rows),
        )
    }
}

#[derive(Serialize)]
pub struct SimulateReport {
    pub command: &'static str,
    pub model: String,
    pub mission_time: f64,
    pub point: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence_level: f64,
    pub trials: u64,
    pub seed: u64,
    pub analytic: f64,
    pub difference: f64,
}

impl Render for SimulateReport {
    fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "model         {}", self.model);
        let _ = writeln!(s, "mission time  {} h", self.mission_time);
        let _ = writeln!(s, "trials        {} (seed {})", self.trials, self.seed);
        let _ = writeln!(
            s,
            "estimate      {:.4} +/- {:.4} (std error)",
            self.point, self.std_error
        );
        let _ = writeln!(
            s,
            "{:.0}% interval  [{:.4}, {:.4}]",
            self.confidence_level * 100.0,
            self.ci_low,
            self.ci_high
        );
        let _ = writeln!(s, "analytic      {:.4}", self.analytic);
        let _ = writeln!(s, "difference    {:+.4}", self.difference);
        s
    }

    fn csv(&self) -> csv::Result<String> {
        csv_document(
            &[
                "model",
                "mission_time",
                "point",
                "std_error",
                "ci_low",
                "ci_high",
                "confidence_level",
                "trials",
                "seed",
                "analytic",
                "difference",
            ],
            [vec![
                self.model.clone(),
                full(self.mission_time),
                full(self.point),
                full(self.std_error),
                full(self.ci_low),
                full(self.ci_high),
                full(self.confidence_level),
                self.trials.to_string(),
                self.seed.to_string(),
                full(self.analytic),
                full(self.difference),
            ]],
        )
    }
}

#[derive(Serialize)]
pub struct RankRow {
    pub rank: usize,
    pub instance: String,
    pub component: String,
    pub index: usize,
    pub reliability: f64,
    pub birnbaum: f64,
}

impl RankRow {
    pub fn new(rank: usize, id: &InstanceId, reliability: f64, birnbaum: f64) -> Self {
        Self {
            rank,
            instance: id.to_string(),
            component: id.component.clone(),
            index: id.index,
            reliability,
            birnbaum,
        }
    }
}

#[derive(Serialize)]
pub struct RankReport {
    pub command: &'static str,
    pub model: String,
    pub mission_time: f64,
    pub measure: RankMeasure,
    pub rows: Vec<RankRow>,
}

impl Render for RankReport {
    fn table(&self) -> String {
        let mut s = String::new();
        let order = match self.measure {
            RankMeasure::ByReliabilityAscending => "reliability, weakest first",
            RankMeasure::ByBirnbaumDescending => "Birnbaum importance, highest first",
        };
        let _ = writeln!(s, "model {} at {} h, ranked by {order}", self.model, self.mission_time);
        let _ = writeln!(s);
        let w = instance_width(self.rows.iter().map(|r| &r.instance));
        let _ = writeln!(s, "rank  {:<w$}  reliability  birnbaum", "instance");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:>4}  {:<w$}  {:>11.4}  {:>8.4}",
                r.rank, r.instance, r.reliability, r.birnbaum
            );
        }
        s
    }

    fn csv(&self) -> csv::Result<String> {
        csv_document(
            &["rank", "instance", "component", "index", "reliability", "birnbaum"],
            self.rows.iter().map(|r| {
                vec![
                    r.rank.to_string(),
                    r.instance.clone(),
                    r.component.clone(),
                    r.index.to_string(),
                    full(r.reliability),
                    full(r.birnbaum),
                ]
            }),
        )
    }
}

#[derive(Serialize)]
pub struct WhatIfReport {
    pub command: &'static str,
    pub model: String,
    pub mission_time: f64,
    pub instance: String,
    pub copies: u32,
    pub baseline_reliability: f64,
    pub modified_reliability: f64,
    pub delta: f64,
    /// The modified model in the text format accepted by every command.
    pub modified_model: String,
}

impl Render for WhatIfReport {
    fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "model {} at {} h, {} replaced by {} parallel copies",
            self.model, self.mission_time, self.instance, self.copies
        );
        let _ = writeln!(s, "baseline  {:.4}", self.baseline_reliability);
        let _ = writeln!(s, "modified  {:.4}", self.modified_reliability);
        let _ = writeln!(s, "delta     {:+.4}", self.delta);
        let _ = writeln!(s);
        let _ = writeln!(s, "# modified model");
        s.push_str(&self.modified_model);
        s
    }

    fn csv(&self) -> csv::Result<String> {
        csv_document(
            &[
                "model",
                "mission_time",
                "instance",
                "copies",
                "baseline_reliability",
                "modified_reliability",
                "delta",
                "modified_model",
            ],
            [vec![
                self.model.clone(),
                full(self.mission_time),
                self.instance.clone(),
                self.copies.to_string(),
                full(self.baseline_reliability),
                full(self.modified_reliability),
                full(self.delta),
                self.modified_model.clone(),
            ]],
        )
    }
}

#[derive(Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MttfMethod {
    ClosedForm,
    Quadrature,
}

impl MttfMethod {
    fn as_str(self) -> &'static str {
        match self {
            MttfMethod::ClosedForm => "closed_form",
            MttfMethod::Quadrature => "quadrature",
        }
    }
}

#[derive(Serialize)]
pub struct MttfReport {
    pub command: &'static str,
    pub model: String,
    /// `None` (JSON null) when the system can never fail.
    pub mttf_hours: Option<f64>,
    pub infinite: bool,
    pub method: MttfMethod,
}

impl Render for MttfReport {
    fn table(&self) -> String {
        let method = match self.method {
            MttfMethod::ClosedForm => "closed form",
            MttfMethod::Quadrature => "numerical integration",
        };
        match self.mttf_hours {
            Some(h) => format!("model {}\nMTTF  {h:.4} h ({method})\n", self.model),
            None => format!("model {}\nMTTF  infinite (a success path never fails)\n", self.model),
        }
    }

    fn csv(&self) -> csv::Result<String> {
        csv_document(
            &["model", "mttf_hours", "infinite", "method"],
            [vec![
                self.model.clone(),
                opt(self.mttf_hours),
                self.infinite.to_string(),
                self.method.as_str().to_string(),
            ]],
        )
    }
}

#[derive(Serialize)]
pub struct CurvePoint {
    pub time: f64,
    pub reliability: f64,
    pub unreliability: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulated: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
}

#[derive(Serialize)]
pub struct CurveReport {
    pub command: &'static str,
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub points: Vec<CurvePoint>,
}

impl CurveReport {
    fn simulated(&self) -> bool {
        self.trials.is_some()
    }
}

impl Render for CurveReport {
    fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "model {}", self.model);
        let _ = writeln!(s);
        if self.simulated() {
            let _ = writeln!(s, "{:>12}  reliability  simulated  std_error", "time (h)");
        } else {
            let _ = writeln!(s, "{:>12}  reliability", "time (h)");
        }
        for p in &self.points {
            let _ = write!(s, "{:>12.4}  {:>11.4}", p.time, p.reliability);
            if let (Some(m), Some(e)) = (p.simulated, p.std_error) {
                let _ = write!(s, "  {m:>9.4}  {e:>9.4}");
            }
            s.push('\n');
        }
        s
    }

    fn csv(&self) -> csv::Result<String> {
        let mut header = vec!["time", "reliability", "unreliability"];
        if self.simulated() {
            header.extend(["simulated", "std_error"]);
        }
        csv_document(
            &header,
            self.points.iter().map(|p| {
                let mut row = vec![full(p.time), full(p.reliability), full(p.unreliability)];
                if self.simulated() {
                    row.extend([opt(p.simulated), opt(p.std_error)]);
                }
                row
            }),
        )
    }
}
