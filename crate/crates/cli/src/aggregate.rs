use std::collections::BTreeMap;

use densecolor::{RunReport, StepKind};
use serde::Serialize;

/// Totals for one step position across repetitions.
#[derive(Debug, Clone, Serialize)]
pub struct StepAggregate {
    pub kind: StepKind,
    pub index: usize,
    pub runs: usize,
    pub participants: usize,
    pub attempted: usize,
    pub colored: usize,
    pub decolored: usize,
    pub initially_uncolored: usize,
    /// `decolored / attempted`.
    pub decoloring_frequency: Option<f64>,
    /// `initially_uncolored / participants`.
    pub initially_uncolored_fraction: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Aggregate {
    pub repetitions: usize,
    pub first_seed: u64,
    pub failed_runs: usize,
    pub complete_runs: usize,
    pub mean_rounds: f64,
    pub max_rounds: usize,
    pub steps: Vec<StepAggregate>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn kind_order(kind: StepKind) -> u8 {
    match kind {
        StepKind::Initial => 0,
        StepKind::Dense => 1,
        StepKind::FallbackSparse => 2,
        StepKind::FallbackResidual => 3,
    }
}

impl Aggregate {
    pub fn from_reports(reports: &[RunReport]) -> Aggregate {
        let mut steps: BTreeMap<(u8, usize), StepAggregate> = BTreeMap::new();
        for report in reports {
            for s in &report.steps {
                let entry = steps
                    .entry((kind_order(s.kind), s.index))
                    .or_insert(StepAggregate {
                        kind: s.kind,
                        index: s.index,
                        runs: 0,
                        participants: 0,
                        attempted: 0,
                        colored: 0,
                        decolored: 0,
                        initially_uncolored: 0,
                        decoloring_frequency: None,
                        initially_uncolored_fraction: None,
                    });
                entry.runs += 1;
                entry.participants += s.participants;
                entry.attempted += s.attempted;
                entry.colored += s.colored;
                entry.decolored += s.decolored;
                entry.initially_uncolored += s.initially_uncolored;
            }
        }
        let steps = steps
            .into_values()
            .map(|mut s| {
                s.decoloring_frequency = ratio(s.decolored, s.attempted);
                s.initially_uncolored_fraction = match s.kind {
                    StepKind::Dense => ratio(s.initially_uncolored, s.participants),
                    _ => None,
                };
                s
            })
            .collect();
        let rounds: Vec<usize> = reports.iter().map(|r| r.rounds_used).collect();
        Aggregate {
            repetitions: reports.len(),
            first_seed: reports.first().map_or(0, |r| r.seed),
            failed_runs: reports.iter().filter(|r| !r.success()).count(),
            complete_runs: reports.iter().filter(|r| r.complete).count(),
            mean_rounds: rounds.iter().sum::<usize>() as f64 / rounds.len().max(1) as f64,
            max_rounds: rounds.iter().copied().max().unwrap_or(0),
            steps,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "kind,index,runs,participants,attempted,colored,decolored,initially_uncolored,decoloring_frequency\n",
        );
        for s in &self.steps {
            let kind = serde_json::to_value(s.kind).expect("step kind serializes");
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                kind.as_str().unwrap_or_default(),
                s.index,
                s.runs,
                s.participants,
                s.attempted,
                s.colored,
                s.decolored,
                s.initially_uncolored,
                s.decoloring_frequency
                    .map_or(String::new(), |f| f.to_string())
            ));
        }
        out
    }
}
