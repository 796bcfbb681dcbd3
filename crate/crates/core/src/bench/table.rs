use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{invalid, Result};

/// Generic text table: `#`-comment metadata, a header, string cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: String,
    pub condition: String,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub trials: usize,
}

impl ResultRow {
    pub fn from_trials(method: &str, condition: &str, accuracies: &[f64]) -> Self {
        let (mean, std) = super::mean_std(accuracies);
        ResultRow {
            method: method.to_string(),
            condition: condition.to_string(),
            accuracy_mean: mean,
            accuracy_std: std,
            trials: accuracies.len(),
        }
    }
}

/// Accuracy per (method, condition) with provenance metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub experiment: String,
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<ResultRow>,
}

pub const RESULT_COLUMNS: [&str; 5] = ["method", "condition", "accuracy_mean", "accuracy_std", "trials"];

impl ResultTable {
    pub fn new(experiment: impl Into<String>) -> Self {
        ResultTable { experiment: experiment.into(), metadata: Vec::new(), rows: Vec::new() }
    }

    pub fn push_meta(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.metadata.push((key.into(), value.into()));
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn row(&self, method: &str, condition: &str) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.method == method && r.condition == condition)
    }

    /// Accuracies are written with 4 decimals.
    pub fn to_table(&self) -> Table {
        let mut metadata = alloc::vec![("experiment".to_string(), self.experiment.clone())];
        metadata.extend(self.metadata.iter().cloned());
        Table {
            metadata,
            header: RESULT_COLUMNS.iter().map(|s| s.to_string()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| {
                    alloc::vec![
                        r.method.clone(),
                        r.condition.clone(),
                        alloc::format!("{:.4}", r.accuracy_mean),
                        alloc::format!("{:.4}", r.accuracy_std),
                        r.trials.to_string(),
                    ]
                })
                .collect(),
        }
    }

    pub fn from_table(table: &Table) -> Result<Self> {
        if table.header.iter().map(String::as_str).ne(RESULT_COLUMNS) {
            return Err(invalid(alloc::format!("unexpected columns {:?}", table.header)));
        }
        let mut out = ResultTable::new("");
        for (k, v) in &table.metadata {
            if k == "experiment" {
                out.experiment = v.clone();
            } else {
                out.metadata.push((k.clone(), v.clone()));
            }
        }
        for cells in &table.rows {
            let [method, condition, mean, std, trials] = cells.as_slice() else {
                return Err(invalid("result row needs 5 cells"));
            };
            let num = |s: &str| s.parse::<f64>().map_err(|_| invalid(alloc::format!("bad number {s:?}")));
            let accuracy_mean = num(mean)?;
            if !(0.0..=1.0).contains(&accuracy_mean) {
                return Err(invalid(alloc::format!("accuracy {accuracy_mean} outside [0, 1]")));
            }
            out.rows.push(ResultRow {
                method: method.clone(),
                condition: condition.clone(),
                accuracy_mean,
                accuracy_std: num(std)?,
                trials: trials.parse().map_err(|_| invalid(alloc::format!("bad trial count {trials:?}")))?,
            });
        }
        Ok(out)
    }
}
