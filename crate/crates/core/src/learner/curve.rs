use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub episode: usize,
    pub metric: String,
    pub value: f64,
}

/// Samples of named metrics over training. Episode indices strictly
/// increase per metric.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    points: Vec<CurvePoint>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow<'a> {
    run_id: usize,
    episode: usize,
    metric: &'a str,
    value: f64,
}

#[derive(Debug, Deserialize)]
struct OwnedCsvRow {
    run_id: usize,
    episode: usize,
    metric: String,
    value: f64,
}

impl LearningCurve {
    pub fn push(&mut self, episode: usize, metric: &str, value: f64) -> Result<()> {
        if let Some(last) = self.points.iter().rev().find(|p| p.metric == metric) {
            if episode <= last.episode {
                return Err(Error::config(format!(
                    "metric {metric}: episode {episode} does not follow {}",
                    last.episode
                )));
            }
        }
        self.points.push(CurvePoint {
            episode,
            metric: metric.to_string(),
            value,
        });
        Ok(())
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(episode, value)` pairs of one metric.
    pub fn series(&self, metric: &str) -> Vec<(usize, f64)> {
        self.points
            .iter()
            .filter(|p| p.metric == metric)
            .map(|p| (p.episode, p.value))
            .collect()
    }

    pub fn last(&self, metric: &str) -> Option<f64> {
        self.points.iter().rev().find(|p| p.metric == metric).map(|p| p.value)
    }

    /// Writes `run_id,episode,metric,value` rows, with a header when
    /// `header` is set.
    pub fn write_csv<W: Write>(&self, run_id: usize, writer: W, header: bool) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(header).from_writer(writer);
        for p in &self.points {
            w.serialize(CsvRow {
                run_id,
                episode: p.episode,
                metric: &p.metric,
                value: p.value,
            })?;
        }
        if self.points.is_empty() && header {
            w.write_record(["run_id", "episode", "metric", "value"])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self, run_id: usize) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(run_id, &mut buf, true)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }

    /// Reads a curve file back as `(run_id, curve)` pairs in file order.
    pub fn read_csv<R: Read>(reader: R) -> Result<Vec<(usize, LearningCurve)>> {
        let mut r = csv::Reader::from_reader(reader);
        let mut out: Vec<(usize, LearningCurve)> = Vec::new();
        for row in r.deserialize() {
            let row: OwnedCsvRow = row?;
            let idx = match out.iter().position(|(id, _)| *id == row.run_id) {
                Some(i) => i,
                None => {
                    out.push((row.run_id, LearningCurve::default()));
                    out.len() - 1
                }
            };
            out[idx].1.push(row.episode, &row.metric, row.value)?;
        }
        Ok(out)
    }
}
