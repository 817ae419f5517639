use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Histogram snapshot `Y_0..Y_K` taken at the end of step `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramSample {
    pub t: u64,
    pub y: Vec<u64>,
}

/// Where a trace came from: an online run or an offline-optimum witness.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceSource {
    #[default]
    Online,
    Offline,
}

impl TraceSource {
    fn as_str(self) -> &'static str {
        match self {
            TraceSource::Online => "online",
            TraceSource::Offline => "offline",
        }
    }
}

/// Record of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchTrace {
    pub policy: String,
    pub rng_seed: u64,
    #[serde(default)]
    pub source: TraceSource,
    /// `choices[t-1]` is the node matched to arrival `t`.
    pub choices: Vec<Option<u32>>,
    /// `size_over_time[t-1] = ALG(G, t)`.
    pub size_over_time: Vec<u64>,
    /// Sampled `Y_k(t)`; `t = 0` is the initial state when sampling is on.
    pub yk_trajectory: Vec<HistogramSample>,
    pub final_budgets: Vec<u64>,
}

impl MatchTrace {
    pub fn size(&self) -> u64 {
        self.size_over_time.last().copied().unwrap_or(0)
    }

    pub fn horizon(&self) -> u64 {
        self.choices.len() as u64
    }

    /// CSV with columns `t, choice, size, y0..yK, source`. The `y` cells are empty on
    /// steps that were not sampled; `t = 0` carries the initial histogram.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let width = self
            .yk_trajectory
            .iter()
            .map(|s| s.y.len())
            .max()
            .unwrap_or(0);
        let mut wr = csv::Writer::from_writer(w);
        let mut head = vec!["t".to_string(), "choice".into(), "size".into()];
        head.extend((0..width).map(|k| format!("y{k}")));
        head.push("source".into());
        wr.write_record(&head)?;

        let mut samples = self.yk_trajectory.iter().peekable();
        let mut row: Vec<String> = Vec::with_capacity(head.len());
        let mut emit_y = |row: &mut Vec<String>, t: u64| {
            match samples.peek() {
                Some(s) if s.t == t => {
                    let s = samples.next().unwrap();
                    row.extend((0..width).map(|k| s.y.get(k).copied().unwrap_or(0).to_string()));
                }
                _ => row.extend((0..width).map(|_| String::new())),
            }
        };
        if self.yk_trajectory.first().is_some_and(|s| s.t == 0) {
            row.clear();
            row.extend(["0".to_string(), String::new(), "0".into()]);
            emit_y(&mut row, 0);
            row.push(self.source.as_str().into());
            wr.write_record(&row)?;
        }
        for (i, (c, s)) in self.choices.iter().zip(&self.size_over_time).enumerate() {
            let t = i as u64 + 1;
            row.clear();
            row.push(t.to_string());
            row.push(c.map(|u| u.to_string()).unwrap_or_default());
            row.push(s.to_string());
            emit_y(&mut row, t);
            row.push(self.source.as_str().into());
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }
}
