//! Per-run diagnostics and their CSV form.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "iter,n_samples_consumed,pot_err_last,pot_err_avg,map_err_last,map_err_avg,H_gap_avg,wall_time_s";

/// Diagnostics at one checkpoint. Error fields are `NaN` when no reference
/// potential is available.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub iter: u64,
    pub n_samples: u64,
    pub pot_err_last: f64,
    pub pot_err_avg: f64,
    pub map_err_last: f64,
    pub map_err_avg: f64,
    pub h_gap_avg: f64,
    /// Standard error of `h_gap_avg`; kept in memory only.
    pub h_gap_stderr: f64,
    pub wall_time_s: f64,
}

/// Metric columns that can be fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    PotErrLast,
    PotErrAvg,
    MapErrLast,
    MapErrAvg,
    HGapAvg,
}

impl Metric {
    pub const ALL: [Metric; 5] =
        [Metric::PotErrLast, Metric::PotErrAvg, Metric::MapErrLast, Metric::MapErrAvg, Metric::HGapAvg];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::PotErrLast => "pot_err_last",
            Metric::PotErrAvg => "pot_err_avg",
            Metric::MapErrLast => "map_err_last",
            Metric::MapErrAvg => "map_err_avg",
            Metric::HGapAvg => "H_gap_avg",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == name)
            .ok_or_else(|| Error::invalid(format!("unknown metric {name:?}")))
    }
}

impl Checkpoint {
    pub fn get(&self, m: Metric) -> f64 {
        match m {
            Metric::PotErrLast => self.pot_err_last,
            Metric::PotErrAvg => self.pot_err_avg,
            Metric::MapErrLast => self.map_err_last,
            Metric::MapErrAvg => self.map_err_avg,
            Metric::HGapAvg => self.h_gap_avg,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunTrace {
    pub checkpoints: Vec<Checkpoint>,
    /// `key=value` echo of the optimizer configuration.
    pub config: String,
    pub seed: u64,
}

fn fmt_f(out: &mut String, v: f64) {
    if v.is_nan() {
        out.push_str("NaN");
    } else {
        let _ = write!(out, "{v:.16e}");
    }
}

impl RunTrace {
    /// CSV with a header row; floats carry 17 significant digits. When
    /// `timing` is false the wall-time column is written as zero so the file
    /// is a pure function of the seed.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut out = String::with_capacity(64 * (self.checkpoints.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for c in &self.checkpoints {
            let _ = write!(out, "{},{}", c.iter, c.n_samples);
            for v in [c.pot_err_last, c.pot_err_avg, c.map_err_last, c.map_err_avg, c.h_gap_avg] {
                out.push(',');
                fmt_f(&mut out, v);
            }
            out.push(',');
            fmt_f(&mut out, if timing { c.wall_time_s } else { 0.0 });
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(CSV_HEADER) {
            return Err(Error::invalid("trace CSV: missing or unexpected header"));
        }
        let mut checkpoints = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 8 {
                return Err(Error::invalid(format!("trace CSV row {}: expected 8 fields", i + 1)));
            }
            let bad = |e: &dyn std::fmt::Display| Error::invalid(format!("trace CSV row {}: {e}", i + 1));
            let u = |s: &str| s.parse::<u64>().map_err(|e| bad(&e));
            let x = |s: &str| s.parse::<f64>().map_err(|e| bad(&e));
            checkpoints.push(Checkpoint {
                iter: u(f[0])?,
                n_samples: u(f[1])?,
                pot_err_last: x(f[2])?,
                pot_err_avg: x(f[3])?,
                map_err_last: x(f[4])?,
                map_err_avg: x(f[5])?,
                h_gap_avg: x(f[6])?,
                h_gap_stderr: f64::NAN,
                wall_time_s: x(f[7])?,
            });
        }
        Ok(Self { checkpoints, config: String::new(), seed: 0 })
    }

    /// Pointwise mean over runs sharing a checkpoint schedule.
    pub fn mean(traces: &[RunTrace]) -> Result<RunTrace> {
        let first = traces.first().ok_or_else(|| Error::invalid("no traces to average"))?;
        let n = traces.len() as f64;
        let mut out = first.clone();
        for (k, c) in out.checkpoints.iter_mut().enumerate() {
            let rows: Vec<&Checkpoint> = traces
                .iter()
                .map(|t| {
                    t.checkpoints
                        .get(k)
                        .filter(|r| r.iter == c.iter)
                        .ok_or_else(|| Error::invalid("traces have different checkpoint schedules"))
                })
                .collect::<Result<_>>()?;
            let avg = |f: fn(&Checkpoint) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / n;
            c.pot_err_last = avg(|r| r.pot_err_last);
            c.pot_err_avg = avg(|r| r.pot_err_avg);
            c.map_err_last = avg(|r| r.map_err_last);
            c.map_err_avg = avg(|r| r.map_err_avg);
            c.h_gap_avg = avg(|r| r.h_gap_avg);
            // standard error of a mean of independent estimates
            c.h_gap_stderr = (rows.iter().map(|r| r.h_gap_stderr.powi(2)).sum::<f64>()).sqrt() / n;
            c.wall_time_s = avg(|r| r.wall_time_s);
        }
        if traces.iter().any(|t| t.checkpoints.len() != out.checkpoints.len()) {
            return Err(Error::invalid("traces have different checkpoint counts"));
        }
        Ok(out)
    }
}
