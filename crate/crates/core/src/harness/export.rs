//! Result files.
//!
//! Sweep CSV: the swept variable column(s) (`mu`, `c_sf_scale`, `c_sr_scale`,
//! `stiffness_scale`, or `mass_kg, position_m`) followed by
//! `success_pct, mean_lap_time_s, laps`. Empty cells mean "not available"
//! (no successful lap, or a failed cell).
//!
//! Evaluation CSV: one row per lap,
//! `episode, success, status, lap_time_s, crash_s, crash_x, crash_y, agent_steps`.
//!
//! Floats are written in shortest round-trip form, so re-importing a file
//! reproduces the values bit for bit.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::eval::{EpisodeRecord, EvalReport};
use super::sweep::{SweepKind, SweepResults, SweepRow};
use crate::env::EpisodeStatus;
use crate::error::{Error, Result};

pub const SWEEP_METRIC_COLUMNS: [&str; 3] = ["success_pct", "mean_lap_time_s", "laps"];
pub const EPISODE_COLUMNS: [&str; 8] = [
    "episode",
    "success",
    "status",
    "lap_time_s",
    "crash_s",
    "crash_x",
    "crash_y",
    "agent_steps",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown export format `{other}`"))),
        }
    }
}

/// Any result file the harness produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Results {
    Evaluation(EvalReport),
    Sweep(SweepResults),
}

impl Results {
    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Writes `<stem>.csv` or `<stem>.json` into `dir`; returns the path.
    pub fn export(&self, dir: &Path, stem: &str, format: Format) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(format!(
            "{stem}.{}",
            if format == Format::Csv { "csv" } else { "json" }
        ));
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut out = BufWriter::new(file);
        match (self, format) {
            (_, Format::Json) => {
                serde_json::to_writer_pretty(&mut out, self)?;
                out.write_all(b"\n").map_err(|e| Error::io(&path, e))?;
            }
            (Results::Sweep(s), Format::Csv) => write_sweep_csv(s, &mut out)?,
            (Results::Evaluation(r), Format::Csv) => write_episodes_csv(&r.episodes, &mut out)?,
        }
        out.flush().map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn parse_opt(field: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse()
        .map(Some)
        .map_err(|e| Error::Config(format!("bad number `{field}`: {e}")))
}

pub fn write_sweep_csv<W: Write>(results: &SweepResults, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<&str> = results
        .kind
        .columns()
        .iter()
        .copied()
        .chain(SWEEP_METRIC_COLUMNS)
        .collect();
    w.write_record(&header)?;
    for row in &results.rows {
        let mut rec: Vec<String> = row.values.iter().map(f64::to_string).collect();
        rec.push(opt(row.success_pct));
        rec.push(opt(row.mean_lap_time_s));
        rec.push(row.laps.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Parses a sweep CSV back; the swept variable is recognized from the header.
pub fn read_sweep_csv(text: &str) -> Result<(SweepKind, Vec<SweepRow>)> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let names: Vec<&str> = header.iter().map(String::as_str).collect();
    let kind = SweepKind::from_columns(&names)
        .ok_or_else(|| Error::Config(format!("unrecognized sweep header {names:?}")))?;
    let width = kind.columns().len();
    if names[width..] != SWEEP_METRIC_COLUMNS {
        return Err(Error::Config(format!("unexpected sweep columns {names:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let values = (0..width)
            .map(|i| parse_opt(&rec[i])?.ok_or_else(|| Error::Config("missing sweep value".into())))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(SweepRow {
            values,
            success_pct: parse_opt(&rec[width])?,
            mean_lap_time_s: parse_opt(&rec[width + 1])?,
            laps: rec[width + 2]
                .parse()
                .map_err(|e| Error::Config(format!("bad lap count: {e}")))?,
            error: None,
        });
    }
    Ok((kind, rows))
}

pub fn write_episodes_csv<W: Write>(records: &[EpisodeRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EPISODE_COLUMNS)?;
    for r in records {
        let status = serde_json::to_value(r.status)?;
        w.write_record([
            r.episode.to_string(),
            u8::from(r.success).to_string(),
            status.as_str().unwrap_or_default().to_string(),
            opt(r.lap_time_s),
            opt(r.crash_s),
            opt(r.crash_x),
            opt(r.crash_y),
            r.agent_steps.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn read_episodes_csv(text: &str) -> Result<Vec<EpisodeRecord>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    if r.headers()?.iter().ne(EPISODE_COLUMNS) {
        return Err(Error::Config("unexpected episode columns".into()));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let int = |s: &str| s.parse::<u64>().map_err(|e| Error::Config(format!("bad integer `{s}`: {e}")));
        let status: EpisodeStatus = serde_json::from_value(serde_json::Value::String(rec[2].to_string()))?;
        out.push(EpisodeRecord {
            episode: int(&rec[0])?,
            success: int(&rec[1])? == 1,
            status,
            lap_time_s: parse_opt(&rec[3])?,
            crash_s: parse_opt(&rec[4])?,
            crash_x: parse_opt(&rec[5])?,
            crash_y: parse_opt(&rec[6])?,
            agent_steps: int(&rec[7])?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn results(rows: Vec<SweepRow>) -> SweepResults {
        SweepResults {
            kind: SweepKind::Friction,
            algorithm: "partial".into(),
            track: "porto".into(),
            seed: 1,
            rows,
        }
    }

    #[test]
    fn empty_results_give_header_only() {
        let mut buf = Vec::new();
        write_sweep_csv(&results(vec![]), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "mu,success_pct,mean_lap_time_s,laps\n");
    }

    #[test]
    fn sweep_csv_roundtrip() {
        let rows = vec![
            SweepRow {
                values: vec![0.5],
                success_pct: Some(97.0),
                mean_lap_time_s: Some(6.123456789012345),
                laps: 100,
                error: None,
            },
            SweepRow {
                values: vec![1.0489],
                success_pct: Some(0.0),
                mean_lap_time_s: None,
                laps: 100,
                error: None,
            },
        ];
        let mut buf = Vec::new();
        write_sweep_csv(&results(rows.clone()), &mut buf).unwrap();
        let (kind, back) = read_sweep_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(kind, SweepKind::Friction);
        assert_eq!(back, rows);
    }
}
