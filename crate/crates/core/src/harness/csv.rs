use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use super::{Experiment, TrialRecord, TrialStatus};
use crate::error::{Error, Result};
use crate::noise::NoiseModel;

pub const CSV_HEADER: &str =
    "experiment,n,p,kappa,sigma,q,model,trial,status,loss_rmse,loss_two_inf,loss_avg,opnorm_dev,clamped_count,wall_ms";

/// Writes the header and one line per record. Reals use the shortest
/// representation that parses back to the same value.
pub fn write_csv<W: Write>(records: &[TrialRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.experiment,
            r.n,
            r.p,
            r.kappa,
            r.sigma,
            r.q,
            r.model,
            r.trial,
            r.status.tag(),
            r.loss_rmse,
            r.loss_two_inf,
            r.loss_avg,
            r.opnorm_dev,
            r.clamped_count,
            r.wall_ms
        )?;
    }
    Ok(())
}

pub fn emit_csv(records: &[TrialRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_csv(records, &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

fn field<T: FromStr>(value: &str, name: &str, line: usize) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad {name} `{value}`")))
}

pub fn parse_csv(text: &str) -> Result<Vec<TrialRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == CSV_HEADER => {}
        _ => return Err(Error::Parse("missing or unexpected CSV header".into())),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 15 {
            return Err(Error::Parse(format!("line {lineno}: expected 15 fields, found {}", cols.len())));
        }
        out.push(TrialRecord {
            experiment: cols[0].parse::<Experiment>()?,
            n: field(cols[1], "n", lineno)?,
            p: field(cols[2], "p", lineno)?,
            kappa: field(cols[3], "kappa", lineno)?,
            sigma: field(cols[4], "sigma", lineno)?,
            q: field(cols[5], "q", lineno)?,
            model: cols[6].parse::<NoiseModel>()?,
            trial: field(cols[7], "trial", lineno)?,
            status: cols[8].parse::<TrialStatus>()?,
            loss_rmse: field(cols[9], "loss_rmse", lineno)?,
            loss_two_inf: field(cols[10], "loss_two_inf", lineno)?,
            loss_avg: field(cols[11], "loss_avg", lineno)?,
            opnorm_dev: field(cols[12], "opnorm_dev", lineno)?,
            clamped_count: field(cols[13], "clamped_count", lineno)?,
            wall_ms: field(cols[14], "wall_ms", lineno)?,
        });
    }
    Ok(out)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<TrialRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}
