//! The trial CSV schema. Floats are written in shortest round-trip form, so
//! a file read back yields bit-identical records.

use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim, WriterBuilder};

use super::{io_err, CliError, CliResult};
use crate::metrics::TrialRecord;

pub const HEADER: &str = "algorithm,k,n,noise_pct,trial_seed,recon_error,mean_error_bar,sparsity_ratio,model_size,log_evidence,inner_iters,outer_iters,converged,wall_time_s";

const FIELDS: usize = 14;

fn fields(r: &TrialRecord) -> [String; FIELDS] {
    [
        r.algorithm.clone(),
        r.k_meas.to_string(),
        r.n_len.to_string(),
        r.noise_pct.to_string(),
        r.seed.to_string(),
        r.recon_error.to_string(),
        r.mean_error_bar.to_string(),
        r.sparsity_ratio.to_string(),
        r.model_size.to_string(),
        r.log_evidence.to_string(),
        r.inner_iters.to_string(),
        r.outer_iters.to_string(),
        r.converged.to_string(),
        r.wall_time_s.to_string(),
    ]
}

pub fn to_string(records: &[TrialRecord]) -> String {
    let mut w = WriterBuilder::new().from_writer(Vec::with_capacity(64 * (records.len() + 1)));
    // Writing to a Vec cannot fail.
    w.write_record(HEADER.split(',')).expect("in-memory write");
    for r in records {
        w.write_record(fields(r)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("fields are UTF-8")
}

pub fn write(path: &Path, records: &[TrialRecord]) -> CliResult<()> {
    std::fs::write(path, to_string(records)).map_err(io_err(path))
}

fn to_record(f: &StringRecord, ln: usize, path: &Path) -> CliResult<TrialRecord> {
    let bad = |name: &str, v: &str| CliError::Parse {
        path: path.to_path_buf(),
        line: ln,
        msg: format!("bad {name} '{v}'"),
    };
    macro_rules! field {
        ($i:expr, $name:expr) => {
            f[$i].parse().map_err(|_| bad($name, &f[$i]))?
        };
    }
    Ok(TrialRecord {
        algorithm: f[0].to_string(),
        k_meas: field!(1, "k"),
        n_len: field!(2, "n"),
        noise_pct: field!(3, "noise_pct"),
        seed: field!(4, "trial_seed"),
        recon_error: field!(5, "recon_error"),
        mean_error_bar: field!(6, "mean_error_bar"),
        sparsity_ratio: field!(7, "sparsity_ratio"),
        model_size: field!(8, "model_size"),
        log_evidence: field!(9, "log_evidence"),
        inner_iters: field!(10, "inner_iters"),
        outer_iters: field!(11, "outer_iters"),
        converged: field!(12, "converged"),
        wall_time_s: field!(13, "wall_time_s"),
    })
}

pub fn parse(text: &str, path: &Path) -> CliResult<Vec<TrialRecord>> {
    let perr = |line: usize, msg: String| CliError::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut rdr = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = rdr.records();
    match rows.next() {
        Some(Ok(h)) if h.iter().eq(HEADER.split(',')) => {}
        Some(Ok(h)) => return Err(perr(1, format!("unexpected header '{}'", h.iter().collect::<Vec<_>>().join(",")))),
        Some(Err(e)) => return Err(perr(1, e.to_string())),
        None => return Err(perr(1, "empty file".into())),
    }
    let mut out = Vec::new();
    for row in rows {
        let row = row.map_err(|e| {
            let ln = e.position().map_or(0, |p| p.line() as usize);
            perr(ln, e.to_string())
        })?;
        let ln = row.position().map_or(0, |p| p.line() as usize);
        if row.len() != FIELDS {
            return Err(perr(ln, format!("expected {FIELDS} fields, found {}", row.len())));
        }
        out.push(to_record(&row, ln, path)?);
    }
    Ok(out)
}

pub fn read(path: &Path) -> CliResult<Vec<TrialRecord>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse(&text, path)
}
