//! CSV output of run records, lossless in both directions.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{HarnessError, Result};
use crate::experiment::RunRecord;

pub const HEADER: [&str; 20] = [
    "h",
    "tau",
    "dofs",
    "steps",
    "e_U",
    "e_u",
    "e_w",
    "ex_U",
    "ex_u",
    "ex_w",
    "et_U",
    "et_u",
    "et_w",
    "E_rho",
    "R",
    "M",
    "eta_f",
    "Lambda",
    "effectivity",
    "wall_time",
];

/// Tolerance for the stored `Λ² = R² + 20M²` identity on read.
const LAMBDA_TOLERANCE: f64 = 1e-12;

fn fields(r: &RunRecord) -> Vec<String> {
    let sci = |v: f64| format!("{v:.16e}");
    let mut out = vec![sci(r.h), sci(r.tau), r.dofs.to_string(), r.steps.to_string()];
    out.extend(
        [
            r.e_nodes,
            r.e_u,
            r.e_w,
            r.ex_nodes,
            r.ex_u,
            r.ex_w,
            r.et_nodes,
            r.et_u,
            r.et_w,
            r.e_rho,
            r.r,
            r.m,
            r.eta_f,
            r.lambda,
            r.effectivity,
            r.wall_time,
        ]
        .map(sci),
    );
    out
}

/// Writes a header and one row per record.
pub fn write_records<W: Write>(records: &[RunRecord], sink: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record(fields(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    let io = |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io)?;
    write_records(records, std::io::BufWriter::new(file)).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => io(source),
        other => HarnessError::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("{other:?}"),
        },
    })
}

/// Parses records; errors name the offending line (1-based, header is 1).
pub fn parse_records<R: Read>(source: R, path: &Path) -> Result<Vec<RunRecord>> {
    let err = |line: u64, message: String| HarnessError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let header = reader.headers().map_err(|e| err(1, e.to_string()))?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(err(
            1,
            format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        ));
    }
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let row = row.map_err(|e| err(line, e.to_string()))?;
        if row.len() != HEADER.len() {
            return Err(err(
                line,
                format!("expected {} fields, found {}", HEADER.len(), row.len()),
            ));
        }
        let real = |j: usize| -> Result<f64> {
            row[j]
                .trim()
                .parse::<f64>()
                .map_err(|_| err(line, format!("column {}: `{}` is not a number", HEADER[j], &row[j])))
        };
        let count = |j: usize| -> Result<usize> {
            row[j]
                .trim()
                .parse::<usize>()
                .map_err(|_| err(line, format!("column {}: `{}` is not a count", HEADER[j], &row[j])))
        };
        let r = RunRecord {
            h: real(0)?,
            tau: real(1)?,
            dofs: count(2)?,
            steps: count(3)?,
            e_nodes: real(4)?,
            e_u: real(5)?,
            e_w: real(6)?,
            ex_nodes: real(7)?,
            ex_u: real(8)?,
            ex_w: real(9)?,
            et_nodes: real(10)?,
            et_u: real(11)?,
            et_w: real(12)?,
            e_rho: real(13)?,
            r: real(14)?,
            m: real(15)?,
            eta_f: real(16)?,
            lambda: real(17)?,
            effectivity: real(18)?,
            wall_time: real(19)?,
        };
        let expect = (r.r * r.r + 20.0 * r.m * r.m).sqrt();
        if (r.lambda - expect).abs() > LAMBDA_TOLERANCE * expect {
            return Err(err(
                line,
                format!("Lambda = {} but sqrt(R^2 + 20 M^2) = {expect}", r.lambda),
            ));
        }
        out.push(r);
    }
    Ok(out)
}

pub fn read_csv(path: &Path) -> Result<Vec<RunRecord>> {
    let file = std::fs::File::open(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_records(std::io::BufReader::new(file), path)
}
