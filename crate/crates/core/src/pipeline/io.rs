//! File formats shared between stages.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use chrono::DateTime;
use sha2::{Digest, Sha256};

use super::PipelineError;
use crate::classify::{Label, LabeledCheckIn};
use crate::ingest::{format_timestamp, CheckIn};

pub const LABELED_COLUMNS: [&str; 7] = ["checkin_id", "user_id", "venue_id", "timestamp", "lat", "lon", "label"];

pub(crate) fn write_error(path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Internal(format!("cannot write {}: {e}", path.display()))
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>, PipelineError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| write_error(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| write_error(path, e))
}

/// Writes a header and rows; returns the number of data rows.
pub(crate) fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<usize, PipelineError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header).map_err(|e| write_error(path, e))?;
    let mut n = 0;
    for row in rows {
        w.write_record(row).map_err(|e| write_error(path, e))?;
        n += 1;
    }
    w.flush().map_err(|e| write_error(path, e))?;
    Ok(n)
}

pub fn write_labeled_checkins(path: &Path, labeled: &[LabeledCheckIn]) -> Result<usize, PipelineError> {
    write_csv(
        path,
        &LABELED_COLUMNS,
        labeled.iter().map(|l| {
            let c = &l.checkin;
            [
                c.checkin_id.clone(),
                c.user_id.clone(),
                c.venue_id.clone(),
                format_timestamp(&c.timestamp),
                c.lat.to_string(),
                c.lon.to_string(),
                l.label.to_string(),
            ]
        }),
    )
}

pub fn read_labeled_checkins(path: &Path) -> Result<Vec<LabeledCheckIn>, PipelineError> {
    let data_err = |m: String| PipelineError::Data(format!("{}: {m}", path.display()));
    let file = File::open(path).map_err(|e| data_err(e.to_string()))?;
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    let headers = reader.headers().map_err(|e| data_err(e.to_string()))?.clone();
    if headers.iter().ne(LABELED_COLUMNS) {
        return Err(data_err(format!("unexpected header {headers:?}")));
    }
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| data_err(e.to_string()))?;
        let line = i + 2;
        let field = |j: usize| rec.get(j).unwrap_or("");
        let num = |j: usize| {
            field(j)
                .parse::<f64>()
                .map_err(|e| data_err(format!("line {line}: {e}")))
        };
        out.push(LabeledCheckIn {
            checkin: CheckIn {
                checkin_id: field(0).to_string(),
                user_id: field(1).to_string(),
                venue_id: field(2).to_string(),
                timestamp: DateTime::parse_from_rfc3339(field(3)).map_err(|e| data_err(format!("line {line}: {e}")))?,
                lat: num(4)?,
                lon: num(5)?,
            },
            label: field(6)
                .parse::<Label>()
                .map_err(|e| data_err(format!("line {line}: {e}")))?,
        });
    }
    Ok(out)
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    let mut file = File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// File-name-safe form of a city or class name.
pub fn slug(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub(crate) fn write_all(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), PipelineError> {
    let mut w = create(path)?;
    f(&mut w).map_err(|e| write_error(path, e))?;
    w.flush().map_err(|e| write_error(path, e))
}
