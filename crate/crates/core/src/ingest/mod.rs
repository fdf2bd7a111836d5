//! Check-in and venue ingestion.
//!
//! Check-ins come as CSV (header row required) or JSON lines with the fields
//! `checkin_id,user_id,venue_id,timestamp,lat,lon`; timestamps are RFC 3339
//! and keep their UTC offset. Malformed records are collected, never fatal.

mod category;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, FixedOffset, SecondsFormat};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use category::{remap_category, Category, CategoryMap, CategoryRule, DEFAULT_CATEGORY_MAP};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl IngestError {
    fn format(path: &Path, message: impl Into<String>) -> Self {
        IngestError::Format {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Csv,
    Jsonl,
}

impl FromStr for InputFormat {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(InputFormat::Csv),
            "jsonl" | "json-lines" | "ndjson" => Ok(InputFormat::Jsonl),
            other => Err(IngestError::Config(format!("unsupported input format {other:?}"))),
        }
    }
}

impl fmt::Display for InputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputFormat::Csv => "csv",
            InputFormat::Jsonl => "jsonl",
        })
    }
}

mod rfc3339 {
    use chrono::{DateTime, FixedOffset, SecondsFormat};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(ts: &DateTime<FixedOffset>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&ts.to_rfc3339_opts(SecondsFormat::AutoSi, false))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<FixedOffset>, D::Error> {
        let s = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(s.trim()).map_err(serde::de::Error::custom)
    }
}

/// One check-in event. The timestamp carries the local UTC offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckIn {
    pub checkin_id: String,
    pub user_id: String,
    pub venue_id: String,
    #[serde(with = "rfc3339")]
    pub timestamp: DateTime<FixedOffset>,
    pub lat: f64,
    pub lon: f64,
}

/// A record that failed validation, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedRecord {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedCheckins {
    pub checkins: Vec<CheckIn>,
    pub rejected: Vec<RejectedRecord>,
}

#[derive(Debug, Deserialize)]
struct RawCheckIn {
    checkin_id: Option<String>,
    user_id: Option<String>,
    venue_id: Option<String>,
    timestamp: Option<String>,
    lat: Option<serde_json::Value>,
    lon: Option<serde_json::Value>,
}

fn required<'a>(field: &'a Option<String>, name: &str) -> Result<&'a str, String> {
    match field.as_deref().map(str::trim) {
        Some(s) if !s.is_empty() => Ok(s),
        _ => Err(format!("missing {name}")),
    }
}

fn coordinate(value: &Option<serde_json::Value>, name: &str, bound: f64) -> Result<f64, String> {
    let v = match value {
        Some(serde_json::Value::Number(n)) => n.as_f64(),
        Some(serde_json::Value::String(s)) if !s.trim().is_empty() => s.trim().parse::<f64>().ok(),
        Some(serde_json::Value::String(_)) | Some(serde_json::Value::Null) | None => {
            return Err(format!("missing {name}"))
        }
        Some(_) => None,
    };
    let v = v.ok_or_else(|| format!("{name} is not a number"))?;
    if !v.is_finite() || v.abs() > bound {
        return Err(format!("{name} out of range"));
    }
    Ok(v)
}

impl RawCheckIn {
    fn validate(self) -> Result<CheckIn, String> {
        let checkin_id = required(&self.checkin_id, "checkin_id")?.to_string();
        let user_id = required(&self.user_id, "user_id")?.to_string();
        let venue_id = required(&self.venue_id, "venue_id")?.to_string();
        let ts = required(&self.timestamp, "timestamp")?;
        let timestamp = DateTime::parse_from_rfc3339(ts).map_err(|e| format!("bad timestamp {ts:?}: {e}"))?;
        let lat = coordinate(&self.lat, "lat", 90.0)?;
        let lon = coordinate(&self.lon, "lon", 180.0)?;
        Ok(CheckIn {
            checkin_id,
            user_id,
            venue_id,
            timestamp,
            lat,
            lon,
        })
    }
}

const CHECKIN_COLUMNS: [&str; 6] = ["checkin_id", "user_id", "venue_id", "timestamp", "lat", "lon"];

fn open(path: &Path) -> Result<File, IngestError> {
    File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn column_index(headers: &csv::StringRecord, path: &Path, name: &str) -> Result<usize, IngestError> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| IngestError::format(path, format!("missing column {name:?} in header")))
}

fn string_field(record: &csv::StringRecord, idx: usize) -> Option<String> {
    record.get(idx).map(str::to_string)
}

fn value_field(record: &csv::StringRecord, idx: usize) -> Option<serde_json::Value> {
    record.get(idx).map(|s| serde_json::Value::String(s.to_string()))
}

/// Parses a check-in file. Every data line either becomes a [`CheckIn`] or a
/// [`RejectedRecord`]; file order is preserved. Later duplicates of a
/// `checkin_id` are rejected.
pub fn parse_checkins(path: &Path, format: InputFormat) -> Result<ParsedCheckins, IngestError> {
    let file = open(path)?;
    let mut out = ParsedCheckins::default();
    let mut seen = HashSet::new();
    let mut accept = |line: u64, result: Result<CheckIn, String>, out: &mut ParsedCheckins| match result {
        Ok(c) if !seen.insert(c.checkin_id.clone()) => out.rejected.push(RejectedRecord {
            line,
            reason: format!("duplicate checkin_id {:?}", c.checkin_id),
        }),
        Ok(c) => out.checkins.push(c),
        Err(reason) => out.rejected.push(RejectedRecord { line, reason }),
    };

    match format {
        InputFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(file);
            let headers = match reader.headers() {
                Ok(h) => h.clone(),
                Err(e) => return Err(IngestError::format(path, e.to_string())),
            };
            if headers.is_empty() {
                return Ok(out);
            }
            let idx: Vec<usize> = CHECKIN_COLUMNS
                .iter()
                .map(|c| column_index(&headers, path, c))
                .collect::<Result<_, _>>()?;
            let mut record = csv::StringRecord::new();
            loop {
                let line = reader.position().line();
                match reader.read_record(&mut record) {
                    Ok(false) => break,
                    Ok(true) => {
                        let line = record.position().map_or(line, |p| p.line());
                        let raw = RawCheckIn {
                            checkin_id: string_field(&record, idx[0]),
                            user_id: string_field(&record, idx[1]),
                            venue_id: string_field(&record, idx[2]),
                            timestamp: string_field(&record, idx[3]),
                            lat: value_field(&record, idx[4]),
                            lon: value_field(&record, idx[5]),
                        };
                        accept(line, raw.validate(), &mut out);
                    }
                    Err(e) => {
                        if let csv::ErrorKind::Io(_) = e.kind() {
                            return Err(IngestError::format(path, e.to_string()));
                        }
                        accept(line, Err(format!("malformed CSV record: {e}")), &mut out);
                    }
                }
            }
        }
        InputFormat::Jsonl => {
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line_no = i as u64 + 1;
                let line = line.map_err(|source| IngestError::Io {
                    path: path.to_path_buf(),
                    source,
                })?;
                if line.trim().is_empty() {
                    continue;
                }
                let result = serde_json::from_str::<RawCheckIn>(&line)
                    .map_err(|e| format!("malformed JSON: {e}"))
                    .and_then(RawCheckIn::validate);
                accept(line_no, result, &mut out);
            }
        }
    }
    Ok(out)
}

/// Serializes check-ins in the same schema [`parse_checkins`] reads.
pub fn write_checkins<W: Write>(writer: W, checkins: &[CheckIn], format: InputFormat) -> Result<(), IngestError> {
    let to_err = |e: &dyn fmt::Display| IngestError::Config(format!("serialization failed: {e}"));
    match format {
        InputFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
            w.write_record(CHECKIN_COLUMNS).map_err(|e| to_err(&e))?;
            for c in checkins {
                w.serialize(c).map_err(|e| to_err(&e))?;
            }
            w.flush().map_err(|e| to_err(&e))?;
        }
        InputFormat::Jsonl => {
            let mut w = writer;
            for c in checkins {
                serde_json::to_writer(&mut w, c).map_err(|e| to_err(&e))?;
                w.write_all(b"\n").map_err(|e| to_err(&e))?;
            }
        }
    }
    Ok(())
}

/// Formats a timestamp the way check-in files store it.
pub fn format_timestamp(ts: &DateTime<FixedOffset>) -> String {
    ts.to_rfc3339_opts(SecondsFormat::AutoSi, false)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Venue {
    pub venue_id: String,
    pub name: String,
    pub city: String,
    pub lat: f64,
    pub lon: f64,
    /// Raw top-level category as delivered by the source.
    pub raw_category: String,
    pub subcategory: String,
    /// Remapped label.
    pub category: Category,
}

/// Venues keyed by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VenueCatalog {
    venues: BTreeMap<String, Venue>,
}

impl VenueCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts, replacing (and returning) any venue with the same id.
    pub fn insert(&mut self, venue: Venue) -> Option<Venue> {
        self.venues.insert(venue.venue_id.clone(), venue)
    }

    pub fn get(&self, venue_id: &str) -> Option<&Venue> {
        self.venues.get(venue_id)
    }

    pub fn len(&self) -> usize {
        self.venues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.venues.is_empty()
    }

    /// Venues in id order.
    pub fn iter(&self) -> impl Iterator<Item = &Venue> {
        self.venues.values()
    }
}

impl FromIterator<Venue> for VenueCatalog {
    fn from_iter<I: IntoIterator<Item = Venue>>(iter: I) -> Self {
        let mut catalog = VenueCatalog::new();
        for v in iter {
            catalog.insert(v);
        }
        catalog
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadedVenues {
    pub catalog: VenueCatalog,
    pub rejected: Vec<RejectedRecord>,
}

const VENUE_COLUMNS: [&str; 7] = ["venue_id", "name", "city", "lat", "lon", "category", "subcategory"];
const MAPPED_COLUMN: &str = "mapped_category";

fn read_venue_file(
    path: &Path,
    mut categorize: impl FnMut(&str, &str, Option<&str>) -> Result<Category, String>,
    want_mapped: bool,
) -> Result<LoadedVenues, IngestError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(open(path)?);
    let headers = reader
        .headers()
        .map_err(|e| IngestError::format(path, e.to_string()))?
        .clone();
    let mut out = LoadedVenues::default();
    if headers.is_empty() {
        return Ok(out);
    }
    let idx: Vec<usize> = VENUE_COLUMNS
        .iter()
        .map(|c| column_index(&headers, path, c))
        .collect::<Result<_, _>>()?;
    let mapped_idx = if want_mapped {
        Some(column_index(&headers, path, MAPPED_COLUMN)?)
    } else {
        None
    };

    for result in reader.records() {
        let record = match result {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                out.rejected.push(RejectedRecord {
                    line,
                    reason: format!("malformed CSV record: {e}"),
                });
                continue;
            }
        };
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(idx[i]).unwrap_or("").trim();
        let parsed = (|| {
            let venue_id = field(0);
            if venue_id.is_empty() {
                return Err("missing venue_id".to_string());
            }
            let city = field(2);
            if city.is_empty() {
                return Err("missing city".to_string());
            }
            let lat = coordinate(&Some(serde_json::Value::String(field(3).into())), "lat", 90.0)?;
            let lon = coordinate(&Some(serde_json::Value::String(field(4).into())), "lon", 180.0)?;
            let mapped = mapped_idx.map(|i| record.get(i).unwrap_or("").trim());
            let category = categorize(field(5), field(6), mapped)?;
            Ok(Venue {
                venue_id: venue_id.to_string(),
                name: field(1).to_string(),
                city: city.to_string(),
                lat,
                lon,
                raw_category: field(5).to_string(),
                subcategory: field(6).to_string(),
                category,
            })
        })();
        match parsed {
            Ok(v) => {
                if let Some(prev) = out.catalog.insert(v) {
                    log::warn!(
                        "{}: duplicate venue_id {:?} at line {line}; keeping the later record",
                        path.display(),
                        prev.venue_id
                    );
                }
            }
            Err(reason) => out.rejected.push(RejectedRecord { line, reason }),
        }
    }
    Ok(out)
}

/// Loads a raw venue file and remaps every venue through `map`.
pub fn load_venues(path: &Path, map: &CategoryMap) -> Result<LoadedVenues, IngestError> {
    let mut unmatched = 0usize;
    let loaded = read_venue_file(
        path,
        |raw_cat, raw_sub, _| {
            Ok(map.lookup(raw_cat, raw_sub).unwrap_or_else(|| {
                unmatched += 1;
                log::debug!("no category rule for ({raw_cat:?}, {raw_sub:?}); using {}", map.default);
                map.default
            }))
        },
        false,
    )?;
    if unmatched > 0 {
        log::info!(
            "{}: {unmatched} venue(s) fell through to the default category {}",
            path.display(),
            map.default
        );
    }
    Ok(loaded)
}

/// Reads a catalog previously written by [`write_catalog`], trusting its
/// `mapped_category` column.
pub fn read_catalog(path: &Path) -> Result<LoadedVenues, IngestError> {
    read_venue_file(
        path,
        |_, _, mapped| mapped.unwrap_or("").parse::<Category>().map_err(|e| e.to_string()),
        true,
    )
}

pub fn write_catalog<W: Write>(writer: W, catalog: &VenueCatalog) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = VENUE_COLUMNS.to_vec();
    header.push(MAPPED_COLUMN);
    w.write_record(&header)?;
    for v in catalog.iter() {
        w.write_record([
            v.venue_id.as_str(),
            &v.name,
            &v.city,
            &v.lat.to_string(),
            &v.lon.to_string(),
            &v.raw_category,
            &v.subcategory,
            v.category.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
