//! The on-disk citation file format.
//!
//! A citation file is one JSON object mapping rendered paths to record
//! objects. The canonical bytes are fixed: keys sorted bytewise, record
//! fields in declaration order, two-space indentation, a trailing newline.
//! Equal citation files therefore always serialize to equal bytes, and a
//! single edit changes only the lines of the entry it touches.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Position, Result};
use crate::model::{CanonicalPath, CitationFile, CitationRecord};

/// Default file name at the repository root.
pub const CITATION_FILE_NAME: &str = "citation.cite";

struct Entries<'a>(&'a CitationFile);

impl Serialize for Entries<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0.entries() {
            map.serialize_entry(k.as_str(), v)?;
        }
        map.end()
    }
}

pub fn serialize(cf: &CitationFile) -> String {
    let mut out = serde_json::to_string_pretty(&Entries(cf)).expect("string maps always serialize");
    out.push('\n');
    out
}

/// A single record in the same layout it has inside a citation file.
pub fn serialize_record(record: &CitationRecord) -> String {
    let mut out = serde_json::to_string_pretty(record).expect("records always serialize");
    out.push('\n');
    out
}

/// One-line JSON for a record, used by traces.
pub fn record_to_line(record: &CitationRecord) -> String {
    serde_json::to_string(record).expect("records always serialize")
}

pub fn parse_record(text: &str) -> Result<CitationRecord> {
    serde_json::from_str(text).map_err(malformed)
}

struct RawEntries(BTreeMap<CanonicalPath, CitationRecord>);

impl<'de> Deserialize<'de> for RawEntries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = RawEntries;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object mapping canonical paths to citation records")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<RawEntries, A::Error> {
                let mut out = BTreeMap::new();
                while let Some(key) = map.next_key::<String>()? {
                    let path = CanonicalPath::parse_rendered(&key).map_err(de::Error::custom)?;
                    if out.contains_key(&path) {
                        return Err(de::Error::custom(format_args!("duplicate key {key:?}")));
                    }
                    let record: CitationRecord = map.next_value()?;
                    out.insert(path, record);
                }
                Ok(RawEntries(out))
            }
        }
        deserializer.deserialize_map(V)
    }
}

fn malformed(e: serde_json::Error) -> Error {
    Error::MalformedDocument { position: Position { line: e.line(), column: e.column() }, message: e.to_string() }
}

/// Strict parse. Unknown record fields are kept in `extras`; anything else
/// off-format is an error.
pub fn parse(text: &str) -> Result<CitationFile> {
    let RawEntries(entries) = serde_json::from_str(text).map_err(malformed)?;
    CitationFile::from_entries(entries)
}

/// Whether `text` is exactly the canonical serialization of what it parses
/// to. A parseable but non-canonical file was edited by hand.
pub fn is_canonical(text: &str) -> bool {
    parse(text).map(|cf| serialize(&cf) == text).unwrap_or(false)
}
