use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

/// Names of the fixed record fields, in serialization order.
pub const RECORD_FIELDS: [&str; 7] = ["owner", "repo_name", "locator", "version_id", "date", "author_list", "extras"];

/// One citation: the snippets a citer needs to credit a component.
///
/// `extras` holds any additional snippets (a DOI, a license, a grant
/// number); its keys never collide with the named fields.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct CitationRecord {
    pub owner: String,
    pub repo_name: String,
    /// URL or DOI of the cited version.
    pub locator: String,
    pub version_id: String,
    /// ISO-8601 timestamp.
    pub date: String,
    pub author_list: Vec<String>,
    pub extras: BTreeMap<String, String>,
}

impl CitationRecord {
    pub fn new(
        owner: impl Into<String>,
        repo_name: impl Into<String>,
        locator: impl Into<String>,
        version_id: impl Into<String>,
        date: impl Into<String>,
        author_list: Vec<String>,
    ) -> Self {
        CitationRecord {
            owner: owner.into(),
            repo_name: repo_name.into(),
            locator: locator.into(),
            version_id: version_id.into(),
            date: date.into(),
            author_list,
            extras: BTreeMap::new(),
        }
    }

    pub fn with_extra(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.extras.insert(key.into(), value.into());
        self
    }

    pub fn check(&self) -> Result<()> {
        for (name, value) in [("owner", &self.owner), ("repo_name", &self.repo_name), ("locator", &self.locator)] {
            if value.trim().is_empty() {
                return Err(Error::InvalidRecord(format!("{name} must not be empty")));
            }
        }
        if let Some(k) = self.extras.keys().find(|k| RECORD_FIELDS.contains(&k.as_str())) {
            return Err(Error::InvalidRecord(format!("extra {k:?} shadows a named field")));
        }
        Ok(())
    }

    /// Sets a field by name; unknown names go to `extras`. `author_list`
    /// takes a comma-separated list.
    pub fn set_field(&mut self, name: &str, value: &str) -> Result<()> {
        match name {
            "owner" => self.owner = value.to_owned(),
            "repo_name" => self.repo_name = value.to_owned(),
            "locator" => self.locator = value.to_owned(),
            "version_id" => self.version_id = value.to_owned(),
            "date" => self.date = value.to_owned(),
            "author_list" => self.author_list = split_authors(value),
            "extras" => return Err(Error::InvalidRecord("'extras' is not a settable field".into())),
            "" => return Err(Error::InvalidRecord("empty field name".into())),
            other => {
                self.extras.insert(other.to_owned(), value.to_owned());
            }
        }
        Ok(())
    }
}

pub fn split_authors(list: &str) -> Vec<String> {
    list.split(',').map(str::trim).filter(|a| !a.is_empty()).map(str::to_owned).collect()
}

impl<'de> Deserialize<'de> for CitationRecord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        deserializer.deserialize_map(RecordVisitor)
    }
}

struct RecordVisitor;

impl<'de> Visitor<'de> for RecordVisitor {
    type Value = CitationRecord;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a citation record object")
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<CitationRecord, A::Error> {
        let mut strings: [Option<String>; 5] = Default::default();
        let mut authors: Option<Vec<String>> = None;
        let mut extras: Option<BTreeMap<String, String>> = None;
        // Unknown fields are folded into extras after the fact so that a
        // later explicit "extras" object cannot silently drop them.
        let mut loose: BTreeMap<String, String> = BTreeMap::new();

        while let Some(key) = map.next_key::<String>()? {
            let dup = || de::Error::custom(format_args!("duplicate field {key:?}"));
            match RECORD_FIELDS.iter().position(|f| *f == key) {
                Some(i @ 0..=4) => {
                    if strings[i].is_some() {
                        return Err(dup());
                    }
                    strings[i] = Some(map.next_value()?);
                }
                Some(5) => {
                    if authors.is_some() {
                        return Err(dup());
                    }
                    authors = Some(map.next_value()?);
                }
                Some(_) => {
                    if extras.is_some() {
                        return Err(dup());
                    }
                    extras = Some(map.next_value::<UniqueStringMap>()?.0);
                }
                None => {
                    let value: String = map.next_value()?;
                    if loose.insert(key.clone(), value).is_some() {
                        return Err(dup());
                    }
                }
            }
        }

        let [owner, repo_name, locator, version_id, date] = strings;
        let missing = |name: &'static str| de::Error::missing_field(name);
        let mut extras = extras.unwrap_or_default();
        for (k, v) in loose {
            if extras.insert(k.clone(), v).is_some() {
                return Err(de::Error::custom(format_args!("field {k:?} given both inline and in extras")));
            }
        }
        let record = CitationRecord {
            owner: owner.ok_or_else(|| missing("owner"))?,
            repo_name: repo_name.ok_or_else(|| missing("repo_name"))?,
            locator: locator.ok_or_else(|| missing("locator"))?,
            version_id: version_id.ok_or_else(|| missing("version_id"))?,
            date: date.ok_or_else(|| missing("date"))?,
            author_list: authors.ok_or_else(|| missing("author_list"))?,
            extras,
        };
        record.check().map_err(de::Error::custom)?;
        Ok(record)
    }
}

/// A string-to-string JSON object that rejects repeated keys.
struct UniqueStringMap(pub BTreeMap<String, String>);

impl<'de> Deserialize<'de> for UniqueStringMap {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = UniqueStringMap;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object of strings")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<UniqueStringMap, A::Error> {
                let mut out = BTreeMap::new();
                while let Some((k, v)) = map.next_entry::<String, String>()? {
                    if out.contains_key(&k) {
                        return Err(de::Error::custom(format_args!("duplicate key {k:?}")));
                    }
                    out.insert(k, v);
                }
                Ok(UniqueStringMap(out))
            }
        }
        deserializer.deserialize_map(V)
    }
}
