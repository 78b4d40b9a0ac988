use std::io::Read;

use crate::document;
use crate::error::{Error, Result};
use crate::model::CitationFile;

/// Fetches `url` over HTTP(S). Non-200 replies are [`Error::HttpStatus`];
/// anything that prevents a reply is [`Error::NetworkFailure`].
pub fn fetch_remote_bytes(url: &str) -> Result<Vec<u8>> {
    let response = match ureq::get(url).call() {
        Ok(r) => r,
        Err(ureq::Error::Status(code, _)) => return Err(Error::HttpStatus(code)),
        Err(e) => return Err(Error::NetworkFailure(e.to_string())),
    };
    if response.status() != 200 {
        return Err(Error::HttpStatus(response.status()));
    }
    let mut body = Vec::new();
    response.into_reader().read_to_end(&mut body).map_err(|e| Error::NetworkFailure(e.to_string()))?;
    Ok(body)
}

/// Fetches and parses a citation file published at `url`.
pub fn fetch_remote_citation_file(url: &str) -> Result<CitationFile> {
    let body = fetch_remote_bytes(url)?;
    let text = String::from_utf8(body).map_err(|e| Error::MalformedDocument {
        position: crate::error::Position { line: 1, column: 1 },
        message: e.to_string(),
    })?;
    document::parse(&text)
}
