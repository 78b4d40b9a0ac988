//! A record rendered as json, text and bibtex.

use gitcite::cli::{render, Format};
use gitcite::model::CitationRecord;

fn main() {
    let record = CitationRecord::new(
        "chenlica",
        "alu01-corecover",
        "https://example.org/chenlica/alu01-corecover",
        "4f2a9c1",
        "2018-07-02T16:20:00Z",
        vec!["Chen Li".into(), "Ramana Yerneni".into()],
    )
    .with_extra("license", "MIT");
    for format in [Format::Json, Format::Text, Format::Bibtex] {
        println!("--- {format:?}");
        print!("{}", render(&record, format));
    }
}
