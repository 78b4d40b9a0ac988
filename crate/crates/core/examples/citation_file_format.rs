//! The on-disk document: canonical bytes, strict parsing.

use gitcite::document;
use gitcite::model::{CanonicalPath, CitationFile, CitationRecord};

fn main() -> gitcite::Result<()> {
    let mut cf = CitationFile::new(
        CitationRecord::new(
            "bob",
            "B",
            "https://example.org/bob/B",
            "abc123",
            "2021-03-01T10:00:00Z",
            vec!["Bob".into()],
        )
        .with_extra("doi", "10.5281/zenodo.1234"),
    );
    cf.set(
        CanonicalPath::parse_rendered("/vendor/CC/")?,
        CitationRecord::new("carlos", "C", "https://example.org/carlos/C", "v3", "2019-11-11", vec!["Carlos".into()]),
    );

    let text = document::serialize(&cf);
    print!("{text}");
    let back = document::parse(&text)?;
    println!("round trip equal: {}", back == cf);
    println!("canonical: {}", document::is_canonical(&text));

    let messy = text.replace("  ", "\t");
    println!(
        "reindented still parses: {}, canonical: {}",
        document::parse(&messy).is_ok(),
        document::is_canonical(&messy)
    );
    let root = document::serialize_record(cf.root_record().unwrap());
    match document::parse(&format!("{{\"/\": {root}, \"/\": {root}}}")) {
        Ok(_) => println!("unexpected success"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
