//! Closest-ancestor resolution over a small tree.

use gitcite::model::{resolve, CanonicalPath, CitationFile, CitationRecord, TreeSnapshot};

fn p(s: &str) -> CanonicalPath {
    CanonicalPath::parse_rendered(s).unwrap()
}

fn main() -> gitcite::Result<()> {
    let tree = TreeSnapshot::from_files([
        (p("/src/main.c"), "1".to_owned()),
        (p("/src/parser/lexer.c"), "2".to_owned()),
        (p("/vendor/zlib/inflate.c"), "3".to_owned()),
    ])?;
    let mut cf = CitationFile::new(CitationRecord::new(
        "bob",
        "B",
        "https://example.org/bob/B",
        "v2",
        "2021-03-01",
        vec!["Bob".into()],
    ));
    cf.set(
        p("/vendor/zlib/"),
        CitationRecord::new(
            "madler",
            "zlib",
            "https://example.org/madler/zlib",
            "1.2.11",
            "2017-01-15",
            vec!["Mark Adler".into()],
        ),
    );

    for path in tree.paths() {
        let record = resolve(&cf, &tree, &path)?;
        let (from, _) = cf.closest_entry(&path).expect("the root is always cited");
        println!("{:<24} {}/{}  (from {from})", path.as_str(), record.owner, record.repo_name);
    }
    Ok(())
}
