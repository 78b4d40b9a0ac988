//! A scenario in the trace format, replayed against the in-memory store.

use gitcite::document;
use gitcite::store::trace::{self, Trace};

const SCENARIO: &str = r#"
init main {"owner":"bob","repo_name":"B","locator":"https://example.org/bob/B","version_id":"1","date":"2021-01-01","author_list":["Bob"],"extras":{}}
write main /lib/util.c u1
write main /app.c a1
commit main
branch dev main
add dev /lib/ {"owner":"dana","repo_name":"lib","locator":"https://example.org/dana/lib","version_id":"2","date":"2021-02-01","author_list":["Dana"],"extras":{}}
commit dev
mv dev /lib/ /vendor/
commit dev
merge main dev theirs
"#;

fn main() -> gitcite::Result<()> {
    let trace: Trace = SCENARIO.parse()?;
    let (repo, points) = trace::replay(&trace, "B")?;
    for point in &points {
        println!(
            "line {:>2} on {:<4} {} keys, {} files",
            point.op_index + 1,
            point.branch,
            point.cf.len(),
            point.files.len()
        );
    }
    print!("{}", document::serialize(&repo.head("main")?.cf));
    Ok(())
}
