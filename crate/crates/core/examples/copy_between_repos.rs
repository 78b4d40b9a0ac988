//! CopyCite: a subtree and its citations moved into another repository.

use gitcite::model::{CanonicalPath, CitationFile, CitationRecord, TreeSnapshot};
use gitcite::ops;
use gitcite::store::{copy_cite, Repository};

fn p(s: &str) -> CanonicalPath {
    CanonicalPath::parse_rendered(s).unwrap()
}

fn rec(owner: &str, repo: &str) -> CitationRecord {
    CitationRecord::new(
        owner,
        repo,
        format!("https://example.org/{owner}/{repo}"),
        "1.0",
        "2020-01-01",
        vec![owner.into()],
    )
}

fn main() -> gitcite::Result<()> {
    let src_tree = TreeSnapshot::from_files([
        (p("/core/plan.c"), "p".to_owned()),
        (p("/core/rewrite/views.c"), "v".to_owned()),
        (p("/README"), "r".to_owned()),
    ])?;
    let mut src_cf = CitationFile::new(rec("carlos", "C"));
    src_cf.set(p("/core/rewrite/views.c"), rec("li", "views"));
    let src = Repository::with_citations("C", "main", src_tree, src_cf)?;

    let dst_tree = TreeSnapshot::from_files([(p("/src/main.c"), "m".to_owned())])?;
    let mut dst = Repository::init("B", "main", dst_tree, rec("bob", "B"))?;

    let head = src.head_id("main")?.clone();
    let out = copy_cite(&src, &head, &p("/core/"), &mut dst, "main", &p("/core/"))?;
    println!("added keys: {:?}", out.added);
    for path in ["/core/plan.c", "/core/rewrite/views.c", "/src/main.c"] {
        let r = ops::gen_cite(&dst, &out.version.id, &p(path))?;
        println!("{path:<22} {}/{}", r.owner, r.repo_name);
    }
    Ok(())
}
