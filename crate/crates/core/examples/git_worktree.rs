//! The adapter on a real git repository in a temporary directory: init,
//! cite a directory, rename it, commit, and look the citation up again.

use std::process::Command;

use gitcite::git::GitWorktree;
use gitcite::model::{CanonicalPath, CitationRecord};
use gitcite::ops::{CiteEdit, RepoMetadata, RoleContext};

fn git(dir: &std::path::Path, args: &[&str]) {
    let ok = Command::new("git").arg("-C").arg(dir).args(args).status().expect("git runs").success();
    assert!(ok, "git {args:?} failed");
}

fn main() -> gitcite::Result<()> {
    let tmp = tempfile::tempdir()?;
    let dir = tmp.path();
    git(dir, &["init", "-q", "-b", "main"]);
    git(dir, &["config", "user.name", "Bob"]);
    git(dir, &["config", "user.email", "bob@example.org"]);
    std::fs::create_dir_all(dir.join("lib"))?;
    std::fs::write(dir.join("lib/util.c"), "int util;\n")?;
    git(dir, &["add", "-A"]);
    git(dir, &["commit", "-q", "-m", "start"]);

    let wt = GitWorktree::discover(dir)?;
    let meta = RepoMetadata {
        owner: "bob".into(),
        repo_name: "B".into(),
        locator: "https://example.org/bob/B".into(),
        ..wt.metadata()?
    };
    wt.init_citation_file(&meta)?;
    let lib = CanonicalPath::parse_rendered("/lib/")?;
    let dana =
        CitationRecord::new("dana", "util", "https://example.org/dana/util", "3", "2020-10-10", vec!["Dana".into()]);
    wt.edit(&RoleContext::member("bob"), &CiteEdit::Add { path: lib, record: dana })?;
    wt.commit("cite lib", false)?;

    git(dir, &["mv", "lib", "vendor"]);
    let report = wt.commit("move lib", false)?;
    for (from, to) in &report.rekeyed {
        println!("moved citation {from} -> {to}");
    }
    let r = wt.gen(&CanonicalPath::parse_rendered("/vendor/util.c")?, None)?;
    println!("/vendor/util.c -> {}", r.owner);
    print!("{}", std::fs::read_to_string(wt.citation_path())?);
    Ok(())
}
