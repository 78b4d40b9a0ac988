//! Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if
//! any fails.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use common::*;
use gitcite::conflict::Decline;
use gitcite::document;
use gitcite::model::{resolve, CitationFile, CitationRecord, TreeSnapshot};
use gitcite::ops::{self, RoleContext};
use gitcite::store::trace;
use gitcite::store::{copy_cite, Repository, Revision, TreeEdit};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn record(owner: &str, repo: &str) -> CitationRecord {
    CitationRecord::new(
        owner,
        repo,
        format!("https://example.org/{owner}/{repo}"),
        "1.0",
        "2021-06-01T00:00:00Z",
        vec![owner.to_owned()],
    )
}

fn files(paths: &[&str]) -> TreeSnapshot {
    TreeSnapshot::from_files(paths.iter().map(|s| (p(s), format!("h-{s}")))).unwrap()
}

fn within(limit: Duration, start: Instant) -> Result<String, String> {
    let took = start.elapsed();
    check(took < limit, || format!("took {took:?}, limit {limit:?}"))?;
    Ok(format!("{took:.2?}"))
}

fn copy_then_merge_versions() -> Outcome {
    let start = Instant::now();
    let member = RoleContext::member("P1 maintainer");
    let (c1, c2, c3, c4) = (record("P1", "main"), record("Ann", "f1"), record("P2", "lib"), record("Cy", "green"));
    let (f1, f2) = (p("/src/f1.c"), p("/green/f2.c"));

    // P1: V1 cites only the root; V2 adds a citation to f1.
    let mut p1 = Repository::init("P1", "main", files(&["/src/f1.c", "/src/g.c", "/doc.txt"]), c1.clone())
        .map_err(|e| e.to_string())?;
    let v1 = p1.head("main").unwrap().clone();
    p1.create_branch("import", &v1.id).unwrap();
    check(resolve(&v1.cf, &v1.tree, &f1).ok() == Some(&c1), || "resolve(V1, f1) != C1".into())?;
    ops::add_cite(&mut p1, &member, &Revision::branch("main"), &f1, c2.clone()).map_err(|e| e.to_string())?;
    let v2 = p1.commit("main", &[], &[]).map_err(|e| e.to_string())?;
    check(resolve(&v2.cf, &v2.tree, &f1).ok() == Some(&c2), || "resolve(V2, f1) != C2".into())?;

    // P2: V3 with the green subtree explicitly cited at its root; f2 has
    // no entry of its own.
    let mut cf3 = CitationFile::new(c3);
    cf3.set(p("/green/"), c4.clone());
    let p2 = Repository::with_citations("P2", "main", files(&["/green/f2.c", "/green/sub/f3.c", "/other.c"]), cf3)
        .map_err(|e| e.to_string())?;
    let v3 = p2.head("main").unwrap().clone();
    check(!v3.cf.contains(&f2), || "f2 must be uncited in V3".into())?;
    check(resolve(&v3.cf, &v3.tree, &f2).ok() == Some(&c4), || "resolve(V3, f2) != C4".into())?;

    // V4: the green subtree copied into P1 off V1.
    let copied = copy_cite(&p2, &v3.id, &p("/green/"), &mut p1, "import", &p("/green/")).map_err(|e| e.to_string())?;
    let v4 = copied.version;
    check(resolve(&v4.cf, &v4.tree, &f2).ok() == Some(&c4), || "resolve(V4, f2) != C4".into())?;
    check(v4.cf.get(&p("/green/")) == Some(&c4), || "V4 lacks the subtree root entry".into())?;

    // V5: V2 and V4 merged; no conflicts, the union of both files.
    let merged = p1.merge_cite("main", "import", &mut Decline).map_err(|e| e.to_string())?;
    let v5 = merged.version;
    check(merged.conflicts.is_empty(), || format!("{} conflicts", merged.conflicts.len()))?;
    let mut union: BTreeMap<_, _> = v2.cf.as_map().clone();
    union.extend(v4.cf.as_map().clone());
    check(v5.cf.as_map() == &union, || format!("V5 is not the union:\n{}", document::serialize(&v5.cf)))?;
    let file_union: BTreeMap<_, _> = v2.tree.files().into_iter().chain(v4.tree.files()).collect();
    check(v5.tree.files() == file_union, || "V5 files are not the union".into())?;
    check(resolve(&v5.cf, &v5.tree, &f1).ok() == Some(&c2), || "C2 did not survive the merge".into())?;
    check(resolve(&v5.cf, &v5.tree, &f2).ok() == Some(&c4), || "resolve(V5, f2) != C4".into())?;
    within(Duration::from_secs(1), start)
}

fn import_and_branch_credit() -> Outcome {
    let start = Instant::now();
    let bob = RoleContext::member("Bob");
    let (b_rec, c_rec, a_rec) = (record("Bob", "B"), record("Carlos", "C"), record("Alice", "B-gui"));

    let c = Repository::init("C", "main", files(&["/CC/rewrite.c", "/CC/views/plan.c", "/README"]), c_rec.clone())
        .map_err(|e| e.to_string())?;
    let mut b = Repository::init("B", "main", files(&["/src/main.c", "/src/util.c"]), b_rec.clone())
        .map_err(|e| e.to_string())?;
    let c_head = c.head_id("main").unwrap().clone();
    copy_cite(&c, &c_head, &p("/CC/"), &mut b, "main", &p("/CC/")).map_err(|e| e.to_string())?;
    b.commit("main", &[TreeEdit::ModifyContent { path: p("/CC/rewrite.c"), digest: "dovetailed".into() }], &[])
        .map_err(|e| e.to_string())?;

    let fork_point = b.head_id("main").unwrap().clone();
    b.create_branch("alice", &fork_point).unwrap();
    let gui = [TreeEdit::CreateFile { path: p("/GUI/app.js"), digest: "a1".into() }];
    b.commit("alice", &gui, &[]).map_err(|e| e.to_string())?;
    ops::add_cite(&mut b, &bob, &Revision::branch("alice"), &p("/GUI/"), a_rec.clone()).map_err(|e| e.to_string())?;
    b.commit("alice", &[TreeEdit::CreateFile { path: p("/GUI/view.js"), digest: "a2".into() }], &[])
        .map_err(|e| e.to_string())?;
    b.commit("main", &[TreeEdit::ModifyContent { path: p("/src/main.c"), digest: "m2".into() }], &[])
        .map_err(|e| e.to_string())?;
    let out = b.merge_cite("main", "alice", &mut Decline).map_err(|e| e.to_string())?;
    check(out.conflicts.is_empty(), || "unexpected conflicts".into())?;

    let head = b.head_id("main").unwrap().clone();
    let gen = |path: &str| ops::gen_cite(&b, &head, &p(path)).map_err(|e| e.to_string());
    check(gen("/")? == b_rec, || "gen(.) does not credit Bob".into())?;
    check(gen("/src/main.c")? == b_rec, || "Bob's own code is not credited to Bob".into())?;
    check(gen("/CC/")? == c_rec, || "gen(CC/) does not credit Carlos".into())?;
    check(gen("/CC/rewrite.c")? == c_rec, || "the modified CC file lost Carlos".into())?;
    check(gen("/CC/views/plan.c")? == c_rec, || "nested CC file lost Carlos".into())?;
    check(gen("/GUI/")? == a_rec, || "gen(GUI/) does not credit Alice".into())?;
    check(gen("/GUI/view.js")? == a_rec, || "Alice's file is not credited to Alice".into())?;
    within(Duration::from_secs(1), start)
}

fn repeat(n: u64, base: u64, mut case: impl FnMut(&mut Rng8) -> Result<(), String>) -> Outcome {
    for seed in base..base + n {
        case(&mut rng(seed)).map_err(|e| format!("seed {seed}: {e}"))?;
    }
    Ok(format!("{n}/{n}"))
}

fn resolution_oracle() -> Outcome {
    repeat(1000, 10_000, resolve_case)
}

fn copy_preservation() -> Outcome {
    let mut nodes = 0;
    let out = repeat(500, 20_000, |r| copy_case(r).map(|n| nodes += n))?;
    Ok(format!("{out}, {nodes} copied nodes"))
}

fn merge_algebra() -> Outcome {
    let mut conflicts = 0;
    let out = repeat(300, 30_000, |r| merge_case(r).map(|n| conflicts += n))?;
    Ok(format!("{out}, {conflicts} conflicts resolved"))
}

fn consistency_fuzz() -> Outcome {
    repeat(200, 40_000, |r| fuzz_case(r, 30))
}

fn format_round_trip() -> Outcome {
    repeat(200, 50_000, format_case)
}

fn adapter_agreement() -> Outcome {
    let start = Instant::now();
    let mut points = 0;
    for seed in 0..20u64 {
        let t = random_trace(&mut rng(60_000 + seed), 40);
        let (_, expected) = trace::replay(&t, "ref").map_err(|e| format!("seed {seed}: {e}"))?;
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let actual = gitcite::git::replay::replay(&t, dir.path()).map_err(|e| format!("seed {seed}: {e}"))?;
        check(actual.len() == expected.len(), || format!("seed {seed}: commit point counts differ"))?;
        for (a, e) in actual.iter().zip(&expected) {
            let line = a.op_index + 1;
            check(document::serialize(&a.cf) == document::serialize(&e.cf), || {
                format!("seed {seed}, line {line}: citation files differ\n{t}")
            })?;
            check(a.files == e.files, || format!("seed {seed}, line {line}: trees differ"))?;
            points += 1;
        }
    }
    let timing = within(Duration::from_secs(60), start)?;
    Ok(format!("20/20, {points} commit points, {timing}"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("copy then merge across projects, V1..V5", copy_then_merge_versions),
        ("imported and branched code keeps its credit", import_and_branch_credit),
        ("resolution vs walk oracle (1000)", resolution_oracle),
        ("copy preservation (500)", copy_preservation),
        ("merge algebra (300)", merge_algebra),
        ("consistency fuzz (200 x 30 ops)", consistency_fuzz),
        ("format round-trip (200)", format_round_trip),
        ("git adapter vs store (20 scenarios)", adapter_agreement),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS  {name}  [{detail}]"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}  {why}");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
