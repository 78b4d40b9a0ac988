#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use gitcite::conflict::{ConflictReport, ConflictResolver, Resolution};
use gitcite::model::{CanonicalPath, CitationFile, CitationRecord, PathKind, TreeSnapshot};
use gitcite::ops::CiteEdit;
use gitcite::store::trace::{self, Side, Trace, TraceOp};
use gitcite::store::{Repository, TreeEdit};
use rand::seq::{IteratorRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    Rng8::seed_from_u64(seed)
}

pub fn p(s: &str) -> CanonicalPath {
    CanonicalPath::parse_rendered(s).unwrap()
}

const PEOPLE: [&str; 6] = ["Alice", "Bob", "Carlos", "Dana", "Eve", "Femi"];

pub fn random_record(rng: &mut Rng8) -> CitationRecord {
    let owner = *PEOPLE.choose(rng).unwrap();
    let repo = format!("r{}", rng.gen_range(0..20));
    let mut authors: Vec<String> = PEOPLE.iter().filter(|_| rng.gen_bool(0.3)).map(|s| s.to_string()).collect();
    authors.shuffle(rng);
    let mut r = CitationRecord::new(
        owner,
        repo.clone(),
        format!("https://example.org/{owner}/{repo}"),
        format!("{:08x}", rng.gen::<u32>()),
        format!("20{:02}-{:02}-{:02}T00:00:00Z", rng.gen_range(10..25), rng.gen_range(1..13), rng.gen_range(1..29)),
        authors,
    );
    if rng.gen_bool(0.2) {
        r = r.with_extra("doi", format!("10.5281/zenodo.{}", rng.gen_range(1000..9999)));
    }
    if rng.gen_bool(0.1) {
        r = r.with_extra("license", "MIT \"quoted\" \\ ünïcode");
    }
    r
}

/// Renders a path from segments by hand, independently of the library.
fn render(segments: &[&str], dir: bool) -> String {
    if segments.is_empty() {
        return "/".into();
    }
    let mut s = format!("/{}", segments.join("/"));
    if dir {
        s.push('/');
    }
    s
}

/// Resolution by walking up from `path` one level at a time and scanning
/// the entries for an exact match.
pub fn walk_oracle<'a>(cf: &'a CitationFile, tree: &TreeSnapshot, path: &CanonicalPath) -> Option<&'a CitationRecord> {
    if !tree.paths().iter().any(|q| q == path) {
        return None;
    }
    let segments: Vec<&str> = path.segments().collect();
    for n in (0..=segments.len()).rev() {
        let dir = n < segments.len() || path.kind() != PathKind::File;
        let key = render(&segments[..n], dir);
        if let Some((_, r)) = cf.entries().find(|(k, _)| k.as_str() == key) {
            return Some(r);
        }
    }
    None
}

/// A random tree of at most `max_nodes` nodes (root included). Names are
/// `dN` for directories and `fN.c` for files, never reused.
pub fn random_tree(rng: &mut Rng8, max_nodes: usize) -> TreeSnapshot {
    let mut tree = TreeSnapshot::new();
    let target = rng.gen_range(1..=max_nodes.max(1));
    let mut dirs = vec![CanonicalPath::root()];
    let mut n = 1;
    let mut k = 0;
    while n < target {
        let parent = dirs.choose(rng).unwrap().clone();
        k += 1;
        if rng.gen_bool(0.35) {
            let d = parent.join(&format!("d{k}"), PathKind::Directory).unwrap();
            tree.insert_dir(&d).unwrap();
            dirs.push(d);
        } else {
            let f = parent.join(&format!("f{k}.c"), PathKind::File).unwrap();
            tree.insert_file(&f, format!("{:x}", rng.gen::<u32>())).unwrap();
        }
        n += 1;
    }
    tree
}

/// A citation file over `tree` citing the root and a random share of the
/// other nodes.
pub fn random_cf(rng: &mut Rng8, tree: &TreeSnapshot, share: f64) -> CitationFile {
    let mut cf = CitationFile::new(random_record(rng));
    for path in tree.paths().into_iter().filter(|q| !q.is_root()) {
        if rng.gen_bool(share) {
            cf.set(path, random_record(rng));
        }
    }
    cf
}

/// A query path: usually a node of `tree`, sometimes a missing path or a
/// node named with the wrong kind.
pub fn random_query(rng: &mut Rng8, tree: &TreeSnapshot) -> CanonicalPath {
    let paths = tree.paths();
    let hit = paths.choose(rng).unwrap().clone();
    match rng.gen_range(0..10) {
        0 => p("/missing/nowhere.c"),
        1 if !hit.is_root() => {
            let segs: Vec<&str> = hit.segments().collect();
            let flipped = if hit.kind() == PathKind::File { PathKind::Directory } else { PathKind::File };
            CanonicalPath::from_segments(&segs, flipped).unwrap()
        }
        _ => hit,
    }
}

pub fn directories(tree: &TreeSnapshot) -> Vec<CanonicalPath> {
    tree.paths().into_iter().filter(|q| q.is_container()).collect()
}

/// Random valid tree edits against `tree`, applied to a scratch copy as
/// they are chosen. Contents come from `counter` so they never repeat.
pub fn random_tree_edits(rng: &mut Rng8, tree: &TreeSnapshot, count: usize, counter: &mut u64) -> Vec<TreeEdit> {
    let mut scratch = tree.clone();
    let mut edits = Vec::new();
    for _ in 0..count {
        *counter += 1;
        let k = *counter;
        let files: Vec<CanonicalPath> = scratch.files().into_keys().collect();
        let nodes: Vec<CanonicalPath> = scratch.paths().into_iter().filter(|q| !q.is_root()).collect();
        let dirs = directories(&scratch);
        let edit = match rng.gen_range(0..10) {
            0..=3 => {
                let parent = dirs.choose(rng).unwrap().clone();
                let parent = if rng.gen_bool(0.3) {
                    parent.join(&format!("d{k}"), PathKind::Directory).unwrap()
                } else {
                    parent
                };
                TreeEdit::CreateFile {
                    path: parent.join(&format!("f{k}.c"), PathKind::File).unwrap(),
                    digest: format!("c{k}"),
                }
            }
            4..=5 if !files.is_empty() => {
                TreeEdit::ModifyContent { path: files.choose(rng).unwrap().clone(), digest: format!("c{k}") }
            }
            6..=7 if !nodes.is_empty() => TreeEdit::Delete { path: nodes.choose(rng).unwrap().clone() },
            8..=9 if !nodes.is_empty() => {
                let from = nodes.choose(rng).unwrap().clone();
                let targets: Vec<CanonicalPath> = dirs.iter().filter(|d| !from.covers(d)).cloned().collect();
                let parent = targets.choose(rng).unwrap().clone();
                let to = if from.kind() == PathKind::File {
                    parent.join(&format!("f{k}.c"), PathKind::File).unwrap()
                } else {
                    parent.join(&format!("d{k}"), PathKind::Directory).unwrap()
                };
                TreeEdit::Rename { from, to }
            }
            _ => continue,
        };
        let ok = match &edit {
            TreeEdit::CreateFile { path, digest } => scratch.insert_file(path, digest.clone()),
            TreeEdit::ModifyContent { path, digest } => scratch.set_digest(path, digest.clone()),
            TreeEdit::Delete { path } => scratch.remove(path).map(|_| ()),
            TreeEdit::Rename { from, to } => scratch.rename(from, to),
        };
        if ok.is_ok() {
            edits.push(edit);
        }
    }
    edits
}

/// Random citation edits that are valid against `cf` and `tree`.
pub fn random_cite_edits(rng: &mut Rng8, cf: &CitationFile, tree: &TreeSnapshot, count: usize) -> Vec<CiteEdit> {
    let mut cf = cf.clone();
    let mut edits = Vec::new();
    for _ in 0..count {
        let uncited: Vec<CanonicalPath> = tree.paths().into_iter().filter(|q| !cf.contains(q)).collect();
        let cited: Vec<CanonicalPath> = cf.keys().cloned().collect();
        let removable: Vec<CanonicalPath> = cited.iter().filter(|k| !k.is_root()).cloned().collect();
        let edit = match rng.gen_range(0..3) {
            0 if !uncited.is_empty() => {
                CiteEdit::Add { path: uncited.choose(rng).unwrap().clone(), record: random_record(rng) }
            }
            1 if !removable.is_empty() => CiteEdit::Delete { path: removable.choose(rng).unwrap().clone() },
            _ => CiteEdit::Modify { path: cited.choose(rng).unwrap().clone(), record: random_record(rng) },
        };
        gitcite::ops::apply_edit(&mut cf, tree, &edit).unwrap();
        edits.push(edit);
    }
    edits
}

/// Answers conflicts from a pre-drawn list of choices, in order.
#[derive(Clone)]
pub struct Choices(pub Vec<Resolution>, pub usize);

impl Choices {
    pub fn random(rng: &mut Rng8, n: usize) -> Self {
        let list = (0..n)
            .map(|_| match rng.gen_range(0..5) {
                0 | 1 => Resolution::ChoseLeft,
                2 | 3 => Resolution::ChoseRight,
                _ => Resolution::Replaced(random_record(rng)),
            })
            .collect();
        Choices(list, 0)
    }
}

impl ConflictResolver for Choices {
    fn resolve(&mut self, _: &ConflictReport) -> Resolution {
        let r = self.0.get(self.1).cloned().unwrap_or(Resolution::Pending);
        self.1 += 1;
        r
    }
}

/// Keys both sides changed, relative to `base`, to different records.
pub fn expected_conflicts(
    base: &CitationFile,
    left: &CitationFile,
    right: &CitationFile,
    merged: &TreeSnapshot,
) -> BTreeSet<CanonicalPath> {
    left.entries()
        .filter_map(|(k, l)| {
            let r = right.get(k)?;
            let b = base.get(k);
            (l != r && b != Some(l) && b != Some(r) && merged.contains(k)).then(|| k.clone())
        })
        .collect()
}

/// Expected merged key set: the union of both sides restricted to the
/// merged tree, plus the root.
pub fn expected_keys(left: &CitationFile, right: &CitationFile, merged: &TreeSnapshot) -> BTreeSet<CanonicalPath> {
    let mut keys: BTreeSet<CanonicalPath> =
        left.keys().chain(right.keys()).filter(|k| merged.contains(k)).cloned().collect();
    keys.insert(CanonicalPath::root());
    keys
}

/// Two branches diverged from a random base: `main` and `right`, each with
/// one or two commits of random file and citation changes. Some keys are
/// changed on both sides to force conflicts.
pub fn diverged_repo(rng: &mut Rng8) -> Repository {
    let mut tree = random_tree(rng, 40);
    tree.prune_empty_dirs();
    let cf = random_cf(rng, &tree, 0.3);
    let mut repo = Repository::with_citations("P", "main", tree, cf).unwrap();
    let base = repo.head_id("main").unwrap().clone();
    repo.create_branch("right", &base).unwrap();
    let shared: Vec<CanonicalPath> =
        repo.head("main").unwrap().cf.keys().filter(|_| rng.gen_bool(0.4)).cloned().collect();
    let mut counter = 0;
    for branch in ["main", "right"] {
        for round in 0..rng.gen_range(1..=2) {
            let head = repo.head(branch).unwrap().clone();
            let n = rng.gen_range(0..5);
            let mut cites = random_cite_edits(rng, &head.cf, &head.tree, n);
            if round == 0 {
                for key in &shared {
                    if cites.iter().all(|e| e.path() != key) {
                        cites.push(CiteEdit::Modify { path: key.clone(), record: random_record(rng) });
                    }
                }
            }
            let n = rng.gen_range(0..4);
            let files = random_tree_edits(rng, &head.tree, n, &mut counter);
            repo.commit(branch, &files, &cites).unwrap();
        }
    }
    repo
}

// ---------------------------------------------------------------- traces

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    Open,
    Removing,
    Moved,
}

struct Gen {
    ops: Vec<TraceOp>,
    branches: Vec<String>,
    phase: BTreeMap<String, Phase>,
    pending: BTreeMap<String, TreeSnapshot>,
    counter: u64,
}

impl Gen {
    fn try_push(&mut self, op: TraceOp) -> Option<Repository> {
        self.ops.push(op);
        match trace::replay(&Trace { ops: self.ops.clone() }, "G") {
            Ok((repo, _)) => Some(repo),
            Err(_) => {
                self.ops.pop();
                None
            }
        }
    }
}

/// A random trace of at least `min_ops` operations that the store accepts
/// and that a git working tree can follow step by step.
///
/// Within one commit a branch first takes citation edits and writes, then
/// removals; a move stands alone. File moves go into existing directories,
/// every written content is unique, and a moved directory never holds two
/// identical files, so git's rename reports match the moves exactly.
pub fn random_trace(rng: &mut Rng8, min_ops: usize) -> Trace {
    let mut g = Gen {
        ops: Vec::new(),
        branches: vec!["main".into()],
        phase: BTreeMap::new(),
        pending: BTreeMap::new(),
        counter: 0,
    };
    let mut repo = g.try_push(TraceOp::Init { branch: "main".into(), root: random_record(rng) }).unwrap();
    let mut attempts = 0;
    while g.ops.len() < min_ops || g.ops.last().is_some_and(|op| !op.is_commit_point()) {
        attempts += 1;
        assert!(attempts < min_ops * 200, "trace generation stalled");
        g.counter += 1;
        let k = g.counter;
        let branch = g.branches.choose(rng).unwrap().clone();
        let phase = *g.phase.get(&branch).unwrap_or(&Phase::Open);
        let head = repo.head(&branch).unwrap().clone();
        let pending = g.pending.get(&branch).cloned();
        let clean = pending.is_none();
        let work = pending.clone().unwrap_or_else(|| head.tree.clone());
        let staged = repo.staged_citation_file(&branch).unwrap();
        let wants_commit = g.ops.len() >= min_ops;

        let roll = if wants_commit { 12 } else { rng.gen_range(0..14) };
        let (op, next_phase, next_tree): (TraceOp, Phase, Option<TreeSnapshot>) = match roll {
            0..=3 if phase == Phase::Open => {
                let files: Vec<CanonicalPath> = work.files().into_keys().collect();
                let path = if !files.is_empty() && rng.gen_bool(0.4) {
                    files.choose(rng).unwrap().clone()
                } else {
                    let mut parent = directories(&work).choose(rng).unwrap().clone();
                    if rng.gen_bool(0.3) {
                        parent = parent.join(&format!("d{k}"), PathKind::Directory).unwrap();
                    }
                    parent.join(&format!("f{k}.c"), PathKind::File).unwrap()
                };
                let content = format!("c{k}x{:08x}", rng.gen::<u32>());
                let mut t = work.clone();
                if t.contains(&path) {
                    t.set_digest(&path, content.clone()).unwrap();
                } else {
                    t.insert_file(&path, content.clone()).unwrap();
                }
                (TraceOp::Write { branch: branch.clone(), path, content }, Phase::Open, Some(t))
            }
            4..=5 if phase == Phase::Open => {
                let uncited: Vec<CanonicalPath> =
                    head.tree.paths().into_iter().filter(|q| !staged.contains(q)).collect();
                let Some(path) = uncited.choose(rng).cloned() else { continue };
                (TraceOp::Add { branch: branch.clone(), path, record: random_record(rng) }, Phase::Open, pending)
            }
            6 if phase == Phase::Open => {
                let keys: Vec<CanonicalPath> = staged.keys().cloned().collect();
                let path = keys.choose(rng).unwrap().clone();
                if !path.is_root() && rng.gen_bool(0.5) {
                    (TraceOp::Del { branch: branch.clone(), path }, Phase::Open, pending)
                } else {
                    (TraceOp::Modify { branch: branch.clone(), path, record: random_record(rng) }, Phase::Open, pending)
                }
            }
            7 if phase != Phase::Moved => {
                let nodes: Vec<CanonicalPath> = work.paths().into_iter().filter(|q| !q.is_root()).collect();
                let Some(path) = nodes.choose(rng).cloned() else { continue };
                let mut t = work.clone();
                t.remove(&path).unwrap();
                (TraceOp::Remove { branch: branch.clone(), path }, Phase::Removing, Some(t))
            }
            8 if clean && phase == Phase::Open => {
                let nodes: Vec<CanonicalPath> = head.tree.paths().into_iter().filter(|q| !q.is_root()).collect();
                let Some(from) = nodes.choose(rng).cloned() else { continue };
                let moved: Vec<String> =
                    head.tree.files().into_iter().filter(|(f, _)| from.covers(f)).map(|(_, d)| d).collect();
                if moved.iter().collect::<BTreeSet<_>>().len() != moved.len() {
                    continue;
                }
                let targets: Vec<CanonicalPath> =
                    directories(&head.tree).into_iter().filter(|d| !from.covers(d)).collect();
                let Some(parent) = targets.choose(rng).cloned() else { continue };
                let to = if from.kind() == PathKind::File {
                    parent.join(&format!("f{k}.c"), PathKind::File).unwrap()
                } else {
                    parent.join(&format!("d{k}"), PathKind::Directory).unwrap()
                };
                let mut t = work.clone();
                if t.rename(&from, &to).is_err() {
                    continue;
                }
                (TraceOp::Move { branch: branch.clone(), from, to }, Phase::Moved, Some(t))
            }
            9 if g.branches.len() < 4 => {
                let name = format!("b{k}");
                (TraceOp::Branch { name, from: branch.clone() }, phase, pending)
            }
            10 if clean && g.branches.len() > 1 => {
                let from = g
                    .branches
                    .iter()
                    .filter(|b| **b != branch)
                    .collect::<Vec<_>>()
                    .choose(rng)
                    .copied()
                    .unwrap()
                    .clone();
                let prefer = if rng.gen_bool(0.5) { Side::Ours } else { Side::Theirs };
                (TraceOp::Merge { into: branch.clone(), from, prefer }, Phase::Open, None)
            }
            11 if clean => {
                let src_branch = g.branches.choose(rng).unwrap().clone();
                let src_tree = repo.head(&src_branch).unwrap().tree.clone();
                let files = src_tree.files();
                let sources: Vec<CanonicalPath> = directories(&src_tree)
                    .into_iter()
                    .filter(|d| files.keys().any(|f| d.is_ancestor_of(f)))
                    .filter(|d| !d.is_root() || rng.gen_bool(0.2))
                    .collect();
                let Some(src_subtree) = sources.choose(rng).cloned() else { continue };
                let parent = directories(&head.tree).choose(rng).unwrap().clone();
                let dst = parent.join(&format!("d{k}"), PathKind::Directory).unwrap();
                (TraceOp::Copy { branch: branch.clone(), src_branch, src_subtree, dst }, Phase::Open, None)
            }
            12 | 13 => (TraceOp::Commit { branch: branch.clone() }, Phase::Open, None),
            _ => continue,
        };
        let new_branch = match &op {
            TraceOp::Branch { name, .. } => Some(name.clone()),
            _ => None,
        };
        let commit_point = op.is_commit_point();
        if let Some(r) = g.try_push(op) {
            repo = r;
            if let Some(name) = new_branch {
                g.branches.push(name);
                continue;
            }
            g.phase.insert(branch.clone(), if commit_point { Phase::Open } else { next_phase });
            match next_tree {
                Some(t) if !commit_point => {
                    g.pending.insert(branch, t);
                }
                _ if commit_point => {
                    g.pending.remove(&branch);
                }
                _ => {}
            }
        }
    }
    Trace { ops: g.ops }
}

// ---------------------------------------------------------------- cases
//
// Each case draws one random instance and checks it, returning a message
// on the first disagreement. The property tests and the acceptance runner
// share them.

fn msg(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// resolve against the walk oracle on a tree of at most 200 nodes.
pub fn resolve_case(rng: &mut Rng8) -> Result<(), String> {
    let tree = random_tree(rng, 200);
    let share = rng.gen_range(0.0..0.5);
    let cf = random_cf(rng, &tree, share);
    for _ in 0..4 {
        let q = random_query(rng, &tree);
        let got = gitcite::model::resolve(&cf, &tree, &q).ok();
        let want = walk_oracle(&cf, &tree, &q);
        if got != want {
            return Err(format!("resolve {q}: got {got:?}, oracle {want:?}"));
        }
    }
    Ok(())
}

/// copy_cite of a random subtree between two random repositories; every
/// copied node must resolve at the destination as it did at the source,
/// and nodes outside the copy must keep their resolution.
pub fn copy_case(rng: &mut Rng8) -> Result<usize, String> {
    let mut st = random_tree(rng, 60);
    st.prune_empty_dirs();
    let scf = random_cf(rng, &st, 0.3);
    let src = Repository::with_citations("S", "main", st.clone(), scf.clone()).map_err(msg)?;
    let mut dt = random_tree(rng, 40);
    dt.prune_empty_dirs();
    let dcf = random_cf(rng, &dt, 0.3);
    let mut dst = Repository::with_citations("D", "main", dt.clone(), dcf.clone()).map_err(msg)?;

    let sub = directories(&st).choose(rng).unwrap().clone();
    let parent = directories(&dt).choose(rng).unwrap().clone();
    let at = parent.join("copied", PathKind::Directory).unwrap();
    let head = src.head_id("main").unwrap().clone();
    let out = gitcite::store::copy_cite(&src, &head, &sub, &mut dst, "main", &at).map_err(msg)?;
    let v = &out.version;

    let mut checked = 0;
    for node in st.paths().into_iter().filter(|n| sub.covers(n)) {
        let moved = node.rebase(&sub, &at).unwrap();
        let before = walk_oracle(&scf, &st, &node);
        let after = walk_oracle(&v.cf, &v.tree, &moved);
        if before.is_none() || before != after {
            return Err(format!("{node} -> {moved}: {before:?} became {after:?}"));
        }
        checked += 1;
    }
    for node in dt.paths() {
        if walk_oracle(&dcf, &dt, &node) != walk_oracle(&v.cf, &v.tree, &node) {
            return Err(format!("{node} outside the copy changed its citation"));
        }
    }
    Ok(checked)
}

/// merge_cite on two diverged branches: key set, conflict set, and the
/// adapter's merge function producing the same bytes for the same choices.
pub fn merge_case(rng: &mut Rng8) -> Result<usize, String> {
    let mut repo = diverged_repo(rng);
    let left = repo.head("main").unwrap().cf.clone();
    let right = repo.head("right").unwrap().cf.clone();
    let (l, r) = (repo.head_id("main").unwrap().clone(), repo.head_id("right").unwrap().clone());
    let base_id = repo.merge_base(&l, &r).map_err(msg)?.ok_or("no merge base")?;
    let base = repo.version(&base_id).unwrap().cf.clone();
    let choices = Choices::random(rng, 256);

    let out = repo.merge_cite("main", "right", &mut choices.clone()).map_err(msg)?;
    let merged = &out.version.tree;
    let keys: BTreeSet<CanonicalPath> = out.version.cf.keys().cloned().collect();
    if keys != expected_keys(&left, &right, merged) {
        return Err(format!("merged keys {keys:?} differ from the union {:?}", expected_keys(&left, &right, merged)));
    }
    let reported: BTreeSet<CanonicalPath> = out.conflicts.iter().map(|c| c.key.clone()).collect();
    let expected = expected_conflicts(&base, &left, &right, merged);
    if reported != expected {
        return Err(format!("conflicts {reported:?}, expected {expected:?}"));
    }

    let (cf, conflicts, pruned) =
        gitcite::git::merge_citation_files(Some(&base), &left, &right, merged, &mut choices.clone()).map_err(msg)?;
    let (a, b) = (gitcite::document::serialize(&cf), gitcite::document::serialize(&out.version.cf));
    if a != b {
        return Err(format!("adapter merge differs:\n{a}\nstore:\n{b}"));
    }
    if conflicts != out.conflicts || pruned != out.pruned {
        return Err("adapter and store report different conflicts or pruned keys".into());
    }
    Ok(reported.len())
}

/// parse and serialize are inverse, and equal files serialize equally.
pub fn format_case(rng: &mut Rng8) -> Result<(), String> {
    use gitcite::document::{is_canonical, parse, serialize};
    let tree = random_tree(rng, 80);
    let cf = random_cf(rng, &tree, 0.4);
    let text = serialize(&cf);
    let back = parse(&text).map_err(msg)?;
    if back != cf {
        return Err("parse(serialize(cf)) != cf".into());
    }
    if serialize(&back) != text || !is_canonical(&text) {
        return Err("serialize(parse(text)) != text".into());
    }
    let mut entries: Vec<(CanonicalPath, CitationRecord)> = cf.entries().map(|(k, v)| (k.clone(), v.clone())).collect();
    entries.shuffle(rng);
    let mut rebuilt = CitationFile::new(cf.root_record().unwrap().clone());
    for (k, v) in entries {
        rebuilt.set(k, v);
    }
    if serialize(&rebuilt) != text {
        return Err("equal citation files serialized differently".into());
    }
    Ok(())
}

/// A random sequence of at least `min_ops` operations over up to four
/// repositories, mixing every operator. After each step every branch head
/// validates clean and no recorded version has changed.
pub fn fuzz_case(rng: &mut Rng8, min_ops: usize) -> Result<(), String> {
    use gitcite::model::validate;
    use gitcite::ops::{self, RoleContext};
    use gitcite::store::{Revision, Version, VersionId};

    let mut tree = random_tree(rng, 30);
    tree.prune_empty_dirs();
    let cf = random_cf(rng, &tree, 0.3);
    let mut repos = vec![Repository::with_citations("P0", "main", tree, cf).map_err(msg)?];
    let member = RoleContext::member("m");
    let citer = RoleContext::citer("c");
    let mut seen: BTreeMap<(usize, VersionId), Version> = BTreeMap::new();
    let mut counter = 0u64;

    for step in 0..min_ops {
        counter += 1;
        let ri = rng.gen_range(0..repos.len());
        let branches: Vec<String> = repos[ri].branches().map(|(b, _)| b.to_owned()).collect();
        let branch = branches.choose(rng).unwrap().clone();
        let head = repos[ri].head(&branch).unwrap().clone();
        let versions: Vec<VersionId> = repos[ri].versions().map(|v| v.id.clone()).collect();
        let what = rng.gen_range(0..10);
        let fail = |e: String| format!("step {step} (op {what}) on {branch}: {e}");
        match what {
            0 | 1 => {
                let staged = repos[ri].staged_citation_file(&branch).map_err(msg).map_err(fail)?;
                let edit = random_cite_edits(rng, &staged, &head.tree, 1).pop().unwrap();
                let shared = repos[ri].branches().filter(|(_, id)| **id == head.id).count() > 1;
                let at = if shared || rng.gen_bool(0.5) {
                    Revision::branch(&branch)
                } else {
                    Revision::Version(head.id.clone())
                };
                let repo = &mut repos[ri];
                let r = match edit {
                    CiteEdit::Add { path, record } => ops::add_cite(repo, &member, &at, &path, record),
                    CiteEdit::Delete { path } => ops::del_cite(repo, &member, &at, &path),
                    CiteEdit::Modify { path, record } => ops::modify_cite(repo, &member, &at, &path, record),
                };
                let staged = r.map_err(msg).map_err(fail)?;
                if !staged.contains(&CanonicalPath::root()) || !validate(&staged, &head.tree).is_empty() {
                    return Err(fail("staged edit broke the citation file".into()));
                }
            }
            2 => {
                let before = repos[ri].staged(&branch).to_vec();
                let path = random_query(rng, &head.tree);
                let at = Revision::branch(&branch);
                let repo = &mut repos[ri];
                let results = [
                    ops::add_cite(repo, &citer, &at, &path, random_record(rng)),
                    ops::del_cite(repo, &citer, &at, &path),
                    ops::modify_cite(repo, &citer, &at, &path, random_record(rng)),
                ];
                if results.iter().any(|r| !matches!(r, Err(gitcite::Error::RoleForbidden { .. }))) {
                    return Err(fail("a citer was allowed to edit".into()));
                }
                if repos[ri].staged(&branch) != before {
                    return Err(fail("a rejected edit was staged".into()));
                }
            }
            3 | 4 => {
                let staged = repos[ri].staged_citation_file(&branch).map_err(msg).map_err(fail)?;
                let n = rng.gen_range(0..3);
                let cites = random_cite_edits(rng, &staged, &head.tree, n);
                let n = rng.gen_range(0..4);
                let files = random_tree_edits(rng, &head.tree, n, &mut counter);
                repos[ri].commit(&branch, &files, &cites).map_err(msg).map_err(fail)?;
            }
            5 => {
                let from = versions.choose(rng).unwrap();
                repos[ri].create_branch(&format!("b{counter}"), from).map_err(msg).map_err(fail)?;
            }
            6 => {
                let Some(other) = branches.iter().filter(|b| **b != branch).choose(rng).cloned() else { continue };
                let mut choices = Choices::random(rng, 256);
                repos[ri].merge_cite(&branch, &other, &mut choices).map_err(msg).map_err(fail)?;
            }
            7 => {
                let si = rng.gen_range(0..repos.len());
                let src = repos[si].clone();
                let sv: Vec<_> = src.versions().cloned().collect();
                let sv = sv.choose(rng).unwrap();
                let sub = directories(&sv.tree).choose(rng).unwrap().clone();
                let parent = directories(&head.tree).choose(rng).unwrap().clone();
                let at = parent.join(&format!("copy{counter}"), PathKind::Directory).unwrap();
                gitcite::store::copy_cite(&src, &sv.id, &sub, &mut repos[ri], &branch, &at)
                    .map_err(msg)
                    .map_err(fail)?;
            }
            8 if repos.len() < 4 => {
                let v = versions.choose(rng).unwrap();
                let fork = repos[ri].fork(Some(v), format!("P{}", repos.len())).map_err(msg).map_err(fail)?;
                if fork.head(fork.default_branch()).unwrap().cf != repos[ri].version(v).unwrap().cf {
                    return Err(fail("fork changed the citation file".into()));
                }
                repos.push(fork);
            }
            _ => {
                let v = repos[ri].version(versions.choose(rng).unwrap()).unwrap().clone();
                let q = random_query(rng, &v.tree);
                let got = ops::gen_cite(&repos[ri], &v.id, &q).ok();
                if got.as_ref() != walk_oracle(&v.cf, &v.tree, &q) {
                    return Err(fail(format!("gen_cite {q} disagrees with the oracle")));
                }
            }
        }

        for (i, repo) in repos.iter().enumerate() {
            for (b, _) in repo.branches() {
                let h = repo.head(b).unwrap();
                let problems = validate(&h.cf, &h.tree);
                if !problems.is_empty() {
                    return Err(format!("step {step}: P{i} {b} inconsistent: {problems:?}"));
                }
                let staged = repo.staged_citation_file(b).map_err(msg)?;
                if !validate(&staged, &h.tree).is_empty() {
                    return Err(format!("step {step}: P{i} {b} staged edits inconsistent"));
                }
            }
        }
        for ((i, id), snapshot) in &seen {
            if repos[*i].version(id).map(|v| **v != *snapshot).unwrap_or(true) {
                return Err(format!("step {step}: version {id} of P{i} changed"));
            }
        }
        for (i, repo) in repos.iter().enumerate() {
            for v in repo.versions() {
                seen.entry((i, v.id.clone())).or_insert_with(|| (**v).clone());
            }
        }
    }
    Ok(())
}
