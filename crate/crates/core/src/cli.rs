//! The `gitcite` command line.
//!
//! Exit codes: 0 success, 1 a citation-level error (including conflicts
//! and failed validation), 2 bad usage, 3 an environment or I/O failure.

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::conflict::{ConflictReport, ConflictResolver, Decline, KeepLeft, KeepRight, Resolution};
use crate::document;
use crate::error::{Error, Result};
use crate::git::{self, CopySource, GitWorktree, MergeOptions};
use crate::model::{self, CanonicalPath, CitationRecord, KindHint};
use crate::ops::{CiteEdit, RoleContext};

#[derive(Debug, Parser)]
#[command(name = "gitcite", version, about = "Manage software citations stored in a git repository")]
pub struct Cli {
    /// Run as if started in DIR.
    #[arg(short = 'C', global = true, value_name = "DIR")]
    pub dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create the citation file with a draft root citation.
    Init {
        #[arg(long)]
        owner: Option<String>,
        #[arg(long)]
        repo_name: Option<String>,
        #[arg(long, value_name = "URL")]
        url: Option<String>,
    },
    /// Cite a file or directory. Unset fields are taken from the citation
    /// it currently inherits.
    Add(EditArgs),
    /// Remove the citation of a file or directory.
    Del { path: String },
    /// Change fields of an existing citation.
    Modify(EditArgs),
    /// Print the citation of a file or directory.
    Gen {
        #[arg(default_value = ".")]
        path: String,
        /// Resolve against a committed revision instead of the working tree.
        #[arg(long, value_name = "REV", conflicts_with = "remote")]
        version: Option<String>,
        /// Resolve against a citation file published at URL.
        #[arg(long, value_name = "URL")]
        remote: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Copy a directory from another repository, keeping its citations.
    Copy {
        /// Local repository path, git URL, or a revision of this repository.
        src: String,
        /// Directory inside the source, relative to its root.
        src_subtree: String,
        /// Destination directory; must not exist yet.
        dst: String,
        /// Revision of a git URL source (default: its HEAD).
        #[arg(long, value_name = "REV")]
        rev: Option<String>,
    },
    /// Merge another branch, merging citation files entry by entry.
    Merge {
        other: String,
        /// Keep the current branch's record for every conflict.
        #[arg(long, group = "side")]
        ours: bool,
        /// Take the other branch's record for every conflict.
        #[arg(long, group = "side")]
        theirs: bool,
        /// Ask for each conflict.
        #[arg(long, group = "side")]
        interactive: bool,
        /// Read interactive answers from FILE instead of stdin.
        #[arg(long, value_name = "FILE", requires = "interactive")]
        answers: Option<PathBuf>,
        /// Leave the merge staged instead of committing it.
        #[arg(long)]
        no_commit: bool,
    },
    /// Check the citation file against the working tree.
    Validate,
    /// Sync the citation file with staged renames and deletions, then commit.
    Commit {
        #[arg(short, long)]
        message: String,
        #[arg(long)]
        allow_empty: bool,
    },
    /// Sync the citation file with staged renames and deletions.
    Sync,
}

#[derive(Debug, Args)]
pub struct EditArgs {
    pub path: String,
    /// A field assignment; unknown names become extra fields.
    #[arg(long = "field", value_name = "KEY=VALUE", value_parser = parse_field)]
    pub fields: Vec<(String, String)>,
    /// Comma-separated author list.
    #[arg(long)]
    pub authors: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Bibtex,
}

fn parse_field(s: &str) -> std::result::Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_owned(), v.to_owned())),
        _ => Err(format!("expected KEY=VALUE, got {s:?}")),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_environmental() {
        3
    } else {
        1
    }
}

/// Renders a record in `format`. JSON is the canonical record text.
pub fn render(record: &CitationRecord, format: Format) -> String {
    match format {
        Format::Json => document::serialize_record(record),
        Format::Text => render_text(record),
        Format::Bibtex => render_bibtex(record),
    }
}

fn year(date: &str) -> Option<&str> {
    let y = date.get(..4)?;
    y.bytes().all(|b| b.is_ascii_digit()).then_some(y)
}

fn authors_with_owner(record: &CitationRecord) -> Vec<&str> {
    let mut out: Vec<&str> = vec![record.owner.as_str()];
    for a in &record.author_list {
        if !out.contains(&a.as_str()) {
            out.push(a);
        }
    }
    out
}

fn render_text(r: &CitationRecord) -> String {
    let mut s = String::new();
    let authors = if r.author_list.is_empty() { r.owner.clone() } else { r.author_list.join(", ") };
    s.push_str(&authors);
    if let Some(y) = year(&r.date) {
        s.push_str(&format!(" ({y})"));
    }
    s.push_str(&format!(". {}/{}", r.owner, r.repo_name));
    if !r.version_id.is_empty() {
        s.push_str(&format!(", version {}", r.version_id));
    }
    s.push_str(&format!(". {}\n", r.locator));
    for (k, v) in &r.extras {
        s.push_str(&format!("{k}: {v}\n"));
    }
    s
}

fn bibtex_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '{' | '}' | '&' | '%' | '$' | '#' | '_' => {
                out.push('\\');
                out.push(c);
            }
            _ => out.push(c),
        }
    }
    out
}

fn render_bibtex(r: &CitationRecord) -> String {
    let key_part = |s: &str| s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>();
    let mut key = format!("{}_{}", key_part(&r.owner), key_part(&r.repo_name));
    if let Some(y) = year(&r.date) {
        key.push('_');
        key.push_str(y);
    }
    let author = authors_with_owner(r).into_iter().map(bibtex_escape).collect::<Vec<_>>().join(" and ");
    let mut fields = vec![("author", author), ("title", bibtex_escape(&r.repo_name)), ("url", r.locator.clone())];
    if !r.version_id.is_empty() {
        fields.push(("version", bibtex_escape(&r.version_id)));
    }
    if let Some(y) = year(&r.date) {
        fields.push(("year", y.to_owned()));
    }
    let mut s = format!("@software{{{key},\n");
    for (name, value) in fields {
        s.push_str(&format!("  {name} = {{{value}}},\n"));
    }
    s.push_str("}\n");
    s
}

/// Asks about each conflict on `output`, reading one answer per line:
/// `l` keeps ours, `r` takes theirs, `e` reads a replacement record as one
/// line of JSON, `a` (or end of input) aborts the merge.
pub struct Prompter<'a> {
    input: &'a mut dyn BufRead,
    output: &'a mut dyn Write,
}

impl<'a> Prompter<'a> {
    pub fn new(input: &'a mut dyn BufRead, output: &'a mut dyn Write) -> Self {
        Prompter { input, output }
    }

    fn line(&mut self) -> Option<String> {
        let mut buf = String::new();
        match self.input.read_line(&mut buf) {
            Ok(0) | Err(_) => None,
            Ok(_) => Some(buf.trim_end_matches(['\n', '\r']).to_owned()),
        }
    }
}

fn side_by_side(left: &str, right: &str) -> String {
    let l: Vec<&str> = left.lines().collect();
    let r: Vec<&str> = right.lines().collect();
    let width = l.iter().map(|s| s.chars().count()).max().unwrap_or(0).max(4);
    let mut out = String::new();
    for i in 0..l.len().max(r.len()) {
        let a = l.get(i).copied().unwrap_or("");
        let b = r.get(i).copied().unwrap_or("");
        let marker = if a == b { ' ' } else { '|' };
        out.push_str(&format!("{a:<width$} {marker} {b}\n"));
    }
    out
}

impl ConflictResolver for Prompter<'_> {
    fn resolve(&mut self, report: &ConflictReport) -> Resolution {
        let left = format!("ours\n{}", document::serialize_record(&report.left));
        let right = format!("theirs\n{}", document::serialize_record(&report.right));
        let _ = write!(self.output, "conflict at {}\n{}", report.key, side_by_side(&left, &right));
        loop {
            let _ = write!(self.output, "keep [l]eft, take [r]ight, [e]dit, [a]bort? ");
            let _ = self.output.flush();
            let Some(answer) = self.line() else {
                let _ = writeln!(self.output);
                return Resolution::Pending;
            };
            match answer.trim() {
                "l" | "left" => return Resolution::ChoseLeft,
                "r" | "right" => return Resolution::ChoseRight,
                "a" | "abort" => return Resolution::Pending,
                "e" | "edit" => {
                    let _ = write!(self.output, "record (one line of JSON): ");
                    let _ = self.output.flush();
                    let Some(text) = self.line() else { return Resolution::Pending };
                    match document::parse_record(&text) {
                        Ok(record) => return Resolution::Replaced(record),
                        Err(e) => {
                            let _ = writeln!(self.output, "invalid record: {e}");
                        }
                    }
                }
                other => {
                    let _ = writeln!(self.output, "unrecognized answer {other:?}");
                }
            }
        }
    }
}

struct Io<'a> {
    cwd: PathBuf,
    stdin: &'a mut dyn BufRead,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

/// Parses `args` (program name first) and runs the command. Returns the
/// exit code.
pub fn run<I, T>(args: I, cwd: &Path, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let cwd = match &cli.dir {
        Some(d) => cwd.join(d),
        None => cwd.to_path_buf(),
    };
    let mut io = Io { cwd, stdin, out: stdout, err: stderr };
    match execute(cli.command, &mut io) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io.err, "gitcite: {e}");
            exit_code(&e)
        }
    }
}

fn open(io: &mut Io) -> Result<GitWorktree> {
    let wt = GitWorktree::discover(&io.cwd)?;
    if wt.has_citation_file() && !wt.citation_file_is_canonical().unwrap_or(true) {
        let _ = writeln!(
            io.err,
            "warning: {} was edited by hand; gitcite rewrites it in canonical form on its next change",
            wt.file_name()
        );
    }
    Ok(wt)
}

fn print_entry(io: &mut Io, path: &CanonicalPath, record: &CitationRecord) {
    let _ = writeln!(io.out, "{path}");
    let _ = io.out.write_all(document::serialize_record(record).as_bytes());
}

fn warn_dropped(io: &mut Io, dropped: &[CanonicalPath]) {
    for key in dropped {
        let _ = writeln!(
            io.err,
            "warning: dropped the citation of {key}: the path is gone (if it was renamed, git did not report it as a rename)"
        );
    }
}

fn overlay(mut record: CitationRecord, args: &EditArgs) -> Result<CitationRecord> {
    for (k, v) in &args.fields {
        record.set_field(k, v)?;
    }
    if let Some(a) = &args.authors {
        record.author_list = model::split_authors(a);
    }
    Ok(record)
}

fn actor(wt: &GitWorktree) -> String {
    wt.git(["config", "user.name"]).map(|s| s.trim().to_owned()).unwrap_or_default()
}

fn execute(command: Command, io: &mut Io) -> Result<i32> {
    match command {
        Command::Init { owner, repo_name, url } => {
            let wt = GitWorktree::discover(&io.cwd)?;
            let mut meta = wt.metadata()?;
            if let Some(o) = owner {
                meta.owner = o;
            }
            if let Some(r) = repo_name {
                meta.repo_name = r;
            }
            if let Some(u) = url {
                meta.locator = u;
            }
            let cf = wt.init_citation_file(&meta)?;
            let _ = writeln!(io.out, "created {} with a draft root citation:", wt.file_name());
            print_entry(io, &CanonicalPath::root(), cf.root_record().expect("root entry"));
            let _ = writeln!(io.out, "edit it with `gitcite modify / --field KEY=VALUE`");
            Ok(0)
        }
        Command::Add(args) => {
            let wt = open(io)?;
            let ctx = RoleContext::member(actor(&wt));
            let tree = wt.working_tree()?;
            let path = wt.canonicalize_user_path(&args.path, &io.cwd, Some(&tree))?;
            let cf = wt.load()?;
            let inherited = model::resolve(&cf, &tree, &path)?.clone();
            let record = overlay(inherited, &args)?;
            let cf = wt.edit(&ctx, &CiteEdit::Add { path: path.clone(), record })?;
            print_entry(io, &path, cf.get(&path).expect("just added"));
            Ok(0)
        }
        Command::Del { path } => {
            let wt = open(io)?;
            let ctx = RoleContext::member(actor(&wt));
            let tree = wt.working_tree()?;
            let path = wt.canonicalize_user_path(&path, &io.cwd, Some(&tree))?;
            let cf = wt.edit(&ctx, &CiteEdit::Delete { path: path.clone() })?;
            let (governing, record) = cf.closest_entry(&path).expect("root is cited");
            let _ = writeln!(io.out, "removed the citation of {path}; it now inherits from {governing}");
            let governing = governing.clone();
            print_entry(io, &governing, &record.clone());
            Ok(0)
        }
        Command::Modify(args) => {
            let wt = open(io)?;
            let ctx = RoleContext::member(actor(&wt));
            let tree = wt.working_tree()?;
            let path = wt.canonicalize_user_path(&args.path, &io.cwd, Some(&tree))?;
            let cf = wt.load()?;
            let current = cf.get(&path).cloned().ok_or_else(|| Error::NotCited(path.clone()))?;
            let record = overlay(current, &args)?;
            let cf = wt.edit(&ctx, &CiteEdit::Modify { path: path.clone(), record })?;
            print_entry(io, &path, cf.get(&path).expect("still cited"));
            let regenerable: Vec<&str> =
                args.fields.iter().map(|(k, _)| k.as_str()).filter(|k| matches!(*k, "version_id" | "date")).collect();
            if !regenerable.is_empty() {
                let _ = writeln!(
                    io.err,
                    "note: {} normally come from repository metadata and were set by hand",
                    regenerable.join(" and ")
                );
            }
            Ok(0)
        }
        Command::Gen { path, version, remote, format } => {
            let record = match remote {
                Some(url) => {
                    let cf = git::fetch_remote_citation_file(&url)?;
                    let hint = if path.ends_with('/') || path == "." { KindHint::Directory } else { KindHint::File };
                    let path = model::canonicalize(&path, hint, None)?;
                    cf.closest_entry(&path).map(|(_, r)| r.clone()).ok_or(Error::MissingRoot)?
                }
                None => {
                    let wt = open(io)?;
                    let tree = match &version {
                        Some(rev) => wt.tree_at(rev)?,
                        None => wt.working_tree()?,
                    };
                    let path = wt.canonicalize_user_path(&path, &io.cwd, Some(&tree))?;
                    wt.gen(&path, version.as_deref())?
                }
            };
            let _ = io.out.write_all(render(&record, format).as_bytes());
            Ok(0)
        }
        Command::Copy { src, src_subtree, dst, rev } => {
            let wt = open(io)?;
            let local = io.cwd.join(&src);
            let source = if local.is_dir() {
                CopySource::Local(local)
            } else if src.contains("://") || src.contains('@') {
                CopySource::Remote { url: src, rev }
            } else {
                CopySource::Revision(src)
            };
            let src_subtree =
                model::canonicalize(&format!("{}/", src_subtree.trim_end_matches('/')), KindHint::Directory, None)?;
            let dst = wt.canonicalize_user_path(&format!("{}/", dst.trim_end_matches('/')), &io.cwd, None)?;
            let summary = wt.copy_from(&source, &src_subtree, &dst)?;
            let _ = writeln!(io.out, "copied {} files into {dst}", summary.files);
            for key in &summary.added {
                let _ = writeln!(io.out, "cited {key}");
            }
            Ok(0)
        }
        Command::Merge { other, ours, theirs, interactive, answers, no_commit } => {
            let wt = open(io)?;
            let opts = MergeOptions { commit: !no_commit, ..Default::default() };
            let report = if ours {
                wt.merge(&other, &mut KeepLeft, opts)
            } else if theirs {
                wt.merge(&other, &mut KeepRight, opts)
            } else if interactive {
                match answers {
                    Some(file) => {
                        let f = std::fs::File::open(io.cwd.join(file))?;
                        let mut reader = std::io::BufReader::new(f);
                        wt.merge(&other, &mut Prompter::new(&mut reader, io.out), opts)
                    }
                    None => wt.merge(&other, &mut Prompter::new(io.stdin, io.out), opts),
                }
            } else {
                wt.merge(&other, &mut Decline, opts)
            };
            let report = match report {
                Err(Error::UnresolvedConflict(key)) if !interactive => {
                    let _ = writeln!(
                        io.err,
                        "gitcite: conflicting citations at {key}; rerun with --ours, --theirs or --interactive"
                    );
                    return Ok(1);
                }
                other => other?,
            };
            if report.up_to_date {
                let _ = writeln!(io.out, "already up to date");
                return Ok(0);
            }
            for key in &report.pruned {
                let _ = writeln!(io.out, "pruned {key}: not in the merged tree");
            }
            for c in &report.conflicts {
                let side = match c.resolution {
                    Resolution::ChoseLeft => "ours",
                    Resolution::ChoseRight => "theirs",
                    _ => "edited",
                };
                let _ = writeln!(io.out, "resolved {} ({side})", c.key);
            }
            let state = if report.committed { "merged" } else { "merge staged; commit to finish" };
            let _ = writeln!(io.out, "{state}: {} citation entries", report.cf.len());
            Ok(0)
        }
        Command::Validate => {
            let wt = open(io)?;
            let problems = wt.validate()?;
            for p in &problems {
                let _ = writeln!(io.out, "{p}");
            }
            if problems.is_empty() {
                let _ = writeln!(io.out, "ok");
                Ok(0)
            } else {
                Ok(1)
            }
        }
        Command::Commit { message, allow_empty } => {
            let wt = open(io)?;
            let report = wt.commit(&message, allow_empty)?;
            for (from, to) in &report.rekeyed {
                let _ = writeln!(io.out, "moved citation {from} -> {to}");
            }
            warn_dropped(io, &report.dropped);
            Ok(0)
        }
        Command::Sync => {
            let wt = open(io)?;
            let report = wt.sync()?;
            for (from, to) in &report.rekeyed {
                let _ = writeln!(io.out, "moved citation {from} -> {to}");
            }
            warn_dropped(io, &report.dropped);
            Ok(0)
        }
    }
}
