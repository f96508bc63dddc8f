//! The `fsalg` verbs.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fsalg_core::algebra::{classify_pair, Classifier, PairClass};
use fsalg_core::detect::{detect, detect_ordered};
use fsalg_core::oracle::{verify_rules_with, FsSpace};
use fsalg_core::reconcile::reconcile;
use fsalg_core::Command;

use crate::apply::{apply_script, ApplyOptions};
use crate::error::{exit, CliError};
use crate::formats::{conflicts_to_text, load_script, script_to_text, Snapshot};
use crate::scan::scan;

#[derive(Debug, Parser)]
#[command(
    name = "fsalg",
    version,
    about = "Snapshot, diff, reconcile and apply directory trees"
)]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Record the state of a directory tree.
    Snapshot {
        dir: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Write the commands that turn one snapshot into another.
    Diff {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        current: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Compute what each replica should take from the other.
    Reconcile {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Script to apply to replica A.
        #[arg(long)]
        out_a: PathBuf,
        /// Script to apply to replica B.
        #[arg(long)]
        out_b: PathBuf,
        #[arg(long)]
        conflicts: PathBuf,
    },
    /// Carry out a script on a directory.
    Apply {
        script: PathBuf,
        dir: PathBuf,
        /// Where to read written file contents from.
        #[arg(long)]
        blobs: Option<PathBuf>,
        /// Only check that the script applies.
        #[arg(long)]
        dry_run: bool,
    },
    /// Check the command-pair rules by brute force over a small space.
    VerifyRules(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Length of the chain of nested nodes.
    #[arg(long, default_value_t = 3)]
    pub chain: usize,
    /// Additional top-level nodes.
    #[arg(long, default_value_t = 1)]
    pub roots: usize,
    /// Number of distinct file contents.
    #[arg(long, default_value_t = 2)]
    pub file_values: usize,
    /// Total node count: up to three nested, the rest top-level.
    #[arg(long, conflicts_with_all = ["chain", "roots"])]
    pub nodes: Option<usize>,
    /// Check a deliberately wrong classification; must fail.
    #[arg(long, hide = true)]
    pub negative_control: bool,
}

impl VerifyArgs {
    pub fn space(&self) -> FsSpace {
        let (chain, roots) = match self.nodes {
            Some(n) => (n.min(3), n.saturating_sub(3)),
            None => (self.chain, self.roots),
        };
        FsSpace::shaped(chain, roots, self.file_values)
    }
}

/// Classification that calls every breaking pair commuting.
pub fn lenient_classifier(first: &Command, second: &Command) -> PairClass {
    match classify_pair(first, second) {
        PairClass::BreaksAlways => PairClass::CommuteIncomparable,
        other => other,
    }
}

fn write_file(path: &Path, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    if path == Path::new("-") {
        return out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e));
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Runs one verb; returns the exit status on success.
pub fn execute(verb: Verb, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, CliError> {
    match verb {
        Verb::Snapshot { dir, output } => {
            let scanned = scan(&dir)?;
            for w in &scanned.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            write_file(&output, &scanned.snapshot.to_text(), out)?;
            Ok(exit::OK)
        }
        Verb::Diff {
            base,
            current,
            output,
        } => {
            let (base, current) = (Snapshot::load(&base)?, Snapshot::load(&current)?);
            let script = detect_ordered(base.filesystem(), current.filesystem())
                .expect("snapshots are working filesystems");
            write_file(&output, &script_to_text(&script), out)?;
            Ok(exit::OK)
        }
        Verb::Reconcile {
            base,
            a,
            b,
            out_a,
            out_b,
            conflicts,
        } => {
            let base = Snapshot::load(&base)?;
            let (snap_a, snap_b) = (Snapshot::load(&a)?, Snapshot::load(&b)?);
            let updates_a =
                detect(base.filesystem(), snap_a.filesystem()).expect("working snapshot");
            let updates_b =
                detect(base.filesystem(), snap_b.filesystem()).expect("working snapshot");
            let plan = reconcile(&updates_a.commands, &updates_b.commands)
                .expect("detected updates are simple and orderable");
            write_file(&out_a, &script_to_text(&plan.to_a), out)?;
            write_file(&out_b, &script_to_text(&plan.to_b), out)?;
            write_file(&conflicts, &conflicts_to_text(&plan.conflicts), out)?;
            let _ = writeln!(
                err,
                "{} commands for A, {} for B, {} conflicting pairs",
                plan.to_a.len(),
                plan.to_b.len(),
                plan.conflicts.len()
            );
            Ok(if plan.conflicts.is_empty() {
                exit::OK
            } else {
                exit::CONFLICTS
            })
        }
        Verb::Apply {
            script,
            dir,
            blobs,
            dry_run,
        } => {
            let commands = load_script(&script)?;
            let report = apply_script(&commands, &dir, &ApplyOptions { blobs, dry_run })?;
            if report.dry_run {
                let _ = writeln!(err, "dry run: {} commands would apply", commands.len());
            } else {
                let _ = writeln!(err, "applied {} commands", report.applied);
            }
            Ok(exit::OK)
        }
        Verb::VerifyRules(args) => {
            let classifier: Classifier = if args.negative_control {
                lenient_classifier
            } else {
                classify_pair
            };
            let report = verify_rules_with(&args.space(), classifier);
            let _ = write!(out, "{report}");
            Ok(if report.is_clean() {
                exit::OK
            } else {
                exit::CONFLICTS
            })
        }
    }
}

/// Parses `args` (program name first) and runs the verb.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match execute(cli.verb, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
