//! End-to-end acceptance checks. Prints one `PASS`/`FAIL` line per
//! criterion and exits nonzero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command as Process, ExitCode};
use std::time::{Duration, Instant};

use common::{mutate, random_forest, random_fs};
use fsalg_core::detect::{detect, detect_ordered};
use fsalg_core::model::{Command, CommandSequence, Filesystem, NodePath, TypeTag, Value};
use fsalg_core::oracle::FsSpace;
use fsalg_core::ordering::enumerate_orders;
use fsalg_core::reconcile::{
    dirty_marks, maximality_witness, reconcile, state_based_conflicts, MaximalityVerdict,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("rule-suite", rule_suite),
        ("ordering-equivalence", ordering_equivalence),
        ("round-trip", round_trip),
        ("reconcile-correctness", reconcile_correctness),
        ("reconcile-maximality", reconcile_maximality),
        ("delete-delete-fixture", delete_delete_fixture),
        ("conflict-containment", conflict_containment),
        ("cli-end-to-end", cli_end_to_end),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let verdict = check();
        let took = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS {name} ({took:.2}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({took:.2}s): {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn fsalg(args: &[&str]) -> std::process::Output {
    Process::new(env!("CARGO_BIN_EXE_fsalg"))
        .args(args)
        .output()
        .expect("run fsalg")
}

/// The verifier on the default space covers every rule with no failure.
fn rule_suite() -> Verdict {
    let start = Instant::now();
    let out = fsalg(&["verify-rules"]);
    let took = start.elapsed();
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    ensure!(
        out.status.code() == Some(0),
        "exit {:?}\n{text}",
        out.status.code()
    );
    ensure!(took < Duration::from_secs(60), "took {took:?}");
    let mut required: BTreeSet<String> = (1..=12).map(|i| i.to_string()).collect();
    required.insert("independent-iff-unrelated".into());
    let mut total = 0;
    for line in text.lines() {
        let parts: Vec<&str> = line.split(' ').collect();
        let [_, id, inst, fail] = parts[..] else {
            return Err(format!("unexpected line {line:?}"));
        };
        let inst: usize = inst
            .trim_start_matches("instantiations=")
            .parse()
            .map_err(|_| line.to_string())?;
        ensure!(inst > 0 && fail == "failures=0", "{line}");
        total += inst;
        required.remove(id);
    }
    ensure!(required.is_empty(), "missing rules {required:?}");
    Ok(format!(
        "{} checks, {total} instantiations, 0 failures",
        text.lines().count()
    ))
}

fn permutations(items: &[Command]) -> Vec<Vec<Command>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

/// Valid orders of a simple set agree everywhere; every other order breaks
/// everything.
fn ordering_equivalence() -> Verdict {
    let space = FsSpace::default_space();
    let sets = space.simple_sets(4);
    let (mut members, mut others) = (0usize, 0usize);
    for set in &sets {
        let orders: Vec<CommandSequence> = enumerate_orders(set, usize::MAX).unwrap_or_default();
        if let Some(first) = orders.first() {
            for o in &orders[1..] {
                ensure!(space.equivalent(first, o), "{first:?} and {o:?} differ");
            }
        }
        members += orders.len();
        let valid: BTreeSet<&[Command]> = orders.iter().map(|o| o.commands()).collect();
        for perm in permutations(set) {
            if valid.contains(perm.as_slice()) {
                continue;
            }
            others += 1;
            let seq: CommandSequence = perm.into();
            ensure!(
                space.breaks_everything(&seq),
                "{seq:?} is not a valid order but works somewhere"
            );
        }
    }
    Ok(format!(
        "{} simple sets, {members} valid orders, {others} other permutations",
        sets.len()
    ))
}

/// Applying detected updates reproduces the target exactly.
fn round_trip() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..1000 {
        let nodes = random_forest(&mut rng, 15);
        let base = random_fs(&mut rng, &nodes, 3);
        let keep = [0.0, 0.5, 0.8, 0.95][i % 4];
        let new = mutate(&mut rng, &base, &nodes, 3, keep);
        let script = detect_ordered(&base, &new).map_err(|e| e.to_string())?;
        let got = base.apply_seq(&script);
        ensure!(!got.is_broken(), "pair {i} broke");
        ensure!(got == new, "pair {i} differs");
    }
    Ok("1000 random pairs on forests of up to 15 nodes".into())
}

fn updates(base: &Filesystem, new: &Filesystem) -> Vec<Command> {
    detect(base, new).expect("working filesystems").commands
}

/// The same updates in an order that applies.
fn ordered(base: &Filesystem, new: &Filesystem) -> CommandSequence {
    detect_ordered(base, new).expect("working filesystems")
}

/// Propagating the plan never breaks a replica, on random triples and on
/// every filesystem where both update sequences work.
fn reconcile_correctness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..1000 {
        let nodes = random_forest(&mut rng, 15);
        let base = random_fs(&mut rng, &nodes, 3);
        let keep = [0.5, 0.8, 0.95][i % 3];
        let fs_a = mutate(&mut rng, &base, &nodes, 3, keep);
        let fs_b = mutate(&mut rng, &base, &nodes, 3, keep);
        let plan =
            reconcile(&updates(&base, &fs_a), &updates(&base, &fs_b)).map_err(|e| e.to_string())?;
        ensure!(
            !fs_a.apply_seq(&plan.to_a).is_broken(),
            "triple {i}: replica A broke"
        );
        ensure!(
            !fs_b.apply_seq(&plan.to_b).is_broken(),
            "triple {i}: replica B broke"
        );
    }

    let space = FsSpace::shaped(2, 0, 2);
    let mut checked = 0;
    for base in space.enumerate() {
        for x in space.enumerate() {
            for y in space.enumerate() {
                let (a, b) = (updates(base, x), updates(base, y));
                let plan = reconcile(&a, &b).map_err(|e| e.to_string())?;
                let (sa, sb) = (ordered(base, x), ordered(base, y));
                for fs in space.enumerate() {
                    let (ra, rb) = (fs.apply_seq(&sa), fs.apply_seq(&sb));
                    if ra.is_broken() || rb.is_broken() {
                        continue;
                    }
                    checked += 1;
                    ensure!(
                        !rb.apply_seq(&plan.to_b).is_broken(),
                        "{sa:?} / {sb:?} on {fs:?}"
                    );
                    ensure!(
                        !ra.apply_seq(&plan.to_a).is_broken(),
                        "{sa:?} / {sb:?} on {fs:?}"
                    );
                }
            }
        }
    }
    Ok(format!(
        "1000 random triples; {} exhaustive triples on the parent-child space, {checked} starting points",
        space.len().pow(3)
    ))
}

fn subsets_with(extra: &Command, rest: &[Command]) -> Vec<Vec<Command>> {
    (0..1usize << rest.len())
        .map(|mask| {
            let mut s: Vec<Command> = (0..rest.len())
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| rest[i].clone())
                .collect();
            s.push(extra.clone());
            s
        })
        .collect()
}

/// Adding any excluded command to the propagated set either breaks replica
/// B or overwrites the value B wrote, as the witness says, in every order.
fn reconcile_maximality() -> Verdict {
    let mut excluded = 0;
    let mut applications = 0;
    for space in [FsSpace::shaped(2, 0, 2), FsSpace::shaped(3, 0, 2)] {
        for base in space.enumerate() {
            for x in space.enumerate() {
                for y in space.enumerate() {
                    let (a, b) = (updates(base, x), updates(base, y));
                    let plan = reconcile(&a, &b).map_err(|e| e.to_string())?;
                    let (sa, sb) = (ordered(base, x), ordered(base, y));
                    let starts: Vec<Filesystem> = space
                        .enumerate()
                        .filter(|fs| !fs.apply_seq(&sa).is_broken())
                        .map(|fs| fs.apply_seq(&sb))
                        .filter(|r| !r.is_broken())
                        .collect();
                    if !starts.contains(&base.apply_seq(&sb)) {
                        return Err(
                            "the replica built from the base is not a starting point".into()
                        );
                    }
                    for extra in plan
                        .a_minus_b
                        .iter()
                        .filter(|c| !plan.to_b.commands().contains(c))
                    {
                        excluded += 1;
                        let verdict =
                            maximality_witness(&a, &b, extra).map_err(|e| e.to_string())?;
                        for s in subsets_with(extra, plan.to_b.commands()) {
                            for perm in permutations(&s) {
                                for fs_b in &starts {
                                    applications += 1;
                                    let r = fs_b.apply_all(&perm);
                                    match &verdict {
                                        MaximalityVerdict::BreaksReplica => {
                                            ensure!(
                                                r.is_broken(),
                                                "{extra} applied via {perm:?} on {fs_b:?}"
                                            )
                                        }
                                        MaximalityVerdict::Overrides(n) => ensure!(
                                            r.is_broken() || r.get(n) != fs_b.get(n),
                                            "{extra} left {n} unchanged via {perm:?}"
                                        ),
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(format!(
        "{excluded} excluded commands on the parent-child and 3-chain spaces, {applications} extended applications"
    ))
}

fn p(s: &str) -> NodePath {
    NodePath::parse(s).unwrap()
}

/// Base holds /a and /a/x; A deletes both, B deletes only /a/x.
fn delete_delete_fixture() -> Verdict {
    let f = Value::File(fsalg_core::ContentId::of_bytes(b"x"));
    let base = Filesystem::from_entries([(p("/a"), Value::Dir), (p("/a/x"), f)]).unwrap();
    let fs_a = Filesystem::empty();
    let fs_b = Filesystem::from_entries([(p("/a"), Value::Dir)]).unwrap();

    let plan =
        reconcile(&updates(&base, &fs_a), &updates(&base, &fs_b)).map_err(|e| e.to_string())?;
    let db = Command::new(TypeTag::Dir, p("/a"), Value::Empty);
    ensure!(plan.conflicts.is_empty(), "conflicts {:?}", plan.conflicts);
    ensure!(plan.to_b.commands() == [db], "to_b = {:?}", plan.to_b);
    ensure!(plan.to_a.is_empty(), "to_a = {:?}", plan.to_a);
    ensure!(
        fs_b.apply_seq(&plan.to_b) == fs_a,
        "replicas differ after propagation"
    );

    let dirty_a = dirty_marks(&base, &fs_a).map_err(|e| e.to_string())?;
    let dirty_b = dirty_marks(&base, &fs_b).map_err(|e| e.to_string())?;
    let by_state =
        state_based_conflicts(&fs_a, &fs_b, &dirty_a, &dirty_b).map_err(|e| e.to_string())?;
    ensure!(
        by_state == BTreeSet::from([p("/a")]),
        "state-based conflicts {by_state:?}"
    );

    // and through the command line
    let tmp = TempDir::new().map_err(|e| e.to_string())?;
    let snap = |name: &str, text: String| {
        let path = tmp.path().join(name);
        fs::write(&path, text).unwrap();
        path
    };
    let id = fsalg_core::ContentId::of_bytes(b"x");
    let base_s = snap("base", format!("FSSNAP 1\nD /a\nF /a/x {id}\n"));
    let a_s = snap("a", "FSSNAP 1\n".into());
    let b_s = snap("b", "FSSNAP 1\nD /a\n".into());
    let out = tmp.path();
    let o = fsalg(&[
        "reconcile",
        "--base",
        s(&base_s),
        "--a",
        s(&a_s),
        "--b",
        s(&b_s),
        "--out-a",
        s(&out.join("oa")),
        "--out-b",
        s(&out.join("ob")),
        "--conflicts",
        s(&out.join("c")),
    ]);
    ensure!(
        o.status.code() == Some(0),
        "reconcile exit {:?}",
        o.status.code()
    );
    let to_b = fs::read_to_string(out.join("ob")).unwrap();
    ensure!(to_b == "FSCMDS 1\ndb /a\n", "script for B: {to_b:?}");
    ensure!(
        fs::read_to_string(out.join("c")).unwrap().is_empty(),
        "conflict report not empty"
    );
    Ok("command-based: 0 conflicts, propagates db /a; state-based: conflict at /a".into())
}

/// Every conflicting pair is also flagged by the dirty-mark comparator.
fn conflict_containment() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut pairs = 0;
    for i in 0..500 {
        let nodes = random_forest(&mut rng, 15);
        let base = random_fs(&mut rng, &nodes, 3);
        let fs_a = mutate(&mut rng, &base, &nodes, 3, 0.7);
        let fs_b = mutate(&mut rng, &base, &nodes, 3, 0.7);
        let plan =
            reconcile(&updates(&base, &fs_a), &updates(&base, &fs_b)).map_err(|e| e.to_string())?;
        let dirty_a = dirty_marks(&base, &fs_a).map_err(|e| e.to_string())?;
        let dirty_b = dirty_marks(&base, &fs_b).map_err(|e| e.to_string())?;
        let by_state =
            state_based_conflicts(&fs_a, &fs_b, &dirty_a, &dirty_b).map_err(|e| e.to_string())?;
        for c in &plan.conflicts {
            pairs += 1;
            ensure!(
                by_state.contains(&c.node_witness),
                "triple {i}: {c:?} not in {by_state:?}"
            );
        }
    }
    ensure!(pairs > 0, "no conflicts generated");
    Ok(format!(
        "500 random triples, {pairs} conflicting pairs, 0 violations"
    ))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(root: &Path, rel: &str, text: &str) {
    let path = root.join(rel);
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(path, text).unwrap();
}

fn copy_tree(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_tree(&entry.path(), &target);
        } else {
            fs::copy(entry.path(), target).unwrap();
        }
    }
}

fn snapshot_text(dir: &Path) -> Result<String, String> {
    let o = fsalg(&["snapshot", s(dir), "-o", "-"]);
    ensure!(
        o.status.success(),
        "snapshot {}: {}",
        dir.display(),
        String::from_utf8_lossy(&o.stderr)
    );
    Ok(String::from_utf8(o.stdout).unwrap())
}

/// Every file's bytes, keyed by relative path.
fn contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                out.push((
                    path.strip_prefix(dir).unwrap().display().to_string() + "/",
                    Vec::new(),
                ));
                stack.push(path);
            } else {
                out.push((
                    path.strip_prefix(dir).unwrap().display().to_string(),
                    fs::read(&path).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

/// Snapshots both replicas, reconciles against `work/base.snap`, and
/// returns the exit status. Outputs land in `work`.
fn run_reconcile(work: &Path, a: &Path, b: &Path) -> Result<i32, String> {
    let snap = |dir: &Path, name: &str| -> Result<(), String> {
        fs::write(work.join(name), snapshot_text(dir)?).map_err(|e| e.to_string())
    };
    snap(a, "a.snap")?;
    snap(b, "b.snap")?;
    let o = fsalg(&[
        "reconcile",
        "--base",
        s(&work.join("base.snap")),
        "--a",
        s(&work.join("a.snap")),
        "--b",
        s(&work.join("b.snap")),
        "--out-a",
        s(&work.join("to_a")),
        "--out-b",
        s(&work.join("to_b")),
        "--conflicts",
        s(&work.join("conflicts")),
    ]);
    o.status
        .code()
        .ok_or_else(|| "reconcile killed".to_string())
}

fn cli_end_to_end() -> Verdict {
    let tmp = TempDir::new().map_err(|e| e.to_string())?;
    let root = tmp.path();
    let base = root.join("base");
    write(&base, "docs/guide.txt", "guide v1");
    write(&base, "docs/old/notes.txt", "notes");
    write(&base, "src/lib.rs", "pub fn f() {}");
    write(&base, "src/util.rs", "pub fn g() {}");
    write(&base, "data.bin", "\u{0}\u{1}\u{2}");
    write(&base, "todo", "file that becomes a directory");

    // disjoint edits on two replicas
    let work = root.join("work1");
    fs::create_dir(&work).unwrap();
    fs::write(work.join("base.snap"), snapshot_text(&base)?).unwrap();
    let (a, b) = (root.join("a"), root.join("b"));
    copy_tree(&base, &a);
    copy_tree(&base, &b);
    write(&a, "docs/guide.txt", "guide v2");
    fs::remove_dir_all(a.join("docs/old")).unwrap();
    write(&a, "src/new.rs", "pub fn h() {}");
    fs::remove_file(b.join("src/util.rs")).unwrap();
    write(&b, "media/image with space.png", "png bytes");
    fs::remove_file(b.join("todo")).unwrap();
    write(&b, "todo/today", "ship it");

    let code = run_reconcile(&work, &a, &b)?;
    ensure!(code == 0, "reconcile of disjoint edits exited {code}");
    for (script, dir, blobs) in [("to_a", &a, &b), ("to_b", &b, &a)] {
        let o = fsalg(&["apply", s(&work.join(script)), s(dir), "--blobs", s(blobs)]);
        ensure!(
            o.status.success(),
            "apply {script}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    ensure!(
        snapshot_text(&a)? == snapshot_text(&b)?,
        "snapshots differ after propagation"
    );
    ensure!(
        contents(&a) == contents(&b),
        "file contents differ after propagation"
    );

    // conflicting edits leave both trees alone
    let work = root.join("work2");
    fs::create_dir(&work).unwrap();
    fs::write(work.join("base.snap"), snapshot_text(&base)?).unwrap();
    let (c, d) = (root.join("c"), root.join("d"));
    copy_tree(&base, &c);
    copy_tree(&base, &d);
    write(&c, "src/lib.rs", "pub fn f() { 1 }");
    write(&d, "src/lib.rs", "pub fn f() { 2 }");
    fs::remove_dir_all(c.join("docs")).unwrap();
    write(&d, "docs/old/more.txt", "more");
    write(&c, "extra.txt", "only on c");
    let (before_c, before_d) = (contents(&c), contents(&d));
    let code = run_reconcile(&work, &c, &d)?;
    ensure!(code == 1, "reconcile of conflicting edits exited {code}");
    ensure!(
        contents(&c) == before_c && contents(&d) == before_d,
        "reconcile touched a tree"
    );
    let report = fs::read_to_string(work.join("conflicts")).unwrap();
    ensure!(
        report.lines().count() >= 2 && report.lines().all(|l| l.starts_with("CONFLICT ")),
        "{report}"
    );
    ensure!(report.contains("/src/lib.rs"), "{report}");
    Ok(format!(
        "disjoint edits converged ({} entries); conflicting edits exit 1 with {} pairs, trees intact",
        contents(&a).len(),
        report.lines().count()
    ))
}
