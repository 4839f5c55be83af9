use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/corpus");

fn okb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_okb")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn corpus_path(rel: &str) -> String {
    Path::new(CORPUS).join(rel).display().to_string()
}

#[test]
fn compile_reports_shape_count_and_emits_turtle() {
    let o = okb(&["compile", &corpus_path("blocks/accountability.ir.yaml")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("compiled 5 shapes"));
    assert!(stdout(&o).contains("ex:A5Shape a sh:NodeShape"));
    // Same bytes on a second run.
    assert_eq!(stdout(&o), stdout(&okb(&["compile", &corpus_path("blocks/accountability.ir.yaml")])));
}

#[test]
fn compile_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.ir.yaml");
    fs::write(&empty, "[]\n").unwrap();
    let o = okb(&["compile", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("compiled 0 shapes"));

    let dup = dir.path().join("dup.ir.yaml");
    let record = "- obligation_id: X1\n  target_class: ex:Decision\n  constraint_type: structural\n  relation: ex:p\n  message: m\n";
    fs::write(&dup, format!("{record}{record}")).unwrap();
    let o = okb(&["compile", dup.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("X1"));

    let out = dir.path().join("out.ttl");
    let o = okb(&["compile", &corpus_path("blocks/logging.ir.yaml"), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(fs::read_to_string(out).unwrap().contains("ex:A3Shape"));
}

#[test]
fn validate_exit_codes_follow_the_verdict() {
    let o = okb(&["validate", "conform", "--profile", "Combined"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("conform under Combined: conforms (0 violations)"));

    let o = okb(&["validate", "disparity_exceeds", "--profile", "Fairness"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("ex:B5Shape"));

    let o = okb(&["validate", &corpus_path("cases/case_exp1_violate.ttl"), "--profile", "EU+Fairness", "--format", "turtle"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("sh:conforms false"));

    assert_eq!(okb(&["validate", "conform", "--profile", "Mars"]).status.code(), Some(2));
    assert_eq!(okb(&["validate", "no_such_case", "--profile", "EU"]).status.code(), Some(2));
    assert_eq!(okb(&["validate"]).status.code(), Some(2));
}

#[test]
fn refine_prints_matrix_and_equivalence_summary() {
    let o = okb(&["refine"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.matches("does not hold").count(), 4);
    assert!(out.contains("no equivalent pairs"));

    let o = okb(&["refine", "--profile", "US", "--profile", "China", "--corpus", &corpus_path("cases")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("equivalent pairs: China = US"));
}

#[test]
fn compose_prints_canonical_text() {
    let a = okb(&["compose", "--profile", "Combined"]);
    let b = okb(&["compose", "--block", "fairness_transparency", "--block", "accountability"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(okb(&["compose"]).status.code(), Some(2));
}

#[test]
fn bench_requires_enough_samples() {
    let o = okb(&["bench", "--samples", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("at least 30"));

    let o = okb(&["bench", "--profile", "Fairness", "--case", "conform"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("# median Fairness"));
}

#[test]
fn hash_manifest_tracks_single_byte_changes() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("policy.ttl");
    fs::write(&f, "a").unwrap();
    let first = stdout(&okb(&["hash-manifest", dir.path().to_str().unwrap()]));
    assert!(first.starts_with("ca978112ca1bbdcafac231b39a23dc4da786eff8147c4e72b9807785afee48bb  "));
    fs::write(&f, "b").unwrap();
    let second = stdout(&okb(&["hash-manifest", dir.path().to_str().unwrap()]));
    assert_ne!(first, second);
    assert_eq!(okb(&["hash-manifest", "/no/such/path"]).status.code(), Some(2));
}

#[test]
fn config_file_points_at_directories_and_audit_log() {
    let dir = tempfile::tempdir().unwrap();
    let blocks = dir.path().join("blocks");
    let profiles = dir.path().join("profiles");
    fs::create_dir(&blocks).unwrap();
    fs::create_dir(&profiles).unwrap();
    fs::copy(corpus_path("blocks/transparency.ir.yaml"), blocks.join("transparency.ir.yaml")).unwrap();
    fs::write(profiles.join("t.profile"), "profile: T\ntransparency\n").unwrap();
    let cfg = dir.path().join("okb.toml");
    fs::write(&cfg, "block_dir = \"blocks\"\nprofile_dir = \"profiles\"\naudit_log = \"audit.jsonl\"\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let o = okb(&["--config", cfg, "validate", "missing_explanation", "--profile", "T"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let o = okb(&["--config", cfg, "validate", "conform", "--profile", "Combined"]);
    assert_eq!(o.status.code(), Some(2));

    let log = fs::read_to_string(dir.path().join("audit.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 1);
    assert!(log.contains("\"output_hash\""));

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "colour = \"blue\"\n").unwrap();
    assert_eq!(okb(&["--config", bad.to_str().unwrap(), "refine"]).status.code(), Some(2));
}
