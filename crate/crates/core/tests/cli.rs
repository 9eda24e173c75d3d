use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn workdir(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/data.txt");
    std::fs::copy(fixture, dir.join("data.txt")).unwrap();
    dir
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multidendrogram")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn writes_all_formats_by_default() {
    let dir = workdir("all");
    let out = run(&dir, &["direct", "data.txt", "distances", "Unweighted_Average", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for ext in ["txt", "nwk", "ultrametric.txt", "svg"] {
        assert!(dir.join(format!("data-unweighted_average.{ext}")).is_file(), "{ext}");
    }
    assert!(stdout(&out).contains("method: Unweighted_Average\n"));
}

#[test]
fn format_subset_and_out_dir() {
    let dir = workdir("subset");
    let out = run(&dir, &["direct", "data.txt", "distances", "Ward", "--formats", "newick,svg", "--out-dir", "results"]);
    assert!(out.status.success());
    let mut names: Vec<String> =
        std::fs::read_dir(dir.join("results")).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["data-ward.nwk", "data-ward.svg"]);
}

#[test]
fn precision_defaults_to_source_decimals() {
    let dir = workdir("precision");
    let out = run(&dir, &["direct", "data.txt", "distances", "Single_Linkage", "--formats", "txt"]);
    assert!(stdout(&out).contains("precision: 3\n"));
}

#[test]
fn json_report() {
    let dir = workdir("json");
    let out = run(&dir, &["direct", "data.txt", "distances", "Complete_Linkage", "3", "--formats", "txt", "--json-report", "report.json"]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["items"], 8);
    assert_eq!(json["ties"], 1);
    assert_eq!(json["bands"], 1);
    assert_eq!(json["measure"], "distances");
    assert_eq!(json["reversals"].as_array().unwrap().len(), 1);
    assert!(json["deviation"]["ccc"].as_f64().unwrap() > 0.8);
}

#[test]
fn pair_group_and_enumeration_modes() {
    let dir = workdir("modes");
    let out = run(
        &dir,
        &[
            "direct",
            "data.txt",
            "distances",
            "Complete_Linkage",
            "3",
            "--mode",
            "pair-group",
            "--tie-policy",
            "last",
            "--formats",
            "newick",
        ],
    );
    assert!(out.status.success());
    let newick = std::fs::read_to_string(dir.join("data-complete_linkage.nwk")).unwrap();
    assert!(!newick.contains("Alder:0.230,Birch:0.230,Cedar"), "pair-group trees are binary: {newick}");

    let out = run(&dir, &["direct", "data.txt", "distances", "Complete_Linkage", "3", "--mode", "enumerate-ties"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("distinct dendrograms: 2\n"), "{text}");
    assert!(text.contains("distinct ultrametric matrices: 2\n"), "{text}");
}

#[test]
fn weights_input() {
    let dir = workdir("weights");
    std::fs::write(dir.join("sim.txt"), "a b 0.9\na c 0.5\nb c 0.5\n").unwrap();
    let out = run(&dir, &["direct", "sim.txt", "weights", "Complete_Linkage", "--formats", "newick,txt"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let details = std::fs::read_to_string(dir.join("sim-complete_linkage.txt")).unwrap();
    assert_eq!(details, "node: 3 leaves, [0.5, 0.5]\n  node: 2 leaves, [0.9, 0.9]\n    leaf: a\n    leaf: b\n  leaf: c\n");
}

#[test]
fn exit_codes() {
    let dir = workdir("errors");
    let bad_method = run(&dir, &["direct", "data.txt", "distances", "Nearest"]);
    assert_eq!(bad_method.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad_method.stderr).starts_with("error: usage:"));

    let missing = run(&dir, &["direct", "nope.txt", "distances", "Ward"]);
    assert_eq!(missing.status.code(), Some(2));

    std::fs::write(dir.join("bad.txt"), "0 1\n2 0\n").unwrap();
    let asymmetric = run(&dir, &["direct", "bad.txt", "distances", "Ward"]);
    assert_eq!(asymmetric.status.code(), Some(2));

    let budget = run(&dir, &["direct", "data.txt", "distances", "Complete_Linkage", "--mode", "enumerate-ties", "--max-enum", "1"]);
    assert_eq!(budget.status.code(), Some(3));
}

#[test]
fn help_exits_cleanly() {
    let dir = workdir("help");
    let out = run(&dir, &["direct", "--help"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("--tie-policy"));
}
