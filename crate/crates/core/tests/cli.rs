use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_filacover"))
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/fixture_contrived.gml")
}

fn run(args: &[&str], out_dir: &Path) -> Output {
    exe()
        .args(args)
        .arg("--out-dir")
        .arg(out_dir)
        .output()
        .expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_value(text: &str, column: &str) -> String {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().expect("header").split(',').collect();
    let row: Vec<&str> = lines.next().expect("row").split(',').collect();
    let i = header
        .iter()
        .position(|h| *h == column)
        .unwrap_or_else(|| panic!("no column {column}"));
    row[i].to_string()
}

#[test]
fn decompose_fixture_with_defaults_recovers_truth() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixture();
    let fx = fx.to_str().unwrap();
    let o = run(&["decompose", fx, "--reference", fx], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("filaments: 4"), "{text}");
    assert!(text.contains("ji1: 1  ji: 1"), "{text}");
    for name in [
        "fixture_contrived.cover.gml",
        "fixture_contrived.cover.filaments.csv",
        "fixture_contrived.decompose.json",
    ] {
        assert!(dir.path().join(name).exists(), "missing {name}");
    }
    let manifest: serde_json::Value = serde_json::from_slice(
        &fs::read(dir.path().join("fixture_contrived.decompose.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["subcommand"], "decompose");
    assert_eq!(manifest["seed"], 1);
}

#[test]
fn missing_weight_is_an_input_error_naming_the_edge() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.gml");
    fs::write(
        &input,
        "graph [\n  node [ id 0 x 0 y 0 ]\n  node [ id 1 x 1 y 0 ]\n  node [ id 2 x 2 y 0 ]\n  \
         edge [ source 0 target 1 weight 1 ]\n  edge [ source 1 target 2 ]\n]\n",
    )
    .unwrap();
    let o = run(&["decompose", input.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("edge #1"), "{err}");
    assert!(err.starts_with("error ["), "{err}");
}

#[test]
fn pool_cap_is_a_resource_error() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixture();
    let o = run(
        &["decompose", fx.to_str().unwrap(), "--max-paths", "40"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn treesolve_rejects_a_cyclic_graph() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["treesolve", fixture().to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("tree"), "{}", stderr(&o));
}

#[test]
fn unknown_flag_exits_one_and_version_names_the_build() {
    let o = exe().arg("--bogus").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let v = exe().arg("--version").output().unwrap();
    assert_eq!(v.status.code(), Some(0));
    assert!(stdout(&v).contains("build"), "{}", stdout(&v));
}

#[test]
fn sweep_produces_sixteen_combinations() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixture();
    let fx = fx.to_str().unwrap();
    let o = run(&["decompose", fx, "--sweep", "--reference", fx], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("fixture_contrived.sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "paths,mode,objective,roughness,status,n_filaments,objective_value,ji1,ji,ri1,ri"
    );
    assert_eq!(lines.len(), 17);
    let mut combos: Vec<String> = lines[1..]
        .iter()
        .map(|l| l.split(',').take(4).collect::<Vec<_>>().join(","))
        .collect();
    combos.sort();
    combos.dedup();
    assert_eq!(combos.len(), 16);
    let graphs = fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| {
            let name = e.as_ref().unwrap().file_name();
            let name = name.to_string_lossy();
            name.ends_with(".gml") && name.matches('-').count() == 3
        })
        .count();
    assert_eq!(graphs, 16);
}

#[test]
fn compare_reports_each_distance_and_unbounded_equals_classical() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixture();
    let fx = fx.to_str().unwrap();
    let decomposed = run(
        &["decompose", fx, "--paths", "rmst", "--prefix", "rmst"],
        dir.path(),
    );
    assert_eq!(decomposed.status.code(), Some(0));
    let cover = dir.path().join("rmst.cover.gml");
    let o = run(
        &["compare", cover.to_str().unwrap(), fx, "--d", "1,2,4,inf"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("vi,ri,ji,ri_1,ji_1,ri_2,ji_2,ri_4,ji_4,ri_inf,ji_inf\n"));
    assert_eq!(csv_value(&text, "ri_inf"), csv_value(&text, "ri"));
    assert_eq!(csv_value(&text, "ji_inf"), csv_value(&text, "ji"));
    assert_eq!(csv_value(&text, "vi"), "undefined");
    assert_ne!(csv_value(&text, "ji_1"), "1");

    let same = run(&["compare", fx, fx], dir.path());
    let text = stdout(&same);
    for column in ["ri", "ji", "ri_1", "ji_1", "ri_inf", "ji_inf"] {
        assert_eq!(csv_value(&text, column), "1", "{column}");
    }
}

#[test]
fn compare_of_disjoint_labelings_reports_vi() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["generate", "--kind", "tree", "--n", "12", "--prefix", "t"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let tree = dir.path().join("t.gml");
    let solved = run(&["treesolve", tree.to_str().unwrap()], dir.path());
    assert_eq!(solved.status.code(), Some(0), "{}", stderr(&solved));
    let cover = dir.path().join("t.tree.gml");
    let cover = cover.to_str().unwrap();
    let same = run(&["compare", cover, cover], dir.path());
    assert_eq!(csv_value(&stdout(&same), "vi"), "1");
}

#[test]
fn compare_rejects_different_graphs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["generate", "--kind", "tree", "--n", "8", "--prefix", "t"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let tree = dir.path().join("t.gml");
    let o = run(
        &[
            "compare",
            tree.to_str().unwrap(),
            fixture().to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn replay_reproduces_the_recorded_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixture();
    let o = run(
        &["decompose", fx.to_str().unwrap(), "--paths", "both"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let read = |name: &str| fs::read(dir.path().join(name)).unwrap();
    let cover = read("fixture_contrived.cover.gml");
    let table = read("fixture_contrived.cover.filaments.csv");
    fs::remove_file(dir.path().join("fixture_contrived.cover.gml")).unwrap();
    let manifest = dir.path().join("fixture_contrived.decompose.json");
    let replay = exe().arg("replay").arg(&manifest).output().unwrap();
    assert_eq!(replay.status.code(), Some(0), "{}", stderr(&replay));
    assert_eq!(replay.stdout, o.stdout);
    assert_eq!(read("fixture_contrived.cover.gml"), cover);
    assert_eq!(read("fixture_contrived.cover.filaments.csv"), table);
}

#[test]
fn robustness_noise_scan_writes_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "robustness",
            fixture().to_str().unwrap(),
            "--scan",
            "noise",
            "--levels",
            "0,400",
            "--trials",
            "3",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("fixture_contrived.noise.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "level,trial,ji1,ri1");
    assert_eq!(lines[1], "baseline,0,1,1");
    assert_eq!(lines.len(), 2 + 2 * 3);
}

#[test]
fn postprocess_and_generate_write_graphs() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixture();
    let o = run(&["postprocess", fx.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("fixture_contrived.merged.gml").exists());
    let g = run(
        &[
            "generate",
            "--kind",
            "corpus",
            "--max-edges",
            "3",
            "--prefix",
            "c",
        ],
        dir.path(),
    );
    assert_eq!(g.status.code(), Some(0), "{}", stderr(&g));
    assert!(dir.path().join("c-000.gml").exists());
}
