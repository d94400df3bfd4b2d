use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use numina_core::jsonl::{read_jsonl, write_jsonl};
use numina_core::qa::Provenance;
use numina_core::{QaRecord, Task};

const BASE: &str = r#"
scenes = ["out/scenes/*.json"]
seed = 4
synth_scenes = 6
synth_instances = 20
target_fv_quantity = 20
target_fv_distance = 20
target_fv_volume = 20
target_ni_quantity = 10
target_ni_distance = 20
target_ni_volume = 20
rewrite = true
saqs = "out/saqs.jsonl"
rewrite_pm_target = 20
rewrite_fv_target = 10
"#;

struct Ws {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Ws {
    fn new(config: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        fs::write(root.join("numina.toml"), config).unwrap();
        Ws { _dir: dir, root }
    }

    fn numina(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_numina"))
            .current_dir(&self.root)
            .args(["--config", "numina.toml", "--stub-llm"])
            .args(args)
            .output()
            .unwrap()
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    /// synth + extract + generate, asserting success.
    fn prepared(config: &str) -> Self {
        let ws = Ws::new(config);
        for cmd in ["synth", "extract", "generate"] {
            let out = ws.numina(&[cmd]);
            assert_eq!(code(&out), 0, "{cmd}: {}", stderr(&out));
        }
        ws
    }

    fn dataset(&self) -> Vec<QaRecord> {
        read_jsonl(&self.path("out/dataset.jsonl")).unwrap()
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_scene_json(path: &Path, scene_id: &str, labels: &[&str]) {
    let instances: Vec<serde_json::Value> = labels
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let x = i as f64 * 3.0;
            serde_json::json!({
                "instance_id": format!("{i}"),
                "label": label,
                "points": [[x, 0.0, 0.0], [x + 1.0, 0.0, 0.0], [x, 1.0, 0.0], [x, 0.0, 1.0]],
            })
        })
        .collect();
    let doc = serde_json::json!({ "scene_id": scene_id, "instances": instances });
    fs::write(path, doc.to_string()).unwrap();
}

#[test]
fn full_pipeline_succeeds_and_logs() {
    let ws = Ws::prepared(BASE);
    let records = ws.dataset();
    assert!(records
        .iter()
        .any(|r| r.provenance == Provenance::Llm && r.task == Task::PM));
    assert!(records
        .iter()
        .any(|r| r.provenance == Provenance::Llm && r.task == Task::FV));
    assert_eq!(fs::read_dir(ws.path("out/ngt")).unwrap().count(), 6);

    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(ws.path("out/manifest.json")).unwrap()).unwrap();
    let text = manifest.to_string();
    assert!(text.contains("builtin-1"), "manifest lacks bank version");
    assert!(text.contains("stub-synthesizing"));
    assert!(!text.contains(ws.root.to_str().unwrap()), "manifest leaks a path");

    let out = ws.numina(&["selfcheck"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));

    let log = fs::read_to_string(ws.path("out/logs/generate.jsonl")).unwrap();
    assert!(!log.is_empty());
    for line in log.lines() {
        serde_json::from_str::<serde_json::Value>(line).expect("log lines are JSON");
    }
}

#[test]
fn poor_predictions_still_exit_zero() {
    let ws = Ws::prepared(BASE);
    let preds: Vec<serde_json::Value> = ws
        .dataset()
        .iter()
        .map(|r| serde_json::json!({"qa_id": r.qa_id, "output": "I am not sure"}))
        .collect();
    write_jsonl(&ws.path("preds.jsonl"), &preds).unwrap();
    let out = ws.numina(&["score", "--predictions", "preds.jsonl"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(ws.path("out/score.json")).unwrap()).unwrap();
    assert_eq!(report["unparseable_predictions"].as_array().unwrap().len(), preds.len());
    assert!(fs::read_to_string(ws.path("out/score.txt")).unwrap().contains("PM"));

    fs::write(ws.path("bad.jsonl"), "{\"qa_id\":\"no-such-id\",\"output\":\"yes\"}\n").unwrap();
    let out = ws.numina(&["score", "--predictions", "bad.jsonl"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("no-such-id"));
}

#[test]
fn flipped_fv_answer_fails_selfcheck_naming_record() {
    let ws = Ws::prepared(BASE);
    let mut records = ws.dataset();
    let victim = records
        .iter_mut()
        .find(|r| r.task == Task::FV && r.provenance == Provenance::Rule && !r.is_contrapositive())
        .unwrap();
    victim.answer = if victim.answer == "yes" {
        "no".into()
    } else {
        "yes".into()
    };
    let id = victim.qa_id.clone();
    write_jsonl(&ws.path("flipped.jsonl"), &records).unwrap();

    let out = ws.numina(&["selfcheck", "--dataset", "flipped.jsonl"]);
    assert_eq!(code(&out), 5);
    assert!(stdout(&out).contains(&id), "{}", stdout(&out));
}

#[test]
fn broken_cp_link_fails_selfcheck() {
    let ws = Ws::prepared(BASE);
    let mut records = ws.dataset();
    let victim = records.iter_mut().find(|r| r.cp_link.is_some()).unwrap();
    victim.cp_link = Some("nowhere.cp".into());
    let id = victim.qa_id.clone();
    write_jsonl(&ws.path("broken.jsonl"), &records).unwrap();

    let out = ws.numina(&["selfcheck", "--dataset", "broken.jsonl"]);
    assert_eq!(code(&out), 5);
    assert!(stdout(&out).contains(&id));
}

#[test]
fn empty_after_filter_scene_is_listed_and_others_proceed() {
    let ws = Ws::new("scenes = [\"in/*.json\"]\nexcluded_labels = [\"object\"]\n");
    fs::create_dir(ws.path("in")).unwrap();
    write_scene_json(&ws.path("in/a.json"), "a", &["chair", "table", "chair"]);
    write_scene_json(&ws.path("in/b.json"), "b", &["object", "object"]);
    let out = ws.numina(&["extract"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(ws.path("out/extract_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["ok"], 1);
    assert_eq!(summary["empty"], 1);
    let statuses: Vec<(&str, &str)> = summary["scenes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| (s["scene_id"].as_str().unwrap(), s["status"].as_str().unwrap()))
        .collect();
    assert!(statuses.contains(&("b", "empty")));
    assert!(ws.path("out/ngt/a.json").exists());
    assert!(!ws.path("out/ngt/b.json").exists());
}

#[test]
fn unreadable_inputs_report_the_path() {
    let ws = Ws::new("scenes = [\"missing/nothing-*.json\"]\n");
    let out = ws.numina(&["extract"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("missing/nothing-*.json"));

    let ws = Ws::new("scenes = [\"in/*.json\"]\n");
    fs::create_dir(ws.path("in")).unwrap();
    write_scene_json(&ws.path("in/good.json"), "good", &["chair", "desk"]);
    fs::write(ws.path("in/torn.json"), "{\"scene_id\": \"torn\", \"instances\": [").unwrap();
    let out = ws.numina(&["extract"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("torn.json"));
    assert!(ws.path("out/ngt/good.json").exists(), "healthy scenes still extracted");
}

#[test]
fn config_errors_exit_two() {
    let ws = Ws::new("seeed = 3\n");
    assert_eq!(code(&ws.numina(&["synth"])), 2);

    let ws = Ws::new("ambiguity_margin = 1.5\n");
    let out = ws.numina(&["synth"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("margin"));

    let ws = Ws::new("");
    assert_eq!(code(&ws.numina(&["generate", "--bogus-flag"])), 2);
    assert_eq!(code(&ws.numina(&["extract"])), 2, "no scenes configured");
    assert_eq!(code(&ws.numina(&["--help"])), 0);
}

#[test]
fn generate_without_tables_is_input_error() {
    let ws = Ws::new("");
    let out = ws.numina(&["generate"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("extract"));
}

#[test]
fn unreachable_targets_exit_four_with_stratum() {
    let ws = Ws::prepared(BASE);
    fs::write(
        ws.path("numina.toml"),
        format!("{BASE}\ntarget_ni_volume = 100000\n").replace("target_ni_volume = 20\n", ""),
    )
    .unwrap();
    let out = ws.numina(&["generate"]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    assert!(stderr(&out).contains("volume"), "{}", stderr(&out));
}

#[test]
fn seed_flag_overrides_config() {
    let a = Ws::prepared(BASE);
    let b = Ws::new(BASE);
    for cmd in ["synth", "extract", "generate"] {
        assert_eq!(code(&b.numina(&[cmd, "--seed", "5"])), 0);
    }
    assert_ne!(
        fs::read(a.path("out/dataset.jsonl")).unwrap(),
        fs::read(b.path("out/dataset.jsonl")).unwrap()
    );
}
