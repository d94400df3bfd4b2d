use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use super::{CliError, PipelineConfig};
use crate::eval::{render_table, score_dataset, selfcheck as run_selfcheck, PredictionRecord};
use crate::jsonl::{read_jsonl, write_jsonl};
use crate::ngt::{extract_ngt, read_ngt, write_ngt, LabelFilter, NgtError, NgtTable};
use crate::qa::{assemble_dataset, builtin_bank, generate_rule_records, load_bank, QaError, QaRecord, TemplateBank};
use crate::rewrite::{
    run_rewrite, HttpChatClient, RewriteError, SaqRecord, ServiceClient, StubClient, PROMPT_VERSION, SYSTEM_PROMPT,
};
use crate::scene::synthetic::{box_gap, random_layout, AnalyticTruth};
use crate::scene::{generate_synthetic_scene, import_scannet_style, load_scene, write_scene, Scene, SceneError};
use crate::seed::{rng_for, sub_seed};

const STUB_MODEL_ID: &str = "stub-synthesizing";

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::Input(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn label_filter(cfg: &PipelineConfig) -> LabelFilter {
    LabelFilter::new(&cfg.excluded_labels)
}

fn template_bank(cfg: &PipelineConfig) -> Result<TemplateBank, CliError> {
    match &cfg.template_bank {
        Some(p) => load_bank(p).map_err(|e| CliError::Config(e.to_string())),
        None => Ok(builtin_bank()),
    }
}

const COLORS: [&str; 10] = [
    "white", "black", "brown", "gray", "blue", "red", "green", "beige", "yellow", "silver",
];

/// Short-answer questions about the uniquely labelled shapes of a synthetic
/// scene: a color question with a random answer and a nearest-object
/// question answered from the analytic boxes.
fn synth_saqs(scene_id: &str, truth: &AnalyticTruth, filter: &LabelFilter, rng: &mut impl Rng) -> Vec<SaqRecord> {
    let shapes: Vec<_> = truth.shapes.iter().filter(|s| !filter.excludes(&s.label)).collect();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for s in &shapes {
        *counts.entry(s.label.as_str()).or_default() += 1;
    }
    let mut out = Vec::new();
    for s in shapes.iter().filter(|s| counts[s.label.as_str()] == 1) {
        let mut push = |question: String, answer: String| {
            out.push(SaqRecord {
                saq_id: format!("{scene_id}-saq-{:03}", out.len()),
                scene_id: scene_id.into(),
                question,
                answer,
            });
        };
        let color = COLORS.choose(rng).expect("colors");
        push(format!("What color is the {}?", s.label), (*color).to_string());
        let nearest = shapes
            .iter()
            .filter(|o| o.instance_id != s.instance_id && o.label != s.label)
            .min_by(|a, b| box_gap(&s.aabb, &a.aabb).total_cmp(&box_gap(&s.aabb, &b.aabb)));
        if let Some(n) = nearest {
            push(
                format!("What is the closest object to the {}?", s.label),
                format!("the {}", n.label),
            );
        }
    }
    out
}

pub(super) fn synth(cfg: &PipelineConfig) -> Result<(), CliError> {
    let scenes_dir = cfg.out.join("scenes");
    let truth_dir = cfg.out.join("truth");
    create_dir(&scenes_dir)?;
    create_dir(&truth_dir)?;
    let filter = label_filter(cfg);
    let ids: Vec<String> = (0..cfg.synth_scenes).map(|i| format!("synth{i:04}")).collect();
    let per_scene: Vec<Result<Vec<SaqRecord>, CliError>> = ids
        .par_iter()
        .map(|id| {
            let mut rng = rng_for(cfg.seed, &format!("synth/{id}"));
            let spec = random_layout(id, cfg.synth_instances, &mut rng);
            let (scene, truth) = generate_synthetic_scene(&spec, sub_seed(cfg.seed, &format!("synth-points/{id}")))
                .map_err(input_err)?;
            write_scene(&scene, &scenes_dir.join(format!("{id}.json"))).map_err(input_err)?;
            let truth_json = serde_json::to_string_pretty(&truth).expect("truth serializes");
            write_file(&truth_dir.join(format!("{id}.json")), &truth_json)?;
            Ok(synth_saqs(id, &truth, &filter, &mut rng))
        })
        .collect();
    let mut saqs = Vec::new();
    for r in per_scene {
        saqs.extend(r?);
    }
    let saq_path = cfg.out.join("saqs.jsonl");
    write_jsonl(&saq_path, &saqs).map_err(input_err)?;
    tracing::info!(scenes = ids.len(), saqs = saqs.len(), "synthetic scenes written");
    println!(
        "synth: {} scenes ({} instances each), {} SAQs -> {}",
        ids.len(),
        cfg.synth_instances,
        saqs.len(),
        cfg.out.display()
    );
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum SceneSource {
    Json(PathBuf),
    ScanNet {
        ply: PathBuf,
        aggregation: PathBuf,
        segmentation: PathBuf,
    },
}

impl SceneSource {
    fn display(&self) -> String {
        match self {
            SceneSource::Json(p) => p.display().to_string(),
            SceneSource::ScanNet { ply, .. } => ply.parent().unwrap_or(ply).display().to_string(),
        }
    }

    fn load(&self) -> Result<Scene, SceneError> {
        match self {
            SceneSource::Json(p) => load_scene(p),
            SceneSource::ScanNet {
                ply,
                aggregation,
                segmentation,
            } => import_scannet_style(ply, aggregation, segmentation),
        }
    }
}

/// A folder holding one `.ply`, one `*aggregation.json` and one `*segs.json`.
fn scannet_dir(dir: &Path) -> Result<SceneSource, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
    files.sort();
    let pick = |suffix: &str| -> Result<PathBuf, CliError> {
        let hits: Vec<&PathBuf> = files
            .iter()
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.ends_with(suffix))
            })
            .collect();
        match hits.as_slice() {
            [one] => Ok((*one).clone()),
            _ => Err(CliError::Input(format!(
                "{}: expected exactly one *{suffix} file, found {}",
                dir.display(),
                hits.len()
            ))),
        }
    };
    Ok(SceneSource::ScanNet {
        ply: pick(".ply")?,
        aggregation: pick("aggregation.json")?,
        segmentation: pick("segs.json")?,
    })
}

fn resolve_scenes(cfg: &PipelineConfig) -> Result<Vec<SceneSource>, CliError> {
    if cfg.scenes.is_empty() {
        return Err(CliError::Config("no scene inputs configured (key `scenes`)".into()));
    }
    let mut sources = BTreeSet::new();
    for pattern in &cfg.scenes {
        let paths = glob::glob(pattern).map_err(|e| CliError::Config(format!("scene glob {pattern:?}: {e}")))?;
        let mut matched = false;
        for p in paths {
            let p = p.map_err(input_err)?;
            matched = true;
            if p.is_dir() {
                sources.insert(scannet_dir(&p)?);
            } else {
                sources.insert(SceneSource::Json(p));
            }
        }
        if !matched {
            return Err(CliError::Input(format!("{pattern}: no scene matches")));
        }
    }
    Ok(sources.into_iter().collect())
}

#[derive(Debug, Serialize)]
struct SceneOutcome {
    source: String,
    scene_id: Option<String>,
    status: &'static str,
    instances: usize,
    pairs: usize,
    skipped_pairs: usize,
    error: Option<String>,
}

pub(super) fn extract(cfg: &PipelineConfig) -> Result<(), CliError> {
    let sources = resolve_scenes(cfg)?;
    let ngt_dir = cfg.ngt_dir();
    create_dir(&ngt_dir)?;
    // Stale tables from an earlier run would leak into `generate`.
    for entry in fs::read_dir(&ngt_dir).map_err(input_err)?.flatten() {
        let p = entry.path();
        if p.extension().is_some_and(|e| e == "json") {
            fs::remove_file(&p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
        }
    }
    let filter = label_filter(cfg);
    let outcomes: Vec<(SceneOutcome, Option<NgtTable>)> = sources
        .par_iter()
        .map(|src| {
            let mut o = SceneOutcome {
                source: src.display(),
                scene_id: None,
                status: "failed",
                instances: 0,
                pairs: 0,
                skipped_pairs: 0,
                error: None,
            };
            let scene = match src.load() {
                Ok(s) => s,
                Err(e) => {
                    tracing::error!(source = %o.source, error = %e, "scene failed to load");
                    o.error = Some(e.to_string());
                    return (o, None);
                }
            };
            o.scene_id = Some(scene.scene_id().to_string());
            match extract_ngt(&scene, &filter, cfg.solver_tolerance) {
                Ok(t) => {
                    o.status = "ok";
                    o.instances = t.instances().len();
                    o.pairs = t.pair_distances().len();
                    o.skipped_pairs = t.skipped_pairs().len();
                    (o, Some(t))
                }
                Err(NgtError::EmptyAfterFilter(id)) => {
                    tracing::warn!(scene = %id, "no instance survives label filtering");
                    o.status = "empty";
                    (o, None)
                }
                Err(e) => {
                    tracing::error!(source = %o.source, error = %e, "extraction failed");
                    o.error = Some(e.to_string());
                    (o, None)
                }
            }
        })
        .collect();

    let mut seen = BTreeSet::new();
    let mut summary = Vec::new();
    for (mut o, table) in outcomes {
        if let Some(t) = table {
            if !seen.insert(t.scene_id().to_string()) {
                o.status = "failed";
                o.error = Some(format!("duplicate scene id {}", t.scene_id()));
            } else {
                write_ngt(&t, &ngt_dir.join(format!("{}.json", t.scene_id()))).map_err(input_err)?;
            }
        }
        summary.push(o);
    }
    let count = |s: &str| summary.iter().filter(|o| o.status == s).count();
    let (ok, empty, failed) = (count("ok"), count("empty"), count("failed"));
    let doc = json!({ "scenes": summary, "ok": ok, "empty": empty, "failed": failed });
    write_file(
        &cfg.out.join("extract_summary.json"),
        &serde_json::to_string_pretty(&doc).expect("summary serializes"),
    )?;
    let skipped: usize = summary.iter().map(|o| o.skipped_pairs).sum();
    println!("extract: {ok} scenes ok, {empty} empty after filtering, {failed} failed, {skipped} skipped pairs");
    if failed > 0 {
        let names: Vec<&str> = summary
            .iter()
            .filter(|o| o.status == "failed")
            .map(|o| o.source.as_str())
            .collect();
        return Err(CliError::Input(format!(
            "{failed} scene(s) failed: {}",
            names.join(", ")
        )));
    }
    Ok(())
}

fn read_tables(dir: &Path) -> Result<Vec<NgtTable>, CliError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::Input(format!("{}: {e}; run `extract` first", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Input(format!(
            "{}: no NGT tables; run `extract` first",
            dir.display()
        )));
    }
    paths.par_iter().map(|p| read_ngt(p).map_err(input_err)).collect()
}

fn qa_err(e: QaError) -> CliError {
    match e {
        QaError::InsufficientCandidates(_) => CliError::Shortfall(e.to_string()),
        QaError::InvalidConfig(_) | QaError::InvalidBank(_) => CliError::Config(e.to_string()),
        _ => CliError::Input(e.to_string()),
    }
}

pub(super) fn generate(cfg: &PipelineConfig, stub_llm: bool) -> Result<(), CliError> {
    let bank = template_bank(cfg)?;
    let tables = read_tables(&cfg.ngt_dir())?;
    let gen = cfg.gen_config();
    let rule = generate_rule_records(&tables, &bank, &gen).map_err(qa_err)?;

    let mut llm = Vec::new();
    let mut rewrite_info = serde_json::Value::Null;
    if cfg.rewrite {
        let saq_path = cfg
            .saqs
            .as_ref()
            .ok_or_else(|| CliError::Config("rewrite is enabled but `saqs` is not set".into()))?;
        let saqs: Vec<SaqRecord> = read_jsonl(saq_path).map_err(input_err)?;
        let (client, model_id): (Box<dyn ServiceClient>, String) = if stub_llm {
            (Box::new(StubClient::synthesizing(cfg.seed)), STUB_MODEL_ID.into())
        } else {
            let settings = cfg.http_settings().ok_or_else(|| {
                CliError::Config("rewrite needs service_endpoint and service_model, or --stub-llm".into())
            })?;
            let model = settings.model.clone();
            (Box::new(HttpChatClient::new(settings)), model)
        };
        let rcfg = cfg.rewrite_config();
        let run = run_rewrite(&saqs, &rcfg, client.as_ref()).map_err(|e| match e {
            RewriteError::InvalidJob { .. } => CliError::Config(e.to_string()),
            _ => CliError::Input(e.to_string()),
        })?;
        write_jsonl(&cfg.out.join("rewrite_log.jsonl"), &run.log).map_err(input_err)?;
        if !run.shortfalls.is_empty() {
            let list: Vec<String> = run.shortfalls.iter().map(ToString::to_string).collect();
            return Err(CliError::Shortfall(format!("rewrite shortfall: {}", list.join(", "))));
        }
        let dropped = run.log.iter().filter(|l| l.outcome != "ok").count();
        rewrite_info = json!({
            "model_id": model_id,
            "prompt_version": PROMPT_VERSION,
            "pm_target": rcfg.pm_target,
            "fv_target": rcfg.fv_target,
            "n_options": rcfg.n_options,
            "affirmative_word": rcfg.affirmative,
            "negative_word": rcfg.negative,
            "jobs": run.log.len(),
            "dropped": dropped,
        });
        llm = run.records;
    }

    let dataset = assemble_dataset(vec![rule, llm]).map_err(qa_err)?;
    let mut strata: BTreeMap<String, usize> = BTreeMap::new();
    for (k, s) in &dataset.balance.strata {
        strata.insert(k.clone(), s.records);
    }
    let scenes: Vec<&str> = tables.iter().map(NgtTable::scene_id).collect();
    let manifest = json!({
        "tool": "numina",
        "tool_version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
        "template_bank_version": bank.version(),
        "prompt_version": PROMPT_VERSION,
        "system_prompt": SYSTEM_PROMPT,
        "excluded_labels": cfg.excluded_labels,
        "solver_tolerance": cfg.solver_tolerance,
        "generation": {
            "targets": gen.targets,
            "ambiguity_margin": gen.margin,
            "approx_inner": gen.approx_inner,
            "approx_outer": gen.approx_outer,
            "cot_variants": gen.cot,
        },
        "rewrite": rewrite_info,
        "scenes": scenes,
        "records": dataset.records.len(),
        "strata": strata,
    });
    write_file(&cfg.out.join("dataset.jsonl"), &dataset.to_jsonl())?;
    write_file(&cfg.out.join("balance.json"), &dataset.balance.to_json())?;
    write_file(
        &cfg.out.join("manifest.json"),
        &serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    tracing::info!(
        records = dataset.records.len(),
        scenes = scenes.len(),
        "dataset written"
    );
    println!(
        "generate: {} records from {} scenes",
        dataset.records.len(),
        scenes.len()
    );
    for (k, n) in &strata {
        println!("  {k:<22} {n}");
    }
    Ok(())
}

fn dataset_path(cfg: &PipelineConfig, dataset: Option<&Path>) -> PathBuf {
    dataset.map_or_else(|| cfg.out.join("dataset.jsonl"), Path::to_path_buf)
}

pub(super) fn score(cfg: &PipelineConfig, dataset: Option<&Path>, predictions: &Path) -> Result<(), CliError> {
    let records: Vec<QaRecord> = read_jsonl(&dataset_path(cfg, dataset)).map_err(input_err)?;
    let preds: Vec<PredictionRecord> = read_jsonl(predictions).map_err(input_err)?;
    let report = score_dataset(&records, &preds).map_err(input_err)?;
    let table = render_table(&report);
    write_file(&cfg.out.join("score.json"), &report.to_json())?;
    write_file(&cfg.out.join("score.txt"), &table)?;
    if !report.unparseable_predictions.is_empty() {
        tracing::warn!(
            count = report.unparseable_predictions.len(),
            "unparseable predictions counted as misses"
        );
    }
    print!("{table}");
    Ok(())
}

pub(super) fn selfcheck(cfg: &PipelineConfig, dataset: Option<&Path>) -> Result<(), CliError> {
    let records: Vec<QaRecord> = read_jsonl(&dataset_path(cfg, dataset)).map_err(input_err)?;
    let bank = template_bank(cfg)?;
    let report = run_selfcheck(&records, &bank);
    write_file(
        &cfg.out.join("selfcheck.json"),
        &serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    for p in &report.problems {
        tracing::error!(problem = %p, "selfcheck");
        println!("  {p}");
    }
    if report.passed {
        println!("selfcheck: PASS ({} records)", report.records);
        Ok(())
    } else {
        println!("selfcheck: FAIL ({} problems)", report.problems.len());
        Err(CliError::SelfCheck(format!(
            "{} problem(s) found",
            report.problems.len()
        )))
    }
}
