//! Slot-planned rule generation.
//!
//! For every numeric (task, category) stratum the planner first fixes, per
//! slot, the template and (for FV) the answer, using an RNG derived from the
//! master seed and the stratum name: an exactly balanced yes/no sequence is
//! shuffled, and templates are dealt in blocks of fresh permutations. Slot `s`
//! is then owned by scene `s mod S` (scenes in id order).
//!
//! Scenes fill their slots in parallel. Each scene owns an RNG derived from
//! the master seed and its scene id, and consumes it in a fixed order: strata
//! in the order FV quantity, distance, volume, then NI quantity, distance,
//! volume; slots ascending; per slot first the candidate draw, then (for
//! approximate-equality templates only) the operand-order coin. A slot its
//! scene cannot fill is offered to the following scenes in turn after the
//! parallel pass, in slot order, continuing each scene's RNG.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet};

use super::balance::{balance_report, BalanceReport};
use super::cot::gen_cot_variant;
use super::format::{display_count, display_value};
use super::template::{substitute, Comparator, Template, TemplateBank};
use super::{Category, Provenance, QaError, QaRecord, Shortfall, Task, Variant};
use crate::jsonl::to_jsonl_string;
use crate::ngt::NgtTable;
use crate::seed::rng_for;

/// NI answers are only emitted when their two-decimal display stays within
/// this relative error of the ground truth, so the displayed answer itself
/// scores as correct at the tightest threshold.
const NI_DISPLAY_TOLERANCE: f64 = 0.05;

const REJECTION_TRIES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Targets {
    pub fv_quantity: usize,
    pub fv_distance: usize,
    pub fv_volume: usize,
    pub ni_quantity: usize,
    pub ni_distance: usize,
    pub ni_volume: usize,
}

impl Targets {
    pub const STRATA: [(Task, Category); 6] = [
        (Task::FV, Category::Quantity),
        (Task::FV, Category::Distance),
        (Task::FV, Category::Volume),
        (Task::NI, Category::Quantity),
        (Task::NI, Category::Distance),
        (Task::NI, Category::Volume),
    ];

    pub fn uniform(n: usize) -> Self {
        Self {
            fv_quantity: n,
            fv_distance: n,
            fv_volume: n,
            ni_quantity: n,
            ni_distance: n,
            ni_volume: n,
        }
    }

    pub fn get(&self, task: Task, category: Category) -> usize {
        match (task, category) {
            (Task::FV, Category::Quantity) => self.fv_quantity,
            (Task::FV, Category::Distance) => self.fv_distance,
            (Task::FV, Category::Volume) => self.fv_volume,
            (Task::NI, Category::Quantity) => self.ni_quantity,
            (Task::NI, Category::Distance) => self.ni_distance,
            (Task::NI, Category::Volume) => self.ni_volume,
            _ => 0,
        }
    }

    fn only(task: Task, category: Category, n: usize) -> Self {
        let mut t = Self::default();
        match (task, category) {
            (Task::FV, Category::Quantity) => t.fv_quantity = n,
            (Task::FV, Category::Distance) => t.fv_distance = n,
            (Task::FV, Category::Volume) => t.fv_volume = n,
            (Task::NI, Category::Quantity) => t.ni_quantity = n,
            (Task::NI, Category::Distance) => t.ni_distance = n,
            (Task::NI, Category::Volume) => t.ni_volume = n,
            _ => {}
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    /// Original FV records (contrapositives come on top) and NI records per stratum.
    pub targets: Targets,
    /// Minimum relative gap between values compared by an ordering predicate.
    pub margin: f64,
    /// Values count as approximately equal when min/max >= 1 - approx_inner.
    pub approx_inner: f64,
    /// Values count as clearly different when min/max < 1 - approx_outer.
    pub approx_outer: f64,
    /// Emit chain-of-thought variants for FV originals and NI volume records.
    pub cot: bool,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            targets: Targets::uniform(100),
            margin: 0.05,
            approx_inner: 0.1,
            approx_outer: 0.3,
            cot: true,
            seed: 0,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("margin", self.margin),
            ("approx_inner", self.approx_inner),
            ("approx_outer", self.approx_outer),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(format!("{name} must lie in (0, 1), got {v}"));
            }
        }
        if self.approx_outer <= self.approx_inner {
            return Err("approx_outer must exceed approx_inner".into());
        }
        Ok(())
    }
}

/// A finished dataset with its balance report.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<QaRecord>,
    pub balance: BalanceReport,
}

impl Dataset {
    pub fn to_jsonl(&self) -> String {
        to_jsonl_string(&self.records)
    }
}

/// Merges record streams in (scene_id, qa_id) order and computes balance.
pub fn assemble_dataset(streams: Vec<Vec<QaRecord>>) -> Result<Dataset, QaError> {
    let mut records: Vec<QaRecord> = streams.into_iter().flatten().collect();
    records.sort_by(|a, b| (&a.scene_id, &a.qa_id).cmp(&(&b.scene_id, &b.qa_id)));
    let mut ids = HashSet::new();
    for r in &records {
        if !ids.insert(r.qa_id.as_str()) {
            return Err(QaError::InconsistentRecord {
                qa_id: r.qa_id.clone(),
                detail: "duplicate qa_id".into(),
            });
        }
    }
    let balance = balance_report(&records);
    Ok(Dataset { records, balance })
}

/// FV records (originals, contrapositives and optional CoT variants) for one
/// category of one scene.
pub fn gen_fv_numeric(
    ngt: &NgtTable,
    bank: &TemplateBank,
    cfg: &GenConfig,
    category: Category,
    n: usize,
) -> Result<Vec<QaRecord>, QaError> {
    let cfg = GenConfig {
        targets: Targets::only(Task::FV, category, n),
        ..cfg.clone()
    };
    generate_rule_records(std::slice::from_ref(ngt), bank, &cfg)
}

/// NI records for one category of one scene.
pub fn gen_ni(
    ngt: &NgtTable,
    bank: &TemplateBank,
    cfg: &GenConfig,
    category: Category,
    n: usize,
) -> Result<Vec<QaRecord>, QaError> {
    let cfg = GenConfig {
        targets: Targets::only(Task::NI, category, n),
        ..cfg.clone()
    };
    generate_rule_records(std::slice::from_ref(ngt), bank, &cfg)
}

/// Generates every rule-based stratum over all scenes. Fails with the
/// per-stratum shortfall when any target cannot be met.
pub fn generate_rule_records(
    tables: &[NgtTable],
    bank: &TemplateBank,
    cfg: &GenConfig,
) -> Result<Vec<QaRecord>, QaError> {
    cfg.validate().map_err(QaError::InvalidConfig)?;
    let mut order: Vec<&NgtTable> = tables.iter().collect();
    order.sort_by(|a, b| a.scene_id().cmp(b.scene_id()));

    let mut plans = Vec::new();
    for (task, category) in Targets::STRATA {
        let n = cfg.targets.get(task, category);
        if n == 0 {
            plans.push(Vec::new());
            continue;
        }
        let templates = bank.stratum(task, category);
        if templates.is_empty() {
            return Err(QaError::InvalidBank(format!("no templates for {task}/{category}")));
        }
        if order.is_empty() {
            return Err(QaError::InsufficientCandidates(vec![Shortfall {
                stratum: format!("{task}/{category}"),
                requested: n,
                produced: 0,
            }]));
        }
        plans.push(plan_stratum(task, category, n, &templates, cfg.seed));
    }

    let mut states: Vec<SceneState> = order.iter().map(|t| SceneState::new(t, cfg)).collect();
    let n_scenes = states.len().max(1);

    // Parallel pass: each scene fills its own slots.
    let first: Vec<(Vec<Vec<QaRecord>>, Vec<Vec<usize>>)> = states
        .par_iter_mut()
        .enumerate()
        .map(|(k, state)| {
            let mut out = Vec::new();
            let mut leftovers = Vec::new();
            for (si, plan) in plans.iter().enumerate() {
                let mut left = Vec::new();
                for slot in plan.iter().filter(|s| s.index % n_scenes == k) {
                    match state.fill(slot, Targets::STRATA[si], bank, cfg) {
                        Some(recs) => out.push(recs),
                        None => left.push(slot.index),
                    }
                }
                leftovers.push(left);
            }
            (out, leftovers)
        })
        .collect();

    let mut records: Vec<QaRecord> = Vec::new();
    let mut leftover_by_stratum: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); plans.len()];
    for (out, leftovers) in first {
        records.extend(out.into_iter().flatten());
        for (si, left) in leftovers.into_iter().enumerate() {
            leftover_by_stratum[si].extend(left);
        }
    }

    // Sequential fallback, deterministic in slot order.
    let mut shortfalls = Vec::new();
    for (si, left) in leftover_by_stratum.iter().enumerate() {
        let mut missing = 0;
        for &slot_index in left {
            let slot = &plans[si][slot_index];
            let home = slot_index % n_scenes;
            let mut filled = false;
            for off in 1..n_scenes {
                let k = (home + off) % n_scenes;
                if let Some(recs) = states[k].fill(slot, Targets::STRATA[si], bank, cfg) {
                    records.extend(recs);
                    filled = true;
                    break;
                }
            }
            if !filled {
                missing += 1;
            }
        }
        if missing > 0 {
            let (task, category) = Targets::STRATA[si];
            let requested = plans[si].len();
            shortfalls.push(Shortfall {
                stratum: format!("{task}/{category}"),
                requested,
                produced: requested - missing,
            });
        }
    }
    if !shortfalls.is_empty() {
        return Err(QaError::InsufficientCandidates(shortfalls));
    }
    records.sort_by(|a, b| (&a.scene_id, &a.qa_id).cmp(&(&b.scene_id, &b.qa_id)));
    Ok(records)
}

struct Slot<'b> {
    index: usize,
    template: &'b Template,
    answer: Option<bool>,
}

fn plan_stratum<'b>(task: Task, category: Category, n: usize, templates: &[&'b Template], seed: u64) -> Vec<Slot<'b>> {
    let mut rng = rng_for(seed, &format!("plan/{task}/{category}"));
    let answers: Vec<Option<bool>> = if task == Task::FV {
        let mut a: Vec<bool> = (0..n).map(|i| i < n / 2).collect();
        if n % 2 == 1 {
            a[n - 1] = rng.gen();
        }
        a.shuffle(&mut rng);
        a.into_iter().map(Some).collect()
    } else {
        vec![None; n]
    };
    let mut dealt = Vec::with_capacity(n);
    while dealt.len() < n {
        let mut block: Vec<&Template> = templates.to_vec();
        block.shuffle(&mut rng);
        dealt.extend(block);
    }
    answers
        .into_iter()
        .zip(dealt)
        .enumerate()
        .map(|(index, (answer, template))| Slot {
            index,
            template,
            answer,
        })
        .collect()
}

#[derive(Debug, Clone)]
struct Item {
    labels: Vec<String>,
    value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Ordered,
    Close,
    Far,
}

impl Class {
    fn index(self) -> usize {
        self as usize
    }
}

struct Pool {
    items: Vec<Item>,
    /// Remaining NI candidates (indices into `items`).
    ni_left: Vec<usize>,
    used_pairs: HashSet<(usize, usize)>,
    exhausted: [bool; 3],
}

impl Pool {
    fn new(items: Vec<Item>, numeric_display: bool) -> Self {
        let ni_left = (0..items.len())
            .filter(|&i| !numeric_display || display_is_faithful(items[i].value))
            .collect();
        Self {
            items,
            ni_left,
            used_pairs: HashSet::new(),
            exhausted: [false; 3],
        }
    }
}

fn display_is_faithful(v: f64) -> bool {
    let shown: f64 = display_value(v).parse().expect("display renders a number");
    if v == 0.0 {
        shown == 0.0
    } else {
        (shown - v).abs() < NI_DISPLAY_TOLERANCE * v.abs()
    }
}

fn pair_in_class(a: f64, b: f64, class: Class, cfg: &GenConfig) -> bool {
    let hi = a.abs().max(b.abs());
    let lo = a.abs().min(b.abs());
    if !(hi > 0.0) {
        return false;
    }
    match class {
        Class::Ordered => (a - b).abs() >= cfg.margin * hi,
        Class::Close => lo / hi >= 1.0 - cfg.approx_inner,
        Class::Far => lo / hi < 1.0 - cfg.approx_outer,
    }
}

struct SceneState<'a> {
    table: &'a NgtTable,
    rng: ChaCha8Rng,
    pools: [Pool; 3],
}

fn category_slot(category: Category) -> usize {
    match category {
        Category::Quantity => 0,
        Category::Distance => 1,
        Category::Volume => 2,
        Category::NonNumeric => unreachable!("rule generation is numeric only"),
    }
}

impl<'a> SceneState<'a> {
    fn new(table: &'a NgtTable, cfg: &GenConfig) -> Self {
        let quantity: Vec<Item> = table
            .label_counts()
            .iter()
            .map(|(label, &count)| Item {
                labels: vec![label.clone()],
                value: count as f64,
            })
            .collect();
        let unique = table.unique_referents();
        let volume: Vec<Item> = unique
            .iter()
            .map(|i| Item {
                labels: vec![i.label.clone()],
                value: i.volume,
            })
            .collect();
        let mut distance = Vec::new();
        for (x, a) in unique.iter().enumerate() {
            for b in &unique[x + 1..] {
                if let Some(d) = table.distance(&a.instance_id, &b.instance_id) {
                    distance.push(Item {
                        labels: vec![a.label.clone(), b.label.clone()],
                        value: d,
                    });
                }
            }
        }
        Self {
            table,
            rng: rng_for(cfg.seed, &format!("scene/{}", table.scene_id())),
            pools: [
                Pool::new(quantity, false),
                Pool::new(distance, true),
                Pool::new(volume, true),
            ],
        }
    }

    fn fill(
        &mut self,
        slot: &Slot,
        (task, category): (Task, Category),
        bank: &TemplateBank,
        cfg: &GenConfig,
    ) -> Option<Vec<QaRecord>> {
        match task {
            Task::FV => self.fill_fv(slot, category, bank, cfg),
            Task::NI => self.fill_ni(slot, category, bank, cfg),
            Task::PM => None,
        }
    }

    fn draw_pair(&mut self, category: Category, class: Class, cfg: &GenConfig) -> Option<(usize, usize)> {
        let pool = &mut self.pools[category_slot(category)];
        let n = pool.items.len();
        if n < 2 || pool.exhausted[class.index()] {
            return None;
        }
        let rng = &mut self.rng;
        let fits = |pool: &Pool, i: usize, j: usize| {
            !pool.used_pairs.contains(&(i.min(j), i.max(j)))
                && pair_in_class(pool.items[i].value, pool.items[j].value, class, cfg)
        };
        for _ in 0..REJECTION_TRIES {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            if fits(pool, i, j) {
                pool.used_pairs.insert((i.min(j), i.max(j)));
                return Some((i, j));
            }
        }
        let start = rng.gen_range(0..n);
        for di in 0..n {
            let i = (start + di) % n;
            for j in i + 1..n {
                if fits(pool, i, j) {
                    pool.used_pairs.insert((i, j));
                    return Some((i, j));
                }
            }
        }
        pool.exhausted[class.index()] = true;
        None
    }

    fn fill_fv(
        &mut self,
        slot: &Slot,
        category: Category,
        bank: &TemplateBank,
        cfg: &GenConfig,
    ) -> Option<Vec<QaRecord>> {
        let t = slot.template;
        let cmp = t.comparator.expect("validated FV template");
        let want = slot.answer.expect("FV slots carry an answer");
        let class = match (cmp, want) {
            (Comparator::ApproxEqual, true) | (Comparator::NotApproxEqual, false) => Class::Close,
            (Comparator::ApproxEqual, false) | (Comparator::NotApproxEqual, true) => Class::Far,
            _ => Class::Ordered,
        };
        let (i, j) = self.draw_pair(category, class, cfg)?;
        let pool = &self.pools[category_slot(category)];
        let (x, y) = if cmp.is_approx() {
            if self.rng.gen::<bool>() {
                (j, i)
            } else {
                (i, j)
            }
        } else if cmp.holds(pool.items[i].value, pool.items[j].value, false) == want {
            (i, j)
        } else {
            (j, i)
        };
        let referents: Vec<String> = pool.items[x]
            .labels
            .iter()
            .chain(&pool.items[y].labels)
            .cloned()
            .collect();
        let bindings: Vec<&str> = referents.iter().map(String::as_str).collect();
        let question = substitute(&t.template_id, &t.text, t.arity, &bindings, &[]).ok()?;
        let cp_text = t.cp_text.as_deref().expect("validated FV template");
        let cp_question = substitute(&t.template_id, cp_text, t.arity, &bindings, &[]).ok()?;

        let scene_id = self.table.scene_id().to_string();
        let qa_id = format!("{}:FV-{}:{:05}", scene_id, category, slot.index);
        let cp_id = format!("{qa_id}.cp");
        let yes_no = |b: bool| if b { "yes" } else { "no" }.to_string();
        let original = QaRecord {
            qa_id: qa_id.clone(),
            scene_id: scene_id.clone(),
            task: Task::FV,
            category,
            question: format!("{} {}", question, t.answer_suffix),
            answer: yes_no(want),
            gt_value: None,
            unit: None,
            cp_link: Some(cp_id.clone()),
            variant: Variant::Plain,
            provenance: Provenance::Rule,
            template_id: t.template_id.clone(),
            referents: referents.clone(),
        };
        let contrapositive = QaRecord {
            qa_id: cp_id,
            question: format!("{} {}", cp_question, t.answer_suffix),
            answer: yes_no(!want),
            cp_link: Some(qa_id),
            ..original.clone()
        };
        let mut out = vec![original, contrapositive];
        if cfg.cot {
            out.push(gen_cot_variant(&out[0], self.table, bank).ok()?);
        }
        Some(out)
    }

    fn fill_ni(
        &mut self,
        slot: &Slot,
        category: Category,
        bank: &TemplateBank,
        cfg: &GenConfig,
    ) -> Option<Vec<QaRecord>> {
        let pool = &mut self.pools[category_slot(category)];
        if pool.ni_left.is_empty() {
            return None;
        }
        let pick = self.rng.gen_range(0..pool.ni_left.len());
        let item = pool.items[pool.ni_left.swap_remove(pick)].clone();
        let t = slot.template;
        let bindings: Vec<&str> = item.labels.iter().map(String::as_str).collect();
        let question = substitute(&t.template_id, &t.text, t.arity, &bindings, &[]).ok()?;
        let answer = match category {
            Category::Quantity => display_count(item.value as usize),
            _ => display_value(item.value),
        };
        let record = QaRecord {
            qa_id: format!("{}:NI-{}:{:05}", self.table.scene_id(), category, slot.index),
            scene_id: self.table.scene_id().to_string(),
            task: Task::NI,
            category,
            question: format!("{} {}", question, t.answer_suffix),
            answer,
            gt_value: Some(item.value),
            unit: category.unit().map(str::to_string),
            cp_link: None,
            variant: Variant::Plain,
            provenance: Provenance::Rule,
            template_id: t.template_id.clone(),
            referents: item.labels,
        };
        let mut out = vec![record];
        if cfg.cot && category == Category::Volume {
            out.push(gen_cot_variant(&out[0], self.table, bank).ok()?);
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Aabb;
    use crate::ngt::NgtTable;
    use crate::qa::builtin_bank;
    use std::path::Path;

    fn table(instances: &[(&str, &str, f64)], pairs: &[(&str, &str, f64)]) -> NgtTable {
        let inst: Vec<serde_json::Value> = instances
            .iter()
            .map(|(id, label, side)| {
                let b = Aabb {
                    min: [0.0; 3].into(),
                    max: [*side, 1.0, 1.0].into(),
                };
                serde_json::json!({
                    "instance_id": id, "label": label, "centroid": [side / 2.0, 0.5, 0.5],
                    "aabb": b, "dims": [side, 1.0, 1.0], "volume": side
                })
            })
            .collect();
        let mut all = Vec::new();
        for (x, (a, _, _)) in instances.iter().enumerate() {
            for (b, _, _) in &instances[x + 1..] {
                let d = pairs
                    .iter()
                    .find(|(p, q, _)| (p == a && q == b) || (p == b && q == a))
                    .map_or(1.0, |p| p.2);
                all.push(serde_json::json!({"a": a, "b": b, "distance": d}));
            }
        }
        let text = serde_json::json!({
            "scene_id": "s", "instances": inst, "pairs": all, "skipped_pairs": []
        })
        .to_string();
        NgtTable::from_json(&text, Path::new("mem")).unwrap()
    }

    fn stools_and_cabinets() -> NgtTable {
        let ids: Vec<String> = (0..9).map(|i| format!("{i}")).collect();
        let inst: Vec<(&str, &str, f64)> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), if i < 4 { "stool" } else { "cabinet" }, 1.0))
            .collect();
        table(&inst, &[])
    }

    #[test]
    fn stool_cabinet_fv_pair() {
        let t = stools_and_cabinets();
        let bank = builtin_bank();
        let cfg = GenConfig {
            cot: false,
            ..GenConfig::default()
        };
        let recs = gen_fv_numeric(&t, &bank, &cfg, Category::Quantity, 1).unwrap();
        assert_eq!(recs.len(), 2);
        for r in &recs {
            let partner = recs.iter().find(|p| Some(&p.qa_id) == r.cp_link.as_ref()).unwrap();
            assert_eq!(partner.cp_link.as_ref(), Some(&r.qa_id));
            assert_ne!(partner.answer, r.answer);
        }
        // Only one label pair exists, so a second slot cannot be filled.
        assert!(gen_fv_numeric(&t, &bank, &cfg, Category::Quantity, 2).is_err());
    }

    #[test]
    fn fewer_template_answers_from_counts() {
        let t = stools_and_cabinets();
        let only_fewer = TemplateBank::new("t", vec![builtin_bank().get("fv-quantity-01").unwrap().clone()]).unwrap();
        let cfg = GenConfig {
            cot: false,
            ..GenConfig::default()
        };
        let recs = gen_fv_numeric(&t, &only_fewer, &cfg, Category::Quantity, 1).unwrap();
        let ori = recs.iter().find(|r| !r.is_contrapositive()).unwrap();
        let cp = recs.iter().find(|r| r.is_contrapositive()).unwrap();
        let stool_first = ori.referents[0] == "stool";
        assert_eq!(ori.answer == "yes", stool_first);
        assert!(ori.question.starts_with(&format!(
            "Are there fewer {} than {}?",
            ori.referents[0], ori.referents[1]
        )));
        assert!(cp.question.contains("greater than or equal to"));
    }

    #[test]
    fn ties_are_skipped() {
        let t = table(
            &[
                ("1", "chair", 1.0),
                ("2", "chair", 1.0),
                ("3", "lamp", 1.0),
                ("4", "lamp", 1.0),
            ],
            &[
                ("1", "2", 1.0),
                ("1", "3", 1.0),
                ("1", "4", 1.0),
                ("2", "3", 1.0),
                ("2", "4", 1.0),
                ("3", "4", 1.0),
            ],
        );
        let err = gen_fv_numeric(&t, &builtin_bank(), &GenConfig::default(), Category::Quantity, 1).unwrap_err();
        assert!(matches!(err, QaError::InsufficientCandidates(_)));
    }

    #[test]
    fn ni_count_and_rounding() {
        let t = table(
            &[
                ("1", "chair", 1.0),
                ("2", "chair", 1.0),
                ("3", "bed", 3.812688),
                ("4", "sofa", 2.0),
            ],
            &[
                ("1", "2", 1.0),
                ("1", "3", 1.0),
                ("1", "4", 1.0),
                ("2", "3", 1.0),
                ("2", "4", 1.0),
                ("3", "4", 1.035),
            ],
        );
        let bank = builtin_bank();
        let cfg = GenConfig {
            cot: false,
            ..GenConfig::default()
        };
        let q = gen_ni(&t, &bank, &cfg, Category::Quantity, 3).unwrap();
        let chair = q.iter().find(|r| r.referents == ["chair"]).unwrap();
        assert_eq!(chair.answer, "2");
        assert_eq!(chair.gt_value, Some(2.0));
        let d = gen_ni(&t, &bank, &cfg, Category::Distance, 1).unwrap();
        assert_eq!(d[0].answer, "1.04");
        assert_eq!(d[0].gt_value, Some(1.035));
        assert_eq!(d[0].unit.as_deref(), Some("meters"));
        let v = gen_ni(&t, &bank, &cfg, Category::Volume, 2).unwrap();
        let bed = v.iter().find(|r| r.referents == ["bed"]).unwrap();
        assert_eq!(bed.answer, "3.81");
    }

    #[test]
    fn approx_bands_respected() {
        // volumes 10.41 vs 4.88 are far apart; 2.0 vs 2.1 are close; 2.0 vs 2.5 sit in the gap.
        let t = table(
            &[
                ("1", "curtain", 10.41),
                ("2", "cabinet", 4.88),
                ("3", "desk", 2.0),
                ("4", "bench", 2.1),
                ("5", "crate", 2.5),
            ],
            &[],
        );
        assert!(pair_in_class(10.41, 4.88, Class::Far, &GenConfig::default()));
        assert!(pair_in_class(2.0, 2.1, Class::Close, &GenConfig::default()));
        assert!(!pair_in_class(2.0, 2.5, Class::Close, &GenConfig::default()));
        assert!(!pair_in_class(2.0, 2.5, Class::Far, &GenConfig::default()));
        let approx = TemplateBank::new("t", vec![builtin_bank().get("fv-volume-09").unwrap().clone()]).unwrap();
        let cfg = GenConfig {
            cot: false,
            ..GenConfig::default()
        };
        let recs = gen_fv_numeric(&t, &approx, &cfg, Category::Volume, 2).unwrap();
        for r in recs.iter().filter(|r| !r.is_contrapositive()) {
            let vol = |l: &str| t.instances().iter().find(|i| i.label == l).unwrap().volume;
            let (a, b) = (vol(&r.referents[0]), vol(&r.referents[1]));
            let ratio = a.min(b) / a.max(b);
            if r.answer == "yes" {
                assert!(ratio >= 0.9);
            } else {
                assert!(ratio < 0.7);
            }
        }
    }

    #[test]
    fn deterministic() {
        let t = stools_and_cabinets();
        let bank = builtin_bank();
        let cfg = GenConfig::default();
        let a = gen_fv_numeric(&t, &bank, &cfg, Category::Quantity, 1).unwrap();
        let b = gen_fv_numeric(&t, &bank, &cfg, Category::Quantity, 1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_margins() {
        let cfg = GenConfig {
            approx_outer: 0.05,
            ..GenConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
