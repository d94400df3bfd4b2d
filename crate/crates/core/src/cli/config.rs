//! Flat TOML pipeline configuration. Every key is optional; command-line
//! flags override `seed`, `out` and `jobs`.
//!
//! ```toml
//! scenes = ["data/scenes/*.json", "data/scannet/scene*"]
//! excluded_labels = ["item", "object"]
//! seed = 7
//! out = "out"
//! jobs = 0                    # 0 = one worker per core
//! solver_tolerance = 1e-9
//! ambiguity_margin = 0.05
//! approx_inner = 0.1
//! approx_outer = 0.3
//! cot_variants = true
//! target_fv_quantity = 100
//! target_ni_volume = 100
//! rewrite = true
//! saqs = "out/saqs.jsonl"
//! rewrite_pm_target = 200
//! rewrite_fv_target = 200
//! service_endpoint = "http://localhost:8000/v1/chat/completions"
//! service_model = "my-model"
//! ```

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::geometry::DEFAULT_TOLERANCE;
use crate::qa::{GenConfig, Targets, LETTERS};
use crate::rewrite::{HttpSettings, RewriteConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Globs matching neutral scene JSON files or ScanNet-style scene folders.
    pub scenes: Vec<String>,
    pub excluded_labels: Vec<String>,
    pub seed: u64,
    pub out: PathBuf,
    pub jobs: usize,
    /// NGT directory; defaults to `<out>/ngt`.
    pub ngt_dir: Option<PathBuf>,
    pub solver_tolerance: f64,
    pub ambiguity_margin: f64,
    pub approx_inner: f64,
    pub approx_outer: f64,
    pub cot_variants: bool,
    pub target_fv_quantity: usize,
    pub target_fv_distance: usize,
    pub target_fv_volume: usize,
    pub target_ni_quantity: usize,
    pub target_ni_distance: usize,
    pub target_ni_volume: usize,
    /// Template bank JSON; the built-in bank when absent.
    pub template_bank: Option<PathBuf>,

    pub rewrite: bool,
    pub saqs: Option<PathBuf>,
    pub rewrite_pm_target: usize,
    pub rewrite_fv_target: usize,
    pub rewrite_options: usize,
    pub rewrite_in_flight: usize,
    pub affirmative_word: String,
    pub negative_word: String,
    pub service_endpoint: Option<String>,
    pub service_model: Option<String>,
    pub service_timeout_secs: u64,
    pub service_retries: u32,
    pub service_temperature: Option<f64>,
    pub service_max_tokens: Option<u32>,
    pub service_api_key_env: Option<String>,

    pub synth_scenes: usize,
    pub synth_instances: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let gen = GenConfig::default();
        Self {
            scenes: Vec::new(),
            excluded_labels: vec!["item".into(), "object".into()],
            seed: 0,
            out: PathBuf::from("out"),
            jobs: 0,
            ngt_dir: None,
            solver_tolerance: DEFAULT_TOLERANCE,
            ambiguity_margin: gen.margin,
            approx_inner: gen.approx_inner,
            approx_outer: gen.approx_outer,
            cot_variants: true,
            target_fv_quantity: 100,
            target_fv_distance: 100,
            target_fv_volume: 100,
            target_ni_quantity: 100,
            target_ni_distance: 100,
            target_ni_volume: 100,
            template_bank: None,
            rewrite: false,
            saqs: None,
            rewrite_pm_target: 0,
            rewrite_fv_target: 0,
            rewrite_options: LETTERS.len(),
            rewrite_in_flight: 4,
            affirmative_word: "yes".into(),
            negative_word: "no".into(),
            service_endpoint: None,
            service_model: None,
            service_timeout_secs: 60,
            service_retries: 2,
            service_temperature: None,
            service_max_tokens: None,
            service_api_key_env: None,
            synth_scenes: 50,
            synth_instances: 40,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn validate(&self) -> Result<(), String> {
        self.gen_config().validate()?;
        if !(self.solver_tolerance > 0.0 && self.solver_tolerance < 1.0) {
            return Err(format!(
                "solver_tolerance must lie in (0, 1), got {}",
                self.solver_tolerance
            ));
        }
        if !(2..=LETTERS.len()).contains(&self.rewrite_options) {
            return Err("rewrite_options must be between 2 and 5".into());
        }
        let (a, n) = (self.affirmative_word.trim(), self.negative_word.trim());
        if a.is_empty() || n.is_empty() || a.eq_ignore_ascii_case(n) {
            return Err("affirmative_word and negative_word must be non-empty and distinct".into());
        }
        if self.synth_scenes == 0 || self.synth_instances == 0 {
            return Err("synth_scenes and synth_instances must be positive".into());
        }
        Ok(())
    }

    pub fn ngt_dir(&self) -> PathBuf {
        self.ngt_dir.clone().unwrap_or_else(|| self.out.join("ngt"))
    }

    pub fn targets(&self) -> Targets {
        Targets {
            fv_quantity: self.target_fv_quantity,
            fv_distance: self.target_fv_distance,
            fv_volume: self.target_fv_volume,
            ni_quantity: self.target_ni_quantity,
            ni_distance: self.target_ni_distance,
            ni_volume: self.target_ni_volume,
        }
    }

    pub fn gen_config(&self) -> GenConfig {
        GenConfig {
            targets: self.targets(),
            margin: self.ambiguity_margin,
            approx_inner: self.approx_inner,
            approx_outer: self.approx_outer,
            cot: self.cot_variants,
            seed: self.seed,
        }
    }

    pub fn rewrite_config(&self) -> RewriteConfig {
        RewriteConfig {
            pm_target: self.rewrite_pm_target,
            fv_target: self.rewrite_fv_target,
            n_options: self.rewrite_options,
            affirmative: self.affirmative_word.trim().into(),
            negative: self.negative_word.trim().into(),
            in_flight: self.rewrite_in_flight.max(1),
            seed: self.seed,
        }
    }

    /// Service settings, when both endpoint and model are configured.
    pub fn http_settings(&self) -> Option<HttpSettings> {
        Some(HttpSettings {
            endpoint: self.service_endpoint.clone()?,
            model: self.service_model.clone()?,
            timeout_secs: self.service_timeout_secs,
            retries: self.service_retries,
            temperature: self.service_temperature,
            max_tokens: self.service_max_tokens,
            api_key_env: self.service_api_key_env.clone(),
        })
    }
}
