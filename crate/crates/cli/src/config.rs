//! INI pipeline configuration.
//!
//! ```ini
//! [paths]
//! definitions = defs.jsonl
//! trees = trees.jsonl
//! embeddings = vectors.txt
//! gazetteers = places.txt, regions.txt
//! stopwords = stopwords.txt
//! output_dir = out
//!
//! [rules]
//! noun_family_matching = true
//! temporal_head_nouns = century, year
//! purpose = false
//!
//! [entail]
//! max_depth = 5
//! beam = 1
//! pair_count = 3
//! accept_threshold = 0.0
//!
//! [graph]
//! bidirectional = false
//! ```
//!
//! Unknown sections and keys are errors. Relative paths resolve against the
//! config file's directory.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use defgraph::entail::EntailConfig;
use defgraph::kgraph::GraphPolicy;
use defgraph::labeler::RuleConfig;
use ini::Ini;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Paths {
    pub definitions: Option<PathBuf>,
    pub trees: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub gazetteers: Vec<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PipelineConfig {
    pub paths: Paths,
    pub rules: RuleConfig,
    pub entail: EntailConfig,
    pub graph: GraphPolicy,
}

fn parse_bool(section: &str, key: &str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => bail!("[{section}] {key}: expected a boolean, got `{v}`"),
    }
}

fn parse_num<T: std::str::FromStr>(section: &str, key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| anyhow!("[{section}] {key}: `{v}` is not a valid number"))
}

fn parse_list(v: &str) -> Vec<String> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect()
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let ini = Ini::load_from_file(path).with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_ini(&ini, &base)
    }

    pub fn from_ini(ini: &Ini, base: &Path) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        let resolve = |v: &str| {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        for (section, props) in ini.iter() {
            let section = section.unwrap_or("");
            for (key, value) in props.iter() {
                let value = value.trim();
                match (section, key) {
                    ("paths", "definitions") => cfg.paths.definitions = Some(resolve(value)),
                    ("paths", "trees") => cfg.paths.trees = Some(resolve(value)),
                    ("paths", "embeddings") => cfg.paths.embeddings = Some(resolve(value)),
                    ("paths", "gazetteers") => cfg.paths.gazetteers = parse_list(value).iter().map(|v| resolve(v)).collect(),
                    ("paths", "stopwords") => cfg.paths.stopwords = Some(resolve(value)),
                    ("paths", "output_dir") => cfg.paths.output_dir = Some(resolve(value)),
                    ("rules", "noun_family_matching") => cfg.rules.noun_family_matching = parse_bool(section, key, value)?,
                    ("rules", "temporal_head_nouns") => cfg.rules.temporal_head_nouns = parse_list(value),
                    ("rules", "location_prepositions") => cfg.rules.location_prepositions = parse_list(value),
                    ("rules", "origin_prepositions") => cfg.rules.origin_prepositions = parse_list(value),
                    ("rules", "purpose_prepositions") => cfg.rules.purpose_prepositions = parse_list(value),
                    ("rules", "location_gazetteer") => cfg.rules.location_gazetteer = parse_list(value),
                    ("rules", "supertype") => cfg.rules.rules.supertype = parse_bool(section, key, value)?,
                    ("rules", "differentia_event") => cfg.rules.rules.differentia_event = parse_bool(section, key, value)?,
                    ("rules", "event_components") => cfg.rules.rules.event_components = parse_bool(section, key, value)?,
                    ("rules", "differentia_quality") => cfg.rules.rules.differentia_quality = parse_bool(section, key, value)?,
                    ("rules", "purpose") => cfg.rules.rules.purpose = parse_bool(section, key, value)?,
                    ("rules", "fallback") => cfg.rules.rules.fallback = parse_bool(section, key, value)?,
                    ("entail", "max_depth") => cfg.entail.max_depth = parse_num(section, key, value)?,
                    ("entail", "beam") => cfg.entail.beam = parse_num(section, key, value)?,
                    ("entail", "pair_count") => cfg.entail.pair_count = parse_num(section, key, value)?,
                    ("entail", "accept_threshold") => cfg.entail.accept_threshold = parse_num(section, key, value)?,
                    ("graph", "bidirectional") => cfg.graph.bidirectional = parse_bool(section, key, value)?,
                    ("", k) => bail!("key `{k}` outside any section"),
                    (s, k) => bail!("unknown config key `{k}` in [{s}]"),
                }
            }
        }
        cfg.check()?;
        Ok(cfg)
    }

    /// Validate the rule and entailment settings and make sure every input
    /// path exists. The output directory may be created later.
    pub fn check(&self) -> Result<()> {
        self.rules.validate().context("[rules]")?;
        self.entail.validate().context("[entail]")?;
        let inputs = [&self.paths.definitions, &self.paths.trees, &self.paths.embeddings, &self.paths.stopwords];
        for p in inputs.into_iter().flatten().chain(self.paths.gazetteers.iter()) {
            if !p.exists() {
                bail!("configured path {} does not exist", p.display());
            }
        }
        Ok(())
    }
}
