use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use defgraph::annotation::{self, AnnotatedDefinition};
use defgraph::distsem::{load_embeddings, load_stopwords};
use defgraph::entail::{entail_tagged, Verdict};
use defgraph::kgraph::{build_graph, parse_ntriples, serialize_ntriples};
use defgraph::labeler::{preannotate_tagged, recover_supertype, RecoveryOutcome, RuleConfig};
use defgraph::treebank::parse_tree;
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::records::{
    file_stem, lines, parse_line, read_jsonl, read_text, read_trees, strip_gloss, to_line, write_output, AnnotatedRecord,
    PairRecord, RawDefinition,
};
use crate::InputError;

pub struct Context {
    pub cfg: PipelineConfig,
    pub strip_gloss: bool,
}

fn required(arg: Option<PathBuf>, fallback: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    arg.or_else(|| fallback.clone())
        .ok_or_else(|| InputError(format!("no {what} given (flag or [paths] entry)")).into())
}

/// Rule config with gazetteer files merged in.
fn rule_config(cfg: &PipelineConfig) -> Result<RuleConfig> {
    let mut rules = cfg.rules.clone();
    for path in &cfg.paths.gazetteers {
        let text = read_text(path)?;
        rules.location_gazetteer.extend(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase),
        );
    }
    rules.location_gazetteer.sort();
    rules.location_gazetteer.dedup();
    Ok(rules)
}

fn write_brat(dir: &Path, def: &AnnotatedDefinition) -> Result<(), String> {
    let (txt, ann) = annotation::export_brat(def).map_err(|e| e.to_string())?;
    let stem = file_stem(&def.id);
    fs::write(dir.join(format!("{stem}.txt")), txt).map_err(|e| e.to_string())?;
    fs::write(dir.join(format!("{stem}.ann")), ann).map_err(|e| e.to_string())
}

enum Labeled {
    Done(AnnotatedRecord),
    Skipped(String),
}

pub fn preannotate(
    ctx: &Context,
    input: Option<PathBuf>,
    trees: Option<PathBuf>,
    out_dir: Option<PathBuf>,
    jsonl: Option<PathBuf>,
) -> Result<()> {
    let input = required(input, &ctx.cfg.paths.definitions, "definitions file")?;
    let out_dir = required(out_dir, &ctx.cfg.paths.output_dir, "output directory")?;
    let trees = match trees.or_else(|| ctx.cfg.paths.trees.clone()) {
        Some(p) => read_trees(&p)?,
        None => HashMap::new(),
    };
    let rules = rule_config(&ctx.cfg)?;
    let defs: Vec<RawDefinition> = read_jsonl(&input)?;
    fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    let labeled: Vec<Labeled> = defs
        .par_iter()
        .map(|raw| {
            let gloss = if ctx.strip_gloss { strip_gloss(&raw.gloss) } else { raw.gloss.clone() };
            let Some(tree_text) = raw.tree.as_ref().or_else(|| trees.get(&raw.id)) else {
                return Labeled::Skipped(format!("{}: no tree", raw.id));
            };
            let tree = match parse_tree(tree_text, &gloss) {
                Ok(t) => t,
                Err(e) => return Labeled::Skipped(format!("{}: {e}", raw.id)),
            };
            match preannotate_tagged(&tree, raw.pos, &rules, raw.entity_tags.as_deref()) {
                Ok(def) => Labeled::Done(AnnotatedRecord {
                    def: def.with_identity(raw.id.clone(), raw.lemmas.clone()),
                    tree: Some(tree_text.clone()),
                    warnings: Vec::new(),
                }),
                Err(e) => Labeled::Skipped(format!("{}: {e}", raw.id)),
            }
        })
        .collect();

    let (mut done, mut missing, mut skipped) = (0usize, 0usize, 0usize);
    let mut out = String::new();
    for item in labeled {
        match item {
            Labeled::Done(rec) => {
                if let Err(e) = write_brat(&out_dir, &rec.def) {
                    warn!("{}: {e}", rec.def.id);
                    skipped += 1;
                    continue;
                }
                if !rec.def.has_supertype() {
                    missing += 1;
                }
                done += 1;
                out.push_str(&to_line(&rec));
            }
            Labeled::Skipped(msg) => {
                warn!("skipped {msg}");
                skipped += 1;
            }
        }
    }
    if let Some(path) = jsonl {
        write_output(&path, &out)?;
    }
    println!(
        "records: {}, labeled: {done}, missing-supertype: {missing}, skipped: {skipped}",
        defs.len()
    );
    Ok(())
}

pub fn postprocess(ctx: &Context, input: &Path, trees: Option<PathBuf>, output: &Path) -> Result<()> {
    let trees = match trees.or_else(|| ctx.cfg.paths.trees.clone()) {
        Some(p) => read_trees(&p)?,
        None => HashMap::new(),
    };
    let rules = rule_config(&ctx.cfg)?;
    let text = read_text(input)?;
    let parsed: Vec<(&str, AnnotatedRecord)> = lines(&text)
        .map(|(n, l)| parse_line(input, n, l).map(|r| (l, r)))
        .collect::<Result<_>>()?;

    let results: Vec<(String, bool, bool)> = parsed
        .par_iter()
        .map(|(raw, rec)| {
            if annotation::validate(&rec.def).is_empty() {
                return (format!("{raw}\n"), false, false);
            }
            let mut rec = rec.clone();
            let mut recovered = false;
            if !rec.def.has_supertype() {
                match rec.tree.as_ref().or_else(|| trees.get(&rec.def.id)) {
                    None => rec.warnings.push("no tree available for supertype recovery".into()),
                    Some(t) => match parse_tree(t, &rec.def.gloss)
                        .map_err(|e| e.to_string())
                        .and_then(|tree| recover_supertype(&rec.def, &tree, &rules).map_err(|e| e.to_string()))
                    {
                        Ok(r) => {
                            recovered = r.outcome == RecoveryOutcome::Recovered;
                            if r.outcome.is_warning() {
                                rec.warnings.push(format!("supertype recovery: {:?}", r.outcome));
                            }
                            rec.def = r.definition;
                        }
                        Err(e) => rec.warnings.push(format!("supertype recovery failed: {e}")),
                    },
                }
            }
            for v in annotation::validate(&rec.def) {
                rec.warnings.push(serde_json::to_string(&v).expect("violations serialize"));
            }
            let flagged = !rec.warnings.is_empty();
            (to_line(&rec), recovered, flagged)
        })
        .collect();

    let mut out = String::new();
    let (mut recovered, mut flagged) = (0, 0);
    for (line, r, f) in results {
        out.push_str(&line);
        recovered += r as usize;
        flagged += f as usize;
    }
    write_output(output, &out)?;
    println!("records: {}, recovered: {recovered}, warnings: {flagged}", parsed.len());
    Ok(())
}

pub fn export_brat(ctx: &Context, input: &Path, out_dir: Option<PathBuf>) -> Result<()> {
    let out_dir = required(out_dir, &ctx.cfg.paths.output_dir, "output directory")?;
    let recs: Vec<AnnotatedRecord> = read_jsonl(input)?;
    fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut failed = 0;
    for rec in &recs {
        if let Err(e) = write_brat(&out_dir, &rec.def) {
            warn!("{}: {e}", rec.def.id);
            failed += 1;
        }
    }
    println!("records: {}, exported: {}, failed: {failed}", recs.len(), recs.len() - failed);
    Ok(())
}

pub fn import_brat(dir: &Path, defs: &Path, output: &Path) -> Result<()> {
    let raws: Vec<RawDefinition> = read_jsonl(defs)?;
    let mut out = String::new();
    for raw in &raws {
        let stem = file_stem(&raw.id);
        let txt = read_text(&dir.join(format!("{stem}.txt")))?;
        let ann = read_text(&dir.join(format!("{stem}.ann")))?;
        let def = annotation::import_brat(&txt, &ann, &raw.id, raw.pos, &raw.lemmas)
            .map_err(|e| InputError(format!("{}: {e}", dir.join(format!("{stem}.ann")).display())))?;
        out.push_str(&to_line(&AnnotatedRecord {
            def,
            tree: raw.tree.clone(),
            warnings: Vec::new(),
        }));
    }
    write_output(output, &out)?;
    println!("records: {}", raws.len());
    Ok(())
}

pub fn build(ctx: &Context, input: &Path, output: &Path) -> Result<()> {
    let recs: Vec<AnnotatedRecord> = read_jsonl(input)?;
    let defs: Vec<AnnotatedDefinition> = recs.into_iter().map(|r| r.def).collect();
    let g = build_graph(&defs, ctx.cfg.graph).map_err(|e| InputError(format!("{}: {e}", input.display())))?;
    write_output(output, &serialize_ntriples(&g))?;
    info!("wrote {}", output.display());
    println!("definitions: {}, triples: {}", defs.len(), g.len());
    Ok(())
}

#[derive(Serialize)]
struct VerdictLine<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<&'a str>,
    #[serde(flatten)]
    verdict: &'a Verdict,
}

pub fn entail(
    ctx: &Context,
    graph: &Path,
    embeddings: Option<PathBuf>,
    pairs: &Path,
    stopwords: Option<PathBuf>,
    output: Option<PathBuf>,
) -> Result<()> {
    let g = parse_ntriples(&read_text(graph)?, ctx.cfg.graph).map_err(|e| InputError(format!("{}: {e}", graph.display())))?;
    let emb_path = required(embeddings, &ctx.cfg.paths.embeddings, "embeddings file")?;
    let mut table = load_embeddings(&emb_path).map_err(|e| InputError(format!("{}: {e}", emb_path.display())))?;
    if let Some(sw) = stopwords.or_else(|| ctx.cfg.paths.stopwords.clone()) {
        table = table.with_stopwords(load_stopwords(&sw).map_err(|e| InputError(e.to_string()))?);
    }
    let pairs: Vec<PairRecord> = read_jsonl(pairs)?;
    let verdicts: Vec<Result<String>> = pairs
        .par_iter()
        .map(|p| {
            let v = entail_tagged(&g, &p.t, p.t_tags.as_deref(), &p.h, p.h_tags.as_deref(), &table, &ctx.cfg.entail)
                .map_err(|e| InputError(format!("pair {}: {e}", p.id.as_deref().unwrap_or("?"))))?;
            Ok(to_line(&VerdictLine {
                id: p.id.as_deref(),
                verdict: &v,
            }))
        })
        .collect();
    let mut out = String::new();
    for v in verdicts {
        out.push_str(&v?);
    }
    match output {
        Some(path) => write_output(&path, &out)?,
        None => std::io::stdout().write_all(out.as_bytes())?,
    }
    Ok(())
}

pub fn validate(input: &Path) -> Result<()> {
    let recs: Vec<AnnotatedRecord> = read_jsonl(input)?;
    let mut invalid = 0;
    for rec in &recs {
        let report = annotation::validate(&rec.def);
        if !report.is_empty() {
            invalid += 1;
            println!("{}", serde_json::json!({ "id": rec.def.id, "violations": report }));
        }
    }
    println!("records: {}, invalid: {invalid}", recs.len());
    if invalid > 0 {
        return Err(InputError(format!("{invalid} invalid record(s)")).into());
    }
    Ok(())
}
