use std::collections::BTreeSet;
use std::fs;

use defgraph::annotation::{AnnotatedDefinition, PartOfSpeech};
use defgraph::distsem::EmbeddingTable;
use defgraph::entail::{navigate, select_term_pairs, EntailConfig};
use defgraph::kgraph::{build_graph, predicate_iri, DefinitionGraph, GraphPolicy, Term};
use defgraph::labeler::{preannotate, RuleConfig};
use defgraph::treebank::parse_tree;

fn fixture(name: &str) -> String {
    fs::read_to_string(format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn mini_graph() -> DefinitionGraph {
    let defs: Vec<AnnotatedDefinition> = fixture("minicorpus.jsonl").lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    build_graph(&defs, GraphPolicy::default()).unwrap()
}

fn r(local: &str) -> Term {
    Term::Resource(format!("urn:wng:{local}"))
}

#[test]
fn mini_graph_neighbors() {
    let g = mini_graph();
    let dc: Vec<_> = g.neighbors(&r("digital_camera")).into_iter().map(|n| (n.predicate, n.node)).collect();
    assert!(dc.contains(&("has_supertype".to_string(), r("camera"))));
    let eq: Vec<_> = g.neighbors(&r("equipment")).into_iter().map(|n| (n.predicate, n.node)).collect();
    assert!(eq.contains(&("has_diff_qual".to_string(), Term::Literal("for taking photographs".into()))));
}

#[test]
fn mini_graph_lookup() {
    let g = mini_graph();
    assert_eq!(g.lookup("digital camera"), BTreeSet::from([r("digital_camera")]));
    assert_eq!(g.lookup("picture"), BTreeSet::from([r("photograph")]));
    assert!(g.lookup("zzzz").is_empty());
}

#[test]
fn lake_poets_graph() {
    let gloss = "English poets at the beginning of the 19th century who lived in the Lake District";
    let tree = parse_tree(
        "(ROOT (NP (NP (JJ English) (NNS poets)) (PP (IN at) (NP (NP (DT the) (NN beginning)) (PP (IN of) (NP (DT the) (JJ 19th) (NN century))))) (SBAR (WHNP (WP who)) (S (VP (VBD lived) (PP (IN in) (NP (DT the) (NNP Lake) (NNP District))))))))",
        gloss,
    )
    .unwrap();
    let cfg = RuleConfig {
        noun_family_matching: true,
        ..RuleConfig::default()
    };
    let def = preannotate(&tree, PartOfSpeech::Noun, &cfg)
        .unwrap()
        .with_identity("lake_poets", vec!["Lake Poets".into()]);
    let g = build_graph(&[def], GraphPolicy::default()).unwrap();
    assert!(g
        .triples()
        .iter()
        .any(|t| t.subject == r("lake_poets") && t.predicate == predicate_iri("has_supertype") && t.object == r("poets")));
    let statements = g.statement_ids().count();
    assert!(statements >= 2, "expected reified differentia statements, got {statements}");
    assert!(g.integrity_issues().is_empty());
}

#[test]
fn pair_selection_on_worked_texts() {
    let t = EmbeddingTable::parse(&fixture("toy_vectors.txt")).unwrap();
    let pairs = select_term_pairs("Many cellphones have built-in digital cameras", "Many cellphones can take pictures", &t, 3);
    assert_eq!(pairs[0].source, "digital cameras");
    assert_eq!(pairs[0].target, "pictures");
    assert!(pairs.windows(2).all(|w| w[0].similarity >= w[1].similarity));
}

#[test]
fn scaled_vectors_give_same_path() {
    let g = mini_graph();
    let t = EmbeddingTable::parse(&fixture("toy_vectors.txt")).unwrap();
    let cfg = EntailConfig::default();
    let a = navigate(&g, "digital camera", "pictures", &t, &cfg).unwrap();
    let b = navigate(&g, "digital camera", "pictures", &t.scaled(42.0), &cfg).unwrap();
    assert!(a.is_some());
    assert_eq!(a, b);
}
