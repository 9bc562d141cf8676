//! Build role-labeled definition graphs from dictionary glosses and use them
//! to explain entailment decisions.
//!
//! The pipeline runs parse → pre-annotate → (curate) → repair supertypes →
//! build graph → navigate. Each stage lives in its own module.

pub mod annotation;
pub mod distsem;
pub mod entail;
pub mod kgraph;
pub mod labeler;
pub mod text;
pub mod treebank;
