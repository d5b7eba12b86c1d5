//! iStar 2.0 metamodel: actors, intentional elements, internal links,
//! dependencies and actor links, plus the well-formedness rule table.

mod query;
mod types;
mod validate;

pub use query::{
    dependencies_of, refinement_forest, Decomposition, DependencySplit, ForestNode, ModelError, RefinementForest,
};
pub use types::{
    Actor, ActorKind, ActorLink, ActorLinkKind, Annotations, Dependency, Dependum, ElementKind, Identifier,
    IntentionalElement, InternalLink, LinkKind, Model, Polarity,
};
pub use validate::{validate, Issue, RuleCode, ValidationReport};
