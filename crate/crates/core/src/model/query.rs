use serde::Serialize;
use thiserror::Error;

use super::types::{Dependency, Identifier, LinkKind, Model};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown actor '{0}'")]
    UnknownActor(Identifier),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Decomposition {
    And,
    Or,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ForestNode {
    pub id: Identifier,
    /// `None` for leaves.
    pub decomposition: Option<Decomposition>,
    pub children: Vec<Identifier>,
}

/// Refinement structure of one actor: one node per element, in element order.
///
/// Shared children (an element refining two parents) appear in both parents'
/// child lists but only once as a node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RefinementForest {
    pub roots: Vec<Identifier>,
    pub nodes: Vec<ForestNode>,
}

impl RefinementForest {
    pub fn node(&self, id: &str) -> Option<&ForestNode> {
        self.nodes.iter().find(|n| n.id.as_str() == id)
    }
}

pub fn refinement_forest(model: &Model, actor: &str) -> Result<RefinementForest, ModelError> {
    let actor = model
        .actor(actor)
        .ok_or_else(|| ModelError::UnknownActor(actor.into()))?;
    let refinements: Vec<_> = actor
        .internal_links
        .iter()
        .filter(|l| l.kind.is_refinement())
        .filter(|l| actor.element(l.source.as_str()).is_some() && actor.element(l.target.as_str()).is_some())
        .collect();

    let nodes = actor
        .elements
        .iter()
        .map(|element| {
            let incoming: Vec<_> = refinements.iter().filter(|l| l.target == element.id).collect();
            let decomposition = incoming.first().map(|l| match l.kind {
                LinkKind::AndRefinement => Decomposition::And,
                _ => Decomposition::Or,
            });
            ForestNode {
                id: element.id.clone(),
                decomposition,
                children: incoming.iter().map(|l| l.source.clone()).collect(),
            }
        })
        .collect();
    let roots = actor
        .elements
        .iter()
        .filter(|e| !refinements.iter().any(|l| l.source == e.id))
        .map(|e| e.id.clone())
        .collect();
    Ok(RefinementForest { roots, nodes })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DependencySplit<'a> {
    pub as_depender: Vec<&'a Dependency>,
    pub as_dependee: Vec<&'a Dependency>,
}

pub fn dependencies_of<'a>(model: &'a Model, actor: &str) -> Result<DependencySplit<'a>, ModelError> {
    if model.actor(actor).is_none() {
        return Err(ModelError::UnknownActor(actor.into()));
    }
    let mut split = DependencySplit::default();
    for dep in &model.dependencies {
        if dep.depender.as_str() == actor {
            split.as_depender.push(dep);
        } else if dep.dependee.as_str() == actor {
            split.as_dependee.push(dep);
        }
    }
    Ok(split)
}
