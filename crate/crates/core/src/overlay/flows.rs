use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::lexicon::{Verb, VerbLexicon};
use super::roles::{annotated_kind, verb_tasks, CredentialCatalog, RoleAssignment, SsiRole};
use crate::model::{Dependency, Identifier, IntentionalElement, Model};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FlowKind {
    Issuance,
    Presentation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Evidence {
    Annotation,
    /// The task whose verb decided the flow.
    Verb(Identifier),
    Unresolved,
}

/// A credential moving from the dependee (`from`) to the depender (`to`),
/// either freshly issued or presented from the dependee's wallet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CredentialFlow {
    pub dependency: Identifier,
    pub kind: FlowKind,
    pub credential_type: String,
    pub from: Identifier,
    pub to: Identifier,
    pub evidence: Evidence,
}

fn pick<'m>(preferred: Option<&Identifier>, candidates: Vec<&'m IntentionalElement>) -> Option<&'m IntentionalElement> {
    preferred
        .and_then(|id| candidates.iter().copied().find(|t| &t.id == id))
        .or_else(|| candidates.first().copied())
}

/// Classifies every resource dependency as an issuance or a presentation.
///
/// Precedence: an `ssi` annotation (`issue`/`present`); then an issuing
/// dependee; then a holding dependee facing a verifying depender. Anything
/// else defaults to a presentation with [`Evidence::Unresolved`].
pub fn derive_flows(model: &Model, roles: &[RoleAssignment], lexicon: &VerbLexicon) -> Vec<CredentialFlow> {
    let catalog = CredentialCatalog::from_model(model);
    let has: BTreeSet<(&str, &str, SsiRole)> = roles
        .iter()
        .map(|r| (r.actor.as_str(), r.credential_type.as_str(), r.role))
        .collect();

    model
        .dependencies
        .iter()
        .filter_map(|dep| {
            let credential_type = catalog.type_of(dep)?;
            let (kind, evidence) = classify(model, &catalog, lexicon, &has, dep, credential_type);
            Some(CredentialFlow {
                dependency: dep.id.clone(),
                kind,
                credential_type: credential_type.to_owned(),
                from: dep.dependee.clone(),
                to: dep.depender.clone(),
                evidence,
            })
        })
        .collect()
}

fn classify(
    model: &Model,
    catalog: &CredentialCatalog,
    lexicon: &VerbLexicon,
    has: &BTreeSet<(&str, &str, SsiRole)>,
    dep: &Dependency,
    credential_type: &str,
) -> (FlowKind, Evidence) {
    if let Some(kind) = annotated_kind(dep) {
        return (kind, Evidence::Annotation);
    }
    if has.contains(&(dep.dependee.as_str(), credential_type, SsiRole::Issuer)) {
        let tasks = verb_tasks(
            model,
            catalog,
            lexicon,
            dep.dependee.as_str(),
            Verb::Issue,
            credential_type,
        );
        if let Some(task) = pick(dep.dependee_element.as_ref(), tasks) {
            return (FlowKind::Issuance, Evidence::Verb(task.id.clone()));
        }
    }
    if has.contains(&(dep.dependee.as_str(), credential_type, SsiRole::Holder))
        && has.contains(&(dep.depender.as_str(), credential_type, SsiRole::Verifier))
    {
        let tasks = verb_tasks(
            model,
            catalog,
            lexicon,
            dep.depender.as_str(),
            Verb::Check,
            credential_type,
        );
        if let Some(task) = pick(dep.depender_element.as_ref(), tasks) {
            return (FlowKind::Presentation, Evidence::Verb(task.id.clone()));
        }
    }
    (FlowKind::Presentation, Evidence::Unresolved)
}
