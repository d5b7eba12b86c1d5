use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::lexicon::{normalize, Verb, VerbLexicon};
use crate::model::{Dependency, ElementKind, Identifier, IntentionalElement, Model};

/// Model metadata prefix declaring an abbreviation: `ssi.alias.BND` =
/// `Birth Notification Document`.
pub const ALIAS_PREFIX: &str = "ssi.alias.";
/// Dependency annotation forcing the flow kind (`issue` or `present`).
pub const FLOW_ANNOTATION: &str = "ssi";
/// Dependency annotation naming an actor that issued the credential out of band.
pub const ISSUER_ANNOTATION: &str = "ssi.issuer";
/// Dependency annotation naming the credential subject when it is not the holder.
pub const SUBJECT_ANNOTATION: &str = "ssi.subject";
/// Dependency annotation recording why a proof is requested.
pub const PURPOSE_ANNOTATION: &str = "ssi.purpose";
/// Dependency annotation prefix for extra claims placed in issued credentials.
pub const CLAIM_PREFIX: &str = "claim.";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SsiRole {
    Issuer,
    Holder,
    Verifier,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RoleAssignment {
    pub actor: Identifier,
    pub role: SsiRole,
    pub credential_type: String,
}

/// Credential types (resource dependums) of a model and their aliases.
#[derive(Clone, Debug, Default)]
pub struct CredentialCatalog {
    /// normalized spelling -> canonical type name
    spellings: BTreeMap<String, String>,
    types: BTreeSet<String>,
}

fn display_name(name: &str) -> String {
    name.split_whitespace().collect::<Vec<_>>().join(" ")
}

impl CredentialCatalog {
    pub fn from_model(model: &Model) -> Self {
        let aliases: BTreeMap<String, String> = model
            .metadata
            .iter()
            .filter_map(|(k, v)| {
                k.strip_prefix(ALIAS_PREFIX)
                    .map(|alias| (normalize(alias), display_name(v)))
            })
            .filter(|(alias, _)| !alias.is_empty())
            .collect();
        let mut catalog = CredentialCatalog::default();
        for dep in model
            .dependencies
            .iter()
            .filter(|d| d.dependum.kind == ElementKind::Resource)
        {
            let spelled = normalize(&dep.dependum.name);
            let canonical = aliases
                .get(&spelled)
                .cloned()
                .unwrap_or_else(|| display_name(&dep.dependum.name));
            catalog.types.insert(canonical.clone());
            catalog.spellings.insert(normalize(&canonical), canonical.clone());
            catalog.spellings.insert(spelled, canonical);
        }
        for (alias, canonical) in aliases {
            if catalog.types.contains(&canonical) {
                catalog.spellings.insert(alias, canonical);
            }
        }
        catalog
    }

    pub fn types(&self) -> &BTreeSet<String> {
        &self.types
    }

    /// Canonical credential type for a dependum name.
    pub fn canonical(&self, dependum_name: &str) -> Option<&str> {
        self.spellings.get(&normalize(dependum_name)).map(String::as_str)
    }

    /// Canonical credential type of a resource dependency.
    pub fn type_of(&self, dep: &Dependency) -> Option<&str> {
        (dep.dependum.kind == ElementKind::Resource)
            .then(|| self.canonical(&dep.dependum.name))
            .flatten()
    }

    /// Credential types whose name or alias occurs in `text`.
    pub fn mentioned_in(&self, text: &str) -> BTreeSet<&str> {
        let text = normalize(text);
        self.spellings
            .iter()
            .filter(|(spelling, _)| !spelling.is_empty() && text.contains(spelling.as_str()))
            .map(|(_, canonical)| canonical.as_str())
            .collect()
    }

    pub fn mentions(&self, text: &str, credential_type: &str) -> bool {
        self.mentioned_in(text).contains(credential_type)
    }
}

/// Tasks of `actor` whose name starts with a `verb` prefix and mentions the type.
pub(crate) fn verb_tasks<'m>(
    model: &'m Model,
    catalog: &CredentialCatalog,
    lexicon: &VerbLexicon,
    actor: &str,
    verb: Verb,
    credential_type: &str,
) -> Vec<&'m IntentionalElement> {
    model
        .actor(actor)
        .into_iter()
        .flat_map(|a| a.tasks())
        .filter(|t| lexicon.classify(&t.name) == Some(verb) && catalog.mentions(&t.name, credential_type))
        .collect()
}

/// Issuance when annotated `ssi=issue` or when the dependee is an Issuer of
/// the type; otherwise `None`.
pub(crate) fn annotated_kind(dep: &Dependency) -> Option<super::FlowKind> {
    match dep
        .annotations
        .get(FLOW_ANNOTATION)
        .map(|s| s.trim().to_ascii_lowercase())
        .as_deref()
    {
        Some("issue") => Some(super::FlowKind::Issuance),
        Some("present") => Some(super::FlowKind::Presentation),
        _ => None,
    }
}

/// Issuer, Holder and Verifier assignments read off task verbs.
///
/// An actor is an Issuer of type T if it owns a task starting with an issue
/// verb that mentions T, a Verifier for a check verb, and a Holder for a
/// provide verb. The receiving side of every issuance (by annotation or by an
/// issuing dependee) is also a Holder. Sorted by (actor, type, role).
pub fn infer_roles(model: &Model, lexicon: &VerbLexicon) -> Vec<RoleAssignment> {
    let catalog = CredentialCatalog::from_model(model);
    let mut roles = BTreeSet::new();
    for actor in &model.actors {
        for task in actor.tasks() {
            let Some(verb) = lexicon.classify(&task.name) else {
                continue;
            };
            let role = match verb {
                Verb::Issue => SsiRole::Issuer,
                Verb::Provide => SsiRole::Holder,
                Verb::Check => SsiRole::Verifier,
            };
            for credential_type in catalog.mentioned_in(&task.name) {
                roles.insert((actor.id.clone(), credential_type.to_owned(), role));
            }
        }
    }
    for dep in &model.dependencies {
        let Some(credential_type) = catalog.type_of(dep) else {
            continue;
        };
        let issued = match annotated_kind(dep) {
            Some(kind) => kind == super::FlowKind::Issuance,
            None => roles.contains(&(dep.dependee.clone(), credential_type.to_owned(), SsiRole::Issuer)),
        };
        if issued {
            roles.insert((dep.depender.clone(), credential_type.to_owned(), SsiRole::Holder));
        }
    }
    roles
        .into_iter()
        .map(|(actor, credential_type, role)| RoleAssignment {
            actor,
            role,
            credential_type,
        })
        .collect()
}
