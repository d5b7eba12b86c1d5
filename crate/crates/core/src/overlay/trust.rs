use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::roles::{CredentialCatalog, RoleAssignment, SsiRole, ISSUER_ANNOTATION};
use super::{FlowKind, OverlayError};
use crate::credential::Did;
use crate::model::{Identifier, Model};

/// Which issuer DIDs each verifier accepts for each credential type.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TrustRegistry {
    accepted: BTreeMap<(Identifier, String), BTreeSet<Did>>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct TrustRow {
    verifier: Identifier,
    credential_type: String,
    issuers: BTreeSet<Did>,
}

impl Serialize for TrustRegistry {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<TrustRow> = self
            .accepted
            .iter()
            .map(|((verifier, credential_type), issuers)| TrustRow {
                verifier: verifier.clone(),
                credential_type: credential_type.clone(),
                issuers: issuers.clone(),
            })
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TrustRegistry {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<TrustRow>::deserialize(deserializer)?;
        Ok(TrustRegistry {
            accepted: rows
                .into_iter()
                .map(|row| ((row.verifier, row.credential_type), row.issuers))
                .collect(),
        })
    }
}

impl TrustRegistry {
    /// Adds a key with no accepted issuers if it is missing.
    pub fn declare(&mut self, verifier: impl Into<Identifier>, credential_type: impl Into<String>) {
        self.accepted
            .entry((verifier.into(), credential_type.into()))
            .or_default();
    }

    pub fn allow(&mut self, verifier: impl Into<Identifier>, credential_type: impl Into<String>, issuer: Did) {
        self.accepted
            .entry((verifier.into(), credential_type.into()))
            .or_default()
            .insert(issuer);
    }

    pub fn deny(&mut self, verifier: &str, credential_type: &str, issuer: &Did) {
        if let Some(set) = self.accepted.get_mut(&(verifier.into(), credential_type.to_owned())) {
            set.remove(issuer);
        }
    }

    pub fn accepts(&self, verifier: &str, credential_type: &str, issuer: &Did) -> bool {
        self.accepted(verifier, credential_type)
            .is_some_and(|set| set.contains(issuer))
    }

    pub fn accepted(&self, verifier: &str, credential_type: &str) -> Option<&BTreeSet<Did>> {
        self.accepted.get(&(verifier.into(), credential_type.to_owned()))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Identifier, &str, &BTreeSet<Did>)> {
        self.accepted.iter().map(|((v, t), set)| (v, t.as_str(), set))
    }

    /// The rows belonging to one verifier.
    pub fn for_verifier(&self, verifier: &str) -> TrustRegistry {
        TrustRegistry {
            accepted: self
                .accepted
                .iter()
                .filter(|((v, _), _)| v.as_str() == verifier)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrustEffect {
    #[default]
    Allow,
    Deny,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrustOverride {
    pub verifier: Identifier,
    pub credential_type: String,
    pub issuer_did: Did,
    #[serde(default)]
    pub effect: TrustEffect,
}

impl TrustOverride {
    pub fn allow(verifier: impl Into<Identifier>, credential_type: impl Into<String>, issuer_did: Did) -> Self {
        TrustOverride {
            verifier: verifier.into(),
            credential_type: credential_type.into(),
            issuer_did,
            effect: TrustEffect::Allow,
        }
    }
}

/// Default policy: every Verifier of T accepts the DIDs of the Issuers of T.
/// Overrides are then applied in order: allows add, denies remove.
///
/// Fails with `E_TRUST_NOT_VERIFIER` when an override names a pair that is
/// not a Verifier assignment, and with `E_TRUST_NO_DID` when an Issuer has no
/// DID.
pub fn build_trust_registry(
    roles: &[RoleAssignment],
    did_of: &BTreeMap<Identifier, Did>,
    overrides: &[TrustOverride],
) -> Result<TrustRegistry, OverlayError> {
    let mut registry = TrustRegistry::default();
    let verifiers: BTreeSet<(&str, &str)> = roles
        .iter()
        .filter(|r| r.role == SsiRole::Verifier)
        .map(|r| (r.actor.as_str(), r.credential_type.as_str()))
        .collect();
    for &(verifier, credential_type) in &verifiers {
        registry.declare(verifier, credential_type);
        for issuer in roles
            .iter()
            .filter(|r| r.role == SsiRole::Issuer && r.credential_type == credential_type)
        {
            let did = did_of
                .get(&issuer.actor)
                .ok_or_else(|| OverlayError::IssuerWithoutDid(issuer.actor.clone()))?;
            registry.allow(verifier, credential_type, did.clone());
        }
    }
    for o in overrides {
        if !verifiers.contains(&(o.verifier.as_str(), o.credential_type.as_str())) {
            return Err(OverlayError::TrustNotVerifier {
                verifier: o.verifier.clone(),
                credential_type: o.credential_type.clone(),
            });
        }
    }
    for o in overrides.iter().filter(|o| o.effect == TrustEffect::Allow) {
        registry.allow(o.verifier.clone(), o.credential_type.clone(), o.issuer_did.clone());
    }
    for o in overrides.iter().filter(|o| o.effect == TrustEffect::Deny) {
        registry.deny(o.verifier.as_str(), &o.credential_type, &o.issuer_did);
    }
    Ok(registry)
}

/// One row of a trust file. The issuer is given either as a DID or as the
/// id of an actor in the model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TrustEntry {
    pub verifier: Identifier,
    pub credential_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub issuer_did: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub issuer_actor: Option<Identifier>,
    #[serde(default)]
    pub effect: TrustEffect,
}

pub fn parse_trust_file(text: &str) -> Result<Vec<TrustEntry>, OverlayError> {
    serde_json::from_str(text).map_err(|e| OverlayError::TrustFile(e.to_string()))
}

impl TrustEntry {
    /// Resolves the issuer to a DID and the type to its canonical spelling.
    pub fn resolve(
        &self,
        catalog: &CredentialCatalog,
        did_of: &BTreeMap<Identifier, Did>,
    ) -> Result<TrustOverride, OverlayError> {
        let issuer_did = match (&self.issuer_did, &self.issuer_actor) {
            (Some(did), None) => did
                .parse()
                .map_err(|_| OverlayError::TrustFile(format!("'{did}' is not a did:sim identifier")))?,
            (None, Some(actor)) => did_of
                .get(actor)
                .cloned()
                .ok_or_else(|| OverlayError::TrustFile(format!("unknown issuer actor '{actor}'")))?,
            _ => {
                return Err(OverlayError::TrustFile(
                    "each entry needs exactly one of issuerDid or issuerActor".into(),
                ))
            }
        };
        let credential_type = catalog
            .canonical(&self.credential_type)
            .map(str::to_owned)
            .unwrap_or_else(|| self.credential_type.clone());
        Ok(TrustOverride {
            verifier: self.verifier.clone(),
            credential_type,
            issuer_did,
            effect: self.effect,
        })
    }
}

/// A credential a holder already owns, issued outside the modelled process
/// by the actor named in a dependency's `ssi.issuer` annotation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OutOfBandIssuer {
    pub dependency: Identifier,
    pub credential_type: String,
    pub issuer: Identifier,
    pub holder: Identifier,
    pub verifier: Identifier,
}

pub fn out_of_band_issuers(model: &Model, flows: &[super::CredentialFlow]) -> Vec<OutOfBandIssuer> {
    flows
        .iter()
        .filter(|f| f.kind == FlowKind::Presentation)
        .filter_map(|f| {
            let dep = model.dependency(f.dependency.as_str())?;
            let issuer = dep.annotations.get(ISSUER_ANNOTATION)?.trim();
            model.actor(issuer).map(|actor| OutOfBandIssuer {
                dependency: f.dependency.clone(),
                credential_type: f.credential_type.clone(),
                issuer: actor.id.clone(),
                holder: f.from.clone(),
                verifier: f.to.clone(),
            })
        })
        .collect()
}
