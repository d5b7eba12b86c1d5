use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::roles::{CredentialCatalog, RoleAssignment, SsiRole, ISSUER_ANNOTATION};
use super::{CredentialFlow, Evidence, FlowKind};
use crate::model::Model;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LintCode {
    #[serde(rename = "W_FLOW_AMBIGUOUS")]
    FlowAmbiguous,
    #[serde(rename = "W_NO_ISSUER")]
    NoIssuer,
    #[serde(rename = "W_ORPHAN_VERIFIER")]
    OrphanVerifier,
}

impl LintCode {
    pub fn as_str(self) -> &'static str {
        match self {
            LintCode::FlowAmbiguous => "W_FLOW_AMBIGUOUS",
            LintCode::NoIssuer => "W_NO_ISSUER",
            LintCode::OrphanVerifier => "W_ORPHAN_VERIFIER",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SsiWarning {
    pub code: LintCode,
    /// Dependency id, credential type, or `actor/type` pair.
    pub subject: String,
    pub message: String,
}

/// SSI-level warnings, sorted by code then subject.
pub fn lint_ssi(model: &Model, roles: &[RoleAssignment], flows: &[CredentialFlow]) -> Vec<SsiWarning> {
    let catalog = CredentialCatalog::from_model(model);
    let mut out = Vec::new();

    for flow in flows.iter().filter(|f| f.evidence == Evidence::Unresolved) {
        out.push(SsiWarning {
            code: LintCode::FlowAmbiguous,
            subject: flow.dependency.to_string(),
            message: format!(
                "cannot tell whether '{}' is issued to '{}' or presented by '{}'",
                flow.credential_type, flow.to, flow.from
            ),
        });
    }

    let issued: BTreeSet<&str> = roles
        .iter()
        .filter(|r| r.role == SsiRole::Issuer)
        .map(|r| r.credential_type.as_str())
        .chain(
            model
                .dependencies
                .iter()
                .filter(|d| d.annotations.contains_key(ISSUER_ANNOTATION))
                .filter_map(|d| catalog.type_of(d)),
        )
        .collect();
    let presented: BTreeSet<&str> = flows
        .iter()
        .filter(|f| f.kind == FlowKind::Presentation)
        .map(|f| f.credential_type.as_str())
        .collect();
    for credential_type in presented.difference(&issued) {
        out.push(SsiWarning {
            code: LintCode::NoIssuer,
            subject: (*credential_type).to_owned(),
            message: format!("'{credential_type}' is presented but nobody issues it"),
        });
    }

    for role in roles.iter().filter(|r| r.role == SsiRole::Verifier) {
        let reaches = flows.iter().any(|f| {
            f.kind == FlowKind::Presentation && f.to == role.actor && f.credential_type == role.credential_type
        });
        if !reaches {
            out.push(SsiWarning {
                code: LintCode::OrphanVerifier,
                subject: format!("{}/{}", role.actor, role.credential_type),
                message: format!(
                    "'{}' checks '{}' but nothing is ever presented to it",
                    role.actor, role.credential_type
                ),
            });
        }
    }

    out.sort();
    out
}
