//! SSI reading of an iStar model: who issues, holds and verifies which
//! credential, which way each resource dependency flows, and which issuers
//! each verifier trusts.

mod flows;
mod lexicon;
mod lint;
mod roles;
mod trust;

use thiserror::Error;

use crate::model::Identifier;

pub use flows::{derive_flows, CredentialFlow, Evidence, FlowKind};
pub use lexicon::{normalize, Verb, VerbLexicon};
pub use lint::{lint_ssi, LintCode, SsiWarning};
pub use roles::{
    infer_roles, CredentialCatalog, RoleAssignment, SsiRole, ALIAS_PREFIX, CLAIM_PREFIX, FLOW_ANNOTATION,
    ISSUER_ANNOTATION, PURPOSE_ANNOTATION, SUBJECT_ANNOTATION,
};
pub use trust::{
    build_trust_registry, out_of_band_issuers, parse_trust_file, OutOfBandIssuer, TrustEffect, TrustEntry,
    TrustOverride, TrustRegistry,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OverlayError {
    #[error("invalid verb lexicon: {0}")]
    Lexicon(String),
    #[error("'{verifier}' is not a Verifier of '{credential_type}'")]
    TrustNotVerifier {
        verifier: Identifier,
        credential_type: String,
    },
    #[error("issuer '{0}' has no DID")]
    IssuerWithoutDid(Identifier),
    #[error("invalid trust file: {0}")]
    TrustFile(String),
}

impl OverlayError {
    pub fn code(&self) -> &'static str {
        match self {
            OverlayError::Lexicon(_) => "E_LEXICON",
            OverlayError::TrustNotVerifier { .. } => "E_TRUST_NOT_VERIFIER",
            OverlayError::IssuerWithoutDid(_) => "E_TRUST_NO_DID",
            OverlayError::TrustFile(_) => "E_TRUST_FILE",
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::credential::{generate_keypair, Did};
    use crate::model::{Actor, ActorKind, ElementKind, Model};

    /// A clinic checks a card that an office issues and a patient provides.
    fn clinic() -> Model {
        let mut office = Actor::new("office", "Office", ActorKind::Agent);
        office.add_element("office.issue", "Issue Health Card", ElementKind::Task);
        let mut patient = Actor::new("patient", "Patient", ActorKind::Actor);
        patient.add_element("patient.get", "Obtain card", ElementKind::Task);
        patient.add_element("patient.show", "Present Health Card", ElementKind::Task);
        let mut clinic = Actor::new("clinic", "Clinic", ActorKind::Actor);
        clinic.add_element("clinic.check", "Verify health card", ElementKind::Task);
        let mut model = Model {
            actors: vec![office, patient, clinic],
            ..Model::default()
        };
        model.add_dependency(
            "d.issue",
            ("patient", Some("patient.get")),
            ("office", None),
            "Health Card",
            ElementKind::Resource,
        );
        model.add_dependency(
            "d.show",
            ("clinic", Some("clinic.check")),
            ("patient", Some("patient.show")),
            "Health  Card",
            ElementKind::Resource,
        );
        model
    }

    fn did(n: u8) -> Did {
        Did::from_public_key(generate_keypair([n; 32]).public_key())
    }

    #[test]
    fn roles_from_verbs() {
        let roles = infer_roles(&clinic(), &VerbLexicon::default());
        let got: Vec<_> = roles
            .iter()
            .map(|r| (r.actor.as_str(), r.role, r.credential_type.as_str()))
            .collect();
        assert_eq!(
            got,
            vec![
                ("clinic", SsiRole::Verifier, "Health Card"),
                ("office", SsiRole::Issuer, "Health Card"),
                ("patient", SsiRole::Holder, "Health Card"),
            ]
        );
    }

    #[test]
    fn no_tasks_no_roles() {
        let mut model = clinic();
        for actor in &mut model.actors {
            actor.elements.clear();
        }
        for dep in &mut model.dependencies {
            dep.depender_element = None;
            dep.dependee_element = None;
        }
        assert!(infer_roles(&model, &VerbLexicon::default()).is_empty());
    }

    #[test]
    fn flow_precedence() {
        let model = clinic();
        let lex = VerbLexicon::default();
        let roles = infer_roles(&model, &lex);
        let flows = derive_flows(&model, &roles, &lex);
        assert_eq!(flows[0].kind, FlowKind::Issuance);
        assert_eq!(flows[0].evidence, Evidence::Verb("office.issue".into()));
        assert_eq!((flows[0].from.as_str(), flows[0].to.as_str()), ("office", "patient"));
        assert_eq!(flows[1].kind, FlowKind::Presentation);
        assert_eq!(flows[1].evidence, Evidence::Verb("clinic.check".into()));
        assert!(lint_ssi(&model, &roles, &flows).is_empty());
    }

    #[test]
    fn annotation_beats_verbs() {
        let mut model = clinic();
        model.dependencies[0].annotations.insert("ssi".into(), "present".into());
        let lex = VerbLexicon::default();
        let roles = infer_roles(&model, &lex);
        let flows = derive_flows(&model, &roles, &lex);
        assert_eq!(flows[0].kind, FlowKind::Presentation);
        assert_eq!(flows[0].evidence, Evidence::Annotation);
    }

    #[test]
    fn unresolved_defaults_to_presentation() {
        let mut model = clinic();
        model.actors[0].elements[0].name = "Print Health Card".into();
        let lex = VerbLexicon::default();
        let roles = infer_roles(&model, &lex);
        let flows = derive_flows(&model, &roles, &lex);
        assert_eq!(flows[0].kind, FlowKind::Presentation);
        assert_eq!(flows[0].evidence, Evidence::Unresolved);
        let codes: Vec<_> = lint_ssi(&model, &roles, &flows).into_iter().map(|w| w.code).collect();
        assert_eq!(codes, vec![LintCode::FlowAmbiguous, LintCode::NoIssuer]);
    }

    #[test]
    fn orphan_verifier() {
        let mut model = clinic();
        model.dependencies.pop();
        let lex = VerbLexicon::default();
        let roles = infer_roles(&model, &lex);
        let flows = derive_flows(&model, &roles, &lex);
        let warnings = lint_ssi(&model, &roles, &flows);
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].code, LintCode::OrphanVerifier);
        assert_eq!(warnings[0].subject, "clinic/Health Card");
    }

    #[test]
    fn empty_model_has_no_warnings() {
        assert!(lint_ssi(&Model::default(), &[], &[]).is_empty());
    }

    #[test]
    fn trust_defaults_and_overrides() {
        let model = clinic();
        let roles = infer_roles(&model, &VerbLexicon::default());
        let did_of: BTreeMap<_, _> = [
            ("office".into(), did(1)),
            ("patient".into(), did(2)),
            ("clinic".into(), did(3)),
        ]
        .into_iter()
        .collect();
        let trust = build_trust_registry(&roles, &did_of, &[]).unwrap();
        assert!(trust.accepts("clinic", "Health Card", &did(1)));
        assert_eq!(trust.accepted("clinic", "Health Card").unwrap().len(), 1);

        let extra = TrustOverride::allow("clinic", "Health Card", did(9));
        let trust = build_trust_registry(&roles, &did_of, &[extra]).unwrap();
        assert!(trust.accepts("clinic", "Health Card", &did(9)));

        let mut deny = TrustOverride::allow("clinic", "Health Card", did(1));
        deny.effect = TrustEffect::Deny;
        let trust = build_trust_registry(&roles, &did_of, &[deny]).unwrap();
        assert!(trust.accepted("clinic", "Health Card").unwrap().is_empty());

        let bad = TrustOverride::allow("patient", "Health Card", did(9));
        let err = build_trust_registry(&roles, &did_of, &[bad]).unwrap_err();
        assert_eq!(err.code(), "E_TRUST_NOT_VERIFIER");
    }

    #[test]
    fn verifiers_without_issuers_get_empty_sets() {
        let roles = vec![RoleAssignment {
            actor: "clinic".into(),
            role: SsiRole::Verifier,
            credential_type: "Health Card".into(),
        }];
        let trust = build_trust_registry(&roles, &BTreeMap::new(), &[]).unwrap();
        assert_eq!(trust.entries().count(), 1);
        assert!(trust.accepted("clinic", "Health Card").unwrap().is_empty());
    }

    #[test]
    fn trust_file_entries() {
        let model = clinic();
        let catalog = CredentialCatalog::from_model(&model);
        let did_of: BTreeMap<_, _> = [("office".into(), did(1))].into_iter().collect();
        let entries = parse_trust_file(
            r#"[{"verifier":"clinic","credentialType":"health card","issuerActor":"office","effect":"deny"},
                {"verifier":"clinic","credentialType":"Health Card","issuerDid":"nope"}]"#,
        )
        .unwrap();
        let first = entries[0].resolve(&catalog, &did_of).unwrap();
        assert_eq!(first.credential_type, "Health Card");
        assert_eq!(first.issuer_did, did(1));
        assert_eq!(first.effect, TrustEffect::Deny);
        assert_eq!(
            entries[1].resolve(&catalog, &did_of).unwrap_err().code(),
            "E_TRUST_FILE"
        );
        assert!(parse_trust_file("{}").is_err());
    }
}
