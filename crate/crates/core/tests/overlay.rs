mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use ssiforge_core::overlay::{LintCode, TrustOverride};
use ssiforge_core::sim::actor_did;
use ssiforge_core::{
    build_trust_registry, derive_flows, infer_roles, lint_ssi, Evidence, FlowKind, Identifier, Model, SsiRole,
    VerbLexicon,
};

use common::{BIRTH_CERTIFICATE, BND, MOTHERS_ID};

fn roles_of(model: &Model) -> BTreeSet<(String, SsiRole, String)> {
    infer_roles(model, &VerbLexicon::default())
        .into_iter()
        .map(|r| (r.actor.to_string(), r.role, r.credential_type))
        .collect()
}

fn role(actor: &str, role: SsiRole, t: &str) -> (String, SsiRole, String) {
    (actor.to_owned(), role, t.to_owned())
}

fn words(text: &str) -> String {
    let kept: String = text
        .to_lowercase()
        .chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .collect();
    kept.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Role inference written out longhand: resource dependums (through the
/// `ssi.alias.*` metadata) are the credential types; a task names a type
/// when its words contain one of the type's spellings.
fn roles_oracle(model: &Model) -> BTreeSet<(String, SsiRole, String)> {
    let mut spellings: Vec<(String, String)> = Vec::new();
    let alias = |name: &str| -> Option<String> {
        model
            .metadata
            .iter()
            .find(|(k, _)| k.strip_prefix("ssi.alias.").is_some_and(|a| words(a) == words(name)))
            .map(|(_, v)| v.clone())
    };
    for dep in &model.dependencies {
        if dep.dependum.kind != ssiforge_core::ElementKind::Resource {
            continue;
        }
        let canonical = alias(&dep.dependum.name).unwrap_or_else(|| dep.dependum.name.clone());
        spellings.push((words(&dep.dependum.name), canonical.clone()));
        spellings.push((words(&canonical), canonical));
    }
    for (k, v) in &model.metadata {
        if let Some(a) = k.strip_prefix("ssi.alias.") {
            if spellings.iter().any(|(_, c)| c == v) {
                spellings.push((words(a), v.clone()));
            }
        }
    }
    let mut out = BTreeSet::new();
    for actor in &model.actors {
        for task in actor
            .elements
            .iter()
            .filter(|e| e.kind == ssiforge_core::ElementKind::Task)
        {
            let name = words(&task.name);
            let verb = if name.starts_with("issue") {
                SsiRole::Issuer
            } else if name.starts_with("check") || name.starts_with("verify") {
                SsiRole::Verifier
            } else if name.starts_with("provide") || name.starts_with("present") {
                SsiRole::Holder
            } else {
                continue;
            };
            for (spelling, canonical) in &spellings {
                if name.contains(spelling.as_str()) {
                    out.insert((actor.id.to_string(), verb, canonical.clone()));
                }
            }
        }
    }
    for dep in &model.dependencies {
        let Some((_, t)) = spellings.iter().find(|(s, _)| *s == words(&dep.dependum.name)) else {
            continue;
        };
        if out.contains(&(dep.dependee.to_string(), SsiRole::Issuer, t.clone())) {
            out.insert((dep.depender.to_string(), SsiRole::Holder, t.clone()));
        }
    }
    out
}

fn renamed(model: &Model, task: &str, name: &str) -> Model {
    let mut m = model.clone();
    for actor in &mut m.actors {
        for e in &mut actor.elements {
            if e.id == task {
                e.name = name.to_owned();
            }
        }
    }
    m
}

fn task_id(model: &Model, name: &str) -> Identifier {
    model.elements().find(|e| e.name == name).unwrap().id.clone()
}

#[test]
fn fixture_roles_match_the_case_study() {
    let got = roles_of(&common::fixture());
    let mut expected = BTreeSet::from([
        role("Midwife", SsiRole::Verifier, MOTHERS_ID),
        role("Midwife", SsiRole::Issuer, BND),
        role("Registrar", SsiRole::Verifier, MOTHERS_ID),
        role("Registrar", SsiRole::Verifier, BND),
        role("Registrar", SsiRole::Issuer, BIRTH_CERTIFICATE),
    ]);
    for t in [MOTHERS_ID, BND, BIRTH_CERTIFICATE] {
        expected.insert(role("Mother", SsiRole::Holder, t));
    }
    assert_eq!(got, expected);
}

#[test]
fn fixture_roles_match_oracle_before_and_after_mutation() {
    let model = common::fixture();
    assert_eq!(roles_of(&model), roles_oracle(&model));
    let mutated = renamed(&model, task_id(&model, "Issue BND").as_str(), "Make BND");
    assert_eq!(roles_of(&mutated), roles_oracle(&mutated));
    assert!(!roles_of(&mutated).contains(&role("Midwife", SsiRole::Issuer, BND)));
}

#[test]
fn model_without_tasks_has_no_roles() {
    let mut model = common::fixture();
    for actor in &mut model.actors {
        actor.elements.retain(|e| e.kind != ssiforge_core::ElementKind::Task);
    }
    assert!(roles_of(&model).is_empty());
}

#[test]
fn fixture_flows() {
    let model = common::fixture();
    let lexicon = VerbLexicon::default();
    let roles = infer_roles(&model, &lexicon);
    let flows = derive_flows(&model, &roles, &lexicon);
    assert_eq!(flows.len(), 5);
    for flow in &flows {
        assert!(!matches!(flow.evidence, Evidence::Unresolved), "{flow:?}");
    }
    let bnd_issue = flows
        .iter()
        .find(|f| f.credential_type == BND && f.to == "Mother")
        .unwrap();
    assert_eq!(bnd_issue.kind, FlowKind::Issuance);
    assert_eq!(bnd_issue.from, "Midwife");
    assert_eq!(bnd_issue.evidence, Evidence::Verb(task_id(&model, "Issue BND")));

    let certificate = flows.iter().find(|f| f.credential_type == BIRTH_CERTIFICATE).unwrap();
    assert_eq!(certificate.kind, FlowKind::Issuance);

    let ids: Vec<_> = flows.iter().filter(|f| f.credential_type == MOTHERS_ID).collect();
    assert_eq!(ids.len(), 2);
    for f in ids {
        assert_eq!((f.kind, f.from.as_str()), (FlowKind::Presentation, "Mother"));
    }
    let midwife_check = flows
        .iter()
        .find(|f| f.credential_type == MOTHERS_ID && f.to == "Midwife")
        .unwrap();
    assert!(matches!(midwife_check.evidence, Evidence::Verb(_)));
}

#[test]
fn annotation_beats_issuing_dependee() {
    let mut model = common::fixture();
    let dep = model
        .dependencies
        .iter_mut()
        .find(|d| d.dependum.name == BND && d.depender == "Mother")
        .unwrap();
    dep.annotations.insert("ssi".into(), "present".into());
    let id = dep.id.clone();
    let lexicon = VerbLexicon::default();
    let roles = infer_roles(&model, &lexicon);
    let flow = derive_flows(&model, &roles, &lexicon)
        .into_iter()
        .find(|f| f.dependency == id)
        .unwrap();
    assert_eq!(
        (flow.kind, flow.evidence),
        (FlowKind::Presentation, Evidence::Annotation)
    );
}

#[test]
fn renamed_issue_task_gives_one_ambiguity() {
    let model = common::fixture();
    let lexicon = VerbLexicon::default();
    let lint = |m: &Model| {
        let roles = infer_roles(m, &lexicon);
        let flows = derive_flows(m, &roles, &lexicon);
        lint_ssi(m, &roles, &flows)
            .into_iter()
            .filter(|w| w.code == LintCode::FlowAmbiguous)
            .collect::<Vec<_>>()
    };
    assert!(lint(&model).is_empty());
    let mutated = renamed(&model, task_id(&model, "Issue BND").as_str(), "Make BND");
    let warnings = lint(&mutated);
    assert_eq!(warnings.len(), 1, "{warnings:?}");
    let dep = mutated.dependency(&warnings[0].subject).unwrap();
    assert_eq!((dep.dependum.name.as_str(), dep.depender.as_str()), (BND, "Mother"));
    assert!(lint_ssi(&Model::default(), &[], &[]).is_empty());
}

fn dids(model: &Model) -> BTreeMap<Identifier, ssiforge_core::Did> {
    model
        .actors
        .iter()
        .map(|a| (a.id.clone(), actor_did(0, a.id.as_str())))
        .collect()
}

#[test]
fn trust_registry_defaults_and_overrides() {
    let model = common::fixture();
    let roles = infer_roles(&model, &VerbLexicon::default());
    let did_of = dids(&model);
    let registry = build_trust_registry(&roles, &did_of, &[]).unwrap();
    assert!(registry.accepts("Registrar", BND, &did_of["Midwife"]));
    assert!(!registry.accepts("Midwife", MOTHERS_ID, &did_of["ID Agency"]));

    let agency = TrustOverride::allow("Midwife", MOTHERS_ID, did_of["ID Agency"].clone());
    let registry = build_trust_registry(&roles, &did_of, &[agency]).unwrap();
    assert!(registry.accepts("Midwife", MOTHERS_ID, &did_of["ID Agency"]));

    let bogus = TrustOverride::allow("Mother", BND, did_of["Midwife"].clone());
    let err = build_trust_registry(&roles, &did_of, &[bogus]).unwrap_err();
    assert_eq!(err.code(), "E_TRUST_NOT_VERIFIER");
}

#[test]
fn no_issuers_means_empty_accepted_sets() {
    let model = common::fixture();
    let roles: Vec<_> = infer_roles(&model, &VerbLexicon::default())
        .into_iter()
        .filter(|r| r.role != SsiRole::Issuer)
        .collect();
    let registry = build_trust_registry(&roles, &dids(&model), &[]).unwrap();
    let mut keys = 0;
    for (_, _, accepted) in registry.entries() {
        assert!(accepted.is_empty());
        keys += 1;
    }
    assert_eq!(keys, 3);
}

proptest! {
    #[test]
    fn actor_names_do_not_matter(names in proptest::collection::vec("[A-Za-z ]{1,12}", 4)) {
        let model = common::fixture();
        let mut m = model.clone();
        for (actor, name) in m.actors.iter_mut().zip(&names) {
            actor.name = name.clone();
        }
        prop_assert_eq!(roles_of(&m), roles_of(&model));
    }

    #[test]
    fn unlisted_verbs_only_remove_evidence(pick in any::<prop::sample::Index>(), prefix in "(Make|Handle|Do|Send)") {
        let lexicon = VerbLexicon::default();
        let model = common::fixture();
        let tasks: Vec<_> = model.elements().filter(|e| e.kind == ssiforge_core::ElementKind::Task).collect();
        let task = pick.get(&tasks);
        let rest = task.name.split_once(' ').map_or("", |(_, r)| r);
        let mutated = renamed(&model, task.id.as_str(), &format!("{prefix} {rest}"));

        let before = derive_flows(&model, &infer_roles(&model, &lexicon), &lexicon);
        let roles = infer_roles(&mutated, &lexicon);
        let after = derive_flows(&mutated, &roles, &lexicon);
        prop_assert_eq!(before.len(), after.len());
        for (b, a) in before.iter().zip(&after) {
            // a surviving verb may be another task of the same actor, never the renamed one
            if let Evidence::Verb(t) = &a.evidence {
                prop_assert!(matches!(b.evidence, Evidence::Verb(_)));
                prop_assert_eq!(a.kind, b.kind);
                prop_assert_ne!(t, &task.id);
            }
            if a.kind != b.kind {
                prop_assert!(matches!(a.evidence, Evidence::Annotation | Evidence::Unresolved));
            }
        }
        // receivers of issued credentials hold them
        for f in after.iter().filter(|f| f.kind == FlowKind::Issuance) {
            prop_assert!(roles.iter().any(|r| r.actor == f.to && r.role == SsiRole::Holder && r.credential_type == f.credential_type));
        }
        prop_assert_eq!(infer_roles(&mutated, &lexicon), roles);
    }
}
