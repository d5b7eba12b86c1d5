mod common;

use proptest::prelude::*;
use ssiforge_core::credential::did_from_public_key;
use ssiforge_core::sim::{actor_keys, Behavior, Event, MessageKind, Ratio, Tamper, Termination};
use ssiforge_core::{compile_agents, LabelState, SimConfig, SsiRole, Trace};

use common::scenarios::{self, certificate_issued, root, TAMPERS};
use common::{BIRTH_CERTIFICATE, BND, MOTHERS_ID};

/// Send = Deliver + Drop, ordered events, and every presented nonce was
/// requested earlier by the verifier it is presented to.
fn check_invariants(trace: &Trace) -> Result<(), String> {
    let (sends, delivers, drops) = (trace.count("Send"), trace.count("Deliver"), trace.count("Drop"));
    if sends != delivers + drops {
        return Err(format!("{sends} sends, {delivers} deliveries, {drops} drops"));
    }
    for pair in trace.events.windows(2) {
        if pair[1].seq <= pair[0].seq || pair[1].tick < pair[0].tick {
            return Err(format!("out of order: {:?} then {:?}", pair[0], pair[1]));
        }
    }
    let mut requested: Vec<(&str, &str)> = Vec::new();
    for record in &trace.events {
        if let Event::Send { message } = &record.event {
            let nonce = message.nonce.as_deref();
            match (message.kind, nonce) {
                (MessageKind::ProofRequest, Some(n)) => requested.push((message.from.as_str(), n)),
                (MessageKind::ProofPresentation, Some(n)) if !requested.contains(&(message.to.as_str(), n)) => {
                    return Err(format!("presentation {} carries an unrequested nonce", message.msg_id));
                }
                (MessageKind::ProofRequest | MessageKind::ProofPresentation, None) => {
                    return Err(format!("message {} has no nonce", message.msg_id));
                }
                _ => {}
            }
        }
    }
    Ok(())
}

/// A failed BND verification at the Registrar rules out a Birth Certificate.
fn check_safety(trace: &Trace) -> Result<(), String> {
    let bnd_failed = trace.verifications().any(|e| {
        matches!(e, Event::Verify { verifier, credential_type, outcome, .. }
            if verifier == "Registrar" && credential_type == BND && !outcome.verdict)
    });
    if bnd_failed && certificate_issued(trace) {
        return Err("Birth Certificate issued after a failed BND check".into());
    }
    Ok(())
}

#[test]
fn honest_run() {
    let trace = scenarios::honest(42);
    assert_eq!(trace.termination, Termination::Quiescence);
    assert!(trace.end_tick < 200, "{}", trace.end_tick);
    assert_eq!(root(&trace), LabelState::Satisfied);
    assert!(certificate_issued(&trace));
    let mut verified = 0;
    for e in trace.verifications() {
        if let Event::Verify {
            outcome, copy_check, ..
        } = e
        {
            assert!(outcome.verdict, "{e:?}");
            assert!(outcome.integrity && outcome.issuer_signature && outcome.subject_binding && outcome.issuer_trusted);
            assert_ne!(*copy_check, Some(false));
            verified += 1;
        }
    }
    // Mother's ID twice, BND once
    assert_eq!(verified, 3);
    check_invariants(&trace).unwrap();
}

#[test]
fn runs_are_byte_identical() {
    let a = scenarios::honest(42).to_jsonl();
    let b = scenarios::honest(42).to_jsonl();
    assert_eq!(a, b);
    let lines: Vec<&str> = a.lines().collect();
    assert!(lines[0].starts_with(r#"{"config":"#));
    assert!(lines.last().unwrap().contains(r#""finalLabels":"#));
    assert_eq!(Trace::from_jsonl(&a).unwrap(), scenarios::honest(42));
    assert_ne!(a, scenarios::honest(43).to_jsonl());
}

#[test]
fn every_drop_denies_the_root_goal() {
    let trace = scenarios::with_drops(42, Ratio::ONE);
    assert_eq!(root(&trace), LabelState::Denied);
    assert!(trace.count("Drop") >= 1);
    assert_eq!(trace.count("Deliver"), 0);
    check_invariants(&trace).unwrap();
}

#[test]
fn tampered_bnd_presentations_are_caught() {
    for tamper in TAMPERS {
        let trace = scenarios::tampered(42, tamper);
        let failures = trace.flag_failures();
        let expected = match tamper {
            Tamper::MutateClaim => "integrity",
            Tamper::WrongIssuerSignature => "issuerSignature",
            Tamper::WrongPresenter | Tamper::StaleNonce => "subjectBinding",
        };
        assert!(failures[expected] >= 1, "{tamper:?}: {failures:?}");
        assert!(!certificate_issued(&trace), "{tamper:?}");
        assert_eq!(root(&trace), LabelState::Denied, "{tamper:?}");
        check_invariants(&trace).unwrap();
        check_safety(&trace).unwrap();
    }
}

#[test]
fn restricted_trust_blocks_the_certificate() {
    let trace = scenarios::restricted_trust(42);
    assert!(trace.flag_failures()["issuerTrusted"] >= 1);
    assert_eq!(root(&trace), LabelState::Denied);
    assert!(!certificate_issued(&trace));
}

#[test]
fn missing_record_copy_denies_check_bnd() {
    let trace = scenarios::without_record_copy(42);
    assert_eq!(trace.label("r.check_bnd"), LabelState::Denied);
    assert!(trace.flag_failures()["copyCheck"] >= 1);
    assert!(!trace.sends().any(|(_, m)| m.kind == MessageKind::RecordCopy));
    assert!(!certificate_issued(&trace));
}

#[test]
fn compiled_fixture_agents() {
    let scenario = scenarios::scenario(SimConfig::with_seed(42));
    let agents = scenario.compile().unwrap();
    assert_eq!(agents.len(), 4);
    for agent in &agents {
        assert_eq!(agent.did, did_from_public_key(agent.keys.public_key()));
        assert_eq!(agent.keys, actor_keys(42, agent.actor.as_str()));
        assert!(agent.wallet.iter().all(|c| c.holder == agent.did));
    }
    let by = |actor: &str| agents.iter().find(|a| a.actor == actor).unwrap();
    let agency = by("ID Agency");
    let mother = by("Mother");
    let id = mother
        .wallet
        .iter()
        .find(|c| c.credential_type == MOTHERS_ID)
        .expect("Mother holds her ID");
    assert_eq!(id.issuer, agency.did);

    let midwife = &by("Midwife").behaviors;
    let request = midwife
        .iter()
        .position(|b| matches!(b, Behavior::RequestProof { credential_type, .. } if credential_type == MOTHERS_ID))
        .expect("Midwife checks the Mother's ID");
    let issue = midwife
        .iter()
        .position(|b| matches!(b, Behavior::Issue { credential_type, .. } if credential_type == BND))
        .expect("Midwife issues the BND");
    assert!(request < issue);
    assert!(midwife
        .iter()
        .any(|b| matches!(b, Behavior::SendCopy { to, .. } if to == "Registrar")));
    let registrar = &by("Registrar").behaviors;
    assert!(registrar
        .iter()
        .any(|b| matches!(b, Behavior::Issue { credential_type, requires, .. }
            if credential_type == BIRTH_CERTIFICATE && requires.len() == 2)));
}

#[test]
fn verifier_flow_without_verifier_role_is_rejected() {
    let scenario = scenarios::scenario(SimConfig::default());
    let roles: Vec<_> = scenario
        .roles
        .iter()
        .filter(|r| !(r.actor == "Registrar" && r.role == SsiRole::Verifier))
        .cloned()
        .collect();
    let err = compile_agents(
        &scenario.model,
        &roles,
        &scenario.flows,
        &scenario.trust,
        &scenario.bootstrap,
        0,
    )
    .unwrap_err();
    assert_eq!(err.code(), "E_COMPILE_ROLE");
}

#[test]
fn invalid_config_is_rejected() {
    let config = SimConfig {
        max_ticks: 0,
        ..SimConfig::default()
    };
    let err = scenarios::scenario(config).run().unwrap_err();
    assert_eq!(err.code(), "E_CONFIG");
}

#[test]
fn horizon_cuts_the_run_short() {
    let config = SimConfig {
        max_ticks: 3,
        ..SimConfig::with_seed(42)
    };
    let trace = scenarios::scenario(config).run().unwrap();
    assert_eq!(trace.termination, Termination::Timeout);
    assert_ne!(root(&trace), LabelState::Satisfied);
    check_invariants(&trace).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn invariants_hold_under_loss(seed in any::<u64>(), num in 0u64..=4) {
        let trace = scenarios::with_drops(seed, Ratio::new(num, 4).unwrap());
        prop_assert!(check_invariants(&trace).is_ok(), "{:?}", check_invariants(&trace));
        prop_assert!(check_safety(&trace).is_ok());
        if num == 0 {
            prop_assert_eq!(root(&trace), LabelState::Satisfied);
            prop_assert!(trace.end_tick < 200);
        }
    }

    #[test]
    fn tampering_never_yields_a_certificate(seed in any::<u64>(), which in 0..TAMPERS.len()) {
        let trace = scenarios::tampered(seed, TAMPERS[which]);
        prop_assert!(check_invariants(&trace).is_ok(), "{:?}", check_invariants(&trace));
        prop_assert!(check_safety(&trace).is_ok());
        prop_assert!(!certificate_issued(&trace));
    }

    #[test]
    fn honest_runs_are_deterministic_for_any_seed(seed in any::<u64>()) {
        prop_assert_eq!(scenarios::honest(seed).to_jsonl(), scenarios::honest(seed).to_jsonl());
    }
}
