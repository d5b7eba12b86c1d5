//! The fixture runs the acceptance criteria talk about.

use ssiforge_core::overlay::parse_trust_file;
use ssiforge_core::sim::{Harness, MessageFilter, MessageKind, Ratio, Tamper};
use ssiforge_core::{LabelState, Scenario, SimConfig, Trace, VerbLexicon};

use super::{fixture, repo_root, BIRTH_CERTIFICATE, BND, MOTHER_GOAL};

pub const TAMPERS: [Tamper; 4] = [
    Tamper::MutateClaim,
    Tamper::WrongIssuerSignature,
    Tamper::WrongPresenter,
    Tamper::StaleNonce,
];

pub fn scenario(config: SimConfig) -> Scenario {
    Scenario::new(fixture(), config).expect("fixture scenario")
}

pub fn honest(seed: u64) -> Trace {
    scenario(SimConfig::with_seed(seed)).run().expect("honest run")
}

pub fn with_drops(seed: u64, p: Ratio) -> Trace {
    let config = SimConfig {
        drop_probability: p,
        ..SimConfig::with_seed(seed)
    };
    scenario(config).run().expect("lossy run")
}

/// The Mother's BND presentation to the Registrar is corrupted.
pub fn tampered(seed: u64, tamper: Tamper) -> Trace {
    let harness = Harness::new().tamper("Mother", "Registrar", BND, tamper);
    scenario(SimConfig::with_seed(seed))
        .run_with(&harness)
        .expect("tampered run")
}

/// The Midwife's copy of the BND never reaches the Registrar.
pub fn without_record_copy(seed: u64) -> Trace {
    let harness = Harness::new().suppress(MessageFilter::new(MessageKind::RecordCopy).to("Registrar"));
    scenario(SimConfig::with_seed(seed))
        .run_with(&harness)
        .expect("suppressed run")
}

pub fn restricted_trust(seed: u64) -> Trace {
    let text = std::fs::read_to_string(repo_root().join("fixtures/trust_restricted.json")).unwrap();
    let entries = parse_trust_file(&text).unwrap();
    Scenario::with_trust(fixture(), &VerbLexicon::default(), &entries, SimConfig::with_seed(seed))
        .unwrap()
        .run()
        .unwrap()
}

pub fn root(trace: &Trace) -> LabelState {
    trace.label(MOTHER_GOAL)
}

pub fn certificate_issued(trace: &Trace) -> bool {
    trace.issued(BIRTH_CERTIFICATE)
}
