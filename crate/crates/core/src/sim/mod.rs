//! Agents compiled from a model and its SSI overlay, run on a deterministic
//! discrete-event scheduler.
//!
//! Virtual time is an integer tick. A single queue ordered by (tick,
//! insertion number) holds message deliveries and retry timers; a
//! SplitMix64 stream seeded from the config decides drops and nonces and
//! nothing else. Goal labels are re-evaluated after every step.

mod agents;
mod config;
mod engine;
mod goals;
mod trace;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::credential::Did;
use crate::model::{Identifier, Model};
use crate::overlay::{
    build_trust_registry, derive_flows, infer_roles, lint_ssi, out_of_band_issuers, CredentialCatalog, CredentialFlow,
    Evidence, OverlayError, RoleAssignment, SsiRole, SsiWarning, TrustEntry, TrustOverride, TrustRegistry, VerbLexicon,
    CLAIM_PREFIX,
};

pub use agents::{
    actor_did, actor_keys, actor_seed, compile_agents, subject_did, AgentSpec, Behavior, BootstrapCredential,
};
pub use config::{LatencyRule, Ratio, SimConfig, SplitMix64};
pub use engine::{run, run_with_harness, Harness, HarnessAction, MessageFilter, Tamper};
pub use goals::{contribute, evaluate_goals, LabelState};
pub use trace::{Event, EventRecord, MessageKind, MessageSummary, Termination, Trace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("dependency '{dependency}' needs '{actor}' to be a {role:?} of '{credential_type}'")]
    CompileRole {
        actor: Identifier,
        role: SsiRole,
        credential_type: String,
        dependency: Identifier,
    },
    #[error("bootstrap credential: {0}")]
    Bootstrap(String),
    #[error("ambiguous credential flows: {}", .0.iter().map(Identifier::as_str).collect::<Vec<_>>().join(", "))]
    Ambiguous(Vec<Identifier>),
    #[error(transparent)]
    Overlay(#[from] OverlayError),
}

impl SimError {
    pub fn code(&self) -> &'static str {
        match self {
            SimError::Config(_) => "E_CONFIG",
            SimError::CompileRole { .. } => "E_COMPILE_ROLE",
            SimError::Bootstrap(_) => "E_BOOTSTRAP",
            SimError::Ambiguous(_) => "E_FLOW_AMBIGUOUS",
            SimError::Overlay(e) => e.code(),
        }
    }
}

/// Everything a run needs, derived from a model in one place: roles, flows,
/// lint warnings, the trust registry and the credentials holders start with.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub model: Model,
    pub roles: Vec<RoleAssignment>,
    pub flows: Vec<CredentialFlow>,
    pub warnings: Vec<SsiWarning>,
    pub trust: TrustRegistry,
    pub bootstrap: Vec<BootstrapCredential>,
    pub config: SimConfig,
    /// Drop flows with unresolved direction instead of refusing to run.
    pub allow_ambiguous: bool,
}

impl Scenario {
    pub fn new(model: Model, config: SimConfig) -> Result<Self, SimError> {
        Scenario::with_trust(model, &VerbLexicon::default(), &[], config)
    }

    /// Builds the default trust policy, adds every out-of-band issuer named
    /// by an `ssi.issuer` annotation, then applies the trust-file entries.
    pub fn with_trust(
        model: Model,
        lexicon: &VerbLexicon,
        entries: &[TrustEntry],
        config: SimConfig,
    ) -> Result<Self, SimError> {
        let roles = infer_roles(&model, lexicon);
        let flows = derive_flows(&model, &roles, lexicon);
        let warnings = lint_ssi(&model, &roles, &flows);
        let did_of: BTreeMap<Identifier, Did> = model
            .actors
            .iter()
            .map(|a| (a.id.clone(), actor_did(config.seed, a.id.as_str())))
            .collect();
        let verifiers: BTreeSet<(&Identifier, &str)> = roles
            .iter()
            .filter(|r| r.role == SsiRole::Verifier)
            .map(|r| (&r.actor, r.credential_type.as_str()))
            .collect();

        let mut bootstrap = BTreeSet::new();
        let mut overrides = Vec::new();
        for oob in out_of_band_issuers(&model, &flows) {
            let claims = model
                .dependency(oob.dependency.as_str())
                .map(|d| {
                    d.annotations
                        .iter()
                        .filter_map(|(k, v)| k.strip_prefix(CLAIM_PREFIX).map(|k| (k.to_owned(), v.clone())))
                        .filter(|(k, _)| !k.is_empty())
                        .collect()
                })
                .unwrap_or_default();
            bootstrap.insert(BootstrapCredential {
                credential_type: oob.credential_type.clone(),
                issuer: oob.issuer.clone(),
                holder: oob.holder.clone(),
                subject: None,
                claims,
            });
            if verifiers.contains(&(&oob.verifier, oob.credential_type.as_str())) {
                overrides.push(TrustOverride::allow(
                    oob.verifier.clone(),
                    oob.credential_type.clone(),
                    did_of[&oob.issuer].clone(),
                ));
            }
        }
        let catalog = CredentialCatalog::from_model(&model);
        for entry in entries {
            overrides.push(entry.resolve(&catalog, &did_of)?);
        }
        let trust = build_trust_registry(&roles, &did_of, &overrides)?;
        Ok(Scenario {
            model,
            roles,
            flows,
            warnings,
            trust,
            bootstrap: bootstrap.into_iter().collect(),
            config,
            allow_ambiguous: false,
        })
    }

    pub fn did_of(&self, actor: &str) -> Did {
        actor_did(self.config.seed, actor)
    }

    /// Dependencies whose flow direction could not be decided.
    pub fn ambiguous(&self) -> Vec<Identifier> {
        self.flows
            .iter()
            .filter(|f| f.evidence == Evidence::Unresolved)
            .map(|f| f.dependency.clone())
            .collect()
    }

    pub fn compile(&self) -> Result<Vec<AgentSpec>, SimError> {
        let ambiguous = self.ambiguous();
        if !ambiguous.is_empty() && !self.allow_ambiguous {
            return Err(SimError::Ambiguous(ambiguous));
        }
        let flows: Vec<CredentialFlow> = self
            .flows
            .iter()
            .filter(|f| f.evidence != Evidence::Unresolved)
            .cloned()
            .collect();
        compile_agents(
            &self.model,
            &self.roles,
            &flows,
            &self.trust,
            &self.bootstrap,
            self.config.seed,
        )
    }

    pub fn run(&self) -> Result<Trace, SimError> {
        self.run_with(&Harness::default())
    }

    pub fn run_with(&self, harness: &Harness) -> Result<Trace, SimError> {
        run_with_harness(&self.model, self.compile()?, &self.config, harness)
    }

    /// Root goals (goals refining nothing) with their final labels.
    pub fn root_labels(&self, trace: &Trace) -> Vec<(Identifier, String, LabelState)> {
        self.model
            .root_goals()
            .into_iter()
            .map(|g| (g.id.clone(), g.name.clone(), trace.label(g.id.as_str())))
            .collect()
    }
}
