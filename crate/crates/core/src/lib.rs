//! Goal models of self-sovereign identity ecosystems, compiled into
//! credential-exchanging agents.
//!
//! The crate is layered bottom-up:
//!
//! - [`model`]: iStar 2.0 metamodel, well-formedness rules and queries.
//! - [`pistar`]: piStar-compatible JSON import/export.
//! - [`dot`]: Graphviz export of the strategic dependency and rationale views.
//! - [`overlay`]: Issuer/Holder/Verifier role inference, credential flows,
//!   trust registries and SSI lint warnings.
//! - [`credential`]: keys, `did:sim` identifiers, canonical JSON, credential
//!   issuance, presentations and verification.
//! - [`sim`]: agent compilation, the discrete-event scheduler and goal
//!   label propagation.

pub mod credential;
pub mod dot;
pub mod model;
pub mod overlay;
pub mod pistar;
pub mod sim;

pub use credential::{
    canonical_bytes, create_presentation, generate_keypair, issue_credential, resolve_did, verify_credential,
    verify_presentation, Claims, Credential, Did, DidDirectory, DidDocument, KeyPair, Presentation,
    VerificationOutcome,
};
pub use model::{
    dependencies_of, refinement_forest, validate, Actor, ActorKind, ActorLink, ActorLinkKind, Dependency, Dependum,
    ElementKind, Identifier, IntentionalElement, InternalLink, LinkKind, Model, Polarity, ValidationReport,
};
pub use overlay::{
    build_trust_registry, derive_flows, infer_roles, lint_ssi, CredentialFlow, Evidence, FlowKind, RoleAssignment,
    SsiRole, TrustRegistry, VerbLexicon,
};
pub use pistar::{parse_model, serialize_model};
pub use sim::{compile_agents, evaluate_goals, run, LabelState, Scenario, SimConfig, Trace};
