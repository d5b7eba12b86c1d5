//! Verifiable credentials over Ed25519 keys and self-certifying `did:sim`
//! identifiers.
//!
//! A credential's `id` is the SHA-256 of its canonical payload and the
//! issuer signs the same bytes. A presentation binds the credential to a
//! verifier nonce with a signature by the presenter. Verification yields
//! four independent flags: integrity, issuer signature, subject binding
//! and issuer trust.

mod canonical;
mod did;
mod keys;
mod vc;

use thiserror::Error;

pub use canonical::{canonical_bytes, canonical_string};
pub use did::{did_from_public_key, resolve_did, Did, DidDirectory, DidDocument};
pub use keys::{generate_keypair, Ed25519, KeyPair, SignatureScheme};
pub use vc::{
    create_presentation, holder_proof_message, issue_credential, verify_credential, verify_presentation, Claims,
    Credential, CredentialChecks, Presentation, Suite, VerificationOutcome,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CredentialError {
    #[error("holder and issuer are the same DID")]
    SelfIssue,
    #[error("DID '{0}' does not resolve")]
    DidUnresolved(Did),
    #[error("'{0}' is not a did:sim identifier")]
    InvalidDid(String),
    #[error("claim keys must be non-empty")]
    EmptyClaimKey,
}

impl CredentialError {
    pub fn code(&self) -> &'static str {
        match self {
            CredentialError::SelfIssue => "E_SELF_ISSUE",
            CredentialError::DidUnresolved(_) => "E_DID_UNRESOLVED",
            CredentialError::InvalidDid(_) => "E_DID_INVALID",
            CredentialError::EmptyClaimKey => "E_CLAIM_KEY",
        }
    }
}
