use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::canonical::canonical_bytes;
use super::did::{resolve_did, Did, DidDirectory};
use super::keys::{Ed25519, KeyPair, SignatureScheme};
use super::CredentialError;
use crate::overlay::TrustRegistry;

/// String-valued claims with non-empty keys.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, String>", into = "BTreeMap<String, String>")]
pub struct Claims(BTreeMap<String, String>);

impl Claims {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<String>) -> Result<(), CredentialError> {
        let key = key.into();
        if key.is_empty() {
            return Err(CredentialError::EmptyClaimKey);
        }
        self.0.insert(key, value.into());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &String)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Mutable access for tamper harnesses; keys stay non-empty.
    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut String> {
        self.0.values_mut()
    }
}

impl TryFrom<BTreeMap<String, String>> for Claims {
    type Error = CredentialError;

    fn try_from(map: BTreeMap<String, String>) -> Result<Self, Self::Error> {
        if map.keys().any(String::is_empty) {
            return Err(CredentialError::EmptyClaimKey);
        }
        Ok(Claims(map))
    }
}

impl From<Claims> for BTreeMap<String, String> {
    fn from(claims: Claims) -> Self {
        claims.0
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Claims {
    /// Entries with empty keys are dropped.
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        Claims(
            iter.into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .filter(|(k, _)| !k.is_empty())
                .collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Credential {
    pub id: String,
    #[serde(rename = "type")]
    pub credential_type: String,
    pub issuer: Did,
    pub subject: Did,
    pub holder: Did,
    pub claims: Claims,
    pub issued_at: u64,
    #[serde(with = "hex::serde")]
    pub signature: Vec<u8>,
}

impl Credential {
    /// Everything except `id` and `signature`.
    pub fn payload(&self) -> Value {
        payload(
            &self.credential_type,
            &self.issuer,
            &self.subject,
            &self.holder,
            &self.claims,
            self.issued_at,
        )
    }

    pub fn payload_hash(&self) -> String {
        hex::encode(Sha256::digest(canonical_bytes(&self.payload())))
    }
}

fn payload(kind: &str, issuer: &Did, subject: &Did, holder: &Did, claims: &Claims, issued_at: u64) -> Value {
    json!({
        "type": kind,
        "issuer": issuer.as_str(),
        "subject": subject.as_str(),
        "holder": holder.as_str(),
        "claims": claims.0,
        "issuedAt": issued_at,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Presentation {
    pub credential: Credential,
    pub presenter: Did,
    #[serde(with = "hex::serde")]
    pub nonce: [u8; 16],
    #[serde(with = "hex::serde")]
    pub holder_proof: Vec<u8>,
}

/// The message a presenter signs: `credential.id` bytes followed by the nonce.
pub fn holder_proof_message(credential_id: &str, nonce: &[u8; 16]) -> Vec<u8> {
    let mut message = credential_id.as_bytes().to_vec();
    message.extend_from_slice(nonce);
    message
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CredentialChecks {
    pub integrity: bool,
    pub issuer_signature: bool,
    /// Error code when the issuer could not be resolved.
    pub reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationOutcome {
    pub subject_binding: bool,
    pub issuer_signature: bool,
    pub integrity: bool,
    pub issuer_trusted: bool,
    pub verdict: bool,
    pub fail_reason: String,
}

impl VerificationOutcome {
    fn from_checks(integrity: bool, issuer_signature: bool, subject_binding: bool, issuer_trusted: bool) -> Self {
        let fail_reason = [
            ("integrity", integrity),
            ("issuerSignature", issuer_signature),
            ("subjectBinding", subject_binding),
            ("issuerTrusted", issuer_trusted),
        ]
        .into_iter()
        .find(|(_, ok)| !ok)
        .map(|(name, _)| name.to_owned())
        .unwrap_or_default();
        VerificationOutcome {
            subject_binding,
            issuer_signature,
            integrity,
            issuer_trusted,
            verdict: fail_reason.is_empty(),
            fail_reason,
        }
    }
}

/// Credential operations over a chosen signature scheme.
#[derive(Clone, Copy, Debug, Default)]
pub struct Suite<S> {
    scheme: S,
}

impl<S: SignatureScheme> Suite<S> {
    pub fn new(scheme: S) -> Self {
        Suite { scheme }
    }

    pub fn scheme(&self) -> &S {
        &self.scheme
    }

    pub fn keypair(&self, seed: [u8; 32]) -> KeyPair {
        KeyPair::from_seed_with(&self.scheme, seed)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn issue_credential(
        &self,
        issuer_keys: &KeyPair,
        issuer: &Did,
        subject: &Did,
        holder: &Did,
        credential_type: &str,
        claims: Claims,
        issued_at: u64,
    ) -> Result<Credential, CredentialError> {
        if holder == issuer {
            return Err(CredentialError::SelfIssue);
        }
        let body = payload(credential_type, issuer, subject, holder, &claims, issued_at);
        let bytes = canonical_bytes(&body);
        Ok(Credential {
            id: hex::encode(Sha256::digest(&bytes)),
            credential_type: credential_type.to_owned(),
            issuer: issuer.clone(),
            subject: subject.clone(),
            holder: holder.clone(),
            claims,
            issued_at,
            signature: issuer_keys.sign_with(&self.scheme, &bytes),
        })
    }

    pub fn verify_credential(&self, credential: &Credential, directory: &DidDirectory) -> CredentialChecks {
        let bytes = canonical_bytes(&credential.payload());
        let integrity = hex::encode(Sha256::digest(&bytes)) == credential.id;
        match resolve_did(&credential.issuer, directory) {
            Ok(doc) => CredentialChecks {
                integrity,
                issuer_signature: self.scheme.verify(&doc.verification_key, &bytes, &credential.signature),
                reason: None,
            },
            Err(err) => CredentialChecks {
                integrity,
                issuer_signature: false,
                reason: Some(err.code().to_owned()),
            },
        }
    }

    pub fn create_presentation(
        &self,
        holder_keys: &KeyPair,
        presenter: &Did,
        credential: &Credential,
        nonce: [u8; 16],
    ) -> Presentation {
        Presentation {
            credential: credential.clone(),
            presenter: presenter.clone(),
            nonce,
            holder_proof: holder_keys.sign_with(&self.scheme, &holder_proof_message(&credential.id, &nonce)),
        }
    }

    /// Checks run in the order integrity, issuer signature, subject binding,
    /// issuer trust; `fail_reason` names the first failure.
    pub fn verify_presentation(
        &self,
        presentation: &Presentation,
        directory: &DidDirectory,
        trust: &TrustRegistry,
        verifier: &str,
        expected_nonce: &[u8; 16],
    ) -> VerificationOutcome {
        let credential = &presentation.credential;
        let checks = self.verify_credential(credential, directory);
        let proof_valid = resolve_did(&presentation.presenter, directory).is_ok_and(|doc| {
            self.scheme.verify(
                &doc.verification_key,
                &holder_proof_message(&credential.id, &presentation.nonce),
                &presentation.holder_proof,
            )
        });
        let subject_binding =
            proof_valid && presentation.presenter == credential.holder && &presentation.nonce == expected_nonce;
        let issuer_trusted = trust.accepts(verifier, &credential.credential_type, &credential.issuer);
        VerificationOutcome::from_checks(
            checks.integrity,
            checks.issuer_signature,
            subject_binding,
            issuer_trusted,
        )
    }
}

const DEFAULT: Suite<Ed25519> = Suite { scheme: Ed25519 };

#[allow(clippy::too_many_arguments)]
pub fn issue_credential(
    issuer_keys: &KeyPair,
    issuer: &Did,
    subject: &Did,
    holder: &Did,
    credential_type: &str,
    claims: Claims,
    issued_at: u64,
) -> Result<Credential, CredentialError> {
    DEFAULT.issue_credential(issuer_keys, issuer, subject, holder, credential_type, claims, issued_at)
}

pub fn verify_credential(credential: &Credential, directory: &DidDirectory) -> CredentialChecks {
    DEFAULT.verify_credential(credential, directory)
}

pub fn create_presentation(
    holder_keys: &KeyPair,
    presenter: &Did,
    credential: &Credential,
    nonce: [u8; 16],
) -> Presentation {
    DEFAULT.create_presentation(holder_keys, presenter, credential, nonce)
}

pub fn verify_presentation(
    presentation: &Presentation,
    directory: &DidDirectory,
    trust: &TrustRegistry,
    verifier: &str,
    expected_nonce: &[u8; 16],
) -> VerificationOutcome {
    DEFAULT.verify_presentation(presentation, directory, trust, verifier, expected_nonce)
}
