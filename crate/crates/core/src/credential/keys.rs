use std::fmt;

use ed25519_dalek::{Signature, Signer, SigningKey, Verifier, VerifyingKey};

/// A deterministic signature algorithm keyed by a 32-byte seed.
pub trait SignatureScheme: Send + Sync {
    fn name(&self) -> &'static str;
    fn public_key(&self, seed: &[u8; 32]) -> [u8; 32];
    fn sign(&self, seed: &[u8; 32], message: &[u8]) -> Vec<u8>;
    fn verify(&self, public_key: &[u8; 32], message: &[u8], signature: &[u8]) -> bool;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Ed25519;

impl SignatureScheme for Ed25519 {
    fn name(&self) -> &'static str {
        "Ed25519"
    }

    fn public_key(&self, seed: &[u8; 32]) -> [u8; 32] {
        SigningKey::from_bytes(seed).verifying_key().to_bytes()
    }

    fn sign(&self, seed: &[u8; 32], message: &[u8]) -> Vec<u8> {
        SigningKey::from_bytes(seed).sign(message).to_bytes().to_vec()
    }

    fn verify(&self, public_key: &[u8; 32], message: &[u8], signature: &[u8]) -> bool {
        let Ok(key) = VerifyingKey::from_bytes(public_key) else {
            return false;
        };
        let Ok(signature) = Signature::from_slice(signature) else {
            return false;
        };
        key.verify(message, &signature).is_ok()
    }
}

/// Private seed plus the verification key derived from it.
#[derive(Clone, PartialEq, Eq)]
pub struct KeyPair {
    private_key: [u8; 32],
    public_key: [u8; 32],
}

impl KeyPair {
    pub fn from_seed_with(scheme: &dyn SignatureScheme, seed: [u8; 32]) -> Self {
        KeyPair {
            public_key: scheme.public_key(&seed),
            private_key: seed,
        }
    }

    pub fn private_key(&self) -> &[u8; 32] {
        &self.private_key
    }

    pub fn public_key(&self) -> &[u8; 32] {
        &self.public_key
    }

    pub fn sign_with(&self, scheme: &dyn SignatureScheme, message: &[u8]) -> Vec<u8> {
        scheme.sign(&self.private_key, message)
    }
}

impl fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair")
            .field("public_key", &hex::encode(self.public_key))
            .finish_non_exhaustive()
    }
}

/// Ed25519 key pair from a seed. Same seed, same pair.
pub fn generate_keypair(seed: [u8; 32]) -> KeyPair {
    KeyPair::from_seed_with(&Ed25519, seed)
}
