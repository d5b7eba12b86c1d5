use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CredentialError;

const PREFIX: &str = "did:sim:";

/// `did:sim:<base58(public key)>`; the identifier is the key.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Did(String);

impl Did {
    pub fn from_public_key(public_key: &[u8; 32]) -> Self {
        Did(format!("{PREFIX}{}", bs58::encode(public_key).into_string()))
    }

    pub fn public_key(&self) -> [u8; 32] {
        decode(&self.0).expect("Did values are validated on construction")
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

fn decode(value: &str) -> Result<[u8; 32], CredentialError> {
    let invalid = || CredentialError::InvalidDid(value.to_owned());
    let encoded = value.strip_prefix(PREFIX).ok_or_else(invalid)?;
    let bytes = bs58::decode(encoded).into_vec().map_err(|_| invalid())?;
    let key: [u8; 32] = bytes.try_into().map_err(|_| invalid())?;
    // Reject non-canonical encodings such as extra leading '1's.
    if bs58::encode(key).into_string() != encoded {
        return Err(invalid());
    }
    Ok(key)
}

impl FromStr for Did {
    type Err = CredentialError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        decode(s)?;
        Ok(Did(s.to_owned()))
    }
}

impl TryFrom<String> for Did {
    type Error = CredentialError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        decode(&value)?;
        Ok(Did(value))
    }
}

impl From<Did> for String {
    fn from(did: Did) -> String {
        did.0
    }
}

impl fmt::Display for Did {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn did_from_public_key(public_key: &[u8; 32]) -> Did {
    Did::from_public_key(public_key)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DidDocument {
    pub id: Did,
    #[serde(with = "hex::serde")]
    pub verification_key: [u8; 32],
}

impl DidDocument {
    pub fn for_key(public_key: &[u8; 32]) -> Self {
        DidDocument {
            id: Did::from_public_key(public_key),
            verification_key: *public_key,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DidDirectory {
    documents: BTreeMap<Did, DidDocument>,
}

impl DidDirectory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers the document for `public_key` and returns its DID.
    pub fn register(&mut self, public_key: &[u8; 32]) -> Did {
        let doc = DidDocument::for_key(public_key);
        let did = doc.id.clone();
        self.documents.insert(did.clone(), doc);
        did
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn dids(&self) -> impl Iterator<Item = &Did> {
        self.documents.keys()
    }

    pub fn get(&self, did: &Did) -> Option<&DidDocument> {
        self.documents.get(did)
    }
}

pub fn resolve_did(did: &Did, directory: &DidDirectory) -> Result<DidDocument, CredentialError> {
    directory
        .get(did)
        .cloned()
        .ok_or_else(|| CredentialError::DidUnresolved(did.clone()))
}
