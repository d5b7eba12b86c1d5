#![allow(dead_code)]

pub mod cred;
pub mod gen;
pub mod oracle;
pub mod scenarios;

use std::path::PathBuf;

use ssiforge_core::{parse_model, Model};

pub const MOTHER_GOAL: &str = "m.goal";
pub const BND: &str = "Birth Notification Document";
pub const MOTHERS_ID: &str = "Mother's ID";
pub const BIRTH_CERTIFICATE: &str = "Birth Certificate";

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fixture_bytes(name: &str) -> Vec<u8> {
    std::fs::read(repo_root().join("fixtures").join(name)).expect("fixture readable")
}

pub fn fixture() -> Model {
    parse_model(&fixture_bytes("birth_registration.json")).expect("fixture parses")
}
