use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::SimError;
use crate::credential::{generate_keypair, issue_credential, Claims, Credential, Did, KeyPair};
use crate::model::{Identifier, Model};
use crate::overlay::{
    normalize, CredentialCatalog, CredentialFlow, Evidence, FlowKind, RoleAssignment, SsiRole, TrustRegistry,
    CLAIM_PREFIX, PURPOSE_ANNOTATION, SUBJECT_ANNOTATION,
};

/// A credential a holder already owns when the run starts.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BootstrapCredential {
    pub credential_type: String,
    pub issuer: Identifier,
    pub holder: Identifier,
    /// Subject label; the holder when absent.
    pub subject: Option<String>,
    pub claims: BTreeMap<String, String>,
}

/// Reactive rules an agent follows. Listed in the order the agent acts on
/// them: requests first, then answers, checks, issuance and record copies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "behavior", rename_all = "camelCase")]
pub enum Behavior {
    /// Ask `issuer` for the credential once every prerequisite the issuer
    /// will check is in the wallet (or can no longer be obtained).
    #[serde(rename_all = "camelCase")]
    RequestIssuance {
        credential_type: String,
        issuer: Identifier,
        dependency: Identifier,
        task: Option<Identifier>,
        prerequisites: Vec<String>,
    },
    /// Answer a proof request from the wallet.
    #[serde(rename_all = "camelCase")]
    AnswerProofRequest {
        credential_type: String,
        verifier: Identifier,
        dependency: Identifier,
        task: Option<Identifier>,
    },
    /// Request a presentation from `holder` and verify it. Unless the check
    /// gates an issuance to that holder it starts at tick 0.
    #[serde(rename_all = "camelCase")]
    RequestProof {
        credential_type: String,
        holder: Identifier,
        dependency: Identifier,
        task: Option<Identifier>,
        /// Task that additionally compares the presented credential with a
        /// record copy received earlier.
        copy_check: Option<Identifier>,
        purpose: Option<String>,
        on_start: bool,
    },
    /// Issue to `holder` on request, once every required proof from that
    /// holder has passed.
    #[serde(rename_all = "camelCase")]
    Issue {
        credential_type: String,
        holder: Identifier,
        dependency: Identifier,
        task: Option<Identifier>,
        requires: Vec<String>,
        subject: Did,
        claims: Claims,
    },
    /// Forward the id of every issued credential of the type to `to`.
    #[serde(rename_all = "camelCase")]
    SendCopy {
        credential_type: String,
        to: Identifier,
        task: Identifier,
    },
}

impl Behavior {
    pub fn credential_type(&self) -> &str {
        match self {
            Behavior::RequestIssuance { credential_type, .. }
            | Behavior::AnswerProofRequest { credential_type, .. }
            | Behavior::RequestProof { credential_type, .. }
            | Behavior::Issue { credential_type, .. }
            | Behavior::SendCopy { credential_type, .. } => credential_type,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Behavior::RequestIssuance { .. } => 0,
            Behavior::AnswerProofRequest { .. } => 1,
            Behavior::RequestProof { .. } => 2,
            Behavior::Issue { .. } => 3,
            Behavior::SendCopy { .. } => 4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AgentSpec {
    pub actor: Identifier,
    pub did: Did,
    pub keys: KeyPair,
    pub wallet: Vec<Credential>,
    pub roles: Vec<RoleAssignment>,
    pub behaviors: Vec<Behavior>,
    /// This agent's rows of the trust registry.
    pub trust: TrustRegistry,
    /// Record copies received, by credential type.
    pub record_store: BTreeMap<String, Vec<String>>,
}

fn hash32(parts: &[&[u8]]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update(part);
    }
    hasher.finalize().into()
}

/// Key seed of an actor: SHA-256 of the run seed (8 bytes, little-endian)
/// followed by the actor id.
pub fn actor_seed(seed: u64, actor: &str) -> [u8; 32] {
    hash32(&[&seed.to_le_bytes(), actor.as_bytes()])
}

pub fn actor_keys(seed: u64, actor: &str) -> KeyPair {
    generate_keypair(actor_seed(seed, actor))
}

pub fn actor_did(seed: u64, actor: &str) -> Did {
    Did::from_public_key(actor_keys(seed, actor).public_key())
}

/// DID of a credential subject that is not an actor (e.g. a newborn).
pub fn subject_did(seed: u64, label: &str) -> Did {
    let keys = generate_keypair(hash32(&[&seed.to_le_bytes(), b"subject:", label.as_bytes()]));
    Did::from_public_key(keys.public_key())
}

fn words(text: &str) -> BTreeSet<String> {
    normalize(text).split_whitespace().map(str::to_owned).collect()
}

fn claims_for(model: &Model, dependency: &str, subject_label: &str) -> BTreeMap<String, String> {
    let mut claims = BTreeMap::from([("subject".to_owned(), subject_label.to_owned())]);
    if let Some(dep) = model.dependency(dependency) {
        for (key, value) in &dep.annotations {
            if let Some(name) = key.strip_prefix(CLAIM_PREFIX).filter(|n| !n.is_empty()) {
                claims.insert(name.to_owned(), value.clone());
            }
        }
    }
    claims
}

/// Compiles one agent per actor.
///
/// Keys come from [`actor_keys`]; bootstrap credentials are issued by their
/// issuer's agent at time 0 and placed in the holder's wallet. Every flow
/// must connect actors holding the matching roles (Issuer to Holder for an
/// issuance, Holder to Verifier for a presentation), otherwise the model
/// fails with `E_COMPILE_ROLE`.
pub fn compile_agents(
    model: &Model,
    roles: &[RoleAssignment],
    flows: &[CredentialFlow],
    trust: &TrustRegistry,
    bootstrap: &[BootstrapCredential],
    seed: u64,
) -> Result<Vec<AgentSpec>, SimError> {
    let has: BTreeSet<(&str, SsiRole, &str)> = roles
        .iter()
        .map(|r| (r.actor.as_str(), r.role, r.credential_type.as_str()))
        .collect();
    let require = |actor: &Identifier, role: SsiRole, flow: &CredentialFlow| {
        if has.contains(&(actor.as_str(), role, flow.credential_type.as_str())) && model.actor(actor.as_str()).is_some()
        {
            Ok(())
        } else {
            Err(SimError::CompileRole {
                actor: actor.clone(),
                role,
                credential_type: flow.credential_type.clone(),
                dependency: flow.dependency.clone(),
            })
        }
    };
    for flow in flows {
        match flow.kind {
            FlowKind::Issuance => {
                require(&flow.from, SsiRole::Issuer, flow)?;
                require(&flow.to, SsiRole::Holder, flow)?;
            }
            FlowKind::Presentation => {
                require(&flow.from, SsiRole::Holder, flow)?;
                require(&flow.to, SsiRole::Verifier, flow)?;
            }
        }
    }

    let catalog = CredentialCatalog::from_model(model);
    let mut agents: Vec<AgentSpec> = model
        .actors
        .iter()
        .map(|actor| {
            let keys = actor_keys(seed, actor.id.as_str());
            AgentSpec {
                actor: actor.id.clone(),
                did: Did::from_public_key(keys.public_key()),
                keys,
                wallet: Vec::new(),
                roles: roles.iter().filter(|r| r.actor == actor.id).cloned().collect(),
                behaviors: Vec::new(),
                trust: trust.for_verifier(actor.id.as_str()),
                record_store: BTreeMap::new(),
            }
        })
        .collect();
    let index: BTreeMap<Identifier, usize> = agents.iter().enumerate().map(|(i, a)| (a.actor.clone(), i)).collect();
    let did_of = |actor: &Identifier| agents[index[actor]].did.clone();
    let subject_of = |flow: &CredentialFlow| -> (Did, String) {
        let annotated = model
            .dependency(flow.dependency.as_str())
            .and_then(|d| d.annotations.get(SUBJECT_ANNOTATION))
            .map(|s| s.trim().to_owned())
            .filter(|s| !s.is_empty());
        match annotated {
            Some(label) => match model.actor(&label) {
                Some(actor) => (did_of(&actor.id), actor.name.clone()),
                None => (subject_did(seed, &label), label),
            },
            None => {
                let name = model
                    .actor(flow.to.as_str())
                    .map_or(flow.to.to_string(), |a| a.name.clone());
                (did_of(&flow.to), name)
            }
        }
    };
    let element = |side: Option<&Identifier>| side.cloned();
    let evidence_task = |flow: &CredentialFlow, owner: &Identifier| match &flow.evidence {
        Evidence::Verb(task)
            if model
                .actor(owner.as_str())
                .and_then(|a| a.element(task.as_str()))
                .is_some() =>
        {
            Some(task.clone())
        }
        _ => None,
    };

    let mut behaviors: BTreeMap<Identifier, Vec<Behavior>> = BTreeMap::new();
    let presentations: Vec<&CredentialFlow> = flows.iter().filter(|f| f.kind == FlowKind::Presentation).collect();
    let requires = |issuer: &Identifier, holder: &Identifier| -> Vec<String> {
        let mut types = Vec::new();
        for f in presentations.iter().filter(|f| &f.to == issuer && &f.from == holder) {
            if !types.contains(&f.credential_type) {
                types.push(f.credential_type.clone());
            }
        }
        types
    };

    for flow in flows {
        let dep = model.dependency(flow.dependency.as_str());
        let dependee_element = dep.and_then(|d| element(d.dependee_element.as_ref()));
        let depender_element = dep.and_then(|d| element(d.depender_element.as_ref()));
        match flow.kind {
            FlowKind::Issuance => {
                let prerequisites = requires(&flow.from, &flow.to);
                behaviors
                    .entry(flow.to.clone())
                    .or_default()
                    .push(Behavior::RequestIssuance {
                        credential_type: flow.credential_type.clone(),
                        issuer: flow.from.clone(),
                        dependency: flow.dependency.clone(),
                        task: depender_element,
                        prerequisites: prerequisites.clone(),
                    });
                let (subject, label) = subject_of(flow);
                let claims = claims_for(model, flow.dependency.as_str(), &label);
                behaviors.entry(flow.from.clone()).or_default().push(Behavior::Issue {
                    credential_type: flow.credential_type.clone(),
                    holder: flow.to.clone(),
                    dependency: flow.dependency.clone(),
                    task: dependee_element.or_else(|| evidence_task(flow, &flow.from)),
                    requires: prerequisites,
                    subject,
                    claims: claims.into_iter().collect(),
                });
            }
            FlowKind::Presentation => {
                behaviors
                    .entry(flow.from.clone())
                    .or_default()
                    .push(Behavior::AnswerProofRequest {
                        credential_type: flow.credential_type.clone(),
                        verifier: flow.to.clone(),
                        dependency: flow.dependency.clone(),
                        task: dependee_element,
                    });
                let gated = flows
                    .iter()
                    .any(|f| f.kind == FlowKind::Issuance && f.from == flow.to && f.to == flow.from);
                let copy_check = model.actor(flow.to.as_str()).and_then(|verifier| {
                    verifier
                        .tasks()
                        .find(|t| {
                            let w = words(&t.name);
                            w.contains("against")
                                && w.contains("copy")
                                && catalog.mentions(&t.name, &flow.credential_type)
                        })
                        .map(|t| t.id.clone())
                });
                behaviors
                    .entry(flow.to.clone())
                    .or_default()
                    .push(Behavior::RequestProof {
                        credential_type: flow.credential_type.clone(),
                        holder: flow.from.clone(),
                        dependency: flow.dependency.clone(),
                        task: depender_element.or_else(|| evidence_task(flow, &flow.to)),
                        copy_check,
                        purpose: dep.and_then(|d| d.annotations.get(PURPOSE_ANNOTATION).cloned()),
                        on_start: !gated,
                    });
            }
        }
    }

    // Record copies: an issuer task such as "Send copy of BND to Registrar".
    for actor in &model.actors {
        let issued: BTreeSet<String> = flows
            .iter()
            .filter(|f| f.kind == FlowKind::Issuance && f.from == actor.id)
            .map(|f| f.credential_type.clone())
            .collect();
        for task in actor.tasks() {
            let w = words(&task.name);
            if !(w.contains("send") && w.contains("copy")) {
                continue;
            }
            let text = format!(" {} ", normalize(&task.name));
            let recipient = model
                .actors
                .iter()
                .filter(|other| other.id != actor.id)
                .filter(|other| {
                    let name = normalize(&other.name);
                    !name.is_empty() && text.contains(&format!(" {name} "))
                })
                .max_by_key(|other| normalize(&other.name).len());
            let Some(recipient) = recipient else { continue };
            for credential_type in catalog.mentioned_in(&task.name) {
                if issued.contains(credential_type) {
                    behaviors.entry(actor.id.clone()).or_default().push(Behavior::SendCopy {
                        credential_type: credential_type.to_owned(),
                        to: recipient.id.clone(),
                        task: task.id.clone(),
                    });
                }
            }
        }
    }

    for (actor, mut list) in behaviors {
        list.sort_by_key(Behavior::rank);
        if let Some(&i) = index.get(&actor) {
            agents[i].behaviors = list;
        }
    }

    for spec in bootstrap {
        let (Some(&issuer), Some(&holder)) = (index.get(&spec.issuer), index.get(&spec.holder)) else {
            return Err(SimError::Bootstrap(format!(
                "bootstrap credential '{}' names an unknown actor",
                spec.credential_type
            )));
        };
        let (subject, label) = match &spec.subject {
            Some(label) => match model.actor(label) {
                Some(actor) => (agents[index[&actor.id]].did.clone(), actor.name.clone()),
                None => (subject_did(seed, label), label.clone()),
            },
            None => (
                agents[holder].did.clone(),
                model
                    .actor(spec.holder.as_str())
                    .map_or(spec.holder.to_string(), |a| a.name.clone()),
            ),
        };
        let mut claims: Claims = spec.claims.clone().into_iter().collect();
        if claims.get("subject").is_none() {
            claims
                .insert("subject", label)
                .map_err(|e| SimError::Bootstrap(e.to_string()))?;
        }
        let credential = issue_credential(
            &agents[issuer].keys,
            &agents[issuer].did,
            &subject,
            &agents[holder].did,
            &spec.credential_type,
            claims,
            0,
        )
        .map_err(|e| SimError::Bootstrap(e.to_string()))?;
        agents[holder].wallet.push(credential);
    }
    Ok(agents)
}
