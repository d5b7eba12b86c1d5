use std::collections::BTreeMap;

use super::agents::{actor_keys, AgentSpec, Behavior};
use super::config::{SimConfig, SplitMix64};
use super::goals::{evaluate_goals, LabelState};
use super::trace::{Event, EventRecord, MessageKind, MessageSummary, Termination, Trace};
use super::SimError;
use crate::credential::{
    canonical_bytes, create_presentation, issue_credential, verify_credential, verify_presentation, Claims, Credential,
    Did, DidDirectory, Ed25519, Presentation, VerificationOutcome,
};
use crate::model::{Identifier, Model};

/// Selects messages by kind, endpoints (actor ids) and credential type;
/// unset fields match anything.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MessageFilter {
    pub kind: Option<MessageKind>,
    pub from: Option<Identifier>,
    pub to: Option<Identifier>,
    pub credential_type: Option<String>,
}

impl MessageFilter {
    pub fn new(kind: MessageKind) -> Self {
        MessageFilter {
            kind: Some(kind),
            ..MessageFilter::default()
        }
    }

    pub fn from(mut self, actor: impl Into<Identifier>) -> Self {
        self.from = Some(actor.into());
        self
    }

    pub fn to(mut self, actor: impl Into<Identifier>) -> Self {
        self.to = Some(actor.into());
        self
    }

    pub fn credential_type(mut self, credential_type: impl Into<String>) -> Self {
        self.credential_type = Some(credential_type.into());
        self
    }

    fn matches(&self, kind: MessageKind, from: &Identifier, to: &Identifier, credential_type: &str) -> bool {
        self.kind.is_none_or(|k| k == kind)
            && self.from.as_ref().is_none_or(|f| f == from)
            && self.to.as_ref().is_none_or(|t| t == to)
            && self.credential_type.as_deref().is_none_or(|t| t == credential_type)
    }
}

/// Ways a dishonest holder can corrupt an outgoing presentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tamper {
    /// Change a claim value after issuance.
    MutateClaim,
    /// Replace the issuer's signature with one by the holder's own key.
    WrongIssuerSignature,
    /// Present someone else's credential under another agent's keys.
    WrongPresenter,
    /// Answer with a nonce from an earlier request.
    StaleNonce,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HarnessAction {
    /// The message is never sent (no Send event).
    Suppress,
    /// Applies to presentations only.
    Tamper(Tamper),
}

/// Fault injection for adversarial runs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Harness {
    pub rules: Vec<(MessageFilter, HarnessAction)>,
}

impl Harness {
    pub fn new() -> Self {
        Harness::default()
    }

    pub fn suppress(mut self, filter: MessageFilter) -> Self {
        self.rules.push((filter, HarnessAction::Suppress));
        self
    }

    /// Tampers with presentations sent by `holder` to `verifier`.
    pub fn tamper(mut self, holder: &str, verifier: &str, credential_type: &str, tamper: Tamper) -> Self {
        let filter = MessageFilter::new(MessageKind::ProofPresentation)
            .from(holder)
            .to(verifier)
            .credential_type(credential_type);
        self.rules.push((filter, HarnessAction::Tamper(tamper)));
        self
    }

    fn action(
        &self,
        kind: MessageKind,
        from: &Identifier,
        to: &Identifier,
        credential_type: &str,
    ) -> Option<&HarnessAction> {
        self.rules
            .iter()
            .find(|(f, _)| f.matches(kind, from, to, credential_type))
            .map(|(_, a)| a)
    }
}

#[derive(Clone, Debug)]
enum Payload {
    ProofRequest {
        credential_type: String,
        nonce: [u8; 16],
        purpose: Option<String>,
    },
    ProofPresentation {
        presentation: Box<Presentation>,
    },
    PresentationVerdict {
        credential_type: String,
        verdict: bool,
    },
    IssuanceRequest {
        credential_type: String,
    },
    CredentialIssuance {
        credential: Box<Credential>,
    },
    RecordCopy {
        credential_type: String,
        digest: String,
    },
}

impl Payload {
    fn kind(&self) -> MessageKind {
        match self {
            Payload::ProofRequest { .. } => MessageKind::ProofRequest,
            Payload::ProofPresentation { .. } => MessageKind::ProofPresentation,
            Payload::PresentationVerdict { .. } => MessageKind::PresentationVerdict,
            Payload::IssuanceRequest { .. } => MessageKind::IssuanceRequest,
            Payload::CredentialIssuance { .. } => MessageKind::CredentialIssuance,
            Payload::RecordCopy { .. } => MessageKind::RecordCopy,
        }
    }

    fn credential_type(&self) -> &str {
        match self {
            Payload::ProofRequest { credential_type, .. }
            | Payload::PresentationVerdict { credential_type, .. }
            | Payload::IssuanceRequest { credential_type }
            | Payload::RecordCopy { credential_type, .. } => credential_type,
            Payload::ProofPresentation { presentation } => &presentation.credential.credential_type,
            Payload::CredentialIssuance { credential } => &credential.credential_type,
        }
    }
}

#[derive(Clone, Debug)]
struct Message {
    from: Identifier,
    to: Identifier,
    payload: Payload,
    summary: MessageSummary,
}

type Key = (Identifier, Identifier, String);

#[derive(Clone, Debug)]
enum Entry {
    Deliver(Box<Message>),
    /// Holder waiting for a credential from an issuer.
    IssuanceTimer(Key),
    /// Verifier waiting for a presentation.
    ProofTimer(Key),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Progress {
    Idle,
    Pending,
    Done,
    Failed,
}

struct HolderRequest {
    dependency: Identifier,
    task: Option<Identifier>,
    prerequisites: Vec<String>,
    progress: Progress,
    attempts: u32,
    timer: Option<(u64, u64)>,
}

struct Check {
    dependency: Identifier,
    task: Option<Identifier>,
    copy_check: Option<Identifier>,
    purpose: Option<String>,
    on_start: bool,
    nonces: Vec<[u8; 16]>,
    progress: Progress,
    attempts: u32,
    timer: Option<(u64, u64)>,
}

enum IssueState {
    NotStarted,
    Checking,
    Issued(Box<Credential>),
    Refused,
}

struct Issuance {
    task: Option<Identifier>,
    requires: Vec<String>,
    subject: Did,
    claims: Claims,
    state: IssueState,
}

struct Engine<'a> {
    model: &'a Model,
    config: &'a SimConfig,
    harness: &'a Harness,
    agents: Vec<AgentSpec>,
    index: BTreeMap<Identifier, usize>,
    directory: DidDirectory,
    rng: SplitMix64,
    now: u64,
    event_seq: u64,
    queue_seq: u64,
    msg_seq: u64,
    queue: BTreeMap<(u64, u64), Entry>,
    events: Vec<EventRecord>,
    outcomes: BTreeMap<Identifier, LabelState>,
    labels: BTreeMap<Identifier, LabelState>,
    /// (holder, issuer, type)
    requests: BTreeMap<Key, HolderRequest>,
    /// (verifier, holder, type)
    checks: BTreeMap<Key, Check>,
    /// (issuer, holder, type)
    issuances: BTreeMap<Key, Issuance>,
    /// (holder, verifier, type) -> provide task
    answers: BTreeMap<Key, Option<Identifier>>,
    /// issuer -> (type, recipient, task)
    copies: Vec<(Identifier, String, Identifier, Identifier)>,
    /// nonces each holder has been asked to sign, with the requesting verifier
    seen_nonces: BTreeMap<Identifier, Vec<(Identifier, [u8; 16])>>,
}

fn key(a: &Identifier, b: &Identifier, t: &str) -> Key {
    (a.clone(), b.clone(), t.to_owned())
}

fn label(ok: bool) -> LabelState {
    if ok {
        LabelState::Satisfied
    } else {
        LabelState::Denied
    }
}

/// Runs the agents to quiescence or `maxTicks`.
pub fn run(model: &Model, agents: Vec<AgentSpec>, config: &SimConfig) -> Result<Trace, SimError> {
    run_with_harness(model, agents, config, &Harness::default())
}

/// [`run`] with messages suppressed or presentations tampered as the
/// harness directs.
pub fn run_with_harness(
    model: &Model,
    agents: Vec<AgentSpec>,
    config: &SimConfig,
    harness: &Harness,
) -> Result<Trace, SimError> {
    config.validate()?;
    let mut engine = Engine::new(model, agents, config, harness);
    engine.start();
    let termination = engine.run_loop();
    let end_tick = match termination {
        Termination::Quiescence => engine.now,
        Termination::Timeout => config.max_ticks,
    };
    Ok(Trace {
        config: config.clone(),
        events: engine.events,
        final_labels: engine.labels,
        termination,
        end_tick,
    })
}

impl<'a> Engine<'a> {
    fn new(model: &'a Model, agents: Vec<AgentSpec>, config: &'a SimConfig, harness: &'a Harness) -> Self {
        let mut directory = DidDirectory::new();
        for agent in &agents {
            directory.register(agent.keys.public_key());
        }
        let index = agents.iter().enumerate().map(|(i, a)| (a.actor.clone(), i)).collect();
        let mut engine = Engine {
            model,
            config,
            harness,
            agents: Vec::new(),
            index,
            directory,
            rng: SplitMix64::new(config.seed),
            now: 0,
            event_seq: 0,
            queue_seq: 0,
            msg_seq: 0,
            queue: BTreeMap::new(),
            events: Vec::new(),
            outcomes: BTreeMap::new(),
            labels: model.elements().map(|e| (e.id.clone(), LabelState::Unknown)).collect(),
            requests: BTreeMap::new(),
            checks: BTreeMap::new(),
            issuances: BTreeMap::new(),
            answers: BTreeMap::new(),
            copies: Vec::new(),
            seen_nonces: BTreeMap::new(),
        };
        for agent in &agents {
            let me = &agent.actor;
            for behavior in &agent.behaviors {
                match behavior.clone() {
                    Behavior::RequestIssuance {
                        credential_type,
                        issuer,
                        dependency,
                        task,
                        prerequisites,
                    } => {
                        engine.requests.insert(
                            key(me, &issuer, &credential_type),
                            HolderRequest {
                                dependency,
                                task,
                                prerequisites,
                                progress: Progress::Idle,
                                attempts: 0,
                                timer: None,
                            },
                        );
                    }
                    Behavior::AnswerProofRequest {
                        credential_type,
                        verifier,
                        task,
                        ..
                    } => {
                        engine.answers.insert(key(me, &verifier, &credential_type), task);
                    }
                    Behavior::RequestProof {
                        credential_type,
                        holder,
                        dependency,
                        task,
                        copy_check,
                        purpose,
                        on_start,
                    } => {
                        engine.checks.insert(
                            key(me, &holder, &credential_type),
                            Check {
                                dependency,
                                task,
                                copy_check,
                                purpose,
                                on_start,
                                nonces: Vec::new(),
                                progress: Progress::Idle,
                                attempts: 0,
                                timer: None,
                            },
                        );
                    }
                    Behavior::Issue {
                        credential_type,
                        holder,
                        task,
                        requires,
                        subject,
                        claims,
                        ..
                    } => {
                        engine.issuances.insert(
                            key(me, &holder, &credential_type),
                            Issuance {
                                task,
                                requires,
                                subject,
                                claims,
                                state: IssueState::NotStarted,
                            },
                        );
                    }
                    Behavior::SendCopy {
                        credential_type,
                        to,
                        task,
                    } => engine.copies.push((me.clone(), credential_type, to, task)),
                }
            }
        }
        // Credential dependencies are settled by the run, not inferred from
        // the dependee's label.
        let pending: Vec<Identifier> = engine
            .requests
            .values()
            .map(|r| r.dependency.clone())
            .chain(engine.checks.values().map(|c| c.dependency.clone()))
            .collect();
        for dependency in pending {
            engine.outcomes.insert(dependency, LabelState::Unknown);
        }
        engine.agents = agents;
        engine
    }

    fn agent(&self, actor: &Identifier) -> &AgentSpec {
        &self.agents[self.index[actor]]
    }

    fn actor_of(&self, did: &Did) -> Identifier {
        self.agents
            .iter()
            .find(|a| &a.did == did)
            .map_or_else(|| Identifier::from(did.as_str()), |a| a.actor.clone())
    }

    fn record(&mut self, event: Event) {
        self.events.push(EventRecord {
            seq: self.event_seq,
            tick: self.now,
            event,
        });
        self.event_seq += 1;
    }

    fn schedule(&mut self, tick: u64, entry: Entry) -> (u64, u64) {
        let k = (tick, self.queue_seq);
        self.queue_seq += 1;
        self.queue.insert(k, entry);
        k
    }

    fn set(&mut self, id: Option<&Identifier>, value: LabelState) {
        if let Some(id) = id {
            self.outcomes.insert(id.clone(), value);
        }
    }

    fn update_labels(&mut self) {
        let next = evaluate_goals(self.model, &self.outcomes);
        let ids: Vec<Identifier> = self.model.elements().map(|e| e.id.clone()).collect();
        for id in ids {
            let (before, after) = (self.labels[&id], next[&id]);
            if before != after {
                self.record(Event::GoalUpdate {
                    element: id,
                    from: before,
                    to: after,
                });
            }
        }
        self.labels = next;
    }

    fn send(&mut self, from: &Identifier, to: &Identifier, payload: Payload) {
        let kind = payload.kind();
        if let Some(HarnessAction::Suppress) = self.harness.action(kind, from, to, payload.credential_type()) {
            return;
        }
        let purpose = match &payload {
            Payload::ProofRequest { purpose, .. } => purpose.clone(),
            _ => None,
        };
        let (nonce, credential_id, verdict) = match &payload {
            Payload::ProofRequest { nonce, .. } => (Some(hex::encode(nonce)), None, None),
            Payload::ProofPresentation { presentation } => (
                Some(hex::encode(presentation.nonce)),
                Some(presentation.credential.id.clone()),
                None,
            ),
            Payload::PresentationVerdict { verdict, .. } => (None, None, Some(*verdict)),
            Payload::CredentialIssuance { credential } => (None, Some(credential.id.clone()), None),
            Payload::RecordCopy { digest, .. } => (None, Some(digest.clone()), None),
            Payload::IssuanceRequest { .. } => (None, None, None),
        };
        let summary = MessageSummary {
            msg_id: self.msg_seq,
            kind,
            from: from.clone(),
            to: to.clone(),
            sent_at: self.now,
            credential_type: payload.credential_type().to_owned(),
            nonce,
            credential_id,
            verdict,
            purpose,
        };
        self.msg_seq += 1;
        self.record(Event::Send {
            message: summary.clone(),
        });
        if self.rng.chance(self.config.drop_probability) {
            self.record(Event::Drop {
                message: summary,
                reason: "lost".into(),
            });
            return;
        }
        let at = self.now + self.config.latency(from.as_str(), to.as_str());
        self.schedule(
            at,
            Entry::Deliver(Box::new(Message {
                from: from.clone(),
                to: to.clone(),
                payload,
                summary,
            })),
        );
    }

    fn start(&mut self) {
        let bootstrapped: Vec<(Identifier, Credential)> = self
            .agents
            .iter()
            .flat_map(|a| a.wallet.iter().map(move |c| (a.actor.clone(), c.clone())))
            .collect();
        for (holder, credential) in bootstrapped {
            let issuer = self.actor_of(&credential.issuer);
            self.record(Event::Issue {
                credential_type: credential.credential_type.clone(),
                credential_id: credential.id.clone(),
                issuer,
                holder,
                bootstrap: true,
            });
        }
        let starting: Vec<Key> = self
            .checks
            .iter()
            .filter(|(_, c)| c.on_start)
            .map(|(k, _)| k.clone())
            .collect();
        for k in starting {
            self.start_check(&k);
        }
        let holders: Vec<Identifier> = self.agents.iter().map(|a| a.actor.clone()).collect();
        for holder in holders {
            self.advance_holder(&holder);
        }
        self.update_labels();
    }

    fn run_loop(&mut self) -> Termination {
        while let Some(((tick, seq), entry)) = self.queue.pop_first() {
            if tick > self.config.max_ticks {
                self.queue.insert((tick, seq), entry);
                break;
            }
            self.now = tick;
            match entry {
                Entry::Deliver(message) => {
                    self.record(Event::Deliver {
                        message: message.summary.clone(),
                    });
                    self.deliver(*message);
                }
                Entry::IssuanceTimer(k) => self.issuance_timeout(&k),
                Entry::ProofTimer(k) => self.proof_timeout(&k),
            }
            self.update_labels();
        }
        if self.queue.is_empty() {
            return Termination::Quiescence;
        }
        self.now = self.config.max_ticks;
        let stranded: Vec<MessageSummary> = std::mem::take(&mut self.queue)
            .into_values()
            .filter_map(|entry| match entry {
                Entry::Deliver(m) => Some(m.summary),
                _ => None,
            })
            .collect();
        for message in stranded {
            self.record(Event::Drop {
                message,
                reason: "horizon".into(),
            });
        }
        Termination::Timeout
    }

    fn holds(&self, holder: &Identifier, credential_type: &str) -> bool {
        self.agent(holder)
            .wallet
            .iter()
            .any(|c| c.credential_type == credential_type)
    }

    /// Sends every issuance request whose prerequisites are settled; gives
    /// up on those whose prerequisites can no longer be obtained.
    fn advance_holder(&mut self, holder: &Identifier) {
        loop {
            let mut changed = false;
            let waiting: Vec<Key> = self
                .requests
                .iter()
                .filter(|((h, _, _), r)| h == holder && r.progress == Progress::Idle)
                .map(|(k, _)| k.clone())
                .collect();
            for k in waiting {
                let mut blocked = false;
                let mut lost = false;
                for prerequisite in &self.requests[&k].prerequisites {
                    if self.holds(holder, prerequisite) {
                        continue;
                    }
                    let sources: Vec<Progress> = self
                        .requests
                        .iter()
                        .filter(|((h, _, t), _)| h == holder && t == prerequisite)
                        .map(|(_, r)| r.progress)
                        .collect();
                    if sources.iter().any(|p| matches!(p, Progress::Idle | Progress::Pending)) {
                        blocked = true;
                    } else if !sources.is_empty() {
                        lost = true;
                    }
                }
                if lost {
                    self.deny_request(&k);
                    changed = true;
                } else if !blocked {
                    self.send_issuance_request(&k);
                }
            }
            if !changed {
                break;
            }
        }
    }

    fn deny_request(&mut self, k: &Key) {
        let request = self.requests.get_mut(k).expect("known request");
        request.progress = Progress::Failed;
        let timer = request.timer.take();
        let (task, dependency) = (request.task.clone(), request.dependency.clone());
        if let Some(t) = timer {
            self.queue.remove(&t);
        }
        self.set(task.as_ref(), LabelState::Denied);
        self.set(Some(&dependency), LabelState::Denied);
    }

    fn send_issuance_request(&mut self, k: &Key) {
        let (holder, issuer, credential_type) = k.clone();
        let timer = self.schedule(self.now + self.config.retry_timeout, Entry::IssuanceTimer(k.clone()));
        let request = self.requests.get_mut(k).expect("known request");
        request.progress = Progress::Pending;
        request.attempts += 1;
        request.timer = Some(timer);
        self.send(&holder, &issuer, Payload::IssuanceRequest { credential_type });
    }

    fn issuance_timeout(&mut self, k: &Key) {
        let Some(request) = self.requests.get_mut(k) else {
            return;
        };
        request.timer = None;
        if request.progress != Progress::Pending {
            return;
        }
        if request.attempts <= self.config.max_retries {
            self.send_issuance_request(k);
        } else {
            self.deny_request(k);
            self.advance_holder(&k.0);
        }
    }

    fn start_check(&mut self, k: &Key) {
        if self.checks.get(k).is_some_and(|c| c.progress == Progress::Idle) {
            self.send_proof_request(k);
        }
    }

    fn send_proof_request(&mut self, k: &Key) {
        let (verifier, holder, credential_type) = k.clone();
        let nonce = self.rng.nonce();
        let timer = self.schedule(self.now + self.config.retry_timeout, Entry::ProofTimer(k.clone()));
        let check = self.checks.get_mut(k).expect("known check");
        check.progress = Progress::Pending;
        check.attempts += 1;
        check.nonces.push(nonce);
        check.timer = Some(timer);
        let purpose = check.purpose.clone();
        self.send(
            &verifier,
            &holder,
            Payload::ProofRequest {
                credential_type,
                nonce,
                purpose,
            },
        );
    }

    fn proof_timeout(&mut self, k: &Key) {
        let Some(check) = self.checks.get_mut(k) else { return };
        check.timer = None;
        if check.progress != Progress::Pending {
            return;
        }
        if check.attempts <= self.config.max_retries {
            self.send_proof_request(k);
        } else {
            check.progress = Progress::Failed;
            let (task, dependency) = (check.task.clone(), check.dependency.clone());
            self.set(task.as_ref(), LabelState::Denied);
            self.set(Some(&dependency), LabelState::Denied);
            self.advance_issuances(&k.0, &k.1);
        }
    }

    fn deliver(&mut self, message: Message) {
        let Message { from, to, payload, .. } = message;
        match payload {
            Payload::IssuanceRequest { credential_type } => self.on_issuance_request(&to, &from, &credential_type),
            Payload::ProofRequest {
                credential_type, nonce, ..
            } => self.on_proof_request(&to, &from, &credential_type, nonce),
            Payload::ProofPresentation { presentation } => self.on_presentation(&to, &from, *presentation),
            Payload::PresentationVerdict { verdict, .. } => {
                if !verdict {
                    let refused: Vec<Key> = self
                        .requests
                        .iter()
                        .filter(|((h, i, _), r)| h == &to && i == &from && r.progress == Progress::Pending)
                        .map(|(k, _)| k.clone())
                        .collect();
                    for k in refused {
                        self.deny_request(&k);
                    }
                    self.advance_holder(&to);
                }
            }
            Payload::CredentialIssuance { credential } => self.on_credential(&to, &from, *credential),
            Payload::RecordCopy {
                credential_type,
                digest,
            } => {
                let i = self.index[&to];
                let store = self.agents[i].record_store.entry(credential_type).or_default();
                if !store.contains(&digest) {
                    store.push(digest);
                }
            }
        }
    }

    fn on_issuance_request(&mut self, issuer: &Identifier, holder: &Identifier, credential_type: &str) {
        let k = key(issuer, holder, credential_type);
        let Some(issuance) = self.issuances.get_mut(&k) else {
            return;
        };
        match &issuance.state {
            IssueState::NotStarted => {
                issuance.state = IssueState::Checking;
                let requires = issuance.requires.clone();
                for t in requires {
                    self.start_check(&key(issuer, holder, &t));
                }
                self.advance_issuances(issuer, holder);
            }
            IssueState::Issued(credential) => {
                let credential = credential.clone();
                self.send(issuer, holder, Payload::CredentialIssuance { credential });
            }
            IssueState::Checking | IssueState::Refused => {}
        }
    }

    /// Issues or refuses every pending issuance to `holder` whose checks
    /// have all finished.
    fn advance_issuances(&mut self, issuer: &Identifier, holder: &Identifier) {
        let pending: Vec<Key> = self
            .issuances
            .iter()
            .filter(|((i, h, _), s)| i == issuer && h == holder && matches!(s.state, IssueState::Checking))
            .map(|(k, _)| k.clone())
            .collect();
        for k in pending {
            let progress: Vec<Progress> = self.issuances[&k]
                .requires
                .iter()
                .filter_map(|t| self.checks.get(&key(issuer, holder, t)).map(|c| c.progress))
                .collect();
            if progress.contains(&Progress::Failed) {
                let issuance = self.issuances.get_mut(&k).expect("pending issuance");
                issuance.state = IssueState::Refused;
                let task = issuance.task.clone();
                self.set(task.as_ref(), LabelState::Denied);
            } else if progress.iter().all(|p| *p == Progress::Done) {
                self.issue(&k);
            }
        }
    }

    fn issue(&mut self, k: &Key) {
        let (issuer, holder, credential_type) = k.clone();
        let issuance = &self.issuances[k];
        let (issuer_agent, holder_agent) = (self.agent(&issuer), self.agent(&holder));
        let credential = match issue_credential(
            &issuer_agent.keys,
            &issuer_agent.did,
            &issuance.subject,
            &holder_agent.did,
            &credential_type,
            issuance.claims.clone(),
            self.now,
        ) {
            Ok(credential) => credential,
            Err(_) => {
                let issuance = self.issuances.get_mut(k).expect("pending issuance");
                issuance.state = IssueState::Refused;
                let task = issuance.task.clone();
                self.set(task.as_ref(), LabelState::Denied);
                return;
            }
        };
        let task = issuance.task.clone();
        self.issuances.get_mut(k).expect("pending issuance").state = IssueState::Issued(Box::new(credential.clone()));
        self.set(task.as_ref(), LabelState::Satisfied);
        self.record(Event::Issue {
            credential_type: credential_type.clone(),
            credential_id: credential.id.clone(),
            issuer: issuer.clone(),
            holder: holder.clone(),
            bootstrap: false,
        });
        let digest = credential.id.clone();
        self.send(
            &issuer,
            &holder,
            Payload::CredentialIssuance {
                credential: Box::new(credential),
            },
        );
        let copies: Vec<(Identifier, Identifier)> = self
            .copies
            .iter()
            .filter(|(i, t, _, _)| i == &issuer && t == &credential_type)
            .map(|(_, _, to, task)| (to.clone(), task.clone()))
            .collect();
        for (to, task) in copies {
            self.send(
                &issuer,
                &to,
                Payload::RecordCopy {
                    credential_type: credential_type.clone(),
                    digest: digest.clone(),
                },
            );
            self.set(Some(&task), LabelState::Satisfied);
        }
    }

    fn on_proof_request(&mut self, holder: &Identifier, verifier: &Identifier, credential_type: &str, nonce: [u8; 16]) {
        let seen = self.seen_nonces.entry(holder.clone()).or_default();
        let stale = seen
            .iter()
            .rev()
            .find(|(v, n)| v == verifier && n != &nonce)
            .or_else(|| seen.iter().rev().find(|(_, n)| n != &nonce))
            .map_or([0u8; 16], |(_, n)| *n);
        seen.push((verifier.clone(), nonce));

        let agent = self.agent(holder);
        let Some(credential) = agent.wallet.iter().rev().find(|c| c.credential_type == credential_type) else {
            return;
        };
        let mut presentation = create_presentation(&agent.keys, &agent.did, credential, nonce);
        if let Some(HarnessAction::Tamper(tamper)) =
            self.harness
                .action(MessageKind::ProofPresentation, holder, verifier, credential_type)
        {
            presentation = self.tamper(holder, verifier, presentation, *tamper, stale);
        }
        let task = self
            .answers
            .get(&key(holder, verifier, credential_type))
            .cloned()
            .flatten();
        self.set(task.as_ref(), LabelState::Satisfied);
        self.send(
            holder,
            verifier,
            Payload::ProofPresentation {
                presentation: Box::new(presentation),
            },
        );
    }

    fn tamper(
        &self,
        holder: &Identifier,
        verifier: &Identifier,
        honest: Presentation,
        tamper: Tamper,
        stale: [u8; 16],
    ) -> Presentation {
        let agent = self.agent(holder);
        match tamper {
            Tamper::MutateClaim => {
                let mut p = honest;
                match p.credential.claims.values_mut().next() {
                    Some(value) => value.push('~'),
                    None => p.credential.issued_at ^= 1,
                }
                p
            }
            Tamper::WrongIssuerSignature => {
                let mut p = honest;
                let bytes = canonical_bytes(&p.credential.payload());
                p.credential.signature = agent.keys.sign_with(&Ed25519, &bytes);
                p
            }
            Tamper::WrongPresenter => {
                let impostor = self.agents.iter().find(|a| &a.actor != holder && &a.actor != verifier);
                let (keys, did) = match impostor {
                    Some(a) => (a.keys.clone(), a.did.clone()),
                    None => {
                        let keys = actor_keys(self.config.seed, "impostor");
                        let did = Did::from_public_key(keys.public_key());
                        (keys, did)
                    }
                };
                create_presentation(&keys, &did, &honest.credential, honest.nonce)
            }
            Tamper::StaleNonce => create_presentation(&agent.keys, &agent.did, &honest.credential, stale),
        }
    }

    fn on_presentation(&mut self, verifier: &Identifier, holder: &Identifier, presentation: Presentation) {
        let credential_type = presentation.credential.credential_type.clone();
        let k = key(verifier, holder, &credential_type);
        let Some(check) = self.checks.get(&k) else { return };
        if check.progress != Progress::Pending {
            return;
        }
        let expected = if check.nonces.contains(&presentation.nonce) {
            presentation.nonce
        } else {
            *check.nonces.last().expect("a pending check has sent a nonce")
        };
        let agent = self.agent(verifier);
        let outcome: VerificationOutcome = verify_presentation(
            &presentation,
            &self.directory,
            &agent.trust,
            verifier.as_str(),
            &expected,
        );
        let copy_check = check.copy_check.as_ref().map(|_| {
            agent
                .record_store
                .get(&credential_type)
                .is_some_and(|ids| ids.contains(&presentation.credential.id))
        });
        let passed = outcome.verdict && copy_check.unwrap_or(true);

        let check = self.checks.get_mut(&k).expect("checked above");
        check.progress = if passed { Progress::Done } else { Progress::Failed };
        let timer = check.timer.take();
        let (task, copy_task, dependency) = (check.task.clone(), check.copy_check.clone(), check.dependency.clone());
        if let Some(t) = timer {
            self.queue.remove(&t);
        }
        self.record(Event::Verify {
            verifier: verifier.clone(),
            holder: holder.clone(),
            credential_type: credential_type.clone(),
            credential_id: presentation.credential.id.clone(),
            nonce: hex::encode(presentation.nonce),
            outcome: outcome.clone(),
            copy_check,
        });
        self.set(task.as_ref(), label(outcome.verdict));
        if let Some(ok) = copy_check {
            self.set(copy_task.as_ref(), label(ok));
        }
        self.set(Some(&dependency), label(passed));
        self.send(
            verifier,
            holder,
            Payload::PresentationVerdict {
                credential_type,
                verdict: passed,
            },
        );
        self.advance_issuances(verifier, holder);
    }

    fn on_credential(&mut self, holder: &Identifier, issuer: &Identifier, credential: Credential) {
        let checks = verify_credential(&credential, &self.directory);
        let agent = self.agent(holder);
        if !(checks.integrity && checks.issuer_signature && credential.holder == agent.did) {
            return;
        }
        let credential_type = credential.credential_type.clone();
        let i = self.index[holder];
        if !self.agents[i].wallet.iter().any(|c| c.id == credential.id) {
            self.agents[i].wallet.push(credential);
        }
        if let Some(request) = self.requests.get_mut(&key(holder, issuer, &credential_type)) {
            request.progress = Progress::Done;
            let timer = request.timer.take();
            let (task, dependency) = (request.task.clone(), request.dependency.clone());
            if let Some(t) = timer {
                self.queue.remove(&t);
            }
            self.set(task.as_ref(), LabelState::Satisfied);
            self.set(Some(&dependency), LabelState::Satisfied);
        }
        self.advance_holder(holder);
    }
}
