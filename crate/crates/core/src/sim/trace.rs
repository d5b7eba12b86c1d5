use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{LabelState, SimConfig};
use crate::credential::{canonical_string, VerificationOutcome};
use crate::model::Identifier;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MessageKind {
    ProofRequest,
    ProofPresentation,
    PresentationVerdict,
    IssuanceRequest,
    CredentialIssuance,
    RecordCopy,
}

/// What the trace records about a message.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MessageSummary {
    pub msg_id: u64,
    #[serde(rename = "type")]
    pub kind: MessageKind,
    pub from: Identifier,
    pub to: Identifier,
    pub sent_at: u64,
    pub credential_type: String,
    /// Hex nonce of a request or presentation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonce: Option<String>,
    /// Credential id carried by a presentation, issuance or record copy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub credential_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<bool>,
    /// Why a proof is requested, from the dependency's `ssi.purpose`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub purpose: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all_fields = "camelCase")]
pub enum Event {
    Send {
        message: MessageSummary,
    },
    Deliver {
        message: MessageSummary,
    },
    /// `reason` is `lost` (random drop) or `horizon` (still in flight when
    /// the run stopped).
    Drop {
        message: MessageSummary,
        reason: String,
    },
    Issue {
        credential_type: String,
        credential_id: String,
        issuer: Identifier,
        holder: Identifier,
        bootstrap: bool,
    },
    Verify {
        verifier: Identifier,
        holder: Identifier,
        credential_type: String,
        credential_id: String,
        nonce: String,
        outcome: VerificationOutcome,
        /// Present when the verifier also compared against a record copy.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        copy_check: Option<bool>,
    },
    GoalUpdate {
        element: Identifier,
        from: LabelState,
        to: LabelState,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub seq: u64,
    pub tick: u64,
    #[serde(flatten)]
    pub event: Event,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Termination {
    /// Nothing left to deliver and no timer pending.
    Quiescence,
    /// `maxTicks` reached with work outstanding.
    Timeout,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Trace {
    pub config: SimConfig,
    pub events: Vec<EventRecord>,
    pub final_labels: BTreeMap<Identifier, LabelState>,
    pub termination: Termination,
    pub end_tick: u64,
}

impl Trace {
    /// JSON Lines: the config, one line per event, then the final labels.
    /// Every line is canonical JSON, so equal traces give equal bytes.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut line = |value: Value| {
            out.push_str(&canonical_string(&value));
            out.push('\n');
        };
        line(json!({ "config": self.config }));
        for event in &self.events {
            line(serde_json::to_value(event).expect("events serialize"));
        }
        line(json!({
            "finalLabels": self.final_labels,
            "termination": self.termination,
            "endTick": self.end_tick,
        }));
        out
    }

    /// Parses what [`Trace::to_jsonl`] wrote.
    pub fn from_jsonl(text: &str) -> Result<Trace, String> {
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        let (Some(first), Some(last)) = (lines.first(), lines.last()) else {
            return Err("empty trace".into());
        };
        if lines.len() < 2 {
            return Err("a trace has at least a config line and a final line".into());
        }
        #[derive(Deserialize)]
        struct Head {
            config: SimConfig,
        }
        #[derive(Deserialize)]
        #[serde(rename_all = "camelCase")]
        struct Tail {
            final_labels: BTreeMap<Identifier, LabelState>,
            termination: Termination,
            end_tick: u64,
        }
        let head: Head = serde_json::from_str(first).map_err(|e| format!("line 1: {e}"))?;
        let tail: Tail = serde_json::from_str(last).map_err(|e| format!("line {}: {e}", lines.len()))?;
        let events = lines[1..lines.len() - 1]
            .iter()
            .enumerate()
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| format!("line {}: {e}", i + 2)))
            .collect::<Result<_, _>>()?;
        Ok(Trace {
            config: head.config,
            events,
            final_labels: tail.final_labels,
            termination: tail.termination,
            end_tick: tail.end_tick,
        })
    }

    pub fn label(&self, element: &str) -> LabelState {
        self.final_labels.get(element).copied().unwrap_or_default()
    }

    pub fn count(&self, kind: &str) -> usize {
        self.events.iter().filter(|e| e.event.kind() == kind).count()
    }

    pub fn sends(&self) -> impl Iterator<Item = (u64, &MessageSummary)> {
        self.events.iter().filter_map(|e| match &e.event {
            Event::Send { message } => Some((e.tick, message)),
            _ => None,
        })
    }

    pub fn verifications(&self) -> impl Iterator<Item = &Event> {
        self.events
            .iter()
            .map(|e| &e.event)
            .filter(|e| matches!(e, Event::Verify { .. }))
    }

    /// Whether any credential of the type was issued during the run, either
    /// as an Issue event or as a CredentialIssuance message.
    pub fn issued(&self, credential_type: &str) -> bool {
        self.events.iter().any(|e| match &e.event {
            Event::Issue {
                credential_type: t,
                bootstrap: false,
                ..
            } => t == credential_type,
            Event::Send { message } => {
                message.kind == MessageKind::CredentialIssuance && message.credential_type == credential_type
            }
            _ => false,
        })
    }

    /// Number of Verify events on which each flag failed.
    pub fn flag_failures(&self) -> BTreeMap<&'static str, usize> {
        let mut counts = BTreeMap::from([
            ("integrity", 0),
            ("issuerSignature", 0),
            ("subjectBinding", 0),
            ("issuerTrusted", 0),
            ("copyCheck", 0),
        ]);
        for event in self.verifications() {
            if let Event::Verify {
                outcome, copy_check, ..
            } = event
            {
                let flags = [
                    ("integrity", outcome.integrity),
                    ("issuerSignature", outcome.issuer_signature),
                    ("subjectBinding", outcome.subject_binding),
                    ("issuerTrusted", outcome.issuer_trusted),
                    ("copyCheck", copy_check.unwrap_or(true)),
                ];
                for (name, ok) in flags {
                    if !ok {
                        *counts.get_mut(name).expect("listed above") += 1;
                    }
                }
            }
        }
        counts
    }
}

impl Event {
    pub fn kind(&self) -> &'static str {
        match self {
            Event::Send { .. } => "Send",
            Event::Deliver { .. } => "Deliver",
            Event::Drop { .. } => "Drop",
            Event::Issue { .. } => "Issue",
            Event::Verify { .. } => "Verify",
            Event::GoalUpdate { .. } => "GoalUpdate",
        }
    }
}
