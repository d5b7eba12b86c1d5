use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::model::{ElementKind, Identifier, LinkKind, Model, Polarity};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LabelState {
    #[default]
    Unknown,
    Satisfied,
    Denied,
    PartiallySatisfied,
    PartiallyDenied,
}

impl LabelState {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelState::Unknown => "Unknown",
            LabelState::Satisfied => "Satisfied",
            LabelState::Denied => "Denied",
            LabelState::PartiallySatisfied => "PartiallySatisfied",
            LabelState::PartiallyDenied => "PartiallyDenied",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        [
            LabelState::Unknown,
            LabelState::Satisfied,
            LabelState::Denied,
            LabelState::PartiallySatisfied,
            LabelState::PartiallyDenied,
        ]
        .into_iter()
        .find(|l| l.as_str().eq_ignore_ascii_case(text))
    }

    fn invert(self) -> Self {
        match self {
            LabelState::Satisfied => LabelState::Denied,
            LabelState::Denied => LabelState::Satisfied,
            LabelState::PartiallySatisfied => LabelState::PartiallyDenied,
            LabelState::PartiallyDenied => LabelState::PartiallySatisfied,
            LabelState::Unknown => LabelState::Unknown,
        }
    }

    fn weaken(self) -> Self {
        match self {
            LabelState::Satisfied => LabelState::PartiallySatisfied,
            LabelState::Denied => LabelState::PartiallyDenied,
            other => other,
        }
    }

    /// Partial labels only make sense on qualities; elsewhere they count as unknown.
    fn crisp(self) -> Self {
        match self {
            LabelState::Satisfied | LabelState::Denied => self,
            _ => LabelState::Unknown,
        }
    }
}

/// Label a contribution of the given polarity carries from a source label.
pub fn contribute(polarity: Polarity, source: LabelState) -> LabelState {
    match polarity {
        Polarity::Make => source,
        Polarity::Break => source.invert(),
        Polarity::Help => source.weaken(),
        Polarity::Hurt => source.invert().weaken(),
    }
}

fn all_of(labels: impl IntoIterator<Item = LabelState>) -> LabelState {
    let mut result = LabelState::Satisfied;
    for label in labels {
        match label.crisp() {
            LabelState::Denied => return LabelState::Denied,
            LabelState::Unknown => result = LabelState::Unknown,
            _ => {}
        }
    }
    result
}

fn any_of(labels: impl IntoIterator<Item = LabelState>) -> LabelState {
    let mut result = LabelState::Denied;
    for label in labels {
        match label.crisp() {
            LabelState::Satisfied => return LabelState::Satisfied,
            LabelState::Unknown => result = LabelState::Unknown,
            _ => {}
        }
    }
    result
}

/// Combines the contributions reaching a quality: unanimous positive or
/// negative evidence wins (full beats partial), a mix is unknown.
fn resolve(labels: impl IntoIterator<Item = LabelState>) -> LabelState {
    let (mut pos, mut neg) = (None::<bool>, None::<bool>);
    for label in labels {
        match label {
            LabelState::Satisfied => pos = Some(true),
            LabelState::PartiallySatisfied => pos = Some(pos.unwrap_or(false)),
            LabelState::Denied => neg = Some(true),
            LabelState::PartiallyDenied => neg = Some(neg.unwrap_or(false)),
            LabelState::Unknown => {}
        }
    }
    match (pos, neg) {
        (Some(true), None) => LabelState::Satisfied,
        (Some(false), None) => LabelState::PartiallySatisfied,
        (None, Some(true)) => LabelState::Denied,
        (None, Some(false)) => LabelState::PartiallyDenied,
        _ => LabelState::Unknown,
    }
}

enum Input {
    And(Identifier),
    Or(Identifier),
    Contribution(Polarity, Identifier),
    /// A dependency whose depender element is this one.
    Dependum(Identifier, Option<Identifier>),
}

/// Forward label propagation.
///
/// `outcomes` holds observed results keyed by element id or dependency id.
/// A goal, task or resource is the conjunction of its own outcome, its
/// refinement (And: all children; Or: any child) and every dependum it
/// depends on; a dependum takes the outcome recorded for its dependency,
/// or else the dependee element's label. A quality resolves the
/// contributions reaching it, with its own outcome and dependums counting
/// as `make`. Elements with no evidence at all stay Unknown.
///
/// Evaluated to a fixpoint in dependency order; cyclic models are cut off
/// after a bounded number of passes.
pub fn evaluate_goals(model: &Model, outcomes: &BTreeMap<Identifier, LabelState>) -> BTreeMap<Identifier, LabelState> {
    let mut inputs: BTreeMap<&str, Vec<Input>> = BTreeMap::new();
    for link in model.internal_links() {
        let input = match link.kind {
            LinkKind::AndRefinement => Input::And(link.source.clone()),
            LinkKind::OrRefinement => Input::Or(link.source.clone()),
            LinkKind::Contribution(p) => Input::Contribution(p, link.source.clone()),
            LinkKind::Qualification | LinkKind::NeededBy => continue,
        };
        inputs.entry(link.target.as_str()).or_default().push(input);
    }
    for dep in &model.dependencies {
        if let Some(element) = &dep.depender_element {
            inputs
                .entry(element.as_str())
                .or_default()
                .push(Input::Dependum(dep.id.clone(), dep.dependee_element.clone()));
        }
    }

    let order = evaluation_order(model, &inputs);
    let kinds: BTreeMap<&str, ElementKind> = model.elements().map(|e| (e.id.as_str(), e.kind)).collect();
    let mut labels: BTreeMap<Identifier, LabelState> =
        model.elements().map(|e| (e.id.clone(), LabelState::Unknown)).collect();

    let passes = kinds.len() + model.dependencies.len() + 1;
    for _ in 0..passes {
        let mut changed = false;
        for id in &order {
            let next = label_of(id, kinds[id.as_str()], inputs.get(id.as_str()), outcomes, &labels);
            let slot = labels.get_mut(id).expect("every element has a slot");
            if *slot != next {
                *slot = next;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    labels
}

fn label_of(
    id: &Identifier,
    kind: ElementKind,
    inputs: Option<&Vec<Input>>,
    outcomes: &BTreeMap<Identifier, LabelState>,
    labels: &BTreeMap<Identifier, LabelState>,
) -> LabelState {
    let get = |id: &Identifier| labels.get(id).copied().unwrap_or_default();
    let dependum = |dep: &Identifier, dependee: &Option<Identifier>| {
        outcomes
            .get(dep)
            .copied()
            .or_else(|| dependee.as_ref().map(get))
            .unwrap_or_default()
    };
    let own = outcomes.get(id).copied();
    let inputs = inputs.map(Vec::as_slice).unwrap_or_default();

    if kind == ElementKind::Quality {
        let evidence = own.into_iter().chain(inputs.iter().filter_map(|input| match input {
            Input::Contribution(p, source) => Some(contribute(*p, get(source))),
            Input::Dependum(dep, dependee) => Some(dependum(dep, dependee)),
            Input::And(_) | Input::Or(_) => None,
        }));
        return resolve(evidence);
    }

    let mut parts = Vec::new();
    parts.extend(own);
    let and: Vec<_> = inputs
        .iter()
        .filter_map(|i| if let Input::And(c) = i { Some(get(c)) } else { None })
        .collect();
    let or: Vec<_> = inputs
        .iter()
        .filter_map(|i| if let Input::Or(c) = i { Some(get(c)) } else { None })
        .collect();
    if !and.is_empty() {
        parts.push(all_of(and));
    }
    if !or.is_empty() {
        parts.push(any_of(or));
    }
    parts.extend(inputs.iter().filter_map(|i| match i {
        Input::Dependum(dep, dependee) => Some(dependum(dep, dependee)),
        _ => None,
    }));
    if parts.is_empty() {
        LabelState::Unknown
    } else {
        all_of(parts)
    }
}

/// Elements ordered so that, in acyclic models, every input is labelled
/// before the element reading it. Elements on cycles follow in model order.
fn evaluation_order(model: &Model, inputs: &BTreeMap<&str, Vec<Input>>) -> Vec<Identifier> {
    let ids: Vec<&Identifier> = model.elements().map(|e| &e.id).collect();
    let known: BTreeSet<&str> = ids.iter().map(|id| id.as_str()).collect();
    let sources = |id: &str| -> Vec<&str> {
        inputs
            .get(id)
            .into_iter()
            .flatten()
            .filter_map(|input| match input {
                Input::And(s) | Input::Or(s) | Input::Contribution(_, s) => Some(s.as_str()),
                Input::Dependum(_, dependee) => dependee.as_ref().map(Identifier::as_str),
            })
            .filter(|s| known.contains(s))
            .collect()
    };

    let mut order = Vec::with_capacity(ids.len());
    let mut placed: BTreeSet<&str> = BTreeSet::new();
    loop {
        let before = order.len();
        for id in &ids {
            if !placed.contains(id.as_str()) && sources(id.as_str()).iter().all(|s| placed.contains(s)) {
                placed.insert(id.as_str());
                order.push((*id).clone());
            }
        }
        if order.len() == before {
            break;
        }
    }
    order.extend(ids.into_iter().filter(|id| !placed.contains(id.as_str())).cloned());
    order
}
