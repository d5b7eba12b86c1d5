//! Naive label propagation used as an oracle for `evaluate_goals`: every
//! sweep recomputes every element from the previous sweep's labels (Jacobi
//! style) until nothing changes.

use std::collections::BTreeMap;

use ssiforge_core::sim::SplitMix64;
use ssiforge_core::{Actor, ActorKind, ElementKind, Identifier, LabelState, LinkKind, Model, Polarity};

use LabelState::{Denied as D, PartiallyDenied as PD, PartiallySatisfied as PS, Satisfied as S, Unknown as U};

fn contribution(p: Polarity, l: LabelState) -> LabelState {
    let flipped = match l {
        S => D,
        D => S,
        PS => PD,
        PD => PS,
        U => U,
    };
    let weak = |l| match l {
        S => PS,
        D => PD,
        x => x,
    };
    match p {
        Polarity::Make => l,
        Polarity::Break => flipped,
        Polarity::Help => weak(l),
        Polarity::Hurt => weak(flipped),
    }
}

/// S/D kept, everything else Unknown.
fn crisp(l: LabelState) -> LabelState {
    if l == S || l == D {
        l
    } else {
        U
    }
}

fn and(ls: &[LabelState]) -> LabelState {
    let ls: Vec<_> = ls.iter().map(|&l| crisp(l)).collect();
    if ls.contains(&D) {
        D
    } else if ls.iter().all(|&l| l == S) {
        S
    } else {
        U
    }
}

fn or(ls: &[LabelState]) -> LabelState {
    let ls: Vec<_> = ls.iter().map(|&l| crisp(l)).collect();
    if ls.contains(&S) {
        S
    } else if ls.iter().all(|&l| l == D) {
        D
    } else {
        U
    }
}

fn quality(ls: &[LabelState]) -> LabelState {
    let positive = ls.iter().any(|&l| l == S || l == PS);
    let negative = ls.iter().any(|&l| l == D || l == PD);
    match (positive, negative) {
        (true, false) if ls.contains(&S) => S,
        (true, false) => PS,
        (false, true) if ls.contains(&D) => D,
        (false, true) => PD,
        _ => U,
    }
}

pub fn evaluate(model: &Model, outcomes: &BTreeMap<Identifier, LabelState>) -> BTreeMap<Identifier, LabelState> {
    let mut labels: BTreeMap<Identifier, LabelState> = model.elements().map(|e| (e.id.clone(), U)).collect();
    loop {
        let prev = labels.clone();
        let get = |id: &Identifier| prev[id];
        for e in model.elements() {
            let links: Vec<_> = model.internal_links().filter(|l| l.target == e.id).collect();
            let dependums: Vec<LabelState> = model
                .dependencies
                .iter()
                .filter(|d| d.depender_element.as_ref() == Some(&e.id))
                .map(|d| match outcomes.get(&d.id) {
                    Some(&l) => l,
                    None => d.dependee_element.as_ref().map_or(U, get),
                })
                .collect();
            let own = outcomes.get(&e.id).copied();
            let next = if e.kind == ElementKind::Quality {
                let mut evidence: Vec<LabelState> = own.into_iter().collect();
                for l in &links {
                    if let LinkKind::Contribution(p) = l.kind {
                        evidence.push(contribution(p, get(&l.source)));
                    }
                }
                evidence.extend(&dependums);
                quality(&evidence)
            } else {
                let ands: Vec<_> = links
                    .iter()
                    .filter(|l| l.kind == LinkKind::AndRefinement)
                    .map(|l| get(&l.source))
                    .collect();
                let ors: Vec<_> = links
                    .iter()
                    .filter(|l| l.kind == LinkKind::OrRefinement)
                    .map(|l| get(&l.source))
                    .collect();
                let mut parts: Vec<LabelState> = own.into_iter().collect();
                if !ands.is_empty() {
                    parts.push(and(&ands));
                }
                if !ors.is_empty() {
                    parts.push(or(&ors));
                }
                parts.extend(&dependums);
                if parts.is_empty() {
                    U
                } else {
                    and(&parts)
                }
            };
            labels.insert(e.id.clone(), next);
        }
        if labels == prev {
            return labels;
        }
    }
}

const LABELS: [LabelState; 5] = [U, S, D, PS, PD];
const KINDS: [ElementKind; 4] = [
    ElementKind::Goal,
    ElementKind::Task,
    ElementKind::Resource,
    ElementKind::Quality,
];
const POLARITIES: [Polarity; 4] = [Polarity::Make, Polarity::Help, Polarity::Hurt, Polarity::Break];

/// A random acyclic model with at most ten elements, plus random outcomes.
/// Every input of an element has a larger global index than the element.
pub fn random_case(seed: u64) -> (Model, BTreeMap<Identifier, LabelState>) {
    let mut rng = SplitMix64::new(seed);
    let mut pick = |n: u64| rng.next_u64() % n;
    let actors = 1 + pick(3) as usize;
    let n = 1 + pick(10) as usize;
    let mut model = Model::default();
    for a in 0..actors {
        model
            .actors
            .push(Actor::new(format!("A{a}"), format!("Actor {a}"), ActorKind::Actor));
    }
    let mut owner = Vec::new();
    let mut kinds = Vec::new();
    let mut decomposition: Vec<Option<LinkKind>> = Vec::new();
    for j in 0..n {
        let a = pick(actors as u64) as usize;
        let kind = KINDS[pick(4) as usize];
        model.actors[a].add_element(format!("e{j}"), format!("Element {j}"), kind);
        owner.push(a);
        kinds.push(kind);
        decomposition.push(None);
    }
    for j in 0..n {
        // up to two outgoing links to earlier elements of the same actor
        for k in 0..2 {
            let parents: Vec<usize> = (0..j).filter(|&p| owner[p] == owner[j]).collect();
            if parents.is_empty() || pick(3) == 0 {
                continue;
            }
            let p = parents[pick(parents.len() as u64) as usize];
            let link = match kinds[p] {
                ElementKind::Quality => LinkKind::Contribution(POLARITIES[pick(4) as usize]),
                ElementKind::Goal | ElementKind::Task => *decomposition[p].get_or_insert(if pick(2) == 0 {
                    LinkKind::AndRefinement
                } else {
                    LinkKind::OrRefinement
                }),
                ElementKind::Resource => continue,
            };
            let actor = &mut model.actors[owner[j]];
            if actor
                .internal_links
                .iter()
                .any(|l| l.source.as_str() == format!("e{j}") && l.target.as_str() == format!("e{p}"))
            {
                continue;
            }
            actor.add_link(format!("l{j}.{k}"), link, format!("e{j}"), format!("e{p}"));
        }
    }
    if actors > 1 {
        for d in 0..pick(4) {
            let i = pick(n as u64) as usize;
            let later: Vec<usize> = (i + 1..n).filter(|&j| owner[j] != owner[i]).collect();
            let (dependee, dependee_element) = if later.is_empty() || pick(4) == 0 {
                let other = (owner[i] + 1 + pick(actors as u64 - 1) as usize) % actors;
                (other, None)
            } else {
                let j = later[pick(later.len() as u64) as usize];
                (owner[j], Some(format!("e{j}")))
            };
            let depender = format!("A{}", owner[i]);
            let dependee = format!("A{dependee}");
            let e = format!("e{i}");
            model.add_dependency(
                format!("d{d}"),
                (depender.as_str(), Some(e.as_str())),
                (dependee.as_str(), dependee_element.as_deref()),
                format!("Dependum {d}"),
                KINDS[pick(4) as usize],
            );
        }
    }
    let mut outcomes = BTreeMap::new();
    let ids: Vec<Identifier> = model
        .elements()
        .map(|e| e.id.clone())
        .chain(model.dependencies.iter().map(|d| d.id.clone()))
        .collect();
    for id in ids {
        if pick(2) == 0 {
            outcomes.insert(id, LABELS[pick(5) as usize]);
        }
    }
    (model, outcomes)
}
