//! Random well-formed models, built from a plain recipe so proptest can
//! shrink the recipe rather than the model.

use proptest::prelude::*;
use ssiforge_core::{Actor, ActorKind, ActorLink, ActorLinkKind, ElementKind, Identifier, LinkKind, Model, Polarity};

#[derive(Clone, Debug)]
pub struct ElementRecipe {
    pub kind: u8,
    /// Picks an earlier element as refinement parent or contribution target.
    pub parent: u8,
    /// 0: none, 1: refinement, 2: contribution, 3: needed-by/qualification
    pub link: u8,
    pub or: bool,
    pub polarity: u8,
    pub annotated: bool,
}

#[derive(Clone, Debug)]
pub struct DependencyRecipe {
    pub depender: u8,
    pub dependee: u8,
    pub depender_element: Option<u8>,
    pub dependee_element: Option<u8>,
    pub kind: u8,
    pub name: u8,
}

#[derive(Clone, Debug)]
pub struct ModelRecipe {
    pub actors: Vec<(u8, Vec<ElementRecipe>)>,
    pub dependencies: Vec<DependencyRecipe>,
    pub is_a: Option<(u8, u8)>,
    pub metadata: bool,
}

const KINDS: [ElementKind; 4] = [
    ElementKind::Goal,
    ElementKind::Task,
    ElementKind::Resource,
    ElementKind::Quality,
];
const POLARITIES: [Polarity; 4] = [Polarity::Make, Polarity::Help, Polarity::Hurt, Polarity::Break];
const NAMES: [&str; 6] = [
    "Apply",
    "Check record",
    "Issue permit",
    "Ledger",
    "Timely",
    "Provide 'quoted' \"name\"",
];

fn element_recipe() -> impl Strategy<Value = ElementRecipe> {
    (0..4u8, any::<u8>(), 0..4u8, any::<bool>(), 0..4u8, any::<bool>()).prop_map(
        |(kind, parent, link, or, polarity, annotated)| ElementRecipe {
            kind,
            parent,
            link,
            or,
            polarity,
            annotated,
        },
    )
}

fn dependency_recipe() -> impl Strategy<Value = DependencyRecipe> {
    (
        any::<u8>(),
        any::<u8>(),
        proptest::option::of(any::<u8>()),
        proptest::option::of(any::<u8>()),
        0..4u8,
        any::<u8>(),
    )
        .prop_map(|(depender, dependee, a, b, kind, name)| DependencyRecipe {
            depender,
            dependee,
            depender_element: a,
            dependee_element: b,
            kind,
            name,
        })
}

/// Recipes for models with `actors` actors and at most `elements` elements
/// per actor.
pub fn recipe(
    actors: std::ops::Range<usize>,
    elements: std::ops::Range<usize>,
    deps: usize,
) -> impl Strategy<Value = ModelRecipe> {
    (
        proptest::collection::vec((0..3u8, proptest::collection::vec(element_recipe(), elements)), actors),
        proptest::collection::vec(dependency_recipe(), 0..=deps),
        proptest::option::of((any::<u8>(), any::<u8>())),
        any::<bool>(),
    )
        .prop_map(|(actors, dependencies, is_a, metadata)| ModelRecipe {
            actors,
            dependencies,
            is_a,
            metadata,
        })
}

pub fn models() -> impl Strategy<Value = Model> {
    recipe(1..5, 0..6, 6).prop_map(|r| build(&r))
}

/// Builds a model that passes validation: refinement and contribution links
/// only point from later to earlier elements, parents keep one
/// decomposition, dependencies join distinct actors.
pub fn build(recipe: &ModelRecipe) -> Model {
    let mut model = Model::default();
    for (i, (kind, elements)) in recipe.actors.iter().enumerate() {
        let actor_kind = [ActorKind::Actor, ActorKind::Agent, ActorKind::Role][*kind as usize % 3];
        let mut actor = Actor::new(format!("a{i}"), format!("Actor {i}"), actor_kind);
        if i % 2 == 1 {
            actor.annotations.insert("note".into(), format!("actor {i}"));
        }
        // decomposition chosen by the first refinement into a parent
        let mut decomposition: Vec<Option<bool>> = Vec::new();
        for (j, e) in elements.iter().enumerate() {
            let kind = KINDS[e.kind as usize % 4];
            let id = format!("a{i}.e{j}");
            actor.add_element(
                id.clone(),
                format!("{} {i}.{j}", NAMES[(e.kind as usize + j) % NAMES.len()]),
                kind,
            );
            if e.annotated {
                actor.elements[j].annotations.insert("claim.k".into(), format!("v{j}"));
            }
            decomposition.push(None);
            if j == 0 {
                continue;
            }
            let p = e.parent as usize % j;
            let parent_kind = KINDS[elements[p].kind as usize % 4];
            let link_id = format!("a{i}.l{j}");
            let parent_id = format!("a{i}.e{p}");
            match e.link {
                1 if matches!(parent_kind, ElementKind::Goal | ElementKind::Task) => {
                    let or = *decomposition[p].get_or_insert(e.or);
                    let kind = if or {
                        LinkKind::OrRefinement
                    } else {
                        LinkKind::AndRefinement
                    };
                    actor.add_link(link_id, kind, id, parent_id);
                }
                2 if parent_kind == ElementKind::Quality => {
                    let polarity = POLARITIES[e.polarity as usize % 4];
                    actor.add_link(link_id, LinkKind::Contribution(polarity), id, parent_id);
                }
                3 if kind == ElementKind::Resource && parent_kind == ElementKind::Task => {
                    actor.add_link(link_id, LinkKind::NeededBy, id, parent_id);
                }
                3 if kind == ElementKind::Quality => {
                    actor.add_link(link_id, LinkKind::Qualification, id, parent_id);
                }
                _ => {}
            }
        }
        model.actors.push(actor);
    }

    let n = model.actors.len();
    if n >= 2 {
        for (k, d) in recipe.dependencies.iter().enumerate() {
            let a = d.depender as usize % n;
            let b = (a + 1 + d.dependee as usize % (n - 1)) % n;
            let pick = |actor: usize, sel: Option<u8>| -> Option<Identifier> {
                let elements = &model.actors[actor].elements;
                match sel {
                    Some(s) if !elements.is_empty() => Some(elements[s as usize % elements.len()].id.clone()),
                    _ => None,
                }
            };
            let er = pick(a, d.depender_element);
            let ee = pick(b, d.dependee_element);
            let (ida, idb) = (model.actors[a].id.clone(), model.actors[b].id.clone());
            let dep = model.add_dependency(
                format!("d{k}"),
                (ida.as_str(), er.as_ref().map(Identifier::as_str)),
                (idb.as_str(), ee.as_ref().map(Identifier::as_str)),
                format!("{} {k}", NAMES[d.name as usize % NAMES.len()]),
                KINDS[d.kind as usize % 4],
            );
            if d.name % 3 == 0 {
                dep.annotations.insert("ssi".into(), "present".into());
            }
        }
        if let Some((x, y)) = recipe.is_a {
            let a = x as usize % n;
            let b = (a + 1 + y as usize % (n - 1)) % n;
            let kind = if model.actors[a].kind == model.actors[b].kind {
                ActorLinkKind::IsA
            } else {
                ActorLinkKind::ParticipatesIn
            };
            model.actor_links.push(ActorLink {
                id: "al0".into(),
                kind,
                source: model.actors[a].id.clone(),
                target: model.actors[b].id.clone(),
            });
        }
    }
    if recipe.metadata {
        model.metadata.insert("author".into(), "generator".into());
    }
    model
}
