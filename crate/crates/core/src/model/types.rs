use std::borrow::Borrow;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Opaque identifier, unique within one [`Model`].
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Identifier(String);

impl Identifier {
    pub fn new(value: impl Into<String>) -> Self {
        Identifier(value.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Identifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for Identifier {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Identifier {
    fn from(value: &str) -> Self {
        Identifier(value.to_owned())
    }
}

impl From<String> for Identifier {
    fn from(value: String) -> Self {
        Identifier(value)
    }
}

impl PartialEq<str> for Identifier {
    fn eq(&self, other: &str) -> bool {
        self.0 == other
    }
}

impl PartialEq<&str> for Identifier {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

pub type Annotations = BTreeMap<String, String>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ActorKind {
    Actor,
    Agent,
    Role,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ElementKind {
    Goal,
    Task,
    Resource,
    Quality,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntentionalElement {
    pub id: Identifier,
    pub name: String,
    pub kind: ElementKind,
    pub owner: Identifier,
    #[serde(default)]
    pub annotations: Annotations,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Make,
    Help,
    Hurt,
    Break,
}

impl Polarity {
    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Make => "make",
            Polarity::Help => "help",
            Polarity::Hurt => "hurt",
            Polarity::Break => "break",
        }
    }

    pub fn parse(label: &str) -> Option<Self> {
        match label {
            "make" => Some(Polarity::Make),
            "help" => Some(Polarity::Help),
            "hurt" => Some(Polarity::Hurt),
            "break" => Some(Polarity::Break),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkKind {
    AndRefinement,
    OrRefinement,
    Contribution(Polarity),
    Qualification,
    NeededBy,
}

impl LinkKind {
    pub fn is_refinement(self) -> bool {
        matches!(self, LinkKind::AndRefinement | LinkKind::OrRefinement)
    }
}

/// A link between two elements of the same actor.
///
/// Refinement links point from child (`source`) to parent (`target`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InternalLink {
    pub id: Identifier,
    pub kind: LinkKind,
    pub source: Identifier,
    pub target: Identifier,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dependum {
    pub name: String,
    pub kind: ElementKind,
}

/// The depender relies on the dependee for the dependum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Dependency {
    pub id: Identifier,
    pub depender: Identifier,
    pub depender_element: Option<Identifier>,
    pub dependee: Identifier,
    pub dependee_element: Option<Identifier>,
    pub dependum: Dependum,
    #[serde(default)]
    pub annotations: Annotations,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActorLinkKind {
    IsA,
    ParticipatesIn,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActorLink {
    pub id: Identifier,
    pub kind: ActorLinkKind,
    pub source: Identifier,
    pub target: Identifier,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Actor {
    pub id: Identifier,
    pub name: String,
    pub kind: ActorKind,
    #[serde(default)]
    pub elements: Vec<IntentionalElement>,
    #[serde(default)]
    pub internal_links: Vec<InternalLink>,
    #[serde(default)]
    pub annotations: Annotations,
}

impl Actor {
    pub fn new(id: impl Into<Identifier>, name: impl Into<String>, kind: ActorKind) -> Self {
        Actor {
            id: id.into(),
            name: name.into(),
            kind,
            elements: Vec::new(),
            internal_links: Vec::new(),
            annotations: Annotations::new(),
        }
    }

    pub fn element(&self, id: &str) -> Option<&IntentionalElement> {
        self.elements.iter().find(|e| e.id.as_str() == id)
    }

    pub fn tasks(&self) -> impl Iterator<Item = &IntentionalElement> {
        self.elements.iter().filter(|e| e.kind == ElementKind::Task)
    }

    /// Adds an element owned by this actor and returns its id.
    pub fn add_element(&mut self, id: impl Into<Identifier>, name: impl Into<String>, kind: ElementKind) -> Identifier {
        let id = id.into();
        self.elements.push(IntentionalElement {
            id: id.clone(),
            name: name.into(),
            kind,
            owner: self.id.clone(),
            annotations: Annotations::new(),
        });
        id
    }

    pub fn add_link(
        &mut self,
        id: impl Into<Identifier>,
        kind: LinkKind,
        source: impl Into<Identifier>,
        target: impl Into<Identifier>,
    ) {
        self.internal_links.push(InternalLink {
            id: id.into(),
            kind,
            source: source.into(),
            target: target.into(),
        });
    }
}

/// An iStar 2.0 model.
///
/// Plain data; every query is a function over an immutable borrow.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Model {
    pub actors: Vec<Actor>,
    pub dependencies: Vec<Dependency>,
    pub actor_links: Vec<ActorLink>,
    pub metadata: BTreeMap<String, String>,
}

impl Model {
    pub fn actor(&self, id: &str) -> Option<&Actor> {
        self.actors.iter().find(|a| a.id.as_str() == id)
    }

    pub fn actor_mut(&mut self, id: &str) -> Option<&mut Actor> {
        self.actors.iter_mut().find(|a| a.id.as_str() == id)
    }

    pub fn element(&self, id: &str) -> Option<&IntentionalElement> {
        self.elements().find(|e| e.id.as_str() == id)
    }

    pub fn elements(&self) -> impl Iterator<Item = &IntentionalElement> {
        self.actors.iter().flat_map(|a| a.elements.iter())
    }

    pub fn internal_links(&self) -> impl Iterator<Item = &InternalLink> {
        self.actors.iter().flat_map(|a| a.internal_links.iter())
    }

    pub fn dependency(&self, id: &str) -> Option<&Dependency> {
        self.dependencies.iter().find(|d| d.id.as_str() == id)
    }

    /// Goals that do not refine any other element.
    pub fn root_goals(&self) -> Vec<&IntentionalElement> {
        self.actors
            .iter()
            .flat_map(|actor| {
                actor.elements.iter().filter(move |e| {
                    e.kind == ElementKind::Goal
                        && !actor
                            .internal_links
                            .iter()
                            .any(|l| l.kind.is_refinement() && l.source == e.id)
                })
            })
            .collect()
    }

    pub fn add_dependency(
        &mut self,
        id: impl Into<Identifier>,
        depender: (&str, Option<&str>),
        dependee: (&str, Option<&str>),
        name: impl Into<String>,
        kind: ElementKind,
    ) -> &mut Dependency {
        self.dependencies.push(Dependency {
            id: id.into(),
            depender: depender.0.into(),
            depender_element: depender.1.map(Identifier::from),
            dependee: dependee.0.into(),
            dependee_element: dependee.1.map(Identifier::from),
            dependum: Dependum {
                name: name.into(),
                kind,
            },
            annotations: Annotations::new(),
        });
        self.dependencies.last_mut().expect("just pushed")
    }
}
