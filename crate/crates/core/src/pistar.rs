//! piStar-compatible JSON documents.
//!
//! Top-level keys: `actors`, `dependencies`, `links`, `istar` (must be
//! `"2.0"`), `customProperties` (model metadata), and the layout keys `tool`,
//! `saveDate`, `diagram`. Each dependency entry carries the dependum plus
//! `source` (dependee side) and `target` (depender side); either may name an
//! actor or one of its elements. See `docs/format.md`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::model::{
    Actor, ActorKind, ActorLink, ActorLinkKind, Annotations, Dependency, Dependum, ElementKind, Identifier,
    IntentionalElement, InternalLink, LinkKind, Model, Polarity,
};

pub const ISTAR_VERSION: &str = "2.0";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ParseCode {
    #[serde(rename = "E_JSON")]
    Json,
    #[serde(rename = "E_VERSION")]
    Version,
    #[serde(rename = "E_SCHEMA")]
    Schema,
    #[serde(rename = "E_UNKNOWN_TYPE")]
    UnknownType,
    #[serde(rename = "E_DANGLING")]
    Dangling,
    #[serde(rename = "W_UNKNOWN_KEY")]
    UnknownKey,
    #[serde(rename = "W_LINK_IGNORED")]
    LinkIgnored,
    #[serde(rename = "W_ORPHAN_IGNORED")]
    OrphanIgnored,
}

impl ParseCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseCode::Json => "E_JSON",
            ParseCode::Version => "E_VERSION",
            ParseCode::Schema => "E_SCHEMA",
            ParseCode::UnknownType => "E_UNKNOWN_TYPE",
            ParseCode::Dangling => "E_DANGLING",
            ParseCode::UnknownKey => "W_UNKNOWN_KEY",
            ParseCode::LinkIgnored => "W_LINK_IGNORED",
            ParseCode::OrphanIgnored => "W_ORPHAN_IGNORED",
        }
    }
}

/// A problem located by a JSON pointer into the input document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParseError {
    pub path: String,
    pub code: ParseCode,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = if self.path.is_empty() { "/" } else { &self.path };
        write!(f, "{} at {}: {}", self.code.as_str(), path, self.message)
    }
}

/// Layout and tool data carried by a document but irrelevant to semantics.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Layout {
    pub tool: Option<Value>,
    pub save_date: Option<Value>,
    pub diagram: Option<Value>,
    /// piStar's per-node styling, kept verbatim.
    pub display: Option<Value>,
    /// `x`/`y` of every positioned node, by id.
    pub positions: BTreeMap<String, (Value, Value)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsedDocument {
    pub model: Model,
    pub layout: Layout,
    pub warnings: Vec<ParseError>,
}

pub fn parse_model(bytes: &[u8]) -> Result<Model, Vec<ParseError>> {
    parse_document(bytes).map(|doc| doc.model)
}

fn pointer(base: &str, token: impl fmt::Display) -> String {
    let token = token.to_string().replace('~', "~0").replace('/', "~1");
    format!("{base}/{token}")
}

struct Parser {
    errors: Vec<ParseError>,
    warnings: Vec<ParseError>,
    layout: Layout,
}

impl Parser {
    fn error(&mut self, path: &str, code: ParseCode, message: impl Into<String>) {
        self.errors.push(ParseError {
            path: path.to_owned(),
            code,
            message: message.into(),
        });
    }

    fn array<'v>(&mut self, root: &'v Map<String, Value>, key: &str) -> &'v [Value] {
        match root.get(key) {
            None => &[],
            Some(Value::Array(items)) => items,
            Some(_) => {
                self.error(
                    &pointer("", key),
                    ParseCode::Schema,
                    format!("`{key}` must be an array"),
                );
                &[]
            }
        }
    }

    fn object<'v>(&mut self, value: &'v Value, path: &str) -> Option<&'v Map<String, Value>> {
        let obj = value.as_object();
        if obj.is_none() {
            self.error(path, ParseCode::Schema, "expected an object");
        }
        obj
    }

    fn string(&mut self, obj: &Map<String, Value>, key: &str, path: &str) -> Option<String> {
        match obj.get(key) {
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => {
                self.error(
                    &pointer(path, key),
                    ParseCode::Schema,
                    format!("`{key}` must be a string"),
                );
                None
            }
            None => {
                self.error(path, ParseCode::Schema, format!("missing `{key}`"));
                None
            }
        }
    }

    fn properties(&mut self, obj: &Map<String, Value>, path: &str) -> Annotations {
        let mut out = Annotations::new();
        match obj.get("customProperties") {
            None | Some(Value::Null) => {}
            Some(Value::Object(map)) => {
                for (k, v) in map {
                    match v {
                        Value::String(s) => {
                            out.insert(k.clone(), s.clone());
                        }
                        _ => self.error(
                            &pointer(&pointer(path, "customProperties"), k),
                            ParseCode::Schema,
                            "custom property values must be strings",
                        ),
                    }
                }
            }
            Some(_) => self.error(
                &pointer(path, "customProperties"),
                ParseCode::Schema,
                "`customProperties` must be an object",
            ),
        }
        out
    }

    fn position(&mut self, obj: &Map<String, Value>, id: &str) {
        if let (Some(x), Some(y)) = (obj.get("x"), obj.get("y")) {
            self.layout.positions.insert(id.to_owned(), (x.clone(), y.clone()));
        }
    }
}

fn actor_kind(tag: &str) -> Option<ActorKind> {
    match tag {
        "istar.Actor" => Some(ActorKind::Actor),
        "istar.Agent" => Some(ActorKind::Agent),
        "istar.Role" => Some(ActorKind::Role),
        _ => None,
    }
}

fn element_kind(tag: &str) -> Option<ElementKind> {
    match tag {
        "istar.Goal" => Some(ElementKind::Goal),
        "istar.Task" => Some(ElementKind::Task),
        "istar.Resource" => Some(ElementKind::Resource),
        "istar.Quality" => Some(ElementKind::Quality),
        _ => None,
    }
}

fn actor_tag(kind: ActorKind) -> &'static str {
    match kind {
        ActorKind::Actor => "istar.Actor",
        ActorKind::Agent => "istar.Agent",
        ActorKind::Role => "istar.Role",
    }
}

fn element_tag(kind: ElementKind) -> &'static str {
    match kind {
        ElementKind::Goal => "istar.Goal",
        ElementKind::Task => "istar.Task",
        ElementKind::Resource => "istar.Resource",
        ElementKind::Quality => "istar.Quality",
    }
}

enum LinkTag {
    Internal(Option<LinkKind>),
    Actor(ActorLinkKind),
    Dependency,
}

fn link_tag(tag: &str) -> Option<LinkTag> {
    Some(match tag {
        "istar.AndRefinementLink" => LinkTag::Internal(Some(LinkKind::AndRefinement)),
        "istar.OrRefinementLink" => LinkTag::Internal(Some(LinkKind::OrRefinement)),
        "istar.ContributionLink" => LinkTag::Internal(None),
        "istar.QualificationLink" => LinkTag::Internal(Some(LinkKind::Qualification)),
        "istar.NeededByLink" => LinkTag::Internal(Some(LinkKind::NeededBy)),
        "istar.IsALink" => LinkTag::Actor(ActorLinkKind::IsA),
        "istar.ParticipatesInLink" => LinkTag::Actor(ActorLinkKind::ParticipatesIn),
        "istar.DependencyLink" => LinkTag::Dependency,
        _ => return None,
    })
}

const KNOWN_KEYS: [&str; 10] = [
    "actors",
    "dependencies",
    "links",
    "istar",
    "customProperties",
    "tool",
    "saveDate",
    "diagram",
    "display",
    "orphans",
];

/// Parses a document, keeping layout data and warnings.
pub fn parse_document(bytes: &[u8]) -> Result<ParsedDocument, Vec<ParseError>> {
    let root: Value = serde_json::from_slice(bytes).map_err(|e| {
        vec![ParseError {
            path: String::new(),
            code: ParseCode::Json,
            message: e.to_string(),
        }]
    })?;
    let mut p = Parser {
        errors: Vec::new(),
        warnings: Vec::new(),
        layout: Layout::default(),
    };
    let Some(root) = root.as_object() else {
        return Err(vec![ParseError {
            path: String::new(),
            code: ParseCode::Schema,
            message: "document must be a JSON object".into(),
        }]);
    };

    match root.get("istar") {
        Some(Value::String(v)) if v == ISTAR_VERSION => {}
        Some(other) => p.error(
            "/istar",
            ParseCode::Version,
            format!("unsupported istar version {other}"),
        ),
        None => p.error("", ParseCode::Version, "missing `istar` version"),
    }
    for key in root.keys().filter(|k| !KNOWN_KEYS.contains(&k.as_str())) {
        p.warnings.push(ParseError {
            path: pointer("", key),
            code: ParseCode::UnknownKey,
            message: format!("ignored top-level key `{key}`"),
        });
    }
    p.layout.tool = root.get("tool").cloned();
    p.layout.save_date = root.get("saveDate").cloned();
    p.layout.diagram = root.get("diagram").cloned();
    p.layout.display = root.get("display").cloned();
    // elements outside every actor boundary have no owner in the metamodel
    if let Some(Value::Array(orphans)) = root.get("orphans") {
        for i in 0..orphans.len() {
            p.warnings.push(ParseError {
                path: pointer("/orphans", i),
                code: ParseCode::OrphanIgnored,
                message: "element outside any actor ignored".into(),
            });
        }
    }
    let metadata = p.properties(root, "");

    // element id -> owning actor index
    let mut owner: BTreeMap<String, usize> = BTreeMap::new();
    let mut actor_index: BTreeMap<String, usize> = BTreeMap::new();
    let mut actors = Vec::new();

    for (i, value) in p.array(root, "actors").iter().enumerate() {
        let path = pointer("/actors", i);
        let Some(obj) = p.object(value, &path) else { continue };
        let (id, text, tag) = (
            p.string(obj, "id", &path),
            p.string(obj, "text", &path),
            p.string(obj, "type", &path),
        );
        let (Some(id), Some(text), Some(tag)) = (id, text, tag) else {
            continue;
        };
        let Some(kind) = actor_kind(&tag) else {
            p.error(&path, ParseCode::UnknownType, format!("unknown actor type `{tag}`"));
            continue;
        };
        p.position(obj, &id);
        let mut actor = Actor::new(id.clone(), text, kind);
        actor.annotations = p.properties(obj, &path);
        let nodes = match obj.get("nodes") {
            None => &[][..],
            Some(Value::Array(nodes)) => nodes,
            Some(_) => {
                p.error(&pointer(&path, "nodes"), ParseCode::Schema, "`nodes` must be an array");
                &[][..]
            }
        };
        for (j, node) in nodes.iter().enumerate() {
            let node_path = pointer(&pointer(&path, "nodes"), j);
            let Some(nobj) = p.object(node, &node_path) else {
                continue;
            };
            let (nid, ntext, ntag) = (
                p.string(nobj, "id", &node_path),
                p.string(nobj, "text", &node_path),
                p.string(nobj, "type", &node_path),
            );
            let (Some(nid), Some(ntext), Some(ntag)) = (nid, ntext, ntag) else {
                continue;
            };
            let Some(kind) = element_kind(&ntag) else {
                p.error(
                    &node_path,
                    ParseCode::UnknownType,
                    format!("unknown element type `{ntag}`"),
                );
                continue;
            };
            p.position(nobj, &nid);
            owner.entry(nid.clone()).or_insert(actors.len());
            actor.elements.push(IntentionalElement {
                id: nid.into(),
                name: ntext,
                kind,
                owner: actor.id.clone(),
                annotations: p.properties(nobj, &node_path),
            });
        }
        actor_index.entry(id).or_insert(actors.len());
        actors.push(actor);
    }

    let mut actor_links = Vec::new();
    for (i, value) in p.array(root, "links").iter().enumerate() {
        let path = pointer("/links", i);
        let Some(obj) = p.object(value, &path) else { continue };
        let (id, tag, source, target) = (
            p.string(obj, "id", &path),
            p.string(obj, "type", &path),
            p.string(obj, "source", &path),
            p.string(obj, "target", &path),
        );
        let (Some(id), Some(tag), Some(source), Some(target)) = (id, tag, source, target) else {
            continue;
        };
        match link_tag(&tag) {
            None => p.error(&path, ParseCode::UnknownType, format!("unknown link type `{tag}`")),
            Some(LinkTag::Dependency) => p.warnings.push(ParseError {
                path,
                code: ParseCode::LinkIgnored,
                message: "dependency links are implied by `dependencies` entries".into(),
            }),
            Some(LinkTag::Actor(kind)) => {
                if !actor_index.contains_key(&source) || !actor_index.contains_key(&target) {
                    p.error(
                        &path,
                        ParseCode::Dangling,
                        format!("actor link `{source}` -> `{target}` is dangling"),
                    );
                    continue;
                }
                actor_links.push(ActorLink {
                    id: id.into(),
                    kind,
                    source: source.into(),
                    target: target.into(),
                });
            }
            Some(LinkTag::Internal(kind)) => {
                let kind = match kind {
                    Some(kind) => kind,
                    None => match obj.get("label").and_then(Value::as_str).and_then(Polarity::parse) {
                        Some(polarity) => LinkKind::Contribution(polarity),
                        None => {
                            p.error(
                                &path,
                                ParseCode::Schema,
                                "contribution links need a `label` of make, help, hurt or break",
                            );
                            continue;
                        }
                    },
                };
                let (Some(&actor), true) = (owner.get(&source), owner.contains_key(&target)) else {
                    p.error(
                        &path,
                        ParseCode::Dangling,
                        format!("link `{source}` -> `{target}` is dangling"),
                    );
                    continue;
                };
                actors[actor].internal_links.push(InternalLink {
                    id: id.into(),
                    kind,
                    source: source.into(),
                    target: target.into(),
                });
            }
        }
    }

    let anchor = |id: &str| -> Option<(Identifier, Option<Identifier>)> {
        if let Some(&i) = actor_index.get(id) {
            Some((actors[i].id.clone(), None))
        } else {
            owner
                .get(id)
                .map(|&i| (actors[i].id.clone(), Some(Identifier::from(id))))
        }
    };
    let mut dependencies = Vec::new();
    for (i, value) in p.array(root, "dependencies").iter().enumerate() {
        let path = pointer("/dependencies", i);
        let Some(obj) = p.object(value, &path) else { continue };
        let (id, text, tag, source, target) = (
            p.string(obj, "id", &path),
            p.string(obj, "text", &path),
            p.string(obj, "type", &path),
            p.string(obj, "source", &path),
            p.string(obj, "target", &path),
        );
        let (Some(id), Some(text), Some(tag), Some(source), Some(target)) = (id, text, tag, source, target) else {
            continue;
        };
        let Some(kind) = element_kind(&tag) else {
            p.error(&path, ParseCode::UnknownType, format!("unknown dependum type `{tag}`"));
            continue;
        };
        let (Some(dependee), Some(depender)) = (anchor(&source), anchor(&target)) else {
            p.error(
                &path,
                ParseCode::Dangling,
                format!("dependency `{target}` -> `{source}` is dangling"),
            );
            continue;
        };
        p.position(obj, &id);
        dependencies.push(Dependency {
            id: id.into(),
            depender: depender.0,
            depender_element: depender.1,
            dependee: dependee.0,
            dependee_element: dependee.1,
            dependum: Dependum { name: text, kind },
            annotations: p.properties(obj, &path),
        });
    }

    if !p.errors.is_empty() {
        return Err(p.errors);
    }
    Ok(ParsedDocument {
        model: Model {
            actors,
            dependencies,
            actor_links,
            metadata,
        },
        layout: p.layout,
        warnings: p.warnings,
    })
}

fn properties(map: &Annotations) -> Option<Value> {
    (!map.is_empty()).then(|| json!(map))
}

fn with_properties(mut value: Value, map: &Annotations) -> Value {
    if let (Some(obj), Some(props)) = (value.as_object_mut(), properties(map)) {
        obj.insert("customProperties".into(), props);
    }
    value
}

/// Rebuilds every object with keys inserted in sorted order.
fn sorted(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let entries: BTreeMap<String, Value> = map.into_iter().map(|(k, v)| (k, sorted(v))).collect();
            Value::Object(entries.into_iter().collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sorted).collect()),
        other => other,
    }
}

/// Canonical document: sorted keys, two-space indentation, no layout keys,
/// trailing newline.
pub fn serialize_model(model: &Model) -> String {
    let actors: Vec<Value> = model
        .actors
        .iter()
        .map(|actor| {
            let nodes: Vec<Value> = actor
                .elements
                .iter()
                .map(|e| {
                    with_properties(
                        json!({"id": e.id, "text": e.name, "type": element_tag(e.kind)}),
                        &e.annotations,
                    )
                })
                .collect();
            with_properties(
                json!({"id": actor.id, "text": actor.name, "type": actor_tag(actor.kind), "nodes": nodes}),
                &actor.annotations,
            )
        })
        .collect();

    let mut links: Vec<Value> = Vec::new();
    for link in model.internal_links() {
        let (tag, label) = match link.kind {
            LinkKind::AndRefinement => ("istar.AndRefinementLink", None),
            LinkKind::OrRefinement => ("istar.OrRefinementLink", None),
            LinkKind::Contribution(p) => ("istar.ContributionLink", Some(p.as_str())),
            LinkKind::Qualification => ("istar.QualificationLink", None),
            LinkKind::NeededBy => ("istar.NeededByLink", None),
        };
        let mut value = json!({"id": link.id, "type": tag, "source": link.source, "target": link.target});
        if let Some(label) = label {
            value["label"] = json!(label);
        }
        links.push(value);
    }
    for link in &model.actor_links {
        let tag = match link.kind {
            ActorLinkKind::IsA => "istar.IsALink",
            ActorLinkKind::ParticipatesIn => "istar.ParticipatesInLink",
        };
        links.push(json!({"id": link.id, "type": tag, "source": link.source, "target": link.target}));
    }

    let dependencies: Vec<Value> = model
        .dependencies
        .iter()
        .map(|d| {
            let source = d.dependee_element.as_ref().unwrap_or(&d.dependee);
            let target = d.depender_element.as_ref().unwrap_or(&d.depender);
            with_properties(
                json!({
                    "id": d.id,
                    "text": d.dependum.name,
                    "type": element_tag(d.dependum.kind),
                    "source": source,
                    "target": target,
                }),
                &d.annotations,
            )
        })
        .collect();

    let doc = with_properties(
        json!({
            "actors": actors,
            "dependencies": dependencies,
            "links": links,
            "istar": ISTAR_VERSION,
        }),
        &model.metadata,
    );
    let mut text = serde_json::to_string_pretty(&sorted(doc)).expect("documents always serialize");
    text.push('\n');
    text
}

/// Ids of every node the document defines, for diagnostics.
pub fn document_ids(model: &Model) -> BTreeSet<&str> {
    model
        .actors
        .iter()
        .flat_map(|a| std::iter::once(a.id.as_str()).chain(a.elements.iter().map(|e| e.id.as_str())))
        .chain(model.dependencies.iter().map(|d| d.id.as_str()))
        .collect()
}
