use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::types::{ElementKind, Identifier, LinkKind, Model};
use super::ActorLinkKind;

/// Stable rule codes reported by [`validate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RuleCode {
    /// Empty identifier, element name or dependum name.
    #[serde(rename = "E_EMPTY")]
    Empty,
    #[serde(rename = "E_ID_DUP")]
    IdDup,
    #[serde(rename = "E_REF_DANGLING")]
    RefDangling,
    #[serde(rename = "E_LINK_KIND")]
    LinkKind,
    #[serde(rename = "E_DEP_SELF")]
    DepSelf,
    #[serde(rename = "E_REFINE_CYCLE")]
    RefineCycle,
    #[serde(rename = "E_REFINE_MIXED")]
    RefineMixed,
    #[serde(rename = "W_ACTOR_EMPTY")]
    ActorEmpty,
}

impl RuleCode {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleCode::Empty => "E_EMPTY",
            RuleCode::IdDup => "E_ID_DUP",
            RuleCode::RefDangling => "E_REF_DANGLING",
            RuleCode::LinkKind => "E_LINK_KIND",
            RuleCode::DepSelf => "E_DEP_SELF",
            RuleCode::RefineCycle => "E_REFINE_CYCLE",
            RuleCode::RefineMixed => "E_REFINE_MIXED",
            RuleCode::ActorEmpty => "W_ACTOR_EMPTY",
        }
    }
}

impl fmt::Display for RuleCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Issue {
    pub code: RuleCode,
    pub message: String,
    pub offending_id: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn error_codes(&self) -> BTreeSet<RuleCode> {
        self.errors.iter().map(|e| e.code).collect()
    }
}

struct Collector {
    errors: Vec<Issue>,
    warnings: Vec<Issue>,
}

impl Collector {
    fn error(&mut self, code: RuleCode, id: &str, message: String) {
        self.errors.push(Issue {
            code,
            message,
            offending_id: id.to_owned(),
        });
    }

    fn warn(&mut self, code: RuleCode, id: &str, message: String) {
        self.warnings.push(Issue {
            code,
            message,
            offending_id: id.to_owned(),
        });
    }
}

/// Checks a model against the well-formedness rule table.
///
/// | code | rule |
/// |------|------|
/// | `E_EMPTY` | identifiers, element names and dependum names are non-empty |
/// | `E_ID_DUP` | identifiers are unique across actors, elements, links and dependencies |
/// | `E_REF_DANGLING` | every reference resolves, elements are owned by their containing actor, dependency anchors belong to their side |
/// | `E_LINK_KIND` | link endpoint kinds: refinement target is a goal or task, contribution target is a quality, needed-by goes resource to task, qualification starts at a quality, internal links stay inside one actor, actor links are not reflexive, is-a joins actors of the same kind |
/// | `E_DEP_SELF` | depender differs from dependee |
/// | `E_REFINE_CYCLE` | refinement links of an actor are acyclic |
/// | `E_REFINE_MIXED` | a parent's refinements are all-and or all-or |
///
/// Errors are sorted by offending id, then code.
pub fn validate(model: &Model) -> ValidationReport {
    let mut out = Collector {
        errors: Vec::new(),
        warnings: Vec::new(),
    };

    check_identifiers(model, &mut out);

    // First occurrence wins so a duplicate id only reports E_ID_DUP.
    let mut owner_of: BTreeMap<&str, (&str, ElementKind)> = BTreeMap::new();
    for actor in &model.actors {
        for e in &actor.elements {
            owner_of.entry(e.id.as_str()).or_insert((actor.id.as_str(), e.kind));
        }
    }
    let actor_kind: BTreeMap<&str, _> = model.actors.iter().map(|a| (a.id.as_str(), a.kind)).collect();

    for actor in &model.actors {
        if actor.elements.is_empty() {
            out.warn(
                RuleCode::ActorEmpty,
                actor.id.as_str(),
                format!("actor '{}' has no intentional elements", actor.name),
            );
        }
        for element in &actor.elements {
            if element.owner != actor.id {
                out.error(
                    RuleCode::RefDangling,
                    element.id.as_str(),
                    format!(
                        "element owner '{}' is not its containing actor '{}'",
                        element.owner, actor.id
                    ),
                );
            }
        }

        for link in &actor.internal_links {
            let (Some(&(src_actor, src_kind)), Some(&(dst_actor, dst_kind))) =
                (owner_of.get(link.source.as_str()), owner_of.get(link.target.as_str()))
            else {
                out.error(
                    RuleCode::RefDangling,
                    link.id.as_str(),
                    format!(
                        "link endpoints '{}' -> '{}' do not both exist",
                        link.source, link.target
                    ),
                );
                continue;
            };
            if src_actor != actor.id.as_str() || dst_actor != actor.id.as_str() {
                out.error(
                    RuleCode::LinkKind,
                    link.id.as_str(),
                    format!("internal link of '{}' leaves the actor", actor.id),
                );
                continue;
            }
            if let Some(problem) = link_kind_problem(link.kind, src_kind, dst_kind) {
                out.error(RuleCode::LinkKind, link.id.as_str(), problem);
            }
        }

        check_refinements(actor, &owner_of, &mut out);
    }

    for dep in &model.dependencies {
        let mut dangling = false;
        for (side, actor) in [("depender", &dep.depender), ("dependee", &dep.dependee)] {
            if !actor_kind.contains_key(actor.as_str()) {
                dangling = true;
                out.error(
                    RuleCode::RefDangling,
                    dep.id.as_str(),
                    format!("{side} '{actor}' is not an actor"),
                );
            }
        }
        for (side, actor, element) in [
            ("depender", &dep.depender, &dep.depender_element),
            ("dependee", &dep.dependee, &dep.dependee_element),
        ] {
            if let Some(element) = element {
                match owner_of.get(element.as_str()) {
                    Some((owner, _)) if *owner == actor.as_str() => {}
                    _ => {
                        dangling = true;
                        out.error(
                            RuleCode::RefDangling,
                            dep.id.as_str(),
                            format!("{side} element '{element}' does not belong to '{actor}'"),
                        );
                    }
                }
            }
        }
        if !dangling && dep.depender == dep.dependee {
            out.error(
                RuleCode::DepSelf,
                dep.id.as_str(),
                format!("actor '{}' depends on itself", dep.depender),
            );
        }
    }

    for link in &model.actor_links {
        let (Some(src), Some(dst)) = (
            actor_kind.get(link.source.as_str()),
            actor_kind.get(link.target.as_str()),
        ) else {
            out.error(
                RuleCode::RefDangling,
                link.id.as_str(),
                format!(
                    "actor link endpoints '{}' -> '{}' do not both exist",
                    link.source, link.target
                ),
            );
            continue;
        };
        if link.source == link.target {
            out.error(RuleCode::LinkKind, link.id.as_str(), "actor link is reflexive".into());
        } else if link.kind == ActorLinkKind::IsA && src != dst {
            out.error(
                RuleCode::LinkKind,
                link.id.as_str(),
                format!("is-a joins a {src:?} to a {dst:?}"),
            );
        }
    }

    let mut errors = out.errors;
    let mut warnings = out.warnings;
    errors.sort_by(|a, b| (&a.offending_id, a.code).cmp(&(&b.offending_id, b.code)));
    errors.dedup();
    warnings.sort_by(|a, b| (&a.offending_id, a.code).cmp(&(&b.offending_id, b.code)));
    ValidationReport { errors, warnings }
}

fn link_kind_problem(kind: LinkKind, source: ElementKind, target: ElementKind) -> Option<String> {
    use ElementKind::*;
    match kind {
        LinkKind::AndRefinement | LinkKind::OrRefinement if !matches!(target, Goal | Task) => {
            Some(format!("refinement target must be a goal or task, found {target:?}"))
        }
        LinkKind::Contribution(_) if target != Quality => {
            Some(format!("contribution target must be a quality, found {target:?}"))
        }
        LinkKind::NeededBy if source != Resource || target != Task => Some(format!(
            "needed-by must link a resource to a task, found {source:?} -> {target:?}"
        )),
        LinkKind::Qualification if source != Quality => {
            Some(format!("qualification source must be a quality, found {source:?}"))
        }
        _ => None,
    }
}

fn check_identifiers(model: &Model, out: &mut Collector) {
    let mut ids: Vec<(&Identifier, &str)> = Vec::new();
    for actor in &model.actors {
        ids.push((&actor.id, "actor"));
        if actor.name.trim().is_empty() {
            out.error(RuleCode::Empty, actor.id.as_str(), "actor name is empty".into());
        }
        for element in &actor.elements {
            ids.push((&element.id, "element"));
            if element.name.trim().is_empty() {
                out.error(RuleCode::Empty, element.id.as_str(), "element name is empty".into());
            }
        }
        ids.extend(actor.internal_links.iter().map(|l| (&l.id, "link")));
    }
    for dep in &model.dependencies {
        ids.push((&dep.id, "dependency"));
        if dep.dependum.name.trim().is_empty() {
            out.error(RuleCode::Empty, dep.id.as_str(), "dependum name is empty".into());
        }
    }
    ids.extend(model.actor_links.iter().map(|l| (&l.id, "actor link")));

    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for (id, what) in ids {
        if id.is_empty() {
            out.error(RuleCode::Empty, "", format!("{what} has an empty identifier"));
        } else {
            *seen.entry(id.as_str()).or_default() += 1;
        }
    }
    for (id, count) in seen {
        if count > 1 {
            out.error(RuleCode::IdDup, id, format!("identifier used {count} times"));
        }
    }
}

fn check_refinements(actor: &super::Actor, owner_of: &BTreeMap<&str, (&str, ElementKind)>, out: &mut Collector) {
    let local = |id: &Identifier| {
        owner_of
            .get(id.as_str())
            .is_some_and(|(owner, _)| *owner == actor.id.as_str())
    };
    let refinements: Vec<_> = actor
        .internal_links
        .iter()
        .filter(|l| l.kind.is_refinement() && local(&l.source) && local(&l.target))
        .collect();

    let mut kinds_by_parent: BTreeMap<&str, BTreeSet<bool>> = BTreeMap::new();
    for link in &refinements {
        kinds_by_parent
            .entry(link.target.as_str())
            .or_default()
            .insert(link.kind == LinkKind::AndRefinement);
    }
    for (parent, kinds) in kinds_by_parent {
        if kinds.len() > 1 {
            out.error(
                RuleCode::RefineMixed,
                parent,
                "element mixes and-refinements with or-refinements".into(),
            );
        }
    }

    let mut graph: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for link in &refinements {
        graph
            .entry(link.source.as_str())
            .or_default()
            .push(link.target.as_str());
    }
    for component in strongly_connected(&graph) {
        let cyclic = component.len() > 1 || graph.get(component[0]).is_some_and(|next| next.contains(&component[0]));
        if cyclic {
            let first = component.iter().min().copied().unwrap_or_default();
            out.error(
                RuleCode::RefineCycle,
                first,
                format!("refinement cycle through {}", component.join(", ")),
            );
        }
    }
}

/// Tarjan's algorithm; components come back with sorted members.
fn strongly_connected<'a>(graph: &BTreeMap<&'a str, Vec<&'a str>>) -> Vec<Vec<&'a str>> {
    struct State<'a> {
        index: BTreeMap<&'a str, usize>,
        low: BTreeMap<&'a str, usize>,
        stack: Vec<&'a str>,
        on_stack: BTreeSet<&'a str>,
        next: usize,
        out: Vec<Vec<&'a str>>,
    }

    fn visit<'a>(v: &'a str, graph: &BTreeMap<&'a str, Vec<&'a str>>, s: &mut State<'a>) {
        s.index.insert(v, s.next);
        s.low.insert(v, s.next);
        s.next += 1;
        s.stack.push(v);
        s.on_stack.insert(v);
        for &w in graph.get(v).map(Vec::as_slice).unwrap_or_default() {
            if !s.index.contains_key(w) {
                visit(w, graph, s);
                let low = s.low[v].min(s.low[w]);
                s.low.insert(v, low);
            } else if s.on_stack.contains(w) {
                let low = s.low[v].min(s.index[w]);
                s.low.insert(v, low);
            }
        }
        if s.low[v] == s.index[v] {
            let mut component = Vec::new();
            while let Some(w) = s.stack.pop() {
                s.on_stack.remove(w);
                component.push(w);
                if w == v {
                    break;
                }
            }
            component.sort_unstable();
            s.out.push(component);
        }
    }

    let mut state = State {
        index: BTreeMap::new(),
        low: BTreeMap::new(),
        stack: Vec::new(),
        on_stack: BTreeSet::new(),
        next: 0,
        out: Vec::new(),
    };
    for &v in graph.keys() {
        if !state.index.contains_key(v) {
            visit(v, graph, &mut state);
        }
    }
    state.out
}
