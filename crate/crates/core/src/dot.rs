//! Graphviz export of the two standard views, plus a small reader for the
//! DOT subset we emit (used to check output structure without Graphviz).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::model::{ActorKind, ElementKind, Identifier, LinkKind, Model};
use crate::sim::LabelState;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DotView {
    /// Actors and the dependums between them.
    StrategicDependency,
    /// Actor boundaries opened up: elements, refinements and contributions.
    StrategicRationale,
}

impl std::str::FromStr for DotView {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sd" => Ok(DotView::StrategicDependency),
            "sr" => Ok(DotView::StrategicRationale),
            other => Err(format!("unknown view '{other}' (expected sd or sr)")),
        }
    }
}

/// Quotes a string as a DOT identifier.
pub fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn actor_shape(kind: ActorKind) -> &'static str {
    match kind {
        ActorKind::Actor => "circle",
        ActorKind::Agent => "doublecircle",
        ActorKind::Role => "circle",
    }
}

fn element_shape(kind: ElementKind) -> &'static str {
    match kind {
        ElementKind::Goal => "ellipse",
        ElementKind::Task => "hexagon",
        ElementKind::Resource => "box",
        ElementKind::Quality => "octagon",
    }
}

fn node(out: &mut String, indent: &str, id: &str, label: &str, shape: &str) {
    let _ = writeln!(out, "{indent}{} [label={}, shape={shape}];", quote(id), quote(label));
}

fn fill(label: LabelState) -> &'static str {
    match label {
        LabelState::Satisfied => "palegreen",
        LabelState::PartiallySatisfied => "darkseagreen1",
        LabelState::Unknown => "white",
        LabelState::PartiallyDenied => "mistyrose",
        LabelState::Denied => "lightcoral",
    }
}

fn dependencies(out: &mut String, model: &Model, rationale: bool) {
    for dep in &model.dependencies {
        node(
            out,
            "  ",
            dep.id.as_str(),
            &dep.dependum.name,
            element_shape(dep.dependum.kind),
        );
        let (depender, dependee) = if rationale {
            (
                dep.depender_element.as_ref().unwrap_or(&dep.depender),
                dep.dependee_element.as_ref().unwrap_or(&dep.dependee),
            )
        } else {
            (&dep.depender, &dep.dependee)
        };
        let _ = writeln!(out, "  {} -> {};", quote(depender.as_str()), quote(dep.id.as_str()));
        let _ = writeln!(out, "  {} -> {};", quote(dep.id.as_str()), quote(dependee.as_str()));
    }
}

/// Renders one view. Node ids are model identifiers; labels are names.
/// Dependency edges run depender -> dependum -> dependee.
pub fn export_dot(model: &Model, view: DotView) -> String {
    match view {
        DotView::StrategicDependency => strategic_dependency(model),
        DotView::StrategicRationale => strategic_rationale(model, None),
    }
}

/// The rationale view with every element filled by its label, e.g. the
/// final labels of a simulation run. Elements missing from `labels` are
/// drawn as Unknown.
pub fn export_labelled(model: &Model, labels: &BTreeMap<Identifier, LabelState>) -> String {
    strategic_rationale(model, Some(labels))
}

fn strategic_dependency(model: &Model) -> String {
    let mut out = String::from("digraph SD {\n  rankdir=LR;\n");
    for actor in &model.actors {
        node(&mut out, "  ", actor.id.as_str(), &actor.name, actor_shape(actor.kind));
    }
    dependencies(&mut out, model, false);
    out.push_str("}\n");
    out
}

fn strategic_rationale(model: &Model, labels: Option<&BTreeMap<Identifier, LabelState>>) -> String {
    let mut out = String::from("digraph SR {\n  compound=true;\n");
    for (i, actor) in model.actors.iter().enumerate() {
        let _ = writeln!(out, "  subgraph {} {{", quote(&format!("cluster_{i}")));
        let _ = writeln!(out, "    label={};", quote(&actor.name));
        node(
            &mut out,
            "    ",
            actor.id.as_str(),
            &actor.name,
            actor_shape(actor.kind),
        );
        for element in &actor.elements {
            let shape = element_shape(element.kind);
            match labels {
                None => node(&mut out, "    ", element.id.as_str(), &element.name, shape),
                Some(labels) => {
                    let label = labels.get(&element.id).copied().unwrap_or_default();
                    let _ = writeln!(
                        out,
                        "    {} [label={}, shape={shape}, style=filled, fillcolor={}, tooltip={}];",
                        quote(element.id.as_str()),
                        quote(&element.name),
                        fill(label),
                        quote(label.as_str()),
                    );
                }
            }
        }
        out.push_str("  }\n");
    }
    for link in model.internal_links() {
        let style = match link.kind {
            LinkKind::AndRefinement => "arrowhead=normal, label=\"and\"".to_owned(),
            LinkKind::OrRefinement => "arrowhead=empty, label=\"or\"".to_owned(),
            LinkKind::Contribution(p) => format!("style=dashed, label={}", quote(p.as_str())),
            LinkKind::Qualification => "style=dotted, arrowhead=none, label=\"qualifies\"".to_owned(),
            LinkKind::NeededBy => "arrowhead=dot, label=\"neededBy\"".to_owned(),
        };
        let _ = writeln!(
            out,
            "  {} -> {} [{style}];",
            quote(link.source.as_str()),
            quote(link.target.as_str())
        );
    }
    dependencies(&mut out, model, true);
    out.push_str("}\n");
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Token {
    Id(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Equals,
    Arrow,
}

#[derive(Debug, PartialEq, Eq)]
pub struct DotError(pub String);

/// Splits DOT text into tokens. Accepts bare ids, numerals and quoted strings.
pub fn tokenize(text: &str) -> Result<Vec<Token>, DotError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            c if c.is_whitespace() => {}
            '{' => tokens.push(Token::LBrace),
            '}' => tokens.push(Token::RBrace),
            '[' => tokens.push(Token::LBracket),
            ']' => tokens.push(Token::RBracket),
            ';' => tokens.push(Token::Semi),
            ',' => tokens.push(Token::Comma),
            '=' => tokens.push(Token::Equals),
            '-' if chars.peek() == Some(&'>') => {
                chars.next();
                tokens.push(Token::Arrow);
            }
            '"' => {
                let mut s = String::new();
                loop {
                    match chars.next() {
                        None => return Err(DotError("unterminated string".into())),
                        Some('"') => break,
                        Some('\\') => match chars.next() {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            Some('n') => s.push('\n'),
                            Some(other) => {
                                s.push('\\');
                                s.push(other);
                            }
                            None => return Err(DotError("unterminated string".into())),
                        },
                        Some(c) => s.push(c),
                    }
                }
                tokens.push(Token::Id(s));
            }
            c if c.is_alphanumeric() || c == '_' || c == '.' || c == '-' => {
                let mut s = String::from(c);
                while let Some(&n) = chars.peek() {
                    if n.is_alphanumeric() || n == '_' || n == '.' {
                        s.push(n);
                        chars.next();
                    } else {
                        break;
                    }
                }
                tokens.push(Token::Id(s));
            }
            other => return Err(DotError(format!("unexpected character {other:?}"))),
        }
    }
    Ok(tokens)
}

pub type Attributes = BTreeMap<String, String>;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Subgraph {
    pub id: String,
    pub attributes: Attributes,
    pub nodes: Vec<String>,
}

/// The parts of a parsed digraph the tests care about.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DotGraph {
    pub name: Option<String>,
    pub attributes: Attributes,
    pub nodes: BTreeMap<String, Attributes>,
    pub edges: Vec<(String, String, Attributes)>,
    pub subgraphs: Vec<Subgraph>,
}

impl DotGraph {
    /// First node whose `label` attribute equals `label`.
    pub fn node_labelled(&self, label: &str) -> Option<&str> {
        self.nodes
            .iter()
            .find(|(_, attrs)| attrs.get("label").map(String::as_str) == Some(label))
            .map(|(id, _)| id.as_str())
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        self.edges.iter().any(|(f, t, _)| f == from && t == to)
    }
}

struct Reader {
    tokens: Vec<Token>,
    pos: usize,
}

impl Reader {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Token) -> Result<(), DotError> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            other => Err(DotError(format!("expected {want:?}, found {other:?}"))),
        }
    }

    fn id(&mut self) -> Result<String, DotError> {
        match self.next() {
            Some(Token::Id(s)) => Ok(s),
            other => Err(DotError(format!("expected identifier, found {other:?}"))),
        }
    }

    fn attr_list(&mut self) -> Result<Attributes, DotError> {
        let mut attrs = Attributes::new();
        while self.peek() == Some(&Token::LBracket) {
            self.next();
            while self.peek() != Some(&Token::RBracket) {
                let key = self.id()?;
                self.expect(Token::Equals)?;
                attrs.insert(key, self.id()?);
                if matches!(self.peek(), Some(Token::Comma | Token::Semi)) {
                    self.next();
                }
            }
            self.expect(Token::RBracket)?;
        }
        Ok(attrs)
    }

    fn statements(&mut self, graph: &mut DotGraph, scope: Option<usize>) -> Result<(), DotError> {
        self.expect(Token::LBrace)?;
        loop {
            match self.peek() {
                Some(Token::RBrace) => {
                    self.next();
                    return Ok(());
                }
                Some(Token::Semi) => {
                    self.next();
                }
                None => return Err(DotError("unexpected end of input".into())),
                Some(Token::Id(word)) if word == "subgraph" => {
                    self.next();
                    let id = match self.peek() {
                        Some(Token::Id(_)) => self.id()?,
                        _ => String::new(),
                    };
                    graph.subgraphs.push(Subgraph {
                        id,
                        ..Subgraph::default()
                    });
                    let index = graph.subgraphs.len() - 1;
                    self.statements(graph, Some(index))?;
                }
                Some(Token::Id(word)) if matches!(word.as_str(), "graph" | "node" | "edge") => {
                    self.next();
                    self.attr_list()?;
                }
                Some(Token::Id(_)) => {
                    let first = self.id()?;
                    if self.peek() == Some(&Token::Equals) {
                        self.next();
                        let value = self.id()?;
                        match scope {
                            Some(i) => graph.subgraphs[i].attributes.insert(first, value),
                            None => graph.attributes.insert(first, value),
                        };
                        continue;
                    }
                    let mut chain = vec![first];
                    while self.peek() == Some(&Token::Arrow) {
                        self.next();
                        chain.push(self.id()?);
                    }
                    let attrs = self.attr_list()?;
                    for id in &chain {
                        let entry = graph.nodes.entry(id.clone()).or_default();
                        if chain.len() == 1 {
                            entry.extend(attrs.clone());
                        }
                        if let Some(i) = scope {
                            if !graph.subgraphs[i].nodes.contains(id) {
                                graph.subgraphs[i].nodes.push(id.clone());
                            }
                        }
                    }
                    for pair in chain.windows(2) {
                        graph.edges.push((pair[0].clone(), pair[1].clone(), attrs.clone()));
                    }
                }
                Some(other) => return Err(DotError(format!("unexpected token {other:?}"))),
            }
        }
    }
}

/// Parses a `digraph` in the subset [`export_dot`] produces.
pub fn parse_dot(text: &str) -> Result<DotGraph, DotError> {
    let mut reader = Reader {
        tokens: tokenize(text)?,
        pos: 0,
    };
    match reader.next() {
        Some(Token::Id(word)) if word == "digraph" => {}
        other => return Err(DotError(format!("expected digraph, found {other:?}"))),
    }
    let mut graph = DotGraph::default();
    if let Some(Token::Id(_)) = reader.peek() {
        graph.name = Some(reader.id()?);
    }
    reader.statements(&mut graph, None)?;
    if reader.pos != reader.tokens.len() {
        return Err(DotError("trailing tokens after graph".into()));
    }
    Ok(graph)
}
