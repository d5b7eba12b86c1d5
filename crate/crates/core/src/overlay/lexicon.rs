use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::OverlayError;

/// Lowercase, drop punctuation, collapse whitespace.
pub fn normalize(text: &str) -> String {
    let cleaned: String = text
        .chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .flat_map(char::to_lowercase)
        .collect();
    cleaned.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verb {
    Issue,
    Provide,
    Check,
}

/// Name prefixes that mark a task as issuing, providing or checking a
/// credential.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", try_from = "RawLexicon")]
pub struct VerbLexicon {
    issue_verbs: BTreeSet<String>,
    provide_verbs: BTreeSet<String>,
    check_verbs: BTreeSet<String>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawLexicon {
    issue_verbs: Vec<String>,
    provide_verbs: Vec<String>,
    check_verbs: Vec<String>,
}

impl TryFrom<RawLexicon> for VerbLexicon {
    type Error = OverlayError;

    fn try_from(raw: RawLexicon) -> Result<Self, Self::Error> {
        VerbLexicon::new(raw.issue_verbs, raw.provide_verbs, raw.check_verbs)
    }
}

impl Default for VerbLexicon {
    fn default() -> Self {
        VerbLexicon::new(["issue"], ["provide", "present"], ["check", "verify"]).expect("default lexicon is valid")
    }
}

impl VerbLexicon {
    pub fn new<I, P, C>(issue: I, provide: P, check: C) -> Result<Self, OverlayError>
    where
        I: IntoIterator,
        I::Item: AsRef<str>,
        P: IntoIterator,
        P::Item: AsRef<str>,
        C: IntoIterator,
        C::Item: AsRef<str>,
    {
        fn set<T: AsRef<str>>(items: impl IntoIterator<Item = T>) -> BTreeSet<String> {
            items
                .into_iter()
                .map(|s| normalize(s.as_ref()))
                .filter(|s| !s.is_empty())
                .collect()
        }
        let lexicon = VerbLexicon {
            issue_verbs: set(issue),
            provide_verbs: set(provide),
            check_verbs: set(check),
        };
        for (name, verbs) in [
            ("issueVerbs", &lexicon.issue_verbs),
            ("provideVerbs", &lexicon.provide_verbs),
            ("checkVerbs", &lexicon.check_verbs),
        ] {
            if verbs.is_empty() {
                return Err(OverlayError::Lexicon(format!("{name} is empty")));
            }
        }
        let overlap = lexicon
            .issue_verbs
            .intersection(&lexicon.provide_verbs)
            .chain(lexicon.issue_verbs.intersection(&lexicon.check_verbs))
            .chain(lexicon.provide_verbs.intersection(&lexicon.check_verbs))
            .next();
        if let Some(verb) = overlap {
            return Err(OverlayError::Lexicon(format!(
                "'{verb}' appears in more than one verb set"
            )));
        }
        Ok(lexicon)
    }

    pub fn issue_verbs(&self) -> &BTreeSet<String> {
        &self.issue_verbs
    }

    pub fn provide_verbs(&self) -> &BTreeSet<String> {
        &self.provide_verbs
    }

    pub fn check_verbs(&self) -> &BTreeSet<String> {
        &self.check_verbs
    }

    /// The verb class of a task name; the longest matching prefix wins.
    pub fn classify(&self, name: &str) -> Option<Verb> {
        let name = normalize(name);
        [
            (Verb::Issue, &self.issue_verbs),
            (Verb::Provide, &self.provide_verbs),
            (Verb::Check, &self.check_verbs),
        ]
        .into_iter()
        .flat_map(|(verb, set)| set.iter().map(move |prefix| (verb, prefix)))
        .filter(|(_, prefix)| name.starts_with(prefix.as_str()))
        .max_by_key(|(_, prefix)| prefix.len())
        .map(|(verb, _)| verb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization() {
        assert_eq!(normalize("  Check   Mother's ID "), "check mothers id");
        assert_eq!(normalize("Issue Valid BNDs!"), "issue valid bnds");
    }

    #[test]
    fn default_classification() {
        let lex = VerbLexicon::default();
        assert_eq!(lex.classify("Issue BND"), Some(Verb::Issue));
        assert_eq!(lex.classify("Present proof"), Some(Verb::Provide));
        assert_eq!(lex.classify("Verify ID"), Some(Verb::Check));
        assert_eq!(lex.classify("Make BND"), None);
    }

    #[test]
    fn longest_prefix_wins() {
        let lex = VerbLexicon::new(["pre"], ["present"], ["check"]).unwrap();
        assert_eq!(lex.classify("present it"), Some(Verb::Provide));
        assert_eq!(lex.classify("prepare it"), Some(Verb::Issue));
    }

    #[test]
    fn rejects_overlap_and_empty_sets() {
        assert!(VerbLexicon::new(["issue"], ["issue"], ["check"]).is_err());
        assert!(VerbLexicon::new(Vec::<String>::new(), ["provide"], ["check"]).is_err());
        let json = r#"{"issueVerbs":["grant"],"provideVerbs":["show"],"checkVerbs":["grant"]}"#;
        assert!(serde_json::from_str::<VerbLexicon>(json).is_err());
    }
}
