use std::io::IsTerminal;

use ssiforge_core::LabelState;

/// ANSI styling for text output: on for a terminal unless `SSIFORGE_NO_COLOR`
/// is set (to anything).
#[derive(Clone, Copy)]
pub struct Style {
    enabled: bool,
}

impl Style {
    pub fn detect() -> Self {
        Style {
            enabled: std::env::var_os("SSIFORGE_NO_COLOR").is_none() && std::io::stdout().is_terminal(),
        }
    }

    fn paint(self, code: &str, text: &str) -> String {
        if self.enabled {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_owned()
        }
    }

    pub fn bold(self, text: &str) -> String {
        self.paint("1", text)
    }

    pub fn red(self, text: &str) -> String {
        self.paint("31", text)
    }

    pub fn yellow(self, text: &str) -> String {
        self.paint("33", text)
    }

    pub fn label(self, label: LabelState) -> String {
        let code = match label {
            LabelState::Satisfied | LabelState::PartiallySatisfied => "32",
            LabelState::Denied | LabelState::PartiallyDenied => "31",
            LabelState::Unknown => "33",
        };
        self.paint(code, label.as_str())
    }
}
