//! Pass/fail records shared by the verification suites.

use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct PropertyResult {
    pub id: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub checked: usize,
    pub counterexamples: Vec<String>,
}

pub(crate) struct Check {
    id: &'static str,
    name: &'static str,
    checked: usize,
    failures: Vec<String>,
}

impl Check {
    pub(crate) fn new(id: &'static str, name: &'static str) -> Self {
        Self {
            id,
            name,
            checked: 0,
            failures: vec![],
        }
    }

    pub(crate) fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    pub(crate) fn finish(self) -> PropertyResult {
        PropertyResult {
            id: self.id,
            name: self.name,
            passed: self.failures.is_empty(),
            checked: self.checked,
            counterexamples: self.failures,
        }
    }
}
