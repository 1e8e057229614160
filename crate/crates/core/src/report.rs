//! Check reports: a flat list of named pass/fail items with optional
//! witnesses, shared by the model checks, the no-go suite, and the
//! protocol verifier. Renders as aligned text or JSON.

use serde_json::{json, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckItem {
    pub condition: String,
    pub passed: bool,
    /// Human-readable evidence: a counterexample on failure, occasionally a
    /// confirmation detail on success.
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub title: String,
    pub items: Vec<CheckItem>,
}

impl CheckReport {
    pub fn new(title: impl Into<String>) -> CheckReport {
        CheckReport { title: title.into(), items: Vec::new() }
    }

    pub fn push(&mut self, condition: impl Into<String>, passed: bool, witness: Option<String>) {
        self.items.push(CheckItem { condition: condition.into(), passed, witness });
    }

    pub fn pass(&mut self, condition: impl Into<String>) {
        self.push(condition, true, None);
    }

    pub fn fail(&mut self, condition: impl Into<String>, witness: impl Into<String>) {
        self.push(condition, false, Some(witness.into()));
    }

    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckItem> {
        self.items.iter().filter(|i| !i.passed)
    }

    /// Merge another report in, prefixing its item names with its title.
    pub fn absorb(&mut self, other: CheckReport) {
        for item in other.items {
            self.items.push(CheckItem {
                condition: format!("{}: {}", other.title, item.condition),
                passed: item.passed,
                witness: item.witness,
            });
        }
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("== {} ==\n", self.title));
        let width = self.items.iter().map(|i| i.condition.len()).max().unwrap_or(0);
        for item in &self.items {
            let mark = if item.passed { "pass" } else { "FAIL" };
            s.push_str(&format!("  {:w$}  {}\n", item.condition, mark, w = width));
            if let Some(wit) = &item.witness {
                for line in wit.lines() {
                    s.push_str(&format!("      | {}\n", line));
                }
            }
        }
        let verdict = if self.passed() { "all passed" } else { "FAILED" };
        s.push_str(&format!("  -- {} ({} checks)\n", verdict, self.items.len()));
        s
    }

    pub fn to_json(&self) -> Value {
        json!({
            "title": self.title,
            "passed": self.passed(),
            "checks": self.items.iter().map(|i| json!({
                "condition": i.condition,
                "passed": i.passed,
                "witness": i.witness,
            })).collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_and_render() {
        let mut r = CheckReport::new("demo");
        r.pass("first");
        assert!(r.passed());
        r.fail("second", "witness line");
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
        let text = r.render_text();
        assert!(text.contains("== demo =="));
        assert!(text.contains("FAIL"));
        assert!(text.contains("| witness line"));
        let j = r.to_json();
        assert_eq!(j["passed"], false);
        assert_eq!(j["checks"][0]["passed"], true);
    }

    #[test]
    fn absorb_prefixes_titles() {
        let mut inner = CheckReport::new("inner");
        inner.pass("x");
        let mut outer = CheckReport::new("outer");
        outer.absorb(inner);
        assert_eq!(outer.items[0].condition, "inner: x");
    }
}
