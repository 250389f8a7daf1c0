//! Run reports. One `key value` pair per line, keys nested by dots,
//! written in a fixed order so that two identical runs produce
//! identical bytes. Counters are exact integers; wall times only
//! appear when explicitly requested, keeping the default document
//! reproducible.

use std::fmt::Display;
use std::fmt::Write as _;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsDoc {
    rows: Vec<(String, String)>,
}

impl MetricsDoc {
    pub fn new() -> MetricsDoc {
        MetricsDoc::default()
    }

    pub fn put(&mut self, key: &str, value: impl Display) {
        debug_assert!(
            !key.contains(char::is_whitespace),
            "metric keys must be single tokens"
        );
        self.rows.push((key.to_string(), value.to_string()));
    }

    /// Lookup by exact key, for tests and for the bench summary.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.rows
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.rows {
            writeln!(out, "{k} {v}").unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_render_in_insertion_order() {
        let mut d = MetricsDoc::new();
        d.put("structure.name", "exact");
        d.put("counters.queue_ops", 42u64);
        d.put("verify.max_stretch", 1.25f64);
        assert_eq!(
            d.render(),
            "structure.name exact\ncounters.queue_ops 42\nverify.max_stretch 1.25\n"
        );
        assert_eq!(d.get("counters.queue_ops"), Some("42"));
        assert_eq!(d.get("missing"), None);
    }
}
