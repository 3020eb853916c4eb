use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub id: String,
    pub name: String,
    pub key_chunk: String,
    pub ssa_env_in: BTreeMap<String, u32>,
    pub target_constraints: String,
    pub ssa_env_out: BTreeMap<String, u32>,
    pub notes: String,
}

#[derive(Debug, Clone)]
pub struct TemplateStore {
    pub templates: Vec<Template>,
    pub vocabulary: BTreeSet<String>,
    vectors: Vec<BTreeMap<String, f64>>,
}

const SHIPPED: &str = include_str!("templates.json");

/// Lower-cased identifier pieces (split at `_`, digits and camelCase humps),
/// numbers and operator runs. A leading line number is skipped on each line.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = match line.split_once('\t') {
            Some((head, rest)) if head.chars().all(|c| c.is_ascii_digit()) => rest,
            _ => line,
        };
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
            } else if c.is_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                split_identifier(&word, &mut out);
            } else if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                out.push(chars[start..i].iter().collect());
            } else if "()[],:.".contains(c) {
                out.push(c.to_string());
                i += 1;
            } else {
                let start = i;
                while i < chars.len() && "=<>!+-*/%&|".contains(chars[i]) {
                    i += 1;
                }
                if i == start {
                    i += 1;
                }
                out.push(chars[start..i].iter().collect());
            }
        }
    }
    out
}

fn split_identifier(word: &str, out: &mut Vec<String>) {
    for part in word.split('_').filter(|p| !p.is_empty()) {
        let mut cur = String::new();
        let mut prev_lower = false;
        for ch in part.chars() {
            let boundary = (ch.is_uppercase() && prev_lower) || (ch.is_ascii_digit() != cur.chars().last().is_some_and(|l| l.is_ascii_digit()) && !cur.is_empty());
            if boundary {
                out.push(std::mem::take(&mut cur).to_lowercase());
            }
            prev_lower = ch.is_lowercase();
            cur.push(ch);
        }
        if !cur.is_empty() {
            out.push(cur.to_lowercase());
        }
    }
}

fn vectorize(text: &str) -> BTreeMap<String, f64> {
    let mut v: BTreeMap<String, f64> = BTreeMap::new();
    for t in tokenize(text) {
        *v.entry(t).or_default() += 1.0;
    }
    let norm = v.values().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.values_mut() {
            *x /= norm;
        }
    }
    v
}

fn dot(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    a.iter().filter_map(|(k, x)| b.get(k).map(|y| x * y)).sum()
}

impl TemplateStore {
    pub fn new(templates: Vec<Template>) -> Result<Self, String> {
        let mut ids = BTreeSet::new();
        for t in &templates {
            if !ids.insert(t.id.clone()) {
                return Err(format!("duplicate template id '{}'", t.id));
            }
            for (v, k) in &t.ssa_env_in {
                if t.ssa_env_out.get(v).is_some_and(|o| o < k) {
                    return Err(format!("template '{}' lowers the index of '{v}'", t.id));
                }
            }
        }
        let vectors: Vec<_> = templates.iter().map(|t| vectorize(&t.key_chunk)).collect();
        let vocabulary = vectors.iter().flat_map(|v| v.keys().cloned()).collect();
        Ok(Self {
            templates,
            vocabulary,
            vectors,
        })
    }

    /// The knowledge base shipped with the crate.
    pub fn shipped() -> Self {
        let templates: Vec<Template> = serde_json::from_str(SHIPPED).expect("shipped templates parse");
        Self::new(templates).expect("shipped templates are consistent")
    }

    /// Top `k` templates by cosine similarity to `query`, ties broken by id.
    pub fn retrieve(&self, query: &str, k: usize) -> Vec<(&Template, f64)> {
        let q = vectorize(query);
        let mut scored: Vec<(&Template, f64)> = self
            .templates
            .iter()
            .zip(&self.vectors)
            .map(|(t, v)| (t, dot(&q, v)))
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.id.cmp(&b.0.id)));
        scored.truncate(k);
        scored
    }

    pub fn get(&self, id: &str) -> Option<&Template> {
        self.templates.iter().find(|t| t.id == id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer_splits_identifiers_and_operators() {
        assert_eq!(
            tokenize("4\texpression\tmaxSum_2 = a[j] // 2"),
            vec!["expression", "max", "sum", "2", "=", "a", "[", "j", "]", "//", "2"]
        );
    }

    #[test]
    fn self_query_ranks_first() {
        let store = TemplateStore::shipped();
        assert_eq!(store.templates.len(), 14);
        for t in &store.templates {
            let top = store.retrieve(&t.key_chunk, 1);
            assert_eq!(top[0].0.id, t.id);
            assert!((top[0].1 - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn k_larger_than_store() {
        let store = TemplateStore::shipped();
        assert_eq!(store.retrieve("x = 1", 50).len(), 14);
    }
}
