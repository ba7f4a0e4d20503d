//! Instance documents (JSON), result documents (JSON or TSV) and DOT export.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::classes::ClassSet;
use crate::error::{FlgError, Result};
use crate::game::{HostGraph, Instance, Placement};
use crate::scalar::Scalar;

pub const FORMAT_VERSION: &str = "flg-instance/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AllKeyword {
    #[serde(rename = "all")]
    All,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AllowedEntry {
    All(AllKeyword),
    List(Vec<u64>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AllowedSpec {
    All(AllKeyword),
    PerFacility(Vec<AllowedEntry>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexEntry {
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub weight: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacilitySpec {
    pub k: usize,
    pub allowed: AllowedSpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub version: String,
    pub vertices: Vec<VertexEntry>,
    pub arcs: Vec<(u64, u64)>,
    pub facilities: FacilitySpec,
}

fn doc_err(line: usize, field: impl Into<String>, msg: impl Into<String>) -> FlgError {
    FlgError::Document { line, field: field.into(), msg: msg.into() }
}

/// 1-based line of the `nth` occurrence of `"key":`, or 1 if absent.
fn line_of_key(text: &str, key: &str, nth: usize) -> usize {
    let needle = format!("\"{key}\"");
    let mut seen = 0;
    for (pos, _) in text.match_indices(&needle) {
        let rest = text[pos + needle.len()..].trim_start();
        if rest.starts_with(':') {
            if seen == nth {
                return text[..pos].matches('\n').count() + 1;
            }
            seen += 1;
        }
    }
    1
}

/// Line of the `nth` element of the array under `key`.
fn line_of_element(text: &str, key: &str, nth: usize) -> usize {
    let needle = format!("\"{key}\"");
    let Some(start) = text.find(&needle) else { return 1 };
    let Some(open) = text[start..].find('[') else { return 1 };
    let body = start + open + 1;
    let mut depth = 0usize;
    let mut count = 0usize;
    for (i, c) in text[body..].char_indices() {
        match c {
            '[' => {
                if depth == 0 {
                    if count == nth {
                        return text[..body + i].matches('\n').count() + 1;
                    }
                    count += 1;
                }
                depth += 1;
            }
            ']' if depth == 0 => break,
            ']' => depth -= 1,
            _ => {}
        }
    }
    line_of_key(text, key, 0)
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: InstanceDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        doc_err(inner.line(), path, inner.to_string())
    })?;
    document_to_instance(&doc, text)
}

/// Validates a parsed document. `text` is used only to attach line numbers.
pub fn document_to_instance(doc: &InstanceDocument, text: &str) -> Result<Instance> {
    if doc.version != FORMAT_VERSION {
        return Err(doc_err(
            line_of_key(text, "version", 0),
            "version",
            format!("unsupported version '{}', expected '{FORMAT_VERSION}'", doc.version),
        ));
    }
    let mut index: HashMap<u64, usize> = HashMap::new();
    let mut weights = Vec::with_capacity(doc.vertices.len());
    let mut labels = Vec::with_capacity(doc.vertices.len());
    for (i, v) in doc.vertices.iter().enumerate() {
        let field = format!("vertices[{i}]");
        if index.insert(v.id, i).is_some() {
            return Err(doc_err(
                line_of_key(text, "id", i),
                format!("{field}.id"),
                format!("duplicate vertex id {}", v.id),
            ));
        }
        let w: Scalar = v.weight.parse().map_err(|e| match e {
            FlgError::ScalarSyntax { pos, msg } => doc_err(
                line_of_key(text, "weight", i),
                format!("{field}.weight"),
                format!("malformed weight '{}' at position {pos}: {msg}", v.weight),
            ),
            other => other,
        })?;
        if !w.is_positive() {
            return Err(doc_err(line_of_key(text, "weight", i), format!("{field}.weight"), "weight must be positive"));
        }
        weights.push(w);
        labels.push(v.label.clone().unwrap_or_else(|| format!("v{}", v.id)));
    }
    let mut g = HostGraph::new(weights, Some(labels))
        .map_err(|e| doc_err(line_of_key(text, "vertices", 0), "vertices", e.to_string()))?;
    for (j, &(a, b)) in doc.arcs.iter().enumerate() {
        let line = line_of_element(text, "arcs", j);
        let ia = *index.get(&a).ok_or_else(|| doc_err(line, format!("arcs[{j}]"), format!("unknown endpoint {a}")))?;
        let ib = *index.get(&b).ok_or_else(|| doc_err(line, format!("arcs[{j}]"), format!("unknown endpoint {b}")))?;
        g.add_arc(ia, ib)?;
    }
    let k = doc.facilities.k;
    let k_line = line_of_key(text, "k", 0);
    if k == 0 {
        return Err(doc_err(k_line, "facilities.k", "at least one facility required"));
    }
    let all: Vec<usize> = (0..g.len()).collect();
    let allowed: Vec<Vec<usize>> = match &doc.facilities.allowed {
        AllowedSpec::All(_) => vec![all.clone(); k],
        AllowedSpec::PerFacility(entries) => {
            if entries.len() != k {
                return Err(doc_err(
                    line_of_key(text, "allowed", 0),
                    "facilities.allowed",
                    format!("{} allowed sets for k = {k}", entries.len()),
                ));
            }
            let mut sets = Vec::with_capacity(k);
            for (f, e) in entries.iter().enumerate() {
                let line = line_of_element(text, "allowed", f);
                let field = format!("facilities.allowed[{f}]");
                match e {
                    AllowedEntry::All(_) => sets.push(all.clone()),
                    AllowedEntry::List(ids) => {
                        if ids.is_empty() {
                            return Err(doc_err(line, field, "empty allowed set"));
                        }
                        let set = ids
                            .iter()
                            .map(|id| {
                                index
                                    .get(id)
                                    .copied()
                                    .ok_or_else(|| doc_err(line, field.clone(), format!("unknown vertex {id}")))
                            })
                            .collect::<Result<Vec<_>>>()?;
                        sets.push(set);
                    }
                }
            }
            sets
        }
    };
    Instance::new(g, allowed)
}

pub fn instance_to_document(inst: &Instance) -> InstanceDocument {
    let g = &inst.graph;
    let vertices = (0..g.len())
        .map(|v| VertexEntry { id: v as u64, label: Some(g.label(v).to_string()), weight: g.weight(v).to_string() })
        .collect();
    let arcs = g.arcs().map(|(a, b)| (a as u64, b as u64)).collect();
    let n = g.len();
    let allowed = if inst.is_unrestricted() {
        AllowedSpec::All(AllKeyword::All)
    } else {
        AllowedSpec::PerFacility(
            inst.allowed_sets()
                .iter()
                .map(|set| {
                    if set.len() == n {
                        AllowedEntry::All(AllKeyword::All)
                    } else {
                        AllowedEntry::List(set.iter().map(|&v| v as u64).collect())
                    }
                })
                .collect(),
        )
    };
    InstanceDocument {
        version: FORMAT_VERSION.to_string(),
        vertices,
        arcs,
        facilities: FacilitySpec { k: inst.k(), allowed },
    }
}

pub fn serialize_instance(inst: &Instance) -> String {
    let mut s = serde_json::to_string_pretty(&instance_to_document(inst)).expect("document serializes");
    s.push('\n');
    s
}

/// A value in a result document. Exact scalars carry a 6-place decimal
/// approximation that is for display only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResultValue {
    Text(String),
    Int(i64),
    Bool(bool),
    Exact(Scalar),
    List(Vec<ResultValue>),
    Record(Vec<(String, ResultValue)>),
}

impl ResultValue {
    pub fn exacts(xs: &[Scalar]) -> Self {
        ResultValue::List(xs.iter().cloned().map(ResultValue::Exact).collect())
    }

    pub fn ids(xs: &[usize]) -> Self {
        ResultValue::List(xs.iter().map(|&x| ResultValue::Int(x as i64)).collect())
    }

    pub fn placement(s: &Placement) -> Self {
        Self::ids(&s.0)
    }

    pub fn record<K: Into<String>>(fields: Vec<(K, ResultValue)>) -> Self {
        ResultValue::Record(fields.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    fn to_json(&self) -> Value {
        match self {
            ResultValue::Text(s) => json!(s),
            ResultValue::Int(i) => json!(i),
            ResultValue::Bool(b) => json!(b),
            ResultValue::Exact(x) => json!({ "exact": x.to_string(), "approx_6dp": approx(x) }),
            ResultValue::List(xs) => Value::Array(xs.iter().map(|x| x.to_json()).collect()),
            ResultValue::Record(fs) => {
                let mut m = Map::new();
                for (k, v) in fs {
                    m.insert(k.clone(), v.to_json());
                }
                Value::Object(m)
            }
        }
    }

    fn to_tsv(&self, path: &str, out: &mut String) {
        match self {
            ResultValue::Text(s) => {
                let _ = writeln!(out, "{path}\t{}\t", s.replace(['\t', '\n'], " "));
            }
            ResultValue::Int(i) => {
                let _ = writeln!(out, "{path}\t{i}\t");
            }
            ResultValue::Bool(b) => {
                let _ = writeln!(out, "{path}\t{b}\t");
            }
            ResultValue::Exact(x) => {
                let _ = writeln!(out, "{path}\t{x}\t{}", approx(x));
            }
            ResultValue::List(xs) => {
                if xs.is_empty() {
                    let _ = writeln!(out, "{path}\t[]\t");
                }
                for (i, x) in xs.iter().enumerate() {
                    x.to_tsv(&format!("{path}[{i}]"), out);
                }
            }
            ResultValue::Record(fs) => {
                for (k, v) in fs {
                    v.to_tsv(&format!("{path}.{k}"), out);
                }
            }
        }
    }
}

fn approx(x: &Scalar) -> String {
    format!("{:.6}", x.to_f64())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResultDocument {
    pub command: String,
    pub fields: Vec<(String, ResultValue)>,
}

impl ResultDocument {
    pub fn new(command: impl Into<String>) -> Self {
        ResultDocument { command: command.into(), fields: Vec::new() }
    }

    pub fn push(&mut self, key: impl Into<String>, value: ResultValue) -> &mut Self {
        self.fields.push((key.into(), value));
        self
    }

    pub fn get(&self, key: &str) -> Option<&ResultValue> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn to_json(&self) -> String {
        let mut m = Map::new();
        m.insert("command".into(), json!(self.command));
        for (k, v) in &self.fields {
            m.insert(k.clone(), v.to_json());
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(m)).expect("json serializes");
        s.push('\n');
        s
    }

    /// Columns: key path, exact value, decimal approximation (scalars only).
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("key\texact\tapprox_6dp\n");
        let _ = writeln!(out, "command\t{}\t", self.command);
        for (k, v) in &self.fields {
            v.to_tsv(k, &mut out);
        }
        out
    }
}

pub fn class_set_value(cs: &ClassSet) -> ResultValue {
    ResultValue::List(
        cs.classes
            .iter()
            .map(|c| {
                ResultValue::record(vec![
                    ("facilities", ResultValue::ids(&c.facilities)),
                    ("clients", ResultValue::ids(&c.clients)),
                    ("load", ResultValue::Exact(c.load.clone())),
                ])
            })
            .collect(),
    )
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// DOT rendering. Facility locations and class indices appear in vertex labels.
pub fn to_dot(inst: &Instance, s: Option<&Placement>, classes: Option<&ClassSet>) -> String {
    let g = &inst.graph;
    let mut out = String::from("digraph flg {\n  node [shape=circle];\n");
    for v in 0..g.len() {
        let mut label = format!("{} ({})", g.label(v), g.weight(v));
        let mut extra = String::new();
        if let Some(s) = s {
            let here: Vec<String> = (0..inst.k()).filter(|&f| s.location(f) == v).map(|f| format!("f{f}")).collect();
            if !here.is_empty() {
                label.push_str(&format!("\\n[{}]", here.join(",")));
                extra.push_str(", shape=doublecircle");
            }
        }
        if let Some(cs) = classes {
            if let Some(c) = cs.class_of_client.get(v).copied().flatten() {
                label.push_str(&format!("\\nclass {c}"));
            }
        }
        let _ = writeln!(out, "  {v} [label=\"{}\"{extra}];", dot_escape(&label).replace("\\\\n", "\\n"));
    }
    for (a, b) in g.arcs() {
        let _ = writeln!(out, "  {a} -> {b};");
    }
    out.push_str("}\n");
    out
}
