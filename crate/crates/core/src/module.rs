//! Learning module files: decoding with diagnostics, validation, canonical
//! serialization and blank templates.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use serde_json::{Map, Value};

use crate::diagnostic::{Code, Diagnostic};
use crate::matrix::{AxisLabels, ColorMatrix, Palette, TrafficMatrix};
use crate::nodes::default_labels;

/// Cells above this many packets do not display well.
pub const PACKET_DISPLAY_LIMIT: u64 = 15;

/// Multiple-choice question. `correct_answer_element` is a 0-based index into
/// `answers` in authored (unshuffled) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Question {
    pub prompt: String,
    pub answers: Vec<String>,
    pub correct_answer_element: usize,
}

impl Question {
    pub fn correct_answer(&self) -> Option<&str> {
        self.answers
            .get(self.correct_answer_element)
            .map(String::as_str)
    }
}

/// One lesson: a labeled traffic matrix, its color overlay and an optional question.
#[derive(Debug, Clone, PartialEq)]
pub struct LearningModule {
    pub name: String,
    pub size: usize,
    pub author: String,
    pub axis_labels: AxisLabels,
    pub traffic_matrix: TrafficMatrix,
    pub traffic_matrix_colors: ColorMatrix,
    /// Present iff the file says `"has_question": true`.
    pub question: Option<Question>,
    pub hint: Option<String>,
    /// Fields this format does not know about, kept for round-tripping.
    pub extra: BTreeMap<String, Value>,
}

impl LearningModule {
    pub fn has_question(&self) -> bool {
        self.question.is_some()
    }
}

const KNOWN_FIELDS: [&str; 11] = [
    "name",
    "size",
    "author",
    "axis_labels",
    "traffic_matrix",
    "traffic_matrix_colors",
    "has_question",
    "question",
    "answers",
    "correct_answer_element",
    "hint",
];

const QUESTION_FIELDS: [&str; 3] = ["question", "answers", "correct_answer_element"];

/// Parses a `"NxN"` size string (an upper-case `X` is also accepted).
pub fn parse_size(text: &str) -> Option<usize> {
    let (a, b) = text.split_once(['x', 'X'])?;
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|c| c.is_ascii_digit());
    if !digits(a) || !digits(b) {
        return None;
    }
    let (a, b): (usize, usize) = (a.parse().ok()?, b.parse().ok()?);
    (a == b && a >= 2).then_some(a)
}

pub fn size_text(n: usize) -> String {
    format!("{n}x{n}")
}

/// Decodes and checks a module file. Returns the module only when there are
/// no error-severity diagnostics; otherwise every diagnostic found.
pub fn parse_module(input: &[u8]) -> Result<LearningModule, Vec<Diagnostic>> {
    let value: Value = match serde_json::from_slice(input) {
        Ok(v) => v,
        Err(e) => return Err(alloc::vec![syntax_diagnostic(input, &e)]),
    };
    let Value::Object(obj) = value else {
        return Err(alloc::vec![Diagnostic::new(
            Code::TypeMismatch,
            "$",
            format!("expected object, found {}", type_name(&value)),
        )]);
    };
    let mut d = Decoder::default();
    let module = d.module(obj);
    let mut diags = d.diags;
    match module {
        Some(m) if diags.is_empty() => {
            let v = validate_module(&m);
            if v.iter().any(Diagnostic::is_error) {
                Err(v)
            } else {
                Ok(m)
            }
        }
        Some(m) => {
            diags.extend(validate_module(&m));
            Err(diags)
        }
        None => Err(diags),
    }
}

fn syntax_diagnostic(input: &[u8], e: &serde_json::Error) -> Diagnostic {
    let offset = byte_offset(input, e.line(), e.column());
    let mut d = Diagnostic::new(
        Code::JsonSyntax,
        "$",
        format!("malformed JSON at byte {offset}: {e}"),
    );
    d.offset = Some(offset);
    d
}

/// Converts serde_json's 1-based line / column into a byte offset.
fn byte_offset(input: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let mut start = 0;
    for _ in 1..line {
        match input[start..].iter().position(|&b| b == b'\n') {
            Some(p) => start += p + 1,
            None => break,
        }
    }
    (start + column.saturating_sub(1)).min(input.len())
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(n) if n.is_f64() => "number",
        Value::Number(_) => "integer",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

#[derive(Default)]
struct Decoder {
    diags: Vec<Diagnostic>,
}

impl Decoder {
    fn push(&mut self, code: Code, path: impl Into<String>, msg: impl Into<String>) {
        self.diags.push(Diagnostic::new(code, path, msg));
    }

    fn mismatch(&mut self, path: &str, expected: &str, v: &Value) {
        self.push(
            Code::TypeMismatch,
            path,
            format!("expected {expected}, found {}", type_name(v)),
        );
    }

    fn take<'a>(&mut self, obj: &'a Map<String, Value>, key: &str) -> Option<&'a Value> {
        let v = obj.get(key);
        if v.is_none() {
            self.push(Code::MissingField, key, format!("missing required field {key:?}"));
        }
        v
    }

    fn string(&mut self, obj: &Map<String, Value>, key: &str) -> Option<String> {
        match self.take(obj, key)? {
            Value::String(s) => Some(s.clone()),
            other => {
                self.mismatch(key, "string", other);
                None
            }
        }
    }

    fn module(&mut self, obj: Map<String, Value>) -> Option<LearningModule> {
        let name = self.string(&obj, "name");
        let author = self.string(&obj, "author");
        let size = self.string(&obj, "size").and_then(|s| {
            let n = parse_size(&s);
            if n.is_none() {
                self.push(
                    Code::BadSize,
                    "size",
                    format!("size {s:?} is not of the form \"NxN\" with N >= 2"),
                );
            }
            n
        });
        let labels = self.labels(&obj);
        let traffic = self.traffic(&obj, size);
        let colors = self.colors(&obj, size);
        let has_question = match self.take(&obj, "has_question") {
            Some(Value::Bool(b)) => Some(*b),
            Some(other) => {
                self.mismatch("has_question", "boolean", other);
                None
            }
            None => None,
        };
        let question = match has_question {
            Some(true) => self.question(&obj).map(Some),
            Some(false) => Some(None),
            None => None,
        };
        let hint = match obj.get("hint") {
            None | Some(Value::Null) => Some(None),
            Some(Value::String(s)) => Some(Some(s.clone())),
            Some(other) => {
                self.mismatch("hint", "string", other);
                None
            }
        };

        if let (Some(n), Some(l)) = (size, labels.as_ref()) {
            if l.len() != n {
                self.push(
                    Code::LabelCount,
                    "axis_labels",
                    format!("label count {} \u{2260} size {n}", l.len()),
                );
            }
        }

        let mut extra = BTreeMap::new();
        for (k, v) in obj {
            let ignored_question = has_question == Some(false) && QUESTION_FIELDS.contains(&k.as_str());
            if ignored_question || !KNOWN_FIELDS.contains(&k.as_str()) {
                extra.insert(k, v);
            }
        }

        if !self.diags.is_empty() {
            return None;
        }
        Some(LearningModule {
            name: name?,
            size: size?,
            author: author?,
            axis_labels: labels?,
            traffic_matrix: traffic?,
            traffic_matrix_colors: colors?,
            question: question?,
            hint: hint?,
            extra,
        })
    }

    fn labels(&mut self, obj: &Map<String, Value>) -> Option<AxisLabels> {
        let arr = match self.take(obj, "axis_labels")? {
            Value::Array(a) => a,
            other => {
                self.mismatch("axis_labels", "array of strings", other);
                return None;
            }
        };
        let mut out = Vec::with_capacity(arr.len());
        let mut ok = true;
        for (i, v) in arr.iter().enumerate() {
            match v {
                Value::String(s) => out.push(s.clone()),
                other => {
                    self.mismatch(&format!("axis_labels[{i}]"), "string", other);
                    ok = false;
                }
            }
        }
        ok.then_some(AxisLabels(out))
    }

    /// Decodes a list of lists, checking it is `n`×`n` (or square when `n` is unknown).
    fn grid<T>(
        &mut self,
        obj: &Map<String, Value>,
        key: &str,
        n: Option<usize>,
        shape_code: Code,
        mut cell: impl FnMut(&mut Self, &str, &Value) -> Option<T>,
    ) -> Option<Vec<Vec<T>>> {
        let rows = match self.take(obj, key)? {
            Value::Array(a) => a,
            other => {
                self.mismatch(key, "array of arrays", other);
                return None;
            }
        };
        let n = n.unwrap_or(rows.len());
        let mut ok = true;
        if rows.len() != n {
            self.push(
                shape_code,
                key,
                format!("{} rows \u{2260} size {n}", rows.len()),
            );
            ok = false;
        }
        let mut out = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let path = format!("{key}[{i}]");
            let Value::Array(row) = row else {
                self.mismatch(&path, "array", row);
                ok = false;
                continue;
            };
            if row.len() != n {
                self.push(
                    shape_code,
                    path.as_str(),
                    format!("row has {} entries \u{2260} size {n}", row.len()),
                );
                ok = false;
            }
            let mut r = Vec::with_capacity(row.len());
            for (j, v) in row.iter().enumerate() {
                match cell(self, &format!("{path}[{j}]"), v) {
                    Some(x) => r.push(x),
                    None => ok = false,
                }
            }
            out.push(r);
        }
        ok.then_some(out)
    }

    fn traffic(&mut self, obj: &Map<String, Value>, n: Option<usize>) -> Option<TrafficMatrix> {
        let rows = self.grid(obj, "traffic_matrix", n, Code::MatrixShape, |d, path, v| {
            let Value::Number(num) = v else {
                d.mismatch(path, "non-negative integer", v);
                return None;
            };
            if let Some(u) = num.as_u64() {
                return Some(u);
            }
            if num.is_i64() {
                d.push(Code::NegativePackets, path, format!("packet count {num} is negative"));
                return None;
            }
            let f = num.as_f64().unwrap_or(f64::NAN);
            if f < 0.0 {
                d.push(Code::NegativePackets, path, format!("packet count {num} is negative"));
            } else if f >= 18_446_744_073_709_551_616.0 {
                d.push(Code::PacketOverflow, path, format!("packet count {num} exceeds 2^64-1"));
            } else {
                d.push(Code::NonIntegerPackets, path, format!("packet count {num} is not an integer"));
            }
            None
        })?;
        TrafficMatrix::from_rows(rows).ok()
    }

    fn colors(&mut self, obj: &Map<String, Value>, n: Option<usize>) -> Option<ColorMatrix> {
        let rows = self.grid(
            obj,
            "traffic_matrix_colors",
            n,
            Code::ColorShape,
            |d, path, v| match v.as_i64() {
                Some(c) => Some(c),
                None => {
                    d.mismatch(path, "integer color code", v);
                    None
                }
            },
        )?;
        ColorMatrix::from_rows(rows).ok()
    }

    fn question(&mut self, obj: &Map<String, Value>) -> Option<Question> {
        let prompt = self.string(obj, "question");
        let answers = match self.take(obj, "answers") {
            Some(Value::Array(a)) => {
                let mut out = Vec::with_capacity(a.len());
                let mut ok = true;
                for (i, v) in a.iter().enumerate() {
                    match v {
                        Value::String(s) => out.push(s.clone()),
                        other => {
                            self.mismatch(&format!("answers[{i}]"), "string", other);
                            ok = false;
                        }
                    }
                }
                ok.then_some(out)
            }
            Some(other) => {
                self.mismatch("answers", "array of strings", other);
                None
            }
            None => None,
        };
        let index = match self.take(obj, "correct_answer_element") {
            Some(Value::Number(num)) if num.as_u64().is_some() => {
                Some(num.as_u64().unwrap_or_default() as usize)
            }
            Some(Value::Number(num)) if num.is_i64() => {
                self.push(
                    Code::AnswerIndexRange,
                    "correct_answer_element",
                    format!("correct_answer_element {num} is negative"),
                );
                None
            }
            Some(other) => {
                self.mismatch("correct_answer_element", "non-negative integer", other);
                None
            }
            None => None,
        };
        Some(Question {
            prompt: prompt?,
            answers: answers?,
            correct_answer_element: index?,
        })
    }
}

/// Checks every rule and reports all findings; an empty list means publishable.
pub fn validate_module(m: &LearningModule) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let n = m.size;
    if n < 2 {
        out.push(Diagnostic::new(
            Code::BadSize,
            "size",
            format!("size {n} is below the 2x2 minimum"),
        ));
    }
    if m.axis_labels.len() != n {
        out.push(Diagnostic::new(
            Code::LabelCount,
            "axis_labels",
            format!("label count {} \u{2260} size {n}", m.axis_labels.len()),
        ));
    }
    if m.traffic_matrix.n() != n {
        out.push(Diagnostic::new(
            Code::MatrixShape,
            "traffic_matrix",
            format!("matrix is {0}x{0} \u{2260} size {n}", m.traffic_matrix.n()),
        ));
    }
    if m.traffic_matrix_colors.n() != n {
        out.push(Diagnostic::new(
            Code::ColorShape,
            "traffic_matrix_colors",
            format!("color matrix is {0}x{0} \u{2260} size {n}", m.traffic_matrix_colors.n()),
        ));
    }
    for (i, l) in m.axis_labels.iter().enumerate() {
        if l.trim().is_empty() {
            out.push(Diagnostic::new(
                Code::EmptyLabel,
                format!("axis_labels[{i}]"),
                "label is empty",
            ));
        }
    }
    for dup in m.axis_labels.duplicates() {
        if dup.trim().is_empty() {
            continue;
        }
        out.push(Diagnostic::new(
            Code::DuplicateLabel,
            "axis_labels",
            format!("label {dup:?} appears more than once; lookups by this label are ambiguous"),
        ));
    }
    for (i, j, v) in m.traffic_matrix.nonzero() {
        if v > PACKET_DISPLAY_LIMIT {
            out.push(Diagnostic::new(
                Code::PacketsGt15,
                format!("traffic_matrix[{i}][{j}]"),
                format!("{v} packets; more than {PACKET_DISPLAY_LIMIT} per cell may not display well"),
            ));
        }
    }
    for (i, row) in m.traffic_matrix_colors.rows().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if Palette::from_code(c) == Palette::Black {
                out.push(Diagnostic::new(
                    Code::ColorCodeUnknown,
                    format!("traffic_matrix_colors[{i}][{j}]"),
                    format!("color code {c} is not 0 (grey), 1 (blue) or 2 (red); renders black"),
                ));
            }
        }
    }
    if let Some(q) = &m.question {
        validate_question(q, &mut out);
    } else if QUESTION_FIELDS.iter().any(|k| m.extra.contains_key(*k)) {
        out.push(Diagnostic::new(
            Code::QuestionIgnored,
            "has_question",
            "has_question is false; question fields are kept but not shown",
        ));
    }
    out
}

fn validate_question(q: &Question, out: &mut Vec<Diagnostic>) {
    if q.prompt.trim().is_empty() {
        out.push(Diagnostic::new(Code::EmptyQuestion, "question", "question text is empty"));
    }
    let k = q.answers.len();
    if k < 2 {
        out.push(Diagnostic::new(
            Code::TooFewAnswers,
            "answers",
            format!("{k} answer(s); at least 2 are required"),
        ));
    } else if k != 3 {
        out.push(Diagnostic::new(
            Code::AnswerCountNot3,
            "answers",
            format!("{k} answers; three choices are recommended"),
        ));
    }
    for (i, a) in q.answers.iter().enumerate() {
        if q.answers[..i].contains(a) {
            out.push(Diagnostic::new(
                Code::DuplicateAnswer,
                format!("answers[{i}]"),
                format!("answer {a:?} is repeated"),
            ));
        }
    }
    if q.correct_answer_element >= k {
        out.push(Diagnostic::new(
            Code::AnswerIndexRange,
            "correct_answer_element",
            format!(
                "correct_answer_element {} is out of range for {k} answers (0-based)",
                q.correct_answer_element
            ),
        ));
    }
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).unwrap_or_default()
}

fn json_list<T: core::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    let mut s = String::from("[");
    for (i, it) in items.into_iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        let _ = write!(s, "{it}");
    }
    s.push(']');
    s
}

fn json_grid<'a, T: core::fmt::Display + 'a>(rows: impl Iterator<Item = &'a [T]>) -> String {
    let rows: Vec<String> = rows.map(|r| json_list(r.iter())).collect();
    if rows.is_empty() {
        return String::from("[]");
    }
    let mut s = String::from("[\n");
    for (i, r) in rows.iter().enumerate() {
        s.push_str("    ");
        s.push_str(r);
        if i + 1 < rows.len() {
            s.push(',');
        }
        s.push('\n');
    }
    s.push_str("  ]");
    s
}

/// Canonical JSON: 2-space indentation, fields in the authoring order
/// (name, size, author, axis_labels, traffic_matrix, traffic_matrix_colors,
/// has_question, question, answers, correct_answer_element, hint), then any
/// unknown fields in key order.
pub fn serialize_module(m: &LearningModule) -> String {
    let mut fields: Vec<(String, String)> = Vec::new();
    let mut push = |k: &str, v: String| fields.push((k.to_string(), v));
    push("name", json_str(&m.name));
    push("size", json_str(&size_text(m.size)));
    push("author", json_str(&m.author));
    push("axis_labels", json_list(m.axis_labels.iter().map(json_str)));
    push("traffic_matrix", json_grid(m.traffic_matrix.rows()));
    push("traffic_matrix_colors", json_grid(m.traffic_matrix_colors.rows()));
    push("has_question", m.has_question().to_string());
    if let Some(q) = &m.question {
        push("question", json_str(&q.prompt));
        push("answers", json_list(q.answers.iter().map(|a| json_str(a))));
        push("correct_answer_element", q.correct_answer_element.to_string());
    }
    if let Some(h) = &m.hint {
        push("hint", json_str(h));
    }
    for (k, v) in &m.extra {
        let shadowed = KNOWN_FIELDS.contains(&k.as_str())
            && !(m.question.is_none() && QUESTION_FIELDS.contains(&k.as_str()));
        if !shadowed {
            fields.push((k.clone(), serde_json::to_string(v).unwrap_or_default()));
        }
    }
    let mut out = String::from("{\n");
    for (i, (k, v)) in fields.iter().enumerate() {
        let _ = write!(out, "  {}: {}", json_str(k), v);
        out.push_str(if i + 1 < fields.len() { ",\n" } else { "\n" });
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("UNSUPPORTED_TEMPLATE_SIZE: templates exist for 6x6 and 10x10, not {0}x{0}")]
    UnsupportedSize(usize),
}

/// Blank 6×6 or 10×10 module: zero matrix, all grey, placeholder labels, no question.
pub fn new_template(n: usize) -> Result<LearningModule, TemplateError> {
    if n != 6 && n != 10 {
        return Err(TemplateError::UnsupportedSize(n));
    }
    Ok(LearningModule {
        name: format!("{n}x{n} Template"),
        size: n,
        author: String::from("Author"),
        axis_labels: default_labels(n),
        traffic_matrix: TrafficMatrix::zeros(n),
        traffic_matrix_colors: ColorMatrix::uniform(n, Palette::Grey),
        question: None,
        hint: None,
        extra: BTreeMap::new(),
    })
}
