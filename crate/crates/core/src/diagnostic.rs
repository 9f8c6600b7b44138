use alloc::string::String;
use core::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Info => "info",
            Severity::Warning => "warning",
            Severity::Error => "error",
        }
    }
}

/// Stable diagnostic identifiers. Each validation failure maps to exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Code {
    // decoding
    JsonSyntax,
    TypeMismatch,
    MissingField,
    BadSize,
    NegativePackets,
    NonIntegerPackets,
    PacketOverflow,
    // structure
    LabelCount,
    MatrixShape,
    ColorShape,
    EmptyLabel,
    EmptyQuestion,
    TooFewAnswers,
    DuplicateAnswer,
    AnswerIndexRange,
    // advisories
    PacketsGt15,
    ColorCodeUnknown,
    AnswerCountNot3,
    DuplicateLabel,
    QuestionIgnored,
    // bundles
    ZipCorrupt,
    BundleEmpty,
    NonJsonEntry,
}

impl Code {
    pub const ALL: [Code; 23] = [
        Code::JsonSyntax,
        Code::TypeMismatch,
        Code::MissingField,
        Code::BadSize,
        Code::NegativePackets,
        Code::NonIntegerPackets,
        Code::PacketOverflow,
        Code::LabelCount,
        Code::MatrixShape,
        Code::ColorShape,
        Code::EmptyLabel,
        Code::EmptyQuestion,
        Code::TooFewAnswers,
        Code::DuplicateAnswer,
        Code::AnswerIndexRange,
        Code::PacketsGt15,
        Code::ColorCodeUnknown,
        Code::AnswerCountNot3,
        Code::DuplicateLabel,
        Code::QuestionIgnored,
        Code::ZipCorrupt,
        Code::BundleEmpty,
        Code::NonJsonEntry,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Code::JsonSyntax => "JSON_SYNTAX",
            Code::TypeMismatch => "TYPE_MISMATCH",
            Code::MissingField => "MISSING_FIELD",
            Code::BadSize => "BAD_SIZE",
            Code::NegativePackets => "NEGATIVE_PACKETS",
            Code::NonIntegerPackets => "NON_INTEGER_PACKETS",
            Code::PacketOverflow => "PACKET_OVERFLOW",
            Code::LabelCount => "LABEL_COUNT",
            Code::MatrixShape => "MATRIX_SHAPE",
            Code::ColorShape => "COLOR_SHAPE",
            Code::EmptyLabel => "EMPTY_LABEL",
            Code::EmptyQuestion => "EMPTY_QUESTION",
            Code::TooFewAnswers => "TOO_FEW_ANSWERS",
            Code::DuplicateAnswer => "DUPLICATE_ANSWER",
            Code::AnswerIndexRange => "ANSWER_INDEX_RANGE",
            Code::PacketsGt15 => "PACKETS_GT_15",
            Code::ColorCodeUnknown => "COLOR_CODE_UNKNOWN",
            Code::AnswerCountNot3 => "ANSWER_COUNT_NOT_3",
            Code::DuplicateLabel => "DUPLICATE_LABEL",
            Code::QuestionIgnored => "QUESTION_IGNORED",
            Code::ZipCorrupt => "ZIP_CORRUPT",
            Code::BundleEmpty => "BUNDLE_EMPTY",
            Code::NonJsonEntry => "NON_JSON_ENTRY",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            Code::PacketsGt15
            | Code::ColorCodeUnknown
            | Code::AnswerCountNot3
            | Code::DuplicateLabel
            | Code::NonJsonEntry => Severity::Warning,
            Code::QuestionIgnored => Severity::Info,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single finding about a module file or bundle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    /// Member filename when the diagnostic comes from a bundle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    /// Field locator, e.g. `traffic_matrix[0][3]`; `$` is the document root.
    pub path: String,
    pub message: String,
    /// Byte offset into the input, for syntax errors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<usize>,
}

impl Diagnostic {
    pub fn new(code: Code, path: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: code.severity(),
            code,
            file: None,
            path: path.into(),
            message: message.into(),
            offset: None,
        }
    }

    pub fn in_file(mut self, file: impl Into<String>) -> Self {
        self.file = Some(file.into());
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{file}: ")?;
        }
        write!(
            f,
            "{}[{}] {}: {}",
            self.severity.as_str(),
            self.code,
            self.path,
            self.message
        )
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
