//! Traffic-matrix learning modules.
//!
//! A learning module is a labeled traffic matrix (row = source, column =
//! destination, entries are packet counts), a color overlay classifying each
//! cell as grey, blue or red space, and an optional multiple-choice question.
//!
//! This crate is `no_std` + `alloc` and holds everything that does no IO:
//!
//! - [`matrix`]: the traffic and color matrices and labeled lookups
//! - [`module`]: decoding, validation and canonical serialization of module files
//! - [`topology`], [`scenario`], [`compose`]: pattern generators, overlay and noise
//! - [`detect`]: the inverse direction, classifying matrix structure
//! - [`session`]: the seeded quiz state machine

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bundle;
pub mod compose;
pub mod detect;
pub mod diagnostic;
pub mod matrix;
pub mod module;
pub mod nodes;
pub mod scenario;
pub mod session;
pub mod topology;

pub use bundle::{Bundle, BundleEntry};
pub use diagnostic::{Code, Diagnostic, Severity};
pub use matrix::{AxisLabels, CellRef, ColorMatrix, MatrixError, NodeRef, Palette, TrafficMatrix};
pub use module::{new_template, parse_module, serialize_module, validate_module, LearningModule, Question};
pub use session::{PresentedQuestion, Session, SessionError, SessionEvent, ViewEvent, ViewState};
