//! Deterministic quiz sessions.
//!
//! A session is a pure function of `(bundle, seed, events)`: answer
//! permutations come from `(seed, module index)` only, so neither answering
//! order nor view changes can perturb them, and replaying the event log
//! rebuilds the exact state.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::bundle::Bundle;
use crate::compose::rng;
use crate::matrix::{AxisLabels, ColorMatrix, TrafficMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ViewMode {
    #[default]
    #[serde(rename = "2d")]
    TwoD,
    #[serde(rename = "3d")]
    ThreeD,
}

/// Renderer-facing view toggles. Rotation is in quarter turns, clockwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ViewState {
    pub mode: ViewMode,
    pub rotation: u8,
    pub colored: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewEvent {
    Toggle3d,
    RotateCw,
    RotateCcw,
    ToggleColors,
}

impl ViewState {
    pub fn apply(&mut self, event: ViewEvent) {
        match event {
            ViewEvent::Toggle3d => {
                self.mode = match self.mode {
                    ViewMode::TwoD => ViewMode::ThreeD,
                    ViewMode::ThreeD => ViewMode::TwoD,
                }
            }
            ViewEvent::RotateCw => self.rotation = (self.rotation + 1) % 4,
            ViewEvent::RotateCcw => self.rotation = (self.rotation + 3) % 4,
            ViewEvent::ToggleColors => self.colored = !self.colored,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub module: usize,
    /// Displayed position chosen by the student.
    pub position: usize,
    pub correct: bool,
}

/// Everything that can change a session after it starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionEvent {
    Answer { position: usize },
    Advance,
    View { event: ViewEvent },
    /// Instructor switch: suppress (or restore) all questions.
    Questions { enabled: bool },
}

/// One line of a session log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogRecord {
    Start { seed: u64, modules: usize },
    Event { seq: u64, event: SessionEvent },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    #[error("cannot start a session on an empty bundle")]
    EmptyBundle,
    #[error("session is finished")]
    Finished,
    #[error("the current module has no active question")]
    NoActiveQuestion,
    #[error("this question was already answered")]
    AlreadyAnswered,
    #[error("answer position {position} is out of range for {count} answers")]
    PositionOutOfRange { position: usize, count: usize },
    #[error("log does not start with a start record")]
    MissingStart,
    #[error("log is for {expected} modules but the bundle has {actual}")]
    BundleMismatch { expected: usize, actual: usize },
    #[error("log record {seq} is out of sequence")]
    OutOfSequence { seq: u64 },
    #[error("log event {seq} could not be applied: {reason}")]
    Replay { seq: u64, reason: String },
}

impl SessionError {
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::EmptyBundle => "EMPTY_BUNDLE",
            SessionError::Finished => "SESSION_FINISHED",
            SessionError::NoActiveQuestion => "NO_ACTIVE_QUESTION",
            SessionError::AlreadyAnswered => "ALREADY_ANSWERED",
            SessionError::PositionOutOfRange { .. } => "POSITION_OUT_OF_RANGE",
            SessionError::MissingStart => "MISSING_START",
            SessionError::BundleMismatch { .. } => "BUNDLE_MISMATCH",
            SessionError::OutOfSequence { .. } => "OUT_OF_SEQUENCE",
            SessionError::Replay { .. } => "REPLAY_FAILED",
        }
    }
}

/// Question as shown to the student: shuffled, with nothing marking the answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentedQuestion {
    pub prompt: String,
    pub shuffled_answers: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hint: Option<String>,
}

/// The current module as shown to the student.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleView {
    pub index: usize,
    pub total: usize,
    pub name: String,
    pub author: String,
    pub labels: AxisLabels,
    pub traffic_matrix: TrafficMatrix,
    pub traffic_matrix_colors: ColorMatrix,
    pub view: ViewState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hint: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Score {
    /// Serialized as `points` so presented payloads carry no "correct" key.
    #[serde(rename = "points")]
    pub correct: usize,
    pub answered: usize,
    pub total: usize,
}

/// Fisher-Yates permutation of `0..len` drawn from `(seed, module)`.
/// `perm[position]` is the authored index shown at `position`.
pub fn answer_permutation(seed: u64, module: usize, len: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..len).collect();
    let mut r = rng(seed);
    r.set_stream(module as u64);
    perm.shuffle(&mut r);
    perm
}

#[derive(Debug, Clone)]
pub struct Session {
    bundle: Arc<Bundle>,
    seed: u64,
    cursor: usize,
    permutations: Vec<Vec<usize>>,
    answers: Vec<AnswerRecord>,
    view: ViewState,
    questions_enabled: bool,
    log: Vec<LogRecord>,
}

impl PartialEq for Session {
    fn eq(&self, other: &Self) -> bool {
        self.seed == other.seed
            && self.cursor == other.cursor
            && self.permutations == other.permutations
            && self.answers == other.answers
            && self.view == other.view
            && self.questions_enabled == other.questions_enabled
            && self.log == other.log
            && (Arc::ptr_eq(&self.bundle, &other.bundle) || self.bundle == other.bundle)
    }
}

impl Session {
    pub fn start(bundle: Arc<Bundle>, seed: u64) -> Result<Session, SessionError> {
        if bundle.is_empty() {
            return Err(SessionError::EmptyBundle);
        }
        let permutations = bundle
            .modules()
            .enumerate()
            .map(|(i, m)| match &m.question {
                Some(q) => answer_permutation(seed, i, q.answers.len()),
                None => Vec::new(),
            })
            .collect();
        let log = alloc::vec![LogRecord::Start {
            seed,
            modules: bundle.len()
        }];
        Ok(Session {
            bundle,
            seed,
            cursor: 0,
            permutations,
            answers: Vec::new(),
            view: ViewState::default(),
            questions_enabled: true,
            log,
        })
    }

    /// Rebuilds a session from its log.
    pub fn replay(bundle: Arc<Bundle>, log: &[LogRecord]) -> Result<Session, SessionError> {
        let Some(LogRecord::Start { seed, modules }) = log.first() else {
            return Err(SessionError::MissingStart);
        };
        if *modules != bundle.len() {
            return Err(SessionError::BundleMismatch {
                expected: *modules,
                actual: bundle.len(),
            });
        }
        let mut s = Session::start(bundle, *seed)?;
        for rec in &log[1..] {
            let LogRecord::Event { seq, event } = rec else {
                return Err(SessionError::MissingStart);
            };
            if *seq != s.next_seq() {
                return Err(SessionError::OutOfSequence { seq: *seq });
            }
            s.apply(*event).map_err(|e| SessionError::Replay {
                seq: *seq,
                reason: alloc::format!("{e}"),
            })?;
        }
        Ok(s)
    }

    /// Applies an event, logging it on success. Failed events leave the
    /// session untouched.
    pub fn apply(&mut self, event: SessionEvent) -> Result<Option<bool>, SessionError> {
        let result = match event {
            SessionEvent::Answer { position } => self.grade(position).map(Some)?,
            SessionEvent::Advance => {
                if self.is_finished() {
                    return Err(SessionError::Finished);
                }
                self.cursor += 1;
                None
            }
            SessionEvent::View { event } => {
                self.view.apply(event);
                None
            }
            SessionEvent::Questions { enabled } => {
                self.questions_enabled = enabled;
                None
            }
        };
        let seq = self.next_seq();
        self.log.push(LogRecord::Event { seq, event });
        Ok(result)
    }

    pub fn submit_answer(&mut self, position: usize) -> Result<bool, SessionError> {
        self.apply(SessionEvent::Answer { position })
            .map(|r| r.unwrap_or_default())
    }

    pub fn advance(&mut self) -> Result<(), SessionError> {
        self.apply(SessionEvent::Advance).map(|_| ())
    }

    pub fn update_view(&mut self, event: ViewEvent) {
        let _ = self.apply(SessionEvent::View { event });
    }

    pub fn set_questions_enabled(&mut self, enabled: bool) {
        let _ = self.apply(SessionEvent::Questions { enabled });
    }

    fn grade(&mut self, position: usize) -> Result<bool, SessionError> {
        if self.is_finished() {
            return Err(SessionError::Finished);
        }
        let question = self.active_question().ok_or(SessionError::NoActiveQuestion)?;
        let correct_index = question.correct_answer_element;
        if self.answer_for(self.cursor).is_some() {
            return Err(SessionError::AlreadyAnswered);
        }
        let perm = &self.permutations[self.cursor];
        let Some(&authored) = perm.get(position) else {
            return Err(SessionError::PositionOutOfRange {
                position,
                count: perm.len(),
            });
        };
        let correct = authored == correct_index;
        self.answers.push(AnswerRecord {
            module: self.cursor,
            position,
            correct,
        });
        Ok(correct)
    }

    fn active_question(&self) -> Option<&crate::module::Question> {
        if !self.questions_enabled {
            return None;
        }
        self.bundle.module(self.cursor)?.question.as_ref()
    }

    fn next_seq(&self) -> u64 {
        self.log.len() as u64
    }

    /// Current module and, when it has an active question, its shuffled form.
    pub fn present(&self) -> Result<(ModuleView, Option<PresentedQuestion>), SessionError> {
        let m = self.bundle.module(self.cursor).ok_or(SessionError::Finished)?;
        let view = ModuleView {
            index: self.cursor,
            total: self.bundle.len(),
            name: m.name.clone(),
            author: m.author.clone(),
            labels: m.axis_labels.clone(),
            traffic_matrix: m.traffic_matrix.clone(),
            traffic_matrix_colors: m.traffic_matrix_colors.clone(),
            view: self.view,
            hint: m.hint.clone(),
        };
        let question = self.active_question().map(|q| PresentedQuestion {
            prompt: q.prompt.clone(),
            shuffled_answers: self.permutations[self.cursor]
                .iter()
                .map(|&i| q.answers[i].clone())
                .collect(),
            hint: m.hint.clone(),
        });
        Ok((view, question))
    }

    pub fn score(&self) -> Score {
        let total = if self.questions_enabled {
            self.bundle.question_count()
        } else {
            0
        };
        Score {
            correct: self.answers.iter().filter(|a| a.correct).count(),
            answered: self.answers.len(),
            total,
        }
    }

    pub fn answer_for(&self, module: usize) -> Option<&AnswerRecord> {
        self.answers.iter().find(|a| a.module == module)
    }

    pub fn is_finished(&self) -> bool {
        self.cursor >= self.bundle.len()
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn view(&self) -> ViewState {
        self.view
    }

    pub fn questions_enabled(&self) -> bool {
        self.questions_enabled
    }

    pub fn bundle(&self) -> &Arc<Bundle> {
        &self.bundle
    }

    pub fn permutation(&self, module: usize) -> &[usize] {
        &self.permutations[module]
    }

    pub fn answer_log(&self) -> &[AnswerRecord] {
        &self.answers
    }

    pub fn log(&self) -> &[LogRecord] {
        &self.log
    }
}
