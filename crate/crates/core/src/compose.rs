//! Combining patterns, background noise, and packaging generator output as
//! learning modules.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::matrix::{AxisLabels, ColorMatrix, MatrixError, Palette, TrafficMatrix};
use crate::module::{validate_module, LearningModule, Question};
use crate::nodes::default_labels;
use crate::scenario::{Scenario, ScenarioFamily};
use crate::topology::TopologyKind;

pub use crate::matrix::overlay;

/// Identifier of the seeded generator behind every random choice in this
/// crate. Recorded in generated modules so seeds are only compared between
/// implementations that declare the same algorithm.
pub const RNG_ALGORITHM: &str = "chacha8/rand_chacha-0.3";

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Where noise may land.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseRegion {
    All,
    Color(Palette),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub seed: u64,
    /// Packets to scatter.
    pub count: u64,
    pub region: NoiseRegion,
    /// Cap on a cell's resulting packet count.
    pub max_per_cell: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NoiseError {
    #[error("matrix is {matrix}x{matrix} but colors are {colors}x{colors}")]
    DimensionMismatch { matrix: usize, colors: usize },
    #[error("noise region is empty")]
    EmptyRegion,
    #[error("max_per_cell must be at least 1")]
    ZeroCap,
    #[error("region has room for {room} packet(s) below the cap, {requested} requested")]
    Saturated { room: u64, requested: u64 },
}

/// Scatters `count` packets one at a time over uniformly drawn cells of the
/// region. A draw landing on a full cell is redrawn; after `100 * count`
/// draws the call gives up.
pub fn add_noise(
    m: &TrafficMatrix,
    colors: &ColorMatrix,
    spec: &NoiseSpec,
) -> Result<TrafficMatrix, NoiseError> {
    if m.n() != colors.n() {
        return Err(NoiseError::DimensionMismatch {
            matrix: m.n(),
            colors: colors.n(),
        });
    }
    if spec.count == 0 {
        return Ok(m.clone());
    }
    if spec.max_per_cell == 0 {
        return Err(NoiseError::ZeroCap);
    }
    let region: Vec<(usize, usize)> = match spec.region {
        NoiseRegion::All => (0..m.n())
            .flat_map(|i| (0..m.n()).map(move |j| (i, j)))
            .collect(),
        NoiseRegion::Color(p) => colors.cells_of(p),
    };
    if region.is_empty() {
        return Err(NoiseError::EmptyRegion);
    }
    let room: u64 = region
        .iter()
        .map(|&(i, j)| spec.max_per_cell.saturating_sub(m.get(i, j)))
        .fold(0u64, u64::saturating_add);
    if room < spec.count {
        return Err(NoiseError::Saturated {
            room,
            requested: spec.count,
        });
    }
    let mut out = m.clone();
    let mut rng = rng(spec.seed);
    let mut placed = 0;
    let budget = spec.count.saturating_mul(100);
    let mut draws = 0u64;
    while placed < spec.count {
        if draws == budget {
            return Err(NoiseError::Saturated {
                room: room - placed,
                requested: spec.count - placed,
            });
        }
        draws += 1;
        let (i, j) = region[rng.gen_range(0..region.len())];
        if out.get(i, j) < spec.max_per_cell {
            out.add(i, j, 1);
            placed += 1;
        }
    }
    Ok(out)
}

/// Any named pattern in the catalogue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Pattern {
    Topology(TopologyKind),
    Scenario(Scenario),
}

impl Pattern {
    pub fn display_name(self) -> &'static str {
        match self {
            Pattern::Topology(k) => k.display_name(),
            Pattern::Scenario(s) => s.display_name(),
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            Pattern::Topology(k) => k.slug(),
            Pattern::Scenario(s) => s.slug(),
        }
    }

    pub fn from_slug(s: &str) -> Option<Pattern> {
        TopologyKind::from_slug(s)
            .map(Pattern::Topology)
            .or_else(|| Scenario::from_slug(s).map(Pattern::Scenario))
    }

    /// Patterns in the same sample group; distractors are drawn from here.
    pub fn family(self) -> Vec<Pattern> {
        match self {
            Pattern::Topology(_) => TopologyKind::ALL.into_iter().map(Pattern::Topology).collect(),
            Pattern::Scenario(s) => {
                let f: ScenarioFamily = s.family();
                Scenario::ALL
                    .into_iter()
                    .filter(|o| o.family() == f)
                    .map(Pattern::Scenario)
                    .collect()
            }
        }
    }

    pub fn catalogue() -> Vec<Pattern> {
        TopologyKind::ALL
            .into_iter()
            .map(Pattern::Topology)
            .chain(Scenario::ALL.into_iter().map(Pattern::Scenario))
            .collect()
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

/// The prompt used by every pattern-recognition module.
pub const STANDARD_PROMPT: &str = "Which choice is the displayed traffic pattern most relevant to?";

/// Three-choice "which pattern is this" question: the true pattern plus two
/// distractors from its family, chosen and ordered by `seed`.
pub fn standard_question(truth: Pattern, seed: u64) -> Question {
    let mut rng = rng(seed);
    let mut pool: Vec<Pattern> = truth.family().into_iter().filter(|p| *p != truth).collect();
    if pool.len() < 2 {
        let more: Vec<Pattern> = Pattern::catalogue()
            .into_iter()
            .filter(|p| *p != truth && !pool.contains(p))
            .collect();
        pool.extend(more);
    }
    pool.shuffle(&mut rng);
    let mut answers: Vec<String> = pool[..2].iter().map(|p| p.display_name().into()).collect();
    let at = rng.gen_range(0..=2);
    answers.insert(at, truth.display_name().into());
    Question {
        prompt: STANDARD_PROMPT.into(),
        answers,
        correct_answer_element: at,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModuleMeta {
    pub name: String,
    pub author: String,
    /// Defaults to the WS/SRV/EXT/ADV labelling for the matrix size.
    pub labels: Option<AxisLabels>,
    pub hint: Option<String>,
    /// Extra fields recorded in the file (generator provenance, seeds).
    pub extra: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QuestionPlan {
    None,
    Standard { truth: Pattern, seed: u64 },
    Custom(Question),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PackageError {
    #[error(transparent)]
    Dimension(#[from] MatrixError),
    #[error("packaged module fails validation: {0}")]
    Invalid(String),
}

/// Wraps a matrix pair as a module and checks it validates without errors.
pub fn to_module(
    matrix: TrafficMatrix,
    colors: ColorMatrix,
    meta: ModuleMeta,
    question: QuestionPlan,
) -> Result<LearningModule, PackageError> {
    let n = matrix.n();
    if colors.n() != n {
        return Err(MatrixError::DimensionMismatch { left: n, right: colors.n() }.into());
    }
    let labels = meta.labels.unwrap_or_else(|| default_labels(n));
    if labels.len() != n {
        return Err(MatrixError::DimensionMismatch { left: n, right: labels.len() }.into());
    }
    let mut extra = meta.extra;
    let question = match question {
        QuestionPlan::None => None,
        QuestionPlan::Custom(q) => Some(q),
        QuestionPlan::Standard { truth, seed } => {
            if let Some(o) = extra
                .entry("generator".into())
                .or_insert_with(|| json!({}))
                .as_object_mut()
            {
                o.insert("question_seed".into(), json!(seed));
                o.insert("rng".into(), json!(RNG_ALGORITHM));
            }
            Some(standard_question(truth, seed))
        }
    };
    let module = LearningModule {
        name: meta.name,
        size: n,
        author: meta.author,
        axis_labels: labels,
        traffic_matrix: matrix,
        traffic_matrix_colors: colors,
        question,
        hint: meta.hint,
        extra,
    };
    if let Some(d) = validate_module(&module).into_iter().find(|d| d.is_error()) {
        return Err(PackageError::Invalid(alloc::format!("{d}")));
    }
    Ok(module)
}
