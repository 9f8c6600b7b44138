//! Turning pattern specs into finished module files.

use serde_json::json;
use warehouse_core::compose::{
    add_noise, overlay, to_module, ModuleMeta, NoiseError, NoiseSpec, PackageError, Pattern, QuestionPlan,
};
use warehouse_core::nodes::{labels_for, Partition};
use warehouse_core::scenario::{gen_scenario, ScenarioError, ScenarioSpec};
use warehouse_core::topology::{gen_topology, TopologyError, TopologySpec};
use warehouse_core::{AxisLabels, ColorMatrix, LearningModule, MatrixError, Palette, TrafficMatrix};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternSpec {
    Topology(TopologySpec),
    Scenario(ScenarioSpec),
}

impl PatternSpec {
    pub fn pattern(&self) -> Pattern {
        match self {
            PatternSpec::Topology(t) => Pattern::Topology(t.topology.kind()),
            PatternSpec::Scenario(s) => Pattern::Scenario(s.scenario),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            PatternSpec::Topology(t) => t.n,
            PatternSpec::Scenario(s) => s.n(),
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            PatternSpec::Topology(t) => json!({ "pattern": self.pattern().slug(), "spec": t }),
            PatternSpec::Scenario(s) => json!({
                "pattern": self.pattern().slug(),
                "partition": s.partition.to_string_code(),
                "intensity": s.intensity,
                "hub": s.hub,
                "c2_count": s.c2_count,
            }),
        }
    }
}

/// Everything needed to produce one module. Several patterns are overlaid;
/// the first one is the answer of the generated question.
#[derive(Debug, Clone, Default)]
pub struct GenRequest {
    pub patterns: Vec<PatternSpec>,
    /// Colors and labels; scenarios bring their own partition.
    pub partition: Option<Partition>,
    pub labels: Option<AxisLabels>,
    pub noise: Option<NoiseSpec>,
    pub question_seed: Option<u64>,
    pub name: Option<String>,
    pub author: String,
    pub hint: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("no pattern requested")]
    Empty,
    #[error("patterns disagree on size: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Package(#[from] PackageError),
}

pub fn generate(req: &GenRequest) -> Result<LearningModule, GenError> {
    let first = req.patterns.first().ok_or(GenError::Empty)?;
    let n = first.n();
    let mut matrix = TrafficMatrix::zeros(n);
    let mut partition = req.partition.clone();
    for p in &req.patterns {
        if p.n() != n {
            return Err(GenError::SizeMismatch(n, p.n()));
        }
        let m = match p {
            PatternSpec::Topology(t) => gen_topology(t)?,
            PatternSpec::Scenario(s) => {
                partition.get_or_insert_with(|| s.partition.clone());
                gen_scenario(s)?.0
            }
        };
        matrix = overlay(&matrix, &m)?;
    }
    if let Some(p) = &partition {
        if p.len() != n {
            return Err(GenError::SizeMismatch(n, p.len()));
        }
    }
    let colors = match &partition {
        Some(p) => p.color_matrix(),
        None => ColorMatrix::uniform(n, Palette::Grey),
    };
    if let Some(noise) = &req.noise {
        matrix = add_noise(&matrix, &colors, noise)?;
    }
    let labels = req
        .labels
        .clone()
        .or_else(|| partition.as_ref().map(labels_for))
        .unwrap_or_else(|| warehouse_core::nodes::default_labels(n));
    let name = req.name.clone().unwrap_or_else(|| {
        req.patterns.iter().map(|p| p.pattern().display_name()).collect::<Vec<_>>().join(" + ")
    });
    let mut generator = json!({
        "patterns": req.patterns.iter().map(PatternSpec::to_json).collect::<Vec<_>>(),
    });
    if let Some(noise) = &req.noise {
        generator["noise"] = json!(noise);
    }
    let meta = ModuleMeta {
        name,
        author: req.author.clone(),
        labels: Some(labels),
        hint: req.hint.clone(),
        extra: [("generator".to_string(), generator)].into_iter().collect(),
    };
    let plan = match req.question_seed {
        Some(seed) => QuestionPlan::Standard { truth: first.pattern(), seed },
        None => QuestionPlan::None,
    };
    Ok(to_module(matrix, colors, meta, plan)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use warehouse_core::compose::NoiseRegion;
    use warehouse_core::detect::match_topology;
    use warehouse_core::scenario::Scenario;
    use warehouse_core::topology::{Topology, TopologyKind};
    use warehouse_core::{parse_module, serialize_module};

    #[test]
    fn ring_module_round_trips_and_matches() {
        let req = GenRequest {
            patterns: vec![PatternSpec::Topology(TopologySpec::new(Topology::Ring, 10))],
            question_seed: Some(4),
            author: "t".into(),
            ..Default::default()
        };
        let m = generate(&req).unwrap();
        assert!(match_topology(&m.traffic_matrix, TopologyKind::Ring).is_exact());
        assert_eq!(m.question.as_ref().unwrap().answers.len(), 3);
        assert_eq!(m.extra["generator"]["question_seed"], 4);
        assert_eq!(parse_module(serialize_module(&m).as_bytes()).unwrap(), m);
    }

    #[test]
    fn noisy_scenario_keeps_its_colors() {
        let req = GenRequest {
            patterns: vec![PatternSpec::Scenario(ScenarioSpec::new(Scenario::DdosAttack, 10))],
            noise: Some(NoiseSpec { seed: 1, count: 20, region: NoiseRegion::Color(Palette::Grey), max_per_cell: 2 }),
            ..Default::default()
        };
        let m = generate(&req).unwrap();
        let base = gen_scenario(&ScenarioSpec::new(Scenario::DdosAttack, 10)).unwrap().0;
        assert_eq!(m.traffic_matrix.total(), base.total() + 20);
        assert_eq!(m.axis_labels.get(9), Some("ADV4"));
    }
}
