//! Built-in sample bundles.
//!
//! Packet intensities are illustrative; they are chosen to read well in the
//! player, not taken from any measured traffic.

use warehouse_core::compose::{NoiseRegion, NoiseSpec};
use warehouse_core::nodes::{default_labels, Partition};
use warehouse_core::scenario::{Scenario, ScenarioSpec};
use warehouse_core::topology::{Topology, TopologyKind, TopologySpec};
use warehouse_core::{parse_module, AxisLabels, LearningModule, Palette, Question, TrafficMatrix};

use crate::generate::{generate, GenRequest, PatternSpec};

pub const SAMPLE_AUTHOR: &str = "Traffic Warehouse samples";

/// The classic 10x10 template file, question included.
pub const TEMPLATE_JSON: &str = include_str!("../assets/template-10x10.json");

#[derive(Debug, Clone)]
pub struct SampleBundle {
    pub id: &'static str,
    pub title: &'static str,
    /// Archive name used when the set is written to disk.
    pub archive: &'static str,
    pub modules: Vec<(String, LearningModule)>,
}

pub fn template_module() -> LearningModule {
    parse_module(TEMPLATE_JSON.as_bytes()).expect("bundled template is valid")
}

/// All built-in bundles, training first.
pub fn samples() -> Vec<SampleBundle> {
    vec![
        SampleBundle {
            id: "training",
            title: "Training: reading a traffic matrix",
            archive: "training.zip",
            modules: training(),
        },
        scenario_bundle(
            "traffic-topologies",
            "Traffic topologies",
            "traffic_topologies.zip",
            &[
                (Scenario::IsolatedLinks, 3),
                (Scenario::SingleLinks, 2),
                (Scenario::InternalSupernode, 2),
                (Scenario::ExternalSupernode, 2),
            ],
        ),
        scenario_bundle(
            "notional-attack",
            "Notional attack",
            "notional_attack.zip",
            &[
                (Scenario::AttackPlanning, 2),
                (Scenario::AttackStaging, 3),
                (Scenario::AttackInfiltration, 2),
                (Scenario::AttackLateral, 2),
            ],
        ),
        scenario_bundle(
            "security-defense-deterrence",
            "Security, defense and deterrence",
            "security_defense_deterrence.zip",
            &[(Scenario::Security, 1), (Scenario::Defense, 2), (Scenario::Deterrence, 4)],
        ),
        ddos(),
        SampleBundle {
            id: "graph-theory",
            title: "Graph theory",
            archive: "graph_theory.zip",
            modules: graph_theory(),
        },
        SampleBundle {
            id: "template",
            title: "10x10 template",
            archive: "template.zip",
            modules: vec![("01_template.json".into(), template_module())],
        },
    ]
}

pub fn sample(id: &str) -> Option<SampleBundle> {
    samples().into_iter().find(|s| s.id == id)
}

fn hint(p: &str) -> &'static str {
    match p {
        "isolated-links" => "Each busy cell pairs two nodes that talk to nobody else: look for lone mirrored cells.",
        "single-links" => "Traffic flows between individual pairs, and no node has many partners.",
        "internal-supernode" => "One row and column light up, and the partners are all inside the blue space.",
        "external-supernode" => "One internal node talks with many nodes outside its own space.",
        "attack-planning" => "All activity stays inside adversary (red) space: the attacker is getting organised.",
        "attack-staging" => "Adversary nodes push traffic into neutral grey space, setting up infrastructure.",
        "attack-infiltration" => "Traffic crosses the border from grey space into blue space.",
        "attack-lateral" => "A chain of hops from one internal node to the next.",
        "security" => "Internal nodes all watching each other: the whole blue block is busy.",
        "defense" => "Blue space exchanging traffic with grey space, observing its surroundings.",
        "deterrence" => "Activity concentrated on adversary nodes themselves.",
        "ddos-c2" => "A few red nodes coordinate among themselves.",
        "ddos-botnet" => "Command rows are identical: every client gets the same orders.",
        "ddos-attack" => "Many sources, few destinations: a tall block pointing at blue servers.",
        "ddos-backscatter" => "Replies flowing back from the victims: the attack block, transposed.",
        "star" => "One hub connects to every other node; the leaves never talk to each other.",
        "clique" => "Every node talks to every other node; only the diagonal is empty.",
        "bipartite" => "Two groups; every cell between them is busy and nothing happens inside either group.",
        "tree" => "Each node has one parent and there are no cycles; count the edges: one fewer than the nodes.",
        "ring" => "Every node has exactly one successor and the chain closes on itself.",
        "mesh" => "Neighbours on a grid: corners have two links, borders three, the middle four.",
        "toroidal-mesh" => "A grid whose edges wrap around, so every node has exactly four neighbours.",
        "self-loop" => "Only the diagonal is busy: nodes sending to themselves.",
        "triangle" => "Three nodes in a closed cycle.",
        _ => "Compare the busy cells with the color blocks.",
    }
}

fn scenario_bundle(
    id: &'static str,
    title: &'static str,
    archive: &'static str,
    items: &[(Scenario, u64)],
) -> SampleBundle {
    let modules = items
        .iter()
        .enumerate()
        .map(|(i, &(s, intensity))| {
            let spec = ScenarioSpec { intensity, ..ScenarioSpec::new(s, 10) };
            let req = GenRequest {
                patterns: vec![PatternSpec::Scenario(spec)],
                question_seed: Some(1000 + i as u64),
                author: SAMPLE_AUTHOR.into(),
                hint: Some(hint(s.slug()).into()),
                ..Default::default()
            };
            let m = generate(&req).expect("sample scenarios are valid");
            (format!("{:02}_{}.json", i + 1, s.slug()), m)
        })
        .collect();
    SampleBundle { id, title, archive, modules }
}

fn ddos() -> SampleBundle {
    let mut b = scenario_bundle(
        "ddos",
        "Distributed denial of service",
        "ddos.zip",
        &[
            (Scenario::DdosC2, 3),
            (Scenario::DdosBotnet, 2),
            (Scenario::DdosAttack, 5),
            (Scenario::DdosBackscatter, 3),
        ],
    );
    // The attack again, buried in background noise.
    let req = GenRequest {
        patterns: vec![PatternSpec::Scenario(ScenarioSpec { intensity: 5, ..ScenarioSpec::new(Scenario::DdosAttack, 10) })],
        noise: Some(NoiseSpec { seed: 77, count: 24, region: NoiseRegion::All, max_per_cell: 2 }),
        question_seed: Some(1099),
        name: Some("DDoS Attack in background noise".into()),
        author: SAMPLE_AUTHOR.into(),
        hint: Some("Ignore the scattered ones and twos; one block stands well above the noise.".into()),
        ..Default::default()
    };
    b.modules.push(("05_ddos-attack-noise.json".into(), generate(&req).expect("valid")));
    b
}

fn graph_theory() -> Vec<(String, LearningModule)> {
    let specs: [(Topology, usize, bool); 9] = [
        (Topology::Star { hub: 0 }, 8, true),
        (Topology::Clique, 6, true),
        (Topology::Bipartite { a: 3, b: 4 }, 8, true),
        (Topology::Tree { branching: 2 }, 10, false),
        (Topology::Ring, 8, false),
        (Topology::Mesh { rows: 3, cols: 3 }, 9, true),
        (Topology::ToroidalMesh { rows: 3, cols: 3 }, 9, true),
        (Topology::SelfLoop { vertices: vec![1, 3, 4] }, 6, false),
        (Topology::Triangle { vertices: [0, 2, 4] }, 6, true),
    ];
    specs
        .into_iter()
        .enumerate()
        .map(|(i, (t, n, symmetric))| {
            let kind: TopologyKind = t.kind();
            let weight = if kind == TopologyKind::SelfLoop { 3 } else { 1 };
            let spec = TopologySpec::new(t, n).symmetric(symmetric).weight(weight);
            let labels = AxisLabels::new((0..n).map(|k| char::from(b'A' + k as u8).to_string()));
            let req = GenRequest {
                patterns: vec![PatternSpec::Topology(spec)],
                labels: Some(labels),
                question_seed: Some(2000 + i as u64),
                author: SAMPLE_AUTHOR.into(),
                hint: Some(hint(kind.slug()).into()),
                ..Default::default()
            };
            let m = generate(&req).expect("sample topologies are valid");
            (format!("{:02}_{}.json", i + 1, kind.slug()), m)
        })
        .collect()
}

fn training() -> Vec<(String, LearningModule)> {
    let labels = default_labels(6);
    let partition = Partition::default_for(6);
    let mut m = TrafficMatrix::zeros(6);
    // WS1 SRV1 EXT1 ADV1 ADV2 ADV3
    m.set(0, 1, 4);
    m.set(1, 0, 4);
    m.set(0, 2, 1);
    m.set(2, 4, 2);
    m.set(3, 1, 3);
    let grey = warehouse_core::ColorMatrix::uniform(6, Palette::Grey);
    let base = |name: &str, colors, prompt: &str, answers: [&str; 3], correct, hint: &str| LearningModule {
        name: name.into(),
        size: 6,
        author: SAMPLE_AUTHOR.into(),
        axis_labels: labels.clone(),
        traffic_matrix: m.clone(),
        traffic_matrix_colors: colors,
        question: Some(Question {
            prompt: prompt.into(),
            answers: answers.map(String::from).to_vec(),
            correct_answer_element: correct,
        }),
        hint: Some(hint.into()),
        extra: Default::default(),
    };
    vec![
        (
            "01_reading.json".into(),
            base(
                "Reading a traffic matrix",
                grey.clone(),
                "How many packets did WS1 send to SRV1?",
                ["2", "4", "8"],
                1,
                "Rows are sources and columns are destinations: find the WS1 row, then the SRV1 column.",
            ),
        ),
        (
            "02_received.json".into(),
            base(
                "Packets received",
                grey,
                "How many packets did SRV1 receive in total?",
                ["4", "7", "3"],
                1,
                "Add up every entry in the SRV1 column.",
            ),
        ),
        (
            "03_colors.json".into(),
            base(
                "Network spaces",
                partition.color_matrix(),
                "Which color marks traffic that involves adversary space?",
                ["Grey", "Blue", "Red"],
                2,
                "Turn the pallet colors on: blue is the internal network, grey is neutral, red is adversary space.",
            ),
        ),
        ("04_template.json".into(), template_module()),
    ]
}
