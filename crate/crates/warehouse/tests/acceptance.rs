//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::io::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::http::{Method, StatusCode};
use axum::Router;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};
use warehouse::archive::{bundle_zip, load_bundle, write_zip};
use warehouse::samples::{samples, template_module};
use warehouse::service::{router, ServiceConfig, Store};
use warehouse_core::detect::{detect_isolated_links, detect_supernodes, match_topology, SupernodeClass};
use warehouse_core::nodes::Partition;
use warehouse_core::session::SessionEvent;
use warehouse_core::topology::{gen_topology, Topology, TopologyKind, TopologySpec};
use warehouse_core::{
    parse_module, serialize_module, validate_module, AxisLabels, Bundle, Code, ColorMatrix, Diagnostic,
    LearningModule, NodeRef, Question, Session, TrafficMatrix,
};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn diagnostics(bytes: &[u8]) -> Vec<Diagnostic> {
    match parse_module(bytes) {
        Ok(m) => validate_module(&m),
        Err(d) => d,
    }
}

// ---------------------------------------------------------------- golden file

const LISTED_LABELS: [&str; 10] = ["WS1", "WS2", "WS3", "SRV1", "EXT1", "EXT2", "ADV1", "ADV2", "ADV3", "ADV4"];

const LISTED_COLORS: [[i64; 10]; 10] = [
    [0, 0, 0, 0, 0, 0, 2, 2, 2, 2],
    [0, 0, 0, 0, 0, 0, 2, 2, 2, 2],
    [0, 0, 0, 0, 0, 0, 2, 2, 2, 2],
    [0, 0, 0, 0, 0, 0, 2, 2, 2, 2],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [1, 1, 1, 1, 0, 0, 0, 0, 0, 0],
    [1, 1, 1, 1, 0, 0, 0, 0, 0, 0],
    [1, 1, 1, 1, 0, 0, 0, 0, 0, 0],
    [1, 1, 1, 1, 0, 0, 0, 0, 0, 0],
];

fn golden_file() -> Outcome {
    let bytes = fs::read(fixtures().join("template_10x10.json")).map_err(|e| e.to_string())?;
    let m = parse_module(&bytes).map_err(|d| format!("{d:?}"))?;
    let cell = m
        .traffic_matrix
        .cell(&m.axis_labels, NodeRef::Label("WS1"), NodeRef::Label("ADV4"))
        .map_err(|e| e.to_string())?;
    ensure!(cell == 2, "cell(WS1, ADV4) = {cell}");
    let q = m.question.as_ref().ok_or("no question")?;
    ensure!(q.correct_answer() == Some("2"), "correct answer text {:?}", q.correct_answer());
    ensure!(m.axis_labels.0 == LISTED_LABELS, "labels {:?}", m.axis_labels.0);
    for (i, row) in LISTED_COLORS.iter().enumerate() {
        for (j, &want) in row.iter().enumerate() {
            ensure!(m.traffic_matrix_colors.code(i, j) == want, "color ({i},{j})");
        }
    }
    for i in 0..10 {
        for j in 0..10 {
            let want = if i == j { 1 } else if i + j == 9 { 2 } else { 0 };
            ensure!(m.traffic_matrix.get(i, j) == want, "packets ({i},{j})");
        }
    }
    ensure!(!validate_module(&m).iter().any(Diagnostic::is_error), "template has errors");
    Ok("WS1->ADV4 = 2, answer \"2\", 10 labels, color blocks exact".into())
}

// ----------------------------------------------------------------- round trip

fn random_text(rng: &mut StdRng, min: usize) -> String {
    const POOL: &[&str] = &["A", "b", "Z", "0", "7", " ", "-", "_", "\"", "\\", "/", "é", "ß", "Ж", "中", "🙂", "\t", "\n"];
    let len = rng.gen_range(min..=8);
    (0..len).map(|_| *POOL.choose(rng).unwrap()).collect()
}

fn random_module(rng: &mut StdRng) -> LearningModule {
    let n = rng.gen_range(2..=12);
    let mut labels = BTreeSet::new();
    while labels.len() < n {
        let l = random_text(rng, 1);
        if !l.trim().is_empty() {
            labels.insert(l);
        }
    }
    let mut labels: Vec<String> = labels.into_iter().collect();
    labels.shuffle(rng);
    let density = rng.gen_range(0.0..1.0);
    let mut matrix = TrafficMatrix::zeros(n);
    let mut colors = ColorMatrix::uniform(n, warehouse_core::Palette::Grey);
    for i in 0..n {
        for j in 0..n {
            if rng.gen_bool(density) {
                let v = if rng.gen_bool(0.05) { rng.gen_range(16..100_000) } else { rng.gen_range(1..=15) };
                matrix.set(i, j, v);
            }
            colors.set_code(i, j, rng.gen_range(0..=3));
        }
    }
    let question = rng.gen_bool(0.7).then(|| {
        let count = rng.gen_range(2..=5);
        let mut answers = BTreeSet::new();
        while answers.len() < count {
            answers.insert(random_text(rng, 1));
        }
        let mut answers: Vec<String> = answers.into_iter().collect();
        answers.shuffle(rng);
        let mut prompt = random_text(rng, 1);
        if prompt.trim().is_empty() {
            prompt.push('?');
        }
        Question { prompt, correct_answer_element: rng.gen_range(0..count), answers }
    });
    let mut extra = BTreeMap::new();
    for k in 0..rng.gen_range(0..3) {
        let v = match rng.gen_range(0..4) {
            0 => json!(rng.gen::<i32>()),
            1 => json!(random_text(rng, 0)),
            2 => json!([true, null, {"k": rng.gen::<u16>()}]),
            _ => json!({ "nested": { "seed": rng.gen::<u32>() } }),
        };
        extra.insert(format!("x_field_{k}"), v);
    }
    LearningModule {
        name: random_text(rng, 0),
        size: n,
        author: random_text(rng, 0),
        axis_labels: AxisLabels(labels),
        traffic_matrix: matrix,
        traffic_matrix_colors: colors,
        question,
        hint: rng.gen_bool(0.5).then(|| random_text(rng, 0)),
        extra,
    }
}

fn round_trip() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut failures = 0;
    for k in 0..1000 {
        let m = random_module(&mut rng);
        let errors: Vec<_> = validate_module(&m).into_iter().filter(Diagnostic::is_error).collect();
        ensure!(errors.is_empty(), "generated module {k} is invalid: {errors:?}");
        let text = serialize_module(&m);
        match parse_module(text.as_bytes()) {
            Ok(back) if back == m && serialize_module(&back) == text => {}
            _ => failures += 1,
        }
    }
    ensure!(failures == 0, "{failures} of 1000 modules failed");
    Ok("1000/1000 modules".into())
}

// ---------------------------------------------------------- validator coverage

fn validator_coverage() -> Outcome {
    let mut covered = BTreeSet::new();
    let dir = fixtures().join("codes");
    for entry in fs::read_dir(&dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        let codes: BTreeSet<&str> = diagnostics(&fs::read(&path).unwrap()).iter().map(|d| d.code.as_str()).collect();
        ensure!(codes.len() == 1 && codes.contains(name.as_str()), "{name}.json gave {codes:?}");
        covered.insert(name);
    }
    let template = serialize_module(&template_module());
    let archives: [(&str, Vec<u8>); 3] = [
        ("ZIP_CORRUPT", b"PK\x03\x04 definitely not a zip".to_vec()),
        ("BUNDLE_EMPTY", write_zip([]).unwrap()),
        ("NON_JSON_ENTRY", write_zip([("a.json", template.as_bytes()), ("notes.txt", &b"hello"[..])]).unwrap()),
    ];
    for (want, bytes) in archives {
        let diags = match load_bundle(&bytes) {
            Ok(l) => l.warnings,
            Err(d) => d,
        };
        let codes: BTreeSet<&str> = diags.iter().map(|d| d.code.as_str()).collect();
        ensure!(codes.len() == 1 && codes.contains(want), "{want} archive gave {codes:?}");
        covered.insert(want.to_string());
    }
    let missing: Vec<&str> = Code::ALL.iter().map(|c| c.as_str()).filter(|c| !covered.contains(*c)).collect();
    ensure!(missing.is_empty(), "no fixture for {missing:?}");

    let mut m = template_module();
    m.traffic_matrix.set(3, 7, 15);
    ensure!(!validate_module(&m).iter().any(|d| d.code == Code::PacketsGt15), "fired at 15");
    m.traffic_matrix.set(3, 7, 16);
    let fired: Vec<_> = validate_module(&m).into_iter().filter(|d| d.code == Code::PacketsGt15).collect();
    ensure!(fired.len() == 1 && fired[0].path == "traffic_matrix[3][7]", "at 16: {fired:?}");
    Ok(format!("{} codes, each alone; guidance rule fires at 16 not 15", covered.len()))
}

// ------------------------------------------------------------ topology census

type EdgeSet = BTreeSet<(usize, usize)>;

fn support(m: &TrafficMatrix) -> EdgeSet {
    m.nonzero().map(|(i, j, _)| (i, j)).collect()
}

/// A support restricted to its touched vertices, relabeled 0..k.
#[derive(Clone, PartialEq, Eq, Hash)]
struct Shape {
    k: usize,
    edges: Vec<(usize, usize)>,
}

type Signature = (usize, usize, Vec<(usize, usize, bool)>);

impl Shape {
    fn of(edges: &EdgeSet) -> Shape {
        let touched: BTreeSet<usize> = edges.iter().flat_map(|&(i, j)| [i, j]).collect();
        let index: HashMap<usize, usize> = touched.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let mut e: Vec<(usize, usize)> = edges.iter().map(|&(i, j)| (index[&i], index[&j])).collect();
        e.sort();
        Shape { k: touched.len(), edges: e }
    }

    fn has(&self, i: usize, j: usize) -> bool {
        self.edges.binary_search(&(i, j)).is_ok()
    }

    fn degrees(&self) -> Vec<(usize, usize, bool)> {
        let mut d = vec![(0, 0, false); self.k];
        for &(i, j) in &self.edges {
            d[i].0 += 1;
            d[j].1 += 1;
            if i == j {
                d[i].2 = true;
            }
        }
        d
    }

    fn signature(&self) -> Signature {
        let mut d = self.degrees();
        d.sort();
        (self.k, self.edges.len(), d)
    }
}

/// Brute-force directed graph isomorphism by backtracking.
fn isomorphic(a: &Shape, b: &Shape) -> bool {
    if a.signature() != b.signature() {
        return false;
    }
    let (da, db) = (a.degrees(), b.degrees());
    let mut map = vec![usize::MAX; a.k];
    let mut used = vec![false; b.k];
    fn go(v: usize, a: &Shape, b: &Shape, da: &[(usize, usize, bool)], db: &[(usize, usize, bool)], map: &mut [usize], used: &mut [bool]) -> bool {
        if v == a.k {
            return true;
        }
        for w in 0..b.k {
            if used[w] || da[v] != db[w] {
                continue;
            }
            let consistent = (0..v).all(|u| a.has(u, v) == b.has(map[u], w) && a.has(v, u) == b.has(w, map[u]));
            if !consistent {
                continue;
            }
            map[v] = w;
            used[w] = true;
            if go(v + 1, a, b, da, db, map, used) {
                return true;
            }
            used[w] = false;
        }
        false
    }
    go(0, a, b, &da, &db, &mut map, &mut used)
}

/// Every parameter choice for `kind` at size `n`, both edge directions.
fn all_specs(kind: TopologyKind, n: usize) -> Vec<TopologySpec> {
    let shapes: Vec<Topology> = match kind {
        TopologyKind::Star => (0..n).map(|hub| Topology::Star { hub }).collect(),
        TopologyKind::Clique => vec![Topology::Clique],
        TopologyKind::Bipartite => (1..n)
            .flat_map(|a| (1..=n - a).map(move |b| Topology::Bipartite { a, b }))
            .collect(),
        TopologyKind::Tree => (1..n.max(2)).map(|branching| Topology::Tree { branching }).collect(),
        TopologyKind::Ring => vec![Topology::Ring],
        TopologyKind::Mesh | TopologyKind::ToroidalMesh => (1..=n)
            .flat_map(|rows| (1..=n).map(move |cols| (rows, cols)))
            .filter(|(r, c)| r * c <= n)
            .map(|(rows, cols)| {
                if kind == TopologyKind::Mesh {
                    Topology::Mesh { rows, cols }
                } else {
                    Topology::ToroidalMesh { rows, cols }
                }
            })
            .collect(),
        TopologyKind::SelfLoop => (1u32..1 << n)
            .map(|mask| Topology::SelfLoop { vertices: (0..n).filter(|v| mask >> v & 1 == 1).collect() })
            .collect(),
        TopologyKind::Triangle => {
            let mut v = Vec::new();
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if a != b && b != c && a != c {
                            v.push(Topology::Triangle { vertices: [a, b, c] });
                        }
                    }
                }
            }
            v
        }
    };
    shapes
        .into_iter()
        .flat_map(|t| [false, true].map(|s| TopologySpec::new(t.clone(), n).symmetric(s)))
        .collect()
}

fn is_grid(kind: TopologyKind) -> bool {
    matches!(kind, TopologyKind::Mesh | TopologyKind::ToroidalMesh)
}

/// Structural invariants each generator promises.
fn invariants(spec: &TopologySpec, e: &EdgeSet) -> Result<(), String> {
    let n = spec.n;
    let sym = spec.symmetric;
    let out = |v: usize| e.iter().filter(|&&(i, _)| i == v).count();
    let inn = |v: usize| e.iter().filter(|&&(_, j)| j == v).count();
    let partners = |v: usize| e.iter().filter_map(|&(i, j)| if i == v { Some(j) } else if j == v { Some(i) } else { None }).collect::<BTreeSet<_>>();
    let f = if sym { 2 } else { 1 };
    let ok = match &spec.topology {
        Topology::Ring => (0..n).all(|v| out(v) == f && inn(v) == f) && e.len() == f * n,
        Topology::Clique => e.len() == n * (n - 1) && e.iter().all(|&(i, j)| i != j),
        Topology::ToroidalMesh { rows, cols } => (0..rows * cols).all(|v| partners(v).len() == 4 && out(v) == 2 * f),
        Topology::Mesh { rows: p, cols: q } => e.len() == f * (p * (q - 1) + q * (p - 1)),
        Topology::Tree { .. } => {
            let mut parent: Vec<usize> = (0..n).collect();
            fn find(p: &mut Vec<usize>, x: usize) -> usize {
                if p[x] != x {
                    let r = find(p, p[x]);
                    p[x] = r;
                }
                p[x]
            }
            let mut acyclic = true;
            let undirected: BTreeSet<(usize, usize)> = e.iter().map(|&(i, j)| (i.min(j), i.max(j))).collect();
            for &(i, j) in &undirected {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                acyclic &= a != b;
                parent[a] = b;
            }
            undirected.len() == n - 1 && e.len() == f * (n - 1) && acyclic
        }
        Topology::Bipartite { a, b } => e.iter().all(|&(i, j)| {
            let fwd = i < *a && (*a..a + b).contains(&j);
            let back = sym && j < *a && (*a..a + b).contains(&i);
            fwd || back
        }) && e.len() == f * a * b,
        Topology::Star { hub } => e.len() == f * (n - 1) && e.iter().all(|&(i, j)| i == *hub || (sym && j == *hub)),
        Topology::SelfLoop { vertices } => {
            e.iter().all(|&(i, j)| i == j) && e.len() == vertices.iter().collect::<BTreeSet<_>>().len()
        }
        Topology::Triangle { .. } => e.len() == 3 * f && e.iter().all(|&(i, j)| i != j),
    };
    if ok {
        Ok(())
    } else {
        Err(format!("invariant broken for {spec:?}"))
    }
}

fn topology_census() -> Outcome {
    // Catalogue of relabeling-insensitive shapes, keyed by kind and signature.
    let mut catalogue: HashMap<(TopologyKind, Signature), Vec<Shape>> = HashMap::new();
    let mut seen: HashSet<(TopologyKind, Shape)> = HashSet::new();
    for kind in TopologyKind::ALL.into_iter().filter(|k| !is_grid(*k)) {
        for n in 1..=9 {
            for spec in all_specs(kind, n) {
                let Ok(m) = gen_topology(&spec) else { continue };
                let shape = Shape::of(&support(&m));
                if seen.insert((kind, shape.clone())) {
                    catalogue.entry((kind, shape.signature())).or_default().push(shape);
                }
            }
        }
    }
    let grid_supports = |kind: TopologyKind, n: usize| -> Vec<EdgeSet> {
        all_specs(kind, n).iter().filter_map(|s| gen_topology(s).ok()).map(|m| support(&m)).collect()
    };

    let mut instances = 0;
    let mut rejected = 0;
    let mut containments: BTreeSet<(TopologyKind, TopologyKind)> = BTreeSet::new();
    let mut oracle_cache: HashMap<(TopologyKind, Shape), bool> = HashMap::new();
    for kind in TopologyKind::ALL {
        let max_n = if is_grid(kind) { 9 } else { 8 };
        for n in 1..=max_n {
            let grids: HashMap<TopologyKind, Vec<EdgeSet>> = [TopologyKind::Mesh, TopologyKind::ToroidalMesh]
                .into_iter()
                .map(|k| (k, grid_supports(k, n)))
                .collect();
            // Instances keep grid shapes within 3x3; the oracle sees every shape.
            let within = |s: &TopologySpec| match s.topology {
                Topology::Mesh { rows, cols } | Topology::ToroidalMesh { rows, cols } => rows <= 3 && cols <= 3,
                _ => true,
            };
            for spec in all_specs(kind, n).into_iter().filter(within) {
                let m = match gen_topology(&spec) {
                    Ok(m) => m,
                    Err(_) => {
                        rejected += 1;
                        continue;
                    }
                };
                instances += 1;
                let edges = support(&m);
                invariants(&spec, &edges)?;
                ensure!(match_topology(&m, kind).is_exact(), "{spec:?} not recognised as {kind}");
                let shape = Shape::of(&edges);
                for other in TopologyKind::ALL {
                    let expected = if is_grid(other) {
                        grids[&other].contains(&edges)
                    } else {
                        *oracle_cache.entry((other, shape.clone())).or_insert_with(|| {
                            catalogue
                                .get(&(other, shape.signature()))
                                .is_some_and(|c| c.iter().any(|s| isomorphic(s, &shape)))
                        })
                    };
                    let got = match_topology(&m, other).is_exact();
                    ensure!(got == expected, "{spec:?} as {other}: detector {got}, oracle {expected}");
                    if got && other != kind {
                        containments.insert((kind, other));
                    }
                }
            }
        }
    }
    Ok(format!(
        "{instances} instances ({rejected} invalid parameter sets rejected), {} kind pairs overlap on small cases",
        containments.len()
    ))
}

// ------------------------------------------------------------ detector oracle

fn detector_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(42);
    let n = 6;
    let mut isolated_seen = 0;
    let mut supernodes_seen = 0;
    for case in 0..500 {
        let density = rng.gen_range(0.02..0.6);
        let mut m = TrafficMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if rng.gen_bool(density) {
                    m.set(i, j, rng.gen_range(1..=15));
                }
            }
        }
        let colors = if rng.gen_bool(0.5) {
            let p: String = (0..n).map(|_| *['B', 'G', 'R'].choose(&mut rng).unwrap()).collect();
            Partition::parse(&p).unwrap().color_matrix()
        } else {
            let mut c = ColorMatrix::uniform(n, warehouse_core::Palette::Grey);
            for i in 0..n {
                for j in 0..n {
                    c.set_code(i, j, rng.gen_range(0..=4));
                }
            }
            c
        };
        let nz = |i: usize, j: usize| m.get(i, j) != 0;

        let mut want_iso = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j || !nz(i, j) {
                    continue;
                }
                let alone = (0..n).filter(|&x| x != i && x != j).all(|x| !nz(i, x) && !nz(x, i) && !nz(j, x) && !nz(x, j));
                if alone {
                    want_iso.push((i, j));
                }
            }
        }
        ensure!(detect_isolated_links(&m) == want_iso, "case {case}: isolated links differ");
        isolated_seen += want_iso.len();

        for threshold in 2..=5 {
            let mut want = Vec::new();
            for k in 0..n {
                let mut partners = 0;
                let mut cells = 0;
                let mut blue = 0;
                for x in 0..n {
                    if x == k {
                        continue;
                    }
                    if nz(k, x) || nz(x, k) {
                        partners += 1;
                    }
                    for (a, b) in [(k, x), (x, k)] {
                        if nz(a, b) {
                            cells += 1;
                            if colors.code(a, b) == 1 {
                                blue += 1;
                            }
                        }
                    }
                }
                if partners >= threshold {
                    let class = if blue * 2 >= cells { SupernodeClass::Internal } else { SupernodeClass::External };
                    want.push((k, class, partners));
                }
            }
            let got: Vec<_> = detect_supernodes(&m, &colors, threshold).into_iter().map(|s| (s.node, s.class, s.partners)).collect();
            ensure!(got == want, "case {case}, threshold {threshold}: supernodes differ");
            supernodes_seen += want.len();
        }
    }
    Ok(format!("500 matrices, {isolated_seen} isolated cells, {supernodes_seen} supernode hits across thresholds 2-5"))
}

// ------------------------------------------------- session determinism/fairness

fn sample_bundles() -> Vec<(String, Arc<Bundle>)> {
    samples()
        .into_iter()
        .map(|s| (s.id.to_string(), Arc::new(Bundle::from_modules(s.modules).unwrap())))
        .collect()
}

fn template_bundle() -> Arc<Bundle> {
    Arc::new(Bundle::from_modules([("template.json".to_string(), template_module())]).unwrap())
}

fn session_determinism() -> Outcome {
    let bundles = sample_bundles();
    for (_, b) in &bundles {
        for seed in 0..50u64 {
            let (s1, s2) = (Session::start(b.clone(), seed).unwrap(), Session::start(b.clone(), seed).unwrap());
            for i in 0..b.len() {
                ensure!(s1.permutation(i) == s2.permutation(i), "seed {seed} module {i} permutation differs");
            }
            ensure!(
                serde_json::to_string(&s1.present().unwrap()).unwrap() == serde_json::to_string(&s2.present().unwrap()).unwrap(),
                "seed {seed}: presentation differs"
            );
        }
    }

    let template = template_bundle();
    let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let seeds = 10_000;
    for seed in 0..seeds {
        let s = Session::start(template.clone(), seed).unwrap();
        *counts.entry(s.permutation(0).to_vec()).or_default() += 1;
    }
    ensure!(counts.len() == 6, "only {} permutations seen", counts.len());
    let mut worst: f64 = 0.0;
    for c in counts.values() {
        worst = worst.max((*c as f64 / seeds as f64 - 1.0 / 6.0).abs());
    }
    let fair = worst <= 0.02;
    ensure!(fair, "frequency off by {worst:.4}");

    let mut rng = StdRng::seed_from_u64(7);
    let mut graded = 0;
    for _ in 0..1000 {
        let (_, b) = bundles.choose(&mut rng).unwrap();
        let mut s = Session::start(b.clone(), rng.gen()).unwrap();
        while !s.is_finished() {
            let (_, q) = s.present().unwrap();
            if let Some(q) = q {
                let pos = rng.gen_range(0..q.shuffled_answers.len());
                let truth = b.module(s.cursor()).unwrap().question.as_ref().unwrap().correct_answer().unwrap().to_string();
                let got = s.submit_answer(pos).map_err(|e| e.to_string())?;
                ensure!(got == (q.shuffled_answers[pos] == truth), "grading disagrees with answer text");
                graded += 1;
            }
            s.advance().map_err(|e| e.to_string())?;
        }
        let tally = s.answer_log().iter().filter(|a| a.correct).count();
        ensure!(s.score().correct == tally, "score does not match graded answers");
    }
    Ok(format!("max frequency deviation {worst:.4} over {seeds} seeds, {graded} answers graded by text"))
}

// ---------------------------------------------------------- information hiding

/// JSON keys mentioning correctness anywhere in a document.
fn correctness_keys(v: &Value) -> Vec<String> {
    match v {
        Value::Object(map) => map
            .iter()
            .flat_map(|(k, v)| {
                let mut found = correctness_keys(v);
                if k.to_ascii_lowercase().contains("correct") {
                    found.push(k.clone());
                }
                found
            })
            .collect(),
        Value::Array(a) => a.iter().flat_map(correctness_keys).collect(),
        _ => Vec::new(),
    }
}

fn scan(body: &[u8]) -> Result<(), String> {
    let text = String::from_utf8_lossy(body);
    ensure!(!text.contains("correct_answer"), "body contains correct_answer: {text}");
    let v: Value = serde_json::from_slice(body).map_err(|e| e.to_string())?;
    let keys = correctness_keys(&v);
    ensure!(keys.is_empty(), "body has correctness keys {keys:?}");
    Ok(())
}

/// Same module with the key moved to a different authored answer.
fn with_key(m: &LearningModule, index: usize) -> LearningModule {
    let mut m = m.clone();
    if let Some(q) = &mut m.question {
        q.correct_answer_element = index;
    }
    m
}

fn strip_ids(mut v: Value) -> Value {
    if let Value::Object(map) = &mut v {
        map.remove("session_id");
        map.remove("bundle_id");
    }
    v
}

fn information_hiding(rt: &tokio::runtime::Runtime) -> Outcome {
    let mut scanned = 0;
    for (_, b) in sample_bundles() {
        let mut s = Session::start(b.clone(), 3).unwrap();
        while !s.is_finished() {
            scan(serde_json::to_string(&s.present().unwrap()).unwrap().as_bytes())?;
            scanned += 1;
            if s.present().unwrap().1.is_some() {
                s.submit_answer(0).map_err(|e| e.to_string())?;
            }
            s.advance().map_err(|e| e.to_string())?;
        }
    }
    // Presentation must not depend on which authored answer is the key.
    let base = template_module();
    for seed in 0..200 {
        let shown: Vec<String> = (0..3)
            .map(|k| {
                let b = Arc::new(Bundle::from_modules([("t.json".to_string(), with_key(&base, k))]).unwrap());
                serde_json::to_string(&Session::start(b, seed).unwrap().present().unwrap()).unwrap()
            })
            .collect();
        ensure!(shown[0] == shown[1] && shown[1] == shown[2], "seed {seed}: output depends on the key");
    }

    let gets = rt.block_on(async {
        let app = router(Arc::new(Store::open(ServiceConfig::default()).unwrap()));
        let mut gets = 0;
        for record in common::get(&app, "/api/bundles").await.json.as_array().unwrap().clone() {
            let id = record["id"].as_str().unwrap();
            let r = common::get(&app, &format!("/api/bundles/{id}")).await;
            scan(&r.raw)?;
            let sid = common::post(&app, "/api/sessions", json!({ "bundle_id": id, "seed": 5 })).await.json["session_id"]
                .as_str()
                .unwrap()
                .to_string();
            let url = format!("/api/sessions/{sid}");
            loop {
                let state = common::get(&app, &url).await;
                scan(&state.raw)?;
                gets += 1;
                if state.json["finished"] == true {
                    break;
                }
                if !state.json["question"].is_null() {
                    common::post(&app, &format!("{url}/answer"), json!({ "position": 1 })).await;
                    scan(&common::get(&app, &url).await.raw)?;
                    gets += 1;
                }
                common::post(&app, &format!("{url}/advance"), json!({})).await;
            }
        }
        scan(&common::get(&app, "/api/bundles").await.raw)?;

        let mut states = Vec::new();
        for k in 0..3 {
            let zip = bundle_zip(&[("t.json".into(), with_key(&base, k))]);
            let id = common::call(&app, Method::POST, "/api/bundles", zip).await.json["id"].as_str().unwrap().to_string();
            let created = common::post(&app, "/api/sessions", json!({ "bundle_id": id, "seed": 9 })).await;
            let sid = created.json["session_id"].as_str().unwrap().to_string();
            states.push(strip_ids(common::get(&app, &format!("/api/sessions/{sid}")).await.json));
        }
        ensure!(states[0] == states[1] && states[1] == states[2], "service state depends on the key");
        Ok::<_, String>(gets)
    })?;
    Ok(format!("{scanned} present() outputs and {gets} session GETs clean; output independent of the key"))
}

// ------------------------------------------------------------- end-to-end CLI

fn cli(args: &[&str], dir: &Path, input: &str) -> std::process::Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_warehouse"))
        .args(args)
        .current_dir(dir)
        .env_remove("WAREHOUSE_SEED")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn warehouse");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn end_to_end_cli() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let o = cli(&["gen", "--bundle-dir", "samples"], d, "");
    ensure!(o.status.success(), "gen --bundle-dir failed");
    let zip = "samples/template.zip";
    let bundle = Arc::new(load_bundle(&fs::read(d.join(zip)).unwrap()).map_err(|e| format!("{e:?}"))?.bundle);
    let mut positions = BTreeSet::new();
    for seed in 0..12u64 {
        let (_, q) = Session::start(bundle.clone(), seed).unwrap().present().unwrap();
        let pos = q.unwrap().shuffled_answers.iter().position(|a| a == "2").unwrap();
        positions.insert(pos);
        let keys = format!("{}n", pos + 1);
        let seed_arg = seed.to_string();
        let o = cli(&["play", zip, "--seed", &seed_arg, "--log", "a.jsonl"], d, &keys);
        let out = String::from_utf8_lossy(&o.stdout);
        ensure!(o.status.code() == Some(0), "seed {seed}: exit {:?}", o.status.code());
        ensure!(out.trim_end().ends_with("Score: 1/1"), "seed {seed}: {out}");
        let o = cli(&["play", zip, "--replay", "a.jsonl", "--log", "b.jsonl"], d, "");
        ensure!(o.status.success(), "seed {seed}: replay failed");
        ensure!(String::from_utf8_lossy(&o.stdout).trim_end().ends_with("Score: 1/1"), "seed {seed}: replay score");
        ensure!(fs::read(d.join("a.jsonl")).unwrap() == fs::read(d.join("b.jsonl")).unwrap(), "seed {seed}: logs differ");
    }
    Ok(format!("12 seeds, answer \"2\" shown at positions {positions:?}, replayed logs identical"))
}

// ----------------------------------------------------------- service contract

/// Cursor, score and current answer: the state a client can observe.
fn observable(v: &Value) -> Value {
    json!([v["cursor"], v["score"], v["answered_position"], v["finished"]])
}

/// Final observable state and per-event success after applying `events` in order.
fn reference(bundle: &Arc<Bundle>, seed: u64, events: &[SessionEvent]) -> (Value, Vec<bool>) {
    let mut s = Session::start(bundle.clone(), seed).unwrap();
    let ok: Vec<bool> = events.iter().map(|e| s.apply(*e).is_ok()).collect();
    let score = s.score();
    let state = json!([
        s.cursor(),
        { "points": score.correct, "answered": score.answered, "total": score.total },
        s.answer_for(s.cursor()).map(|a| a.position),
        s.is_finished()
    ]);
    (state, ok)
}

async fn play_through(app: &Router, bundle_id: &str, bundle: &Bundle) -> Result<usize, String> {
    let created = common::post(app, "/api/sessions", json!({ "bundle_id": bundle_id })).await;
    ensure!(created.status == StatusCode::CREATED, "create: {}", created.status);
    let url = format!("/api/sessions/{}", created.json["session_id"].as_str().unwrap());
    let mut answered = 0;
    loop {
        let state = common::get(app, &url).await.json;
        if state["finished"] == true {
            ensure!(state["score"]["points"] == answered, "final score {}", state["score"]);
            break;
        }
        if !state["question"].is_null() {
            let module = bundle.module(state["cursor"].as_u64().unwrap() as usize).unwrap();
            let truth = module.question.as_ref().unwrap().correct_answer().unwrap();
            let pos = state["question"]["shuffled_answers"].as_array().unwrap().iter().position(|a| a == truth).unwrap();
            let r = common::post(app, &format!("{url}/answer"), json!({ "position": pos })).await;
            ensure!(r.json["correct"] == true, "correct answer graded wrong");
            let again = common::post(app, &format!("{url}/answer"), json!({ "position": pos })).await;
            ensure!(again.status == StatusCode::CONFLICT, "repeat answer: {}", again.status);
            answered += 1;
        }
        let r = common::post(app, &format!("{url}/advance"), json!({})).await;
        ensure!(r.status == StatusCode::OK, "advance: {}", r.status);
    }
    let r = common::post(app, &format!("{url}/advance"), json!({})).await;
    ensure!(r.status == StatusCode::CONFLICT, "advance past end: {}", r.status);
    Ok(answered)
}

fn service_contract(rt: &tokio::runtime::Runtime) -> Outcome {
    rt.block_on(async {
        let app = router(Arc::new(Store::open(ServiceConfig::default()).unwrap()));
        let set = samples().into_iter().find(|s| s.id == "graph-theory").unwrap();
        let zip = bundle_zip(&set.modules);
        let up = common::call(&app, Method::POST, "/api/bundles", zip).await;
        ensure!(up.status == StatusCode::CREATED, "upload: {}", up.status);
        let id = up.json["id"].as_str().unwrap().to_string();
        let bundle = Bundle::from_modules(set.modules).unwrap();
        let answered = play_through(&app, &id, &bundle).await?;

        let mut bad: Value = serde_json::from_str(&serialize_module(&template_module())).unwrap();
        bad["traffic_matrix"][0][0] = json!(-1);
        let bad = write_zip([("bad.json", bad.to_string().as_bytes())]).unwrap();
        let r = common::call(&app, Method::POST, "/api/bundles", bad).await;
        ensure!(r.status == StatusCode::UNPROCESSABLE_ENTITY, "bad upload: {}", r.status);
        ensure!(r.json["diagnostics"][0]["file"] == "bad.json", "422 without file");
        ensure!(common::get(&app, "/api/sessions/0123").await.status == StatusCode::NOT_FOUND, "unknown session");
        let r = common::post(&app, "/api/sessions", json!({ "bundle_id": "missing" })).await;
        ensure!(r.status == StatusCode::NOT_FOUND, "unknown bundle: {}", r.status);

        // Concurrent answer + advance must land in a serially reachable state.
        let training = samples().into_iter().next().unwrap();
        let tb = Arc::new(Bundle::from_modules(training.modules).unwrap());
        let mut orders = [0usize; 2];
        for trial in 0..200u64 {
            let created = common::post(&app, "/api/sessions", json!({ "bundle_id": "training", "seed": trial })).await;
            let url = format!("/api/sessions/{}", created.json["session_id"].as_str().unwrap());
            let pos = (trial % 3) as usize;
            let spawn_answer = {
                let (app, url) = (app.clone(), url.clone());
                move || tokio::spawn(async move { common::post(&app, &format!("{url}/answer"), json!({ "position": pos })).await })
            };
            let spawn_advance = {
                let (app, url) = (app.clone(), url.clone());
                move || tokio::spawn(async move { common::post(&app, &format!("{url}/advance"), json!({})).await })
            };
            let (answer, advance) = if trial % 2 == 0 {
                let a = spawn_answer();
                (a, spawn_advance())
            } else {
                let b = spawn_advance();
                (spawn_answer(), b)
            };
            let (ra, rb) = (answer.await.unwrap(), advance.await.unwrap());
            let got = (
                observable(&common::get(&app, &url).await.json),
                (ra.status == StatusCode::OK, rb.status == StatusCode::OK),
            );
            let answer_ev = SessionEvent::Answer { position: pos };
            let (first, ok1) = reference(&tb, trial, &[answer_ev, SessionEvent::Advance]);
            let (second, ok2) = reference(&tb, trial, &[SessionEvent::Advance, answer_ev]);
            let serial = [(first, (ok1[0], ok1[1])), (second, (ok2[1], ok2[0]))];
            match serial.iter().position(|s| *s == got) {
                Some(k) => orders[k] += 1,
                None => return Err(format!("trial {trial}: {got:?} matches no serial order")),
            }
        }
        Ok(format!(
            "{answered} questions answered to completion, 404/409/422 paths ok, 200 concurrent trials serial ({} answer-first, {} advance-first)",
            orders[0], orders[1]
        ))
    })
}

// ---------------------------------------------------------------------- main

fn main() {
    let rt = tokio::runtime::Builder::new_multi_thread().worker_threads(4).enable_all().build().unwrap();
    type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let criteria: Vec<(&str, Option<Duration>, Check)> = vec![
        ("golden file fidelity", Some(Duration::from_secs(1)), Box::new(golden_file)),
        ("round trip of 1000 modules", Some(Duration::from_secs(10)), Box::new(round_trip)),
        ("validator coverage", None, Box::new(validator_coverage)),
        ("topology census", Some(Duration::from_secs(30)), Box::new(topology_census)),
        ("detector oracle", None, Box::new(detector_oracle)),
        ("session determinism and fairness", None, Box::new(session_determinism)),
        ("information hiding", None, Box::new(|| information_hiding(&rt))),
        ("end-to-end CLI", None, Box::new(end_to_end_cli)),
        ("service contract", None, Box::new(|| service_contract(&rt))),
    ];
    let mut failed = 0;
    for (name, limit, check) in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let took = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(l)) if took > *l => Err(format!("took {took:.2?}, limit {l:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{took:.2?}]"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} [{took:.2?}]");
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
