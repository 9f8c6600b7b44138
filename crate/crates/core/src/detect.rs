//! Structure detection on the nonzero support of a traffic matrix.
//!
//! Detectors only look at which cells are nonzero, never at magnitudes.
//!
//! - An isolated link is a cell `(i, j)`, `i != j`, where neither `i` nor `j`
//!   exchanges traffic with any third node (self loops allowed).
//! - A supernode has at least `threshold` distinct partners. It is internal
//!   when at least half of its partner cells are blue, external otherwise.
//! - A single link is any other off-diagonal cell not claimed by a supernode.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::matrix::{ColorMatrix, Palette, TrafficMatrix};
use crate::topology::{topology_edges, Topology, TopologyKind, TopologySpec};

pub const DEFAULT_SUPERNODE_THRESHOLD: usize = 4;

/// Distinct partners of `node` (excluding itself) in either direction.
pub fn partners(m: &TrafficMatrix, node: usize) -> BTreeSet<usize> {
    (0..m.n())
        .filter(|&j| j != node && (m.get(node, j) > 0 || m.get(j, node) > 0))
        .collect()
}

/// Isolated-link cells in row-major order.
pub fn detect_isolated_links(m: &TrafficMatrix) -> Vec<(usize, usize)> {
    let partner_sets: Vec<BTreeSet<usize>> = (0..m.n()).map(|v| partners(m, v)).collect();
    m.nonzero()
        .filter(|&(i, j, _)| i != j && partner_sets[i].len() == 1 && partner_sets[j].len() == 1)
        .map(|(i, j, _)| (i, j))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SupernodeClass {
    Internal,
    External,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Supernode {
    pub node: usize,
    pub class: SupernodeClass,
    pub partners: usize,
}

/// Nodes with at least `threshold` distinct partners, in index order.
/// Thresholds below 2 are treated as 2.
pub fn detect_supernodes(m: &TrafficMatrix, c: &ColorMatrix, threshold: usize) -> Vec<Supernode> {
    let threshold = threshold.max(2);
    (0..m.n())
        .filter_map(|k| {
            let count = partners(m, k).len();
            if count < threshold {
                return None;
            }
            let cells = partner_cells(m, k);
            let blue = cells
                .iter()
                .filter(|&&(i, j)| Palette::from_code(c.code(i, j)) == Palette::Blue)
                .count();
            let class = if 2 * blue >= cells.len() {
                SupernodeClass::Internal
            } else {
                SupernodeClass::External
            };
            Some(Supernode {
                node: k,
                class,
                partners: count,
            })
        })
        .collect()
}

/// Nonzero off-diagonal cells in node `k`'s row and column.
fn partner_cells(m: &TrafficMatrix, k: usize) -> Vec<(usize, usize)> {
    let mut cells = Vec::new();
    for j in 0..m.n() {
        if j == k {
            continue;
        }
        if m.get(k, j) > 0 {
            cells.push((k, j));
        }
        if m.get(j, k) > 0 {
            cells.push((j, k));
        }
    }
    cells
}

/// Parameters recovered by [`match_topology`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Star { hub: usize, leaves: Vec<usize>, symmetric: bool },
    Clique { vertices: Vec<usize> },
    Bipartite { a: Vec<usize>, b: Vec<usize>, symmetric: bool },
    Tree { root: usize, branching: usize, symmetric: bool },
    /// Vertices in cycle order starting from the smallest.
    Ring { order: Vec<usize>, symmetric: bool },
    Mesh { rows: usize, cols: usize, symmetric: bool },
    ToroidalMesh { rows: usize, cols: usize, symmetric: bool },
    SelfLoop { vertices: Vec<usize> },
    Triangle { vertices: [usize; 3], symmetric: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "lowercase")]
pub enum TopologyMatch {
    Exact { witness: Witness },
    No,
}

impl TopologyMatch {
    pub fn is_exact(&self) -> bool {
        matches!(self, TopologyMatch::Exact { .. })
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            TopologyMatch::Exact { witness } => Some(witness),
            TopologyMatch::No => None,
        }
    }
}

/// Boolean view of the support with per-node degrees.
struct Support {
    n: usize,
    adj: Vec<bool>,
    vertices: Vec<usize>,
    edges: usize,
    has_loops: bool,
    symmetric: bool,
}

impl Support {
    fn new(m: &TrafficMatrix) -> Self {
        let n = m.n();
        let mut adj = vec![false; n * n];
        let mut touched = vec![false; n];
        let mut edges = 0;
        let mut has_loops = false;
        for (i, j, _) in m.nonzero() {
            adj[i * n + j] = true;
            touched[i] = true;
            touched[j] = true;
            edges += 1;
            has_loops |= i == j;
        }
        let symmetric = (0..n).all(|i| (0..n).all(|j| adj[i * n + j] == adj[j * n + i]));
        Support {
            n,
            adj,
            vertices: (0..n).filter(|&v| touched[v]).collect(),
            edges,
            has_loops,
            symmetric,
        }
    }

    fn has(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j]
    }

    fn out(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.has(v, j))
    }

    fn out_degree(&self, v: usize) -> usize {
        self.out(v).count()
    }

    fn in_degree(&self, v: usize) -> usize {
        (0..self.n).filter(|&i| self.has(i, v)).count()
    }

    /// Undirected reachability over the support from `start`.
    fn connected_from(&self, start: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut order = Vec::new();
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for (w, seen_w) in seen.iter_mut().enumerate() {
                if !*seen_w && (self.has(v, w) || self.has(w, v)) {
                    *seen_w = true;
                    queue.push_back(w);
                }
            }
        }
        order
    }

    fn equals_edges(&self, edges: &[(usize, usize)], symmetric: bool) -> bool {
        let mut want = vec![false; self.n * self.n];
        for &(i, j) in edges {
            if i >= self.n || j >= self.n {
                return false;
            }
            want[i * self.n + j] = true;
            if symmetric {
                want[j * self.n + i] = true;
            }
        }
        want == self.adj
    }
}

/// Decides whether the nonzero support, ignoring untouched nodes, is an
/// instance of `kind`. Ring, triangle, star, clique, bipartite and tree are
/// matched up to relabeling; mesh kinds use the row-major layout on the
/// first `rows*cols` nodes.
pub fn match_topology(m: &TrafficMatrix, kind: TopologyKind) -> TopologyMatch {
    let s = Support::new(m);
    let witness = match kind {
        TopologyKind::SelfLoop => match_self_loop(&s),
        _ if s.has_loops || s.vertices.len() < 2 => None,
        TopologyKind::Ring => match_ring(&s),
        TopologyKind::Triangle => match_ring(&s).and_then(|w| match w {
            Witness::Ring { order, symmetric } if order.len() == 3 => Some(Witness::Triangle {
                vertices: [order[0], order[1], order[2]],
                symmetric,
            }),
            _ => None,
        }),
        TopologyKind::Clique => {
            let k = s.vertices.len();
            (s.edges == k * (k - 1)).then(|| Witness::Clique {
                vertices: s.vertices.clone(),
            })
        }
        TopologyKind::Star => match_star(&s),
        TopologyKind::Bipartite => match_bipartite(&s),
        TopologyKind::Tree => match_tree(&s),
        TopologyKind::Mesh => match_grid(&s, false),
        TopologyKind::ToroidalMesh => match_grid(&s, true),
    };
    match witness {
        Some(witness) => TopologyMatch::Exact { witness },
        None => TopologyMatch::No,
    }
}

/// Every catalogue kind the matrix matches exactly.
pub fn matching_kinds(m: &TrafficMatrix) -> Vec<TopologyKind> {
    TopologyKind::ALL
        .into_iter()
        .filter(|&k| match_topology(m, k).is_exact())
        .collect()
}

fn match_self_loop(s: &Support) -> Option<Witness> {
    let all_diagonal = s.vertices.iter().all(|&v| s.has(v, v) && s.out_degree(v) == 1);
    (s.edges > 0 && all_diagonal && s.edges == s.vertices.len()).then(|| Witness::SelfLoop {
        vertices: s.vertices.clone(),
    })
}

fn match_ring(s: &Support) -> Option<Witness> {
    let k = s.vertices.len();
    if k < 3 {
        return None;
    }
    let start = s.vertices[0];
    let symmetric = s.symmetric;
    let per_node = if symmetric { 2 } else { 1 };
    if s.edges != per_node * k
        || !s
            .vertices
            .iter()
            .all(|&v| s.out_degree(v) == per_node && s.in_degree(v) == per_node)
    {
        return None;
    }
    // Walk the cycle; in the symmetric case never step straight back.
    let mut order = vec![start];
    let mut prev = usize::MAX;
    let mut cur = start;
    loop {
        let next = if symmetric {
            let mut nb = s.out(cur).filter(|&w| w != prev);
            // From the start pick the smaller neighbour for a canonical order.
            nb.next()?
        } else {
            s.out(cur).next()?
        };
        if next == start {
            break;
        }
        if order.contains(&next) {
            return None;
        }
        order.push(next);
        prev = cur;
        cur = next;
    }
    (order.len() == k).then_some(Witness::Ring { order, symmetric })
}

fn match_star(s: &Support) -> Option<Witness> {
    let k = s.vertices.len();
    let symmetric = s.symmetric;
    let expected = if symmetric { 2 * (k - 1) } else { k - 1 };
    if s.edges != expected {
        return None;
    }
    let hub = s
        .vertices
        .iter()
        .copied()
        .find(|&h| s.out_degree(h) == k - 1 && s.vertices.iter().all(|&v| v == h || s.has(h, v)))?;
    let leaves: Vec<usize> = s.vertices.iter().copied().filter(|&v| v != hub).collect();
    let ok = leaves.iter().all(|&v| {
        if symmetric {
            s.out_degree(v) == 1 && s.has(v, hub)
        } else {
            s.out_degree(v) == 0
        }
    });
    ok.then_some(Witness::Star {
        hub,
        leaves,
        symmetric,
    })
}

fn match_bipartite(s: &Support) -> Option<Witness> {
    let symmetric = s.symmetric;
    let (a, b): (Vec<usize>, Vec<usize>) = if symmetric {
        // Two-colour the connected support.
        let reach = s.connected_from(s.vertices[0]);
        if reach.len() != s.vertices.len() {
            return None;
        }
        let mut side = vec![None; s.n];
        side[s.vertices[0]] = Some(false);
        for &v in &reach {
            let sv = side[v]?;
            for w in s.out(v) {
                match side[w] {
                    None => side[w] = Some(!sv),
                    Some(sw) if sw == sv => return None,
                    _ => {}
                }
            }
        }
        s.vertices.iter().partition(|&&v| side[v] == Some(false))
    } else {
        let a: Vec<usize> = s.vertices.iter().copied().filter(|&v| s.out_degree(v) > 0).collect();
        let b: Vec<usize> = s.vertices.iter().copied().filter(|&v| s.in_degree(v) > 0).collect();
        if a.iter().any(|v| b.contains(v)) {
            return None;
        }
        (a, b)
    };
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let factor = if symmetric { 2 } else { 1 };
    let complete = a.iter().all(|&x| b.iter().all(|&y| s.has(x, y)));
    (complete && s.edges == factor * a.len() * b.len()).then_some(Witness::Bipartite {
        a,
        b,
        symmetric,
    })
}

fn match_tree(s: &Support) -> Option<Witness> {
    let k = s.vertices.len();
    let factor = if s.symmetric { 2 } else { 1 };
    if s.edges != factor * (k - 1) {
        return None;
    }
    if s.symmetric {
        return s.vertices.iter().find_map(|&root| complete_tree_from(s, root));
    }
    let roots: Vec<usize> = s.vertices.iter().copied().filter(|&v| s.in_degree(v) == 0).collect();
    if roots.len() != 1 || s.vertices.iter().any(|&v| s.in_degree(v) > 1) {
        return None;
    }
    complete_tree_from(s, roots[0])
}

/// Checks that the support, hung from `root`, is a complete k-ary tree up to
/// the order of siblings: every level full except the deepest parents, of
/// which at most one has a partial brood.
fn complete_tree_from(s: &Support, root: usize) -> Option<Witness> {
    let mut seen = vec![false; s.n];
    seen[root] = true;
    let mut level = vec![root];
    let mut broods: Vec<Vec<usize>> = Vec::new();
    let mut visited = 0;
    while !level.is_empty() {
        let mut next = Vec::new();
        let mut counts = Vec::new();
        for &v in &level {
            visited += 1;
            let mut children = 0;
            for w in s.out(v) {
                if !seen[w] {
                    seen[w] = true;
                    children += 1;
                    next.push(w);
                }
            }
            counts.push(children);
        }
        broods.push(counts);
        level = next;
    }
    if visited != s.vertices.len() {
        return None;
    }
    let branching = broods[0][0];
    let last = broods.iter().rposition(|c| c.iter().any(|&x| x > 0))?;
    let full = broods[..last].iter().all(|c| c.iter().all(|&x| x == branching));
    let partial = broods[last].iter().filter(|&&x| x != 0 && x != branching).count();
    let bounded = broods[last].iter().all(|&x| x <= branching);
    (full && bounded && partial <= 1).then_some(Witness::Tree {
        root,
        branching,
        symmetric: s.symmetric,
    })
}

fn match_grid(s: &Support, toroidal: bool) -> Option<Witness> {
    let span = s.vertices.last()? + 1;
    if s.vertices.len() != span {
        return None;
    }
    for rows in 1..=span {
        if span % rows != 0 {
            continue;
        }
        let cols = span / rows;
        let topology = if toroidal {
            Topology::ToroidalMesh { rows, cols }
        } else {
            Topology::Mesh { rows, cols }
        };
        let Ok(edges) = topology_edges(&TopologySpec::new(topology, s.n)) else {
            continue;
        };
        for symmetric in [false, true] {
            if s.equals_edges(&edges, symmetric) {
                return Some(if toroidal {
                    Witness::ToroidalMesh { rows, cols, symmetric }
                } else {
                    Witness::Mesh { rows, cols, symmetric }
                });
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingKind {
    IsolatedLink,
    SingleLink,
    InternalSupernode,
    ExternalSupernode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    /// The finding owns every cell its definition covers.
    Exact,
    /// Some of its cells were already claimed by an earlier finding.
    Partial,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub kind: FindingKind,
    pub nodes: Vec<usize>,
    pub confidence: Confidence,
    /// Nonzero cells attributed to this finding.
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub findings: Vec<Finding>,
    /// Catalogue shapes the whole support matches exactly.
    pub topologies: Vec<TopologyKind>,
    /// Nonzero cells explained by no finding.
    pub residual: usize,
}

impl DetectionReport {
    pub fn attributed(&self) -> usize {
        self.findings.iter().map(|f| f.cells).sum::<usize>() + self.residual
    }
}

/// Full taxonomy: isolated links first, then supernodes (most partners
/// first), then single links. Every nonzero cell is attributed at most once.
pub fn analyze(m: &TrafficMatrix, c: &ColorMatrix, threshold: usize) -> DetectionReport {
    let n = m.n();
    let mut claimed = vec![false; n * n];
    let mut findings = Vec::new();
    let claim = |cells: &[(usize, usize)], claimed: &mut Vec<bool>| -> (usize, bool) {
        let mut got = 0;
        let mut all = true;
        for &(i, j) in cells {
            if m.get(i, j) == 0 {
                continue;
            }
            if claimed[i * n + j] {
                all = false;
            } else {
                claimed[i * n + j] = true;
                got += 1;
            }
        }
        (got, all)
    };

    for (i, j) in detect_isolated_links(m) {
        if i > j {
            continue;
        }
        let (cells, _) = claim(&[(i, j), (j, i), (i, i), (j, j)], &mut claimed);
        findings.push(Finding {
            kind: FindingKind::IsolatedLink,
            nodes: vec![i, j],
            confidence: Confidence::Exact,
            cells,
        });
    }

    let mut supers = detect_supernodes(m, c, threshold);
    supers.sort_by(|a, b| b.partners.cmp(&a.partners).then(a.node.cmp(&b.node)));
    for sn in supers {
        let mut cells = partner_cells(m, sn.node);
        cells.push((sn.node, sn.node));
        let (count, all) = claim(&cells, &mut claimed);
        let mut nodes = vec![sn.node];
        nodes.extend(partners(m, sn.node));
        findings.push(Finding {
            kind: match sn.class {
                SupernodeClass::Internal => FindingKind::InternalSupernode,
                SupernodeClass::External => FindingKind::ExternalSupernode,
            },
            nodes,
            confidence: if all { Confidence::Exact } else { Confidence::Partial },
            cells: count,
        });
    }

    for (i, j, _) in m.nonzero() {
        if i != j && !claimed[i * n + j] {
            claimed[i * n + j] = true;
            findings.push(Finding {
                kind: FindingKind::SingleLink,
                nodes: vec![i, j],
                confidence: Confidence::Exact,
                cells: 1,
            });
        }
    }
    let residual = m.nonzero().filter(|&(i, j, _)| !claimed[i * n + j]).count();
    DetectionReport {
        findings,
        topologies: matching_kinds(m),
        residual,
    }
}
