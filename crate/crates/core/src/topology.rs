//! Graph-theory patterns as traffic matrices.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::matrix::TrafficMatrix;

/// Catalogue of graph shapes without their parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    Star,
    Clique,
    Bipartite,
    Tree,
    Ring,
    Mesh,
    ToroidalMesh,
    SelfLoop,
    Triangle,
}

impl TopologyKind {
    pub const ALL: [TopologyKind; 9] = [
        TopologyKind::Star,
        TopologyKind::Clique,
        TopologyKind::Bipartite,
        TopologyKind::Tree,
        TopologyKind::Ring,
        TopologyKind::Mesh,
        TopologyKind::ToroidalMesh,
        TopologyKind::SelfLoop,
        TopologyKind::Triangle,
    ];

    /// Kebab-case identifier used on the command line.
    pub fn slug(self) -> &'static str {
        match self {
            TopologyKind::Star => "star",
            TopologyKind::Clique => "clique",
            TopologyKind::Bipartite => "bipartite",
            TopologyKind::Tree => "tree",
            TopologyKind::Ring => "ring",
            TopologyKind::Mesh => "mesh",
            TopologyKind::ToroidalMesh => "toroidal-mesh",
            TopologyKind::SelfLoop => "self-loop",
            TopologyKind::Triangle => "triangle",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            TopologyKind::Star => "Star",
            TopologyKind::Clique => "Clique",
            TopologyKind::Bipartite => "Bipartite",
            TopologyKind::Tree => "Tree",
            TopologyKind::Ring => "Ring",
            TopologyKind::Mesh => "Mesh",
            TopologyKind::ToroidalMesh => "Toroidal Mesh",
            TopologyKind::SelfLoop => "Self Loop",
            TopologyKind::Triangle => "Triangle",
        }
    }

    pub fn from_slug(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.slug() == s || k.slug().replace('-', "_") == s)
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

/// Shape plus its parameters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Topology {
    Star { hub: usize },
    Clique,
    /// Part A is nodes `0..a`, part B is `a..a+b`.
    Bipartite { a: usize, b: usize },
    /// Complete k-ary tree over all nodes, filled breadth first.
    Tree { branching: usize },
    Ring,
    /// `rows`×`cols` grid on the first `rows*cols` nodes, row-major.
    Mesh { rows: usize, cols: usize },
    ToroidalMesh { rows: usize, cols: usize },
    SelfLoop { vertices: Vec<usize> },
    /// Directed 3-cycle `a -> b -> c -> a`.
    Triangle { vertices: [usize; 3] },
}

impl Topology {
    pub fn kind(&self) -> TopologyKind {
        match self {
            Topology::Star { .. } => TopologyKind::Star,
            Topology::Clique => TopologyKind::Clique,
            Topology::Bipartite { .. } => TopologyKind::Bipartite,
            Topology::Tree { .. } => TopologyKind::Tree,
            Topology::Ring => TopologyKind::Ring,
            Topology::Mesh { .. } => TopologyKind::Mesh,
            Topology::ToroidalMesh { .. } => TopologyKind::ToroidalMesh,
            Topology::SelfLoop { .. } => TopologyKind::SelfLoop,
            Topology::Triangle { .. } => TopologyKind::Triangle,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TopologySpec {
    pub topology: Topology,
    pub n: usize,
    /// Packets carried by every edge.
    pub weight: u64,
    /// Mirror every edge `(i, j)` to `(j, i)`.
    pub symmetric: bool,
}

impl TopologySpec {
    pub fn new(topology: Topology, n: usize) -> Self {
        TopologySpec {
            topology,
            n,
            weight: 1,
            symmetric: false,
        }
    }

    pub fn symmetric(mut self, symmetric: bool) -> Self {
        self.symmetric = symmetric;
        self
    }

    pub fn weight(mut self, weight: u64) -> Self {
        self.weight = weight;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TopologyError {
    #[error("weight must be at least 1")]
    ZeroWeight,
    #[error("{what} needs at least {min} nodes, got {n}")]
    TooFewNodes { what: &'static str, min: usize, n: usize },
    #[error("parameter {what} = {value} does not fit in {n} nodes")]
    OutOfRange { what: &'static str, value: usize, n: usize },
    #[error("invalid parameter: {0}")]
    Invalid(&'static str),
}

/// Directed edge list for a topology, before mirroring.
pub fn topology_edges(spec: &TopologySpec) -> Result<Vec<(usize, usize)>, TopologyError> {
    let n = spec.n;
    if spec.weight == 0 {
        return Err(TopologyError::ZeroWeight);
    }
    let need = |what, min| {
        if n < min {
            Err(TopologyError::TooFewNodes { what, min, n })
        } else {
            Ok(())
        }
    };
    let fits = |what, value: usize| {
        if value >= n {
            Err(TopologyError::OutOfRange { what, value, n })
        } else {
            Ok(())
        }
    };
    let mut edges = Vec::new();
    match &spec.topology {
        Topology::Star { hub } => {
            need("star", 2)?;
            fits("hub", *hub)?;
            edges.extend((0..n).filter(|v| v != hub).map(|v| (*hub, v)));
        }
        Topology::Clique => {
            need("clique", 2)?;
            for i in 0..n {
                edges.extend((0..n).filter(|&j| j != i).map(|j| (i, j)));
            }
        }
        Topology::Bipartite { a, b } => {
            if *a == 0 || *b == 0 {
                return Err(TopologyError::Invalid("bipartite parts must be non-empty"));
            }
            if a + b > n {
                return Err(TopologyError::OutOfRange { what: "a+b", value: a + b, n });
            }
            for i in 0..*a {
                edges.extend((*a..a + b).map(|j| (i, j)));
            }
        }
        Topology::Tree { branching } => {
            need("tree", 2)?;
            if *branching == 0 {
                return Err(TopologyError::Invalid("tree branching factor must be at least 1"));
            }
            edges.extend((1..n).map(|child| ((child - 1) / branching, child)));
        }
        Topology::Ring => {
            need("ring", 3)?;
            edges.extend((0..n).map(|i| (i, (i + 1) % n)));
        }
        Topology::Mesh { rows, cols } => {
            let (p, q) = (*rows, *cols);
            if p == 0 || q == 0 || p * q < 2 {
                return Err(TopologyError::Invalid("mesh needs at least two grid nodes"));
            }
            if p * q > n {
                return Err(TopologyError::OutOfRange { what: "rows*cols", value: p * q, n });
            }
            for r in 0..p {
                for c in 0..q {
                    let v = r * q + c;
                    if c + 1 < q {
                        edges.push((v, v + 1));
                    }
                    if r + 1 < p {
                        edges.push((v, v + q));
                    }
                }
            }
        }
        Topology::ToroidalMesh { rows, cols } => {
            let (p, q) = (*rows, *cols);
            if p < 3 || q < 3 {
                return Err(TopologyError::Invalid("toroidal mesh needs at least 3 rows and 3 columns"));
            }
            if p * q > n {
                return Err(TopologyError::OutOfRange { what: "rows*cols", value: p * q, n });
            }
            for r in 0..p {
                for c in 0..q {
                    let v = r * q + c;
                    edges.push((v, r * q + (c + 1) % q));
                    edges.push((v, ((r + 1) % p) * q + c));
                }
            }
        }
        Topology::SelfLoop { vertices } => {
            if vertices.is_empty() {
                return Err(TopologyError::Invalid("self loop needs at least one vertex"));
            }
            for &v in vertices {
                fits("vertex", v)?;
                edges.push((v, v));
            }
        }
        Topology::Triangle { vertices: [a, b, c] } => {
            need("triangle", 3)?;
            for v in [*a, *b, *c] {
                fits("vertex", v)?;
            }
            if a == b || b == c || a == c {
                return Err(TopologyError::Invalid("triangle vertices must be distinct"));
            }
            edges.extend([(*a, *b), (*b, *c), (*c, *a)]);
        }
    }
    Ok(edges)
}

/// Builds the traffic matrix: every edge carries exactly `weight` packets,
/// every other cell is zero.
pub fn gen_topology(spec: &TopologySpec) -> Result<TrafficMatrix, TopologyError> {
    let mut m = TrafficMatrix::zeros(spec.n);
    for (i, j) in topology_edges(spec)? {
        m.set(i, j, spec.weight);
        if spec.symmetric {
            m.set(j, i, spec.weight);
        }
    }
    Ok(m)
}
