//! Traffic and color matrices.
//!
//! Orientation is fixed everywhere in this crate: row = source, column =
//! destination. Entry `(i, j)` counts packets sent from node `i` to node `j`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Errors from matrix construction and cell lookups.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatrixError {
    #[error("matrix must be square: row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("label {label:?} is ambiguous, it appears at indices {indices:?}")]
    AmbiguousLabel { label: String, indices: Vec<usize> },
}

impl MatrixError {
    /// Stable machine identifier.
    pub fn code(&self) -> &'static str {
        match self {
            MatrixError::NotSquare { .. } => "NOT_SQUARE",
            MatrixError::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            MatrixError::IndexOutOfRange { .. } => "INDEX_OUT_OF_RANGE",
            MatrixError::UnknownLabel(_) => "UNKNOWN_LABEL",
            MatrixError::AmbiguousLabel { .. } => "AMBIGUOUS_LABEL",
        }
    }
}

/// A node given either by position or by axis label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRef<'a> {
    Index(usize),
    Label(&'a str),
}

impl From<usize> for NodeRef<'_> {
    fn from(i: usize) -> Self {
        NodeRef::Index(i)
    }
}

impl<'a> From<&'a str> for NodeRef<'a> {
    fn from(s: &'a str) -> Self {
        NodeRef::Label(s)
    }
}

/// The single label list shared by both axes.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AxisLabels(pub Vec<String>);

impl AxisLabels {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Self {
        AxisLabels(labels.into_iter().map(Into::into).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&str> {
        self.0.get(index).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    /// Resolves a node reference to an index. Labels match exactly; a label
    /// that appears more than once is rejected rather than guessed.
    pub fn resolve(&self, node: NodeRef<'_>) -> Result<usize, MatrixError> {
        match node {
            NodeRef::Index(i) if i < self.len() => Ok(i),
            NodeRef::Index(i) => Err(MatrixError::IndexOutOfRange {
                index: i,
                n: self.len(),
            }),
            NodeRef::Label(label) => {
                let indices: Vec<usize> = self
                    .0
                    .iter()
                    .enumerate()
                    .filter(|(_, l)| l.as_str() == label)
                    .map(|(i, _)| i)
                    .collect();
                match indices.len() {
                    0 => Err(MatrixError::UnknownLabel(label.into())),
                    1 => Ok(indices[0]),
                    _ => Err(MatrixError::AmbiguousLabel {
                        label: label.into(),
                        indices,
                    }),
                }
            }
        }
    }

    /// Labels occurring more than once, each reported once in first-seen order.
    pub fn duplicates(&self) -> Vec<&str> {
        let mut dups: Vec<&str> = Vec::new();
        for (i, l) in self.0.iter().enumerate() {
            if self.0[..i].contains(l) && !dups.contains(&l.as_str()) {
                dups.push(l);
            }
        }
        dups
    }
}

/// Square matrix of packet counts.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TrafficMatrix {
    n: usize,
    cells: Vec<u64>,
}

impl TrafficMatrix {
    pub fn zeros(n: usize) -> Self {
        TrafficMatrix {
            n,
            cells: alloc::vec![0; n * n],
        }
    }

    pub fn from_rows(rows: Vec<Vec<u64>>) -> Result<Self, MatrixError> {
        let n = rows.len();
        let mut cells = Vec::with_capacity(n * n);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != n {
                return Err(MatrixError::NotSquare {
                    row,
                    len: r.len(),
                    n,
                });
            }
            cells.extend(r);
        }
        Ok(TrafficMatrix { n, cells })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Packets from `src` to `dst`. Panics when out of range.
    pub fn get(&self, src: usize, dst: usize) -> u64 {
        assert!(src < self.n && dst < self.n, "cell index out of range");
        self.cells[src * self.n + dst]
    }

    pub fn set(&mut self, src: usize, dst: usize, packets: u64) {
        assert!(src < self.n && dst < self.n, "cell index out of range");
        self.cells[src * self.n + dst] = packets;
    }

    pub fn add(&mut self, src: usize, dst: usize, packets: u64) {
        assert!(src < self.n && dst < self.n, "cell index out of range");
        let c = &mut self.cells[src * self.n + dst];
        *c = c.saturating_add(packets);
    }

    pub fn try_get(&self, src: usize, dst: usize) -> Result<u64, MatrixError> {
        for index in [src, dst] {
            if index >= self.n {
                return Err(MatrixError::IndexOutOfRange { index, n: self.n });
            }
        }
        Ok(self.get(src, dst))
    }

    /// Labeled cell lookup, e.g. "how many packets did WS1 send to ADV4".
    pub fn cell(
        &self,
        labels: &AxisLabels,
        src: NodeRef<'_>,
        dst: NodeRef<'_>,
    ) -> Result<u64, MatrixError> {
        self.check_labels(labels)?;
        let (s, d) = (labels.resolve(src)?, labels.resolve(dst)?);
        self.try_get(s, d)
    }

    /// All packets sent by `src`.
    pub fn row_total(&self, labels: &AxisLabels, src: NodeRef<'_>) -> Result<u64, MatrixError> {
        self.check_labels(labels)?;
        let s = labels.resolve(src)?;
        Ok(self.row(s).iter().sum())
    }

    /// All packets received by `dst`.
    pub fn col_total(&self, labels: &AxisLabels, dst: NodeRef<'_>) -> Result<u64, MatrixError> {
        self.check_labels(labels)?;
        let d = labels.resolve(dst)?;
        Ok((0..self.n).map(|s| self.get(s, d)).sum())
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().sum()
    }

    pub fn row(&self, src: usize) -> &[u64] {
        &self.cells[src * self.n..(src + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.cells.chunks(self.n.max(1)).take(self.n)
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        self.rows().map(<[u64]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = TrafficMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Nonzero cells in row-major order.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0)
            .map(move |(k, &v)| (k / self.n, k % self.n, v))
    }

    pub fn nonzero_count(&self) -> usize {
        self.cells.iter().filter(|&&v| v > 0).count()
    }

    pub fn max_cell(&self) -> u64 {
        self.cells.iter().copied().max().unwrap_or(0)
    }

    fn check_labels(&self, labels: &AxisLabels) -> Result<(), MatrixError> {
        if labels.len() != self.n {
            return Err(MatrixError::DimensionMismatch {
                left: self.n,
                right: labels.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Debug for TrafficMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl Serialize for TrafficMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.rows())
    }
}

impl<'de> Deserialize<'de> for TrafficMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<u64>>::deserialize(d)?;
        TrafficMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// Display palette for cell color codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Palette {
    /// Code 0, neutral space.
    Grey,
    /// Code 1, internal networks.
    Blue,
    /// Code 2, adversarial networks.
    Red,
    /// Any other code.
    Black,
}

impl Palette {
    pub const ALL: [Palette; 4] = [Palette::Grey, Palette::Blue, Palette::Red, Palette::Black];

    pub fn from_code(code: i64) -> Palette {
        match code {
            0 => Palette::Grey,
            1 => Palette::Blue,
            2 => Palette::Red,
            _ => Palette::Black,
        }
    }

    /// Canonical code; black has no canonical code and maps to 3.
    pub fn code(self) -> i64 {
        match self {
            Palette::Grey => 0,
            Palette::Blue => 1,
            Palette::Red => 2,
            Palette::Black => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Palette::Grey => "grey",
            Palette::Blue => "blue",
            Palette::Red => "red",
            Palette::Black => "black",
        }
    }

    pub fn parse(s: &str) -> Option<Palette> {
        match s {
            "grey" | "gray" => Some(Palette::Grey),
            "blue" => Some(Palette::Blue),
            "red" => Some(Palette::Red),
            "black" => Some(Palette::Black),
            _ => None,
        }
    }
}

/// Square matrix of color codes paired with a [`TrafficMatrix`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ColorMatrix {
    n: usize,
    codes: Vec<i64>,
}

impl ColorMatrix {
    pub fn uniform(n: usize, color: Palette) -> Self {
        ColorMatrix {
            n,
            codes: alloc::vec![color.code(); n * n],
        }
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> Result<Self, MatrixError> {
        let n = rows.len();
        let mut codes = Vec::with_capacity(n * n);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != n {
                return Err(MatrixError::NotSquare {
                    row,
                    len: r.len(),
                    n,
                });
            }
            codes.extend(r);
        }
        Ok(ColorMatrix { n, codes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn code(&self, src: usize, dst: usize) -> i64 {
        assert!(src < self.n && dst < self.n, "cell index out of range");
        self.codes[src * self.n + dst]
    }

    pub fn set_code(&mut self, src: usize, dst: usize, code: i64) {
        assert!(src < self.n && dst < self.n, "cell index out of range");
        self.codes[src * self.n + dst] = code;
    }

    pub fn color_of(&self, src: usize, dst: usize) -> Result<Palette, MatrixError> {
        for index in [src, dst] {
            if index >= self.n {
                return Err(MatrixError::IndexOutOfRange { index, n: self.n });
            }
        }
        Ok(Palette::from_code(self.code(src, dst)))
    }

    pub fn rows(&self) -> impl Iterator<Item = &[i64]> {
        self.codes.chunks(self.n.max(1)).take(self.n)
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        self.rows().map(<[i64]>::to_vec).collect()
    }

    /// Cells whose code maps to `which`, in row-major order.
    pub fn cells_of(&self, which: Palette) -> Vec<(usize, usize)> {
        self.codes
            .iter()
            .enumerate()
            .filter(|(_, &c)| Palette::from_code(c) == which)
            .map(|(k, _)| (k / self.n, k % self.n))
            .collect()
    }

    /// Labeled form of [`ColorMatrix::cells_of`].
    pub fn region_mask(
        &self,
        labels: &AxisLabels,
        which: Palette,
    ) -> Result<Vec<CellRef>, MatrixError> {
        if labels.len() != self.n {
            return Err(MatrixError::DimensionMismatch {
                left: self.n,
                right: labels.len(),
            });
        }
        Ok(self
            .cells_of(which)
            .into_iter()
            .map(|(s, d)| CellRef::new(labels, s, d))
            .collect())
    }
}

impl fmt::Debug for ColorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl Serialize for ColorMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.rows())
    }
}

impl<'de> Deserialize<'de> for ColorMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<i64>>::deserialize(d)?;
        ColorMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellRef {
    pub source_index: usize,
    pub dest_index: usize,
    pub source_label: String,
    pub dest_label: String,
}

impl CellRef {
    fn new(labels: &AxisLabels, s: usize, d: usize) -> Self {
        CellRef {
            source_index: s,
            dest_index: d,
            source_label: labels.0[s].clone(),
            dest_label: labels.0[d].clone(),
        }
    }
}

/// Cellwise sum of two equally sized matrices.
pub fn overlay(a: &TrafficMatrix, b: &TrafficMatrix) -> Result<TrafficMatrix, MatrixError> {
    if a.n != b.n {
        return Err(MatrixError::DimensionMismatch {
            left: a.n,
            right: b.n,
        });
    }
    Ok(TrafficMatrix {
        n: a.n,
        cells: a
            .cells
            .iter()
            .zip(&b.cells)
            .map(|(x, y)| x.saturating_add(*y))
            .collect(),
    })
}
