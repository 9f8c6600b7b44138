//! Node spaces and the default WS/SRV/EXT/ADV labelling.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::matrix::{AxisLabels, ColorMatrix, Palette};

/// Which part of the network a node lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Blue,
    Grey,
    Red,
}

impl Space {
    pub fn from_char(c: char) -> Option<Space> {
        match c.to_ascii_uppercase() {
            'B' => Some(Space::Blue),
            'G' => Some(Space::Grey),
            'R' => Some(Space::Red),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Space::Blue => 'B',
            Space::Grey => 'G',
            Space::Red => 'R',
        }
    }

    pub fn palette(self) -> Palette {
        match self {
            Space::Blue => Palette::Blue,
            Space::Grey => Palette::Grey,
            Space::Red => Palette::Red,
        }
    }
}

/// Assignment of every node index to a space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition(pub Vec<Space>);

impl Partition {
    /// Blue first, then grey, then red: roughly 40/20/40, each non-empty when n >= 3.
    /// For n = 10 this is the WS1..SRV1 / EXT1..EXT2 / ADV1..ADV4 layout.
    pub fn default_for(n: usize) -> Partition {
        let (b, g, r) = default_counts(n);
        let mut v = Vec::with_capacity(n);
        v.extend(core::iter::repeat_n(Space::Blue, b));
        v.extend(core::iter::repeat_n(Space::Grey, g));
        v.extend(core::iter::repeat_n(Space::Red, r));
        Partition(v)
    }

    /// Parses strings like `BBBBGGRRRR`.
    pub fn parse(s: &str) -> Option<Partition> {
        s.chars().map(Space::from_char).collect::<Option<Vec<_>>>().map(Partition)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn space(&self, node: usize) -> Space {
        self.0[node]
    }

    pub fn nodes(&self, space: Space) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == space)
            .map(|(i, _)| i)
            .collect()
    }

    /// Cell coloring: red if either endpoint is red, blue if both are blue,
    /// grey otherwise.
    pub fn cell_color(&self, src: usize, dst: usize) -> Palette {
        let (a, b) = (self.0[src], self.0[dst]);
        if a == Space::Red || b == Space::Red {
            Palette::Red
        } else if a == Space::Blue && b == Space::Blue {
            Palette::Blue
        } else {
            Palette::Grey
        }
    }

    pub fn color_matrix(&self) -> ColorMatrix {
        let n = self.len();
        let mut c = ColorMatrix::uniform(n, Palette::Grey);
        for i in 0..n {
            for j in 0..n {
                c.set_code(i, j, self.cell_color(i, j).code());
            }
        }
        c
    }

    pub fn to_string_code(&self) -> String {
        self.0.iter().map(|s| s.as_char()).collect()
    }
}

fn default_counts(n: usize) -> (usize, usize, usize) {
    if n == 0 {
        return (0, 0, 0);
    }
    let b = (2 * n / 5).max(1);
    let g = (n / 5).max(1).min(n - b);
    (b, g, n - b - g)
}

/// Short all-caps labels following the partition: `WS1.., SRV1` for blue,
/// `EXT1..` for grey and `ADV1..` for red.
pub fn default_labels(n: usize) -> AxisLabels {
    labels_for(&Partition::default_for(n))
}

pub fn labels_for(partition: &Partition) -> AxisLabels {
    let blue = partition.nodes(Space::Blue).len();
    let (mut ws, mut ext, mut adv, mut seen_blue) = (0, 0, 0, 0);
    let labels: Vec<String> = partition
        .0
        .iter()
        .map(|s| match s {
            Space::Blue => {
                seen_blue += 1;
                if seen_blue == blue && blue > 1 {
                    String::from("SRV1")
                } else {
                    ws += 1;
                    format!("WS{ws}")
                }
            }
            Space::Grey => {
                ext += 1;
                format!("EXT{ext}")
            }
            Space::Red => {
                adv += 1;
                format!("ADV{adv}")
            }
        })
        .collect();
    AxisLabels(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_node_layout_matches_template_labels() {
        let l = default_labels(10);
        let want = [
            "WS1", "WS2", "WS3", "SRV1", "EXT1", "EXT2", "ADV1", "ADV2", "ADV3", "ADV4",
        ];
        assert_eq!(l.0, want);
    }

    #[test]
    fn every_space_nonempty_from_three_nodes() {
        for n in 3..40 {
            let p = Partition::default_for(n);
            assert_eq!(p.len(), n);
            for s in [Space::Blue, Space::Grey, Space::Red] {
                assert!(!p.nodes(s).is_empty(), "n={n} {s:?}");
            }
        }
    }

    #[test]
    fn parse_partition() {
        let p = Partition::parse("bbgR").unwrap();
        assert_eq!(p.to_string_code(), "BBGR");
        assert!(Partition::parse("BXG").is_none());
    }
}
