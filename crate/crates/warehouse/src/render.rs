//! Fixed-width text rendering of a module view.
//!
//! Cells are four characters wide and axis labels are cut to four
//! characters. In 2D each cell shows its packet count; in 3D each cell shows
//! a stack of boxes, one per packet. With colors on, each cell carries a
//! palette marker: `g` grey, `b` blue, `r` red, `k` black.

use std::fmt::Write;

use warehouse_core::session::{ModuleView, PresentedQuestion, ViewMode};
use warehouse_core::Palette;

const CELL: usize = 4;

fn short(label: &str) -> String {
    label.chars().take(CELL).collect()
}

fn marker(p: Palette) -> char {
    match p {
        Palette::Grey => 'g',
        Palette::Blue => 'b',
        Palette::Red => 'r',
        Palette::Black => 'k',
    }
}

/// Maps a displayed position to the underlying `(source, destination)` cell
/// after `rotation` clockwise quarter turns.
pub fn rotated(n: usize, rotation: u8, r: usize, c: usize) -> (usize, usize) {
    match rotation % 4 {
        0 => (r, c),
        1 => (n - 1 - c, r),
        2 => (n - 1 - r, n - 1 - c),
        _ => (c, n - 1 - r),
    }
}

/// Row and column header labels for a rotation, plus which axis runs down.
fn headers(labels: &[String], rotation: u8) -> (Vec<String>, Vec<String>, &'static str) {
    let fwd: Vec<String> = labels.to_vec();
    let rev: Vec<String> = labels.iter().rev().cloned().collect();
    match rotation % 4 {
        0 => (fwd.clone(), fwd, "src"),
        1 => (fwd, rev, "dst"),
        2 => (rev.clone(), rev, "src"),
        _ => (rev, fwd, "dst"),
    }
}

pub fn render_view(view: &ModuleView) -> String {
    let n = view.traffic_matrix.n();
    let st = view.view;
    let mut out = String::new();
    let mode = match st.mode {
        ViewMode::TwoD => "2D",
        ViewMode::ThreeD => "3D",
    };
    let _ = writeln!(
        out,
        "[{}/{}] {} ({}, rotation {}, colors {})",
        view.index + 1,
        view.total,
        view.name,
        mode,
        u32::from(st.rotation % 4) * 90,
        if st.colored { "on" } else { "off" }
    );
    let (rows, cols, down) = headers(&view.labels.0, st.rotation);
    let _ = write!(out, "{down:>CELL$} ");
    for c in &cols {
        let _ = write!(out, "{:>CELL$}", short(c));
    }
    out.push('\n');
    for (r, row_label) in rows.iter().enumerate() {
        let cell = |c: usize| rotated(n, st.rotation, r, c);
        let color = |c: usize| {
            let (i, j) = cell(c);
            Palette::from_code(view.traffic_matrix_colors.code(i, j))
        };
        match st.mode {
            ViewMode::TwoD => {
                let _ = write!(out, "{:>CELL$} ", short(row_label));
                for c in 0..n {
                    let (i, j) = cell(c);
                    let v = view.traffic_matrix.get(i, j);
                    let count = if v == 0 { ".".to_string() } else { v.to_string() };
                    let m = if st.colored { marker(color(c)) } else { ' ' };
                    let _ = write!(out, "{count:>3}{m}");
                }
                out.push('\n');
            }
            ViewMode::ThreeD => {
                let height = (0..n).map(|c| view.traffic_matrix.get(cell(c).0, cell(c).1)).max().unwrap_or(0);
                for level in (1..=height).rev() {
                    let _ = write!(out, "{:>CELL$} ", "");
                    for c in 0..n {
                        let (i, j) = cell(c);
                        let stack = if view.traffic_matrix.get(i, j) >= level { " [] " } else { "    " };
                        out.push_str(stack);
                    }
                    out.push('\n');
                }
                let _ = write!(out, "{:>CELL$} ", short(row_label));
                for c in 0..n {
                    let m = if st.colored { marker(color(c)) } else { '_' };
                    let _ = write!(out, " {m}{m} ");
                }
                out.push('\n');
            }
        }
    }
    out
}

pub fn render_question(q: &PresentedQuestion) -> String {
    let mut out = format!("Q: {}\n", q.prompt);
    for (i, a) in q.shuffled_answers.iter().enumerate() {
        let _ = writeln!(out, "  {}) {}", i + 1, a);
    }
    out
}
