//! Extract near-uniform bits from a range by locating disjoint occurrences
//! of a mirror-symmetric pair of local configurations.

use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::geometry::RangeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellState {
    Occupied,
    Empty,
    Ignore,
}

/// A rectangular window pattern. Rows are stored top-down as in the text
/// format; row `r`, column `c` sits at lattice offset `(c, height-1-r)`
/// from the window's lower-left anchor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    width: usize,
    height: usize,
    cells: Vec<CellState>,
}

impl Template {
    /// Parse rows of `X` (occupied), `.` (empty), `?` (ignore).
    pub fn parse(text: &str) -> Result<Template> {
        let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        if rows.is_empty() {
            return Err(Error::InvalidArgument("empty template".into()));
        }
        let width = rows[0].chars().count();
        let mut cells = Vec::with_capacity(rows.len() * width);
        for row in &rows {
            if row.chars().count() != width {
                return Err(Error::InvalidArgument("ragged template rows".into()));
            }
            for ch in row.chars() {
                cells.push(match ch {
                    'X' => CellState::Occupied,
                    '.' => CellState::Empty,
                    '?' => CellState::Ignore,
                    other => {
                        return Err(Error::InvalidArgument(format!(
                            "bad template char '{other}'"
                        )))
                    }
                });
            }
        }
        Ok(Template { width, height: rows.len(), cells })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn at(&self, row: usize, col: usize) -> CellState {
        self.cells[row * self.width + col]
    }

    /// Mirror image across the window's vertical axis.
    pub fn reflect_horizontal(&self) -> Template {
        let mut cells = Vec::with_capacity(self.cells.len());
        for r in 0..self.height {
            for c in 0..self.width {
                cells.push(self.at(r, self.width - 1 - c));
            }
        }
        Template { width: self.width, height: self.height, cells }
    }

    /// Lattice offsets of occupied cells relative to the lower-left anchor.
    fn occupied_offsets(&self) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        for r in 0..self.height {
            for c in 0..self.width {
                if self.at(r, c) == CellState::Occupied {
                    out.push((c as i64, (self.height - 1 - r) as i64));
                }
            }
        }
        out
    }

    /// True when the window anchored at `(x0, y0)` matches exactly.
    fn matches(&self, occ: &HashSet<(i64, i64)>, x0: i64, y0: i64) -> bool {
        for r in 0..self.height {
            for c in 0..self.width {
                let cell = (x0 + c as i64, y0 + (self.height - 1 - r) as i64);
                match self.at(r, c) {
                    CellState::Occupied if !occ.contains(&cell) => return false,
                    CellState::Empty if occ.contains(&cell) => return false,
                    _ => {}
                }
            }
        }
        true
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in 0..self.height {
            for c in 0..self.width {
                out.push(match self.at(r, c) {
                    CellState::Occupied => 'X',
                    CellState::Empty => '.',
                    CellState::Ignore => '?',
                });
            }
            out.push('\n');
        }
        out
    }
}

/// Mirror-image pattern pair sharing a reflection-fixed context.
#[derive(Debug, Clone)]
pub struct TemplatePair {
    pub left: Template,
    pub right: Template,
}

impl TemplatePair {
    pub fn new(left: Template, right: Template) -> Result<TemplatePair> {
        if left.width != right.width || left.height != right.height {
            return Err(Error::InvalidArgument("pattern window sizes differ".into()));
        }
        if left.reflect_horizontal() != right {
            return Err(Error::InvalidArgument(
                "right pattern is not the mirror image of the left".into(),
            ));
        }
        if left == right {
            return Err(Error::InvalidArgument("patterns must differ".into()));
        }
        if left.occupied_offsets().is_empty() {
            return Err(Error::InvalidArgument(
                "patterns must contain at least one occupied cell".into(),
            ));
        }
        Ok(TemplatePair { left, right })
    }

    pub fn from_text(left: &str, right: &str) -> Result<TemplatePair> {
        TemplatePair::new(Template::parse(left)?, Template::parse(right)?)
    }

    /// Cells shared by both patterns (the reflection-fixed context).
    pub fn context_cells(&self) -> Vec<(usize, usize, CellState)> {
        let mut out = Vec::new();
        for r in 0..self.left.height {
            for c in 0..self.left.width {
                if self.left.at(r, c) == self.right.at(r, c) {
                    out.push((r, c, self.left.at(r, c)));
                }
            }
        }
        out
    }
}

/// Fixed 3x3 pair: an L-triomino bending left vs its mirror image, with
/// the remaining window cells required empty.
pub fn default_templates() -> TemplatePair {
    TemplatePair::from_text("X..\nXX.\n...", "..X\n.XX\n...")
        .expect("default templates are valid")
}

#[derive(Debug, Clone)]
pub struct Occurrence {
    /// Lower-left corner of the matched window.
    pub anchor: (i64, i64),
    /// 1 for the right pattern, 0 for the left.
    pub bit: bool,
}

#[derive(Debug, Clone)]
pub struct ExtractionResult {
    pub bits: Vec<bool>,
    pub occurrences: Vec<Occurrence>,
}

impl ExtractionResult {
    pub fn to_hex(&self) -> String {
        let mut out = String::new();
        for chunk in self.bits.chunks(4) {
            let mut nibble = 0u8;
            for (i, &b) in chunk.iter().enumerate() {
                if b {
                    nibble |= 1 << (3 - i);
                }
            }
            out.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        out
    }
}

/// Disjoint pattern occurrences in lexicographic anchor order.
///
/// Candidate anchors are derived from occupied cells (every match places
/// some occupied pattern cell on a range cell), then tested against both
/// patterns; a later match overlapping an accepted window is skipped.
pub fn scan_occurrences(r: &RangeSet, tp: &TemplatePair) -> Result<Vec<Occurrence>> {
    if r.dim() != 2 {
        return Err(Error::InvalidDimension(r.dim()));
    }
    let occ = r.xy_set();
    let mut candidates: BTreeSet<(i64, i64)> = BTreeSet::new();
    for offsets in [tp.left.occupied_offsets(), tp.right.occupied_offsets()] {
        for &(px, py) in &occ {
            for &(ox, oy) in &offsets {
                candidates.insert((px - ox, py - oy));
            }
        }
    }
    let (w, h) = (tp.left.width as i64, tp.left.height as i64);
    let mut covered: HashSet<(i64, i64)> = HashSet::new();
    let mut out = Vec::new();
    'next: for (x0, y0) in candidates {
        let bit = if tp.left.matches(&occ, x0, y0) {
            false
        } else if tp.right.matches(&occ, x0, y0) {
            true
        } else {
            continue;
        };
        for dx in 0..w {
            for dy in 0..h {
                if covered.contains(&(x0 + dx, y0 + dy)) {
                    continue 'next;
                }
            }
        }
        for dx in 0..w {
            for dy in 0..h {
                covered.insert((x0 + dx, y0 + dy));
            }
        }
        out.push(Occurrence { anchor: (x0, y0), bit });
    }
    Ok(out)
}

/// Bits in scan order: 1 where the right pattern occurs, 0 for the left.
pub fn extract_bits(r: &RangeSet, tp: &TemplatePair) -> Result<ExtractionResult> {
    let occurrences = scan_occurrences(r, tp)?;
    let bits = occurrences.iter().map(|o| o.bit).collect();
    Ok(ExtractionResult { bits, occurrences })
}
