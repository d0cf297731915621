//! Space-time diagrams as plain-text graymaps.
//!
//! Palette version 1. Gray levels by cell content, first match wins:
//!
//! | content | gray |
//! |---|---|
//! | `#` without marks | 0 |
//! | `#` with L mark | 16 |
//! | `#` with R mark | 24 |
//! | `#` with both marks | 32 |
//! | compute-flagged cell | 112 |
//! | counter signal | 64 |
//! | `*` | 48 |
//! | fragment separator `$` | 96 |
//! | copy separator `&` | 128 |
//! | i-th output symbol (i < 10) | 140 + 10 i |
//! | blank | 255 |
//!
//! Binary rules (max-fixture) map `0` to 255 and `1` to 0.

use std::fmt::Write as _;

use mulimit::construction::{CellState, BLANK, MARK_L, MARK_R, SEP1, SEP2, SHARP, STAR};
use mulimit::symbolic::Symbol;

pub const PALETTE_VERSION: u32 = 1;
pub const SHARP_GRAY: u8 = 0;
pub const MAX_OUTPUT_SYMBOLS: usize = 10;
const RESERVED: Symbol = 5;

pub fn construction_gray(cell: &CellState) -> u8 {
    if cell.main == SHARP {
        return match (cell.marks & MARK_L != 0, cell.marks & MARK_R != 0) {
            (false, false) => SHARP_GRAY,
            (true, false) => 16,
            (false, true) => 24,
            (true, true) => 32,
        };
    }
    if cell.compute {
        return 112;
    }
    if !cell.counter.is_empty() {
        return 64;
    }
    match cell.main {
        BLANK => 255,
        STAR => 48,
        SEP1 => 96,
        SEP2 => 128,
        s => {
            let i = (s - RESERVED) as usize;
            assert!(i < MAX_OUTPUT_SYMBOLS, "palette covers {MAX_OUTPUT_SYMBOLS} output symbols");
            140 + 10 * i as u8
        }
    }
}

pub fn binary_gray(symbol: Symbol) -> u8 {
    if symbol == 0 {
        255
    } else {
        0
    }
}

/// Row-major gray levels, top row first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graymap {
    pub width: usize,
    pub rows: Vec<Vec<u8>>,
}

impl Graymap {
    pub fn new(width: usize) -> Self {
        Self { width, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<u8>) {
        assert_eq!(row.len(), self.width, "row width");
        self.rows.push(row);
    }

    /// Plain PGM (`P2`), max gray 255, lines kept within 70 characters.
    pub fn to_pgm(&self) -> String {
        let mut out = format!("P2\n{} {}\n255\n", self.width, self.rows.len());
        for row in &self.rows {
            let mut line = String::new();
            for v in row {
                let token = v.to_string();
                if !line.is_empty() && line.len() + 1 + token.len() > 70 {
                    out.push_str(&line);
                    out.push('\n');
                    line.clear();
                }
                if !line.is_empty() {
                    line.push(' ');
                }
                line.push_str(&token);
            }
            writeln!(out, "{line}").unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use mulimit::construction::Signals;

    #[test]
    fn palette_is_injective_on_used_classes() {
        let mut cells = vec![
            CellState { main: SHARP, ..Default::default() },
            CellState { main: SHARP, marks: MARK_L, ..Default::default() },
            CellState { main: SHARP, marks: MARK_R, ..Default::default() },
            CellState { main: SHARP, marks: MARK_L | MARK_R, ..Default::default() },
            CellState { main: BLANK, compute: true, ..Default::default() },
            CellState { main: BLANK, counter: Signals(Signals::OUTER_R), ..Default::default() },
            CellState { main: STAR, ..Default::default() },
            CellState { main: SEP1, ..Default::default() },
            CellState { main: SEP2, ..Default::default() },
            CellState { main: BLANK, ..Default::default() },
        ];
        for s in 0..MAX_OUTPUT_SYMBOLS as Symbol {
            cells.push(CellState { main: RESERVED + s, ..Default::default() });
        }
        let mut grays: Vec<u8> = cells.iter().map(construction_gray).collect();
        grays.sort_unstable();
        grays.dedup();
        assert_eq!(grays.len(), cells.len());
    }

    #[test]
    fn pgm_layout() {
        let mut g = Graymap::new(3);
        g.push(vec![255, 0, 16]);
        assert_eq!(g.to_pgm(), "P2\n3 1\n255\n255 0 16\n");
    }

    #[test]
    fn long_rows_wrap() {
        let mut g = Graymap::new(40);
        g.push(vec![255; 40]);
        let pgm = g.to_pgm();
        assert!(pgm.lines().all(|l| l.len() <= 70));
        let values: Vec<&str> = pgm.split_whitespace().skip(4).collect();
        assert_eq!(values.len(), 40);
    }
}
