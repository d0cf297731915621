//! Main-layer alphabet of the construction: five reserved symbols followed by
//! the union of the family's output symbols.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::generators::FamilySpec;
use crate::symbolic::{Alphabet, Symbol};

pub const BLANK: Symbol = 0;
pub const STAR: Symbol = 1;
pub const SHARP: Symbol = 2;
/// Fragment separator.
pub const SEP1: Symbol = 3;
/// Separator between consecutive copies of a word inside a fragment.
pub const SEP2: Symbol = 4;

pub const RESERVED_CHARS: [char; 5] = ['.', '*', '#', '$', '&'];

/// Builds the main alphabet for a family; output symbols must not reuse a
/// reserved character.
pub fn main_alphabet(family: &FamilySpec) -> Result<Alphabet> {
    let out: BTreeSet<char> = family.output_chars();
    if let Some(c) = out.iter().find(|c| RESERVED_CHARS.contains(c)) {
        return Err(Error::validation(format!("output symbol {c:?} is reserved")));
    }
    Alphabet::new(RESERVED_CHARS.into_iter().chain(out))
}

/// Maps a generator's symbols into the main alphabet.
pub fn translate(from: &Alphabet, to: &Alphabet, symbols: &[Symbol]) -> Vec<Symbol> {
    symbols
        .iter()
        .map(|&s| to.symbol(from.char_of(s)).expect("output symbol in main alphabet"))
        .collect()
}
