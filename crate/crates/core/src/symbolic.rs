//! Words over finite alphabets, occurrence counting and densities.
//!
//! Symbols are stored as dense `u8` indices into an [`Alphabet`]; the alphabet
//! maps each index to a printable `char` so words can be written and parsed as
//! plain strings.

use std::collections::HashMap;
use std::fmt;

use num_rational::Ratio;

use crate::error::{Error, Result};

/// Index of a symbol inside its [`Alphabet`].
pub type Symbol = u8;

/// Ordered finite set of distinct symbols.
#[derive(Clone, PartialEq, Eq)]
pub struct Alphabet {
    chars: Vec<char>,
    index: HashMap<char, Symbol>,
}

impl Alphabet {
    pub fn new<I: IntoIterator<Item = char>>(chars: I) -> Result<Self> {
        let chars: Vec<char> = chars.into_iter().collect();
        if chars.is_empty() {
            return Err(Error::contract("alphabet must not be empty"));
        }
        if chars.len() > Symbol::MAX as usize + 1 {
            return Err(Error::contract("alphabet larger than 256 symbols"));
        }
        let mut index = HashMap::with_capacity(chars.len());
        for (i, &c) in chars.iter().enumerate() {
            if index.insert(c, i as Symbol).is_some() {
                return Err(Error::contract(format!("duplicate symbol {c:?} in alphabet")));
            }
        }
        Ok(Self { chars, index })
    }

    /// The binary alphabet `{0, 1}`.
    pub fn binary() -> Self {
        Self::new(['0', '1']).expect("binary alphabet is valid")
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn symbol(&self, c: char) -> Option<Symbol> {
        self.index.get(&c).copied()
    }

    pub fn char_of(&self, s: Symbol) -> char {
        self.chars[s as usize]
    }

    pub fn contains(&self, c: char) -> bool {
        self.index.contains_key(&c)
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    /// Parses a string into a word, one symbol per `char`.
    pub fn word(&self, text: &str) -> Result<Word> {
        let symbols = text
            .chars()
            .map(|c| {
                self.symbol(c)
                    .ok_or_else(|| Error::contract(format!("symbol {c:?} not in alphabet")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Word::from_symbols(symbols))
    }

    pub fn render(&self, symbols: &[Symbol]) -> String {
        symbols.iter().map(|&s| self.char_of(s)).collect()
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Alphabet({:?})", self.chars.iter().collect::<String>())
    }
}

/// Finite sequence of symbol indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn from_symbols(symbols: Vec<Symbol>) -> Self {
        Self(symbols)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.0
    }
}

impl From<Vec<Symbol>> for Word {
    fn from(v: Vec<Symbol>) -> Self {
        Self(v)
    }
}

/// Circular sequence of symbols standing in for a bi-infinite configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicWindow {
    cells: Vec<Symbol>,
}

impl CyclicWindow {
    pub fn new(cells: Vec<Symbol>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::contract("cyclic window needs at least one cell"));
        }
        Ok(Self { cells })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[Symbol] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<Symbol> {
        self.cells
    }

    /// Cell at `i` taken modulo the window size.
    pub fn get(&self, i: isize) -> Symbol {
        let n = self.cells.len() as isize;
        self.cells[i.rem_euclid(n) as usize]
    }

    /// Rotates left by `k` cells: the result's cell 0 is this window's cell `k`.
    pub fn rotated(&self, k: usize) -> Self {
        let mut cells = self.cells.clone();
        let n = cells.len();
        cells.rotate_left(k % n);
        Self { cells }
    }

    /// Number of cyclic start positions where `v` occurs.
    pub fn cyclic_count(&self, v: &[Symbol]) -> usize {
        let n = self.cells.len();
        if v.is_empty() {
            return n;
        }
        (0..n)
            .filter(|&i| {
                v.iter()
                    .enumerate()
                    .all(|(j, &s)| self.cells[(i + j) % n] == s)
            })
            .count()
    }
}

/// `|u|_v`: overlapping occurrences of `v` in `u`.
pub fn count_occurrences(u: &Word, v: &Word) -> Result<usize> {
    if v.len() > u.len() {
        return Err(Error::contract(format!(
            "pattern of length {} longer than word of length {}",
            v.len(),
            u.len()
        )));
    }
    if v.is_empty() {
        return Ok(u.len() + 1);
    }
    Ok(u.symbols().windows(v.len()).filter(|w| *w == v.symbols()).count())
}

/// `|u|_v / (|u| - |v|)`. The denominator is the literal one, so values above
/// 1 are possible (e.g. `aa` in `aaaa` gives 3/2).
pub fn word_density(u: &Word, v: &Word) -> Result<Ratio<usize>> {
    if v.len() >= u.len() {
        return Err(Error::contract(format!(
            "density needs |v| < |u|, got {} >= {}",
            v.len(),
            u.len()
        )));
    }
    let count = count_occurrences(u, v)?;
    Ok(Ratio::new(count, u.len() - v.len()))
}

/// Cyclic occurrence count of `v` divided by the window size.
pub fn window_density(c: &CyclicWindow, v: &Word) -> Result<Ratio<usize>> {
    if v.len() > c.len() {
        return Err(Error::contract(format!(
            "word of length {} does not fit window of size {}",
            v.len(),
            c.len()
        )));
    }
    Ok(Ratio::new(c.cyclic_count(v.symbols()), c.len()))
}

/// Sum of [`window_density`] over a set of distinct words.
pub fn set_density<'a, I>(c: &CyclicWindow, words: I) -> Result<Ratio<usize>>
where
    I: IntoIterator<Item = &'a Word>,
{
    words
        .into_iter()
        .try_fold(Ratio::from_integer(0), |acc, w| Ok(acc + window_density(c, w)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::new("abcd".chars()).unwrap()
    }

    fn w(s: &str) -> Word {
        ab().word(s).unwrap()
    }

    fn cyc(s: &str) -> CyclicWindow {
        CyclicWindow::new(w(s).into_symbols()).unwrap()
    }

    #[test]
    fn counts() {
        assert_eq!(count_occurrences(&w("aab"), &w("a")).unwrap(), 2);
        assert_eq!(count_occurrences(&w("abc"), &w("d")).unwrap(), 0);
        assert_eq!(count_occurrences(&w("aaaa"), &w("aa")).unwrap(), 3);
        assert!(count_occurrences(&w("a"), &w("aa")).is_err());
    }

    #[test]
    fn word_densities() {
        assert_eq!(word_density(&w("aab"), &w("a")).unwrap(), Ratio::new(1, 1));
        assert_eq!(word_density(&w("aaaa"), &w("aa")).unwrap(), Ratio::new(3, 2));
        assert_eq!(word_density(&w("abc"), &w("d")).unwrap(), Ratio::from_integer(0));
        assert!(word_density(&w("ab"), &w("ab")).is_err());
    }

    #[test]
    fn window_densities() {
        assert_eq!(window_density(&cyc("abab"), &w("ab")).unwrap(), Ratio::new(2, 4));
        assert_eq!(window_density(&cyc("aaaa"), &w("a")).unwrap(), Ratio::from_integer(1));
        assert_eq!(window_density(&cyc("ab"), &w("ba")).unwrap(), Ratio::new(1, 2));
        assert!(window_density(&cyc("ab"), &w("aba")).is_err());
    }

    #[test]
    fn set_densities() {
        let set = [w("ab"), w("ba")];
        assert_eq!(set_density(&cyc("abab"), &set).unwrap(), Ratio::from_integer(1));
        assert_eq!(set_density(&cyc("aaaa"), &[]).unwrap(), Ratio::from_integer(0));
        assert_eq!(set_density(&cyc("abba"), &[w("bb")]).unwrap(), Ratio::new(1, 4));
    }

    #[test]
    fn alphabet_rejects_duplicates() {
        assert!(Alphabet::new("aba".chars()).is_err());
        assert!(ab().word("ax").is_err());
    }
}
