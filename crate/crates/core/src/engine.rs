//! One-dimensional cellular automaton engine over cyclic windows, with the
//! exact predecessor oracle used to compute image measures of cylinders.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::symbolic::{Alphabet, CyclicWindow, Symbol, Word};

/// Windows at least this wide are updated in parallel.
const PARALLEL_WIDTH: usize = 1 << 15;

/// Default cap on the number of candidate words the predecessor oracle visits.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 24;

/// The symbol reserved for initial configurations only.
pub const STAR: char = '*';

/// A uniform local rule of finite radius over an arbitrary cell type.
pub trait CellRule: Sync {
    type Cell: Copy + Send + Sync;

    fn radius(&self) -> usize;

    /// New value of the center of `neighborhood`, which has `2r + 1` cells.
    fn apply(&self, neighborhood: &[Self::Cell]) -> Self::Cell;
}

/// One synchronous update of a cyclic row.
pub fn step_cells<R: CellRule>(rule: &R, cells: &[R::Cell]) -> Vec<R::Cell> {
    let n = cells.len();
    let r = rule.radius();
    let span = 2 * r + 1;
    let mut padded = Vec::with_capacity(n + 2 * r);
    padded.extend((0..r).map(|i| cells[(n * r + i - r) % n]));
    padded.extend_from_slice(cells);
    padded.extend((0..r).map(|i| cells[i % n]));
    if n >= PARALLEL_WIDTH {
        (0..n)
            .into_par_iter()
            .map(|i| rule.apply(&padded[i..i + span]))
            .collect()
    } else {
        padded.windows(span).map(|w| rule.apply(w)).collect()
    }
}

/// Non-cyclic application: a word of length `L` maps to one of length `L - 2r`.
pub fn shrink<R: CellRule>(rule: &R, cells: &[R::Cell]) -> Vec<R::Cell> {
    let span = 2 * rule.radius() + 1;
    if cells.len() < span {
        return Vec::new();
    }
    cells.windows(span).map(|w| rule.apply(w)).collect()
}

/// Table-driven rule over symbol indices of an [`Alphabet`].
#[derive(Clone, Debug)]
pub struct LocalRule {
    name: String,
    alphabet: Alphabet,
    radius: usize,
    table: Vec<Symbol>,
}

impl LocalRule {
    /// Tabulates `transition` over all `|Q|^(2r+1)` neighborhoods.
    pub fn from_fn<F>(name: &str, alphabet: Alphabet, radius: usize, transition: F) -> Result<Self>
    where
        F: Fn(&[Symbol]) -> Symbol,
    {
        if radius == 0 {
            return Err(Error::contract("radius must be positive"));
        }
        let q = alphabet.len();
        let span = 2 * radius + 1;
        let size = (q as u128).pow(span as u32);
        if size > DEFAULT_ENUMERATION_CAP as u128 {
            return Err(Error::TooLarge { candidates: size, cap: DEFAULT_ENUMERATION_CAP });
        }
        let star = alphabet.symbol(STAR);
        let mut table = Vec::with_capacity(size as usize);
        let mut nbhd = vec![0 as Symbol; span];
        for index in 0..size as usize {
            decode(index, q, &mut nbhd);
            let out = transition(&nbhd);
            if out as usize >= q {
                return Err(Error::contract(format!("transition produced symbol {out} outside alphabet")));
            }
            if Some(out) == star {
                return Err(Error::contract("no transition may produce the birth-only symbol"));
            }
            table.push(out);
        }
        Ok(Self { name: name.to_string(), alphabet, radius, table })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn table(&self) -> &[Symbol] {
        &self.table
    }

    /// Whether some neighborhood maps to `symbol` (full table scan).
    pub fn produces(&self, symbol: Symbol) -> bool {
        self.table.contains(&symbol)
    }
}

/// Most significant digit first, so index order is lexicographic order.
fn decode(mut index: usize, q: usize, out: &mut [Symbol]) {
    for slot in out.iter_mut().rev() {
        *slot = (index % q) as Symbol;
        index /= q;
    }
}

impl CellRule for LocalRule {
    type Cell = Symbol;

    fn radius(&self) -> usize {
        self.radius
    }

    fn apply(&self, neighborhood: &[Symbol]) -> Symbol {
        let q = self.alphabet.len();
        let index = neighborhood.iter().fold(0usize, |acc, &s| acc * q + s as usize);
        self.table[index]
    }
}

/// Binary radius-1 rule producing 0 only on three 0s.
pub fn max_automaton() -> LocalRule {
    LocalRule::from_fn("max", Alphabet::binary(), 1, |n| n.iter().copied().max().unwrap_or(0))
        .expect("max rule is valid")
}

fn check_window(rule: &LocalRule, c: &CyclicWindow) -> Result<()> {
    if c.len() < 2 * rule.radius + 1 {
        return Err(Error::contract(format!(
            "window of size {} is smaller than the neighborhood {}",
            c.len(),
            2 * rule.radius + 1
        )));
    }
    if c.cells().iter().any(|&s| s as usize >= rule.alphabet.len()) {
        return Err(Error::contract("window contains symbols outside the rule's alphabet"));
    }
    Ok(())
}

pub fn step(rule: &LocalRule, c: &CyclicWindow) -> Result<CyclicWindow> {
    check_window(rule, c)?;
    CyclicWindow::new(step_cells(rule, c.cells()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecordMeta {
    pub rule: String,
    pub seed: Option<u64>,
    pub width: usize,
    pub steps: usize,
    /// Name of the sampling algorithm when the initial row was random.
    pub sampler: Option<&'static str>,
}

/// Rows `0..=T` of a run; row `t + 1` is one rule application to row `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceTimeRecord {
    pub rows: Vec<Vec<Symbol>>,
    pub meta: RecordMeta,
}

impl SpaceTimeRecord {
    pub fn width(&self) -> usize {
        self.meta.width
    }

    pub fn row(&self, t: usize) -> &[Symbol] {
        &self.rows[t]
    }

    pub fn window(&self, t: usize) -> CyclicWindow {
        CyclicWindow::new(self.rows[t].clone()).expect("records hold nonempty rows")
    }
}

pub fn run(rule: &LocalRule, c: &CyclicWindow, steps: usize) -> Result<SpaceTimeRecord> {
    check_window(rule, c)?;
    let mut rows = Vec::with_capacity(steps + 1);
    rows.push(c.cells().to_vec());
    for t in 0..steps {
        let next = step_cells(rule, &rows[t]);
        rows.push(next);
    }
    Ok(SpaceTimeRecord {
        rows,
        meta: RecordMeta {
            rule: rule.name.clone(),
            seed: None,
            width: c.len(),
            steps,
            sampler: None,
        },
    })
}

/// Name recorded in run metadata for [`trial_rng`].
pub const SAMPLER: &str = "chacha8/stream-per-trial";

/// Reproducible generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Draws `width` independent cells. With `star_density = s > 0` the symbol
/// `*` (which must be in `alphabet`) has probability `s` and the remaining
/// mass is uniform over the other symbols; otherwise all symbols are uniform.
pub fn sample_cells<R: Rng>(
    alphabet: &Alphabet,
    width: usize,
    star_density: f64,
    rng: &mut R,
) -> Result<Vec<Symbol>> {
    if !(0.0..=1.0).contains(&star_density) {
        return Err(Error::contract(format!("star density {star_density} outside [0, 1]")));
    }
    let q = alphabet.len();
    if star_density == 0.0 {
        return Ok((0..width).map(|_| rng.gen_range(0..q) as Symbol).collect());
    }
    let star = alphabet
        .symbol(STAR)
        .ok_or_else(|| Error::contract("positive star density needs '*' in the alphabet"))?;
    let others: Vec<Symbol> = (0..q as Symbol).filter(|&s| s != star).collect();
    Ok((0..width)
        .map(|_| {
            if rng.gen_bool(star_density) || others.is_empty() {
                star
            } else {
                others[rng.gen_range(0..others.len())]
            }
        })
        .collect())
}

pub fn sample_window(
    alphabet: &Alphabet,
    width: usize,
    seed: u64,
    star_density: f64,
) -> Result<CyclicWindow> {
    let mut rng = trial_rng(seed, 0);
    CyclicWindow::new(sample_cells(alphabet, width, star_density, &mut rng)?)
}

/// Brute-force predecessor enumeration with a candidate cap.
#[derive(Clone, Copy, Debug)]
pub struct PredecessorOracle {
    pub cap: u64,
}

impl Default for PredecessorOracle {
    fn default() -> Self {
        Self { cap: DEFAULT_ENUMERATION_CAP }
    }
}

impl PredecessorOracle {
    fn candidates(&self, rule: &LocalRule, u: &Word, n: usize) -> Result<(usize, u64)> {
        let len = u.len() + 2 * rule.radius * n;
        let total = (rule.alphabet.len() as u128).checked_pow(len as u32).unwrap_or(u128::MAX);
        if total > self.cap as u128 {
            return Err(Error::TooLarge { candidates: total, cap: self.cap });
        }
        Ok((len, total as u64))
    }

    fn for_each_predecessor<F: FnMut(&[Symbol])>(
        &self,
        rule: &LocalRule,
        u: &Word,
        n: usize,
        mut f: F,
    ) -> Result<u64> {
        if u.symbols().iter().any(|&s| s as usize >= rule.alphabet.len()) {
            return Err(Error::contract("word contains symbols outside the rule's alphabet"));
        }
        let (len, total) = self.candidates(rule, u, n)?;
        let q = rule.alphabet.len();
        let mut v = vec![0 as Symbol; len];
        for index in 0..total as usize {
            decode(index, q, &mut v);
            let mut image = v.clone();
            for _ in 0..n {
                image = shrink(rule, &image);
            }
            if image == u.symbols() {
                f(&v);
            }
        }
        Ok(total)
    }

    /// All words of length `|u| + 2rn` whose `n`-fold image is `u`, in
    /// lexicographic order.
    pub fn predecessors(&self, rule: &LocalRule, u: &Word, n: usize) -> Result<Vec<Word>> {
        let mut out = Vec::new();
        self.for_each_predecessor(rule, u, n, |v| out.push(Word::from_symbols(v.to_vec())))?;
        Ok(out)
    }

    pub fn exact_measure(&self, rule: &LocalRule, u: &Word, n: usize) -> Result<MeasureEstimate> {
        let mut count = 0u64;
        let total = self.for_each_predecessor(rule, u, n, |_| count += 1)?;
        Ok(MeasureEstimate {
            word: u.clone(),
            time: n,
            value: count as f64 / total as f64,
            method: Method::ExactPredecessors { count, total },
        })
    }
}

pub fn predecessors(rule: &LocalRule, u: &Word, n: usize) -> Result<Vec<Word>> {
    PredecessorOracle::default().predecessors(rule, u, n)
}

pub fn exact_measure(rule: &LocalRule, u: &Word, n: usize) -> Result<MeasureEstimate> {
    PredecessorOracle::default().exact_measure(rule, u, n)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    /// `count / total` is the exact image measure of the cylinder.
    ExactPredecessors { count: u64, total: u64 },
    MonteCarlo { trials: usize, width: usize, std_error: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasureEstimate {
    pub word: Word,
    pub time: usize,
    pub value: f64,
    pub method: Method,
}

impl MeasureEstimate {
    /// Exact value as `(numerator, denominator)` when available.
    pub fn exact(&self) -> Option<(u64, u64)> {
        match self.method {
            Method::ExactPredecessors { count, total } => Some((count, total)),
            Method::MonteCarlo { .. } => None,
        }
    }
}

/// Mean cyclic density of `u` after `n` steps from uniform random windows.
pub fn monte_carlo_measure(
    rule: &LocalRule,
    u: &Word,
    n: usize,
    trials: usize,
    width: usize,
    seed: u64,
) -> Result<MeasureEstimate> {
    if trials == 0 {
        return Err(Error::contract("at least one trial is needed"));
    }
    let samples = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let mut cells = sample_cells(&rule.alphabet, width, 0.0, &mut rng)?;
            for _ in 0..n {
                cells = step_cells(rule, &cells);
            }
            let window = CyclicWindow::new(cells)?;
            Ok(window.cyclic_count(u.symbols()) as f64 / width as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, std_error) = mean_and_std_error(&samples);
    Ok(MeasureEstimate {
        word: u.clone(),
        time: n,
        value: mean,
        method: Method::MonteCarlo { trials, width, std_error },
    })
}

/// Sample mean and standard error of the mean (zero for a single sample).
pub fn mean_and_std_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin(s: &str) -> Word {
        Alphabet::binary().word(s).unwrap()
    }

    fn cyc(s: &str) -> CyclicWindow {
        CyclicWindow::new(bin(s).into_symbols()).unwrap()
    }

    #[test]
    fn max_rule_table() {
        let m = max_automaton();
        assert_eq!(m.apply(&[0, 0, 0]), 0);
        assert_eq!(m.apply(&[0, 1, 0]), 1);
        assert_eq!(m.apply(&[1, 1, 1]), 1);
        assert_eq!(m.table().iter().filter(|&&s| s == 0).count(), 1);
    }

    #[test]
    fn max_rule_steps() {
        let m = max_automaton();
        assert_eq!(step(&m, &cyc("000000")).unwrap(), cyc("000000"));
        assert_eq!(step(&m, &cyc("010000")).unwrap(), cyc("111000"));
        assert_eq!(step(&m, &cyc("111111")).unwrap(), cyc("111111"));
        // cyclic wraparound
        assert_eq!(step(&m, &cyc("000001")).unwrap(), cyc("100011"));
    }

    #[test]
    fn run_records_rows() {
        let m = max_automaton();
        let r = run(&m, &cyc("0100000000"), 2).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert_eq!(r.rows[1], bin("1110000000").into_symbols());
        assert_eq!(r.rows[2], bin("1111000001").into_symbols());
        let r0 = run(&m, &cyc("0100"), 0).unwrap();
        assert_eq!(r0.rows, vec![bin("0100").into_symbols()]);
    }

    #[test]
    fn window_contract() {
        let m = max_automaton();
        assert!(step(&m, &cyc("01")).is_err());
        let bad = CyclicWindow::new(vec![0, 2, 0]).unwrap();
        assert!(step(&m, &bad).is_err());
    }

    #[test]
    fn star_is_reserved() {
        let a = Alphabet::new(['.', '*']).unwrap();
        assert!(LocalRule::from_fn("bad", a.clone(), 1, |n| n[1]).is_err());
        assert!(LocalRule::from_fn("ok", a, 1, |_| 0).is_ok());
    }

    #[test]
    fn predecessor_examples() {
        let m = max_automaton();
        assert_eq!(predecessors(&m, &bin("0"), 1).unwrap(), vec![bin("000")]);
        assert_eq!(predecessors(&m, &bin("0110"), 0).unwrap(), vec![bin("0110")]);
        let ones = predecessors(&m, &bin("1"), 1).unwrap();
        assert_eq!(ones.len(), 7);
        assert!(!ones.contains(&bin("000")));
    }

    #[test]
    fn exact_measures() {
        let m = max_automaton();
        assert_eq!(exact_measure(&m, &bin("0"), 1).unwrap().exact(), Some((1, 8)));
        assert_eq!(exact_measure(&m, &bin("0"), 3).unwrap().exact(), Some((1, 128)));
        assert_eq!(exact_measure(&m, &bin("01"), 0).unwrap().exact(), Some((1, 4)));
    }

    #[test]
    fn enumeration_cap() {
        let m = max_automaton();
        let oracle = PredecessorOracle { cap: 1 << 10 };
        assert!(matches!(
            oracle.exact_measure(&m, &bin("0"), 5),
            Err(Error::TooLarge { candidates: 2048, cap: 1024 })
        ));
    }

    #[test]
    fn sampling_frequencies() {
        let a = Alphabet::binary();
        let w = sample_window(&a, 1_000_000, 7, 0.0).unwrap();
        let ones = w.cells().iter().filter(|&&s| s == 1).count() as f64 / 1e6;
        assert!((ones - 0.5).abs() < 0.01);

        let s = Alphabet::new(['.', '*', 'a', 'b']).unwrap();
        let w = sample_window(&s, 1_000_000, 7, 0.05).unwrap();
        let stars = w.cells().iter().filter(|&&x| x == 1).count() as f64 / 1e6;
        assert!((stars - 0.05).abs() < 0.005);

        assert_eq!(sample_window(&s, 1, 3, 0.5).unwrap(), sample_window(&s, 1, 3, 0.5).unwrap());
    }
}
