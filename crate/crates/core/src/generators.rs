//! Write-once generator machines for generic configurations of sofic and
//! substitutive subshifts.
//!
//! A [`GeneratorMachine`] emits the right half of a generic configuration one
//! symbol at a time. Every elementary action (one substitution lookup, one
//! edge push or pop in the cycle search, one symbol written) costs one step;
//! `cells_used` is the emitted prefix plus the machine's retained scratch.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::symbolic::{Alphabet, Symbol, Word};

/// Labeled edge of a sofic presentation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledEdge {
    pub from: usize,
    pub label: char,
    pub to: usize,
}

/// Strongly connected labeled graph presenting a transitive sofic shift.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SoficGraph {
    pub states: usize,
    pub edges: Vec<LabeledEdge>,
    pub start: usize,
}

/// Substitution rules with the seed whose fixed point is generated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substitution {
    pub rules: BTreeMap<char, String>,
    pub seed: char,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubshiftSpec {
    SoficTransitive(SoficGraph),
    Substitution(Substitution),
}

impl SubshiftSpec {
    /// Fibonacci substitution `a -> ab, b -> a` seeded with `a`.
    pub fn fibonacci() -> Self {
        SubshiftSpec::Substitution(Substitution {
            rules: [('a', "ab".to_string()), ('b', "a".to_string())].into(),
            seed: 'a',
        })
    }

    /// Thue-Morse substitution `a -> ab, b -> ba` seeded with `a`.
    pub fn thue_morse() -> Self {
        SubshiftSpec::Substitution(Substitution {
            rules: [('a', "ab".to_string()), ('b', "ba".to_string())].into(),
            seed: 'a',
        })
    }

    /// Even shift: blocks of `1` between two `0` have even length.
    pub fn even_shift() -> Self {
        SubshiftSpec::SoficTransitive(SoficGraph {
            states: 2,
            edges: vec![
                LabeledEdge { from: 0, label: '0', to: 0 },
                LabeledEdge { from: 0, label: '1', to: 1 },
                LabeledEdge { from: 1, label: '1', to: 0 },
            ],
            start: 0,
        })
    }

    /// Output alphabet, sorted by character.
    pub fn output_chars(&self) -> BTreeSet<char> {
        match self {
            SubshiftSpec::SoficTransitive(g) => g.edges.iter().map(|e| e.label).collect(),
            SubshiftSpec::Substitution(s) => s
                .rules
                .iter()
                .flat_map(|(k, v)| std::iter::once(*k).chain(v.chars()))
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SubshiftSpec::SoficTransitive(g) => g.validate(),
            SubshiftSpec::Substitution(s) => s.validate(),
        }
    }

    /// Instantiates a fresh generator for this subshift.
    pub fn generator(&self) -> Result<GeneratorMachine> {
        match self {
            SubshiftSpec::SoficTransitive(g) => sofic_generic_stream(g),
            SubshiftSpec::Substitution(s) => substitution_stream(s),
        }
    }
}

impl SoficGraph {
    pub fn validate(&self) -> Result<()> {
        if self.states == 0 {
            return Err(Error::validation("sofic graph has no states"));
        }
        if self.start >= self.states {
            return Err(Error::validation("sofic start state out of range"));
        }
        if let Some(e) = self.edges.iter().find(|e| e.from >= self.states || e.to >= self.states) {
            return Err(Error::validation(format!(
                "edge {} -> {} references a missing state",
                e.from, e.to
            )));
        }
        let reach = |forward: bool| {
            let mut seen = vec![false; self.states];
            let mut stack = vec![self.start];
            seen[self.start] = true;
            while let Some(s) = stack.pop() {
                for e in &self.edges {
                    let (a, b) = if forward { (e.from, e.to) } else { (e.to, e.from) };
                    if a == s && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
            seen.into_iter().all(|x| x)
        };
        if !reach(true) || !reach(false) {
            return Err(Error::validation("sofic graph is not strongly connected"));
        }
        Ok(())
    }
}

impl Substitution {
    pub fn validate(&self) -> Result<()> {
        if self.rules.is_empty() {
            return Err(Error::validation("substitution has no rules"));
        }
        for (k, v) in &self.rules {
            if v.is_empty() {
                return Err(Error::validation(format!("image of {k:?} is empty")));
            }
            if let Some(c) = v.chars().find(|c| !self.rules.contains_key(c)) {
                return Err(Error::validation(format!("symbol {c:?} has no rule")));
            }
        }
        let seed_image = self
            .rules
            .get(&self.seed)
            .ok_or_else(|| Error::validation(format!("seed {:?} has no rule", self.seed)))?;
        if !seed_image.starts_with(self.seed) {
            return Err(Error::validation("seed image does not start with the seed"));
        }
        if seed_image.chars().count() < 2 {
            return Err(Error::validation("seed image has length 1, the fixed point never grows"));
        }
        if !self.is_primitive() {
            return Err(Error::validation("substitution is not primitive"));
        }
        Ok(())
    }

    /// Some power of the incidence matrix is positive. Wielandt's bound
    /// `(q-1)^2 + 1` limits the powers worth checking.
    fn is_primitive(&self) -> bool {
        let keys: Vec<char> = self.rules.keys().copied().collect();
        let q = keys.len();
        let idx = |c: char| keys.iter().position(|&k| k == c).expect("validated symbol");
        let mut base = vec![vec![false; q]; q];
        for (k, v) in &self.rules {
            for c in v.chars() {
                base[idx(*k)][idx(c)] = true;
            }
        }
        let mut power = base.clone();
        for _ in 0..=((q - 1) * (q - 1) + 1) {
            if power.iter().all(|row| row.iter().all(|&x| x)) {
                return true;
            }
            let mut next = vec![vec![false; q]; q];
            for i in 0..q {
                for j in 0..q {
                    next[i][j] = (0..q).any(|m| power[i][m] && base[m][j]);
                }
            }
            power = next;
        }
        false
    }
}

/// Outcome of one [`GeneratorMachine::emit_next`] call.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Emission {
    Emitted { symbol: Symbol, steps: u64 },
    BudgetExhausted { steps: u64 },
}

#[derive(Clone, Debug)]
enum Engine {
    /// Fixed point `x = s(x)`: `x[reader]` is expanded into `queue` and
    /// written out; the emitted prefix is always ahead of the reader.
    Substitution {
        images: Vec<Vec<Symbol>>,
        seed: Symbol,
        reader: usize,
        queue: VecDeque<Symbol>,
    },
    /// Closed paths through the start state by increasing length, each length
    /// in lexicographic label order.
    Sofic {
        /// Outgoing edges per state, sorted by (label, target).
        out: Vec<Vec<(Symbol, usize)>>,
        start: usize,
        /// `back[r][s]`: a walk of exactly `r` edges leads from `s` to start.
        back: Vec<Vec<bool>>,
        length: usize,
        /// DFS stack of (state, next edge choice) pairs.
        stack: Vec<(usize, usize)>,
        path: Vec<Symbol>,
        queue: VecDeque<Symbol>,
    },
}

/// Write-once stepwise producer of a generic configuration.
#[derive(Clone, Debug)]
pub struct GeneratorMachine {
    alphabet: Alphabet,
    emitted: Vec<Symbol>,
    steps_used: u64,
    cells_used: usize,
    engine: Engine,
}

impl GeneratorMachine {
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn emitted(&self) -> &[Symbol] {
        &self.emitted
    }

    pub fn emitted_word(&self) -> Word {
        Word::from_symbols(self.emitted.clone())
    }

    pub fn emitted_string(&self) -> String {
        self.alphabet.render(&self.emitted)
    }

    pub fn steps_used(&self) -> u64 {
        self.steps_used
    }

    pub fn cells_used(&self) -> usize {
        self.cells_used
    }

    fn scratch_cells(&self) -> usize {
        match &self.engine {
            Engine::Substitution { queue, .. } => 1 + queue.len(),
            Engine::Sofic { path, queue, .. } => 1 + path.len() + queue.len(),
        }
    }

    /// Cells the machine would occupy after emitting `len` symbols, assuming
    /// scratch no larger than the current one. Used to stop before a budget.
    pub fn projected_cells(&self, len: usize) -> usize {
        len + self.scratch_cells()
    }

    /// Runs until one more symbol is written or `budget` steps are spent.
    /// Partial progress is kept across calls.
    pub fn emit_next(&mut self, budget: u64) -> Emission {
        let mut spent = 0u64;
        let out = loop {
            if spent >= budget {
                break Emission::BudgetExhausted { steps: spent };
            }
            spent += 1;
            if let Some(symbol) = self.tick() {
                self.emitted.push(symbol);
                break Emission::Emitted { symbol, steps: spent };
            }
        };
        self.steps_used += spent;
        self.cells_used = self.cells_used.max(self.emitted.len() + self.scratch_cells());
        out
    }

    /// Emits until `len` symbols exist, spending at most `budget` steps.
    pub fn emit_until(&mut self, len: usize, budget: u64) -> u64 {
        let mut spent = 0;
        while self.emitted.len() < len && spent < budget {
            match self.emit_next(budget - spent) {
                Emission::Emitted { steps, .. } | Emission::BudgetExhausted { steps } => {
                    spent += steps
                }
            }
        }
        spent
    }

    /// One elementary action; returns a symbol when the action was a write.
    fn tick(&mut self) -> Option<Symbol> {
        match &mut self.engine {
            Engine::Substitution { images, seed, reader, queue } => {
                if let Some(s) = queue.pop_front() {
                    return Some(s);
                }
                // Expand the next fixed-point symbol; the emitted prefix is
                // always at least one symbol ahead of the reader.
                let source = if *reader == 0 { *seed } else { self.emitted[*reader] };
                *reader += 1;
                queue.extend(images[source as usize].iter().copied());
                None
            }
            Engine::Sofic { out, start, back, length, stack, path, queue } => {
                if let Some(s) = queue.pop_front() {
                    return Some(s);
                }
                // One DFS action.
                if stack.is_empty() {
                    *length += 1;
                    while back.len() <= *length {
                        let prev = back.last().expect("base row");
                        let row = (0..out.len())
                            .map(|s| out[s].iter().any(|&(_, t)| prev[t]))
                            .collect();
                        back.push(row);
                    }
                    stack.push((*start, 0));
                    return None;
                }
                let depth = path.len();
                let (state, choice) = *stack.last().expect("nonempty");
                if depth == *length {
                    // Complete path; it ends at start by construction.
                    queue.extend(path.iter().copied());
                    stack.pop();
                    path.pop();
                    return None;
                }
                let remaining = *length - depth - 1;
                let next = out[state][choice..]
                    .iter()
                    .enumerate()
                    .find(|(_, &(_, t))| back[remaining][t]);
                match next {
                    Some((offset, &(label, target))) => {
                        stack.last_mut().expect("nonempty").1 = choice + offset + 1;
                        stack.push((target, 0));
                        path.push(label);
                    }
                    None => {
                        stack.pop();
                        path.pop();
                    }
                }
                None
            }
        }
    }
}

/// Generic stream of a transitive sofic shift: for `k = 1, 2, ...` the labels
/// of every closed path of length `k` through the start state, in
/// lexicographic order of labels.
pub fn sofic_generic_stream(graph: &SoficGraph) -> Result<GeneratorMachine> {
    graph.validate()?;
    let chars: BTreeSet<char> = graph.edges.iter().map(|e| e.label).collect();
    let alphabet = Alphabet::new(chars)?;
    let mut out = vec![Vec::new(); graph.states];
    for e in &graph.edges {
        out[e.from].push((alphabet.symbol(e.label).expect("label in alphabet"), e.to));
    }
    for edges in &mut out {
        edges.sort_unstable();
    }
    let base = (0..graph.states).map(|s| s == graph.start).collect();
    Ok(GeneratorMachine {
        alphabet,
        emitted: Vec::new(),
        steps_used: 0,
        cells_used: 0,
        engine: Engine::Sofic {
            out,
            start: graph.start,
            back: vec![base],
            length: 0,
            stack: Vec::new(),
            path: Vec::new(),
            queue: VecDeque::new(),
        },
    })
}

/// Fixed point of a primitive substitution, produced incrementally.
pub fn substitution_stream(spec: &Substitution) -> Result<GeneratorMachine> {
    spec.validate()?;
    let alphabet = Alphabet::new(spec.rules.keys().copied())?;
    let images: Vec<Vec<Symbol>> = spec
        .rules
        .values()
        .map(|v| v.chars().map(|c| alphabet.symbol(c).expect("validated")).collect())
        .collect();
    let seed = alphabet.symbol(spec.seed).expect("validated seed");
    Ok(GeneratorMachine {
        alphabet,
        emitted: Vec::new(),
        steps_used: 0,
        cells_used: 0,
        engine: Engine::Substitution { images, seed, reader: 0, queue: VecDeque::new() },
    })
}

/// Ordered list of subshifts whose union closure is the target limit set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilySpec {
    pub members: Vec<SubshiftSpec>,
}

impl FamilySpec {
    pub fn new(members: Vec<SubshiftSpec>) -> Result<Self> {
        let f = Self { members };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.members.is_empty() {
            return Err(Error::validation("family has no members"));
        }
        for (i, m) in self.members.iter().enumerate() {
            m.validate()
                .map_err(|e| Error::validation(format!("family member {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    /// Union of the members' output alphabets, sorted.
    pub fn output_chars(&self) -> BTreeSet<char> {
        self.members.iter().flat_map(|m| m.output_chars()).collect()
    }
}

/// `floor(log2(x))` with `floor_log2(0) = 0`.
pub fn floor_log2(x: u64) -> u32 {
    if x == 0 {
        0
    } else {
        63 - x.leading_zeros()
    }
}

/// Number of family members a segment computes with `space_budget` cells:
/// `min(|family|, floor(log2(space_budget)))`.
pub fn family_size_for_budget(family_len: usize, space_budget: u64) -> usize {
    (floor_log2(space_budget.max(1)) as usize).min(family_len)
}

/// Instantiates the first `k` members, `k` from [`family_size_for_budget`].
pub fn enumerate_family(family: &FamilySpec, space_budget: u64) -> Result<Vec<GeneratorMachine>> {
    let k = family_size_for_budget(family.members.len(), space_budget);
    family.members[..k].iter().map(SubshiftSpec::generator).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn take(g: &mut GeneratorMachine, n: usize) -> String {
        g.emit_until(n, u64::MAX);
        g.emitted_string()
    }

    #[test]
    fn fibonacci_prefix() {
        let mut g = SubshiftSpec::fibonacci().generator().unwrap();
        assert_eq!(g.emit_next(1_000_000), Emission::Emitted { symbol: 0, steps: 2 });
        assert_eq!(take(&mut g, 5), "abaab");
        assert_eq!(take(&mut g, 13), "abaababaabaab");
    }

    #[test]
    fn thue_morse_prefix() {
        let mut g = SubshiftSpec::thue_morse().generator().unwrap();
        assert_eq!(take(&mut g, 3), "abb");
        match g.emit_next(1 << 20) {
            Emission::Emitted { symbol, .. } => assert_eq!(g.alphabet().char_of(symbol), 'a'),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(take(&mut g, 16), "abbabaabbaababba");
    }

    #[test]
    fn zero_budget_is_a_no_op() {
        let mut g = SubshiftSpec::fibonacci().generator().unwrap();
        assert_eq!(g.emit_next(0), Emission::BudgetExhausted { steps: 0 });
        assert!(g.emitted().is_empty());
        take(&mut g, 4);
        assert_eq!(g.emit_next(0), Emission::BudgetExhausted { steps: 0 });
        assert_eq!(g.emitted().len(), 4);
    }

    #[test]
    fn even_shift_stream_start() {
        let mut g = SubshiftSpec::even_shift().generator().unwrap();
        // length 1: 0; length 2: 00, 11; length 3: 000, 011, 110
        assert_eq!(take(&mut g, 14), "00011000011110");
    }

    #[test]
    fn single_loop_sofic() {
        let g = SubshiftSpec::SoficTransitive(SoficGraph {
            states: 1,
            edges: vec![LabeledEdge { from: 0, label: '1', to: 0 }],
            start: 0,
        });
        let mut g = g.generator().unwrap();
        assert_eq!(take(&mut g, 12), "111111111111");
    }

    #[test]
    fn validation_errors() {
        let not_connected = SoficGraph {
            states: 2,
            edges: vec![
                LabeledEdge { from: 0, label: '0', to: 0 },
                LabeledEdge { from: 0, label: '1', to: 1 },
            ],
            start: 0,
        };
        assert!(matches!(sofic_generic_stream(&not_connected), Err(Error::Validation(_))));

        let identity = Substitution { rules: [('a', "a".to_string())].into(), seed: 'a' };
        assert!(matches!(substitution_stream(&identity), Err(Error::Validation(_))));

        let wrong_start = Substitution {
            rules: [('a', "ba".to_string()), ('b', "a".to_string())].into(),
            seed: 'a',
        };
        assert!(substitution_stream(&wrong_start).is_err());

        let not_primitive = Substitution {
            rules: [('a', "ab".to_string()), ('b', "b".to_string())].into(),
            seed: 'a',
        };
        assert!(substitution_stream(&not_primitive).is_err());
    }

    #[test]
    fn family_sizes() {
        let five = FamilySpec::new(vec![SubshiftSpec::fibonacci(); 5]).unwrap();
        // n = 64 -> space 6 -> k = 2; n = 4 -> space 2 -> k = 1
        assert_eq!(enumerate_family(&five, 6).unwrap().len(), 2);
        assert_eq!(enumerate_family(&five, 2).unwrap().len(), 1);
        assert_eq!(enumerate_family(&five, 1).unwrap().len(), 0);
        let one = FamilySpec::new(vec![SubshiftSpec::fibonacci()]).unwrap();
        assert_eq!(enumerate_family(&one, 64).unwrap().len(), 1);
        assert!(FamilySpec::new(vec![]).is_err());
    }
}
