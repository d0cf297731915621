//! The simulated cellular automaton whose μ-limit set realizes a family of
//! subshifts.
//!
//! A cell has four layers: the main symbol, counter signals, merge marks and a
//! computation flag. The counter layer evolves by [`CounterRule`], a genuine
//! radius-2 local rule. Segments between consecutive `#` are driven by
//! [`SegmentController`]s that move one head per segment by at most one cell
//! per step. Only the main layer is observed.

pub mod alphabet;
pub mod counter;
pub mod layout;
pub mod segment;

use std::collections::{BTreeMap, BTreeSet};

use crate::engine::{sample_cells, step_cells, trial_rng};
use crate::error::{Error, Result};
use crate::generators::FamilySpec;
use crate::symbolic::{Alphabet, CyclicWindow, Symbol};

pub use alphabet::{main_alphabet, BLANK, SEP1, SEP2, SHARP, STAR};
pub use counter::{CounterCell, CounterRule, Signals};
pub use layout::{fragment_layout, fragment_word, isqrt};
pub use segment::{bit_length, Phase, SegmentController, Side};

/// Merge mark bits of [`CellState::marks`].
pub const MARK_L: u8 = 1;
pub const MARK_R: u8 = 2;

/// Default `C` in the workspace bound `C * floor(log2 n)`.
pub const DEFAULT_WORKSPACE_CONSTANT: usize = 4;

/// Full state of one cell.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct CellState {
    pub main: Symbol,
    pub counter: Signals,
    pub marks: u8,
    pub compute: bool,
}

#[derive(Clone, Debug)]
pub struct ConstructionParams {
    pub family: FamilySpec,
    /// Inner counter signals move at speed `1/counter_period`.
    pub counter_period: u16,
    pub workspace_constant: usize,
}

impl ConstructionParams {
    pub fn new(family: FamilySpec) -> Self {
        Self { family, counter_period: 2, workspace_constant: DEFAULT_WORKSPACE_CONSTANT }
    }

    /// Bound on the creation time of a `#` whose nearest neighbouring `#` is
    /// `k` cells away: `k * K_c` with `K_c = ceil(2 / (1 - v)) + 4`.
    pub fn counter_constant(&self) -> u64 {
        let p = self.counter_period as u64;
        // v = 1/p, so 2/(1 - v) = 2p/(p - 1)
        (2 * p).div_ceil(p - 1) + 4
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SharpCreated {
    pub time: u64,
    pub pos: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MergeEvent {
    pub time: u64,
    /// Position of the erased shared `#`.
    pub pos: usize,
    pub left_n: usize,
    pub right_n: usize,
    pub merged_n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhaseEvent {
    pub time: u64,
    pub id: u64,
    pub left: usize,
    pub n: usize,
    pub phase: Phase,
}

/// A segment finished its computation and started cycling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ComputeEvent {
    pub time: u64,
    pub n: usize,
    pub steps: u64,
}

#[derive(Clone, Debug, Default)]
pub struct EventLog {
    pub sharps: Vec<SharpCreated>,
    pub merges: Vec<MergeEvent>,
    pub phases: Vec<PhaseEvent>,
    pub computations: Vec<ComputeEvent>,
}

impl EventLog {
    /// For each created `#`, the distance to the nearest other created `#`
    /// (the window width when it is the only one) and its creation time.
    pub fn creation_distances(&self, width: usize) -> Vec<(usize, u64)> {
        let positions: BTreeSet<usize> = self.sharps.iter().map(|e| e.pos).collect();
        self.sharps
            .iter()
            .map(|e| {
                let k = positions
                    .iter()
                    .filter(|&&p| p != e.pos)
                    .map(|&p| {
                        let d = p.abs_diff(e.pos);
                        d.min(width - d)
                    })
                    .min()
                    .unwrap_or(width);
                (k, e.time)
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct SimulatedAutomaton {
    params: ConstructionParams,
    alphabet: Alphabet,
    rule: CounterRule,
    cells: Vec<CounterCell>,
    marks: Vec<u8>,
    compute: Vec<bool>,
    controllers: BTreeMap<usize, SegmentController>,
    discover: bool,
    time: u64,
    next_id: u64,
    events: EventLog,
}

impl SimulatedAutomaton {
    /// Starts from a main layer with empty counter, mark and compute layers.
    pub fn new(params: ConstructionParams, main: Vec<Symbol>) -> Result<Self> {
        params.family.validate()?;
        let alphabet = main_alphabet(&params.family)?;
        let rule = CounterRule::new(params.counter_period)
            .ok_or_else(|| Error::validation("counter_period must lie in 2..=4"))?;
        if params.workspace_constant == 0 {
            return Err(Error::validation("workspace_constant must be positive"));
        }
        if main.len() < 5 {
            return Err(Error::contract("window width must be at least 5"));
        }
        if let Some(s) = main.iter().find(|&&s| s as usize >= alphabet.len()) {
            return Err(Error::contract(format!("symbol {s} outside the main alphabet")));
        }
        let width = main.len();
        let mut sim = Self {
            params,
            alphabet,
            rule,
            cells: main.into_iter().map(|m| CounterCell::new(m, 0)).collect(),
            marks: vec![0; width],
            compute: vec![false; width],
            controllers: BTreeMap::new(),
            discover: true,
            time: 0,
            next_id: 0,
            events: EventLog::default(),
        };
        sim.rediscover(&BTreeSet::new());
        sim.paint();
        Ok(sim)
    }

    /// Samples the main layer: `*` with probability `star_density`, all other
    /// main symbols uniformly.
    pub fn random(
        params: ConstructionParams,
        width: usize,
        star_density: f64,
        seed: u64,
        trial: u64,
    ) -> Result<Self> {
        let alphabet = main_alphabet(&params.family)?;
        let mut rng = trial_rng(seed, trial);
        let main = sample_cells(&alphabet, width, star_density, &mut rng)?;
        Self::new(params, main)
    }

    /// Starts with conscious controllers on the given `(left #, interior
    /// length)` segments and no automatic segment discovery. Each listed
    /// segment must be bounded by `#` with no `#` inside.
    pub fn scripted(
        params: ConstructionParams,
        main: Vec<Symbol>,
        segments: &[(usize, usize)],
    ) -> Result<Self> {
        let mut sim = Self::new(params, main)?;
        sim.discover = false;
        sim.controllers.clear();
        let width = sim.width();
        for &(left, n) in segments {
            let right = (left + n + 1) % width;
            let inside = (1..=n).any(|j| sim.cells[(left + j) % width].main == SHARP);
            if left >= width
                || n + 1 > width
                || sim.cells[left].main != SHARP
                || sim.cells[right].main != SHARP
                || inside
            {
                return Err(Error::contract(format!("no segment of length {n} at {left}")));
            }
            let id = sim.fresh_id();
            let c = SegmentController::conscious(id, left, n, sim.params.workspace_constant, 0);
            sim.log_phase(&c);
            sim.controllers.insert(left, c);
        }
        sim.paint();
        Ok(sim)
    }

    fn fresh_id(&mut self) -> u64 {
        self.next_id += 1;
        self.next_id - 1
    }

    fn log_phase(&mut self, c: &SegmentController) {
        self.events.phases.push(PhaseEvent {
            time: self.time,
            id: c.id,
            left: c.left,
            n: c.n,
            phase: c.phase,
        });
    }

    pub fn width(&self) -> usize {
        self.cells.len()
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn params(&self) -> &ConstructionParams {
        &self.params
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn events(&self) -> &EventLog {
        &self.events
    }

    pub fn controllers(&self) -> impl Iterator<Item = &SegmentController> {
        self.controllers.values()
    }

    pub fn main(&self) -> Vec<Symbol> {
        self.cells.iter().map(|c| c.main).collect()
    }

    /// Projection onto the main layer.
    pub fn project(&self) -> CyclicWindow {
        CyclicWindow::new(self.main()).expect("width is positive")
    }

    pub fn cell(&self, i: usize) -> CellState {
        CellState {
            main: self.cells[i].main,
            counter: self.cells[i].signals,
            marks: self.marks[i],
            compute: self.compute[i],
        }
    }

    pub fn state(&self) -> Vec<CellState> {
        (0..self.width()).map(|i| self.cell(i)).collect()
    }

    pub fn run(&mut self, steps: u64) {
        for _ in 0..steps {
            self.step();
        }
    }

    /// Runs `steps` steps and calls `observe` at every time that is a multiple
    /// of `stride`, including the start and end times when they qualify.
    pub fn run_observed<F: FnMut(&Self)>(&mut self, steps: u64, stride: u64, mut observe: F) {
        let stride = stride.max(1);
        if self.time.is_multiple_of(stride) {
            observe(self);
        }
        for _ in 0..steps {
            self.step();
            if self.time.is_multiple_of(stride) {
                observe(self);
            }
        }
    }

    pub fn step(&mut self) {
        let width = self.width();
        let next = step_cells(&self.rule, &self.cells);
        for (i, (old, new)) in self.cells.iter().zip(&next).enumerate() {
            if new.main == SHARP && old.main != SHARP {
                self.events.sharps.push(SharpCreated { time: self.time + 1, pos: i });
            }
        }
        self.cells = next;

        let fresh = self.merge();
        self.time += 1;
        let fresh = self.rediscover(&fresh);

        // counter activity per cell, for recognition
        let mut busy = vec![0usize; width + 1];
        for i in 0..width {
            busy[i + 1] = busy[i] + usize::from(!self.cells[i].signals.is_empty());
        }
        let busy_between = |from: usize, len: usize| -> bool {
            let end = from + len;
            if end <= width {
                busy[end] - busy[from] > 0
            } else {
                busy[width] - busy[from] + busy[end - width] > 0
            }
        };

        let family = self.params.family.clone();
        let keys: Vec<usize> = self.controllers.keys().copied().collect();
        let mut changed = Vec::new();
        for key in keys {
            if fresh.contains(&key) {
                continue;
            }
            let c = self.controllers.get_mut(&key).expect("key listed");
            let blocked = busy_between(c.left, (c.n + 2).min(width));
            let before = (c.phase, c.compute_time);
            let proposal = c.advance(self.time - 1, blocked, &family, &self.alphabet);
            for (j, s) in proposal.writes {
                let pos = c.cell(j, width);
                self.cells[pos].main = s;
            }
            if c.phase != before.0 {
                changed.push(key);
            }
            if before.1.is_none() {
                if let Some(steps) = c.compute_time {
                    self.events.computations.push(ComputeEvent { time: self.time, n: c.n, steps });
                }
            }
        }
        for key in changed {
            let c = self.controllers[&key].clone();
            self.log_phase(&c);
        }
        self.paint();
    }

    /// Merges every pair whose shared `#` carries both an `R` and an `L`
    /// mark at the current time. Returns the left keys of merged segments.
    fn merge(&mut self) -> BTreeSet<usize> {
        let width = self.width();
        let mut fresh = BTreeSet::new();
        let keys: Vec<usize> = self.controllers.keys().copied().collect();
        for p in keys {
            let Some(left) = self.controllers.get(&p) else { continue };
            if left.mark() != Some(Side::Right) {
                continue;
            }
            let q = left.right(width);
            if q == p || self.cells[q].main != SHARP {
                continue;
            }
            match self.controllers.get(&q) {
                Some(right) if right.mark() == Some(Side::Left) => {}
                _ => continue,
            }
            let left = self.controllers.remove(&p).expect("present");
            let right = self.controllers.remove(&q).expect("present");
            let id = self.fresh_id();
            let merged = SegmentController::merged(
                id,
                &left,
                &right,
                &self.params.family,
                &self.alphabet,
                self.time + 1,
            );
            self.cells[q].main = BLANK;
            self.events.merges.push(MergeEvent {
                time: self.time + 1,
                pos: q,
                left_n: left.n,
                right_n: right.n,
                merged_n: merged.n,
            });
            self.controllers.insert(p, merged);
            fresh.insert(p);
        }
        fresh
    }

    /// Drops controllers whose segment no longer exists and, in automatic
    /// mode, starts forming controllers on new segments. Returns the keys of
    /// controllers that must not advance this step.
    fn rediscover(&mut self, fresh: &BTreeSet<usize>) -> BTreeSet<usize> {
        let width = self.width();
        let sharps: Vec<usize> = (0..width).filter(|&i| self.cells[i].main == SHARP).collect();
        let mut segments = BTreeMap::new();
        for (i, &p) in sharps.iter().enumerate() {
            let q = sharps[(i + 1) % sharps.len()];
            segments.insert(p, (q + width - p - 1) % width);
        }
        if sharps.len() == 1 {
            segments.insert(sharps[0], width - 1);
        }
        self.controllers.retain(|p, c| segments.get(p) == Some(&c.n));
        let mut fresh = fresh.clone();
        if self.discover {
            for (p, n) in segments {
                if !self.controllers.contains_key(&p) {
                    let id = self.fresh_id();
                    let c = SegmentController::forming(id, p, n, self.params.workspace_constant);
                    self.log_phase(&c);
                    self.controllers.insert(p, c);
                    fresh.insert(p);
                }
            }
        }
        fresh
    }

    fn paint(&mut self) {
        let width = self.width();
        self.marks.iter_mut().for_each(|m| *m = 0);
        self.compute.iter_mut().for_each(|c| *c = false);
        for c in self.controllers.values() {
            match c.mark() {
                Some(Side::Left) => self.marks[c.left] |= MARK_L,
                Some(Side::Right) => self.marks[c.right(width)] |= MARK_R,
                None => {}
            }
            for j in c.compute_cells() {
                self.compute[c.cell(j, width)] = true;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::SubshiftSpec;

    fn params() -> ConstructionParams {
        ConstructionParams::new(FamilySpec::new(vec![SubshiftSpec::fibonacci()]).unwrap())
    }

    fn parse(sim_alphabet: &Alphabet, s: &str) -> Vec<Symbol> {
        sim_alphabet.word(s).unwrap().into_symbols()
    }

    fn blank_with_stars(width: usize, stars: &[usize]) -> Vec<Symbol> {
        let mut v = vec![BLANK; width];
        for &s in stars {
            v[s] = STAR;
        }
        v
    }

    #[test]
    fn counter_constant_for_half_speed() {
        assert_eq!(params().counter_constant(), 8);
    }

    #[test]
    fn even_gap_gives_midpoint_sharp() {
        let mut sim = SimulatedAutomaton::new(params(), blank_with_stars(64, &[10, 20])).unwrap();
        sim.run(60);
        let created: Vec<usize> = sim.events().sharps.iter().map(|e| e.pos).collect();
        assert!(created.contains(&15), "{created:?}");
    }

    #[test]
    fn single_star_wraps_to_opposite_sharp() {
        let mut sim = SimulatedAutomaton::new(params(), blank_with_stars(40, &[0])).unwrap();
        sim.run(80);
        let created: Vec<usize> = sim.events().sharps.iter().map(|e| e.pos).collect();
        assert_eq!(created, vec![20]);
    }

    #[test]
    fn stars_disappear_after_one_step() {
        let mut sim = SimulatedAutomaton::new(params(), blank_with_stars(30, &[3, 4, 17])).unwrap();
        sim.step();
        assert!(sim.main().iter().all(|&s| s != STAR));
    }

    #[test]
    fn scripted_equal_segments_never_merge() {
        let p = params();
        let a = main_alphabet(&p.family).unwrap();
        let main = parse(&a, "#.....#.....#.....");
        let mut sim = SimulatedAutomaton::scripted(p, main, &[(0, 5), (6, 5)]).unwrap();
        sim.run(500);
        assert!(sim.events().merges.is_empty());
    }

    #[test]
    fn scripted_unequal_segments_merge() {
        let p = params();
        let a = main_alphabet(&p.family).unwrap();
        let main = parse(&a, "#...#.....#.........");
        let mut sim = SimulatedAutomaton::scripted(p, main, &[(0, 3), (4, 5)]).unwrap();
        sim.run(2000);
        let m = sim.events().merges.first().copied().expect("merge");
        assert_eq!((m.pos, m.merged_n), (4, 9));
        let seg = sim.controllers().find(|c| c.left == 0).expect("merged segment");
        assert_eq!(seg.n, 9);
    }

    #[test]
    fn odd_gap_sharp_on_left_half() {
        let mut sim = SimulatedAutomaton::new(params(), blank_with_stars(64, &[0, 11])).unwrap();
        sim.run(200);
        let mut created: Vec<usize> = sim.events().sharps.iter().map(|e| e.pos).collect();
        created.sort_unstable();
        assert_eq!(created, vec![5, 37]);
    }

    #[test]
    fn counter_erases_older_sharp() {
        let mut main = blank_with_stars(40, &[0]);
        main[10] = SHARP;
        let mut sim = SimulatedAutomaton::new(params(), main).unwrap();
        sim.run(11);
        assert_ne!(sim.main()[10], SHARP);
        sim.run(60);
        let sharps: Vec<usize> = (0..40).filter(|&i| sim.main()[i] == SHARP).collect();
        assert_eq!(sharps, vec![20]);
    }

    #[test]
    fn distance_twenty_within_counter_bound() {
        let p = params();
        let bound = 20 * p.counter_constant();
        let mut sim = SimulatedAutomaton::new(p, blank_with_stars(200, &[50, 70])).unwrap();
        sim.run(bound);
        let e = sim.events().sharps.iter().find(|e| e.pos == 60).expect("midpoint #");
        assert!(e.time <= bound);
    }

    #[test]
    fn blank_window_never_changes() {
        let mut sim = SimulatedAutomaton::new(params(), vec![BLANK; 50]).unwrap();
        sim.run(300);
        assert!(sim.main().iter().all(|&s| s == BLANK));
        assert_eq!(sim.controllers().count(), 0);
    }

    #[test]
    fn counter_rule_never_writes_star() {
        use crate::engine::CellRule;
        use rand::{Rng, SeedableRng};
        let rule = CounterRule::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1_000_000 {
            let nb: Vec<CounterCell> = (0..5)
                .map(|_| CounterCell::new(rng.gen_range(0..8), rng.gen::<u16>()))
                .collect();
            assert_ne!(rule.apply(&nb).main, STAR);
        }
    }

    #[test]
    fn filling_writes_layout_exactly() {
        let p = params();
        let mut main = vec![BLANK; 80];
        main[0] = SHARP;
        main[65] = SHARP;
        let mut sim = SimulatedAutomaton::scripted(p, main, &[(0, 64)]).unwrap();
        while sim.controllers().next().unwrap().phase != Phase::CycleLeft {
            sim.step();
        }
        let c = sim.controllers().next().unwrap();
        let layout = c.layout().expect("layout").to_vec();
        assert_eq!(&sim.main()[1..65], &layout[..]);
        assert!(layout.contains(&SEP1));
    }

    #[test]
    fn workspace_bound_holds() {
        let mut sim = SimulatedAutomaton::random(params(), 1024, 0.05, 3, 0).unwrap();
        for _ in 0..4000 {
            sim.step();
            for c in sim.controllers() {
                let flagged = c.compute_cells().len();
                assert!(flagged <= c.workspace_limit() + 1, "{} cells for n={}", flagged, c.n);
            }
        }
    }

    #[test]
    fn rejects_symbols_outside_alphabet() {
        assert!(SimulatedAutomaton::new(params(), vec![99; 10]).is_err());
    }
}
