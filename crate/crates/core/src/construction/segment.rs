//! Segment lifecycle: recognition, length counting, family computation,
//! fragment filling and the alternating merge cycle.
//!
//! A controller owns the interior cells between two `#`. Each step it moves
//! a single virtual head by at most one cell, and reports which cells carry
//! computation data (its workspace). All persistent data lives in the
//! workspace, whose size stays within `C * floor(log2 n)` cells plus the head.

use crate::generators::{enumerate_family, floor_log2, FamilySpec};
use crate::symbolic::{Alphabet, Symbol};

use super::alphabet::{translate, BLANK};
use super::layout::{fragment_layout, isqrt};

/// Steps a single generator may spend producing one word.
const GENERATOR_STEP_CAP: u64 = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Forming,
    Conscious,
    Computing,
    Filling,
    CycleLeft,
    CycleRight,
    Merged,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Forming => "forming",
            Phase::Conscious => "conscious",
            Phase::Computing => "computing",
            Phase::Filling => "filling",
            Phase::CycleLeft => "cycle-left",
            Phase::CycleRight => "cycle-right",
            Phase::Merged => "merged",
        }
    }
}

/// Which `#` of a segment a merge mark sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// What a controller does to the tape in one step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Proposal {
    /// (interior offset, symbol) writes to the main layer.
    pub writes: Vec<(usize, Symbol)>,
}

#[derive(Clone, Debug)]
pub struct SegmentController {
    pub id: u64,
    /// Position of the left `#`.
    pub left: usize,
    /// Cells strictly between the two `#`.
    pub n: usize,
    pub phase: Phase,
    /// Steps left in the current phase (or sub-phase of a cycle).
    pub timer: u64,
    /// Head offset inside the segment, phase dependent.
    pub progress: usize,
    /// In a cycle phase: the mark is down and the signal is crossing.
    pub crossing: bool,
    workspace_constant: usize,
    pub words: Vec<Vec<Symbol>>,
    layout: Option<Vec<Symbol>>,
    /// Time the segment became conscious, then time it started cycling.
    pub conscious_at: Option<u64>,
    /// Instrumented steps from consciousness (or merge) to the first cycle.
    pub compute_time: Option<u64>,
    compute_started: u64,
    pub generator_steps: u64,
    /// Onset times of the left mark, for cycle-period checks.
    pub left_onsets: Vec<u64>,
}

/// Binary length of `x` (at least one bit).
pub fn bit_length(x: u64) -> usize {
    (64 - x.leading_zeros()).max(1) as usize
}

impl SegmentController {
    pub fn forming(id: u64, left: usize, n: usize, workspace_constant: usize) -> Self {
        Self {
            id,
            left,
            n,
            phase: Phase::Forming,
            timer: 0,
            progress: 0,
            crossing: false,
            workspace_constant,
            words: Vec::new(),
            layout: None,
            conscious_at: None,
            compute_time: None,
            compute_started: 0,
            generator_steps: 0,
            left_onsets: Vec::new(),
        }
    }

    /// A controller that has already recognised both `#` at time `now`.
    pub fn conscious(id: u64, left: usize, n: usize, workspace_constant: usize, now: u64) -> Self {
        let mut s = Self::forming(id, left, n, workspace_constant);
        s.enter_conscious(now);
        s
    }

    /// Position of the right `#` in a window of width `width`.
    pub fn right(&self, width: usize) -> usize {
        (self.left + self.n + 1) % width
    }

    /// Absolute position of interior offset `j`.
    pub fn cell(&self, j: usize, width: usize) -> usize {
        (self.left + 1 + j) % width
    }

    /// `C * floor(log2 n)`, the workspace allowance.
    pub fn workspace_limit(&self) -> usize {
        self.workspace_constant * floor_log2(self.n as u64) as usize
    }

    fn workspace(&self) -> usize {
        self.workspace_limit().min(self.n)
    }

    fn wait_steps(&self) -> u64 {
        ((self.n * self.n) as u64).max(1)
    }

    fn cross_steps(&self) -> u64 {
        (self.n as u64).max(1)
    }

    /// Mark currently placed on one of the bounding `#`, if any.
    pub fn mark(&self) -> Option<Side> {
        match (self.phase, self.crossing) {
            (Phase::CycleLeft, false) => Some(Side::Left),
            (Phase::CycleRight, false) => Some(Side::Right),
            _ => None,
        }
    }

    pub fn layout(&self) -> Option<&[Symbol]> {
        self.layout.as_deref()
    }

    fn enter_conscious(&mut self, now: u64) {
        self.phase = Phase::Conscious;
        self.progress = 0;
        self.timer = self.n as u64;
        self.conscious_at = Some(now);
        self.compute_started = now;
        if self.n == 0 {
            self.timer = 1;
        }
    }

    /// Restart as the union of two merged segments; `now` is the merge time.
    pub fn merged(
        id: u64,
        left: &SegmentController,
        right: &SegmentController,
        family: &FamilySpec,
        alphabet: &Alphabet,
        now: u64,
    ) -> Self {
        let mut s = Self::forming(id, left.left, left.n + right.n + 1, left.workspace_constant);
        s.conscious_at = Some(now);
        s.compute_started = now;
        s.enter_computing(family, alphabet);
        s
    }

    /// Runs the family enumeration and the generators, and sets the phase
    /// length to the number of steps they used.
    fn enter_computing(&mut self, family: &FamilySpec, alphabet: &Alphabet) {
        self.phase = Phase::Computing;
        self.progress = 0;
        let space = floor_log2(self.n as u64) as u64;
        let mut generators = enumerate_family(family, space).expect("family validated at build");
        let k = generators.len();
        let mut steps = k as u64;
        self.words.clear();
        if let Some(per_machine) = (space as usize).checked_div(k) {
            let interior = isqrt(self.n).saturating_sub(1);
            for g in &mut generators {
                let mut len = 0;
                while len < interior {
                    g.emit_until(len + 1, GENERATOR_STEP_CAP);
                    if g.emitted().len() <= len || g.cells_used() > per_machine {
                        break;
                    }
                    len += 1;
                }
                steps += g.steps_used();
                self.words.push(translate(g.alphabet(), alphabet, &g.emitted()[..len]));
            }
        }
        self.generator_steps = steps;
        self.layout = fragment_layout(self.n, &self.words);
        self.timer = steps.max(1);
    }

    fn enter_cycle(&mut self, side: Phase, now: u64) {
        self.phase = side;
        self.crossing = false;
        self.timer = self.wait_steps();
        self.progress = 0;
        if side == Phase::CycleLeft {
            self.left_onsets.push(now);
        }
    }

    /// Advances from time `now` to `now + 1`. `blocked` tells a forming
    /// segment that counter activity is still present between its `#`.
    pub fn advance(
        &mut self,
        now: u64,
        blocked: bool,
        family: &FamilySpec,
        alphabet: &Alphabet,
    ) -> Proposal {
        let mut proposal = Proposal::default();
        let next = now + 1;
        match self.phase {
            Phase::Forming => {
                if blocked {
                    self.progress = 0;
                } else {
                    self.progress += 1;
                    if self.progress > self.n {
                        self.enter_conscious(next);
                    }
                }
            }
            Phase::Conscious => {
                self.progress += 1;
                self.timer -= 1;
                if self.timer == 0 {
                    self.enter_computing(family, alphabet);
                }
            }
            Phase::Computing => {
                self.timer -= 1;
                if self.timer == 0 {
                    if self.layout.is_some() && self.n > 0 {
                        self.phase = Phase::Filling;
                        self.progress = 0;
                        proposal.writes.push((0, BLANK));
                    } else {
                        self.compute_time = Some(next - self.compute_started);
                        self.enter_cycle(Phase::CycleLeft, next);
                    }
                }
            }
            Phase::Filling => {
                let layout = self.layout.as_ref().expect("filling has a layout");
                let pos = self.progress;
                proposal.writes.push((pos, layout[pos]));
                if pos + 1 < self.n {
                    proposal.writes.push((pos + 1, BLANK));
                }
                self.progress += 1;
                if self.progress == self.n {
                    self.compute_time = Some(next - self.compute_started);
                    self.enter_cycle(Phase::CycleLeft, next);
                }
            }
            Phase::CycleLeft | Phase::CycleRight => {
                self.timer -= 1;
                self.progress += 1;
                if self.timer == 0 {
                    if self.crossing {
                        let other = if self.phase == Phase::CycleLeft {
                            Phase::CycleRight
                        } else {
                            Phase::CycleLeft
                        };
                        self.enter_cycle(other, next);
                    } else {
                        self.crossing = true;
                        self.timer = self.cross_steps();
                        self.progress = 0;
                    }
                }
            }
            Phase::Merged => {}
        }
        proposal
    }

    /// Interior offsets holding computation data at the current time.
    pub fn compute_cells(&self) -> Vec<usize> {
        let n = self.n;
        if n == 0 {
            return Vec::new();
        }
        let mut cells = match self.phase {
            Phase::Forming => {
                // one recognition signal from each `#`
                let e = self.progress;
                if e == 0 || e > n {
                    Vec::new()
                } else {
                    vec![e - 1, n - e]
                }
            }
            Phase::Conscious => {
                // binary length counter carried by the sweeping head
                let head = self.progress.min(n - 1);
                let bits = bit_length(self.progress as u64 + 1);
                (head + 1).saturating_sub(bits)..head + 1
            }
            .collect(),
            Phase::Computing => (0..self.workspace()).collect(),
            Phase::Filling => {
                let head = self.progress.min(n - 1);
                let w = self.workspace().max(1);
                ((head + 1).saturating_sub(w)..head + 1).collect()
            }
            Phase::CycleLeft | Phase::CycleRight => {
                // a signal zig-zagging across the segment with a binary
                // counter of its crossings in tow
                let bits = bit_length(n as u64).min(n);
                let pos = if self.crossing {
                    let p = self.progress.min(n - 1);
                    if self.phase == Phase::CycleLeft {
                        p
                    } else {
                        n - 1 - p
                    }
                } else {
                    let period = 2 * n;
                    let e = self.progress % period;
                    let p = if e < n { e } else { period - 1 - e };
                    if self.phase == Phase::CycleLeft {
                        p
                    } else {
                        n - 1 - p
                    }
                };
                let start = pos.min(n - bits);
                (start..start + bits).collect()
            }
            Phase::Merged => Vec::new(),
        };
        cells.sort_unstable();
        cells.dedup();
        cells
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::alphabet::main_alphabet;
    use crate::generators::SubshiftSpec;

    fn fib() -> (FamilySpec, Alphabet) {
        let f = FamilySpec::new(vec![SubshiftSpec::fibonacci()]).unwrap();
        let a = main_alphabet(&f).unwrap();
        (f, a)
    }

    fn run_until_cycle(s: &mut SegmentController, f: &FamilySpec, a: &Alphabet) -> u64 {
        let mut t = 0;
        while !matches!(s.phase, Phase::CycleLeft | Phase::CycleRight) {
            s.advance(t, false, f, a);
            t += 1;
        }
        t
    }

    #[test]
    fn enters_cycle_left_with_square_timer() {
        let (f, a) = fib();
        let mut s = SegmentController::conscious(0, 0, 4, 4, 0);
        run_until_cycle(&mut s, &f, &a);
        assert_eq!(s.phase, Phase::CycleLeft);
        assert_eq!(s.timer, 16);
        assert_eq!(s.words.len(), 1);
    }

    #[test]
    fn empty_family_skips_filling() {
        let (f, a) = fib();
        let mut s = SegmentController::conscious(0, 0, 2, 4, 0);
        let mut t = 0;
        while s.phase != Phase::CycleLeft {
            let p = s.advance(t, false, &f, &a);
            assert!(p.writes.is_empty());
            assert_ne!(s.phase, Phase::Filling);
            t += 1;
        }
        assert!(s.words.is_empty());
    }

    #[test]
    fn cycle_period() {
        let (f, a) = fib();
        let mut s = SegmentController::conscious(0, 0, 5, 4, 0);
        let mut t = run_until_cycle(&mut s, &f, &a);
        while s.left_onsets.len() < 4 {
            s.advance(t, false, &f, &a);
            t += 1;
        }
        let gaps: Vec<u64> = s.left_onsets.windows(2).map(|w| w[1] - w[0]).collect();
        assert_eq!(gaps, vec![2 * (25 + 5); 3]);
    }

    #[test]
    fn forming_waits_while_blocked() {
        let (f, a) = fib();
        let mut s = SegmentController::forming(0, 0, 3, 4);
        for t in 0..10 {
            s.advance(t, true, &f, &a);
        }
        assert_eq!(s.phase, Phase::Forming);
        for t in 10..14 {
            s.advance(t, false, &f, &a);
        }
        assert_eq!(s.phase, Phase::Conscious);
    }
}
