//! Counter layer: a radius-2 local rule over (main symbol, signal bits).
//!
//! Each `*` spawns a left and a right counter made of a fast outer signal
//! (speed 1) and a slow inner signal (speed `1/period`). A maximal run of
//! consecutive `*` acts as a single origin. Outer signals blank every cell
//! they enter. When two outer signals meet they stop and leave a collision
//! marker (one cell for even gaps, two halves `A`/`B` for odd gaps), and each
//! side launches a comparison signal towards its own inner signal. The
//! comparison bounces there and returns. Equal return times write `#`; a
//! strictly earlier return means the returning side is younger, and its outer
//! signal is re-emitted across the marker, erasing the older counter. Inner
//! signals are absorbed by `#`. Right-moving signals crossing a left outer
//! signal are destroyed, and symmetrically.

use crate::engine::CellRule;
use crate::symbolic::Symbol;

use super::alphabet::{BLANK, SHARP, STAR};

/// Bit set of counter signals carried by a cell.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Signals(pub u16);

impl Signals {
    pub const OUTER_R: u16 = 1 << 0;
    pub const OUTER_L: u16 = 1 << 1;
    pub const INNER_R: u16 = 1 << 2;
    pub const INNER_L: u16 = 1 << 3;
    pub const CMP_OUT_L: u16 = 1 << 4;
    pub const CMP_OUT_R: u16 = 1 << 5;
    pub const CMP_BACK_R: u16 = 1 << 6;
    pub const CMP_BACK_L: u16 = 1 << 7;
    pub const MARK_A: u16 = 1 << 8;
    pub const MARK_B: u16 = 1 << 9;
    /// Two-bit phase counters of the inner signals.
    const PHASE_R_SHIFT: u16 = 10;
    const PHASE_L_SHIFT: u16 = 12;
    const PHASE_MASK: u16 = 0b11;

    pub const NONE: Signals = Signals(0);

    pub fn has(self, bits: u16) -> bool {
        self.0 & bits != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn phase_r(self) -> u16 {
        (self.0 >> Self::PHASE_R_SHIFT) & Self::PHASE_MASK
    }

    pub fn phase_l(self) -> u16 {
        (self.0 >> Self::PHASE_L_SHIFT) & Self::PHASE_MASK
    }

    fn with_phase_r(self, p: u16) -> Self {
        Signals(self.0 & !(Self::PHASE_MASK << Self::PHASE_R_SHIFT) | (p << Self::PHASE_R_SHIFT))
    }

    fn with_phase_l(self, p: u16) -> Self {
        Signals(self.0 & !(Self::PHASE_MASK << Self::PHASE_L_SHIFT) | (p << Self::PHASE_L_SHIFT))
    }

    /// Mirror image: swaps every left/right pair and the A/B marker halves.
    pub fn mirrored(self) -> Self {
        let pairs = [
            (Self::OUTER_R, Self::OUTER_L),
            (Self::INNER_R, Self::INNER_L),
            (Self::CMP_OUT_L, Self::CMP_OUT_R),
            (Self::CMP_BACK_R, Self::CMP_BACK_L),
            (Self::MARK_A, Self::MARK_B),
        ];
        let mut out = 0u16;
        for (a, b) in pairs {
            if self.has(a) {
                out |= b;
            }
            if self.has(b) {
                out |= a;
            }
        }
        Signals(out).with_phase_r(self.phase_l()).with_phase_l(self.phase_r())
    }
}

/// Main symbol plus counter signals: the state the counter rule acts on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct CounterCell {
    pub main: Symbol,
    pub signals: Signals,
}

impl CounterCell {
    pub fn new(main: Symbol, signals: u16) -> Self {
        Self { main, signals: Signals(signals) }
    }
}

/// The counter rule, parameterized by the inner-signal period (inner speed
/// `1/period`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CounterRule {
    period: u16,
}

impl CounterRule {
    /// `period` in `2..=4`.
    pub fn new(period: u16) -> Option<Self> {
        (2..=4).contains(&period).then_some(Self { period })
    }

    pub fn period(&self) -> u16 {
        self.period
    }

    /// Inner-signal contribution at the center cell.
    fn inner(&self, l: Signals, c: Signals, r: Signals, center_main: Symbol) -> Signals {
        let last = self.period - 1;
        let mut out = Signals::NONE;
        // right-moving inner: stays while its phase counts up, then moves
        let mut in_r = None;
        if c.has(Signals::INNER_R) && c.phase_r() < last {
            in_r = Some(c.phase_r() + 1);
        }
        if l.has(Signals::INNER_R) && l.phase_r() == last && !c.has(Signals::OUTER_L) {
            in_r = Some(0);
        }
        if let Some(p) = in_r {
            if center_main != SHARP {
                out = Signals(out.0 | Signals::INNER_R).with_phase_r(p);
            }
        }
        let mut in_l = None;
        if c.has(Signals::INNER_L) && c.phase_l() < last {
            in_l = Some(c.phase_l() + 1);
        }
        if r.has(Signals::INNER_L) && r.phase_l() == last && !c.has(Signals::OUTER_R) {
            in_l = Some(0);
        }
        if let Some(p) = in_l {
            if center_main != SHARP {
                out = Signals(out.0 | Signals::INNER_L).with_phase_l(p);
            }
        }
        out
    }
}

/// A left-moving comparison signal at `at` meets the right inner signal on
/// its own cell or the cell to its left.
fn bounces_left(at: Signals, left: Signals) -> bool {
    at.has(Signals::CMP_OUT_L) && (at.has(Signals::INNER_R) || left.has(Signals::INNER_R))
}

fn bounces_right(at: Signals, right: Signals) -> bool {
    at.has(Signals::CMP_OUT_R) && (at.has(Signals::INNER_L) || right.has(Signals::INNER_L))
}

impl Default for CounterRule {
    fn default() -> Self {
        Self { period: 2 }
    }
}

impl CellRule for CounterRule {
    type Cell = CounterCell;

    fn radius(&self) -> usize {
        2
    }

    fn apply(&self, nb: &[CounterCell]) -> CounterCell {
        let [ll, l, c, r, rr] = [nb[0], nb[1], nb[2], nb[3], nb[4]];
        let (sll, sl, sc, sr, srr) = (ll.signals, l.signals, c.signals, r.signals, rr.signals);

        if c.main == STAR {
            let mut bits = 0;
            if l.main != STAR {
                bits |= Signals::OUTER_L | Signals::INNER_L;
            }
            if r.main != STAR {
                bits |= Signals::OUTER_R | Signals::INNER_R;
            }
            return CounterCell::new(BLANK, bits);
        }

        // Collision markers resolve first: a `#` written here beats anything
        // else arriving on the cell.
        if sc.has(Signals::MARK_A) || sc.has(Signals::MARK_B) {
            let even = sc.has(Signals::MARK_A) && sc.has(Signals::MARK_B);
            let (back_a, back_b) = if even {
                (
                    sl.has(Signals::CMP_BACK_R) || sc.has(Signals::CMP_BACK_R),
                    sr.has(Signals::CMP_BACK_L) || sc.has(Signals::CMP_BACK_L),
                )
            } else if sc.has(Signals::MARK_A) {
                (
                    sl.has(Signals::CMP_BACK_R) || sc.has(Signals::CMP_BACK_R),
                    srr.has(Signals::CMP_BACK_L) || sr.has(Signals::CMP_BACK_L),
                )
            } else {
                (
                    sll.has(Signals::CMP_BACK_R) || sl.has(Signals::CMP_BACK_R),
                    sr.has(Signals::CMP_BACK_L) || sc.has(Signals::CMP_BACK_L),
                )
            };
            let is_a = sc.has(Signals::MARK_A);
            let is_b = sc.has(Signals::MARK_B);
            match (back_a, back_b) {
                (true, true) if is_a => return CounterCell::new(SHARP, 0),
                (true, true) => return CounterCell::new(BLANK, 0),
                // left side younger: its outer continues rightwards from B
                (true, false) if is_b => return CounterCell::new(BLANK, Signals::OUTER_R),
                (true, false) => return CounterCell::new(BLANK, 0),
                (false, true) if is_a => return CounterCell::new(BLANK, Signals::OUTER_L),
                (false, true) => return CounterCell::new(BLANK, 0),
                (false, false) => {}
            }
            // Unresolved markers persist unless a foreign outer erases them.
            // A comparison signal launched here may bounce immediately.
            if !(sl.has(Signals::OUTER_R) || sr.has(Signals::OUTER_L)) {
                let mut keep = sc.0 & (Signals::MARK_A | Signals::MARK_B)
                    | self.inner(sl, sc, sr, c.main).0;
                if bounces_left(sc, sl) {
                    keep |= Signals::CMP_BACK_R;
                }
                if bounces_right(sc, sr) {
                    keep |= Signals::CMP_BACK_L;
                }
                return CounterCell::new(c.main, keep);
            }
        }

        // Outer collisions.
        let from_l = sl.has(Signals::OUTER_R);
        let from_r = sr.has(Signals::OUTER_L);
        // Inner signals on or entering a new marker survive it.
        let marker = |bits: u16| {
            let inner = self.inner(sl, sc, sr, BLANK).0;
            CounterCell::new(BLANK, bits | inner)
        };
        if from_l && from_r {
            return marker(Signals::MARK_A | Signals::MARK_B | Signals::CMP_OUT_L | Signals::CMP_OUT_R);
        }
        if sc.has(Signals::OUTER_R) && from_r {
            return marker(Signals::MARK_A | Signals::CMP_OUT_L);
        }
        if from_l && sc.has(Signals::OUTER_L) {
            return marker(Signals::MARK_B | Signals::CMP_OUT_R);
        }
        // Plain outer arrival erases everything else on the cell.
        if from_l && !sc.has(Signals::OUTER_L) {
            return CounterCell::new(BLANK, Signals::OUTER_R);
        }
        if from_r && !sc.has(Signals::OUTER_R) {
            return CounterCell::new(BLANK, Signals::OUTER_L);
        }

        let mut out = self.inner(sl, sc, sr, c.main);

        // Comparison signals heading for their own inner border.
        if sr.has(Signals::CMP_OUT_L) && !bounces_left(sr, sc) && !sc.has(Signals::OUTER_R) {
            out.0 |= Signals::CMP_OUT_L;
        }
        if sl.has(Signals::CMP_OUT_R) && !bounces_right(sl, sc) && !sc.has(Signals::OUTER_L) {
            out.0 |= Signals::CMP_OUT_R;
        }
        if bounces_left(sc, sl) {
            out.0 |= Signals::CMP_BACK_R;
        }
        if bounces_right(sc, sr) {
            out.0 |= Signals::CMP_BACK_L;
        }
        // Returning comparison signals travel until a marker absorbs them.
        if sl.has(Signals::CMP_BACK_R)
            && !sl.has(Signals::MARK_A)
            && !sc.has(Signals::OUTER_L)
        {
            out.0 |= Signals::CMP_BACK_R;
        }
        if sr.has(Signals::CMP_BACK_L)
            && !sr.has(Signals::MARK_B)
            && !sc.has(Signals::OUTER_R)
        {
            out.0 |= Signals::CMP_BACK_L;
        }

        CounterCell { main: c.main, signals: out }
    }
}
