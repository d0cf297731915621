//! Evidence for μ-limit membership: density time series of query words,
//! segment-class accounting and finite-horizon decay/persistence verdicts.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::Ratio;

use crate::construction::{CellState, SHARP, STAR};
use crate::engine::{exact_measure, monte_carlo_measure, LocalRule, MeasureEstimate, Method, SpaceTimeRecord};
use crate::error::{Error, Result};
use crate::symbolic::{window_density, Alphabet, CyclicWindow, Word};

/// A word is decaying when its final-quarter mean is at most this fraction of
/// its post-transient peak.
pub const DECAY_RATIO: f64 = 0.2;
/// A word is persistent when its final-quarter mean is at least this fraction
/// of its post-transient peak.
pub const PERSIST_RATIO: f64 = 0.5;
/// Exact and empirical measures disagree beyond this many standard errors.
pub const AGREEMENT_STD_ERRORS: f64 = 3.0;

pub const DENSITY_CSV_HEADER: &str = "time,word,density,trials";
pub const SEGMENT_CSV_HEADER: &str = "time,bucket,share";

#[derive(Clone, Debug, PartialEq)]
pub struct DensitySeries {
    pub word: Word,
    pub samples: BTreeMap<u64, f64>,
    pub trials: usize,
}

impl DensitySeries {
    pub fn new(word: Word) -> Self {
        Self { word, samples: BTreeMap::new(), trials: 1 }
    }

    pub fn points(&self) -> Vec<(u64, f64)> {
        self.samples.iter().map(|(&t, &d)| (t, d)).collect()
    }

    /// Folds another trial's series in, weighting each side by its trial
    /// count. Both series must sample the same word at the same times.
    pub fn merge(&mut self, other: &DensitySeries) -> Result<()> {
        if self.word != other.word || !self.samples.keys().eq(other.samples.keys()) {
            return Err(Error::contract("merged series must share word and sample times"));
        }
        let (a, b) = (self.trials as f64, other.trials as f64);
        for (t, d) in self.samples.iter_mut() {
            *d = (*d * a + other.samples[t] * b) / (a + b);
        }
        self.trials += other.trials;
        Ok(())
    }

    /// Mean of several trials' series.
    pub fn mean(series: &[DensitySeries]) -> Result<DensitySeries> {
        let (first, rest) =
            series.split_first().ok_or_else(|| Error::contract("no series to average"))?;
        let mut out = first.clone();
        for s in rest {
            out.merge(s)?;
        }
        Ok(out)
    }
}

/// Online density tracker for runs too long to record in full.
#[derive(Clone, Debug)]
pub struct DensityTracker {
    stride: u64,
    series: Vec<DensitySeries>,
}

impl DensityTracker {
    pub fn new(queries: &[Word], stride: u64) -> Result<Self> {
        if stride == 0 {
            return Err(Error::contract("stride must be positive"));
        }
        if queries.iter().any(|q| q.is_empty()) {
            return Err(Error::contract("query words must be nonempty"));
        }
        Ok(Self { stride, series: queries.iter().cloned().map(DensitySeries::new).collect() })
    }

    pub fn stride(&self) -> u64 {
        self.stride
    }

    /// Records densities at `time` if it is a multiple of the stride.
    pub fn observe(&mut self, time: u64, window: &CyclicWindow) -> Result<()> {
        if !time.is_multiple_of(self.stride) {
            return Ok(());
        }
        for s in &mut self.series {
            if s.word.len() > window.len() {
                return Err(Error::contract("query longer than the window"));
            }
            let d = window_density(window, &s.word)?;
            s.samples.insert(time, *d.numer() as f64 / *d.denom() as f64);
        }
        Ok(())
    }

    pub fn finish(self) -> Vec<DensitySeries> {
        self.series
    }
}

/// Density series of each query over the projected rows of a record.
pub fn track(record: &SpaceTimeRecord, queries: &[Word], stride: u64) -> Result<Vec<DensitySeries>> {
    if let Some(q) = queries.iter().find(|q| q.len() > record.width()) {
        return Err(Error::contract(format!(
            "query of length {} exceeds window width {}",
            q.len(),
            record.width()
        )));
    }
    let mut tracker = DensityTracker::new(queries, stride)?;
    for t in 0..record.rows.len() {
        tracker.observe(t as u64, &record.window(t))?;
    }
    Ok(tracker.finish())
}

/// Cell accounting of a construction state window. Every cell falls in
/// exactly one class, so all shares sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentStats {
    pub time: u64,
    /// Interior cells of segments whose length rounds up to the bucket (a
    /// power of two), excluding compute-flagged cells.
    pub per_size_class: BTreeMap<usize, Ratio<usize>>,
    pub out_of_segment: Ratio<usize>,
    pub sharp_density: Ratio<usize>,
    pub compute_share: Ratio<usize>,
}

impl SegmentStats {
    pub fn total(&self) -> Ratio<usize> {
        self.per_size_class.values().copied().sum::<Ratio<usize>>()
            + self.out_of_segment
            + self.sharp_density
            + self.compute_share
    }

    /// Share of cells in segments of length at most `n`.
    pub fn share_up_to(&self, n: usize) -> Ratio<usize> {
        self.per_size_class.range(..=n.next_power_of_two()).map(|(_, r)| *r).sum()
    }
}

pub fn size_bucket(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

/// Segments are the runs between cyclically consecutive `#`. A run that
/// still holds `*` or carries counter signals is not a segment yet; without
/// any `#` every cell is outside segments.
pub fn segment_stats(time: u64, cells: &[CellState]) -> SegmentStats {
    let width = cells.len();
    let sharps: Vec<usize> = (0..width).filter(|&i| cells[i].main == SHARP).collect();
    let mut classes: BTreeMap<usize, usize> = BTreeMap::new();
    let mut out = 0;
    let mut compute = 0;
    if sharps.is_empty() {
        out = width;
    } else {
        for (i, &p) in sharps.iter().enumerate() {
            let q = sharps[(i + 1) % sharps.len()];
            let n = if sharps.len() == 1 { width - 1 } else { (q + width - p - 1) % width };
            let run = (1..=n).map(|j| &cells[(p + j) % width]);
            if run.clone().any(|c| !c.counter.is_empty() || c.main == STAR) {
                out += n;
                continue;
            }
            let flagged = run.filter(|c| c.compute).count();
            compute += flagged;
            if n > flagged {
                *classes.entry(size_bucket(n)).or_default() += n - flagged;
            }
        }
    }
    let share = |k: usize| Ratio::new(k, width);
    SegmentStats {
        time,
        per_size_class: classes.into_iter().map(|(b, k)| (b, share(k))).collect(),
        out_of_segment: share(out),
        sharp_density: share(sharps.len()),
        compute_share: share(compute),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Class {
    Decaying,
    Persistent,
    Inconclusive,
}

impl Class {
    pub fn name(self) -> &'static str {
        match self {
            Class::Decaying => "decaying",
            Class::Persistent => "persistent",
            Class::Inconclusive => "inconclusive",
        }
    }
}

/// Summary of a series after its transient.
#[derive(Clone, Debug, PartialEq)]
pub struct Trend {
    pub transient: u64,
    pub horizon: u64,
    pub samples: usize,
    pub peak: f64,
    pub first_quarter_mean: f64,
    pub final_quarter_mean: f64,
    pub final_quarter_min: f64,
}

impl Trend {
    /// Final-quarter mean over peak (zero for an all-zero series).
    pub fn ratio(&self) -> f64 {
        if self.peak > 0.0 {
            self.final_quarter_mean / self.peak
        } else {
            0.0
        }
    }

    /// Final-quarter mean below `fraction` of the peak.
    pub fn fell_below(&self, fraction: f64) -> bool {
        self.final_quarter_mean < fraction * self.peak
    }
}

/// Quarters are taken over the samples at times `>= transient`.
pub fn trend(points: &[(u64, f64)], transient: u64) -> Result<Trend> {
    let post: Vec<(u64, f64)> = points.iter().copied().filter(|&(t, _)| t >= transient).collect();
    let horizon = points.iter().map(|&(t, _)| t).max().unwrap_or(0);
    if post.is_empty() || horizon <= transient {
        return Err(Error::contract(format!(
            "series horizon {horizon} does not extend past transient {transient}"
        )));
    }
    let q = (post.len() / 4).max(1);
    let mean = |xs: &[(u64, f64)]| xs.iter().map(|&(_, d)| d).sum::<f64>() / xs.len() as f64;
    let last = &post[post.len() - q..];
    Ok(Trend {
        transient,
        horizon,
        samples: post.len(),
        peak: post.iter().map(|&(_, d)| d).fold(0.0, f64::max),
        first_quarter_mean: mean(&post[..q]),
        final_quarter_mean: mean(last),
        final_quarter_min: last.iter().map(|&(_, d)| d).fold(f64::INFINITY, f64::min),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub word: Word,
    pub class: Class,
    pub evidence: Trend,
    pub decay_ratio: f64,
    pub persist_ratio: f64,
    pub note: Option<String>,
}

/// Decaying: final-quarter mean at most [`DECAY_RATIO`] of the peak and below
/// the first-quarter mean. Persistent: final-quarter mean at least
/// [`PERSIST_RATIO`] of the peak with the word present at every final-quarter
/// sample. Anything else is inconclusive.
pub fn classify(series: &DensitySeries, transient: u64) -> Result<Verdict> {
    let evidence = trend(&series.points(), transient)?;
    let mut note = None;
    let class = if evidence.peak == 0.0 {
        note = Some("word never observed after the transient".to_string());
        Class::Decaying
    } else if evidence.final_quarter_mean <= DECAY_RATIO * evidence.peak
        && evidence.final_quarter_mean < evidence.first_quarter_mean
    {
        Class::Decaying
    } else if evidence.final_quarter_mean >= PERSIST_RATIO * evidence.peak
        && evidence.final_quarter_min > 0.0
    {
        Class::Persistent
    } else {
        Class::Inconclusive
    };
    Ok(Verdict {
        word: series.word.clone(),
        class,
        evidence,
        decay_ratio: DECAY_RATIO,
        persist_ratio: PERSIST_RATIO,
        note,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Agreement {
    pub exact: MeasureEstimate,
    pub empirical: MeasureEstimate,
    /// |empirical - exact| in standard errors (infinite when the error is
    /// zero and the values differ).
    pub deviation: f64,
    pub agree: bool,
}

pub fn exact_vs_empirical(
    rule: &LocalRule,
    u: &Word,
    n: usize,
    trials: usize,
    width: usize,
    seed: u64,
) -> Result<Agreement> {
    let exact = exact_measure(rule, u, n)?;
    let empirical = monte_carlo_measure(rule, u, n, trials, width, seed)?;
    let Method::MonteCarlo { std_error, .. } = empirical.method else {
        unreachable!("monte carlo estimate")
    };
    let diff = (empirical.value - exact.value).abs();
    let deviation = if std_error > 0.0 {
        diff / std_error
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(Agreement { exact, empirical, deviation, agree: deviation <= AGREEMENT_STD_ERRORS })
}

pub fn density_csv(series: &[DensitySeries], alphabet: &Alphabet) -> String {
    let mut rows: Vec<(u64, String, f64, usize)> = Vec::new();
    for s in series {
        let word = alphabet.render(s.word.symbols());
        for (&t, &d) in &s.samples {
            rows.push((t, word.clone(), d, s.trials));
        }
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let mut out = format!("{DENSITY_CSV_HEADER}\n");
    for (t, w, d, n) in rows {
        writeln!(out, "{t},{w},{d},{n}").unwrap();
    }
    out
}

/// Buckets are written as numbers, plus the rows `out`, `sharp` and
/// `compute`.
pub fn segment_csv(stats: &[SegmentStats]) -> String {
    let f = |r: Ratio<usize>| *r.numer() as f64 / *r.denom() as f64;
    let mut out = format!("{SEGMENT_CSV_HEADER}\n");
    for s in stats {
        for (b, r) in &s.per_size_class {
            writeln!(out, "{},{b},{}", s.time, f(*r)).unwrap();
        }
        writeln!(out, "{},out,{}", s.time, f(s.out_of_segment)).unwrap();
        writeln!(out, "{},sharp,{}", s.time, f(s.sharp_density)).unwrap();
        writeln!(out, "{},compute,{}", s.time, f(s.compute_share)).unwrap();
    }
    out
}
