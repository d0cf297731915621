//! `run`, `oracle` and `diagram`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use mulimit::analyzer::{
    classify, density_csv, segment_csv, segment_stats, Class, DensitySeries, DensityTracker,
    SegmentStats, Verdict,
};
use mulimit::construction::SimulatedAutomaton;
use mulimit::engine::{
    exact_measure, max_automaton, sample_cells, step_cells, trial_rng, LocalRule, Method,
};
use mulimit::symbolic::{Alphabet, CyclicWindow, Word};
use num_rational::Ratio;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Mode};
use crate::diagram::{binary_gray, construction_gray, Graymap, MAX_OUTPUT_SYMBOLS};
use crate::CliError;

pub const VERDICT_CSV_HEADER: &str =
    "word,class,peak,first_quarter_mean,final_quarter_mean,ratio,transient,horizon,trials,decay_ratio,persist_ratio,note";

/// Oracle rule by name: `max` or `eca-N` (elementary rule N).
pub fn oracle_rule(name: &str) -> Result<LocalRule, CliError> {
    if name == "max" {
        return Ok(max_automaton());
    }
    let number = name
        .strip_prefix("eca-")
        .and_then(|n| n.parse::<u8>().ok())
        .ok_or_else(|| CliError::Validation {
            field: "rule".to_string(),
            message: format!("unknown rule {name:?}; use max or eca-N"),
        })?;
    Ok(LocalRule::from_fn(name, Alphabet::binary(), 1, |nb| {
        let idx = (nb[0] << 2) | (nb[1] << 1) | nb[2];
        (number >> idx) & 1
    })?)
}

/// Prints `count total ratio` for the configured rule, word and time.
pub fn cmd_oracle(config: &ExperimentConfig, out: &mut impl Write) -> Result<(), CliError> {
    let rule = oracle_rule(&config.rule)?;
    let word = rule.alphabet().word(&config.word).map_err(|e| CliError::Validation {
        field: "word".to_string(),
        message: e.to_string(),
    })?;
    let m = exact_measure(&rule, &word, config.time)?;
    let Method::ExactPredecessors { count, total } = m.method else { unreachable!("exact") };
    writeln!(out, "{count} {total} {}", m.value).map_err(|e| CliError::io("stdout", e))
}

/// Everything one trial produces.
#[derive(Clone, Debug)]
pub struct TrialOutput {
    pub series: Vec<DensitySeries>,
    pub stats: Vec<SegmentStats>,
    pub diagram: Option<Graymap>,
}

fn parse_queries(config: &ExperimentConfig, alphabet: &Alphabet) -> Result<Vec<Word>, CliError> {
    config
        .queries
        .iter()
        .map(|q| {
            alphabet.word(q).map_err(|e| CliError::Validation {
                field: "queries".to_string(),
                message: format!("{q:?}: {e}"),
            })
        })
        .collect()
}

/// Alphabet in which the configured queries are written.
pub fn query_alphabet(config: &ExperimentConfig) -> Result<Alphabet, CliError> {
    match config.mode {
        Mode::MaxFixture => Ok(max_automaton().alphabet().clone()),
        _ => Ok(mulimit::construction::main_alphabet(&config.family_spec()?)?),
    }
}

/// Runs trial `trial` of a run-mode configuration.
pub fn run_trial(
    config: &ExperimentConfig,
    trial: u64,
    record_diagram: bool,
) -> Result<TrialOutput, CliError> {
    match config.mode {
        Mode::MaxFixture => max_trial(config, trial, record_diagram),
        Mode::ConstructRun => construct_trial(config, trial, record_diagram),
        Mode::Oracle => Err(CliError::Validation {
            field: "mode".to_string(),
            message: "oracle mode has no trials; use the oracle command".to_string(),
        }),
    }
}

fn max_trial(config: &ExperimentConfig, trial: u64, record: bool) -> Result<TrialOutput, CliError> {
    let rule = max_automaton();
    let queries = parse_queries(config, rule.alphabet())?;
    let mut tracker = DensityTracker::new(&queries, config.stride)?;
    let mut rng = trial_rng(config.seed, trial);
    let mut cells = sample_cells(rule.alphabet(), config.width, 0.0, &mut rng)?;
    let mut diagram = record.then(|| Graymap::new(config.width));
    for t in 0..=config.steps {
        if t > 0 {
            cells = step_cells(&rule, &cells);
        }
        tracker.observe(t, &CyclicWindow::new(cells.clone())?)?;
        if let Some(d) = diagram.as_mut() {
            d.push(cells.iter().map(|&s| binary_gray(s)).collect());
        }
    }
    Ok(TrialOutput { series: tracker.finish(), stats: Vec::new(), diagram })
}

fn construct_trial(
    config: &ExperimentConfig,
    trial: u64,
    record: bool,
) -> Result<TrialOutput, CliError> {
    let params = config.construction_params()?;
    if record && params.family.output_chars().len() > MAX_OUTPUT_SYMBOLS {
        return Err(CliError::Validation {
            field: "family".to_string(),
            message: format!("diagrams support at most {MAX_OUTPUT_SYMBOLS} output symbols"),
        });
    }
    let mut sim =
        SimulatedAutomaton::random(params, config.width, config.star_density, config.seed, trial)?;
    let queries = parse_queries(config, sim.alphabet())?;
    let mut tracker = DensityTracker::new(&queries, config.stride)?;
    let mut stats = Vec::new();
    let mut diagram = record.then(|| Graymap::new(config.width));
    let mut failure = None;
    let mut observe = |s: &SimulatedAutomaton, sampled: bool| {
        let state = s.state();
        if sampled {
            if let Err(e) = tracker.observe(s.time(), &s.project()) {
                failure.get_or_insert(e);
            }
            stats.push(segment_stats(s.time(), &state));
        }
        if let Some(d) = diagram.as_mut() {
            d.push(state.iter().map(construction_gray).collect());
        }
    };
    let stride = config.stride;
    sim.run_observed(config.steps, 1, |s| observe(s, s.time() % stride == 0));
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok(TrialOutput { series: tracker.finish(), stats, diagram })
}

/// Mean of per-trial segment statistics sampled at the same times.
pub fn mean_stats(trials: &[Vec<SegmentStats>]) -> Vec<SegmentStats> {
    let Some(first) = trials.first() else { return Vec::new() };
    let n = Ratio::from_integer(trials.len());
    (0..first.len())
        .map(|i| {
            let mut classes: BTreeMap<usize, Ratio<usize>> = BTreeMap::new();
            let mut out = Ratio::from_integer(0);
            let mut sharp = Ratio::from_integer(0);
            let mut compute = Ratio::from_integer(0);
            for t in trials {
                let s = &t[i];
                for (b, r) in &s.per_size_class {
                    *classes.entry(*b).or_insert_with(|| Ratio::from_integer(0)) += *r;
                }
                out += s.out_of_segment;
                sharp += s.sharp_density;
                compute += s.compute_share;
            }
            SegmentStats {
                time: first[i].time,
                per_size_class: classes.into_iter().map(|(b, r)| (b, r / n)).collect(),
                out_of_segment: out / n,
                sharp_density: sharp / n,
                compute_share: compute / n,
            }
        })
        .collect()
}

pub fn verdict_csv(verdicts: &[Verdict], alphabet: &Alphabet, trials: usize) -> String {
    let mut out = format!("{VERDICT_CSV_HEADER}\n");
    for v in verdicts {
        let e = &v.evidence;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            alphabet.render(v.word.symbols()),
            v.class.name(),
            e.peak,
            e.first_quarter_mean,
            e.final_quarter_mean,
            e.ratio(),
            e.transient,
            e.horizon,
            trials,
            v.decay_ratio,
            v.persist_ratio,
            v.note.as_deref().unwrap_or("")
        )
        .unwrap();
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn diagram_path(out: &Path, trial: u64) -> PathBuf {
    out.join(format!("diagram-trial-{trial}.pgm"))
}

/// Summary of a finished run.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub verdicts: Vec<Verdict>,
    pub files: Vec<PathBuf>,
}

impl RunSummary {
    pub fn any_inconclusive(&self) -> bool {
        self.verdicts.iter().any(|v| v.class == Class::Inconclusive)
    }
}

/// Runs every trial and writes `densities.csv`, `segments.csv`,
/// `verdicts.csv` and, when requested, one diagram per trial.
pub fn cmd_run(config: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary, CliError> {
    config.validate_run()?;
    let alphabet = query_alphabet(config)?;
    let outputs: Vec<TrialOutput> = (0..config.trials as u64)
        .into_par_iter()
        .map(|trial| run_trial(config, trial, config.diagram))
        .collect::<Result<_, _>>()?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;

    let series: Vec<DensitySeries> = (0..config.queries.len())
        .map(|q| {
            let per_trial: Vec<DensitySeries> = outputs.iter().map(|o| o.series[q].clone()).collect();
            DensitySeries::mean(&per_trial)
        })
        .collect::<Result<_, _>>()?;
    let stats = mean_stats(&outputs.iter().map(|o| o.stats.clone()).collect::<Vec<_>>());
    let verdicts: Vec<Verdict> =
        series.iter().map(|s| classify(s, config.transient)).collect::<Result<_, _>>()?;

    let mut files = Vec::new();
    for (name, contents) in [
        ("densities.csv", density_csv(&series, &alphabet)),
        ("segments.csv", segment_csv(&stats)),
        ("verdicts.csv", verdict_csv(&verdicts, &alphabet, config.trials)),
    ] {
        let path = out_dir.join(name);
        write_file(&path, &contents)?;
        files.push(path);
    }
    for (trial, o) in outputs.iter().enumerate() {
        if let Some(d) = &o.diagram {
            let path = diagram_path(out_dir, trial as u64);
            write_file(&path, &d.to_pgm())?;
            files.push(path);
        }
    }
    Ok(RunSummary { verdicts, files })
}

/// Re-runs one trial and writes its diagram.
pub fn cmd_diagram(config: &ExperimentConfig, trial: u64, out_dir: &Path) -> Result<PathBuf, CliError> {
    config.validate()?;
    let output = run_trial(config, trial, true)?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let path = diagram_path(out_dir, trial);
    write_file(&path, &output.diagram.expect("recorded").to_pgm())?;
    Ok(path)
}
