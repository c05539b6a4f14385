//! Line-oriented experiment descriptions: a single `[command]` section
//! followed by `key = value` lines. `#` starts a comment anywhere on a
//! line, lists are comma-separated, and every diagnostic names the line it
//! came from. Cell states in `probs`, `row` and `word` use the storage
//! encoding, so for the three-letter glider alphabet index 0 is -1, index 1
//! is 0 and index 2 is +1.

use anyhow::{anyhow, bail, Result};
use gliders::entrytime::Side;
use gliders::measures::SamplerSpec;
use gliders::oracle::IncrementDist;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub command: CommandConfig,
    pub seed: u64,
    pub workers: Option<usize>,
    pub out: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CommandConfig {
    Simulate(SimulateConfig),
    EntryTime(EntryTimeConfig),
    FactorEntryTime(FactorEntryTimeConfig),
    FactorCheck(FactorCheckConfig),
    Oracle(OracleConfig),
    MixDiagnose(MixDiagnoseConfig),
}

impl CommandConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CommandConfig::Simulate(_) => "simulate",
            CommandConfig::EntryTime(_) => "entrytime",
            CommandConfig::FactorEntryTime(_) => "factor-entrytime",
            CommandConfig::FactorCheck(_) => "factor-check",
            CommandConfig::Oracle(_) => "oracle",
            CommandConfig::MixDiagnose(_) => "mix-diagnose",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulateConfig {
    pub rule: (i64, i64),
    pub sampler: SamplerConfig,
    pub width: usize,
    pub steps: usize,
    pub trial: u64,
    pub formats: Vec<DiagramFormat>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagramFormat {
    Ascii,
    Pgm,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntryTimeConfig {
    pub rule: (i64, i64),
    pub sampler: SamplerConfig,
    pub n: u64,
    pub trials: u64,
    pub xs: Vec<f64>,
    pub side: Side,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactorEntryTimeConfig {
    pub factor: String,
    pub sampler: SamplerConfig,
    pub n: u64,
    pub trials: u64,
    pub xs: Vec<f64>,
    pub side: Side,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactorCheckConfig {
    pub factor: String,
    pub width: usize,
    pub samples: u64,
    pub exhaustive_width: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleConfig {
    pub y: f64,
    pub z: f64,
    pub epsilon: f64,
    pub walk_steps: u64,
    pub trials: u64,
    pub increments: IncrementConfig,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IncrementConfig {
    Fair,
    ThreePoint { p: f64 },
}

impl IncrementConfig {
    pub fn build(&self) -> IncrementDist {
        match *self {
            IncrementConfig::Fair => IncrementDist::FairSign,
            IncrementConfig::ThreePoint { p } => IncrementDist::ThreePoint { p },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixDiagnoseConfig {
    pub sampler: SamplerConfig,
    pub length: usize,
    pub lag: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SamplerConfig {
    Bernoulli { probs: Vec<f64> },
    Markov { rows: Vec<Vec<f64>> },
    Dirac { word: Vec<u8>, alphabet: u8, uniform_phase: bool },
}

impl SamplerConfig {
    /// Construct the library sampler with the effective seed.
    pub fn build(&self, seed: u64) -> gliders::Result<SamplerSpec> {
        match self {
            SamplerConfig::Bernoulli { probs } => SamplerSpec::bernoulli(seed, probs.clone()),
            SamplerConfig::Markov { rows } => SamplerSpec::markov(seed, rows.clone()),
            SamplerConfig::Dirac {
                word,
                alphabet,
                uniform_phase,
            } => SamplerSpec::dirac_periodic(seed, word.clone(), *alphabet, *uniform_phase),
        }
    }
}

const COMMANDS: &[&str] = &[
    "simulate",
    "entrytime",
    "factor-entrytime",
    "factor-check",
    "oracle",
    "mix-diagnose",
];

struct Entry {
    key: String,
    value: String,
    line: usize,
    used: bool,
}

/// The section body with consumption tracking, so leftovers can be
/// reported as unknown keys.
struct Bag {
    section: &'static str,
    section_line: usize,
    entries: Vec<Entry>,
}

impl Bag {
    fn take(&mut self, key: &str) -> Result<Option<(String, usize)>> {
        let mut found: Option<(String, usize)> = None;
        for e in &mut self.entries {
            if e.key == key && !e.used {
                if found.is_some() {
                    bail!("line {}: duplicate key `{}`", e.line, key);
                }
                e.used = true;
                found = Some((e.value.clone(), e.line));
            }
        }
        Ok(found)
    }

    fn take_all(&mut self, key: &str) -> Vec<(String, usize)> {
        let mut out = Vec::new();
        for e in &mut self.entries {
            if e.key == key && !e.used {
                e.used = true;
                out.push((e.value.clone(), e.line));
            }
        }
        out
    }

    fn require(&mut self, key: &str) -> Result<(String, usize)> {
        self.take(key)?.ok_or_else(|| {
            anyhow!(
                "line {}: [{}] is missing required key `{}`",
                self.section_line,
                self.section,
                key
            )
        })
    }

    fn finish(self) -> Result<()> {
        if let Some(e) = self.entries.iter().find(|e| !e.used) {
            bail!(
                "line {}: unknown key `{}` for [{}]",
                e.line,
                e.key,
                self.section
            );
        }
        Ok(())
    }
}

fn parse_typed<T: std::str::FromStr>(value: &str, line: usize, key: &str, what: &str) -> Result<T> {
    value
        .trim()
        .parse::<T>()
        .map_err(|_| anyhow!("line {line}: key `{key}`: expected {what}, got `{value}`"))
}

fn parse_list<T: std::str::FromStr>(value: &str, line: usize, key: &str, what: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|part| parse_typed(part, line, key, what))
        .collect()
}

fn take_parsed<T: std::str::FromStr>(
    bag: &mut Bag,
    key: &str,
    what: &str,
    default: T,
) -> Result<(T, Option<usize>)> {
    match bag.take(key)? {
        Some((v, line)) => Ok((parse_typed(v.as_str(), line, key, what)?, Some(line))),
        None => Ok((default, None)),
    }
}

fn parse_rule(bag: &mut Bag) -> Result<(i64, i64)> {
    let (value, line) = bag.require("rule")?;
    let speeds: Vec<i64> = parse_list(&value, line, "rule", "an integer")?;
    if speeds.len() != 2 {
        bail!("line {line}: key `rule`: expected two speeds `v-, v+`, got `{value}`");
    }
    let (v_minus, v_plus) = (speeds[0], speeds[1]);
    if v_minus >= 0 || v_plus < 0 {
        bail!(
            "line {line}: rule must satisfy v- < 0 <= v+ \
             (the entry-time law needs a left-moving species), got ({v_minus}, {v_plus})"
        );
    }
    Ok((v_minus, v_plus))
}

fn parse_side(bag: &mut Bag) -> Result<Side> {
    match bag.take("side")? {
        None => Ok(Side::Minus),
        Some((v, line)) => match v.as_str() {
            "minus" => Ok(Side::Minus),
            "plus" => Ok(Side::Plus),
            other => bail!("line {line}: key `side`: expected `minus` or `plus`, got `{other}`"),
        },
    }
}

fn parse_positive_u64(bag: &mut Bag, key: &str) -> Result<u64> {
    let (value, line) = bag.require(key)?;
    let n: u64 = parse_typed(&value, line, key, "a positive integer")?;
    if n == 0 {
        bail!("line {line}: {key} must be >= 1");
    }
    Ok(n)
}

fn parse_xs(bag: &mut Bag) -> Result<Vec<f64>> {
    let (value, line) = bag.require("xs")?;
    let xs: Vec<f64> = parse_list(&value, line, "xs", "a number")?;
    if xs.is_empty() {
        bail!("line {line}: xs needs at least one grid point");
    }
    for &x in &xs {
        if !x.is_finite() || x < 0.0 {
            bail!("line {line}: grid points must be finite and >= 0, got {x}");
        }
    }
    Ok(xs)
}

fn parse_sampler(bag: &mut Bag) -> Result<SamplerConfig> {
    let (kind, line) = bag.require("sampler")?;
    match kind.as_str() {
        "bernoulli" => {
            let (value, line) = bag.require("probs")?;
            let probs = parse_list(&value, line, "probs", "a probability")?;
            Ok(SamplerConfig::Bernoulli { probs })
        }
        "markov" => {
            let rows_raw = bag.take_all("row");
            if rows_raw.is_empty() {
                bail!("line {line}: markov sampler needs one `row = ...` per state");
            }
            let mut rows = Vec::with_capacity(rows_raw.len());
            for (value, line) in rows_raw {
                rows.push(parse_list(&value, line, "row", "a probability")?);
            }
            Ok(SamplerConfig::Markov { rows })
        }
        "dirac" => {
            let (value, line) = bag.require("word")?;
            let word = parse_list(&value, line, "word", "a state index")?;
            let (alphabet, _) = take_parsed(bag, "alphabet", "a state count", 3u8)?;
            let (uniform_phase, _) = take_parsed(bag, "uniform_phase", "true or false", true)?;
            Ok(SamplerConfig::Dirac {
                word,
                alphabet,
                uniform_phase,
            })
        }
        other => bail!(
            "line {line}: key `sampler`: expected bernoulli, markov or dirac, got `{other}`"
        ),
    }
}

/// Parse a config file. The first non-comment line must be a `[command]`
/// header; the rest of the file is its `key = value` body.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut section: Option<(&'static str, usize)> = None;
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| anyhow!("line {line_no}: unterminated section header `{line}`"))?
                .trim();
            let known = COMMANDS
                .iter()
                .find(|c| **c == name)
                .ok_or_else(|| {
                    anyhow!(
                        "line {line_no}: unknown command `{name}`; expected one of {}",
                        COMMANDS.join(", ")
                    )
                })?;
            if let Some((first, first_line)) = section {
                bail!(
                    "line {line_no}: second section [{name}] after [{first}] on line {first_line}; \
                     one experiment per file"
                );
            }
            section = Some((known, line_no));
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            anyhow!("line {line_no}: expected `key = value` or a `[command]` header, got `{line}`")
        })?;
        if section.is_none() {
            bail!("line {line_no}: `{}` appears before any [command] header", key.trim());
        }
        entries.push(Entry {
            key: key.trim().to_string(),
            value: value.trim().to_string(),
            line: line_no,
            used: false,
        });
    }
    let (section, section_line) = section.ok_or_else(|| anyhow!("config has no [command] section"))?;
    let mut bag = Bag {
        section,
        section_line,
        entries,
    };

    let command = match section {
        "simulate" => {
            let rule = parse_rule(&mut bag)?;
            let sampler = parse_sampler(&mut bag)?;
            let (width_v, width_line) = bag.require("width")?;
            let width: usize = parse_typed(&width_v, width_line, "width", "a positive integer")?;
            if width == 0 {
                bail!("line {width_line}: width must be >= 1");
            }
            let (steps_v, steps_line) = bag.require("steps")?;
            let steps: usize = parse_typed(&steps_v, steps_line, "steps", "a nonnegative integer")?;
            let (trial, _) = take_parsed(&mut bag, "trial", "a trial index", 0u64)?;
            let formats = match bag.take("formats")? {
                None => vec![DiagramFormat::Ascii, DiagramFormat::Pgm],
                Some((v, line)) => v
                    .split(',')
                    .map(|part| match part.trim() {
                        "ascii" => Ok(DiagramFormat::Ascii),
                        "pgm" => Ok(DiagramFormat::Pgm),
                        other => Err(anyhow!(
                            "line {line}: key `formats`: expected ascii or pgm, got `{other}`"
                        )),
                    })
                    .collect::<Result<Vec<_>>>()?,
            };
            CommandConfig::Simulate(SimulateConfig {
                rule,
                sampler,
                width,
                steps,
                trial,
                formats,
            })
        }
        "entrytime" => CommandConfig::EntryTime(EntryTimeConfig {
            rule: parse_rule(&mut bag)?,
            sampler: parse_sampler(&mut bag)?,
            n: parse_positive_u64(&mut bag, "n")?,
            trials: parse_positive_u64(&mut bag, "trials")?,
            xs: parse_xs(&mut bag)?,
            side: parse_side(&mut bag)?,
        }),
        "factor-entrytime" => CommandConfig::FactorEntryTime(FactorEntryTimeConfig {
            factor: bag.require("factor")?.0,
            sampler: parse_sampler(&mut bag)?,
            n: parse_positive_u64(&mut bag, "n")?,
            trials: parse_positive_u64(&mut bag, "trials")?,
            xs: parse_xs(&mut bag)?,
            side: parse_side(&mut bag)?,
        }),
        "factor-check" => {
            let factor = bag.require("factor")?.0;
            let (width, _) = take_parsed(&mut bag, "width", "a positive integer", 500usize)?;
            let (samples, _) = take_parsed(&mut bag, "samples", "a positive integer", 1000u64)?;
            let exhaustive_width = match bag.take("exhaustive_width")? {
                Some((v, line)) => Some(parse_typed(
                    &v,
                    line,
                    "exhaustive_width",
                    "a positive integer",
                )?),
                None => None,
            };
            CommandConfig::FactorCheck(FactorCheckConfig {
                factor,
                width,
                samples,
                exhaustive_width,
            })
        }
        "oracle" => {
            let (y_v, y_line) = bag.require("y")?;
            let y: f64 = parse_typed(&y_v, y_line, "y", "a positive number")?;
            let (z_v, z_line) = bag.require("z")?;
            let z: f64 = parse_typed(&z_v, z_line, "z", "a positive number")?;
            let (epsilon, _) = take_parsed(&mut bag, "epsilon", "a nonnegative number", 0.0f64)?;
            let walk_steps = parse_positive_u64(&mut bag, "walk_steps")?;
            let trials = parse_positive_u64(&mut bag, "trials")?;
            let increments = match bag.take("increments")? {
                None => IncrementConfig::Fair,
                Some((v, line)) => match v.as_str() {
                    "fair" => IncrementConfig::Fair,
                    "three-point" => {
                        let (p_v, p_line) = bag.require("p")?;
                        IncrementConfig::ThreePoint {
                            p: parse_typed(&p_v, p_line, "p", "a probability")?,
                        }
                    }
                    other => bail!(
                        "line {line}: key `increments`: expected fair or three-point, got `{other}`"
                    ),
                },
            };
            if matches!(increments, IncrementConfig::Fair) {
                if let Some((_, p_line)) = bag.take("p")? {
                    bail!("line {p_line}: key `p` only applies to three-point increments");
                }
            }
            CommandConfig::Oracle(OracleConfig {
                y,
                z,
                epsilon,
                walk_steps,
                trials,
                increments,
            })
        }
        "mix-diagnose" => CommandConfig::MixDiagnose(MixDiagnoseConfig {
            sampler: parse_sampler(&mut bag)?,
            length: {
                let (v, line) = bag.require("length")?;
                parse_typed(&v, line, "length", "a positive integer")?
            },
            lag: {
                let (v, line) = bag.require("lag")?;
                parse_typed(&v, line, "lag", "a positive integer")?
            },
        }),
        _ => unreachable!("section validated above"),
    };

    let (seed, _) = take_parsed(&mut bag, "seed", "an unsigned integer", 0u64)?;
    let workers = match bag.take("workers")? {
        Some((v, line)) => {
            let w: usize = parse_typed(&v, line, "workers", "a positive integer")?;
            if w == 0 {
                bail!("line {line}: workers must be >= 1");
            }
            Some(w)
        }
        None => None,
    };
    let out = bag.take("out")?.map(|(v, _)| v);
    bag.finish()?;

    Ok(ExperimentConfig {
        command,
        seed,
        workers,
        out,
    })
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn emit_sampler(out: &mut String, sampler: &SamplerConfig) {
    match sampler {
        SamplerConfig::Bernoulli { probs } => {
            out.push_str("sampler = bernoulli\n");
            out.push_str(&format!("probs = {}\n", join(probs)));
        }
        SamplerConfig::Markov { rows } => {
            out.push_str("sampler = markov\n");
            for row in rows {
                out.push_str(&format!("row = {}\n", join(row)));
            }
        }
        SamplerConfig::Dirac {
            word,
            alphabet,
            uniform_phase,
        } => {
            out.push_str("sampler = dirac\n");
            out.push_str(&format!("word = {}\n", join(word)));
            out.push_str(&format!("alphabet = {alphabet}\n"));
            out.push_str(&format!("uniform_phase = {uniform_phase}\n"));
        }
    }
}

/// Canonical text form; `parse_config` returns an equal value when fed the
/// output.
pub fn serialize_config(config: &ExperimentConfig) -> String {
    let mut out = String::new();
    out.push_str(&format!("[{}]\n", config.command.name()));
    match &config.command {
        CommandConfig::Simulate(c) => {
            out.push_str(&format!("rule = {}, {}\n", c.rule.0, c.rule.1));
            emit_sampler(&mut out, &c.sampler);
            out.push_str(&format!("width = {}\n", c.width));
            out.push_str(&format!("steps = {}\n", c.steps));
            out.push_str(&format!("trial = {}\n", c.trial));
            let formats: Vec<&str> = c
                .formats
                .iter()
                .map(|f| match f {
                    DiagramFormat::Ascii => "ascii",
                    DiagramFormat::Pgm => "pgm",
                })
                .collect();
            out.push_str(&format!("formats = {}\n", formats.join(", ")));
        }
        CommandConfig::EntryTime(c) => {
            out.push_str(&format!("rule = {}, {}\n", c.rule.0, c.rule.1));
            emit_sampler(&mut out, &c.sampler);
            out.push_str(&format!("n = {}\n", c.n));
            out.push_str(&format!("trials = {}\n", c.trials));
            out.push_str(&format!("xs = {}\n", join(&c.xs)));
            out.push_str(&format!("side = {}\n", c.side));
        }
        CommandConfig::FactorEntryTime(c) => {
            out.push_str(&format!("factor = {}\n", c.factor));
            emit_sampler(&mut out, &c.sampler);
            out.push_str(&format!("n = {}\n", c.n));
            out.push_str(&format!("trials = {}\n", c.trials));
            out.push_str(&format!("xs = {}\n", join(&c.xs)));
            out.push_str(&format!("side = {}\n", c.side));
        }
        CommandConfig::FactorCheck(c) => {
            out.push_str(&format!("factor = {}\n", c.factor));
            out.push_str(&format!("width = {}\n", c.width));
            out.push_str(&format!("samples = {}\n", c.samples));
            if let Some(w) = c.exhaustive_width {
                out.push_str(&format!("exhaustive_width = {w}\n"));
            }
        }
        CommandConfig::Oracle(c) => {
            out.push_str(&format!("y = {}\n", c.y));
            out.push_str(&format!("z = {}\n", c.z));
            out.push_str(&format!("epsilon = {}\n", c.epsilon));
            out.push_str(&format!("walk_steps = {}\n", c.walk_steps));
            out.push_str(&format!("trials = {}\n", c.trials));
            match c.increments {
                IncrementConfig::Fair => out.push_str("increments = fair\n"),
                IncrementConfig::ThreePoint { p } => {
                    out.push_str("increments = three-point\n");
                    out.push_str(&format!("p = {p}\n"));
                }
            }
        }
        CommandConfig::MixDiagnose(c) => {
            emit_sampler(&mut out, &c.sampler);
            out.push_str(&format!("length = {}\n", c.length));
            out.push_str(&format!("lag = {}\n", c.lag));
        }
    }
    out.push_str(&format!("seed = {}\n", config.seed));
    if let Some(w) = config.workers {
        out.push_str(&format!("workers = {w}\n"));
    }
    if let Some(o) = &config.out {
        out.push_str(&format!("out = {o}\n"));
    }
    out
}
