//! Dispatch a parsed config to the library, write the output files, and
//! print a short human-readable account of what happened. Everything that
//! lands in a file is a pure function of the config, so reruns and
//! different worker counts produce identical bytes; timing and version
//! lines go to stdout only.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use gliders::ca::{simulate, GlidersRule};
use gliders::entrytime::run_cdf_experiment;
use gliders::factors::{
    builtin_factor, commutation_check, exhaustive_commutation_check, lifted_cdf_experiment,
    CommutationReport,
};
use gliders::measures::{estimate_asymptotic_variance, sample_window};
use gliders::oracle::{
    simulate_minima_comparison, MinimaComparisonParams, ORACLE_CSV_HEADER,
};
use gliders::render::{render_ascii, render_pgm, AsciiCharset};
use gliders::report::{digest_hex, fmt_sig6};
use gliders::EmpiricalCdf;

use crate::config::{
    CommandConfig, DiagramFormat, ExperimentConfig, FactorCheckConfig, FactorEntryTimeConfig,
    MixDiagnoseConfig, OracleConfig, SimulateConfig,
};
use crate::config::serialize_config;

/// Exit status used when a factor-check run finds a counterexample (the
/// run itself succeeded; the property did not hold).
pub const EXIT_CHECK_FAILED: i32 = 2;

#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
}

fn version_string() -> &'static str {
    // populated by release tooling; falls back to the crate version
    option_env!("GIT_DESCRIBE").unwrap_or(concat!("v", env!("CARGO_PKG_VERSION")))
}

pub fn run(config: &ExperimentConfig) -> Result<RunOutcome> {
    let started = Instant::now();
    println!("# gliders {}", version_string());
    println!("# config digest {}", digest_hex(&serialize_config(config)));
    println!("# command {}", config.command.name());
    let out_dir = PathBuf::from(config.out.as_deref().unwrap_or("."));
    let outcome = dispatch(config, &out_dir)?;
    for f in &outcome.files {
        println!("# wrote {}", f.display());
    }
    println!("# wall clock {:.3} s", started.elapsed().as_secs_f64());
    Ok(outcome)
}

fn dispatch(config: &ExperimentConfig, out_dir: &Path) -> Result<RunOutcome> {
    let seed = config.seed;
    match &config.command {
        CommandConfig::Simulate(c) => run_simulate(c, seed, out_dir),
        CommandConfig::EntryTime(c) => {
            let sampler = c.sampler.build(seed)?;
            let rule = GlidersRule::new(c.rule.0, c.rule.1)?;
            let cdf = run_cdf_experiment(&sampler, rule, c.n, &c.xs, c.trials, c.side)?;
            write_cdf(&cdf, out_dir, "entrytime.csv")
        }
        CommandConfig::FactorEntryTime(c) => run_factor_entrytime(c, seed, out_dir),
        CommandConfig::FactorCheck(c) => run_factor_check(c, seed),
        CommandConfig::Oracle(c) => run_oracle(c, seed, out_dir),
        CommandConfig::MixDiagnose(c) => run_mix_diagnose(c, seed),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn write_cdf(cdf: &EmpiricalCdf, out_dir: &Path, file: &str) -> Result<RunOutcome> {
    let path = out_dir.join(file);
    write_file(&path, cdf.to_csv().as_bytes())?;
    for i in 0..cdf.xs.len() {
        println!(
            "x={} empirical={} theoretical={} stderr={} |diff|={}",
            fmt_sig6(cdf.xs[i]),
            fmt_sig6(cdf.estimates[i]),
            fmt_sig6(cdf.theoretical[i]),
            fmt_sig6(cdf.standard_errors[i]),
            fmt_sig6((cdf.estimates[i] - cdf.theoretical[i]).abs()),
        );
    }
    Ok(RunOutcome {
        exit_code: 0,
        files: vec![path],
    })
}

fn run_simulate(c: &SimulateConfig, seed: u64, out_dir: &Path) -> Result<RunOutcome> {
    let sampler = c.sampler.build(seed)?;
    let rule = GlidersRule::new(c.rule.0, c.rule.1)?;
    let lo = -((c.width / 2) as i64);
    let hi = lo + c.width as i64 - 1;
    let window = sample_window(&sampler, lo, hi, c.trial)?;
    let diagram = simulate(&window, &rule.local(), c.steps)?;
    println!(
        "# simulate rule ({}, {}): width {}, {} steps",
        rule.v_minus(),
        rule.v_plus(),
        c.width,
        c.steps
    );
    let mut files = Vec::new();
    for format in &c.formats {
        match format {
            DiagramFormat::Ascii => {
                let charset = AsciiCharset::for_alphabet(window.alphabet_size())?;
                let path = out_dir.join("simulate.txt");
                write_file(&path, render_ascii(&diagram, &charset)?.as_bytes())?;
                files.push(path);
            }
            DiagramFormat::Pgm => {
                let path = out_dir.join("simulate.pgm");
                write_file(&path, &render_pgm(&diagram)?)?;
                files.push(path);
            }
        }
    }
    Ok(RunOutcome {
        exit_code: 0,
        files,
    })
}

fn run_factor_entrytime(c: &FactorEntryTimeConfig, seed: u64, out_dir: &Path) -> Result<RunOutcome> {
    let factor = builtin_factor(&c.factor)?;
    let sampler = c.sampler.build(seed)?;
    let cdf = lifted_cdf_experiment(&factor, &sampler, c.n, &c.xs, c.trials, c.side)?;
    write_cdf(&cdf, out_dir, "factor-entrytime.csv")
}

fn report_commutation(what: &str, report: &CommutationReport) -> i32 {
    match &report.counterexample {
        None => {
            println!("{what}: ok, {} windows checked", report.checked);
            0
        }
        Some(cx) => {
            println!("{what}: FAILED after {} windows", report.checked);
            println!("  input cells     {:?} at offset {}", cx.input.cells(), cx.input.offset());
            println!(
                "  project(step()) {:?} at offset {}",
                cx.via_source.signed_cells().unwrap_or_default(),
                cx.via_source.offset()
            );
            println!(
                "  step(project()) {:?} at offset {}",
                cx.via_target.signed_cells().unwrap_or_default(),
                cx.via_target.offset()
            );
            EXIT_CHECK_FAILED
        }
    }
}

fn run_factor_check(c: &FactorCheckConfig, seed: u64) -> Result<RunOutcome> {
    let factor = builtin_factor(&c.factor)?;
    let mut exit_code = 0;
    if let Some(width) = c.exhaustive_width {
        let report = exhaustive_commutation_check(&factor, width)?;
        exit_code = exit_code.max(report_commutation(
            &format!("{} exhaustive width {width}", c.factor),
            &report,
        ));
    }
    let report = commutation_check(&factor, c.width, c.samples, seed)?;
    exit_code = exit_code.max(report_commutation(
        &format!("{} random width {}", c.factor, c.width),
        &report,
    ));
    Ok(RunOutcome {
        exit_code,
        files: Vec::new(),
    })
}

fn run_oracle(c: &OracleConfig, seed: u64, out_dir: &Path) -> Result<RunOutcome> {
    let params = MinimaComparisonParams::new(c.y, c.z, c.epsilon)?;
    let est = simulate_minima_comparison(&params, c.walk_steps, c.trials, seed, c.increments.build())?;
    let path = out_dir.join("oracle.csv");
    write_file(&path, format!("{ORACLE_CSV_HEADER}\n{}\n", est.csv_row()).as_bytes())?;
    println!(
        "y={} z={} epsilon={} empirical={} closed_form={} |diff|={}",
        fmt_sig6(c.y),
        fmt_sig6(c.z),
        fmt_sig6(c.epsilon),
        fmt_sig6(est.empirical),
        fmt_sig6(est.closed_form),
        fmt_sig6((est.empirical - est.closed_form).abs()),
    );
    Ok(RunOutcome {
        exit_code: 0,
        files: vec![path],
    })
}

fn run_mix_diagnose(c: &MixDiagnoseConfig, seed: u64) -> Result<RunOutcome> {
    let sampler = c.sampler.build(seed)?;
    let d = estimate_asymptotic_variance(&sampler, c.length, c.lag)?;
    println!(
        "mean={} stderr={} autocov_sum_onesided={} asymptotic_variance={} lag={} length={}",
        fmt_sig6(d.mean),
        fmt_sig6(d.mean_stderr),
        fmt_sig6(d.autocov_sum_onesided),
        fmt_sig6(d.asymptotic_variance),
        d.lag,
        d.sample_length,
    );
    println!("verdict: {}", d.verdict);
    Ok(RunOutcome {
        exit_code: 0,
        files: Vec::new(),
    })
}
