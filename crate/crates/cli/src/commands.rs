//! Subcommand implementations.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use serde_json::json;

use semo_core::algorithms::{run_until, AlgorithmConfig, Simulation};
use semo_core::diagnostics::{pareto_covered, RunRecord, TraceMode};
use semo_core::experiments::{
    self, fit_scaling, run_cell, summarize_cell, BudgetRule, Cell, CellResult, NoiseRule,
    Regressor, SweepGrid, SCHEMA_VERSION,
};
use semo_core::validation::{run_suite, ValidationProfile};
use semo_core::{NoiseSpec, Variant};

use crate::config::{parse_list, resolve, KeyValueFile};
use crate::{CliError, FitArgs, RunArgs, SweepArgs, ValidateArgs, EXIT_VALIDATION};

fn parse_rule(raw: &str) -> Result<NoiseRule, CliError> {
    raw.parse::<NoiseRule>()
        .map_err(|e| CliError::Usage(format!("--p {raw:?}: {e}")))
}

fn parse_keep_limit(raw: &str) -> Result<Option<u64>, CliError> {
    if raw == "inf" {
        return Ok(None);
    }
    raw.parse::<u64>()
        .map(Some)
        .map_err(|_| CliError::Usage(format!("--k {raw:?}: expected an integer or \"inf\"")))
}

fn parse_variant(name: &str, k: Option<&str>) -> Result<Variant, CliError> {
    let variant: Variant = name
        .parse()
        .map_err(|e| CliError::Usage(format!("--variant {name:?}: {e}")))?;
    match (variant, k) {
        (Variant::ExtremeKeeping { .. }, Some(k)) => Ok(Variant::ExtremeKeeping {
            limit: parse_keep_limit(k)?,
        }),
        (Variant::ExtremeKeeping { limit }, None) => Ok(Variant::ExtremeKeeping { limit }),
        (other, None) => Ok(other),
        (_, Some(_)) => Err(CliError::Usage(
            "--k only applies to the keep variant".to_string(),
        )),
    }
}

fn parse_trace(raw: &str) -> Result<TraceMode, CliError> {
    match raw {
        "off" => Ok(TraceMode::Off),
        "full" => Ok(TraceMode::Full),
        other => match other.strip_prefix("stride:").and_then(|s| s.parse::<u64>().ok()) {
            Some(s) if s >= 1 => Ok(TraceMode::Stride(s)),
            _ => Err(CliError::Usage(format!(
                "--trace {raw:?}: expected off, full or stride:S"
            ))),
        },
    }
}

fn noise_at(rule: NoiseRule, n: usize) -> Result<NoiseSpec, CliError> {
    let p = rule.rate(n);
    NoiseSpec::new(p)
        .map_err(|e| CliError::Usage(format!("rule {rule} at n = {n}: {e}")))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path)?))
}

fn record_line(record: &RunRecord) -> String {
    let t_total = record
        .t_total
        .map(|t| t.to_string())
        .unwrap_or_else(|| format!(">{} (censored)", record.budget));
    let t_ex = record
        .t_ex
        .map(|t| t.to_string())
        .unwrap_or_else(|| "not reached".to_string());
    format!(
        "trial {} seed {}: t_total={} t_ex={} evaluations={}",
        record.trial, record.seed, t_total, t_ex, record.evaluations
    )
}

pub fn run(args: RunArgs) -> Result<ExitCode, CliError> {
    let rule = parse_rule(&args.p)?;
    let noise = noise_at(rule, args.n)?;
    let variant = parse_variant(&args.variant, args.k.as_deref())?;
    let trace = parse_trace(&args.trace)?;
    let budget = BudgetRule::MultipleOfN2LogN(args.budget_multiple).budget(args.n);
    if args.trial_seed.is_some() && args.trials != 1 {
        return Err(CliError::Usage(
            "--trial-seed replays a single trial; use --trials 1".to_string(),
        ));
    }

    let records = match args.trial_seed {
        Some(seed) => {
            let config = AlgorithmConfig {
                n: args.n,
                noise,
                variant,
            };
            let mut sim = Simulation::new(config, seed);
            vec![run_until(&mut sim, pareto_covered, budget, trace)]
        }
        None => run_cell(args.n, noise, variant, args.trials, budget, args.seed, trace),
    };

    for record in &records {
        println!("{}", record_line(record));
    }
    let cell = Cell {
        index: 0,
        rule,
        variant,
        n: args.n,
        p: noise.rate(),
        budget,
        seed: args.seed,
    };
    let summary = summarize_cell(&cell, &records);
    if let Some(t) = &summary.t_total {
        println!(
            "cell: trials={} censored_fraction={} median_t_total={} mean_evaluations={}",
            summary.trials, summary.censored_fraction, t.median, summary.mean_evaluations
        );
    } else {
        println!(
            "cell: trials={} censored_fraction={} (no uncensored trials) mean_evaluations={}",
            summary.trials, summary.censored_fraction, summary.mean_evaluations
        );
    }

    if let Some(out) = &args.out {
        let echo = json!({
            "schema_version": SCHEMA_VERSION,
            "command": "run",
            "n": args.n,
            "p_rule": rule.to_string(),
            "p": noise.rate(),
            "variant": variant,
            "trials": args.trials,
            "budget_multiple": args.budget_multiple,
            "budget": budget,
            "seed": args.seed,
            "trial_seed": args.trial_seed,
            "trace": args.trace,
        });
        let cells = vec![CellResult {
            cell,
            records: records.clone(),
            summary,
        }];
        match args.format.as_str() {
            "csv" => {
                experiments::write_records_csv(create(out)?, &echo, &cells)?;
                if trace != TraceMode::Off {
                    let trace_path = traces_path(out);
                    experiments::write_traces_csv(create(&trace_path)?, &echo, &cells[0].records)?;
                    println!("traces written to {}", trace_path.display());
                }
            }
            "json" => {
                let doc = json!({
                    "schema_version": SCHEMA_VERSION,
                    "config": echo,
                    "records": cells[0].records,
                });
                let mut w = create(out)?;
                serde_json::to_writer_pretty(&mut w, &doc).map_err(std::io::Error::other)?;
                w.write_all(b"\n")?;
                w.flush()?;
            }
            other => {
                return Err(CliError::Usage(format!(
                    "--format {other:?}: expected csv or json"
                )))
            }
        }
        println!("records written to {}", out.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn traces_path(records: &Path) -> PathBuf {
    let stem = records
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "records".to_string());
    records.with_file_name(format!("{stem}.traces.csv"))
}

pub fn sweep(args: SweepArgs) -> Result<ExitCode, CliError> {
    let file = match &args.config {
        Some(path) => KeyValueFile::load(path)?,
        None => KeyValueFile::default(),
    };

    let n_raw = resolve(args.n.as_deref(), &file, "n")
        .ok_or_else(|| CliError::Usage("sweep needs problem sizes: --n or n= in the config".to_string()))?;
    let n_values = parse_list(n_raw, "problem size", str::parse::<usize>)?;

    let p_raw = resolve(args.p.as_deref(), &file, "p").unwrap_or("0");
    let p_rules = parse_list(p_raw, "noise rule", str::parse::<NoiseRule>)?;

    let variants_raw = resolve(args.variants.as_deref(), &file, "variants")
        .or_else(|| file.get("variant"))
        .unwrap_or("cached");
    let mut variants = parse_list(variants_raw, "variant", str::parse::<Variant>)?;
    if let Some(k) = file.get("k") {
        let limit = parse_keep_limit(k)?;
        for v in &mut variants {
            if let Variant::ExtremeKeeping { limit: l @ None } = v {
                *l = limit;
            }
        }
    }

    let parse_flag = |raw: Option<&str>, key: &str| -> Result<Option<String>, CliError> {
        Ok(resolve(raw, &file, key).map(str::to_string))
    };
    let trials = match parse_flag(args.trials.map(|t| t.to_string()).as_deref(), "trials")? {
        Some(raw) => raw
            .parse::<u64>()
            .map_err(|_| CliError::Usage(format!("trials {raw:?} is not an integer")))?,
        None => 20,
    };
    let budget_multiple = match parse_flag(
        args.budget_multiple.map(|b| b.to_string()).as_deref(),
        "budget_multiple",
    )? {
        Some(raw) => raw
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("budget_multiple {raw:?} is not a number")))?,
        None => 20.0,
    };
    let master_seed = match parse_flag(args.seed.map(|s| s.to_string()).as_deref(), "seed")? {
        Some(raw) => raw
            .parse::<u64>()
            .map_err(|_| CliError::Usage(format!("seed {raw:?} is not an integer")))?,
        None => 0,
    };
    let threads = match parse_flag(args.threads.map(|t| t.to_string()).as_deref(), "threads")? {
        Some(raw) => Some(
            raw.parse::<usize>()
                .map_err(|_| CliError::Usage(format!("threads {raw:?} is not an integer")))?,
        ),
        None => None,
    };
    let separation_threshold = match parse_flag(
        args.separation_threshold.map(|s| s.to_string()).as_deref(),
        "separation_threshold",
    )? {
        Some(raw) => raw
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("separation_threshold {raw:?} is not a number")))?,
        None => 0.5,
    };
    let out = args
        .out
        .clone()
        .or_else(|| file.get("out").map(PathBuf::from))
        .ok_or_else(|| CliError::Usage("sweep needs --out for the records CSV".to_string()))?;
    let summary_path = args
        .summary
        .clone()
        .or_else(|| file.get("summary").map(PathBuf::from))
        .unwrap_or_else(|| {
            let stem = out
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "sweep".to_string());
            out.with_file_name(format!("{stem}.summary.json"))
        });

    let grid = SweepGrid {
        n_values,
        p_rules,
        variants,
        trials_per_cell: trials,
        budget: BudgetRule::MultipleOfN2LogN(budget_multiple),
        master_seed,
    };
    grid.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    // The echo pins everything the results depend on; worker count is
    // deliberately absent because it cannot change them.
    let echo = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "sweep",
        "n": grid.n_values,
        "p": grid.p_rules.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
        "variants": grid.variants,
        "trials": grid.trials_per_cell,
        "budget_multiple": budget_multiple,
        "seed": grid.master_seed,
    });

    let cells = experiments::run_sweep(&grid, TraceMode::Off, threads)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    for cell in &cells {
        let s = &cell.summary;
        let median = s
            .t_total
            .as_ref()
            .map(|t| t.median.to_string())
            .unwrap_or_else(|| "-".to_string());
        println!(
            "cell variant={} n={} p={} trials={} censored_fraction={} median_t_total={median}",
            s.variant, s.n, s.p, s.trials, s.censored_fraction
        );
    }

    experiments::write_records_csv(create(&out)?, &echo, &cells)?;
    let doc = experiments::summary_document(&echo, &cells, separation_threshold);
    let mut w = create(&summary_path)?;
    serde_json::to_writer_pretty(&mut w, &doc).map_err(std::io::Error::other)?;
    w.write_all(b"\n")?;
    w.flush()?;
    println!("records written to {}", out.display());
    println!("summary written to {}", summary_path.display());
    Ok(ExitCode::SUCCESS)
}

pub fn fit(args: FitArgs) -> Result<ExitCode, CliError> {
    let regressor = match args.regressor.as_str() {
        "logn" => Regressor::LogN,
        "n2logn" => Regressor::N2LogN,
        other => {
            return Err(CliError::Usage(format!(
                "--regressor {other:?}: expected logn or n2logn"
            )))
        }
    };
    let stat_column = match args.stat.as_str() {
        "t-total" => "t_total",
        "t-ex" => "t_ex",
        "evaluations" => "evaluations",
        other => {
            return Err(CliError::Usage(format!(
                "--stat {other:?}: expected t-total, t-ex or evaluations"
            )))
        }
    };
    let variant: Variant = args
        .variant
        .parse()
        .map_err(|e| CliError::Usage(format!("--variant {:?}: {e}", args.variant)))?;

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(&args.input)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.input.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Io(e.to_string()))?
        .clone();
    let column = |name: &str| -> Result<usize, CliError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Usage(format!("input has no column {name:?}")))
    };
    let col_variant = column("variant")?;
    let col_n = column("n")?;
    let col_rule = column("p_rule")?;
    let col_t_total = column("t_total")?;
    let col_stat = column(stat_column)?;

    let mut rules_seen: Vec<String> = Vec::new();
    let mut by_n: std::collections::BTreeMap<usize, Vec<f64>> = std::collections::BTreeMap::new();
    for row in reader.records() {
        let row = row.map_err(|e| CliError::Io(e.to_string()))?;
        if &row[col_variant] != variant.label() {
            continue;
        }
        let rule = row[col_rule].to_string();
        if !rules_seen.contains(&rule) {
            rules_seen.push(rule.clone());
        }
        if let Some(wanted) = &args.rule {
            if &rule != wanted {
                continue;
            }
        }
        if row[col_t_total].is_empty() {
            continue; // censored
        }
        let raw = &row[col_stat];
        if raw.is_empty() {
            continue;
        }
        let n: usize = row[col_n]
            .parse()
            .map_err(|_| CliError::Io(format!("bad n value {:?}", &row[col_n])))?;
        let value: f64 = raw
            .parse()
            .map_err(|_| CliError::Io(format!("bad {stat_column} value {raw:?}")))?;
        by_n.entry(n).or_default().push(value);
    }

    if args.rule.is_none() && rules_seen.len() > 1 {
        return Err(CliError::Usage(format!(
            "input holds several noise rules {rules_seen:?}; pick one with --rule"
        )));
    }
    let points: Vec<(f64, f64)> = by_n
        .iter()
        .map(|(&n, values)| (n as f64, semo_core::stats::median(values)))
        .collect();
    let fit = fit_scaling(&points, regressor).map_err(|e| CliError::Usage(e.to_string()))?;

    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "input": args.input.display().to_string(),
        "variant": variant,
        "rule": args.rule.or_else(|| rules_seen.first().cloned()),
        "stat": args.stat,
        "regressor": args.regressor,
        "points": points,
        "exponent": fit.exponent,
        "constant": fit.constant,
        "residual": fit.residual,
    });
    println!("{}", serde_json::to_string_pretty(&doc).map_err(std::io::Error::other)?);
    Ok(ExitCode::SUCCESS)
}

pub fn validate(args: ValidateArgs) -> Result<ExitCode, CliError> {
    let profile = if args.quick {
        ValidationProfile::quick()
    } else {
        ValidationProfile::full()
    };
    let results = run_suite(profile, args.seed);
    let mut failures = 0;
    for r in &results {
        let status = if r.passed { "ok  " } else { "FAIL" };
        println!("{status} {}: {}", r.name, r.detail);
        if !r.passed {
            failures += 1;
        }
    }
    if failures == 0 {
        println!("validation passed ({} checks)", results.len());
        Ok(ExitCode::SUCCESS)
    } else {
        println!("validation failed ({failures} of {} checks)", results.len());
        Ok(ExitCode::from(EXIT_VALIDATION))
    }
}
