use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use npe_core::harness::{
    build_report, count_ops, count_ops_on_block, dominant_stage, estimate_block, format_float,
    run_scenario, write_report, write_series,
};
use npe_core::ops::OpCounts;
use npe_core::scenario::{block_to_samples, build_scenario, load_iq_trace, write_iq_trace};
use npe_core::separation::{fisher_separate, rof_separate};
use npe_core::spectral::{dft, frame_signal, power_spectrum};
use npe_core::{
    ComplexSeries, MethodSpec, PowerSpectrum, ResourceBlock, RofParams, RunOptions, ScenarioConfig,
};

use crate::args::{
    ConfigArgs, ConvertArgs, EstimateArgs, GenerateArgs, OpsArgs, RunArgs, SepMethod, SeparateArgs,
    TraceFormat,
};
use crate::{CliError, CliResult};

fn usage(m: impl Into<String>) -> CliError {
    CliError::Usage(m.into())
}

fn load_config(a: &ConfigArgs) -> CliResult<ScenarioConfig> {
    Ok(ScenarioConfig::load(&a.config, &a.overrides)?)
}

/// `all`, or a comma-separated list such as `ml:rof,aic`. Duplicates are dropped.
pub fn parse_methods(s: &str) -> CliResult<Vec<MethodSpec>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(MethodSpec::all());
    }
    let mut out: Vec<MethodSpec> = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let m: MethodSpec = part
            .parse()
            .map_err(|e| usage(format!("method `{part}`: {e}")))?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(usage("no methods given"));
    }
    Ok(out)
}

/// `7`, `1,2,3`, `1..=50` or `1..51`.
pub fn parse_seeds(s: &str) -> CliResult<Vec<u64>> {
    let num = |v: &str| -> CliResult<u64> {
        v.trim()
            .parse()
            .map_err(|_| usage(format!("`{v}` is not a seed")))
    };
    let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..=") {
        (num(a)?..=num(b)?).collect()
    } else if let Some((a, b)) = s.split_once("..") {
        (num(a)?..num(b)?).collect()
    } else {
        s.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(num)
            .collect::<CliResult<_>>()?
    };
    if seeds.is_empty() {
        return Err(usage(format!("seed list `{s}` is empty")));
    }
    Ok(seeds)
}

fn parse_sizes(s: &str) -> CliResult<Vec<usize>> {
    let sizes = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<usize>()
                .map_err(|_| usage(format!("`{p}` is not a size")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    if sizes.is_empty() {
        return Err(usage("no sizes given"));
    }
    if let Some(bad) = sizes.iter().find(|&&n| n < 16) {
        return Err(usage(format!("sizes must be >= 16, got {bad}")));
    }
    Ok(sizes)
}

fn csv_writer(out: Option<&Path>) -> CliResult<csv::Writer<Box<dyn Write>>> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p).map_err(|e| {
            npe_core::Error::Io {
                path: p.into(),
                source: e,
            }
        })?)),
        None => Box::new(io::stdout().lock()),
    };
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink))
}

pub fn cmd_generate(a: &GenerateArgs) -> CliResult<()> {
    let cfg = load_config(&a.config)?;
    let (block, truth) = build_scenario(&cfg)?;
    let samples = block_to_samples(&block);
    write_iq_trace(&a.out, &samples)?;

    let finite: Vec<f64> = truth
        .true_snr_db
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .collect();
    let mut out = io::stdout().lock();
    writeln!(out, "scenario_id: {}", cfg.scenario_id)?;
    writeln!(
        out,
        "samples: {} ({} frames of {} bins)",
        samples.len(),
        cfg.n_frames,
        cfg.n_bins
    )?;
    writeln!(
        out,
        "noise_power_mw: {}",
        format_float(truth.noise_power_mw.iter().sum::<f64>() / truth.n_frames() as f64)
    )?;
    if finite.is_empty() {
        writeln!(out, "true_snr_db: -inf (no signal)")?;
    } else {
        writeln!(
            out,
            "true_snr_db: {} (mean over {} frames with signal)",
            format_float(finite.iter().sum::<f64>() / finite.len() as f64),
            finite.len()
        )?;
    }
    for s in &cfg.signals {
        let r = cfg.occupied_range(s);
        let f = cfg.signal_frames(s);
        writeln!(
            out,
            "signal: bins {}..{} frames {}..{}",
            r.start, r.end, f.start, f.end
        )?;
    }
    Ok(())
}

pub fn cmd_run(a: &RunArgs) -> CliResult<()> {
    let cfg = load_config(&a.config)?;
    let methods = parse_methods(&a.methods)?;
    let seeds = match &a.seeds {
        Some(s) => parse_seeds(s)?,
        None => vec![cfg.noise.seed],
    };
    fs::create_dir_all(&a.out).map_err(|e| npe_core::Error::Io {
        path: a.out.clone(),
        source: e,
    })?;

    let mut times = Vec::new();
    let series = if a.timing {
        let mut all = Vec::new();
        for &m in &methods {
            let t = Instant::now();
            all.extend(run_scenario(&cfg, &[m], &seeds)?);
            times.push((m, t.elapsed().as_secs_f64() * 1e3));
        }
        all
    } else {
        run_scenario(&cfg, &methods, &seeds)?
    };

    let (block, truth) = build_scenario(&cfg.with_seed(seeds[0]))?;
    let ops: Vec<(MethodSpec, OpCounts)> = methods
        .par_iter()
        .map(|&m| Ok((m, count_ops_on_block(m, &block, &truth, &cfg.run)?.total())))
        .collect::<npe_core::Result<_>>()?;
    let mut report = build_report(&series, |m| {
        Ok(ops
            .iter()
            .find(|(k, _)| *k == m)
            .map(|(_, c)| *c)
            .unwrap_or_default())
    })?;
    for row in &mut report.rows {
        row.wall_time_ms = times
            .iter()
            .find(|(m, _)| *m == row.method)
            .map(|(_, t)| *t);
    }

    write_series(&series, a.out.join("series.csv"))?;
    write_report(&report, a.out.join("report.csv"))?;

    let mut out = io::stdout().lock();
    writeln!(
        out,
        "{:<12} {:>6} {:>10} {:>10} {:>10}",
        "method", "seeds", "rmse_db", "std_db", "bias_db"
    )?;
    for r in &report.rows {
        writeln!(
            out,
            "{:<12} {:>6} {:>10.4} {:>10.4} {:>10.4}",
            r.method.to_string(),
            r.seed_count,
            r.rmse_db,
            r.std_dev_db,
            r.mean_bias_db
        )?;
    }
    Ok(())
}

fn read_spectrum(path: &Path) -> CliResult<PowerSpectrum> {
    let text = fs::read_to_string(path).map_err(|e| npe_core::Error::Io {
        path: path.into(),
        source: e,
    })?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if i == 0 => {}
            Err(_) => {
                return Err(usage(format!(
                    "{}:{}: `{field}` is not a number",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(PowerSpectrum::new(values, 0)?)
}

fn trace_frames(
    path: &Path,
    n_bins: usize,
    frames: Option<usize>,
) -> CliResult<Vec<Vec<Complex64>>> {
    let series = load_iq_trace(path, 1.0)?;
    let m = frames.unwrap_or(series.len() / n_bins.max(1));
    if m == 0 {
        return Err(npe_core::Error::InsufficientSamples {
            needed: n_bins,
            available: series.len(),
        }
        .into());
    }
    Ok(frame_signal(&series, n_bins, m)?)
}

pub fn cmd_separate(a: &SeparateArgs) -> CliResult<()> {
    let mut rof = RofParams::default();
    let power = if let Some(c) = &a.config {
        let cfg = ScenarioConfig::load(c, &a.overrides)?;
        rof = cfg.run.rof;
        if a.frame >= cfg.n_frames {
            return Err(usage(format!(
                "frame {} outside 0..{}",
                a.frame, cfg.n_frames
            )));
        }
        let (block, _) = build_scenario(&cfg)?;
        power_spectrum(&block.frames()[a.frame])
    } else if let Some(t) = &a.trace {
        let n = a.n_bins.ok_or_else(|| usage("--trace needs --n-bins"))?;
        let frames = trace_frames(t, n, Some(a.frame + 1))?;
        power_spectrum(&dft(&frames[a.frame], a.frame)?)
    } else if let Some(s) = &a.spectrum {
        read_spectrum(s)?
    } else {
        return Err(usage("give one of --config, --trace or --spectrum"));
    };
    if let Some(v) = a.lambda1 {
        rof.lambda1 = v;
    }
    if let Some(v) = a.lambda2 {
        rof.lambda2 = v;
    }
    if let Some(v) = a.gate_db {
        rof.gate_db = v;
    }

    let mask = match a.method {
        SepMethod::Rof => rof_separate(&power, &rof)?,
        SepMethod::Fisher => fisher_separate(&power)?,
    };

    let mut w = csv_writer(Some(&a.out))?;
    w.write_record([
        "section",
        "index",
        "power_mw",
        "smoothed_mw",
        "is_signal",
        "energy_drop_pct",
    ])?;
    for (i, (&p, &s)) in power.power.iter().zip(&mask.is_signal).enumerate() {
        let smooth = mask
            .aux
            .smoothed
            .get(i)
            .map(|v| format_float(*v))
            .unwrap_or_default();
        w.write_record([
            "bin".to_string(),
            i.to_string(),
            format_float(p),
            smooth,
            u8::from(s).to_string(),
            String::new(),
        ])?;
    }
    for (j, d) in mask.aux.energy_drop.iter().enumerate() {
        w.write_record([
            "drop".to_string(),
            (j + 2).to_string(),
            String::new(),
            String::new(),
            String::new(),
            format_float(*d),
        ])?;
    }
    w.flush()?;

    let mut out = io::stdout().lock();
    if let Some(k) = mask.aux.band_width {
        writeln!(out, "band_width_k: {k}")?;
    }
    if let Some(t) = mask.aux.fisher_split {
        writeln!(out, "fisher_split: {t}")?;
    }
    writeln!(
        out,
        "signal_bins: {} of {}",
        mask.signal_count(),
        mask.len()
    )?;
    for (s, e) in mask.signal_runs() {
        writeln!(out, "run: {s}..{e}")?;
    }
    Ok(())
}

pub fn cmd_estimate(a: &EstimateArgs) -> CliResult<()> {
    let methods = parse_methods(&a.methods)?;
    let frames = trace_frames(&a.trace, a.n_bins, a.frames)?;
    let block = ResourceBlock::new(
        frames
            .iter()
            .enumerate()
            .map(|(i, f)| dft(f, i))
            .collect::<npe_core::Result<Vec<_>>>()?,
    )?;
    let opts = RunOptions {
        window_frames: a.window_frames,
        cbe_grid_points: a.cbe_grid_points,
        cbe_occupancy: a.cbe_occupancy,
        cbe_signal_count: a.cbe_signal_count,
        ..RunOptions::default()
    };
    let results = estimate_block(&block, &methods, &opts)?;

    let mut w = csv_writer(a.out.as_deref())?;
    w.write_record([
        "method",
        "separation",
        "frame_index",
        "noise_power_est_mw",
        "snr_est_db",
    ])?;
    for (m, ests) in methods.iter().zip(results) {
        for (e, snr) in ests {
            w.write_record([
                m.estimator.to_string(),
                m.separation_name().to_string(),
                e.frame_index.to_string(),
                format_float(e.value_mw),
                format_float(snr.db),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_ops(a: &OpsArgs) -> CliResult<()> {
    let methods = parse_methods(&a.methods)?;
    let sizes = parse_sizes(&a.sizes)?;
    let jobs: Vec<(MethodSpec, usize)> = methods
        .iter()
        .flat_map(|&m| sizes.iter().map(move |&n| (m, n)))
        .collect();
    let counts = jobs
        .par_iter()
        .map(|&(m, n)| count_ops(m, n))
        .collect::<npe_core::Result<Vec<_>>>()?;

    let mut w = csv_writer(a.out.as_deref())?;
    w.write_record([
        "method",
        "separation",
        "n",
        "dominant_stage",
        "dominant_ops",
        "ops_add",
        "ops_mul",
        "ops_cmp",
        "ops_transcendental",
        "ops_total",
    ])?;
    for (&(m, n), c) in jobs.iter().zip(&counts) {
        let stage = dominant_stage(m);
        let t = c.total();
        w.write_record([
            m.estimator.to_string(),
            m.separation_name().to_string(),
            n.to_string(),
            stage.to_string(),
            c.stage_counts(stage).total().to_string(),
            t.add.to_string(),
            t.mul.to_string(),
            t.cmp.to_string(),
            t.transcendental.to_string(),
            t.total().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn guess_format(path: &Path) -> Option<TraceFormat> {
    match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
        "csv" => Some(TraceFormat::Csv),
        "iq" | "bin" | "raw" | "cf32" | "fc32" | "dat" => Some(TraceFormat::Iq),
        _ => None,
    }
}

fn format_of(explicit: Option<TraceFormat>, path: &Path, flag: &str) -> CliResult<TraceFormat> {
    explicit.or_else(|| guess_format(path)).ok_or_else(|| {
        usage(format!(
            "cannot tell the format of {}; pass --{flag}",
            path.display()
        ))
    })
}

fn read_csv_trace(path: &Path) -> CliResult<Vec<Complex64>> {
    let mut r =
        csv::Reader::from_path(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = |k: usize| -> CliResult<f64> {
            rec.get(k)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| {
                    usage(format!(
                        "{}: row {}: expected two numbers",
                        path.display(),
                        i + 2
                    ))
                })
        };
        out.push(Complex64::new(field(0)?, field(1)?));
    }
    Ok(out)
}

pub fn cmd_convert(a: &ConvertArgs) -> CliResult<()> {
    let from = format_of(a.from, &a.input, "from")?;
    let to = format_of(a.to, &a.output, "to")?;
    let samples = match from {
        TraceFormat::Iq => load_iq_trace(&a.input, 1.0)?.into_samples(),
        TraceFormat::Csv => ComplexSeries::new(read_csv_trace(&a.input)?, 1.0)?.into_samples(),
    };
    match to {
        TraceFormat::Iq => write_iq_trace(&a.output, &samples)?,
        TraceFormat::Csv => {
            let mut w = csv_writer(Some(&a.output))?;
            w.write_record(["i", "q"])?;
            for s in &samples {
                // Shortest round-trip text, so iq -> csv -> iq is lossless.
                w.write_record([(s.re as f32).to_string(), (s.im as f32).to_string()])?;
            }
            w.flush()?;
        }
    }
    println!("converted {} samples", samples.len());
    Ok(())
}
