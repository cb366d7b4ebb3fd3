//! Series and report CSV files.

use std::io::{Read, Write};
use std::path::Path;

use super::metrics::ErrorStats;
use super::{EstimateSeries, MethodSpec};
use crate::estimators::EstimatorKind;
use crate::ops::OpCounts;
use crate::{Error, Result};

pub const SERIES_HEADER: [&str; 9] = [
    "scenario_id",
    "seed",
    "method",
    "separation",
    "frame_index",
    "noise_power_est_mw",
    "noise_power_true_mw",
    "snr_est_db",
    "snr_true_db",
];

pub const REPORT_HEADER: [&str; 12] = [
    "scenario_id",
    "method",
    "separation",
    "seed_count",
    "rmse_db",
    "std_dev_db",
    "mean_bias_db",
    "ops_add",
    "ops_mul",
    "ops_cmp",
    "ops_transcendental",
    "wall_time_ms",
];

/// Nine significant digits, `%.9g` style; `inf`, `-inf` and `nan` spelled out.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let m = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn parse_float(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("`{s}` is not a number")))
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// Rows in series order, frames ascending.
pub fn emit_series<W: Write>(series: &[EstimateSeries], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(SERIES_HEADER)?;
    for s in series {
        for p in &s.points {
            w.write_record([
                s.scenario_id.clone(),
                s.seed.to_string(),
                s.method.estimator.to_string(),
                s.method.separation_name().to_string(),
                p.frame_index.to_string(),
                format_float(p.noise_est_mw),
                format_float(p.noise_true_mw),
                format_float(p.snr_est_db),
                format_float(p.snr_true_db),
            ])?;
        }
    }
    w.flush()
        .map_err(|e| Error::Config(format!("flush: {e}")))?;
    Ok(())
}

pub fn write_series(series: &[EstimateSeries], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    emit_series(series, std::io::BufWriter::new(f))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodReport {
    pub scenario_id: String,
    pub method: MethodSpec,
    pub seed_count: usize,
    pub rmse_db: f64,
    /// Sample standard deviation of the pooled SNR errors.
    pub std_dev_db: f64,
    pub mean_bias_db: f64,
    pub ops: OpCounts,
    pub wall_time_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchmarkReport {
    pub rows: Vec<MethodReport>,
}

/// One row per (scenario, method), sorted by method then scenario. Error
/// statistics pool all frames of all seeds; they are `nan` when no frame
/// has a finite true SNR. `ops` supplies the per-pass operation counts.
pub fn build_report(
    series: &[EstimateSeries],
    mut ops: impl FnMut(MethodSpec) -> Result<OpCounts>,
) -> Result<BenchmarkReport> {
    let mut keys: Vec<(MethodSpec, String)> = series
        .iter()
        .map(|s| (s.method, s.scenario_id.clone()))
        .collect();
    keys.sort();
    keys.dedup();
    let mut rows = Vec::with_capacity(keys.len());
    for (method, scenario_id) in keys {
        let group: Vec<&EstimateSeries> = series
            .iter()
            .filter(|s| s.method == method && s.scenario_id == scenario_id)
            .collect();
        let mut seeds: Vec<u64> = group.iter().map(|s| s.seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        let (rmse, std, bias) = match ErrorStats::pooled(group.iter().copied()) {
            Ok(s) => (s.rmse_db, s.std_dev_db, s.mean_bias_db),
            Err(_) => {
                log::debug!("report: {method} has no frames with finite true SNR");
                (f64::NAN, f64::NAN, f64::NAN)
            }
        };
        rows.push(MethodReport {
            scenario_id,
            method,
            seed_count: seeds.len(),
            rmse_db: rmse,
            std_dev_db: std,
            mean_bias_db: bias,
            ops: ops(method)?,
            wall_time_ms: None,
        });
    }
    Ok(BenchmarkReport { rows })
}

pub fn emit_report<W: Write>(report: &BenchmarkReport, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(REPORT_HEADER)?;
    for r in &report.rows {
        w.write_record([
            r.scenario_id.clone(),
            r.method.estimator.to_string(),
            r.method.separation_name().to_string(),
            r.seed_count.to_string(),
            format_float(r.rmse_db),
            format_float(r.std_dev_db),
            format_float(r.mean_bias_db),
            r.ops.add.to_string(),
            r.ops.mul.to_string(),
            r.ops.cmp.to_string(),
            r.ops.transcendental.to_string(),
            r.wall_time_ms.map(format_float).unwrap_or_default(),
        ])?;
    }
    w.flush()
        .map_err(|e| Error::Config(format!("flush: {e}")))?;
    Ok(())
}

pub fn write_report(report: &BenchmarkReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    emit_report(report, std::io::BufWriter::new(f))
}

pub fn parse_report<R: Read>(input: R) -> Result<BenchmarkReport> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(REPORT_HEADER) {
        return Err(Error::InvalidParameter("unexpected report header".into()));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let int = |i: usize| -> Result<u64> {
            rec[i]
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("`{}` is not an integer", &rec[i])))
        };
        let estimator: EstimatorKind = rec[1].parse()?;
        let separation = match &rec[2] {
            "none" => None,
            s => Some(s.parse()?),
        };
        rows.push(MethodReport {
            scenario_id: rec[0].to_string(),
            method: MethodSpec::new(estimator, separation)?,
            seed_count: int(3)? as usize,
            rmse_db: parse_float(&rec[4])?,
            std_dev_db: parse_float(&rec[5])?,
            mean_bias_db: parse_float(&rec[6])?,
            ops: OpCounts {
                add: int(7)?,
                mul: int(8)?,
                cmp: int(9)?,
                transcendental: int(10)?,
            },
            wall_time_ms: if rec[11].is_empty() {
                None
            } else {
                Some(parse_float(&rec[11])?)
            },
        });
    }
    Ok(BenchmarkReport { rows })
}

pub fn read_report(path: impl AsRef<Path>) -> Result<BenchmarkReport> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_report(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::SeriesPoint;
    use proptest::prelude::*;

    #[test]
    fn float_format() {
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(0.1), "0.1");
        assert_eq!(format_float(-3.0103), "-3.0103");
        assert_eq!(format_float(1.0 / 3.0), "0.333333333");
        assert_eq!(format_float(123456789.0), "123456789");
        assert_eq!(format_float(1234567890.0), "1.23456789e+09");
        assert_eq!(format_float(1.5e-7), "1.5e-07");
        assert_eq!(format_float(0.0001), "0.0001");
        assert_eq!(format_float(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_float(f64::NAN), "nan");
        assert_eq!(format_float(0.0), "0");
    }

    fn sample_series(method: &str, seed: u64) -> EstimateSeries {
        EstimateSeries {
            scenario_id: "s".into(),
            seed,
            method: method.parse().unwrap(),
            points: (0..4)
                .map(|i| SeriesPoint {
                    frame_index: i,
                    noise_est_mw: 1.0 + 0.01 * i as f64 + seed as f64 * 1e-3,
                    noise_true_mw: 1.0,
                    snr_est_db: 0.1 * i as f64 - 0.15,
                    snr_true_db: 0.0,
                })
                .collect(),
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let mut buf = Vec::new();
        emit_report(&BenchmarkReport::default(), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            REPORT_HEADER.join(",") + "\n"
        );
    }

    #[test]
    fn one_method_one_seed_is_one_row() {
        let r = build_report(&[sample_series("aic", 1)], |_| Ok(OpCounts::default())).unwrap();
        let mut buf = Vec::new();
        emit_report(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(!text.contains('\r'));
    }

    #[test]
    fn rows_are_sorted_and_pooled() {
        let s = [
            sample_series("mmse", 1),
            sample_series("ml:rof", 2),
            sample_series("ml:rof", 1),
            sample_series("ml:ideal", 1),
        ];
        let r = build_report(&s, |_| Ok(OpCounts::default())).unwrap();
        let names: Vec<String> = r.rows.iter().map(|x| x.method.to_string()).collect();
        assert_eq!(names, ["ml:ideal", "ml:rof", "mmse"]);
        assert_eq!(r.rows[1].seed_count, 2);
        let row = &r.rows[1];
        let n = 8.0;
        let lhs = row.rmse_db.powi(2);
        let rhs = row.mean_bias_db.powi(2) + row.std_dev_db.powi(2) * (n - 1.0) / n;
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn series_csv_shape() {
        let mut buf = Vec::new();
        emit_series(&[sample_series("mvu:fisher", 3)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], SERIES_HEADER.join(","));
        assert!(lines[1].starts_with("s,3,mvu,fisher,0,1.003,1,-0.15,0"));
    }

    proptest! {
        #[test]
        fn report_round_trips(
            rmse in 0.0f64..10.0,
            std in 0.0f64..10.0,
            bias in -10.0f64..10.0,
            add in any::<u32>(),
            wall in prop::option::of(0.0f64..1e6),
        ) {
            let report = BenchmarkReport {
                rows: vec![MethodReport {
                    scenario_id: "x".into(),
                    method: "mvu:rof".parse().unwrap(),
                    seed_count: 50,
                    rmse_db: rmse,
                    std_dev_db: std,
                    mean_bias_db: bias,
                    ops: OpCounts { add: add as u64, mul: 2, cmp: 3, transcendental: 4 },
                    wall_time_ms: wall,
                }],
            };
            let mut buf = Vec::new();
            emit_report(&report, &mut buf).unwrap();
            let back = parse_report(&buf[..]).unwrap();
            let a = &report.rows[0];
            let b = &back.rows[0];
            prop_assert_eq!(&a.scenario_id, &b.scenario_id);
            prop_assert_eq!(a.method, b.method);
            prop_assert_eq!(a.ops, b.ops);
            prop_assert_eq!(a.seed_count, b.seed_count);
            for (x, y) in [(a.rmse_db, b.rmse_db), (a.std_dev_db, b.std_dev_db), (a.mean_bias_db, b.mean_bias_db)] {
                prop_assert!((x - y).abs() <= 5e-9 * x.abs().max(1e-300));
            }
            prop_assert_eq!(a.wall_time_ms.is_some(), b.wall_time_ms.is_some());
            let mut again = Vec::new();
            emit_report(&back, &mut again).unwrap();
            prop_assert_eq!(buf, again);
        }

        #[test]
        fn format_keeps_nine_digits(x in -1e12f64..1e12) {
            let y: f64 = format_float(x).parse().unwrap();
            prop_assert!((x - y).abs() <= 5e-9 * x.abs());
        }
    }
}
