//! Experiment orchestration: flat key=value configs, deterministic
//! replica-parallel runs, CSV/JSON persistence, and report summaries.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;

use crate::codec;
use crate::entropy;
use crate::error::{Error, Result};
use crate::extractor;
use crate::geometry::{inner_boundary, range_of};
use crate::percolation::{self, TargetSet};
use crate::potential::{self, LemmaId};
use crate::rng::derive_stream;
use crate::stats::{binomial_estimate, mean_stderr};
use crate::walk::simulate_walk;

/// Flat key=value configuration. Lines starting with `#` are comments;
/// list values are comma-separated.
#[derive(Debug, Clone, Default)]
pub struct Config {
    map: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value, got '{line}'", lineno + 1))
            })?;
            let key = k.trim().to_string();
            if map.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("duplicate key '{key}'")));
            }
        }
        Ok(Config { map })
    }

    pub fn load(path: &Path) -> Result<Config> {
        Config::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.map.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|s| s.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Config(format!("missing required key '{key}'")))
    }

    pub fn require_u64(&self, key: &str) -> Result<u64> {
        let raw = self.require(key)?;
        raw.parse()
            .map_err(|_| Error::Config(format!("key '{key}': expected u64, got '{raw}'")))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse()
                .map_err(|_| Error::Config(format!("key '{key}': expected u64, got '{raw}'"))),
        }
    }

    pub fn u64_list(&self, key: &str) -> Result<Vec<u64>> {
        let raw = self.require(key)?;
        raw.split(',')
            .map(|t| {
                t.trim().parse().map_err(|_| {
                    Error::Config(format!("key '{key}': expected u64 list, got '{raw}'"))
                })
            })
            .collect()
    }

    /// The mandatory Monte Carlo seed; omitting it is an error by design.
    pub fn master_seed(&self) -> Result<u64> {
        self.require_u64("master_seed")
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

/// One CSV output row with a fixed column order.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub d: u64,
    pub n: u64,
    pub param: String,
    pub seed: u64,
    pub reps: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub extra: String,
}

pub const CSV_HEADER: &str = "experiment,d,n,param,seed,reps,estimate,stderr,extra";

/// Column values must not themselves contain the CSV separator.
fn csv_safe(s: &str) -> String {
    s.replace(',', ";")
}

/// Floats rendered with 9 significant digits.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.8e}")
    }
}

impl ResultRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.d,
            self.n,
            self.param,
            self.seed,
            self.reps,
            fmt_float(self.estimate),
            fmt_float(self.stderr),
            self.extra
        )
    }

    pub fn parse_csv_line(line: &str) -> Result<ResultRow> {
        let parts: Vec<&str> = line.splitn(9, ',').collect();
        if parts.len() != 9 {
            return Err(Error::Config(format!("malformed result row '{line}'")));
        }
        let num = |s: &str, what: &str| -> Result<f64> {
            if s == "nan" {
                return Ok(f64::NAN);
            }
            s.parse()
                .map_err(|_| Error::Config(format!("bad {what} '{s}' in row '{line}'")))
        };
        Ok(ResultRow {
            experiment: parts[0].to_string(),
            d: parts[1].parse().map_err(|_| Error::Config(format!("bad d in '{line}'")))?,
            n: parts[2].parse().map_err(|_| Error::Config(format!("bad n in '{line}'")))?,
            param: parts[3].to_string(),
            seed: parts[4].parse().map_err(|_| Error::Config(format!("bad seed in '{line}'")))?,
            reps: parts[5].parse().map_err(|_| Error::Config(format!("bad reps in '{line}'")))?,
            estimate: num(parts[6], "estimate")?,
            stderr: num(parts[7], "stderr")?,
            extra: parts[8].to_string(),
        })
    }
}

#[derive(Debug)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub summary: serde_json::Value,
    pub csv_path: Option<PathBuf>,
    pub json_path: Option<PathBuf>,
}

/// Run the experiment named by `experiment` in the config and, when
/// `out_dir` is given, persist CSV + JSON summary (atomic tmp+rename, so
/// failures never leave partial files).
pub fn run(config: &Config, out_dir: Option<&Path>) -> Result<RunOutput> {
    let name = config.require("experiment")?.to_string();
    let (rows, summary) = match name.as_str() {
        "simulate" => run_simulate(config)?,
        "encode" => run_encode(config)?,
        "entropy" => run_entropy(config)?,
        "lemma-check" => run_lemma_check(config)?,
        "extract" => run_extract(config)?,
        "percolation" => run_percolation(config)?,
        "intersection" => run_intersection(config)?,
        other => return Err(Error::Config(format!("unknown experiment '{other}'"))),
    };

    let (mut csv_path, mut json_path) = (None, None);
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        let mut csv = String::from(CSV_HEADER);
        csv.push('\n');
        for row in &rows {
            csv.push_str(&row.csv_line());
            csv.push('\n');
        }
        let cp = dir.join(format!("{name}.csv"));
        write_atomic(&cp, csv.as_bytes())?;
        let jp = dir.join(format!("{name}.json"));
        write_atomic(&jp, serde_json::to_string_pretty(&summary)?.as_bytes())?;
        // Plot data: one x/y file keyed on (n, estimate) per param group.
        if let Some(plot) = plot_data(&rows) {
            write_atomic(&dir.join(format!("{name}_plot.csv")), plot.as_bytes())?;
        }
        csv_path = Some(cp);
        json_path = Some(jp);
    }
    Ok(RunOutput { rows, summary, csv_path, json_path })
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn plot_data(rows: &[ResultRow]) -> Option<String> {
    let mut groups: BTreeMap<&str, Vec<(u64, f64)>> = BTreeMap::new();
    for row in rows {
        groups.entry(&row.param).or_default().push((row.n, row.estimate));
    }
    // Only useful when some group varies along n.
    if !groups.values().any(|g| g.len() > 1 && g.iter().any(|&(n, _)| n != g[0].0)) {
        return None;
    }
    let mut out = String::from("param,x,y\n");
    for (param, points) in groups {
        for (n, y) in points {
            out.push_str(&format!("{param},{n},{}\n", fmt_float(y)));
        }
    }
    Some(out)
}

fn run_simulate(config: &Config) -> Result<(Vec<ResultRow>, serde_json::Value)> {
    let d = config.require_u64("d")? as usize;
    let n = config.require_u64("n")?;
    let reps = config.u64_or("reps", 1)?;
    let seed = config.master_seed()?;
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let per_replica: Vec<(u64, u64)> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_stream(seed, i);
            let traj = simulate_walk(d, n, &mut rng).expect("validated d");
            let r = range_of(&traj);
            let b = inner_boundary(&r).len() as u64;
            (r.len() as u64, b)
        })
        .collect();
    let rows: Vec<ResultRow> = per_replica
        .iter()
        .enumerate()
        .map(|(i, &(range, boundary))| ResultRow {
            experiment: "simulate".into(),
            d: d as u64,
            n,
            param: format!("replica={i}"),
            seed,
            reps,
            estimate: range as f64,
            stderr: 0.0,
            extra: format!("boundary={boundary}"),
        })
        .collect();
    let ranges: Vec<f64> = per_replica.iter().map(|&(r, _)| r as f64).collect();
    let bounds: Vec<f64> = per_replica.iter().map(|&(_, b)| b as f64).collect();
    let (mr, mb) = (mean_stderr(&ranges), mean_stderr(&bounds));
    let summary = json!({
        "experiment": "simulate", "d": d, "n": n, "reps": reps, "master_seed": seed,
        "mean_range_size": mr.value, "mean_range_stderr": mr.stderr,
        "mean_boundary_size": mb.value, "mean_boundary_stderr": mb.stderr,
    });
    Ok((rows, summary))
}

fn run_encode(config: &Config) -> Result<(Vec<ResultRow>, serde_json::Value)> {
    let n = config.require_u64("n")?;
    let reps = config.u64_or("reps", 1)?;
    let seed = config.master_seed()?;
    let bits = codec::code_length_samples(n, reps, seed)?;
    let rows: Vec<ResultRow> = bits
        .iter()
        .enumerate()
        .map(|(i, &b)| ResultRow {
            experiment: "encode".into(),
            d: 2,
            n,
            param: format!("replica={i}"),
            seed,
            reps,
            estimate: b as f64,
            stderr: 0.0,
            extra: String::new(),
        })
        .collect();
    let vals: Vec<f64> = bits.iter().map(|&b| b as f64).collect();
    let mean = mean_stderr(&vals);
    let summary = json!({
        "experiment": "encode", "n": n, "reps": reps, "master_seed": seed,
        "mean_code_bits": mean.value, "stderr": mean.stderr,
    });
    Ok((rows, summary))
}

fn run_entropy(config: &Config) -> Result<(Vec<ResultRow>, serde_json::Value)> {
    let d = config.require_u64("d")? as usize;
    let mode = config.get("mode").unwrap_or("exact");
    match mode {
        "exact" => {
            let n = config.require_u64("n")?;
            let est = entropy::exact_range_entropy(d, n, entropy::DEFAULT_ENUMERATION_BUDGET)?;
            let rows = vec![ResultRow {
                experiment: "entropy".into(),
                d: d as u64,
                n,
                param: "exact".into(),
                seed: 0,
                reps: est.samples,
                estimate: est.value,
                stderr: 0.0,
                extra: "kind=exact".into(),
            }];
            let summary = json!({
                "experiment": "entropy", "mode": "exact", "d": d, "n": n,
                "bits": est.value, "trajectories": est.samples,
            });
            Ok((rows, summary))
        }
        "sandwich" => {
            let n = config.require_u64("n")?;
            let reps = config.require_u64("reps")?;
            let seed = config.master_seed()?;
            let boundary_samples: Vec<u64> = (0..reps)
                .into_par_iter()
                .map(|i| {
                    let mut rng = derive_stream(seed, i);
                    let traj = simulate_walk(d, n, &mut rng).expect("validated d");
                    inner_boundary(&range_of(&traj)).len() as u64
                })
                .collect();
            let lower = entropy::boundary_lower_bound(d, n, &boundary_samples)?;
            let exact = entropy::exact_range_entropy(d, n, entropy::DEFAULT_ENUMERATION_BUDGET)?;
            let mut rows = vec![
                entropy_row(d, n, "lower", seed, reps, lower.value, lower.stderr),
                entropy_row(d, n, "exact", 0, exact.samples, exact.value, 0.0),
            ];
            let mut upper_json = serde_json::Value::Null;
            if d == 2 {
                let bits = codec::code_length_samples(n, reps, seed.wrapping_add(1))?;
                let samples: Vec<(u64, u64)> = bits.iter().map(|&b| (b, n)).collect();
                let upper = entropy::codec_upper_bound(&samples)?;
                rows.push(entropy_row(d, n, "upper", seed, reps, upper.value, upper.stderr));
                upper_json = json!({"bits": upper.value, "stderr": upper.stderr});
            }
            let summary = json!({
                "experiment": "entropy", "mode": "sandwich", "d": d, "n": n, "reps": reps,
                "master_seed": seed,
                "lower": {"bits": lower.value, "stderr": lower.stderr},
                "exact": {"bits": exact.value},
                "upper": upper_json,
            });
            Ok((rows, summary))
        }
        "scaling" => {
            let grid = config.u64_list("n_grid")?;
            let reps = config.require_u64("reps")?;
            let seed = config.master_seed()?;
            let table = entropy::scaling_experiment(d, &grid, reps, seed)?;
            let mut rows = Vec::new();
            for sr in &table {
                let mut lower_row =
                    entropy_row(d, sr.n, "lower", seed, reps, sr.lower.value, sr.lower.stderr);
                lower_row.extra = format!("normalized={}", fmt_float(sr.normalized_lower));
                rows.push(lower_row);
                if let Some(upper) = &sr.upper {
                    rows.push(entropy_row(d, sr.n, "upper", seed, reps, upper.value, upper.stderr));
                }
            }
            let summary = json!({
                "experiment": "entropy", "mode": "scaling", "d": d, "n_grid": grid,
                "reps": reps, "master_seed": seed,
                "rows": table.iter().map(|sr| json!({
                    "n": sr.n,
                    "lower_bits": sr.lower.value,
                    "upper_bits": sr.upper.as_ref().map(|u| u.value),
                    "normalized_lower": sr.normalized_lower,
                    "mean_boundary": sr.mean_boundary.value,
                    "mean_range": sr.mean_range.value,
                })).collect::<Vec<_>>(),
            });
            Ok((rows, summary))
        }
        other => Err(Error::Config(format!("unknown entropy mode '{other}'"))),
    }
}

fn entropy_row(
    d: usize,
    n: u64,
    param: &str,
    seed: u64,
    reps: u64,
    estimate: f64,
    stderr: f64,
) -> ResultRow {
    ResultRow {
        experiment: "entropy".into(),
        d: d as u64,
        n,
        param: param.into(),
        seed,
        reps,
        estimate,
        stderr,
        extra: String::new(),
    }
}

fn run_lemma_check(config: &Config) -> Result<(Vec<ResultRow>, serde_json::Value)> {
    let reps = config.require_u64("reps")?;
    let seed = config.master_seed()?;
    let which = config.get("lemma").unwrap_or("all");
    let lemmas: Vec<LemmaId> = if which == "all" {
        LemmaId::ALL.to_vec()
    } else {
        vec![LemmaId::parse(which)?]
    };
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for lemma in lemmas {
        let report = potential::lemma_check(lemma, None, reps, seed)?;
        for p in &report.points {
            rows.push(ResultRow {
                experiment: "lemma-check".into(),
                d: 2,
                n: 0,
                param: csv_safe(&format!("{}{}", lemma.name(), p.label)),
                seed,
                reps: p.reps,
                estimate: p.estimate,
                stderr: p.stderr,
                extra: format!(
                    "form={};ratio={}",
                    fmt_float(p.claimed_form),
                    p.ratio.map(fmt_float).unwrap_or_else(|| "none".into())
                ),
            });
        }
        reports.push(json!({
            "lemma": lemma.name(),
            "direction_pass": report.direction_pass,
            "stability_pass": report.stability_pass,
            "stability_ratio": report.stability_ratio,
        }));
        eprintln!(
            "lemma {}: direction {} stability {}",
            lemma.name(),
            if report.direction_pass { "PASS" } else { "FAIL" },
            if report.stability_pass { "PASS" } else { "FAIL" }
        );
    }
    let summary = json!({
        "experiment": "lemma-check", "reps": reps, "master_seed": seed,
        "lemmas": reports,
    });
    Ok((rows, summary))
}

fn parse_template_value(raw: &str) -> String {
    // Config values are single-line; '|' separates template rows.
    raw.replace('|', "\n")
}

fn run_extract(config: &Config) -> Result<(Vec<ResultRow>, serde_json::Value)> {
    let n = config.require_u64("n")?;
    let reps = config.u64_or("reps", 1)?;
    let seed = config.master_seed()?;
    let tp = match (config.get("template_left"), config.get("template_right")) {
        (Some(l), Some(r)) => extractor::TemplatePair::from_text(
            &parse_template_value(l),
            &parse_template_value(r),
        )?,
        (None, None) => extractor::default_templates(),
        _ => {
            return Err(Error::Config(
                "template_left and template_right must be given together".into(),
            ))
        }
    };
    let per_replica: Vec<Vec<bool>> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_stream(seed, i);
            let traj = simulate_walk(2, n, &mut rng).expect("d=2");
            extractor::extract_bits(&range_of(&traj), &tp).expect("d=2").bits
        })
        .collect();
    let rows: Vec<ResultRow> = per_replica
        .iter()
        .enumerate()
        .map(|(i, bits)| ResultRow {
            experiment: "extract".into(),
            d: 2,
            n,
            param: format!("replica={i}"),
            seed,
            reps,
            estimate: bits.len() as f64,
            stderr: 0.0,
            extra: format!("ones={}", bits.iter().filter(|&&b| b).count()),
        })
        .collect();
    let pooled: Vec<bool> = per_replica.iter().flatten().copied().collect();
    let total = pooled.len() as u64;
    let ones = pooled.iter().filter(|&&b| b).count() as u64;
    let bias = if total > 0 {
        let e = binomial_estimate(ones, total);
        json!({"p_one": e.value, "stderr": e.stderr})
    } else {
        serde_json::Value::Null
    };
    let summary = json!({
        "experiment": "extract", "n": n, "reps": reps, "master_seed": seed,
        "total_bits": total, "ones": ones, "bias": bias,
        "lag1_autocorrelation": lag1_autocorrelation(&pooled),
    });
    Ok((rows, summary))
}

/// Lag-1 sample autocorrelation of a pooled bit sequence.
pub fn lag1_autocorrelation(bits: &[bool]) -> Option<f64> {
    if bits.len() < 3 {
        return None;
    }
    let x: Vec<f64> = bits.iter().map(|&b| b as u8 as f64).collect();
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let var: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    if var == 0.0 {
        return None;
    }
    let cov: f64 = x.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
    Some(cov / var)
}

fn run_percolation(config: &Config) -> Result<(Vec<ResultRow>, serde_json::Value)> {
    let depth = config.require_u64("L")? as u32;
    let reps = config.require_u64("reps")?;
    let seed = config.master_seed()?;
    let side = 1u64 << depth;
    let per_replica: Vec<(Vec<u64>, f64)> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_stream(seed, i);
            let t = percolation::sample_fractal(depth, &mut rng).expect("depth >= 1");
            let counts: Vec<u64> =
                (1..=depth).map(|k| t.retained_at_level(k).len() as u64).collect();
            (counts, percolation::tree_log_prob(&t))
        })
        .collect();
    let mut rows = Vec::new();
    for k in 1..=depth {
        let vals: Vec<f64> =
            per_replica.iter().map(|(c, _)| c[(k - 1) as usize] as f64).collect();
        let est = mean_stderr(&vals);
        let expected = 4.0f64.powi(k as i32) / (k as f64 + 1.0);
        rows.push(ResultRow {
            experiment: "percolation".into(),
            d: 2,
            n: side,
            param: format!("level={k}"),
            seed,
            reps,
            estimate: est.value,
            stderr: est.stderr,
            extra: format!("expected={}", fmt_float(expected)),
        });
    }
    let logps: Vec<f64> = per_replica.iter().map(|&(_, lp)| lp).collect();
    let lp = mean_stderr(&logps);
    let exact = percolation::exact_tree_entropy(depth);
    rows.push(ResultRow {
        experiment: "percolation".into(),
        d: 2,
        n: side,
        param: "tree_log_prob".into(),
        seed,
        reps,
        estimate: lp.value,
        stderr: lp.stderr,
        extra: format!("exact_entropy={}", fmt_float(exact)),
    });
    let summary = json!({
        "experiment": "percolation", "L": depth, "reps": reps, "master_seed": seed,
        "mean_tree_log_prob": lp.value, "stderr": lp.stderr,
        "exact_tree_entropy": exact,
    });
    Ok((rows, summary))
}

fn run_intersection(config: &Config) -> Result<(Vec<ResultRow>, serde_json::Value)> {
    let depth = config.require_u64("L")? as u32;
    let reps = config.require_u64("reps")?;
    let seed = config.master_seed()?;
    // Target specs contain commas, so the list separator is ';'.
    let raw = config.require("targets")?;
    let targets: Vec<(String, TargetSet)> = raw
        .split(';')
        .map(|t| Ok((t.trim().to_string(), TargetSet::parse(t)?)))
        .collect::<Result<_>>()?;
    if targets.is_empty() {
        return Err(Error::Config("targets list is empty".into()));
    }
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for (idx, (label, target)) in targets.iter().enumerate() {
        let rep = percolation::intersection_ratio(
            *target,
            depth,
            reps,
            seed.wrapping_add(idx as u64),
        )?;
        rows.push(ResultRow {
            experiment: "intersection".into(),
            d: 2,
            n: 1u64 << depth,
            param: csv_safe(label),
            seed,
            reps,
            estimate: rep.ratio.unwrap_or(f64::NAN),
            stderr: rep.ratio_stderr.unwrap_or(f64::NAN),
            extra: format!(
                "p_fractal={};p_walk={}",
                fmt_float(rep.p_fractal),
                fmt_float(rep.p_walk)
            ),
        });
        reports.push(json!({
            "target": label,
            "ratio": rep.ratio,
            "ratio_stderr": rep.ratio_stderr,
            "p_fractal": rep.p_fractal,
            "p_walk": rep.p_walk,
        }));
    }
    let summary = json!({
        "experiment": "intersection", "L": depth, "reps": reps, "master_seed": seed,
        "targets": reports,
    });
    Ok((rows, summary))
}

/// Human-readable summary of result CSV files.
pub fn report(paths: &[PathBuf]) -> Result<String> {
    let mut rows = Vec::new();
    for path in paths {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h == CSV_HEADER => {}
            _ => return Err(Error::Config(format!("{}: not a result file", path.display()))),
        }
        for line in lines {
            if !line.trim().is_empty() {
                rows.push(ResultRow::parse_csv_line(line)?);
            }
        }
    }
    if rows.is_empty() {
        return Ok("no rows\n".to_string());
    }
    let mut out = String::new();
    out.push_str(&format!("{} rows\n", rows.len()));

    // Per (experiment, param) aggregate.
    let mut groups: BTreeMap<(String, String), Vec<&ResultRow>> = BTreeMap::new();
    for row in &rows {
        groups.entry((row.experiment.clone(), row.param.clone())).or_default().push(row);
    }
    for ((exp, param), group) in &groups {
        let vals: Vec<f64> =
            group.iter().map(|r| r.estimate).filter(|v| !v.is_nan()).collect();
        if vals.is_empty() {
            out.push_str(&format!("{exp}/{param}: no finite estimates\n"));
            continue;
        }
        let m = mean_stderr(&vals);
        out.push_str(&format!(
            "{exp}/{param}: {} rows, mean estimate {}\n",
            group.len(),
            fmt_float(m.value)
        ));
    }

    // Normalized scaling table for d=2 entropy bound rows.
    for param in ["lower", "upper"] {
        let series: Vec<(u64, f64)> = rows
            .iter()
            .filter(|r| r.experiment == "entropy" && r.param == param && r.d == 2 && r.n > 1)
            .map(|r| (r.n, r.estimate))
            .collect();
        if series.len() >= 2 {
            let normalized: Vec<f64> = series
                .iter()
                .map(|&(n, bits)| {
                    let l = (n as f64).log2();
                    bits * l * l / n as f64
                })
                .collect();
            out.push_str(&format!("entropy {param} normalized (bits*log2^2(n)/n):\n"));
            for (&(n, _), &v) in series.iter().zip(&normalized) {
                out.push_str(&format!("  n={n}: {}\n", fmt_float(v)));
            }
            if let Some(band) = crate::stats::band_ratio(&normalized) {
                let verdict = if band < 4.0 { "PASS" } else { "FAIL" };
                out.push_str(&format!(
                    "entropy {param} band max/min = {} [{verdict}]\n",
                    fmt_float(band)
                ));
            }
        }
    }
    Ok(out)
}
