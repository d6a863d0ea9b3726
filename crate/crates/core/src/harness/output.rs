use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use super::compare::ComparisonResult;
use super::config::ExperimentConfig;
use crate::environment::OracleResult;
use crate::error::{CsvError, Error, Result};
use crate::optimizer::Strategy;

pub const CONVERGENCE_HEADER: &str = "strategy,replication,trial,yaw1_deg,roll1_deg,yaw2_deg,roll2_deg,capacity_bps_hz,throughput_mbps,best_so_far_mbps";
pub const SUMMARY_HEADER: &str = "strategy,trial,mean_best_mbps,ci_low_mbps,ci_high_mbps";

pub const CONVERGENCE_CSV: &str = "convergence.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const CONVERGENCE_SVG: &str = "convergence.svg";
pub const ORACLE_CSV: &str = "oracle.csv";
pub const MANIFEST: &str = "run-manifest";

fn mbps(bits_per_s_per_hz: f64, bandwidth_hz: f64) -> f64 {
    bits_per_s_per_hz * bandwidth_hz / 1e6
}

/// One line of `convergence.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub strategy: Strategy,
    pub replication: usize,
    pub trial: usize,
    /// yaw1, roll1, yaw2, roll2.
    pub orientation_deg: [f64; 4],
    pub capacity_bps_hz: f64,
    pub throughput_mbps: f64,
    pub best_so_far_mbps: f64,
}

pub fn convergence_csv(result: &ComparisonResult) -> Result<String> {
    let bw = result.config.bandwidth_hz;
    let mut out = String::new();
    out.push_str(CONVERGENCE_HEADER);
    out.push('\n');
    for run in &result.runs {
        for (sample, best) in run.trace.samples.iter().zip(&run.trace.best_so_far) {
            let deg = sample.orientation.to_degrees_flat();
            if deg.len() != 4 {
                return Err(Error::domain(format!(
                    "convergence CSV holds two antennas, trace has {}",
                    deg.len() / 2
                )));
            }
            let c = sample.capacity.bits_per_s_per_hz();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                run.strategy,
                run.replication,
                sample.trial,
                deg[0],
                deg[1],
                deg[2],
                deg[3],
                c,
                mbps(c, bw),
                mbps(*best, bw)
            );
        }
    }
    Ok(out)
}

/// Parses and checks a convergence CSV: exact header, trials numbered from 1
/// within each (strategy, replication) block, and a best-so-far column equal
/// to the running maximum of throughput.
pub fn read_convergence_csv(text: &str) -> std::result::Result<Vec<ConvergenceRow>, CsvError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, h)) if h == CONVERGENCE_HEADER => {}
        Some((line, h)) => {
            return Err(CsvError::BadHeader {
                line,
                found: h.chars().take(200).collect(),
            })
        }
        None => {
            return Err(CsvError::BadHeader {
                line: 1,
                found: String::new(),
            })
        }
    }
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    let mut seen: Vec<(Strategy, usize)> = Vec::new();
    for (line, raw) in lines {
        if raw.is_empty() {
            continue;
        }
        let row = parse_row(line, raw)?;
        let out_of_sequence = |reason: String| CsvError::OutOfSequence { line, reason };
        match rows.last() {
            Some(prev) if (prev.strategy, prev.replication) == (row.strategy, row.replication) => {
                if row.trial != prev.trial + 1 {
                    return Err(out_of_sequence(format!(
                        "trial {} follows trial {}",
                        row.trial, prev.trial
                    )));
                }
                if row.best_so_far_mbps != prev.best_so_far_mbps.max(row.throughput_mbps) {
                    return Err(out_of_sequence(
                        "best_so_far_mbps is not the running maximum".into(),
                    ));
                }
            }
            _ => {
                let key = (row.strategy, row.replication);
                if seen.contains(&key) {
                    return Err(out_of_sequence(format!(
                        "{} replication {} appears in two blocks",
                        row.strategy, row.replication
                    )));
                }
                if row.trial != 1 {
                    return Err(out_of_sequence("block does not start at trial 1".into()));
                }
                if row.best_so_far_mbps != row.throughput_mbps {
                    return Err(out_of_sequence(
                        "best_so_far_mbps is not the running maximum".into(),
                    ));
                }
                seen.push(key);
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

fn parse_row(line: usize, raw: &str) -> std::result::Result<ConvergenceRow, CsvError> {
    let malformed = |reason: String| CsvError::MalformedRow { line, reason };
    let fields: Vec<&str> = raw.split(',').collect();
    if fields.len() != 10 {
        return Err(malformed(format!(
            "expected 10 fields, found {}",
            fields.len()
        )));
    }
    let strategy: Strategy = fields[0]
        .parse()
        .map_err(|_| malformed(format!("unknown strategy `{}`", fields[0])))?;
    let int = |i: usize| -> std::result::Result<usize, CsvError> {
        fields[i]
            .parse()
            .map_err(|_| malformed(format!("field {} is not an integer", i + 1)))
    };
    let num = |i: usize| -> std::result::Result<f64, CsvError> {
        fields[i]
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| malformed(format!("field {} is not a finite number", i + 1)))
    };
    let capacity_bps_hz = num(7)?;
    if capacity_bps_hz < 0.0 {
        return Err(malformed("negative capacity".into()));
    }
    Ok(ConvergenceRow {
        strategy,
        replication: int(1)?,
        trial: int(2)?,
        orientation_deg: [num(3)?, num(4)?, num(5)?, num(6)?],
        capacity_bps_hz,
        throughput_mbps: num(8)?,
        best_so_far_mbps: num(9)?,
    })
}

/// Best-so-far column per (strategy, replication), in file order.
pub fn best_so_far_curves(rows: &[ConvergenceRow]) -> Vec<((Strategy, usize), Vec<f64>)> {
    let mut out: Vec<((Strategy, usize), Vec<f64>)> = Vec::new();
    for r in rows {
        let key = (r.strategy, r.replication);
        match out.last_mut() {
            Some((k, v)) if *k == key => v.push(r.best_so_far_mbps),
            _ => out.push((key, vec![r.best_so_far_mbps])),
        }
    }
    out
}

pub fn summary_csv(result: &ComparisonResult) -> String {
    let bw = result.config.bandwidth_hz;
    let mut out = String::new();
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for s in &result.summaries {
        for t in 0..s.mean.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                s.strategy,
                t + 1,
                mbps(s.mean[t], bw),
                mbps(s.ci_low[t], bw),
                mbps(s.ci_high[t], bw)
            );
        }
    }
    out
}

pub fn oracle_csv(oracle: &OracleResult, bandwidth_hz: f64) -> String {
    let antennas = oracle.best.len();
    let mut out = String::new();
    for i in 1..=antennas {
        let _ = write!(out, "yaw{i}_deg,roll{i}_deg,");
    }
    out.push_str("capacity_bps_hz,throughput_mbps\n");
    for (o, c) in &oracle.landscape {
        for d in o.to_degrees_flat() {
            let _ = write!(out, "{d},");
        }
        let c = c.bits_per_s_per_hz();
        let _ = writeln!(out, "{c},{}", mbps(c, bandwidth_hz));
    }
    out
}

fn color(s: Strategy) -> &'static str {
    match s {
        Strategy::BayesOpt => "#d62728",
        Strategy::Random => "#1f77b4",
        Strategy::Sobol => "#2ca02c",
    }
}

/// Mean best-so-far per strategy with shaded 95% bands; trials on x, Mbps on y.
pub fn convergence_svg(result: &ComparisonResult) -> String {
    const W: f64 = 720.0;
    const H: f64 = 440.0;
    const LEFT: f64 = 70.0;
    const RIGHT: f64 = 130.0;
    const TOP: f64 = 30.0;
    const BOTTOM: f64 = 55.0;
    let bw = result.config.bandwidth_hz;
    let trials = result.config.budget.max(2);

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &result.summaries {
        for v in s.ci_low.iter().chain(&s.ci_high) {
            lo = lo.min(mbps(*v, bw));
            hi = hi.max(mbps(*v, bw));
        }
    }
    if !(lo.is_finite() && hi.is_finite()) {
        lo = 0.0;
        hi = 1.0;
    }
    let pad = ((hi - lo) * 0.05).max(1.0);
    let (lo, hi) = (lo - pad, hi + pad);
    let px = |trial: f64| LEFT + (trial - 1.0) / (trials as f64 - 1.0) * (W - LEFT - RIGHT);
    let py = |v: f64| H - BOTTOM - (v - lo) / (hi - lo) * (H - TOP - BOTTOM);

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let x0 = px(1.0);
    let x1 = px(trials as f64);
    let y0 = H - BOTTOM;
    let _ = writeln!(
        out,
        r#"<path d="M{x0:.2} {TOP} V{y0:.2} H{x1:.2}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let t = 1.0 + (trials as f64 - 1.0) * i as f64 / 5.0;
        let x = px(t);
        let _ = writeln!(
            out,
            r#"<path d="M{x:.2} {y0:.2} v5" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 18.0,
            t.round()
        );
        let v = lo + (hi - lo) * i as f64 / 5.0;
        let y = py(v);
        let _ = writeln!(
            out,
            r#"<path d="M{x0:.2} {y:.2} h-5" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v:.0}</text>"#,
            x0 - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">trials</text>"#,
        (x0 + x1) / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        out,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">best channel capacity so far (Mbps)</text>"#,
        (TOP + y0) / 2.0
    );

    for (i, s) in result.summaries.iter().enumerate() {
        let c = color(s.strategy);
        let mut band = String::new();
        for (t, v) in s.ci_high.iter().enumerate() {
            let _ = write!(band, "{:.2},{:.2} ", px(t as f64 + 1.0), py(mbps(*v, bw)));
        }
        for (t, v) in s.ci_low.iter().enumerate().rev() {
            let _ = write!(band, "{:.2},{:.2} ", px(t as f64 + 1.0), py(mbps(*v, bw)));
        }
        let _ = writeln!(
            out,
            r#"<polygon points="{}" fill="{c}" fill-opacity="0.18" stroke="none"/>"#,
            band.trim_end()
        );
        let line: Vec<String> = s
            .mean
            .iter()
            .enumerate()
            .map(|(t, v)| format!("{:.2},{:.2}", px(t as f64 + 1.0), py(mbps(*v, bw))))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="2"/>"#,
            line.join(" ")
        );
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = W - RIGHT + 15.0;
        let _ = writeln!(
            out,
            r#"<path d="M{lx:.2} {ly:.2} h20" stroke="{c}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            s.strategy
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Resolved config as a loadable document. Values still at their built-in
/// default are marked.
pub fn manifest(result: &ComparisonResult) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# antenna-tuner {} run manifest",
        env!("CARGO_PKG_VERSION")
    );
    let _ = writeln!(out, "# environment: {}", result.environment);
    if let Some(o) = &result.oracle {
        let _ = writeln!(
            out,
            "# oracle best {:?} deg, {} bits/s/Hz",
            o.best.to_degrees_flat(),
            o.value.bits_per_s_per_hz()
        );
    }
    let _ = writeln!(
        out,
        "# values marked `default` were not set by the config; budget and replications defaults are tool choices"
    );
    let defaults = ExperimentConfig::default().to_kv_string();
    for (line, default) in result
        .config
        .to_kv_string()
        .lines()
        .zip(defaults.lines().chain(std::iter::repeat("")))
    {
        if line == default && !line.starts_with('#') {
            let _ = writeln!(out, "{line}  # default");
        } else {
            let _ = writeln!(out, "{line}");
        }
    }
    out
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents)
        .and_then(|_| tmp.as_file().sync_all())
        .map_err(|e| Error::io(path, e))?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        fs::set_permissions(tmp.path(), fs::Permissions::from_mode(0o644))
            .map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn emit_convergence_csv(result: &ComparisonResult, path: &Path) -> Result<()> {
    write_atomic(path, convergence_csv(result)?.as_bytes())
}

pub fn emit_convergence_svg(result: &ComparisonResult, path: &Path) -> Result<()> {
    write_atomic(path, convergence_svg(result).as_bytes())
}

/// Renders every output, then writes them into `dir`. If any write fails,
/// files already written by this call are removed.
pub fn write_outputs(result: &ComparisonResult, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = vec![
        (CONVERGENCE_CSV, convergence_csv(result)?),
        (SUMMARY_CSV, summary_csv(result)),
    ];
    if result.config.svg {
        files.push((CONVERGENCE_SVG, convergence_svg(result)));
    }
    if let Some(o) = &result.oracle {
        files.push((ORACLE_CSV, oracle_csv(o, result.config.bandwidth_hz)));
    }
    files.push((MANIFEST, manifest(result)));

    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let path = dir.join(name);
        if let Err(e) = write_atomic(&path, contents.as_bytes()) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(e);
        }
        written.push(path);
    }
    Ok(written)
}
