//! Recorded CSI traces and the replay environment.
//!
//! File layout (comma-separated text):
//!
//! ```text
//! csi-trace,v1,M=<int>,NR=<int>,NT=<int>,SNR_DB=<float>
//! yaw1_deg,roll1_deg,yaw2_deg,roll2_deg,k,rx,tx,re,im
//! ...
//! ```
//!
//! One row per (orientation, subcarrier, rx, tx) entry, rows grouped by
//! orientation, two angle columns per RX antenna. CSI amplitudes are relative
//! to the reference link whose SNR is `SNR_DB`.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::{score_capture, CapacitySample, Environment, DEFAULT_NOISE_FLOOR_DBM};
use crate::capacity::{CapacityValue, SnrLinear};
use crate::channel::CsiTensor;
use crate::error::{Error, Result, TraceError};
use crate::geometry::{distance_sq_unchecked, OrientationConfig, SearchDomain};

const MAGIC: &str = "csi-trace";
const VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq)]
pub struct CsiTrace {
    pub grid: Vec<(OrientationConfig, CsiTensor)>,
    /// Declared reference SNR in dB, as written in the header.
    pub snr_db: f64,
    pub source: String,
}

impl CsiTrace {
    pub fn new(
        grid: Vec<(OrientationConfig, CsiTensor)>,
        snr_db: f64,
        source: impl Into<String>,
    ) -> Result<Self> {
        let trace = CsiTrace {
            grid,
            snr_db,
            source: source.into(),
        };
        trace.validate()?;
        Ok(trace)
    }

    pub fn snr(&self) -> SnrLinear {
        SnrLinear::from_db(self.snr_db).expect("validated SNR")
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.grid[0].1.shape()
    }

    fn validate(&self) -> Result<()> {
        let first = self
            .grid
            .first()
            .ok_or_else(|| Error::domain("trace grid is empty"))?;
        SnrLinear::from_db(self.snr_db)?;
        let shape = first.1.shape();
        let mut seen: Vec<&OrientationConfig> = Vec::with_capacity(self.grid.len());
        for (o, csi) in &self.grid {
            if csi.shape() != shape {
                return Err(Error::domain("all trace tensors must share one shape"));
            }
            if o.len() != shape.1 {
                return Err(Error::domain("orientation count must equal N_r"));
            }
            if seen.contains(&o) {
                return Err(Error::domain("duplicate orientation in trace"));
            }
            seen.push(o);
        }
        Ok(())
    }
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serializes a trace to the text format.
pub fn write_trace(trace: &CsiTrace) -> String {
    let (m, nr, nt) = trace.shape();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{MAGIC},{VERSION},M={m},NR={nr},NT={nt},SNR_DB={}",
        trace.snr_db
    );
    for (o, csi) in &trace.grid {
        let angles = o
            .to_degrees_flat()
            .into_iter()
            .map(fmt_float)
            .collect::<Vec<_>>()
            .join(",");
        for k in 0..m {
            for i in 0..nr {
                for j in 0..nt {
                    let h = csi.get(k, i, j);
                    let _ = writeln!(
                        out,
                        "{angles},{k},{i},{j},{},{}",
                        fmt_float(h.re),
                        fmt_float(h.im)
                    );
                }
            }
        }
    }
    out
}

fn header_field<T: std::str::FromStr>(
    field: &str,
    name: &str,
) -> std::result::Result<T, TraceError> {
    let bad = || TraceError::MalformedHeader {
        line: 1,
        reason: format!("expected `{name}=<value>`, found `{field}`"),
    };
    let value = field
        .trim()
        .strip_prefix(name)
        .and_then(|s| s.strip_prefix('='))
        .ok_or_else(bad)?;
    value.trim().parse().map_err(|_| bad())
}

struct Group {
    orientation: OrientationConfig,
    start_line: usize,
    filled: Vec<bool>,
    csi: CsiTensor,
}

/// Parses trace text. Errors carry 1-based line numbers.
pub fn parse_trace(text: &str) -> std::result::Result<CsiTrace, TraceError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or(TraceError::MalformedHeader {
        line: 1,
        reason: "file is empty".into(),
    })?;
    let fields: Vec<&str> = header.trim().split(',').collect();
    if fields.len() != 6 {
        return Err(TraceError::MalformedHeader {
            line: 1,
            reason: format!("expected 6 comma-separated fields, found {}", fields.len()),
        });
    }
    if fields[0].trim() != MAGIC || fields[1].trim() != VERSION {
        return Err(TraceError::MalformedHeader {
            line: 1,
            reason: format!("expected `{MAGIC},{VERSION}` prefix"),
        });
    }
    let m: usize = header_field(fields[2], "M")?;
    let nr: usize = header_field(fields[3], "NR")?;
    let nt: usize = header_field(fields[4], "NT")?;
    let snr_db: f64 = header_field(fields[5], "SNR_DB")?;
    if m == 0 || nr == 0 || nt == 0 {
        return Err(TraceError::MalformedHeader {
            line: 1,
            reason: "dimensions must be positive".into(),
        });
    }
    let per_group = m
        .checked_mul(nr)
        .and_then(|x| x.checked_mul(nt))
        .filter(|&x| x <= 1 << 24)
        .ok_or(TraceError::MalformedHeader {
            line: 1,
            reason: "dimensions too large".into(),
        })?;
    if !snr_db.is_finite() || SnrLinear::from_db(snr_db).is_err() {
        return Err(TraceError::MalformedHeader {
            line: 1,
            reason: "SNR_DB must be finite".into(),
        });
    }

    let n_angles = 2 * nr;
    let n_cols = n_angles + 5;
    let mut grid: Vec<(OrientationConfig, CsiTensor)> = Vec::new();
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut current: Option<Group> = None;
    let mut last_line = 1;

    let close = |g: Group,
                 line: usize|
     -> std::result::Result<(OrientationConfig, CsiTensor), TraceError> {
        if g.filled.iter().any(|f| !f) {
            return Err(TraceError::ShapeMismatch {
                line,
                reason: format!(
                    "orientation group starting at line {} has {} of {} entries",
                    g.start_line,
                    g.filled.iter().filter(|f| **f).count(),
                    per_group
                ),
            });
        }
        Ok((g.orientation, g.csi))
    };

    for (line, raw) in lines {
        last_line = line;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let cols: Vec<&str> = raw.split(',').map(str::trim).collect();
        if cols.len() != n_cols {
            return Err(TraceError::MalformedRow {
                line,
                reason: format!("expected {n_cols} columns, found {}", cols.len()),
            });
        }
        let float = |s: &str, what: &str| -> std::result::Result<f64, TraceError> {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| TraceError::MalformedRow {
                    line,
                    reason: format!("{what}: `{s}` is not a finite number"),
                })
        };
        let index = |s: &str, what: &str, bound: usize| -> std::result::Result<usize, TraceError> {
            let v: usize = s.parse().map_err(|_| TraceError::MalformedRow {
                line,
                reason: format!("{what}: `{s}` is not an index"),
            })?;
            if v >= bound {
                return Err(TraceError::ShapeMismatch {
                    line,
                    reason: format!("{what} {v} out of range (< {bound})"),
                });
            }
            Ok(v)
        };
        let angles = cols[..n_angles]
            .iter()
            .map(|s| float(s, "angle"))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let k = index(cols[n_angles], "k", m)?;
        let i = index(cols[n_angles + 1], "rx", nr)?;
        let j = index(cols[n_angles + 2], "tx", nt)?;
        let re = float(cols[n_angles + 3], "re")?;
        let im = float(cols[n_angles + 4], "im")?;
        let orientation = OrientationConfig::from_degrees(
            angles.chunks_exact(2).map(|c| (c[0], c[1])),
        )
        .map_err(|e| TraceError::MalformedRow {
            line,
            reason: e.to_string(),
        })?;

        let same = current
            .as_ref()
            .is_some_and(|g| g.orientation == orientation);
        if !same {
            if let Some(g) = current.take() {
                grid.push(close(g, line - 1)?);
            }
            let key: Vec<u64> = orientation.to_flat().iter().map(|x| x.to_bits()).collect();
            if !seen.insert(key) {
                return Err(TraceError::DuplicateOrientation { line });
            }
            current = Some(Group {
                orientation,
                start_line: line,
                filled: vec![false; per_group],
                csi: CsiTensor::zeros(m, nr, nt),
            });
        }
        let g = current.as_mut().expect("group opened above");
        let slot = (k * nr + i) * nt + j;
        if g.filled[slot] {
            return Err(TraceError::ShapeMismatch {
                line,
                reason: format!("entry (k={k}, rx={i}, tx={j}) repeated"),
            });
        }
        g.filled[slot] = true;
        g.csi.set(k, i, j, Complex64::new(re, im));
    }
    match current {
        Some(g) => grid.push(close(g, last_line)?),
        None => return Err(TraceError::Empty { line: last_line }),
    }
    Ok(CsiTrace {
        grid,
        snr_db,
        source: String::new(),
    })
}

pub fn load_trace(path: impl AsRef<Path>) -> Result<CsiTrace> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut trace = parse_trace(&text)?;
    trace.source = path.display().to_string();
    Ok(trace)
}

/// Replay backend: answers with the nearest recorded orientation under the
/// unit-scale wrapped metric, lowest index on ties.
#[derive(Debug, Clone)]
pub struct TraceEnv {
    trace: CsiTrace,
    capacities: Vec<(CapacityValue, SnrLinear)>,
    unit_scales: Vec<f64>,
}

pub fn trace_env(trace: CsiTrace) -> Result<TraceEnv> {
    trace.validate()?;
    let snr = trace.snr();
    let capacities = trace
        .grid
        .iter()
        .map(|(_, csi)| score_capture(std::slice::from_ref(csi), snr, DEFAULT_NOISE_FLOOR_DBM))
        .collect::<Result<Vec<_>>>()?;
    let dims = trace.grid[0].0.dims();
    Ok(TraceEnv {
        trace,
        capacities,
        unit_scales: vec![1.0; dims],
    })
}

impl TraceEnv {
    pub fn trace(&self) -> &CsiTrace {
        &self.trace
    }

    pub fn nearest_index(&self, orientation: &OrientationConfig) -> Result<usize> {
        if orientation.dims() != self.unit_scales.len() {
            return Err(Error::domain(
                "orientation antenna count does not match the trace",
            ));
        }
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (idx, (o, _)) in self.trace.grid.iter().enumerate() {
            let d = distance_sq_unchecked(orientation, o, &self.unit_scales);
            if d < best_d - 1e-12 {
                best = idx;
                best_d = d;
            }
        }
        Ok(best)
    }
}

impl Environment for TraceEnv {
    fn evaluate(&mut self, orientation: &OrientationConfig) -> Result<CapacitySample> {
        let idx = self.nearest_index(orientation)?;
        let (capacity, snr) = self.capacities[idx];
        Ok(CapacitySample {
            orientation: orientation.clone(),
            capacity,
            snapshots_used: 1,
            snr,
            trial_tag: Some(format!("grid#{idx}")),
        })
    }

    fn ground_truth(&self, orientation: &OrientationConfig) -> Result<CapacityValue> {
        Ok(self.capacities[self.nearest_index(orientation)?].0)
    }

    fn domain(&self) -> SearchDomain {
        SearchDomain::full(self.trace.shape().1)
    }

    fn metadata(&self) -> String {
        let (m, nr, nt) = self.trace.shape();
        format!(
            "trace replay: {} orientations, M={m}, NR={nr}, NT={nt}, SNR {} dB, source {}",
            self.trace.grid.len(),
            self.trace.snr_db,
            if self.trace.source.is_empty() {
                "<memory>"
            } else {
                &self.trace.source
            }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tensor(seed: f64) -> CsiTensor {
        let entries = (0..2 * 2 * 2)
            .map(|n| Complex64::new(seed + n as f64 * 0.125, -(n as f64) / 3.0))
            .collect();
        CsiTensor::new(2, 2, 2, entries).unwrap()
    }

    fn sample_trace() -> CsiTrace {
        let grid = vec![
            (
                OrientationConfig::from_degrees([(0.0, 0.0), (0.0, 0.0)]).unwrap(),
                tensor(1.0),
            ),
            (
                OrientationConfig::from_degrees([(10.0, 0.0), (0.0, 0.0)]).unwrap(),
                tensor(0.5),
            ),
            (
                OrientationConfig::from_degrees([(90.0, 45.0), (180.0, 90.0)]).unwrap(),
                tensor(0.1),
            ),
        ];
        CsiTrace::new(grid, 20.0, "test").unwrap()
    }

    #[test]
    fn roundtrip_is_exact() {
        let t = sample_trace();
        let back = parse_trace(&write_trace(&t)).unwrap();
        assert_eq!(back.grid, t.grid);
        assert_eq!(back.snr_db, t.snr_db);
    }

    #[test]
    fn header_column_count_error_cites_line_one() {
        let text = write_trace(&sample_trace()).replacen(",SNR_DB=20", "", 1);
        let err = parse_trace(&text).unwrap_err();
        assert!(matches!(err, TraceError::MalformedHeader { line: 1, .. }));
    }

    #[test]
    fn duplicate_orientation_detected() {
        let t = sample_trace();
        let text = write_trace(&t);
        let mut lines: Vec<&str> = text.lines().collect();
        // Append the first group again after the last one.
        let first_group: Vec<&str> = lines[1..9].to_vec();
        lines.extend(first_group);
        let err = parse_trace(&lines.join("\n")).unwrap_err();
        assert_eq!(err, TraceError::DuplicateOrientation { line: 26 });
    }

    #[test]
    fn incomplete_group_is_shape_error() {
        let text = write_trace(&sample_trace());
        let lines: Vec<&str> = text.lines().collect();
        let mut kept = lines.clone();
        kept.remove(3);
        let err = parse_trace(&kept.join("\n")).unwrap_err();
        assert!(
            matches!(err, TraceError::ShapeMismatch { line: 8, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn out_of_range_index_is_shape_error() {
        let text = "csi-trace,v1,M=1,NR=2,NT=1,SNR_DB=10\n0,0,0,0,0,2,0,1.0,0.0\n";
        assert!(matches!(
            parse_trace(text).unwrap_err(),
            TraceError::ShapeMismatch { line: 2, .. }
        ));
    }

    #[test]
    fn bad_row_cites_line() {
        let text = "csi-trace,v1,M=1,NR=1,NT=1,SNR_DB=10\n0,0,0,0,0,abc,0.0\n";
        assert_eq!(parse_trace(text).unwrap_err().line(), 2);
        let short = "csi-trace,v1,M=1,NR=1,NT=1,SNR_DB=10\n0,0,0,0\n";
        assert!(matches!(
            parse_trace(short).unwrap_err(),
            TraceError::MalformedRow { line: 2, .. }
        ));
        let empty = "csi-trace,v1,M=1,NR=1,NT=1,SNR_DB=10\n";
        assert!(matches!(
            parse_trace(empty).unwrap_err(),
            TraceError::Empty { .. }
        ));
    }

    #[test]
    fn nearest_neighbour_lookup() {
        let t = sample_trace();
        let env = trace_env(t.clone()).unwrap();
        let on_grid = OrientationConfig::from_degrees([(90.0, 45.0), (180.0, 90.0)]).unwrap();
        assert_eq!(env.nearest_index(&on_grid).unwrap(), 2);
        let wrapped = OrientationConfig::from_degrees([(359.5, 0.0), (0.0, 0.0)]).unwrap();
        assert_eq!(env.nearest_index(&wrapped).unwrap(), 0);
        let tie = OrientationConfig::from_degrees([(5.0, 0.0), (0.0, 0.0)]).unwrap();
        assert_eq!(env.nearest_index(&tie).unwrap(), 0);
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_trace("/nonexistent/trace.csv"),
            Err(Error::Io { .. })
        ));
    }
}
