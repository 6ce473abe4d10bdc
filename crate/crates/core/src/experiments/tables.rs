//! Deterministic CSV builders for sweep records, log-log plot data, and
//! surface batch values. Floats are printed with a fixed 17-digit scientific
//! format, so identical inputs always produce byte-identical tables; volatile
//! quantities (wall-clock runtimes) are deliberately left out.

use crate::error::{Error, Result};

use super::fits::SurfaceValue;
use super::sweeps::{ContinuityRecord, DifferenceKind, DEGENERATE_FLOOR};

fn fmt(v: f64) -> String {
    format!("{v:.17e}")
}

fn axis_headers(prefix: &str, d: usize) -> String {
    (1..=d)
        .map(|i| format!("{prefix}_{i}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// The paired rows of a sweep: one row per normal pair, merging its trace
/// and data records. Expects the sweep layout (trace record immediately
/// followed by its data record).
pub fn records_csv(records: &[ContinuityRecord]) -> Result<String> {
    if records.len() % 2 != 0 {
        return Err(Error::Usage(
            "record list does not pair up; expected the sweep layout of a \
             trace record followed by its data record"
                .into(),
        ));
    }
    let mut out = String::new();
    for pair in records.chunks_exact(2) {
        let (trace, data) = (&pair[0], &pair[1]);
        if trace.kind != DifferenceKind::Trace
            || data.kind != DifferenceKind::Data
            || trace.n1 != data.n1
            || trace.n2 != data.n2
        {
            return Err(Error::Usage(
                "record list does not pair up; expected the sweep layout of a \
                 trace record followed by its data record"
                    .into(),
            ));
        }
        if out.is_empty() {
            let d = trace.n1.len();
            out.push_str(&format!(
                "{},{},separation,kappa,trace_l2,data_abs,trusted\n",
                axis_headers("n1", d),
                axis_headers("n2", d)
            ));
        }
        let mut cols: Vec<String> = Vec::new();
        cols.extend(trace.n1.iter().map(|&v| fmt(v)));
        cols.extend(trace.n2.iter().map(|&v| fmt(v)));
        cols.push(fmt(trace.separation));
        cols.push(fmt(trace.kappa));
        cols.push(fmt(trace.difference));
        cols.push(fmt(data.difference));
        cols.push((trace.trusted && data.trusted).to_string());
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Log-log plot data, one row per pair. Differences at the collapse floor
/// leave their cell empty instead of printing the log of rounding noise.
pub fn plot_csv(records: &[ContinuityRecord]) -> Result<String> {
    if records.len() % 2 != 0 {
        return Err(Error::Usage(
            "record list does not pair up; expected the sweep layout of a \
             trace record followed by its data record"
                .into(),
        ));
    }
    let mut out = String::from("ln_separation,ln_kappa,ln_trace_l2,ln_data_abs\n");
    let ln_or_empty = |v: f64| {
        if v > DEGENERATE_FLOOR {
            fmt(v.ln())
        } else {
            String::new()
        }
    };
    for pair in records.chunks_exact(2) {
        let (trace, data) = (&pair[0], &pair[1]);
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt(trace.separation.ln()),
            fmt(trace.kappa.ln()),
            ln_or_empty(trace.difference),
            ln_or_empty(data.difference),
        ));
    }
    Ok(out)
}

/// Surface batch table: point, normal, κ̂, homogenized value components,
/// trust flag. One row per surface sample.
pub fn surface_csv(values: &[SurfaceValue]) -> Result<String> {
    let mut out = String::new();
    for v in values {
        if out.is_empty() {
            let d = v.point.len();
            let k = v.value.len();
            out.push_str(&format!(
                "{},{},kappa_hat,{},trusted\n",
                axis_headers("x", d),
                axis_headers("n", d),
                axis_headers("value", k)
            ));
        }
        let mut cols: Vec<String> = Vec::new();
        cols.extend(v.point.iter().map(|&x| fmt(x)));
        cols.extend(v.normal.iter().map(|&x| fmt(x)));
        cols.push(fmt(v.kappa_hat));
        cols.extend(v.value.iter().map(|&x| fmt(x)));
        cols.push(v.trusted.to_string());
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    Ok(out)
}
