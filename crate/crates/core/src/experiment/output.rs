use std::fmt::Write;

use super::CsvRow;

pub const CSV_HEADER: &str =
    "experiment,class,n,r_or_rho,kind,metric,mean,std,min,max,failures,trials,seed";

/// C-style `%.6e`: six mantissa digits and an exponent of at least two
/// digits, e.g. `7.910000e-07`.
pub fn fmt_e(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.6e}");
    let (mantissa, exp) = s.split_once('e').unwrap_or((&s, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

pub fn to_csv(rows: &[CsvRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record(CSV_HEADER.split(','));
    for row in rows {
        let s = &row.stats;
        let _ = w.write_record([
            row.experiment.clone(),
            row.class.clone(),
            row.n.to_string(),
            row.r_or_rho.to_string(),
            row.kind.clone(),
            row.metric.clone(),
            fmt_e(s.mean),
            fmt_e(s.std),
            fmt_e(s.min),
            fmt_e(s.max),
            s.failures.to_string(),
            s.trials.to_string(),
            row.seed.to_string(),
        ]);
    }
    let bytes = w.into_inner().unwrap_or_default();
    String::from_utf8(bytes).unwrap_or_default()
}

/// Fixed-width table for terminals.
pub fn render_table(rows: &[CsvRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<6} {:>5} {:>5} {:<13} {:<28} {:>13} {:>13} {:>6}",
        "class", "n", "r", "kind", "metric", "mean", "std", "fail"
    );
    for row in rows {
        let _ = writeln!(
            out,
            "{:<6} {:>5} {:>5} {:<13} {:<28} {:>13} {:>13} {:>6}",
            row.class,
            row.n,
            row.r_or_rho,
            row.kind,
            row.metric,
            fmt_e(row.stats.mean),
            fmt_e(row.stats.std),
            row.stats.failures
        );
    }
    out
}
