//! Fixed text formats for every emitted file.

use std::fmt::Write;

use yawreg_core::steering::SimResult;

pub const TRACE_HEADER: &str = "t,r,delta_f,delta_mr,delta_mr_unsat,saturated";

/// C `printf("%.9e")`: ten significant digits, signed exponent of at
/// least two digits.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.9e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

pub fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// Trace CSV with the fixed header; angles in radians.
pub fn trace_csv(res: &SimResult) -> String {
    let mut out = String::with_capacity(res.len() * 80);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for k in 0..res.len() {
        let t = k as f64 * res.dt;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            sci(t),
            sci(res.r[k]),
            sci(res.delta_f[k]),
            sci(res.delta_mr[k]),
            sci(res.delta_mr_unsat[k]),
            flag(res.saturated[k])
        );
    }
    out
}

/// Generic CSV from a header and numeric columns of equal length.
pub fn columns_csv(header: &[&str], cols: &[&[f64]]) -> String {
    let n = cols.first().map_or(0, |c| c.len());
    let mut out = header.join(",");
    out.push('\n');
    for k in 0..n {
        let row: Vec<String> = cols.iter().map(|c| sci(c[k])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Whitespace-separated plot data, every `step`-th row, `#` header.
pub fn plot_data(header: &[&str], cols: &[&[f64]], step: usize) -> String {
    let n = cols.first().map_or(0, |c| c.len());
    let mut out = format!("# {}\n", header.join(" "));
    let step = step.max(1);
    let mut k = 0;
    while k < n {
        let row: Vec<String> = cols.iter().map(|c| sci(c[k])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
        if k + 1 < n && k + step >= n {
            // always keep the final sample
            k = n - 1;
        } else {
            k += step;
        }
    }
    out
}

/// Fixed-width text table for the terminal.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let parts: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        parts.join("  ")
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}
