//! Number formatting, sparse-state files and CSV output.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use zefcode::compress::SweepRow;
use zefcode::SparseState;

use crate::config::normalized_terms;
use crate::error::{CliError, CliResult};

/// `x` rounded to `digits` significant digits, positional for moderate
/// exponents, trailing zeros dropped.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits.saturating_sub(1), x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    if !(-5..digits.len() as i32).contains(&exp) {
        let m = trim_fraction(mantissa);
        return format!("{sign}{m}e{exp}");
    }
    let positional = if exp < 0 {
        format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
    } else {
        let point = exp as usize + 1;
        format!("{}.{}", &digits[..point], &digits[point..])
    };
    format!("{sign}{}", trim_fraction(&positional))
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Parses "re im" (or just "re").
pub fn parse_amplitude(text: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    let num = |s: &str| s.parse::<f64>().map_err(|_| format!("bad number {s:?} in amplitude {text:?}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("amplitude {text:?} is not \"re im\"")),
    }
}

/// Reads a state file of `bitstring re im` lines; blank lines and `#`
/// comments are skipped. Bitstrings shorter than `width` are zero-extended.
pub fn read_state(path: &Path, width: usize) -> CliResult<SparseState> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{name}: {e}")))?;
    let mut terms = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = format!("{name}:{}", i + 1);
        let (bits, amp) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| CliError::Validation(format!("{at}: expected \"bitstring re im\"")))?;
        if bits.len() > width || !bits.chars().all(|c| c == '0' || c == '1') {
            return Err(CliError::Validation(format!(
                "{at}: {bits:?} is not a bitstring of at most {width} bits"
            )));
        }
        let a = parse_amplitude(amp).map_err(|e| CliError::Validation(format!("{at}: {e}")))?;
        terms.push((format!("{bits:0<width$}"), a));
    }
    if terms.is_empty() {
        return Err(CliError::Validation(format!("{name}: state has no terms")));
    }
    normalized_terms(&name, terms)
}

pub const CSV_HEADER: &str = "N,ell,eta_exact,avg_fidelity,stderr,bound_lower,bound_upper";

/// One CSV line (with trailing LF); `extra` columns are appended in order.
pub fn csv_row(row: &SweepRow, extra: &[f64]) -> String {
    let mut line = format!("{},{}", row.n, row.ell);
    for x in [
        row.eta_exact,
        row.avg_fidelity,
        row.stderr,
        row.bound_lower,
        row.bound_upper,
    ]
    .iter()
    .chain(extra)
    {
        write!(line, ",{}", sig(*x, 12)).expect("write to string");
    }
    line.push('\n');
    line
}
