//! Score dumps: `id,rho_raw,p_rho,p_con,p_sel`, 9 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::ScoreTable;

const HEADER: &str = "id,rho_raw,p_rho,p_con,p_sel";

fn sig9(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn format_scores(t: &ScoreTable) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for i in 0..t.len() {
        let _ = writeln!(
            out,
            "{i},{},{},{},{}",
            sig9(t.rho_raw[i]),
            sig9(t.p_rho[i]),
            sig9(t.p_con[i]),
            sig9(t.p_sel[i])
        );
    }
    out
}

/// Parse a dump. Values come back at 9-digit precision, so `p_sel` is not
/// re-derived from the other columns.
pub fn parse_scores(text: &str) -> Result<ScoreTable> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(HEADER) {
        return Err(Error::Malformed { line: 1, reason: format!("expected header `{HEADER}`") });
    }
    let mut t = ScoreTable { rho_raw: vec![], p_rho: vec![], p_con: vec![], p_sel: vec![] };
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: String| Error::Malformed { line: i + 2, reason };
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 5 {
            return Err(bad(format!("expected 5 fields, got {}", fields.len())));
        }
        let id: usize = fields[0].parse().map_err(|_| bad(format!("bad id `{}`", fields[0])))?;
        if id != t.p_sel.len() {
            return Err(bad(format!("ids must be dense and ascending, got {id}")));
        }
        let mut vals = [0.0f64; 4];
        for (v, f) in vals.iter_mut().zip(&fields[1..]) {
            *v = f.parse().map_err(|_| bad(format!("bad number `{f}`")))?;
        }
        t.rho_raw.push(vals[0]);
        t.p_rho.push(vals[1]);
        t.p_con.push(vals[2]);
        t.p_sel.push(vals[3]);
    }
    Ok(t)
}

pub fn write_scores(t: &ScoreTable, path: &Path) -> Result<()> {
    super::write_file(path, format_scores(t).as_bytes())
}

pub fn read_scores(path: &Path) -> Result<ScoreTable> {
    parse_scores(&super::read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        let t = ScoreTable {
            rho_raw: vec![7.5, 1.0 / 3.0],
            p_rho: vec![1.0, 0.0],
            p_con: vec![0.5, 1.0],
            p_sel: vec![0.5, 0.0],
        };
        let text = format_scores(&t);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("id,rho_raw,p_rho,p_con,p_sel"));
        assert_eq!(lines.next(), Some("0,7.50000000e0,1.00000000e0,5.00000000e-1,5.00000000e-1"));
        assert_eq!(lines.next(), Some("1,3.33333333e-1,0.00000000e0,1.00000000e0,0.00000000e0"));
        let back = parse_scores(&text).unwrap();
        assert_eq!(back.rho_raw[0], 7.5);
        assert!((back.rho_raw[1] - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_dump() {
        assert!(parse_scores("id,x\n").is_err());
        assert!(parse_scores("id,rho_raw,p_rho,p_con,p_sel\n1,1,1,1,1\n").is_err());
        assert!(parse_scores("id,rho_raw,p_rho,p_con,p_sel\n0,1,1,1\n").is_err());
    }
}
