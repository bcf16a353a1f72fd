//! Selection manifests.
//!
//! ```text
//! #epoch=<t> budget=<k> seed=<s>
//! <id>\t<p_sel, 9 decimals>\t<op|->\t<magnitude|->\t<sign|->
//! ```

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::augment::{AppliedAug, AugOp};
use crate::error::{Error, Result};
use crate::types::{SampleId, SelectionEntry, SelectionManifest};

pub fn format_manifest(m: &SelectionManifest) -> String {
    let mut out = format!("#epoch={} budget={} seed={}\n", m.epoch, m.budget, m.seed);
    for e in &m.selected {
        let _ = write!(out, "{}\t{:.9}\t", e.id, e.p_sel);
        match &e.aug {
            None => out.push_str("-\t-\t-\n"),
            Some(a) => {
                let mag = a.magnitude.map_or_else(|| "-".to_string(), |m| m.to_string());
                let _ = writeln!(out, "{}\t{}\t{}", a.op.name(), mag, a.sign);
            }
        }
    }
    out
}

fn malformed(line: usize, reason: impl Into<String>) -> Error {
    Error::Malformed { line, reason: reason.into() }
}

fn parse_header(line: &str) -> Result<(u64, usize, u64)> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| malformed(1, "missing `#epoch=.. budget=.. seed=..` header"))?;
    let (mut epoch, mut budget, mut seed) = (None, None, None);
    for token in body.split_whitespace() {
        let (k, v) = token
            .split_once('=')
            .ok_or_else(|| malformed(1, format!("bad header token `{token}`")))?;
        let bad = || malformed(1, format!("bad header value `{token}`"));
        match k {
            "epoch" => epoch = Some(v.parse().map_err(|_| bad())?),
            "budget" => budget = Some(v.parse().map_err(|_| bad())?),
            "seed" => seed = Some(v.parse().map_err(|_| bad())?),
            _ => return Err(malformed(1, format!("unknown header field `{k}`"))),
        }
    }
    match (epoch, budget, seed) {
        (Some(e), Some(b), Some(s)) => Ok((e, b, s)),
        _ => Err(malformed(1, "header needs epoch, budget and seed")),
    }
}

fn parse_aug(lineno: usize, op: &str, mag: &str, sign: &str) -> Result<Option<AppliedAug>> {
    if op == "-" {
        if mag != "-" || sign != "-" {
            return Err(malformed(lineno, "augmentation fields present without an op"));
        }
        return Ok(None);
    }
    let op = AugOp::from_name(op).ok_or_else(|| malformed(lineno, format!("unknown op `{op}`")))?;
    let magnitude = match mag {
        "-" => None,
        m => Some(m.parse::<f64>().map_err(|_| malformed(lineno, format!("bad magnitude `{m}`")))?),
    };
    let sign = match sign {
        "1" => 1,
        "-1" => -1,
        s => return Err(malformed(lineno, format!("bad sign `{s}`"))),
    };
    AppliedAug::new(op, magnitude, sign)
        .map(Some)
        .map_err(|e| malformed(lineno, e.to_string()))
}

pub fn parse_manifest(text: &str) -> Result<SelectionManifest> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| malformed(1, "empty manifest"))?;
    let (epoch, budget, seed) = parse_header(header)?;
    let mut selected = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, p_sel, op, mag, sign] = fields[..] else {
            return Err(malformed(lineno, format!("expected 5 tab-separated fields, got {}", fields.len())));
        };
        let id = SampleId(id.parse().map_err(|_| malformed(lineno, format!("bad id `{id}`")))?);
        let p_sel: f64 = p_sel.parse().map_err(|_| malformed(lineno, format!("bad p_sel `{p_sel}`")))?;
        if !(0.0..=1.0).contains(&p_sel) {
            return Err(malformed(lineno, format!("p_sel {p_sel} outside [0, 1]")));
        }
        if !seen.insert(id) {
            return Err(Error::DuplicateId(id));
        }
        selected.push(SelectionEntry { id, p_sel, aug: parse_aug(lineno, op, mag, sign)? });
    }
    let manifest = SelectionManifest { epoch, budget, seed, selected };
    manifest.validate()?;
    Ok(manifest)
}

pub fn write_manifest(m: &SelectionManifest, path: &Path) -> Result<()> {
    m.validate()?;
    super::write_file(path, format_manifest(m).as_bytes())
}

pub fn read_manifest(path: &Path) -> Result<SelectionManifest> {
    parse_manifest(&super::read_text(path)?)
}
