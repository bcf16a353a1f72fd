//! Label files: one integer class per line, optionally followed by a tab and
//! a 0/1 flag marking a known-flipped label.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::LabelTable;

pub fn parse_labels(text: &str, classes: Option<u32>) -> Result<LabelTable> {
    let mut labels = Vec::new();
    let mut mask = Vec::new();
    let mut any_flag = false;
    let mut all_flagged = true;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| Error::Malformed { line: i + 1, reason: format!("bad {what} in `{line}`") };
        let mut parts = line.split_whitespace();
        let label: u32 = parts.next().unwrap().parse().map_err(|_| bad("label"))?;
        match parts.next() {
            Some("0") => {
                any_flag = true;
                mask.push(false);
            }
            Some("1") => {
                any_flag = true;
                mask.push(true);
            }
            Some(_) => return Err(bad("noise flag")),
            None => {
                all_flagged = false;
                mask.push(false);
            }
        }
        if parts.next().is_some() {
            return Err(bad("trailing field"));
        }
        labels.push(label);
    }
    if any_flag && !all_flagged {
        return Err(Error::Invalid("noise flags must be given on every line or none".into()));
    }
    let classes = classes.unwrap_or_else(|| labels.iter().max().map_or(0, |m| m + 1));
    LabelTable::new(labels, classes, any_flag.then_some(mask))
}

pub fn read_labels(path: &Path, classes: Option<u32>) -> Result<LabelTable> {
    parse_labels(&super::read_text(path)?, classes)
}

pub fn write_labels(table: &LabelTable, path: &Path) -> Result<()> {
    let mut out = String::new();
    for (i, l) in table.labels().iter().enumerate() {
        match table.noise_mask() {
            Some(mask) => {
                let _ = writeln!(out, "{l}\t{}", u8::from(mask[i]));
            }
            None => {
                let _ = writeln!(out, "{l}");
            }
        }
    }
    super::write_file(path, out.as_bytes())
}
