//! `seq/v1` sequence files.
//!
//! ```text
//! seq/v1 k=2 n=8
//! 01101110
//! ```
//!
//! Bases up to 10 store one ASCII digit per symbol; larger bases store
//! comma-separated integers. Whitespace and line breaks in the body are
//! ignored on reading.

use std::path::Path;

use indlab_core::sequence::{SequenceSource, SourceKind};
use indlab_core::SymbolString;

use crate::error::{Error, Result};

pub const HEADER: &str = "seq/v1";

pub fn format_seq(s: &SymbolString) -> String {
    let k = s.alphabet_size();
    let mut out = format!("{HEADER} k={k} n={}\n", s.len());
    if k <= 10 {
        out.extend(s.symbols().iter().map(|&d| char::from(b'0' + d as u8)));
    } else {
        let parts: Vec<String> = s.symbols().iter().map(u32::to_string).collect();
        out.push_str(&parts.join(","));
    }
    out.push('\n');
    out
}

pub fn parse_seq(text: &str) -> Result<SymbolString> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::parse("seq/v1", 1, "empty file"))?;
    let mut fields = header.split_whitespace();
    match fields.next() {
        Some(HEADER) => {}
        Some(other) if other.starts_with("seq/") => {
            return Err(Error::Schema {
                context: "sequence file".into(),
                found: other.into(),
                expected: HEADER.into(),
            })
        }
        _ => return Err(Error::parse("seq/v1", 1, "missing `seq/v1` header")),
    }
    let (mut k, mut n) = (None, None);
    for f in fields {
        let (key, value) = f
            .split_once('=')
            .ok_or_else(|| Error::parse("seq/v1", 1, format!("bad header field `{f}`")))?;
        let v: u64 = value
            .parse()
            .map_err(|_| Error::parse("seq/v1", 1, format!("`{f}` is not an integer")))?;
        match key {
            "k" => k = Some(v),
            "n" => n = Some(v),
            _ => return Err(Error::parse("seq/v1", 1, format!("unknown header field `{key}`"))),
        }
    }
    let k = k.ok_or_else(|| Error::parse("seq/v1", 1, "header lacks k="))?;
    let n = n.ok_or_else(|| Error::parse("seq/v1", 1, "header lacks n="))? as usize;
    if !(2..=u32::MAX as u64).contains(&k) {
        return Err(Error::parse("seq/v1", 1, format!("alphabet size {k} out of range")));
    }
    let k = k as u32;
    let mut symbols = Vec::with_capacity(n);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        if k <= 10 {
            for ch in line.chars().filter(|c| !c.is_whitespace()) {
                let d = ch
                    .to_digit(10)
                    .filter(|&d| d < k)
                    .ok_or_else(|| Error::parse("seq/v1", line_no, format!("`{ch}` is not a base-{k} digit")))?;
                symbols.push(d);
            }
        } else {
            for tok in line.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let d: u32 = tok
                    .parse()
                    .ok()
                    .filter(|&d| d < k)
                    .ok_or_else(|| Error::parse("seq/v1", line_no, format!("`{tok}` is not a base-{k} symbol")))?;
                symbols.push(d);
            }
        }
    }
    if symbols.len() != n {
        return Err(Error::parse(
            "seq/v1",
            1,
            format!("header declares n={n}, body holds {} symbols", symbols.len()),
        ));
    }
    Ok(SymbolString::new(k, symbols)?)
}

pub fn read_seq(path: &Path) -> Result<SymbolString> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_seq(&text)
}

pub fn write_seq(path: &Path, s: &SymbolString) -> Result<()> {
    std::fs::write(path, format_seq(s)).map_err(|e| Error::io(path, e))
}

/// A stored sequence replayed as a source; reading past the end is an
/// error, not a wrap-around.
#[derive(Clone, Debug)]
pub struct FileSource {
    data: SymbolString,
    pos: usize,
}

impl FileSource {
    pub fn new(data: SymbolString) -> Self {
        FileSource { data, pos: 0 }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

impl SequenceSource for FileSource {
    fn kind(&self) -> SourceKind {
        SourceKind::File
    }
    fn alphabet_size(&self) -> u32 {
        self.data.alphabet_size()
    }
    fn next_symbol(&mut self) -> indlab_core::Result<u32> {
        let s = self.data.symbols().get(self.pos).copied().ok_or_else(|| {
            indlab_core::Error::Unavailable(format!("file sequence ends after {} symbols", self.data.len()))
        })?;
        self.pos += 1;
        Ok(s)
    }
}
