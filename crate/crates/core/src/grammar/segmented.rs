//! Segmented-corpus files: one token per line, a blank line per boundary.
//!
//! Token text is escaped so that spaces are visible and the format stays
//! lossless: space is written `_`, a literal `_` as `\_` and `\` as `\\`.
//! Newline and carriage return, which can only appear in tokens when they are
//! not separators, are written `\n` and `\r`.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

pub fn escape_into(token: &str, out: &mut String) {
    for c in token.chars() {
        match c {
            ' ' => out.push('_'),
            '_' => out.push_str("\\_"),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
}

pub fn escape(token: &str) -> String {
    let mut out = String::with_capacity(token.len());
    escape_into(token, &mut out);
    out
}

/// Inverse of [`escape`]. `line` is only used for error reporting.
pub fn unescape(text: &str, line: usize) -> Result<String> {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        match c {
            '_' => out.push(' '),
            '\\' => match chars.next() {
                Some('_') => out.push('_'),
                Some('\\') => out.push('\\'),
                Some('n') => out.push('\n'),
                Some('r') => out.push('\r'),
                Some(other) => {
                    return Err(Error::parse(
                        line,
                        format!("malformed escape sequence \\{other}"),
                    ))
                }
                None => return Err(Error::parse(line, "dangling backslash")),
            },
            c => out.push(c),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Token(String),
    Boundary,
}

/// Writes segmented-corpus lines.
pub struct SegmentedWriter<W: Write> {
    inner: W,
    line: String,
}

impl<W: Write> SegmentedWriter<W> {
    pub fn new(inner: W) -> Self {
        SegmentedWriter {
            inner,
            line: String::new(),
        }
    }

    pub fn token(&mut self, text: &str) -> std::io::Result<()> {
        self.line.clear();
        escape_into(text, &mut self.line);
        self.line.push('\n');
        self.inner.write_all(self.line.as_bytes())
    }

    pub fn boundary(&mut self) -> std::io::Result<()> {
        self.inner.write_all(b"\n")
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

/// Reads a segmented-corpus stream item by item.
pub fn read_segmented<R: BufRead>(reader: R) -> impl Iterator<Item = Result<Item>> {
    reader.lines().enumerate().map(|(i, line)| {
        let line = line.map_err(|e| Error::io("<segmented corpus>", e))?;
        if line.is_empty() {
            Ok(Item::Boundary)
        } else {
            unescape(&line, i + 1).map(Item::Token)
        }
    })
}
