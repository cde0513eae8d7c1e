//! Line-oriented grammar file.
//!
//! ```text
//! RGRAM\t1
//! T\t<terminal-count>
//! t\t<symbol-id>\t<unicode-scalar-decimal>      (one per terminal)
//! r\t<id>\t<left-id>\t<right-id>\t<freq-at-merge> (one per rule, id order)
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{Grammar, Rule};
use crate::corpus::{SymbolId, SymbolTable};
use crate::error::{Error, Result};

pub const MAGIC: &str = "RGRAM";
pub const FORMAT_VERSION: u32 = 1;

pub fn write_grammar<W: Write>(g: &Grammar, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{MAGIC}\t{FORMAT_VERSION}")?;
    writeln!(w, "T\t{}", g.terminal_count())?;
    for (i, &c) in g.table().chars().iter().enumerate() {
        writeln!(w, "t\t{i}\t{}", c as u32)?;
    }
    for r in g.rules() {
        writeln!(
            w,
            "r\t{}\t{}\t{}\t{}",
            r.id, r.left, r.right, r.freq_at_merge
        )?;
    }
    w.flush()
}

pub fn save(g: &Grammar, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_grammar(g, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<Grammar> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_grammar(BufReader::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

fn fields<'a>(line: &'a str, tag: &str, n: usize, lineno: usize) -> Result<Vec<&'a str>> {
    let parts: Vec<&str> = line.split('\t').collect();
    if parts[0] != tag || parts.len() != n + 1 {
        return Err(Error::parse(
            lineno,
            format!("expected `{tag}` record with {n} fields, found {line:?}"),
        ));
    }
    Ok(parts[1..].to_vec())
}

fn number<T: std::str::FromStr>(s: &str, lineno: usize) -> Result<T> {
    s.parse()
        .map_err(|_| Error::parse(lineno, format!("invalid number {s:?}")))
}

pub fn read_grammar<R: BufRead>(reader: R) -> Result<Grammar> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut seen = 0;
    let mut next_line = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((n, Ok(line))) => {
                seen = n;
                Ok((n, line))
            }
            Some((_, Err(e))) => Err(Error::io("<grammar>", e)),
            None => Err(Error::parse(
                seen + 1,
                format!("unexpected end of file, expected {what}"),
            )),
        }
    };

    let (n, header) = next_line("header")?;
    let mut parts = header.split('\t');
    if parts.next() != Some(MAGIC) {
        return Err(Error::parse(n, "not a grammar file (missing RGRAM header)"));
    }
    let version = parts.next().unwrap_or("");
    if version != FORMAT_VERSION.to_string() || parts.next().is_some() {
        return Err(Error::Version {
            found: version.to_string(),
            expected: FORMAT_VERSION,
        });
    }

    let (n, line) = next_line("terminal count")?;
    let terminals: usize = number(fields(&line, "T", 1, n)?[0], n)?;

    let mut chars = Vec::with_capacity(terminals);
    for i in 0..terminals {
        let (n, line) = next_line("terminal record")?;
        let f = fields(&line, "t", 2, n)?;
        let id: usize = number(f[0], n)?;
        if id != i {
            return Err(Error::Validation(format!(
                "line {n}: terminal id {id} out of order, expected {i}"
            )));
        }
        let scalar: u32 = number(f[1], n)?;
        let c = char::from_u32(scalar)
            .ok_or_else(|| Error::parse(n, format!("{scalar} is not a Unicode scalar value")))?;
        chars.push(c);
    }
    let table = SymbolTable::from_ordered(chars)?;

    let mut rules = Vec::new();
    for (n, line) in lines {
        let line = line.map_err(|e| Error::io("<grammar>", e))?;
        let f = fields(&line, "r", 4, n)?;
        let rule = Rule {
            id: SymbolId(number(f[0], n)?),
            left: SymbolId(number(f[1], n)?),
            right: SymbolId(number(f[2], n)?),
            freq_at_merge: number(f[3], n)?,
        };
        if rule.left >= rule.id || rule.right >= rule.id {
            return Err(Error::Validation(format!(
                "line {n}: rule {} refers to symbol {} that is not older",
                rule.id,
                rule.left.max(rule.right)
            )));
        }
        rules.push(rule);
    }
    Grammar::from_parts(table, rules)
}
