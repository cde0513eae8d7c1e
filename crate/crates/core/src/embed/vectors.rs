//! Token vectors and their text format.
//!
//! ```text
//! <vocab-size> <dim>
//! <escaped-token> <x1> ... <xdim>
//! ```
//!
//! Values are written in the shortest form that parses back to the same
//! `f64`, so a round trip is exact.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grammar::segmented::{escape_into, unescape};

/// Row-major token vectors with a token index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vectors {
    dim: usize,
    tokens: Vec<String>,
    data: Vec<f64>,
    index: HashMap<String, usize>,
}

impl Vectors {
    pub fn new(dim: usize) -> Self {
        Vectors {
            dim,
            ..Default::default()
        }
    }

    /// Appends a row; duplicate tokens and wrong lengths are errors.
    pub fn push(&mut self, token: impl Into<String>, values: &[f64]) -> Result<()> {
        let token = token.into();
        if values.len() != self.dim {
            return Err(Error::Validation(format!(
                "vector for {token:?} has {} values, expected {}",
                values.len(),
                self.dim
            )));
        }
        if self.index.contains_key(&token) {
            return Err(Error::Validation(format!("duplicate token {token:?}")));
        }
        self.index.insert(token.clone(), self.tokens.len());
        self.tokens.push(token);
        self.data.extend_from_slice(values);
        Ok(())
    }

    pub fn from_rows<S: Into<String>>(
        dim: usize,
        rows: impl IntoIterator<Item = (S, Vec<f64>)>,
    ) -> Result<Self> {
        let mut v = Vectors::new(dim);
        for (t, row) in rows {
            v.push(t, &row)?;
        }
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn token(&self, i: usize) -> &str {
        &self.tokens[i]
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.index_of(token).map(|i| self.row(i))
    }

    /// Copy with every row scaled to unit length; zero rows stay zero.
    pub fn normalized(&self) -> Vectors {
        let mut out = self.clone();
        for row in out.data.chunks_mut(self.dim.max(1)) {
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|x| *x /= norm);
            }
        }
        out
    }

    /// Copy with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Vectors {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|x| *x *= factor);
        out
    }
}

pub fn write_vectors<W: Write>(v: &Vectors, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{} {}", v.len(), v.dim)?;
    let mut line = String::new();
    for i in 0..v.len() {
        line.clear();
        escape_into(v.token(i), &mut line);
        for x in v.row(i) {
            use std::fmt::Write as _;
            write!(line, " {x:e}").expect("writing to a String");
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()
}

pub fn read_vectors<R: BufRead>(reader: R) -> Result<Vectors> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| Error::io("<vectors>", e))?,
        None => return Err(Error::parse(1, "missing header")),
    };
    let dims: Vec<&str> = header.split(' ').collect();
    let parse_usize = |s: &str| -> Result<usize> {
        s.parse()
            .map_err(|_| Error::parse(1, format!("invalid header {header:?}")))
    };
    if dims.len() != 2 {
        return Err(Error::parse(1, format!("invalid header {header:?}")));
    }
    let (count, dim) = (parse_usize(dims[0])?, parse_usize(dims[1])?);
    let mut v = Vectors::new(dim);
    let mut values = Vec::with_capacity(dim);
    for (i, line) in lines.enumerate() {
        let n = i + 2;
        let line = line.map_err(|e| Error::io("<vectors>", e))?;
        let mut fields = line.split(' ');
        let token = unescape(fields.next().unwrap_or(""), n)?;
        values.clear();
        for f in fields {
            values.push(
                f.parse::<f64>()
                    .map_err(|_| Error::parse(n, format!("invalid number {f:?}")))?,
            );
        }
        if values.len() != dim {
            return Err(Error::parse(
                n,
                format!("expected {dim} values, found {}", values.len()),
            ));
        }
        if v.index_of(&token).is_some() {
            return Err(Error::parse(n, format!("duplicate token {token:?}")));
        }
        v.push(token, &values)?;
    }
    if v.len() != count {
        return Err(Error::Validation(format!(
            "header announces {count} vectors, found {}",
            v.len()
        )));
    }
    Ok(v)
}

pub fn export_vectors(v: &Vectors, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_vectors(v, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn import_vectors(path: &Path) -> Result<Vectors> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_vectors(BufReader::new(file))
}
