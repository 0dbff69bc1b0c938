//! Plain-text model files.
//!
//! ```text
//! <term count> <dimension>
//! <term> <v1> <v2> ... <vN>
//! ```
//!
//! Values are written in the shortest decimal form that reads back to the
//! same `f32` (at most 9 significant digits), so save/load round-trips
//! exactly.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::EmbeddingModel;
use crate::error::{Error, Result};

pub fn write_model<W: Write>(model: &EmbeddingModel, mut out: W) -> Result<()> {
    writeln!(out, "{} {}", model.len(), model.dim())?;
    let mut line = String::new();
    for (i, term) in model.terms().iter().enumerate() {
        line.clear();
        line.push_str(term);
        for v in model.raw_row(i) {
            write!(line, " {v}").expect("writing to a String cannot fail");
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_model(model: &EmbeddingModel, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(Error::at_path(path))?;
    write_model(model, BufWriter::new(f))
}

pub fn read_model<R: Read>(input: R) -> Result<EmbeddingModel> {
    let malformed = |line: usize, reason: String| Error::MalformedModelFile { line, reason };
    let mut lines = BufReader::new(input).lines();

    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| malformed(1, "missing header".into()))?;
    let mut fields = header.split_whitespace().map(str::parse::<usize>);
    let (count, dim) = match (fields.next(), fields.next(), fields.next()) {
        (Some(Ok(c)), Some(Ok(d)), None) if d > 0 => (c, d),
        _ => return Err(malformed(1, format!("expected \"<count> <dim>\", got {header:?}"))),
    };

    let mut terms = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count * dim);
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if terms.len() == count {
            return Err(malformed(lineno, format!("more than {count} vectors")));
        }
        let mut parts = line.split_whitespace();
        let term = parts.next().unwrap_or_default().to_string();
        let start = vectors.len();
        for p in parts {
            let v: f32 = p
                .parse()
                .map_err(|_| malformed(lineno, format!("bad value {p:?}")))?;
            vectors.push(v);
        }
        if vectors.len() - start != dim {
            return Err(malformed(
                lineno,
                format!("expected {dim} values, got {}", vectors.len() - start),
            ));
        }
        terms.push(term);
    }
    if terms.len() != count {
        return Err(malformed(
            count + 1,
            format!("header promises {count} vectors, found {}", terms.len()),
        ));
    }
    EmbeddingModel::from_vectors(terms, dim, vectors)
}

pub fn load_model(path: &Path) -> Result<EmbeddingModel> {
    let f = File::open(path).map_err(Error::at_path(path))?;
    read_model(f)
}
