use std::collections::HashSet;
use std::io::{BufRead, Write};

use super::model::EmbeddingModel;
use crate::corpus::EntityToken;
use crate::error::{Error, Result};
use crate::vectorspace::RepresentationStore;

/// Writes the input vectors in word2vec text form: a `V R` header, then
/// `token v1 .. vR` per line with 13 significant digits.
pub fn save_embeddings<W: Write>(model: &EmbeddingModel, mut sink: W) -> Result<()> {
    let vectors = &model.input_vectors;
    writeln!(sink, "{} {}", vectors.rows(), vectors.cols())?;
    for (i, token) in model.vocabulary.tokens().iter().enumerate() {
        write!(sink, "{token}")?;
        for x in vectors.row(i) {
            write!(sink, " {x:.12e}")?;
        }
        writeln!(sink)?;
    }
    sink.flush()?;
    Ok(())
}

/// Reads the format written by [`save_embeddings`]. A single-token file is
/// accepted; the resulting store reports [`RepresentationStore::query_only`].
pub fn load_embeddings<R: BufRead>(source: R) -> Result<RepresentationStore> {
    let mut lines = source.lines().enumerate();
    let (count, dim) = loop {
        let Some((i, line)) = lines.next() else {
            return Err(Error::parse(1, "missing `V R` header"));
        };
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parsed = match fields.as_slice() {
            [v, r] => v.parse::<usize>().ok().zip(r.parse::<usize>().ok()),
            _ => None,
        };
        break parsed.ok_or_else(|| Error::parse(i as u64 + 1, "expected `V R` header"))?;
    };
    if dim == 0 {
        return Err(Error::Shape("dimension must be positive".into()));
    }
    let mut rows = Vec::with_capacity(count);
    let mut seen = HashSet::with_capacity(count);
    for (i, line) in lines {
        let line_no = i as u64 + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let token: EntityToken = fields
            .next()
            .expect("non-blank line has a field")
            .parse()
            .map_err(|e: Error| Error::parse(line_no, e.to_string()))?;
        let values = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::parse(line_no, format!("invalid number {f:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != dim {
            return Err(Error::Shape(format!(
                "line {line_no}: {} has {} components, header says {dim}",
                token,
                values.len()
            )));
        }
        if !seen.insert(token.clone()) {
            return Err(Error::DuplicateToken(token.to_string()));
        }
        rows.push((token, values));
    }
    if rows.len() != count {
        return Err(Error::Shape(format!(
            "header declares {count} rows, file has {}",
            rows.len()
        )));
    }
    RepresentationStore::from_rows(dim, rows)
}
