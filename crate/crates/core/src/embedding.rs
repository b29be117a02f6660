//! Immutable embedding spaces: loading, saving, cosine similarity and
//! exhaustive nearest-neighbor search.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

/// On-disk layout of an embedding file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    Text,
    Binary,
}

impl std::str::FromStr for EmbeddingFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(EmbeddingFormat::Text),
            "binary" | "bin" => Ok(EmbeddingFormat::Binary),
            _ => Err(Error::Config(format!("unknown embedding format {s:?}"))),
        }
    }
}

/// Number formatting used when writing the text format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextPrecision {
    /// Round each component to this many significant digits.
    Significant(usize),
    /// Shortest representation that parses back to the identical `f64`.
    Full,
}

impl Default for TextPrecision {
    fn default() -> Self {
        TextPrecision::Significant(6)
    }
}

/// A vocabulary with one dense, finite, nonzero vector per token.
///
/// Rows are addressed by their position in the file they were read from.
/// Unit-normalized copies of every row are kept alongside the raw vectors so
/// similarity scans do not renormalize the vocabulary on every query.
#[derive(Debug, Clone)]
pub struct EmbeddingSpace {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<f64>,
    units: Vec<f64>,
    dim: usize,
}

impl EmbeddingSpace {
    /// Builds a space from tokens and a row-major `tokens.len() x dim` matrix.
    pub fn new(tokens: Vec<String>, vectors: Vec<f64>, dim: usize) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::EmptyEmbeddings);
        }
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, actual: 0 });
        }
        if vectors.len() != tokens.len() * dim {
            return Err(Error::DimensionMismatch { expected: tokens.len() * dim, actual: vectors.len() });
        }

        let mut index = HashMap::with_capacity(tokens.len());
        let mut units = Vec::with_capacity(vectors.len());
        for (row, (token, vector)) in tokens.iter().zip(vectors.chunks_exact(dim)).enumerate() {
            if token.is_empty() || token.chars().any(char::is_whitespace) {
                return Err(Error::InvalidRecord(format!("bad token {token:?}")));
            }
            if index.insert(token.clone(), row).is_some() {
                return Err(Error::DuplicateToken(token.clone()));
            }
            if vector.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFinite(token.clone()));
            }
            let length = norm(vector);
            if length == 0.0 {
                return Err(Error::ZeroNorm(Some(token.clone())));
            }
            units.extend(vector.iter().map(|c| c / length));
        }

        Ok(EmbeddingSpace { tokens, index, vectors, units, dim })
    }

    pub fn from_rows<I, S>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut tokens = Vec::new();
        let mut vectors = Vec::new();
        let mut dim = None;
        for (token, vector) in rows {
            let expected = *dim.get_or_insert(vector.len());
            if vector.len() != expected {
                return Err(Error::DimensionMismatch { expected, actual: vector.len() });
            }
            tokens.push(token.into());
            vectors.extend(vector);
        }
        Self::new(tokens, vectors, dim.unwrap_or(0))
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn token(&self, row: usize) -> &str {
        &self.tokens[row]
    }

    pub fn row(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn vector(&self, row: usize) -> &[f64] {
        &self.vectors[row * self.dim..(row + 1) * self.dim]
    }

    /// Unit-length copy of row `row`.
    pub fn unit(&self, row: usize) -> &[f64] {
        &self.units[row * self.dim..(row + 1) * self.dim]
    }

    pub fn lookup(&self, token: &str) -> Result<&[f64]> {
        self.row(token).map(|row| self.vector(row)).ok_or_else(|| Error::UnknownToken(token.to_owned()))
    }

    /// The `k` tokens most similar to `query`, skipping `exclude`.
    ///
    /// Sorted by descending similarity; equal similarities keep ascending row
    /// order. Returns fewer than `k` items when the vocabulary runs out.
    pub fn nearest_neighbors(&self, query: &[f64], k: usize, exclude: &HashSet<&str>) -> Result<Vec<(String, f64)>> {
        let hits = self.nearest_rows(query, k, |row| !exclude.contains(self.token(row)))?;
        Ok(hits.into_iter().map(|(row, sim)| (self.tokens[row].clone(), sim)).collect())
    }

    /// Row-level nearest-neighbor scan restricted to rows accepted by `keep`.
    pub fn nearest_rows(&self, query: &[f64], k: usize, keep: impl Fn(usize) -> bool) -> Result<Vec<(usize, f64)>> {
        if k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        self.check_dim(query)?;
        let unit_query = unit_vector(query)?;

        let mut scored: Vec<(usize, f64)> =
            (0..self.len()).filter(|&row| keep(row)).map(|row| (row, dot(&unit_query, self.unit(row)))).collect();
        // Stable sort keeps ascending row order among ties.
        scored.sort_by(|a, b| b.1.total_cmp(&a.1));
        scored.truncate(k);
        Ok(scored)
    }

    pub(crate) fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: x.len() });
        }
        Ok(())
    }

    pub fn load<R: BufRead>(reader: R, format: EmbeddingFormat) -> Result<Self> {
        match format {
            EmbeddingFormat::Text => Self::read_text(reader),
            EmbeddingFormat::Binary => Self::read_binary(reader),
        }
    }

    pub fn save<W: Write>(&self, writer: W, format: EmbeddingFormat) -> Result<()> {
        match format {
            EmbeddingFormat::Text => self.write_text(writer, TextPrecision::default()),
            EmbeddingFormat::Binary => self.write_binary(writer),
        }
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let (count, dim) = loop {
            match lines.next() {
                None => return Err(Error::EmptyEmbeddings),
                Some((_, line)) if line.as_ref().is_ok_and(|l| l.trim().is_empty()) => continue,
                Some((i, line)) => break parse_header(&line?, i + 1)?,
            }
        };

        let mut tokens = Vec::with_capacity(count);
        let mut vectors = Vec::with_capacity(count * dim);
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let token = fields.next().unwrap_or_default().to_owned();
            let start = vectors.len();
            for field in fields {
                let value: f64 = field
                    .parse()
                    .map_err(|_| Error::Parse { line: i + 1, message: format!("invalid number {field:?}") })?;
                vectors.push(value);
            }
            let actual = vectors.len() - start;
            if actual != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual });
            }
            tokens.push(token);
        }

        if tokens.len() != count {
            return Err(Error::Parse {
                line: 1,
                message: format!("header declares {count} rows, file has {}", tokens.len()),
            });
        }
        Self::new(tokens, vectors, dim)
    }

    pub fn write_text<W: Write>(&self, mut writer: W, precision: TextPrecision) -> Result<()> {
        writeln!(writer, "{} {}", self.len(), self.dim)?;
        let mut line = String::new();
        for (row, token) in self.tokens.iter().enumerate() {
            line.clear();
            line.push_str(token);
            for &c in self.vector(row) {
                line.push(' ');
                line.push_str(&format_component(c, precision));
            }
            line.push('\n');
            writer.write_all(line.as_bytes())?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Header line as in the text format, then for every record the token,
    /// one space, and `dim` little-endian `f32` components.
    pub fn read_binary<R: BufRead>(mut reader: R) -> Result<Self> {
        let mut header = String::new();
        if reader.read_line(&mut header)? == 0 {
            return Err(Error::EmptyEmbeddings);
        }
        let (count, dim) = parse_header(&header, 1)?;

        let mut tokens = Vec::with_capacity(count);
        let mut vectors = Vec::with_capacity(count * dim);
        let mut buf = vec![0u8; dim * 4];
        for record in 0..count {
            let mut token = Vec::new();
            reader.read_until(b' ', &mut token)?;
            if token.pop() != Some(b' ') {
                return Err(Error::Parse { line: record + 2, message: "truncated binary record".into() });
            }
            // Tolerate a newline separator between records.
            let start = token.iter().position(|b| !b.is_ascii_whitespace()).unwrap_or(token.len());
            let token = String::from_utf8(token[start..].to_vec())
                .map_err(|_| Error::Parse { line: record + 2, message: "token is not UTF-8".into() })?;
            reader.read_exact(&mut buf).map_err(|_| Error::DimensionMismatch { expected: dim, actual: 0 })?;
            vectors.extend(buf.chunks_exact(4).map(|b| f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]]))));
            tokens.push(token);
        }
        Self::new(tokens, vectors, dim)
    }

    pub fn write_binary<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "{} {}", self.len(), self.dim)?;
        for (row, token) in self.tokens.iter().enumerate() {
            writer.write_all(token.as_bytes())?;
            writer.write_all(b" ")?;
            for &c in self.vector(row) {
                writer.write_all(&(c as f32).to_le_bytes())?;
            }
        }
        writer.flush()?;
        Ok(())
    }
}

fn parse_header(line: &str, line_no: usize) -> Result<(usize, usize)> {
    let bad = || Error::Parse { line: line_no, message: format!("bad header {:?}", line.trim()) };
    let mut fields = line.split_whitespace();
    let count: usize = fields.next().and_then(|f| f.parse().ok()).ok_or_else(bad)?;
    let dim: usize = fields.next().and_then(|f| f.parse().ok()).ok_or_else(bad)?;
    if fields.next().is_some() || count == 0 || dim == 0 {
        return Err(bad());
    }
    Ok((count, dim))
}

fn format_component(c: f64, precision: TextPrecision) -> String {
    match precision {
        TextPrecision::Full => format!("{c}"),
        TextPrecision::Significant(digits) => {
            let rounded: f64 = format!("{:.*e}", digits.max(1) - 1, c).parse().expect("formatted float parses");
            format!("{rounded}")
        }
    }
}

fn unit_vector(x: &[f64]) -> Result<Vec<f64>> {
    let length = norm(x);
    if length == 0.0 || !length.is_finite() {
        return Err(Error::ZeroNorm(None));
    }
    Ok(x.iter().map(|c| c / length).collect())
}

/// `x . y / (|x| |y|)`.
pub fn cosine_similarity(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), actual: y.len() });
    }
    let (nx, ny) = (norm(x), norm(y));
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::ZeroNorm(None));
    }
    Ok((dot(x, y) / (nx * ny)).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(rows: &[(&str, &[f64])]) -> EmbeddingSpace {
        EmbeddingSpace::from_rows(rows.iter().map(|(t, v)| (*t, v.to_vec()))).unwrap()
    }

    #[test]
    fn parses_text_file() {
        let s = EmbeddingSpace::read_text("2 3\ncat 1 0 0\ndog 0 1 0\n".as_bytes()).unwrap();
        assert_eq!((s.len(), s.dim()), (2, 3));
        assert_eq!(s.tokens(), ["cat", "dog"]);
        assert_eq!(s.lookup("dog").unwrap(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn rejects_short_row() {
        let err = EmbeddingSpace::read_text("2 3\ncat 1 0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 3, actual: 2 }));
    }

    #[test]
    fn rejects_duplicate_token() {
        let err = EmbeddingSpace::read_text("3 2\ncat 1 0\ndog 0 1\ncat 1 1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::DuplicateToken(t) if t == "cat"));
    }

    #[test]
    fn rejects_empty_nonfinite_and_zero_rows() {
        assert!(matches!(EmbeddingSpace::read_text("".as_bytes()), Err(Error::EmptyEmbeddings)));
        assert!(matches!(EmbeddingSpace::read_text("1 2\ncat NaN 0\n".as_bytes()), Err(Error::NonFinite(_))));
        assert!(matches!(EmbeddingSpace::read_text("1 2\ncat 0 0\n".as_bytes()), Err(Error::ZeroNorm(_))));
        assert!(EmbeddingSpace::read_text("2 2\ncat 1 0\n".as_bytes()).is_err());
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine_similarity(&[1.0, 2.0], &[2.0, 4.0]).unwrap() - 1.0).abs() < 1e-15);
        let diag = cosine_similarity(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((diag - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(matches!(cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::ZeroNorm(_))));
    }

    #[test]
    fn nearest_neighbor_excludes_and_truncates() {
        let s = space(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0]), ("c", &[0.9, 0.1])]);
        let hits = s.nearest_neighbors(&[1.0, 0.0], 1, &HashSet::from(["a"])).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].0, "c");
        // 0.9 / sqrt(0.82)
        assert!((hits[0].1 - 0.993_883_734_673_912_4).abs() < 1e-12);

        let own = s.nearest_neighbors(&[0.0, 1.0], 1, &HashSet::new()).unwrap();
        assert_eq!(own[0].0, "b");
        assert!((own[0].1 - 1.0).abs() < 1e-15);

        let two = space(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])]);
        assert_eq!(two.nearest_neighbors(&[1.0, 1.0], 5, &HashSet::new()).unwrap().len(), 2);
    }

    #[test]
    fn nearest_neighbor_ties_follow_row_order() {
        let s = space(&[("x", &[0.0, 1.0]), ("y", &[1.0, 0.0]), ("z", &[2.0, 0.0])]);
        let hits = s.nearest_neighbors(&[1.0, 0.0], 3, &HashSet::new()).unwrap();
        let order: Vec<_> = hits.iter().map(|(t, _)| t.as_str()).collect();
        assert_eq!(order, ["y", "z", "x"]);
    }

    #[test]
    fn binary_round_trip() {
        let s = space(&[("a", &[1.0, -0.5]), ("b_c", &[0.25, 3.0])]);
        let mut buf = Vec::new();
        s.write_binary(&mut buf).unwrap();
        assert!(buf.starts_with(b"2 2\na "));
        let back = EmbeddingSpace::read_binary(buf.as_slice()).unwrap();
        assert_eq!(back.tokens(), s.tokens());
        assert_eq!(back.vector(1), s.vector(1));
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_component(0.123_456_789, TextPrecision::Significant(6)), "0.123457");
        assert_eq!(format_component(-1234.5678, TextPrecision::Significant(6)), "-1234.57");
        assert_eq!(format_component(0.1, TextPrecision::Full), "0.1");
    }
}
