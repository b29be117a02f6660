//! Phrase sets: `(word1, word2, phrase)` triples with optional split labels.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingSpace;
use crate::error::{Error, Result};
use crate::rng::rng_from;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhraseRecord {
    pub word1: String,
    pub word2: String,
    pub phrase: String,
}

impl PhraseRecord {
    pub fn new(word1: impl Into<String>, word2: impl Into<String>, phrase: impl Into<String>) -> Result<Self> {
        let record = PhraseRecord { word1: word1.into(), word2: word2.into(), phrase: phrase.into() };
        record.validate()?;
        Ok(record)
    }

    fn validate(&self) -> Result<()> {
        for token in [&self.word1, &self.word2, &self.phrase] {
            if token.is_empty() || token.chars().any(char::is_whitespace) {
                return Err(Error::InvalidRecord(format!("bad token {token:?}")));
            }
        }
        if self.phrase == self.word1 || self.phrase == self.word2 {
            return Err(Error::InvalidRecord(format!("phrase `{}` equals one of its constituents", self.phrase)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitLabel {
    Train,
    Dev,
    Test,
}

impl fmt::Display for SplitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitLabel::Train => "train",
            SplitLabel::Dev => "dev",
            SplitLabel::Test => "test",
        })
    }
}

impl FromStr for SplitLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(SplitLabel::Train),
            "dev" => Ok(SplitLabel::Dev),
            "test" => Ok(SplitLabel::Test),
            other => Err(Error::InvalidRecord(format!("unknown split label {other:?}"))),
        }
    }
}

/// Relative sizes of the train, test and dev portions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitRatio {
    pub train: u32,
    pub test: u32,
    pub dev: u32,
}

impl Default for SplitRatio {
    fn default() -> Self {
        SplitRatio { train: 7, test: 2, dev: 1 }
    }
}

impl FromStr for SplitRatio {
    type Err = Error;

    /// Parses `train:test:dev`, e.g. `7:2:1`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<u32> = s
            .split(':')
            .map(|p| p.trim().parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Config(format!("bad split ratio {s:?}")))?;
        match parts[..] {
            [train, test, dev] if train + test + dev > 0 => Ok(SplitRatio { train, test, dev }),
            _ => Err(Error::Config(format!("bad split ratio {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhraseDataset {
    records: Vec<PhraseRecord>,
    labels: Option<Vec<SplitLabel>>,
}

impl PhraseDataset {
    pub fn new(records: Vec<PhraseRecord>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            r.validate()?;
            if !seen.insert(r) {
                return Err(Error::DuplicateTriple(r.word1.clone(), r.word2.clone(), r.phrase.clone()));
            }
        }
        Ok(PhraseDataset { records, labels: None })
    }

    pub fn with_labels(records: Vec<PhraseRecord>, labels: Vec<SplitLabel>) -> Result<Self> {
        if labels.len() != records.len() {
            return Err(Error::InvalidRecord(format!("{} labels for {} records", labels.len(), records.len())));
        }
        let mut dataset = Self::new(records)?;
        dataset.labels = Some(labels);
        Ok(dataset)
    }

    pub fn records(&self) -> &[PhraseRecord] {
        &self.records
    }

    pub fn labels(&self) -> Option<&[SplitLabel]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records carrying `label`, as an unlabeled dataset.
    pub fn portion(&self, label: SplitLabel) -> PhraseDataset {
        let records = match &self.labels {
            Some(labels) => {
                self.records.iter().zip(labels).filter(|(_, l)| **l == label).map(|(r, _)| r.clone()).collect()
            }
            None => Vec::new(),
        };
        PhraseDataset { records, labels: None }
    }

    /// Keeps the records satisfying `keep`, together with their labels.
    pub fn retain(&self, mut keep: impl FnMut(&PhraseRecord) -> bool) -> PhraseDataset {
        let mask: Vec<bool> = self.records.iter().map(&mut keep).collect();
        let records = self.records.iter().zip(&mask).filter(|(_, k)| **k).map(|(r, _)| r.clone()).collect();
        let labels =
            self.labels.as_ref().map(|labels| labels.iter().zip(&mask).filter(|(_, k)| **k).map(|(l, _)| *l).collect());
        PhraseDataset { records, labels }
    }

    /// Reads a three-column TSV, or the four-column split output.
    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut records = Vec::new();
        let mut labels = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            match fields[..] {
                [w1, w2, p] => records.push(PhraseRecord::new(w1, w2, p)?),
                [w1, w2, p, label] => {
                    records.push(PhraseRecord::new(w1, w2, p)?);
                    labels.push(label.parse()?);
                }
                _ => return Err(Error::ColumnCount { line: i + 1, found: fields.len() }),
            }
        }
        match labels.len() {
            0 => Self::new(records),
            n if n == records.len() => Self::with_labels(records, labels),
            _ => Err(Error::InvalidRecord("split labels present on only some lines".into())),
        }
    }

    /// Writes the TSV form; labeled datasets get a fourth column.
    pub fn write_tsv<W: Write>(&self, mut writer: W) -> Result<()> {
        for (i, r) in self.records.iter().enumerate() {
            write!(writer, "{}\t{}\t{}", r.word1, r.word2, r.phrase)?;
            if let Some(labels) = &self.labels {
                write!(writer, "\t{}", labels[i])?;
            }
            writeln!(writer)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Keeps the records whose three tokens all resolve in `space`.
///
/// Returns the filtered dataset and the number of dropped records.
pub fn filter_by_vocabulary(dataset: &PhraseDataset, space: &EmbeddingSpace) -> (PhraseDataset, usize) {
    let kept = dataset.retain(|r| space.contains(&r.word1) && space.contains(&r.word2) && space.contains(&r.phrase));
    let dropped = dataset.len() - kept.len();
    (kept, dropped)
}

/// Minimum dataset size accepted by [`split_dataset`].
pub const MIN_SPLIT_SIZE: usize = 10;

/// Labels every record train, test or dev.
///
/// The record indices are shuffled with a Fisher-Yates pass driven by a
/// ChaCha8 generator seeded from `seed`. The first `floor(N * train / sum)`
/// shuffled positions become train, the next `floor(N * test / sum)` test, and
/// the remainder dev. Records keep their original order in the result.
pub fn split_dataset(dataset: &PhraseDataset, ratio: SplitRatio, seed: u64) -> Result<PhraseDataset> {
    let n = dataset.len();
    if n < MIN_SPLIT_SIZE {
        return Err(Error::DatasetTooSmall { required: MIN_SPLIT_SIZE, actual: n });
    }
    let total = u64::from(ratio.train + ratio.test + ratio.dev);
    let n_train = (n as u64 * u64::from(ratio.train) / total) as usize;
    let n_test = (n as u64 * u64::from(ratio.test) / total) as usize;

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from(seed));

    let mut labels = vec![SplitLabel::Dev; n];
    for (position, &record) in order.iter().enumerate() {
        labels[record] = if position < n_train {
            SplitLabel::Train
        } else if position < n_train + n_test {
            SplitLabel::Test
        } else {
            SplitLabel::Dev
        };
    }
    Ok(PhraseDataset { records: dataset.records.clone(), labels: Some(labels) })
}
