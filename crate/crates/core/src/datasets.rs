//! Query-document data: a text loader for ranking files in the SVMlight
//! style, a synthetic generator for desk-scale contextual runs, and list
//! length normalization.
//!
//! File grammar (whitespace separated, `#` starts a comment):
//!
//! ```text
//! <grade> qid:<id> <feature>:<value> ... [# comment]
//! ```
//!
//! Feature indices are 1-based in files and 0-based in memory. Lines with
//! the same qid (consecutively) form one query's document list, in file
//! order. Missing features densify to zero; the feature dimension is the
//! largest index seen anywhere in the file.

use std::path::Path;

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::types::{FeatureMatrix, RelevanceVector};

/// One query: its document feature matrix and relevance grades.
#[derive(Debug, Clone)]
pub struct QueryRecord {
    pub qid: String,
    pub features: FeatureMatrix,
    pub relevance: RelevanceVector,
    /// Number of zero-feature grade-0 documents appended by padding.
    pub padded_docs: usize,
}

impl QueryRecord {
    pub fn num_docs(&self) -> usize {
        self.features.rows()
    }
}

/// A list of query records with a shared feature dimension.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub records: Vec<QueryRecord>,
    pub dim: usize,
    pub max_grade: u8,
}

impl Dataset {
    /// Largest document-feature 2-norm in the data; every stored row is
    /// bounded by it.
    pub fn feature_radius(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.features.max_row_norm())
            .fold(0.0, f64::max)
    }
}

/// Loads a ranking file, validating grades against the declared maximum.
pub fn load_svmlight_ranking(path: &Path, max_grade: u8) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    parse_svmlight_ranking(&text, max_grade)
}

/// Parses ranking text; see the module docs for the grammar.
pub fn parse_svmlight_ranking(text: &str, max_grade: u8) -> Result<Dataset> {
    struct RawLine {
        grade: u8,
        qid: String,
        features: Vec<(usize, f64)>,
    }

    let mut raws: Vec<RawLine> = Vec::new();
    let mut dim = 0usize;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let grade_tok = tokens.next().expect("non-empty line has a first token");
        let grade: u8 = grade_tok.parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("expected an integer grade, found '{grade_tok}'"),
        })?;
        if grade > max_grade {
            return Err(Error::Domain(format!(
                "line {line_no}: grade {grade} exceeds declared maximum {max_grade}"
            )));
        }
        let qid_tok = tokens.next().ok_or(Error::Parse {
            line: line_no,
            msg: "missing qid token".to_string(),
        })?;
        let qid = qid_tok
            .strip_prefix("qid:")
            .ok_or(Error::Parse {
                line: line_no,
                msg: format!("expected 'qid:<id>', found '{qid_tok}'"),
            })?
            .to_string();
        let mut features = Vec::new();
        for tok in tokens {
            let (idx_str, val_str) = tok.split_once(':').ok_or(Error::Parse {
                line: line_no,
                msg: format!("expected '<index>:<value>', found '{tok}'"),
            })?;
            let findex: usize = idx_str.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad feature index '{idx_str}'"),
            })?;
            if findex == 0 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "feature indices are 1-based".to_string(),
                });
            }
            let value: f64 = val_str.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad feature value '{val_str}'"),
            })?;
            dim = dim.max(findex);
            features.push((findex - 1, value));
        }
        raws.push(RawLine {
            grade,
            qid,
            features,
        });
    }

    // Consecutive lines with the same qid form one record, in file order.
    let mut records = Vec::new();
    let mut i = 0;
    while i < raws.len() {
        let qid = raws[i].qid.clone();
        let mut grades = Vec::new();
        let mut data = Vec::new();
        while i < raws.len() && raws[i].qid == qid {
            grades.push(raws[i].grade);
            let mut row = vec![0.0; dim];
            for &(j, v) in &raws[i].features {
                row[j] = v;
            }
            data.extend(row);
            i += 1;
        }
        let rows = grades.len();
        records.push(QueryRecord {
            qid,
            features: FeatureMatrix::new(rows, dim, data)?,
            relevance: RelevanceVector::new(grades, max_grade)?,
            padded_docs: 0,
        });
    }

    Ok(Dataset {
        records,
        dim,
        max_grade,
    })
}

/// Serializes a dataset back to the text format (non-zero features only;
/// shortest-roundtrip float formatting, so load-after-write is bit-exact).
pub fn to_svmlight_string(dataset: &Dataset) -> String {
    let mut out = String::new();
    for record in &dataset.records {
        for row in 0..record.num_docs() {
            out.push_str(&format!("{} qid:{}", record.relevance.grade(row), record.qid));
            for (j, &v) in record.features.row(row).iter().enumerate() {
                if v != 0.0 {
                    out.push_str(&format!(" {}:{}", j + 1, v));
                }
            }
            out.push('\n');
        }
    }
    out
}

pub fn write_svmlight_ranking(path: &Path, dataset: &Dataset) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, to_svmlight_string(dataset))?;
    Ok(())
}

/// Generates a linearly rankable dataset: documents are unit-norm gaussian
/// feature rows, scores come from a hidden unit-norm weight vector plus
/// gaussian noise, and grades 0..=4 are assigned by pooled score quintiles
/// (so every grade level is populated). Returns the dataset and the hidden
/// weights.
pub fn synthesize_contextual(
    num_queries: usize,
    docs_per_query: usize,
    dim: usize,
    noise: f64,
    seed: u64,
) -> Result<(Dataset, Vec<f64>)> {
    if num_queries == 0 || docs_per_query == 0 || dim == 0 {
        return Err(Error::Config(
            "query count, list size and dimension must be positive".to_string(),
        ));
    }
    if !noise.is_finite() || noise < 0.0 {
        return Err(Error::Config(format!("noise must be non-negative, got {noise}")));
    }
    let mut rng = Rng::new(seed);

    let mut hidden: Vec<f64> = (0..dim).map(|_| rng.next_gaussian()).collect();
    let norm: f64 = hidden.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in hidden.iter_mut() {
        *v /= norm;
    }

    let mut matrices = Vec::with_capacity(num_queries);
    let mut all_scores = Vec::with_capacity(num_queries * docs_per_query);
    for _ in 0..num_queries {
        let mut data = Vec::with_capacity(docs_per_query * dim);
        for _ in 0..docs_per_query {
            let mut row: Vec<f64> = (0..dim).map(|_| rng.next_gaussian()).collect();
            let norm: f64 = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                for v in row.iter_mut() {
                    *v /= norm;
                }
            }
            data.extend(row);
        }
        let x = FeatureMatrix::new(docs_per_query, dim, data)?;
        let scores: Vec<f64> = x
            .times_vec(&hidden)
            .into_iter()
            .map(|s| s + noise * rng.next_gaussian())
            .collect();
        all_scores.extend(scores.iter().copied());
        matrices.push((x, scores));
    }

    // Quantile thresholds over the pooled scores, skewed the way judged
    // ranking data is: most documents irrelevant, a thin top tier.
    const GRADE_QUANTILES: [f64; 4] = [0.40, 0.65, 0.85, 0.95];
    let mut pooled = all_scores;
    pooled.sort_by(|a, b| a.partial_cmp(b).expect("scores are finite"));
    let thresholds: Vec<f64> = GRADE_QUANTILES
        .iter()
        .map(|q| {
            let pos = ((*q * pooled.len() as f64) as usize).min(pooled.len() - 1);
            pooled[pos.saturating_sub(1)]
        })
        .collect();
    let to_grade = |score: f64| -> u8 { thresholds.iter().filter(|&&t| score > t).count() as u8 };

    let records = matrices
        .into_iter()
        .enumerate()
        .map(|(q, (features, scores))| {
            let grades: Vec<u8> = scores.iter().map(|&s| to_grade(s)).collect();
            Ok(QueryRecord {
                qid: format!("q{q}"),
                features,
                relevance: RelevanceVector::new(grades, 4)?,
                padded_docs: 0,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok((
        Dataset {
            records,
            dim,
            max_grade: 4,
        },
        hidden,
    ))
}

/// Normalizes a record to exactly `m` documents: truncates long lists,
/// pads short ones with zero-feature grade-0 documents (counted in
/// `padded_docs`).
pub fn truncate_or_pad(record: &QueryRecord, m: usize) -> Result<QueryRecord> {
    if m == 0 {
        return Err(Error::Config("list size must be positive".to_string()));
    }
    let dim = record.features.cols();
    let keep = record.num_docs().min(m);
    let mut data = Vec::with_capacity(m * dim);
    let mut grades = Vec::with_capacity(m);
    for row in 0..keep {
        data.extend_from_slice(record.features.row(row));
        grades.push(record.relevance.grade(row));
    }
    let padded = m - keep;
    data.extend(std::iter::repeat_n(0.0, padded * dim));
    grades.extend(std::iter::repeat_n(0, padded));
    Ok(QueryRecord {
        qid: record.qid.clone(),
        features: FeatureMatrix::new(m, dim, data)?,
        relevance: RelevanceVector::new(grades, record.relevance.max_grade())?,
        padded_docs: padded,
    })
}
