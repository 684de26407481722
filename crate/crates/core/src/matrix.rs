//! The labelled feature matrix and its tab-separated file format.
//!
//! Header: `drug_code read_code label <attributes...> <attribute>_missing...`.
//! Values are written with six decimals so output is byte-stable.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::association::Pair;
use crate::attributes::{Attribute, ExtractorRegistry};
use crate::context::{Context, Measure, Params};
use crate::error::{Error, Result};
use crate::store::{Database, Label};

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRow {
    pub drug_code: String,
    pub read_code: String,
    pub label: Label,
    /// Aligned with [`FeatureMatrix::columns`].
    pub values: Vec<Measure>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub columns: Vec<Attribute>,
    pub rows: Vec<MatrixRow>,
}

impl FeatureMatrix {
    pub fn column(&self, attr: Attribute) -> Option<Vec<Measure>> {
        let j = self.columns.iter().position(|&c| c == attr)?;
        Some(self.rows.iter().map(|r| r.values[j]).collect())
    }

    pub fn labels(&self) -> Vec<Label> {
        self.rows.iter().map(|r| r.label).collect()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("drug_code\tread_code\tlabel");
        for c in &self.columns {
            write!(out, "\t{c}").unwrap();
        }
        for c in &self.columns {
            write!(out, "\t{c}_missing").unwrap();
        }
        out.push('\n');
        for row in &self.rows {
            write!(out, "{}\t{}\t{}", row.drug_code, row.read_code, row.label).unwrap();
            for m in &row.values {
                write!(out, "\t{}", format_value(m.value)).unwrap();
            }
            for m in &row.values {
                out.push_str(if m.missing { "\t1" } else { "\t0" });
            }
            out.push('\n');
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        const FILE: &str = "feature matrix";
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::row(FILE, 1, "missing header"))?;
        let fields: Vec<&str> = header.split('\t').collect();
        if fields.len() < 3
            || fields[..3] != ["drug_code", "read_code", "label"]
            || !(fields.len() - 3).is_multiple_of(2)
        {
            return Err(Error::row(
                FILE,
                1,
                "header must be drug_code, read_code, label, attributes, missing flags",
            ));
        }
        let k = (fields.len() - 3) / 2;
        let columns = fields[3..3 + k]
            .iter()
            .map(|s| s.parse::<Attribute>())
            .collect::<Result<Vec<_>>>()?;
        for (c, flag) in columns.iter().zip(&fields[3 + k..]) {
            if *flag != format!("{c}_missing") {
                return Err(Error::row(FILE, 1, format!("expected `{c}_missing`, found `{flag}`")));
            }
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            let line_no = i as u64 + 1;
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != fields.len() {
                return Err(Error::row(
                    FILE,
                    line_no,
                    format!("expected {} fields, found {}", fields.len(), f.len()),
                ));
            }
            let label = f[2].parse::<Label>().map_err(|m| Error::row(FILE, line_no, m))?;
            let mut values = Vec::with_capacity(k);
            for j in 0..k {
                let value: f64 = f[3 + j]
                    .parse()
                    .map_err(|_| Error::row(FILE, line_no, format!("bad value `{}`", f[3 + j])))?;
                let missing = match f[3 + k + j] {
                    "0" => false,
                    "1" => true,
                    other => return Err(Error::row(FILE, line_no, format!("bad missing flag `{other}`"))),
                };
                values.push(Measure { value, missing });
            }
            rows.push(MatrixRow {
                drug_code: f[0].to_string(),
                read_code: f[1].to_string(),
                label,
                values,
            });
        }
        Ok(FeatureMatrix { columns, rows })
    }
}

pub fn format_value(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

/// Compute the matrix for every labelled pair, on `workers` threads.
/// Rows are ordered by drug code then read code, independent of scheduling.
pub fn compute_features(
    db: &Database,
    params: Params,
    registry: &ExtractorRegistry,
    workers: usize,
) -> Result<FeatureMatrix> {
    let ctx = Context::new(db, params)?;
    let mut labelled: Vec<_> = db.labels().iter().collect();
    labelled.sort_by(|a, b| {
        (a.drug_code.as_str(), a.read_code.as_str()).cmp(&(b.drug_code.as_str(), b.read_code.as_str()))
    });
    let pairs = labelled
        .iter()
        .map(|l| Pair::resolve(&ctx, &l.drug_code, &l.read_code))
        .collect::<Result<Vec<_>>>()?;
    let columns = registry.columns();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Param(format!("worker pool: {e}")))?;
    let extracted: Vec<_> = pool.install(|| pairs.par_iter().map(|&pair| registry.extract(&ctx, pair)).collect());

    let rows = labelled
        .iter()
        .zip(extracted)
        .map(|(l, row)| MatrixRow {
            drug_code: l.drug_code.clone(),
            read_code: l.read_code.to_string(),
            label: l.label,
            values: columns
                .iter()
                .map(|&c| row.get(c).expect("extractor fills its declared columns"))
                .collect(),
        })
        .collect();
    Ok(FeatureMatrix { columns, rows })
}
