//! Symmetric dissimilarity matrices and their CSV form.
//!
//! CSV layout: a header `id,label,<id1>,<id2>,...` followed by one row per
//! point carrying the full symmetric matrix. Numbers are written with 17
//! significant digits so values survive a round trip exactly.

use std::io::{Read, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    ids: Vec<String>,
    labels: Option<Vec<String>>,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// Validates symmetry, a zero diagonal, finiteness and nonnegativity.
    pub fn new(ids: Vec<String>, labels: Option<Vec<String>>, values: Vec<f64>) -> Result<Self> {
        let n = ids.len();
        if values.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "matrix has {} entries, expected {}",
                values.len(),
                n * n
            )));
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::InvalidArgument("label count differs from point count".into()));
            }
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::InvalidArgument(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "entry ({i},{j}) = {v} is not a finite nonnegative number"
                    )));
                }
                if v != values[j * n + i] {
                    return Err(Error::InvalidArgument(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(DistanceMatrix { ids, labels, values })
    }

    /// Builds a matrix from a symmetric function of index pairs; only the
    /// upper triangle is evaluated.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = f(i, j);
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        DistanceMatrix::new((0..n).map(|i| i.to_string()).collect(), None, values)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn with_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.len() {
            return Err(Error::InvalidArgument("id count differs from point count".into()));
        }
        self.ids = ids;
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Option<Vec<String>>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != self.len() {
                return Err(Error::InvalidArgument("label count differs from point count".into()));
            }
        }
        self.labels = labels;
        Ok(self)
    }

    /// The matrix restricted to `idx`, in that order.
    pub fn submatrix(&self, idx: &[usize]) -> DistanceMatrix {
        let m = idx.len();
        let mut values = Vec::with_capacity(m * m);
        for &i in idx {
            for &j in idx {
                values.push(self.get(i, j));
            }
        }
        DistanceMatrix {
            ids: idx.iter().map(|&i| self.ids[i].clone()).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| idx.iter().map(|&i| l[i].clone()).collect()),
            values,
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["id".to_string(), "label".to_string()];
        header.extend(self.ids.iter().cloned());
        wr.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec = vec![
                self.ids[i].clone(),
                self.labels
                    .as_ref()
                    .map(|l| l[i].clone())
                    .unwrap_or_default(),
            ];
            rec.extend(self.row(i).iter().map(|v| format_number(*v)));
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let header = rd.headers()?.clone();
        if header.len() < 2 || &header[0] != "id" || &header[1] != "label" {
            return Err(Error::Parse("distance CSV must start with id,label".into()));
        }
        let col_ids: Vec<String> = header.iter().skip(2).map(str::to_owned).collect();
        let n = col_ids.len();
        let mut ids = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n * n);
        for rec in rd.records() {
            let rec = rec?;
            if rec.len() != n + 2 {
                return Err(Error::Parse(format!(
                    "row {} has {} fields, expected {}",
                    ids.len() + 1,
                    rec.len(),
                    n + 2
                )));
            }
            ids.push(rec[0].to_string());
            labels.push(rec[1].to_string());
            for field in rec.iter().skip(2) {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("not a number: {field:?}")))?;
                values.push(v);
            }
        }
        if ids != col_ids {
            return Err(Error::Parse("row ids do not match header ids".into()));
        }
        let labels = if labels.iter().all(String::is_empty) {
            None
        } else {
            Some(labels)
        };
        DistanceMatrix::new(ids, labels, values)
    }
}

/// 17 significant digits in scientific notation.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}
