//! Labeled embedding vectors partitioned into two groups; the substrate of
//! every statistic in the crate.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::synthgen::Group;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRow {
    pub id: String,
    pub group: Group,
    pub subgroup: String,
    pub vector: Vec<f64>,
}

/// Fixed-dimension embedding table with unique sample ids.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingSet {
    dim: usize,
    rows: Vec<EmbeddingRow>,
    by_id: HashMap<String, usize>,
}

impl EmbeddingSet {
    pub fn new(dim: usize) -> Self {
        EmbeddingSet {
            dim,
            rows: Vec::new(),
            by_id: HashMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[EmbeddingRow] {
        &self.rows
    }

    /// Append a row, enforcing dimension, finiteness, and id uniqueness.
    pub fn push(&mut self, row: EmbeddingRow) -> Result<()> {
        if row.vector.len() != self.dim {
            return Err(Error::Shape(format!(
                "embedding for {} has length {}, expected {}",
                row.id,
                row.vector.len(),
                self.dim
            )));
        }
        if row.vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite embedding for {}", row.id)));
        }
        if self.by_id.contains_key(&row.id) {
            return Err(Error::Config(format!("duplicate sample id {:?}", row.id)));
        }
        self.by_id.insert(row.id.clone(), self.rows.len());
        self.rows.push(row);
        Ok(())
    }

    /// Row index for a sample id.
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    /// Row indices belonging to a group, in row order.
    pub fn group_indices(&self, group: Group) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.group == group)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn group_size(&self, group: Group) -> usize {
        self.rows.iter().filter(|r| r.group == group).count()
    }

    /// New set containing the rows at `keep` (in the given order).
    pub fn subset(&self, keep: &[usize]) -> Result<EmbeddingSet> {
        let mut out = EmbeddingSet::new(self.dim);
        for &i in keep {
            let row = self
                .rows
                .get(i)
                .ok_or_else(|| Error::Config(format!("row index {i} out of range")))?;
            out.push(row.clone())?;
        }
        Ok(out)
    }

    /// New set with the row of `id` removed.
    pub fn without(&self, id: &str) -> Result<EmbeddingSet> {
        let drop = self
            .index_of(id)
            .ok_or_else(|| Error::NotFound(id.to_string()))?;
        let keep: Vec<usize> = (0..self.rows.len()).filter(|&i| i != drop).collect();
        self.subset(&keep)
    }

    /// Write as CSV with header `id,group,subgroup,e0,...,e{H-1}`.
    ///
    /// Floats are serialized with 17 significant digits, so reading the file
    /// back reproduces every double bit-for-bit.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        let mut header = vec!["id".to_string(), "group".to_string(), "subgroup".to_string()];
        header.extend((0..self.dim).map(|i| format!("e{i}")));
        w.write_record(&header).map_err(|e| Error::Format(e.to_string()))?;
        for row in &self.rows {
            let mut record = vec![row.id.clone(), row.group.to_string(), row.subgroup.clone()];
            record.extend(row.vector.iter().map(|v| fmt17(*v)));
            w.write_record(&record).map_err(|e| Error::Format(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn read_csv(path: &Path) -> Result<EmbeddingSet> {
        let mut r = csv::Reader::from_path(path)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        let header = r
            .headers()
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?
            .clone();
        if header.len() < 3 || &header[0] != "id" || &header[1] != "group" || &header[2] != "subgroup"
        {
            return Err(Error::Format(format!(
                "{}: expected header id,group,subgroup,e0,...",
                path.display()
            )));
        }
        let dim = header.len() - 3;
        let mut set = EmbeddingSet::new(dim);
        for record in r.records() {
            let record = record.map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
            if record.len() != dim + 3 {
                return Err(Error::Format(format!(
                    "{}: row for {:?} has {} fields, expected {}",
                    path.display(),
                    &record[0],
                    record.len(),
                    dim + 3
                )));
            }
            let vector = record
                .iter()
                .skip(3)
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::Format(format!("bad float {s:?} in {}", path.display())))
                })
                .collect::<Result<Vec<f64>>>()?;
            set.push(EmbeddingRow {
                id: record[0].to_string(),
                group: record[1].parse()?,
                subgroup: record[2].to_string(),
                vector,
            })?;
        }
        Ok(set)
    }
}

/// Format a double with 17 significant digits (round-trip exact).
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}
