// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};

/// Dense row-major feature matrix with boolean labels (`true` = bursty).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    x: Vec<f64>,
    y: Vec<bool>,
}

impl Dataset {
    pub fn new(dim: usize) -> Self {
        Self { dim, x: Vec::new(), y: Vec::new() }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], labels: &[bool]) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::InvalidInput(format!("{} rows but {} labels", rows.len(), labels.len())));
        }
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        let mut d = Self::new(dim);
        for (r, &l) in rows.iter().zip(labels) {
            d.push(r.as_ref(), l)?;
        }
        Ok(d)
    }

    pub fn push(&mut self, row: &[f64], label: bool) -> Result<()> {
        if row.len() != self.dim {
            return Err(Error::InvalidInput(format!("row has {} features, expected {}", row.len(), self.dim)));
        }
        self.x.extend_from_slice(row);
        self.y.push(label);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> bool {
        self.y[i]
    }

    pub fn labels(&self) -> &[bool] {
        &self.y
    }

    pub fn positives(&self) -> usize {
        self.y.iter().filter(|&&y| y).count()
    }

    pub fn negatives(&self) -> usize {
        self.len() - self.positives()
    }

    pub fn require_both_classes(&self) -> Result<()> {
        if self.positives() == 0 || self.negatives() == 0 {
            return Err(Error::Training(format!(
                "need both classes (positives={}, negatives={})",
                self.positives(),
                self.negatives()
            )));
        }
        Ok(())
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        let mut d = Self::new(self.dim);
        for &i in idx {
            d.x.extend_from_slice(self.row(i));
            d.y.push(self.y[i]);
        }
        d
    }

    /// Copy keeping only `columns`, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Self {
        let mut d = Self::new(columns.len());
        for i in 0..self.len() {
            let r = self.row(i);
            d.x.extend(columns.iter().map(|&c| r[c]));
            d.y.push(self.y[i]);
        }
        d
    }
}
