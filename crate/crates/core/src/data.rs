//! Labelled samples with `y ∈ {−1, +1}`.

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    dim: usize,
    /// Row-major inputs, `len × dim`.
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Dataset {
    pub fn new(dim: usize, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return input("dataset dimension must be positive");
        }
        if x.len() != dim * y.len() {
            return input(format!(
                "{} input values do not form {} rows of width {dim}",
                x.len(),
                y.len()
            ));
        }
        if y.iter().any(|&v| v != 1.0 && v != -1.0) {
            return input("labels must be ±1");
        }
        Ok(Self { dim, x, y })
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            x: Vec::new(),
            y: Vec::new(),
        }
    }

    pub fn push(&mut self, x: &[f64], y: f64) {
        debug_assert_eq!(x.len(), self.dim);
        self.x.extend_from_slice(x);
        self.y.push(y);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn y(&self, i: usize) -> f64 {
        self.y[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.y
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.x.chunks_exact(self.dim).zip(self.y.iter().copied())
    }

    /// First `⌊fraction·len⌋` rows and the remainder.
    pub fn split(&self, fraction: f64) -> Result<(Dataset, Dataset)> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return input(format!("split fraction must lie in (0, 1), got {fraction}"));
        }
        let k = (fraction * self.len() as f64).floor() as usize;
        if k == 0 || k == self.len() {
            return input("split leaves an empty part");
        }
        let at = k * self.dim;
        Ok((
            Dataset {
                dim: self.dim,
                x: self.x[..at].to_vec(),
                y: self.y[..k].to_vec(),
            },
            Dataset {
                dim: self.dim,
                x: self.x[at..].to_vec(),
                y: self.y[k..].to_vec(),
            },
        ))
    }

    /// Concatenation of two datasets of equal dimension.
    pub fn join(&self, other: &Dataset) -> Result<Dataset> {
        if self.dim != other.dim {
            return input("cannot join datasets of different dimension");
        }
        let mut out = self.clone();
        out.x.extend_from_slice(&other.x);
        out.y.extend_from_slice(&other.y);
        Ok(out)
    }
}
