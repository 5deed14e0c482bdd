//! Compressed sparse row operators.

use std::io::Write;
use std::path::Path;

use crate::error::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    pub rows: usize,
    pub cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseOperator {
    /// Zero-valued operator on a pattern given as sorted, deduplicated
    /// column lists per row.
    pub fn from_pattern(cols: usize, pattern: &[Vec<usize>]) -> Self {
        let mut row_ptr = Vec::with_capacity(pattern.len() + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for r in pattern {
            debug_assert!(r.windows(2).all(|w| w[0] < w[1]));
            col_idx.extend_from_slice(r);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        SparseOperator { rows: pattern.len(), cols, row_ptr, col_idx, values: vec![0.0; nnz] }
    }

    /// Sums duplicate entries; output ordering is deterministic.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut per_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows];
        for &(r, c, v) in triplets {
            per_row[r].push((c, v));
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for mut entries in per_row {
            entries.sort_by_key(|e| e.0);
            for (c, v) in entries {
                if col_idx.len() > *row_ptr.last().unwrap() && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseOperator { rows, cols, row_ptr, col_idx, values }
    }

    /// Same pattern, all values zero.
    pub fn zeros_like(&self) -> Self {
        SparseOperator { values: vec![0.0; self.values.len()], ..self.clone() }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn same_pattern(&self, other: &SparseOperator) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.row_ptr == other.row_ptr && self.col_idx == other.col_idx
    }

    /// Position of `(r, c)` in `values`, if stored.
    pub fn position(&self, r: usize, c: usize) -> Option<usize> {
        let (s, e) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.col_idx[s..e].binary_search(&c).ok().map(|k| s + k)
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.position(r, c).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` at `(r, c)`; the entry must be in the pattern.
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        let k = self.position(r, c).unwrap_or_else(|| panic!("({r},{c}) not in sparsity pattern"));
        self.values[k] += v;
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (s, e) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.col_idx[s..e].iter().copied().zip(self.values[s..e].iter().copied())
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    /// `Aᵀ x`.
    pub fn matvec_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for (r, &xr) in x.iter().enumerate() {
            for (c, v) in self.row(r) {
                y[c] += v * xr;
            }
        }
        y
    }

    /// `yᵀ A x`.
    pub fn bilinear(&self, y: &[f64], x: &[f64]) -> f64 {
        (0..self.rows).map(|r| y[r] * self.row(r).map(|(c, v)| v * x[c]).sum::<f64>()).sum()
    }

    /// `Σ cᵢ Aᵢ` over operators sharing one pattern.
    pub fn linear_combination(terms: &[(f64, &SparseOperator)]) -> SparseOperator {
        let first = terms.first().expect("at least one term").1;
        let mut out = first.zeros_like();
        for (c, op) in terms {
            assert!(op.same_pattern(first), "linear_combination needs a shared pattern");
            for (o, v) in out.values.iter_mut().zip(&op.values) {
                *o += c * v;
            }
        }
        out
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Coordinate-format CSV `row,col,value`.
    pub fn write_coo_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "row,col,value")?;
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                writeln!(w, "{r},{c},{v:.16e}")?;
            }
        }
        w.flush()?;
        Ok(())
    }
}
