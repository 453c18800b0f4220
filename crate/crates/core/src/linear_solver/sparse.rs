use std::fmt::Write as _;

use rayon::prelude::*;

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(col, value)` lists; duplicate columns are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *vals.last_mut().expect("entry") += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        });
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    /// New matrix with row `i` multiplied by `scale[i]`.
    pub fn scale_rows(&self, scale: &[f64]) -> CsrMatrix {
        let mut out = self.clone();
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.vals[k] *= scale[i];
            }
        }
        out
    }

    /// Largest `|a_ij − a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    /// Coordinate text dump: one `row col value` line per stored entry.
    pub fn to_coo_text(&self) -> String {
        let mut s = String::with_capacity(self.nnz() * 40);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                let _ = writeln!(s, "{i} {j} {v:.16e}");
            }
        }
        s
    }
}

const CHUNK: usize = 4096;

/// Dot product with a fixed reduction order, so results do not depend on the
/// thread schedule.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| u * v).sum::<f64>())
        .collect();
    partial.iter().sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed_and_coo_lists_entries() {
        let m = CsrMatrix::from_rows(vec![
            vec![(1, 2.0), (0, 1.0), (1, 3.0)],
            vec![(1, 4.0)],
        ]);
        assert_eq!(m.get(0, 1), 5.0);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.matvec(&[1.0, 1.0]), vec![6.0, 4.0]);
        let coo = m.to_coo_text();
        assert_eq!(coo.lines().count(), 3);
        assert!(coo.starts_with("0 0 1.0000000000000000e0\n"));
    }
}
