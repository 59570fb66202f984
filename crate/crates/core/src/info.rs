//! Contingency tables and entropies between two partitions, natural logs.

use crate::error::{Error, Result};
use crate::stability::Partition;

/// Nonzero cells of the contingency table of two partitions, sorted by
/// `(row, col)`, with the marginal cluster sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contingency {
    pub n: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub cells: Vec<(usize, usize, usize)>,
}

pub fn contingency(a: &Partition, b: &Partition) -> Result<Contingency> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let cb = b.n_communities();
    let mut keys: Vec<usize> = a
        .assignment()
        .iter()
        .zip(b.assignment())
        .map(|(&x, &y)| x * cb + y)
        .collect();
    keys.sort_unstable();

    let mut cells = Vec::new();
    let mut k = 0;
    while k < keys.len() {
        let key = keys[k];
        let run = keys[k..].iter().take_while(|&&x| x == key).count();
        cells.push((key / cb, key % cb, run));
        k += run;
    }
    Ok(Contingency {
        n: a.len(),
        rows: a.sizes(),
        cols: b.sizes(),
        cells,
    })
}

/// `H = sum_c (n_c / N) ln(N / n_c)`.
pub fn entropy_of_sizes(sizes: &[usize], n: usize) -> f64 {
    let nf = n as f64;
    sizes
        .iter()
        .filter(|&&s| s > 0)
        .map(|&s| (s as f64 / nf) * (nf / s as f64).ln())
        .sum()
}

pub fn entropy(p: &Partition) -> f64 {
    entropy_of_sizes(&p.sizes(), p.len())
}

impl Contingency {
    /// `I = sum p(x,y) ln(p(x,y) / (p(x) p(y)))`.
    pub fn mutual_information(&self) -> f64 {
        let n = self.n as f64;
        self.cells
            .iter()
            .map(|&(x, y, c)| {
                let ratio = (c as f64 * n) / (self.rows[x] as f64 * self.cols[y] as f64);
                (c as f64 / n) * ratio.ln()
            })
            .sum()
    }

    /// `VI = H(X|Y) + H(Y|X)`, summed cell by cell so every term is
    /// nonnegative and identical partitions give exactly zero.
    pub fn variation_of_information(&self) -> f64 {
        let n = self.n as f64;
        self.cells
            .iter()
            .map(|&(x, y, c)| {
                let c = c as f64;
                (c / n) * ((self.rows[x] as f64 / c).ln() + (self.cols[y] as f64 / c).ln())
            })
            .sum()
    }
}

/// Variation of information `H(X) + H(Y) - 2 I(X, Y)` in nats.
pub fn variation_of_information(a: &Partition, b: &Partition) -> Result<f64> {
    if a.len() == b.len() && a == b {
        return Ok(0.0);
    }
    Ok(contingency(a, b)?.variation_of_information().max(0.0))
}
