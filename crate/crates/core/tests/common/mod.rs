//! Reference implementations shared by the integration tests. Nothing here
//! touches nalgebra or the library's kernel, so agreement is meaningful.

#![allow(dead_code)]

use markov_stability::simgraph::SimilarityGraph;
use markov_stability::stability::Partition;

/// Row-major square matrix.
#[derive(Clone, Debug)]
pub struct Dense {
    pub n: usize,
    pub a: Vec<f64>,
}

impl Dense {
    pub fn identity(n: usize) -> Self {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 1.0;
        }
        Self { n, a }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn mul(&self, o: &Dense) -> Dense {
        let n = self.n;
        let mut c = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let x = self.a[i * n + k];
                if x != 0.0 {
                    for j in 0..n {
                        c[i * n + j] += x * o.a[k * n + j];
                    }
                }
            }
        }
        Dense { n, a: c }
    }

    pub fn max_abs_diff(&self, o: &Dense) -> f64 {
        self.a.iter().zip(&o.a).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }
}

pub fn degrees(g: &SimilarityGraph) -> Vec<f64> {
    (0..g.n_nodes()).map(|i| g.neighbors(i).iter().map(|&(_, w)| w).sum()).collect()
}

pub fn stationary(g: &SimilarityGraph) -> Vec<f64> {
    let k = degrees(g);
    let vol: f64 = k.iter().sum();
    k.iter().map(|d| d / vol).collect()
}

/// `-t L` with `L = I - D^-1 A`.
fn generator(g: &SimilarityGraph, t: f64) -> Dense {
    let n = g.n_nodes();
    let k = degrees(g);
    let mut m = Dense::identity(n);
    for x in m.a.iter_mut() {
        *x *= -t;
    }
    for (i, ki) in k.iter().enumerate() {
        for &(j, w) in g.neighbors(i) {
            m.a[i * n + j] += t * w / ki;
        }
    }
    m
}

/// `exp(-t L)` by scaling to norm below 1/2, a 30-term Taylor series and
/// repeated squaring.
pub fn taylor_transition(g: &SimilarityGraph, t: f64) -> Dense {
    let mut m = generator(g, t);
    let n = m.n;
    let norm = (0..n).map(|i| (0..n).map(|j| m.at(i, j).abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm / scale > 0.5 {
        scale *= 2.0;
        squarings += 1;
    }
    for x in m.a.iter_mut() {
        *x /= scale;
    }
    let mut sum = Dense::identity(n);
    let mut term = Dense::identity(n);
    for k in 1..=30 {
        term = term.mul(&m);
        for x in term.a.iter_mut() {
            *x /= k as f64;
        }
        for (s, x) in sum.a.iter_mut().zip(&term.a) {
            *s += x;
        }
    }
    for _ in 0..squarings {
        sum = sum.mul(&sum);
    }
    sum
}

/// `sum_c sum_{i,j in c} (pi_i P_ij - pi_i pi_j)` from the Taylor kernel.
pub fn oracle_stability(g: &SimilarityGraph, pi: &[f64], p_t: &Dense, part: &[usize]) -> f64 {
    let n = g.n_nodes();
    let mut r = 0.0;
    for i in 0..n {
        for j in 0..n {
            if part[i] == part[j] {
                r += pi[i] * p_t.at(i, j) - pi[i] * pi[j];
            }
        }
    }
    r
}

/// All set partitions of `0..n` as restricted growth strings.
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for c in 0..=max + 1 {
            prefix.push(c);
            grow(prefix, max.max(c), n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        let mut prefix = vec![0];
        grow(&mut prefix, 0, n, &mut out);
    }
    out
}

/// Entropy and VI straight from the definitions, with natural logs.
pub fn brute_vi(a: &Partition, b: &Partition) -> f64 {
    let n = a.len() as f64;
    let (ca, cb) = (a.n_communities(), b.n_communities());
    let mut joint = vec![0.0; ca * cb];
    for (&x, &y) in a.assignment().iter().zip(b.assignment()) {
        joint[x * cb + y] += 1.0;
    }
    let mut vi = 0.0;
    for x in 0..ca {
        let px: f64 = (0..cb).map(|y| joint[x * cb + y]).sum::<f64>() / n;
        for y in 0..cb {
            let py: f64 = (0..ca).map(|z| joint[z * cb + y]).sum::<f64>() / n;
            let pxy = joint[x * cb + y] / n;
            if pxy > 0.0 {
                vi -= pxy * ((pxy / px).ln() + (pxy / py).ln());
            }
        }
    }
    vi
}
