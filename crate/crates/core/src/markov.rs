//! Continuous-time random walk on a similarity graph.
//!
//! The generator is the random-walk Laplacian `L = I - D^{-1} A`. It is
//! similar to the symmetric normalized Laplacian
//! `L_sym = I - D^{-1/2} A D^{-1/2} = V diag(lambda) V^T`, so
//!
//! ```text
//! P(t) = exp(-t L) = D^{-1/2} V diag(exp(-t lambda)) V^T D^{1/2}
//! ```
//!
//! One symmetric eigendecomposition therefore serves every Markov time.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::simgraph::SimilarityGraph;

/// Spectral gaps below this are treated as a disconnected graph.
pub const DISCONNECTION_TOLERANCE: f64 = 1e-9;

/// Exponentials `exp(-t lambda)` below this are flushed to zero.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone)]
pub struct MarkovKernel {
    degrees: Vec<f64>,
    sqrt_degrees: Vec<f64>,
    volume: f64,
    pi: Vec<f64>,
    eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors of `L_sym`, one per column, ascending order.
    modes: DMatrix<f64>,
}

impl MarkovKernel {
    pub fn build(graph: &SimilarityGraph) -> Result<Self> {
        let n = graph.n_nodes();
        let degrees: Vec<f64> = (0..n).map(|i| graph.degree(i)).collect();
        if let Some(i) = degrees.iter().position(|&k| k <= 0.0) {
            return Err(Error::IsolatedNode(i));
        }
        let components = graph.components();
        if components.len() > 1 {
            return Err(Error::Disconnected { components });
        }

        let sqrt_degrees: Vec<f64> = degrees.iter().map(|k| k.sqrt()).collect();
        let volume: f64 = degrees.iter().sum();
        let pi: Vec<f64> = degrees.iter().map(|k| k / volume).collect();

        let mut lsym = DMatrix::<f64>::identity(n, n);
        for e in graph.edges() {
            let v = -e.weight / (sqrt_degrees[e.i] * sqrt_degrees[e.j]);
            lsym[(e.i, e.j)] = v;
            lsym[(e.j, e.i)] = v;
        }
        let eig = SymmetricEigen::new(lsym);

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let mut eigenvalues: Vec<f64> = order.iter().map(|&c| eig.eigenvalues[c].clamp(0.0, 2.0)).collect();
        let mut modes = DMatrix::<f64>::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            modes.set_column(dst, &eig.eigenvectors.column(src));
        }

        // The null vector is known in closed form: D^{1/2} 1 / sqrt(vol).
        eigenvalues[0] = 0.0;
        let null = DVector::from_iterator(n, sqrt_degrees.iter().map(|s| s / volume.sqrt()));
        modes.set_column(0, &null);

        if n > 1 && eigenvalues[1] < DISCONNECTION_TOLERANCE {
            // Numerically disconnected even though every edge is positive;
            // split on the sign of the Fiedler vector.
            let fiedler = modes.column(1);
            let (neg, pos): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| fiedler[i] < 0.0);
            return Err(Error::Disconnected {
                components: vec![neg, pos],
            });
        }

        Ok(Self {
            degrees,
            sqrt_degrees,
            volume,
            pi,
            eigenvalues,
            modes,
        })
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Stationary distribution `pi_i = k_i / sum_j k_j`.
    pub fn stationary(&self) -> &[f64] {
        &self.pi
    }

    /// Eigenvalues of the normalized Laplacian, ascending, in `[0, 2]`.
    pub fn spectrum(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn modes(&self) -> &DMatrix<f64> {
        &self.modes
    }

    /// `M(t) = V diag(exp(-t lambda)) V^T`, exactly symmetric.
    fn propagator(&self, t: f64) -> DMatrix<f64> {
        let n = self.n();
        let mut x = self.modes.clone();
        for (c, &lambda) in self.eigenvalues.iter().enumerate() {
            let e = (-t * lambda).exp();
            let scale = if e < UNDERFLOW_FLOOR { 0.0 } else { e.sqrt() };
            x.column_mut(c).scale_mut(scale);
        }
        let mut m = &x * x.transpose();
        for i in 0..n {
            for j in i + 1..n {
                m[(j, i)] = m[(i, j)];
            }
        }
        m
    }

    /// Row-stochastic `P(t) = exp(-t L)`.
    pub fn transition_matrix(&self, t: f64) -> DMatrix<f64> {
        let n = self.n();
        let mut m = self.propagator(t);
        for j in 0..n {
            for i in 0..n {
                m[(i, j)] *= self.sqrt_degrees[j] / self.sqrt_degrees[i];
            }
        }
        m
    }

    /// `Pi P(t)`: the probability flow between node pairs at stationarity.
    /// Symmetric by detailed balance, and constructed to be exactly so.
    pub fn flow_matrix(&self, t: f64) -> DMatrix<f64> {
        let n = self.n();
        let mut m = self.propagator(t);
        for j in 0..n {
            for i in 0..=j {
                let v = m[(i, j)] * self.sqrt_degrees[i] * self.sqrt_degrees[j] / self.volume;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    /// Generalized modularity matrix `B(t) = Pi P(t) - pi^T pi`.
    pub fn modularity_matrix(&self, t: f64) -> DMatrix<f64> {
        let n = self.n();
        let mut b = self.flow_matrix(t);
        for j in 0..n {
            for i in 0..n {
                b[(i, j)] -= self.pi[i] * self.pi[j];
            }
        }
        b
    }

    /// Writes `index,eigenvalue` rows.
    pub fn write_spectrum<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["index", "eigenvalue"])?;
        for (i, l) in self.eigenvalues.iter().enumerate() {
            wtr.write_record([i.to_string(), l.to_string()])?;
        }
        wtr.flush().map_err(|e| Error::Csv(e.into()))
    }
}

pub fn build_kernel(graph: &SimilarityGraph) -> Result<MarkovKernel> {
    MarkovKernel::build(graph)
}
