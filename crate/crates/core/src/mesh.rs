//! Meshes of linear elements on an interval.

use crate::problem::Interval;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    nodes: Vec<f64>,
    uniform: bool,
}

/// `n` equal elements on `domain`.
pub fn build_uniform(domain: Interval, n: usize) -> Result<Mesh1D> {
    if n < 2 {
        return Err(Error::TooFewElements(n));
    }
    if domain.is_empty() || !domain.lo.is_finite() || !domain.hi.is_finite() {
        return Err(Error::EmptyDomain { lo: domain.lo, hi: domain.hi });
    }
    let len = domain.len();
    let mut nodes: Vec<f64> = (0..=n).map(|j| domain.lo + len * (j as f64 / n as f64)).collect();
    nodes[n] = domain.hi;
    Ok(Mesh1D { nodes, uniform: true })
}

impl Mesh1D {
    /// Mesh from explicit node coordinates, which must be strictly increasing.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::TooFewElements(nodes.len().saturating_sub(1)));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMesh("non-finite node".into()));
        }
        if let Some(i) = nodes.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidMesh(format!("nodes not increasing at {i}")));
        }
        let h0 = nodes[1] - nodes[0];
        let uniform = nodes.windows(2).all(|w| ((w[1] - w[0]) - h0).abs() <= 1e-14 * h0);
        Ok(Mesh1D { nodes, uniform })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    pub fn domain(&self) -> Interval {
        Interval::new(self.nodes[0], self.nodes[self.nodes.len() - 1])
    }

    /// `(x_left, h_e)` of element `e`.
    pub fn element_span(&self, e: usize) -> Result<(f64, f64)> {
        if e >= self.n_elements() {
            return Err(Error::IndexOutOfRange { index: e, len: self.n_elements() });
        }
        Ok((self.nodes[e], self.nodes[e + 1] - self.nodes[e]))
    }

    /// Iterator over `(x_left, h_e)` for all elements.
    pub fn elements(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.windows(2).map(|w| (w[0], w[1] - w[0]))
    }

    /// The reflected mesh `x -> lo + hi - x`, nodes reordered increasingly.
    pub fn mirrored(&self) -> Mesh1D {
        let Interval { lo, hi } = self.domain();
        let mut nodes: Vec<f64> = self.nodes.iter().rev().map(|&x| lo + hi - x).collect();
        let n = nodes.len() - 1;
        nodes[0] = lo;
        nodes[n] = hi;
        Mesh1D { nodes, uniform: self.uniform }
    }

    /// Nodes graded geometrically towards `hi` with ratio `r` between
    /// consecutive element lengths.
    pub fn graded(domain: Interval, n: usize, r: f64) -> Result<Mesh1D> {
        if n < 2 {
            return Err(Error::TooFewElements(n));
        }
        if r <= 0.0 || !r.is_finite() {
            return Err(Error::InvalidMesh(format!("grading ratio {r}")));
        }
        let weights: Vec<f64> = (0..n).map(|i| r.powi(i as i32)).collect();
        let total: f64 = weights.iter().sum();
        let mut nodes = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        nodes.push(domain.lo);
        for w in &weights[..n - 1] {
            acc += w;
            nodes.push(domain.lo + domain.len() * acc / total);
        }
        nodes.push(domain.hi);
        Mesh1D::from_nodes(nodes)
    }
}
