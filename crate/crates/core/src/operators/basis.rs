//! One-dimensional orthonormal eigenbases of the three-point Laplacian.
//!
//! Grids here are small (n ≤ 64 per axis), so the transforms are stored as
//! dense matrices rather than FFT plans. Rows are orthonormal in the plain
//! Euclidean sum, so coefficients carry the same ℓ² mass as the samples.

use ndarray::{Array3, Axis};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// Cell unknowns with mirror ghosts (zero normal derivative).
    Cosine,
    /// Cell unknowns with odd ghosts (zero value on the wall).
    HalfSine,
    /// Interior face unknowns between two zero wall values.
    Sine,
    /// Single entry on a collapsed axis.
    Identity,
}

#[derive(Debug, Clone)]
pub struct Basis {
    kind: BasisKind,
    len: usize,
    matrix: Vec<f64>,
    mu: Vec<f64>,
}

impl Basis {
    /// Basis on `cells` cells of width `h`.
    pub fn new(kind: BasisKind, cells: usize, h: f64) -> Self {
        let n = cells as f64;
        let len = match kind {
            BasisKind::Sine => cells - 1,
            BasisKind::Identity => 1,
            _ => cells,
        };
        let mut matrix = vec![0.0; len * len];
        let mut mu = vec![0.0; len];
        let eig = |m: f64| 4.0 / (h * h) * (PI * m / (2.0 * n)).sin().powi(2);
        for k in 0..len {
            for i in 0..len {
                let x = i as f64 + 0.5;
                matrix[k * len + i] = match kind {
                    BasisKind::Cosine => {
                        let s = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
                        s * (PI * k as f64 * x / n).cos()
                    }
                    BasisKind::HalfSine => {
                        let s = if k + 1 == len { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
                        s * (PI * (k + 1) as f64 * x / n).sin()
                    }
                    BasisKind::Sine => {
                        (2.0 / n).sqrt() * (PI * (k + 1) as f64 * (i + 1) as f64 / n).sin()
                    }
                    BasisKind::Identity => 1.0,
                };
            }
            mu[k] = match kind {
                BasisKind::Cosine => eig(k as f64),
                BasisKind::HalfSine | BasisKind::Sine => eig((k + 1) as f64),
                BasisKind::Identity => 0.0,
            };
        }
        Self { kind, len, matrix, mu }
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Eigenvalue of `−Δ_h` for mode `k`.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.mu[k]
    }

    /// Samples of mode `k`.
    pub fn mode(&self, k: usize) -> &[f64] {
        &self.matrix[k * self.len..(k + 1) * self.len]
    }

    fn apply(&self, x: &[f64], out: &mut [f64], forward: bool) {
        let n = self.len;
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (c, xv) in x.iter().enumerate() {
                let m = if forward { self.matrix[r * n + c] } else { self.matrix[c * n + r] };
                acc += m * xv;
            }
            *o = acc;
        }
    }

    /// Transforms every lane of `arr` along `axis`, in place.
    pub fn transform_axis(&self, arr: &mut Array3<f64>, axis: usize, forward: bool) {
        if self.kind == BasisKind::Identity {
            return;
        }
        debug_assert_eq!(arr.shape()[axis], self.len);
        let mut buf = vec![0.0; self.len];
        let mut out = vec![0.0; self.len];
        for mut lane in arr.lanes_mut(Axis(axis)) {
            for (b, v) in buf.iter_mut().zip(lane.iter()) {
                *b = *v;
            }
            self.apply(&buf, &mut out, forward);
            for (v, o) in lane.iter_mut().zip(&out) {
                *v = *o;
            }
        }
    }
}
