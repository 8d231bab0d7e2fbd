//! Eigenspaces of unitaries whose spectrum lies on a grid of roots of unity.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::UnitaryOperator;

/// Default angular snapping tolerance (radians).
pub const SNAP_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct Eigenspace {
    /// Eigenvalue is `exp(2πi k / order)`.
    pub k: usize,
    /// Orthonormal basis of the eigenspace.
    pub vectors: Vec<Vec<Complex64>>,
}

impl Eigenspace {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }
}

pub fn root_of_unity(k: usize, order: usize) -> Complex64 {
    Complex64::from_polar(1.0, TAU * k as f64 / order as f64)
}

/// Decompose `op` into eigenspaces, assuming `op^order = I`.
///
/// The eigenvectors come from the Hermitian matrix
/// `(e^{-iθ₀} U + e^{iθ₀} U*) / 2` with `θ₀ = π / (2 order)`; its eigenvalue on
/// the `k`-th eigenspace of `U` is `cos(2πk/order - θ₀)`, distinct for distinct
/// `k`. Each eigenvector is then snapped to the root-of-unity grid by its
/// Rayleigh quotient and checked against `residual_tol`.
pub fn root_of_unity_eigenspaces(
    op: &UnitaryOperator,
    order: usize,
    angular_tol: f64,
    residual_tol: f64,
) -> Result<Vec<Eigenspace>> {
    let u = op.matrix();
    let shift = Complex64::from_polar(0.5, -PI / (2.0 * order as f64));
    let herm: DMatrix<Complex64> = u * shift + u.adjoint() * shift.conj();
    let eig = SymmetricEigen::new(herm);

    let mut spaces: BTreeMap<usize, Vec<Vec<Complex64>>> = BTreeMap::new();
    for col in eig.eigenvectors.column_iter() {
        let v: Vec<Complex64> = col.iter().copied().collect();
        let uv = op.apply(&v);
        let rayleigh: Complex64 = v.iter().zip(&uv).map(|(a, b)| a.conj() * b).sum();
        let angle = rayleigh.arg().rem_euclid(TAU);
        let step = TAU / order as f64;
        let k = (angle / step).round() as usize % order;
        let mut offset = (angle - k as f64 * step).abs();
        offset = offset.min(TAU - offset);
        if offset > angular_tol {
            return Err(Error::SnapFailure { angle, order });
        }
        let lambda = root_of_unity(k, order);
        let residual = uv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual > residual_tol {
            return Err(Error::EigenResidual { residual, tolerance: residual_tol });
        }
        spaces.entry(k).or_default().push(v);
    }
    Ok(spaces
        .into_iter()
        .map(|(k, vectors)| Eigenspace { k, vectors })
        .collect())
}
