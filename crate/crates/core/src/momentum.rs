//! Lattice momentum representation and the total-momentum pair states.
//!
//! Momenta live on `k_n = −π + 2πn/d`, `n = 1..=d`, so the grid ends at `π`
//! and `±π` are identified. A momentum-`k` particle has position amplitudes
//! `e^{ikx}/√d`, which makes a linear potential shift momenta downwards.

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianOperator;
use crate::lattice::LatticeState;
use crate::scalar::{cis, norm_sqr, Real};
use nalgebra::DMatrix;
use num_complex::Complex;

/// Tolerance for deciding that a momentum sits on the grid.
const GRID_TOLERANCE: f64 = 1e-9;

/// The `d` grid momenta in index order.
pub fn momentum_grid<T: Real>(d: usize) -> Vec<T> {
    (1..=d)
        .map(|n| -T::pi() + T::two_pi() * T::from_count(n) / T::from_count(d))
        .collect()
}

/// Grid index of `k`, after folding it into the first Brillouin zone.
pub fn grid_index<T: Real>(d: usize, k: T) -> Result<usize> {
    let step = T::two_pi() / T::from_count(d);
    let n = (k + T::pi()) / step;
    let rounded = n.round();
    if (n - rounded).abs() > T::lit(GRID_TOLERANCE) {
        return Err(Error::Domain {
            what: "momentum (not on the lattice grid)",
            value: k.to_f64_lossy(),
        });
    }
    let n = rounded.to_i64().expect("finite momentum") - 1;
    Ok(n.rem_euclid(d as i64) as usize)
}

/// Folds `k` into `(−π, π]`.
pub fn fold_to_zone<T: Real>(k: T) -> T {
    let two_pi = T::two_pi();
    let mut r = (k + T::pi()) % two_pi;
    if r <= T::zero() {
        r += two_pi;
    }
    r - T::pi()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentumState<T: Real> {
    d: usize,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> MomentumState<T> {
    pub fn d(&self) -> usize {
        self.d
    }

    /// Amplitudes indexed `n1 * d + n2` over the grid.
    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn amplitude_at(&self, k1: T, k2: T) -> Result<Complex<T>> {
        let a = grid_index(self.d, k1)?;
        let b = grid_index(self.d, k2)?;
        Ok(self.amplitudes[a * self.d + b])
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes
            .iter()
            .fold(T::zero(), |a, z| a + norm_sqr(*z))
    }

    /// Inverse transform back to sites.
    pub fn to_position(&self) -> LatticeState<T> {
        let table = phase_table::<T>(self.d, T::one());
        let amps = transform(self.d, &self.amplitudes, &table);
        LatticeState::from_unitary_image(self.d, amps)
    }
}

/// `table[(x, n)] = e^{sign·i k_n x}/√d` for sites `x = 1..=d`.
fn phase_table<T: Real>(d: usize, sign: T) -> DMatrix<Complex<T>> {
    let ks = momentum_grid::<T>(d);
    let norm = T::one() / T::from_count(d).sqrt();
    DMatrix::from_fn(d, d, |x, n| cis(sign * ks[n] * T::from_count(x + 1)) * norm)
}

/// Applies `table` to both registers of a row-major `d × d` amplitude array:
/// `out = table · A · tableᵀ`.
fn transform<T: Real>(
    d: usize,
    amps: &[Complex<T>],
    table: &DMatrix<Complex<T>>,
) -> Vec<Complex<T>> {
    let a = DMatrix::from_row_slice(d, d, amps);
    let out = table * a * table.transpose();
    let mut v = Vec::with_capacity(d * d);
    for r in 0..d {
        for c in 0..d {
            v.push(out[(r, c)]);
        }
    }
    v
}

/// Momentum amplitudes `φ(k1,k2) = ⟨k1,k2|ψ⟩`.
pub fn to_momentum<T: Real>(state: &LatticeState<T>) -> MomentumState<T> {
    let d = state.d();
    // ⟨k|x⟩ = e^{-ikx}/√d, laid out as [n, x].
    let table = phase_table::<T>(d, -T::one()).transpose();
    MomentumState {
        d,
        amplitudes: transform(d, state.amplitudes(), &table),
    }
}

/// Pair state with total momentum `K`: the equal superposition of every
/// `(k1, k2)` with `k1 + k2 ≡ K (mod 2π)`.
pub fn build_psi_k<T: Real>(d: usize, total_k: T) -> Result<LatticeState<T>> {
    if d < 2 || !d.is_multiple_of(2) {
        return Err(Error::Domain {
            what: "site count (must be even)",
            value: d as f64,
        });
    }
    grid_index(d, total_k)?;
    let ks = momentum_grid::<T>(d);
    let amp = Complex::new(T::one() / T::from_count(d).sqrt(), T::zero());
    let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); d * d];
    for (n1, k1) in ks.iter().enumerate() {
        let n2 = grid_index(d, fold_to_zone(total_k - *k1))?;
        amplitudes[n1 * d + n2] = amp;
    }
    Ok(MomentumState { d, amplitudes }.to_position())
}

/// Plane-wave product `ã†_{k1} b̃†_{k2}|0⟩` in position space.
pub fn plane_wave_pair<T: Real>(d: usize, k1: T, k2: T) -> Result<LatticeState<T>> {
    let a = grid_index(d, k1)?;
    let b = grid_index(d, k2)?;
    let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); d * d];
    amplitudes[a * d + b] = Complex::new(T::one(), T::zero());
    Ok(MomentumState { d, amplitudes }.to_position())
}

/// `⟨k1',k2'|H|k1,k2⟩` for every pair of grid momenta, rows and columns
/// indexed `n1 * d + n2`.
pub fn momentum_matrix<T: Real>(op: &HamiltonianOperator<T>) -> DMatrix<Complex<T>> {
    let d = op.d();
    let dim = d * d;
    let ks = momentum_grid::<T>(d);
    let norm = T::one() / T::from_count(d);
    // Column (n1, n2) holds the position amplitudes of |k1, k2⟩.
    let f = DMatrix::from_fn(dim, dim, |row, col| {
        let (x1, x2) = (row / d + 1, row % d + 1);
        let (n1, n2) = (col / d, col % d);
        cis(ks[n1] * T::from_count(x1) + ks[n2] * T::from_count(x2)) * norm
    });
    let h = op.matrix().map(|v| Complex::new(v, T::zero()));
    f.adjoint() * h * f
}
