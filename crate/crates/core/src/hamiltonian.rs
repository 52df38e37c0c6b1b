//! Pair Hamiltonians on the `d²`-dimensional two-particle space.
//!
//! Every term in the model is real, so operators are stored as dense real
//! symmetric matrices; basis index `(x1-1)*d + (x2-1)` as in
//! [`LatticeState`](crate::lattice::LatticeState).

use crate::error::{Error, Result};
use crate::lattice::LatticeState;
use crate::scalar::Real;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use std::ops::Add;

/// Named physical ingredient of a [`HamiltonianOperator`].
#[derive(Debug, Clone, PartialEq)]
pub enum Term<T> {
    /// Nearest-neighbour hopping with amplitude −1 for both particles.
    FreeHopping,
    /// `γ` on every configuration with both particles on the same site.
    OnSiteInteraction(T),
    /// Particle count inside sites `d/2+1 ..= 3d/4`.
    RegionPhase,
    /// `η · (x1 + x2)`.
    LinearTilt(T),
    /// `H_a ⊗ 1 + 1 ⊗ H_b` from arbitrary single-particle operators.
    Local,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianOperator<T: Real> {
    d: usize,
    terms: Vec<Term<T>>,
    matrix: DMatrix<T>,
}

impl<T: Real> HamiltonianOperator<T> {
    fn from_parts(d: usize, term: Term<T>, matrix: DMatrix<T>) -> Self {
        Self {
            d,
            terms: vec![term],
            matrix,
        }
    }

    fn diagonal(d: usize, term: Term<T>, f: impl Fn(usize, usize) -> T) -> Self {
        let diag = DVector::from_iterator(
            d * d,
            (1..=d)
                .flat_map(|x1| (1..=d).map(move |x2| (x1, x2)))
                .map(|(a, b)| f(a, b)),
        );
        Self::from_parts(d, term, DMatrix::from_diagonal(&diag))
    }

    /// `H_a ⊗ 1 + 1 ⊗ H_b`; both must be real symmetric `d × d`.
    pub fn local(h_a: &DMatrix<T>, h_b: &DMatrix<T>) -> Result<Self> {
        let d = h_a.nrows();
        for h in [h_a, h_b] {
            if !h.is_square() || h.nrows() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: h.nrows(),
                });
            }
        }
        let id = DMatrix::<T>::identity(d, d);
        let matrix = h_a.kronecker(&id) + id.kronecker(h_b);
        Ok(Self::from_parts(d, Term::Local, matrix))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.d * self.d
    }

    pub fn terms(&self) -> &[Term<T>] {
        &self.terms
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn is_diagonal(&self) -> bool {
        self.matrix
            .iter()
            .enumerate()
            .all(|(k, v)| k % (self.dim() + 1) == 0 || *v == T::zero())
    }

    /// Largest `|H_ij − H_ji|`.
    pub fn hermiticity_defect(&self) -> T {
        let diff = &self.matrix - self.matrix.transpose();
        diff.amax()
    }

    /// Eigenvalues in ascending order.
    pub fn spectrum(&self) -> Result<Vec<T>> {
        let (e, _) = T::symmetric_eigen(&self.matrix)?;
        Ok(e.iter().copied().collect())
    }

    /// `H|ψ⟩` (not normalised).
    pub fn apply(&self, state: &LatticeState<T>) -> Result<Vec<Complex<T>>> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: state.dim(),
            });
        }
        let (re, im) = split(state.amplitudes());
        let hr = &self.matrix * re;
        let hi = &self.matrix * im;
        Ok(hr
            .iter()
            .zip(hi.iter())
            .map(|(a, b)| Complex::new(*a, *b))
            .collect())
    }

    /// `⟨ψ|H|ψ⟩`.
    pub fn expectation(&self, state: &LatticeState<T>) -> Result<T> {
        let h = self.apply(state)?;
        Ok(state
            .amplitudes()
            .iter()
            .zip(&h)
            .fold(T::zero(), |a, (x, y)| a + (x.conj() * y).re))
    }

    /// Matrix element `⟨row|H|col⟩` in the configuration basis.
    pub fn element(&self, row: usize, col: usize) -> T {
        self.matrix[(row, col)]
    }
}

pub(crate) fn split<T: Real>(amps: &[Complex<T>]) -> (DVector<T>, DVector<T>) {
    (
        DVector::from_iterator(amps.len(), amps.iter().map(|z| z.re)),
        DVector::from_iterator(amps.len(), amps.iter().map(|z| z.im)),
    )
}

impl<T: Real> Add for HamiltonianOperator<T> {
    type Output = Result<Self>;

    fn add(mut self, rhs: Self) -> Result<Self> {
        if self.d != rhs.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: rhs.d,
            });
        }
        self.matrix += rhs.matrix;
        self.terms.extend(rhs.terms);
        Ok(self)
    }
}

/// Periodic nearest-neighbour hopping `−Σ_x (c†_{x+1} c_x + h.c.)` on one
/// particle.
pub fn single_particle_hopping<T: Real>(d: usize) -> Result<DMatrix<T>> {
    if d < 2 {
        return Err(Error::Domain {
            what: "site count (need d >= 2)",
            value: d as f64,
        });
    }
    let mut h = DMatrix::zeros(d, d);
    for x in 0..d {
        let y = (x + 1) % d;
        h[(y, x)] -= T::one();
        h[(x, y)] -= T::one();
    }
    Ok(h)
}

/// `η · x` on sites `1..=d` for one particle.
pub fn single_particle_tilt<T: Real>(d: usize, eta: T) -> DMatrix<T> {
    DMatrix::from_diagonal(&DVector::from_iterator(
        d,
        (1..=d).map(|x| eta * T::from_count(x)),
    ))
}

/// Free hopping of both particles.
pub fn h_free<T: Real>(d: usize) -> Result<HamiltonianOperator<T>> {
    let h = single_particle_hopping(d)?;
    let id = DMatrix::<T>::identity(d, d);
    Ok(HamiltonianOperator::from_parts(
        d,
        Term::FreeHopping,
        h.kronecker(&id) + id.kronecker(&h),
    ))
}

/// On-site attraction (`γ < 0`) or repulsion (`γ > 0`).
pub fn h_onsite_interaction<T: Real>(d: usize, gamma: T) -> Result<HamiltonianOperator<T>> {
    if d == 0 {
        return Err(Error::Domain {
            what: "site count",
            value: 0.0,
        });
    }
    Ok(HamiltonianOperator::diagonal(
        d,
        Term::OnSiteInteraction(gamma),
        |a, b| if a == b { gamma } else { T::zero() },
    ))
}

/// Sites `d/2+1 ..= 3d/4`, the phase-shifting arm of the interferometer.
pub fn phase_region(d: usize) -> Result<std::ops::RangeInclusive<usize>> {
    if d == 0 || !d.is_multiple_of(4) {
        return Err(Error::Domain {
            what: "site count (must be divisible by 4)",
            value: d as f64,
        });
    }
    Ok(d / 2 + 1..=3 * d / 4)
}

/// Number of particles inside [`phase_region`].
pub fn h_region_phase<T: Real>(d: usize) -> Result<HamiltonianOperator<T>> {
    let region = phase_region(d)?;
    Ok(HamiltonianOperator::diagonal(
        d,
        Term::RegionPhase,
        |a, b| T::from_count(region.contains(&a) as usize + region.contains(&b) as usize),
    ))
}

/// Linear potential `η Σ_x x (n^a_x + n^b_x)` with sites counted from 1.
pub fn h_linear_tilt<T: Real>(d: usize, eta: T) -> Result<HamiltonianOperator<T>> {
    if d < 2 {
        return Err(Error::Domain {
            what: "site count (need d >= 2)",
            value: d as f64,
        });
    }
    Ok(HamiltonianOperator::diagonal(
        d,
        Term::LinearTilt(eta),
        |a, b| eta * T::from_count(a + b),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn cosine_spectrum(d: usize) -> Vec<f64> {
        let mut e: Vec<f64> = (0..d)
            .flat_map(|k1| {
                (0..d).map(move |k2| {
                    -2.0 * (2.0 * PI * k1 as f64 / d as f64).cos()
                        - 2.0 * (2.0 * PI * k2 as f64 / d as f64).cos()
                })
            })
            .collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e
    }

    fn translation(d: usize) -> DMatrix<f64> {
        let mut t = DMatrix::zeros(d * d, d * d);
        for x1 in 0..d {
            for x2 in 0..d {
                t[(((x1 + 1) % d) * d + (x2 + 1) % d, x1 * d + x2)] = 1.0;
            }
        }
        t
    }

    #[test]
    fn free_spectrum_d4() {
        let got = h_free::<f64>(4).unwrap().spectrum().unwrap();
        let mut want: Vec<f64> = [-2.0, 0.0, 2.0, 0.0]
            .iter()
            .flat_map(|a| [-2.0, 0.0, 2.0, 0.0].map(|b| a + b))
            .collect();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (g, w) in got.iter().zip(&want) {
            assert_relative_eq!(*g, *w, epsilon = 1e-12);
        }
    }

    #[test]
    fn free_spectrum_matches_cosine_formula() {
        for d in [2, 6, 40] {
            let got = h_free::<f64>(d).unwrap().spectrum().unwrap();
            for (g, w) in got.iter().zip(cosine_spectrum(d)) {
                assert!((g - w).abs() < 1e-10, "d={d}: {g} vs {w}");
            }
            assert_relative_eq!(got[0], -4.0, epsilon = 1e-10);
        }
        assert!(h_free::<f64>(1).is_err());
    }

    #[test]
    fn interaction_is_diagonal_on_coincident_sites() {
        let h = h_onsite_interaction::<f64>(3, -2.5).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                let want = if i == j && i / 3 == i % 3 { -2.5 } else { 0.0 };
                assert_eq!(h.element(i, j), want);
            }
        }
        let zero = h_onsite_interaction::<f64>(5, 0.0).unwrap();
        assert_eq!(zero.matrix().amax(), 0.0);
    }

    #[test]
    fn translation_commutes_with_free_and_interaction() {
        let d = 6;
        let t = translation(d);
        let ops = [
            h_free::<f64>(d).unwrap(),
            h_onsite_interaction(d, -3.0).unwrap(),
            (h_free(d).unwrap() + h_onsite_interaction(d, 1.7).unwrap()).unwrap(),
        ];
        for h in ops {
            let c = &t * h.matrix() - h.matrix() * &t;
            assert!(c.norm() < 1e-12);
        }
    }

    #[test]
    fn region_phase_counts_particles() {
        let d = 40;
        let v = h_region_phase::<f64>(d).unwrap();
        assert_eq!(phase_region(d).unwrap(), 21..=30);
        let idx = |a: usize, b: usize| (a - 1) * d + (b - 1);
        assert_eq!(v.element(idx(21, 30), idx(21, 30)), 2.0);
        assert_eq!(v.element(idx(25, 5), idx(25, 5)), 1.0);
        assert_eq!(v.element(idx(5, 31), idx(5, 31)), 0.0);
        assert!(h_region_phase::<f64>(10).is_err());
    }

    #[test]
    fn tilt_is_linear_and_shift_adds_identity() {
        let d = 8;
        let a = h_linear_tilt::<f64>(d, 0.4).unwrap();
        assert_eq!(h_linear_tilt::<f64>(d, 0.0).unwrap().matrix().amax(), 0.0);
        assert_relative_eq!(a.element(0, 0), 0.8);
        assert_relative_eq!(a.element(d * d - 1, d * d - 1), 0.4 * 16.0);
        // Counting sites from 0 instead of 1 subtracts 2η on every configuration.
        let shifted = HamiltonianOperator::local(
            &(single_particle_tilt(d, 0.4) - DMatrix::identity(d, d) * 0.4),
            &(single_particle_tilt(d, 0.4) - DMatrix::identity(d, d) * 0.4),
        )
        .unwrap();
        let diff = a.matrix() - shifted.matrix();
        let id = DMatrix::<f64>::identity(d * d, d * d) * 0.8;
        assert!((diff - id).amax() < 1e-14);
    }

    #[test]
    fn sums_stay_hermitian() {
        let d = 8;
        let h = [
            h_onsite_interaction(d, -2.5).unwrap(),
            h_region_phase(d).unwrap(),
            h_linear_tilt(d, 0.4).unwrap(),
        ]
        .into_iter()
        .try_fold(h_free::<f64>(d).unwrap(), |acc, t| acc + t)
        .unwrap();
        assert_eq!(h.terms().len(), 4);
        assert!(h.hermiticity_defect() < 1e-12);
        assert!(!h.is_diagonal());
        assert!(h_linear_tilt::<f64>(d, 0.3).unwrap().is_diagonal());
    }

    #[test]
    fn local_equals_free_for_hopping() {
        let d = 7;
        let hop = single_particle_hopping::<f64>(d).unwrap();
        let local = HamiltonianOperator::local(&hop, &hop).unwrap();
        assert_eq!(local.matrix(), h_free::<f64>(d).unwrap().matrix());
        assert!(HamiltonianOperator::local(&hop, &DMatrix::zeros(3, 3)).is_err());
    }
}
