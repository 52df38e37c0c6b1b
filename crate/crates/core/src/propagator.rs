//! Exact time evolution by spectral decomposition, the interferometer phase
//! stage and the recurrence search.

use crate::detectors::JointWindow;
use crate::error::{Error, Result};
use crate::hamiltonian::{phase_region, split, HamiltonianOperator};
use crate::lattice::LatticeState;
use crate::scalar::{cis, Real};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

/// `e^{-iHt}` for a real symmetric pair Hamiltonian, via `H = U E Uᵀ`.
///
/// Immutable after construction; evolution calls are pure.
#[derive(Debug, Clone)]
pub struct SpectralPropagator<T: Real> {
    d: usize,
    energies: DVector<T>,
    vectors: DMatrix<T>,
}

/// A state expanded in the energy eigenbasis, ready to be evolved to many
/// times without repeating the projection.
#[derive(Debug, Clone)]
pub struct Prepared<'a, T: Real> {
    prop: &'a SpectralPropagator<T>,
    re: DVector<T>,
    im: DVector<T>,
}

impl<T: Real> SpectralPropagator<T> {
    pub fn new(op: &HamiltonianOperator<T>) -> Result<Self> {
        let (energies, vectors) = T::symmetric_eigen(op.matrix())?;
        Ok(Self {
            d: op.d(),
            energies,
            vectors,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.d * self.d
    }

    /// Eigenvalues in ascending order.
    pub fn energies(&self) -> &DVector<T> {
        &self.energies
    }

    pub fn eigenvectors(&self) -> &DMatrix<T> {
        &self.vectors
    }

    /// Largest entry of `|U E Uᵀ − H|`.
    pub fn reconstruction_error(&self, op: &HamiltonianOperator<T>) -> T {
        let scaled = DMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            self.vectors[(r, c)] * self.energies[c]
        });
        let rebuilt = scaled * self.vectors.transpose();
        (rebuilt - op.matrix()).amax()
    }

    pub fn prepare(&self, state: &LatticeState<T>) -> Result<Prepared<'_, T>> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: state.dim(),
            });
        }
        let (re, im) = split(state.amplitudes());
        Ok(Prepared {
            prop: self,
            re: self.vectors.tr_mul(&re),
            im: self.vectors.tr_mul(&im),
        })
    }

    /// Energy-basis coefficients `⟨E_n|ψ⟩`.
    pub fn coefficients(&self, state: &LatticeState<T>) -> Result<Vec<Complex<T>>> {
        let p = self.prepare(state)?;
        Ok(p.re
            .iter()
            .zip(p.im.iter())
            .map(|(a, b)| Complex::new(*a, *b))
            .collect())
    }

    /// `e^{-iHt}|ψ⟩`.
    pub fn evolve(&self, state: &LatticeState<T>, t: T) -> Result<LatticeState<T>> {
        Ok(self.prepare(state)?.at(t))
    }

    /// `⟨ψ|H|ψ⟩` from the spectral weights.
    pub fn energy(&self, state: &LatticeState<T>) -> Result<T> {
        let p = self.prepare(state)?;
        Ok((0..self.dim()).fold(T::zero(), |a, n| {
            a + self.energies[n] * (p.re[n] * p.re[n] + p.im[n] * p.im[n])
        }))
    }
}

impl<T: Real> Prepared<'_, T> {
    pub fn at(&self, t: T) -> LatticeState<T> {
        let n = self.re.len();
        let mut cr = DVector::zeros(n);
        let mut ci = DVector::zeros(n);
        for k in 0..n {
            let (s, c) = (self.prop.energies[k] * t).sin_cos();
            // (re + i im)(c − i s)
            cr[k] = self.re[k] * c + self.im[k] * s;
            ci[k] = self.im[k] * c - self.re[k] * s;
        }
        let pr = &self.prop.vectors * cr;
        let pi = &self.prop.vectors * ci;
        LatticeState::from_unitary_image(
            self.prop.d,
            pr.iter()
                .zip(pi.iter())
                .map(|(a, b)| Complex::new(*a, *b))
                .collect(),
        )
    }
}

/// `e^{-iHt}` for a diagonal `H`, applied elementwise.
pub fn evolve_diagonal<T: Real>(
    op: &HamiltonianOperator<T>,
    state: &LatticeState<T>,
    t: T,
) -> Result<LatticeState<T>> {
    if !op.is_diagonal() {
        return Err(Error::Unsupported(
            "elementwise evolution needs a diagonal operator".into(),
        ));
    }
    if state.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: state.dim(),
        });
    }
    let amps = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(k, z)| z * cis(-op.element(k, k) * t))
        .collect();
    Ok(LatticeState::from_unitary_image(state.d(), amps))
}

/// `e^{-iht}` for a real symmetric single-particle matrix.
#[derive(Debug, Clone)]
pub struct SingleParticlePropagator<T: Real> {
    energies: DVector<T>,
    vectors: DMatrix<T>,
}

impl<T: Real> SingleParticlePropagator<T> {
    pub fn new(h: &DMatrix<T>) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::DimensionMismatch {
                expected: h.nrows(),
                got: h.ncols(),
            });
        }
        let (energies, vectors) = T::symmetric_eigen(h)?;
        Ok(Self { energies, vectors })
    }

    pub fn unitary(&self, t: T) -> DMatrix<Complex<T>> {
        let n = self.energies.len();
        let v = self.vectors.map(|x| Complex::new(x, T::zero()));
        let phased = DMatrix::from_fn(n, n, |r, c| v[(r, c)] * cis(-self.energies[c] * t));
        phased * v.transpose()
    }
}

/// Evolution under `H_a ⊗ 1 + 1 ⊗ H_b` as `U_a(t) ψ U_b(t)ᵀ` on the
/// amplitude matrix.
#[derive(Debug, Clone)]
pub struct ProductPropagator<T: Real> {
    d: usize,
    first: SingleParticlePropagator<T>,
    second: SingleParticlePropagator<T>,
}

impl<T: Real> ProductPropagator<T> {
    pub fn new(h_a: &DMatrix<T>, h_b: &DMatrix<T>) -> Result<Self> {
        let d = h_a.nrows();
        if h_b.nrows() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: h_b.nrows(),
            });
        }
        Ok(Self {
            d,
            first: SingleParticlePropagator::new(h_a)?,
            second: SingleParticlePropagator::new(h_b)?,
        })
    }

    pub fn first(&self) -> &SingleParticlePropagator<T> {
        &self.first
    }

    pub fn second(&self) -> &SingleParticlePropagator<T> {
        &self.second
    }

    pub fn evolve(&self, state: &LatticeState<T>, t: T) -> Result<LatticeState<T>> {
        if state.d() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: state.d(),
            });
        }
        let m = self.first.unitary(t) * state.as_matrix() * self.second.unitary(t).transpose();
        let mut amps = Vec::with_capacity(self.d * self.d);
        for r in 0..self.d {
            for c in 0..self.d {
                amps.push(m[(r, c)]);
            }
        }
        Ok(LatticeState::from_unitary_image(self.d, amps))
    }
}

/// `e^{iφV}`, `V` counting the particles inside the phase region.
pub fn apply_phase<T: Real>(state: &LatticeState<T>, phi: T) -> Result<LatticeState<T>> {
    let d = state.d();
    let region = phase_region(d)?;
    let phases = [cis(T::zero()), cis(phi), cis(phi + phi)];
    let mut amps = Vec::with_capacity(state.dim());
    for x1 in 1..=d {
        for x2 in 1..=d {
            let n = usize::from(region.contains(&x1)) + usize::from(region.contains(&x2));
            amps.push(state.amplitudes()[(x1 - 1) * d + (x2 - 1)] * phases[n]);
        }
    }
    Ok(LatticeState::from_unitary_image(d, amps))
}

/// How a detection peak translates into the interferometer duration `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Landmark {
    /// The packet arriving at the watched cell marks `T` itself.
    Arrival,
    /// The watched cell is the starting one; its revival marks `2T`.
    Return,
}

/// Parameters of the scan for the first qualifying detection peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceScan<T> {
    pub t_max: T,
    pub step: T,
    pub tolerance: T,
    /// Minimum detector value for a peak to count.
    pub threshold: T,
    pub landmark: Landmark,
}

impl<T: Real> RecurrenceScan<T> {
    pub fn arrival(t_max: T) -> Self {
        Self {
            t_max,
            step: T::lit(0.25),
            tolerance: T::lit(1e-6),
            threshold: T::lit(0.25),
            landmark: Landmark::Arrival,
        }
    }

    pub fn validate(&self) -> Result<()> {
        crate::error::positive("scan window", self.t_max)?;
        crate::error::positive("scan step", self.step)?;
        crate::error::positive("scan tolerance", self.tolerance)?;
        if self.step > self.t_max {
            return Err(Error::Domain {
                what: "scan step (exceeds window)",
                value: self.step.to_f64_lossy(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recurrence<T> {
    /// Time of the refined peak.
    pub peak_time: T,
    pub peak_value: T,
    /// Interferometer duration `T` implied by the landmark.
    pub duration: T,
}

/// First strict local maximum of `⟨window⟩(t)` at or above the threshold,
/// refined by golden-section search between its coarse neighbours.
pub fn find_recurrence_time<T: Real>(
    prop: &SpectralPropagator<T>,
    initial: &LatticeState<T>,
    window: &JointWindow,
    scan: &RecurrenceScan<T>,
) -> Result<Recurrence<T>> {
    scan.validate()?;
    let prepared = prop.prepare(initial)?;
    let value = |t: T| window.expectation(&prepared.at(t));

    let mut samples: Vec<(T, T)> = Vec::new();
    let mut k = 0usize;
    loop {
        let t = scan.step * T::from_count(k);
        if t > scan.t_max {
            break;
        }
        samples.push((t, value(t)?));
        k += 1;
    }

    let mut best = (T::zero(), T::zero());
    for i in 1..samples.len().saturating_sub(1) {
        let (t, v) = samples[i];
        if v > best.1 {
            best = (t, v);
        }
        if v >= scan.threshold && v > samples[i - 1].1 && v > samples[i + 1].1 {
            let (peak_time, peak_value) =
                golden_max(&value, samples[i - 1].0, samples[i + 1].0, scan.tolerance)?;
            let duration = match scan.landmark {
                Landmark::Arrival => peak_time,
                Landmark::Return => peak_time / T::lit(2.0),
            };
            return Ok(Recurrence {
                peak_time,
                peak_value,
                duration,
            });
        }
    }
    Err(Error::NoRecurrence {
        t_max: scan.t_max.to_f64_lossy(),
        best_time: best.0.to_f64_lossy(),
        best_value: best.1.to_f64_lossy(),
    })
}

fn golden_max<T: Real>(f: &impl Fn(T) -> Result<T>, mut a: T, mut b: T, tol: T) -> Result<(T, T)> {
    let ratio = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d)?;
        }
    }
    let t = (a + b) / T::lit(2.0);
    Ok((t, f(t)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::SiteRange;
    use crate::hamiltonian::{
        h_free, h_linear_tilt, h_onsite_interaction, single_particle_hopping, single_particle_tilt,
    };
    use crate::lattice::{DoubleGaussian, Register};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_state(d: usize, rng: &mut ChaCha8Rng) -> LatticeState<f64> {
        LatticeState::from_fn(d, |_, _| {
            Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
        .unwrap()
    }

    fn interacting(d: usize, gamma: f64) -> HamiltonianOperator<f64> {
        (h_free(d).unwrap() + h_onsite_interaction(d, gamma).unwrap()).unwrap()
    }

    fn distance(a: &LatticeState<f64>, b: &LatticeState<f64>) -> f64 {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn decomposition_rebuilds_the_operator() {
        let h = (interacting(8, -2.5) + h_linear_tilt(8, 0.4).unwrap()).unwrap();
        assert!(
            SpectralPropagator::new(&h)
                .unwrap()
                .reconstruction_error(&h)
                < 1e-12
        );
    }

    #[test]
    fn zero_time_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let st = random_state(6, &mut rng);
        let p = SpectralPropagator::new(&interacting(6, 1.0)).unwrap();
        assert!(distance(&p.evolve(&st, 0.0).unwrap(), &st) < 1e-12);
    }

    #[test]
    fn eigenstates_only_pick_up_a_phase() {
        let h = interacting(6, -3.0);
        let p = SpectralPropagator::new(&h).unwrap();
        let v = p.eigenvectors().column(7);
        let st = LatticeState::new(6, v.iter().map(|x| Complex::new(*x, 0.0)).collect()).unwrap();
        let e = p.energies()[7];
        let out = p.evolve(&st, 2.7).unwrap();
        assert!(distance(&out, &st.with_global_phase(-e * 2.7)) < 1e-10);
    }

    #[test]
    fn evolution_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let st = random_state(6, &mut rng);
        let p = SpectralPropagator::new(&interacting(6, -2.5)).unwrap();
        let once = p.evolve(&st, 3.1).unwrap();
        let twice = p.evolve(&p.evolve(&st, 1.2).unwrap(), 1.9).unwrap();
        assert!(distance(&once, &twice) < 1e-10);
        let back = p.evolve(&once, -3.1).unwrap();
        assert!(distance(&back, &st) < 1e-10);
    }

    #[test]
    fn small_time_matches_taylor_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let st = random_state(4, &mut rng);
        let h = interacting(4, 0.7);
        let p = SpectralPropagator::new(&h).unwrap();
        let dt = 1e-4;
        let hpsi = h.apply(&st).unwrap();
        let out = p.evolve(&st, dt).unwrap();
        for ((o, s), hp) in out.amplitudes().iter().zip(st.amplitudes()).zip(&hpsi) {
            let first_order = s - Complex::new(0.0, dt) * hp;
            assert!((o - first_order).norm() < 1e-7);
        }
    }

    #[test]
    fn energy_is_conserved() {
        let h = (interacting(8, -2.5) + h_linear_tilt(8, 0.4).unwrap()).unwrap();
        let p = SpectralPropagator::new(&h).unwrap();
        let st = DoubleGaussian::new(8, 1.0, 0.7, 7.0).build().unwrap().state;
        let e0 = h.expectation(&st).unwrap();
        assert_relative_eq!(p.energy(&st).unwrap(), e0, epsilon = 1e-12);
        for t in [0.5, 3.0, 17.0] {
            let e = h.expectation(&p.evolve(&st, t).unwrap()).unwrap();
            assert!(((e - e0) / e0.abs().max(1.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn diagonal_evolution_matches_spectral() {
        let h = h_linear_tilt(6, 0.4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let st = random_state(6, &mut rng);
        let a = evolve_diagonal(&h, &st, 2.2).unwrap();
        let b = SpectralPropagator::new(&h)
            .unwrap()
            .evolve(&st, 2.2)
            .unwrap();
        assert!(distance(&a, &b) < 1e-12);
        assert!(evolve_diagonal(&h_free(6).unwrap(), &st, 1.0).is_err());
    }

    #[test]
    fn product_propagator_matches_pair_propagator() {
        let d = 6;
        let ha = single_particle_hopping::<f64>(d).unwrap() + single_particle_tilt(d, 0.3);
        let hb = single_particle_hopping::<f64>(d).unwrap();
        let pair = SpectralPropagator::new(&HamiltonianOperator::local(&ha, &hb).unwrap()).unwrap();
        let prod = ProductPropagator::new(&ha, &hb).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let st = random_state(d, &mut rng);
        for t in [0.3, 2.0, 9.5] {
            assert!(distance(&pair.evolve(&st, t).unwrap(), &prod.evolve(&st, t).unwrap()) < 1e-10);
        }
    }

    #[test]
    fn reduced_state_evolves_locally() {
        let d = 8;
        let ha = single_particle_hopping::<f64>(d).unwrap();
        let hb = single_particle_hopping::<f64>(d).unwrap() + single_particle_tilt(d, 0.9);
        let prod = ProductPropagator::new(&ha, &hb).unwrap();
        let st = DoubleGaussian::new(d, 1.5, 0.4, 9.0).build().unwrap().state;
        let rho0 = st.reduce(Register::First);
        for t in [0.7, 4.0, 20.0] {
            let rho_t = prod.evolve(&st, t).unwrap().reduce(Register::First);
            let local = rho0.conjugated_by(&prod.first().unitary(t));
            assert!(rho_t.trace_distance(&local).unwrap() < 1e-10);
        }
    }

    #[test]
    fn phase_stage() {
        let d = 8;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let st = random_state(d, &mut rng);
        assert!(distance(&apply_phase(&st, 0.0).unwrap(), &st) < 1e-15);
        assert!(distance(&apply_phase(&st, 2.0 * PI).unwrap(), &st) < 1e-13);
        // Region for d = 8 is sites 5..=6.
        let both = LatticeState::<f64>::point_pair(d, 5, 6).unwrap();
        let a = apply_phase(&both, PI / 2.0)
            .unwrap()
            .amplitude(5, 6)
            .unwrap();
        assert!((a - Complex::new(-1.0, 0.0)).norm() < 1e-15);
        let one = LatticeState::<f64>::point_pair(d, 5, 1).unwrap();
        let a = apply_phase(&one, PI / 2.0)
            .unwrap()
            .amplitude(5, 1)
            .unwrap();
        assert!((a - Complex::new(0.0, 1.0)).norm() < 1e-15);
        assert!(apply_phase(&LatticeState::<f64>::point_pair(6, 1, 1).unwrap(), 1.0).is_err());
    }

    #[test]
    fn two_site_toy_reaches_the_far_corner_at_a_quarter_period() {
        // Each particle moves with amplitude −i sin(2t), so the pair lands
        // on (2,2) with probability sin⁴(2t).
        let d = 2;
        let p = SpectralPropagator::new(&h_free::<f64>(d).unwrap()).unwrap();
        let start = LatticeState::point_pair(d, 1, 1).unwrap();
        let window = JointWindow::cell(SiteRange::single(d, 2).unwrap());
        let scan = RecurrenceScan {
            t_max: 3.0,
            step: 0.1,
            tolerance: 1e-9,
            threshold: 0.5,
            landmark: Landmark::Arrival,
        };
        let r = find_recurrence_time(&p, &start, &window, &scan).unwrap();
        assert_relative_eq!(r.peak_time, PI / 4.0, epsilon = 1e-7);
        assert_relative_eq!(r.peak_value, 1.0, epsilon = 1e-12);
        let back = find_recurrence_time(
            &p,
            &start,
            &JointWindow::cell(SiteRange::single(d, 1).unwrap()),
            &RecurrenceScan {
                landmark: Landmark::Return,
                ..scan
            },
        )
        .unwrap();
        assert_relative_eq!(back.duration, PI / 4.0, epsilon = 1e-7);
    }

    #[test]
    fn missing_recurrence_is_reported() {
        let d = 2;
        let p = SpectralPropagator::new(&h_free::<f64>(d).unwrap()).unwrap();
        let start = LatticeState::point_pair(d, 1, 1).unwrap();
        let window = JointWindow::cell(SiteRange::single(d, 2).unwrap());
        let scan = RecurrenceScan {
            t_max: 0.5,
            ..RecurrenceScan::arrival(0.5)
        };
        match find_recurrence_time(&p, &start, &window, &scan) {
            Err(Error::NoRecurrence { best_value, .. }) => assert!(best_value > 0.0),
            other => panic!("unexpected {other:?}"),
        }
        let bad = RecurrenceScan { step: 0.0, ..scan };
        assert!(find_recurrence_time(&p, &start, &window, &bad).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn evolution_is_unitary(seed in any::<u64>(), t in -50.0f64..50.0) {
            let p = SpectralPropagator::new(&(interacting(5, -2.5) + h_linear_tilt(5, 0.4).unwrap()).unwrap()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let st = random_state(5, &mut rng);
            let out = p.evolve(&st, t).unwrap();
            prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }
}
