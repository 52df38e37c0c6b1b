//! Two distinguishable particles on a periodic ring of `d` sites.
//!
//! Sites are numbered `1..=d`. Amplitudes are stored row-major in the first
//! particle's site, so configuration `(x1, x2)` lives at `(x1-1)*d + (x2-1)`.

use crate::error::{positive, Error, Result};
use crate::scalar::{cis, minimal_image, norm_sqr, Real};
use nalgebra::DMatrix;
use num_complex::Complex;

/// Eigenvalues at or below this are dropped from the entropy sum.
pub const ENTROPY_CUTOFF: f64 = 1e-14;

/// Which particle a single-particle quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Register {
    First,
    Second,
}

impl Register {
    pub fn other(self) -> Self {
        match self {
            Register::First => Register::Second,
            Register::Second => Register::First,
        }
    }
}

/// Normalised two-particle wavefunction on a `d`-site ring.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState<T: Real> {
    d: usize,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> LatticeState<T> {
    /// Normalises `amplitudes` (length `d²`) into a state.
    pub fn new(d: usize, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain {
                what: "site count",
                value: 0.0,
            });
        }
        if amplitudes.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: amplitudes.len(),
            });
        }
        let norm = amplitudes
            .iter()
            .fold(T::zero(), |a, z| a + norm_sqr(*z))
            .sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::Domain {
                what: "state norm",
                value: norm.to_f64_lossy(),
            });
        }
        let inv = T::one() / norm;
        Ok(Self {
            d,
            amplitudes: amplitudes.into_iter().map(|z| z * inv).collect(),
        })
    }

    /// Builds a state from an amplitude function of the (1-based) sites.
    pub fn from_fn(d: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Result<Self> {
        let mut amps = Vec::with_capacity(d * d);
        for x1 in 1..=d {
            for x2 in 1..=d {
                amps.push(f(x1, x2));
            }
        }
        Self::new(d, amps)
    }

    /// Wraps already-normalised amplitudes; used by unitary maps.
    pub(crate) fn from_unitary_image(d: usize, amplitudes: Vec<Complex<T>>) -> Self {
        debug_assert_eq!(amplitudes.len(), d * d);
        Self { d, amplitudes }
    }

    /// `a†_{x1} b†_{x2}|0⟩`.
    pub fn point_pair(d: usize, x1: usize, x2: usize) -> Result<Self> {
        check_site(d, x1, x2)?;
        Self::from_fn(d, |a, b| {
            if a == x1 && b == x2 {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
    }

    /// Both particles on the same site, uniformly over the ring.
    pub fn bunched_uniform(d: usize) -> Result<Self> {
        Self::from_fn(d, |a, b| {
            Complex::new(if a == b { T::one() } else { T::zero() }, T::zero())
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.d * self.d
    }

    pub fn index(&self, x1: usize, x2: usize) -> usize {
        (x1 - 1) * self.d + (x2 - 1)
    }

    pub fn amplitude(&self, x1: usize, x2: usize) -> Result<Complex<T>> {
        check_site(self.d, x1, x2)?;
        Ok(self.amplitudes[self.index(x1, x2)])
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes
            .iter()
            .fold(T::zero(), |a, z| a + norm_sqr(*z))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(Complex::new(T::zero(), T::zero()), |a, (x, y)| {
                a + x.conj() * y
            }))
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        self.inner(other).map(norm_sqr)
    }

    /// Multiplies every amplitude by `e^{iθ}`.
    pub fn with_global_phase(&self, theta: T) -> Self {
        let p = cis(theta);
        Self::from_unitary_image(self.d, self.amplitudes.iter().map(|z| z * p).collect())
    }

    /// Moves both particles by `shift` sites (periodically).
    pub fn translated(&self, shift: isize) -> Self {
        let d = self.d as isize;
        let wrap = |x: usize| ((x as isize - 1 + shift).rem_euclid(d)) as usize + 1;
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.dim()];
        for x1 in 1..=self.d {
            for x2 in 1..=self.d {
                out[self.index(wrap(x1), wrap(x2))] = self.amplitudes[self.index(x1, x2)];
            }
        }
        Self::from_unitary_image(self.d, out)
    }

    /// Amplitudes as a `d × d` matrix indexed `[(x1-1, x2-1)]`.
    pub fn as_matrix(&self) -> DMatrix<Complex<T>> {
        DMatrix::from_row_slice(self.d, self.d, &self.amplitudes)
    }

    /// Probability grid `|ψ(x1, x2)|²`, rows indexed by `x1`.
    pub fn joint_density(&self) -> DMatrix<T> {
        DMatrix::from_row_iterator(self.d, self.d, self.amplitudes.iter().map(|z| norm_sqr(*z)))
    }

    /// Partial trace over the other register.
    pub fn reduce(&self, keep: Register) -> ReducedDensity<T> {
        let m = self.as_matrix();
        let matrix = match keep {
            Register::First => &m * m.adjoint(),
            Register::Second => m.transpose() * m.conjugate(),
        };
        ReducedDensity { d: self.d, matrix }
    }

    /// Spreads of `(x1+x2)/√2` and `(x1-x2)/√2` about their circular means.
    pub fn marginal_variances(&self) -> PairSpreads<T> {
        let density = self.joint_density();
        let d = self.d;
        let coordinate = |sign: i64| {
            let samples = (1..=d)
                .flat_map(|x1| (1..=d).map(move |x2| (x1 as i64 + sign * x2 as i64, (x1, x2))));
            let weighted: Vec<(T, T)> = samples
                .map(|(v, (x1, x2))| (T::lit(v as f64), density[(x1 - 1, x2 - 1)]))
                .collect();
            circular_variance(&weighted, T::from_count(d))
        };
        let half = T::lit(0.5);
        PairSpreads {
            sum: (coordinate(1) * half).sqrt(),
            diff: (coordinate(-1) * half).sqrt(),
        }
    }
}

/// Variance of a distribution on a ring of the given period, measured with
/// minimal-image displacements about its circular mean.
pub fn circular_variance<T: Real>(samples: &[(T, T)], period: T) -> T {
    let two_pi = T::two_pi();
    let (c, s) = samples
        .iter()
        .fold((T::zero(), T::zero()), |(c, s), (x, p)| {
            let a = two_pi * *x / period;
            (c + *p * a.cos(), s + *p * a.sin())
        });
    let mean = s.atan2(c) * period / two_pi;
    let (m1, m2) = samples
        .iter()
        .fold((T::zero(), T::zero()), |(m1, m2), (x, p)| {
            let dx = minimal_image(*x - mean, period);
            (m1 + *p * dx, m2 + *p * dx * dx)
        });
    m2 - m1 * m1
}

/// Standard deviations of the centre-of-mass and relative coordinates,
/// `Δ(x1 ± x2) = std((x1 ± x2)/√2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSpreads<T> {
    pub sum: T,
    pub diff: T,
}

fn check_site(d: usize, x1: usize, x2: usize) -> Result<()> {
    if x1 == 0 || x2 == 0 || x1 > d || x2 > d {
        Err(Error::OutOfRange { x1, x2, d })
    } else {
        Ok(())
    }
}

/// Single-particle density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensity<T: Real> {
    pub d: usize,
    pub matrix: DMatrix<Complex<T>>,
}

impl<T: Real> ReducedDensity<T> {
    /// `U ρ U†`.
    pub fn conjugated_by(&self, u: &DMatrix<Complex<T>>) -> Self {
        Self {
            d: self.d,
            matrix: u * &self.matrix * u.adjoint(),
        }
    }

    pub fn trace(&self) -> T {
        self.matrix
            .diagonal()
            .iter()
            .fold(T::zero(), |a, z| a + z.re)
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> T {
        self.matrix.iter().fold(T::zero(), |a, z| a + norm_sqr(*z))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        T::hermitian_eigenvalues(&self.matrix)
    }

    /// Von Neumann entropy in nats.
    pub fn entropy(&self) -> Result<T> {
        let cutoff = T::lit(ENTROPY_CUTOFF);
        Ok(self
            .eigenvalues()?
            .into_iter()
            .filter(|l| *l > cutoff)
            .fold(T::zero(), |a, l| a - l * l.ln()))
    }

    /// Largest deviation of `ρ` from Hermiticity.
    pub fn hermiticity_defect(&self) -> T {
        let diff = &self.matrix - self.matrix.adjoint();
        diff.iter()
            .fold(T::zero(), |a, z| a.max(norm_sqr(*z).sqrt()))
    }

    /// Trace norm `‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &Self) -> Result<T> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: other.d,
            });
        }
        let diff = &self.matrix - &other.matrix;
        // Symmetrise to strip round-off before the Hermitian solver.
        let herm = (&diff + diff.adjoint()) * Complex::new(T::lit(0.5), T::zero());
        Ok(T::hermitian_eigenvalues(&herm)?
            .into_iter()
            .fold(T::zero(), |a, l| a + l.abs()))
    }

    /// Diagonal of `ρ`: the site occupation probabilities.
    pub fn populations(&self) -> Vec<T> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }
}

/// Discrete double Gaussian pair on the ring.
///
/// `sigma` is the width of the relative coordinate and `big_sigma` that of
/// the sum, matching the continuum convention; both particles are displaced
/// by minimal image about the packet centre `center_sum / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleGaussian<T> {
    pub d: usize,
    pub sigma: T,
    pub big_sigma: T,
    /// Mean of `x1 + x2` in lattice units.
    pub center_sum: T,
    pub boost_k1: T,
    pub boost_k2: T,
}

/// A built Gaussian together with the weight its nearest periodic images
/// would add.
#[derive(Debug, Clone)]
pub struct GaussianState<T: Real> {
    pub state: LatticeState<T>,
    pub tail_weight: T,
}

impl<T: Real> GaussianState<T> {
    /// Threshold on [`GaussianState::tail_weight`] above which the packet is
    /// considered to wrap around the ring.
    pub const WRAP_THRESHOLD: f64 = 1e-6;

    pub fn wraps(&self) -> bool {
        self.tail_weight > T::lit(Self::WRAP_THRESHOLD)
    }
}

impl<T: Real> DoubleGaussian<T> {
    pub fn new(d: usize, sigma: T, big_sigma: T, center_sum: T) -> Self {
        Self {
            d,
            sigma,
            big_sigma,
            center_sum,
            boost_k1: T::zero(),
            boost_k2: T::zero(),
        }
    }

    pub fn with_boosts(mut self, k1: T, k2: T) -> Self {
        self.boost_k1 = k1;
        self.boost_k2 = k2;
        self
    }

    fn envelope(&self, y1: T, y2: T) -> T {
        let u = y1 + y2;
        let v = y1 - y2;
        let four = T::lit(4.0);
        (-(u * u) / (four * self.big_sigma * self.big_sigma)
            - v * v / (four * self.sigma * self.sigma))
            .exp()
    }

    pub fn build(&self) -> Result<GaussianState<T>> {
        if self.d < 4 {
            return Err(Error::Domain {
                what: "site count (need d >= 4)",
                value: self.d as f64,
            });
        }
        positive("sigma", self.sigma)?;
        positive("big_sigma", self.big_sigma)?;
        let period = T::from_count(self.d);
        let centre = self.center_sum / T::lit(2.0);
        let disp = |x: usize| minimal_image(T::from_count(x) - centre, period);

        let mut main = T::zero();
        let mut images = T::zero();
        let state = LatticeState::from_fn(self.d, |x1, x2| {
            let (y1, y2) = (disp(x1), disp(x2));
            let g = self.envelope(y1, y2);
            main += g * g;
            for n1 in -1i32..=1 {
                for n2 in -1i32..=1 {
                    if n1 != 0 || n2 != 0 {
                        let e = self.envelope(
                            y1 + period * T::lit(n1 as f64),
                            y2 + period * T::lit(n2 as f64),
                        );
                        images += e * e;
                    }
                }
            }
            cis(self.boost_k1 * y1 + self.boost_k2 * y2) * g
        })?;
        Ok(GaussianState {
            state,
            tail_weight: images / main,
        })
    }
}
