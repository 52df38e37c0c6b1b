//! Closed-form continuum results for the double Gaussian pair and the
//! two-mode Mach–Zehnder amplitude algebra.
//!
//! Widths follow the continuum convention: `sigma` is the width of the
//! relative coordinate `x1 - x2` and `big_sigma` the width of the sum
//! `x1 + x2`. A state `exp(-(x1-x2)^2/4σ²) exp(-(x1+x2)^2/4Σ²)` has
//! `std(x1 - x2) = σ` and `std(x1 + x2) = Σ`.

use crate::error::{positive, Error, Result};
use crate::scalar::{cis, norm_sqr, Real};
use num_complex::Complex;

/// CODATA 2018 constants in SI units.
pub mod si {
    /// Reduced Planck constant, J s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Boltzmann constant, J / K.
    pub const KB: f64 = 1.380_649e-23;
    /// Electron rest mass, kg.
    pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
}

/// Parameters of a (possibly boosted) continuum double Gaussian pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPairParams<T> {
    /// Relative-coordinate width σ.
    pub sigma: T,
    /// Centre-of-mass width Σ.
    pub big_sigma: T,
    /// Mass of each particle.
    pub mass: T,
    pub hbar: T,
    pub kb: T,
    /// Mean of `x1 + x2`.
    pub center_sum: T,
    pub boost_k1: T,
    pub boost_k2: T,
}

impl<T: Real> GaussianPairParams<T> {
    /// Unboosted pair centred at the origin in natural units (ħ = m = k_B = 1).
    pub fn natural(sigma: T, big_sigma: T) -> Self {
        Self {
            sigma,
            big_sigma,
            mass: T::one(),
            hbar: T::one(),
            kb: T::one(),
            center_sum: T::zero(),
            boost_k1: T::zero(),
            boost_k2: T::zero(),
        }
    }

    pub fn with_boosts(mut self, k1: T, k2: T) -> Self {
        self.boost_k1 = k1;
        self.boost_k2 = k2;
        self
    }

    pub fn validate(&self) -> Result<()> {
        positive("sigma", self.sigma)?;
        positive("big_sigma", self.big_sigma)?;
        positive("mass", self.mass)?;
        positive("hbar", self.hbar)?;
        positive("kb", self.kb)
    }

    pub fn purity(&self) -> Result<T> {
        purity(self.sigma, self.big_sigma)
    }

    pub fn lifetime(&self) -> Result<T> {
        lifetime(self.sigma, self.mass, self.hbar)
    }
}

/// Standard deviation of a freely spreading Gaussian of width `w`:
/// `(1/√2) √(w² + ħ²t²/(m²w²))`.
pub fn free_spread<T: Real>(width: T, mass: T, hbar: T, t: T) -> Result<T> {
    positive("width", width)?;
    positive("mass", mass)?;
    positive("hbar", hbar)?;
    let growth = hbar * t / (mass * width);
    Ok(((width * width + growth * growth) / T::lit(2.0)).sqrt())
}

/// Single-particle purity `2σΣ/(σ²+Σ²)` of the double Gaussian.
pub fn purity<T: Real>(sigma: T, big_sigma: T) -> Result<T> {
    positive("sigma", sigma)?;
    positive("big_sigma", big_sigma)?;
    Ok(T::lit(2.0) * sigma * big_sigma / (sigma * sigma + big_sigma * big_sigma))
}

/// Composite lifetime τ = mσ²/ħ.
pub fn lifetime<T: Real>(sigma: T, mass: T, hbar: T) -> Result<T> {
    positive("sigma", sigma)?;
    positive("mass", mass)?;
    positive("hbar", hbar)?;
    Ok(mass * sigma * sigma / hbar)
}

/// Centre-of-mass spread reached at the lifetime, `(1/√2)√((Σ⁴+σ⁴)/Σ²)`.
pub fn cm_spread_at_lifetime<T: Real>(sigma: T, big_sigma: T) -> Result<T> {
    positive("sigma", sigma)?;
    positive("big_sigma", big_sigma)?;
    let s2 = sigma * sigma;
    let b2 = big_sigma * big_sigma;
    Ok(((s2 * s2 + b2 * b2) / b2 / T::lit(2.0)).sqrt())
}

/// Same quantity written through the initial size δ = σ/√2 and the purity:
/// `(δ/P)√(4 − 2P²)`.
pub fn cm_spread_from_purity<T: Real>(sigma: T, big_sigma: T) -> Result<T> {
    let p = purity(sigma, big_sigma)?;
    let delta = sigma / T::lit(2.0).sqrt();
    Ok(delta / p * (T::lit(4.0) - T::lit(2.0) * p * p).sqrt())
}

/// Thermally broadened relative spread
/// `(1/√2)√(σ² + (ħ²/(m²σ²) + k_B T/m) t²)`.
pub fn thermal_relative_spread<T: Real>(
    sigma: T,
    mass: T,
    hbar: T,
    kb: T,
    temperature: T,
    t: T,
) -> Result<T> {
    positive("sigma", sigma)?;
    positive("mass", mass)?;
    positive("hbar", hbar)?;
    positive("kb", kb)?;
    if temperature < T::zero() {
        return Err(Error::Domain {
            what: "temperature",
            value: temperature.to_f64_lossy(),
        });
    }
    let rate = hbar * hbar / (mass * mass * sigma * sigma) + kb * temperature / mass;
    Ok(((sigma * sigma + rate * t * t) / T::lit(2.0)).sqrt())
}

/// Temperature ħ²/(m k_B σ²) below which thermal spreading stays smaller
/// than the quantum one.
pub fn critical_temperature<T: Real>(sigma: T, mass: T, hbar: T, kb: T) -> Result<T> {
    positive("sigma", sigma)?;
    positive("mass", mass)?;
    positive("hbar", hbar)?;
    positive("kb", kb)?;
    Ok(hbar * hbar / (mass * kb * sigma * sigma))
}

/// Discrete Maxwell weights `exp(-ħ²k²/(2 k_B T)) / Z`, normalised over the
/// given momentum set.
///
/// At `T = 0` the weight is shared equally by the `k = 0` entries; a set
/// without such an entry is rejected.
pub fn maxwell_weights<T: Real>(kset: &[T], temperature: T, hbar: T, kb: T) -> Result<Vec<T>> {
    if kset.is_empty() {
        return Err(Error::Empty("momentum set"));
    }
    positive("hbar", hbar)?;
    positive("kb", kb)?;
    if !(temperature >= T::zero()) {
        return Err(Error::Domain {
            what: "temperature",
            value: temperature.to_f64_lossy(),
        });
    }
    if temperature == T::zero() {
        let zeros = kset.iter().filter(|k| **k == T::zero()).count();
        if zeros == 0 {
            return Err(Error::Domain {
                what: "temperature (no k = 0 entry for the T = 0 limit)",
                value: 0.0,
            });
        }
        let w = T::one() / T::from_count(zeros);
        return Ok(kset
            .iter()
            .map(|k| if *k == T::zero() { w } else { T::zero() })
            .collect());
    }
    let scale = hbar * hbar / (T::lit(2.0) * kb * temperature);
    // Shift by the smallest exponent so the largest weight is exactly one.
    let min_k2 = kset
        .iter()
        .map(|k| *k * *k)
        .fold(T::max_value().unwrap(), |a, b| a.min(b));
    let raw: Vec<T> = kset
        .iter()
        .map(|k| (-(scale * (*k * *k - min_k2))).exp())
        .collect();
    let z = raw.iter().fold(T::zero(), |a, b| a + *b);
    Ok(raw.into_iter().map(|w| w / z).collect())
}

/// Rectangular sampling of the (x1, x2) plane, row-major in x1.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneGrid<T> {
    pub x1: Vec<T>,
    pub x2: Vec<T>,
}

impl<T: Real> PlaneGrid<T> {
    /// `n × n` uniform grid on `[-half_width, half_width]²` shifted by `center`.
    pub fn square(center: T, half_width: T, n: usize) -> Self {
        let axis: Vec<T> = (0..n)
            .map(|i| {
                center - half_width
                    + T::lit(2.0) * half_width * T::from_count(i) / T::from_count(n - 1)
            })
            .collect();
        Self {
            x1: axis.clone(),
            x2: axis,
        }
    }

    pub fn len(&self) -> usize {
        self.x1.len() * self.x2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell area, assuming uniform spacing along both axes.
    pub fn cell_area(&self) -> T {
        let step = |a: &[T]| if a.len() > 1 { a[1] - a[0] } else { T::one() };
        step(&self.x1) * step(&self.x2)
    }

    pub fn points(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.x1
            .iter()
            .flat_map(move |a| self.x2.iter().map(move |b| (*a, *b)))
    }
}

fn gaussian_pdf<T: Real>(x: T, mean: T, var: T) -> T {
    let z = x - mean;
    (-(z * z) / (T::lit(2.0) * var)).exp() / (T::two_pi() * var).sqrt()
}

/// Variances of `x1 - x2` and `x1 + x2` for a pair evolved freely for time
/// `t`. Both coordinates carry the effective mass m/2.
pub fn pair_coordinate_variances<T: Real>(p: &GaussianPairParams<T>, t: T) -> (T, T) {
    let drift = |w: T| {
        let g = p.hbar * t / (p.mass * w);
        w * w + g * g
    };
    (drift(p.sigma), drift(p.big_sigma))
}

/// Thermal mixture density `Σ μ(k1)μ(k2)|ψ_{k1,k2}(x1,x2,t)|²` on `grid`.
///
/// Each boosted component is propagated in closed form: the relative and
/// sum Gaussians spread independently and drift with velocities
/// `ħ(k1 ∓ k2)/m`.
pub fn thermal_joint_density<T: Real>(
    params: &GaussianPairParams<T>,
    kset: &[T],
    temperature: T,
    t: T,
    grid: &PlaneGrid<T>,
) -> Result<Vec<T>> {
    params.validate()?;
    if grid.is_empty() {
        return Err(Error::Empty("grid"));
    }
    let weights = maxwell_weights(kset, temperature, params.hbar, params.kb)?;
    let (var_rel, var_sum) = pair_coordinate_variances(params, t);
    let velocity = params.hbar / params.mass;

    // Components with negligible joint weight are skipped.
    let cutoff = T::lit(1e-300);
    let mut components = Vec::new();
    for (k1, w1) in kset.iter().zip(&weights) {
        for (k2, w2) in kset.iter().zip(&weights) {
            let w = *w1 * *w2;
            if w <= cutoff {
                continue;
            }
            let k1 = *k1 + params.boost_k1;
            let k2 = *k2 + params.boost_k2;
            let rel_mean = velocity * (k1 - k2) * t;
            let sum_mean = params.center_sum + velocity * (k1 + k2) * t;
            components.push((w, rel_mean, sum_mean));
        }
    }

    let two = T::lit(2.0);
    Ok(grid
        .points()
        .map(|(x1, x2)| {
            let r = x1 - x2;
            let u = x1 + x2;
            components.iter().fold(T::zero(), |acc, (w, rm, sm)| {
                acc + *w * two * gaussian_pdf(r, *rm, var_rel) * gaussian_pdf(u, *sm, var_sum)
            })
        })
        .collect())
}

/// Exact variance of `x1 - x2` in the thermal mixture: the free spreading of
/// each component plus the spread of the drift velocities.
pub fn thermal_relative_variance<T: Real>(
    params: &GaussianPairParams<T>,
    kset: &[T],
    temperature: T,
    t: T,
) -> Result<T> {
    params.validate()?;
    let weights = maxwell_weights(kset, temperature, params.hbar, params.kb)?;
    let (var_rel, _) = pair_coordinate_variances(params, t);
    let mean_k = kset
        .iter()
        .zip(&weights)
        .fold(T::zero(), |a, (k, w)| a + *k * *w);
    let var_k = kset.iter().zip(&weights).fold(T::zero(), |a, (k, w)| {
        a + (*k - mean_k) * (*k - mean_k) * *w
    });
    let v = params.hbar * t / params.mass;
    // k1 - k2 for iid draws has twice the single-draw variance.
    Ok(var_rel + T::lit(2.0) * var_k * v * v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MziMode {
    Single,
    IndependentPair,
    BoundPair,
}

/// Detection event; `D1D2` means the first particle at D1 and the second at D2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MziEvent {
    D1,
    D2,
    D1D1,
    D1D2,
    D2D1,
    D2D2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MziAmplitudeSet<T> {
    pub mode: MziMode,
    pub phi: T,
    amplitudes: Vec<(MziEvent, Complex<T>)>,
}

impl<T: Real> MziAmplitudeSet<T> {
    pub fn amplitude(&self, event: MziEvent) -> Result<Complex<T>> {
        self.amplitudes
            .iter()
            .find(|(e, _)| *e == event)
            .map(|(_, a)| *a)
            .ok_or_else(|| {
                Error::Unsupported(format!("{event:?} amplitude in {:?} mode", self.mode))
            })
    }

    pub fn probability(&self, event: MziEvent) -> Result<T> {
        self.amplitude(event).map(norm_sqr)
    }

    pub fn events(&self) -> impl Iterator<Item = MziEvent> + '_ {
        self.amplitudes.iter().map(|(e, _)| *e)
    }

    pub fn total_probability(&self) -> T {
        self.amplitudes
            .iter()
            .fold(T::zero(), |a, (_, z)| a + norm_sqr(*z))
    }
}

/// Two-mode interferometer amplitudes with a 50/50 splitter whose reflection
/// contributes a factor `i`.
///
/// Bound pairs only expose the `D1×D1` amplitude.
pub fn mzi_amplitudes<T: Real>(mode: MziMode, phi: T) -> MziAmplitudeSet<T> {
    let one = Complex::new(T::one(), T::zero());
    let i = Complex::new(T::zero(), T::one());
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    let e1 = cis(phi);
    let e2 = cis(phi + phi);
    let two_e1 = e1 * T::lit(2.0);
    let amplitudes = match mode {
        MziMode::Single => vec![
            (MziEvent::D1, i * (one + e1) * half),
            (MziEvent::D2, (one - e1) * half),
        ],
        MziMode::IndependentPair => {
            let cross = i * (one - e2) * quarter;
            vec![
                (MziEvent::D1D1, -(one + two_e1 + e2) * quarter),
                (MziEvent::D1D2, cross),
                (MziEvent::D2D1, cross),
                (MziEvent::D2D2, (one - two_e1 + e2) * quarter),
            ]
        }
        MziMode::BoundPair => vec![(MziEvent::D1D1, -(one + e2) * quarter)],
    };
    MziAmplitudeSet {
        mode,
        phi,
        amplitudes,
    }
}
