//! Coarse-grained joint detectors, separate single-particle detectors,
//! point probes and site densities.
//!
//! Cells are indexed from zero. With offset `o`, cell `j` of a bank of width
//! `Δ` covers sites `jΔ+1+o ..= (j+1)Δ+o`, wrapped onto the ring.

use crate::error::{Error, Result};
use crate::lattice::{LatticeState, Register};
use crate::scalar::{norm_sqr, Real};

/// A run of consecutive ring sites, possibly wrapping past `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SiteRange {
    d: usize,
    start: usize,
    len: usize,
}

impl SiteRange {
    /// `len` sites beginning at `start` (1-based; any integer, wrapped).
    pub fn new(d: usize, start: isize, len: usize) -> Result<Self> {
        if d == 0 || len == 0 || len > d {
            return Err(Error::Domain {
                what: "site range length",
                value: len as f64,
            });
        }
        let start = ((start - 1).rem_euclid(d as isize) + 1) as usize;
        Ok(Self { d, start, len })
    }

    /// The inclusive interval `first..=last` (wrapping when `last < first`).
    pub fn inclusive(d: usize, first: usize, last: usize) -> Result<Self> {
        if first == 0 || first > d || last == 0 || last > d {
            return Err(Error::OutOfRange {
                x1: first,
                x2: last,
                d,
            });
        }
        let len = if last >= first {
            last - first + 1
        } else {
            d - first + last + 1
        };
        Self::new(d, first as isize, len)
    }

    pub fn single(d: usize, x: usize) -> Result<Self> {
        Self::inclusive(d, x, x)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn first(&self) -> usize {
        self.start
    }

    pub fn last(&self) -> usize {
        (self.start + self.len - 2) % self.d + 1
    }

    pub fn contains(&self, x: usize) -> bool {
        (x + self.d - self.start) % self.d < self.len
    }

    pub fn sites(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).map(move |i| (self.start - 1 + i) % self.d + 1)
    }
}

/// Detector that clicks when the first particle is in `first` and the
/// second in `second`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JointWindow {
    pub first: SiteRange,
    pub second: SiteRange,
}

impl JointWindow {
    /// Both particles inside the same range.
    pub fn cell(range: SiteRange) -> Self {
        Self {
            first: range,
            second: range,
        }
    }

    /// First particle exactly at `x1`, second exactly at `x2`.
    pub fn point(d: usize, x1: usize, x2: usize) -> Result<Self> {
        Ok(Self {
            first: SiteRange::single(d, x1).map_err(|_| Error::OutOfRange { x1, x2, d })?,
            second: SiteRange::single(d, x2).map_err(|_| Error::OutOfRange { x1, x2, d })?,
        })
    }

    /// `⟨ψ|D|ψ⟩`.
    pub fn expectation<T: Real>(&self, state: &LatticeState<T>) -> Result<T> {
        let d = state.d();
        if self.first.d != d || self.second.d != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.first.d,
            });
        }
        let amps = state.amplitudes();
        let mut p = T::zero();
        for x1 in self.first.sites() {
            for x2 in self.second.sites() {
                p += norm_sqr(amps[(x1 - 1) * d + (x2 - 1)]);
            }
        }
        Ok(p)
    }
}

/// Partition of the ring into `d/Δ` cells of width `Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DetectorBank {
    d: usize,
    delta: usize,
    offset: isize,
}

impl DetectorBank {
    pub fn new(d: usize, delta: usize) -> Result<Self> {
        Self::with_offset(d, delta, 0)
    }

    pub fn with_offset(d: usize, delta: usize, offset: isize) -> Result<Self> {
        if delta == 0 || d == 0 || !d.is_multiple_of(delta) {
            return Err(Error::Domain {
                what: "cell width (must divide the site count)",
                value: delta as f64,
            });
        }
        Ok(Self { d, delta, offset })
    }

    /// Cells centred on multiples of `Δ`; requires even `Δ`.
    pub fn centered(d: usize, delta: usize) -> Result<Self> {
        if !delta.is_multiple_of(2) {
            return Err(Error::Domain {
                what: "cell width for a centred bank (must be even)",
                value: delta as f64,
            });
        }
        Self::with_offset(d, delta, -(delta as isize) / 2)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn offset(&self) -> isize {
        self.offset
    }

    pub fn cells(&self) -> usize {
        self.d / self.delta
    }

    pub fn cell(&self, j: usize) -> Result<SiteRange> {
        if j >= self.cells() {
            return Err(Error::InvalidCell {
                j,
                cells: self.cells(),
            });
        }
        SiteRange::new(
            self.d,
            (j * self.delta + 1) as isize + self.offset,
            self.delta,
        )
    }

    /// Cell containing site `x`.
    pub fn cell_of(&self, x: usize) -> usize {
        let shifted = (x as isize - 1 - self.offset).rem_euclid(self.d as isize) as usize;
        shifted / self.delta
    }

    fn check(&self, d: usize) -> Result<()> {
        if d != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: d,
            });
        }
        Ok(())
    }
}

/// `⟨D_j⟩`: probability that both particles are in cell `j`.
pub fn joint_expectation<T: Real>(
    state: &LatticeState<T>,
    bank: &DetectorBank,
    j: usize,
) -> Result<T> {
    bank.check(state.d())?;
    JointWindow::cell(bank.cell(j)?).expectation(state)
}

/// `⟨D_j⟩` for every cell.
pub fn joint_expectations<T: Real>(state: &LatticeState<T>, bank: &DetectorBank) -> Result<Vec<T>> {
    bank.check(state.d())?;
    let d = state.d();
    let mut out = vec![T::zero(); bank.cells()];
    for x1 in 1..=d {
        let c = bank.cell_of(x1);
        for x2 in 1..=d {
            if bank.cell_of(x2) == c {
                out[c] += norm_sqr(state.amplitudes()[(x1 - 1) * d + (x2 - 1)]);
            }
        }
    }
    Ok(out)
}

/// Probability that the particles sit in different cells, which no joint
/// detector registers.
pub fn cross_cell_mass<T: Real>(state: &LatticeState<T>, bank: &DetectorBank) -> Result<T> {
    bank.check(state.d())?;
    let d = state.d();
    let mut p = T::zero();
    for x1 in 1..=d {
        for x2 in 1..=d {
            if bank.cell_of(x1) != bank.cell_of(x2) {
                p += norm_sqr(state.amplitudes()[(x1 - 1) * d + (x2 - 1)]);
            }
        }
    }
    Ok(p)
}

/// `⟨D^(a)_j + D^(b)_j⟩` summed over the joint density.
pub fn separate_expectation<T: Real>(
    state: &LatticeState<T>,
    bank: &DetectorBank,
    j: usize,
) -> Result<T> {
    bank.check(state.d())?;
    let cell = bank.cell(j)?;
    let d = state.d();
    let mut n = T::zero();
    for x1 in 1..=d {
        for x2 in 1..=d {
            let hits = usize::from(cell.contains(x1)) + usize::from(cell.contains(x2));
            if hits > 0 {
                n += norm_sqr(state.amplitudes()[(x1 - 1) * d + (x2 - 1)]) * T::from_count(hits);
            }
        }
    }
    Ok(n)
}

/// `Tr{D^(a)_j ρ_a} + Tr{D^(b)_j ρ_b}` from the reduced states.
pub fn separate_expectation_reduced<T: Real>(
    state: &LatticeState<T>,
    bank: &DetectorBank,
    j: usize,
) -> Result<T> {
    bank.check(state.d())?;
    let cell = bank.cell(j)?;
    let mut n = T::zero();
    for reg in [Register::First, Register::Second] {
        let pops = state.reduce(reg).populations();
        for x in cell.sites() {
            n += pops[x - 1];
        }
    }
    Ok(n)
}

/// `|ψ(x1, x2)|²`.
pub fn joint_point_probability<T: Real>(
    state: &LatticeState<T>,
    x1: usize,
    x2: usize,
) -> Result<T> {
    Ok(norm_sqr(state.amplitude(x1, x2)?))
}

/// `⟨a†_x a_x⟩ + ⟨b†_x b_x⟩` for `x = 1..=d`.
pub fn site_density<T: Real>(state: &LatticeState<T>) -> Vec<T> {
    let d = state.d();
    let mut rho = vec![T::zero(); d];
    for x1 in 0..d {
        for x2 in 0..d {
            let p = norm_sqr(state.amplitudes()[x1 * d + x2]);
            rho[x1] += p;
            rho[x2] += p;
        }
    }
    rho
}
