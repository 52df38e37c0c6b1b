//! The invariant suite behind `pairdyn verify`.

use pairdyn::analytic::{self, si, GaussianPairParams};
use pairdyn::experiments::{self, run_locality, ExperimentResult, LocalityConfig, LATTICE_MASS};
use pairdyn::hamiltonian::{self, h_free, h_linear_tilt, h_onsite_interaction};
use pairdyn::lattice::{DoubleGaussian, Register};
use pairdyn::momentum::{build_psi_k, momentum_grid, momentum_matrix, to_momentum};
use pairdyn::propagator::{evolve_diagonal, ProductPropagator, SpectralPropagator};
use pairdyn::State;
use std::f64::consts::PI;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Must hold; a failure makes `verify` exit nonzero.
    Invariant,
    /// A stated target the model does not meet; reported, never fatal.
    KnownDiscrepancy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub kind: Kind,
    pub value: f64,
    pub bound: Bound,
}

impl Check {
    fn new(name: &'static str, value: f64, bound: Bound) -> Self {
        Self {
            name,
            kind: Kind::Invariant,
            value,
            bound,
        }
    }

    fn known(mut self) -> Self {
        self.kind = Kind::KnownDiscrepancy;
        self
    }

    pub fn holds(&self) -> bool {
        match self.bound {
            Bound::AtMost(b) => self.value <= b,
            Bound::AtLeast(b) => self.value >= b,
        }
    }

    pub fn status(&self) -> &'static str {
        match (self.holds(), self.kind) {
            (true, _) => "pass",
            (false, Kind::Invariant) => "fail",
            (false, Kind::KnownDiscrepancy) => "known_discrepancy",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (op, b) = match self.bound {
            Bound::AtMost(b) => ("<=", b),
            Bound::AtLeast(b) => (">=", b),
        };
        write!(
            f,
            "{:<18} {:<28} {:.3e} {op} {b:.1e}",
            self.status(),
            self.name,
            self.value
        )
    }
}

pub struct Report {
    pub checks: Vec<Check>,
    pub locality: ExperimentResult,
}

impl Report {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| c.status() == "fail").count()
    }
}

fn purity_checks(out: &mut Vec<Check>) -> pairdyn::Result<()> {
    let narrow: State = DoubleGaussian::new(40, 2.0, 0.01, 40.0).build()?.state;
    let gap = (narrow.reduce(Register::First).purity() - analytic::purity(2.0, 0.01)?).abs();
    out.push(Check::new("purity_narrow_pair", gap, Bound::AtMost(1e-2)).known());

    let mut worst: f64 = 0.0;
    for sigma in [1.0, 1.75, 2.5, 3.25, 4.0] {
        for big_sigma in [1.0, 2.0, 3.0, 4.0] {
            let g = DoubleGaussian::new(40, sigma, big_sigma, 40.0).build()?;
            let p = g.state.reduce(Register::First).purity();
            worst = worst.max((p - analytic::purity::<f64>(sigma, big_sigma)?).abs());
        }
    }
    out.push(Check::new(
        "purity_contained_pairs",
        worst,
        Bound::AtMost(1e-2),
    ));
    Ok(())
}

fn spread_checks(out: &mut Vec<Check>) -> pairdyn::Result<()> {
    let (d, sigma) = (40, 4.0);
    let g = DoubleGaussian::new(d, sigma, sigma, 40.0).build()?;
    let m = to_momentum(&g.state);
    let ks = momentum_grid::<f64>(d);
    let mut outside = 0.0;
    for (a, k1) in ks.iter().enumerate() {
        for (b, k2) in ks.iter().enumerate() {
            if k1.abs() > PI / 4.0 || k2.abs() > PI / 4.0 {
                outside += m.amplitudes()[a * d + b].norm_sqr();
            }
        }
    }
    out.push(Check::new(
        "wide_packet_band_weight",
        outside,
        Bound::AtMost(1e-3),
    ));
    let tau = analytic::lifetime(sigma, LATTICE_MASS, 1.0)?;
    let h = hamiltonian::single_particle_hopping(d)?;
    let evolved = ProductPropagator::new(&h, &h)?.evolve(&g.state, tau)?;
    let ratio = evolved.marginal_variances().diff / g.state.marginal_variances().diff;
    out.push(Check::new(
        "spread_factor_gap",
        (ratio / 2f64.sqrt() - 1.0).abs(),
        Bound::AtMost(0.10),
    ));
    Ok(())
}

fn thermal_checks(out: &mut Vec<Check>) -> pairdyn::Result<()> {
    let params = GaussianPairParams::natural(2.0, 0.5);
    let kset = experiments::default_kset();
    let mut worst: f64 = 0.0;
    for temp in [1.0, 2.0, 4.0] {
        for t in [0.5, 1.0, 1.5, 2.0, 2.5, 3.0] {
            let mixture = analytic::thermal_relative_variance(&params, &kset, temp, t)?;
            let law = 2.0 * analytic::thermal_relative_spread(2.0, 1.0, 1.0, 1.0, temp, t)?.powi(2);
            worst = worst.max((mixture / law - 1.0).abs());
        }
    }
    out.push(Check::new("thermal_law_gap", worst, Bound::AtMost(0.02)).known());
    let zero = (0..=6)
        .map(|i| {
            let t = 0.5 * i as f64;
            let mixture = analytic::thermal_relative_variance(&params, &kset, 0.0, t)?;
            let pure = 2.0 * analytic::free_spread(2.0, 1.0, 1.0, t)?.powi(2);
            Ok((mixture / pure - 1.0).abs())
        })
        .collect::<pairdyn::Result<Vec<f64>>>()?;
    out.push(Check::new(
        "thermal_zero_limit",
        zero.iter().fold(0.0, |a, b| a.max(*b)),
        Bound::AtMost(1e-12),
    ));

    let tc = analytic::critical_temperature(1e-7, si::ELECTRON_MASS, si::HBAR, si::KB)?;
    out.push(Check::new(
        "critical_temperature_gap",
        (tc / 0.088 - 1.0).abs(),
        Bound::AtMost(0.02),
    ));
    Ok(())
}

fn momentum_checks(out: &mut Vec<Check>) -> pairdyn::Result<()> {
    let gamma = -2.5;
    let (mut residual, mut periodic): (f64, f64) = (0.0, 0.0);
    for d in (2..=40).step_by(2) {
        let h = h_onsite_interaction::<f64>(d, gamma)?;
        for n in 0..d {
            let k = 2.0 * PI * n as f64 / d as f64;
            let psi = build_psi_k(d, k)?;
            let hv = h.apply(&psi)?;
            let r: f64 = hv
                .iter()
                .zip(psi.amplitudes())
                .map(|(a, b)| (a - b * gamma).norm_sqr())
                .sum();
            residual = residual.max(r.sqrt());
            let shifted = build_psi_k(d, k + 2.0 * PI)?;
            for (a, b) in psi.amplitudes().iter().zip(shifted.amplitudes()) {
                periodic = periodic.max((a - b).norm());
            }
        }
    }
    out.push(Check::new(
        "bound_pair_eigen_residual",
        residual,
        Bound::AtMost(1e-10),
    ));
    out.push(Check::new(
        "pair_momentum_periodicity",
        periodic,
        Bound::AtMost(1e-12),
    ));

    let (d, eta) = (40, 0.4);
    let tilt = h_linear_tilt::<f64>(d, eta)?;
    let k0 = 2.0 * PI * 5.0 / d as f64;
    let mut infidelity: f64 = 0.0;
    for m in 1..=12 {
        let t = PI * m as f64 / (d as f64 * eta);
        let moved = evolve_diagonal(&tilt, &build_psi_k(d, k0)?, t)?;
        infidelity = infidelity.max(1.0 - moved.fidelity(&build_psi_k(d, k0 - 2.0 * eta * t)?)?);
    }
    out.push(Check::new(
        "tilt_momentum_shift",
        infidelity,
        Bound::AtMost(1e-9),
    ));

    let d = 8;
    let hk = momentum_matrix(&h_onsite_interaction::<f64>(d, gamma)?);
    let mut element: f64 = 0.0;
    for row in 0..d * d {
        for col in 0..d * d {
            let conserves = (row / d + row % d) % d == (col / d + col % d) % d;
            let want = if conserves { gamma / d as f64 } else { 0.0 };
            let z = hk[(row, col)];
            element = element.max((z.re - want).hypot(z.im));
        }
    }
    out.push(Check::new(
        "interaction_momentum_elements",
        element,
        Bound::AtMost(1e-12),
    ));
    Ok(())
}

fn unitarity_checks(out: &mut Vec<Check>) -> pairdyn::Result<()> {
    let d = 16;
    let h = ((h_free::<f64>(d)? + h_onsite_interaction(d, -2.5)?)? + h_linear_tilt(d, 0.4)?)?;
    out.push(Check::new(
        "hamiltonian_symmetry",
        h.hermiticity_defect(),
        Bound::AtMost(1e-14),
    ));
    let prop = SpectralPropagator::new(&h)?;
    let start: State = DoubleGaussian::new(d, 1.5, 0.5, d as f64).build()?.state;
    let prepared = prop.prepare(&start)?;
    let mut drift: f64 = 0.0;
    for i in 0..=20 {
        drift = drift.max((prepared.at(i as f64 * 2.5).norm_sqr() - 1.0).abs());
    }
    out.push(Check::new("norm_drift", drift, Bound::AtMost(1e-10)));
    Ok(())
}

pub fn run() -> pairdyn::Result<Report> {
    let mut checks = Vec::new();
    purity_checks(&mut checks)?;
    spread_checks(&mut checks)?;
    thermal_checks(&mut checks)?;
    momentum_checks(&mut checks)?;
    unitarity_checks(&mut checks)?;

    let locality = run_locality(&LocalityConfig::default())?;
    let get = |k: &str| -> f64 {
        locality
            .summary_value(k)
            .and_then(|v| v.parse().ok())
            .unwrap_or(f64::NAN)
    };
    checks.push(Check::new(
        "trace_dev_product",
        get("max_trace_dev_product"),
        Bound::AtMost(1e-10),
    ));
    checks.push(Check::new(
        "entropy_dev_product",
        get("max_entropy_dev_product"),
        Bound::AtMost(1e-9),
    ));
    checks.push(Check::new(
        "trace_dev_coupled",
        get("max_trace_dev_coupled"),
        Bound::AtLeast(1e-3),
    ));
    checks.push(Check::new(
        "entropy_dev_coupled",
        get("max_entropy_dev_coupled"),
        Bound::AtLeast(1e-3),
    ));
    Ok(Report { checks, locality })
}
