//! Drivers for the free-spreading, thermalization, interferometer and Bloch
//! experiments, and the no-signalling, entropy and factorization checks.
//!
//! Everything here runs in `f64`. Drivers return an [`ExperimentResult`]:
//! named tables of observables against one abscissa, optional 2D grids,
//! and summary lines. Results are deterministic for fixed inputs; timings are
//! kept apart so they never leak into data files.

use crate::analytic::{self, GaussianPairParams, PlaneGrid};
use crate::detectors::{self, DetectorBank, JointWindow};
use crate::error::{Error, Result};
use crate::fourier;
use crate::hamiltonian::{self, HamiltonianOperator};
use crate::lattice::{DoubleGaussian, LatticeState, Register};
use crate::propagator::{
    apply_phase, find_recurrence_time, ProductPropagator, RecurrenceScan, SingleParticlePropagator,
    SpectralPropagator,
};
use crate::scalar::minimal_image;
use nalgebra::DMatrix;
use num_complex::Complex;
use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

/// Single-particle mass matching the lattice dispersion `−2cos k ≈ −2 + k²`.
pub const LATTICE_MASS: f64 = 0.5;

/// Ring size used by every preset.
pub const RING: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    FreeSpread,
    Thermalization,
    Mzi,
    Bloch,
    NoSignalling,
    EntropyConservation,
    Factorization,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExperimentKind::FreeSpread => "free_spread",
            ExperimentKind::Thermalization => "thermalization",
            ExperimentKind::Mzi => "mzi",
            ExperimentKind::Bloch => "bloch",
            ExperimentKind::NoSignalling => "no_signalling",
            ExperimentKind::EntropyConservation => "entropy_conservation",
            ExperimentKind::Factorization => "factorization",
        };
        f.write_str(s)
    }
}

/// Observables sampled along one abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub abscissa: String,
    pub columns: Vec<String>,
    pub rows: Vec<(f64, Vec<f64>)>,
}

impl Table {
    pub fn new(
        abscissa: impl Into<String>,
        columns: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        Self {
            abscissa: abscissa.into(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    /// Appends a row; abscissae must increase strictly and every column be
    /// present.
    pub fn push(&mut self, x: f64, values: Vec<f64>) -> Result<()> {
        if values.len() != self.columns.len() {
            return Err(Error::DimensionMismatch {
                expected: self.columns.len(),
                got: values.len(),
            });
        }
        if let Some((last, _)) = self.rows.last() {
            if !(x > *last) {
                return Err(Error::Domain {
                    what: "abscissa (must increase strictly)",
                    value: x,
                });
            }
        }
        self.rows.push((x, values));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn abscissae(&self) -> Vec<f64> {
        self.rows.iter().map(|(x, _)| *x).collect()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|(_, v)| v[i]).collect())
    }
}

/// Values on a rectangular `x × y` mesh, row-major in `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub x_label: String,
    pub y_label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub values: Vec<f64>,
}

impl Grid {
    pub fn new(
        x_label: &str,
        y_label: &str,
        x: Vec<f64>,
        y: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if values.len() != x.len() * y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len() * y.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            x_label: x_label.into(),
            y_label: y_label.into(),
            x,
            y,
            values,
        })
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.y.len() + j]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub kind: ExperimentKind,
    /// Input record, in a fixed order.
    pub parameters: Vec<(String, String)>,
    pub tables: Vec<(String, Table)>,
    pub grids: Vec<(String, Grid)>,
    /// Derived findings such as extracted periods.
    pub summary: Vec<(String, String)>,
    pub warnings: Vec<String>,
    /// Wall-clock seconds per stage; never part of the data.
    pub timings: Vec<(String, f64)>,
}

impl ExperimentResult {
    fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            parameters: Vec::new(),
            tables: Vec::new(),
            grids: Vec::new(),
            summary: Vec::new(),
            warnings: Vec::new(),
            timings: Vec::new(),
        }
    }

    fn param(&mut self, key: &str, value: impl fmt::Display) {
        self.parameters.push((key.into(), value.to_string()));
    }

    fn note(&mut self, key: &str, value: impl fmt::Display) {
        self.summary.push((key.into(), value.to_string()));
    }

    fn timed<R>(&mut self, stage: &str, f: impl FnOnce() -> R) -> R {
        let start = Instant::now();
        let out = f();
        self.timings
            .push((stage.into(), start.elapsed().as_secs_f64()));
        out
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn grid(&self, name: &str) -> Option<&Grid> {
        self.grids.iter().find(|(n, _)| n == name).map(|(_, g)| g)
    }

    pub fn summary_value(&self, key: &str) -> Option<&str> {
        self.summary
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

/// Uniform samples `start + k·(end−start)/n`, `k = 0..n` (end excluded).
pub fn periodic_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| start + (end - start) * k as f64 / n as f64)
        .collect()
}

/// Uniform samples including both ends.
pub fn closed_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|k| start + (end - start) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Confirms the period extractor recovers a pure tone of `cycles` cycles
/// over `n` samples.
pub fn fourier_self_test(n: usize, cycles: usize) -> Result<()> {
    let tone: Vec<f64> = (0..n)
        .map(|k| (2.0 * PI * cycles as f64 * k as f64 / n as f64 + 0.3).cos())
        .collect();
    let got = fourier::dominant_cycles(&tone);
    if got.abs_diff(cycles) <= 1 {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "period extraction self-test failed: {cycles} cycles over {n} samples read as {got}"
        )))
    }
}

/// Initial conditions shared by the interferometer and Bloch runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// Double Gaussian with σ = 2, Σ = 0.01.
    Entangled,
    /// Double Gaussian with σ = Σ = 0.01: both particles on one site.
    Separable,
    /// Both particles on one site, with on-site interaction switched on.
    Interacting,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Entangled, Preset::Separable, Preset::Interacting];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Entangled => "entangled",
            Preset::Separable => "separable",
            Preset::Interacting => "interacting",
        }
    }

    pub fn widths(self) -> Option<(f64, f64)> {
        match self {
            Preset::Entangled => Some((2.0, 0.01)),
            Preset::Separable => Some((0.01, 0.01)),
            Preset::Interacting => None,
        }
    }

    /// Initial state with `x1 + x2` centred on `center_sum`.
    pub fn state(self, d: usize, center_sum: f64) -> Result<LatticeState<f64>> {
        match self.widths() {
            Some((s, b)) => Ok(DoubleGaussian::new(d, s, b, center_sum).build()?.state),
            None => {
                let site = (center_sum / 2.0).round() as isize;
                let x = ((site - 1).rem_euclid(d as isize) + 1) as usize;
                LatticeState::point_pair(d, x, x)
            }
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Unsupported(format!("unknown preset '{s}'")))
    }
}

fn pair_hamiltonian(d: usize, gamma: f64, eta: f64) -> Result<HamiltonianOperator<f64>> {
    let mut h = hamiltonian::h_free(d)?;
    if gamma != 0.0 {
        h = (h + hamiltonian::h_onsite_interaction(d, gamma)?)?;
    }
    if eta != 0.0 {
        h = (h + hamiltonian::h_linear_tilt(d, eta)?)?;
    }
    Ok(h)
}

fn free_product(d: usize) -> Result<ProductPropagator<f64>> {
    let h = hamiltonian::single_particle_hopping(d)?;
    ProductPropagator::new(&h, &h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeSpreadConfig {
    pub d: usize,
    pub sigma: f64,
    pub big_sigma: f64,
    pub center_sum: f64,
    pub times: Vec<f64>,
    /// Times at which the joint density is stored.
    pub snapshots: Vec<f64>,
}

impl Default for FreeSpreadConfig {
    fn default() -> Self {
        let tau = LATTICE_MASS * 4.0;
        Self {
            d: RING,
            sigma: 2.0,
            big_sigma: 0.01,
            center_sum: RING as f64,
            times: closed_grid(0.0, tau, 41),
            snapshots: vec![0.0, tau / 2.0, tau],
        }
    }
}

/// Spreads of the centre-of-mass and relative coordinates under free
/// lattice evolution, next to the continuum law with the lattice mass.
pub fn run_free_spread(cfg: &FreeSpreadConfig) -> Result<ExperimentResult> {
    let mut out = ExperimentResult::new(ExperimentKind::FreeSpread);
    out.param("d", cfg.d);
    out.param("sigma", cfg.sigma);
    out.param("big_sigma", cfg.big_sigma);
    out.param("center_sum", cfg.center_sum);
    out.param("mass", LATTICE_MASS);
    if cfg.times.is_empty() {
        return Err(Error::Empty("time grid"));
    }
    let g = DoubleGaussian::new(cfg.d, cfg.sigma, cfg.big_sigma, cfg.center_sum).build()?;
    if g.wraps() {
        out.warnings.push(format!(
            "initial packet wraps the ring (tail weight {:e})",
            g.tail_weight
        ));
    }
    let prop = free_product(cfg.d)?;

    let mut table = Table::new(
        "t",
        [
            "sum_spread",
            "diff_spread",
            "sum_continuum",
            "diff_continuum",
            "purity",
        ],
    );
    let mut snaps = Vec::new();
    out.timed("evolve", || -> Result<()> {
        for &t in &cfg.times {
            let st = prop.evolve(&g.state, t)?;
            let s = st.marginal_variances();
            table.push(
                t,
                vec![
                    s.sum,
                    s.diff,
                    analytic::free_spread(cfg.big_sigma, LATTICE_MASS, 1.0, t)?,
                    analytic::free_spread(cfg.sigma, LATTICE_MASS, 1.0, t)?,
                    st.reduce(Register::First).purity(),
                ],
            )?;
        }
        for &t in &cfg.snapshots {
            snaps.push((t, prop.evolve(&g.state, t)?.joint_density()));
        }
        Ok(())
    })?;

    let sites: Vec<f64> = (1..=cfg.d).map(|x| x as f64).collect();
    for (t, rho) in snaps {
        let values = (0..cfg.d)
            .flat_map(|i| (0..cfg.d).map(move |j| (i, j)))
            .map(|(i, j)| rho[(i, j)]);
        out.grids.push((
            format!("density_t{t}"),
            Grid::new("x1", "x2", sites.clone(), sites.clone(), values.collect())?,
        ));
    }
    let first = &table.rows[0].1;
    let last = &table.rows[table.len() - 1].1;
    out.note("sum_growth", last[0] / first[0]);
    out.note("diff_growth", last[1] / first[1]);
    out.note(
        "lifetime",
        analytic::lifetime(cfg.sigma, LATTICE_MASS, 1.0)?,
    );
    out.tables.push(("spreads".into(), table));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalConfig {
    pub params: GaussianPairParams<f64>,
    pub kset: Vec<f64>,
    pub temperatures: Vec<f64>,
    pub times: Vec<f64>,
    pub grid: PlaneGrid<f64>,
    /// Times at which mixture densities are stored.
    pub snapshots: Vec<f64>,
}

/// `{nπ/5 : n = −10..=10}`.
pub fn default_kset() -> Vec<f64> {
    (-10..=10).map(|n| n as f64 * PI / 5.0).collect()
}

impl Default for ThermalConfig {
    fn default() -> Self {
        Self {
            params: GaussianPairParams::natural(2.0, 0.5),
            kset: default_kset(),
            temperatures: vec![0.0, 1.0, 2.0, 4.0],
            times: closed_grid(0.0, 3.0, 31),
            grid: PlaneGrid::square(0.0, 40.0, 161),
            snapshots: vec![0.0, 1.5, 3.0],
        }
    }
}

/// Moments of `x1 − x2` and `x1 + x2` of a density sampled on `grid`.
fn grid_coordinate_variances(grid: &PlaneGrid<f64>, density: &[f64]) -> (f64, f64) {
    let mut m = [0.0; 5];
    for ((x1, x2), p) in grid.points().zip(density) {
        let (r, u) = (x1 - x2, x1 + x2);
        m[0] += p;
        m[1] += p * r;
        m[2] += p * r * r;
        m[3] += p * u;
        m[4] += p * u * u;
    }
    let (mr, mu) = (m[1] / m[0], m[3] / m[0]);
    (m[2] / m[0] - mr * mr, m[4] / m[0] - mu * mu)
}

/// Thermal mixtures of boosted double Gaussians in the continuum, with the
/// measured relative spread compared against the closed-form law.
pub fn run_thermalization(cfg: &ThermalConfig) -> Result<ExperimentResult> {
    let mut out = ExperimentResult::new(ExperimentKind::Thermalization);
    let p = &cfg.params;
    p.validate()?;
    out.param("sigma", p.sigma);
    out.param("big_sigma", p.big_sigma);
    out.param("mass", p.mass);
    out.param(
        "kset",
        format!(
            "{} momenta in [{}, {}]",
            cfg.kset.len(),
            cfg.kset[0],
            cfg.kset[cfg.kset.len() - 1]
        ),
    );
    out.param("temperatures", fmt_list(&cfg.temperatures));
    out.param("grid_points", cfg.grid.len());
    if cfg.times.is_empty() || cfg.temperatures.is_empty() {
        return Err(Error::Empty("time or temperature grid"));
    }

    let mut columns = Vec::new();
    for t in &cfg.temperatures {
        columns.push(format!("rel_measured_T{t}"));
        columns.push(format!("rel_mixture_T{t}"));
        columns.push(format!("rel_law_T{t}"));
        columns.push(format!("cm_measured_T{t}"));
    }
    let mut table = Table::new("t", columns);
    let mut worst: f64 = 0.0;
    out.timed("mixtures", || -> Result<()> {
        for &t in &cfg.times {
            let mut row = Vec::new();
            for &temp in &cfg.temperatures {
                let rho = analytic::thermal_joint_density(p, &cfg.kset, temp, t, &cfg.grid)?;
                let (var_rel, var_sum) = grid_coordinate_variances(&cfg.grid, &rho);
                let law =
                    analytic::thermal_relative_spread(p.sigma, p.mass, p.hbar, p.kb, temp, t)?;
                let mixture =
                    (analytic::thermal_relative_variance(p, &cfg.kset, temp, t)? / 2.0).sqrt();
                worst = worst.max((mixture - law).abs() / law);
                row.extend([(var_rel / 2.0).sqrt(), mixture, law, (var_sum / 2.0).sqrt()]);
            }
            table.push(t, row)?;
        }
        Ok(())
    })?;
    for &t in &cfg.snapshots {
        for &temp in &cfg.temperatures {
            let rho = analytic::thermal_joint_density(p, &cfg.kset, temp, t, &cfg.grid)?;
            out.grids.push((
                format!("density_T{temp}_t{t}"),
                Grid::new("x1", "x2", cfg.grid.x1.clone(), cfg.grid.x2.clone(), rho)?,
            ));
        }
    }
    out.note("max_relative_gap_mixture_vs_law", worst);
    out.tables.push(("spreads".into(), table));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MziConfig {
    pub d: usize,
    pub preset: Preset,
    /// On-site interaction used by the interacting preset.
    pub gamma: f64,
    pub phi_samples: usize,
    pub scan: RecurrenceScan<f64>,
    /// Skips the recurrence search when set.
    pub duration: Option<f64>,
}

impl MziConfig {
    pub fn preset(preset: Preset) -> Self {
        Self {
            d: RING,
            preset,
            gamma: -10.0,
            phi_samples: 64,
            scan: RecurrenceScan::arrival(80.0),
            duration: None,
        }
    }

    pub fn effective_gamma(&self) -> f64 {
        if self.preset == Preset::Interacting {
            self.gamma
        } else {
            0.0
        }
    }
}

/// Output cell watched by the interferometer.
pub const MZI_OUTPUT_CELL: usize = 3;

/// The interferometer probes: the output cell, the four sites at its
/// centre (34..37 for d = 40) and the point (7d/8, 7d/8 + 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MziProbes {
    pub coarse: DetectorBank,
    pub fine: DetectorBank,
    pub fine_cell: usize,
    pub point: (usize, usize),
}

impl MziProbes {
    pub fn new(d: usize) -> Result<Self> {
        if !d.is_multiple_of(8) || d < 16 {
            return Err(Error::Domain {
                what: "site count for the interferometer (must be a multiple of 8, at least 16)",
                value: d as f64,
            });
        }
        let first = 7 * d / 8 - 1;
        let offset = ((first - 1) % 4) as isize;
        Ok(Self {
            coarse: DetectorBank::new(d, d / 4)?,
            fine: DetectorBank::with_offset(d, 4, offset)?,
            fine_cell: (first - 1 - offset as usize) / 4,
            point: (7 * d / 8, 7 * d / 8 + 1),
        })
    }
}

/// Five-stage interferometer: prepare in cell 1, evolve `T/2`, imprint the
/// phase on cell 2, evolve `T/2`, read cell 3 and the finer probes.
pub fn run_mzi(cfg: &MziConfig) -> Result<ExperimentResult> {
    let d = cfg.d;
    let mut out = ExperimentResult::new(ExperimentKind::Mzi);
    let gamma = cfg.effective_gamma();
    out.param("d", d);
    out.param("preset", cfg.preset);
    out.param("gamma", gamma);
    out.param("phi_samples", cfg.phi_samples);
    out.param("scan_t_max", cfg.scan.t_max);
    out.param("scan_step", cfg.scan.step);
    out.param("scan_threshold", cfg.scan.threshold);
    if cfg.phi_samples < 4 {
        return Err(Error::Domain {
            what: "phase sample count",
            value: cfg.phi_samples as f64,
        });
    }
    let probes = MziProbes::new(d)?;
    let start = cfg.preset.state(d, 3.0 * d as f64 / 4.0)?;
    let h = pair_hamiltonian(d, gamma, 0.0)?;
    let prop = out.timed("eigendecomposition", || SpectralPropagator::new(&h))?;

    let output = JointWindow::cell(probes.coarse.cell(MZI_OUTPUT_CELL)?);
    let duration = match cfg.duration {
        Some(t) => {
            crate::error::positive("duration", t)?;
            t
        }
        None => {
            let rec = out.timed("recurrence", || {
                find_recurrence_time(&prop, &start, &output, &cfg.scan)
            })?;
            out.note("recurrence_peak_value", rec.peak_value);
            rec.duration
        }
    };
    out.param("duration", duration);

    let half = prop.evolve(&start, duration / 2.0)?;
    let (px, py) = probes.point;
    let fine_window = probes.fine.cell(probes.fine_cell)?;
    let mut table = Table::new(
        "phi",
        [
            "d3_delta10",
            "d3_delta4",
            "d3_point",
            "cross_cell_delta10",
            "cross_cell_delta4",
        ],
    );
    out.timed("phase_scan", || -> Result<()> {
        for phi in periodic_grid(0.0, 2.0 * PI, cfg.phi_samples) {
            let st = prop.evolve(&apply_phase(&half, phi)?, duration / 2.0)?;
            table.push(
                phi,
                vec![
                    output.expectation(&st)?,
                    JointWindow::cell(fine_window).expectation(&st)?,
                    detectors::joint_point_probability(&st, px, py)?,
                    detectors::cross_cell_mass(&st, &probes.coarse)?,
                    detectors::cross_cell_mass(&st, &probes.fine)?,
                ],
            )?;
        }
        Ok(())
    })?;

    fourier_self_test(cfg.phi_samples, 2)?;
    for (col, label) in [
        ("d3_delta10", "delta10"),
        ("d3_delta4", "delta4"),
        ("d3_point", "point"),
    ] {
        let series = table.column(col).expect("column exists");
        out.note(
            &format!("dominant_cycles_{label}"),
            fourier::dominant_cycles(&series),
        );
        out.note(
            &format!("cycle_weight_1_{label}"),
            fourier::cycle_weight(&series, 1),
        );
        out.note(
            &format!("cycle_weight_2_{label}"),
            fourier::cycle_weight(&series, 2),
        );
    }
    out.note(
        "fine_cell_sites",
        format!("{}..{}", fine_window.first(), fine_window.last()),
    );
    out.note("point_probe", format!("({px},{py})"));
    out.tables.push(("d3_vs_phi".into(), table));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlochConfig {
    pub d: usize,
    pub preset: Preset,
    pub eta: f64,
    /// On-site interaction used by the interacting preset.
    pub gamma: f64,
    /// Sampling window in units of `2π/η`.
    pub periods: f64,
    pub samples: usize,
    pub center_sum: f64,
    pub point: (usize, usize),
}

impl BlochConfig {
    pub fn preset(preset: Preset) -> Self {
        Self {
            d: RING,
            preset,
            eta: 0.4,
            gamma: -2.5,
            periods: 4.0,
            samples: 256,
            center_sum: RING as f64,
            point: (25, 25),
        }
    }

    pub fn effective_gamma(&self) -> f64 {
        if self.preset == Preset::Interacting {
            self.gamma
        } else {
            0.0
        }
    }

    pub fn bloch_period(&self) -> f64 {
        2.0 * PI / self.eta
    }
}

/// Widths of the centred detector banks in the Bloch run.
pub const BLOCH_DELTAS: [usize; 2] = [10, 4];

/// Bloch oscillations in a linear tilt: the detector cell holding the
/// packet centre, the site density, and Fourier periods of each.
pub fn run_bloch(cfg: &BlochConfig) -> Result<ExperimentResult> {
    let d = cfg.d;
    let mut out = ExperimentResult::new(ExperimentKind::Bloch);
    let gamma = cfg.effective_gamma();
    out.param("d", d);
    out.param("preset", cfg.preset);
    out.param("eta", cfg.eta);
    out.param("gamma", gamma);
    out.param("periods", cfg.periods);
    out.param("samples", cfg.samples);
    out.param("center_sum", cfg.center_sum);
    if cfg.eta == 0.0 {
        return Err(Error::Domain {
            what: "tilt",
            value: 0.0,
        });
    }
    if cfg.samples < 16 {
        return Err(Error::Domain {
            what: "time sample count",
            value: cfg.samples as f64,
        });
    }
    let centre_site = minimal_image(cfg.center_sum / 2.0, d as f64).rem_euclid(d as f64);
    let mut banks = Vec::new();
    for delta in BLOCH_DELTAS {
        let bank = DetectorBank::centered(d, delta)?;
        let j = ((centre_site / delta as f64).round() as usize) % bank.cells();
        banks.push((delta, bank, j));
    }
    let start = cfg.preset.state(d, cfg.center_sum)?;
    let h = pair_hamiltonian(d, gamma, cfg.eta)?;
    let prop = out.timed("eigendecomposition", || SpectralPropagator::new(&h))?;
    let prepared = prop.prepare(&start)?;

    let span = cfg.periods * cfg.bloch_period();
    let times = periodic_grid(0.0, span, cfg.samples);
    let mut columns: Vec<String> = banks
        .iter()
        .map(|(delta, _, _)| format!("d2_delta{delta}"))
        .collect();
    columns.push("d2_point".into());
    columns.extend(
        banks
            .iter()
            .map(|(delta, _, _)| format!("cross_cell_delta{delta}")),
    );
    let mut table = Table::new("t", columns);
    let mut density = Vec::with_capacity(times.len() * d);
    out.timed("evolve", || -> Result<()> {
        for &t in &times {
            let st = prepared.at(t);
            let mut row = Vec::new();
            for (_, bank, j) in &banks {
                row.push(detectors::joint_expectation(&st, bank, *j)?);
            }
            row.push(detectors::joint_point_probability(
                &st,
                cfg.point.0,
                cfg.point.1,
            )?);
            for (_, bank, _) in &banks {
                row.push(detectors::cross_cell_mass(&st, bank)?);
            }
            table.push(t, row)?;
            density.extend(detectors::site_density(&st));
        }
        Ok(())
    })?;

    fourier_self_test(cfg.samples, cfg.periods.round() as usize)?;
    out.note("bloch_period", cfg.bloch_period());
    for (delta, bank, j) in &banks {
        let series = table
            .column(&format!("d2_delta{delta}"))
            .expect("column exists");
        let cell = bank.cell(*j)?;
        out.note(
            &format!("cell_delta{delta}"),
            format!("{}..{}", cell.first(), cell.last()),
        );
        out.note(
            &format!("dominant_cycles_delta{delta}"),
            fourier::dominant_cycles(&series),
        );
        out.note(
            &format!("dominant_period_delta{delta}"),
            fourier::dominant_period(&series, span).unwrap_or(f64::NAN),
        );
    }
    let series = table.column("d2_point").expect("column exists");
    out.note(
        "dominant_period_point",
        fourier::dominant_period(&series, span).unwrap_or(f64::NAN),
    );
    out.grids.push((
        "site_density".into(),
        Grid::new(
            "t",
            "x",
            times.clone(),
            (1..=d).map(|x| x as f64).collect(),
            density,
        )?,
    ));
    out.tables.push(("d2_vs_t".into(), table));
    Ok(out)
}

/// Deviation of the first register's reduced dynamics from its isolated
/// evolution, sampled over time.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalityReport {
    pub times: Vec<f64>,
    pub deviations: Vec<f64>,
}

impl LocalityReport {
    pub fn max_deviation(&self) -> f64 {
        self.deviations.iter().fold(0.0, |a, b| a.max(*b))
    }
}

fn joint_propagator(
    h_a: &DMatrix<f64>,
    h_b: &DMatrix<f64>,
    coupling: Option<&HamiltonianOperator<f64>>,
) -> Result<SpectralPropagator<f64>> {
    let mut h = HamiltonianOperator::local(h_a, h_b)?;
    if let Some(c) = coupling {
        h = (h + c.clone())?;
    }
    SpectralPropagator::new(&h)
}

/// Trace-norm distance between `ρ_a(t)` from the joint evolution under
/// `H_a ⊗ 1 + 1 ⊗ H_b (+ coupling)` and `U_a(t) ρ_a(0) U_a(t)†`.
pub fn check_no_signalling(
    state: &LatticeState<f64>,
    h_a: &DMatrix<f64>,
    h_b: &DMatrix<f64>,
    coupling: Option<&HamiltonianOperator<f64>>,
    times: &[f64],
) -> Result<LocalityReport> {
    let prop = joint_propagator(h_a, h_b, coupling)?;
    let local = SingleParticlePropagator::new(h_a)?;
    let prepared = prop.prepare(state)?;
    let rho0 = state.reduce(Register::First);
    let mut deviations = Vec::with_capacity(times.len());
    for &t in times {
        let rho_t = prepared.at(t).reduce(Register::First);
        deviations.push(rho_t.trace_distance(&rho0.conjugated_by(&local.unitary(t)))?);
    }
    Ok(LocalityReport {
        times: times.to_vec(),
        deviations,
    })
}

/// `|S(ρ_a(t)) − S(ρ_a(0))|` along the joint evolution.
pub fn check_entropy_conservation(
    state: &LatticeState<f64>,
    h_a: &DMatrix<f64>,
    h_b: &DMatrix<f64>,
    coupling: Option<&HamiltonianOperator<f64>>,
    times: &[f64],
) -> Result<LocalityReport> {
    let prop = joint_propagator(h_a, h_b, coupling)?;
    let prepared = prop.prepare(state)?;
    let s0 = state.reduce(Register::First).entropy()?;
    let mut deviations = Vec::with_capacity(times.len());
    for &t in times {
        deviations.push((prepared.at(t).reduce(Register::First).entropy()? - s0).abs());
    }
    Ok(LocalityReport {
        times: times.to_vec(),
        deviations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalityConfig {
    pub d: usize,
    pub sigma: f64,
    pub big_sigma: f64,
    pub center_sum: f64,
    /// Tilt on the second particle only.
    pub eta_b: f64,
    pub gamma: f64,
    pub times: Vec<f64>,
}

impl Default for LocalityConfig {
    fn default() -> Self {
        Self {
            d: RING,
            sigma: 2.0,
            big_sigma: 0.5,
            center_sum: RING as f64,
            eta_b: 0.4,
            gamma: -2.5,
            times: closed_grid(0.0, 20.0, 41),
        }
    }
}

/// Runs both locality checks with and without on-site coupling and tabulates
/// the four deviation curves.
pub fn run_locality(cfg: &LocalityConfig) -> Result<ExperimentResult> {
    let mut out = ExperimentResult::new(ExperimentKind::NoSignalling);
    out.param("d", cfg.d);
    out.param("sigma", cfg.sigma);
    out.param("big_sigma", cfg.big_sigma);
    out.param("center_sum", cfg.center_sum);
    out.param("eta_b", cfg.eta_b);
    out.param("gamma", cfg.gamma);
    let d = cfg.d;
    let state = DoubleGaussian::new(d, cfg.sigma, cfg.big_sigma, cfg.center_sum)
        .build()?
        .state;
    let h_a = hamiltonian::single_particle_hopping(d)?;
    let h_b =
        hamiltonian::single_particle_hopping(d)? + hamiltonian::single_particle_tilt(d, cfg.eta_b);
    let coupling = hamiltonian::h_onsite_interaction(d, cfg.gamma)?;

    let (free_trace, free_entropy, int_trace, int_entropy) =
        out.timed("checks", || -> Result<_> {
            Ok((
                check_no_signalling(&state, &h_a, &h_b, None, &cfg.times)?,
                check_entropy_conservation(&state, &h_a, &h_b, None, &cfg.times)?,
                check_no_signalling(&state, &h_a, &h_b, Some(&coupling), &cfg.times)?,
                check_entropy_conservation(&state, &h_a, &h_b, Some(&coupling), &cfg.times)?,
            ))
        })?;
    let mut table = Table::new(
        "t",
        [
            "trace_dev_product",
            "entropy_dev_product",
            "trace_dev_coupled",
            "entropy_dev_coupled",
        ],
    );
    for (i, &t) in cfg.times.iter().enumerate() {
        table.push(
            t,
            vec![
                free_trace.deviations[i],
                free_entropy.deviations[i],
                int_trace.deviations[i],
                int_entropy.deviations[i],
            ],
        )?;
    }
    out.note("max_trace_dev_product", free_trace.max_deviation());
    out.note("max_entropy_dev_product", free_entropy.max_deviation());
    out.note("max_trace_dev_coupled", int_trace.max_deviation());
    out.note("max_entropy_dev_coupled", int_entropy.max_deviation());
    out.tables.push(("locality".into(), table));
    Ok(out)
}

/// Fidelity between the freely evolved double Gaussian and the ansatz
/// `f(y1+y2)·exp(−(y1−y2)²/4σ²)` with the best-fitting sum factor `f` and the
/// relative factor frozen at its initial width.
pub fn check_factorized_approximation(
    d: usize,
    sigma: f64,
    big_sigma: f64,
    center_sum: f64,
    t: f64,
) -> Result<f64> {
    let tau = analytic::lifetime(sigma, LATTICE_MASS, 1.0)?;
    if !(0.0..tau).contains(&t) {
        return Err(Error::Domain {
            what: "time (must lie in [0, lifetime))",
            value: t,
        });
    }
    let g = DoubleGaussian::new(d, sigma, big_sigma, center_sum).build()?;
    let psi = free_product(d)?.evolve(&g.state, t)?;

    let period = d as f64;
    let centre = center_sum / 2.0;
    let disp = |x: usize| minimal_image(x as f64 - centre, period);
    let coords = |x1: usize, x2: usize| {
        let (y1, y2) = (disp(x1), disp(x2));
        ((y1 + y2).round() as i64, y1 - y2)
    };
    let frozen = |v: f64| (-(v * v) / (4.0 * sigma * sigma)).exp();

    // Projection onto the ansatz family: f(u) = Σ_v g(v)ψ(u,v) / Σ_v g(v)².
    let mut num = std::collections::BTreeMap::<i64, (Complex<f64>, f64)>::new();
    for x1 in 1..=d {
        for x2 in 1..=d {
            let (u, v) = coords(x1, x2);
            let e = num.entry(u).or_insert((Complex::new(0.0, 0.0), 0.0));
            e.0 += psi.amplitude(x1, x2)? * frozen(v);
            e.1 += frozen(v) * frozen(v);
        }
    }
    let mut ansatz = Vec::with_capacity(d * d);
    for x1 in 1..=d {
        for x2 in 1..=d {
            let (u, v) = coords(x1, x2);
            let (s, w) = num[&u];
            ansatz.push(if w > 0.0 {
                s / w * frozen(v)
            } else {
                Complex::new(0.0, 0.0)
            });
        }
    }
    let ansatz = LatticeState::new(d, ansatz)?;
    psi.fidelity(&ansatz)
}

fn fmt_list(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";")
}
