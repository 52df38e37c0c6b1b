use pairdyn::experiments::{self, *};
use pairdyn::hamiltonian;
use pairdyn::lattice::{LatticeState, Register};
use pairdyn::Error;

fn value(r: &ExperimentResult, key: &str) -> f64 {
    r.summary_value(key)
        .unwrap_or_else(|| panic!("missing {key}"))
        .parse()
        .unwrap()
}

#[test]
fn equal_widths_spread_at_equal_rates() {
    let cfg = FreeSpreadConfig {
        sigma: 1.5,
        big_sigma: 1.5,
        times: closed_grid(0.0, 3.0, 7),
        snapshots: vec![],
        ..Default::default()
    };
    let r = run_free_spread(&cfg).unwrap();
    let (sum, diff) = (value(&r, "sum_growth"), value(&r, "diff_growth"));
    assert!((sum - diff).abs() / diff < 0.05, "{sum} vs {diff}");
}

#[test]
fn narrow_sum_grows_much_faster_than_relative() {
    let r = run_free_spread(&FreeSpreadConfig::default()).unwrap();
    let sum = value(&r, "sum_growth");
    let diff = value(&r, "diff_growth");
    assert!(sum > 5.0, "sum growth {sum}");
    assert!(diff <= 2f64.sqrt() * 1.01, "diff growth {diff}");
    let t = r.table("spreads").unwrap();
    assert_eq!(t.len(), 41);
    assert_eq!(r.grids.len(), 3);
}

#[test]
fn thermal_zero_temperature_matches_pure_law() {
    let cfg = ThermalConfig {
        temperatures: vec![0.0, 2.0],
        times: closed_grid(0.0, 2.0, 5),
        grid: pairdyn::analytic::PlaneGrid::square(0.0, 30.0, 121),
        snapshots: vec![],
        ..Default::default()
    };
    let r = run_thermalization(&cfg).unwrap();
    let t = r.table("spreads").unwrap();
    let measured = t.column("rel_measured_T0").unwrap();
    let law = t.column("rel_law_T0").unwrap();
    for (m, l) in measured.iter().zip(&law) {
        assert!((m - l).abs() / l < 1e-3, "{m} vs {l}");
    }
    let hot = t.column("rel_measured_T2").unwrap();
    assert!(hot.last().unwrap() > measured.last().unwrap());
    let cm_cold = t.column("cm_measured_T0").unwrap();
    let cm_hot = t.column("cm_measured_T2").unwrap();
    let rel_gain = hot.last().unwrap() / measured.last().unwrap();
    let cm_gain = cm_hot.last().unwrap() / cm_cold.last().unwrap();
    assert!(
        rel_gain > cm_gain,
        "relative gain {rel_gain}, cm gain {cm_gain}"
    );
}

#[test]
fn thermal_grid_moments_agree_with_mixture() {
    let cfg = ThermalConfig {
        temperatures: vec![1.0],
        times: vec![0.0, 1.0],
        grid: pairdyn::analytic::PlaneGrid::square(0.0, 30.0, 121),
        snapshots: vec![],
        ..Default::default()
    };
    let r = run_thermalization(&cfg).unwrap();
    let t = r.table("spreads").unwrap();
    for (m, x) in t
        .column("rel_measured_T1")
        .unwrap()
        .iter()
        .zip(t.column("rel_mixture_T1").unwrap())
    {
        assert!((m - x).abs() / x < 1e-3, "{m} vs {x}");
    }
}

#[test]
fn register_swap_preserves_no_signalling() {
    let d = 12;
    let state = pairdyn::lattice::DoubleGaussian::new(d, 1.5, 0.5, 12.0)
        .build()
        .unwrap()
        .state;
    let h_a = hamiltonian::single_particle_hopping(d).unwrap();
    let h_b = &h_a + hamiltonian::single_particle_tilt(d, 0.7);
    let times = closed_grid(0.0, 6.0, 7);
    let ab = check_no_signalling(&state, &h_a, &h_b, None, &times).unwrap();
    let ba = check_no_signalling(&state, &h_b, &h_a, None, &times).unwrap();
    assert!(ab.max_deviation() < 1e-10);
    assert!(ba.max_deviation() < 1e-10);
}

#[test]
fn interaction_builds_entanglement_from_product() {
    let d = 12;
    let state: pairdyn::State = LatticeState::point_pair(d, 5, 6).unwrap();
    assert!(state.reduce(Register::First).entropy().unwrap().abs() < 1e-12);
    let h = hamiltonian::single_particle_hopping(d).unwrap();
    let coupling = hamiltonian::h_onsite_interaction(d, -2.0).unwrap();
    let times = closed_grid(0.0, 4.0, 9);
    let r = check_entropy_conservation(&state, &h, &h, Some(&coupling), &times).unwrap();
    assert!(r.max_deviation() > 0.1, "{}", r.max_deviation());
}

#[test]
fn maximally_entangled_start_keeps_maximal_entropy() {
    let d = 12;
    let state: pairdyn::State = LatticeState::bunched_uniform(d).unwrap();
    let s0 = state.reduce(Register::First).entropy().unwrap();
    assert!((s0 - (d as f64).ln()).abs() < 1e-10);
    let h = hamiltonian::single_particle_hopping(d).unwrap();
    let r = check_entropy_conservation(&state, &h, &h, None, &closed_grid(0.0, 5.0, 6)).unwrap();
    assert!(r.max_deviation() < 1e-10);
}

#[test]
fn factorization_holds_for_wide_relative_packets() {
    let exact = check_factorized_approximation(RING, 4.0, 0.5, 40.0, 0.0).unwrap();
    assert!((exact - 1.0).abs() < 1e-9, "{exact}");
    let tau = pairdyn::analytic::lifetime(4.0, LATTICE_MASS, 1.0).unwrap();
    let wide = check_factorized_approximation(RING, 4.0, 0.5, 40.0, tau / 2.0).unwrap();
    assert!(wide >= 0.95, "{wide}");
    let tau_eq = pairdyn::analytic::lifetime(1.0, LATTICE_MASS, 1.0).unwrap();
    let equal = check_factorized_approximation(RING, 1.0, 1.0, 40.0, tau_eq / 2.0).unwrap();
    assert!(equal < wide, "{equal} vs {wide}");
    assert!(matches!(
        check_factorized_approximation(RING, 4.0, 0.5, 40.0, tau),
        Err(Error::Domain { .. })
    ));
}

#[test]
fn bloch_period_insensitive_to_entanglement() {
    let mut periods = Vec::new();
    for preset in [Preset::Entangled, Preset::Separable] {
        let r = run_bloch(&BlochConfig::preset(preset)).unwrap();
        periods.push(value(&r, "dominant_period_delta10"));
        assert_eq!(r.grid("site_density").unwrap().values.len(), 256 * RING);
    }
    assert!((periods[0] - periods[1]).abs() < 1e-9, "{periods:?}");
}

#[test]
fn locality_summary_separates_product_from_coupled() {
    let cfg = LocalityConfig {
        d: 16,
        center_sum: 16.0,
        times: closed_grid(0.0, 8.0, 9),
        ..Default::default()
    };
    let r = run_locality(&cfg).unwrap();
    assert!(value(&r, "max_trace_dev_product") < 1e-10);
    assert!(value(&r, "max_trace_dev_coupled") > 1e-3);
    assert_eq!(r.table("locality").unwrap().len(), 9);
}

#[test]
fn table_rejects_bad_rows() {
    let mut t = Table::new("x", ["a", "b"]);
    t.push(0.0, vec![1.0, 2.0]).unwrap();
    assert!(t.push(0.0, vec![1.0, 2.0]).is_err());
    assert!(t.push(1.0, vec![1.0]).is_err());
    assert_eq!(t.column("b"), Some(vec![2.0]));
    assert_eq!(t.column("c"), None);
    assert!(Grid::new("x", "y", vec![0.0], vec![0.0, 1.0], vec![1.0]).is_err());
}

#[test]
fn configs_validate_inputs() {
    assert!(MziProbes::new(20).is_err());
    let bad = MziConfig {
        duration: Some(-1.0),
        ..MziConfig::preset(Preset::Separable)
    };
    assert!(run_mzi(&bad).is_err());
    let flat = BlochConfig {
        eta: 0.0,
        ..BlochConfig::preset(Preset::Separable)
    };
    assert!(run_bloch(&flat).is_err());
    assert!(run_free_spread(&FreeSpreadConfig {
        times: vec![],
        ..Default::default()
    })
    .is_err());
    assert_eq!("entangled".parse::<Preset>().unwrap(), Preset::Entangled);
    assert!("tangled".parse::<Preset>().is_err());
}

#[test]
fn mzi_with_fixed_duration_is_deterministic() {
    let cfg = MziConfig {
        d: 16,
        phi_samples: 16,
        duration: Some(4.0),
        ..MziConfig::preset(Preset::Separable)
    };
    let a = run_mzi(&cfg).unwrap();
    let b = run_mzi(&cfg).unwrap();
    assert_eq!(a.tables, b.tables);
    assert_eq!(a.summary, b.summary);
    let col = a.table("d3_vs_phi").unwrap().column("d3_delta10").unwrap();
    assert!(col.iter().all(|p| (0.0..=1.0 + 1e-12).contains(p)));
}

#[test]
fn fourier_self_test_runs() {
    experiments::fourier_self_test(64, 2).unwrap();
}
