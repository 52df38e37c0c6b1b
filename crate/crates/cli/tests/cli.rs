use pairdyn::experiments::{run_bloch, BlochConfig, Preset};
use pairdyn_cli::csv::read_series;
use std::path::Path;
use std::process::{Command, Output};

fn pairdyn(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pairdyn"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

const SMALL_BLOCH: &[&str] = &[
    "bloch",
    "--preset",
    "interacting",
    "--d",
    "20",
    "--samples",
    "64",
    "--periods",
    "2",
];

#[test]
fn bloch_csv_round_trips_the_in_memory_series() {
    let dir = tempfile::tempdir().unwrap();
    let run = pairdyn(SMALL_BLOCH, dir.path());
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );

    let cfg = BlochConfig {
        d: 20,
        samples: 64,
        periods: 2.0,
        center_sum: 20.0,
        point: (12, 12),
        ..BlochConfig::preset(Preset::Interacting)
    };
    let result = run_bloch(&cfg).unwrap();
    let table = result.table("d2_vs_t").unwrap();
    let csv = read_series(&dir.path().join("bloch_interacting/d2_vs_t_delta4.csv")).unwrap();
    assert_eq!(csv.columns, ["t", "d2", "cross_cell"]);
    assert_eq!(csv.column("t").unwrap(), table.abscissae());
    assert_eq!(
        csv.column("d2").unwrap(),
        table.column("d2_delta4").unwrap()
    );
    assert_eq!(
        csv.column("cross_cell").unwrap(),
        table.column("cross_cell_delta4").unwrap()
    );
    assert_eq!(csv.meta_value("preset"), Some("interacting"));
    assert_eq!(csv.meta_value("version"), Some(env!("CARGO_PKG_VERSION")));

    let density = read_series(&dir.path().join("bloch_interacting/site_density.csv")).unwrap();
    assert_eq!(density.rows.len(), 64 * 20);
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(pairdyn(SMALL_BLOCH, a.path()).status.success());
    assert!(pairdyn(SMALL_BLOCH, b.path()).status.success());
    for file in [
        "d2_vs_t_delta10.csv",
        "d2_vs_t_delta4.csv",
        "d2_vs_t_delta1.csv",
        "site_density.csv",
    ] {
        let x = std::fs::read(a.path().join("bloch_interacting").join(file)).unwrap();
        let y = std::fs::read(b.path().join("bloch_interacting").join(file)).unwrap();
        assert_eq!(x, y, "{file}");
    }
}

#[test]
fn mzi_fixed_duration_writes_three_probe_files() {
    let dir = tempfile::tempdir().unwrap();
    let run = pairdyn(
        &["mzi", "--preset", "separable", "--duration", "11.5"],
        dir.path(),
    );
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    for delta in [10, 4, 1] {
        let csv = read_series(
            &dir.path()
                .join(format!("mzi_separable/d3_vs_phi_delta{delta}.csv")),
        )
        .unwrap();
        assert_eq!(csv.rows.len(), 64);
        assert_eq!(csv.meta_value("duration"), Some("11.5"));
        assert!(csv.meta_value("summary.dominant_cycles_point").is_some());
    }
    assert!(String::from_utf8_lossy(&run.stdout).contains("dominant_cycles_delta10="));
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "d = 20\nsamples = 32\nperiods = 2.0\npreset = \"entangled\"\n",
    )
    .unwrap();
    let run = pairdyn(
        &[
            "bloch",
            "--config",
            cfg.to_str().unwrap(),
            "--samples",
            "48",
        ],
        dir.path(),
    );
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let csv = read_series(&dir.path().join("bloch_entangled/d2_vs_t_delta10.csv")).unwrap();
    assert_eq!(csv.rows.len(), 48);
    assert_eq!(csv.meta_value("d"), Some("20"));
}

#[test]
fn invalid_config_exits_2_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "d = 40\nphi_samples = \"many\"\n").unwrap();
    let run = pairdyn(&["mzi", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("phi_samples"));

    let run = pairdyn(&["bloch", "--eta", "0"], dir.path());
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("`eta`"));

    let run = pairdyn(&["free", "--preset", "interacting"], dir.path());
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("`preset`"));
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let run = pairdyn(&["free", "--time-samples", "3"], &blocker.join("sub"));
    assert_eq!(run.status.code(), Some(3));
}

#[test]
fn output_directory_defaults_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let run = Command::new(env!("CARGO_BIN_EXE_pairdyn"))
        .args(["free", "--time-samples", "3"])
        .env("PAIRDYN_OUT", dir.path())
        .output()
        .unwrap();
    assert!(run.status.success());
    let csv = read_series(&dir.path().join("free/spreads.csv")).unwrap();
    assert_eq!(csv.rows.len(), 3);
}

#[test]
fn plots_are_written_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let run = pairdyn(&["free", "--time-samples", "5", "--plots"], dir.path());
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let svg = std::fs::read_to_string(dir.path().join("free/plots/spreads.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(dir.path().join("free/plots/density_t0.svg").exists());
}
