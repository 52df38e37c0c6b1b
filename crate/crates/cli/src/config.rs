//! Flat key/value run configuration, loaded from TOML and overridden by flags.

use crate::error::{CliError, CliResult};
use clap::Args;
use pairdyn::analytic::GaussianPairParams;
use pairdyn::experiments::{
    closed_grid, BlochConfig, FreeSpreadConfig, MziConfig, Preset, ThermalConfig, BLOCH_DELTAS,
    LATTICE_MASS, RING,
};
use pairdyn::propagator::RecurrenceScan;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Sites on the ring.
    #[arg(long, global = true)]
    pub d: Option<usize>,
    /// entangled, separable or interacting; all three when omitted.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Only write the series for this detector width (1 selects the point probe).
    #[arg(long, global = true)]
    pub delta: Option<usize>,
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    #[arg(long, global = true)]
    pub big_sigma: Option<f64>,
    #[arg(long, global = true)]
    pub center_sum: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    #[arg(long, global = true)]
    pub phi_samples: Option<usize>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Bloch window in units of the Bloch period.
    #[arg(long, global = true)]
    pub periods: Option<f64>,
    /// Interferometer duration; skips the recurrence search.
    #[arg(long, global = true)]
    pub duration: Option<f64>,
    /// End of the time grid, or of the recurrence search window.
    #[arg(long, global = true)]
    pub t_max: Option<f64>,
    #[arg(long, global = true)]
    pub time_samples: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub temperatures: Option<Vec<f64>>,
    /// Output directory [default: $PAIRDYN_OUT, else ./pairdyn-out].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub plots: Option<bool>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($f:ident),*) => {
        RunConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text)
            .map_err(|e| CliError::config(&offending_key(text, &e), e.message().trim()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Fields set in `overrides` replace those in `self`.
    pub fn merged(self, overrides: RunConfig) -> Self {
        let base = self;
        let top = overrides;
        overlay!(
            base,
            top,
            d,
            preset,
            delta,
            sigma,
            big_sigma,
            center_sum,
            gamma,
            eta,
            phi_samples,
            samples,
            periods,
            duration,
            t_max,
            time_samples,
            temperatures,
            out,
            plots
        )
    }

    pub fn output_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os("PAIRDYN_OUT").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("pairdyn-out"))
    }

    pub fn plots(&self) -> bool {
        self.plots.unwrap_or(false)
    }

    /// The presets to run: the configured one, or all three.
    pub fn presets(&self) -> CliResult<Vec<Preset>> {
        match &self.preset {
            Some(name) => Ok(vec![name.parse().map_err(|_| {
                CliError::config(
                    "preset",
                    format!("unknown preset {name:?} (entangled, separable, interacting)"),
                )
            })?]),
            None => Ok(Preset::ALL.to_vec()),
        }
    }

    fn ring(&self) -> CliResult<usize> {
        let d = self.d.unwrap_or(RING);
        if d < 4 {
            return Err(CliError::config(
                "d",
                format!("need at least 4 sites, got {d}"),
            ));
        }
        Ok(d)
    }

    fn positive(&self, key: &str, value: Option<f64>) -> CliResult<Option<f64>> {
        match value {
            Some(v) if !(v > 0.0 && v.is_finite()) => {
                Err(CliError::config(key, format!("must be positive, got {v}")))
            }
            _ => Ok(value),
        }
    }

    fn at_least(&self, key: &str, value: Option<usize>, min: usize) -> CliResult<Option<usize>> {
        match value {
            Some(v) if v < min => Err(CliError::config(
                key,
                format!("must be at least {min}, got {v}"),
            )),
            _ => Ok(value),
        }
    }

    fn finite(&self, key: &str, value: Option<f64>) -> CliResult<Option<f64>> {
        match value {
            Some(v) if !v.is_finite() => {
                Err(CliError::config(key, format!("must be finite, got {v}")))
            }
            _ => Ok(value),
        }
    }

    /// Checks the detector-width filter against the widths an experiment writes.
    pub fn delta_filter(&self, allowed: &[usize]) -> CliResult<Option<usize>> {
        match self.delta {
            Some(delta) if !allowed.contains(&delta) => Err(CliError::config(
                "delta",
                format!("{delta} is not one of the written widths {allowed:?}"),
            )),
            other => Ok(other),
        }
    }

    pub fn free(&self) -> CliResult<FreeSpreadConfig> {
        let d = self.ring()?;
        let (mut sigma, mut big_sigma) = (2.0, 0.01);
        if let Some(name) = &self.preset {
            let preset = self.presets()?[0];
            (sigma, big_sigma) = preset.widths().ok_or_else(|| {
                CliError::config("preset", format!("{name} has no Gaussian widths"))
            })?;
        }
        let sigma = self.positive("sigma", self.sigma)?.unwrap_or(sigma);
        let big_sigma = self
            .positive("big_sigma", self.big_sigma)?
            .unwrap_or(big_sigma);
        let center_sum = self
            .finite("center_sum", self.center_sum)?
            .unwrap_or(d as f64);
        let t_max = self
            .positive("t_max", self.t_max)?
            .unwrap_or(LATTICE_MASS * sigma * sigma);
        let n = self
            .at_least("time_samples", self.time_samples, 2)?
            .unwrap_or(41);
        Ok(FreeSpreadConfig {
            d,
            sigma,
            big_sigma,
            center_sum,
            times: closed_grid(0.0, t_max, n),
            snapshots: vec![0.0, t_max / 2.0, t_max],
        })
    }

    pub fn thermal(&self) -> CliResult<ThermalConfig> {
        let base = ThermalConfig::default();
        let sigma = self
            .positive("sigma", self.sigma)?
            .unwrap_or(base.params.sigma);
        let big_sigma = self
            .positive("big_sigma", self.big_sigma)?
            .unwrap_or(base.params.big_sigma);
        let t_max = self.positive("t_max", self.t_max)?.unwrap_or(3.0);
        let n = self
            .at_least("time_samples", self.time_samples, 2)?
            .unwrap_or(31);
        let temperatures = match &self.temperatures {
            Some(ts) if ts.is_empty() => {
                return Err(CliError::config("temperatures", "empty list"))
            }
            Some(ts) => {
                if let Some(bad) = ts.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
                    return Err(CliError::config(
                        "temperatures",
                        format!("must be non-negative, got {bad}"),
                    ));
                }
                ts.clone()
            }
            None => base.temperatures,
        };
        Ok(ThermalConfig {
            params: GaussianPairParams::natural(sigma, big_sigma),
            temperatures,
            times: closed_grid(0.0, t_max, n),
            snapshots: vec![0.0, t_max / 2.0, t_max],
            ..base
        })
    }

    pub fn mzi(&self, preset: Preset) -> CliResult<MziConfig> {
        let d = self.ring()?;
        if d % 8 != 0 || d < 16 {
            return Err(CliError::config(
                "d",
                format!("interferometer needs a multiple of 8, at least 16; got {d}"),
            ));
        }
        let mut cfg = MziConfig {
            d,
            ..MziConfig::preset(preset)
        };
        if let Some(g) = self.finite("gamma", self.gamma)? {
            cfg.gamma = g;
        }
        cfg.phi_samples = self
            .at_least("phi_samples", self.phi_samples, 4)?
            .unwrap_or(cfg.phi_samples);
        cfg.duration = self.positive("duration", self.duration)?;
        if let Some(t_max) = self.positive("t_max", self.t_max)? {
            if t_max < cfg.scan.step {
                return Err(CliError::config(
                    "t_max",
                    format!("shorter than the scan step {}", cfg.scan.step),
                ));
            }
            cfg.scan = RecurrenceScan::arrival(t_max);
        }
        Ok(cfg)
    }

    pub fn bloch(&self, preset: Preset) -> CliResult<BlochConfig> {
        let d = self.ring()?;
        if let Some(delta) = BLOCH_DELTAS.iter().find(|w| d % **w != 0) {
            return Err(CliError::config(
                "d",
                format!("Bloch detector width {delta} must divide d = {d}"),
            ));
        }
        let mut cfg = BlochConfig {
            d,
            center_sum: d as f64,
            point: (5 * d / 8, 5 * d / 8),
            ..BlochConfig::preset(preset)
        };
        if let Some(eta) = self.finite("eta", self.eta)? {
            if eta == 0.0 {
                return Err(CliError::config("eta", "tilt must be nonzero"));
            }
            cfg.eta = eta;
        }
        if let Some(g) = self.finite("gamma", self.gamma)? {
            cfg.gamma = g;
        }
        cfg.periods = self
            .positive("periods", self.periods)?
            .unwrap_or(cfg.periods);
        cfg.samples = self
            .at_least("samples", self.samples, 16)?
            .unwrap_or(cfg.samples);
        cfg.center_sum = self
            .finite("center_sum", self.center_sum)?
            .unwrap_or(cfg.center_sum);
        Ok(cfg)
    }
}

/// Best guess at the key a TOML error refers to.
fn offending_key(text: &str, err: &toml::de::Error) -> String {
    let msg = err.message();
    if let Some(rest) = msg.split("unknown field `").nth(1) {
        if let Some(key) = rest.split('`').next() {
            return key.to_string();
        }
    }
    if let Some(span) = err.span() {
        let start = text[..span.start.min(text.len())]
            .rfind('\n')
            .map_or(0, |i| i + 1);
        let line = text[start..].lines().next().unwrap_or("");
        if let Some((key, _)) = line.split_once('=') {
            return key.trim().to_string();
        }
    }
    "<document>".into()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::from_toml("d = 40\nwidth = 3\n").unwrap_err();
        assert!(
            matches!(&err, CliError::Config { key, .. } if key == "width"),
            "{err}"
        );
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn wrong_type_is_named() {
        let err = RunConfig::from_toml("d = 40\neta = \"steep\"\n").unwrap_err();
        assert!(
            matches!(&err, CliError::Config { key, .. } if key == "eta"),
            "{err}"
        );
    }

    #[test]
    fn overrides_win() {
        let file = RunConfig::from_toml("d = 24\neta = 0.2\n").unwrap();
        let flags = RunConfig {
            eta: Some(0.5),
            ..Default::default()
        };
        let cfg = file.merged(flags);
        assert_eq!(cfg.d, Some(24));
        assert_eq!(cfg.eta, Some(0.5));
    }

    #[test]
    fn validation_names_key() {
        let bad = RunConfig {
            d: Some(20),
            ..Default::default()
        };
        assert!(
            matches!(bad.mzi(Preset::Entangled), Err(CliError::Config { key, .. }) if key == "d")
        );
        let flat = RunConfig {
            eta: Some(0.0),
            ..Default::default()
        };
        assert!(
            matches!(flat.bloch(Preset::Separable), Err(CliError::Config { key, .. }) if key == "eta")
        );
        let neg = RunConfig {
            sigma: Some(-1.0),
            ..Default::default()
        };
        assert!(matches!(neg.free(), Err(CliError::Config { key, .. }) if key == "sigma"));
        let preset = RunConfig {
            preset: Some("tangled".into()),
            ..Default::default()
        };
        assert!(matches!(preset.presets(), Err(CliError::Config { key, .. }) if key == "preset"));
    }

    #[test]
    fn defaults_match_core() {
        let cfg = RunConfig::default();
        assert_eq!(
            cfg.mzi(Preset::Interacting).unwrap(),
            MziConfig::preset(Preset::Interacting)
        );
        assert_eq!(
            cfg.bloch(Preset::Entangled).unwrap(),
            BlochConfig::preset(Preset::Entangled)
        );
        assert_eq!(cfg.free().unwrap(), FreeSpreadConfig::default());
    }
}
