use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::outcome::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub v_count: usize,
    pub v_half: f64,
    pub t_count: usize,
    pub t_half: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineSpec {
    pub count: usize,
    pub half: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub group: f64,
    pub unitarity: f64,
    pub homomorphism: f64,
    pub plancherel: f64,
    pub gaussian: f64,
    pub bilinear: f64,
    pub dual_route: f64,
    pub hs_symbol: f64,
    pub gramian: f64,
    pub convolution: f64,
    pub symbol_round_trip: f64,
    pub twisted_product: f64,
    /// Fiber and operator residuals of the inversion.
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            group: 1e-12,
            unitarity: 1e-12,
            homomorphism: 1e-8,
            plancherel: 1e-10,
            gaussian: 1e-8,
            bilinear: 1e-8,
            dual_route: 1e-6,
            hs_symbol: 1e-10,
            gramian: 1e-6,
            convolution: 1e-5,
            symbol_round_trip: 1e-10,
            twisted_product: 1e-9,
            residual: 1e-6,
        }
    }
}

/// Everything a run depends on. Every field has a default, so an empty JSON
/// object (or no config file at all) is a valid configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    /// Catalog name, or `expr:<multiplier>` for an inline expression.
    pub kernel: String,
    pub eps: f64,
    /// Group-side grid for field identities and field-level verification.
    pub grid: GridSpec,
    /// Position grid of the fiber operators; `None` picks the default for `n`.
    pub line: Option<LineSpec>,
    /// `[lo, hi]`: fibers at `±lo·2^{k/per_octave}` up to `hi`.
    pub lambda_band: [f64; 2],
    pub per_octave: usize,
    pub alpha_max: usize,
    pub beta_max: usize,
    /// Highest `λ`-derivative order in the inverse-symbol check.
    pub m_max: usize,
    pub sigma_floor: f64,
    pub cond_limit: f64,
    pub strict_symmetric: bool,
    pub tolerances: Tolerances,
    pub seed: u64,
    /// Random draws per randomized identity.
    pub draws: usize,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 1,
            kernel: "perturbed-identity".into(),
            eps: 0.1,
            grid: GridSpec { v_count: 128, v_half: 4.0, t_count: 64, t_half: 8.0 },
            line: None,
            lambda_band: [0.25, 4.0],
            per_octave: 4,
            alpha_max: 3,
            beta_max: 2,
            m_max: 2,
            sigma_floor: 0.5,
            cond_limit: flagcalc::inversion::DEFAULT_COND_LIMIT,
            strict_symmetric: false,
            tolerances: Tolerances::default(),
            seed: 0,
            draws: 20,
            out: PathBuf::from("out"),
        }
    }
}

fn power_of_two(name: &str, c: usize) -> Result<(), CliError> {
    if c < 2 || !c.is_power_of_two() {
        return Err(CliError::Config(format!("{name} must be a power of two >= 2, got {c}")));
    }
    Ok(())
}

fn positive(name: &str, x: f64) -> Result<(), CliError> {
    if !(x.is_finite() && x > 0.0) {
        return Err(CliError::Config(format!("{name} must be positive and finite, got {x}")));
    }
    Ok(())
}

/// Largest group grid accepted (about 1 GiB per complex field).
pub const MAX_GRID_POINTS: usize = 1 << 26;

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn line_spec(&self) -> LineSpec {
        self.line.unwrap_or_else(|| {
            let l = flagcalc::inversion::default_line::<f64>(self.n.max(1)).expect("default line grid");
            LineSpec { count: l.count(), half: l.half_width() }
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(1..=3).contains(&self.n) {
            return Err(CliError::Config(format!("n must be 1, 2 or 3, got {}", self.n)));
        }
        power_of_two("grid.v_count", self.grid.v_count)?;
        power_of_two("grid.t_count", self.grid.t_count)?;
        positive("grid.v_half", self.grid.v_half)?;
        positive("grid.t_half", self.grid.t_half)?;
        let points = (self.grid.v_count as f64).powi(2 * self.n as i32) * self.grid.t_count as f64;
        if points > MAX_GRID_POINTS as f64 {
            return Err(CliError::Config(format!(
                "grid has {points:.3e} points (limit {MAX_GRID_POINTS}); pass a smaller --grid for n = {}",
                self.n
            )));
        }
        let l = self.line_spec();
        power_of_two("line.count", l.count)?;
        positive("line.half", l.half)?;
        let [lo, hi] = self.lambda_band;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi >= lo) {
            return Err(CliError::Config(format!(
                "lambda band must satisfy 0 < lo <= hi (the band may not contain 0), got [{lo}, {hi}]"
            )));
        }
        if self.per_octave == 0 {
            return Err(CliError::Config("per_octave must be at least 1".into()));
        }
        if !self.eps.is_finite() {
            return Err(CliError::Config(format!("eps must be finite, got {}", self.eps)));
        }
        if !(1..=4).contains(&self.m_max) {
            return Err(CliError::Config(format!("m_max must lie in 1..=4, got {}", self.m_max)));
        }
        if self.alpha_max > 4 || self.beta_max > 4 {
            return Err(CliError::Config("derivative orders above 4 are not supported".into()));
        }
        positive("cond_limit", self.cond_limit)?;
        if !(self.sigma_floor.is_finite() && self.sigma_floor >= 0.0) {
            return Err(CliError::Config(format!("sigma_floor must be finite and >= 0, got {}", self.sigma_floor)));
        }
        if self.draws == 0 {
            return Err(CliError::Config("draws must be at least 1".into()));
        }
        Ok(())
    }

    /// Log-uniform fibers `±lo·2^{k/per_octave}`, `k = 0..=K`, in increasing order.
    pub fn lambdas(&self) -> Vec<f64> {
        let [lo, hi] = self.lambda_band;
        let p = self.per_octave as f64;
        let k = ((hi / lo).log2() * p).round() as i32;
        let pos: Vec<f64> = (0..=k).map(|j| lo * 2f64.powf(j as f64 / p)).collect();
        let mut all: Vec<f64> = pos.iter().rev().map(|x| -x).collect();
        all.extend(pos);
        all
    }
}

/// `V_COUNT:V_HALF,T_COUNT:T_HALF`, e.g. `128:4,64:8`.
pub fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let (v, t) = s.split_once(',').ok_or("expected V_COUNT:V_HALF,T_COUNT:T_HALF")?;
    let (vc, vh) = parse_axis(v)?;
    let (tc, th) = parse_axis(t)?;
    Ok(GridSpec { v_count: vc, v_half: vh, t_count: tc, t_half: th })
}

/// `COUNT:HALF`, e.g. `64:4`.
pub fn parse_line(s: &str) -> Result<LineSpec, String> {
    let (count, half) = parse_axis(s)?;
    Ok(LineSpec { count, half })
}

fn parse_axis(s: &str) -> Result<(usize, f64), String> {
    let (c, h) = s.split_once(':').ok_or_else(|| format!("expected COUNT:HALF, got `{s}`"))?;
    let c = c.trim().parse::<usize>().map_err(|e| format!("bad count `{c}`: {e}"))?;
    let h = h.trim().parse::<f64>().map_err(|e| format!("bad half-width `{h}`: {e}"))?;
    Ok((c, h))
}

/// `LO,HI`, e.g. `0.25,4`.
pub fn parse_band(s: &str) -> Result<[f64; 2], String> {
    let (a, b) = s.split_once(',').ok_or("expected LO,HI")?;
    let a = a.trim().parse::<f64>().map_err(|e| format!("bad lower edge `{a}`: {e}"))?;
    let b = b.trim().parse::<f64>().map_err(|e| format!("bad upper edge `{b}`: {e}"))?;
    Ok([a, b])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_the_default() {
        let c: ExperimentConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        c.validate().unwrap();
        assert_eq!(c.line_spec(), LineSpec { count: 64, half: 4.0 });
    }

    #[test]
    fn default_fibers_match_the_library_grid() {
        let c = ExperimentConfig::default();
        assert_eq!(c.lambdas(), flagcalc::inversion::default_lambda_grid::<f64>(4));
    }

    #[test]
    fn band_containing_zero_is_rejected() {
        let c = ExperimentConfig { lambda_band: [0.0, 2.0], ..Default::default() };
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
        let c = ExperimentConfig { lambda_band: [-1.0, 2.0], ..Default::default() };
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn unknown_fields_and_bad_counts_are_rejected() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"kernal": "delta"}"#).is_err());
        let c = ExperimentConfig { grid: GridSpec { v_count: 48, ..ExperimentConfig::default().grid }, ..Default::default() };
        assert!(c.validate().is_err());
        assert!(ExperimentConfig { n: 2, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn flag_syntax() {
        assert_eq!(
            parse_grid("64:4,32:8").unwrap(),
            GridSpec { v_count: 64, v_half: 4.0, t_count: 32, t_half: 8.0 }
        );
        assert_eq!(parse_band("0.5, 2").unwrap(), [0.5, 2.0]);
        assert_eq!(parse_line("32:3").unwrap(), LineSpec { count: 32, half: 3.0 });
        assert!(parse_grid("64,32").is_err());
    }
}
