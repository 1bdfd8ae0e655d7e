use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Which training/detection algorithm drives the tracker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    /// Single kernel, fixed scale.
    Kcf,
    /// Single kernel with the scale pyramid.
    #[serde(rename = "kcfscale")]
    KcfScale,
    /// Two kernels, alternating α and simplex-constrained weights.
    Mkcf,
    /// Two kernels trained on the upper-bound objective with recursive accumulators.
    Mkcfup,
}

impl SolverKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "kcf" => Ok(Self::Kcf),
            "kcfscale" => Ok(Self::KcfScale),
            "mkcf" => Ok(Self::Mkcf),
            "mkcfup" => Ok(Self::Mkcfup),
            other => Err(Error::InvalidConfig(format!(
                "unknown solver {other:?}; expected kcf, kcfscale, mkcf or mkcfup"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Kcf => "kcf",
            Self::KcfScale => "kcfscale",
            Self::Mkcf => "mkcf",
            Self::Mkcfup => "mkcfup",
        }
    }

    pub fn is_multi_kernel(self) -> bool {
        matches!(self, Self::Mkcf | Self::Mkcfup)
    }
}

/// Feature used by the single-kernel solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SingleFeature {
    Hog,
    Color,
}

/// How the color/gray parameter set is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeSelect {
    /// Gray when every pixel of the first frame has equal channels.
    Auto,
    Color,
    Gray,
}

/// Resolved appearance mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorMode {
    Color,
    Gray,
}

/// Color feature used when no color-name table file is configured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorFallback {
    /// The built-in prototype color-name table, reduced to 4 channels like a loaded table.
    Prototype,
    /// Cell-averaged RGB, 3 channels, no PCA.
    Rgb,
}

/// Kernel widths and learning rates for one appearance mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeParams {
    pub sigma_color: f64,
    pub sigma_hog: f64,
    pub gamma_color: f64,
    pub gamma_hog: f64,
    /// Template learning rate; `None` uses `gamma_color`.
    #[serde(default)]
    pub eta_color: Option<f64>,
    /// Template learning rate; `None` uses `gamma_hog`.
    #[serde(default)]
    pub eta_hog: Option<f64>,
}

impl ModeParams {
    pub fn color_defaults() -> Self {
        Self {
            sigma_color: 0.515,
            sigma_hog: 0.6,
            gamma_color: 0.0174,
            gamma_hog: 0.0173,
            eta_color: None,
            eta_hog: None,
        }
    }

    pub fn gray_defaults() -> Self {
        Self {
            sigma_color: 0.3,
            sigma_hog: 0.4,
            gamma_color: 0.0175,
            gamma_hog: 0.018,
            eta_color: None,
            eta_hog: None,
        }
    }

    pub fn eta_color(&self) -> f64 {
        self.eta_color.unwrap_or(self.gamma_color)
    }

    pub fn eta_hog(&self) -> f64 {
        self.eta_hog.unwrap_or(self.gamma_hog)
    }

    fn validate(&self, mode: &str) -> Result<()> {
        for (name, v) in [("sigma_color", self.sigma_color), ("sigma_hog", self.sigma_hog)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{mode}.{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("gamma_color", self.gamma_color), ("gamma_hog", self.gamma_hog)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidConfig(format!("{mode}.{name} must lie in (0, 1], got {v}")));
            }
        }
        for (name, v) in [("eta_color", self.eta_color()), ("eta_hog", self.eta_hog())] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!("{mode}.{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

/// Every tunable of the tracking loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackerConfig {
    pub solver: SolverKind,
    /// Search window side relative to the target box.
    pub search_factor: f64,
    pub color: ModeParams,
    pub gray: ModeParams,
    pub mode: ModeSelect,
    /// Regularizer of the original objective; the upper-bound solver divides it by `2M + 1`.
    pub lambda_o: f64,
    pub scale_count: usize,
    pub scale_step: f64,
    /// Label standard deviation relative to `sqrt(cells_w · cells_h)`.
    pub bandwidth_factor: f64,
    pub iters_per_frame: usize,
    /// Cap on the template area, in cells per side of an equivalent square.
    pub max_template_cells: usize,
    pub single_feature: SingleFeature,
    /// Optional color-name table file.
    pub color_table: Option<PathBuf>,
    /// What color mode uses without a table file.
    pub color_fallback: ColorFallback,
    pub d_floor: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            solver: SolverKind::Mkcfup,
            search_factor: 2.5,
            color: ModeParams::color_defaults(),
            gray: ModeParams::gray_defaults(),
            mode: ModeSelect::Auto,
            lambda_o: 1e-4,
            scale_count: 5,
            scale_step: 1.02,
            bandwidth_factor: 0.1,
            iters_per_frame: 3,
            max_template_cells: 96,
            single_feature: SingleFeature::Hog,
            color_table: None,
            color_fallback: ColorFallback::Prototype,
            d_floor: 1e-12,
        }
    }
}

impl TrackerConfig {
    pub fn for_solver(solver: SolverKind) -> Self {
        Self {
            solver,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.search_factor >= 1.0 && self.search_factor.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "search_factor must be at least 1, got {}",
                self.search_factor
            )));
        }
        self.color.validate("color")?;
        self.gray.validate("gray")?;
        if !(self.lambda_o > 0.0 && self.lambda_o.is_finite()) {
            return Err(Error::InvalidConfig(format!("lambda_o must be positive, got {}", self.lambda_o)));
        }
        if self.scale_count == 0 || self.scale_count % 2 == 0 {
            return Err(Error::InvalidConfig(format!(
                "scale_count must be odd and positive, got {}",
                self.scale_count
            )));
        }
        if !(self.scale_step > 1.0 && self.scale_step.is_finite()) {
            return Err(Error::InvalidConfig(format!("scale_step must exceed 1, got {}", self.scale_step)));
        }
        if !(self.bandwidth_factor > 0.0) {
            return Err(Error::InvalidConfig("bandwidth_factor must be positive".into()));
        }
        if self.iters_per_frame == 0 {
            return Err(Error::InvalidConfig("iters_per_frame must be at least 1".into()));
        }
        if self.max_template_cells < 3 {
            return Err(Error::InvalidConfig("max_template_cells must be at least 3".into()));
        }
        if !(self.d_floor >= 0.0) {
            return Err(Error::InvalidConfig("d_floor must be non-negative".into()));
        }
        Ok(())
    }

    /// Scales searched per frame; the fixed-scale KCF always uses one.
    pub fn effective_scale_count(&self) -> usize {
        match self.solver {
            SolverKind::Kcf => 1,
            _ => self.scale_count,
        }
    }

    pub fn params(&self, mode: ColorMode) -> &ModeParams {
        match mode {
            ColorMode::Color => &self.color,
            ColorMode::Gray => &self.gray,
        }
    }

    /// Sets a field by its dotted path, e.g. `color.sigma_hog` or `solver`.
    ///
    /// The value is read as JSON when it parses as JSON and as a plain string otherwise,
    /// so both `scale_count=3` and `solver=mkcf` work.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let mut tree = serde_json::to_value(&*self)
            .map_err(|e| Error::InvalidConfig(format!("cannot serialize config: {e}")))?;
        let parsed = serde_json::from_str::<Value>(value).unwrap_or_else(|_| Value::String(value.to_string()));
        let mut slot = &mut tree;
        for part in key.split('.') {
            slot = slot
                .as_object_mut()
                .and_then(|o| o.get_mut(part))
                .ok_or_else(|| Error::InvalidConfig(format!("unknown config key {key:?}")))?;
        }
        *slot = parsed;
        let updated: TrackerConfig = serde_json::from_value(tree)
            .map_err(|e| Error::InvalidConfig(format!("bad value {value:?} for {key}: {e}")))?;
        updated.validate()?;
        *self = updated;
        Ok(())
    }

    /// Applies `key=value` overrides in order.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for o in overrides {
            let o = o.as_ref();
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("override {o:?} is not key=value")))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }
}
