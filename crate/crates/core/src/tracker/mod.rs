//! The per-frame tracking loop.
//!
//! Each step searches a small scale pyramid around the current box, moves to the best
//! response, then re-extracts features at the new location to update the appearance
//! templates and the solver.

mod config;
mod run;

pub use self::config::{ColorFallback, ColorMode, ModeParams, ModeSelect, SingleFeature, SolverKind, TrackerConfig};
pub use self::run::{run_sequence, FrameSource, RunReport};

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{
    color_names, extract_patch, fit_pca, gray_feature, hann_band, hog, pca_reduce, rgb_feature, BoundingBox,
    ColorNameTable, FeatureMap, HogParams, ImageFrame, PcaBasis, CELL_SIZE, PCA_DIM,
};
use crate::kernels::{gaussian_correlation_spectral, FeatureSpectrum, KernelCorrelation};
use crate::solvers::{
    detect, gaussian_labels, kcf_train, mkcf_alternate, mkcfup_init, mkcfup_update, Labels, ResponseMap,
    SolverConfig, SolverState,
};
use crate::spectral::ComplexPlane;

/// Which appearance cue a kernel looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    /// Color names reduced to 4 channels, cell RGB, or mean-free intensity in gray mode.
    Color,
    Hog,
}

/// Concrete feature behind [`FeatureKind::Color`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorFeature {
    /// Color names from a loaded table file.
    ColorNames,
    /// Color names from the built-in prototype table.
    PrototypeNames,
    /// Cell-averaged RGB, used when no color-name table is configured.
    RgbFallback,
    GrayIntensity,
}

/// Per-kernel settings after mode resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub feature: FeatureKind,
    pub sigma: f64,
    pub gamma: f64,
    pub eta: f64,
}

/// The configuration actually in force, including choices made from the first frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveConfig {
    pub config: TrackerConfig,
    pub mode: ColorMode,
    pub color_feature: ColorFeature,
    pub kernels: Vec<KernelSpec>,
    pub scale_count: usize,
    /// Feature grid in cells.
    pub cells: (usize, usize),
    /// Resampled patch in pixels.
    pub patch: (usize, usize),
    /// Source pixels per patch pixel at scale 1.
    pub resample_ratio: f64,
    /// Per kernel, whether its PCA basis had fewer informative directions than outputs.
    pub pca_low_rank: Vec<bool>,
}

#[derive(Debug, Clone)]
enum Model {
    Kcf { alpha: ComplexPlane },
    Mkcf { alpha: ComplexPlane, d: Vec<f64> },
    Mkcfup { state: SolverState, solver: SolverConfig },
}

/// Result of one tracking step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub bbox: BoundingBox,
    pub scale: f64,
    pub peak: f64,
    /// Displacement in cells chosen at the winning scale.
    pub displacement: (isize, isize),
    /// True when the box was clamped back into the frame.
    pub drift: bool,
}

/// Outcome of searching the scale pyramid without updating the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub bbox: BoundingBox,
    pub scale: f64,
    pub response: ResponseMap,
}

/// One tracker instance: templates, projections, labels and solver model.
#[derive(Debug, Clone)]
pub struct TrackerState {
    effective: EffectiveConfig,
    table: Option<Arc<ColorNameTable>>,
    pca: Vec<Option<PcaBasis>>,
    templates: Vec<FeatureMap>,
    template_spectra: Vec<FeatureSpectrum>,
    labels: Labels,
    model: Model,
    center: (f64, f64),
    base_size: (f64, f64),
    scale: f64,
    frame_index: usize,
    drift: bool,
}

impl TrackerState {
    /// Builds templates, PCA bases and the solver model from the first frame.
    pub fn init(frame: &ImageFrame, bbox: BoundingBox, config: &TrackerConfig) -> Result<Self> {
        let table = match &config.color_table {
            Some(path) => Some(Arc::new(ColorNameTable::load(path)?)),
            None => None,
        };
        Self::init_with_table(frame, bbox, config, table)
    }

    /// Like [`TrackerState::init`] with an already loaded color-name table.
    pub fn init_with_table(
        frame: &ImageFrame,
        bbox: BoundingBox,
        config: &TrackerConfig,
        table: Option<Arc<ColorNameTable>>,
    ) -> Result<Self> {
        config.validate()?;
        bbox.validate()?;
        if !bbox.intersects_frame(frame.width(), frame.height()) {
            return Err(Error::OutOfFrame(bbox.to_string()));
        }
        let mode = match config.mode {
            ModeSelect::Auto if frame.is_effectively_gray() => ColorMode::Gray,
            ModeSelect::Auto | ModeSelect::Color => ColorMode::Color,
            ModeSelect::Gray => ColorMode::Gray,
        };
        if mode == ColorMode::Color && !frame.is_color() {
            return Err(Error::UnsupportedFeature("color mode needs 3-channel frames".into()));
        }
        let (color_feature, table) = match (mode, table, config.color_fallback) {
            (ColorMode::Gray, _, _) => (ColorFeature::GrayIntensity, None),
            (ColorMode::Color, Some(t), _) => (ColorFeature::ColorNames, Some(t)),
            (ColorMode::Color, None, ColorFallback::Prototype) => {
                (ColorFeature::PrototypeNames, Some(prototype_table()))
            }
            (ColorMode::Color, None, ColorFallback::Rgb) => (ColorFeature::RgbFallback, None),
        };
        let params = config.params(mode);
        let spec = |feature| match feature {
            FeatureKind::Color => KernelSpec {
                feature,
                sigma: params.sigma_color,
                gamma: params.gamma_color,
                eta: params.eta_color(),
            },
            FeatureKind::Hog => KernelSpec {
                feature,
                sigma: params.sigma_hog,
                gamma: params.gamma_hog,
                eta: params.eta_hog(),
            },
        };
        let kernels: Vec<KernelSpec> = if config.solver.is_multi_kernel() {
            vec![spec(FeatureKind::Color), spec(FeatureKind::Hog)]
        } else {
            vec![spec(match config.single_feature {
                SingleFeature::Hog => FeatureKind::Hog,
                SingleFeature::Color => FeatureKind::Color,
            })]
        };

        let win = (bbox.w * config.search_factor, bbox.h * config.search_factor);
        let cap = (config.max_template_cells * CELL_SIZE) as f64;
        let resample_ratio = ((win.0 * win.1).sqrt() / cap).max(1.0);
        let cell_count = |side: f64| ((side / resample_ratio / CELL_SIZE as f64).round() as usize).max(3);
        let cells = (cell_count(win.0), cell_count(win.1));
        let patch = (cells.0 * CELL_SIZE, cells.1 * CELL_SIZE);
        let label_split = if config.solver == SolverKind::Mkcfup { kernels.len() } else { 1 };
        let labels = gaussian_labels(cells.0, cells.1, config.bandwidth_factor, label_split)?;

        let mut state = Self {
            effective: EffectiveConfig {
                config: config.clone(),
                mode,
                color_feature,
                scale_count: config.effective_scale_count(),
                cells,
                patch,
                resample_ratio,
                pca_low_rank: vec![false; kernels.len()],
                kernels,
            },
            table,
            pca: Vec::new(),
            templates: Vec::new(),
            template_spectra: Vec::new(),
            labels,
            // replaced below once the first kernels exist
            model: Model::Kcf {
                alpha: ComplexPlane::filled(1, 1, Default::default())?,
            },
            center: bbox.center(),
            base_size: (bbox.w, bbox.h),
            scale: 1.0,
            frame_index: 1,
            drift: false,
        };

        let patch_img = state.extract(frame, state.center, 1.0)?;
        let raw = state.raw_features(&patch_img)?;
        state.pca = raw
            .iter()
            .zip(&state.effective.kernels)
            .map(|(fm, k)| {
                let needs_pca = k.feature == FeatureKind::Hog
                    || matches!(
                        state.effective.color_feature,
                        ColorFeature::ColorNames | ColorFeature::PrototypeNames
                    );
                needs_pca.then(|| fit_pca(std::slice::from_ref(fm), PCA_DIM)).transpose()
            })
            .collect::<Result<_>>()?;
        state.effective.pca_low_rank = state
            .pca
            .iter()
            .map(|b| b.as_ref().is_some_and(PcaBasis::is_low_rank))
            .collect();
        state.templates = state.finish_features(raw)?;
        state.template_spectra = state.templates.iter().map(FeatureSpectrum::new).collect();

        let ks = state.auto_kernels()?;
        state.model = match config.solver {
            SolverKind::Kcf | SolverKind::KcfScale => Model::Kcf {
                alpha: kcf_train(&ks[0], &state.labels, config.lambda_o)?,
            },
            SolverKind::Mkcf => {
                let sol = mkcf_alternate(&ks, &state.labels, config.lambda_o, config.iters_per_frame)?;
                Model::Mkcf {
                    alpha: sol.alpha_spectrum,
                    d: sol.d,
                }
            }
            SolverKind::Mkcfup => {
                let solver = SolverConfig {
                    lambda_o: config.lambda_o,
                    gamma: state.effective.kernels.iter().map(|k| k.gamma).collect(),
                    iters_per_frame: config.iters_per_frame,
                    d_floor: config.d_floor,
                };
                Model::Mkcfup {
                    state: mkcfup_init(&ks, &state.labels, &solver)?,
                    solver,
                }
            }
        };
        Ok(state)
    }

    pub fn effective(&self) -> &EffectiveConfig {
        &self.effective
    }

    pub fn bbox(&self) -> BoundingBox {
        let (w, h) = (self.base_size.0 * self.scale, self.base_size.1 * self.scale);
        BoundingBox {
            x: self.center.0 - w / 2.0,
            y: self.center.1 - h / 2.0,
            w,
            h,
        }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn frame_index(&self) -> usize {
        self.frame_index
    }

    pub fn drifted(&self) -> bool {
        self.drift
    }

    pub fn templates(&self) -> &[FeatureMap] {
        &self.templates
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    pub fn pca_bases(&self) -> &[Option<PcaBasis>] {
        &self.pca
    }

    /// Kernel weights used for detection.
    pub fn weights(&self) -> Vec<f64> {
        match &self.model {
            Model::Kcf { .. } => vec![1.0],
            Model::Mkcf { d, .. } => d.clone(),
            Model::Mkcfup { state, .. } => state.d().to_vec(),
        }
    }

    /// The recursive model, for the upper-bound solver.
    pub fn solver_state(&self) -> Option<&SolverState> {
        match &self.model {
            Model::Mkcfup { state, .. } => Some(state),
            _ => None,
        }
    }

    pub fn alpha_spectrum(&self) -> &ComplexPlane {
        match &self.model {
            Model::Kcf { alpha } | Model::Mkcf { alpha, .. } => alpha,
            Model::Mkcfup { state, .. } => state.alpha_spectrum(),
        }
    }

    /// Source pixels per cell along each axis at `scale`.
    pub fn cell_pixels(&self, scale: f64) -> (f64, f64) {
        let sf = self.effective.config.search_factor;
        (
            self.base_size.0 * sf * scale / self.effective.cells.0 as f64,
            self.base_size.1 * sf * scale / self.effective.cells.1 as f64,
        )
    }

    fn extract(&self, frame: &ImageFrame, center: (f64, f64), scale: f64) -> Result<ImageFrame> {
        let b = BoundingBox::from_center(center.0, center.1, self.base_size.0 * scale, self.base_size.1 * scale)?;
        let (pw, ph) = self.effective.patch;
        extract_patch(frame, &b, self.effective.config.search_factor, pw, ph)
    }

    fn raw_features(&self, patch: &ImageFrame) -> Result<Vec<FeatureMap>> {
        self.effective
            .kernels
            .iter()
            .map(|k| match k.feature {
                FeatureKind::Hog => hog(patch, &HogParams::default()),
                FeatureKind::Color => match self.effective.color_feature {
                    ColorFeature::GrayIntensity => gray_feature(patch),
                    ColorFeature::RgbFallback => rgb_feature(patch),
                    ColorFeature::ColorNames | ColorFeature::PrototypeNames => color_names(
                        patch,
                        self.table.as_deref().ok_or_else(|| {
                            Error::UnsupportedFeature("color names selected without a table".into())
                        })?,
                    ),
                },
            })
            .collect()
    }

    fn finish_features(&self, raw: Vec<FeatureMap>) -> Result<Vec<FeatureMap>> {
        raw.into_iter()
            .zip(&self.pca)
            .map(|(fm, basis)| {
                let reduced = match basis {
                    Some(b) => pca_reduce(&fm, b)?,
                    None => fm,
                };
                hann_band(&reduced)
            })
            .collect()
    }

    /// Banded, projected features of the patch around `center` at `scale`.
    pub fn features(&self, frame: &ImageFrame, center: (f64, f64), scale: f64) -> Result<Vec<FeatureMap>> {
        let patch = self.extract(frame, center, scale)?;
        self.finish_features(self.raw_features(&patch)?)
    }

    fn auto_kernels(&self) -> Result<Vec<KernelCorrelation>> {
        self.template_spectra
            .iter()
            .zip(&self.effective.kernels)
            .map(|(s, k)| gaussian_correlation_spectral(s, s, k.sigma))
            .collect()
    }

    fn kernels_against(&self, test: &[FeatureMap]) -> Result<Vec<KernelCorrelation>> {
        self.template_spectra
            .iter()
            .zip(test)
            .zip(&self.effective.kernels)
            .map(|((x, z), k)| gaussian_correlation_spectral(x, &FeatureSpectrum::new(z), k.sigma))
            .collect()
    }

    fn respond(&self, test: &[FeatureMap]) -> Result<ResponseMap> {
        let ks = self.kernels_against(test)?;
        detect(&ks, self.alpha_spectrum(), &self.weights())
    }

    /// Response map of the patch centered at `center` with box scale `scale`.
    pub fn response_at(&self, frame: &ImageFrame, center: (f64, f64), scale: f64) -> Result<ResponseMap> {
        self.respond(&self.features(frame, center, scale)?)
    }

    /// Searches the scale pyramid around the current box without touching the model.
    pub fn detect(&self, frame: &ImageFrame) -> Result<Detection> {
        let n = self.effective.scale_count;
        let step = self.effective.config.scale_step;
        let half = (n as f64 - 1.0) / 2.0;
        let scales: Vec<f64> = (0..n).map(|i| self.scale * step.powf(i as f64 - half)).collect();
        let responses = scales
            .par_iter()
            .map(|&s| self.response_at(frame, self.center, s))
            .collect::<Result<Vec<_>>>()?;
        let mut best = 0;
        for (i, r) in responses.iter().enumerate() {
            if r.peak_value > responses[best].peak_value {
                best = i;
            }
        }
        let scale = scales[best];
        let response = responses.into_iter().nth(best).expect("non-empty pyramid");
        let (px, py) = self.cell_pixels(scale);
        let center = (
            self.center.0 + response.displacement.0 as f64 * px,
            self.center.1 + response.displacement.1 as f64 * py,
        );
        let (w, h) = (self.base_size.0 * scale, self.base_size.1 * scale);
        Ok(Detection {
            bbox: BoundingBox {
                x: center.0 - w / 2.0,
                y: center.1 - h / 2.0,
                w,
                h,
            },
            scale,
            response,
        })
    }

    /// Locates the target in `frame`, then updates templates and model at the new box.
    pub fn step(&mut self, frame: &ImageFrame) -> Result<StepOutput> {
        let det = self.detect(frame)?;
        let mut center = det.bbox.center();
        let (fw, fh) = (frame.width() as f64, frame.height() as f64);
        self.drift = !det.bbox.intersects_frame(frame.width(), frame.height());
        if self.drift {
            log::warn!("frame {}: box {} left the frame; clamping", self.frame_index + 1, det.bbox);
            center = (center.0.clamp(0.0, fw - 1.0), center.1.clamp(0.0, fh - 1.0));
        }
        self.center = center;
        self.scale = det.scale;
        self.frame_index += 1;

        let fresh = self.features(frame, self.center, self.scale)?;
        let fresh_spectra: Vec<FeatureSpectrum> = fresh.iter().map(FeatureSpectrum::new).collect();
        let ks = fresh_spectra
            .iter()
            .zip(&self.effective.kernels)
            .map(|(s, k)| gaussian_correlation_spectral(s, s, k.sigma))
            .collect::<Result<Vec<_>>>()?;
        self.templates = self
            .templates
            .iter()
            .zip(&fresh)
            .zip(&self.effective.kernels)
            .map(|((t, f), k)| t.blend(f, k.eta))
            .collect::<Result<_>>()?;
        self.template_spectra = self.templates.iter().map(FeatureSpectrum::new).collect();

        let cfg = &self.effective.config;
        let gammas: Vec<f64> = self.effective.kernels.iter().map(|k| k.gamma).collect();
        let rate = gammas.iter().sum::<f64>() / gammas.len() as f64;
        match &mut self.model {
            Model::Kcf { alpha } => {
                let fresh_alpha = kcf_train(&ks[0], &self.labels, cfg.lambda_o)?;
                *alpha = blend_spectrum(alpha, &fresh_alpha, rate);
            }
            Model::Mkcf { alpha, d } => {
                let sol = mkcf_alternate(&ks, &self.labels, cfg.lambda_o, cfg.iters_per_frame)?;
                *alpha = blend_spectrum(alpha, &sol.alpha_spectrum, rate);
                for (a, b) in d.iter_mut().zip(&sol.d) {
                    *a = (1.0 - rate) * *a + rate * b;
                }
            }
            Model::Mkcfup { state, solver } => {
                *state = mkcfup_update(state, &ks, &self.labels, solver)?;
            }
        }
        Ok(StepOutput {
            bbox: self.bbox(),
            scale: self.scale,
            peak: det.response.peak_value,
            displacement: det.response.displacement,
            drift: self.drift,
        })
    }
}

fn prototype_table() -> Arc<ColorNameTable> {
    static TABLE: OnceLock<Arc<ColorNameTable>> = OnceLock::new();
    TABLE.get_or_init(|| Arc::new(ColorNameTable::prototype())).clone()
}

fn blend_spectrum(old: &ComplexPlane, new: &ComplexPlane, rate: f64) -> ComplexPlane {
    old.zip_map(new, |a, b| a * (1.0 - rate) + b * rate)
}
