//! Training and detection on circulant kernel structure.
//!
//! Three solvers share the same spectral machinery:
//! - KCF: one kernel, `A = F(y) / (F(k) + λ_o)`.
//! - MKCF: alternates the ridge solve for `α` with a simplex-constrained quadratic in `d`.
//! - MKCFup: optimizes the decoupled upper bound with per-kernel forgetting, keeping
//!   Fourier-domain numerator/denominator accumulators across frames.

mod kcf;
mod mkcf;
mod mkcfup;

pub use self::kcf::kcf_train;
pub use self::mkcf::{mkcf_alternate, mkcf_d_step, quadratic_terms, MkcfSolution};
pub use self::mkcfup::{mkcfup_init, mkcfup_update, IterationRecord, SolverState};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelCorrelation;
use crate::spectral::{dft2, idft2, ComplexPlane, RealPlane};

/// Magnitude below which a spectral denominator is treated as singular.
pub const SPECTRAL_FLOOR: f64 = 1e-12;

/// Regularization and learning-rate settings shared by the multi-kernel solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Regularizer of the original multi-kernel objective.
    pub lambda_o: f64,
    /// Per-kernel learning rates; the kernel count is `gamma.len()`.
    pub gamma: Vec<f64>,
    pub iters_per_frame: usize,
    /// Weight denominators at or below this value are rejected.
    pub d_floor: f64,
}

impl SolverConfig {
    pub fn new(lambda_o: f64, gamma: Vec<f64>) -> Result<Self> {
        let c = Self {
            lambda_o,
            gamma,
            iters_per_frame: 3,
            d_floor: 1e-12,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_o > 0.0 && self.lambda_o.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "lambda_o must be positive, got {}",
                self.lambda_o
            )));
        }
        if self.gamma.is_empty() {
            return Err(Error::InvalidConfig("at least one kernel is required".into()));
        }
        // γ = 1 (no memory) is admitted so the full-forgetting limit can be exercised
        if let Some(g) = self.gamma.iter().find(|g| !(**g > 0.0 && **g <= 1.0)) {
            return Err(Error::InvalidConfig(format!("learning rate {g} outside (0, 1]")));
        }
        if self.iters_per_frame == 0 {
            return Err(Error::InvalidConfig("iters_per_frame must be at least 1".into()));
        }
        if !(self.d_floor >= 0.0) {
            return Err(Error::InvalidConfig("d_floor must be non-negative".into()));
        }
        Ok(())
    }

    pub fn kernels(&self) -> usize {
        self.gamma.len()
    }

    /// `μ = 2M + 1`.
    pub fn mu(&self) -> f64 {
        (2 * self.kernels() + 1) as f64
    }

    /// Upper-bound regularizer `λ = λ_o / μ`.
    pub fn lambda(&self) -> f64 {
        self.lambda_o / self.mu()
    }
}

/// Gaussian regression target and its per-kernel share.
#[derive(Debug, Clone, PartialEq)]
pub struct Labels {
    y: RealPlane,
    y_c: RealPlane,
    kernels: usize,
}

impl Labels {
    pub fn y(&self) -> &RealPlane {
        &self.y
    }

    /// `y / M`.
    pub fn y_c(&self) -> &RealPlane {
        &self.y_c
    }

    pub fn kernels(&self) -> usize {
        self.kernels
    }

    pub fn dims(&self) -> (usize, usize) {
        self.y.dims()
    }
}

/// Gaussian label of standard deviation `bandwidth_factor·sqrt(w·h)` cells, peaked at
/// cell (0, 0) with cyclic distances.
pub fn gaussian_labels(width: usize, height: usize, bandwidth_factor: f64, kernels: usize) -> Result<Labels> {
    if width < 3 || height < 3 {
        return Err(Error::InvalidDimension(format!(
            "labels need at least 3x3 cells, got {width}x{height}"
        )));
    }
    if !(bandwidth_factor > 0.0) || kernels == 0 {
        return Err(Error::InvalidConfig(
            "label bandwidth and kernel count must be positive".into(),
        ));
    }
    let s = bandwidth_factor * ((width * height) as f64).sqrt();
    let cyc = |i: usize, n: usize| i.min(n - i) as f64;
    let y = RealPlane::from_fn(width, height, |x, y| {
        let (dx, dy) = (cyc(x, width), cyc(y, height));
        (-(dx * dx + dy * dy) / (2.0 * s * s)).exp()
    })?;
    if y.min() <= 0.0 {
        return Err(Error::Numerical("label underflowed to zero".into()));
    }
    let y_c = y.scale(1.0 / kernels as f64);
    Ok(Labels { y, y_c, kernels })
}

/// Detection scores over all cyclic shifts of the test patch.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMap {
    pub plane: RealPlane,
    pub peak: (usize, usize),
    pub peak_value: f64,
    /// Peak offset wrapped into `(−size/2, size/2]` per axis.
    pub displacement: (isize, isize),
}

fn wrap(i: usize, n: usize) -> isize {
    if i <= n / 2 {
        i as isize
    } else {
        i as isize - n as isize
    }
}

/// `Σ_m d_m·F⁻¹(conj(F(k_m)) ⊙ A)` with the first-occurrence row-major argmax.
///
/// A test patch that is the template shifted by `(dx, dy)` peaks at displacement `(dx, dy)`.
pub fn detect(ks: &[KernelCorrelation], alpha_spectrum: &ComplexPlane, d: &[f64]) -> Result<ResponseMap> {
    if ks.is_empty() || ks.len() != d.len() {
        return Err(Error::mismatch(format!("{} weights", ks.len()), d.len()));
    }
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("kernel weights"));
    }
    let dims = alpha_spectrum.dims();
    let mut acc = vec![Complex64::new(0.0, 0.0); alpha_spectrum.len()];
    for (k, dm) in ks.iter().zip(d) {
        if k.dims() != dims {
            return Err(Error::mismatch(format!("{dims:?}"), format!("{:?}", k.dims())));
        }
        for ((a, kv), av) in acc.iter_mut().zip(dft2(k.plane()).data()).zip(alpha_spectrum.data()) {
            *a += kv.conj() * av * *dm;
        }
    }
    let plane = idft2(&ComplexPlane::new(dims.0, dims.1, acc)?)?;
    let (mut best, mut best_v) = (0, f64::NEG_INFINITY);
    for (i, v) in plane.data().iter().enumerate() {
        if *v > best_v {
            best = i;
            best_v = *v;
        }
    }
    let peak = (best % dims.0, best / dims.0);
    Ok(ResponseMap {
        displacement: (wrap(peak.0, dims.0), wrap(peak.1, dims.1)),
        peak,
        peak_value: best_v,
        plane,
    })
}

/// `K_m α` for every kernel, from `α`'s spectrum.
pub(crate) fn gram_products(ks: &[KernelCorrelation], alpha_spectrum: &ComplexPlane) -> Result<Vec<RealPlane>> {
    ks.iter()
        .map(|k| idft2(&k.gram_spectrum().mul(alpha_spectrum)))
        .collect()
}

fn check_instance(ks: &[KernelCorrelation], alpha: &RealPlane, d: &[f64], labels: &Labels) -> Result<()> {
    if ks.len() != d.len() || ks.is_empty() {
        return Err(Error::mismatch(format!("{} weights", ks.len()), d.len()));
    }
    for k in ks {
        alpha.ensure_same_dims(k.plane())?;
    }
    alpha.ensure_same_dims(labels.y())
}

/// Original multi-kernel objective
/// `½‖y − Σ d_m K_m α‖² + (λ_o/2)·αᵀ(Σ d_m K_m)α`.
pub fn objective_f(
    alpha: &RealPlane,
    d: &[f64],
    ks: &[KernelCorrelation],
    labels: &Labels,
    lambda_o: f64,
) -> Result<f64> {
    check_instance(ks, alpha, d, labels)?;
    let kas = gram_products(ks, &dft2(alpha))?;
    let mut resid = labels.y().data().to_vec();
    let mut reg = 0.0;
    for (ka, dm) in kas.iter().zip(d) {
        for (r, v) in resid.iter_mut().zip(ka.data()) {
            *r -= dm * v;
        }
        reg += dm * alpha.dot(ka);
    }
    Ok(0.5 * resid.iter().map(|r| r * r).sum::<f64>() + 0.5 * lambda_o * reg)
}

fn upper_terms(alpha: &RealPlane, d: &[f64], kas: &[RealPlane], y_c: &RealPlane, lambda: f64) -> Vec<f64> {
    kas.iter()
        .zip(d)
        .map(|(ka, dm)| {
            let fit: f64 = y_c
                .data()
                .iter()
                .zip(ka.data())
                .map(|(y, v)| (y - dm * v).powi(2))
                .sum();
            fit + lambda * dm * alpha.dot(ka)
        })
        .collect()
}

/// Decoupled upper bound `(μ/2)·Σ_m (‖y_c − d_m K_m α‖² + λ·d_m·αᵀK_mα)`, with
/// `μ = 2M + 1` and `λ` the upper-bound regularizer.
pub fn objective_upper(
    alpha: &RealPlane,
    d: &[f64],
    ks: &[KernelCorrelation],
    labels: &Labels,
    lambda: f64,
) -> Result<f64> {
    check_instance(ks, alpha, d, labels)?;
    let kas = gram_products(ks, &dft2(alpha))?;
    let mu = (2 * ks.len() + 1) as f64;
    Ok(0.5 * mu * upper_terms(alpha, d, &kas, labels.y_c(), lambda).iter().sum::<f64>())
}

/// Forgetting weights `β_m^j` for frames `j = 1..=p`: `(1−γ)^{p−1}` for the first frame
/// and `γ(1−γ)^{p−j}` afterwards.
pub fn history_weights(gamma: f64, p: usize) -> Vec<f64> {
    (1..=p)
        .map(|j| {
            if j == 1 {
                (1.0 - gamma).powi(p as i32 - 1)
            } else {
                gamma * (1.0 - gamma).powi((p - j) as i32)
            }
        })
        .collect()
}

/// History objective `½·Σ_j Σ_m β_m^j·(‖y_c − d_m K_m^j α‖² + λ·d_m·αᵀK_m^jα)`.
///
/// `frames[j][m]` is kernel `m` of frame `j + 1`; the last entry is the current frame.
pub fn objective_fp(
    frames: &[Vec<KernelCorrelation>],
    gamma: &[f64],
    alpha: &RealPlane,
    d: &[f64],
    labels: &Labels,
    lambda: f64,
) -> Result<f64> {
    if frames.is_empty() {
        return Err(Error::InvalidDimension("history has no frames".into()));
    }
    if gamma.len() != d.len() {
        return Err(Error::mismatch(d.len(), gamma.len()));
    }
    let p = frames.len();
    let betas: Vec<Vec<f64>> = gamma.iter().map(|g| history_weights(*g, p)).collect();
    let a_hat = dft2(alpha);
    let mut total = 0.0;
    for (j, ks) in frames.iter().enumerate() {
        check_instance(ks, alpha, d, labels)?;
        let kas = gram_products(ks, &a_hat)?;
        for (m, u) in upper_terms(alpha, d, &kas, labels.y_c(), lambda).iter().enumerate() {
            total += betas[m][j] * u;
        }
    }
    Ok(0.5 * total)
}

/// Bin-wise ratio with a singularity guard on the denominator magnitude.
pub(crate) fn guarded_divide(num: &ComplexPlane, den: &ComplexPlane) -> Result<ComplexPlane> {
    let mut out = Vec::with_capacity(num.len());
    for (bin, (n, d)) in num.data().iter().zip(den.data()).enumerate() {
        if d.norm() < SPECTRAL_FLOOR {
            return Err(Error::Conditioning {
                bin,
                detail: format!("denominator magnitude {:.3e}", d.norm()),
            });
        }
        out.push(n / d);
    }
    ComplexPlane::new(num.width(), num.height(), out)
}
