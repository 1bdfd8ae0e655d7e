//! Gaussian kernel correlation over all cyclic shifts.
//!
//! For a template `x` and a test patch `z`, shift `i` evaluates `k(z, Pⁱx)` where
//! `(Pⁱx)[j] = x[j + i]`. The resulting plane is the first row of the circulant Gram
//! matrix, so the autocorrelation `k(x, x)` generates `K` directly.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::features::FeatureMap;
use crate::spectral::{build_circulant, dft2, idft2, ComplexPlane, RealPlane};

/// First row of a circulant kernel matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelCorrelation {
    plane: RealPlane,
    sigma: Option<f64>,
}

impl KernelCorrelation {
    /// Wraps an arbitrary first row, e.g. a hand-built oracle kernel.
    pub fn from_plane(plane: RealPlane) -> Self {
        Self { plane, sigma: None }
    }

    pub fn plane(&self) -> &RealPlane {
        &self.plane
    }

    /// Kernel width, when produced by [`gaussian_correlation`].
    pub fn sigma(&self) -> Option<f64> {
        self.sigma
    }

    pub fn dims(&self) -> (usize, usize) {
        self.plane.dims()
    }

    /// Eigenvalue array of the Gram matrix `C(k)`: `conj(F(k))`.
    ///
    /// For autocorrelations `k` is point-symmetric and this is just `F(k)`, real.
    pub fn gram_spectrum(&self) -> ComplexPlane {
        dft2(&self.plane).conj()
    }
}

/// Per-channel spectra and energy of a feature map, reusable across correlations.
#[derive(Debug, Clone)]
pub struct FeatureSpectrum {
    width: usize,
    height: usize,
    spectra: Vec<ComplexPlane>,
    norm_sq: f64,
}

impl FeatureSpectrum {
    pub fn new(fm: &FeatureMap) -> Self {
        Self {
            width: fm.width(),
            height: fm.height(),
            spectra: fm.channels().iter().map(dft2).collect(),
            norm_sq: fm.norm_sq(),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn channel_count(&self) -> usize {
        self.spectra.len()
    }
}

/// `k_i = exp(−max(0, ‖x‖² + ‖z‖² − 2·cc_i) / (σ²·N·C))` for every cyclic shift `i`,
/// with `N` cells and `C` channels.
pub fn gaussian_correlation(x: &FeatureMap, z: &FeatureMap, sigma: f64) -> Result<KernelCorrelation> {
    x.ensure_compatible(z)?;
    gaussian_correlation_spectral(&FeatureSpectrum::new(x), &FeatureSpectrum::new(z), sigma)
}

/// [`gaussian_correlation`] on precomputed spectra.
pub fn gaussian_correlation_spectral(
    x: &FeatureSpectrum,
    z: &FeatureSpectrum,
    sigma: f64,
) -> Result<KernelCorrelation> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidConfig(format!("kernel sigma must be positive, got {sigma}")));
    }
    if x.dims() != z.dims() || x.channel_count() != z.channel_count() {
        return Err(Error::mismatch(
            format!("{}x{}x{}", x.width, x.height, x.channel_count()),
            format!("{}x{}x{}", z.width, z.height, z.channel_count()),
        ));
    }
    let n = x.width * x.height;
    let mut acc = vec![Complex64::new(0.0, 0.0); n];
    for (xs, zs) in x.spectra.iter().zip(&z.spectra) {
        for ((a, xv), zv) in acc.iter_mut().zip(xs.data()).zip(zs.data()) {
            *a += zv.conj() * xv;
        }
    }
    let cc = idft2(&ComplexPlane::new(x.width, x.height, acc)?)?;
    let denom = sigma * sigma * (n * x.channel_count()) as f64;
    let energy = x.norm_sq + z.norm_sq;
    let data = cc
        .data()
        .iter()
        .map(|c| (-(energy - 2.0 * c).max(0.0) / denom).exp())
        .collect();
    Ok(KernelCorrelation {
        plane: RealPlane::new(x.width, x.height, data)?,
        sigma: Some(sigma),
    })
}

/// Dense Gram matrix `C(k)`; limited to oracle-sized planes.
pub fn kernel_row_to_gram(k: &KernelCorrelation) -> Result<DMatrix<f64>> {
    build_circulant(&k.plane)
}

/// Smallest eigenvalue of a symmetric matrix; errors when the matrix is not symmetric.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    let asym = (m - m.transpose()).amax();
    if asym > 1e-12 * m.amax().max(1.0) {
        return Err(Error::Precondition(format!(
            "Gram matrix is not symmetric (deviation {asym:.3e})"
        )));
    }
    Ok(SymmetricEigen::new(m.clone()).eigenvalues.min())
}
