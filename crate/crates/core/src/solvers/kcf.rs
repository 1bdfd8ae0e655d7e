use super::{guarded_divide, Labels};
use crate::error::{Error, Result};
use crate::kernels::KernelCorrelation;
use crate::spectral::{dft2, ComplexPlane};

/// Single-kernel ridge regression in the Fourier domain: `F(y) / (F(k) + λ_o)`.
///
/// This is the spectrum of `(K + λ_o I)⁻¹ y` with `K = C(k)`.
pub fn kcf_train(k: &KernelCorrelation, labels: &Labels, lambda_o: f64) -> Result<ComplexPlane> {
    if !(lambda_o > 0.0) {
        return Err(Error::InvalidConfig(format!("lambda_o must be positive, got {lambda_o}")));
    }
    k.plane().ensure_same_dims(labels.y())?;
    let den = k.gram_spectrum().map(|v| v + lambda_o);
    guarded_divide(&dft2(labels.y()), &den)
}
