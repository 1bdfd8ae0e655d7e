use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{gram_products, guarded_divide, kcf_train, objective_f, Labels};
use crate::error::{Error, Result};
use crate::kernels::KernelCorrelation;
use crate::spectral::{dft2, idft2, ComplexPlane};

/// Result of the alternating MKCF optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct MkcfSolution {
    pub alpha_spectrum: ComplexPlane,
    pub d: Vec<f64>,
    /// Objective after every half-step (α then d), in order.
    pub objective_trace: Vec<f64>,
}

/// `A_ij = (K_iα)ᵀ(K_jα)` and `B_m = (λ_oα − 2y)ᵀK_mα`, so that the objective in `d`
/// is `½dᵀAd + ½dᵀB + ½‖y‖²`.
pub fn quadratic_terms(
    ks: &[KernelCorrelation],
    alpha_spectrum: &ComplexPlane,
    labels: &Labels,
    lambda_o: f64,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let alpha = idft2(alpha_spectrum)?;
    alpha.ensure_same_dims(labels.y())?;
    let kas = gram_products(ks, alpha_spectrum)?;
    let m = ks.len();
    let a = DMatrix::from_fn(m, m, |i, j| kas[i].dot(&kas[j]));
    let b = DVector::from_fn(m, |i, _| {
        kas[i]
            .data()
            .iter()
            .zip(alpha.data())
            .zip(labels.y().data())
            .map(|((k, a), y)| (lambda_o * a - 2.0 * y) * k)
            .sum()
    });
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("kernel-weight quadratic"));
    }
    Ok((a, b))
}

/// Exact minimizer of `½dᵀAd + ½dᵀB` over the 2-simplex, parametrized as `d = (t, 1 − t)`.
pub fn mkcf_d_step(
    ks: &[KernelCorrelation],
    alpha_spectrum: &ComplexPlane,
    labels: &Labels,
    lambda_o: f64,
) -> Result<Vec<f64>> {
    if ks.len() != 2 {
        return Err(Error::InvalidConfig(format!(
            "the simplex weight step supports exactly 2 kernels, got {}",
            ks.len()
        )));
    }
    let (a, b) = quadratic_terms(ks, alpha_spectrum, labels, lambda_o)?;
    let curv = a[(0, 0)] - 2.0 * a[(0, 1)] + a[(1, 1)];
    let slope0 = a[(0, 1)] - a[(1, 1)] + 0.5 * (b[0] - b[1]);
    let scale = a.amax().max(b.amax()).max(f64::MIN_POSITIVE);
    let t = if curv > 1e-14 * scale {
        (-slope0 / curv).clamp(0.0, 1.0)
    } else if slope0.abs() <= 1e-14 * scale {
        0.5
    } else if slope0 > 0.0 {
        0.0
    } else {
        1.0
    };
    Ok(vec![t, 1.0 - t])
}

fn alpha_step(ks: &[KernelCorrelation], d: &[f64], labels: &Labels, lambda_o: f64) -> Result<ComplexPlane> {
    let (w, h) = labels.dims();
    let mut den = vec![Complex64::new(lambda_o, 0.0); w * h];
    for (k, dm) in ks.iter().zip(d) {
        k.plane().ensure_same_dims(labels.y())?;
        for (acc, v) in den.iter_mut().zip(k.gram_spectrum().data()) {
            *acc += v * *dm;
        }
    }
    guarded_divide(&dft2(labels.y()), &ComplexPlane::new(w, h, den)?)
}

/// Alternates the ridge solve for `α` (fixed `d`) with the simplex step for `d`
/// (fixed `α`), starting from `d = 1/M`.
///
/// With one kernel this is [`kcf_train`] with `d = (1)`.
pub fn mkcf_alternate(
    ks: &[KernelCorrelation],
    labels: &Labels,
    lambda_o: f64,
    iters: usize,
) -> Result<MkcfSolution> {
    if iters == 0 {
        return Err(Error::InvalidConfig("at least one alternation is required".into()));
    }
    match ks.len() {
        0 => Err(Error::InvalidConfig("no kernels".into())),
        1 => {
            let alpha_spectrum = kcf_train(&ks[0], labels, lambda_o)?;
            let f = objective_f(&idft2(&alpha_spectrum)?, &[1.0], ks, labels, lambda_o)?;
            Ok(MkcfSolution {
                alpha_spectrum,
                d: vec![1.0],
                objective_trace: vec![f],
            })
        }
        2 => {
            let mut d = vec![0.5, 0.5];
            let mut trace = Vec::with_capacity(2 * iters);
            let mut alpha_spectrum = alpha_step(ks, &d, labels, lambda_o)?;
            for it in 0..iters {
                if it > 0 {
                    alpha_spectrum = alpha_step(ks, &d, labels, lambda_o)?;
                }
                let alpha = idft2(&alpha_spectrum)?;
                trace.push(objective_f(&alpha, &d, ks, labels, lambda_o)?);
                d = mkcf_d_step(ks, &alpha_spectrum, labels, lambda_o)?;
                trace.push(objective_f(&alpha, &d, ks, labels, lambda_o)?);
            }
            for w in trace.windows(2) {
                if w[1] > w[0] + 1e-12 * w[0].abs().max(1.0) {
                    log::warn!("MKCF objective rose from {} to {}", w[0], w[1]);
                }
            }
            Ok(MkcfSolution {
                alpha_spectrum,
                d,
                objective_trace: trace,
            })
        }
        m => Err(Error::InvalidConfig(format!(
            "the simplex weight step supports at most 2 kernels, got {m}"
        ))),
    }
}
