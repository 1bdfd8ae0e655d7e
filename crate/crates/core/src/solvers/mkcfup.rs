use num_complex::Complex64;

use super::{Labels, SolverConfig};
use crate::error::{Error, Result};
use crate::kernels::KernelCorrelation;
use crate::spectral::{dft2, idft2, ComplexPlane};

/// One within-frame iteration: the weights used to build `α` and the weights derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub d_in: Vec<f64>,
    pub d_out: Vec<f64>,
}

/// Recursive MKCFup model after frame `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    an: Vec<ComplexPlane>,
    ad: Vec<ComplexPlane>,
    dn: Vec<f64>,
    dd: Vec<f64>,
    alpha_spectrum: ComplexPlane,
    d: Vec<f64>,
    committed_d: Vec<f64>,
    frame_index: usize,
    trace: Vec<IterationRecord>,
}

impl SolverState {
    /// Per-kernel numerator spectra `A^N_m`.
    pub fn an(&self) -> &[ComplexPlane] {
        &self.an
    }

    /// Per-kernel denominator spectra `A^D_m`.
    pub fn ad(&self) -> &[ComplexPlane] {
        &self.ad
    }

    pub fn dn(&self) -> &[f64] {
        &self.dn
    }

    pub fn dd(&self) -> &[f64] {
        &self.dd
    }

    /// `A_p = ΣA^N / ΣA^D`.
    pub fn alpha_spectrum(&self) -> &ComplexPlane {
        &self.alpha_spectrum
    }

    /// Kernel weights after the last iteration, `d^N / d^D`.
    pub fn d(&self) -> &[f64] {
        &self.d
    }

    /// Weights baked into this frame's accumulator terms (the last iteration's input).
    pub fn committed_d(&self) -> &[f64] {
        &self.committed_d
    }

    /// 1-based index of the last processed frame.
    pub fn frame_index(&self) -> usize {
        self.frame_index
    }

    /// Iterations performed on the last frame.
    pub fn trace(&self) -> &[IterationRecord] {
        &self.trace
    }

    pub fn dims(&self) -> (usize, usize) {
        self.alpha_spectrum.dims()
    }
}

/// First-frame model: `iters_per_frame` alternations of the `α` and `d` evaluations with
/// no history, starting from `d = 1/M`.
pub fn mkcfup_init(ks: &[KernelCorrelation], labels: &Labels, config: &SolverConfig) -> Result<SolverState> {
    run_frame(None, ks, labels, config)
}

/// Folds frame `p`'s kernels into the model from frame `p − 1`.
///
/// History is frozen for the whole frame: each iteration recomputes only this frame's
/// terms `γ_m·F(d_m k_m)⊙(…)` with the current `d`, starting again from `d = 1/M`.
/// The accumulators keep the terms of the final iteration.
pub fn mkcfup_update(
    state: &SolverState,
    ks: &[KernelCorrelation],
    labels: &Labels,
    config: &SolverConfig,
) -> Result<SolverState> {
    run_frame(Some(state), ks, labels, config)
}

fn run_frame(
    prev: Option<&SolverState>,
    ks: &[KernelCorrelation],
    labels: &Labels,
    config: &SolverConfig,
) -> Result<SolverState> {
    config.validate()?;
    let m = config.kernels();
    if ks.len() != m {
        return Err(Error::mismatch(format!("{m} kernels"), ks.len()));
    }
    if labels.kernels() != m {
        return Err(Error::mismatch(
            format!("labels split over {m} kernels"),
            labels.kernels(),
        ));
    }
    let (w, h) = labels.dims();
    for k in ks {
        k.plane().ensure_same_dims(labels.y())?;
    }
    if let Some(p) = prev {
        if p.dims() != (w, h) || p.an.len() != m {
            return Err(Error::mismatch(
                format!("{w}x{h} model with {m} kernels"),
                format!("{:?} model with {} kernels", p.dims(), p.an.len()),
            ));
        }
    }
    let lambda = config.lambda();
    let n = w * h;
    let y_c = labels.y_c();
    let y_hat = dft2(y_c);
    let grams: Vec<ComplexPlane> = ks.iter().map(KernelCorrelation::gram_spectrum).collect();
    let (hist, cur): (Vec<f64>, Vec<f64>) = match prev {
        None => (vec![0.0; m], vec![1.0; m]),
        Some(_) => config.gamma.iter().map(|g| (1.0 - g, *g)).unzip(),
    };

    let mut d = vec![1.0 / m as f64; m];
    let mut trace = Vec::with_capacity(config.iters_per_frame);
    let zero = Complex64::new(0.0, 0.0);
    loop {
        let mut an = Vec::with_capacity(m);
        let mut ad = Vec::with_capacity(m);
        for k in 0..m {
            let mut num = vec![zero; n];
            let mut den = vec![zero; n];
            for i in 0..n {
                let s = grams[k].data()[i] * d[k];
                num[i] = cur[k] * s * y_hat.data()[i];
                den[i] = cur[k] * s * (s + lambda);
                if let Some(p) = prev {
                    num[i] += hist[k] * p.an[k].data()[i];
                    den[i] += hist[k] * p.ad[k].data()[i];
                }
            }
            an.push(ComplexPlane::new(w, h, num)?);
            ad.push(ComplexPlane::new(w, h, den)?);
        }
        let alpha_spectrum = bounded_ratio(&an, &ad, &y_hat, lambda)?;
        let alpha = idft2(&alpha_spectrum)?;
        let mut dn = Vec::with_capacity(m);
        let mut dd = Vec::with_capacity(m);
        for k in 0..m {
            let ka = idft2(&grams[k].mul(&alpha_spectrum))?;
            let fit: f64 = ka
                .data()
                .iter()
                .zip(y_c.data())
                .zip(alpha.data())
                .map(|((v, y), a)| v * (2.0 * y - lambda * a))
                .sum();
            let mut num = cur[k] * fit;
            let mut den = 2.0 * cur[k] * ka.norm_sq();
            if let Some(p) = prev {
                num += hist[k] * p.dn[k];
                den += hist[k] * p.dd[k];
            }
            if !(den > config.d_floor) {
                return Err(Error::DegenerateKernel {
                    kernel: k,
                    value: den,
                    floor: config.d_floor,
                });
            }
            dn.push(num);
            dd.push(den);
        }
        let d_out: Vec<f64> = dn.iter().zip(&dd).map(|(a, b)| a / b).collect();
        if let Some((k, v)) = d_out.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Numerical(format!("kernel {k} weight became {v}")));
        }
        trace.push(IterationRecord {
            d_in: d.clone(),
            d_out: d_out.clone(),
        });
        if trace.len() == config.iters_per_frame {
            return Ok(SolverState {
                an,
                ad,
                dn,
                dd,
                alpha_spectrum,
                committed_d: d,
                d: d_out,
                frame_index: prev.map_or(1, |p| p.frame_index + 1),
                trace,
            });
        }
        d = d_out;
    }
}

/// `ΣA^N / ΣA^D` with a guard derived from positive semidefinite kernels: every bin of
/// the ratio is then bounded by `|F(y_c)|/λ`. Bins where both sums vanish map to 0.
fn bounded_ratio(
    an: &[ComplexPlane],
    ad: &[ComplexPlane],
    y_hat: &ComplexPlane,
    lambda: f64,
) -> Result<ComplexPlane> {
    let (w, h) = y_hat.dims();
    let mut out = Vec::with_capacity(w * h);
    for i in 0..w * h {
        let num: Complex64 = an.iter().map(|p| p.data()[i]).sum();
        let den: Complex64 = ad.iter().map(|p| p.data()[i]).sum();
        if den == Complex64::new(0.0, 0.0) && num == Complex64::new(0.0, 0.0) {
            out.push(num);
            continue;
        }
        let r = num / den;
        let limit = y_hat.data()[i].norm() / lambda * (1.0 + 1e-6) + 1e-9;
        if !(r.re.is_finite() && r.im.is_finite()) || r.norm() > limit {
            return Err(Error::Conditioning {
                bin: i,
                detail: format!(
                    "|A| = {:.3e} exceeds |F(y_c)|/λ = {:.3e} (denominator {:.3e})",
                    r.norm(),
                    limit,
                    den.norm()
                ),
            });
        }
        out.push(r);
    }
    ComplexPlane::new(w, h, out)
}
