//! Dense reference implementations over materialized circulant matrices.
#![allow(dead_code)]

use mkcf_core::features::FeatureMap;
use mkcf_core::kernels::{gaussian_correlation, kernel_row_to_gram, KernelCorrelation};
use mkcf_core::solvers::{gaussian_labels, history_weights, Labels};
use mkcf_core::spectral::{dft2, idft2, plane_to_vector, ComplexPlane, RealPlane};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_plane(rng: &mut ChaCha8Rng, w: usize, h: usize) -> RealPlane {
    RealPlane::from_fn(w, h, |_, _| rng.gen_range(-1.0..1.0)).unwrap()
}

pub fn random_map(rng: &mut ChaCha8Rng, w: usize, h: usize, c: usize) -> FeatureMap {
    FeatureMap::new((0..c).map(|_| random_plane(rng, w, h)).collect()).unwrap()
}

/// A small random multi-kernel problem: templates `xs`, test patches `zs`, their
/// autocorrelations `ks` and cross-correlations `kz`.
pub struct Instance {
    pub w: usize,
    pub h: usize,
    pub xs: Vec<FeatureMap>,
    pub zs: Vec<FeatureMap>,
    pub sigmas: Vec<f64>,
    pub ks: Vec<KernelCorrelation>,
    pub kz: Vec<KernelCorrelation>,
    pub labels: Labels,
    pub lambda_o: f64,
}

pub fn random_instance(seed: u64, kernels: usize) -> Instance {
    let mut r = rng(seed);
    let (w, h) = (r.gen_range(3..=4), r.gen_range(3..=4));
    instance_with(&mut r, w, h, kernels)
}

pub fn random_instance_sized(seed: u64, kernels: usize, w: usize, h: usize) -> Instance {
    instance_with(&mut rng(seed), w, h, kernels)
}

fn instance_with(r: &mut ChaCha8Rng, w: usize, h: usize, kernels: usize) -> Instance {
    let mut xs = Vec::new();
    let mut zs = Vec::new();
    let mut sigmas = Vec::new();
    for _ in 0..kernels {
        let c = r.gen_range(1..=3);
        xs.push(random_map(r, w, h, c));
        zs.push(random_map(r, w, h, c));
        sigmas.push(r.gen_range(0.3..1.5));
    }
    let ks = xs
        .iter()
        .zip(&sigmas)
        .map(|(x, s)| gaussian_correlation(x, x, *s).unwrap())
        .collect();
    let kz = xs
        .iter()
        .zip(&zs)
        .zip(&sigmas)
        .map(|((x, z), s)| gaussian_correlation(x, z, *s).unwrap())
        .collect();
    let labels = gaussian_labels(w, h, r.gen_range(0.1..0.4), kernels).unwrap();
    let lambda_o = 10f64.powf(r.gen_range(-3.0..0.0));
    Instance {
        w,
        h,
        xs,
        zs,
        sigmas,
        ks,
        kz,
        labels,
        lambda_o,
    }
}

/// Largest absolute difference relative to the largest reference magnitude.
pub fn rel_err(got: &[f64], want: &[f64]) -> f64 {
    assert_eq!(got.len(), want.len());
    let scale = want.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    got.iter().zip(want).fold(0.0f64, |a, (g, w)| a.max((g - w).abs())) / scale
}

pub fn rel_err_complex(got: &ComplexPlane, want: &ComplexPlane) -> f64 {
    let scale = want.data().iter().fold(0.0f64, |a, v| a.max(v.norm())).max(1e-300);
    got.data()
        .iter()
        .zip(want.data())
        .fold(0.0f64, |a, (g, w)| a.max((g - w).norm()))
        / scale
}

pub fn gram(k: &KernelCorrelation) -> DMatrix<f64> {
    kernel_row_to_gram(k).unwrap()
}

pub fn vec_of(p: &RealPlane) -> DVector<f64> {
    plane_to_vector(p)
}

pub fn alpha_of(spectrum: &ComplexPlane) -> DVector<f64> {
    plane_to_vector(&idft2(spectrum).unwrap())
}

/// Kernel correlation by explicit shifts: entry `i` is `k(z, Pⁱx)` with `(Pⁱx)[j] = x[j + i]`.
pub fn brute_gaussian(x: &FeatureMap, z: &FeatureMap, sigma: f64) -> RealPlane {
    let (w, h) = x.dims();
    let denom = sigma * sigma * (w * h * x.channel_count()) as f64;
    RealPlane::from_fn(w, h, |sx, sy| {
        let mut d2 = 0.0;
        for (xc, zc) in x.channels().iter().zip(z.channels()) {
            for y in 0..h {
                for xx in 0..w {
                    let diff = zc.get(xx, y) - xc.get((xx + sx) % w, (y + sy) % h);
                    d2 += diff * diff;
                }
            }
        }
        (-d2 / denom).exp()
    })
    .unwrap()
}

pub fn ridge(a: DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    a.lu().solve(b).expect("dense system is solvable")
}

pub fn dense_kcf(k: &DMatrix<f64>, y: &DVector<f64>, lambda_o: f64) -> DVector<f64> {
    let n = y.len();
    ridge(k + DMatrix::identity(n, n) * lambda_o, y)
}

pub struct DenseMkcf {
    pub alpha: DVector<f64>,
    pub d: Vec<f64>,
    pub trace: Vec<f64>,
}

pub fn dense_objective(grams: &[DMatrix<f64>], alpha: &DVector<f64>, d: &[f64], y: &DVector<f64>, lambda_o: f64) -> f64 {
    let n = y.len();
    let kd = grams
        .iter()
        .zip(d)
        .fold(DMatrix::zeros(n, n), |acc, (k, dm)| acc + k * *dm);
    let r = y - &kd * alpha;
    0.5 * r.norm_squared() + 0.5 * lambda_o * alpha.dot(&(&kd * alpha))
}

/// Two-kernel alternation: ridge solve with `Σ d_m K_m`, then the exact simplex minimizer.
pub fn dense_mkcf(grams: &[DMatrix<f64>], y: &DVector<f64>, lambda_o: f64, iters: usize) -> DenseMkcf {
    assert_eq!(grams.len(), 2);
    let n = y.len();
    let mut d = vec![0.5, 0.5];
    let mut trace = Vec::new();
    let mut alpha = DVector::zeros(n);
    for _ in 0..iters {
        let kd = &grams[0] * d[0] + &grams[1] * d[1];
        alpha = ridge(kd + DMatrix::identity(n, n) * lambda_o, y);
        trace.push(dense_objective(grams, &alpha, &d, y, lambda_o));
        let ka: Vec<DVector<f64>> = grams.iter().map(|k| k * &alpha).collect();
        let a = |i: usize, j: usize| ka[i].dot(&ka[j]);
        let b = |i: usize| (&alpha * lambda_o - y * 2.0).dot(&ka[i]);
        let curv = a(0, 0) - 2.0 * a(0, 1) + a(1, 1);
        let slope = a(0, 1) - a(1, 1) + 0.5 * (b(0) - b(1));
        let t = if curv > 0.0 { (-slope / curv).clamp(0.0, 1.0) } else { 0.5 };
        d = vec![t, 1.0 - t];
        trace.push(dense_objective(grams, &alpha, &d, y, lambda_o));
    }
    DenseMkcf { alpha, d, trace }
}

/// `Σ_m d_m C(k_m) α` for cross-correlation rows `k_m`.
pub fn dense_detect(rows: &[KernelCorrelation], alpha: &DVector<f64>, d: &[f64]) -> DVector<f64> {
    rows.iter()
        .zip(d)
        .fold(DVector::zeros(alpha.len()), |acc, (k, dm)| acc + gram(k) * alpha * *dm)
}

/// Dense accumulators of one MKCFup frame.
#[derive(Clone)]
pub struct DenseUp {
    pub an: Vec<DVector<f64>>,
    pub ad: Vec<DMatrix<f64>>,
    pub dn: Vec<f64>,
    pub dd: Vec<f64>,
    pub alpha: DVector<f64>,
    pub d: Vec<f64>,
    pub committed_d: Vec<f64>,
}

/// One MKCFup frame with history frozen, in matrix form.
pub fn dense_mkcfup_frame(
    prev: Option<&DenseUp>,
    grams: &[DMatrix<f64>],
    y_c: &DVector<f64>,
    lambda: f64,
    gamma: &[f64],
    iters: usize,
) -> DenseUp {
    let m = grams.len();
    let n = y_c.len();
    let eye = DMatrix::<f64>::identity(n, n);
    let (hist, cur): (Vec<f64>, Vec<f64>) = match prev {
        None => (vec![0.0; m], vec![1.0; m]),
        Some(_) => gamma.iter().map(|g| (1.0 - g, *g)).unzip(),
    };
    let mut d = vec![1.0 / m as f64; m];
    for it in 0.. {
        let mut an = Vec::new();
        let mut ad = Vec::new();
        for k in 0..m {
            let dk = &grams[k] * d[k];
            let mut num = &dk * y_c * cur[k];
            let mut den = &dk * (&dk + &eye * lambda) * cur[k];
            if let Some(p) = prev {
                num += &p.an[k] * hist[k];
                den += &p.ad[k] * hist[k];
            }
            an.push(num);
            ad.push(den);
        }
        let sum_n = an.iter().fold(DVector::zeros(n), |a, v| a + v);
        let sum_d = ad.iter().fold(DMatrix::zeros(n, n), |a, v| a + v);
        let alpha = ridge(sum_d, &sum_n);
        let mut dn = Vec::new();
        let mut dd = Vec::new();
        for k in 0..m {
            let ka = &grams[k] * &alpha;
            let mut num = cur[k] * ka.dot(&(y_c * 2.0 - &alpha * lambda));
            let mut den = 2.0 * cur[k] * ka.norm_squared();
            if let Some(p) = prev {
                num += hist[k] * p.dn[k];
                den += hist[k] * p.dd[k];
            }
            dn.push(num);
            dd.push(den);
        }
        let d_out: Vec<f64> = dn.iter().zip(&dd).map(|(a, b)| a / b).collect();
        if it + 1 == iters {
            return DenseUp {
                an,
                ad,
                dn,
                dd,
                alpha,
                d: d_out,
                committed_d: d,
            };
        }
        d = d_out;
    }
    unreachable!()
}

/// Batch history solution for fixed weights `d`: the minimizer `α` of the weighted
/// objective over all frames and the accumulated spectral terms.
pub fn dense_batch(
    frames: &[Vec<DMatrix<f64>>],
    y_c: &DVector<f64>,
    d: &[f64],
    lambda: f64,
    gamma: &[f64],
) -> (Vec<DVector<f64>>, Vec<DMatrix<f64>>, DVector<f64>) {
    let n = y_c.len();
    let m = d.len();
    let eye = DMatrix::<f64>::identity(n, n);
    let mut an = vec![DVector::zeros(n); m];
    let mut ad = vec![DMatrix::zeros(n, n); m];
    for k in 0..m {
        let beta = history_weights(gamma[k], frames.len());
        for (j, grams) in frames.iter().enumerate() {
            let dk = &grams[k] * d[k];
            an[k] += &dk * y_c * beta[j];
            ad[k] += &dk * (&dk + &eye * lambda) * beta[j];
        }
    }
    let alpha = ridge(
        ad.iter().fold(DMatrix::zeros(n, n), |a, v| a + v),
        &an.iter().fold(DVector::zeros(n), |a, v| a + v),
    );
    (an, ad, alpha)
}

/// Spectrum of a dense accumulator vector.
pub fn spectrum_of_vector(v: &DVector<f64>, w: usize, h: usize) -> ComplexPlane {
    dft2(&RealPlane::new(w, h, v.iter().copied().collect()).unwrap())
}

/// Eigenvalues of a circulant accumulator matrix, in the solver's bin order.
pub fn spectrum_of_circulant(c: &DMatrix<f64>, w: usize, h: usize) -> ComplexPlane {
    let row = RealPlane::new(w, h, c.row(0).iter().copied().collect()).unwrap();
    dft2(&row).conj()
}
