//! Numerical checks of the upper-bound method.
//!
//! - [`check_lemma1`]: the norm inequality that makes the decoupled objective an upper
//!   bound of the original one.
//! - [`theorem1_bounds`]: positivity and the a-priori interval of the kernel weights
//!   produced by one MKCFup iteration.
//! - [`lambda_sweep`]: how the learned weights move with the regularizer on real runs.
//!
//! Circulant Gram eigenvalues are read off the DFT of the kernel rows, which is exact.

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::{synth_sequence, Sequence, SynthSpec};
use crate::error::{Error, Result};
use crate::features::FeatureMap;
use crate::kernels::{gaussian_correlation, KernelCorrelation};
use crate::solvers::{gaussian_labels, history_weights, mkcfup_init, Labels, SolverConfig};
use crate::spectral::{dft2, RealPlane};
use crate::tracker::{run_sequence, SolverKind, TrackerConfig};

/// Absolute slack allowed by [`check_lemma1`].
pub const LEMMA1_TOLERANCE: f64 = 1e-10;

/// Largest plane (in cells) accepted by [`theorem1_bounds`].
pub const THEOREM1_MAX_CELLS: usize = 64;

/// Label spectra whose smallest power falls below this fraction of the largest make the
/// interval vacuous.
pub const LABEL_POWER_FLOOR: f64 = 1e-12;

/// The λ grid of the sweep.
pub const DEFAULT_LAMBDA_GRID: [f64; 8] = [1e-3, 1e-2, 1e-1, 1.0, 10.0, 1e2, 1e3, 1e4];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Check {
    /// `‖Σ a_m‖²`
    pub lhs: f64,
    /// `(2M + 1)·Σ ‖a_m‖²`
    pub rhs: f64,
    pub holds: bool,
}

/// Evaluates both sides of `‖Σ_m a_m‖² ≤ (2M + 1)·Σ_m ‖a_m‖²`.
///
/// Equality is never reached for `M ≥ 1` unless every vector is zero; for equal vectors
/// the ratio `rhs/lhs` is `(2M + 1)/M`.
pub fn check_lemma1(vectors: &[Vec<f64>]) -> Result<Lemma1Check> {
    let m = vectors.len();
    let len = vectors.first().map_or(0, Vec::len);
    if let Some(v) = vectors.iter().find(|v| v.len() != len) {
        return Err(Error::mismatch(format!("vectors of length {len}"), v.len()));
    }
    let mut sum = vec![0.0; len];
    let mut norms = 0.0;
    for v in vectors {
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
        norms += v.iter().map(|x| x * x).sum::<f64>();
    }
    let lhs: f64 = sum.iter().map(|x| x * x).sum();
    let rhs = (2 * m + 1) as f64 * norms;
    Ok(Lemma1Check {
        lhs,
        rhs,
        holds: lhs <= rhs + LEMMA1_TOLERANCE,
    })
}

/// Interval for one kernel's next weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelInterval {
    pub c_l: f64,
    pub c_u: f64,
    /// `c_l·(λ/2 + b_min)`
    pub lower: f64,
    /// `c_u·(λ/2 + b_max)`
    pub upper: f64,
}

impl KernelInterval {
    pub fn contains(&self, d: f64) -> bool {
        d > self.lower && d < self.upper
    }
}

/// Constants of the weight interval for one MKCFup iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Bounds {
    pub lambda: f64,
    pub b_min: f64,
    pub b_max: f64,
    /// `Σ_n g_n / (2·Σ_n s_n²)` with `s_n` the eigenvalues of the `α` operator and
    /// `g_n = s_n(2 − λ s_n)`; always within `[λ/2 + b_min, λ/2 + b_max]`.
    pub sigma_r: f64,
    pub kernels: Vec<KernelInterval>,
    /// The label spectrum has (near-)empty bins, so `c_l = 0` and `c_u = ∞`.
    pub vacuous: bool,
}

impl Theorem1Bounds {
    /// Whether every weight lies strictly inside its kernel's interval.
    pub fn contains(&self, d: &[f64]) -> bool {
        d.len() == self.kernels.len() && self.kernels.iter().zip(d).all(|(k, v)| k.contains(*v))
    }
}

/// Per-bin spectral data of a history instance.
struct Spectra {
    /// `σ[j][m][n]`: eigenvalue `n` of the Gram of kernel `m` in frame `j`.
    sigma: Vec<Vec<Vec<f64>>>,
    /// `β[m][j]`
    beta: Vec<Vec<f64>>,
    /// `|F(y_c)|²` per bin.
    y_power: Vec<f64>,
}

fn spectra(frames: &[Vec<KernelCorrelation>], labels: &Labels, d: &[f64], gamma: &[f64]) -> Result<Spectra> {
    let p = frames.len();
    if p == 0 {
        return Err(Error::InvalidDimension("history has no frames".into()));
    }
    let m = d.len();
    if m == 0 || gamma.len() != m {
        return Err(Error::mismatch(format!("{m} learning rates"), gamma.len()));
    }
    let (w, h) = labels.dims();
    if w * h > THEOREM1_MAX_CELLS {
        return Err(Error::OracleScale {
            cells: w * h,
            limit: THEOREM1_MAX_CELLS,
        });
    }
    if let Some((k, v)) = d.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Precondition(format!("weight d_{k} = {v} is not positive")));
    }
    if let Some(g) = gamma.iter().find(|g| !(**g > 0.0 && **g <= 1.0)) {
        return Err(Error::Precondition(format!("learning rate {g} outside (0, 1]")));
    }
    if let Some(v) = labels.y_c().data().iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Precondition(format!("label value {v} is not positive")));
    }
    let mut sigma = Vec::with_capacity(p);
    for (j, ks) in frames.iter().enumerate() {
        if ks.len() != m {
            return Err(Error::mismatch(format!("{m} kernels in frame {}", j + 1), ks.len()));
        }
        let mut per_kernel = Vec::with_capacity(m);
        for (k, kc) in ks.iter().enumerate() {
            kc.plane().ensure_same_dims(labels.y())?;
            let spec = kc.gram_spectrum();
            let scale = spec.data().iter().map(|c| c.norm()).fold(0.0, f64::max);
            let mut eig = Vec::with_capacity(spec.len());
            for c in spec.data() {
                if c.im.abs() > 1e-9 * scale.max(1.0) {
                    return Err(Error::Precondition(format!(
                        "Gram of kernel {k} in frame {} is not symmetric (imaginary part {:.3e})",
                        j + 1,
                        c.im
                    )));
                }
                if !(c.re > 1e-12 * scale) {
                    return Err(Error::Precondition(format!(
                        "Gram of kernel {k} in frame {} is not positive definite (eigenvalue {:.3e})",
                        j + 1,
                        c.re
                    )));
                }
                eig.push(c.re);
            }
            per_kernel.push(eig);
        }
        sigma.push(per_kernel);
    }
    Ok(Spectra {
        sigma,
        beta: gamma.iter().map(|g| history_weights(*g, p)).collect(),
        y_power: dft2(labels.y_c()).data().iter().map(Complex64::norm_sqr).collect(),
    })
}

impl Spectra {
    fn bins(&self) -> usize {
        self.y_power.len()
    }

    /// Eigenvalue of the `α` operator at bin `n`: `1/(λ + b_n)`, and `b_n`.
    fn alpha_eig(&self, n: usize, d: &[f64], lambda: f64) -> (f64, f64) {
        let (mut num, mut den) = (0.0, 0.0);
        for (j, frame) in self.sigma.iter().enumerate() {
            for (m, s) in frame.iter().enumerate() {
                let w = self.beta[m][j] * d[m] * s[n];
                num += w * d[m] * s[n];
                den += w;
            }
        }
        let b = num / den;
        (1.0 / (lambda + b), b)
    }

    /// `(Σ_j β σ, Σ_j β σ²)` for kernel `m` at bin `n`.
    fn c_terms(&self, m: usize, n: usize) -> (f64, f64) {
        self.sigma.iter().enumerate().fold((0.0, 0.0), |(a, b), (j, frame)| {
            let s = frame[m][n];
            (a + self.beta[m][j] * s, b + self.beta[m][j] * s * s)
        })
    }
}

/// Interval that the next MKCFup weights must fall in, given the current weights `d`.
///
/// `frames[j][m]` is the autocorrelation kernel `m` of frame `j + 1` (the last entry is
/// the current frame), weighted by the forgetting factors of `gamma`. With one frame
/// this is exactly the iteration performed by `mkcfup_init`; with more frames it is the
/// batch form evaluated by [`batch_next_d`].
pub fn theorem1_bounds(
    frames: &[Vec<KernelCorrelation>],
    labels: &Labels,
    d: &[f64],
    lambda: f64,
    gamma: &[f64],
) -> Result<Theorem1Bounds> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Precondition(format!("λ = {lambda} is not positive")));
    }
    let sp = spectra(frames, labels, d, gamma)?;
    let m = d.len();

    let (mut num_min, mut num_max, mut den_min, mut den_max) = (0.0, 0.0, 0.0, 0.0);
    for (j, frame) in sp.sigma.iter().enumerate() {
        for (k, s) in frame.iter().enumerate() {
            let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = s.iter().copied().fold(0.0, f64::max);
            let w = sp.beta[k][j] * d[k];
            num_min += w * d[k] * lo * lo;
            num_max += w * d[k] * hi * hi;
            den_min += w * lo;
            den_max += w * hi;
        }
    }
    let b_min = num_min / den_max;
    let b_max = num_max / den_min;

    let (mut g_sum, mut s2_sum) = (0.0, 0.0);
    for n in 0..sp.bins() {
        let (s, _) = sp.alpha_eig(n, d, lambda);
        g_sum += s * (2.0 - lambda * s);
        s2_sum += s * s;
    }
    let sigma_r = g_sum / (2.0 * s2_sum);

    let y_max = sp.y_power.iter().copied().fold(0.0, f64::max);
    let y_min = sp.y_power.iter().copied().fold(f64::INFINITY, f64::min);
    let vacuous = !(y_min > LABEL_POWER_FLOOR * y_max);

    let kernels = (0..m)
        .map(|k| {
            let (mut cn_min, mut cn_max, mut cd_min, mut cd_max) = (f64::INFINITY, 0.0f64, f64::INFINITY, 0.0f64);
            for n in 0..sp.bins() {
                let (cn, cd) = sp.c_terms(k, n);
                cn_min = cn_min.min(cn);
                cn_max = cn_max.max(cn);
                cd_min = cd_min.min(cd);
                cd_max = cd_max.max(cd);
            }
            let (c_l, c_u) = if vacuous {
                (0.0, f64::INFINITY)
            } else {
                (
                    y_min * cn_min / (y_max * cd_max),
                    y_max * cn_max / (y_min * cd_min),
                )
            };
            KernelInterval {
                c_l,
                c_u,
                lower: c_l * (lambda / 2.0 + b_min),
                upper: c_u * (lambda / 2.0 + b_max),
            }
        })
        .collect();
    Ok(Theorem1Bounds {
        lambda,
        b_min,
        b_max,
        sigma_r,
        kernels,
        vacuous,
    })
}

/// Next weights of the batch history objective with every frame's terms evaluated at
/// the same `d`:
/// `d_m ← Σ_j β_m^j (K_m^j α)ᵀ(2y_c − λα) / (2·Σ_j β_m^j ‖K_m^j α‖²)`.
pub fn batch_next_d(
    frames: &[Vec<KernelCorrelation>],
    labels: &Labels,
    d: &[f64],
    lambda: f64,
    gamma: &[f64],
) -> Result<Vec<f64>> {
    let sp = spectra(frames, labels, d, gamma)?;
    // Parseval: every inner product becomes a weighted sum over bins of |F(y_c)|².
    Ok((0..d.len())
        .map(|k| {
            let (mut num, mut den) = (0.0, 0.0);
            for n in 0..sp.bins() {
                let (s, _) = sp.alpha_eig(n, d, lambda);
                let (cn, cd) = sp.c_terms(k, n);
                num += sp.y_power[n] * cn * s * (2.0 - lambda * s);
                den += 2.0 * sp.y_power[n] * cd * s * s;
            }
            num / den
        })
        .collect())
}

/// Aggregated weights for one λ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSweepRow {
    pub lambda: f64,
    /// Mean of the sampled `d*_m` over kernels, frames and sequences.
    pub d_bar: f64,
    pub delta_max: f64,
    pub delta_min: f64,
    /// Mean of `Σ_m d*_m` over the sampled frames.
    pub sum_d_mean: f64,
    pub samples: usize,
}

/// Runs MKCFup on every sequence for each upper-bound regularizer `λ` (so
/// `λ_o = λ·(2M + 1)`) and samples the learned weights at seeded random frames.
///
/// The sampled frames depend only on `seed` and the sequence, so every λ sees the same
/// frames. `base` supplies all other tracker settings.
pub fn lambda_sweep(
    lambdas: &[f64],
    sequences: &[Sequence],
    samples_per_sequence: usize,
    seed: u64,
    base: &TrackerConfig,
) -> Result<Vec<LambdaSweepRow>> {
    if lambdas.is_empty() || sequences.is_empty() || samples_per_sequence == 0 {
        return Err(Error::InvalidConfig(
            "the sweep needs at least one λ, one sequence and one sample".into(),
        ));
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return Err(Error::InvalidConfig(format!("λ = {l} is not positive")));
    }
    let picks: Vec<Vec<usize>> = sequences
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let n = s.groundtruth.len();
            let mut idx = sample(&mut rng, n, samples_per_sequence.min(n)).into_vec();
            idx.sort_unstable();
            idx
        })
        .collect();
    let jobs: Vec<(usize, usize)> = (0..lambdas.len())
        .flat_map(|l| (0..sequences.len()).map(move |s| (l, s)))
        .collect();
    let weights: Vec<Vec<Vec<f64>>> = jobs
        .par_iter()
        .map(|&(l, s)| {
            let mut cfg = base.clone();
            cfg.solver = SolverKind::Mkcfup;
            // two kernels: μ = 5
            cfg.lambda_o = lambdas[l] * 5.0;
            let seq = &sequences[s];
            let report = run_sequence(seq, seq.init_box(), &cfg)?;
            Ok(picks[s].iter().map(|t| report.weights[*t].clone()).collect())
        })
        .collect::<Result<_>>()?;

    Ok(lambdas
        .iter()
        .enumerate()
        .map(|(l, lambda)| {
            let samples: Vec<&Vec<f64>> = jobs
                .iter()
                .zip(&weights)
                .filter(|((jl, _), _)| *jl == l)
                .flat_map(|(_, w)| w)
                .collect();
            let all: Vec<f64> = samples.iter().flat_map(|d| d.iter().copied()).collect();
            LambdaSweepRow {
                lambda: *lambda,
                d_bar: all.iter().sum::<f64>() / all.len() as f64,
                delta_max: all.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                delta_min: all.iter().copied().fold(f64::INFINITY, f64::min),
                sum_d_mean: samples.iter().map(|d| d.iter().sum::<f64>()).sum::<f64>() / samples.len() as f64,
                samples: samples.len(),
            }
        })
        .collect())
}

/// Seeded batch of [`check_lemma1`] draws: `M ∈ {2, 3, 5}`, vectors of 1 to 16 entries
/// drawn uniformly from `[−10, 10]`.
pub fn lemma1_draws(seed: u64, count: usize) -> Vec<Lemma1Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let m = [2, 3, 5][rng.gen_range(0..3)];
            let len = rng.gen_range(1..=16);
            let vectors: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..len).map(|_| rng.gen_range(-10.0..10.0)).collect())
                .collect();
            check_lemma1(&vectors).expect("vectors share a length")
        })
        .collect()
}

/// Outcome of one random MKCFup instance checked against [`theorem1_bounds`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Trial {
    pub seed: u64,
    pub kernels: usize,
    pub dims: (usize, usize),
    /// Iterations checked; empty when the instance violated a precondition.
    pub iterations: Vec<Theorem1Iteration>,
    /// Violated hypothesis, if any.
    pub precondition: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Iteration {
    pub d_in: Vec<f64>,
    pub d_out: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub positive: bool,
    pub contained: bool,
}

/// Random first-frame MKCFup instance: planes from 3×3 to 6×6, 1 to 3 channels,
/// 1 to 3 Gaussian kernels over independent random features. Every within-frame
/// iteration is checked against the interval computed from its input weights.
pub fn theorem1_trial(seed: u64) -> Result<Theorem1Trial> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (rng.gen_range(3..=6), rng.gen_range(3..=6));
    let m = rng.gen_range(1..=3);
    let mut ks = Vec::with_capacity(m);
    for _ in 0..m {
        let channels = rng.gen_range(1..=3);
        let planes = (0..channels)
            .map(|_| RealPlane::new(w, h, (0..w * h).map(|_| rng.gen_range(-1.0..1.0)).collect()))
            .collect::<Result<Vec<_>>>()?;
        let x = FeatureMap::new(planes)?;
        ks.push(gaussian_correlation(&x, &x, rng.gen_range(0.3..1.0))?);
    }
    let labels = gaussian_labels(w, h, rng.gen_range(0.1..0.3), m)?;
    let gamma: Vec<f64> = (0..m).map(|_| rng.gen_range(0.01..0.3)).collect();
    let mut config = SolverConfig::new(rng.gen_range(1e-3..1.0), gamma)?;
    config.iters_per_frame = 4;
    let mut trial = Theorem1Trial {
        seed,
        kernels: m,
        dims: (w, h),
        iterations: Vec::new(),
        precondition: None,
    };
    let frames = [ks];
    let state = match mkcfup_init(&frames[0], &labels, &config) {
        Ok(s) => s,
        Err(e) => {
            trial.precondition = Some(e.to_string());
            return Ok(trial);
        }
    };
    for it in state.trace() {
        let bounds = match theorem1_bounds(&frames, &labels, &it.d_in, config.lambda(), &config.gamma) {
            Ok(b) => b,
            Err(Error::Precondition(msg)) => {
                trial.precondition = Some(msg);
                trial.iterations.clear();
                return Ok(trial);
            }
            Err(e) => return Err(e),
        };
        trial.iterations.push(Theorem1Iteration {
            positive: it.d_out.iter().all(|v| *v > 0.0),
            contained: bounds.contains(&it.d_out) && !bounds.vacuous,
            lower: bounds.kernels.iter().map(|k| k.lower).collect(),
            upper: bounds.kernels.iter().map(|k| k.upper).collect(),
            d_in: it.d_in.clone(),
            d_out: it.d_out.clone(),
        });
    }
    Ok(trial)
}

/// The synthetic sequences used by the default sweep: translation, zoom and
/// phase-switch presets rendered with `seed`.
pub fn sweep_sequences(seed: u64) -> Result<Vec<Sequence>> {
    ["translation", "zoom", "phase-switch"]
        .iter()
        .map(|name| synth_sequence(&SynthSpec::preset(name)?, seed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma1_examples() {
        let zero = check_lemma1(&[vec![0.0; 3], vec![0.0; 3]]).unwrap();
        assert_eq!((zero.lhs, zero.rhs, zero.holds), (0.0, 0.0, true));
        let same = check_lemma1(&[vec![1.0, -2.0], vec![1.0, -2.0]]).unwrap();
        assert!(same.holds);
        assert!((same.rhs / same.lhs - 2.5).abs() < 1e-12);
        assert!(check_lemma1(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn identity_kernel_interval_is_closed_form() {
        let (w, h, c, d, lambda) = (4, 3, 2.5, 0.7, 0.3);
        let k = KernelCorrelation::from_plane(RealPlane::delta(w, h).unwrap().scale(c));
        let labels = gaussian_labels(w, h, 0.3, 1).unwrap();
        let b = theorem1_bounds(&[vec![k.clone()]], &labels, &[d], lambda, &[0.5]).unwrap();
        let y: Vec<f64> = dft2(labels.y_c()).data().iter().map(|v| v.norm_sqr()).collect();
        let (ymin, ymax) = (
            y.iter().copied().fold(f64::INFINITY, f64::min),
            y.iter().copied().fold(0.0, f64::max),
        );
        let bn = d * c;
        let (cl, cu) = (ymin * c / (ymax * c * c), ymax * c / (ymin * c * c));
        let tol = |a: f64, b: f64| (a - b).abs() <= 1e-10 * b.abs().max(1.0);
        assert!(tol(b.b_min, bn) && tol(b.b_max, bn));
        assert!(tol(b.kernels[0].lower, cl * (lambda / 2.0 + bn)));
        assert!(tol(b.kernels[0].upper, cu * (lambda / 2.0 + bn)));
        // with K = cI the next weight is σ_r / c
        assert!(tol(b.sigma_r, lambda / 2.0 + bn));
        let next = batch_next_d(&[vec![k]], &labels, &[d], lambda, &[0.5]).unwrap();
        assert!(tol(next[0], b.sigma_r / c));
        assert!(b.contains(&next));
    }

    #[test]
    fn solver_iterates_fall_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let (w, h) = (4, 4);
            let ks: Vec<_> = (0..2)
                .map(|_| {
                    let chans = (0..2)
                        .map(|_| RealPlane::new(w, h, (0..w * h).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap())
                        .collect();
                    let x = FeatureMap::new(chans).unwrap();
                    gaussian_correlation(&x, &x, 0.5).unwrap()
                })
                .collect();
            let labels = gaussian_labels(w, h, 0.2, 2).unwrap();
            let mut cfg = SolverConfig::new(0.05, vec![0.1, 0.1]).unwrap();
            cfg.iters_per_frame = 4;
            let st = mkcfup_init(&ks, &labels, &cfg).unwrap();
            for it in st.trace() {
                let b = theorem1_bounds(&[ks.clone()], &labels, &it.d_in, cfg.lambda(), &cfg.gamma).unwrap();
                assert!(!b.vacuous);
                assert!(b.contains(&it.d_out), "{:?} not in {:?}", it.d_out, b.kernels);
                assert!(b.sigma_r >= cfg.lambda() / 2.0 + b.b_min && b.sigma_r <= cfg.lambda() / 2.0 + b.b_max);
            }
        }
    }

    #[test]
    fn random_trials_hold() {
        let mut checked = 0;
        for seed in 0..30 {
            let t = theorem1_trial(seed).unwrap();
            assert_eq!(t, theorem1_trial(seed).unwrap());
            for it in &t.iterations {
                assert!(it.positive && it.contained, "seed {seed}: {it:?}");
                checked += 1;
            }
        }
        assert!(checked >= 60);
        assert!(lemma1_draws(9, 200).iter().all(|c| c.holds));
    }

    #[test]
    fn preconditions_are_named() {
        let labels = gaussian_labels(3, 3, 0.2, 1).unwrap();
        let flat = KernelCorrelation::from_plane(RealPlane::new(3, 3, vec![1.0; 9]).unwrap());
        match theorem1_bounds(&[vec![flat]], &labels, &[1.0], 0.1, &[0.1]) {
            Err(Error::Precondition(msg)) => assert!(msg.contains("positive definite"), "{msg}"),
            other => panic!("{other:?}"),
        }
        let k = KernelCorrelation::from_plane(RealPlane::delta(3, 3).unwrap());
        assert!(matches!(
            theorem1_bounds(&[vec![k.clone()]], &labels, &[-1.0], 0.1, &[0.1]),
            Err(Error::Precondition(_))
        ));
        let big = gaussian_labels(9, 9, 0.2, 1).unwrap();
        let kb = KernelCorrelation::from_plane(RealPlane::delta(9, 9).unwrap());
        assert!(matches!(
            theorem1_bounds(&[vec![kb]], &big, &[1.0], 0.1, &[0.1]),
            Err(Error::OracleScale { .. })
        ));
    }
}
