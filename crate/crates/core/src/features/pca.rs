use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::FeatureMap;
use crate::error::{Error, Result};
use crate::spectral::RealPlane;

/// Output dimensionality used by the tracker for both color names and HOG.
pub const PCA_DIM: usize = 4;

/// Relative eigenvalue threshold below which a direction counts as absent.
const RANK_TOLERANCE: f64 = 1e-10;

/// Frozen linear projection of per-cell channel vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaBasis {
    projection: DMatrix<f64>,
    mean: DVector<f64>,
    variances: Vec<f64>,
    rank: usize,
}

impl PcaBasis {
    /// Builds a basis from explicit parts. Rows of `projection` must be orthonormal.
    pub fn new(projection: DMatrix<f64>, mean: DVector<f64>) -> Result<Self> {
        if projection.ncols() != mean.len() || projection.nrows() > projection.ncols() {
            return Err(Error::mismatch(
                format!("output_dim <= input_dim = {}", mean.len()),
                format!("{}x{} projection", projection.nrows(), projection.ncols()),
            ));
        }
        let gram = &projection * projection.transpose();
        let err = (gram - DMatrix::identity(projection.nrows(), projection.nrows())).amax();
        if err > 1e-8 {
            return Err(Error::InvalidConfig(format!(
                "projection rows are not orthonormal (deviation {err:.3e})"
            )));
        }
        let rank = projection.nrows();
        Ok(Self {
            variances: vec![f64::NAN; rank],
            projection,
            mean,
            rank,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.projection.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.projection.nrows()
    }

    pub fn projection(&self) -> &DMatrix<f64> {
        &self.projection
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// Variance captured by each output component, largest first.
    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    /// Number of components with non-negligible variance.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// True when fewer than `output_dim` directions carry variance; the remaining rows
    /// are orthonormal completions with no meaning in the data.
    pub fn is_low_rank(&self) -> bool {
        self.rank < self.output_dim()
    }
}

/// Fits principal directions of the per-cell channel vectors of all `samples`.
///
/// Components are ordered by decreasing variance; each is signed so that its
/// largest-magnitude entry is positive.
pub fn fit_pca(samples: &[FeatureMap], output_dim: usize) -> Result<PcaBasis> {
    let first = samples
        .first()
        .ok_or_else(|| Error::InvalidDimension("PCA needs at least one sample".into()))?;
    let dim = first.channel_count();
    if output_dim == 0 || output_dim > dim {
        return Err(Error::InvalidDimension(format!(
            "cannot keep {output_dim} components of {dim} channels"
        )));
    }
    for s in samples {
        if s.channel_count() != dim {
            return Err(Error::mismatch(dim, s.channel_count()));
        }
    }
    let n: usize = samples.iter().map(FeatureMap::cells).sum();
    if n < dim {
        return Err(Error::InvalidDimension(format!(
            "{n} cells cannot span {dim} channels"
        )));
    }

    let mut mean = DVector::zeros(dim);
    for s in samples {
        for (c, plane) in s.channels().iter().enumerate() {
            mean[c] += plane.data().iter().sum::<f64>();
        }
    }
    mean /= n as f64;

    let mut cov = DMatrix::zeros(dim, dim);
    let mut v = DVector::zeros(dim);
    for s in samples {
        for i in 0..s.cells() {
            for c in 0..dim {
                v[c] = s.channel(c).data()[i] - mean[c];
            }
            cov.ger(1.0, &v, &v, 1.0);
        }
    }
    cov /= n as f64;

    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]].max(0.0);
    let rank = order
        .iter()
        .take(output_dim)
        .filter(|&&i| top > 0.0 && eig.eigenvalues[i] > RANK_TOLERANCE * top)
        .count();

    let mut projection = DMatrix::zeros(output_dim, dim);
    let mut variances = Vec::with_capacity(output_dim);
    for (r, &i) in order.iter().take(output_dim).enumerate() {
        let mut col = eig.eigenvectors.column(i).into_owned();
        let pivot = col.iamax();
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
        projection.row_mut(r).copy_from(&col.transpose());
        variances.push(eig.eigenvalues[i].max(0.0));
    }
    if rank < output_dim {
        log::debug!("PCA basis is rank {rank} < {output_dim}");
    }
    Ok(PcaBasis {
        projection,
        mean,
        variances,
        rank,
    })
}

/// Projects every cell's channel vector onto the basis after subtracting its mean.
pub fn pca_reduce(fm: &FeatureMap, basis: &PcaBasis) -> Result<FeatureMap> {
    if fm.channel_count() != basis.input_dim() {
        return Err(Error::mismatch(basis.input_dim(), fm.channel_count()));
    }
    let (w, h) = fm.dims();
    let (din, dout) = (basis.input_dim(), basis.output_dim());
    let mut out = vec![vec![0.0; w * h]; dout];
    let mut v = vec![0.0; din];
    for i in 0..w * h {
        for (c, x) in v.iter_mut().enumerate() {
            *x = fm.channel(c).data()[i] - basis.mean[c];
        }
        for (r, o) in out.iter_mut().enumerate() {
            o[i] = (0..din).map(|c| basis.projection[(r, c)] * v[c]).sum();
        }
    }
    let channels = out
        .into_iter()
        .map(|data| RealPlane::new(w, h, data))
        .collect::<Result<Vec<_>>>()?;
    FeatureMap::new(channels)
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn random_map(rng: &mut ChaCha8Rng, w: usize, h: usize, c: usize) -> FeatureMap {
        FeatureMap::new(
            (0..c)
                .map(|_| RealPlane::from_fn(w, h, |_, _| rng.gen_range(-1.0..1.0)).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn copied_channels_are_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base = RealPlane::from_fn(6, 6, |_, _| rng.gen_range(0.0..1.0)).unwrap();
        let fm = FeatureMap::new(vec![base.clone(); 5]).unwrap();
        let b = fit_pca(&[fm], 4).unwrap();
        assert_eq!(b.rank(), 1);
        assert!(b.is_low_rank());
        let expected = 1.0 / 5f64.sqrt();
        for c in 0..5 {
            assert!((b.projection()[(0, c)] - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn axis_aligned_variances_sort_in_order() {
        // channel c carries ±s_c with s = (1, 2, 3, 4) reordered; rows alternate signs
        let scales = [2.0, 4.0, 1.0, 3.0];
        let planes = scales
            .iter()
            .enumerate()
            .map(|(c, s)| {
                RealPlane::from_fn(4, 4, |x, y| {
                    // mutually orthogonal ±1 patterns (Walsh functions)
                    let bits = [x & 1, (x >> 1) & 1, y & 1, (y >> 1) & 1];
                    if bits[c] == 0 {
                        *s
                    } else {
                        -*s
                    }
                })
                .unwrap()
            })
            .collect();
        let b = fit_pca(&[FeatureMap::new(planes).unwrap()], 4).unwrap();
        let expected_axes = [1, 3, 0, 2];
        for (r, axis) in expected_axes.iter().enumerate() {
            for c in 0..4 {
                let want = if c == *axis { 1.0 } else { 0.0 };
                assert!((b.projection()[(r, c)] - want).abs() < 1e-10);
            }
        }
        let v = b.variances();
        assert!((v[0] - 16.0).abs() < 1e-10 && (v[3] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rows_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let fm = random_map(&mut rng, 7, 5, 11);
        let b = fit_pca(&[fm], 4).unwrap();
        let g = b.projection() * b.projection().transpose();
        assert!((g - DMatrix::identity(4, 4)).amax() < 1e-8);
    }

    #[test]
    fn mean_map_reduces_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let fm = random_map(&mut rng, 5, 5, 6);
        let b = fit_pca(&[fm], 4).unwrap();
        let flat = FeatureMap::new(
            (0..6)
                .map(|c| RealPlane::from_fn(3, 3, |_, _| b.mean()[c]).unwrap())
                .collect(),
        )
        .unwrap();
        let r = pca_reduce(&flat, &b).unwrap();
        assert!(r.channels().iter().all(|p| p.data().iter().all(|v| v.abs() < 1e-14)));
    }

    #[test]
    fn identity_basis_centers() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let fm = random_map(&mut rng, 3, 4, 4);
        let mean = DVector::from_vec(vec![0.1, -0.2, 0.3, 0.0]);
        let b = PcaBasis::new(DMatrix::identity(4, 4), mean.clone()).unwrap();
        let r = pca_reduce(&fm, &b).unwrap();
        for c in 0..4 {
            for (u, v) in r.channel(c).data().iter().zip(fm.channel(c).data()) {
                assert!((u - (v - mean[c])).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn channel_mismatch_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b = fit_pca(&[random_map(&mut rng, 4, 4, 9)], 4).unwrap();
        assert!(pca_reduce(&random_map(&mut rng, 4, 4, 11), &b).is_err());
    }
}
