//! Two-dimensional DFT and circulant algebra.
//!
//! Planes are stored row-major (`index = y * width + x`). The forward transform
//! is unnormalized and the inverse divides by the plane size, so the spectrum of
//! the first row of a circulant matrix is exactly its eigenvalue array.
//!
//! Circulant convention: for a first row `f`, row `i` of `C(f)` is `f` cyclically
//! shifted forward by the 2-D offset of cell `i`, i.e. `C[i][j] = f[j - i]` with
//! offsets taken modulo the plane size along each axis. Under this convention
//! `C(f) v = F⁻¹(conj(F(f)) ⊙ F(v))`.

use std::cell::RefCell;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Largest plane (in cells) the dense oracles will materialize.
pub const ORACLE_MAX_CELLS: usize = 4096;

/// Relative imaginary residue tolerated by [`idft2`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-6;

/// A real-valued 2-D plane.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPlane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

/// A complex-valued 2-D plane, usually a spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPlane {
    width: usize,
    height: usize,
    data: Vec<Complex64>,
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimension(format!(
            "plane must be at least 1x1, got {width}x{height}"
        )));
    }
    if width * height != len {
        return Err(Error::mismatch(
            format!("{} values for {width}x{height}", width * height),
            format!("{len} values"),
        ));
    }
    Ok(())
}

impl RealPlane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("real plane"));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![0.0; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    /// Plane with a single 1 at the origin.
    pub fn delta(width: usize, height: usize) -> Result<Self> {
        let mut p = Self::zeros(width, height)?;
        p.data[0] = 1.0;
        Ok(p)
    }

    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(width * height, data.len());
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Cyclic shift: `out[y][x] = self[y - dy][x - dx]`.
    pub fn roll(&self, dx: isize, dy: isize) -> Self {
        let (w, h) = (self.width as isize, self.height as isize);
        let mut out = vec![0.0; self.data.len()];
        for y in 0..h {
            let sy = (y - dy).rem_euclid(h);
            for x in 0..w {
                let sx = (x - dx).rem_euclid(w);
                out[(y * w + x) as usize] = self.data[(sy * w + sx) as usize];
            }
        }
        Self::from_raw(self.width, self.height, out)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_raw(
            self.width,
            self.height,
            self.data.iter().map(|v| v * factor).collect(),
        )
    }

    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dims(), other.dims());
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn ensure_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::mismatch(
                format!("{}x{}", self.width, self.height),
                format!("{}x{}", other.width, other.height),
            ));
        }
        Ok(())
    }
}

impl ComplexPlane {
    pub fn new(width: usize, height: usize, data: Vec<Complex64>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if data.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("complex plane"));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(width * height, data.len());
        Self {
            width,
            height,
            data,
        }
    }

    pub fn filled(width: usize, height: usize, value: Complex64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn get(&self, x: usize, y: usize) -> Complex64 {
        self.data[y * self.width + x]
    }

    pub fn conj(&self) -> Self {
        self.map(|c| c.conj())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::from_raw(
            self.width,
            self.height,
            self.data.iter().map(|&c| f(c)).collect(),
        )
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        debug_assert_eq!(self.dims(), other.dims());
        Self::from_raw(
            self.width,
            self.height,
            self.data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|c| c * factor)
    }

    /// `self += other * factor`
    pub fn add_scaled(&mut self, other: &Self, factor: f64) {
        debug_assert_eq!(self.dims(), other.dims());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * factor;
        }
    }

    pub(crate) fn ensure_dims(&self, dims: (usize, usize)) -> Result<()> {
        if self.dims() != dims {
            return Err(Error::mismatch(
                format!("{}x{}", dims.0, dims.1),
                format!("{}x{}", self.width, self.height),
            ));
        }
        Ok(())
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

fn transform_in_place(width: usize, height: usize, data: &mut [Complex64], inverse: bool) {
    plan(width, inverse).process(data);
    if height > 1 {
        let mut cols = vec![Complex64::default(); data.len()];
        for y in 0..height {
            for x in 0..width {
                cols[x * height + y] = data[y * width + x];
            }
        }
        plan(height, inverse).process(&mut cols);
        for y in 0..height {
            for x in 0..width {
                data[y * width + x] = cols[x * height + y];
            }
        }
    }
}

/// Unnormalized forward 2-D DFT.
pub fn dft2(p: &RealPlane) -> ComplexPlane {
    let mut data: Vec<Complex64> = p.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform_in_place(p.width, p.height, &mut data, false);
    ComplexPlane::from_raw(p.width, p.height, data)
}

/// Forward 2-D DFT of a complex plane.
pub fn dft2_complex(p: &ComplexPlane) -> ComplexPlane {
    let mut data = p.data.clone();
    transform_in_place(p.width, p.height, &mut data, false);
    ComplexPlane::from_raw(p.width, p.height, data)
}

/// Normalized inverse 2-D DFT without the realness check.
pub fn idft2_complex(p: &ComplexPlane) -> ComplexPlane {
    let mut data = p.data.clone();
    transform_in_place(p.width, p.height, &mut data, true);
    let n = data.len() as f64;
    for c in &mut data {
        *c /= n;
    }
    ComplexPlane::from_raw(p.width, p.height, data)
}

/// Normalized inverse 2-D DFT of the spectrum of a real plane.
///
/// The imaginary part of the result is checked against
/// [`SYMMETRY_TOLERANCE`] times the norm of the full result and then dropped.
pub fn idft2(p: &ComplexPlane) -> Result<RealPlane> {
    let full = idft2_complex(p);
    let (mut im_sq, mut all_sq) = (0.0, 0.0);
    for c in &full.data {
        im_sq += c.im * c.im;
        all_sq += c.norm_sqr();
    }
    let residue = im_sq.sqrt();
    let limit = SYMMETRY_TOLERANCE * all_sq.sqrt();
    if residue > limit {
        return Err(Error::SymmetryViolation { residue, limit });
    }
    let data: Vec<f64> = full.data.iter().map(|c| c.re).collect();
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("inverse transform"));
    }
    Ok(RealPlane::from_raw(p.width, p.height, data))
}

/// `C(first_row) · v` through the spectral product `conj(F(first_row)) ⊙ F(v)`.
pub fn circulant_matvec(first_row: &RealPlane, v: &RealPlane) -> Result<RealPlane> {
    first_row.ensure_same_dims(v)?;
    let spectrum = dft2(first_row).conj().mul(&dft2(v));
    idft2(&spectrum)
}

/// Apply the circulant whose first-row spectrum is already known.
pub fn circulant_apply_spectrum(
    first_row_spectrum: &ComplexPlane,
    v_spectrum: &ComplexPlane,
) -> Result<RealPlane> {
    v_spectrum.ensure_dims(first_row_spectrum.dims())?;
    idft2(&first_row_spectrum.conj().mul(v_spectrum))
}

/// Materialize `C(first_row)` as a dense `N×N` matrix, `N = width·height`.
///
/// Rows and columns are indexed by row-major cell order; entry `(i, j)` is
/// `first_row[(y_j - y_i) mod h][(x_j - x_i) mod w]`.
pub fn build_circulant(first_row: &RealPlane) -> Result<DMatrix<f64>> {
    let n = first_row.len();
    if n > ORACLE_MAX_CELLS {
        return Err(Error::OracleScale {
            cells: n,
            limit: ORACLE_MAX_CELLS,
        });
    }
    let (w, h) = first_row.dims();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let (yi, xi) = (i / w, i % w);
        let (yj, xj) = (j / w, j % w);
        let dy = (yj + h - yi) % h;
        let dx = (xj + w - xi) % w;
        first_row.data[dy * w + dx]
    }))
}

/// Row-major plane as a column vector.
pub fn plane_to_vector(p: &RealPlane) -> nalgebra::DVector<f64> {
    nalgebra::DVector::from_column_slice(&p.data)
}

/// Column vector back into a plane of the given dimensions.
pub fn vector_to_plane(v: &nalgebra::DVector<f64>, width: usize, height: usize) -> Result<RealPlane> {
    RealPlane::new(width, height, v.as_slice().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_plane(rng: &mut ChaCha8Rng, w: usize, h: usize) -> RealPlane {
        RealPlane::from_fn(w, h, |_, _| rng.gen_range(-1.0..1.0)).unwrap()
    }

    fn max_rel(a: &[f64], b: &[f64]) -> f64 {
        let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
            / scale
    }

    #[test]
    fn zero_sized_plane_is_rejected() {
        assert!(matches!(
            RealPlane::new(0, 3, vec![]),
            Err(Error::InvalidDimension(_))
        ));
        assert!(matches!(
            RealPlane::new(2, 2, vec![1.0; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(RealPlane::new(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn delta_transforms_to_ones() {
        let spec = dft2(&RealPlane::delta(5, 3).unwrap());
        for c in spec.data() {
            assert!((c - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn constant_plane_concentrates_at_dc() {
        let c = 2.5;
        let p = RealPlane::new(6, 4, vec![c; 24]).unwrap();
        let spec = dft2(&p);
        assert!((spec.data()[0].re - c * 24.0).abs() < 1e-12);
        for z in &spec.data()[1..] {
            assert!(z.norm() < 1e-12);
        }
    }

    #[test]
    fn ones_spectrum_inverts_to_delta() {
        let ones = ComplexPlane::filled(4, 4, Complex64::new(1.0, 0.0)).unwrap();
        let p = idft2(&ones).unwrap();
        assert_eq!(p, RealPlane::delta(4, 4).unwrap());
    }

    #[test]
    fn roundtrip_recovers_random_planes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(w, h) in &[(8, 8), (4, 4), (5, 3), (1, 7)] {
            let p = random_plane(&mut rng, w, h);
            let back = idft2(&dft2(&p)).unwrap();
            assert!(max_rel(back.data(), p.data()) < 1e-12);
        }
    }

    #[test]
    fn asymmetric_spectrum_is_rejected() {
        let mut spec = ComplexPlane::filled(4, 4, Complex64::default()).unwrap();
        spec.data_mut()[1] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            idft2(&spec),
            Err(Error::SymmetryViolation { .. })
        ));
    }

    #[test]
    fn delta_first_row_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = random_plane(&mut rng, 4, 3);
        let out = circulant_matvec(&RealPlane::delta(4, 3).unwrap(), &v).unwrap();
        assert!(max_rel(out.data(), v.data()) < 1e-14);
        let m = build_circulant(&RealPlane::delta(4, 3).unwrap()).unwrap();
        assert_eq!(m, DMatrix::identity(12, 12));
    }

    #[test]
    fn one_dimensional_first_row_example() {
        let f = RealPlane::new(4, 1, vec![2.0, 1.0, 0.0, 1.0]).unwrap();
        let v = RealPlane::new(4, 1, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let out = circulant_matvec(&f, &v).unwrap();
        for (a, b) in out.data().iter().zip([2.0, 1.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn two_by_two_layout() {
        // a b / c d: offsets (0,0) (1,0) (0,1) (1,1) in row-major order.
        let f = RealPlane::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let m = build_circulant(&f).unwrap();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 2.0, 3.0, 4.0, //
                2.0, 1.0, 4.0, 3.0, //
                3.0, 4.0, 1.0, 2.0, //
                4.0, 3.0, 2.0, 1.0,
            ],
        );
        assert_eq!(m, expected);
        for i in 0..4 {
            let mut basis = vec![0.0; 4];
            basis[i] = 1.0;
            let e = RealPlane::new(2, 2, basis).unwrap();
            let fast = circulant_matvec(&f, &e).unwrap();
            let dense = &m * plane_to_vector(&e);
            assert!(max_rel(fast.data(), dense.as_slice()) < 1e-12);
        }
    }

    #[test]
    fn symmetric_first_row_gives_symmetric_matrix() {
        // f[d] = f[-d] along both axes.
        let f = RealPlane::from_fn(5, 4, |x, y| {
            let dx = x.min(5 - x) as f64;
            let dy = y.min(4 - y) as f64;
            (-(dx * dx + dy * dy) / 3.0).exp()
        })
        .unwrap();
        let m = build_circulant(&f).unwrap();
        assert!((&m - m.transpose()).amax() < 1e-15);
    }

    #[test]
    fn oracle_scale_guard() {
        let big = RealPlane::zeros(65, 64).unwrap();
        assert!(matches!(
            build_circulant(&big),
            Err(Error::OracleScale { .. })
        ));
    }

    #[test]
    fn roll_matches_definition() {
        let p = RealPlane::from_fn(3, 2, |x, y| (y * 3 + x) as f64).unwrap();
        let r = p.roll(1, 1);
        // out[0][0] = p[-1][-1] = p[1][2]
        assert_eq!(r.get(0, 0), 5.0);
        assert_eq!(r.get(1, 1), 0.0);
        assert_eq!(p.roll(3, 2), p);
    }
}
