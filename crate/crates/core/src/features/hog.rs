use std::f64::consts::PI;

use super::{FeatureMap, ImageFrame, CELL_SIZE};
use crate::error::{Error, Result};
use crate::spectral::RealPlane;

/// Cell-histogram HOG settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HogParams {
    pub cell: usize,
    pub orientations: usize,
    pub clip: f64,
    pub epsilon: f64,
}

impl Default for HogParams {
    fn default() -> Self {
        Self {
            cell: CELL_SIZE,
            orientations: 9,
            clip: 0.2,
            epsilon: 1e-3,
        }
    }
}

/// Unsigned-orientation HOG on the gray version of `patch`.
///
/// Gradients are central differences with replicated borders. Each pixel votes its
/// gradient magnitude into the two nearest of `orientations` bins over `[0, π)` (bin
/// `b` is centered at `bπ/orientations`, wrapping). Cell histograms are L2-normalized,
/// clipped at `clip`, and normalized again.
pub fn hog(patch: &ImageFrame, params: &HogParams) -> Result<FeatureMap> {
    let (w, h) = (patch.width(), patch.height());
    let cell = params.cell;
    if cell == 0 || params.orientations == 0 {
        return Err(Error::InvalidConfig("HOG needs a positive cell size and bin count".into()));
    }
    if w % cell != 0 || h % cell != 0 {
        return Err(Error::InvalidDimension(format!(
            "patch {w}x{h} is not a multiple of the {cell}-pixel cell"
        )));
    }
    let gray = patch.to_gray();
    let g = |x: usize, y: usize| gray.get(x, y, 0);
    let (cw, chh) = (w / cell, h / cell);
    let nb = params.orientations;
    let mut hist = vec![0.0; cw * chh * nb];
    let bin_width = PI / nb as f64;

    for y in 0..h {
        let (yu, yd) = (y.saturating_sub(1), (y + 1).min(h - 1));
        for x in 0..w {
            let (xl, xr) = (x.saturating_sub(1), (x + 1).min(w - 1));
            let gx = g(xr, y) - g(xl, y);
            let gy = g(x, yd) - g(x, yu);
            let mag = gx.hypot(gy);
            if mag == 0.0 {
                continue;
            }
            let mut theta = gy.atan2(gx);
            if theta < 0.0 {
                theta += PI;
            }
            let pos = theta / bin_width;
            let lo = pos.floor();
            let frac = pos - lo;
            let b0 = lo as usize % nb;
            let b1 = (b0 + 1) % nb;
            let base = ((y / cell) * cw + x / cell) * nb;
            hist[base + b0] += (1.0 - frac) * mag;
            hist[base + b1] += frac * mag;
        }
    }

    let eps2 = params.epsilon * params.epsilon;
    for v in hist.chunks_exact_mut(nb) {
        let n = (v.iter().map(|a| a * a).sum::<f64>() + eps2).sqrt();
        v.iter_mut().for_each(|a| *a = (*a / n).min(params.clip));
        let n = (v.iter().map(|a| a * a).sum::<f64>() + eps2).sqrt();
        v.iter_mut().for_each(|a| *a /= n);
    }

    let channels = (0..nb)
        .map(|b| {
            let data = (0..cw * chh).map(|c| hist[c * nb + b]).collect();
            RealPlane::new(cw, chh, data)
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureMap::new(channels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_patch_has_no_energy() {
        let p = ImageFrame::from_fn(16, 12, 3, |_, _, c| 0.2 + 0.1 * c as f64).unwrap();
        let f = hog(&p, &HogParams::default()).unwrap();
        assert_eq!(f.dims(), (4, 3));
        assert_eq!(f.channel_count(), 9);
        assert!(f.channels().iter().all(|c| c.data().iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn vertical_edge_votes_horizontal_gradient_bin() {
        // step between columns 7 and 8; the edge pixels lie in cell column 1 and 2
        let p = ImageFrame::from_fn(16, 8, 1, |x, _, _| if x < 8 { 0.1 } else { 0.9 }).unwrap();
        let f = hog(&p, &HogParams::default()).unwrap();
        for cy in 0..2 {
            for cx in [1, 2] {
                let v = f.cell(cx, cy);
                let (best, _) = v
                    .iter()
                    .enumerate()
                    .fold((0, f64::MIN), |acc, (i, a)| if *a > acc.1 { (i, *a) } else { acc });
                assert_eq!(best, 0);
                assert!(v[0] > 0.5);
            }
            for cx in [0, 3] {
                assert!(f.cell(cx, cy).iter().all(|a| *a == 0.0));
            }
        }
    }

    #[test]
    fn offset_invariance() {
        let base = |x: usize, y: usize| ((x * 13 + y * 7) % 17) as f64 / 40.0;
        let a = ImageFrame::from_fn(8, 8, 1, |x, y, _| base(x, y)).unwrap();
        let b = ImageFrame::from_fn(8, 8, 1, |x, y, _| base(x, y) + 0.3).unwrap();
        let fa = hog(&a, &HogParams::default()).unwrap();
        let fb = hog(&b, &HogParams::default()).unwrap();
        for (ca, cb) in fa.channels().iter().zip(fb.channels()) {
            for (u, v) in ca.data().iter().zip(cb.data()) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_non_multiple_sizes() {
        let p = ImageFrame::from_fn(10, 8, 1, |_, _, _| 0.5).unwrap();
        assert!(matches!(
            hog(&p, &HogParams::default()),
            Err(Error::InvalidDimension(_))
        ));
    }
}
