//! Small raster helpers shared by the extractors: a 2-D real plane type,
//! separable Gaussian filtering and half-pixel bilinear resampling.

/// Row-major 2-D map of reals.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), width * height, "plane data length");
        Plane {
            width,
            height,
            data,
        }
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Plane::new(width, height, vec![value; width * height])
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Sample with coordinates clamped to the border.
    #[inline]
    pub fn at_clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Plane {
        Plane::new(self.width, self.height, self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Plane, f: impl Fn(f64, f64) -> f64) -> Plane {
        assert_eq!((self.width, self.height), (other.width, other.height));
        Plane::new(
            self.width,
            self.height,
            self.data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

/// Normalized 1-D Gaussian taps of the given odd length.
pub fn gaussian_kernel(len: usize, sigma: f64) -> Vec<f64> {
    let half = (len / 2) as f64;
    let mut k: Vec<f64> = (0..len)
        .map(|i| {
            let d = i as f64 - half;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable convolution with replicated borders.
pub fn separable_filter(plane: &Plane, taps: &[f64]) -> Plane {
    let (w, h) = (plane.width, plane.height);
    let r = (taps.len() / 2) as isize;
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (t, &k) in taps.iter().enumerate() {
                acc += k * plane.at_clamped(x as isize + t as isize - r, y as isize);
            }
            tmp[y * w + x] = acc;
        }
    }
    let tmp = Plane::new(w, h, tmp);
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (t, &k) in taps.iter().enumerate() {
                acc += k * tmp.at_clamped(x as isize, y as isize + t as isize - r);
            }
            out[y * w + x] = acc;
        }
    }
    Plane::new(w, h, out)
}

/// Source coordinate and blend weight for half-pixel-centred bilinear sampling.
#[inline]
fn source_taps(dst: usize, dst_len: usize, src_len: usize) -> (usize, usize, f64) {
    let scale = src_len as f64 / dst_len as f64;
    let pos = ((dst as f64 + 0.5) * scale - 0.5).max(0.0);
    let i0 = (pos.floor() as usize).min(src_len - 1);
    let i1 = (i0 + 1).min(src_len - 1);
    let frac = if i0 == i1 { 0.0 } else { pos - i0 as f64 };
    (i0, i1, frac)
}

/// Bilinear resample of an interleaved raster with `channels` samples per pixel.
///
/// Pixel centres sit at half-integer coordinates (the `align_corners = false`
/// convention). Identical source and target dimensions return a copy.
pub fn resize_bilinear<T>(
    src: &[T],
    width: usize,
    height: usize,
    channels: usize,
    target_w: usize,
    target_h: usize,
) -> Vec<f64>
where
    T: Copy + Into<f64>,
{
    debug_assert_eq!(src.len(), width * height * channels);
    if width == target_w && height == target_h {
        return src.iter().map(|&v| v.into()).collect();
    }
    let xs: Vec<_> = (0..target_w).map(|x| source_taps(x, target_w, width)).collect();
    let mut out = Vec::with_capacity(target_w * target_h * channels);
    for y in 0..target_h {
        let (y0, y1, fy) = source_taps(y, target_h, height);
        for &(x0, x1, fx) in &xs {
            for c in 0..channels {
                let p = |xx: usize, yy: usize| -> f64 { src[(yy * width + xx) * channels + c].into() };
                let top = p(x0, y0) * (1.0 - fx) + p(x1, y0) * fx;
                let bottom = p(x0, y1) * (1.0 - fx) + p(x1, y1) * fx;
                out.push(top * (1.0 - fy) + bottom * fy);
            }
        }
    }
    out
}

pub fn resize_plane(plane: &Plane, target_w: usize, target_h: usize) -> Plane {
    Plane::new(
        target_w,
        target_h,
        resize_bilinear(&plane.data, plane.width, plane.height, 1, target_w, target_h),
    )
}

/// 2×2 box-average downsample; odd trailing rows/columns are dropped.
pub fn downsample2(plane: &Plane) -> Plane {
    let (w, h) = (plane.width / 2, plane.height / 2);
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let s = plane.at(2 * x, 2 * y)
                + plane.at(2 * x + 1, 2 * y)
                + plane.at(2 * x, 2 * y + 1)
                + plane.at(2 * x + 1, 2 * y + 1);
            out.push(s * 0.25);
        }
    }
    Plane::new(w, h, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_kernel_is_normalized_and_symmetric() {
        let k = gaussian_kernel(7, 7.0 / 6.0);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for i in 0..3 {
            assert!((k[i] - k[6 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn bilinear_identity_and_constant() {
        let src: Vec<f64> = (0..12).map(|v| v as f64).collect();
        assert_eq!(resize_bilinear(&src, 4, 3, 1, 4, 3), src);
        let c = vec![0.25f64; 5 * 7];
        for v in resize_bilinear(&c, 5, 7, 1, 11, 3) {
            assert!((v - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn bilinear_upsample_interpolates_between_centres() {
        // 2 px → 4 px: centres at 0.25 and 0.75 of a pixel step
        let out = resize_bilinear(&[0.0f64, 1.0], 2, 1, 1, 4, 1);
        assert_eq!(out, vec![0.0, 0.25, 0.75, 1.0]);
    }

    #[test]
    fn downsample_averages_blocks() {
        let p = Plane::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(downsample2(&p).data, vec![2.5]);
    }
}
