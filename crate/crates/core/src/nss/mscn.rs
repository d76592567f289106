use crate::error::{Error, Result};
use crate::imageops::{gaussian_kernel, separable_filter, Plane};

pub const WINDOW: usize = 7;
pub const WINDOW_SIGMA: f64 = 7.0 / 6.0;
/// Divisive-normalization stabilizer on the `[0, 255]` scale.
pub const STABILIZER: f64 = 1.0;
/// Relative local variance below which a window counts as flat.
const FLAT_VARIANCE: f64 = 1e-12;

/// MSCN coefficients together with the local deviation field they were normalized by.
#[derive(Clone, Debug)]
pub struct Mscn {
    pub coefficients: Plane,
    pub local_sigma: Plane,
}

/// Mean-subtracted, contrast-normalized coefficients of `luma`.
pub fn mscn_transform(luma: &Plane) -> Result<Plane> {
    Ok(mscn_with_sigma(luma)?.coefficients)
}

pub fn mscn_with_sigma(luma: &Plane) -> Result<Mscn> {
    if luma.width < WINDOW || luma.height < WINDOW {
        return Err(Error::InvalidArgument(format!(
            "map {}x{} smaller than the {WINDOW}x{WINDOW} window",
            luma.width, luma.height
        )));
    }
    let taps = gaussian_kernel(WINDOW, WINDOW_SIGMA);
    let mu = separable_filter(luma, &taps);
    let sq = separable_filter(&luma.map(|v| v * v), &taps);
    let local_sigma = sq.zip_map(&mu, |s, m| {
        let var = (s - m * m).abs();
        if var <= FLAT_VARIANCE * s.max(1.0) {
            0.0
        } else {
            var.sqrt()
        }
    });
    let mut coefficients = Vec::with_capacity(luma.data.len());
    for i in 0..luma.data.len() {
        let centred = luma.data[i] - mu.data[i];
        // flat windows: the filtered mean differs from the samples only by rounding
        coefficients.push(if local_sigma.data[i] == 0.0 { 0.0 } else { centred / (local_sigma.data[i] + STABILIZER) });
    }
    Ok(Mscn {
        coefficients: Plane::new(luma.width, luma.height, coefficients),
        local_sigma,
    })
}

/// Products of horizontally, vertically and diagonally adjacent coefficients.
pub fn paired_products(m: &Plane) -> [Vec<f64>; 4] {
    let (w, h) = (m.width, m.height);
    let mut hz = Vec::with_capacity(w * h);
    let mut vt = Vec::with_capacity(w * h);
    let mut d1 = Vec::with_capacity(w * h);
    let mut d2 = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let c = m.at(x, y);
            if x + 1 < w {
                hz.push(c * m.at(x + 1, y));
            }
            if y + 1 < h {
                vt.push(c * m.at(x, y + 1));
                if x + 1 < w {
                    d1.push(c * m.at(x + 1, y + 1));
                }
                if x > 0 {
                    d2.push(c * m.at(x - 1, y + 1));
                }
            }
        }
    }
    [hz, vt, d1, d2]
}

/// Seven log-derivative maps of `ln(luma + 1)` over interior pixels.
pub fn log_derivatives(luma: &Plane) -> [Vec<f64>; 7] {
    let j = luma.map(|v| (v.max(0.0) + 1.0).ln());
    let mut out: [Vec<f64>; 7] = Default::default();
    for y in 1..luma.height.saturating_sub(1) {
        for x in 1..luma.width.saturating_sub(1) {
            let p = |dx: isize, dy: isize| j.at((x as isize + dx) as usize, (y as isize + dy) as usize);
            out[0].push(p(1, 0) - p(0, 0));
            out[1].push(p(0, 1) - p(0, 0));
            out[2].push(p(1, 1) - p(0, 0));
            out[3].push(p(-1, 1) - p(0, 0));
            out[4].push(p(0, -1) + p(0, 1) - p(-1, 0) - p(1, 0));
            out[5].push(p(0, 0) + p(1, 1) - p(1, 0) - p(0, 1));
            out[6].push(p(-1, -1) + p(1, 1) - p(1, -1) - p(-1, 1));
        }
    }
    out
}
