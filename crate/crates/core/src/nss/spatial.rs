//! Per-frame spatial NSS features: 2 scales × 20 maps × 17 statistics.
//!
//! Maps, in order, computed on BT.601 luma and colour-difference planes:
//!
//! 0. luma MSCN
//! 1–4. horizontal, vertical, main-diagonal and anti-diagonal MSCN products
//! 5. local deviation field used by the MSCN normalization
//! 6–12. seven log-derivative maps of `ln(luma + 1)`
//! 13. Cb MSCN
//! 14. Cr MSCN
//! 15–16. Cb horizontal and vertical MSCN products
//! 17–18. Cr horizontal and vertical MSCN products
//! 19. MSCN of the chroma magnitude `sqrt(Cb² + Cr²)`
//!
//! The second scale repeats the catalogue on 2×2 box-downsampled planes.

use super::mscn::{log_derivatives, mscn_with_sigma, paired_products, WINDOW};
use super::stats::{summarize_into, STATS_PER_MAP};
use crate::error::{Error, Result};
use crate::imageops::{downsample2, Plane};
use crate::ingest::Frame;

pub const MAPS_PER_SCALE: usize = 20;
pub const SCALES: usize = 2;
pub const SPATIAL_DIM: usize = SCALES * MAPS_PER_SCALE * STATS_PER_MAP;

pub const MAP_NAMES: [&str; MAPS_PER_SCALE] = [
    "mscn",
    "pair_h",
    "pair_v",
    "pair_d1",
    "pair_d2",
    "local_sigma",
    "logd_h",
    "logd_v",
    "logd_d1",
    "logd_d2",
    "logd_lap",
    "logd_cross",
    "logd_diag",
    "cb_mscn",
    "cr_mscn",
    "cb_pair_h",
    "cb_pair_v",
    "cr_pair_h",
    "cr_pair_v",
    "chroma_mag_mscn",
];

/// Smallest frame side for which both scales admit the MSCN window.
pub const MIN_SIDE: usize = 2 * WINDOW;

fn scale_features(luma: &Plane, cb: &Plane, cr: &Plane, out: &mut Vec<f64>) -> Result<()> {
    let l = mscn_with_sigma(luma)?;
    summarize_into(&l.coefficients.data, out);
    for p in paired_products(&l.coefficients) {
        summarize_into(&p, out);
    }
    summarize_into(&l.local_sigma.data, out);
    for d in log_derivatives(luma) {
        summarize_into(&d, out);
    }

    let cb_m = mscn_with_sigma(cb)?.coefficients;
    let cr_m = mscn_with_sigma(cr)?.coefficients;
    summarize_into(&cb_m.data, out);
    summarize_into(&cr_m.data, out);
    let [cb_h, cb_v, ..] = paired_products(&cb_m);
    summarize_into(&cb_h, out);
    summarize_into(&cb_v, out);
    let [cr_h, cr_v, ..] = paired_products(&cr_m);
    summarize_into(&cr_h, out);
    summarize_into(&cr_v, out);
    let magnitude = cb.zip_map(cr, |b, r| (b * b + r * r).sqrt());
    summarize_into(&mscn_with_sigma(&magnitude)?.coefficients.data, out);
    Ok(())
}

/// The 680-entry spatial NSS vector of one frame.
pub fn spatial_nss_frame(frame: &Frame) -> Result<Vec<f64>> {
    if frame.width < MIN_SIDE || frame.height < MIN_SIDE {
        return Err(Error::InvalidArgument(format!(
            "spatial NSS needs frames of at least {MIN_SIDE}x{MIN_SIDE}, got {}x{}",
            frame.width, frame.height
        )));
    }
    let luma = frame.luma();
    let (cb, cr) = frame.chroma();
    let mut out = Vec::with_capacity(SPATIAL_DIM);
    scale_features(&luma, &cb, &cr, &mut out)?;
    scale_features(&downsample2(&luma), &downsample2(&cb), &downsample2(&cr), &mut out)?;
    debug_assert_eq!(out.len(), SPATIAL_DIM);
    Ok(out)
}
