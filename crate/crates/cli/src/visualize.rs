use std::path::Path;

use anyhow::{bail, Context, Result};
use bvqa::cnn::dump_activations;
use bvqa::ingest::{for_each_frame, resize_normalize};
use bvqa::saliency::{score_cam, SaliencyMap, SALIENCY_SIDE};
use bvqa::{Frame, InferenceGraph, SamplingPolicy};
use image::{Rgb, RgbImage};

use crate::args::{Common, GraphArg, VisualizeArgs};
use crate::commands::{frame_source, manifests};
use crate::{models, usage, Outcome};

fn load_frame(common: &Common, args: &VisualizeArgs) -> Result<Frame> {
    if let Some(path) = &args.image {
        let img = image::open(path).with_context(|| format!("reading {}", path.display()))?.to_rgb8();
        return Ok(Frame::from_rgb8(img.width() as usize, img.height() as usize, img.as_raw())?);
    }
    let Some(id) = &args.video else {
        return Err(usage("visualize needs --image <file> or --video <id> with --manifest"));
    };
    let video = manifests(common)?
        .into_iter()
        .find_map(|m| m.get(id).cloned())
        .ok_or_else(|| usage(format!("video `{id}` is not in the manifest")))?;
    let mut picked = None;
    for_each_frame(&video, &frame_source(common), SamplingPolicy::EveryFrame, |f| {
        if f.source_index == args.frame {
            picked = Some(f);
        }
        Ok(())
    })?;
    picked.ok_or_else(|| anyhow::anyhow!("{id} has no frame {}", args.frame))
}

/// Blue → cyan → yellow → red ramp.
fn heat(v: f64) -> [f64; 3] {
    let v = v.clamp(0.0, 1.0);
    let r = (1.5 - (4.0 * v - 3.0).abs()).clamp(0.0, 1.0);
    let g = (1.5 - (4.0 * v - 2.0).abs()).clamp(0.0, 1.0);
    let b = (1.5 - (4.0 * v - 1.0).abs()).clamp(0.0, 1.0);
    [r, g, b]
}

/// Three 224×224 panels side by side: frame, map, frame blended with the heat-mapped map.
pub fn saliency_panel(frame: &Frame, map: &SaliencyMap) -> Result<RgbImage> {
    let small = resize_normalize(frame, SALIENCY_SIDE, SALIENCY_SIDE)?;
    let s = SALIENCY_SIDE as u32;
    let to8 = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
    let mut out = RgbImage::new(3 * s, s);
    for y in 0..SALIENCY_SIDE {
        for x in 0..SALIENCY_SIDE {
            let px = small.rgb(x, y).map(f64::from);
            let m = map.at(y, x);
            let h = heat(m);
            let blend = [0, 1, 2].map(|c| to8(0.5 * px[c] + 0.5 * h[c]));
            let (xu, yu) = (x as u32, y as u32);
            out.put_pixel(xu, yu, Rgb(px.map(to8)));
            out.put_pixel(s + xu, yu, Rgb([to8(m); 3]));
            out.put_pixel(2 * s + xu, yu, Rgb(blend));
        }
    }
    Ok(out)
}

fn write_saliency(frame: &Frame, vgg: &dyn InferenceGraph, dir: &Path) -> Result<()> {
    let cam = score_cam(frame, vgg)?;
    if cam.degenerate {
        log::warn!("saliency map is degenerate (all zero)");
    }
    cam.map.save(&dir.join("saliency.png"))?;
    let panel = saliency_panel(frame, &cam.map)?;
    let path = dir.join("saliency_overlay.png");
    panel.save(&path).with_context(|| format!("writing {}", path.display()))?;
    println!("class {} -> {}", cam.target_class, path.display());
    Ok(())
}

pub fn visualize(common: &Common, args: &VisualizeArgs) -> Result<Outcome> {
    let Some(dir) = &common.out else {
        return Err(usage("visualize needs --out <directory>"));
    };
    let frame = load_frame(common, args)?;
    std::fs::create_dir_all(dir)?;
    if args.saliency {
        let b = models::load(common, false, true)?;
        write_saliency(&frame, b.vgg.as_deref().expect("loaded"), dir)?;
        return Ok(Outcome::Success);
    }
    let b = match args.graph {
        GraphArg::Resnet => models::load(common, true, false)?.resnet,
        GraphArg::Vgg => models::load(common, false, true)?.vgg,
    };
    let graph = b.expect("loaded");
    if !graph.layers().contains(&args.layer) {
        bail!(
            "unknown layer `{}` for {} (available: {})",
            args.layer,
            graph.graph_id(),
            graph.layers().join(", ")
        );
    }
    let dump = dump_activations(&frame, graph.as_ref(), &args.layer)?;
    let written = dump.write(dir)?;
    println!(
        "{}: {} channel image(s), grid and max channel {} -> {}",
        args.layer,
        dump.channels.len(),
        dump.max_channel,
        dir.display()
    );
    log::debug!("wrote {written:?}");
    Ok(Outcome::Success)
}
