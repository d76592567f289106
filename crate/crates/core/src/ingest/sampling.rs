use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use serde::{Deserialize, Serialize};

use super::{Frame, VideoRecord};
use crate::error::{Error, Result};

/// Which frames of a clip an extractor consumes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplingPolicy {
    EveryFrame,
    /// `n` frames per second of video, taking the first frame of each slot.
    PerSecond(u32),
}

impl SamplingPolicy {
    fn validate(self) -> Result<()> {
        match self {
            SamplingPolicy::PerSecond(0) => Err(Error::InvalidArgument("per-second rate must be > 0".into())),
            _ => Ok(()),
        }
    }

    /// Whether frame `index` of a clip at `fps` is selected, without streaming state.
    pub fn selects(self, index: usize, fps: f64) -> bool {
        match self {
            SamplingPolicy::EveryFrame => true,
            SamplingPolicy::PerSecond(0) => false,
            SamplingPolicy::PerSecond(n) => {
                let step = fps / n as f64;
                let k0 = (index as f64 / step).ceil() as i64;
                (k0 - 1..=k0 + 1)
                    .filter(|&k| k >= 0)
                    .any(|k| (k as f64 * fps / n as f64).floor() as i64 == index as i64)
            }
        }
    }
}

/// Streaming frame selector: frame `i` is kept iff `i = floor(k·fps/n)` for some `k`.
#[derive(Clone, Debug)]
pub struct SampleSelector {
    policy: SamplingPolicy,
    fps: f64,
    next_k: u64,
}

impl SampleSelector {
    pub fn new(policy: SamplingPolicy, fps: f64) -> Result<Self> {
        policy.validate()?;
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::InvalidArgument(format!("fps must be > 0, got {fps}")));
        }
        Ok(SampleSelector {
            policy,
            fps,
            next_k: 0,
        })
    }

    fn target(&self, k: u64) -> u64 {
        match self.policy {
            SamplingPolicy::EveryFrame => k,
            SamplingPolicy::PerSecond(n) => (k as f64 * self.fps / n as f64).floor() as u64,
        }
    }

    /// Must be called with consecutive indices starting at 0.
    pub fn wants(&mut self, index: usize) -> bool {
        let index = index as u64;
        if self.target(self.next_k) != index {
            return false;
        }
        while self.target(self.next_k) == index {
            self.next_k += 1;
        }
        true
    }
}

/// Indices selected from a clip of `total_frames` frames.
pub fn sample_indices(total_frames: usize, fps: f64, policy: SamplingPolicy) -> Result<Vec<usize>> {
    let mut sel = SampleSelector::new(policy, fps)?;
    Ok((0..total_frames).filter(|&i| sel.wants(i)).collect())
}

/// Where frames come from: directories of images are read directly; other
/// paths go through an external decoder invoked as
/// `<decoder> <input> <width> <height> rgb24`, which writes raw RGB frames to stdout.
#[derive(Clone, Debug, Default)]
pub struct FrameSource {
    pub decoder: Option<PathBuf>,
}

impl FrameSource {
    pub fn with_decoder(program: impl Into<PathBuf>) -> Self {
        FrameSource {
            decoder: Some(program.into()),
        }
    }

    /// Uses `BVQA_DECODER` when set.
    pub fn from_env() -> Self {
        FrameSource {
            decoder: std::env::var_os("BVQA_DECODER").map(PathBuf::from),
        }
    }
}

const IMAGE_EXTENSIONS: &[&str] = &["png", "jpg", "jpeg", "bmp", "ppm", "pgm", "tif", "tiff"];

fn list_image_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
                .unwrap_or(false)
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Decodes `video` sequentially, passing each frame selected by `policy` to `sink`.
///
/// Returns the number of frames delivered.
pub fn for_each_frame<F>(video: &VideoRecord, source: &FrameSource, policy: SamplingPolicy, mut sink: F) -> Result<usize>
where
    F: FnMut(Frame) -> Result<()>,
{
    let mut selector = SampleSelector::new(policy, video.fps)?;
    let (w, h) = (video.width as usize, video.height as usize);
    let mut delivered = 0usize;
    let decode_err = |message: String| Error::Decode {
        path: video.path.clone(),
        message,
    };

    if video.path.is_dir() {
        for (index, file) in list_image_files(&video.path)?.into_iter().enumerate() {
            if !selector.wants(index) {
                continue;
            }
            let img = image::open(&file)
                .map_err(|e| decode_err(format!("{}: {e}", file.display())))?
                .to_rgb8();
            if (img.width() as usize, img.height() as usize) != (w, h) {
                return Err(decode_err(format!(
                    "{} is {}x{}, manifest declares {w}x{h}",
                    file.display(),
                    img.width(),
                    img.height()
                )));
            }
            let frame = Frame::from_rgb8(w, h, img.as_raw())?.with_position(index, index as f64 / video.fps);
            sink(frame)?;
            delivered += 1;
        }
    } else {
        let program = source
            .decoder
            .as_ref()
            .ok_or_else(|| decode_err("no frame decoder configured for a non-directory input".into()))?;
        let mut child = Command::new(program)
            .arg(&video.path)
            .arg(w.to_string())
            .arg(h.to_string())
            .arg("rgb24")
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| decode_err(format!("spawning {}: {e}", program.display())))?;
        let mut stdout = child.stdout.take().expect("piped stdout");
        let mut stderr = child.stderr.take().expect("piped stderr");
        let stderr_drain = std::thread::spawn(move || {
            let mut text = String::new();
            let _ = stderr.read_to_string(&mut text);
            text
        });
        let mut buf = vec![0u8; w * h * 3];
        let mut index = 0usize;
        let read_result = loop {
            match read_full(&mut stdout, &mut buf) {
                Ok(0) => break Ok(()),
                Ok(n) if n < buf.len() => {
                    log::warn!("{}: discarding truncated trailing frame ({n} bytes)", video.path.display());
                    break Ok(());
                }
                Ok(_) => {}
                Err(e) => break Err(decode_err(format!("reading decoder output: {e}"))),
            }
            if selector.wants(index) {
                let frame = Frame::from_rgb8(w, h, &buf)?.with_position(index, index as f64 / video.fps);
                if let Err(e) = sink(frame) {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(e);
                }
                delivered += 1;
            }
            index += 1;
        };
        drop(stdout);
        let status = child
            .wait()
            .map_err(|e| decode_err(format!("waiting for decoder: {e}")))?;
        let stderr_text = stderr_drain.join().unwrap_or_default();
        read_result?;
        if !status.success() && delivered == 0 {
            return Err(decode_err(format!("decoder exited with {status}: {}", stderr_text.trim())));
        }
    }

    if delivered == 0 {
        return Err(Error::NoFrames(video.path.clone()));
    }
    Ok(delivered)
}

/// Reads until `buf` is full or EOF; returns bytes read.
fn read_full(r: &mut impl Read, buf: &mut [u8]) -> std::io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

/// Collects the frames `policy` selects from `video`, in decode order.
pub fn sample_frames(video: &VideoRecord, source: &FrameSource, policy: SamplingPolicy) -> Result<Vec<Frame>> {
    let mut frames = Vec::new();
    for_each_frame(video, source, policy, |f| {
        frames.push(f);
        Ok(())
    })?;
    Ok(frames)
}
