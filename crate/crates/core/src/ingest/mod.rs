//! Dataset manifests, frame decoding and frame sampling.

mod frame;
mod sampling;

pub use frame::{resize_normalize, Frame};
pub use sampling::{
    for_each_frame, sample_frames, sample_indices, FrameSource, SampleSelector, SamplingPolicy,
};

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lowest and highest admissible subjective score.
pub const MOS_RANGE: (f64, f64) = (1.0, 5.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VideoRecord {
    pub video_id: String,
    /// Resolved path: a video file for the decoder, or a directory of frame images.
    pub path: PathBuf,
    pub mos: f64,
    pub width: u32,
    pub height: u32,
    pub fps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
}

impl VideoRecord {
    pub fn validate(&self) -> Result<()> {
        if !(MOS_RANGE.0..=MOS_RANGE.1).contains(&self.mos) {
            return Err(Error::InvalidArgument(format!(
                "mos {} outside [{}, {}]",
                self.mos, MOS_RANGE.0, MOS_RANGE.1
            )));
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(Error::InvalidArgument(format!("fps must be > 0, got {}", self.fps)));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidArgument(format!(
                "frame size must be positive, got {}x{}",
                self.width, self.height
            )));
        }
        if self.video_id.is_empty() {
            return Err(Error::InvalidArgument("empty video_id".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub records: Vec<VideoRecord>,
}

#[derive(Debug, Deserialize)]
struct ManifestRow {
    video_id: String,
    path: String,
    mos: f64,
    width: u32,
    height: u32,
    fps: f64,
}

impl DatasetManifest {
    pub fn new(name: impl Into<String>, records: Vec<VideoRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyManifest);
        }
        let mut seen = HashSet::new();
        for r in &records {
            r.validate().map_err(|e| e.for_video(&r.video_id))?;
            if !seen.insert(r.video_id.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate video_id `{}`", r.video_id)));
            }
        }
        Ok(DatasetManifest {
            name: name.into(),
            records,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, video_id: &str) -> Option<&VideoRecord> {
        self.records.iter().find(|r| r.video_id == video_id)
    }

    pub fn mos(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.mos).collect()
    }

    /// Concatenates manifests, prefixing every id with its dataset name.
    pub fn combine(name: impl Into<String>, parts: &[DatasetManifest]) -> Result<Self> {
        let records = parts
            .iter()
            .flat_map(|m| {
                m.records.iter().map(move |r| VideoRecord {
                    video_id: format!("{}/{}", m.name, r.video_id),
                    ..r.clone()
                })
            })
            .collect();
        DatasetManifest::new(name, records)
    }
}

/// Reads a manifest CSV (`video_id,path,mos,width,height,fps`).
///
/// Relative paths are resolved against the manifest's directory. Errors name
/// the offending line of the file.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);

    let headers = reader
        .headers()
        .map_err(|e| Error::Manifest {
            path: path.into(),
            message: e.to_string(),
        })?
        .clone();
    for required in ["video_id", "path", "mos", "width", "height", "fps"] {
        if !headers.iter().any(|h| h == required) {
            return Err(Error::Manifest {
                path: path.into(),
                message: format!("missing column `{required}`"),
            });
        }
    }

    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (i, row) in reader.deserialize::<ManifestRow>().enumerate() {
        // header is line 1
        let line = i + 2;
        let row_err = |message: String| Error::ManifestRow {
            path: path.into(),
            row: line,
            message,
        };
        let row = row.map_err(|e| row_err(e.to_string()))?;
        if row.video_id.is_empty() {
            return Err(row_err("missing video_id".into()));
        }
        if !seen.insert(row.video_id.clone()) {
            return Err(row_err(format!("duplicate video_id `{}`", row.video_id)));
        }
        let record = VideoRecord {
            video_id: row.video_id,
            path: base.join(&row.path),
            mos: row.mos,
            width: row.width,
            height: row.height,
            fps: row.fps,
            duration_s: None,
        };
        record.validate().map_err(|e| row_err(e.to_string()))?;
        records.push(record);
    }
    if records.is_empty() {
        return Err(Error::EmptyManifest);
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    Ok(DatasetManifest { name, records })
}

/// Writes a manifest CSV; paths are written as given.
pub fn write_manifest(path: impl AsRef<Path>, records: &[VideoRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Manifest {
        path: path.into(),
        message: e.to_string(),
    })?;
    let io = |e: csv::Error| Error::Manifest {
        path: path.into(),
        message: e.to_string(),
    };
    w.write_record(["video_id", "path", "mos", "width", "height", "fps"])
        .map_err(io)?;
    for r in records {
        w.write_record([
            r.video_id.clone(),
            r.path.to_string_lossy().into_owned(),
            r.mos.to_string(),
            r.width.to_string(),
            r.height.to_string(),
            r.fps.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
