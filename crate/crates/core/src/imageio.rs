//! Image decoding, channel separation and dataset enumeration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use image::{ImageFormat, ImageReader};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest accepted side length: one pixel of border on each side of a
/// single interior pixel.
pub const MIN_SIDE: u32 = 3;

/// A decoded 8-bit RGB raster in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    /// Builds an image from row-major pixels. Returns `None` when the
    /// pixel count does not match the dimensions.
    pub fn from_pixels(width: u32, height: u32, pixels: Vec<[u8; 3]>) -> Option<Self> {
        (pixels.len() == width as usize * height as usize).then_some(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [u8; 3]) -> Self {
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        self.pixels[(y * self.width + x) as usize]
    }
}

/// One color channel of an [`RgbImage`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelPlane {
    width: u32,
    height: u32,
    values: Vec<u8>,
}

impl ChannelPlane {
    pub fn from_values(width: u32, height: u32, values: Vec<u8>) -> Option<Self> {
        (values.len() == width as usize * height as usize).then_some(Self {
            width,
            height,
            values,
        })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> u8) -> Self {
        let mut values = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            values,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.values[(y * self.width + x) as usize]
    }

    /// Rotates the plane 90° counter-clockwise.
    pub fn rotate90(&self) -> Self {
        let (w, h) = (self.width, self.height);
        Self::from_fn(h, w, |x, y| self.get(w - 1 - y, x))
    }
}

/// Decodes a JPEG or PNG file. Grayscale sources are replicated into all
/// three channels.
pub fn load_image(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .and_then(|r| r.with_guessed_format())
        .map_err(|e| Error::io(path, e))?;
    match reader.format() {
        Some(ImageFormat::Jpeg | ImageFormat::Png) => {}
        _ => return Err(Error::UnsupportedFormat { path: path.into() }),
    }
    let decoded = reader.decode().map_err(|e| Error::Decode {
        path: path.into(),
        message: e.to_string(),
    })?;
    let rgb = decoded.to_rgb8();
    let (width, height) = rgb.dimensions();
    if width < MIN_SIDE || height < MIN_SIDE {
        return Err(Error::ImageTooSmall {
            path: path.into(),
            width,
            height,
        });
    }
    let pixels = rgb.pixels().map(|p| p.0).collect();
    Ok(RgbImage {
        width,
        height,
        pixels,
    })
}

/// Separates an image into its (red, green, blue) planes.
pub fn split_channels(image: &RgbImage) -> [ChannelPlane; 3] {
    std::array::from_fn(|c| ChannelPlane {
        width: image.width,
        height: image.height,
        values: image.pixels.iter().map(|p| p[c]).collect(),
    })
}

/// Inverse of [`split_channels`]. Returns `None` if the planes disagree on
/// dimensions.
pub fn merge_channels(planes: &[ChannelPlane; 3]) -> Option<RgbImage> {
    let [r, g, b] = planes;
    if r.width != g.width || r.width != b.width || r.height != g.height || r.height != b.height {
        return None;
    }
    let pixels = r
        .values
        .iter()
        .zip(&g.values)
        .zip(&b.values)
        .map(|((&r, &g), &b)| [r, g, b])
        .collect();
    Some(RgbImage {
        width: r.width,
        height: r.height,
        pixels,
    })
}

/// How class labels are derived from a dataset directory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Labeling {
    /// Flat directory of numerically named files; class = id / 100.
    Simplicity,
    /// One subdirectory per class, classes numbered in sorted name order.
    BySubdirectory,
}

impl Labeling {
    pub fn as_str(self) -> &'static str {
        match self {
            Labeling::Simplicity => "simplicity",
            Labeling::BySubdirectory => "by-subdirectory",
        }
    }
}

impl fmt::Display for Labeling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Labeling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simplicity" => Ok(Labeling::Simplicity),
            "by-subdirectory" => Ok(Labeling::BySubdirectory),
            other => Err(Error::UnknownLabeling(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub image_id: u32,
    /// Path relative to the manifest root, `/`-separated.
    pub relative_path: String,
    pub class_label: u16,
}

/// Ordered list of labeled images under a dataset root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub labeling: Labeling,
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn class_counts(&self) -> BTreeMap<u16, usize> {
        let mut counts = BTreeMap::new();
        for e in &self.entries {
            *counts.entry(e.class_label).or_insert(0) += 1;
        }
        counts
    }

    pub fn path_of(&self, entry: &ManifestEntry) -> PathBuf {
        self.root.join(&entry.relative_path)
    }
}

/// Simplicity classes hold 100 consecutive ids each.
pub const SIMPLICITY_CLASS_SIZE: u32 = 100;

fn is_image_file(path: &Path) -> bool {
    path.is_file()
        && path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| matches!(e.to_ascii_lowercase().as_str(), "jpg" | "jpeg" | "png"))
            .unwrap_or(false)
}

fn sorted_dir(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|entry| entry.map(|e| e.path()))
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::io(dir, e))?;
    paths.sort();
    Ok(paths)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Enumerates the images under `root` into a manifest sorted by image id.
pub fn scan_dataset(root: impl AsRef<Path>, labeling: Labeling) -> Result<DatasetManifest> {
    let root = root.as_ref();
    let mut entries = Vec::new();
    match labeling {
        Labeling::Simplicity => {
            let mut seen = BTreeSet::new();
            for path in sorted_dir(root)?.into_iter().filter(|p| is_image_file(p)) {
                let id: u32 = path
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::NonNumericName(path.clone()))?;
                if !seen.insert(id) {
                    return Err(Error::DuplicateId { id, path });
                }
                let class = id / SIMPLICITY_CLASS_SIZE;
                let class_label = u16::try_from(class).map_err(|_| Error::ClassOutOfRange {
                    label: class.into(),
                    path: path.clone(),
                })?;
                entries.push(ManifestEntry {
                    image_id: id,
                    relative_path: file_name(&path),
                    class_label,
                });
            }
            entries.sort_by_key(|e| e.image_id);
        }
        Labeling::BySubdirectory => {
            let class_dirs = sorted_dir(root)?.into_iter().filter(|p| p.is_dir());
            let mut next_id = 0u32;
            for (class, dir) in class_dirs.enumerate() {
                let class_label = u16::try_from(class).map_err(|_| Error::ClassOutOfRange {
                    label: class as u64,
                    path: dir.clone(),
                })?;
                let class_name = file_name(&dir);
                for path in sorted_dir(&dir)?.into_iter().filter(|p| is_image_file(p)) {
                    entries.push(ManifestEntry {
                        image_id: next_id,
                        relative_path: format!("{class_name}/{}", file_name(&path)),
                        class_label,
                    });
                    next_id += 1;
                }
            }
        }
    }
    if entries.is_empty() {
        return Err(Error::NoImages(root.into()));
    }
    Ok(DatasetManifest {
        root: root.into(),
        labeling,
        entries,
    })
}
