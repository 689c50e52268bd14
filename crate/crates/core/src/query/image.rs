//! Fixed-grid gradient-orientation descriptors for image matching.
//!
//! The default [`GridDescriptor`] is deterministic down to the bit: luma
//! conversion, bilinear resampling and gradients are plain `f64` arithmetic,
//! and orientation bins are chosen by sign and magnitude comparisons instead
//! of `atan2`, so no libm routine other than `sqrt` is involved.

use image::DynamicImage;
use std::path::Path;
use thiserror::Error;

pub const DESCRIPTOR_LEN: usize = 128;
pub const MIN_SIDE: u32 = 16;

const SIDE: usize = 64;
const CELL: usize = 16;
const GRID: usize = SIDE / CELL;
const BINS: usize = 8;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("cannot decode image: {0}")]
    Decode(String),
    #[error("image is {width}x{height}, at least {MIN_SIDE}x{MIN_SIDE} required")]
    TooSmall { width: u32, height: u32 },
    #[error("cannot read image {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor(pub Vec<f64>);

impl Descriptor {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn euclidean(&self, other: &Descriptor) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `1 / (1 + d)` for Euclidean distance `d`; 1 exactly when equal.
    pub fn similarity(&self, other: &Descriptor) -> f64 {
        1.0 / (1.0 + self.euclidean(other))
    }
}

/// Pluggable image descriptor. Implementations must be deterministic.
pub trait DescriptorProvider: Send + Sync {
    fn name(&self) -> &'static str;
    fn describe(&self, image: &DynamicImage) -> Result<Descriptor, ImageError>;
}

/// 4x4 grid of 8-bin magnitude-weighted orientation histograms over a 64x64
/// grayscale resampling, L2-normalized.
#[derive(Debug, Clone, Copy, Default)]
pub struct GridDescriptor;

impl DescriptorProvider for GridDescriptor {
    fn name(&self) -> &'static str {
        "grid-hog-128"
    }

    fn describe(&self, image: &DynamicImage) -> Result<Descriptor, ImageError> {
        image_descriptor(image)
    }
}

pub fn decode(bytes: &[u8]) -> Result<DynamicImage, ImageError> {
    image::load_from_memory(bytes).map_err(|e| ImageError::Decode(e.to_string()))
}

pub fn read_image(path: &Path) -> Result<DynamicImage, ImageError> {
    let bytes = std::fs::read(path).map_err(|source| ImageError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode(&bytes)
}

fn luma_plane(image: &DynamicImage) -> (usize, usize, Vec<f64>) {
    let rgb = image.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let plane = rgb
        .pixels()
        .map(|p| 0.299 * f64::from(p[0]) + 0.587 * f64::from(p[1]) + 0.114 * f64::from(p[2]))
        .collect();
    (w, h, plane)
}

// exact when both ends are equal, so flat regions stay flat
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

fn resample(w: usize, h: usize, src: &[f64]) -> Vec<f64> {
    let coords = |dst: usize, len: usize| {
        let s = ((dst as f64 + 0.5) * len as f64 / SIDE as f64 - 0.5).clamp(0.0, (len - 1) as f64);
        let i0 = s.floor() as usize;
        let i1 = (i0 + 1).min(len - 1);
        (i0, i1, s - i0 as f64)
    };
    let mut out = vec![0.0; SIDE * SIDE];
    for y in 0..SIDE {
        let (y0, y1, fy) = coords(y, h);
        for x in 0..SIDE {
            let (x0, x1, fx) = coords(x, w);
            let top = lerp(src[y0 * w + x0], src[y0 * w + x1], fx);
            let bottom = lerp(src[y1 * w + x0], src[y1 * w + x1], fx);
            out[y * SIDE + x] = lerp(top, bottom, fy);
        }
    }
    out
}

/// Orientation bin of a non-zero gradient: `floor(theta / 45deg)` with
/// `theta = atan2(gy, gx)` in `[0, 360)`, computed by comparisons only.
pub(crate) fn orientation_bin(gx: f64, gy: f64) -> usize {
    let (quadrant, u, v) = if gy >= 0.0 && gx > 0.0 {
        (0, gx, gy)
    } else if gx <= 0.0 && gy > 0.0 {
        (1, gy, -gx)
    } else if gy <= 0.0 && gx < 0.0 {
        (2, -gx, -gy)
    } else {
        (3, -gy, gx)
    };
    2 * quadrant + usize::from(v >= u)
}

pub fn image_descriptor(image: &DynamicImage) -> Result<Descriptor, ImageError> {
    let (width, height) = (image.width(), image.height());
    if width < MIN_SIDE || height < MIN_SIDE {
        return Err(ImageError::TooSmall { width, height });
    }
    let (w, h, plane) = luma_plane(image);
    let px = resample(w, h, &plane);
    let at = |x: usize, y: usize| px[y * SIDE + x];

    let mut hist = vec![0.0; DESCRIPTOR_LEN];
    for y in 0..SIDE {
        for x in 0..SIDE {
            let gx = at((x + 1).min(SIDE - 1), y) - at(x.saturating_sub(1), y);
            let gy = at(x, (y + 1).min(SIDE - 1)) - at(x, y.saturating_sub(1));
            if gx == 0.0 && gy == 0.0 {
                continue;
            }
            let magnitude = (gx * gx + gy * gy).sqrt();
            let cell = (y / CELL) * GRID + x / CELL;
            hist[cell * BINS + orientation_bin(gx, gy)] += magnitude;
        }
    }
    let norm = hist.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in &mut hist {
            *v /= norm;
        }
    }
    Ok(Descriptor(hist))
}

/// Similarity of two images under the default descriptor.
pub fn image_similarity(query: &DynamicImage, candidate: &DynamicImage) -> Result<f64, ImageError> {
    Ok(image_descriptor(query)?.similarity(&image_descriptor(candidate)?))
}
