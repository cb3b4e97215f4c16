//! Grayscale raster import/export (PGM P2/P5 and PNG).
//!
//! Belief maps are written as `round(prob_free * 255)`, so a free cell is 255,
//! a wall is 0 and an unknown cell (0.5) lands on 128. On import any intensity
//! within one step of 127.5 reads back as unknown.

use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat};
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};

use super::{BeliefMap, Floorplan};
use crate::error::{Error, Result};

/// Floorplan import: darker than this is wall.
pub const WALL_BELOW: u8 = 100;
/// Floorplan import: brighter than this is free.
pub const FREE_ABOVE: u8 = 155;

pub fn intensity_from_prob(p: f64) -> u8 {
    (p.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn prob_from_intensity(v: u8) -> f64 {
    if (f64::from(v) - 127.5).abs() < 1.0 {
        super::UNKNOWN
    } else {
        f64::from(v) / 255.0
    }
}

fn format_for(path: &Path) -> Result<ImageFormat> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("pgm") | Some("pnm") => Ok(ImageFormat::Pnm),
        Some("png") => Ok(ImageFormat::Png),
        _ => Err(Error::Format {
            path: path.to_owned(),
            reason: "expected a .pgm or .png extension".into(),
        }),
    }
}

/// Writes an 8-bit single-channel raster; format follows the extension.
pub fn write_gray(path: &Path, width: usize, height: usize, pixels: Vec<u8>) -> Result<()> {
    let format = format_for(path)?;
    let img = GrayImage::from_raw(width as u32, height as u32, pixels).ok_or_else(|| {
        Error::DimensionMismatch(format!("pixel buffer does not fit {width}x{height}"))
    })?;
    if format == ImageFormat::Pnm {
        // Plain binary graymap (P5) rather than the encoder's default PAM.
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        let enc = PnmEncoder::new(file)
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary));
        img.write_with_encoder(enc)?;
    } else {
        img.save_with_format(path, format)?;
    }
    Ok(())
}

/// Reads a grayscale raster as `(width, height, pixels)`.
///
/// Color images are rejected rather than silently converted.
pub fn read_gray(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    let img = image::open(path).map_err(|e| Error::Format {
        path: path.to_owned(),
        reason: e.to_string(),
    })?;
    let gray = match img {
        DynamicImage::ImageLuma8(g) => g,
        DynamicImage::ImageLuma16(_) => img.to_luma8(),
        other => {
            return Err(Error::Format {
                path: path.to_owned(),
                reason: format!("expected a grayscale image, found {:?}", other.color()),
            })
        }
    };
    let (w, h) = gray.dimensions();
    if w == 0 || h == 0 {
        return Err(Error::Format {
            path: path.to_owned(),
            reason: "image has zero area".into(),
        });
    }
    Ok((w as usize, h as usize, gray.into_raw()))
}

pub fn export_grayscale(map: &BeliefMap, path: &Path) -> Result<()> {
    let pixels = map
        .probabilities()
        .iter()
        .map(|&p| intensity_from_prob(p))
        .collect();
    write_gray(path, map.width(), map.height(), pixels)
}

pub fn import_grayscale(path: &Path) -> Result<BeliefMap> {
    let (w, h, px) = read_gray(path)?;
    let probs = px.into_iter().map(prob_from_intensity).collect();
    BeliefMap::from_probabilities(w, h, probs)
}

/// Writes a wall mask: walls black, everything else white.
pub fn export_walls(walls: &[bool], width: usize, height: usize, path: &Path) -> Result<()> {
    let pixels = walls.iter().map(|&w| if w { 0 } else { 255 }).collect();
    write_gray(path, width, height, pixels)
}

/// Loads a ground-truth floorplan raster without routers.
///
/// Pixels in the ambiguous band between the two thresholds are treated as
/// walls: ground truth is binary and an ambiguous pixel is not traversable.
pub fn read_floorplan(path: &Path, resolution: f64) -> Result<Floorplan> {
    let (w, h, px) = read_gray(path)?;
    let walls: Vec<bool> = px.iter().map(|&v| v <= FREE_ABOVE).collect();
    if walls.iter().all(|&w| w) {
        return Err(Error::Format {
            path: path.to_owned(),
            reason: "floorplan has no free cell".into(),
        });
    }
    Floorplan::new(w, h, resolution, walls, Vec::new())
}

/// Floorplan as a black/white raster.
pub fn export_floorplan(plan: &Floorplan, path: &Path) -> Result<()> {
    export_walls(plan.walls(), plan.width(), plan.height(), path)
}

/// Three-level encoding used by the evaluation metrics: 0 wall, 127 unknown, 255 free.
pub fn ternary_intensity(p: f64) -> u8 {
    if p > super::UNKNOWN {
        255
    } else if p < super::UNKNOWN {
        0
    } else {
        127
    }
}
