//! Reading BMP/PNG and writing PNG.

use std::path::{Path, PathBuf};

use plateloc::RgbImage;

use crate::CliError;

const EXTENSIONS: [&str; 2] = ["bmp", "png"];

pub fn read_image(path: &Path) -> Result<RgbImage, CliError> {
    let img = image::open(path)
        .map_err(|source| CliError::Image {
            path: path.to_path_buf(),
            source,
        })?
        .into_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    RgbImage::from_rgb8(w, h, img.as_raw()).map_err(|e| CliError::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn write_png(path: &Path, width: usize, height: usize, rgb8: Vec<u8>) -> Result<(), CliError> {
    let buf = image::RgbImage::from_raw(width as u32, height as u32, rgb8).expect("buffer sized to the image");
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| CliError::Image {
            path: path.to_path_buf(),
            source,
        })
}

pub fn write_image(path: &Path, img: &RgbImage) -> Result<(), CliError> {
    write_png(path, img.width(), img.height(), img.to_rgb8())
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// Expands directories to their BMP/PNG files (sorted by name). Plain file
/// arguments are kept as given, whatever their extension.
pub fn collect_inputs(args: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for arg in args {
        if arg.is_dir() {
            let rd = std::fs::read_dir(arg).map_err(|source| CliError::Io {
                path: arg.clone(),
                source,
            })?;
            let mut files = Vec::new();
            for entry in rd {
                let entry = entry.map_err(|source| CliError::Io {
                    path: arg.clone(),
                    source,
                })?;
                let p = entry.path();
                if p.is_file() && is_image(&p) {
                    files.push(p);
                }
            }
            files.sort();
            out.extend(files);
        } else {
            out.push(arg.clone());
        }
    }
    if out.is_empty() {
        return Err(CliError::NoInputs);
    }
    Ok(out)
}

/// The file stem, used as the image id in records and ground truth.
pub fn image_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string_lossy().into_owned())
}
