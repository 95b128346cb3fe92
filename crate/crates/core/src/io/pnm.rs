use std::io::{BufWriter, Write};
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder};

use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PnmEncoding {
    /// P2 / P3
    Ascii,
    /// P5 / P6
    Binary,
}

fn codec_err(e: image::ImageError) -> Error {
    match e {
        image::ImageError::IoError(e) => Error::Io(e),
        other => Error::Parse(other.to_string()),
    }
}

/// Reads a PGM (one channel) or PPM (three channels), scaled to [0, 1].
///
/// Files with a maxval other than 255 or 65535 are requantized to 8 bits by the decoder.
pub fn read_pnm(path: impl AsRef<Path>) -> Result<Image> {
    let reader = image::ImageReader::open(path.as_ref())?
        .with_guessed_format()
        .map_err(Error::Io)?;
    let dynimg = reader.decode().map_err(codec_err)?;
    let (w, h) = (dynimg.width() as usize, dynimg.height() as usize);
    let n = w * h;
    let gray = matches!(
        dynimg,
        DynamicImage::ImageLuma8(_) | DynamicImage::ImageLuma16(_) | DynamicImage::ImageLumaA8(_) | DynamicImage::ImageLumaA16(_)
    );
    if gray {
        let buf = dynimg.into_luma16();
        let data = buf.pixels().map(|p| p.0[0] as f64 / 65535.0).collect();
        Image::new(w, h, 1, data)
    } else {
        let buf = dynimg.into_rgb16();
        let mut data = vec![0.0; 3 * n];
        for (i, p) in buf.pixels().enumerate() {
            for c in 0..3 {
                data[c * n + i] = p.0[c] as f64 / 65535.0;
            }
        }
        Image::new(w, h, 3, data)
    }
}

/// Writes an 8-bit PGM (one channel) or PPM (three channels); values are clamped to [0, 1].
pub fn write_pnm(path: impl AsRef<Path>, img: &Image, encoding: PnmEncoding) -> Result<()> {
    let (w, h) = (img.width(), img.height());
    let n = w * h;
    let q = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
    let (bytes, color, subtype) = match img.channels() {
        1 => {
            let b: Vec<u8> = img.data().iter().map(|&v| q(v)).collect();
            let enc = match encoding {
                PnmEncoding::Ascii => SampleEncoding::Ascii,
                PnmEncoding::Binary => SampleEncoding::Binary,
            };
            (b, ExtendedColorType::L8, PnmSubtype::Graymap(enc))
        }
        3 => {
            let mut b = Vec::with_capacity(3 * n);
            for i in 0..n {
                for c in 0..3 {
                    b.push(q(img.plane(c)[i]));
                }
            }
            let enc = match encoding {
                PnmEncoding::Ascii => SampleEncoding::Ascii,
                PnmEncoding::Binary => SampleEncoding::Binary,
            };
            (b, ExtendedColorType::Rgb8, PnmSubtype::Pixmap(enc))
        }
        c => return Err(Error::Dimension(format!("cannot write {c}-channel image as PNM"))),
    };
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    PnmEncoder::new(&mut out)
        .with_subtype(subtype)
        .write_image(&bytes, w as u32, h as u32, color)
        .map_err(codec_err)?;
    out.flush()?;
    Ok(())
}
