//! Binary PNM codec: PBM (P4) masks, PGM (P5) grayscale and PPM (P6) RGB.
//!
//! Images are written with 8 bits per sample after clamping to `[0, 255]`
//! and rounding. Tonal values may overshoot that range, so they also have a
//! 16-bit fixed-point companion encoding (see [`TONAL_OFFSET`]).

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{Image, Mask};

/// 16-bit tonal files store `(value + TONAL_OFFSET) * TONAL_SCALE`.
pub const TONAL_OFFSET: f64 = 128.0;
pub const TONAL_SCALE: f64 = 64.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Bitmap,
    Gray,
    Rgb,
}

struct Header {
    kind: Kind,
    width: usize,
    height: usize,
    maxval: usize,
}

fn parse_header(bytes: &[u8]) -> Result<(Header, usize)> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(Error::Format("missing PNM magic number".into()));
    }
    let kind = match bytes[1] {
        b'4' => Kind::Bitmap,
        b'5' => Kind::Gray,
        b'6' => Kind::Rgb,
        other => {
            return Err(Error::Format(format!(
                "unsupported PNM variant P{}",
                other as char
            )))
        }
    };
    let mut pos = 2;
    let wanted = if kind == Kind::Bitmap { 2 } else { 3 };
    let mut fields = Vec::with_capacity(3);
    while fields.len() < wanted {
        // Whitespace and comments may appear between header fields.
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("truncated PNM header".into()));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).expect("ascii digits");
        let value: usize = text
            .parse()
            .map_err(|_| Error::Format(format!("bad header number {text}")))?;
        fields.push(value);
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::Format("missing whitespace after PNM header".into()));
    }
    pos += 1;
    let maxval = if kind == Kind::Bitmap { 1 } else { fields[2] };
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Format(format!("unsupported maxval {maxval}")));
    }
    Ok((
        Header {
            kind,
            width: fields[0],
            height: fields[1],
            maxval,
        },
        pos,
    ))
}

fn decode_samples(header: &Header, raster: &[u8]) -> Result<Image> {
    let channels = if header.kind == Kind::Rgb { 3 } else { 1 };
    let n = header.width * header.height;
    let bytes_per = if header.maxval > 255 { 2 } else { 1 };
    let needed = n * channels * bytes_per;
    if raster.len() < needed {
        return Err(Error::Format(format!(
            "raster holds {} bytes, expected {needed}",
            raster.len()
        )));
    }
    let mut img = Image::new(header.width, header.height, channels);
    let data = img.data_mut();
    for i in 0..n {
        for c in 0..channels {
            let k = i * channels + c;
            let v = if bytes_per == 2 {
                u16::from_be_bytes([raster[2 * k], raster[2 * k + 1]]) as f64
            } else {
                raster[k] as f64
            };
            data[c * n + i] = v;
        }
    }
    Ok(img)
}

fn read_raw(path: &Path) -> Result<(Header, Vec<u8>, usize)> {
    let bytes = fs::read(path)?;
    let (header, offset) = parse_header(&bytes)?;
    Ok((header, bytes, offset))
}

/// Reads an 8-bit PGM or PPM image. Samples keep their integer values.
pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    let (header, bytes, offset) = read_raw(path.as_ref())?;
    if header.kind == Kind::Bitmap {
        return Err(Error::Format("expected a PGM or PPM image, found PBM".into()));
    }
    if header.maxval > 255 {
        return Err(Error::Format("16-bit images are only supported for tonal files".into()));
    }
    let mut img = decode_samples(&header, &bytes[offset..])?;
    if header.maxval != 255 {
        let scale = 255.0 / header.maxval as f64;
        img.data_mut().iter_mut().for_each(|v| *v *= scale);
    }
    Ok(img)
}

fn quantize(v: f64) -> u8 {
    v.clamp(0.0, 255.0).round() as u8
}

fn write_header(out: &mut impl Write, img: &Image, maxval: usize) -> Result<()> {
    let magic = match img.channels() {
        1 => "P5",
        3 => "P6",
        c => {
            return Err(Error::Format(format!(
                "PNM supports 1 or 3 channels, image has {c}"
            )))
        }
    };
    write!(out, "{magic}\n{} {}\n{maxval}\n", img.width(), img.height())?;
    Ok(())
}

/// Writes PGM (1 channel) or PPM (3 channels), clamping to `[0, 255]` and rounding.
pub fn write_image(path: impl AsRef<Path>, img: &Image) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    write_header(&mut out, img, 255)?;
    let n = img.pixel_count();
    let channels = img.channels();
    let mut raster = Vec::with_capacity(n * channels);
    for i in 0..n {
        for c in 0..channels {
            raster.push(quantize(img.plane(c)[i]));
        }
    }
    out.write_all(&raster)?;
    out.flush()?;
    Ok(())
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<Mask> {
    let (header, bytes, offset) = read_raw(path.as_ref())?;
    if header.kind != Kind::Bitmap {
        return Err(Error::Format("expected a PBM mask".into()));
    }
    let (w, h) = (header.width, header.height);
    let stride = w.div_ceil(8);
    let raster = &bytes[offset..];
    if raster.len() < stride * h {
        return Err(Error::Format("truncated PBM raster".into()));
    }
    let mut bits = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let byte = raster[y * stride + x / 8];
            // PBM: 1 = black = stored pixel.
            bits[y * w + x] = byte & (0x80 >> (x % 8)) != 0;
        }
    }
    Mask::from_bits(w, h, bits)
}

pub fn write_mask(path: impl AsRef<Path>, mask: &Mask) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    let (w, h) = (mask.width(), mask.height());
    write!(out, "P4\n{w} {h}\n")?;
    let stride = w.div_ceil(8);
    let mut raster = vec![0u8; stride * h];
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) {
                raster[y * stride + x / 8] |= 0x80 >> (x % 8);
            }
        }
    }
    out.write_all(&raster)?;
    out.flush()?;
    Ok(())
}

/// Tonal sidecar: stored values at mask pixels, 0 elsewhere, 8-bit.
pub fn write_tonal(path: impl AsRef<Path>, values: &Image, mask: &Mask) -> Result<()> {
    values.check_mask(mask)?;
    write_image(path, &values.masked(mask))
}

/// 16-bit companion of [`write_tonal`] that keeps over- and undershoots.
pub fn write_tonal16(path: impl AsRef<Path>, values: &Image, mask: &Mask) -> Result<()> {
    values.check_mask(mask)?;
    let img = values.masked(mask);
    let mut out = BufWriter::new(fs::File::create(path)?);
    write_header(&mut out, &img, 65535)?;
    let n = img.pixel_count();
    let mut raster = Vec::with_capacity(2 * n * img.channels());
    for i in 0..n {
        for c in 0..img.channels() {
            let code = ((img.plane(c)[i] + TONAL_OFFSET) * TONAL_SCALE)
                .round()
                .clamp(0.0, 65535.0) as u16;
            raster.extend_from_slice(&code.to_be_bytes());
        }
    }
    out.write_all(&raster)?;
    out.flush()?;
    Ok(())
}

/// Reads a tonal sidecar. 16-bit files are decoded with the fixed-point
/// mapping; 8-bit files are read as plain values.
pub fn read_tonal(path: impl AsRef<Path>) -> Result<Image> {
    let (header, bytes, offset) = read_raw(path.as_ref())?;
    if header.kind == Kind::Bitmap {
        return Err(Error::Format("expected a tonal PGM/PPM file, found PBM".into()));
    }
    let mut img = decode_samples(&header, &bytes[offset..])?;
    if header.maxval > 255 {
        img.data_mut()
            .iter_mut()
            .for_each(|v| *v = *v / TONAL_SCALE - TONAL_OFFSET);
    } else if header.maxval != 255 {
        let scale = 255.0 / header.maxval as f64;
        img.data_mut().iter_mut().for_each(|v| *v *= scale);
    }
    Ok(img)
}
