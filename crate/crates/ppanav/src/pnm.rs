//! PGM and PBM files for 256x256 frames and binary planes.

use std::io::{BufRead, Seek, Write};
use std::path::Path;

use image::codecs::pnm::{PnmDecoder, PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageDecoder, ImageEncoder};
use ppanav_core::ppa::{BitImage, GreyImage, SIZE};

#[derive(Debug, thiserror::Error)]
pub enum PnmError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed image: {0}")]
    Decode(#[from] image::ImageError),
    #[error("expected a {SIZE}x{SIZE} image, got {0}x{1}")]
    Size(u32, u32),
    #[error("expected an 8-bit grey or bitmap image")]
    Format,
}

/// Reads a PGM (`P2`/`P5`) or PBM (`P1`/`P4`) frame. Bitmaps come out as
/// 0 for black and 255 for white.
pub fn read_grey(reader: impl BufRead + Seek) -> Result<GreyImage, PnmError> {
    let dec = PnmDecoder::new(reader)?;
    let (w, h) = dec.dimensions();
    if (w, h) != (SIZE as u32, SIZE as u32) {
        return Err(PnmError::Size(w, h));
    }
    if dec.color_type() != image::ColorType::L8 {
        return Err(PnmError::Format);
    }
    let mut buf = vec![0u8; SIZE * SIZE];
    dec.read_image(&mut buf)?;
    Ok(GreyImage::from_raw(&buf).expect("size checked"))
}

pub fn load_grey(path: &Path) -> Result<GreyImage, PnmError> {
    read_grey(std::io::BufReader::new(std::fs::File::open(path)?))
}

/// Writes a binary (`P5`) PGM.
pub fn write_pgm(img: &GreyImage, out: impl Write) -> Result<(), PnmError> {
    PnmEncoder::new(out)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(img.as_raw(), SIZE as u32, SIZE as u32, ExtendedColorType::L8)?;
    Ok(())
}

pub fn save_pgm(img: &GreyImage, path: &Path) -> Result<(), PnmError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_pgm(img, &mut f)?;
    f.flush()?;
    Ok(())
}

/// Writes a binary (`P4`) PBM. Set bits are white, which PBM stores as 0;
/// the encoder takes 1 for white.
pub fn write_pbm(img: &BitImage, out: impl Write) -> Result<(), PnmError> {
    let pixels: Vec<u8> = (0..SIZE * SIZE).map(|k| u8::from(img.get(k / SIZE, k % SIZE))).collect();
    PnmEncoder::new(out)
        .with_subtype(PnmSubtype::Bitmap(SampleEncoding::Binary))
        .write_image(&pixels, SIZE as u32, SIZE as u32, ExtendedColorType::L8)?;
    Ok(())
}

/// Reads a PBM (or any grey PNM) as a binary plane, white = set.
pub fn read_bits(reader: impl BufRead + Seek) -> Result<BitImage, PnmError> {
    let g = read_grey(reader)?;
    Ok(BitImage::from_fn(|r, c| g.get(r, c) >= 128))
}
