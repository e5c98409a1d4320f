//! Frame sequence storage.
//!
//! Two layouts are supported:
//!
//! * A directory of binary PGM (`P5`, maxval 255) files named by a
//!   zero-padded six digit index (`000000.pgm`, `000001.pgm`, ...).
//!   Timestamps are `index / fps`.
//! * A single raw stream: a 20-byte little-endian header
//!   `b"GSEQ"`, `u32 width`, `u32 height`, `u32 frame_count`, `f32 fps`,
//!   followed by `frame_count * width * height` row-major luminance bytes.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{FlowError, GrayFrame};

pub const STREAM_MAGIC: &[u8; 4] = b"GSEQ";
pub const STREAM_HEADER_LEN: usize = 20;

#[derive(Debug, Error)]
pub enum FrameIoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: malformed PGM: {reason}")]
    Pgm { path: PathBuf, reason: String },
    #[error("malformed frame stream: {0}")]
    Stream(String),
    #[error(transparent)]
    Frame(#[from] FlowError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> FrameIoError + '_ {
    move |source| FrameIoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Encodes a frame as binary PGM.
pub fn encode_pgm(frame: &GrayFrame) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", frame.width(), frame.height()).into_bytes();
    out.extend_from_slice(frame.pixels());
    out
}

/// Decodes a binary PGM (`P5`) image. Header comments are skipped and
/// maxval below 255 is rescaled to the full byte range.
pub fn decode_pgm(bytes: &[u8], timestamp: f64) -> Result<GrayFrame, String> {
    let mut pos = 0usize;
    let mut tokens = Vec::with_capacity(4);
    while tokens.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
            pos += 1;
        }
        if start == pos {
            return Err("truncated header".into());
        }
        tokens.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| "non-ASCII header")?);
    }
    if tokens[0] != "P5" {
        return Err(format!("unsupported magic `{}` (only P5)", tokens[0]));
    }
    let parse = |s: &str, what: &str| s.parse::<usize>().map_err(|_| format!("bad {what} `{s}`"));
    let width = parse(tokens[1], "width")?;
    let height = parse(tokens[2], "height")?;
    let maxval = parse(tokens[3], "maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(format!("unsupported maxval {maxval}"));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let len = width * height;
    let raster = bytes
        .get(pos..pos + len)
        .ok_or_else(|| format!("raster truncated: need {len} bytes"))?;
    let pixels = if maxval == 255 {
        raster.to_vec()
    } else {
        raster
            .iter()
            .map(|&v| {
                ((v.min(maxval as u8) as u32 * 255 + maxval as u32 / 2) / maxval as u32) as u8
            })
            .collect()
    };
    GrayFrame::new(width, height, pixels, timestamp).map_err(|e| e.to_string())
}

pub fn frame_file_name(index: usize) -> String {
    format!("{index:06}.pgm")
}

pub fn write_pgm_dir(dir: &Path, frames: &[GrayFrame]) -> Result<(), FrameIoError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for (i, frame) in frames.iter().enumerate() {
        let path = dir.join(frame_file_name(i));
        fs::write(&path, encode_pgm(frame)).map_err(io_err(&path))?;
    }
    Ok(())
}

/// Reads every `*.pgm` in `dir`, ordered by file name.
pub fn read_pgm_dir(dir: &Path, fps: f64) -> Result<Vec<GrayFrame>, FrameIoError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")))
        .collect();
    paths.sort();
    paths
        .iter()
        .enumerate()
        .map(|(i, path)| {
            let bytes = fs::read(path).map_err(io_err(path))?;
            decode_pgm(&bytes, i as f64 / fps).map_err(|reason| FrameIoError::Pgm {
                path: path.clone(),
                reason,
            })
        })
        .collect()
}

/// Writes a raw frame stream. All frames must share one size.
pub fn write_stream<W: Write>(
    mut w: W,
    frames: &[GrayFrame],
    fps: f32,
) -> Result<(), FrameIoError> {
    let (width, height) = frames.first().map_or((0, 0), |f| (f.width(), f.height()));
    if let Some(bad) = frames
        .iter()
        .find(|f| f.width() != width || f.height() != height)
    {
        return Err(FlowError::DimensionMismatch(width, height, bad.width(), bad.height()).into());
    }
    let stream_err = |e: io::Error| FrameIoError::Stream(e.to_string());
    w.write_all(STREAM_MAGIC).map_err(stream_err)?;
    for v in [width as u32, height as u32, frames.len() as u32] {
        w.write_all(&v.to_le_bytes()).map_err(stream_err)?;
    }
    w.write_all(&fps.to_le_bytes()).map_err(stream_err)?;
    for f in frames {
        w.write_all(f.pixels()).map_err(stream_err)?;
    }
    w.flush().map_err(stream_err)
}

/// Reads a raw frame stream, returning the frames and the header fps.
pub fn read_stream<R: Read>(mut r: R) -> Result<(Vec<GrayFrame>, f32), FrameIoError> {
    let mut header = [0u8; STREAM_HEADER_LEN];
    r.read_exact(&mut header)
        .map_err(|e| FrameIoError::Stream(format!("header: {e}")))?;
    if &header[..4] != STREAM_MAGIC {
        return Err(FrameIoError::Stream("bad magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap()) as usize;
    let (width, height, count) = (word(4), word(8), word(12));
    let fps = f32::from_le_bytes(header[16..20].try_into().unwrap());
    if !(fps > 0.0) || !fps.is_finite() {
        return Err(FrameIoError::Stream(format!("invalid fps {fps}")));
    }
    let mut frames = Vec::with_capacity(count);
    for i in 0..count {
        let mut pixels = vec![0u8; width * height];
        r.read_exact(&mut pixels)
            .map_err(|e| FrameIoError::Stream(format!("frame {i}: {e}")))?;
        frames.push(GrayFrame::new(
            width,
            height,
            pixels,
            i as f64 / fps as f64,
        )?);
    }
    Ok((frames, fps))
}

/// Loads a frame sequence from either a PGM directory or a raw stream file.
/// `fps` is used for directories; streams carry their own.
pub fn read_frames(path: &Path, fps: f64) -> Result<Vec<GrayFrame>, FrameIoError> {
    if path.is_dir() {
        read_pgm_dir(path, fps)
    } else {
        let file = fs::File::open(path).map_err(io_err(path))?;
        read_stream(io::BufReader::new(file)).map(|(frames, _)| frames)
    }
}
