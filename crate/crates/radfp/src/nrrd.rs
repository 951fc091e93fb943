//! Minimal NRRD reading and writing for 3D scalar volumes.
//!
//! NRRD lists axes fastest first, so `sizes: W H D` maps onto the depth-major
//! [`Volume`] layout. Raw encoding only; attached or detached payloads.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use radfp_core::Volume;

use crate::error::{Error, IoContext, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(s: &str) -> Option<Scalar> {
        Some(match s {
            "signed char" | "int8" | "int8_t" => Scalar::I8,
            "uchar" | "unsigned char" | "uint8" | "uint8_t" => Scalar::U8,
            "short" | "short int" | "signed short" | "signed short int" | "int16" | "int16_t" => Scalar::I16,
            "ushort" | "unsigned short" | "unsigned short int" | "uint16" | "uint16_t" => Scalar::U16,
            "int" | "signed int" | "int32" | "int32_t" => Scalar::I32,
            "uint" | "unsigned int" | "uint32" | "uint32_t" => Scalar::U32,
            "float" => Scalar::F32,
            "double" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn decode(self, b: &[u8], little: bool) -> f64 {
        macro_rules! num {
            ($t:ty, $n:literal) => {{
                let a: [u8; $n] = b.try_into().expect("chunk size matches scalar size");
                (if little { <$t>::from_le_bytes(a) } else { <$t>::from_be_bytes(a) }) as f64
            }};
        }
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => num!(i16, 2),
            Scalar::U16 => num!(u16, 2),
            Scalar::I32 => num!(i32, 4),
            Scalar::U32 => num!(u32, 4),
            Scalar::F32 => num!(f32, 4),
            Scalar::F64 => num!(f64, 8),
        }
    }
}

#[derive(Debug, Default)]
struct Header {
    scalar: Option<Scalar>,
    dimension: Option<usize>,
    sizes: Option<[usize; 3]>,
    spacings: Option<[f64; 3]>,
    raw: bool,
    encoding_seen: bool,
    little: Option<bool>,
    data_file: Option<String>,
    byte_skip: usize,
    /// Offset of the attached payload.
    payload_start: Option<usize>,
}

fn parse_header(path: &Path, bytes: &[u8]) -> Result<Header> {
    if !bytes.starts_with(b"NRRD000") || bytes.len() < 8 || !(b'1'..=b'5').contains(&bytes[7]) {
        return Err(Error::parse(path, "magic", "not an NRRD file (expected NRRD0004)"));
    }
    let mut h = Header::default();
    let mut pos = 0;
    let mut first = true;
    while pos < bytes.len() {
        let end = bytes[pos..].iter().position(|&b| b == b'\n').map_or(bytes.len(), |e| pos + e);
        let line = std::str::from_utf8(&bytes[pos..end])
            .map_err(|_| Error::parse(path, "header", "header is not valid text"))?
            .trim_end_matches('\r');
        pos = end + 1;
        if first {
            first = false;
            continue;
        }
        if line.is_empty() {
            h.payload_start = Some(pos.min(bytes.len()));
            break;
        }
        if line.starts_with('#') || line.contains(":=") {
            continue;
        }
        let (key, value) = line
            .split_once(": ")
            .ok_or_else(|| Error::parse(path, line, "expected `field: value`"))?;
        let value = value.trim();
        let bad = |m: &str| Error::parse(path, key, format!("{m} (got {value:?})"));
        match key {
            "type" => h.scalar = Some(Scalar::parse(value).ok_or_else(|| bad("unsupported scalar type"))?),
            "dimension" => {
                let d: usize = value.parse().map_err(|_| bad("not an integer"))?;
                if d != 3 {
                    return Err(bad("only 3D volumes are supported"));
                }
                h.dimension = Some(d);
            }
            "sizes" => {
                let v: Vec<usize> = value
                    .split_whitespace()
                    .map(|s| s.parse().ok().filter(|&n: &usize| n > 0))
                    .collect::<Option<_>>()
                    .ok_or_else(|| bad("sizes must be positive integers"))?;
                let [w, hh, d] = <[usize; 3]>::try_from(v).map_err(|_| bad("expected three sizes"))?;
                h.sizes = Some([d, hh, w]);
            }
            "spacings" => {
                let v: Vec<f64> = value
                    .split_whitespace()
                    .map(|s| s.parse().ok().filter(|x: &f64| *x > 0.0 && x.is_finite()))
                    .collect::<Option<_>>()
                    .ok_or_else(|| bad("spacings must be positive numbers"))?;
                let [w, hh, d] = <[f64; 3]>::try_from(v).map_err(|_| bad("expected three spacings"))?;
                h.spacings = Some([d, hh, w]);
            }
            "encoding" => {
                h.encoding_seen = true;
                h.raw = value == "raw";
                if !h.raw {
                    return Err(bad("only raw encoding is supported"));
                }
            }
            "endian" => {
                h.little = Some(match value {
                    "little" => true,
                    "big" => false,
                    _ => return Err(bad("expected little or big")),
                })
            }
            "data file" | "datafile" => {
                if value.starts_with("LIST") || value.contains('%') {
                    return Err(bad("multi-file payloads are not supported"));
                }
                h.data_file = Some(value.to_string());
            }
            "byte skip" | "byteskip" => {
                h.byte_skip = value.parse().map_err(|_| bad("expected a non-negative integer"))?;
            }
            "line skip" | "lineskip" => {
                if value != "0" {
                    return Err(bad("line skip is not supported"));
                }
            }
            _ => {}
        }
    }
    Ok(h)
}

/// Loads a 3D NRRD volume (attached or detached header).
pub fn load_volume(path: &Path) -> Result<Volume> {
    let bytes = fs::read(path).at(path)?;
    let h = parse_header(path, &bytes)?;
    let scalar = h.scalar.ok_or_else(|| Error::parse(path, "type", "missing"))?;
    h.dimension.ok_or_else(|| Error::parse(path, "dimension", "missing"))?;
    let dims = h.sizes.ok_or_else(|| Error::parse(path, "sizes", "missing"))?;
    if !h.encoding_seen {
        return Err(Error::parse(path, "encoding", "missing"));
    }
    let little = match h.little {
        Some(l) => l,
        None if scalar.size() == 1 => true,
        None => return Err(Error::parse(path, "endian", "missing for a multi-byte type")),
    };

    let (payload_path, data): (PathBuf, Vec<u8>) = match &h.data_file {
        Some(name) => {
            let p = path.parent().unwrap_or(Path::new(".")).join(name);
            let d = fs::read(&p).at(&p)?;
            (p, d)
        }
        None => {
            let start = h.payload_start.ok_or_else(|| Error::parse(path, "header", "no blank line before the payload"))?;
            (path.to_path_buf(), bytes[start..].to_vec())
        }
    };
    let data = data.get(h.byte_skip..).unwrap_or(&[]);
    let count = dims.iter().product::<usize>();
    let expected = count * scalar.size();
    if data.len() != expected {
        return Err(Error::PayloadSize { path: payload_path, expected, actual: data.len() });
    }
    let voxels = data.chunks_exact(scalar.size()).map(|c| scalar.decode(c, little)).collect();
    Ok(Volume::new(dims, voxels, h.spacings.unwrap_or([1.0; 3]))?)
}

fn header_text(v: &Volume, data_file: Option<&str>) -> String {
    let [d, h, w] = v.dims();
    let [sd, sh, sw] = v.spacing();
    let mut s = format!(
        "NRRD0004\ntype: double\ndimension: 3\nsizes: {w} {h} {d}\nspacings: {sw} {sh} {sd}\nencoding: raw\nendian: little\n"
    );
    if let Some(f) = data_file {
        s.push_str(&format!("data file: {f}\n"));
    }
    s
}

fn payload(v: &Volume) -> Vec<u8> {
    v.voxels().iter().flat_map(|x| x.to_le_bytes()).collect()
}

/// Writes `v` as an attached-header NRRD of doubles.
pub fn save_volume(v: &Volume, path: &Path) -> Result<()> {
    let mut out = header_text(v, None).into_bytes();
    out.push(b'\n');
    out.extend(payload(v));
    fs::write(path, out).at(path)
}

/// Writes a `.nhdr` header and a separate raw payload file next to it.
pub fn save_volume_detached(v: &Volume, header: &Path, data: &Path) -> Result<()> {
    let rel = match (header.parent(), data.parent()) {
        (Some(a), Some(b)) if a == b => data.file_name().map(|n| n.to_string_lossy().into_owned()),
        _ => None,
    }
    .unwrap_or_else(|| data.to_string_lossy().into_owned());
    let mut f = fs::File::create(header).at(header)?;
    f.write_all(header_text(v, Some(&rel)).as_bytes()).at(header)?;
    fs::write(data, payload(v)).at(data)
}
