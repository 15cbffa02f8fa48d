//! On-disk container for complex arrays and the dataset directory layout.
//!
//! Array container (all little-endian):
//!   magic   8 bytes, ASCII "STRIDEv1"
//!   ndim    u32
//!   dims    ndim x u64
//!   dtype   u8: 0 = interleaved f32 complex, 1 = interleaved f64 complex
//!   payload row-major interleaved (re, im) pairs
//!
//! A dataset directory holds `manifest.json` plus one `rep{r:03}_ch{c:02}.sca`
//! file per (repeat, channel), imaging channels first. Optionally it also
//! carries a noise-only scan and per-repeat combined magnitude images.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::array::{AcquisitionMeta, ComplexArray2D, Domain, MultiCoilAcquisition};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"STRIDEv1";

const DTYPE_C64: u8 = 0;
const DTYPE_C128: u8 = 1;

/// Saves `arr` with the full-precision payload (dtype 1). Round trips
/// bit-exactly.
pub fn save_array(path: impl AsRef<Path>, arr: &ComplexArray2D) -> Result<()> {
    write_array(path.as_ref(), arr, DTYPE_C128)
}

/// Saves `arr` with a compact 32-bit float payload (dtype 0).
pub fn save_array_f32(path: impl AsRef<Path>, arr: &ComplexArray2D) -> Result<()> {
    write_array(path.as_ref(), arr, DTYPE_C64)
}

fn write_array(path: &Path, arr: &ComplexArray2D, dtype: u8) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&2u32.to_le_bytes())?;
    w.write_all(&(arr.rows() as u64).to_le_bytes())?;
    w.write_all(&(arr.cols() as u64).to_le_bytes())?;
    w.write_all(&[dtype])?;
    match dtype {
        DTYPE_C128 => {
            for v in arr.as_slice() {
                w.write_all(&v.re.to_le_bytes())?;
                w.write_all(&v.im.to_le_bytes())?;
            }
        }
        DTYPE_C64 => {
            for v in arr.as_slice() {
                w.write_all(&(v.re as f32).to_le_bytes())?;
                w.write_all(&(v.im as f32).to_le_bytes())?;
            }
        }
        _ => unreachable!(),
    }
    w.flush()?;
    Ok(())
}

/// Loads an array saved by [`save_array`] / [`save_array_f32`], validating
/// the header.
pub fn load_array(path: impl AsRef<Path>) -> Result<ComplexArray2D> {
    let mut r = BufReader::new(File::open(path.as_ref())?);

    let mut magic = [0u8; 8];
    read_exact_or_truncated(&mut r, &mut magic)?;
    if &magic != MAGIC {
        return Err(Error::BadMagic);
    }

    let mut ndim_buf = [0u8; 4];
    read_exact_or_truncated(&mut r, &mut ndim_buf)?;
    let ndim = u32::from_le_bytes(ndim_buf);
    if ndim != 2 {
        return Err(Error::UnsupportedLayout(format!("ndim {ndim}, expected 2")));
    }

    let mut dims = [0u64; 2];
    for d in &mut dims {
        let mut buf = [0u8; 8];
        read_exact_or_truncated(&mut r, &mut buf)?;
        *d = u64::from_le_bytes(buf);
    }
    let rows = usize::try_from(dims[0])
        .map_err(|_| Error::DimOverflow(format!("rows {}", dims[0])))?;
    let cols = usize::try_from(dims[1])
        .map_err(|_| Error::DimOverflow(format!("cols {}", dims[1])))?;
    let count = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::DimOverflow(format!("{rows}x{cols}")))?;
    // payload byte count must be addressable too
    count
        .checked_mul(16)
        .ok_or_else(|| Error::DimOverflow(format!("{rows}x{cols} payload")))?;

    let mut dtype = [0u8; 1];
    read_exact_or_truncated(&mut r, &mut dtype)?;

    let mut data = Vec::with_capacity(count);
    match dtype[0] {
        DTYPE_C128 => {
            let mut buf = [0u8; 16];
            for _ in 0..count {
                read_exact_or_truncated(&mut r, &mut buf)?;
                let re = f64::from_le_bytes(buf[0..8].try_into().unwrap());
                let im = f64::from_le_bytes(buf[8..16].try_into().unwrap());
                data.push(Complex64::new(re, im));
            }
        }
        DTYPE_C64 => {
            let mut buf = [0u8; 8];
            for _ in 0..count {
                read_exact_or_truncated(&mut r, &mut buf)?;
                let re = f32::from_le_bytes(buf[0..4].try_into().unwrap());
                let im = f32::from_le_bytes(buf[4..8].try_into().unwrap());
                data.push(Complex64::new(re as f64, im as f64));
            }
        }
        other => {
            return Err(Error::UnsupportedLayout(format!("dtype code {other}")));
        }
    }
    ComplexArray2D::from_vec(rows, cols, data)
}

fn read_exact_or_truncated(r: &mut impl Read, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::Truncated
        } else {
            Error::Io(e)
        }
    })
}

/// `manifest.json` contents for a dataset directory.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub repeats: usize,
    pub imaging_channels: usize,
    pub sensor_channels: usize,
    pub kx: usize,
    pub ky: usize,
    pub domain: Domain,
    #[serde(flatten)]
    pub meta: AcquisitionMeta,
}

pub fn channel_file_name(repeat: usize, channel: usize) -> String {
    format!("rep{repeat:03}_ch{channel:02}.sca")
}

pub fn combined_file_name(repeat: usize) -> String {
    format!("combined_rep{repeat:03}.sca")
}

/// Writes `manifest.json` plus one array file per (repeat, channel).
pub fn save_dataset(dir: impl AsRef<Path>, acq: &MultiCoilAcquisition) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let manifest = DatasetManifest {
        repeats: acq.repeats(),
        imaging_channels: acq.imaging_channels(),
        sensor_channels: acq.sensor_channels(),
        kx: acq.kx(),
        ky: acq.ky(),
        domain: acq.domain(),
        meta: acq.meta.clone(),
    };
    let json = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(dir.join("manifest.json"), json)?;
    for r in 0..acq.repeats() {
        for c in 0..acq.total_channels() {
            save_array(dir.join(channel_file_name(r, c)), acq.channel(r, c))?;
        }
    }
    Ok(())
}

pub fn load_manifest(dir: impl AsRef<Path>) -> Result<DatasetManifest> {
    let text = std::fs::read_to_string(dir.as_ref().join("manifest.json"))?;
    Ok(serde_json::from_str(&text)?)
}

/// Loads a dataset directory, validating every channel file against the
/// manifest.
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<MultiCoilAcquisition> {
    let dir = dir.as_ref();
    let manifest = load_manifest(dir)?;
    let mut acq = MultiCoilAcquisition::new(
        manifest.repeats,
        manifest.imaging_channels,
        manifest.sensor_channels,
        manifest.kx,
        manifest.ky,
        manifest.domain,
    )
    .map_err(|e| Error::ManifestMismatch(format!("invalid manifest counts: {e}")))?;
    acq.meta = manifest.meta;
    for r in 0..manifest.repeats {
        for c in 0..manifest.imaging_channels + manifest.sensor_channels {
            let path = dir.join(channel_file_name(r, c));
            if !path.exists() {
                return Err(Error::ManifestMismatch(format!(
                    "manifest promises {} but it is missing",
                    channel_file_name(r, c)
                )));
            }
            let arr = load_array(&path)?;
            if arr.shape() != (manifest.kx, manifest.ky) {
                return Err(Error::ManifestMismatch(format!(
                    "{} is {}x{}, manifest says {}x{}",
                    channel_file_name(r, c),
                    arr.rows(),
                    arr.cols(),
                    manifest.kx,
                    manifest.ky
                )));
            }
            acq.set_channel(r, c, arr)?;
        }
    }
    Ok(acq)
}

/// Saves per-repeat combined magnitude images next to a dataset.
pub fn save_combined_stack(dir: impl AsRef<Path>, stack: &[ComplexArray2D]) -> Result<()> {
    for (r, img) in stack.iter().enumerate() {
        save_array(dir.as_ref().join(combined_file_name(r)), img)?;
    }
    Ok(())
}

pub fn load_combined_stack(dir: impl AsRef<Path>) -> Result<Vec<ComplexArray2D>> {
    let manifest = load_manifest(&dir)?;
    if !manifest.meta.combined {
        return Err(Error::ManifestMismatch(
            "dataset has no combined image stack".into(),
        ));
    }
    (0..manifest.repeats)
        .map(|r| load_array(dir.as_ref().join(combined_file_name(r))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_array(rows: usize, cols: usize, seed: u64) -> ComplexArray2D {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexArray2D::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        })
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.sca");
        let arr = random_array(256, 256, 3);
        save_array(&path, &arr).unwrap();
        let back = load_array(&path).unwrap();
        assert_eq!(arr.shape(), back.shape());
        for (a, b) in arr.as_slice().iter().zip(back.as_slice()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn f32_round_trip_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.sca");
        let arr = random_array(32, 32, 4);
        save_array_f32(&path, &arr).unwrap();
        let back = load_array(&path).unwrap();
        for (a, b) in arr.as_slice().iter().zip(back.as_slice()) {
            assert_eq!(a.re as f32, b.re as f32);
            assert!((a.re - b.re).abs() <= f32::EPSILON as f64 * a.re.abs().max(1.0));
        }
    }

    #[test]
    fn bad_magic_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bogus.sca");
        let mut bytes = b"BOGUS123".to_vec();
        bytes.extend_from_slice(&2u32.to_le_bytes());
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(load_array(&path), Err(Error::BadMagic)));
    }

    #[test]
    fn truncation_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.sca");
        save_array(&path, &random_array(16, 16, 5)).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(load_array(&path), Err(Error::Truncated)));
    }

    #[test]
    fn unknown_dtype_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.sca");
        save_array(&path, &random_array(2, 2, 6)).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[8 + 4 + 16] = 77; // dtype byte
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(load_array(&path), Err(Error::UnsupportedLayout(_))));
    }

    #[test]
    fn dim_overflow_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.sca");
        let mut bytes = MAGIC.to_vec();
        bytes.extend_from_slice(&2u32.to_le_bytes());
        bytes.extend_from_slice(&u64::MAX.to_le_bytes());
        bytes.extend_from_slice(&u64::MAX.to_le_bytes());
        bytes.push(DTYPE_C128);
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(load_array(&path), Err(Error::DimOverflow(_))));
    }

    #[test]
    fn dataset_round_trip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let mut acq = MultiCoilAcquisition::new(2, 2, 1, 8, 8, Domain::KSpace).unwrap();
        for r in 0..2 {
            for c in 0..3 {
                acq.set_channel(r, c, random_array(8, 8, (r * 3 + c) as u64)).unwrap();
            }
        }
        acq.meta.scenario_label = "tone".into();
        save_dataset(dir.path(), &acq).unwrap();
        let back = load_dataset(dir.path()).unwrap();
        assert_eq!(back.repeats(), 2);
        assert_eq!(back.sensor_channels(), 1);
        assert_eq!(back.meta.scenario_label, "tone");
        assert_eq!(back.channel(1, 2).as_slice(), acq.channel(1, 2).as_slice());

        // deleting a channel file must be caught
        std::fs::remove_file(dir.path().join(channel_file_name(1, 2))).unwrap();
        assert!(matches!(
            load_dataset(dir.path()),
            Err(Error::ManifestMismatch(_))
        ));
    }
}
