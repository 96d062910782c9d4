//! Big-endian IDX files (the MNIST distribution format), optionally gzipped.
//!
//! Images: magic `0x00000803`, then `u32` count, rows, cols, then one `u8`
//! per pixel. Labels: magic `0x00000801`, `u32` count, one `u8` per label.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use super::{Dataset, Provenance};
use crate::error::{Error, Result};
use crate::tensor::Matrix;

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

fn read_all(path: &Path) -> Result<Vec<u8>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut raw = Vec::new();
    BufReader::new(file)
        .read_to_end(&mut raw)
        .map_err(|e| Error::io(path, e))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::io(path, e))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn format_err(path: &Path, detail: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        detail: detail.into(),
    }
}

fn header(bytes: &[u8], path: &Path, words: usize) -> Result<Vec<u32>> {
    if bytes.len() < 4 * words {
        return Err(format_err(path, format!("truncated header ({} bytes)", bytes.len())));
    }
    Ok(bytes[..4 * words]
        .chunks_exact(4)
        .map(|c| u32::from_be_bytes(c.try_into().unwrap()))
        .collect())
}

/// Loads an image/label file pair. Pixels are scaled to `[0, 1]`; labels keep
/// their on-disk values as 0-based class indices.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let img = read_all(images_path)?;
    let h = header(&img, images_path, 4)?;
    if h[0] != IMAGE_MAGIC {
        return Err(format_err(
            images_path,
            format!("image magic 0x{:08x}, expected 0x{IMAGE_MAGIC:08x}", h[0]),
        ));
    }
    let (n, rows, cols) = (h[1] as usize, h[2] as usize, h[3] as usize);
    let pixels = &img[16..];
    if pixels.len() != n * rows * cols {
        return Err(format_err(
            images_path,
            format!("{} pixel bytes for {n} images of {rows}x{cols}", pixels.len()),
        ));
    }

    let lab = read_all(labels_path)?;
    let h = header(&lab, labels_path, 2)?;
    if h[0] != LABEL_MAGIC {
        return Err(format_err(
            labels_path,
            format!("label magic 0x{:08x}, expected 0x{LABEL_MAGIC:08x}", h[0]),
        ));
    }
    if h[1] as usize != n {
        return Err(Error::Consistency(format!(
            "{} has {n} images but {} has {} labels",
            images_path.display(),
            labels_path.display(),
            h[1]
        )));
    }
    let raw_labels = &lab[8..];
    if raw_labels.len() != n {
        return Err(format_err(labels_path, format!("{} label bytes for {n} labels", raw_labels.len())));
    }
    let labels: Vec<usize> = raw_labels.iter().map(|&b| b as usize).collect();
    let classes = labels.iter().max().map_or(0, |m| m + 1).max(2);

    let data = pixels.iter().map(|&p| p as f64 / 255.0).collect();
    Ok(Dataset {
        features: Matrix::from_vec(n, rows * cols, data)?,
        labels,
        classes,
        train: (0..n).collect(),
        test: Vec::new(),
        provenance: Provenance::Idx {
            images: images_path.to_path_buf(),
            labels: labels_path.to_path_buf(),
            image_rows: rows,
            image_cols: cols,
        },
    })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let gz = path.extension().is_some_and(|e| e == "gz");
    let res = if gz {
        let mut enc = GzEncoder::new(&mut w, Compression::default());
        enc.write_all(bytes).and_then(|_| enc.finish().map(|_| ()))
    } else {
        w.write_all(bytes)
    };
    res.and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// Writes pixels (rounded back to bytes) and labels. `.gz` paths are gzipped.
pub fn write_idx(ds: &Dataset, images_path: &Path, labels_path: &Path) -> Result<()> {
    let (rows, cols) = match &ds.provenance {
        Provenance::Idx {
            image_rows,
            image_cols,
            ..
        } => (*image_rows, *image_cols),
        _ => (1, ds.dim()),
    };
    if rows * cols != ds.dim() {
        return Err(Error::Consistency(format!(
            "image shape {rows}x{cols} does not match feature width {}",
            ds.dim()
        )));
    }
    if let Some(&bad) = ds.labels.iter().find(|&&y| y > u8::MAX as usize) {
        return Err(Error::Domain(format!("label {bad} does not fit in a byte")));
    }
    let n = ds.len() as u32;
    let mut img = Vec::with_capacity(16 + ds.features.len());
    for word in [IMAGE_MAGIC, n, rows as u32, cols as u32] {
        img.extend_from_slice(&word.to_be_bytes());
    }
    img.extend(ds.features.data().iter().map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8));
    let mut lab = Vec::with_capacity(8 + ds.len());
    for word in [LABEL_MAGIC, n] {
        lab.extend_from_slice(&word.to_be_bytes());
    }
    lab.extend(ds.labels.iter().map(|&y| y as u8));
    write_bytes(images_path, &img)?;
    write_bytes(labels_path, &lab)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_raw(dir: &Path, name: &str, words: &[u32], body: &[u8]) -> std::path::PathBuf {
        let path = dir.join(name);
        let mut bytes: Vec<u8> = words.iter().flat_map(|w| w.to_be_bytes()).collect();
        bytes.extend_from_slice(body);
        std::fs::write(&path, bytes).unwrap();
        path
    }

    #[test]
    fn parses_small_pair() {
        let dir = tempfile::tempdir().unwrap();
        let img = write_raw(dir.path(), "img", &[IMAGE_MAGIC, 4, 2, 2], &[0, 255, 128, 1].repeat(4));
        let lab = write_raw(dir.path(), "lab", &[LABEL_MAGIC, 4], &[0, 1, 2, 1]);
        let ds = load_idx(&img, &lab).unwrap();
        assert_eq!(ds.len(), 4);
        assert_eq!(ds.dim(), 4);
        assert_eq!(ds.classes, 3);
        assert_eq!(ds.features.get(0, 1), 1.0);
        assert_eq!(ds.features.get(0, 0), 0.0);
        assert_eq!(ds.labels, vec![0, 1, 2, 1]);
    }

    #[test]
    fn wrong_magic_and_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let img = write_raw(dir.path(), "img", &[LABEL_MAGIC, 1, 1, 1], &[0]);
        let lab = write_raw(dir.path(), "lab", &[LABEL_MAGIC, 1], &[0]);
        match load_idx(&img, &lab) {
            Err(Error::Format { detail, .. }) => assert!(detail.contains("0x00000801"), "{detail}"),
            other => panic!("expected format error, got {other:?}"),
        }
        let img = write_raw(dir.path(), "img2", &[IMAGE_MAGIC, 2, 1, 1], &[0, 1]);
        assert!(matches!(load_idx(&img, &lab), Err(Error::Consistency(_))));
        let short = write_raw(dir.path(), "img3", &[IMAGE_MAGIC, 2, 2, 2], &[0, 1]);
        assert!(matches!(load_idx(&short, &lab), Err(Error::Format { .. })));
        assert!(matches!(load_idx(&dir.path().join("missing"), &lab), Err(Error::Io { .. })));
    }

    #[test]
    fn round_trip_plain_and_gz() {
        let dir = tempfile::tempdir().unwrap();
        let body: Vec<u8> = (0..=255u8).chain(0..=255u8).take(3 * 16).collect();
        let img = write_raw(dir.path(), "img", &[IMAGE_MAGIC, 3, 4, 4], &body);
        let lab = write_raw(dir.path(), "lab", &[LABEL_MAGIC, 3], &[9, 0, 4]);
        let ds = load_idx(&img, &lab).unwrap();
        for ext in ["", ".gz"] {
            let (i2, l2) = (dir.path().join(format!("i{ext}")), dir.path().join(format!("l{ext}")));
            write_idx(&ds, &i2, &l2).unwrap();
            let back = load_idx(&i2, &l2).unwrap();
            let bits = |d: &Dataset| d.features.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&back), bits(&ds));
            assert_eq!(back.labels, ds.labels);
        }
    }
}
