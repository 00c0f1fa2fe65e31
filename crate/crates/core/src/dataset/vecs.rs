//! The `.fvecs` / `.bvecs` / `.ivecs` containers used by the SIFT and BIGANN
//! corpora.
//!
//! Every record is a little-endian `i32` component count `d` followed by `d`
//! components: `f32` for fvecs, `u8` for bvecs, `i32` for ivecs. There is no
//! file header; the record count follows from the file length.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{ByteOrder, LittleEndian, WriteBytesExt};

use super::Dataset;
use crate::error::{HnswError, Result};

fn format_err(offset: usize, reason: impl Into<String>) -> HnswError {
    HnswError::Format {
        offset: offset as u64,
        reason: reason.into(),
    }
}

/// Walks records of `width`-byte components, handing each component slice to
/// `f`. Enforces a positive count and, when `uniform`, the same count for
/// every record.
fn for_each_record(
    bytes: &[u8],
    width: usize,
    uniform: bool,
    mut f: impl FnMut(usize, &[u8]) -> Result<()>,
) -> Result<Option<usize>> {
    let mut offset = 0;
    let mut dim: Option<usize> = None;
    while offset < bytes.len() {
        if bytes.len() - offset < 4 {
            return Err(format_err(offset, "truncated record header"));
        }
        let d = LittleEndian::read_i32(&bytes[offset..]);
        if d <= 0 && (uniform || d < 0) {
            return Err(format_err(offset, format!("invalid component count {d}")));
        }
        let d = d as usize;
        if uniform {
            match dim {
                Some(expected) if expected != d => {
                    return Err(format_err(
                        offset,
                        format!("component count {d} differs from first record's {expected}"),
                    ))
                }
                _ => dim = Some(d),
            }
        }
        let body = offset + 4;
        let end = body + d * width;
        if end > bytes.len() {
            return Err(format_err(offset, format!("record of {d} components is truncated")));
        }
        f(offset, &bytes[body..end])?;
        offset = end;
    }
    Ok(dim)
}

pub fn read_fvecs(mut source: impl Read) -> Result<Dataset> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let mut data = Vec::with_capacity(bytes.len() / 4);
    let dim = for_each_record(&bytes, 4, true, |offset, body| {
        for chunk in body.chunks_exact(4) {
            let x = LittleEndian::read_f32(chunk);
            if !x.is_finite() {
                return Err(format_err(offset, "non-finite component"));
            }
            data.push(x);
        }
        Ok(())
    })?;
    Dataset::from_flat(dim.unwrap_or(0), data)
}

pub fn read_bvecs(mut source: impl Read) -> Result<Dataset> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let mut data = Vec::with_capacity(bytes.len());
    let dim = for_each_record(&bytes, 1, true, |_, body| {
        data.extend(body.iter().map(|&b| b as f32));
        Ok(())
    })?;
    Dataset::from_flat(dim.unwrap_or(0), data)
}

/// Reads ivecs records as id lists. Lists may differ in length.
pub fn read_ivecs(mut source: impl Read) -> Result<Vec<Vec<u32>>> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let mut lists = Vec::new();
    for_each_record(&bytes, 4, false, |offset, body| {
        let list = body
            .chunks_exact(4)
            .map(|c| {
                let v = LittleEndian::read_i32(c);
                u32::try_from(v).map_err(|_| format_err(offset, format!("negative id {v}")))
            })
            .collect::<Result<Vec<u32>>>()?;
        lists.push(list);
        Ok(())
    })?;
    Ok(lists)
}

fn write_count(sink: &mut impl Write, d: usize) -> Result<()> {
    let d = i32::try_from(d).map_err(|_| HnswError::InvalidParams(format!("record of {d} components")))?;
    sink.write_i32::<LittleEndian>(d)?;
    Ok(())
}

pub fn write_fvecs(mut sink: impl Write, dataset: &Dataset) -> Result<()> {
    for v in dataset.iter() {
        write_count(&mut sink, v.len())?;
        for &x in v {
            sink.write_f32::<LittleEndian>(x)?;
        }
    }
    sink.flush()?;
    Ok(())
}

/// Components must be whole numbers in `0..=255`.
pub fn write_bvecs(mut sink: impl Write, dataset: &Dataset) -> Result<()> {
    for v in dataset.iter() {
        write_count(&mut sink, v.len())?;
        for (index, &x) in v.iter().enumerate() {
            if x.fract() != 0.0 || !(0.0..=255.0).contains(&x) {
                return Err(HnswError::InvalidParams(format!(
                    "component {index} = {x} does not fit a byte"
                )));
            }
            sink.write_u8(x as u8)?;
        }
    }
    sink.flush()?;
    Ok(())
}

pub fn write_ivecs(mut sink: impl Write, lists: &[Vec<u32>]) -> Result<()> {
    for list in lists {
        write_count(&mut sink, list.len())?;
        for &id in list {
            let id = i32::try_from(id)
                .map_err(|_| HnswError::InvalidParams(format!("id {id} exceeds i32")))?;
            sink.write_i32::<LittleEndian>(id)?;
        }
    }
    sink.flush()?;
    Ok(())
}

pub fn read_fvecs_file(path: impl AsRef<Path>) -> Result<Dataset> {
    read_fvecs(BufReader::new(File::open(path)?))
}

pub fn write_fvecs_file(path: impl AsRef<Path>, dataset: &Dataset) -> Result<()> {
    write_fvecs(BufWriter::new(File::create(path)?), dataset)
}

pub fn read_ivecs_file(path: impl AsRef<Path>) -> Result<Vec<Vec<u32>>> {
    read_ivecs(BufReader::new(File::open(path)?))
}

pub fn write_ivecs_file(path: impl AsRef<Path>, lists: &[Vec<u32>]) -> Result<()> {
    write_ivecs(BufWriter::new(File::create(path)?), lists)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fvecs_single_record() {
        let bytes = [2, 0, 0, 0, 0, 0, 0x80, 0x3f, 0, 0, 0, 0x40];
        let ds = read_fvecs(&bytes[..]).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.get(0), [1.0, 2.0]);
    }

    #[test]
    fn empty_streams() {
        assert!(read_fvecs(&[][..]).unwrap().is_empty());
        assert!(read_bvecs(&[][..]).unwrap().is_empty());
        assert!(read_ivecs(&[][..]).unwrap().is_empty());
    }

    #[test]
    fn fvecs_inconsistent_dim_names_offset() {
        let mut bytes = vec![1, 0, 0, 0, 0, 0, 0x80, 0x3f];
        bytes.extend([2, 0, 0, 0, 0, 0, 0x80, 0x3f, 0, 0, 0x80, 0x3f]);
        match read_fvecs(&bytes[..]) {
            Err(HnswError::Format { offset, .. }) => assert_eq!(offset, 8),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn fvecs_rejects_nonpositive_dim_and_truncation() {
        assert!(matches!(
            read_fvecs(&[0u8, 0, 0, 0][..]),
            Err(HnswError::Format { offset: 0, .. })
        ));
        assert!(read_fvecs(&[0xffu8, 0xff, 0xff, 0xff][..]).is_err());
        assert!(read_fvecs(&[2u8, 0, 0, 0, 0, 0, 0x80, 0x3f][..]).is_err());
        assert!(read_fvecs(&[2u8, 0][..]).is_err());
    }

    #[test]
    fn bvecs_widen_bytes() {
        let ds = read_bvecs(&[2u8, 0, 0, 0, 3, 7][..]).unwrap();
        assert_eq!(ds.get(0), [3.0, 7.0]);
        assert!(read_bvecs(&[2u8, 0, 0, 0, 3][..]).is_err());
    }

    #[test]
    fn ivecs_round_trip_and_truncation() {
        let mut buf = Vec::new();
        write_ivecs(&mut buf, &[vec![5, 2, 9]]).unwrap();
        assert_eq!(read_ivecs(&buf[..]).unwrap(), vec![vec![5, 2, 9]]);
        let short = [3u8, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0];
        assert!(read_ivecs(&short[..]).is_err());
    }

    #[test]
    fn bvecs_writer_rejects_fractions() {
        let ds = Dataset::from_rows(1, [[0.5f32]]).unwrap();
        assert!(write_bvecs(Vec::new(), &ds).is_err());
    }

    fn rows() -> impl Strategy<Value = (usize, Vec<Vec<f32>>)> {
        (1usize..6).prop_flat_map(|d| (Just(d), prop::collection::vec(prop::collection::vec(-1e6f32..1e6, d), 0..20)))
    }

    proptest! {
        #[test]
        fn fvecs_bytes_round_trip((d, rows) in rows()) {
            let ds = Dataset::from_rows(d, &rows).unwrap();
            let mut buf = Vec::new();
            write_fvecs(&mut buf, &ds).unwrap();
            let back = read_fvecs(&buf[..]).unwrap();
            let mut again = Vec::new();
            write_fvecs(&mut again, &back).unwrap();
            prop_assert_eq!(buf, again);
            prop_assert_eq!(back.as_flat(), ds.as_flat());
        }

        #[test]
        fn bvecs_bytes_round_trip(d in 1usize..8, rows in prop::collection::vec(prop::collection::vec(any::<u8>(), 8), 0..20)) {
            let mut buf = Vec::new();
            for r in &rows {
                buf.extend((d as i32).to_le_bytes());
                buf.extend(&r[..d]);
            }
            let ds = read_bvecs(&buf[..]).unwrap();
            let mut again = Vec::new();
            write_bvecs(&mut again, &ds).unwrap();
            prop_assert_eq!(buf, again);
        }

        #[test]
        fn ivecs_round_trip(lists in prop::collection::vec(prop::collection::vec(0u32..1_000_000, 0..12), 0..10)) {
            let mut buf = Vec::new();
            write_ivecs(&mut buf, &lists).unwrap();
            prop_assert_eq!(read_ivecs(&buf[..]).unwrap(), lists);
        }
    }
}
