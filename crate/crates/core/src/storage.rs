//! Versioned binary snapshots of a built index.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic        8 bytes  "HNSWSNAP"
//! version      u32
//! params       m u64, mmax u64, mmax0 u64, ef_construction u64,
//!              level_mult f64, selector u8, extend u8, keep_pruned u8, seed u64
//! distance     u8 (0 = l2, 1 = cosine)
//! dim          u32
//! n            u64
//! vectors      n * dim f32
//! levels       n u8
//! adjacency    per node, per layer 0..=level: count u32, then count u32 ids
//! enter point  u32 (u32::MAX when empty)
//! max layer    u32
//! ```
//!
//! Loading re-checks every structural invariant before handing the index
//! back.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::distance::DistanceKind;
use crate::error::{HnswError, Result};
use crate::graph::{HnswIndex, IndexParams, NodeId, Selector};

pub const MAGIC: &[u8; 8] = b"HNSWSNAP";
pub const FORMAT_VERSION: u32 = 1;

const NO_ENTER_POINT: u32 = u32::MAX;

/// Sizes of a written snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SnapshotSummary {
    pub total_bytes: u64,
    pub adjacency_bytes: u64,
}

struct Counting<W> {
    inner: W,
    written: u64,
}

impl<W: Write> Write for Counting<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.written += n as u64;
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

fn kind_tag(kind: &DistanceKind) -> Result<u8> {
    match kind {
        DistanceKind::Euclidean => Ok(0),
        DistanceKind::Cosine => Ok(1),
        DistanceKind::Custom(d) => Err(HnswError::Snapshot(format!(
            "custom distance '{}' cannot be serialized",
            d.name()
        ))),
    }
}

pub fn save_index(index: &HnswIndex, sink: impl Write) -> Result<SnapshotSummary> {
    let tag = kind_tag(index.kind())?;
    let mut w = Counting {
        inner: sink,
        written: 0,
    };
    let p = index.params();
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(FORMAT_VERSION)?;
    w.write_u64::<LittleEndian>(p.m as u64)?;
    w.write_u64::<LittleEndian>(p.mmax as u64)?;
    w.write_u64::<LittleEndian>(p.mmax0 as u64)?;
    w.write_u64::<LittleEndian>(p.ef_construction as u64)?;
    w.write_f64::<LittleEndian>(p.level_mult)?;
    w.write_u8(match p.selector {
        Selector::Simple => 0,
        Selector::Heuristic => 1,
    })?;
    w.write_u8(p.extend_candidates as u8)?;
    w.write_u8(p.keep_pruned_connections as u8)?;
    w.write_u64::<LittleEndian>(p.seed)?;
    w.write_u8(tag)?;
    w.write_u32::<LittleEndian>(index.dim() as u32)?;
    w.write_u64::<LittleEndian>(index.len() as u64)?;
    for &x in index.raw_vectors() {
        w.write_f32::<LittleEndian>(x)?;
    }
    for level in index.levels() {
        w.write_u8(level as u8)?;
    }

    let before_adjacency = w.written;
    for i in 0..index.len() {
        let node = NodeId(i as u32);
        for layer in 0..=index.level(node) {
            let list = index.neighbors(node, layer);
            w.write_u32::<LittleEndian>(list.len() as u32)?;
            for id in list {
                w.write_u32::<LittleEndian>(id.0)?;
            }
        }
    }
    let adjacency_bytes = w.written - before_adjacency;

    w.write_u32::<LittleEndian>(index.enter_point().map_or(NO_ENTER_POINT, |e| e.0))?;
    w.write_u32::<LittleEndian>(index.max_layer() as u32)?;
    w.flush()?;
    Ok(SnapshotSummary {
        total_bytes: w.written,
        adjacency_bytes,
    })
}

/// Attaches the section name to a short read.
fn section(name: &'static str) -> impl FnOnce(io::Error) -> HnswError {
    move |e| {
        if e.kind() == ErrorKind::UnexpectedEof {
            HnswError::Snapshot(format!("truncated in {name}"))
        } else {
            HnswError::Io(e)
        }
    }
}

fn read_usize(r: &mut impl Read, name: &'static str) -> Result<usize> {
    let v = r.read_u64::<LittleEndian>().map_err(section(name))?;
    usize::try_from(v).map_err(|_| HnswError::Snapshot(format!("{name} value {v} out of range")))
}

fn read_flag(r: &mut impl Read, name: &'static str) -> Result<bool> {
    match r.read_u8().map_err(section(name))? {
        0 => Ok(false),
        1 => Ok(true),
        t => Err(HnswError::Snapshot(format!("invalid {name} flag {t}"))),
    }
}

pub fn load_index(source: impl Read) -> Result<HnswIndex> {
    let mut r = source;
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(section("magic"))?;
    if &magic != MAGIC {
        return Err(HnswError::Snapshot("bad magic tag".into()));
    }
    let version = r.read_u32::<LittleEndian>().map_err(section("version"))?;
    if version != FORMAT_VERSION {
        return Err(HnswError::Snapshot(format!(
            "format version {version} is not supported (expected {FORMAT_VERSION})"
        )));
    }

    let m = read_usize(&mut r, "params")?;
    let mmax = read_usize(&mut r, "params")?;
    let mmax0 = read_usize(&mut r, "params")?;
    let ef_construction = read_usize(&mut r, "params")?;
    let level_mult = r.read_f64::<LittleEndian>().map_err(section("params"))?;
    let selector = match r.read_u8().map_err(section("params"))? {
        0 => Selector::Simple,
        1 => Selector::Heuristic,
        t => return Err(HnswError::Snapshot(format!("unknown selector tag {t}"))),
    };
    let extend_candidates = read_flag(&mut r, "extend_candidates")?;
    let keep_pruned_connections = read_flag(&mut r, "keep_pruned")?;
    let seed = r.read_u64::<LittleEndian>().map_err(section("params"))?;
    let params = IndexParams {
        m,
        mmax,
        mmax0,
        ef_construction,
        level_mult,
        selector,
        extend_candidates,
        keep_pruned_connections,
        seed,
    };
    params.validate()?;

    let kind = match r.read_u8().map_err(section("distance"))? {
        0 => DistanceKind::Euclidean,
        1 => DistanceKind::Cosine,
        t => return Err(HnswError::Snapshot(format!("unknown distance tag {t}"))),
    };
    let dim = r.read_u32::<LittleEndian>().map_err(section("dim"))? as usize;
    let n = read_usize(&mut r, "element count")?;
    if n > crate::graph::MAX_ELEMENTS {
        return Err(HnswError::Snapshot(format!("element count {n} exceeds id space")));
    }

    // grow as we read so a corrupt count cannot force a huge allocation
    let mut data = Vec::with_capacity(n.saturating_mul(dim).min(1 << 20));
    for _ in 0..n.saturating_mul(dim) {
        data.push(r.read_f32::<LittleEndian>().map_err(section("vectors"))?);
    }
    let mut levels = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        levels.push(r.read_u8().map_err(section("levels"))?);
    }
    let mut links = Vec::with_capacity(n.min(1 << 20));
    for (i, &level) in levels.iter().enumerate() {
        if level as usize > crate::graph::MAX_LEVEL {
            return Err(HnswError::Snapshot(format!("node {i} has level {level}")));
        }
        let mut per_layer = Vec::with_capacity(level as usize + 1);
        for layer in 0..=level as usize {
            let count = r.read_u32::<LittleEndian>().map_err(section("adjacency"))? as usize;
            if count > params.cap(layer) {
                return Err(HnswError::Invalid(crate::graph::InvariantViolation::DegreeCap {
                    node: NodeId(i as u32),
                    layer,
                    degree: count,
                    cap: params.cap(layer),
                }));
            }
            let mut list = Vec::with_capacity(count.min(1024));
            for _ in 0..count {
                list.push(NodeId(
                    r.read_u32::<LittleEndian>().map_err(section("adjacency"))?,
                ));
            }
            per_layer.push(list);
        }
        links.push(per_layer);
    }
    let ep = r.read_u32::<LittleEndian>().map_err(section("enter point"))?;
    let enter_point = (ep != NO_ENTER_POINT).then_some(NodeId(ep));
    let max_layer = r.read_u32::<LittleEndian>().map_err(section("max layer"))? as usize;

    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(HnswError::Snapshot("trailing bytes after max layer".into()));
    }

    HnswIndex::from_parts(params, kind, dim, data, levels, links, enter_point, max_layer)
}

pub fn save_index_file(index: &HnswIndex, path: impl AsRef<Path>) -> Result<SnapshotSummary> {
    save_index(index, BufWriter::new(File::create(path)?))
}

pub fn load_index_file(path: impl AsRef<Path>) -> Result<HnswIndex> {
    load_index(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate, SyntheticSpec};
    use crate::graph::{InvariantViolation, SearchParams};

    fn built(n: usize, seed: u64) -> HnswIndex {
        let ds = generate(&SyntheticSpec::uniform(n, 4, seed));
        let mut index =
            HnswIndex::new(4, DistanceKind::Euclidean, IndexParams::new(6).with_seed(seed))
                .unwrap();
        for v in ds.iter() {
            index.insert(v).unwrap();
        }
        index
    }

    fn to_bytes(index: &HnswIndex) -> Vec<u8> {
        let mut buf = Vec::new();
        save_index(index, &mut buf).unwrap();
        buf
    }

    #[test]
    fn empty_round_trip() {
        let index = HnswIndex::new(3, DistanceKind::Cosine, IndexParams::new(4)).unwrap();
        let back = load_index(&to_bytes(&index)[..]).unwrap();
        assert!(back.is_empty());
        assert_eq!(back.dim(), 3);
        assert_eq!(back.kind(), &DistanceKind::Cosine);
        assert_eq!(back.params(), index.params());
    }

    #[test]
    fn round_trip_preserves_stats_and_results() {
        let index = built(1000, 3);
        let bytes = to_bytes(&index);
        let back = load_index(&bytes[..]).unwrap();
        assert_eq!(back.stats(), index.stats());
        let queries = generate(&SyntheticSpec::uniform(50, 4, 1234));
        for q in queries.iter() {
            let sp = SearchParams::new(10, 40);
            let a = index.knn_search(q, sp).unwrap();
            let b = back.knn_search(q, sp).unwrap();
            assert_eq!(a, b);
        }
        assert_eq!(to_bytes(&back), bytes);
    }

    #[test]
    fn summary_counts_adjacency() {
        let index = built(300, 5);
        let mut buf = Vec::new();
        let summary = save_index(&index, &mut buf).unwrap();
        assert_eq!(summary.total_bytes, buf.len() as u64);
        assert_eq!(summary.adjacency_bytes, index.stats().adjacency_bytes());
    }

    #[test]
    fn bad_magic_is_rejected() {
        let mut bytes = to_bytes(&built(20, 1));
        bytes[0] = b'X';
        assert!(matches!(load_index(&bytes[..]), Err(HnswError::Snapshot(m)) if m.contains("magic")));
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let mut bytes = to_bytes(&built(20, 1));
        bytes[8] = 2;
        assert!(matches!(load_index(&bytes[..]), Err(HnswError::Snapshot(m)) if m.contains("version")));
    }

    #[test]
    fn truncation_is_rejected() {
        let bytes = to_bytes(&built(50, 1));
        for cut in [4, 20, 60, bytes.len() / 2, bytes.len() - 1] {
            assert!(load_index(&bytes[..cut]).is_err(), "cut at {cut}");
        }
        let mut long = bytes.clone();
        long.push(0);
        assert!(load_index(&long[..]).is_err());
    }

    /// Byte offset of node 0's layer-0 adjacency list.
    fn adjacency_offset(index: &HnswIndex) -> usize {
        8 + 4 + 8 * 4 + 8 + 3 + 8 + 1 + 4 + 8 + index.len() * index.dim() * 4 + index.len()
    }

    #[test]
    fn tampered_adjacency_names_the_check() {
        let index = built(50, 2);
        let mut bytes = to_bytes(&index);
        let off = adjacency_offset(&index);
        let count = u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
        assert!(count > 0);
        // point node 0's first link at itself
        bytes[off + 4..off + 8].copy_from_slice(&0u32.to_le_bytes());
        match load_index(&bytes[..]) {
            Err(HnswError::Invalid(InvariantViolation::SelfLoop { node, layer })) => {
                assert_eq!((node, layer), (NodeId(0), 0));
            }
            other => panic!("expected self-loop violation, got {other:?}"),
        }
    }

    #[test]
    fn tampered_link_breaks_symmetry() {
        let index = built(50, 2);
        let mut bytes = to_bytes(&index);
        let off = adjacency_offset(&index);
        let first = u32::from_le_bytes(bytes[off + 4..off + 8].try_into().unwrap());
        let other = (0..50u32)
            .find(|&c| c != 0 && c != first && !index.neighbors(NodeId(0), 0).contains(&NodeId(c)))
            .unwrap();
        bytes[off + 4..off + 8].copy_from_slice(&other.to_le_bytes());
        assert!(matches!(
            load_index(&bytes[..]),
            Err(HnswError::Invalid(InvariantViolation::Asymmetric { .. }))
        ));
    }

    #[test]
    fn custom_kind_cannot_be_saved() {
        struct Zero;
        impl crate::distance::Dissimilarity for Zero {
            fn name(&self) -> &str {
                "zero"
            }
            fn eval(&self, _: &[f32], _: &[f32]) -> f64 {
                0.0
            }
        }
        let index = HnswIndex::new(
            2,
            DistanceKind::Custom(std::sync::Arc::new(Zero)),
            IndexParams::new(4),
        )
        .unwrap();
        assert!(save_index(&index, Vec::new()).is_err());
    }
}
