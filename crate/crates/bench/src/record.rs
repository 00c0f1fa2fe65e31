use std::io::{Read, Write};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use hnsw_core::IndexParams;

/// One measurement row: the parameters that produced it and what was
/// measured. Optional fields are empty when not measured (build time on a
/// query-only run) or when the grid point failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dataset: String,
    pub n: usize,
    pub dim: usize,
    pub distance: String,
    pub m: usize,
    pub mmax: usize,
    #[serde(serialize_with = "ser_cap", deserialize_with = "de_cap")]
    pub mmax0: usize,
    pub ef_construction: usize,
    pub level_mult: f64,
    pub selector: String,
    pub extend_candidates: bool,
    pub keep_pruned: bool,
    pub seed: u64,
    pub k: usize,
    pub ef: usize,
    pub recall: Option<f64>,
    pub mean_query_us: Option<f64>,
    pub mean_distance_computations: Option<f64>,
    pub build_ms: Option<f64>,
    pub status: String,
}

fn ser_cap<S: Serializer>(v: &usize, s: S) -> Result<S::Ok, S::Error> {
    if *v == usize::MAX {
        s.serialize_str("inf")
    } else {
        s.serialize_u64(*v as u64)
    }
}

fn de_cap<'de, D: Deserializer<'de>>(d: D) -> Result<usize, D::Error> {
    let s = String::deserialize(d)?;
    if s == "inf" {
        Ok(usize::MAX)
    } else {
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl RunRecord {
    pub fn new(dataset: &str, n: usize, dim: usize, distance: &str, params: &IndexParams) -> Self {
        Self {
            dataset: dataset.to_string(),
            n,
            dim,
            distance: distance.to_string(),
            m: params.m,
            mmax: params.mmax,
            mmax0: params.mmax0,
            ef_construction: params.ef_construction,
            level_mult: params.level_mult,
            selector: params.selector.label().to_string(),
            extend_candidates: params.extend_candidates,
            keep_pruned: params.keep_pruned_connections,
            seed: params.seed,
            k: 0,
            ef: 0,
            recall: None,
            mean_query_us: None,
            mean_distance_computations: None,
            build_ms: None,
            status: "ok".into(),
        }
    }

    pub fn failed(mut self, err: impl std::fmt::Display) -> Self {
        // keep the marker on one line so the CSV stays one row per record
        self.status = format!("error: {}", err.to_string().replace('\n', " "));
        self
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

pub fn write_csv(sink: impl Write, records: &[RunRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    if records.is_empty() {
        w.write_record(HEADER)?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(source: impl Read) -> csv::Result<Vec<RunRecord>> {
    csv::Reader::from_reader(source).deserialize().collect()
}

pub const HEADER: [&str; 20] = [
    "dataset",
    "n",
    "dim",
    "distance",
    "m",
    "mmax",
    "mmax0",
    "ef_construction",
    "level_mult",
    "selector",
    "extend_candidates",
    "keep_pruned",
    "seed",
    "k",
    "ef",
    "recall",
    "mean_query_us",
    "mean_distance_computations",
    "build_ms",
    "status",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_with_fixed_header() {
        let mut a = RunRecord::new("d", 100, 4, "l2", &IndexParams::new(6).with_mmax0(usize::MAX));
        a.k = 10;
        a.ef = 20;
        a.recall = Some(0.95);
        let b = RunRecord::new("d", 100, 4, "l2", &IndexParams::new(6)).failed("boom\nbad");
        let mut buf = Vec::new();
        write_csv(&mut buf, &[a.clone(), b.clone()]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), HEADER.join(","));
        assert!(text.lines().nth(1).unwrap().contains(",inf,"));
        assert_eq!(read_csv(&buf[..]).unwrap(), vec![a, b]);
    }

    #[test]
    fn empty_csv_still_has_header() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), HEADER.join(","));
    }
}
