use std::path::Path;

use crate::error::{Error, Result};
use crate::instance::SpinConfiguration;

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub run: usize,
    pub weight: usize,
    pub trajectory: usize,
    /// Emission time relative to the start of sampling.
    pub timestamp_ns: u64,
    pub spins: SpinConfiguration,
}

/// Raw sampler output, in replay order.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePool {
    pub n: usize,
    pub records: Vec<SampleRecord>,
    pub model_construction_s: f64,
    pub sampling_s: f64,
}

impl SamplePool {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Everything except timing, for reproducibility checks.
    pub fn same_samples(&self, other: &SamplePool) -> bool {
        self.n == other.n
            && self.records.len() == other.records.len()
            && self.records.iter().zip(&other.records).all(|(a, b)| {
                (a.run, a.weight, a.trajectory) == (b.run, b.weight, b.trajectory)
                    && a.spins == b.spins
            })
    }
}

const HEADER: [&str; 5] = ["run", "weight", "trajectory", "timestamp_ns", "spins"];

fn encode_spins(s: &SpinConfiguration) -> String {
    format!("{}:{}", s.len(), hex::encode(s.to_packed()))
}

fn decode_spins(field: &str, line: usize) -> Result<SpinConfiguration> {
    let (n, packed) = field
        .split_once(':')
        .ok_or_else(|| Error::parse(line, format!("spins field {field:?} is not `n:hex`")))?;
    let n: usize = n
        .parse()
        .map_err(|_| Error::parse(line, format!("bad spin count {n:?}")))?;
    let bytes =
        hex::decode(packed).map_err(|e| Error::parse(line, format!("bad spin hex: {e}")))?;
    SpinConfiguration::from_packed(&bytes, n).map_err(|e| Error::parse(line, e.to_string()))
}

/// One row per sample; spins are `n:hex` with bit `i` set when `s_i = -1`.
pub fn write_pool_csv(pool: &SamplePool, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    w.write_record(HEADER).map_err(csv_err)?;
    for r in &pool.records {
        w.write_record([
            r.run.to_string(),
            r.weight.to_string(),
            r.trajectory.to_string(),
            r.timestamp_ns.to_string(),
            encode_spins(&r.spins),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?;
    crate::io::write_atomic(path, &bytes)
}

/// Reads a pool written by [`write_pool_csv`]; timings are not stored and read back as zero.
pub fn read_pool_csv(path: impl AsRef<Path>) -> Result<SamplePool> {
    let path = path.as_ref();
    let mut rdr =
        csv::Reader::from_path(path).map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(1, e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::parse(
            1,
            format!("unexpected pool header {headers:?}"),
        ));
    }
    let mut records = Vec::new();
    let mut n = None;
    for (idx, row) in rdr.records().enumerate() {
        let line = idx + 2;
        let row = row.map_err(|e| Error::parse(line, e.to_string()))?;
        if row.len() != HEADER.len() {
            return Err(Error::parse(
                line,
                format!("expected {} fields", HEADER.len()),
            ));
        }
        let num = |i: usize| {
            row[i]
                .parse::<u64>()
                .map_err(|_| Error::parse(line, format!("bad {} {:?}", HEADER[i], &row[i])))
        };
        let spins = decode_spins(&row[4], line)?;
        match n {
            None => n = Some(spins.len()),
            Some(n) if n != spins.len() => {
                return Err(Error::parse(
                    line,
                    format!("spin length {} differs from {n}", spins.len()),
                ));
            }
            _ => {}
        }
        records.push(SampleRecord {
            run: num(0)? as usize,
            weight: num(1)? as usize,
            trajectory: num(2)? as usize,
            timestamp_ns: num(3)?,
            spins,
        });
    }
    let n = n.ok_or_else(|| Error::parse(1, "pool file has no samples"))?;
    Ok(SamplePool {
        n,
        records,
        model_construction_s: 0.0,
        sampling_s: 0.0,
    })
}
