//! Closed geodesics: words, conjugacy keys, enumeration and table files.

pub mod enumerate;
pub mod io;
pub mod word;

use std::cmp::Ordering;

use thiserror::Error;

pub use enumerate::{enumerate, enumerate_arithmetic, enumerate_with, EnumerateOptions, Strategy};
pub use io::{load, save, write_csv};
pub use word::{canonical_cyclic, class_key, primitive_decompose, ClassKey, Letter, Relator, Word};

#[derive(Debug, Error)]
pub enum GeodesicsError {
    #[error("version error: {0}")]
    Version(String),
    #[error("model digest mismatch: table was built for a different model")]
    DigestMismatch,
    #[error("truncated table file: {0}")]
    Truncated(String),
    #[error("corrupt table file: {0}")]
    Corrupt(String),
    #[error("cutoff {requested} exceeds the memory budget; largest feasible cutoff is about {suggested:.2}")]
    MemoryBudget { requested: f64, suggested: f64 },
    #[error("cutoff must be positive and finite, got {0}")]
    InvalidCutoff(f64),
    #[error(transparent)]
    Fuchsian(#[from] crate::fuchsian::FuchsianError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One oriented closed geodesic.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicRecord {
    pub canon: Word,
    pub length: f64,
    pub primitive_length: f64,
    pub power: u32,
    pub homology: Vec<i64>,
}

impl GeodesicRecord {
    pub fn is_primitive(&self) -> bool {
        self.power == 1
    }
}

/// Enumerated length spectrum, sorted by `(length, canon)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicTable {
    pub model_digest: [u8; 32],
    pub cutoff_l: f64,
    /// Every class with length at most this value is present.
    pub complete_below: f64,
    /// Homology dimension (number of generators).
    pub rank: usize,
    pub records: Vec<GeodesicRecord>,
}

fn record_order(a: &GeodesicRecord, b: &GeodesicRecord) -> Ordering {
    a.length.total_cmp(&b.length).then_with(|| a.canon.to_bytes().cmp(&b.canon.to_bytes()))
}

impl GeodesicTable {
    pub fn new(model_digest: [u8; 32], cutoff_l: f64, complete_below: f64, rank: usize, mut records: Vec<GeodesicRecord>) -> Self {
        records.sort_by(record_order);
        GeodesicTable { model_digest, cutoff_l, complete_below, rank, records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Shortest length in the table (empirical systole).
    pub fn systole(&self) -> Option<f64> {
        self.records.first().map(|r| r.length)
    }

    /// Records with `lo ≤ length ≤ hi`.
    pub fn window(&self, lo: f64, hi: f64) -> &[GeodesicRecord] {
        let start = self.records.partition_point(|r| r.length < lo);
        let end = self.records.partition_point(|r| r.length <= hi);
        &self.records[start..end.max(start)]
    }

    pub fn primitive(&self) -> impl Iterator<Item = &GeodesicRecord> {
        self.records.iter().filter(|r| r.power == 1)
    }

    /// Componentwise sum of all homology vectors.
    pub fn homology_sum(&self) -> Vec<i64> {
        let mut s = vec![0i64; self.rank];
        for r in &self.records {
            for (a, h) in s.iter_mut().zip(&r.homology) {
                *a += h;
            }
        }
        s
    }

    /// True when every record's reverse orientation is also present with
    /// negated homology and equal length.
    pub fn is_inversion_closed(&self, relator: &Relator) -> bool {
        let keys: std::collections::HashMap<Vec<u8>, &GeodesicRecord> =
            self.records.iter().map(|r| (r.canon.to_bytes(), r)).collect();
        self.records.iter().all(|r| {
            let inv = canonical_cyclic(&r.canon.inverse(), relator);
            keys.get(&inv.to_bytes()).is_some_and(|q| {
                q.length == r.length && q.homology.iter().zip(&r.homology).all(|(a, b)| *a == -*b)
            })
        })
    }

    /// The table with every record of length above `l` dropped.
    pub fn truncated(&self, l: f64) -> GeodesicTable {
        let records = self.records.iter().filter(|r| r.length <= l).cloned().collect();
        GeodesicTable {
            model_digest: self.model_digest,
            cutoff_l: l.min(self.cutoff_l),
            complete_below: self.complete_below.min(l),
            rank: self.rank,
            records,
        }
    }
}
