//! Multi-index sets for tensor-product (TP) and total-degree (TD) spaces.
//!
//! Indices are kept in graded lexicographic order: first by total degree,
//! then by the first coordinate in which two indices differ.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        Self(entries)
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![0; d])
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total degree `|n| = n_1 + ... + n_d`.
    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&n| u64::from(n)).sum()
    }

    pub fn max_entry(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

/// Graded lexicographic comparison.
pub fn compare_graded_lex(a: &MultiIndex, b: &MultiIndex) -> Result<Ordering> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(graded_lex(a, b))
}

fn graded_lex(a: &MultiIndex, b: &MultiIndex) -> Ordering {
    a.degree()
        .cmp(&b.degree())
        .then_with(|| a.entries().cmp(b.entries()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    /// Tensor product: `max_j n_j <= q`.
    TensorProduct,
    /// Total degree: `|n| <= q`.
    TotalDegree,
}

impl SpaceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SpaceKind::TensorProduct => "tp",
            SpaceKind::TotalDegree => "td",
        }
    }
}

impl std::str::FromStr for SpaceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tp" => Ok(SpaceKind::TensorProduct),
            "td" => Ok(SpaceKind::TotalDegree),
            other => Err(Error::Parameter(format!("unknown space kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    kind: SpaceKind,
    q: u32,
    d: usize,
    indices: Vec<MultiIndex>,
}

impl IndexSet {
    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Cardinality `N = #Λ`.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.indices.iter()
    }

    /// Largest single-coordinate order appearing in the set.
    pub fn max_order(&self) -> u32 {
        self.indices.iter().map(MultiIndex::max_entry).max().unwrap_or(0)
    }

    /// Position of `n` in the canonical order.
    pub fn position(&self, n: &MultiIndex) -> Option<usize> {
        if n.dim() != self.d {
            return None;
        }
        self.indices.binary_search_by(|probe| graded_lex(probe, n)).ok()
    }
}

/// Expected cardinality of a TP or TD set, with overflow reported as an error.
pub fn cardinality(kind: SpaceKind, q: u32, d: usize) -> Result<u64> {
    let overflow = || Error::Capacity(format!("N overflows u64 for {} q={q} d={d}", kind.as_str()));
    match kind {
        SpaceKind::TensorProduct => {
            let base = u64::from(q) + 1;
            let exp = u32::try_from(d).map_err(|_| overflow())?;
            base.checked_pow(exp).ok_or_else(overflow)
        }
        SpaceKind::TotalDegree => {
            // C(q+d, d) computed incrementally: C(q+i, i) = C(q+i-1, i-1) * (q+i) / i
            let mut acc: u128 = 1;
            for i in 1..=d as u128 {
                acc = acc
                    .checked_mul(u128::from(q) + i)
                    .ok_or_else(overflow)?
                    / i;
            }
            u64::try_from(acc).map_err(|_| overflow())
        }
    }
}

pub fn build_index_set(kind: SpaceKind, q: u32, d: usize) -> Result<IndexSet> {
    if d == 0 {
        return Err(Error::Parameter("dimension d must be >= 1".into()));
    }
    let n = cardinality(kind, q, d)?;
    let n = usize::try_from(n)
        .map_err(|_| Error::Capacity(format!("N = {n} exceeds addressable size")))?;
    // Refuse sets whose index storage alone would not fit in memory.
    n.checked_mul(d.saturating_mul(std::mem::size_of::<u32>()))
        .filter(|bytes| *bytes <= isize::MAX as usize)
        .ok_or_else(|| Error::Capacity(format!("N = {n}, d = {d} exceeds addressable size")))?;

    let max_degree = match kind {
        SpaceKind::TotalDegree => u64::from(q),
        SpaceKind::TensorProduct => u64::from(q) * d as u64,
    };
    let mut indices = Vec::with_capacity(n);
    let mut current = vec![0u32; d];
    for degree in 0..=max_degree {
        emit_degree(&mut current, 0, degree, q, &mut indices);
    }
    debug_assert_eq!(indices.len(), n);
    Ok(IndexSet {
        kind,
        q,
        d,
        indices,
    })
}

/// Appends every index of total degree `remaining` (over coordinates
/// `pos..`) with entries bounded by `cap`, in lexicographic order.
fn emit_degree(current: &mut [u32], pos: usize, remaining: u64, cap: u32, out: &mut Vec<MultiIndex>) {
    let d = current.len();
    if pos == d - 1 {
        if remaining <= u64::from(cap) {
            current[pos] = remaining as u32;
            out.push(MultiIndex(current.to_vec()));
        }
        return;
    }
    let tail_capacity = u64::from(cap) * (d - pos - 1) as u64;
    let lo = remaining.saturating_sub(tail_capacity);
    let hi = remaining.min(u64::from(cap));
    for v in lo..=hi {
        current[pos] = v as u32;
        emit_degree(current, pos + 1, remaining - v, cap, out);
    }
    current[pos] = 0;
}
