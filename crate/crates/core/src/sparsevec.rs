//! Sparse vectors with sorted index lists.
//!
//! The separating factor of the embedding lands in `R^{n + 2^n}` where all
//! but a handful of coordinates vanish; images and frame vectors are kept
//! sparse so pair scans stay proportional to the support size.

#[derive(Debug, Clone, PartialEq)]
pub struct SparseVec {
    /// Strictly increasing indices.
    entries: Vec<(u32, f64)>,
}

impl SparseVec {
    pub fn new() -> Self {
        SparseVec { entries: Vec::new() }
    }

    /// Builds from possibly unsorted, possibly repeated entries; repeated
    /// indices are summed, zeros dropped.
    pub fn from_entries(mut entries: Vec<(u32, f64)>) -> Self {
        entries.sort_unstable_by_key(|(i, _)| *i);
        let mut out: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            match out.last_mut() {
                Some((j, acc)) if *j == i => *acc += v,
                _ => out.push((i, v)),
            }
        }
        out.retain(|(_, v)| *v != 0.0);
        SparseVec { entries: out }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn scale(&self, s: f64) -> SparseVec {
        SparseVec {
            entries: self.entries.iter().map(|(i, v)| (*i, v * s)).collect(),
        }
    }

    pub fn add(&self, other: &SparseVec) -> SparseVec {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &SparseVec) -> SparseVec {
        self.axpy(-1.0, other)
    }

    /// `self + t * other`.
    pub fn axpy(&self, t: f64, other: &SparseVec) -> SparseVec {
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() || j < other.entries.len() {
            let a = self.entries.get(i);
            let b = other.entries.get(j);
            match (a, b) {
                (Some(&(ia, va)), Some(&(ib, vb))) => {
                    if ia == ib {
                        let v = va + t * vb;
                        if v != 0.0 {
                            out.push((ia, v));
                        }
                        i += 1;
                        j += 1;
                    } else if ia < ib {
                        out.push((ia, va));
                        i += 1;
                    } else {
                        out.push((ib, t * vb));
                        j += 1;
                    }
                }
                (Some(&(ia, va)), None) => {
                    out.push((ia, va));
                    i += 1;
                }
                (None, Some(&(ib, vb))) => {
                    out.push((ib, t * vb));
                    j += 1;
                }
                (None, None) => break,
            }
        }
        SparseVec { entries: out }
    }

    pub fn dot(&self, other: &SparseVec) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        while i < self.entries.len() && j < other.entries.len() {
            let (ia, va) = self.entries[i];
            let (ib, vb) = other.entries[j];
            if ia == ib {
                acc += va * vb;
                i += 1;
                j += 1;
            } else if ia < ib {
                i += 1;
            } else {
                j += 1;
            }
        }
        acc
    }

    pub fn norm2(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn dist2(&self, other: &SparseVec) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        while i < self.entries.len() || j < other.entries.len() {
            let a = self.entries.get(i);
            let b = other.entries.get(j);
            match (a, b) {
                (Some(&(ia, va)), Some(&(ib, vb))) => {
                    if ia == ib {
                        let d = va - vb;
                        acc += d * d;
                        i += 1;
                        j += 1;
                    } else if ia < ib {
                        acc += va * va;
                        i += 1;
                    } else {
                        acc += vb * vb;
                        j += 1;
                    }
                }
                (Some(&(_, va)), None) => {
                    acc += va * va;
                    i += 1;
                }
                (None, Some(&(_, vb))) => {
                    acc += vb * vb;
                    j += 1;
                }
                (None, None) => break,
            }
        }
        acc
    }

    pub fn dist(&self, other: &SparseVec) -> f64 {
        self.dist2(other).sqrt()
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (i, v) in &self.entries {
            out[*i as usize] = *v;
        }
        out
    }
}

impl Default for SparseVec {
    fn default() -> Self {
        Self::new()
    }
}
