//! Integer lattice points used as decomposition indices.
//!
//! Uniform decompositions are indexed by `k ∈ Z^d`, dyadic ones by `j ∈ N₀`;
//! the latter are stored as one-dimensional points with a nonnegative
//! coordinate so both share weights and ordering.

use std::fmt;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

pub const MAX_DIM: usize = 4;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeIndex {
    dim: u8,
    coords: [i32; MAX_DIM],
}

impl LatticeIndex {
    /// Panics if `coords` is empty or longer than [`MAX_DIM`].
    pub fn new(coords: &[i32]) -> Self {
        assert!(
            !coords.is_empty() && coords.len() <= MAX_DIM,
            "lattice index dimension must be 1..={MAX_DIM}"
        );
        let mut c = [0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Self {
            dim: coords.len() as u8,
            coords: c,
        }
    }

    pub fn origin(dim: usize) -> Self {
        Self::new(&vec![0; dim])
    }

    pub fn scalar(j: i32) -> Self {
        Self::new(&[j])
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[i32] {
        &self.coords[..self.dim as usize]
    }

    pub fn norm_sq(&self) -> i64 {
        self.coords().iter().map(|&c| (c as i64) * (c as i64)).sum()
    }

    /// Euclidean norm `|k|`.
    pub fn norm(&self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    pub fn max_abs(&self) -> i32 {
        self.coords().iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn offset(&self, other: &LatticeIndex) -> LatticeIndex {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = *self;
        for a in 0..self.dim() {
            out.coords[a] += other.coords[a];
        }
        out
    }

    pub fn sub(&self, other: &LatticeIndex) -> LatticeIndex {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = *self;
        for a in 0..self.dim() {
            out.coords[a] -= other.coords[a];
        }
        out
    }

    /// File-name friendly label, e.g. `k_3_-1`.
    pub fn label(&self) -> String {
        let parts: Vec<String> = self.coords().iter().map(|c| c.to_string()).collect();
        format!("k_{}", parts.join("_"))
    }
}

impl fmt::Debug for LatticeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for LatticeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for LatticeIndex {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.dim()))?;
        for c in self.coords() {
            seq.serialize_element(c)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for LatticeIndex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct IndexVisitor;
        impl<'de> Visitor<'de> for IndexVisitor {
            type Value = LatticeIndex;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "an array of 1 to {MAX_DIM} integers")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Self::Value, A::Error> {
                let mut coords = Vec::new();
                while let Some(c) = seq.next_element::<i32>()? {
                    coords.push(c);
                }
                if coords.is_empty() || coords.len() > MAX_DIM {
                    return Err(de::Error::invalid_length(coords.len(), &self));
                }
                Ok(LatticeIndex::new(&coords))
            }
        }
        deserializer.deserialize_seq(IndexVisitor)
    }
}

/// All points of `Z^dim` inside the closed cube `|k|_∞ <= radius`, in
/// lexicographic order.
pub fn cube(dim: usize, radius: i32) -> Vec<LatticeIndex> {
    let side = (2 * radius + 1) as usize;
    let total = side.pow(dim as u32);
    let mut out = Vec::with_capacity(total);
    let mut c = vec![-radius; dim];
    for _ in 0..total {
        out.push(LatticeIndex::new(&c));
        for a in (0..dim).rev() {
            c[a] += 1;
            if c[a] <= radius {
                break;
            }
            c[a] = -radius;
        }
    }
    out
}

/// All points with `|k|^2 <= bound_sq`, lexicographic.
pub fn ball(dim: usize, bound_sq: i64) -> Vec<LatticeIndex> {
    let r = (bound_sq as f64).sqrt().floor() as i32 + 1;
    cube(dim, r)
        .into_iter()
        .filter(|k| k.norm_sq() <= bound_sq)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_is_lexicographic() {
        let c = cube(2, 1);
        assert_eq!(c.len(), 9);
        assert_eq!(c[0].coords(), &[-1, -1]);
        assert_eq!(c[1].coords(), &[-1, 0]);
        assert_eq!(c[8].coords(), &[1, 1]);
        let mut sorted = c.clone();
        sorted.sort();
        assert_eq!(sorted, c);
    }

    #[test]
    fn serde_round_trip() {
        let k = LatticeIndex::new(&[3, -4]);
        let s = serde_json::to_string(&k).unwrap();
        assert_eq!(s, "[3,-4]");
        let back: LatticeIndex = serde_json::from_str(&s).unwrap();
        assert_eq!(back, k);
        assert_eq!(k.norm(), 5.0);
        assert_eq!(k.label(), "k_3_-4");
    }
}
