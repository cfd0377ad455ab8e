//! Edge and dyad alphabets.
//!
//! An edge variable `y_ij` takes one of `M` integer labels. A dyad is the pair
//! `(y_ij, y_ji)` for directed networks and the single label `y_ij` for
//! undirected ones. Dyads are encoded as dense indices so model tables can be
//! plain arrays: for directed alphabets `(a, b)` maps to `a * M + b`, where `a`
//! and `b` are label positions.

use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Ordered set of edge labels with a distinguished "no relationship" label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeAlphabet {
    values: Vec<i32>,
    zero: usize,
}

impl EdgeAlphabet {
    /// Builds an alphabet from distinct labels; labels are kept in ascending order.
    pub fn new(mut values: Vec<i32>, zero_label: i32) -> Result<Self> {
        values.sort_unstable();
        if values.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidAlphabet(format!("repeated labels in {values:?}")));
        }
        if values.len() < 2 {
            return Err(Error::InvalidAlphabet(format!(
                "need at least two labels, got {values:?}"
            )));
        }
        if values.len() > 255 {
            return Err(Error::InvalidAlphabet(format!("{} labels is too many", values.len())));
        }
        let zero = values
            .iter()
            .position(|&v| v == zero_label)
            .ok_or_else(|| Error::InvalidAlphabet(format!("zero label {zero_label} not in {values:?}")))?;
        Ok(Self { values, zero })
    }

    /// `{0, 1}`.
    pub fn binary() -> Self {
        Self { values: alloc::vec![0, 1], zero: 0 }
    }

    /// `{-1, 0, 1}`.
    pub fn signed() -> Self {
        Self { values: alloc::vec![-1, 0, 1], zero: 1 }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[i32] {
        &self.values
    }

    pub fn zero_label(&self) -> i32 {
        self.values[self.zero]
    }

    pub fn zero_index(&self) -> usize {
        self.zero
    }

    pub fn index_of(&self, value: i32) -> Option<usize> {
        self.values.binary_search(&value).ok()
    }

    pub fn value(&self, index: usize) -> i32 {
        self.values[index]
    }

    pub fn is_binary(&self) -> bool {
        self.values == [0, 1] && self.zero == 0
    }

    pub fn is_signed(&self) -> bool {
        self.values == [-1, 0, 1] && self.zero == 1
    }
}

/// Dense index of a dyad value within a [`DyadAlphabet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dyad(u16);

impl Dyad {
    #[inline]
    pub const fn new(index: usize) -> Self {
        Dyad(index as u16)
    }

    #[inline]
    pub const fn index(self) -> usize {
        self.0 as usize
    }
}

/// The finite sample space of a dyad, its baseline and its transpose map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadAlphabet {
    edge: EdgeAlphabet,
    directed: bool,
}

impl DyadAlphabet {
    pub fn new(edge: EdgeAlphabet, directed: bool) -> Self {
        Self { edge, directed }
    }

    pub fn directed(edge: EdgeAlphabet) -> Self {
        Self::new(edge, true)
    }

    pub fn undirected(edge: EdgeAlphabet) -> Self {
        Self::new(edge, false)
    }

    pub fn edge_alphabet(&self) -> &EdgeAlphabet {
        &self.edge
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// `|𝒟|`: `M²` when directed, `M` otherwise.
    pub fn size(&self) -> usize {
        let m = self.edge.len();
        if self.directed {
            m * m
        } else {
            m
        }
    }

    /// The all-zero dyad.
    pub fn baseline(&self) -> Dyad {
        let z = self.edge.zero_index();
        if self.directed {
            Dyad::new(z * self.edge.len() + z)
        } else {
            Dyad::new(z)
        }
    }

    /// Swaps the two edge variables of a directed dyad; identity when undirected.
    #[inline]
    pub fn transpose(&self, d: Dyad) -> Dyad {
        if self.directed {
            let m = self.edge.len();
            let (a, b) = (d.index() / m, d.index() % m);
            Dyad::new(b * m + a)
        } else {
            d
        }
    }

    /// Label positions `(y_ij, y_ji)`. Undirected dyads repeat the single label.
    #[inline]
    pub fn positions(&self, d: Dyad) -> (usize, usize) {
        if self.directed {
            let m = self.edge.len();
            (d.index() / m, d.index() % m)
        } else {
            (d.index(), d.index())
        }
    }

    /// Edge labels `(y_ij, y_ji)`.
    pub fn labels(&self, d: Dyad) -> (i32, i32) {
        let (a, b) = self.positions(d);
        (self.edge.value(a), self.edge.value(b))
    }

    /// Dyad holding labels `y_ij = forward` and `y_ji = backward`.
    ///
    /// For undirected alphabets both labels must agree.
    pub fn from_labels(&self, forward: i32, backward: i32) -> Result<Dyad> {
        let a = self
            .edge
            .index_of(forward)
            .ok_or(Error::UnknownEdgeValue(forward as i64))?;
        let b = self
            .edge
            .index_of(backward)
            .ok_or(Error::UnknownEdgeValue(backward as i64))?;
        if self.directed {
            Ok(Dyad::new(a * self.edge.len() + b))
        } else if a == b {
            Ok(Dyad::new(a))
        } else {
            Err(Error::InvalidAlphabet(format!(
                "undirected dyad cannot hold {forward} and {backward}"
            )))
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Dyad> + '_ {
        (0..self.size()).map(Dyad::new)
    }
}
