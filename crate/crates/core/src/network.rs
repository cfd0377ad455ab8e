//! Sparse storage of discrete-valued networks.
//!
//! Only nonbaseline dyads are kept. Each is stored once under its `(i, j)`
//! key with `i < j`, oriented as `(y_ij, y_ji)`. A per-node adjacency index
//! repeats every dyad from both endpoints, oriented from the owning node, so
//! that the E-step can walk the neighbours of a node in `O(deg)`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::alphabet::{Dyad, DyadAlphabet};
use crate::{Error, Result};

/// A stored nonbaseline dyad `(y_ij, y_ji)` with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadEntry {
    pub i: u32,
    pub j: u32,
    pub dyad: Dyad,
}

/// A neighbour of some node `i`, with the dyad oriented as `(y_i·, y_·i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub node: u32,
    pub dyad: Dyad,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseNetwork {
    n: usize,
    alphabet: DyadAlphabet,
    pairs: Vec<DyadEntry>,
    offsets: Vec<usize>,
    adjacency: Vec<Neighbor>,
    node_labels: Option<Vec<String>>,
}

impl SparseNetwork {
    pub fn empty(n: usize, alphabet: DyadAlphabet) -> Self {
        Self {
            n,
            alphabet,
            pairs: Vec::new(),
            offsets: vec![0; n + 1],
            adjacency: Vec::new(),
            node_labels: None,
        }
    }

    /// Builds a network from `(i, j, d)` triples where `d` is oriented as `(y_ij, y_ji)`.
    ///
    /// Triples with `i > j` are flipped and transposed. Baseline triples are
    /// dropped. A pair given twice is an error, as is `i == j`.
    pub fn from_dyads<I>(n: usize, alphabet: DyadAlphabet, dyads: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Dyad)>,
    {
        let baseline = alphabet.baseline();
        let mut pairs = Vec::new();
        for (i, j, d) in dyads {
            for node in [i, j] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if d.index() >= alphabet.size() {
                return Err(Error::DimensionMismatch(alloc::format!(
                    "dyad index {} outside alphabet of size {}",
                    d.index(),
                    alphabet.size()
                )));
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            let (i, j, d) = if i < j { (i, j, d) } else { (j, i, alphabet.transpose(d)) };
            if d != baseline {
                pairs.push(DyadEntry { i: i as u32, j: j as u32, dyad: d });
            }
        }
        Self::from_sorted_or_unsorted(n, alphabet, pairs)
    }

    fn from_sorted_or_unsorted(
        n: usize,
        alphabet: DyadAlphabet,
        mut pairs: Vec<DyadEntry>,
    ) -> Result<Self> {
        pairs.sort_unstable_by_key(|e| (e.i, e.j));
        if let Some(w) = pairs.windows(2).find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return Err(Error::DuplicateDyad { i: w[0].i as usize, j: w[0].j as usize });
        }

        let mut degree = vec![0usize; n];
        for e in &pairs {
            degree[e.i as usize] += 1;
            degree[e.j as usize] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + degree[v];
        }
        let mut cursor = offsets.clone();
        let mut adjacency = vec![Neighbor { node: 0, dyad: Dyad::new(0) }; 2 * pairs.len()];
        for e in &pairs {
            let (i, j) = (e.i as usize, e.j as usize);
            adjacency[cursor[i]] = Neighbor { node: e.j, dyad: e.dyad };
            cursor[i] += 1;
            adjacency[cursor[j]] = Neighbor { node: e.i, dyad: alphabet.transpose(e.dyad) };
            cursor[j] += 1;
        }
        for v in 0..n {
            adjacency[offsets[v]..offsets[v + 1]].sort_unstable_by_key(|nb| nb.node);
        }

        Ok(Self { n, alphabet, pairs, offsets, adjacency, node_labels: None })
    }

    pub fn with_node_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::DimensionMismatch(alloc::format!(
                "{} labels for {} nodes",
                labels.len(),
                self.n
            )));
        }
        self.node_labels = Some(labels);
        Ok(self)
    }

    pub fn node_labels(&self) -> Option<&[String]> {
        self.node_labels.as_deref()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> &DyadAlphabet {
        &self.alphabet
    }

    /// Stored nonbaseline dyads, sorted by `(i, j)`.
    pub fn pairs(&self) -> &[DyadEntry] {
        &self.pairs
    }

    /// Number of nonbaseline dyads, `f(n)`.
    pub fn nonbaseline_count(&self) -> usize {
        self.pairs.len()
    }

    /// Number of node pairs `n(n-1)/2`.
    pub fn pair_count(&self) -> u64 {
        let n = self.n as u64;
        n * n.saturating_sub(1) / 2
    }

    /// Number of edge variables: `n(n-1)` directed, `n(n-1)/2` undirected.
    pub fn edge_variable_count(&self) -> u64 {
        if self.alphabet.is_directed() {
            2 * self.pair_count()
        } else {
            self.pair_count()
        }
    }

    pub fn neighbors(&self, i: usize) -> &[Neighbor] {
        &self.adjacency[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    /// The dyad `(y_ij, y_ji)`; the baseline when absent or `i == j`.
    pub fn dyad(&self, i: usize, j: usize) -> Dyad {
        if i == j {
            return self.alphabet.baseline();
        }
        let nb = self.neighbors(i);
        match nb.binary_search_by_key(&(j as u32), |x| x.node) {
            Ok(pos) => nb[pos].dyad,
            Err(_) => self.alphabet.baseline(),
        }
    }

    /// The edge label `y_ij`.
    pub fn edge_value(&self, i: usize, j: usize) -> i32 {
        self.alphabet.labels(self.dyad(i, j)).0
    }

    /// Every nonzero edge variable as `(i, j, y_ij)`, sorted by `(i, j)`.
    ///
    /// Undirected networks yield each pair once with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize, i32)> {
        let zero = self.alphabet.edge_alphabet().zero_label();
        let mut out = Vec::with_capacity(2 * self.pairs.len());
        for i in 0..self.n {
            for nb in self.neighbors(i) {
                let j = nb.node as usize;
                if !self.alphabet.is_directed() && j < i {
                    continue;
                }
                let v = self.alphabet.labels(nb.dyad).0;
                if v != zero {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// Incoming positive minus incoming negative ratings, `e_i(y) = Σ_{j≠i} y_ji`.
    pub fn excess_trust(&self, i: usize) -> Result<i64> {
        if !self.alphabet.edge_alphabet().is_signed() {
            return Err(Error::UnsupportedStatistic("excess trust"));
        }
        if i >= self.n {
            return Err(Error::NodeOutOfRange { node: i, n: self.n });
        }
        Ok(self
            .neighbors(i)
            .iter()
            .map(|nb| self.alphabet.labels(nb.dyad).1 as i64)
            .sum())
    }

    pub fn excess_trust_all(&self) -> Result<Vec<i64>> {
        (0..self.n).map(|i| self.excess_trust(i)).collect()
    }

    /// Moves node `i` to `permutation[i]`.
    pub fn relabel(&self, permutation: &[usize]) -> Result<Self> {
        if permutation.len() != self.n {
            return Err(Error::DimensionMismatch(alloc::format!(
                "permutation of length {} for {} nodes",
                permutation.len(),
                self.n
            )));
        }
        let triples = self
            .pairs
            .iter()
            .map(|e| (permutation[e.i as usize], permutation[e.j as usize], e.dyad));
        let mut net = Self::from_dyads(self.n, self.alphabet.clone(), triples)?;
        if let Some(labels) = &self.node_labels {
            let mut moved = vec![String::new(); self.n];
            for (i, label) in labels.iter().enumerate() {
                moved[permutation[i]] = label.clone();
            }
            net.node_labels = Some(moved);
        }
        Ok(net)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::EdgeAlphabet;

    fn signed() -> DyadAlphabet {
        DyadAlphabet::directed(EdgeAlphabet::signed())
    }

    #[test]
    fn lookup_absent_is_baseline_and_transpose_holds() {
        let a = signed();
        let d = a.from_labels(1, -1).unwrap();
        let net = SparseNetwork::from_dyads(4, a.clone(), [(2, 0, d)]).unwrap();
        assert_eq!(net.dyad(2, 0), d);
        assert_eq!(net.dyad(0, 2), a.transpose(d));
        assert_eq!(net.dyad(1, 3), a.baseline());
        assert_eq!(net.pairs()[0].i, 0);
        assert_eq!(net.edge_value(2, 0), 1);
        assert_eq!(net.edge_value(0, 2), -1);
    }

    #[test]
    fn baseline_entries_are_not_stored() {
        let a = signed();
        let net = SparseNetwork::from_dyads(3, a.clone(), [(0, 1, a.baseline())]).unwrap();
        assert_eq!(net.nonbaseline_count(), 0);
    }

    #[test]
    fn duplicates_and_self_loops_rejected() {
        let a = signed();
        let d = a.from_labels(1, 0).unwrap();
        let err = SparseNetwork::from_dyads(3, a.clone(), [(0, 1, d), (1, 0, d)]).unwrap_err();
        assert_eq!(err, Error::DuplicateDyad { i: 0, j: 1 });
        assert_eq!(
            SparseNetwork::from_dyads(3, a.clone(), [(1, 1, d)]).unwrap_err(),
            Error::SelfLoop(1)
        );
        assert!(matches!(
            SparseNetwork::from_dyads(3, a, [(0, 3, d)]),
            Err(Error::NodeOutOfRange { node: 3, n: 3 })
        ));
    }

    #[test]
    fn excess_trust_definition() {
        let a = signed();
        // node 3 receives +1 from 0, +1 from 1, -1 from 2.
        let net = SparseNetwork::from_dyads(
            5,
            a.clone(),
            [
                (0, 3, a.from_labels(1, 0).unwrap()),
                (1, 3, a.from_labels(1, -1).unwrap()),
                (3, 2, a.from_labels(1, -1).unwrap()),
            ],
        )
        .unwrap();
        assert_eq!(net.excess_trust(3).unwrap(), 1);
        assert_eq!(net.excess_trust(4).unwrap(), 0);
        assert_eq!(net.excess_trust(2).unwrap(), 1);
        assert_eq!(net.excess_trust(1).unwrap(), -1);

        let binary = SparseNetwork::empty(2, DyadAlphabet::directed(EdgeAlphabet::binary()));
        assert_eq!(binary.excess_trust(0), Err(Error::UnsupportedStatistic("excess trust")));
    }

    #[test]
    fn relabel_moves_dyads_and_labels() {
        let a = signed();
        let d = a.from_labels(1, -1).unwrap();
        let net = SparseNetwork::from_dyads(3, a.clone(), [(0, 1, d)])
            .unwrap()
            .with_node_labels(alloc::vec!["a".into(), "b".into(), "c".into()])
            .unwrap();
        let moved = net.relabel(&[2, 0, 1]).unwrap();
        assert_eq!(moved.dyad(2, 0), d);
        assert_eq!(moved.node_labels().unwrap()[2], "a");
    }

    #[test]
    fn edges_lists_each_direction() {
        let a = signed();
        let net =
            SparseNetwork::from_dyads(2, a.clone(), [(0, 1, a.from_labels(1, -1).unwrap())]).unwrap();
        assert_eq!(net.edges(), alloc::vec![(0, 1, 1), (1, 0, -1)]);
        let u = DyadAlphabet::undirected(EdgeAlphabet::binary());
        let net = SparseNetwork::from_dyads(3, u.clone(), [(2, 1, u.from_labels(1, 1).unwrap())])
            .unwrap();
        assert_eq!(net.edges(), alloc::vec![(1, 2, 1)]);
    }
}
