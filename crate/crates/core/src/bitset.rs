//! Dense bitsets and bitset adjacency matrices.

/// A fixed-capacity set of small integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bitset {
    words: Vec<u64>,
    capacity: usize,
}

impl Bitset {
    pub fn new(capacity: usize) -> Self {
        Self {
            words: vec![0; capacity.div_ceil(64)],
            capacity,
        }
    }

    pub fn full(capacity: usize) -> Self {
        let mut s = Self::new(capacity);
        for w in s.words.iter_mut() {
            *w = !0;
        }
        s.trim();
        s
    }

    pub fn from_indices(capacity: usize, items: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::new(capacity);
        for i in items {
            s.insert(i);
        }
        s
    }

    pub(crate) fn from_words(words: Vec<u64>, capacity: usize) -> Self {
        let mut s = Self { words, capacity };
        s.trim();
        s
    }

    fn trim(&mut self) {
        let extra = self.words.len() * 64 - self.capacity;
        if extra > 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= !0u64 >> extra;
            }
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn first(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    /// `self ∩ row`, where `row` is a raw word slice of the same width.
    pub fn and_words(&self, row: &[u64]) -> Bitset {
        Bitset {
            words: self.words.iter().zip(row).map(|(a, b)| a & b).collect(),
            capacity: self.capacity,
        }
    }

    pub fn intersect_with(&mut self, row: &[u64]) {
        for (a, b) in self.words.iter_mut().zip(row) {
            *a &= b;
        }
    }

    pub fn subtract(&mut self, other: &Bitset) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn union_with(&mut self, other: &Bitset) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + b)
            })
        })
    }
}

/// Symmetric adjacency stored as one bitset row per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    n: usize,
    stride: usize,
    bits: Vec<u64>,
}

impl AdjacencyMatrix {
    pub fn new(n: usize) -> Self {
        let stride = n.div_ceil(64);
        Self {
            n,
            stride,
            bits: vec![0; stride * n],
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut m = Self::new(n);
        for (u, v) in edges {
            m.add_edge(u, v);
        }
        m
    }

    /// Builds from per-vertex rows of `stride` words each.
    pub(crate) fn from_rows(n: usize, rows: Vec<Vec<u64>>) -> Self {
        let stride = n.div_ceil(64);
        let mut bits = Vec::with_capacity(stride * n);
        for r in rows {
            debug_assert_eq!(r.len(), stride);
            bits.extend(r);
        }
        Self { n, stride, bits }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u != v, "self-loop {u}");
        self.bits[u * self.stride + v / 64] |= 1 << (v % 64);
        self.bits[v * self.stride + u / 64] |= 1 << (u % 64);
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.stride + v / 64] >> (v % 64) & 1 == 1
    }

    #[inline]
    pub fn row(&self, u: usize) -> &[u64] {
        &self.bits[u * self.stride..(u + 1) * self.stride]
    }

    pub fn neighbors(&self, u: usize) -> Bitset {
        Bitset::from_words(self.row(u).to_vec(), self.n)
    }

    pub fn degree(&self, u: usize) -> usize {
        self.row(u).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|u| self.degree(u)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.bits
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum::<usize>()
            / 2
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
                .collect::<Vec<_>>()
        })
    }

    pub fn is_symmetric_irreflexive(&self) -> bool {
        (0..self.n)
            .all(|u| !self.has_edge(u, u) && self.neighbors(u).iter().all(|v| self.has_edge(v, u)))
    }

    pub fn is_clique(&self, vs: &[usize]) -> bool {
        vs.iter()
            .enumerate()
            .all(|(i, &u)| vs[i + 1..].iter().all(|&v| u != v && self.has_edge(u, v)))
    }

    pub fn is_independent(&self, vs: &[usize]) -> bool {
        vs.iter()
            .enumerate()
            .all(|(i, &u)| vs[i + 1..].iter().all(|&v| !self.has_edge(u, v)))
    }

    /// Every edge of `self` is an edge of `other` (same vertex count).
    pub fn is_subgraph_of(&self, other: &AdjacencyMatrix) -> bool {
        self.n == other.n && self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    /// Relabels vertices so that old vertex `order[i]` becomes `i`.
    pub fn permuted(&self, order: &[usize]) -> AdjacencyMatrix {
        let mut pos = vec![0usize; self.n];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let mut out = AdjacencyMatrix::new(self.n);
        for (i, &v) in order.iter().enumerate() {
            for w in self.neighbors(v).iter() {
                let j = pos[w];
                out.bits[i * out.stride + j / 64] |= 1 << (j % 64);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitset_ops() {
        let mut s = Bitset::new(130);
        for i in [0, 63, 64, 129] {
            s.insert(i);
        }
        assert_eq!(s.len(), 4);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 63, 64, 129]);
        s.remove(0);
        assert_eq!(s.first(), Some(63));
        assert_eq!(Bitset::full(130).len(), 130);
        assert!(Bitset::new(10).is_empty());
    }

    #[test]
    fn triangle() {
        let m = AdjacencyMatrix::from_edges(3, [(0, 1), (1, 2), (0, 2)]);
        assert_eq!(m.edge_count(), 3);
        assert!(m.is_clique(&[0, 1, 2]));
        assert!(m.is_symmetric_irreflexive());
        assert_eq!(m.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (1, 2)]);
        let p = m.permuted(&[2, 0, 1]);
        assert_eq!(p.edge_count(), 3);
    }
}
