use semisort_core::{semisort, ForkJoin, IntKey, Mode, Record, TuningParams};

use crate::{Error, Result};

/// Directed graph in compressed sparse row form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsrGraph {
    /// `n + 1` nondecreasing positions into `targets`.
    pub offsets: Vec<usize>,
    pub targets: Vec<u32>,
}

impl CsrGraph {
    pub fn n(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn m(&self) -> usize {
        self.targets.len()
    }

    pub fn neighbors(&self, u: usize) -> &[u32] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    /// Build from an edge list, keeping each source's edges in list order.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for &(u, _) in edges {
            offsets[u as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut targets = vec![0u32; edges.len()];
        for &(u, v) in edges {
            targets[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
        }
        Self { offsets, targets }
    }

    /// Edges in CSR order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.n()).flat_map(move |u| self.neighbors(u).iter().map(move |&v| (u as u32, v)))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |why: String| Err(Error::Format(format!("malformed CSR: {why}")));
        if self.offsets.is_empty() {
            return bad("missing offsets".into());
        }
        if self.offsets[0] != 0 {
            return bad("offsets[0] != 0".into());
        }
        if let Some(i) = self.offsets.windows(2).position(|w| w[0] > w[1]) {
            return bad(format!("offsets decrease at vertex {i}"));
        }
        if *self.offsets.last().unwrap() != self.m() {
            return bad(format!("offsets[n] = {} but m = {}", self.offsets.last().unwrap(), self.m()));
        }
        let n = self.n();
        if let Some(t) = self.targets.iter().find(|&&t| t as usize >= n) {
            return bad(format!("target {t} out of range for n = {n}"));
        }
        Ok(())
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n()];
        for &t in &self.targets {
            d[t as usize] += 1;
        }
        d
    }
}

/// Reverse every edge.
///
/// Edges become `(target, source)` records that are semisorted on the target
/// with identity hashing; the record runs then become adjacency lists. CSR
/// order emits sources in ascending order and the semisort is stable, so each
/// transposed adjacency list is ascending.
pub fn transpose<E: ForkJoin + ?Sized>(exec: &E, g: &CsrGraph, params: &TuningParams) -> Result<CsrGraph> {
    g.validate()?;
    let n = g.n();
    let mut pairs: Vec<Record<u32, u32>> = g.edges().map(|(u, v)| Record::new(v, u)).collect();
    semisort(exec, &mut pairs, &IntKey::IDENTITY, Mode::Eq, params)?;

    // runs of equal targets, in semisort order
    let mut offsets = vec![0usize; n + 1];
    let mut runs: Vec<(u32, usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=pairs.len() {
        if i == pairs.len() || pairs[i].key != pairs[start].key {
            let v = pairs[start].key;
            runs.push((v, start, i - start));
            offsets[v as usize + 1] += i - start;
            start = i;
        }
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut targets = vec![0u32; pairs.len()];
    for &(v, s, len) in &runs {
        let at = offsets[v as usize];
        let dst = &mut targets[at..at + len];
        debug_assert!(dst.iter().all(|&t| t == 0), "target {v} split across runs");
        for (d, p) in dst.iter_mut().zip(&pairs[s..s + len]) {
            *d = p.value;
        }
    }
    Ok(CsrGraph { offsets, targets })
}

/// Sequential counting transpose, for checking [`transpose`].
pub fn transpose_oracle(g: &CsrGraph) -> CsrGraph {
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); g.n()];
    for (u, v) in g.edges() {
        buckets[v as usize].push(u);
    }
    let mut offsets = Vec::with_capacity(g.n() + 1);
    offsets.push(0);
    let mut targets = Vec::with_capacity(g.m());
    for b in buckets {
        targets.extend(b);
        offsets.push(targets.len());
    }
    CsrGraph { offsets, targets }
}

#[cfg(test)]
mod tests {
    use super::*;
    use semisort_core::Sequential;

    fn params() -> TuningParams {
        TuningParams { alpha: 64, light_bits: 3, subarray_len: Some(16), ..Default::default() }
    }

    #[test]
    fn two_cycle_is_self_transpose() {
        let g = CsrGraph::from_edges(2, &[(0, 1), (1, 0)]);
        assert_eq!(transpose(&Sequential, &g, &params()).unwrap(), g);
    }

    #[test]
    fn star_reverses() {
        let k = 500u32;
        let edges: Vec<_> = (1..=k).map(|i| (0, i)).collect();
        let g = CsrGraph::from_edges(k as usize + 1, &edges);
        let t = transpose(&Sequential, &g, &params()).unwrap();
        assert_eq!(t.m(), k as usize);
        assert!(t.neighbors(0).is_empty());
        for i in 1..=k as usize {
            assert_eq!(t.neighbors(i), &[0]);
        }
    }

    #[test]
    fn empty_and_isolated() {
        let g = CsrGraph::from_edges(0, &[]);
        assert_eq!(transpose(&Sequential, &g, &params()).unwrap(), g);
        let g = CsrGraph::from_edges(5, &[(4, 4)]);
        assert_eq!(transpose(&Sequential, &g, &params()).unwrap(), g);
    }

    #[test]
    fn malformed_input_is_rejected() {
        let bad = CsrGraph { offsets: vec![0, 2, 1], targets: vec![0] };
        assert!(transpose(&Sequential, &bad, &params()).is_err());
        let bad = CsrGraph { offsets: vec![0, 1], targets: vec![3] };
        assert!(transpose(&Sequential, &bad, &params()).is_err());
        let bad = CsrGraph { offsets: vec![1, 1], targets: vec![] };
        assert!(bad.validate().is_err());
    }
}
