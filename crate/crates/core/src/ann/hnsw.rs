//! Hierarchical navigable small-world graph over ℓ2 distance.
//!
//! Construction follows the published HNSW algorithm: exponentially
//! distributed node levels, greedy descent through the upper layers, a
//! beam search of width `ef_construction` per layer, and the diversity
//! heuristic for choosing neighbors. Nodes at layer 0 keep up to `2M` links,
//! upper layers `M`.
//!
//! Updates replace a node's vector in place and re-derive its out-edges by
//! re-running the insertion search from the entry point. Edges other nodes
//! hold towards the moved node are left as they are: distances are never
//! cached on edges, so every traversal measures the node where it now sits.
//!
//! All orderings break distance ties by the smaller [`SampleId`].

use std::cmp::{Ordering, Reverse};
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};

use rand::Rng as _;

use super::distance::l2_sq;
use crate::error::{Error, Result};
use crate::rng;
use crate::types::SampleId;

const MAX_LEVEL: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct HnswParams {
    /// Max links per node on upper layers; layer 0 allows `2 * m`.
    pub m: usize,
    pub ef_construction: usize,
    pub ef_search: usize,
    /// Add the candidates' own neighbors to the pool before applying the heuristic.
    pub extend_candidates: bool,
    /// Top up the heuristic's picks with pruned candidates until `m` links.
    pub keep_pruned: bool,
    /// Rebuild the index from scratch every epoch instead of updating in place.
    pub rebuild_each_epoch: bool,
}

impl Default for HnswParams {
    fn default() -> Self {
        Self {
            m: 16,
            ef_construction: 200,
            ef_search: 128,
            extend_candidates: false,
            keep_pruned: false,
            rebuild_each_epoch: false,
        }
    }
}

/// Work done by one query.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryStats {
    pub distance_evaluations: u64,
}

#[derive(Debug, Clone, Copy)]
struct Cand {
    /// Squared distance to the query.
    dist: f32,
    id: u32,
    slot: u32,
}

impl PartialEq for Cand {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Cand {}

impl PartialOrd for Cand {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cand {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist.total_cmp(&other.dist).then(self.id.cmp(&other.id))
    }
}

struct Visited(Vec<u64>);

impl Visited {
    fn new(n: usize) -> Self {
        Visited(vec![0; n.div_ceil(64)])
    }

    /// Returns true when `slot` was not yet marked.
    #[inline]
    fn insert(&mut self, slot: u32) -> bool {
        let (w, b) = ((slot / 64) as usize, slot % 64);
        let fresh = self.0[w] & (1 << b) == 0;
        self.0[w] |= 1 << b;
        fresh
    }
}

#[derive(Debug, Clone)]
pub struct HnswIndex {
    params: HnswParams,
    dim: usize,
    level_mult: f64,
    seed: u64,
    inserted: u64,
    vectors: Vec<f32>,
    ids: Vec<SampleId>,
    slots: HashMap<SampleId, u32>,
    levels: Vec<u8>,
    /// `links[slot][layer]` holds neighbor slots.
    links: Vec<Vec<Vec<u32>>>,
    entry: Option<u32>,
    max_level: usize,
}

impl HnswIndex {
    pub fn new(dim: usize, params: HnswParams, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::out_of_range("dimension", "index needs d >= 1"));
        }
        if params.m < 2 {
            return Err(Error::out_of_range("hnsw.M", "must be at least 2"));
        }
        if params.ef_construction == 0 {
            return Err(Error::out_of_range("hnsw.ef_construction", "must be at least 1"));
        }
        let level_mult = 1.0 / (params.m as f64).ln();
        Ok(Self {
            params,
            dim,
            level_mult,
            seed,
            inserted: 0,
            vectors: Vec::new(),
            ids: Vec::new(),
            slots: HashMap::new(),
            levels: Vec::new(),
            links: Vec::new(),
            entry: None,
            max_level: 0,
        })
    }

    /// Insert rows `0..n` of a row-major matrix with ids `0..n`.
    pub fn build<'a>(
        dim: usize,
        rows: impl IntoIterator<Item = &'a [f32]>,
        params: HnswParams,
        seed: u64,
    ) -> Result<Self> {
        let mut index = Self::new(dim, params, seed)?;
        for (i, row) in rows.into_iter().enumerate() {
            index.insert(SampleId::from(i), row)?;
        }
        Ok(index)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &HnswParams {
        &self.params
    }

    pub fn max_level(&self) -> usize {
        self.max_level
    }

    pub fn entry_point(&self) -> Option<SampleId> {
        self.entry.map(|s| self.ids[s as usize])
    }

    pub fn contains(&self, id: SampleId) -> bool {
        self.slots.contains_key(&id)
    }

    pub fn ids(&self) -> &[SampleId] {
        &self.ids
    }

    pub fn vector(&self, id: SampleId) -> Option<&[f32]> {
        self.slots.get(&id).map(|&s| self.vec_at(s))
    }

    pub fn level_of(&self, id: SampleId) -> Option<usize> {
        self.slots.get(&id).map(|&s| self.levels[s as usize] as usize)
    }

    /// Neighbor ids of `id` at `layer`, in stored order.
    pub fn neighbors(&self, id: SampleId, layer: usize) -> Option<Vec<SampleId>> {
        let slot = *self.slots.get(&id)? as usize;
        let layers = &self.links[slot];
        (layer < layers.len()).then(|| layers[layer].iter().map(|&s| self.ids[s as usize]).collect())
    }

    pub fn max_links(&self, layer: usize) -> usize {
        if layer == 0 {
            2 * self.params.m
        } else {
            self.params.m
        }
    }

    #[inline]
    fn vec_at(&self, slot: u32) -> &[f32] {
        let s = slot as usize * self.dim;
        &self.vectors[s..s + self.dim]
    }

    #[inline]
    fn cand(&self, query: &[f32], slot: u32) -> Cand {
        Cand { dist: l2_sq(query, self.vec_at(slot)), id: self.ids[slot as usize].0, slot }
    }

    fn check_dim(&self, v: &[f32]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: v.len() });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("index vector"));
        }
        Ok(())
    }

    fn draw_level(&self) -> usize {
        let mut r = rng::stream(self.seed, &[rng::tag::HNSW_LEVELS, self.inserted]);
        let u: f64 = 1.0 - r.random::<f64>();
        ((-u.ln() * self.level_mult).floor() as usize).min(MAX_LEVEL)
    }

    fn greedy(&self, query: &[f32], mut cur: Cand, layer: usize, evals: &mut u64) -> Cand {
        loop {
            let mut moved = false;
            for &nb in &self.links[cur.slot as usize][layer] {
                *evals += 1;
                let c = self.cand(query, nb);
                if c < cur {
                    cur = c;
                    moved = true;
                }
            }
            if !moved {
                return cur;
            }
        }
    }

    /// Beam search at one layer. Only slots passing `accept` enter the result
    /// set; rejected slots are still traversed. Returns ascending order.
    fn search_layer(
        &self,
        query: &[f32],
        entries: &[Cand],
        ef: usize,
        layer: usize,
        accept: &dyn Fn(u32) -> bool,
        evals: &mut u64,
    ) -> Vec<Cand> {
        let mut visited = Visited::new(self.ids.len());
        let mut frontier: BinaryHeap<Reverse<Cand>> = BinaryHeap::new();
        let mut best: BinaryHeap<Cand> = BinaryHeap::new();
        for &e in entries {
            if visited.insert(e.slot) {
                frontier.push(Reverse(e));
                if accept(e.slot) {
                    best.push(e);
                }
            }
        }
        while best.len() > ef {
            best.pop();
        }
        while let Some(Reverse(c)) = frontier.pop() {
            if best.len() >= ef && best.peek().is_some_and(|worst| c > *worst) {
                break;
            }
            for &nb in &self.links[c.slot as usize][layer] {
                if !visited.insert(nb) {
                    continue;
                }
                *evals += 1;
                let cand = self.cand(query, nb);
                let admit = best.len() < ef || best.peek().is_some_and(|worst| cand < *worst);
                if admit {
                    frontier.push(Reverse(cand));
                    if accept(nb) {
                        best.push(cand);
                        if best.len() > ef {
                            best.pop();
                        }
                    }
                }
            }
        }
        best.into_sorted_vec()
    }

    /// Diversity heuristic: keep a candidate only if it is closer to the base
    /// point than to every neighbor already kept.
    fn select_neighbors(
        &self,
        base_slot: u32,
        base: &[f32],
        mut pool: Vec<Cand>,
        m: usize,
        layer: usize,
    ) -> Vec<Cand> {
        if self.params.extend_candidates {
            let mut seen: std::collections::HashSet<u32> = pool.iter().map(|c| c.slot).collect();
            seen.insert(base_slot);
            let extra: Vec<u32> = pool
                .iter()
                .flat_map(|c| self.links[c.slot as usize][layer].iter().copied())
                .collect();
            for s in extra {
                if seen.insert(s) {
                    pool.push(self.cand(base, s));
                }
            }
        }
        pool.sort_unstable();
        if pool.len() <= m && !self.params.extend_candidates {
            return pool;
        }
        let mut kept: Vec<Cand> = Vec::with_capacity(m);
        let mut pruned = Vec::new();
        for c in pool {
            if kept.len() >= m {
                break;
            }
            let v = self.vec_at(c.slot);
            let diverse = kept.iter().all(|k| l2_sq(v, self.vec_at(k.slot)) >= c.dist);
            if diverse {
                kept.push(c);
            } else {
                pruned.push(c);
            }
        }
        if self.params.keep_pruned {
            for c in pruned {
                if kept.len() >= m {
                    break;
                }
                kept.push(c);
            }
        }
        kept
    }

    /// Add the edge `from -> to` at `layer`, shrinking `from`'s list when it
    /// exceeds the layer cap.
    fn link(&mut self, from: u32, to: u32, layer: usize) {
        if from == to || self.links[from as usize][layer].contains(&to) {
            return;
        }
        let cap = self.max_links(layer);
        self.links[from as usize][layer].push(to);
        if self.links[from as usize][layer].len() <= cap {
            return;
        }
        let base = self.vec_at(from).to_vec();
        let pool: Vec<Cand> = self.links[from as usize][layer].iter().map(|&s| self.cand(&base, s)).collect();
        let kept = self.select_neighbors(from, &base, pool, cap, layer);
        self.links[from as usize][layer] = kept.into_iter().map(|c| c.slot).collect();
    }

    /// Search from the entry point for the out-edges of `slot` at each of its
    /// layers, then link both directions.
    fn connect(&mut self, slot: u32, level: usize) {
        let Some(entry) = self.entry else { return };
        let query = self.vec_at(slot).to_vec();
        let not_self = move |s: u32| s != slot;
        let mut evals = 0;
        let mut cur = self.cand(&query, entry);
        for layer in (level + 1..=self.max_level).rev() {
            cur = self.greedy(&query, cur, layer, &mut evals);
        }
        let mut entries = vec![cur];
        for layer in (0..=level.min(self.max_level)).rev() {
            let found = self.search_layer(
                &query,
                &entries,
                self.params.ef_construction,
                layer,
                &not_self,
                &mut evals,
            );
            let chosen = self.select_neighbors(slot, &query, found.clone(), self.params.m, layer);
            self.links[slot as usize][layer] = chosen.iter().map(|c| c.slot).collect();
            for c in &chosen {
                self.link(c.slot, slot, layer);
            }
            if !found.is_empty() {
                entries = found;
            }
        }
    }

    pub fn insert(&mut self, id: SampleId, vector: &[f32]) -> Result<()> {
        self.check_dim(vector)?;
        let slot = match self.slots.entry(id) {
            Entry::Occupied(_) => return Err(Error::DuplicateId(id)),
            Entry::Vacant(v) => *v.insert(self.ids.len() as u32),
        };
        let level = self.draw_level();
        self.inserted += 1;
        self.vectors.extend_from_slice(vector);
        self.ids.push(id);
        self.levels.push(level as u8);
        self.links.push(vec![Vec::new(); level + 1]);

        if self.entry.is_none() {
            self.entry = Some(slot);
            self.max_level = level;
            return Ok(());
        }
        self.connect(slot, level);
        if level > self.max_level {
            self.max_level = level;
            self.entry = Some(slot);
        }
        Ok(())
    }

    /// Move `id` to `vector`. The node keeps its level; its out-edges are
    /// recomputed and in-edges from other nodes are kept.
    pub fn update(&mut self, id: SampleId, vector: &[f32]) -> Result<()> {
        self.check_dim(vector)?;
        let slot = *self.slots.get(&id).ok_or(Error::UnknownId(id))?;
        if self.vec_at(slot) == vector {
            return Ok(());
        }
        let start = slot as usize * self.dim;
        self.vectors[start..start + self.dim].copy_from_slice(vector);
        if self.ids.len() == 1 {
            return Ok(());
        }
        let level = self.levels[slot as usize] as usize;
        self.connect(slot, level);
        Ok(())
    }

    /// Insert `id` or move it if already present.
    pub fn upsert(&mut self, id: SampleId, vector: &[f32]) -> Result<()> {
        if self.contains(id) {
            self.update(id, vector)
        } else {
            self.insert(id, vector)
        }
    }

    /// The `k` nearest stored points to `vector`, ascending by distance.
    pub fn query(&self, vector: &[f32], k: usize, ef: usize) -> Result<(Vec<(SampleId, f32)>, QueryStats)> {
        self.query_filtered(vector, k, ef, |_| true)
    }

    /// Like [`query`](Self::query) but only ids passing `accept` are returned.
    /// Rejected nodes still route the search.
    pub fn query_filtered(
        &self,
        vector: &[f32],
        k: usize,
        ef: usize,
        accept: impl Fn(SampleId) -> bool,
    ) -> Result<(Vec<(SampleId, f32)>, QueryStats)> {
        let entry = self.entry.ok_or(Error::EmptyIndex)?;
        if k == 0 {
            return Err(Error::out_of_range("k", "must be at least 1"));
        }
        if ef < k {
            return Err(Error::out_of_range("ef_search", format!("{ef} is smaller than k = {k}")));
        }
        self.check_dim(vector)?;
        let mut evals = 1;
        let mut cur = self.cand(vector, entry);
        for layer in (1..=self.max_level).rev() {
            cur = self.greedy(vector, cur, layer, &mut evals);
        }
        let accept_slot = |s: u32| accept(self.ids[s as usize]);
        let found = self.search_layer(vector, &[cur], ef, 0, &accept_slot, &mut evals);
        let out = found
            .into_iter()
            .take(k)
            .map(|c| (SampleId(c.id), c.dist.sqrt()))
            .collect();
        Ok((out, QueryStats { distance_evaluations: evals }))
    }

    /// k nearest neighbors of a stored point, excluding the point itself.
    pub fn neighbors_of(&self, id: SampleId, k: usize, ef: usize) -> Result<Vec<(SampleId, f32)>> {
        let v = self.vector(id).ok_or(Error::UnknownId(id))?.to_vec();
        let (hits, _) = self.query_filtered(&v, k, ef.max(k), |other| other != id)?;
        Ok(hits)
    }

    /// Structural checks: every edge endpoint exists and lives on that
    /// layer, no self-loops or duplicate edges, degrees within caps, and the
    /// entry point sits on the top layer.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.ids.len();
        let fail = |msg: String| Err(Error::Invalid(msg));
        for (slot, layers) in self.links.iter().enumerate() {
            if layers.len() != self.levels[slot] as usize + 1 {
                return fail(format!("slot {slot}: layer count disagrees with level"));
            }
            for (layer, nbs) in layers.iter().enumerate() {
                if nbs.len() > self.max_links(layer) {
                    return fail(format!("slot {slot} layer {layer}: degree {} over cap", nbs.len()));
                }
                let mut sorted = nbs.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != nbs.len() {
                    return fail(format!("slot {slot} layer {layer}: duplicate edge"));
                }
                for &nb in nbs {
                    if nb as usize >= n {
                        return fail(format!("slot {slot}: dangling edge to {nb}"));
                    }
                    if nb as usize == slot {
                        return fail(format!("slot {slot}: self edge"));
                    }
                    if (self.levels[nb as usize] as usize) < layer {
                        return fail(format!("slot {slot}: edge to {nb} above its level"));
                    }
                }
            }
        }
        if let Some(e) = self.entry {
            if self.levels[e as usize] as usize != self.max_level {
                return fail("entry point is not on the top layer".into());
            }
        } else if n > 0 {
            return fail("non-empty index without entry point".into());
        }
        Ok(())
    }

    pub(crate) fn raw_parts(&self) -> RawParts<'_> {
        RawParts {
            params: &self.params,
            dim: self.dim,
            seed: self.seed,
            inserted: self.inserted,
            vectors: &self.vectors,
            ids: &self.ids,
            levels: &self.levels,
            links: &self.links,
            entry: self.entry,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_raw_parts(
        params: HnswParams,
        dim: usize,
        seed: u64,
        inserted: u64,
        vectors: Vec<f32>,
        ids: Vec<SampleId>,
        levels: Vec<u8>,
        links: Vec<Vec<Vec<u32>>>,
        entry: Option<u32>,
    ) -> Result<Self> {
        let mut index = Self::new(dim, params, seed)?;
        index.inserted = inserted;
        for (slot, &id) in ids.iter().enumerate() {
            if index.slots.insert(id, slot as u32).is_some() {
                return Err(Error::DuplicateId(id));
            }
        }
        index.max_level = entry.map_or(0, |e| levels.get(e as usize).copied().unwrap_or(0) as usize);
        index.vectors = vectors;
        index.ids = ids;
        index.levels = levels;
        index.links = links;
        index.entry = entry;
        if index.vectors.len() != index.ids.len() * dim
            || index.levels.len() != index.ids.len()
            || index.links.len() != index.ids.len()
            || entry.is_some_and(|e| e as usize >= index.ids.len())
        {
            return Err(Error::Invalid("inconsistent index snapshot".into()));
        }
        index.check_invariants()?;
        Ok(index)
    }
}

pub(crate) struct RawParts<'a> {
    pub params: &'a HnswParams,
    pub dim: usize,
    pub seed: u64,
    pub inserted: u64,
    pub vectors: &'a [f32],
    pub ids: &'a [SampleId],
    pub levels: &'a [u8],
    pub links: &'a [Vec<Vec<u32>>],
    pub entry: Option<u32>,
}
