//! Connected features (cities, roads, fields, monasteries) as a union-find
//! forest over tile feature slots.

use super::tiles::FeatureKind;
use crate::game::PlayerId;

/// Aggregate of one connected feature; only meaningful at a root.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Segment {
    pub kind: FeatureKind,
    pub meeples: [u8; 2],
    /// Unmatched sides for cities and roads; empty surrounding cells for a monastery.
    pub open: u8,
    pub pennants: u8,
    /// Bit `i` set when placement `i` contributes to the feature.
    pub tiles: u128,
    size: u16,
}

impl Segment {
    pub fn new(kind: FeatureKind, tile_index: usize, pennant: bool, open: u8) -> Self {
        Segment {
            kind,
            meeples: [0, 0],
            open,
            pennants: u8::from(pennant),
            tiles: 1u128 << tile_index,
            size: 1,
        }
    }

    pub fn tile_count(&self) -> u32 {
        self.tiles.count_ones()
    }

    pub fn is_complete(&self) -> bool {
        self.kind != FeatureKind::Field && self.open == 0
    }

    pub fn meeple_count(&self) -> u32 {
        self.meeples[0] as u32 + self.meeples[1] as u32
    }

    pub fn has_meeple_of(&self, p: PlayerId) -> bool {
        self.meeples[p.index()] > 0
    }

    /// Players holding the most meeples; empty when nobody is on the feature.
    pub fn majority(&self) -> Vec<PlayerId> {
        let top = self.meeples[0].max(self.meeples[1]);
        if top == 0 {
            return Vec::new();
        }
        PlayerId::BOTH
            .into_iter()
            .filter(|p| self.meeples[p.index()] == top)
            .collect()
    }
}

#[derive(Clone, Debug, Default)]
pub struct FeatureGraph {
    parent: Vec<u16>,
    data: Vec<Segment>,
}

impl FeatureGraph {
    pub fn new() -> Self {
        FeatureGraph {
            parent: Vec::with_capacity(256),
            data: Vec::with_capacity(256),
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn push(&mut self, seg: Segment) -> usize {
        let id = self.parent.len();
        self.parent.push(id as u16);
        self.data.push(seg);
        id
    }

    /// Root lookup without path compression.
    #[inline]
    pub fn find(&self, mut id: usize) -> usize {
        while self.parent[id] as usize != id {
            id = self.parent[id] as usize;
        }
        id
    }

    #[inline]
    pub fn find_mut(&mut self, mut id: usize) -> usize {
        while self.parent[id] as usize != id {
            let grand = self.parent[self.parent[id] as usize];
            self.parent[id] = grand;
            id = grand as usize;
        }
        id
    }

    pub fn segment(&self, id: usize) -> &Segment {
        &self.data[self.find(id)]
    }

    pub(crate) fn root_mut(&mut self, id: usize) -> &mut Segment {
        let r = self.find_mut(id);
        &mut self.data[r]
    }

    /// Joins two slots across a shared edge. For cities and roads the shared
    /// edge closes one open side on each part.
    pub fn join(&mut self, a: usize, b: usize, closes_edge: bool) -> usize {
        let ra = self.find_mut(a);
        let rb = self.find_mut(b);
        if ra == rb {
            if closes_edge {
                self.data[ra].open -= 2;
            }
            return ra;
        }
        let (big, small) = if self.data[ra].size >= self.data[rb].size { (ra, rb) } else { (rb, ra) };
        let s = self.data[small];
        let d = &mut self.data[big];
        debug_assert_eq!(d.kind, s.kind);
        d.meeples[0] += s.meeples[0];
        d.meeples[1] += s.meeples[1];
        d.pennants += s.pennants;
        d.tiles |= s.tiles;
        d.size += s.size;
        d.open += s.open;
        if closes_edge {
            d.open -= 2;
        }
        self.parent[small] = big as u16;
        big
    }

    /// Ids of every root.
    pub fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.parent.len()).filter(move |&i| self.parent[i] as usize == i)
    }

    /// Canonical partition: each feature as its sorted member list, features sorted.
    pub fn partition(&self) -> Vec<Vec<usize>> {
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..self.parent.len() {
            groups.entry(self.find(i)).or_default().push(i);
        }
        let mut out: Vec<Vec<usize>> = groups.into_values().collect();
        out.sort();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn road(tile: usize, open: u8) -> Segment {
        Segment::new(FeatureKind::Road, tile, false, open)
    }

    #[test]
    fn join_sums_and_closes_edges() {
        let mut g = FeatureGraph::new();
        let a = g.push(road(0, 2));
        let b = g.push(road(1, 1));
        g.root_mut(a).meeples[0] = 1;
        g.root_mut(b).meeples[1] = 1;
        g.join(a, b, true);
        let s = g.segment(a);
        assert_eq!(s.open, 1);
        assert_eq!(s.meeples, [1, 1]);
        assert_eq!(s.tile_count(), 2);
        assert_eq!(g.find(a), g.find(b));
        assert_eq!(s.majority(), vec![PlayerId::P1, PlayerId::P2]);
    }

    #[test]
    fn joining_within_one_feature_closes_a_loop() {
        let mut g = FeatureGraph::new();
        let a = g.push(road(0, 2));
        let b = g.push(road(1, 2));
        g.join(a, b, true);
        g.join(b, a, true);
        assert!(g.segment(a).is_complete());
    }

    #[test]
    fn same_tile_counts_once() {
        let mut g = FeatureGraph::new();
        let a = g.push(Segment::new(FeatureKind::City, 3, false, 1));
        let b = g.push(Segment::new(FeatureKind::City, 3, false, 1));
        let c = g.push(Segment::new(FeatureKind::City, 4, true, 2));
        g.join(a, c, true);
        g.join(b, c, true);
        let s = g.segment(a);
        assert_eq!(s.tile_count(), 2);
        assert_eq!(s.pennants, 1);
        assert!(s.is_complete());
    }

    #[test]
    fn merge_order_does_not_change_partition() {
        let build = |order: &[(usize, usize)]| {
            let mut g = FeatureGraph::new();
            for i in 0..6 {
                g.push(road(i, 2));
            }
            for &(a, b) in order {
                g.join(a, b, false);
            }
            g.partition()
        };
        let p1 = build(&[(0, 1), (2, 3), (1, 2), (4, 5)]);
        let p2 = build(&[(5, 4), (3, 2), (2, 1), (1, 0)]);
        assert_eq!(p1, p2);
    }
}
