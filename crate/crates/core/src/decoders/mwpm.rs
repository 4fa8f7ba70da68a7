//! Exact uncorrelated minimum-weight perfect matching decoder.
//!
//! Flagged detectors are paired along least-weight paths of the matching
//! graph, with a virtual boundary absorbing odd parity. The reduction is the
//! textbook one: Dijkstra from every flagged detector yields pairwise path
//! weights plus boundary distances; the blossom algorithm then solves the
//! induced complete graph exactly, using duplicated virtual nodes so boundary
//! matches are ordinary matches.

use super::blossom::max_weight_matching;
use super::{DecodeError, DecodeResult};
use crate::dem::{MatchingGraph, BOUNDARY};
use crate::util::Bits;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

pub struct MwpmDecoder {
    graph: MatchingGraph,
}

struct HeapItem {
    dist: f64,
    node: u32,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.dist == other.dist && self.node == other.node
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on (dist, node); the node tiebreak keeps path choices
        // deterministic when weights are degenerate.
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap_or(Ordering::Equal)
            .then(other.node.cmp(&self.node))
    }
}

/// Shortest distances and path observable masks from one source.
struct PathField {
    dist: Vec<f64>,
    mask: Vec<u64>,
    boundary_dist: f64,
    boundary_mask: u64,
}

impl MwpmDecoder {
    pub fn new(graph: MatchingGraph) -> Self {
        MwpmDecoder { graph }
    }

    pub fn graph(&self) -> &MatchingGraph {
        &self.graph
    }

    fn dijkstra(&self, source: u32) -> PathField {
        let n = self.graph.num_detectors as usize;
        let mut dist = vec![f64::INFINITY; n];
        let mut mask = vec![0u64; n];
        let mut done = vec![false; n];
        let mut boundary_dist = f64::INFINITY;
        let mut boundary_mask = 0u64;
        let mut heap = BinaryHeap::new();
        dist[source as usize] = 0.0;
        heap.push(HeapItem { dist: 0.0, node: source });
        while let Some(HeapItem { dist: d, node }) = heap.pop() {
            let v = node as usize;
            if done[v] {
                continue;
            }
            done[v] = true;
            for &(u, w, m) in &self.graph.adjacency[v] {
                if u == BOUNDARY {
                    if d + w < boundary_dist {
                        boundary_dist = d + w;
                        boundary_mask = mask[v] ^ m;
                    }
                    continue;
                }
                let nd = d + w;
                if nd < dist[u as usize] {
                    dist[u as usize] = nd;
                    mask[u as usize] = mask[v] ^ m;
                    heap.push(HeapItem { dist: nd, node: u });
                }
            }
        }
        PathField { dist, mask, boundary_dist, boundary_mask }
    }

    /// Decode one detection-event pattern.
    pub fn decode_events(&self, events: &Bits) -> Result<DecodeResult, DecodeError> {
        let flagged: Vec<u32> = events.iter_ones().map(|i| i as u32).collect();
        if flagged.is_empty() {
            return Ok(DecodeResult { observables: 0, cost: 0.0 });
        }
        let k = flagged.len();
        let fields: Vec<PathField> = flagged.iter().map(|&f| self.dijkstra(f)).collect();

        // Feasibility: every flagged detector needs some partner or boundary.
        for (i, f) in fields.iter().enumerate() {
            let reachable = f.boundary_dist.is_finite()
                || flagged.iter().enumerate().any(|(j, &fj)| i != j && f.dist[fj as usize].is_finite());
            if !reachable {
                return Err(DecodeError::Infeasible(flagged[i]));
            }
        }

        // Nodes 0..k = flagged detectors, k..2k = their boundary images.
        // Edge weights are flipped to turn blossom's maximum into a minimum.
        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        let mut wmax = 0.0f64;
        let mut raw: Vec<(usize, usize, f64)> = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                let d = fields[i].dist[flagged[j] as usize];
                if d.is_finite() {
                    raw.push((i, j, d));
                    wmax = wmax.max(d);
                }
            }
            if fields[i].boundary_dist.is_finite() {
                raw.push((i, k + i, fields[i].boundary_dist));
                wmax = wmax.max(fields[i].boundary_dist);
            }
        }
        for i in 0..k {
            for j in i + 1..k {
                raw.push((k + i, k + j, 0.0));
            }
        }
        for (a, b, w) in raw {
            edges.push((a, b, wmax + 1.0 - w));
        }
        let mate = max_weight_matching(2 * k, &edges, true);

        let mut observables = 0u64;
        let mut cost = 0.0;
        for i in 0..k {
            match mate[i] {
                m if m == usize::MAX => return Err(DecodeError::Infeasible(flagged[i])),
                m if m == k + i => {
                    observables ^= fields[i].boundary_mask;
                    cost += fields[i].boundary_dist;
                }
                m if m < k => {
                    if m > i {
                        observables ^= fields[i].mask[flagged[m] as usize];
                        cost += fields[i].dist[flagged[m] as usize];
                    }
                }
                _ => return Err(DecodeError::Infeasible(flagged[i])),
            }
        }
        Ok(DecodeResult { observables, cost })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dem::{DetectorErrorModel, ErrorMechanism};
    use crate::layout::Basis;

    fn line_graph() -> MwpmDecoder {
        // 0 -b- [d0] -1- [d1] -1- [d2] -b- 0, logical on the left boundary.
        let dem = DetectorErrorModel {
            mechanisms: vec![
                ErrorMechanism { probability: 0.1, detectors: vec![0], observables: 1 },
                ErrorMechanism { probability: 0.1, detectors: vec![0, 1], observables: 0 },
                ErrorMechanism { probability: 0.1, detectors: vec![1, 2], observables: 0 },
                ErrorMechanism { probability: 0.1, detectors: vec![2], observables: 0 },
            ],
            num_detectors: 3,
            num_observables: 1,
        };
        let g = crate::dem::to_matching_graph(&dem, &[Basis::Z; 3], Basis::Z).unwrap();
        MwpmDecoder::new(g)
    }

    #[test]
    fn empty_syndrome_gives_zero() {
        let d = line_graph();
        let r = d.decode_events(&Bits::new(3)).unwrap();
        assert_eq!(r.observables, 0);
        assert_eq!(r.cost, 0.0);
    }

    #[test]
    fn adjacent_pair_matches_directly() {
        let d = line_graph();
        let mut e = Bits::new(3);
        e.set(0, true);
        e.set(1, true);
        let r = d.decode_events(&e).unwrap();
        assert_eq!(r.observables, 0);
        let w = (9.0f64).ln();
        assert!((r.cost - w).abs() < 1e-9);
    }

    #[test]
    fn lone_event_takes_nearest_boundary() {
        let d = line_graph();
        let mut e = Bits::new(3);
        e.set(0, true);
        let r = d.decode_events(&e).unwrap();
        // Left boundary is one edge away and carries the logical.
        assert_eq!(r.observables, 1);
    }

    #[test]
    fn infeasible_when_disconnected() {
        let dem = DetectorErrorModel {
            mechanisms: vec![ErrorMechanism { probability: 0.1, detectors: vec![0, 1], observables: 0 }],
            num_detectors: 3,
            num_observables: 0,
        };
        let g = crate::dem::to_matching_graph(&dem, &[Basis::Z; 3], Basis::Z).unwrap();
        let d = MwpmDecoder::new(g);
        let mut e = Bits::new(3);
        e.set(2, true);
        assert!(matches!(d.decode_events(&e), Err(DecodeError::Infeasible(2))));
    }
}
