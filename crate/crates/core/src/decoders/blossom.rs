//! Maximum-weight matching in general graphs (Edmonds' blossom method,
//! primal-dual formulation).
//!
//! The control flow follows Galil's exposition as popularised by van
//! Rantwijk's reference implementation: vertices are grown into alternating
//! trees from free vertices; tight edges either extend a tree, trigger an
//! augmentation, or close an odd cycle that is shrunk into a blossom; when no
//! tight edge exists the dual variables move by the bottleneck delta. With
//! `max_cardinality` the matching size is maximised first and the weight
//! among maximum matchings second, which is what a perfect-matching reduction
//! needs.
//!
//! Complexity is O(n^3); decoding graphs here have at most a few dozen
//! flagged vertices, so exactness is worth far more than asymptotics.

const NONE: usize = usize::MAX;

pub struct Matching {
    nvertex: usize,
    nedge: usize,
    edges: Vec<(usize, usize, f64)>,
    max_cardinality: bool,

    endpoint: Vec<usize>,
    neighbend: Vec<Vec<usize>>,
    mate: Vec<usize>,
    label: Vec<u8>,
    labelend: Vec<usize>,
    inblossom: Vec<usize>,
    blossomparent: Vec<usize>,
    blossomchilds: Vec<Vec<usize>>,
    blossombase: Vec<usize>,
    blossomendps: Vec<Vec<usize>>,
    bestedge: Vec<usize>,
    blossombestedges: Vec<Vec<usize>>,
    unusedblossoms: Vec<usize>,
    dualvar: Vec<f64>,
    allowedge: Vec<bool>,
    queue: Vec<usize>,
}

/// Compute a maximum-weight matching; returns `mate` with `mate[v] = u` or
/// `usize::MAX` when v is unmatched.
pub fn max_weight_matching(
    nvertex: usize,
    edges: &[(usize, usize, f64)],
    max_cardinality: bool,
) -> Vec<usize> {
    if nvertex == 0 || edges.is_empty() {
        return vec![NONE; nvertex];
    }
    let mut m = Matching::new(nvertex, edges, max_cardinality);
    m.solve();
    m.mate_vertices()
}

impl Matching {
    fn new(nvertex: usize, edges: &[(usize, usize, f64)], max_cardinality: bool) -> Self {
        let nedge = edges.len();
        let mut endpoint = Vec::with_capacity(2 * nedge);
        for &(i, j, _) in edges {
            endpoint.push(i);
            endpoint.push(j);
        }
        let mut neighbend: Vec<Vec<usize>> = vec![Vec::new(); nvertex];
        for (k, &(i, j, _)) in edges.iter().enumerate() {
            neighbend[i].push(2 * k + 1);
            neighbend[j].push(2 * k);
        }
        let maxweight = edges.iter().map(|e| e.2).fold(0.0f64, f64::max);
        let mut dualvar = vec![0.0; 2 * nvertex];
        dualvar[..nvertex].fill(maxweight);

        Matching {
            nvertex,
            nedge,
            edges: edges.to_vec(),
            max_cardinality,
            endpoint,
            neighbend,
            mate: vec![NONE; nvertex],
            label: vec![0; 2 * nvertex],
            labelend: vec![NONE; 2 * nvertex],
            inblossom: (0..nvertex).collect(),
            blossomparent: vec![NONE; 2 * nvertex],
            blossomchilds: vec![Vec::new(); 2 * nvertex],
            blossombase: (0..nvertex).chain(std::iter::repeat(NONE).take(nvertex)).collect(),
            blossomendps: vec![Vec::new(); 2 * nvertex],
            bestedge: vec![NONE; 2 * nvertex],
            blossombestedges: vec![Vec::new(); 2 * nvertex],
            unusedblossoms: (nvertex..2 * nvertex).collect(),
            dualvar,
            allowedge: vec![false; nedge],
            queue: Vec::new(),
        }
    }

    fn slack(&self, k: usize) -> f64 {
        let (i, j, wt) = self.edges[k];
        self.dualvar[i] + self.dualvar[j] - 2.0 * wt
    }

    fn blossom_leaves(&self, b: usize, out: &mut Vec<usize>) {
        if b < self.nvertex {
            out.push(b);
        } else {
            for &t in &self.blossomchilds[b] {
                self.blossom_leaves_inner(t, out);
            }
        }
    }

    fn blossom_leaves_inner(&self, b: usize, out: &mut Vec<usize>) {
        if b < self.nvertex {
            out.push(b);
        } else {
            for &t in &self.blossomchilds[b] {
                self.blossom_leaves_inner(t, out);
            }
        }
    }

    fn assign_label(&mut self, w: usize, t: u8, p: usize) {
        let b = self.inblossom[w];
        debug_assert!(self.label[w] == 0 && self.label[b] == 0);
        self.label[w] = t;
        self.label[b] = t;
        self.labelend[w] = p;
        self.labelend[b] = p;
        self.bestedge[w] = NONE;
        self.bestedge[b] = NONE;
        if t == 1 {
            let mut leaves = Vec::new();
            self.blossom_leaves(b, &mut leaves);
            self.queue.extend(leaves);
        } else {
            let base = self.blossombase[b];
            let mate_base = self.mate[base];
            debug_assert!(mate_base != NONE);
            self.assign_label(self.endpoint[mate_base], 1, mate_base ^ 1);
        }
    }

    /// Trace back from v and w to find the closest common ancestor of their
    /// trees; returns NONE when an augmenting path is found instead.
    fn scan_blossom(&mut self, v: usize, w: usize) -> usize {
        let mut path = Vec::new();
        let mut base = NONE;
        let mut v = v;
        let mut w = w;
        loop {
            if v != NONE {
                let b = self.inblossom[v];
                if self.label[b] & 4 != 0 {
                    base = self.blossombase[b];
                    break;
                }
                path.push(b);
                self.label[b] |= 4;
                debug_assert!(self.labelend[b] == self.mate[self.blossombase[b]]);
                if self.labelend[b] == NONE {
                    v = NONE;
                } else {
                    v = self.endpoint[self.labelend[b]];
                    let b = self.inblossom[v];
                    debug_assert!(self.label[b] == 2);
                    debug_assert!(self.labelend[b] != NONE);
                    v = self.endpoint[self.labelend[b]];
                }
            }
            if w != NONE {
                std::mem::swap(&mut v, &mut w);
            } else if v == NONE {
                break;
            }
        }
        for b in path {
            self.label[b] &= !4;
        }
        base
    }

    fn add_blossom(&mut self, base: usize, k: usize) {
        let (mut v, mut w, _) = self.edges[k];
        let bb = self.inblossom[base];
        let mut bv = self.inblossom[v];
        let mut bw = self.inblossom[w];
        let b = self.unusedblossoms.pop().expect("blossom pool exhausted");
        self.blossombase[b] = base;
        self.blossomparent[b] = NONE;
        self.blossomparent[bb] = b;

        let mut path = Vec::new();
        let mut endps = Vec::new();
        while bv != bb {
            self.blossomparent[bv] = b;
            path.push(bv);
            endps.push(self.labelend[bv]);
            debug_assert!(
                self.label[bv] == 2
                    || (self.label[bv] == 1 && self.labelend[bv] == self.mate[self.blossombase[bv]])
            );
            debug_assert!(self.labelend[bv] != NONE);
            v = self.endpoint[self.labelend[bv]];
            bv = self.inblossom[v];
        }
        path.push(bb);
        path.reverse();
        endps.reverse();
        endps.push(2 * k);
        while bw != bb {
            self.blossomparent[bw] = b;
            path.push(bw);
            endps.push(self.labelend[bw] ^ 1);
            debug_assert!(
                self.label[bw] == 2
                    || (self.label[bw] == 1 && self.labelend[bw] == self.mate[self.blossombase[bw]])
            );
            debug_assert!(self.labelend[bw] != NONE);
            w = self.endpoint[self.labelend[bw]];
            bw = self.inblossom[w];
        }

        debug_assert!(self.label[bb] == 1);
        self.label[b] = 1;
        self.labelend[b] = self.labelend[bb];
        self.dualvar[b] = 0.0;
        let mut leaves = Vec::new();
        self.blossom_leaves(b, &mut leaves);
        // Children were assigned the parent pointer already; collect leaves
        // of the whole blossom through the child list instead.
        leaves.clear();
        for &c in &path {
            self.blossom_leaves_inner(c, &mut leaves);
        }
        for &leaf in &leaves {
            if self.label[self.inblossom[leaf]] == 2 {
                self.queue.push(leaf);
            }
            self.inblossom[leaf] = b;
        }
        self.blossomchilds[b] = path;
        self.blossomendps[b] = endps;

        // Compute best edges into the new blossom.
        let mut bestedgeto = vec![NONE; 2 * self.nvertex];
        for &bv in &self.blossomchilds[b] {
            let nblists: Vec<Vec<usize>> = if self.blossombestedges[bv].is_empty() {
                let mut l = Vec::new();
                let mut lv = Vec::new();
                self.blossom_leaves_inner(bv, &mut lv);
                for leaf in lv {
                    l.push(self.neighbend[leaf].iter().map(|&p| p / 2).collect());
                }
                l
            } else {
                vec![self.blossombestedges[bv].clone()]
            };
            for nblist in nblists {
                for k in nblist {
                    let (mut i, mut j, _) = self.edges[k];
                    if self.inblossom[j] == b {
                        std::mem::swap(&mut i, &mut j);
                    }
                    let bj = self.inblossom[j];
                    if bj != b
                        && self.label[bj] == 1
                        && (bestedgeto[bj] == NONE || self.slack(k) < self.slack(bestedgeto[bj]))
                    {
                        bestedgeto[bj] = k;
                    }
                    let _ = i;
                }
            }
            self.blossombestedges[bv].clear();
            self.bestedge[bv] = NONE;
        }
        self.blossombestedges[b] = bestedgeto.into_iter().filter(|&k| k != NONE).collect();
        self.bestedge[b] = NONE;
        for &k in &self.blossombestedges[b] {
            if self.bestedge[b] == NONE || self.slack(k) < self.slack(self.bestedge[b]) {
                self.bestedge[b] = k;
            }
        }
    }

    fn expand_blossom(&mut self, b: usize, endstage: bool) {
        let childs = self.blossomchilds[b].clone();
        for &s in &childs {
            self.blossomparent[s] = NONE;
            if s < self.nvertex {
                self.inblossom[s] = s;
            } else if endstage && self.dualvar[s] == 0.0 {
                self.expand_blossom(s, endstage);
            } else {
                let mut leaves = Vec::new();
                self.blossom_leaves_inner(s, &mut leaves);
                for leaf in leaves {
                    self.inblossom[leaf] = s;
                }
            }
        }
        if !endstage && self.label[b] == 2 {
            // The expanding blossom was a T-blossom mid-stage. Walk from the
            // entry edge around to the base, relabeling sub-blossoms on that
            // arc alternately T/S; sub-blossoms on the other arc end up
            // unlabeled but may be re-reached from outside.
            debug_assert!(self.labelend[b] != NONE);
            let entrychild = self.inblossom[self.endpoint[self.labelend[b] ^ 1]];
            let len = self.blossomchilds[b].len() as i64;
            let mut j = self.blossomchilds[b].iter().position(|&c| c == entrychild).unwrap() as i64;
            let (jstep, endptrick): (i64, usize) = if j & 1 != 0 {
                j -= len;
                (1, 0)
            } else {
                (-1, 1)
            };
            let ep = |this: &Self, j: i64| -> usize {
                this.blossomendps[b][(j - endptrick as i64).rem_euclid(len) as usize]
            };
            let mut p = self.labelend[b];
            while j != 0 {
                // Relabel the T-sub-blossom reached through endpoint p.
                self.label[self.endpoint[p ^ 1]] = 0;
                let q = ep(self, j);
                self.label[self.endpoint[q ^ endptrick ^ 1]] = 0;
                self.assign_label(self.endpoint[p ^ 1], 2, p);
                // The edge between this pair of sub-blossoms is tight.
                self.allowedge[(q ^ endptrick) / 2] = true;
                j += jstep;
                p = ep(self, j) ^ endptrick;
                self.allowedge[p / 2] = true;
                j += jstep;
            }
            // Relabel the base T-sub-blossom without stepping to its mate.
            let bv = self.blossomchilds[b][j.rem_euclid(len) as usize];
            self.label[self.endpoint[p ^ 1]] = 2;
            self.label[bv] = 2;
            self.labelend[self.endpoint[p ^ 1]] = p;
            self.labelend[bv] = p;
            self.bestedge[bv] = NONE;
            j += jstep;
            while self.blossomchilds[b][j.rem_euclid(len) as usize] != entrychild {
                let bv = self.blossomchilds[b][j.rem_euclid(len) as usize];
                if self.label[bv] == 1 {
                    j += jstep;
                    continue;
                }
                let mut leaves = Vec::new();
                self.blossom_leaves_inner(bv, &mut leaves);
                let mut labeled = NONE;
                for leaf in leaves {
                    if self.label[leaf] != 0 {
                        labeled = leaf;
                        break;
                    }
                }
                if labeled != NONE {
                    debug_assert!(self.label[labeled] == 2);
                    debug_assert!(self.inblossom[labeled] == bv);
                    self.label[labeled] = 0;
                    self.label[self.endpoint[self.mate[self.blossombase[bv]]]] = 0;
                    let le = self.labelend[labeled];
                    self.assign_label(labeled, 2, le);
                }
                j += jstep;
            }
        }
        self.label[b] = 0;
        self.labelend[b] = NONE;
        self.blossomchilds[b].clear();
        self.blossomendps[b].clear();
        self.blossombase[b] = NONE;
        self.blossombestedges[b].clear();
        self.bestedge[b] = NONE;
        self.unusedblossoms.push(b);
    }

    /// Swap matched/unmatched edges over the alternating path through
    /// blossom b between vertex v and the blossom base.
    fn augment_blossom(&mut self, b: usize, v: usize) {
        let mut t = v;
        while self.blossomparent[t] != b {
            t = self.blossomparent[t];
        }
        if t >= self.nvertex {
            self.augment_blossom(t, v);
        }
        let i = self.blossomchilds[b].iter().position(|&c| c == t).unwrap() as i64;
        let len = self.blossomchilds[b].len() as i64;
        let (mut j, jstep, endptrick): (i64, i64, usize) = if i & 1 != 0 {
            (i - len, 1, 0)
        } else {
            (i, -1, 1)
        };
        while j != 0 {
            j += jstep;
            let idx = (j - endptrick as i64).rem_euclid(len) as usize;
            let p = self.blossomendps[b][idx] ^ endptrick;
            let t_child = self.blossomchilds[b][j.rem_euclid(len) as usize];
            if t_child >= self.nvertex {
                self.augment_blossom(t_child, self.endpoint[p]);
            }
            j += jstep;
            let t_child = self.blossomchilds[b][j.rem_euclid(len) as usize];
            if t_child >= self.nvertex {
                self.augment_blossom(t_child, self.endpoint[p ^ 1]);
            }
            self.mate[self.endpoint[p]] = p ^ 1;
            self.mate[self.endpoint[p ^ 1]] = p;
        }
        self.blossomchilds[b].rotate_left(i.rem_euclid(len) as usize);
        self.blossomendps[b].rotate_left(i.rem_euclid(len) as usize);
        self.blossombase[b] = self.blossombase[self.blossomchilds[b][0]];
        debug_assert_eq!(self.blossombase[b], v);
    }

    /// Swap matched/unmatched edges over the augmenting path through edge k.
    fn augment_matching(&mut self, k: usize) {
        let (v, w, _) = self.edges[k];
        for (mut s, mut p) in [(v, 2 * k + 1), (w, 2 * k)] {
            loop {
                let bs = self.inblossom[s];
                debug_assert!(self.label[bs] == 1);
                debug_assert!(self.labelend[bs] == self.mate[self.blossombase[bs]]);
                if bs >= self.nvertex {
                    self.augment_blossom(bs, s);
                }
                self.mate[s] = p;
                if self.labelend[bs] == NONE {
                    break;
                }
                let t = self.endpoint[self.labelend[bs]];
                let bt = self.inblossom[t];
                debug_assert!(self.label[bt] == 2);
                debug_assert!(self.labelend[bt] != NONE);
                s = self.endpoint[self.labelend[bt]];
                let j = self.endpoint[self.labelend[bt] ^ 1];
                debug_assert_eq!(self.blossombase[bt], t);
                if self.inblossom[j] >= self.nvertex {
                    self.augment_blossom(self.inblossom[j], j);
                }
                self.mate[j] = self.labelend[bt];
                p = self.labelend[bt] ^ 1;
            }
        }
    }

    fn solve(&mut self) {
        for _stage in 0..self.nvertex {
            self.label.fill(0);
            self.bestedge.fill(NONE);
            for v in self.nvertex..2 * self.nvertex {
                self.blossombestedges[v].clear();
            }
            self.allowedge.fill(false);
            self.queue.clear();
            for v in 0..self.nvertex {
                if self.mate[v] == NONE && self.label[self.inblossom[v]] == 0 {
                    self.assign_label(v, 1, NONE);
                }
            }
            let mut augmented = false;
            loop {
                while let Some(v) = self.queue.pop() {
                    debug_assert!(self.label[self.inblossom[v]] == 1);
                    let nbs = self.neighbend[v].clone();
                    for p in nbs {
                        let k = p / 2;
                        let w = self.endpoint[p];
                        if self.inblossom[v] == self.inblossom[w] {
                            continue;
                        }
                        if !self.allowedge[k] {
                            let kslack = self.slack(k);
                            if kslack <= 1e-12 {
                                self.allowedge[k] = true;
                            }
                        }
                        if self.allowedge[k] {
                            let bw = self.inblossom[w];
                            if self.label[bw] == 0 {
                                self.assign_label(w, 2, p ^ 1);
                            } else if self.label[bw] == 1 {
                                let base = self.scan_blossom(v, w);
                                if base != NONE {
                                    self.add_blossom(base, k);
                                } else {
                                    self.augment_matching(k);
                                    augmented = true;
                                    break;
                                }
                            } else if self.label[w] == 0 {
                                debug_assert!(self.label[bw] == 2);
                                self.label[w] = 2;
                                self.labelend[w] = p ^ 1;
                            }
                        } else {
                            let bw = self.inblossom[w];
                            if self.label[bw] == 1 {
                                let bv = self.inblossom[v];
                                if self.bestedge[bv] == NONE
                                    || self.slack(k) < self.slack(self.bestedge[bv])
                                {
                                    self.bestedge[bv] = k;
                                }
                            } else if self.label[w] == 0
                                && (self.bestedge[w] == NONE
                                    || self.slack(k) < self.slack(self.bestedge[w]))
                            {
                                self.bestedge[w] = k;
                            }
                        }
                    }
                    if augmented {
                        break;
                    }
                }
                if augmented {
                    break;
                }

                // No tight edge: compute the dual delta.
                let mut deltatype = -1i32;
                let mut delta = 0.0f64;
                let mut deltaedge = NONE;
                let mut deltablossom = NONE;
                if !self.max_cardinality {
                    deltatype = 1;
                    delta = self.dualvar[..self.nvertex].iter().cloned().fold(f64::INFINITY, f64::min).max(0.0);
                }
                for v in 0..self.nvertex {
                    if self.label[self.inblossom[v]] == 0 && self.bestedge[v] != NONE {
                        let d = self.slack(self.bestedge[v]);
                        if deltatype == -1 || d < delta {
                            delta = d;
                            deltatype = 2;
                            deltaedge = self.bestedge[v];
                        }
                    }
                }
                for b in 0..2 * self.nvertex {
                    if self.blossomparent[b] == NONE && self.label[b] == 1 && self.bestedge[b] != NONE
                    {
                        let kslack = self.slack(self.bestedge[b]);
                        let d = kslack / 2.0;
                        if deltatype == -1 || d < delta {
                            delta = d;
                            deltatype = 3;
                            deltaedge = self.bestedge[b];
                        }
                    }
                }
                for b in self.nvertex..2 * self.nvertex {
                    if self.blossombase[b] != NONE
                        && self.blossomparent[b] == NONE
                        && self.label[b] == 2
                        && (deltatype == -1 || self.dualvar[b] < delta)
                    {
                        delta = self.dualvar[b];
                        deltatype = 4;
                        deltablossom = b;
                    }
                }
                if deltatype == -1 {
                    // No further progress possible; max cardinality reached.
                    deltatype = 1;
                    delta = self.dualvar[..self.nvertex].iter().cloned().fold(f64::INFINITY, f64::min).max(0.0);
                }

                for v in 0..self.nvertex {
                    match self.label[self.inblossom[v]] {
                        1 => self.dualvar[v] -= delta,
                        2 => self.dualvar[v] += delta,
                        _ => {}
                    }
                }
                for b in self.nvertex..2 * self.nvertex {
                    if self.blossombase[b] != NONE && self.blossomparent[b] == NONE {
                        match self.label[b] {
                            1 => self.dualvar[b] += delta,
                            2 => self.dualvar[b] -= delta,
                            _ => {}
                        }
                    }
                }

                match deltatype {
                    1 => break,
                    2 => {
                        self.allowedge[deltaedge] = true;
                        let (i, j, _) = self.edges[deltaedge];
                        let v = if self.label[self.inblossom[i]] == 0 { j } else { i };
                        debug_assert!(self.label[self.inblossom[v]] == 1);
                        self.queue.push(v);
                    }
                    3 => {
                        self.allowedge[deltaedge] = true;
                        let (i, _, _) = self.edges[deltaedge];
                        debug_assert!(self.label[self.inblossom[i]] == 1);
                        self.queue.push(i);
                    }
                    4 => self.expand_blossom(deltablossom, false),
                    _ => unreachable!(),
                }
            }

            if !augmented {
                break;
            }
            for b in self.nvertex..2 * self.nvertex {
                if self.blossomparent[b] == NONE
                    && self.blossombase[b] != NONE
                    && self.label[b] == 1
                    && self.dualvar[b] == 0.0
                {
                    self.expand_blossom(b, true);
                }
            }
        }
    }

    fn mate_vertices(&self) -> Vec<usize> {
        (0..self.nvertex)
            .map(|v| if self.mate[v] == NONE { NONE } else { self.endpoint[self.mate[v]] })
            .collect()
    }
}

/// Exhaustive minimum-weight perfect matching oracle for testing (n <= ~14).
pub fn brute_force_min_perfect(n: usize, weight: &dyn Fn(usize, usize) -> Option<f64>) -> Option<(f64, Vec<usize>)> {
    fn rec(
        unmatched: &mut Vec<usize>,
        weight: &dyn Fn(usize, usize) -> Option<f64>,
        mate: &mut Vec<usize>,
        best: &mut Option<(f64, Vec<usize>)>,
        cost: f64,
    ) {
        if unmatched.is_empty() {
            if best.is_none() || cost < best.as_ref().unwrap().0 {
                *best = Some((cost, mate.clone()));
            }
            return;
        }
        let a = unmatched[0];
        for i in 1..unmatched.len() {
            let b = unmatched[i];
            if let Some(w) = weight(a, b) {
                let mut rest: Vec<usize> =
                    unmatched.iter().cloned().filter(|&x| x != a && x != b).collect();
                mate[a] = b;
                mate[b] = a;
                rec(&mut rest, weight, mate, best, cost + w);
                mate[a] = NONE;
                mate[b] = NONE;
            }
        }
    }
    let mut unmatched: Vec<usize> = (0..n).collect();
    let mut mate = vec![NONE; n];
    let mut best = None;
    rec(&mut unmatched, weight, &mut mate, &mut best, 0.0);
    best
}
