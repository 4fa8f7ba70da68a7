//! Aaronson-Gottesman stabilizer tableau with destabilizers.
//!
//! Rows 0..n are destabilizers, rows n..2n stabilizers, row 2n is scratch.
//! Each row stores its X and Z components packed into u64 words plus a sign
//! bit; the implementation follows the published CHP update rules, with CZ
//! expressed as H-conjugated CNOT so the phase bookkeeping stays on the
//! well-trodden path.

pub struct Tableau {
    n: usize,
    w: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    r: Vec<bool>,
}

impl Tableau {
    pub fn new(n: usize) -> Self {
        let w = n.div_ceil(64).max(1);
        let rows = 2 * n + 1;
        let mut t = Tableau { n, w, x: vec![0; rows * w], z: vec![0; rows * w], r: vec![false; rows] };
        for i in 0..n {
            t.set_x(i, i, true); // destabilizer i = X_i
            t.set_z(n + i, i, true); // stabilizer i = Z_i
        }
        t
    }

    #[inline]
    fn idx(&self, row: usize, q: usize) -> (usize, u64) {
        (row * self.w + q / 64, 1u64 << (q % 64))
    }

    #[inline]
    fn get_x(&self, row: usize, q: usize) -> bool {
        let (i, m) = self.idx(row, q);
        self.x[i] & m != 0
    }

    #[inline]
    fn get_z(&self, row: usize, q: usize) -> bool {
        let (i, m) = self.idx(row, q);
        self.z[i] & m != 0
    }

    #[inline]
    fn set_x(&mut self, row: usize, q: usize, v: bool) {
        let (i, m) = self.idx(row, q);
        if v {
            self.x[i] |= m;
        } else {
            self.x[i] &= !m;
        }
    }

    #[inline]
    fn set_z(&mut self, row: usize, q: usize, v: bool) {
        let (i, m) = self.idx(row, q);
        if v {
            self.z[i] |= m;
        } else {
            self.z[i] &= !m;
        }
    }

    pub fn h(&mut self, q: usize) {
        for row in 0..2 * self.n {
            let x = self.get_x(row, q);
            let z = self.get_z(row, q);
            if x && z {
                self.r[row] ^= true;
            }
            self.set_x(row, q, z);
            self.set_z(row, q, x);
        }
    }

    pub fn cnot(&mut self, c: usize, t: usize) {
        for row in 0..2 * self.n {
            let xc = self.get_x(row, c);
            let zc = self.get_z(row, c);
            let xt = self.get_x(row, t);
            let zt = self.get_z(row, t);
            if xc && zt && (xt == zc) {
                self.r[row] ^= true;
            }
            self.set_x(row, t, xt ^ xc);
            self.set_z(row, c, zc ^ zt);
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.h(b);
        self.cnot(a, b);
        self.h(b);
    }

    pub fn x(&mut self, q: usize) {
        for row in 0..2 * self.n {
            if self.get_z(row, q) {
                self.r[row] ^= true;
            }
        }
    }

    pub fn z(&mut self, q: usize) {
        for row in 0..2 * self.n {
            if self.get_x(row, q) {
                self.r[row] ^= true;
            }
        }
    }

    pub fn y(&mut self, q: usize) {
        self.x(q);
        self.z(q);
    }

    /// Exponent of i contributed when multiplying single-qubit Paulis
    /// (x1,z1) * (x2,z2), per Aaronson-Gottesman.
    #[inline]
    fn g(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
        match (x1, z1) {
            (false, false) => 0,
            (true, true) => z2 as i32 - x2 as i32,
            (true, false) => (z2 as i32) * (2 * x2 as i32 - 1),
            (false, true) => (x2 as i32) * (1 - 2 * z2 as i32),
        }
    }

    /// row i <- row k * row i (Pauli product with phase tracking).
    ///
    /// Odd phase sums only arise when a destabilizer row absorbs a row it
    /// anticommutes with; destabilizer phases are never read, so the rounded
    /// sign is harmless there.
    fn row_mult(&mut self, i: usize, k: usize) {
        let mut phase: i32 = 2 * self.r[i] as i32 + 2 * self.r[k] as i32;
        for q in 0..self.n {
            phase += Self::g(self.get_x(k, q), self.get_z(k, q), self.get_x(i, q), self.get_z(i, q));
        }
        self.r[i] = phase.rem_euclid(4) / 2 == 1;
        for w in 0..self.w {
            self.x[i * self.w + w] ^= self.x[k * self.w + w];
            self.z[i * self.w + w] ^= self.z[k * self.w + w];
        }
    }

    fn row_copy(&mut self, dst: usize, src: usize) {
        for w in 0..self.w {
            self.x[dst * self.w + w] = self.x[src * self.w + w];
            self.z[dst * self.w + w] = self.z[src * self.w + w];
        }
        self.r[dst] = self.r[src];
    }

    fn row_clear(&mut self, row: usize) {
        for w in 0..self.w {
            self.x[row * self.w + w] = 0;
            self.z[row * self.w + w] = 0;
        }
        self.r[row] = false;
    }

    /// Z-basis measurement. Random outcomes resolve to `forced` (or 0).
    /// Returns (outcome, was_random).
    pub fn measure_z(&mut self, q: usize, forced: bool) -> (bool, bool) {
        let n = self.n;
        let mut p = None;
        for row in n..2 * n {
            if self.get_x(row, q) {
                p = Some(row);
                break;
            }
        }
        if let Some(p) = p {
            // Random: every other anticommuting row absorbs row p, the old
            // stabilizer becomes the destabilizer, and ±Z_q takes its place.
            for row in 0..2 * n {
                if row != p && self.get_x(row, q) {
                    self.row_mult(row, p);
                }
            }
            self.row_copy(p - n, p);
            self.row_clear(p);
            self.set_z(p, q, true);
            self.r[p] = forced;
            (forced, true)
        } else {
            // Deterministic: accumulate the stabilizer product indicated by
            // the destabilizer components into the scratch row.
            let scratch = 2 * n;
            self.row_clear(scratch);
            for i in 0..n {
                if self.get_x(i, q) {
                    self.row_mult(scratch, i + n);
                }
            }
            (self.r[scratch], false)
        }
    }

    pub fn measure_x(&mut self, q: usize, forced: bool) -> (bool, bool) {
        self.h(q);
        let out = self.measure_z(q, forced);
        self.h(q);
        out
    }

    pub fn reset_z(&mut self, q: usize) {
        let (outcome, _) = self.measure_z(q, false);
        if outcome {
            self.x(q);
        }
    }

    pub fn reset_x(&mut self, q: usize) {
        self.h(q);
        self.reset_z(q);
        self.h(q);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_state_measures_zero() {
        let mut t = Tableau::new(2);
        assert_eq!(t.measure_z(0, false), (false, false));
        assert_eq!(t.measure_z(1, false), (false, false));
    }

    #[test]
    fn plus_state_measurement_is_random_then_repeatable() {
        let mut t = Tableau::new(1);
        t.h(0);
        let (v, random) = t.measure_z(0, true);
        assert!(random);
        assert!(v);
        let (v2, random2) = t.measure_z(0, false);
        assert!(!random2, "collapsed state is deterministic");
        assert!(v2, "repeat measurement agrees");
    }

    #[test]
    fn bell_pair_correlations() {
        let mut t = Tableau::new(2);
        t.h(0);
        t.cnot(0, 1);
        let (a, r1) = t.measure_z(0, true);
        let (b, r2) = t.measure_z(1, false);
        assert!(r1);
        assert!(!r2);
        assert_eq!(a, b);
    }

    #[test]
    fn cz_makes_bell_in_x_basis() {
        // |++> -> CZ -> measuring X0 X1 product is deterministic +1... the
        // cluster state satisfies X0 Z1 and Z0 X1; check via CNOT identity.
        let mut t = Tableau::new(2);
        t.h(0);
        t.h(1);
        t.cz(0, 1);
        t.h(1);
        // Now the state is the Bell pair; ZZ parity deterministic 0.
        let (a, _) = t.measure_z(0, true);
        let (b, r) = t.measure_z(1, false);
        assert!(!r);
        assert_eq!(a, b);
    }

    #[test]
    fn x_flip_shows_in_measurement() {
        let mut t = Tableau::new(1);
        t.x(0);
        assert_eq!(t.measure_z(0, false), (true, false));
        t.reset_z(0);
        assert_eq!(t.measure_z(0, false), (false, false));
    }

    #[test]
    fn reset_x_prepares_plus() {
        let mut t = Tableau::new(1);
        t.reset_x(0);
        assert_eq!(t.measure_x(0, false), (false, false));
    }

    #[test]
    fn stabilizer_parity_after_gates() {
        // Measuring Z on |0>, applying H twice returns to deterministic.
        let mut t = Tableau::new(1);
        t.h(0);
        t.h(0);
        assert_eq!(t.measure_z(0, false), (false, false));
    }
}
