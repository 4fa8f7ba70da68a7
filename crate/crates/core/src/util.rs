//! Small shared utilities: packed bit vectors and a counter-based RNG.

/// Packed bit vector. Bit `i` lives in word `i / 64` at position `i % 64`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    pub fn new(len: usize) -> Self {
        Bits { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len);
        let w = &mut self.words[i / 64];
        let m = 1u64 << (i % 64);
        if v {
            *w |= m;
        } else {
            *w &= !m;
        }
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &Bits) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn any(&self) -> bool {
        self.words.iter().any(|&w| w != 0)
    }

    pub fn clear(&mut self) {
        self.words.fill(0);
    }

    /// Parity (XOR) of the bits selected by `idx`.
    pub fn parity_of(&self, idx: &[u32]) -> bool {
        let mut p = false;
        for &i in idx {
            p ^= self.get(i as usize);
        }
        p
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Packs into bytes, 8 bits per byte, little-endian within each byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len.div_ceil(8)];
        for (i, byte) in out.iter_mut().enumerate() {
            let word = self.words[i / 8];
            *byte = ((word >> ((i % 8) * 8)) & 0xff) as u8;
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Self {
        assert!(bytes.len() >= len.div_ceil(8));
        let mut b = Bits::new(len);
        for i in 0..len {
            if (bytes[i / 8] >> (i % 8)) & 1 == 1 {
                b.set(i, true);
            }
        }
        b
    }
}

impl std::fmt::Debug for Bits {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl serde::Serialize for Bits {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format!("{self:?}"))
    }
}

impl<'de> serde::Deserialize<'de> for Bits {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        let mut b = Bits::new(s.len());
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => b.set(i, true),
                _ => return Err(serde::de::Error::custom("bit string must be 0/1")),
            }
        }
        Ok(b)
    }
}

/// Counter-based pseudo-random stream.
///
/// Every draw is a pure function of (seed, stream, counter), so sampling is
/// reproducible for any parallel work split: workers address draws by index
/// instead of sharing mutable RNG state.
#[derive(Clone, Copy, Debug)]
pub struct CounterRng {
    seed: u64,
}

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { seed: splitmix(seed ^ 0x5851f42d4c957f2d) }
    }

    /// 64 fresh random bits for (stream, counter).
    #[inline]
    pub fn word(&self, stream: u64, counter: u64) -> u64 {
        // Two mixing rounds over the combined key; one round leaks structure
        // between adjacent counters.
        splitmix(splitmix(self.seed ^ stream.wrapping_mul(0xd1342543de82ef95)).wrapping_add(counter))
    }

    /// Uniform f64 in [0, 1).
    #[inline]
    pub fn uniform(&self, stream: u64, counter: u64) -> f64 {
        (self.word(stream, counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&self, stream: u64, counter: u64) -> f64 {
        let u1 = (self.word(stream, 2 * counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (self.word(stream, 2 * counter + 1) >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        r * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// 64 independent Bernoulli(p) trials packed into a word.
    ///
    /// Compares a lazily-generated uniform bit stream against the binary
    /// expansion of `p`, so the expected number of random words consumed is
    /// small regardless of `p`. Exact to a 2^-64 discretisation of `p`.
    #[inline]
    pub fn bernoulli_word(&self, p: f64, stream: u64) -> u64 {
        if p <= 0.0 {
            return 0;
        }
        if p >= 1.0 {
            return !0u64;
        }
        let thresh = (p * (u64::MAX as f64 + 1.0)) as u64;
        let mut result = 0u64;
        let mut tied = !0u64;
        for i in 0..64 {
            let bit = (thresh >> (63 - i)) & 1 == 1;
            let w = self.word(stream, i as u64);
            if bit {
                result |= tied & !w;
                tied &= w;
            } else {
                tied &= !w;
            }
            if tied == 0 {
                break;
            }
        }
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits_roundtrip() {
        let mut b = Bits::new(130);
        b.set(0, true);
        b.set(64, true);
        b.set(129, true);
        let bytes = b.to_bytes();
        let b2 = Bits::from_bytes(&bytes, 130);
        assert_eq!(b, b2);
        assert_eq!(b.count_ones(), 3);
        assert_eq!(b.iter_ones().collect::<Vec<_>>(), vec![0, 64, 129]);
    }

    #[test]
    fn counter_rng_is_deterministic() {
        let a = CounterRng::new(7);
        let b = CounterRng::new(7);
        assert_eq!(a.word(3, 9), b.word(3, 9));
        assert_ne!(a.word(3, 9), a.word(3, 10));
        assert_ne!(a.word(3, 9), a.word(4, 9));
    }

    #[test]
    fn bernoulli_word_matches_probability() {
        let rng = CounterRng::new(123);
        for &p in &[0.01, 0.1, 0.5, 0.9] {
            let mut ones = 0usize;
            let n = 4000u64;
            for s in 0..n {
                ones += rng.bernoulli_word(p, s).count_ones() as usize;
            }
            let total = (n * 64) as f64;
            let got = ones as f64 / total;
            let sigma = (p * (1.0 - p) / total).sqrt();
            assert!((got - p).abs() < 5.0 * sigma, "p={p} got={got}");
        }
    }

    #[test]
    fn normal_moments() {
        let rng = CounterRng::new(5);
        let n = 20000;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for i in 0..n {
            let x = rng.normal(0, i);
            sum += x;
            sq += x * x;
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.03, "mean={mean}");
        assert!((var - 1.0).abs() < 0.05, "var={var}");
    }
}
