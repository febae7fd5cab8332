//! Binary model state: a fixed-length bit vector with flip addressing.

const WORD_BITS: usize = 64;

/// A model m ∈ {0,1}^k, stored as packed 64-bit words. The length is fixed at
/// construction; trailing bits of the last word are kept zero so that
/// equality and hashing work on the raw words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryModel {
    words: Vec<u64>,
    k: usize,
}

impl BinaryModel {
    /// The all-zeros model of dimension `k`.
    pub fn zeros(k: usize) -> Self {
        assert!(k > 0, "model dimension must be positive");
        Self {
            words: vec![0; k.div_ceil(WORD_BITS)],
            k,
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut m = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                m.flip(i);
            }
        }
        m
    }

    /// Unpacks the low `k` bits of `index` (element i = bit i). Only sensible
    /// for the small spaces the exact oracle enumerates.
    pub fn from_index(index: usize, k: usize) -> Self {
        assert!(k <= usize::BITS as usize);
        let mut m = Self::zeros(k);
        for i in 0..k {
            if index >> i & 1 == 1 {
                m.flip(i);
            }
        }
        m
    }

    /// Packs the bits into a state index; inverse of [`from_index`].
    ///
    /// [`from_index`]: BinaryModel::from_index
    pub fn to_index(&self) -> usize {
        assert!(self.k <= usize::BITS as usize, "state does not fit an index");
        self.words[0] as usize & (usize::MAX >> (usize::BITS as usize - self.k))
    }

    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.k);
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.k);
        self.words[i / WORD_BITS] ^= 1 << (i % WORD_BITS);
    }

    /// Returns the model with element `i` flipped, leaving `self` unchanged.
    pub fn flipped(&self, i: usize) -> Self {
        let mut m = self.clone();
        m.flip(i);
        m
    }

    /// |H_{m,m'}|: the number of elements in which the two models differ.
    pub fn hamming(&self, other: &Self) -> usize {
        assert_eq!(self.k, other.k, "hamming distance needs equal dimensions");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// The differing element indices H_{m,m'}, ascending.
    pub fn diff_indices(&self, other: &Self) -> Vec<u32> {
        assert_eq!(self.k, other.k);
        let mut out = Vec::new();
        for (w, (a, b)) in self.words.iter().zip(&other.words).enumerate() {
            let mut x = a ^ b;
            while x != 0 {
                let bit = x.trailing_zeros();
                out.push((w * WORD_BITS) as u32 + bit);
                x &= x - 1;
            }
        }
        out
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Indices of the elements set to 1, ascending.
    pub fn ones(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.count_ones());
        for (w, word) in self.words.iter().enumerate() {
            let mut x = *word;
            while x != 0 {
                let bit = x.trailing_zeros();
                out.push((w * WORD_BITS) as u32 + bit);
                x &= x - 1;
            }
        }
        out
    }

    pub fn iter_bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.k).map(move |i| self.get(i))
    }

    /// 64-bit fingerprint of the state, used to tag rate vectors with the
    /// model they were computed at.
    pub fn fingerprint(&self) -> u64 {
        let mut h = 0x51_7c_c1_b7_27_22_0a_95u64 ^ (self.k as u64);
        for &w in &self.words {
            h = (h ^ w).wrapping_mul(0x9e37_79b9_7f4a_7c15);
            h ^= h >> 29;
        }
        h
    }
}

impl std::fmt::Debug for BinaryModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BinaryModel(")?;
        for b in self.iter_bits() {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flip_is_an_involution() {
        let mut m = BinaryModel::from_bits(&[true, false, true, false, false]);
        let original = m.clone();
        for i in 0..m.len() {
            m.flip(i);
            m.flip(i);
        }
        assert_eq!(m, original);
    }

    #[test]
    fn hamming_counts_differing_elements() {
        let a = BinaryModel::from_bits(&[true, false, true, false]);
        let b = BinaryModel::from_bits(&[false, false, true, true]);
        assert_eq!(a.hamming(&b), 2);
        assert_eq!(a.diff_indices(&b), vec![0, 3]);
        assert_eq!(a.hamming(&a), 0);
    }

    #[test]
    fn index_round_trip() {
        for idx in 0..32 {
            let m = BinaryModel::from_index(idx, 5);
            assert_eq!(m.to_index(), idx);
        }
        // Element i is bit i: index 2 = (0, 1, 0, ...).
        let m = BinaryModel::from_index(2, 3);
        assert!(!m.get(0) && m.get(1) && !m.get(2));
    }

    #[test]
    fn ones_lists_set_elements_across_words() {
        let mut m = BinaryModel::zeros(130);
        for &i in &[0usize, 63, 64, 129] {
            m.flip(i);
        }
        assert_eq!(m.ones(), vec![0, 63, 64, 129]);
        assert_eq!(m.count_ones(), 4);
    }

    #[test]
    fn fingerprint_tracks_state() {
        let a = BinaryModel::from_bits(&[true, false, true]);
        let mut b = a.clone();
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.flip(1);
        assert_ne!(a.fingerprint(), b.fingerprint());
    }
}
