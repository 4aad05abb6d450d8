use rand::RngCore;

/// Packed bit string; bit `i` is bit `i % 64` of word `i / 64`. Bits past
/// `len` in the last word are always zero.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

fn word_count(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self { words: vec![0; word_count(len)], len }
    }

    pub fn random(len: usize, rng: &mut impl RngCore) -> Self {
        let mut words: Vec<u64> = (0..word_count(len)).map(|_| rng.next_u64()).collect();
        mask_tail(&mut words, len);
        Self { words, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if bit {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Copy of bits `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        assert!(start <= end && end <= self.len, "slice {start}..{end} of {}", self.len);
        let len = end - start;
        let shift = start % 64;
        let first = start / 64;
        let mut words: Vec<u64> = (0..word_count(len))
            .map(|w| {
                let q = first + w;
                let lo = self.words[q] >> shift;
                let hi = if shift > 0 { self.words.get(q + 1).map_or(0, |&x| x << (64 - shift)) } else { 0 };
                lo | hi
            })
            .collect();
        mask_tail(&mut words, len);
        Self { words, len }
    }

    /// Appends `other` after the last bit.
    pub fn append(&mut self, other: &BitString) {
        let shift = self.len % 64;
        if shift == 0 {
            self.words.extend_from_slice(&other.words);
        } else {
            for &w in &other.words {
                *self.words.last_mut().expect("nonempty when shift > 0") |= w << shift;
                self.words.push(w >> (64 - shift));
            }
        }
        self.len += other.len;
        self.words.truncate(word_count(self.len));
        mask_tail(&mut self.words, self.len);
    }

    /// XORs `other` into the leading bits; `other` is implicitly padded
    /// with trailing zeros.
    pub fn xor_prefix(&mut self, other: &BitString) {
        assert!(other.len <= self.len, "xor of {} bits into {}", other.len, self.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn as_words(&self) -> &[u64] {
        &self.words
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        bytes.truncate(self.len.div_ceil(8));
        bytes
    }
}

fn mask_tail(words: &mut [u64], len: usize) {
    let rem = len % 64;
    if rem != 0 {
        if let Some(last) = words.last_mut() {
            *last &= (1u64 << rem) - 1;
        }
    }
}
