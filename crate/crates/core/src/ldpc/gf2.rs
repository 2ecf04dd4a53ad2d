//! Dense GF(2) rows packed into 64-bit words.

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct BitRow {
    words: Vec<u64>,
}

impl BitRow {
    pub(crate) fn zeros(bits: usize) -> Self {
        Self {
            words: vec![0; bits.div_ceil(64)],
        }
    }

    #[inline]
    pub(crate) fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub(crate) fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1 << (i % 64);
    }

    #[inline]
    pub(crate) fn xor_assign(&mut self, other: &BitRow) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Parity of the bitwise AND with `other`.
    #[inline]
    pub(crate) fn dot(&self, other: &BitRow) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            % 2
            == 1
    }

    #[cfg(test)]
    pub(crate) fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }
}

/// Gauss-Jordan elimination in place. Returns the pivot column of each
/// surviving row; rows after the rank are zero and removed.
pub(crate) fn reduce(rows: &mut Vec<BitRow>, cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(found) = (r..rows.len()).find(|&i| rows[i].get(c)) else {
            continue;
        };
        rows.swap(r, found);
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row.get(c) {
                row.xor_assign(&pivot);
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(bits: &[u8]) -> BitRow {
        let mut r = BitRow::zeros(bits.len());
        for (i, b) in bits.iter().enumerate() {
            if *b == 1 {
                r.set(i);
            }
        }
        r
    }

    #[test]
    fn rank_of_dependent_rows() {
        let mut rows = vec![row(&[1, 1, 0, 0]), row(&[0, 1, 1, 0]), row(&[1, 0, 1, 0]), row(&[0, 0, 0, 1])];
        let pivots = reduce(&mut rows, 4);
        assert_eq!(pivots, vec![0, 1, 3]);
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0], row(&[1, 0, 1, 0]));
        assert_eq!(rows[1], row(&[0, 1, 1, 0]));
    }

    #[test]
    fn dot_and_flip() {
        let mut a = row(&[1, 0, 1, 1]);
        let b = row(&[1, 1, 1, 0]);
        assert!(!a.dot(&b));
        a.flip(1);
        assert!(a.dot(&b));
        assert!(!a.is_zero());
        assert!(BitRow::zeros(130).is_zero());
    }
}
