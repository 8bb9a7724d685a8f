//! Dense bit-level linear algebra over GF(2).
//!
//! Words are capped at 128 bits and packed into a single `u128`, which keeps
//! encoding and syndrome checks down to a handful of XOR/popcount
//! instructions inside the guessing loops. The external contract is
//! position-indexed bits only; bit 0 is the first transmitted bit.

use crate::{Error, Result};

/// Maximum supported block length.
pub const MAX_BITS: usize = 128;

/// A fixed-length binary word of up to [`MAX_BITS`] bits.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitWord {
    bits: u128,
    len: usize,
}

impl BitWord {
    /// All-zero word of length `len`.
    pub fn zeros(len: usize) -> Self {
        assert!(len <= MAX_BITS, "word length {len} exceeds {MAX_BITS}");
        Self { bits: 0, len }
    }

    /// Build from raw packed bits; bits above `len` must be clear.
    pub fn from_raw(bits: u128, len: usize) -> Self {
        assert!(len <= MAX_BITS);
        assert!(len == MAX_BITS || bits >> len == 0, "stray bits above len");
        Self { bits, len }
    }

    /// Build from a 0/1 slice, index 0 first.
    pub fn from_bits(vals: &[u8]) -> Self {
        let mut w = Self::zeros(vals.len());
        for (i, &v) in vals.iter().enumerate() {
            if v != 0 {
                w.set(i, true);
            }
        }
        w
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range (len {})", self.len);
        (self.bits >> i) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        assert!(i < self.len, "bit index {i} out of range (len {})", self.len);
        if v {
            self.bits |= 1u128 << i;
        } else {
            self.bits &= !(1u128 << i);
        }
    }

    /// Raw packed bits.
    pub fn raw(&self) -> u128 {
        self.bits
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    /// Indices of set bits, ascending.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        let mut rest = self.bits;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }

    pub fn xor(&self, other: &Self) -> Self {
        assert_eq!(self.len, other.len, "xor of unequal-length words");
        Self {
            bits: self.bits ^ other.bits,
            len: self.len,
        }
    }
}

impl std::ops::BitXor for BitWord {
    type Output = BitWord;
    fn bitxor(self, rhs: BitWord) -> BitWord {
        self.xor(&rhs)
    }
}

impl std::fmt::Debug for BitWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        Ok(())
    }
}

impl std::fmt::Display for BitWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

/// A dense binary matrix, one `u128` per row.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u128>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(cols <= MAX_BITS, "column count {cols} exceeds {MAX_BITS}");
        Self {
            rows,
            cols,
            data: vec![0; rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Build from a row-major 0/1 slice.
    pub fn from_rows(rows: usize, cols: usize, vals: &[u8]) -> Self {
        assert_eq!(vals.len(), rows * cols, "value count must be rows*cols");
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                if vals[r * cols + c] != 0 {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        (self.data[r] >> c) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        if v {
            self.data[r] |= 1u128 << c;
        } else {
            self.data[r] &= !(1u128 << c);
        }
    }

    /// Row `r` as a word of length `cols`.
    pub fn row(&self, r: usize) -> BitWord {
        assert!(r < self.rows, "row {r} out of range");
        BitWord::from_raw(self.data[r], self.cols)
    }

    /// Matrix-vector product over GF(2), `word` as a column vector.
    pub fn mul_word(&self, word: &BitWord) -> BitWord {
        assert_eq!(word.len(), self.cols, "length mismatch in mul_word");
        let mut out = BitWord::zeros(self.rows);
        for r in 0..self.rows {
            if (self.data[r] & word.raw()).count_ones() & 1 == 1 {
                out.set(r, true);
            }
        }
        out
    }

    /// Rank via Gaussian elimination on a scratch copy.
    pub fn rank(&self) -> usize {
        let mut rows: Vec<u128> = self.data.clone();
        let mut rank = 0;
        for c in 0..self.cols {
            let Some(p) = (rank..rows.len()).find(|&r| (rows[r] >> c) & 1 == 1) else {
                continue;
            };
            rows.swap(rank, p);
            for r in 0..rows.len() {
                if r != rank && (rows[r] >> c) & 1 == 1 {
                    rows[r] ^= rows[rank];
                }
            }
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rank
    }
}

impl std::fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "{}", self.row(r))?;
        }
        Ok(())
    }
}

/// An (n,k) binary linear code held in systematic form.
///
/// `G = [I_k | P]` and `H = [Pᵀ | I_{n-k}]` live in permuted (systematic)
/// coordinates; `perm` maps systematic-form column `j` back to the original
/// code column `perm[j]`. The linear transform is computed once here and
/// never per decoding.
#[derive(Clone)]
pub struct SystematicCode {
    n: usize,
    k: usize,
    /// Non-identity part of the systematic generator, k x (n-k).
    p: BitMatrix,
    /// Parity-check matrix in original coordinates, (n-k) x n.
    h: BitMatrix,
    /// Systematic-form column j sits at original column perm[j].
    perm: Vec<usize>,
    /// Generator rows in original coordinates: g_rows[i] = encode(e_i).
    g_rows: Vec<u128>,
    /// True iff every codeword has even Hamming weight.
    even: bool,
}

impl SystematicCode {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p_matrix(&self) -> &BitMatrix {
        &self.p
    }

    pub fn h_matrix(&self) -> &BitMatrix {
        &self.h
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Original positions of the k systematic (information) bits.
    pub fn systematic_positions(&self) -> &[usize] {
        &self.perm[..self.k]
    }

    /// True iff all codewords have even weight.
    pub fn is_even_code(&self) -> bool {
        self.even
    }

    /// info·G with the column permutation applied; systematic positions of
    /// the output carry `info` verbatim.
    pub fn encode(&self, info: &BitWord) -> Result<BitWord> {
        if info.len() != self.k {
            return Err(Error::LengthMismatch {
                expected: self.k,
                got: info.len(),
            });
        }
        Ok(BitWord::from_raw(self.encode_raw(info.raw()), self.n))
    }

    /// Hot-path encode on packed info bits.
    #[inline]
    pub(crate) fn encode_raw(&self, info: u128) -> u128 {
        let mut acc = 0u128;
        let mut rest = info;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            acc ^= self.g_rows[i];
        }
        acc
    }

    /// H·wordᵀ in original coordinates; zero iff `word` is a codeword.
    pub fn syndrome(&self, word: &BitWord) -> Result<BitWord> {
        if word.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: word.len(),
            });
        }
        Ok(self.h.mul_word(word))
    }

    /// Hot-path membership test on packed bits.
    #[inline]
    pub(crate) fn is_codeword_raw(&self, word: u128) -> bool {
        self.h
            .data
            .iter()
            .all(|row| (row & word).count_ones() & 1 == 0)
    }

    /// Read the information bits back out of a codeword.
    pub fn extract_info(&self, word: &BitWord) -> Result<BitWord> {
        if word.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: word.len(),
            });
        }
        let mut info = BitWord::zeros(self.k);
        for (j, &pos) in self.perm[..self.k].iter().enumerate() {
            info.set(j, word.get(pos));
        }
        Ok(info)
    }
}

/// Reduce a full-rank generator matrix to systematic form `[I_k | P]`,
/// recording the column permutation, and construct `H = [Pᵀ | I_{n-k}]`.
///
/// Column swaps prefer the lowest-index swappable column so the permutation
/// is deterministic.
pub fn to_systematic(g_raw: &BitMatrix) -> Result<SystematicCode> {
    let k = g_raw.rows();
    let n = g_raw.cols();
    if k == 0 || k > n {
        return Err(Error::BadDimensions { n, k });
    }
    let mut rows: Vec<u128> = (0..k).map(|r| g_raw.row(r).raw()).collect();
    let mut perm: Vec<usize> = (0..n).collect();

    for r in 0..k {
        if (r..k).all(|i| (rows[i] >> r) & 1 == 0) {
            // No pivot in column r; swap in the lowest later column that has one.
            let Some(c) = (r + 1..n).find(|&c| (r..k).any(|i| (rows[i] >> c) & 1 == 1)) else {
                return Err(Error::RankDeficient { rank: r, k });
            };
            let keep = !((1u128 << r) | (1u128 << c));
            for row in rows.iter_mut() {
                let br = (*row >> r) & 1;
                let bc = (*row >> c) & 1;
                *row = (*row & keep) | (bc << r) | (br << c);
            }
            perm.swap(r, c);
        }
        let p = (r..k).find(|&i| (rows[i] >> r) & 1 == 1).expect("pivot");
        rows.swap(r, p);
        for i in 0..k {
            if i != r && (rows[i] >> r) & 1 == 1 {
                rows[i] ^= rows[r];
            }
        }
    }

    // P = columns k..n of the reduced rows.
    let mut p = BitMatrix::zeros(k, n - k);
    for (i, &row) in rows.iter().enumerate() {
        for j in 0..n - k {
            if (row >> (k + j)) & 1 == 1 {
                p.set(i, j, true);
            }
        }
    }

    // H = [Pᵀ | I_{n-k}] in systematic coordinates, then undo the permutation.
    let mut h = BitMatrix::zeros(n - k, n);
    for j in 0..n - k {
        for (i, &orig) in perm.iter().take(k).enumerate() {
            if p.get(i, j) {
                h.set(j, orig, true);
            }
        }
        h.set(j, perm[k + j], true);
    }

    // Generator rows in original coordinates.
    let mut g_rows = vec![0u128; k];
    for i in 0..k {
        let mut row = 0u128;
        row |= 1u128 << perm[i];
        for j in 0..n - k {
            if p.get(i, j) {
                row |= 1u128 << perm[k + j];
            }
        }
        g_rows[i] = row;
    }
    let even = g_rows.iter().all(|r| r.count_ones() & 1 == 0);

    Ok(SystematicCode {
        n,
        k,
        p,
        h,
        perm,
        g_rows,
        even,
    })
}
