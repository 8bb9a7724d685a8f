//! Construction of the concrete codes used by the workbench: seeded random
//! linear codes, extended BCH codes, and square product codes, plus a string
//! registry for the CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::gf2::{to_systematic, BitMatrix, BitWord, SystematicCode};
use crate::{Error, Result};

/// Code family selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodeFamily {
    Rlc,
    Ebch,
    ExtHamming,
}

/// A constructible code description.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CodeSpec {
    pub family: CodeFamily,
    pub n: usize,
    pub k: usize,
    /// Seed for the RLC ensemble; ignored by the algebraic families.
    pub seed: u64,
}

impl CodeSpec {
    pub fn build(&self) -> Result<SystematicCode> {
        match self.family {
            CodeFamily::Rlc => make_rlc(self.n, self.k, self.seed),
            CodeFamily::Ebch | CodeFamily::ExtHamming => make_ebch(self.n, self.k),
        }
    }
}

/// Systematic random linear code: `G = [I_k | P]` with `P` drawn i.i.d.
/// uniform from a seeded generator. A given (n, k, seed) always yields the
/// identical code.
pub fn make_rlc(n: usize, k: usize, seed: u64) -> Result<SystematicCode> {
    if k == 0 || k >= n || n > crate::gf2::MAX_BITS {
        return Err(Error::BadDimensions { n, k });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut g = BitMatrix::zeros(k, n);
    for r in 0..k {
        g.set(r, r, true);
        for c in k..n {
            g.set(r, c, rng.random::<bool>());
        }
    }
    to_systematic(&g)
}

/// Generator polynomials of the single-error-correcting cyclic codes the
/// extended constructions start from, lowest coefficient first.
fn bch_generator_poly(cyclic_len: usize) -> Option<&'static [u8]> {
    match cyclic_len {
        7 => Some(&[1, 1, 0, 1]),          // x^3 + x + 1
        15 => Some(&[1, 1, 0, 0, 1]),      // x^4 + x + 1
        31 => Some(&[1, 0, 1, 0, 0, 1]),   // x^5 + x^2 + 1
        63 => Some(&[1, 1, 0, 0, 0, 0, 1]) // x^6 + x + 1
        ,
        _ => None,
    }
}

/// Extended BCH code: the cyclic code of length n-1 generated by the family
/// polynomial, extended by an overall even-parity bit in the last position,
/// then systematized. Supported (n, k): (8,4), (16,11), (32,26), (64,57).
pub fn make_ebch(n: usize, k: usize) -> Result<SystematicCode> {
    let supported = matches!((n, k), (8, 4) | (16, 11) | (32, 26) | (64, 57));
    if !supported {
        return Err(Error::UnsupportedCode(format!("ebch-{n}-{k}")));
    }
    let cyclic_len = n - 1;
    let g_poly = bch_generator_poly(cyclic_len).expect("supported length");
    debug_assert_eq!(g_poly.len() - 1, cyclic_len - k);

    let mut g = BitMatrix::zeros(k, n);
    for row in 0..k {
        let mut weight = 0u32;
        for (j, &coef) in g_poly.iter().enumerate() {
            if coef != 0 {
                g.set(row, row + j, true);
                weight += 1;
            }
        }
        // Overall parity bit keeps every row (hence every codeword) even.
        if weight % 2 == 1 {
            g.set(row, n - 1, true);
        }
    }
    to_systematic(&g)
}

/// A square product code built from one systematic component code: info bits
/// fill a k x k array, rows are encoded, then the n resulting columns.
#[derive(Clone)]
pub struct ProductCode {
    component: SystematicCode,
}

impl ProductCode {
    pub fn component(&self) -> &SystematicCode {
        &self.component
    }

    /// Component block length.
    pub fn n(&self) -> usize {
        self.component.n()
    }

    /// Component dimension.
    pub fn k(&self) -> usize {
        self.component.k()
    }

    /// Overall block length n^2.
    pub fn block_len(&self) -> usize {
        self.n() * self.n()
    }

    /// Overall dimension k^2.
    pub fn dimension(&self) -> usize {
        self.k() * self.k()
    }

    pub fn rate(&self) -> f64 {
        self.dimension() as f64 / self.block_len() as f64
    }

    /// Encode a k x k info array (given as k rows) into an n x n code array
    /// (returned as n rows): encode every row, then every column.
    pub fn encode(&self, info_rows: &[BitWord]) -> Result<Vec<BitWord>> {
        let (n, k) = (self.n(), self.k());
        if info_rows.len() != k {
            return Err(Error::LengthMismatch {
                expected: k,
                got: info_rows.len(),
            });
        }
        let row_codewords: Vec<BitWord> = info_rows
            .iter()
            .map(|r| self.component.encode(r))
            .collect::<Result<_>>()?;
        let mut out = vec![BitWord::zeros(n); n];
        for col in 0..n {
            let mut col_info = BitWord::zeros(k);
            for (i, rcw) in row_codewords.iter().enumerate() {
                col_info.set(i, rcw.get(col));
            }
            let col_cw = self.component.encode(&col_info)?;
            for (r, out_row) in out.iter_mut().enumerate() {
                out_row.set(col, col_cw.get(r));
            }
        }
        Ok(out)
    }

    /// True iff every row and every column has zero syndrome.
    pub fn is_valid(&self, rows: &[BitWord]) -> bool {
        let n = self.n();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return false;
        }
        if !rows
            .iter()
            .all(|r| self.component.syndrome(r).map(|s| s.is_zero()).unwrap_or(false))
        {
            return false;
        }
        (0..n).all(|c| {
            let mut col = BitWord::zeros(n);
            for (r, row) in rows.iter().enumerate() {
                col.set(r, row.get(c));
            }
            self.component
                .syndrome(&col)
                .map(|s| s.is_zero())
                .unwrap_or(false)
        })
    }

    /// Read the k x k info array back out of a code array; info bit (i, j)
    /// sits at array position `(perm[i], perm[j])`.
    pub fn extract_info(&self, rows: &[BitWord]) -> Result<Vec<BitWord>> {
        let k = self.k();
        if rows.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                got: rows.len(),
            });
        }
        let sys = self.component.systematic_positions();
        let mut info = vec![BitWord::zeros(k); k];
        for i in 0..k {
            for j in 0..k {
                info[i].set(j, rows[sys[i]].get(sys[j]));
            }
        }
        Ok(info)
    }
}

/// Wrap a component code into its square product code.
pub fn make_product(component: SystematicCode) -> ProductCode {
    ProductCode { component }
}

/// A code resolved from the string registry.
pub enum RegistryCode {
    Linear(SystematicCode),
    Product(ProductCode),
}

/// Fixed identifiers always present in the registry. RLC identifiers are
/// parameterized as `rlc-<n>-<k>-s<seed>` and resolved on demand.
pub fn registry_ids() -> Vec<&'static str> {
    vec![
        "ebch-8-4",
        "ebch-16-11",
        "ebch-32-26",
        "ebch-64-57",
        "product-ebch-16-11",
        "product-ebch-32-26",
        "product-ebch-64-57",
    ]
}

/// Resolve a code id: `ebch-<n>-<k>`, `rlc-<n>-<k>-s<seed>` (the `n`/`k`
/// markers of `rlc-n32-k26-s7` are also accepted), or `product-<component>`.
pub fn lookup(id: &str) -> Result<RegistryCode> {
    if let Some(rest) = id.strip_prefix("product-") {
        return match lookup(rest)? {
            RegistryCode::Linear(c) => Ok(RegistryCode::Product(make_product(c))),
            RegistryCode::Product(_) => Err(Error::UnsupportedCode(id.to_string())),
        };
    }
    let bad = || Error::UnsupportedCode(id.to_string());
    let fields: Vec<&str> = id.split('-').collect();
    match fields.as_slice() {
        ["ebch", n, k] => {
            let n = n.parse().map_err(|_| bad())?;
            let k = k.parse().map_err(|_| bad())?;
            Ok(RegistryCode::Linear(make_ebch(n, k)?))
        }
        ["rlc", n, k, s] => {
            let n = n.trim_start_matches('n').parse().map_err(|_| bad())?;
            let k = k.trim_start_matches('k').parse().map_err(|_| bad())?;
            let seed = s.trim_start_matches('s').parse().map_err(|_| bad())?;
            Ok(RegistryCode::Linear(make_rlc(n, k, seed)?))
        }
        _ => Err(bad()),
    }
}
