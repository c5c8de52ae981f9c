//! Particle-number and Sz restricted determinant space.
//!
//! A determinant is a pair of per-spin occupation bitmasks. Spin orbitals
//! are numbered in blocked order: alpha orbital `i` is spin orbital `i`,
//! beta orbital `i` is spin orbital `n + i`. Jordan-Wigner strings therefore
//! never cross a spin block except as a whole-block count.
//!
//! Each spin string is ranked in lexicographic order of its sorted orbital
//! tuple, and the flat index of a determinant is `c1 * dim_beta + c2`.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of spatial orbitals per spin block.
pub const MAX_ORBITALS: u32 = 64;

const TABLE: usize = MAX_ORBITALS as usize + 1;

fn binomial_table() -> &'static [[u64; TABLE]; TABLE] {
    static TABLE_CELL: OnceLock<Box<[[u64; TABLE]; TABLE]>> = OnceLock::new();
    TABLE_CELL.get_or_init(|| {
        let mut t = Box::new([[0u64; TABLE]; TABLE]);
        for n in 0..TABLE {
            t[n][0] = 1;
            for k in 1..=n {
                // C(64, 32) < 2^61, nothing here overflows.
                t[n][k] = t[n - 1][k - 1] + if k < n { t[n - 1][k] } else { 0 };
            }
        }
        t
    })
}

/// Binomial coefficient C(n, k) for n <= 64; zero when k > n.
pub fn binomial(n: u32, k: u32) -> u64 {
    if k > n || n > MAX_ORBITALS {
        return 0;
    }
    binomial_table()[n as usize][k as usize]
}

/// Number of determinants C(n, k_alpha) * C(n, k_beta).
pub fn dimension(n: u32, k_alpha: u32, k_beta: u32) -> Result<u64> {
    if n > MAX_ORBITALS {
        return Err(Error::IndexOutOfRange(format!(
            "{n} orbitals exceeds the {MAX_ORBITALS}-orbital mask width"
        )));
    }
    if k_alpha > n || k_beta > n {
        return Err(Error::IndexOutOfRange(format!(
            "electron counts ({k_alpha}, {k_beta}) exceed {n} orbitals"
        )));
    }
    binomial(n, k_alpha)
        .checked_mul(binomial(n, k_beta))
        .ok_or(Error::DimensionOverflow { n, k_alpha, k_beta })
}

/// Occupations of one spin block; bit `i` is `n_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OccupationMask(pub u64);

impl OccupationMask {
    pub fn from_orbitals(orbitals: &[u32]) -> Self {
        OccupationMask(orbitals.iter().fold(0u64, |m, &i| m | (1u64 << i)))
    }

    #[inline]
    pub fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn count(self) -> u32 {
        self.0.count_ones()
    }

    #[inline]
    pub fn is_occupied(self, i: u32) -> bool {
        (self.0 >> i) & 1 == 1
    }

    /// Occupied orbitals in ascending order.
    pub fn orbitals(self) -> impl Iterator<Item = u32> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros();
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// Big-endian occupation string `n_{width-1} ... n_0`.
    pub fn to_bit_string(self, width: u32) -> String {
        (0..width)
            .rev()
            .map(|i| if self.is_occupied(i) { '1' } else { '0' })
            .collect()
    }

    /// Parses a big-endian bit string; the rightmost character is orbital 0.
    pub fn from_bit_string(s: &str) -> Option<Self> {
        if s.is_empty() || s.len() > MAX_ORBITALS as usize {
            return None;
        }
        let mut bits = 0u64;
        for (i, c) in s.chars().rev().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1u64 << i,
                _ => return None,
            }
        }
        Some(OccupationMask(bits))
    }
}

impl fmt::Binary for OccupationMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Binary::fmt(&self.0, f)
    }
}

#[inline]
fn low_mask(n: u32) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Lexicographic rank of a k-subset of `0..n`.
pub fn rank(mask: OccupationMask, n: u32, k: u32) -> Result<u64> {
    if n > MAX_ORBITALS || mask.0 & !low_mask(n) != 0 {
        return Err(Error::IndexOutOfRange(format!(
            "mask {:b} does not fit in {n} orbitals",
            mask.0
        )));
    }
    if mask.count() != k {
        return Err(Error::Popcount { found: mask.count(), expected: k });
    }
    Ok(rank_unchecked(mask.0, n, k))
}

/// Rank without validation. Lex order of sorted tuples is reverse colex order
/// of the reflected subset `{n-1-c}`.
#[inline]
pub(crate) fn rank_unchecked(mask: u64, n: u32, k: u32) -> u64 {
    let table = binomial_table();
    let mut colex = 0u64;
    let mut bits = mask;
    let mut i = 0u32;
    while bits != 0 {
        let c = bits.trailing_zeros();
        bits &= bits - 1;
        colex += table[(n - 1 - c) as usize][(k - i) as usize];
        i += 1;
    }
    table[n as usize][k as usize] - 1 - colex
}

/// Inverse of [`rank`].
pub fn unrank(index: u64, n: u32, k: u32) -> Result<OccupationMask> {
    let total = binomial(n, k);
    if n > MAX_ORBITALS || k > n || index >= total {
        return Err(Error::IndexOutOfRange(format!(
            "rank {index} outside [0, C({n},{k}) = {total})"
        )));
    }
    Ok(OccupationMask(unrank_unchecked(index, n, k)))
}

#[inline]
pub(crate) fn unrank_unchecked(index: u64, n: u32, k: u32) -> u64 {
    let table = binomial_table();
    let mut rem = table[n as usize][k as usize] - 1 - index;
    let mut mask = 0u64;
    let mut d = n;
    for i in (1..=k).rev() {
        // largest d with C(d, i) <= rem
        loop {
            d -= 1;
            if table[d as usize][i as usize] <= rem {
                break;
            }
        }
        rem -= table[d as usize][i as usize];
        mask |= 1u64 << (n - 1 - d);
    }
    mask
}

/// Parity of the occupied orbitals strictly between `i` and `j`.
#[inline]
pub fn parity_between(mask: OccupationMask, i: u32, j: u32) -> u32 {
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    if hi - lo < 2 {
        return 0;
    }
    let between = low_mask(hi) & !low_mask(lo + 1);
    (mask.0 & between).count_ones() & 1
}

/// A fermionic creation or annihilation operator on one orbital.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ladder {
    Create(u32),
    Annihilate(u32),
}

/// Applies ladder operators (in application order, i.e. rightmost first) to
/// one spin block. Signs count the occupied orbitals below each target.
#[inline]
pub fn apply_block_ops(mask: OccupationMask, ops: &[Ladder]) -> Option<(OccupationMask, i8)> {
    let mut bits = mask.0;
    let mut parity = 0u32;
    for op in ops {
        match *op {
            Ladder::Create(i) => {
                if (bits >> i) & 1 == 1 {
                    return None;
                }
                parity ^= (bits & low_mask(i)).count_ones() & 1;
                bits |= 1u64 << i;
            }
            Ladder::Annihilate(i) => {
                if (bits >> i) & 1 == 0 {
                    return None;
                }
                parity ^= (bits & low_mask(i)).count_ones() & 1;
                bits &= !(1u64 << i);
            }
        }
    }
    Some((OccupationMask(bits), if parity == 0 { 1 } else { -1 }))
}

/// `a†_p a_r` on one spin block.
pub fn apply_single_excitation(mask: OccupationMask, p: u32, r: u32) -> Option<(OccupationMask, i8)> {
    if p == r {
        return mask.is_occupied(p).then_some((mask, 1));
    }
    if !mask.is_occupied(r) || mask.is_occupied(p) {
        return None;
    }
    let out = OccupationMask((mask.0 & !(1u64 << r)) | (1u64 << p));
    let sign = if parity_between(mask, p, r) == 0 { 1 } else { -1 };
    Some((out, sign))
}

/// An (alpha, beta) occupation pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Determinant {
    pub alpha: OccupationMask,
    pub beta: OccupationMask,
}

impl Determinant {
    pub fn new(alpha: OccupationMask, beta: OccupationMask) -> Self {
        Determinant { alpha, beta }
    }

    /// Applies ladder operators on spin orbitals `0..2n` (blocked order),
    /// rightmost operator first.
    pub fn apply(self, n: u32, ops: &[Ladder]) -> Option<(Determinant, i8)> {
        let mut det = self;
        let mut parity = 0u32;
        for op in ops {
            let (idx, create) = match *op {
                Ladder::Create(i) => (i, true),
                Ladder::Annihilate(i) => (i, false),
            };
            let (block, orb, below_blocks) = if idx < n {
                (&mut det.alpha, idx, 0)
            } else {
                let alpha_count = det.alpha.count();
                (&mut det.beta, idx - n, alpha_count)
            };
            let occupied = block.is_occupied(orb);
            if occupied == create {
                return None;
            }
            parity ^= (below_blocks + (block.0 & low_mask(orb)).count_ones()) & 1;
            block.0 ^= 1u64 << orb;
        }
        Some((det, if parity == 0 { 1 } else { -1 }))
    }

    /// Big-endian string over all `2n` spin orbitals, beta block leftmost.
    pub fn to_bit_string(self, n: u32) -> String {
        format!("{}{}", self.beta.to_bit_string(n), self.alpha.to_bit_string(n))
    }
}

/// `a†_p a†_q a_s a_r` on spin orbitals `0..2n`, applied right to left.
pub fn apply_double_excitation(
    det: Determinant,
    n: u32,
    p: u32,
    q: u32,
    r: u32,
    s: u32,
) -> Option<(Determinant, i8)> {
    det.apply(
        n,
        &[Ladder::Annihilate(r), Ladder::Annihilate(s), Ladder::Create(q), Ladder::Create(p)],
    )
}

/// Flat position of a determinant together with its per-spin ranks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConfigIndex {
    pub c1: u64,
    pub c2: u64,
    pub flat: u64,
}

/// The (n, k_alpha, k_beta) configuration space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeterminantSpace {
    pub n: u32,
    pub k_alpha: u32,
    pub k_beta: u32,
    pub dim_alpha: u64,
    pub dim_beta: u64,
    pub dimension: u64,
}

impl DeterminantSpace {
    pub fn new(n: u32, k_alpha: u32, k_beta: u32) -> Result<Self> {
        let dimension = dimension(n, k_alpha, k_beta)?;
        Ok(DeterminantSpace {
            n,
            k_alpha,
            k_beta,
            dim_alpha: binomial(n, k_alpha),
            dim_beta: binomial(n, k_beta),
            dimension,
        })
    }

    /// Dimension as a storage length.
    pub fn len(&self) -> usize {
        self.dimension as usize
    }

    pub fn is_empty(&self) -> bool {
        self.dimension == 0
    }

    pub fn index_of(&self, det: Determinant) -> Result<ConfigIndex> {
        let c1 = rank(det.alpha, self.n, self.k_alpha)?;
        let c2 = rank(det.beta, self.n, self.k_beta)?;
        Ok(ConfigIndex { c1, c2, flat: c1 * self.dim_beta + c2 })
    }

    pub fn determinant(&self, flat: u64) -> Result<Determinant> {
        if flat >= self.dimension {
            return Err(Error::IndexOutOfRange(format!(
                "flat index {flat} outside [0, {})",
                self.dimension
            )));
        }
        let c1 = flat / self.dim_beta;
        let c2 = flat % self.dim_beta;
        Ok(Determinant {
            alpha: OccupationMask(unrank_unchecked(c1, self.n, self.k_alpha)),
            beta: OccupationMask(unrank_unchecked(c2, self.n, self.k_beta)),
        })
    }

    /// All determinants in flat-index order.
    pub fn determinants(&self) -> impl Iterator<Item = Determinant> + '_ {
        let alphas: Vec<u64> = (0..self.dim_alpha)
            .map(|i| unrank_unchecked(i, self.n, self.k_alpha))
            .collect();
        let betas: Vec<u64> = (0..self.dim_beta)
            .map(|i| unrank_unchecked(i, self.n, self.k_beta))
            .collect();
        alphas.into_iter().flat_map(move |a| {
            let betas = betas.clone();
            betas
                .into_iter()
                .map(move |b| Determinant::new(OccupationMask(a), OccupationMask(b)))
        })
    }
}

/// Scatters the low `popcount(positions)` bits of `compact` onto `positions`.
#[inline]
fn deposit(mut compact: u64, mut positions: u64) -> u64 {
    let mut out = 0u64;
    while positions != 0 && compact != 0 {
        let low = positions & positions.wrapping_neg();
        if compact & 1 == 1 {
            out |= low;
        }
        compact >>= 1;
        positions &= positions - 1;
    }
    out
}

/// Calls `f` with every `k`-electron string over `n` orbitals that has all of
/// `required` set and none of `forbidden`. Order is unspecified but fixed.
pub fn for_each_string<F: FnMut(u64)>(n: u32, k: u32, required: u64, forbidden: u64, mut f: F) {
    let universe = low_mask(n);
    if required & forbidden != 0 || required & !universe != 0 {
        return;
    }
    let fixed = required.count_ones();
    if fixed > k {
        return;
    }
    let free = universe & !required & !forbidden;
    let slots = free.count_ones();
    let m = k - fixed;
    if m > slots {
        return;
    }
    if m == 0 {
        f(required);
        return;
    }
    // Gosper's hack over `slots`-bit words with `m` bits set.
    let limit = if slots >= 64 { None } else { Some(1u64 << slots) };
    let mut combo: u64 = low_mask(m);
    loop {
        f(required | deposit(combo, free));
        let c = combo & combo.wrapping_neg();
        let r = combo.wrapping_add(c);
        if r == 0 {
            break;
        }
        let next = (((r ^ combo) >> 2) / c) | r;
        if limit.is_some_and(|l| next >= l) {
            break;
        }
        combo = next;
    }
}
