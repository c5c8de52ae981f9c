//! First-order Trotter steps applied directly to determinant amplitudes.
//!
//! Diagonal classes (`pp`, `pqqp`) multiply each amplitude by a phase.
//! Off-diagonal classes (`pq`, `pqqr`, `pqrs`) have the form `h (X + X†)`;
//! on the two configurations `X` connects, with `X|src> = s|tgt>`, the
//! exponential is the 2x2 rotation
//!
//! ```text
//! [ cos θ          -i s sin θ ]
//! [ -i s sin θ     cos θ      ]     θ = h t / r,  s = (-1)^η
//! ```
//!
//! and identity on configurations `X` and `X†` both annihilate.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::determinant::{
    apply_block_ops, for_each_string, rank_unchecked, unrank_unchecked, Determinant,
    DeterminantSpace, Ladder, OccupationMask,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{ClassifiedHamiltonian, OffDiagonalTerm, PpTerm, PqqpTerm};
use crate::scalar::Real;

/// Complex amplitudes over a [`DeterminantSpace`] in flat-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    pub space: DeterminantSpace,
    pub amps: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    pub fn zeros(space: DeterminantSpace) -> Self {
        StateVector { space, amps: vec![Complex::new(T::zero(), T::zero()); space.len()] }
    }

    pub fn basis(space: DeterminantSpace, det: Determinant) -> Result<Self> {
        let mut v = Self::zeros(space);
        let idx = space.index_of(det)?;
        v.amps[idx.flat as usize] = Complex::new(T::one(), T::zero());
        Ok(v)
    }

    pub fn from_amplitudes(space: DeterminantSpace, amps: Vec<Complex<T>>) -> Result<Self> {
        if amps.len() != space.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for a space of dimension {}",
                amps.len(),
                space.dimension
            )));
        }
        Ok(StateVector { space, amps })
    }

    /// Euclidean norm, accumulated in `f64`.
    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.to_f64_norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`, accumulated in `f64`.
    pub fn inner(&self, other: &Self) -> Complex<f64> {
        inner_f64(&self.amps, &other.amps)
    }

    pub fn cast<U: Real>(&self) -> StateVector<U> {
        StateVector {
            space: self.space,
            amps: self
                .amps
                .iter()
                .map(|a| Complex::new(U::from_f64_lossy(a.re.to_f64_lossy()), U::from_f64_lossy(a.im.to_f64_lossy())))
                .collect(),
        }
    }
}

trait NormSqrF64 {
    fn to_f64_norm_sqr(&self) -> f64;
}

impl<T: Real> NormSqrF64 for Complex<T> {
    #[inline]
    fn to_f64_norm_sqr(&self) -> f64 {
        let (re, im) = (self.re.to_f64_lossy(), self.im.to_f64_lossy());
        re * re + im * im
    }
}

/// `Σ conj(a_i) b_i` in `f64`, summed pairwise so the result does not depend
/// on how the caller chunks the work.
pub(crate) fn inner_f64<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<f64> {
    const LEAF: usize = 256;
    if a.len() <= LEAF {
        let mut acc = Complex::new(0.0, 0.0);
        for (x, y) in a.iter().zip(b) {
            let x = Complex::new(x.re.to_f64_lossy(), x.im.to_f64_lossy());
            let y = Complex::new(y.re.to_f64_lossy(), y.im.to_f64_lossy());
            acc += x.conj() * y;
        }
        acc
    } else {
        let mid = a.len() / 2;
        inner_f64(&a[..mid], &b[..mid]) + inner_f64(&a[mid..], &b[mid..])
    }
}

/// Order in which off-diagonal terms are applied within a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TermOrdering {
    /// pq, then pqqr, then pqrs, each sorted by canonical index key.
    #[default]
    Default,
    /// pq, then pqqr, then pqrs, each in the order the classifier produced.
    AsParsed,
}

impl std::str::FromStr for TermOrdering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(TermOrdering::Default),
            "as-parsed" => Ok(TermOrdering::AsParsed),
            other => Err(Error::Config(format!("unknown ordering {other:?}"))),
        }
    }
}

/// What happens to the scalar offset of the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OffsetPolicy {
    /// Not applied as a phase; readout adds it back to energies.
    #[default]
    Tracked,
    /// Applied as the global phase `exp(-i offset t / r)` once per step.
    Applied,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrotterConfig {
    pub t: f64,
    pub r: u32,
    pub ordering: TermOrdering,
    pub offset: OffsetPolicy,
}

impl Default for TrotterConfig {
    fn default() -> Self {
        TrotterConfig { t: 1.0, r: 1, ordering: TermOrdering::Default, offset: OffsetPolicy::Tracked }
    }
}

impl TrotterConfig {
    pub fn new(t: f64, r: u32) -> Self {
        TrotterConfig { t, r, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 {
            return Err(Error::Config("trotter steps r must be at least 1".into()));
        }
        if !self.t.is_finite() {
            return Err(Error::Config(format!("evolution time {} is not finite", self.t)));
        }
        Ok(())
    }

    /// `t / r`, the time per step.
    pub fn time_step(&self) -> f64 {
        self.t / self.r as f64
    }
}

/// Per-string diagonal energies, split so that a step never needs a
/// dimension-sized table.
#[derive(Debug, Clone)]
struct DiagonalTable {
    n: u32,
    alpha_masks: Vec<u64>,
    beta_masks: Vec<u64>,
    alpha_energy: Vec<f64>,
    beta_energy: Vec<f64>,
    // coupling[p * n + q] multiplies n_{p alpha} n_{q beta}
    coupling: Vec<f64>,
    has_coupling: bool,
    empty: bool,
}

impl DiagonalTable {
    fn new<T: Real>(space: &DeterminantSpace, pp: &[PpTerm<T>], pqqp: &[PqqpTerm<T>]) -> Self {
        let n = space.n;
        let nu = n as usize;
        let alpha_masks: Vec<u64> =
            (0..space.dim_alpha).map(|i| unrank_unchecked(i, n, space.k_alpha)).collect();
        let beta_masks: Vec<u64> =
            (0..space.dim_beta).map(|i| unrank_unchecked(i, n, space.k_beta)).collect();
        let mut alpha_one = vec![0.0; nu];
        let mut beta_one = vec![0.0; nu];
        let mut alpha_pair = Vec::new();
        let mut beta_pair = Vec::new();
        let mut coupling = vec![0.0; nu * nu];
        let mut has_coupling = false;
        for t in pp {
            let h = t.h.to_f64_lossy();
            if t.p < n {
                alpha_one[t.p as usize] += h;
            } else {
                beta_one[(t.p - n) as usize] += h;
            }
        }
        for t in pqqp {
            let h = t.h.to_f64_lossy();
            match (t.p < n, t.q < n) {
                (true, true) => alpha_pair.push((t.p, t.q, h)),
                (false, false) => beta_pair.push((t.p - n, t.q - n, h)),
                (a_first, _) => {
                    let (a, b) = if a_first { (t.p, t.q - n) } else { (t.q, t.p - n) };
                    coupling[a as usize * nu + b as usize] += h;
                    has_coupling = true;
                }
            }
        }
        let energy = |masks: &[u64], one: &[f64], pair: &[(u32, u32, f64)]| -> Vec<f64> {
            masks
                .iter()
                .map(|&m| {
                    let mut e = 0.0;
                    for i in OccupationMask(m).orbitals() {
                        e += one[i as usize];
                    }
                    for &(p, q, h) in pair {
                        if (m >> p) & 1 == 1 && (m >> q) & 1 == 1 {
                            e += h;
                        }
                    }
                    e
                })
                .collect()
        };
        let alpha_energy = energy(&alpha_masks, &alpha_one, &alpha_pair);
        let beta_energy = energy(&beta_masks, &beta_one, &beta_pair);
        DiagonalTable {
            n,
            alpha_masks,
            beta_masks,
            alpha_energy,
            beta_energy,
            coupling,
            has_coupling,
            empty: pp.is_empty() && pqqp.is_empty(),
        }
    }

    /// Multiplies every amplitude by `exp(-i E(config) scale)`.
    fn apply<T: Real>(&self, amps: &mut [Complex<T>], scale: f64) {
        if self.empty {
            return;
        }
        let nu = self.n as usize;
        let dim_beta = self.beta_masks.len();
        let mut row = vec![0.0; nu];
        for (a, &amask) in self.alpha_masks.iter().enumerate() {
            if self.has_coupling {
                row.iter_mut().for_each(|x| *x = 0.0);
                for p in OccupationMask(amask).orbitals() {
                    let src = &self.coupling[p as usize * nu..(p as usize + 1) * nu];
                    row.iter_mut().zip(src).for_each(|(x, c)| *x += c);
                }
            }
            let ea = self.alpha_energy[a];
            let block = &mut amps[a * dim_beta..(a + 1) * dim_beta];
            for (b, amp) in block.iter_mut().enumerate() {
                let mut e = ea + self.beta_energy[b];
                if self.has_coupling {
                    for q in OccupationMask(self.beta_masks[b]).orbitals() {
                        e += row[q as usize];
                    }
                }
                if e != 0.0 {
                    let (s, c) = (-e * scale).sin_cos();
                    *amp = *amp * Complex::new(T::from_f64_lossy(c), T::from_f64_lossy(s));
                }
            }
        }
    }
}

/// Occupation pattern of one spin block for an off-diagonal term.
#[derive(Debug, Clone, Default)]
struct BlockPattern {
    ops: Vec<Ladder>,
    required: u64,
    forbidden: u64,
}

impl BlockPattern {
    fn from_ops(ops: Vec<Ladder>) -> Self {
        let mut touched = 0u64;
        let mut required = 0u64;
        let mut forbidden = 0u64;
        for op in &ops {
            let (i, first_is_annihilate) = match *op {
                Ladder::Annihilate(i) => (i, true),
                Ladder::Create(i) => (i, false),
            };
            let bit = 1u64 << i;
            if touched & bit == 0 {
                touched |= bit;
                if first_is_annihilate {
                    required |= bit;
                } else {
                    forbidden |= bit;
                }
            }
        }
        BlockPattern { ops, required, forbidden }
    }

    fn is_identity(&self) -> bool {
        self.ops.is_empty()
    }

    /// Source rank, target rank, sign for every matching string.
    fn collect(&self, n: u32, k: u32, out: &mut Vec<(usize, usize, bool)>) {
        out.clear();
        let local = self.ops.as_slice();
        for_each_string(n, k, self.required, self.forbidden, |src| {
            let (tgt, sign) =
                apply_block_ops(OccupationMask(src), local).expect("pattern admits the operators");
            out.push((
                rank_unchecked(src, n, k) as usize,
                rank_unchecked(tgt.0, n, k) as usize,
                sign < 0,
            ));
        });
    }
}

/// An off-diagonal term split into independent alpha and beta actions.
#[derive(Debug, Clone)]
pub struct CompiledTerm {
    h: f64,
    alpha: BlockPattern,
    beta: BlockPattern,
    negate: bool,
}

impl CompiledTerm {
    pub fn new<T: Real>(term: &OffDiagonalTerm<T>, n: u32) -> Self {
        let ops = term.forward_ops();
        let mut alpha = Vec::new();
        let mut beta = Vec::new();
        // Reordering to (alpha ops)(beta ops) costs one sign per alpha op that
        // is applied before a beta op. Each block has an even number of ops,
        // so the beta ops' whole-alpha-block strings cancel.
        let mut inversions = 0usize;
        for op in ops {
            match op {
                Ladder::Create(i) | Ladder::Annihilate(i) if i < n => alpha.push(op),
                Ladder::Create(i) => {
                    inversions += alpha.len();
                    beta.push(Ladder::Create(i - n));
                }
                Ladder::Annihilate(i) => {
                    inversions += alpha.len();
                    beta.push(Ladder::Annihilate(i - n));
                }
            }
        }
        debug_assert!(alpha.len() % 2 == 0 && beta.len() % 2 == 0);
        CompiledTerm {
            h: term.coefficient().to_f64_lossy(),
            alpha: BlockPattern::from_ops(alpha),
            beta: BlockPattern::from_ops(beta),
            negate: inversions % 2 == 1,
        }
    }

    pub fn coefficient(&self) -> f64 {
        self.h
    }
}

#[inline]
fn rotate<T: Real>(x: &mut Complex<T>, y: &mut Complex<T>, c: T, s: T) {
    // [x, y] <- [[c, -i s], [-i s, c]] [x, y]
    let (a, b) = (*x, *y);
    *x = Complex::new(c * a.re + s * b.im, c * a.im - s * b.re);
    *y = Complex::new(c * b.re + s * a.im, c * b.im - s * a.re);
}

/// Scratch buffers reused across terms within a step.
#[derive(Debug, Default)]
pub struct Scratch {
    alpha: Vec<(usize, usize, bool)>,
    beta: Vec<(usize, usize, bool)>,
}

impl CompiledTerm {
    /// Applies `exp(-i θ (X + X†))`.
    pub fn apply<T: Real>(
        &self,
        space: &DeterminantSpace,
        amps: &mut [Complex<T>],
        theta: f64,
        scratch: &mut Scratch,
    ) {
        if theta == 0.0 {
            return;
        }
        let (sin, cos) = theta.sin_cos();
        let c = T::from_f64_lossy(cos);
        let s_pos = T::from_f64_lossy(sin);
        let s_neg = -s_pos;
        let base = if self.negate { s_neg } else { s_pos };
        let flip = |neg: bool| if neg { -base } else { base };
        let dim_beta = space.dim_beta as usize;
        let (n, ka, kb) = (space.n, space.k_alpha, space.k_beta);

        match (self.alpha.is_identity(), self.beta.is_identity()) {
            (false, true) => {
                self.alpha.collect(n, ka, &mut scratch.alpha);
                for &(src, tgt, neg) in &scratch.alpha {
                    debug_assert!(src != tgt);
                    let s = flip(neg);
                    let (x_row, y_row) = two_rows(amps, src, tgt, dim_beta);
                    for (x, y) in x_row.iter_mut().zip(y_row.iter_mut()) {
                        rotate(x, y, c, s);
                    }
                }
            }
            (true, false) => {
                self.beta.collect(n, kb, &mut scratch.beta);
                for row in amps.chunks_exact_mut(dim_beta) {
                    for &(src, tgt, neg) in &scratch.beta {
                        let s = flip(neg);
                        let (x, y) = two_mut(row, src, tgt);
                        rotate(x, y, c, s);
                    }
                }
            }
            (false, false) => {
                self.alpha.collect(n, ka, &mut scratch.alpha);
                self.beta.collect(n, kb, &mut scratch.beta);
                for &(a_src, a_tgt, a_neg) in &scratch.alpha {
                    for &(b_src, b_tgt, b_neg) in &scratch.beta {
                        let i = a_src * dim_beta + b_src;
                        let j = a_tgt * dim_beta + b_tgt;
                        debug_assert!(i != j && j < amps.len());
                        let s = flip(a_neg != b_neg);
                        let (x, y) = two_mut(amps, i, j);
                        rotate(x, y, c, s);
                    }
                }
            }
            (true, true) => unreachable!("off-diagonal term acts on at least one block"),
        }
    }
}

#[inline]
fn two_mut<X>(v: &mut [X], i: usize, j: usize) -> (&mut X, &mut X) {
    if i < j {
        let (lo, hi) = v.split_at_mut(j);
        (&mut lo[i], &mut hi[0])
    } else {
        let (lo, hi) = v.split_at_mut(i);
        (&mut hi[0], &mut lo[j])
    }
}

#[inline]
fn two_rows<X>(v: &mut [X], a: usize, b: usize, width: usize) -> (&mut [X], &mut [X]) {
    if a < b {
        let (lo, hi) = v.split_at_mut(b * width);
        (&mut lo[a * width..(a + 1) * width], &mut hi[..width])
    } else {
        let (lo, hi) = v.split_at_mut(a * width);
        (&mut hi[..width], &mut lo[b * width..(b + 1) * width])
    }
}

fn check_space(space: &DeterminantSpace, n: u32, ka: u32, kb: u32) -> Result<()> {
    if (space.n, space.k_alpha, space.k_beta) != (n, ka, kb) {
        return Err(Error::DimensionMismatch(format!(
            "state space (n={}, k_alpha={}, k_beta={}) does not match Hamiltonian (n={n}, k_alpha={ka}, k_beta={kb})",
            space.n, space.k_alpha, space.k_beta
        )));
    }
    Ok(())
}

/// Multiplies each amplitude by `exp(-i theta_scale Σ_active h)`.
pub fn apply_diagonal<T: Real>(
    pp: &[PpTerm<T>],
    pqqp: &[PqqpTerm<T>],
    state: &mut StateVector<T>,
    theta_scale: f64,
) {
    DiagonalTable::new(&state.space, pp, pqqp).apply(&mut state.amps, theta_scale);
}

/// Applies `exp(-i theta (X + X†))` for one off-diagonal term; callers pass
/// `theta = h t / r`.
pub fn apply_offdiagonal_term<T: Real>(term: &OffDiagonalTerm<T>, state: &mut StateVector<T>, theta: f64) {
    let compiled = CompiledTerm::new(term, state.space.n);
    compiled.apply(&state.space, &mut state.amps, theta, &mut Scratch::default());
}

/// A Hamiltonian compiled for repeated Trotter steps.
#[derive(Debug, Clone)]
pub struct TrotterEngine {
    space: DeterminantSpace,
    config: TrotterConfig,
    offset: f64,
    diagonal: DiagonalTable,
    terms: Vec<CompiledTerm>,
}

impl TrotterEngine {
    pub fn new<T: Real>(ham: &ClassifiedHamiltonian<T>, config: TrotterConfig) -> Result<Self> {
        config.validate()?;
        ham.validate()?;
        let space = ham.space()?;
        let mut pq: Vec<OffDiagonalTerm<T>> = ham.pq.iter().map(|&t| OffDiagonalTerm::Pq(t)).collect();
        let mut pqqr: Vec<OffDiagonalTerm<T>> =
            ham.pqqr.iter().map(|&t| OffDiagonalTerm::Pqqr(t)).collect();
        let mut pqrs: Vec<OffDiagonalTerm<T>> =
            ham.pqrs.iter().map(|&t| OffDiagonalTerm::Pqrs(t)).collect();
        if config.ordering == TermOrdering::Default {
            pq.sort_by_key(|t| t.key());
            pqqr.sort_by_key(|t| t.key());
            pqrs.sort_by_key(|t| t.key());
        }
        let terms = pq
            .iter()
            .chain(&pqqr)
            .chain(&pqrs)
            .map(|t| CompiledTerm::new(t, space.n))
            .collect();
        Ok(TrotterEngine {
            space,
            config,
            offset: ham.offset.to_f64_lossy(),
            diagonal: DiagonalTable::new(&space, &ham.pp, &ham.pqqp),
            terms,
        })
    }

    pub fn space(&self) -> &DeterminantSpace {
        &self.space
    }

    pub fn config(&self) -> &TrotterConfig {
        &self.config
    }

    /// The scalar offset, applied or tracked according to the config.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Offset readout must add back to recover total energies.
    pub fn tracked_offset(&self) -> f64 {
        match self.config.offset {
            OffsetPolicy::Tracked => self.offset,
            OffsetPolicy::Applied => 0.0,
        }
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// One step `Π_k exp(-i H_k t / r)` on raw amplitudes.
    pub fn step_amplitudes<T: Real>(&self, amps: &mut [Complex<T>], scratch: &mut Scratch) {
        let dt = self.config.time_step();
        self.diagonal.apply(amps, dt);
        for term in &self.terms {
            term.apply(&self.space, amps, term.h * dt, scratch);
        }
        if self.config.offset == OffsetPolicy::Applied && self.offset != 0.0 {
            let (s, c) = (-self.offset * dt).sin_cos();
            let phase = Complex::new(T::from_f64_lossy(c), T::from_f64_lossy(s));
            amps.iter_mut().for_each(|a| *a = *a * phase);
        }
    }

    pub fn step<T: Real>(&self, state: &mut StateVector<T>) -> Result<()> {
        check_space(&state.space, self.space.n, self.space.k_alpha, self.space.k_beta)?;
        self.step_amplitudes(&mut state.amps, &mut Scratch::default());
        Ok(())
    }
}

/// Applies one Trotter step of `ham` to `state`.
pub fn apply_trotter_step<T: Real>(
    ham: &ClassifiedHamiltonian<T>,
    state: &mut StateVector<T>,
    config: &TrotterConfig,
) -> Result<()> {
    check_space(&state.space, ham.n_orbitals, ham.n_alpha, ham.n_beta)?;
    TrotterEngine::new(ham, *config)?.step(state)
}
