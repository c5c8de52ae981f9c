//! Fourier-based phase estimation over a step unitary `W`.
//!
//! With `N = 2^p` and layers `ψ_j = W^j ψ_0`, the ideal readout after the
//! inverse QFT is
//!
//! ```text
//! Prob(m) = N^-2 Σ_x |Σ_j e^{-2πi jm/N} ψ_j(x)|^2
//!         = N^-2 Σ_{|d|<N} (N - |d|) e^{-2πi dm/N} a(d),   a(d) = <ψ_0|W^d ψ_0>
//! ```
//!
//! Layered mode evaluates the first form literally; overlap mode the second,
//! keeping only two vectors alive. An eigenstate with `W ψ = e^{2πi φ} ψ`
//! concentrates at `m ≈ N φ`.

use std::fmt::Write as _;

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::determinant::{Determinant, DeterminantSpace, OccupationMask};
use crate::error::{Error, Result};
use crate::hamiltonian::ClassifiedHamiltonian;
use crate::scalar::Real;
use crate::trotter::{inner_f64, Scratch, StateVector, TrotterConfig, TrotterEngine};

/// Largest supported precision; `2^p` layers or autocorrelation samples.
pub const MAX_PRECISION_BITS: u32 = 30;

/// Default layered-mode budget: 4 GiB.
pub const DEFAULT_MEMORY_BUDGET: u128 = 4 << 30;

/// A unitary applied once per QPE layer increment.
pub trait StepOperator<T: Real> {
    fn space(&self) -> DeterminantSpace;
    fn apply(&self, amps: &mut [Complex<T>]);
}

impl<T: Real> StepOperator<T> for TrotterEngine {
    fn space(&self) -> DeterminantSpace {
        *TrotterEngine::space(self)
    }

    fn apply(&self, amps: &mut [Complex<T>]) {
        self.step_amplitudes(amps, &mut Scratch::default());
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QpeMode {
    Layered,
    #[default]
    Overlap,
}

impl std::str::FromStr for QpeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "layered" => Ok(QpeMode::Layered),
            "overlap" => Ok(QpeMode::Overlap),
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QpeConfig {
    pub precision_bits: u32,
    pub trotter: TrotterConfig,
    pub mode: QpeMode,
    pub memory_budget: u128,
}

impl QpeConfig {
    pub fn new(precision_bits: u32, trotter: TrotterConfig) -> Self {
        QpeConfig { precision_bits, trotter, mode: QpeMode::Overlap, memory_budget: DEFAULT_MEMORY_BUDGET }
    }

    pub fn with_mode(mut self, mode: QpeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.precision_bits == 0 || self.precision_bits > MAX_PRECISION_BITS {
            return Err(Error::Config(format!(
                "precision bits must be in 1..={MAX_PRECISION_BITS}, got {}",
                self.precision_bits
            )));
        }
        self.trotter.validate()
    }
}

/// Starting state as a sparse list of determinants.
#[derive(Debug, Clone, PartialEq)]
pub struct Ansatz {
    pub space: DeterminantSpace,
    pub entries: Vec<(Determinant, Complex<f64>)>,
}

impl Ansatz {
    /// Validates popcounts and duplicates, then normalizes.
    pub fn new(space: DeterminantSpace, entries: Vec<(Determinant, Complex<f64>)>) -> Result<Self> {
        Self::build(space, entries.into_iter().enumerate().map(|(i, e)| (i + 1, e)))
    }

    fn build<I>(space: DeterminantSpace, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, (Determinant, Complex<f64>))>,
    {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for (line, (det, amp)) in entries {
            let err = |msg: String| Error::Ansatz { line, msg };
            if det.alpha.count() != space.k_alpha || det.beta.count() != space.k_beta {
                return Err(err(format!(
                    "popcounts ({}, {}) do not match ({}, {})",
                    det.alpha.count(),
                    det.beta.count(),
                    space.k_alpha,
                    space.k_beta
                )));
            }
            space.index_of(det).map_err(|e| err(e.to_string()))?;
            if !amp.re.is_finite() || !amp.im.is_finite() {
                return Err(err("non-finite amplitude".into()));
            }
            if !seen.insert(det) {
                return Err(err("duplicate determinant".into()));
            }
            out.push((det, amp));
        }
        let norm = out.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Ansatz { line: 0, msg: "ansatz has zero norm".into() });
        }
        for (_, a) in &mut out {
            *a /= norm;
        }
        Ok(Ansatz { space, entries: out })
    }

    /// The determinant with the lowest `k_alpha` and `k_beta` orbitals filled.
    pub fn hartree_fock(space: DeterminantSpace) -> Self {
        let fill = |k: u32| OccupationMask(if k == 64 { u64::MAX } else { (1u64 << k) - 1 });
        let det = Determinant::new(fill(space.k_alpha), fill(space.k_beta));
        Ansatz { space, entries: vec![(det, Complex::new(1.0, 0.0))] }
    }

    /// Nonzero amplitudes of a dense state.
    pub fn from_state<T: Real>(state: &StateVector<T>) -> Result<Self> {
        let entries = state
            .amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.re != T::zero() || a.im != T::zero())
            .map(|(i, a)| {
                let det = state.space.determinant(i as u64)?;
                Ok((det, Complex::new(a.re.to_f64_lossy(), a.im.to_f64_lossy())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ansatz::new(state.space, entries)
    }

    pub fn to_state<T: Real>(&self) -> StateVector<T> {
        let mut v = StateVector::zeros(self.space);
        for (det, a) in &self.entries {
            let i = self.space.index_of(*det).expect("validated on construction").flat as usize;
            v.amps[i] = Complex::new(T::from_f64_lossy(a.re), T::from_f64_lossy(a.im));
        }
        v
    }

    /// Text form, one `alpha_bits beta_bits re im` line per entry.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (det, a) in &self.entries {
            let _ = writeln!(
                out,
                "{} {} {:e} {:e}",
                det.alpha.to_bit_string(self.space.n),
                det.beta.to_bit_string(self.space.n),
                a.re,
                a.im
            );
        }
        out
    }
}

/// Parses ansatz text: `alpha_bits beta_bits re im` per line, bit strings of
/// length `n` with orbital 0 rightmost. Blank lines and `#` comments are skipped.
pub fn load_ansatz(text: &str, space: DeterminantSpace) -> Result<Ansatz> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Ansatz { line, msg };
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks.len() != 4 {
            return Err(err(format!("expected `alpha_bits beta_bits re im`, got {content:?}")));
        }
        let mask = |tok: &str| -> Result<OccupationMask> {
            if tok.len() != space.n as usize {
                return Err(err(format!("bit string {tok:?} must have {} characters", space.n)));
            }
            OccupationMask::from_bit_string(tok).ok_or_else(|| err(format!("bad bit string {tok:?}")))
        };
        let alpha = mask(toks[0])?;
        let beta = mask(toks[1])?;
        let re: f64 = toks[2].parse().map_err(|_| err(format!("bad real part {:?}", toks[2])))?;
        let im: f64 = toks[3].parse().map_err(|_| err(format!("bad imaginary part {:?}", toks[3])))?;
        entries.push((line, (Determinant::new(alpha, beta), Complex::new(re, im))));
    }
    Ansatz::build(space, entries)
}

/// Probability of each phase integer `m ∈ [0, 2^p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDistribution {
    pub precision_bits: u32,
    pub probs: Vec<f64>,
}

impl PhaseDistribution {
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Bin with the largest probability (lowest `m` on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (m, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = m;
            }
        }
        best
    }

    /// `m,probability` rows with round-trip exact decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,probability\n");
        for (m, p) in self.probs.iter().enumerate() {
            let _ = writeln!(out, "{m},{p:e}");
        }
        out
    }

    /// Clamps rounding-level negatives and renormalizes.
    fn finalize<T: Real>(precision_bits: u32, mut probs: Vec<f64>) -> Result<Self> {
        for (m, p) in probs.iter_mut().enumerate() {
            if !p.is_finite() || *p < -T::PROB_CLAMP {
                return Err(Error::Numerical(format!("probability {p:e} at m={m}")));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let total: f64 = pairwise_sum(&probs);
        if (total - 1.0).abs() > T::RENORM_TOL {
            return Err(Error::Numerical(format!("probabilities sum to {total}")));
        }
        probs.iter_mut().for_each(|p| *p /= total);
        Ok(PhaseDistribution { precision_bits, probs })
    }
}

fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 64 {
        v.iter().sum()
    } else {
        let mid = v.len() / 2;
        pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
    }
}

fn check_precision(precision_bits: u32) -> Result<usize> {
    if precision_bits == 0 || precision_bits > MAX_PRECISION_BITS {
        return Err(Error::Config(format!(
            "precision bits must be in 1..={MAX_PRECISION_BITS}, got {precision_bits}"
        )));
    }
    Ok(1usize << precision_bits)
}

fn check_state<T: Real, W: StepOperator<T> + ?Sized>(step: &W, psi0: &StateVector<T>) -> Result<()> {
    if step.space() != psi0.space {
        return Err(Error::DimensionMismatch("ansatz and step operator live on different spaces".into()));
    }
    Ok(())
}

/// `a(d) = <ψ_0|W^d ψ_0>` for `d = 0..count`, using two vectors.
pub fn autocorrelation<T: Real, W: StepOperator<T> + ?Sized>(
    step: &W,
    psi0: &StateVector<T>,
    count: usize,
) -> Result<Vec<Complex<f64>>> {
    check_state(step, psi0)?;
    let mut current = psi0.amps.clone();
    let mut out = Vec::with_capacity(count);
    for d in 0..count {
        if d > 0 {
            step.apply(&mut current);
        }
        out.push(inner_f64(&psi0.amps, &current));
    }
    Ok(out)
}

/// Overlap-mode distribution for an arbitrary step operator.
pub fn run_overlap_with<T: Real, W: StepOperator<T> + ?Sized>(
    step: &W,
    psi0: &StateVector<T>,
    precision_bits: u32,
) -> Result<PhaseDistribution> {
    let len = check_precision(precision_bits)?;
    let a = autocorrelation(step, psi0, len)?;
    distribution_from_autocorrelation::<T>(&a, precision_bits)
}

/// Turns `a(0..2^p)` into the QPE distribution with one length-`2^p` FFT.
pub fn distribution_from_autocorrelation<T: Real>(
    a: &[Complex<f64>],
    precision_bits: u32,
) -> Result<PhaseDistribution> {
    let len = check_precision(precision_bits)?;
    if a.len() != len {
        return Err(Error::DimensionMismatch(format!("{} autocorrelation samples for 2^{precision_bits}", a.len())));
    }
    let nf = len as f64;
    // e^{-2πi dm/N} is N-periodic in d, so negative lags fold into conj(B(m)).
    let mut b: Vec<Complex<f64>> =
        a.iter().enumerate().map(|(d, &x)| if d == 0 { Complex::new(0.0, 0.0) } else { x * (nf - d as f64) }).collect();
    FftPlanner::<f64>::new().plan_fft_forward(len).process(&mut b);
    let probs = b.iter().map(|bm| (nf * a[0].re + 2.0 * bm.re) / (nf * nf)).collect();
    PhaseDistribution::finalize::<T>(precision_bits, probs)
}

/// Bytes of amplitude storage layered mode needs.
fn layered_bytes<T: Real>(space: &DeterminantSpace, precision_bits: u32) -> u128 {
    let cbytes = 2 * std::mem::size_of::<T>() as u128;
    cbytes * ((1u128 << precision_bits) + 1) * space.dimension as u128
}

/// Layered-mode distribution: stores all `2^p` layers and transforms each
/// configuration's layer sequence.
pub fn run_layered_with<T: Real, W: StepOperator<T> + ?Sized>(
    step: &W,
    psi0: &StateVector<T>,
    precision_bits: u32,
    memory_budget: u128,
) -> Result<PhaseDistribution> {
    let len = check_precision(precision_bits)?;
    check_state(step, psi0)?;
    let dim = psi0.space.len();
    let needed = layered_bytes::<T>(&psi0.space, precision_bits);
    if needed > memory_budget {
        return Err(Error::MemoryBudget { needed, budget: memory_budget });
    }
    // layer-major: layers[j * dim + x]
    let mut layers: Vec<Complex<T>> = Vec::with_capacity(len * dim);
    layers.extend_from_slice(&psi0.amps);
    let mut current = psi0.amps.clone();
    for _ in 1..len {
        step.apply(&mut current);
        layers.extend_from_slice(&current);
    }
    let fft = FftPlanner::<f64>::new().plan_fft_forward(len);
    let mut column = vec![Complex::new(0.0, 0.0); len];
    let mut probs = vec![0.0f64; len];
    for x in 0..dim {
        for (j, slot) in column.iter_mut().enumerate() {
            let v = layers[j * dim + x];
            *slot = Complex::new(v.re.to_f64_lossy(), v.im.to_f64_lossy());
        }
        fft.process(&mut column);
        for (p, c) in probs.iter_mut().zip(&column) {
            *p += c.norm_sqr();
        }
    }
    let scale = 1.0 / (len as f64 * len as f64);
    probs.iter_mut().for_each(|p| *p *= scale);
    PhaseDistribution::finalize::<T>(precision_bits, probs)
}

fn prepare<T: Real>(
    ham: &ClassifiedHamiltonian<T>,
    ansatz: &Ansatz,
    cfg: &QpeConfig,
) -> Result<(TrotterEngine, StateVector<T>)> {
    cfg.validate()?;
    let engine = TrotterEngine::new(ham, cfg.trotter)?;
    if *engine.space() != ansatz.space {
        return Err(Error::DimensionMismatch(format!(
            "ansatz space (n={}, k_alpha={}, k_beta={}) does not match Hamiltonian",
            ansatz.space.n, ansatz.space.k_alpha, ansatz.space.k_beta
        )));
    }
    Ok((engine, ansatz.to_state()))
}

/// Literal layered QPE over the Trotter step of `ham`.
pub fn run_layered<T: Real>(
    ham: &ClassifiedHamiltonian<T>,
    ansatz: &Ansatz,
    cfg: &QpeConfig,
) -> Result<PhaseDistribution> {
    let (engine, psi0) = prepare(ham, ansatz, cfg)?;
    run_layered_with(&engine, &psi0, cfg.precision_bits, cfg.memory_budget)
}

/// Memory-lean QPE over the Trotter step of `ham`.
pub fn run_overlap<T: Real>(
    ham: &ClassifiedHamiltonian<T>,
    ansatz: &Ansatz,
    cfg: &QpeConfig,
) -> Result<PhaseDistribution> {
    let (engine, psi0) = prepare(ham, ansatz, cfg)?;
    run_overlap_with(&engine, &psi0, cfg.precision_bits)
}

/// Dispatches on `cfg.mode`.
pub fn run<T: Real>(ham: &ClassifiedHamiltonian<T>, ansatz: &Ansatz, cfg: &QpeConfig) -> Result<PhaseDistribution> {
    match cfg.mode {
        QpeMode::Layered => run_layered(ham, ansatz, cfg),
        QpeMode::Overlap => run_overlap(ham, ansatz, cfg),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MemoryEstimate {
    pub mode: QpeMode,
    /// Bytes of amplitude storage for the chosen mode.
    pub bytes: u128,
    /// Amplitudes a full `2^{2n}` register would hold.
    pub naive_amplitudes: f64,
    /// `2^{2n} / dimension`.
    pub reduction_factor: f64,
}

/// Storage estimate for complex `f64` amplitudes.
pub fn memory_estimate(space: &DeterminantSpace, precision_bits: u32, mode: QpeMode) -> MemoryEstimate {
    memory_estimate_for::<f64>(space, precision_bits, mode)
}

/// Storage estimate for complex amplitudes of scalar `T`.
///
/// Layered: `2^p` layers plus one work vector. Overlap: two vectors plus the
/// `2^{p+1}` autocorrelation/FFT buffer.
pub fn memory_estimate_for<T: Real>(space: &DeterminantSpace, precision_bits: u32, mode: QpeMode) -> MemoryEstimate {
    let cbytes = 2 * std::mem::size_of::<T>() as u128;
    let dim = space.dimension as u128;
    let bytes = match mode {
        QpeMode::Layered => layered_bytes::<T>(space, precision_bits),
        QpeMode::Overlap => 2 * cbytes * dim + 16 * (1u128 << (precision_bits + 1)),
    };
    let naive = 2f64.powi(2 * space.n as i32);
    MemoryEstimate { mode, bytes, naive_amplitudes: naive, reduction_factor: naive / space.dimension as f64 }
}
