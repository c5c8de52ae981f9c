//! Electronic integrals and their classified spin-orbital form.

mod classify;
mod fcidump;

pub use classify::{expand_and_classify, DEFAULT_DROP_THRESHOLD};
pub use fcidump::{parse_fcidump, serialize_fcidump};

use serde::{Deserialize, Serialize};

use crate::determinant::{DeterminantSpace, Ladder};
use crate::error::{Error, Result};
use crate::scalar::Real;

const SYMMETRY_TOL: f64 = 1e-12;

/// Spatial-orbital integrals: `h(p,q)` and chemists' notation `(pq|rs)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralSet<T> {
    pub n_orbitals: u32,
    pub n_alpha: u32,
    pub n_beta: u32,
    pub core_energy: T,
    one_body: Vec<T>,
    two_body: Vec<T>,
}

impl<T: Real> IntegralSet<T> {
    /// All-zero integrals.
    pub fn zeros(n_orbitals: u32, n_alpha: u32, n_beta: u32) -> Result<Self> {
        if n_orbitals == 0 || n_orbitals > crate::determinant::MAX_ORBITALS {
            return Err(Error::InvalidIntegrals(format!("unsupported orbital count {n_orbitals}")));
        }
        if n_alpha > n_orbitals || n_beta > n_orbitals {
            return Err(Error::InvalidIntegrals(format!(
                "electron counts ({n_alpha}, {n_beta}) exceed {n_orbitals} orbitals"
            )));
        }
        let n = n_orbitals as usize;
        Ok(IntegralSet {
            n_orbitals,
            n_alpha,
            n_beta,
            core_energy: T::zero(),
            one_body: vec![T::zero(); n * n],
            two_body: vec![T::zero(); n * n * n * n],
        })
    }

    #[inline]
    fn n(&self) -> usize {
        self.n_orbitals as usize
    }

    #[inline]
    fn idx2(&self, p: usize, q: usize) -> usize {
        p * self.n() + q
    }

    #[inline]
    fn idx4(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        let n = self.n();
        ((p * n + q) * n + r) * n + s
    }

    #[inline]
    pub fn one_body(&self, p: usize, q: usize) -> T {
        self.one_body[self.idx2(p, q)]
    }

    #[inline]
    pub fn two_body(&self, p: usize, q: usize, r: usize, s: usize) -> T {
        self.two_body[self.idx4(p, q, r, s)]
    }

    /// Sets `h(p,q)` and `h(q,p)`.
    pub fn set_one_body(&mut self, p: usize, q: usize, value: T) {
        let (a, b) = (self.idx2(p, q), self.idx2(q, p));
        self.one_body[a] = value;
        self.one_body[b] = value;
    }

    /// Sets `(pq|rs)` and its seven permutational partners.
    pub fn set_two_body(&mut self, p: usize, q: usize, r: usize, s: usize, value: T) {
        for (a, b, c, d) in eightfold(p, q, r, s) {
            let i = self.idx4(a, b, c, d);
            self.two_body[i] = value;
        }
    }

    pub fn space(&self) -> Result<DeterminantSpace> {
        DeterminantSpace::new(self.n_orbitals, self.n_alpha, self.n_beta)
    }

    /// Checks symmetry and finiteness.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        let tol = T::from_f64_lossy(SYMMETRY_TOL);
        if !self.core_energy.is_finite() {
            return Err(Error::InvalidIntegrals("core energy is not finite".into()));
        }
        for p in 0..n {
            for q in 0..n {
                let h = self.one_body(p, q);
                if !h.is_finite() || (h - self.one_body(q, p)).abs() > tol {
                    return Err(Error::InvalidIntegrals(format!("h({p},{q}) is not symmetric")));
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = self.two_body(p, q, r, s);
                        if !v.is_finite() {
                            return Err(Error::InvalidIntegrals(format!("({p}{q}|{r}{s}) not finite")));
                        }
                        for (a, b, c, d) in eightfold(p, q, r, s) {
                            if (self.two_body(a, b, c, d) - v).abs() > tol {
                                return Err(Error::InvalidIntegrals(format!(
                                    "({p}{q}|{r}{s}) breaks 8-fold symmetry"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> IntegralSet<U> {
        let conv = |x: &T| U::from_f64_lossy(x.to_f64_lossy());
        IntegralSet {
            n_orbitals: self.n_orbitals,
            n_alpha: self.n_alpha,
            n_beta: self.n_beta,
            core_energy: conv(&self.core_energy),
            one_body: self.one_body.iter().map(conv).collect(),
            two_body: self.two_body.iter().map(conv).collect(),
        }
    }
}

/// The eight index permutations that leave a real chemists' integral invariant.
pub(crate) fn eightfold(
    p: usize,
    q: usize,
    r: usize,
    s: usize,
) -> [(usize, usize, usize, usize); 8] {
    [
        (p, q, r, s),
        (q, p, r, s),
        (p, q, s, r),
        (q, p, s, r),
        (r, s, p, q),
        (s, r, p, q),
        (r, s, q, p),
        (s, r, q, p),
    ]
}

/// `h · n_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpTerm<T> {
    pub p: u32,
    pub h: T,
}

/// `h · n_p n_q`, `p < q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PqqpTerm<T> {
    pub p: u32,
    pub q: u32,
    pub h: T,
}

/// `h · (a†_p a_q + a†_q a_p)`, `p < q`, same spin block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PqTerm<T> {
    pub p: u32,
    pub q: u32,
    pub h: T,
}

/// `h · n_q (a†_p a_r + a†_r a_p)`, `p < r`, `q ∉ {p, r}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PqqrTerm<T> {
    pub p: u32,
    pub q: u32,
    pub r: u32,
    pub h: T,
}

/// `h · (a†_p a†_q a_s a_r + a†_r a†_s a_q a_p)` with `p < q`, `r < s`,
/// `(p, q) < (r, s)` and all four indices distinct.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PqrsTerm<T> {
    pub p: u32,
    pub q: u32,
    pub r: u32,
    pub s: u32,
    pub h: T,
}

/// A configuration-modifying term: `h (X + X†)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OffDiagonalTerm<T> {
    Pq(PqTerm<T>),
    Pqqr(PqqrTerm<T>),
    Pqrs(PqrsTerm<T>),
}

impl<T: Real> OffDiagonalTerm<T> {
    pub fn coefficient(&self) -> T {
        match self {
            OffDiagonalTerm::Pq(t) => t.h,
            OffDiagonalTerm::Pqqr(t) => t.h,
            OffDiagonalTerm::Pqrs(t) => t.h,
        }
    }

    /// Ladder operators of `X` (without the hermitian partner), rightmost first.
    pub fn forward_ops(&self) -> Vec<Ladder> {
        use Ladder::{Annihilate, Create};
        match *self {
            OffDiagonalTerm::Pq(t) => vec![Annihilate(t.q), Create(t.p)],
            OffDiagonalTerm::Pqqr(t) => {
                vec![Annihilate(t.r), Create(t.p), Annihilate(t.q), Create(t.q)]
            }
            OffDiagonalTerm::Pqrs(t) => {
                vec![Annihilate(t.r), Annihilate(t.s), Create(t.q), Create(t.p)]
            }
        }
    }

    /// Ladder operators of `X†`, rightmost first.
    pub fn adjoint_ops(&self) -> Vec<Ladder> {
        self.forward_ops()
            .into_iter()
            .rev()
            .map(|op| match op {
                Ladder::Create(i) => Ladder::Annihilate(i),
                Ladder::Annihilate(i) => Ladder::Create(i),
            })
            .collect()
    }

    /// Lexicographic canonical key used by the default ordering.
    pub fn key(&self) -> (u32, u32, u32, u32) {
        match *self {
            OffDiagonalTerm::Pq(t) => (t.p, t.q, 0, 0),
            OffDiagonalTerm::Pqqr(t) => (t.p, t.q, t.r, 0),
            OffDiagonalTerm::Pqrs(t) => (t.p, t.q, t.r, t.s),
        }
    }
}

/// Spin-orbital Hamiltonian split into the five update classes.
///
/// JSON form (`serde_json`): an object with `n_orbitals`, `n_alpha`,
/// `n_beta`, `offset` and five arrays `pp`, `pqqp`, `pq`, `pqqr`, `pqrs`
/// whose entries are objects with the index fields of the matching term
/// type plus `h`. Spin-orbital indices are blocked: alpha `0..n`, beta `n..2n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedHamiltonian<T> {
    pub n_orbitals: u32,
    pub n_alpha: u32,
    pub n_beta: u32,
    pub offset: T,
    pub pp: Vec<PpTerm<T>>,
    pub pqqp: Vec<PqqpTerm<T>>,
    pub pq: Vec<PqTerm<T>>,
    pub pqqr: Vec<PqqrTerm<T>>,
    pub pqrs: Vec<PqrsTerm<T>>,
}

/// Term counts per class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TermCounts {
    pub pp: usize,
    pub pqqp: usize,
    pub pq: usize,
    pub pqqr: usize,
    pub pqrs: usize,
}

impl<T: Real> ClassifiedHamiltonian<T> {
    /// Hamiltonian with no terms.
    pub fn empty(n_orbitals: u32, n_alpha: u32, n_beta: u32, offset: T) -> Self {
        ClassifiedHamiltonian {
            n_orbitals,
            n_alpha,
            n_beta,
            offset,
            pp: Vec::new(),
            pqqp: Vec::new(),
            pq: Vec::new(),
            pqqr: Vec::new(),
            pqrs: Vec::new(),
        }
    }

    pub fn space(&self) -> Result<DeterminantSpace> {
        DeterminantSpace::new(self.n_orbitals, self.n_alpha, self.n_beta)
    }

    pub fn counts(&self) -> TermCounts {
        TermCounts {
            pp: self.pp.len(),
            pqqp: self.pqqp.len(),
            pq: self.pq.len(),
            pqqr: self.pqqr.len(),
            pqrs: self.pqrs.len(),
        }
    }

    /// Off-diagonal terms in stored order: pq, then pqqr, then pqrs.
    pub fn off_diagonal(&self) -> impl Iterator<Item = OffDiagonalTerm<T>> + '_ {
        self.pq
            .iter()
            .map(|&t| OffDiagonalTerm::Pq(t))
            .chain(self.pqqr.iter().map(|&t| OffDiagonalTerm::Pqqr(t)))
            .chain(self.pqrs.iter().map(|&t| OffDiagonalTerm::Pqrs(t)))
    }

    /// Sum of absolute coefficients (excluding the offset).
    pub fn one_norm(&self) -> T {
        let mut s = T::zero();
        s = self.pp.iter().fold(s, |a, t| a + t.h.abs());
        s = self.pqqp.iter().fold(s, |a, t| a + t.h.abs());
        s + self.off_diagonal().fold(T::zero(), |a, t| a + t.coefficient().abs())
    }

    /// Checks index ranges, canonical ordering and spin conservation.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_orbitals;
        let m = 2 * n;
        let bad = |what: String| Err(Error::InvalidIntegrals(what));
        let spin = |i: u32| i >= n;
        for t in &self.pp {
            if t.p >= m || !t.h.is_finite() {
                return bad(format!("pp term {t:?}"));
            }
        }
        for t in &self.pqqp {
            if t.p >= t.q || t.q >= m || !t.h.is_finite() {
                return bad(format!("pqqp term {t:?}"));
            }
        }
        for t in &self.pq {
            if t.p >= t.q || t.q >= m || spin(t.p) != spin(t.q) || !t.h.is_finite() {
                return bad(format!("pq term {t:?}"));
            }
        }
        for t in &self.pqqr {
            if t.p >= t.r || t.r >= m || t.q >= m || t.q == t.p || t.q == t.r
                || spin(t.p) != spin(t.r) || !t.h.is_finite()
            {
                return bad(format!("pqqr term {t:?}"));
            }
        }
        for t in &self.pqrs {
            let distinct = t.p != t.r && t.p != t.s && t.q != t.r && t.q != t.s;
            let created = spin(t.p) as u32 + spin(t.q) as u32;
            let removed = spin(t.r) as u32 + spin(t.s) as u32;
            if t.p >= t.q || t.r >= t.s || t.s >= m || t.q >= m || !distinct
                || (t.p, t.q) >= (t.r, t.s) || created != removed || !t.h.is_finite()
            {
                return bad(format!("pqrs term {t:?}"));
            }
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> ClassifiedHamiltonian<U> {
        let c = |x: T| U::from_f64_lossy(x.to_f64_lossy());
        ClassifiedHamiltonian {
            n_orbitals: self.n_orbitals,
            n_alpha: self.n_alpha,
            n_beta: self.n_beta,
            offset: c(self.offset),
            pp: self.pp.iter().map(|t| PpTerm { p: t.p, h: c(t.h) }).collect(),
            pqqp: self.pqqp.iter().map(|t| PqqpTerm { p: t.p, q: t.q, h: c(t.h) }).collect(),
            pq: self.pq.iter().map(|t| PqTerm { p: t.p, q: t.q, h: c(t.h) }).collect(),
            pqqr: self
                .pqqr
                .iter()
                .map(|t| PqqrTerm { p: t.p, q: t.q, r: t.r, h: c(t.h) })
                .collect(),
            pqrs: self
                .pqrs
                .iter()
                .map(|t| PqrsTerm { p: t.p, q: t.q, r: t.r, s: t.s, h: c(t.h) })
                .collect(),
        }
    }
}
