//! Spin-orbital expansion of spatial integrals and sorting into term classes.
//!
//! The Hamiltonian
//!
//! ```text
//! H = E_core + Σ_{pq,σ} h(p,q) a†_{pσ} a_{qσ}
//!            + ½ Σ_{pqrs,στ} (pq|rs) a†_{pσ} a†_{rτ} a_{sτ} a_{qσ}
//! ```
//!
//! is expanded over blocked spin orbitals, every two-body product is brought
//! to the form `a†_P a†_Q a_S a_R` with `P < Q`, `R < S`, and then routed by
//! how many indices the creation and annihilation pairs share.

use indexmap::IndexMap;

use super::{
    ClassifiedHamiltonian, IntegralSet, PpTerm, PqTerm, PqqpTerm, PqqrTerm, PqrsTerm,
};
use crate::error::Result;
use crate::scalar::Real;

pub const DEFAULT_DROP_THRESHOLD: f64 = 1e-12;

#[derive(Default)]
struct Accumulator<T> {
    pp: IndexMap<u32, T>,
    pqqp: IndexMap<(u32, u32), T>,
    // oriented (created, annihilated); partners merged at the end
    pq: IndexMap<(u32, u32), T>,
    // oriented (created, spectator, annihilated)
    pqqr: IndexMap<(u32, u32, u32), T>,
    // oriented (P, Q, R, S) for a†_P a†_Q a_S a_R
    pqrs: IndexMap<(u32, u32, u32, u32), T>,
}

fn add<K: std::hash::Hash + Eq, T: Real>(map: &mut IndexMap<K, T>, key: K, value: T) {
    let slot = map.entry(key).or_insert_with(T::zero);
    *slot = *slot + value;
}

impl<T: Real> Accumulator<T> {
    fn one_body(&mut self, p: u32, r: u32, h: T) {
        if p == r {
            add(&mut self.pp, p, h);
        } else {
            add(&mut self.pq, (p, r), h);
        }
    }

    /// Adds `c · a†_a a†_b a_c a_d`.
    fn two_body(&mut self, a: u32, b: u32, c: u32, d: u32, coeff: T) {
        if a == b || c == d {
            return;
        }
        let mut sign = coeff;
        let (p, q) = if a < b { (a, b) } else { sign = -sign; (b, a) };
        // a_c a_d == a_S a_R with R < S
        let (r, s) = if d < c { (d, c) } else { sign = -sign; (c, d) };
        let shared = [p == r, p == s, q == r, q == s];
        match shared.iter().filter(|&&x| x).count() {
            2 => add(&mut self.pqqp, (p, q), sign),
            1 => {
                // rewrite as ε a†_c a†_x a_x a_a = ε n_x a†_c a_a
                let (x, created, removed, eps) = if p == r {
                    // a†_P a†_Q a_S a_P = a†_Q a†_P a_P a_S
                    (p, q, s, sign)
                } else if p == s {
                    // a†_P a†_Q a_P a_R = -a†_Q a†_P a_P a_R
                    (p, q, r, -sign)
                } else if q == r {
                    // a†_P a†_Q a_S a_Q = -a†_P a†_Q a_Q a_S
                    (q, p, s, -sign)
                } else {
                    // a†_P a†_Q a_Q a_R
                    (q, p, r, sign)
                };
                add(&mut self.pqqr, (created, x, removed), eps);
            }
            _ => add(&mut self.pqrs, (p, q, r, s), sign),
        }
    }
}

fn keep<T: Real>(h: T, threshold: T) -> bool {
    h != T::zero() && h.abs() >= threshold
}

fn merge_pairs<K, T, F>(map: &IndexMap<K, T>, partner: F) -> Vec<(K, T)>
where
    K: std::hash::Hash + Eq + Copy + Ord,
    T: Real,
    F: Fn(K) -> K,
{
    let half = T::from_f64_lossy(0.5);
    let mut out = Vec::new();
    for (&key, &value) in map {
        let other = partner(key);
        let canonical = key.min(other);
        if key != canonical && map.contains_key(&canonical) {
            continue;
        }
        let back = map.get(&other).copied().unwrap_or_else(T::zero);
        out.push((canonical, (value + back) * half));
    }
    out
}

/// Expands spatial integrals into blocked spin orbitals and classifies every
/// resulting term. Hermitian partners are merged into one real coefficient;
/// terms with `|h| < drop_threshold` (or exactly zero) are dropped.
pub fn expand_and_classify<T: Real>(
    ints: &IntegralSet<T>,
    drop_threshold: T,
) -> Result<ClassifiedHamiltonian<T>> {
    ints.validate()?;
    let n = ints.n_orbitals;
    let nu = n as usize;
    let half = T::from_f64_lossy(0.5);
    let mut acc = Accumulator::<T>::default();

    for spin in 0..2u32 {
        let base = spin * n;
        for p in 0..nu {
            for q in 0..nu {
                let h = ints.one_body(p, q);
                if h != T::zero() {
                    acc.one_body(base + p as u32, base + q as u32, h);
                }
            }
        }
    }
    for p in 0..nu {
        for q in 0..nu {
            for r in 0..nu {
                for s in 0..nu {
                    let v = ints.two_body(p, q, r, s);
                    if v == T::zero() {
                        continue;
                    }
                    let c = v * half;
                    for sigma in 0..2u32 {
                        for tau in 0..2u32 {
                            let (ps, qs) = (sigma * n + p as u32, sigma * n + q as u32);
                            let (rt, st) = (tau * n + r as u32, tau * n + s as u32);
                            // a†_{pσ} a†_{rτ} a_{sτ} a_{qσ}
                            acc.two_body(ps, rt, st, qs, c);
                        }
                    }
                }
            }
        }
    }

    let threshold = drop_threshold;
    let mut ham = ClassifiedHamiltonian::empty(n, ints.n_alpha, ints.n_beta, ints.core_energy);
    ham.pp = acc
        .pp
        .iter()
        .filter(|(_, &h)| keep(h, threshold))
        .map(|(&p, &h)| PpTerm { p, h })
        .collect();
    ham.pqqp = acc
        .pqqp
        .iter()
        .filter(|(_, &h)| keep(h, threshold))
        .map(|(&(p, q), &h)| PqqpTerm { p, q, h })
        .collect();
    ham.pq = merge_pairs(&acc.pq, |(p, r)| (r, p))
        .into_iter()
        .filter(|&(_, h)| keep(h, threshold))
        .map(|((p, q), h)| PqTerm { p, q, h })
        .collect();
    ham.pqqr = merge_pairs(&acc.pqqr, |(c, x, a)| (a, x, c))
        .into_iter()
        .filter(|&(_, h)| keep(h, threshold))
        .map(|((p, q, r), h)| PqqrTerm { p, q, r, h })
        .collect();
    ham.pqrs = merge_pairs(&acc.pqrs, |(p, q, r, s)| (r, s, p, q))
        .into_iter()
        .filter(|&(_, h)| keep(h, threshold))
        .map(|((p, q, r, s), h)| PqrsTerm { p, q, r, s, h })
        .collect();
    debug_assert!(ham.validate().is_ok());
    Ok(ham)
}
