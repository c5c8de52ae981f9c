//! Shared generators and an independent Jordan-Wigner oracle for tests.
#![allow(dead_code)]

use detqpe::determinant::DeterminantSpace;
use detqpe::hamiltonian::{
    ClassifiedHamiltonian, IntegralSet, OffDiagonalTerm, PpTerm, PqTerm, PqqpTerm, PqqrTerm, PqrsTerm,
};
use detqpe::trotter::StateVector;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture(name: &str) -> String {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Random real integrals with full permutational symmetry, entries in ±scale.
pub fn random_integrals(rng: &mut impl Rng, n: u32, k_alpha: u32, k_beta: u32, scale: f64) -> IntegralSet<f64> {
    let mut ints = IntegralSet::zeros(n, k_alpha, k_beta).unwrap();
    let nu = n as usize;
    ints.core_energy = rng.gen_range(-scale..scale);
    for p in 0..nu {
        for q in 0..=p {
            ints.set_one_body(p, q, rng.gen_range(-scale..scale));
        }
    }
    for p in 0..nu {
        for q in 0..=p {
            for r in 0..nu {
                for s in 0..=r {
                    if (p, q) >= (r, s) {
                        ints.set_two_body(p, q, r, s, rng.gen_range(-scale..scale));
                    }
                }
            }
        }
    }
    ints
}

pub fn random_space(rng: &mut impl Rng, n_min: u32, n_max: u32) -> DeterminantSpace {
    let n = rng.gen_range(n_min..=n_max);
    let ka = rng.gen_range(0..=n);
    let kb = rng.gen_range(0..=n);
    DeterminantSpace::new(n, ka, kb).unwrap()
}

pub fn random_state(rng: &mut impl Rng, space: DeterminantSpace) -> StateVector<f64> {
    let amps: Vec<Complex64> = (0..space.len())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(space, amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermClass {
    Pp,
    Pqqp,
    Pq,
    Pqqr,
    Pqrs,
}

pub const ALL_CLASSES: [TermClass; 5] = [TermClass::Pp, TermClass::Pqqp, TermClass::Pq, TermClass::Pqqr, TermClass::Pqrs];

pub enum AnyTerm {
    Pp(PpTerm<f64>),
    Pqqp(PqqpTerm<f64>),
    Off(OffDiagonalTerm<f64>),
}

impl AnyTerm {
    pub fn into_hamiltonian(self, space: &DeterminantSpace) -> ClassifiedHamiltonian<f64> {
        let mut ham = ClassifiedHamiltonian::empty(space.n, space.k_alpha, space.k_beta, 0.0);
        match self {
            AnyTerm::Pp(t) => ham.pp.push(t),
            AnyTerm::Pqqp(t) => ham.pqqp.push(t),
            AnyTerm::Off(OffDiagonalTerm::Pq(t)) => ham.pq.push(t),
            AnyTerm::Off(OffDiagonalTerm::Pqqr(t)) => ham.pqqr.push(t),
            AnyTerm::Off(OffDiagonalTerm::Pqrs(t)) => ham.pqrs.push(t),
        }
        ham
    }
}

fn distinct(rng: &mut impl Rng, pool: &[u32], k: usize) -> Vec<u32> {
    let mut v = pool.to_vec();
    v.shuffle(rng);
    v.truncate(k);
    v
}

/// A canonical random term of `class` over `n` spatial orbitals, or `None`
/// when `n` is too small for the class.
pub fn random_term(rng: &mut impl Rng, class: TermClass, n: u32) -> Option<AnyTerm> {
    let h = rng.gen_range(-1.5..1.5);
    let all: Vec<u32> = (0..2 * n).collect();
    let block = |beta: bool| -> Vec<u32> { (0..n).map(|i| if beta { i + n } else { i }).collect() };
    Some(match class {
        TermClass::Pp => AnyTerm::Pp(PpTerm { p: rng.gen_range(0..2 * n), h }),
        TermClass::Pqqp => {
            let mut v = distinct(rng, &all, 2);
            v.sort();
            AnyTerm::Pqqp(PqqpTerm { p: v[0], q: v[1], h })
        }
        TermClass::Pq => {
            if n < 2 {
                return None;
            }
            let pool = block(rng.gen());
            let mut v = distinct(rng, &pool, 2);
            v.sort();
            AnyTerm::Off(OffDiagonalTerm::Pq(PqTerm { p: v[0], q: v[1], h }))
        }
        TermClass::Pqqr => {
            if n < 2 {
                return None;
            }
            let pool = block(rng.gen());
            let mut v = distinct(rng, &pool, 2);
            v.sort();
            let rest: Vec<u32> = all.iter().copied().filter(|x| !v.contains(x)).collect();
            let q = *rest.choose(rng).unwrap();
            AnyTerm::Off(OffDiagonalTerm::Pqqr(PqqrTerm { p: v[0], q, r: v[1], h }))
        }
        TermClass::Pqrs => {
            let same_spin = n >= 4 && rng.gen_bool(0.5);
            let (created, removed) = if same_spin {
                let pool = block(rng.gen());
                let v = distinct(rng, &pool, 4);
                (vec![v[0], v[1]], vec![v[2], v[3]])
            } else {
                if n < 2 {
                    return None;
                }
                let a = distinct(rng, &block(false), 2);
                let b = distinct(rng, &block(true), 2);
                (vec![a[0], b[0]], vec![a[1], b[1]])
            };
            let mut c = created.clone();
            c.sort();
            let mut r = removed.clone();
            r.sort();
            let (p, q, rr, s) = if (c[0], c[1]) < (r[0], r[1]) { (c[0], c[1], r[0], r[1]) } else { (r[0], r[1], c[0], c[1]) };
            AnyTerm::Off(OffDiagonalTerm::Pqrs(PqrsTerm { p, q, r: rr, s, h }))
        }
    })
}

/// Fock-space annihilation operator for spin orbital `j` of `m`, built as a
/// Kronecker product `I ⊗ … ⊗ σ⁻ ⊗ Z ⊗ … ⊗ Z` (bit `j` of the basis index
/// is the occupation of spin orbital `j`).
pub fn jw_annihilator(j: u32, m: u32) -> DMatrix<f64> {
    let id = DMatrix::<f64>::identity(2, 2);
    let z = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let lower = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    let mut out = DMatrix::<f64>::identity(1, 1);
    for k in (0..m).rev() {
        let factor = if k > j { &id } else if k == j { &lower } else { &z };
        out = out.kronecker(factor);
    }
    out
}

/// `P† A P`, where `P` embeds the determinant space into the Fock space of
/// `2n` spin orbitals (alpha bits low, beta bits high).
pub fn project(a: &DMatrix<f64>, space: &DeterminantSpace) -> DMatrix<Complex64> {
    let fock: Vec<usize> = space
        .determinants()
        .map(|d| (d.alpha.bits() | (d.beta.bits() << space.n)) as usize)
        .collect();
    DMatrix::from_fn(fock.len(), fock.len(), |i, j| Complex64::new(a[(fock[i], fock[j])], 0.0))
}

/// `a†_p a_q` etc. from a product of Fock matrices; `ops` as `(create, index)`
/// written left to right.
pub fn jw_string(ops: &[(bool, u32)], m: u32) -> DMatrix<f64> {
    let dim = 1usize << m;
    let mut out = DMatrix::<f64>::identity(dim, dim);
    for &(create, j) in ops {
        let a = jw_annihilator(j, m);
        out = if create { out * a.transpose() } else { out * a };
    }
    out
}

pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
