//! FCIDUMP reader and writer.
//!
//! The header carries `NORB`, `NELEC` and optionally `MS2` (default 0); it is
//! terminated by `&END`, `/`, or implicitly by the first integral line.
//! Integral lines are `value i j k l` with 1-based orbital indices:
//! `i j 0 0` is `h(i,j)`, `0 0 0 0` is the core energy, anything else with
//! all four indices set is `(ij|kl)`.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{eightfold, IntegralSet};
use crate::error::{Error, Result};
use crate::scalar::Real;

const DUPLICATE_TOL: f64 = 1e-10;

fn parse_value(tok: &str) -> Option<f64> {
    tok.replace(['D', 'd'], "E").parse::<f64>().ok()
}

fn looks_like_integral(line: &str) -> bool {
    let toks: Vec<&str> = line.split_whitespace().collect();
    toks.len() == 5 && parse_value(toks[0]).is_some() && toks[1..].iter().all(|t| t.parse::<i64>().is_ok())
}

fn parse_header(text: &str) -> Result<(u32, u32, i64)> {
    let mut values: HashMap<String, String> = HashMap::new();
    let cleaned = text.replace("&FCI", " ").replace("&fci", " ").replace("&END", " ").replace("&end", " ");
    let mut current: Option<String> = None;
    for tok in cleaned.split([',', ' ', '\t', '\n', '\r']).filter(|t| !t.is_empty() && *t != "/") {
        if let Some((key, value)) = tok.split_once('=') {
            let key = key.trim().to_ascii_uppercase();
            let value = value.trim();
            if !value.is_empty() {
                values.insert(key.clone(), value.to_string());
                current = None;
            } else {
                current = Some(key);
            }
        } else if let Some(key) = current.take() {
            // `NORB= 2` with the value split from its key
            values.insert(key, tok.to_string());
        }
    }
    let get = |key: &str| -> Result<Option<i64>> {
        match values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<i64>()
                .map(Some)
                .map_err(|_| Error::Header(format!("{key}={v} is not an integer"))),
        }
    };
    let norb = get("NORB")?.ok_or_else(|| Error::Header("missing NORB".into()))?;
    let nelec = get("NELEC")?.ok_or_else(|| Error::Header("missing NELEC".into()))?;
    let ms2 = get("MS2")?.unwrap_or(0);
    if norb <= 0 || norb > crate::determinant::MAX_ORBITALS as i64 {
        return Err(Error::Header(format!("NORB={norb} out of range")));
    }
    if nelec < 0 {
        return Err(Error::Header(format!("NELEC={nelec} is negative")));
    }
    Ok((norb as u32, nelec as u32, ms2))
}

/// Parses FCIDUMP text into a symmetry-completed [`IntegralSet`].
pub fn parse_fcidump<T: Real>(text: &str) -> Result<IntegralSet<T>> {
    let lines: Vec<&str> = text.lines().collect();
    let mut header = String::new();
    let mut body_start = lines.len();
    for (i, line) in lines.iter().enumerate() {
        let trimmed = line.trim();
        if looks_like_integral(trimmed) {
            body_start = i;
            break;
        }
        header.push_str(trimmed);
        header.push('\n');
        let upper = trimmed.to_ascii_uppercase();
        if upper.ends_with("&END") || upper == "/" || upper.ends_with(" /") {
            body_start = i + 1;
            break;
        }
    }
    let (norb, nelec, ms2) = parse_header(&header)?;
    let sum = nelec as i64 + ms2;
    if sum % 2 != 0 {
        return Err(Error::Header(format!("NELEC={nelec} and MS2={ms2} have odd sum")));
    }
    let n_alpha = sum / 2;
    let n_beta = nelec as i64 - n_alpha;
    if n_alpha < 0 || n_beta < 0 || n_alpha > norb as i64 || n_beta > norb as i64 {
        return Err(Error::Header(format!(
            "NELEC={nelec}, MS2={ms2} incompatible with NORB={norb}"
        )));
    }
    let mut ints = IntegralSet::<T>::zeros(norb, n_alpha as u32, n_beta as u32)?;
    let n = norb as usize;

    let mut seen_core: Option<f64> = None;
    let mut seen_one: HashMap<(usize, usize), f64> = HashMap::new();
    let mut seen_two: HashMap<(usize, usize, usize, usize), f64> = HashMap::new();

    for (offset, line) in lines[body_start..].iter().enumerate() {
        let line_no = body_start + offset + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Integral { line: line_no, msg };
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(err(format!("expected `value i j k l`, got {trimmed:?}")));
        }
        let value = parse_value(toks[0]).ok_or_else(|| err(format!("bad value {:?}", toks[0])))?;
        if !value.is_finite() {
            return Err(err("non-finite value".into()));
        }
        let mut idx = [0usize; 4];
        for (slot, tok) in idx.iter_mut().zip(&toks[1..]) {
            let v: i64 = tok.parse().map_err(|_| err(format!("bad index {tok:?}")))?;
            if v < 0 || v > n as i64 {
                return Err(Error::IndexOutOfRange(format!("line {line_no}: index {v} not in 0..={n}")));
            }
            *slot = v as usize;
        }
        let conflict = |old: f64| (old - value).abs() > DUPLICATE_TOL;
        match idx {
            [0, 0, 0, 0] => {
                if seen_core.is_some_and(conflict) {
                    return Err(err("conflicting core energy".into()));
                }
                seen_core = Some(value);
                ints.core_energy = T::from_f64_lossy(value);
            }
            [i, j, 0, 0] if i > 0 && j > 0 => {
                let (p, q) = (i - 1, j - 1);
                let key = (p.min(q), p.max(q));
                if seen_one.get(&key).copied().is_some_and(conflict) {
                    return Err(err(format!("conflicting duplicate for h({i},{j})")));
                }
                seen_one.insert(key, value);
                ints.set_one_body(p, q, T::from_f64_lossy(value));
            }
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                let (p, q, r, s) = (i - 1, j - 1, k - 1, l - 1);
                let key = eightfold(p, q, r, s).into_iter().min().expect("eight entries");
                if seen_two.get(&key).copied().is_some_and(conflict) {
                    return Err(err(format!("conflicting duplicate for ({i}{j}|{k}{l})")));
                }
                seen_two.insert(key, value);
                ints.set_two_body(p, q, r, s, T::from_f64_lossy(value));
            }
            _ => {
                return Err(Error::IndexOutOfRange(format!(
                    "line {line_no}: unsupported index pattern {idx:?}"
                )))
            }
        }
    }
    Ok(ints)
}

/// Writes FCIDUMP text with one line per symmetry-unique nonzero integral.
/// Values use the shortest decimal form that reads back bit-exactly.
pub fn serialize_fcidump<T: Real>(ints: &IntegralSet<T>) -> String {
    let n = ints.n_orbitals as usize;
    let mut out = String::new();
    let nelec = ints.n_alpha + ints.n_beta;
    let ms2 = ints.n_alpha as i64 - ints.n_beta as i64;
    let _ = writeln!(out, " &FCI NORB={},NELEC={},MS2={},", n, nelec, ms2);
    let _ = writeln!(out, "  ORBSYM={}", "1,".repeat(n));
    let _ = writeln!(out, "  ISYM=1,");
    let _ = writeln!(out, " &END");
    for p in 0..n {
        for q in 0..=p {
            for r in 0..n {
                for s in 0..=r {
                    if (p, q) < (r, s) {
                        continue;
                    }
                    let v = ints.two_body(p, q, r, s);
                    if v != T::zero() {
                        let _ = writeln!(out, "{:e} {} {} {} {}", v.to_f64_lossy(), p + 1, q + 1, r + 1, s + 1);
                    }
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..=p {
            let v = ints.one_body(p, q);
            if v != T::zero() {
                let _ = writeln!(out, "{:e} {} {} 0 0", v.to_f64_lossy(), p + 1, q + 1);
            }
        }
    }
    let _ = writeln!(out, "{:e} 0 0 0 0", ints.core_energy.to_f64_lossy());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_header_with_core_energy() {
        let ints: IntegralSet<f64> = parse_fcidump("NORB=2,NELEC=2,MS2=0\n0.5 0 0 0 0\n").unwrap();
        assert_eq!(ints.n_orbitals, 2);
        assert_eq!((ints.n_alpha, ints.n_beta), (1, 1));
        assert_eq!(ints.core_energy, 0.5);
        for p in 0..2 {
            for q in 0..2 {
                assert_eq!(ints.one_body(p, q), 0.0);
                for r in 0..2 {
                    for s in 0..2 {
                        assert_eq!(ints.two_body(p, q, r, s), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn two_body_line_fills_all_permutations() {
        let ints: IntegralSet<f64> =
            parse_fcidump("&FCI NORB=2,NELEC=2,MS2=0,\n&END\n0.1813 1 2 1 2\n").unwrap();
        for (p, q, r, s) in [(0, 1, 0, 1), (1, 0, 0, 1), (0, 1, 1, 0), (1, 0, 1, 0)] {
            assert_eq!(ints.two_body(p, q, r, s), 0.1813);
        }
        assert_eq!(ints.two_body(0, 0, 1, 1), 0.0);
        assert_eq!(ints.two_body(0, 0, 0, 0), 0.0);
        ints.validate().unwrap();
    }

    #[test]
    fn multiline_header_and_fortran_exponents() {
        let text = " &FCI NORB=   3,NELEC= 3,MS2=1,\n  ORBSYM=1,1,1,\n  ISYM=1,\n /\n 1.5D-01 1 1 0 0\n";
        let ints: IntegralSet<f64> = parse_fcidump(text).unwrap();
        assert_eq!((ints.n_alpha, ints.n_beta), (2, 1));
        assert_eq!(ints.one_body(0, 0), 0.15);
    }

    #[test]
    fn header_errors() {
        assert!(matches!(parse_fcidump::<f64>("NELEC=2\n"), Err(Error::Header(_))));
        assert!(matches!(parse_fcidump::<f64>("NORB=x,NELEC=2\n"), Err(Error::Header(_))));
        assert!(matches!(parse_fcidump::<f64>("NORB=2,NELEC=3,MS2=0\n"), Err(Error::Header(_))));
        assert!(matches!(parse_fcidump::<f64>("NORB=2,NELEC=6,MS2=0\n"), Err(Error::Header(_))));
    }

    #[test]
    fn index_out_of_range() {
        let r = parse_fcidump::<f64>("NORB=2,NELEC=2\n0.1 3 1 0 0\n");
        assert!(matches!(r, Err(Error::IndexOutOfRange(_))));
        let r = parse_fcidump::<f64>("NORB=2,NELEC=2\n0.1 1 0 0 0\n");
        assert!(matches!(r, Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn conflicting_duplicates() {
        let ok = parse_fcidump::<f64>("NORB=2,NELEC=2\n0.1 1 2 0 0\n0.1 2 1 0 0\n");
        assert!(ok.is_ok());
        let bad = parse_fcidump::<f64>("NORB=2,NELEC=2\n0.1 1 2 0 0\n0.2 2 1 0 0\n");
        assert!(matches!(bad, Err(Error::Integral { line: 3, .. })));
        let bad = parse_fcidump::<f64>("NORB=2,NELEC=2\n0.1 1 2 1 2\n0.1000001 2 1 2 1\n");
        assert!(matches!(bad, Err(Error::Integral { .. })));
        let bad = parse_fcidump::<f64>("NORB=2,NELEC=2\n0.1 0 0 0 0\n0.3 0 0 0 0\n");
        assert!(bad.is_err());
    }

    #[test]
    fn serialize_roundtrip_is_exact() {
        let text = include_str!("../../tests/fixtures/h2_sto3g.fcidump");
        let ints: IntegralSet<f64> = parse_fcidump(text).unwrap();
        let again: IntegralSet<f64> = parse_fcidump(&serialize_fcidump(&ints)).unwrap();
        assert_eq!(ints, again);
    }
}
