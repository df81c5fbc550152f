//! Calabi-Yau weight systems: the two elliptic curves, the 95 quasismooth K3
//! hypersurfaces, and sample invertible polynomials of the form `z² + f`.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::sync::Arc;

use num::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::milnor::MilnorRing;
use crate::poly::{check_cy, is_bv_form, is_invertible, parse_polynomial_with_vars, Coeff, Monomial, Polynomial, WeightSystem};

/// Default cap on the largest weight searched by [`enumerate_k3_systems`].
pub const DEFAULT_BOUND: u64 = 60;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightSystemRecord {
    /// Weights in descending order.
    pub system: WeightSystem,
    pub quasismooth: bool,
    /// `d = 2 v_i` for some `i`.
    pub bv_admissible: bool,
    pub has_invertible_bv_polynomial: bool,
    pub sample: Option<Polynomial>,
}

impl WeightSystemRecord {
    pub fn new(mut weights: Vec<u64>, degree: u64) -> Self {
        weights.sort_unstable_by(|a, b| b.cmp(a));
        let system = WeightSystem::new(weights, degree);
        let quasismooth = is_quasismooth(&system);
        let bv_admissible = half_degree_index(&system).is_some();
        let sample = if bv_admissible { sample_polynomial(&system).ok() } else { None };
        WeightSystemRecord { system, quasismooth, bv_admissible, has_invertible_bv_polynomial: sample.is_some(), sample }
    }
}

fn half_degree_index(ws: &WeightSystem) -> Option<usize> {
    ws.weights.iter().position(|&w| 2 * w == ws.degree)
}

/// Whether `target` is a non-negative integer combination of `ws` (`target > 0`).
fn representable(target: i64, ws: &[u64]) -> bool {
    if target <= 0 || ws.is_empty() {
        return false;
    }
    let t = target as usize;
    let mut ok = vec![false; t + 1];
    ok[0] = true;
    for i in 1..=t {
        ok[i] = ws.iter().any(|&w| (w as usize) <= i && ok[i - w as usize]);
    }
    ok[t]
}

/// Combinatorial quasismoothness test for a general degree-`d` hypersurface in
/// `P(w)`: every nonempty index set `I` carries a monomial of degree `d` in `x_I`,
/// or `|I|` distinct `e ∉ I` with monomials `x_I^M x_e` of degree `d`.
pub fn is_quasismooth(ws: &WeightSystem) -> bool {
    let n = ws.n();
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let wi: Vec<u64> = idx.iter().map(|&i| ws.weights[i]).collect();
        if representable(ws.degree as i64, &wi) {
            continue;
        }
        let partners = (0..n)
            .filter(|e| mask >> e & 1 == 0)
            .filter(|&e| representable(ws.degree as i64 - ws.weights[e] as i64, &wi))
            .count();
        if partners < idx.len() {
            return false;
        }
    }
    true
}

fn gcd(a: u64, b: u64) -> u64 {
    num::integer::gcd(a, b)
}

/// The two elliptic weight systems admitting `x₀² + f`.
pub fn elliptic_systems() -> Vec<WeightSystemRecord> {
    vec![WeightSystemRecord::new(vec![3, 2, 1], 6), WeightSystemRecord::new(vec![2, 1, 1], 4)]
}

/// Quasismooth, well-formed `(v₀,…,v₃; Σv)` with `gcd(v) = 1` and every weight `≤ bound`.
///
/// Well-formedness (any three weights coprime, any two with gcd dividing `d`) is
/// what distinguishes the classical 95 from the bare criterion.
pub fn enumerate_k3_systems(bound: u64) -> Result<Vec<WeightSystemRecord>> {
    let tuples: Vec<[u64; 4]> = (1..=bound)
        .flat_map(|a| (1..=a).flat_map(move |b| (1..=b).flat_map(move |c| (1..=c).map(move |e| [a, b, c, e]))))
        .collect();
    let mut out: Vec<WeightSystemRecord> = tuples
        .par_iter()
        .filter(|w| {
            let d: u64 = w.iter().sum();
            w.iter().fold(0, |g, &x| gcd(g, x)) == 1
                && well_formed(&w[..], d)
                && is_quasismooth(&WeightSystem::new(w.to_vec(), d))
        })
        .map(|w| WeightSystemRecord::new(w.to_vec(), w.iter().sum()))
        .collect();
    out.sort_by(|a, b| (a.system.degree, &a.system.weights).cmp(&(b.system.degree, &b.system.weights)));
    if out.len() < 95 {
        return Err(Error::BoundTooSmall { bound, found: out.len() });
    }
    Ok(out)
}

fn well_formed(w: &[u64], d: u64) -> bool {
    let n = w.len();
    for skip in 0..n {
        let g = (0..n).filter(|&i| i != skip).fold(0, |g, i| gcd(g, w[i]));
        if g != 1 {
            return false;
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if d % gcd(w[i], w[j]) != 0 {
                return false;
            }
        }
    }
    true
}

/// Records admitting an invertible `z² + f`. Four systems with `d = 2v_i`
/// ((11,5,4,2;22), (17,7,6,4;34), (17,10,4,3;34), (19,8,6,5;38)) have no such
/// `f` and are dropped; see [`half_degree_only`].
pub fn filter_bv(records: &[WeightSystemRecord]) -> Vec<WeightSystemRecord> {
    records.iter().filter(|r| r.has_invertible_bv_polynomial).cloned().collect()
}

/// Records with `d = 2v_i` but no invertible `z² + f`.
pub fn half_degree_only(records: &[WeightSystemRecord]) -> Vec<WeightSystemRecord> {
    records.iter().filter(|r| r.bv_admissible && !r.has_invertible_bv_polynomial).cloned().collect()
}

fn var_names(n: usize) -> Vec<String> {
    let c = if n == 3 { 'x' } else { 'y' };
    (0..n).map(|i| format!("{c}{i}")).collect()
}

/// First invertible `z² + f` with the given weights, `f` a sum of Fermat, chain and
/// loop blocks. Candidates are pointer maps `i ↦ p(i)` (monomial `x_i^{a_i} x_{p(i)}`)
/// tried in lexicographic order with "no pointer" (Fermat) first.
pub fn sample_polynomial(ws: &WeightSystem) -> Result<Polynomial> {
    let z = half_degree_index(ws).ok_or_else(|| Error::BadForm(format!("{ws} has no weight d/2")))?;
    let n = ws.n();
    let rest: Vec<usize> = (0..n).filter(|&i| i != z).collect();
    let vars = Arc::new(var_names(n));
    let mut choice: Vec<Option<usize>> = vec![None; rest.len()];
    loop {
        if let Some(p) = candidate(ws, z, &rest, &choice, &vars) {
            if is_bv_form(&p).is_some() && is_invertible(&p) {
                return Ok(p);
            }
        }
        // advance: None < Some(rest[0]) < Some(rest[1]) < ...
        let mut k = rest.len();
        loop {
            if k == 0 {
                return Err(Error::NoInvertibleRepresentative(format!("{ws}")));
            }
            k -= 1;
            let next = match choice[k] {
                None => Some(0),
                Some(j) if j + 1 < rest.len() => Some(j + 1),
                Some(_) => None,
            };
            match next {
                Some(j) => {
                    choice[k] = Some(j);
                    for c in choice.iter_mut().skip(k + 1) {
                        *c = None;
                    }
                    break;
                }
                None => choice[k] = None,
            }
        }
    }
}

fn candidate(ws: &WeightSystem, z: usize, rest: &[usize], choice: &[Option<usize>], vars: &Arc<Vec<String>>) -> Option<Polynomial> {
    let n = ws.n();
    let mut seen = BTreeSet::new();
    let mut p = Polynomial::zero(vars.clone());
    let mut zz = Monomial::one(n);
    zz.0[z] = 2;
    p.add_term(zz, Coeff::one());
    for (k, &i) in rest.iter().enumerate() {
        let mut m = Monomial::one(n);
        let target = match choice[k] {
            None => ws.degree,
            Some(j) => {
                let t = rest[j];
                if t == i || !seen.insert(t) {
                    return None;
                }
                m.0[t] = 1;
                ws.degree.checked_sub(ws.weights[t])?
            }
        };
        if target % ws.weights[i] != 0 || target / ws.weights[i] < 2 {
            return None;
        }
        m.0[i] = (target / ws.weights[i]) as u32;
        p.add_term(m, Coeff::one());
    }
    Some(p)
}

/// A random polynomial with every degree-`d` monomial and small nonzero integer
/// coefficients; its Milnor ring is finite iff the general member is quasismooth.
pub fn random_polynomial(ws: &WeightSystem, seed: u64) -> Polynomial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = ws.n();
    let vars = Arc::new((0..n).map(|i| format!("z{i}")).collect::<Vec<_>>());
    let mut p = Polynomial::zero(vars);
    let mut cur = vec![0u32; n];
    fn rec(k: usize, left: u64, ws: &WeightSystem, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if k == ws.n() {
            if left == 0 {
                out.push(Monomial(cur.clone()));
            }
            return;
        }
        let w = ws.weights[k];
        for e in 0..=left / w {
            cur[k] = e as u32;
            rec(k + 1, left - e * w, ws, cur, out);
        }
        cur[k] = 0;
    }
    let mut monos = Vec::new();
    rec(0, ws.degree, ws, &mut cur, &mut monos);
    for m in monos {
        let c: i64 = rng.gen_range(1..=7) * if rng.gen_bool(0.5) { 1 } else { -1 };
        p.add_term(m, Coeff::from_integer(c.into()));
    }
    p
}

/// Cross-check of [`is_quasismooth`] on one weight system by a random member.
pub fn genericity_check(ws: &WeightSystem, seed: u64) -> bool {
    let p = random_polynomial(ws, seed);
    let vars: Vec<usize> = (0..ws.n()).collect();
    MilnorRing::with_weights(&p, &vars, &ws.weights).is_ok()
}

const HEADER: [&str; 8] = ["w0", "w1", "w2", "w3", "d", "quasismooth", "bv_admissible", "sample_poly"];

pub fn save<W: Write>(records: &[WeightSystemRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(HEADER).map_err(io)?;
    for r in records {
        let mut row: Vec<String> = (0..4).map(|i| r.system.weights.get(i).map(|x| x.to_string()).unwrap_or_default()).collect();
        row.push(r.system.degree.to_string());
        row.push(r.quasismooth.to_string());
        row.push(r.bv_admissible.to_string());
        row.push(r.sample.as_ref().map(|p| p.to_string()).unwrap_or_default());
        w.write_record(&row).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Inverse of [`save`]; duplicate rows are dropped with a warning.
pub fn load<R: Read>(input: R) -> Result<Vec<WeightSystemRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(input);
    let headers = rdr.headers().map_err(|e| Error::Catalog { line: 1, msg: e.to_string() })?.clone();
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::Catalog { line: 1, msg: format!("expected header {}", HEADER.join(",")) });
    }
    let mut out: Vec<WeightSystemRecord> = Vec::new();
    let mut seen = BTreeSet::new();
    for (k, row) in rdr.records().enumerate() {
        let line = k + 2;
        let row = row.map_err(|e| Error::Catalog { line, msg: e.to_string() })?;
        if row.len() != HEADER.len() {
            return Err(Error::Catalog { line, msg: format!("expected {} columns, found {}", HEADER.len(), row.len()) });
        }
        let num = |s: &str, what: &str| -> Result<u64> {
            s.trim().parse::<u64>().map_err(|_| Error::Catalog { line, msg: format!("bad {what}: {s:?}") })
        };
        let flag = |s: &str, what: &str| -> Result<bool> {
            s.trim().parse::<bool>().map_err(|_| Error::Catalog { line, msg: format!("bad {what}: {s:?}") })
        };
        let mut weights = Vec::new();
        for i in 0..4 {
            if !row[i].trim().is_empty() {
                weights.push(num(&row[i], HEADER[i])?);
            }
        }
        let degree = num(&row[4], "d")?;
        let system = WeightSystem::new(weights, degree);
        if !check_cy(&system) {
            return Err(Error::Catalog { line, msg: format!("{system} is not Calabi-Yau") });
        }
        let quasismooth = flag(&row[5], "quasismooth")?;
        let bv_admissible = flag(&row[6], "bv_admissible")?;
        let sample = if row[7].trim().is_empty() {
            None
        } else {
            let names = var_names(system.n());
            let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
            Some(parse_polynomial_with_vars(&row[7], &refs).map_err(|e| Error::Catalog { line, msg: e.to_string() })?)
        };
        if !seen.insert((system.weights.clone(), system.degree)) {
            log::warn!("catalog line {line}: duplicate weight system {system} dropped");
            continue;
        }
        out.push(WeightSystemRecord { system, quasismooth, bv_admissible, has_invertible_bv_polynomial: sample.is_some(), sample });
    }
    Ok(out)
}

/// Records whose stored flags disagree with a recomputation from the weights.
pub fn inconsistent_flags(records: &[WeightSystemRecord]) -> Vec<String> {
    records
        .iter()
        .filter(|r| r.quasismooth != is_quasismooth(&r.system) || r.bv_admissible != half_degree_index(&r.system).is_some())
        .map(|r| r.system.to_string())
        .collect()
}
