//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Besides arithmetic this module holds the structural queries on a potential:
//! weight systems, invertibility, the Berglund-Hübsch transpose, the
//! `z^2 + f` shape test and the Fermat/chain/loop classification.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg;

pub type Coeff = BigRational;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn var(n: usize, i: usize, e: u32) -> Self {
        let mut v = vec![0; n];
        v[i] = e;
        Monomial(v)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming divisibility.
    pub fn quotient(&self, other: &Monomial) -> Monomial {
        Monomial(other.0.iter().zip(&self.0).map(|(a, b)| a - b).collect())
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn coprime(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a == 0 || *b == 0)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] > 0).collect()
    }

    /// True when every variable with a positive exponent lies in `set`.
    pub fn supported_on(&self, set: &[usize]) -> bool {
        self.0
            .iter()
            .enumerate()
            .all(|(i, &e)| e == 0 || set.contains(&i))
    }

    pub fn weighted_degree(&self, w: &[u64]) -> u64 {
        self.0.iter().zip(w).map(|(&a, &b)| a as u64 * b).sum()
    }
}

/// Key ordering used by the canonical printer: total degree ascending, then
/// exponent vectors descending.
fn print_key(m: &Monomial) -> (u32, std::cmp::Reverse<Vec<u32>>) {
    (m.total_degree(), std::cmp::Reverse(m.0.clone()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    vars: Arc<Vec<String>>,
    terms: BTreeMap<Monomial, Coeff>,
}

impl Polynomial {
    pub fn zero(vars: Arc<Vec<String>>) -> Self {
        Polynomial { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: Arc<Vec<String>>, c: Coeff) -> Self {
        let n = vars.len();
        let mut p = Polynomial::zero(vars);
        p.add_term(Monomial::one(n), c);
        p
    }

    pub fn from_terms<I>(vars: Arc<Vec<String>>, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Coeff)>,
    {
        let mut p = Polynomial::zero(vars);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn monomial(vars: Arc<Vec<String>>, m: Monomial) -> Self {
        Polynomial::from_terms(vars, [(m, Coeff::one())])
    }

    pub fn vars(&self) -> &Arc<Vec<String>> {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Coeff> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Coeff {
        self.terms.get(m).cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: Coeff) {
        assert_eq!(m.nvars(), self.vars.len(), "monomial arity mismatch");
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut p = self.clone();
        for (m, c) in &other.terms {
            p.add_term(m.clone(), c.clone());
        }
        p
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let mut p = self.clone();
        for (m, c) in &other.terms {
            p.add_term(m.clone(), -c.clone());
        }
        p
    }

    pub fn scale(&self, c: &Coeff) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.vars.clone());
        }
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut p = Polynomial::zero(self.vars.clone());
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                p.add_term(m1.mul(m2), c1 * c2);
            }
        }
        p
    }

    pub fn derivative(&self, i: usize) -> Polynomial {
        let mut p = Polynomial::zero(self.vars.clone());
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e > 0 {
                let mut m2 = m.clone();
                m2.0[i] -= 1;
                p.add_term(m2, c * Coeff::from_integer(BigInt::from(e)));
            }
        }
        p
    }

    /// Keep exactly the terms supported on `fixed`.
    pub fn restrict(&self, fixed: &[usize]) -> Polynomial {
        Polynomial {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.supported_on(fixed))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Same polynomial with every coefficient replaced by 1.
    pub fn normalized(&self) -> Polynomial {
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.keys().map(|m| (m.clone(), Coeff::one())).collect(),
        }
    }

    /// Re-embed into a larger variable list. `map[i]` is the new index of variable `i`.
    pub fn embed(&self, vars: Arc<Vec<String>>, map: &[usize]) -> Polynomial {
        let n = vars.len();
        let mut p = Polynomial::zero(vars);
        for (m, c) in &self.terms {
            let mut e = vec![0; n];
            for (i, &a) in m.0.iter().enumerate() {
                e[map[i]] += a;
            }
            p.add_term(Monomial(e), c.clone());
        }
        p
    }

    /// Drop the variables outside `keep` (which must not occur in any term).
    pub fn project(&self, keep: &[usize]) -> Polynomial {
        let vars: Vec<String> = keep.iter().map(|&i| self.vars[i].clone()).collect();
        let mut p = Polynomial::zero(Arc::new(vars));
        for (m, c) in &self.terms {
            debug_assert!(m.supported_on(keep));
            p.add_term(Monomial(keep.iter().map(|&i| m.0[i]).collect()), c.clone());
        }
        p
    }

    /// Concatenate the variables of two polynomials and add them.
    pub fn direct_sum(&self, other: &Polynomial) -> Polynomial {
        let mut names: Vec<String> = self.vars.as_ref().clone();
        names.extend(other.vars.iter().cloned());
        let vars = Arc::new(names);
        let n1 = self.nvars();
        let m1: Vec<usize> = (0..n1).collect();
        let m2: Vec<usize> = (0..other.nvars()).map(|i| n1 + i).collect();
        self.embed(vars.clone(), &m1).add(&other.embed(vars, &m2))
    }

    pub fn exponent_rows(&self) -> Vec<Vec<u32>> {
        self.terms.keys().map(|m| m.0.clone()).collect()
    }

    pub fn variables_used(&self) -> Vec<usize> {
        (0..self.nvars())
            .filter(|&i| self.terms.keys().any(|m| m.0[i] > 0))
            .collect()
    }
}

fn fmt_coeff_abs(c: &Coeff) -> String {
    let a = c.abs();
    if a.is_integer() {
        a.numer().to_string()
    } else {
        format!("{}/{}", a.numer(), a.denom())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut terms: Vec<(&Monomial, &Coeff)> = self.terms.iter().collect();
        terms.sort_by_key(|(m, _)| print_key(m));
        for (k, (m, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let mut factors = Vec::new();
            for (i, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(self.vars[i].clone()),
                    _ => factors.push(format!("{}^{}", self.vars[i], e)),
                }
            }
            let abs_one = c.abs().is_one();
            if factors.is_empty() {
                write!(f, "{}", fmt_coeff_abs(c))?;
            } else if abs_one {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{}*{}", fmt_coeff_abs(c), factors.join("*"))?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Parsing

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(s.parse().unwrap())
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected variable"));
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string())
    }
}

enum RawFactor {
    Coeff(Coeff),
    Var(String, u32),
}

fn parse_factor(lx: &mut Lexer) -> Result<RawFactor> {
    match lx.peek() {
        Some(c) if c.is_ascii_digit() => {
            let n = lx.integer()?;
            if lx.peek() == Some(b'/') {
                lx.pos += 1;
                let d = lx.integer()?;
                if d.is_zero() {
                    return Err(lx.err("zero denominator"));
                }
                Ok(RawFactor::Coeff(Coeff::new(n, d)))
            } else {
                Ok(RawFactor::Coeff(Coeff::from_integer(n)))
            }
        }
        Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
            let name = lx.ident()?;
            let mut e = 1u32;
            if lx.peek() == Some(b'^') {
                lx.pos += 1;
                if lx.peek() == Some(b'-') {
                    return Err(Error::NegativeExponent { pos: lx.pos });
                }
                let v = lx.integer()?;
                e = v.to_u32().ok_or_else(|| lx.err("exponent too large"))?;
            }
            Ok(RawFactor::Var(name, e))
        }
        Some(_) => Err(lx.err("unexpected character")),
        None => Err(lx.err("unexpected end of input")),
    }
}

type RawTerm = (Coeff, Vec<(String, u32)>);

fn parse_raw(text: &str) -> Result<Vec<RawTerm>> {
    let mut lx = Lexer { src: text.as_bytes(), pos: 0 };
    let mut out = Vec::new();
    let mut first = true;
    loop {
        let mut sign = Coeff::one();
        match lx.peek() {
            None if !first => break,
            None => return Err(lx.err("empty polynomial")),
            Some(b'+') => {
                lx.pos += 1;
            }
            Some(b'-') => {
                lx.pos += 1;
                sign = -sign;
            }
            Some(_) if first => {}
            Some(_) => return Err(lx.err("expected '+' or '-'")),
        }
        first = false;
        let mut coeff = sign;
        let mut vars = Vec::new();
        loop {
            match parse_factor(&mut lx)? {
                RawFactor::Coeff(c) => coeff *= c,
                RawFactor::Var(v, e) => vars.push((v, e)),
            }
            match lx.peek() {
                Some(b'*') => {
                    lx.pos += 1;
                }
                Some(c) if c.is_ascii_alphanumeric() || c == b'_' => {}
                _ => break,
            }
        }
        out.push((coeff, vars));
    }
    Ok(out)
}

/// Parse a polynomial; variables are ordered by first appearance.
pub fn parse_polynomial(text: &str) -> Result<Polynomial> {
    let raw = parse_raw(text)?;
    let mut names: Vec<String> = Vec::new();
    for (_, vs) in &raw {
        for (v, _) in vs {
            if !names.contains(v) {
                names.push(v.clone());
            }
        }
    }
    build(raw, Arc::new(names))
}

/// Parse against a fixed variable list; unknown names are an error.
pub fn parse_polynomial_with_vars(text: &str, vars: &[&str]) -> Result<Polynomial> {
    let raw = parse_raw(text)?;
    let names: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
    for (_, vs) in &raw {
        for (v, _) in vs {
            if !names.contains(v) {
                return Err(Error::Parse { pos: 0, msg: format!("unknown variable {v}") });
            }
        }
    }
    build(raw, Arc::new(names))
}

fn build(raw: Vec<RawTerm>, vars: Arc<Vec<String>>) -> Result<Polynomial> {
    let n = vars.len();
    let mut p = Polynomial::zero(vars.clone());
    for (c, vs) in raw {
        let mut e = vec![0u32; n];
        for (v, k) in vs {
            let i = vars.iter().position(|x| *x == v).unwrap();
            e[i] += k;
        }
        p.add_term(Monomial(e), c);
    }
    Ok(p)
}

// ---------------------------------------------------------------------------
// Weight systems

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeightSystem {
    pub weights: Vec<u64>,
    pub degree: u64,
}

impl WeightSystem {
    pub fn new(weights: Vec<u64>, degree: u64) -> Self {
        WeightSystem { weights, degree }
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    /// q_j = w_j / d.
    pub fn q(&self, j: usize) -> num::rational::Ratio<i64> {
        num::rational::Ratio::new(self.weights[j] as i64, self.degree as i64)
    }

    pub fn central_charge(&self) -> num::rational::Ratio<i64> {
        (0..self.n())
            .map(|j| num::rational::Ratio::from_integer(1) - self.q(j) * 2)
            .sum()
    }
}

impl fmt::Display for WeightSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ws: Vec<String> = self.weights.iter().map(|w| w.to_string()).collect();
        write!(f, "({};{})", ws.join(","), self.degree)
    }
}

/// Unique primitive weight system of a quasihomogeneous polynomial.
pub fn weight_system(p: &Polynomial) -> Result<WeightSystem> {
    if p.is_zero() {
        return Err(Error::NoSolution);
    }
    let rows: Vec<Vec<Coeff>> = p
        .terms
        .keys()
        .map(|m| m.0.iter().map(|&a| Coeff::from_integer(BigInt::from(a))).collect())
        .collect();
    let rhs = vec![Coeff::one(); rows.len()];
    let q = match linalg::solve(&rows, &rhs, p.nvars()) {
        linalg::Solution::Unique(q) => q,
        linalg::Solution::None => return Err(Error::NoSolution),
        linalg::Solution::Many => return Err(Error::NonUnique),
    };
    if q.iter().any(|x| !x.is_positive()) {
        return Err(Error::NonPositiveWeight);
    }
    let mut l = BigInt::one();
    for x in &q {
        l = num::integer::lcm(l, x.denom().clone());
    }
    let mut w: Vec<BigInt> = q.iter().map(|x| (x * Coeff::from_integer(l.clone())).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &w {
        g = num::integer::gcd(g, x.clone());
    }
    for x in w.iter_mut() {
        *x /= &g;
    }
    let d = l / g;
    Ok(WeightSystem {
        weights: w.iter().map(|x| x.to_u64().expect("weight overflow")).collect(),
        degree: d.to_u64().expect("degree overflow"),
    })
}

pub fn check_cy(ws: &WeightSystem) -> bool {
    ws.weights.iter().sum::<u64>() == ws.degree
}

/// Exponent matrix with rows ordered by the head variable of each atomic
/// monomial, so row `k` is the monomial whose head is variable `k`.
pub fn exponent_matrix(p: &Polynomial) -> Result<Vec<Vec<i64>>> {
    let heads = head_assignment(p)?;
    let monos: Vec<&Monomial> = p.terms.keys().collect();
    let mut rows = vec![Vec::new(); p.nvars()];
    for (mi, &h) in heads.iter().enumerate() {
        rows[h] = monos[mi].0.iter().map(|&a| a as i64).collect();
    }
    Ok(rows)
}

/// Square exponent matrix with nonzero determinant and a finite Milnor ring.
pub fn is_invertible(p: &Polynomial) -> bool {
    if p.len() != p.nvars() || weight_system(p).is_err() {
        return false;
    }
    let rows: Vec<Vec<i64>> = p.exponent_rows().iter().map(|r| r.iter().map(|&a| a as i64).collect()).collect();
    if linalg::det_i64(&rows).is_zero() {
        return false;
    }
    crate::milnor::MilnorRing::new(p, &(0..p.nvars()).collect::<Vec<_>>()).is_ok()
}

/// Berglund-Hübsch transpose: the polynomial of the transposed exponent matrix,
/// all coefficients 1, same variable names.
pub fn transpose(p: &Polynomial) -> Result<Polynomial> {
    if p.len() != p.nvars() {
        return Err(Error::NotInvertible(format!(
            "{} monomials in {} variables",
            p.len(),
            p.nvars()
        )));
    }
    let a = exponent_matrix(p).map_err(|e| Error::NotInvertible(e.to_string()))?;
    if linalg::det_i64(&a).is_zero() {
        return Err(Error::NotInvertible("singular exponent matrix".into()));
    }
    let n = p.nvars();
    let mut t = Polynomial::zero(p.vars.clone());
    for j in 0..n {
        let e: Vec<u32> = (0..n).map(|i| a[i][j] as u32).collect();
        t.add_term(Monomial(e), Coeff::one());
    }
    Ok(t)
}

/// If `p = c z^2 + f` with `z` absent from `f`, the index of `z`.
pub fn is_bv_form(p: &Polynomial) -> Option<usize> {
    let ws = weight_system(p).ok()?;
    (0..p.nvars()).find(|&z| {
        let with_z: Vec<&Monomial> = p.terms.keys().filter(|m| m.0[z] > 0).collect();
        with_z.len() == 1 && *with_z[0] == Monomial::var(p.nvars(), z, 2) && 2 * ws.weights[z] == ws.degree
    })
}

// ---------------------------------------------------------------------------
// Atomic decomposition

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockKind {
    Fermat,
    Chain,
    Loop,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomicBlock {
    pub kind: BlockKind,
    /// Variables in pointer order: each variable's monomial has the next as its tail.
    /// Chains start at the variable that is nobody's tail.
    pub vars: Vec<usize>,
    /// Exponent of the head variable in its monomial, aligned with `vars`.
    pub exponents: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomicDecomposition {
    pub blocks: Vec<AtomicBlock>,
}

impl AtomicDecomposition {
    pub fn block_of(&self, var: usize) -> usize {
        self.blocks.iter().position(|b| b.vars.contains(&var)).expect("variable not in any block")
    }
}

/// Candidate (head, tail) readings of a monomial.
fn readings(m: &Monomial) -> Vec<(usize, Option<usize>)> {
    let s = m.support();
    match s.len() {
        1 if m.0[s[0]] >= 2 => vec![(s[0], None)],
        2 => {
            let (i, j) = (s[0], s[1]);
            let mut r = Vec::new();
            // Prefer the variable with the larger exponent as head.
            let mut cands = Vec::new();
            if m.0[j] == 1 {
                cands.push((i, Some(j), m.0[i]));
            }
            if m.0[i] == 1 {
                cands.push((j, Some(i), m.0[j]));
            }
            cands.sort_by(|a, b| b.2.cmp(&a.2).then(a.0.cmp(&b.0)));
            r.extend(cands.into_iter().map(|(h, t, _)| (h, t)));
            r
        }
        _ => Vec::new(),
    }
}

fn head_assignment(p: &Polynomial) -> Result<Vec<usize>> {
    let n = p.nvars();
    let monos: Vec<&Monomial> = p.terms.keys().collect();
    if monos.len() != n {
        return Err(Error::NotClassifiable(format!("{} monomials in {} variables", monos.len(), n)));
    }
    let opts: Vec<Vec<(usize, Option<usize>)>> = monos.iter().map(|m| readings(m)).collect();
    for (k, o) in opts.iter().enumerate() {
        if o.is_empty() {
            return Err(Error::NotClassifiable(format!("monomial {} has no atomic reading", k)));
        }
    }
    let mut head_used = vec![false; n];
    let mut tail_used = vec![false; n];
    let mut choice = vec![0usize; monos.len()];
    fn go(
        k: usize,
        opts: &[Vec<(usize, Option<usize>)>],
        head_used: &mut [bool],
        tail_used: &mut [bool],
        choice: &mut [usize],
    ) -> bool {
        if k == opts.len() {
            return true;
        }
        for (ci, &(h, t)) in opts[k].iter().enumerate() {
            if head_used[h] || t.is_some_and(|t| tail_used[t]) {
                continue;
            }
            head_used[h] = true;
            if let Some(t) = t {
                tail_used[t] = true;
            }
            choice[k] = ci;
            if go(k + 1, opts, head_used, tail_used, choice) {
                return true;
            }
            head_used[h] = false;
            if let Some(t) = t {
                tail_used[t] = false;
            }
        }
        false
    }
    if !go(0, &opts, &mut head_used, &mut tail_used, &mut choice) {
        return Err(Error::NotClassifiable("no consistent head assignment".into()));
    }
    Ok((0..monos.len()).map(|k| opts[k][choice[k]].0).collect())
}

pub fn atomic_decomposition(p: &Polynomial) -> Result<AtomicDecomposition> {
    let n = p.nvars();
    let heads = head_assignment(p)?;
    let monos: Vec<&Monomial> = p.terms.keys().collect();
    let mut tail_of = vec![None; n];
    let mut exp_of = vec![0u32; n];
    let mut is_tail = vec![false; n];
    for (k, &h) in heads.iter().enumerate() {
        exp_of[h] = monos[k].0[h];
        let t = monos[k].support().into_iter().find(|&v| v != h);
        tail_of[h] = t;
        if let Some(t) = t {
            is_tail[t] = true;
        }
    }
    let mut seen = vec![false; n];
    let mut blocks = Vec::new();
    // Fermat and chains start at variables that are nobody's tail.
    for start in 0..n {
        if is_tail[start] {
            continue;
        }
        let mut vars = vec![start];
        seen[start] = true;
        let mut cur = start;
        while let Some(t) = tail_of[cur] {
            if seen[t] {
                return Err(Error::NotClassifiable("pointer cycle inside a chain".into()));
            }
            seen[t] = true;
            vars.push(t);
            cur = t;
        }
        let kind = if vars.len() == 1 { BlockKind::Fermat } else { BlockKind::Chain };
        let exponents = vars.iter().map(|&v| exp_of[v]).collect();
        blocks.push(AtomicBlock { kind, vars, exponents });
    }
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut vars = vec![start];
        seen[start] = true;
        let mut cur = start;
        loop {
            let t = tail_of[cur].ok_or_else(|| Error::NotClassifiable("broken loop".into()))?;
            if t == start {
                break;
            }
            if seen[t] {
                return Err(Error::NotClassifiable("loop re-enters another block".into()));
            }
            seen[t] = true;
            vars.push(t);
            cur = t;
        }
        let exponents = vars.iter().map(|&v| exp_of[v]).collect();
        blocks.push(AtomicBlock { kind: BlockKind::Loop, vars, exponents });
    }
    blocks.sort_by_key(|b| *b.vars.iter().min().unwrap());
    for b in &blocks {
        if b.kind == BlockKind::Chain {
            if let Ok(ws) = weight_system(p) {
                if b.vars.iter().any(|&v| 2 * ws.weights[v] == ws.degree) {
                    log::warn!("chain block contains a variable of weight 1/2");
                }
            }
        }
    }
    Ok(AtomicDecomposition { blocks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Polynomial {
        parse_polynomial(s).unwrap()
    }

    #[test]
    fn parse_basic() {
        let a = p("x0^2+x1^3+x2^6");
        assert_eq!(a.nvars(), 3);
        assert_eq!(a.len(), 3);
        let b = p("y0^2 + y1^6 + y2^6 + y3^6");
        assert_eq!(b.len(), 4);
        assert!(matches!(parse_polynomial("x0^2 - x1^-1"), Err(Error::NegativeExponent { .. })));
        assert!(matches!(parse_polynomial("x0^2 + + "), Err(Error::Parse { .. })));
    }

    #[test]
    fn parse_coefficients_and_products() {
        let a = p("3/2*x^2*y - 2 x y^3 + x^2*y");
        assert_eq!(a.coeff(&Monomial(vec![2, 1])), Coeff::new(5.into(), 2.into()));
        assert_eq!(a.coeff(&Monomial(vec![1, 3])), Coeff::from_integer((-2).into()));
    }

    #[test]
    fn print_roundtrip() {
        for s in ["x0^2 + x1^3 + x2^6", "x^3*y + y^4", "-1/3*a*b + 2*b^5", "x^2*y - y^3*x"] {
            let a = p(s);
            let b = p(&a.to_string());
            assert_eq!(a, b, "{s}");
        }
        assert_eq!(p("x2^6+x0^2+x1^3").to_string(), "x0^2 + x1^3 + x2^6");
    }

    #[test]
    fn weights() {
        assert_eq!(weight_system(&p("x0^2+x1^3+x2^6")).unwrap(), WeightSystem::new(vec![3, 2, 1], 6));
        assert_eq!(weight_system(&p("x0^2+x1^4+x2^4")).unwrap(), WeightSystem::new(vec![2, 1, 1], 4));
        assert_eq!(weight_system(&p("x0^2+x1^2*x2")), Err(Error::NonUnique));
        assert_eq!(weight_system(&p("x^2+x^3")), Err(Error::NoSolution));
        assert_eq!(weight_system(&p("x^3+x*y^4")).unwrap(), WeightSystem::new(vec![2, 1], 6));
    }

    #[test]
    fn cy() {
        assert!(check_cy(&WeightSystem::new(vec![3, 2, 1], 6)));
        assert!(check_cy(&WeightSystem::new(vec![3, 1, 1, 1], 6)));
        assert!(!check_cy(&WeightSystem::new(vec![1, 1, 1], 5)));
    }

    #[test]
    fn invertibility() {
        assert!(is_invertible(&p("x0^2+x1^3+x2^6")));
        assert!(!is_invertible(&p("x0^2+x1^3+x2^6+x1*x2^3")));
        assert!(!is_invertible(&p("x^3+x^2*y")));
        assert!(is_invertible(&p("x^2*y+y^2*x")));
    }

    #[test]
    fn transposes() {
        let f = p("x0^2+x1^3+x2^6");
        assert_eq!(transpose(&f).unwrap(), f);
        let c = p("x^3+x*y^4");
        assert_eq!(transpose(&c).unwrap(), p("x^3*y+y^4"));
        for s in ["x^3+x*y^4", "x^2*y+y^3*x", "a^2*b + b^3*c + c^4", "a^3*b + b^2*c + c^5*a + d^7"] {
            let w = p(s);
            assert_eq!(transpose(&transpose(&w).unwrap()).unwrap(), w.normalized(), "{s}");
            assert!(weight_system(&transpose(&w).unwrap()).is_ok());
        }
    }

    #[test]
    fn restriction() {
        let f = p("x0^2+x1^3+x2^6");
        assert_eq!(f.restrict(&[1]), Polynomial::monomial(f.vars().clone(), Monomial(vec![0, 3, 0])));
        assert_eq!(f.restrict(&[0, 1, 2]), f);
        assert!(f.restrict(&[]).is_zero());
    }

    #[test]
    fn bv_form() {
        assert_eq!(is_bv_form(&p("y0^2+y1^6+y2^6+y3^6")), Some(0));
        assert_eq!(is_bv_form(&p("x1^3+x2^6")), None);
        assert_eq!(is_bv_form(&p("x0^2*x1+x1^3")), None);
    }

    #[test]
    fn atomic() {
        let d = atomic_decomposition(&p("x0^2+x1^3+x2^6")).unwrap();
        assert_eq!(d.blocks.len(), 3);
        assert!(d.blocks.iter().all(|b| b.kind == BlockKind::Fermat));
        let c = atomic_decomposition(&p("x^3*y+y^4")).unwrap();
        assert_eq!(c.blocks, vec![AtomicBlock { kind: BlockKind::Chain, vars: vec![0, 1], exponents: vec![3, 4] }]);
        let l = atomic_decomposition(&p("x^2*y+y^2*x")).unwrap();
        assert_eq!(l.blocks.len(), 1);
        assert_eq!(l.blocks[0].kind, BlockKind::Loop);
        let m = atomic_decomposition(&p("a^2*b + b^3*c + c^4 + d^2*e + e^3*d + f^5")).unwrap();
        let kinds: Vec<BlockKind> = m.blocks.iter().map(|b| b.kind).collect();
        assert_eq!(kinds, vec![BlockKind::Chain, BlockKind::Loop, BlockKind::Fermat]);
        assert!(matches!(atomic_decomposition(&p("x*y*z + x^3 + y^3")), Err(Error::NotClassifiable(_))));
    }
}
