//! Gröbner bases over ℚ and Milnor rings of quasihomogeneous polynomials.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{weight_system, Coeff, Monomial, Polynomial};

/// Weighted degree, ties broken reverse-lexicographically (last variable first).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermOrder {
    pub weights: Vec<u64>,
}

impl TermOrder {
    pub fn new(weights: Vec<u64>) -> Self {
        TermOrder { weights }
    }

    pub fn key(&self, m: &Monomial) -> Key {
        Key { wdeg: m.weighted_degree(&self.weights), m: m.clone() }
    }

    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        self.key(a).cmp(&self.key(b))
    }
}

/// A monomial tagged with its weighted degree so that `Ord` realizes the term order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Key {
    pub wdeg: u64,
    pub m: Monomial,
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.wdeg.cmp(&other.wdeg).then_with(|| {
            for (a, b) in self.m.0.iter().zip(&other.m.0).rev() {
                if a != b {
                    return b.cmp(a);
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial sorted by decreasing term order; monic when stored in a basis.
type OPoly = Vec<(Key, Coeff)>;

fn to_opoly(p: &Polynomial, order: &TermOrder) -> OPoly {
    let mut v: OPoly = p.terms().iter().map(|(m, c)| (order.key(m), c.clone())).collect();
    v.sort_by(|a, b| b.0.cmp(&a.0));
    v
}

fn make_monic(p: &mut OPoly) {
    if let Some((_, lc)) = p.first() {
        let inv = Coeff::one() / lc.clone();
        for (_, c) in p.iter_mut() {
            *c *= &inv;
        }
    }
}

fn shift(k: &Key, by: &Monomial, order: &TermOrder) -> Key {
    let m = k.m.mul(by);
    Key { wdeg: k.wdeg + by.weighted_degree(&order.weights), m }
}

/// Full reduction of `p` modulo the monic basis `g`.
fn reduce(p: BTreeMap<Key, Coeff>, g: &[OPoly], order: &TermOrder) -> BTreeMap<Key, Coeff> {
    let mut work = p;
    let mut rem = BTreeMap::new();
    while let Some((k, c)) = work.pop_last() {
        match g.iter().find(|b| b[0].0.m.divides(&k.m)) {
            Some(b) => {
                let q = b[0].0.m.quotient(&k.m);
                for (bk, bc) in &b[1..] {
                    let nk = shift(bk, &q, order);
                    match work.entry(nk) {
                        std::collections::btree_map::Entry::Vacant(v) => {
                            v.insert(-(&c * bc));
                        }
                        std::collections::btree_map::Entry::Occupied(mut o) => {
                            *o.get_mut() -= &c * bc;
                            if o.get().is_zero() {
                                o.remove();
                            }
                        }
                    }
                }
            }
            None => {
                rem.insert(k, c);
            }
        }
    }
    rem
}

fn to_sorted(m: BTreeMap<Key, Coeff>) -> OPoly {
    m.into_iter().rev().collect()
}

/// Reduced Gröbner basis by Buchberger's algorithm with the product and chain criteria.
pub fn groebner(gens: &[Polynomial], order: &TermOrder) -> Vec<Polynomial> {
    let Some(first) = gens.first() else { return Vec::new() };
    let vars = first.vars().clone();
    groebner_opoly(gens, order)
        .into_iter()
        .map(|b| Polynomial::from_terms(vars.clone(), b.into_iter().map(|(k, c)| (k.m, c))))
        .collect()
}

fn groebner_opoly(gens: &[Polynomial], order: &TermOrder) -> Vec<OPoly> {
    let mut basis: Vec<OPoly> = Vec::new();
    for g in gens {
        let mut p = to_opoly(g, order);
        if !p.is_empty() {
            make_monic(&mut p);
            basis.push(p);
        }
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for j in 0..basis.len() {
        for i in 0..j {
            pairs.push((i, j));
        }
    }
    let lcm_key = |basis: &[OPoly], i: usize, j: usize| order.key(&basis[i][0].0.m.lcm(&basis[j][0].0.m));
    while !pairs.is_empty() {
        // Normal selection strategy: smallest lcm first.
        let (pos, _) = pairs
            .iter()
            .enumerate()
            .min_by(|a, b| lcm_key(&basis, a.1 .0, a.1 .1).cmp(&lcm_key(&basis, b.1 .0, b.1 .1)))
            .unwrap();
        let (i, j) = pairs.swap_remove(pos);
        let (li, lj) = (&basis[i][0].0.m, &basis[j][0].0.m);
        if li.coprime(lj) {
            continue;
        }
        let l = li.lcm(lj);
        let has_pair = |a: usize, b: usize| pairs.contains(&(a.min(b), a.max(b)));
        let chain = (0..basis.len())
            .any(|k| k != i && k != j && basis[k][0].0.m.divides(&l) && !has_pair(i, k) && !has_pair(j, k));
        if chain {
            continue;
        }
        let qi = li.quotient(&l);
        let qj = lj.quotient(&l);
        let mut s: BTreeMap<Key, Coeff> = BTreeMap::new();
        for (k, c) in &basis[i][1..] {
            *s.entry(shift(k, &qi, order)).or_insert_with(Coeff::zero) += c;
        }
        for (k, c) in &basis[j][1..] {
            *s.entry(shift(k, &qj, order)).or_insert_with(Coeff::zero) -= c;
        }
        s.retain(|_, c| !c.is_zero());
        let r = reduce(s, &basis, order);
        if r.is_empty() {
            continue;
        }
        let mut r = to_sorted(r);
        make_monic(&mut r);
        let n = basis.len();
        basis.push(r);
        for k in 0..n {
            pairs.push((k, n));
        }
    }
    // Minimalize.
    let mut keep: Vec<OPoly> = Vec::new();
    for (i, b) in basis.iter().enumerate() {
        let lt = &b[0].0.m;
        let redundant = basis.iter().enumerate().any(|(k, o)| {
            k != i && o[0].0.m.divides(lt) && (o[0].0.m != *lt || k < i)
        });
        if !redundant {
            keep.push(b.clone());
        }
    }
    // Interreduce tails.
    let mut out = Vec::new();
    for i in 0..keep.len() {
        let others: Vec<OPoly> = keep.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, b)| b.clone()).collect();
        let tail: BTreeMap<Key, Coeff> = keep[i][1..].iter().cloned().collect();
        let mut p = vec![keep[i][0].clone()];
        p.extend(to_sorted(reduce(tail, &others, order)));
        out.push(p);
    }
    out.sort_by(|a, b| a[0].0.cmp(&b[0].0));
    out
}

pub fn jacobian_ideal(p: &Polynomial, vars: &[usize]) -> Vec<Polynomial> {
    vars.iter().map(|&i| p.derivative(i)).collect()
}

/// Determinant of the matrix of second partials in `vars` (1 when `vars` is empty).
pub fn hessian(p: &Polynomial, vars: &[usize]) -> Polynomial {
    let n = vars.len();
    let h: Vec<Vec<Polynomial>> = vars
        .iter()
        .map(|&i| {
            let di = p.derivative(i);
            vars.iter().map(|&j| di.derivative(j)).collect()
        })
        .collect();
    // Expansion by minors along rows, memoized on the set of remaining columns.
    let mut memo: HashMap<u64, Polynomial> = HashMap::new();
    fn minor(
        cols: u64,
        n: usize,
        h: &[Vec<Polynomial>],
        memo: &mut HashMap<u64, Polynomial>,
        vars: &std::sync::Arc<Vec<String>>,
    ) -> Polynomial {
        if cols == 0 {
            return Polynomial::constant(vars.clone(), Coeff::one());
        }
        if let Some(v) = memo.get(&cols) {
            return v.clone();
        }
        let row = n - cols.count_ones() as usize;
        let mut acc = Polynomial::zero(vars.clone());
        let mut sign = true;
        for j in 0..n {
            if cols & (1 << j) == 0 {
                continue;
            }
            if !h[row][j].is_zero() {
                let sub = minor(cols & !(1 << j), n, h, memo, vars);
                let term = h[row][j].mul(&sub);
                acc = if sign { acc.add(&term) } else { acc.sub(&term) };
            }
            sign = !sign;
        }
        memo.insert(cols, acc.clone());
        acc
    }
    minor((1u64 << n) - 1, n, &h, &mut memo, p.vars())
}

/// Milnor ring `ℚ[x_I]/(∂W)` of a polynomial restricted to the variables `I`.
#[derive(Clone, Debug)]
pub struct MilnorRing {
    poly: Polynomial,
    vars: Vec<usize>,
    order: TermOrder,
    basis: Vec<OPoly>,
    standard: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
    socle: Monomial,
    hess_socle: Coeff,
}

impl MilnorRing {
    /// Ring of `p` restricted to `vars`, graded by the weights of `p` on `vars`
    /// (all ones when those are not determined).
    pub fn new(p: &Polynomial, vars: &[usize]) -> Result<Self> {
        let mut weights = vec![1u64; p.nvars()];
        let r = p.restrict(vars);
        if !vars.is_empty() && !r.is_zero() {
            if let Ok(ws) = weight_system(&r.project(vars)) {
                for (k, &v) in vars.iter().enumerate() {
                    weights[v] = ws.weights[k];
                }
            }
        }
        Self::with_weights(p, vars, &weights)
    }

    pub fn with_weights(p: &Polynomial, vars: &[usize], weights: &[u64]) -> Result<Self> {
        let mut vars = vars.to_vec();
        vars.sort_unstable();
        let order = TermOrder::new(weights.iter().map(|&w| w.max(1)).collect());
        let poly = p.restrict(&vars);
        let n = p.nvars();
        if vars.is_empty() {
            let one = Monomial::one(n);
            return Ok(MilnorRing {
                poly,
                vars,
                order,
                basis: Vec::new(),
                standard: vec![one.clone()],
                index: [(one.clone(), 0)].into_iter().collect(),
                socle: one,
                hess_socle: Coeff::one(),
            });
        }
        let basis = groebner_opoly(&jacobian_ideal(&poly, &vars), &order);
        let lts: Vec<&Monomial> = basis.iter().map(|b| &b[0].0.m).collect();
        if lts.iter().any(|m| m.total_degree() == 0) {
            return Err(Error::Degenerate);
        }
        let mut bound = vec![0u32; n];
        for &v in &vars {
            let pure = lts.iter().filter(|m| m.support() == [v]).map(|m| m.0[v]).min();
            match pure {
                Some(e) => bound[v] = e,
                None => return Err(Error::Degenerate),
            }
        }
        let mut standard = Vec::new();
        let mut cur = Monomial::one(n);
        enumerate_standard(0, &vars, &bound, &lts, &mut cur, &mut standard);
        standard.sort_by(|a, b| order.cmp(a, b));
        let top = standard.last().unwrap().weighted_degree(&order.weights);
        let tops = standard.iter().filter(|m| m.weighted_degree(&order.weights) == top).count();
        if tops != 1 {
            return Err(Error::SocleNotUnique);
        }
        let socle = standard.last().unwrap().clone();
        let index = standard.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let mut ring = MilnorRing { poly, vars, order, basis, standard, index, socle, hess_socle: Coeff::zero() };
        let h = ring.normal_form(&hessian(&ring.poly, &ring.vars));
        ring.hess_socle = h.coeff(&ring.socle);
        Ok(ring)
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn order(&self) -> &TermOrder {
        &self.order
    }

    pub fn mu(&self) -> usize {
        self.standard.len()
    }

    pub fn standard_monomials(&self) -> &[Monomial] {
        &self.standard
    }

    pub fn standard_index(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn socle(&self) -> &Monomial {
        &self.socle
    }

    pub fn groebner_basis(&self) -> Vec<Polynomial> {
        self.basis
            .iter()
            .map(|b| Polynomial::from_terms(self.poly.vars().clone(), b.iter().map(|(k, c)| (k.m.clone(), c.clone()))))
            .collect()
    }

    pub fn normal_form(&self, p: &Polynomial) -> Polynomial {
        let work: BTreeMap<Key, Coeff> = p.terms().iter().map(|(m, c)| (self.order.key(m), c.clone())).collect();
        let r = reduce(work, &self.basis, &self.order);
        Polynomial::from_terms(self.poly.vars().clone(), r.into_iter().map(|(k, c)| (k.m, c)))
    }

    /// Socle coefficient of `nf(Hess)`.
    pub fn hessian_socle_coeff(&self) -> &Coeff {
        &self.hess_socle
    }

    /// `⟨f, g⟩ = μ · c_socle(nf(fg)) / c_socle(nf(Hess))`.
    pub fn residue_pairing(&self, f: &Polynomial, g: &Polynomial) -> Result<Coeff> {
        if self.hess_socle.is_zero() {
            return Err(Error::DegenerateHessian);
        }
        let c = self.normal_form(&f.mul(g)).coeff(&self.socle);
        Ok(c * Coeff::from_integer(self.mu().into()) / self.hess_socle.clone())
    }

    /// Pairing of two standard monomials.
    pub fn pair_monomials(&self, a: &Monomial, b: &Monomial) -> Result<Coeff> {
        let vars = self.poly.vars().clone();
        self.residue_pairing(&Polynomial::monomial(vars.clone(), a.clone()), &Polynomial::monomial(vars, b.clone()))
    }

    /// Gram matrix of the residue pairing on the standard basis.
    pub fn gram_matrix(&self) -> Result<Vec<Vec<Coeff>>> {
        self.standard
            .iter()
            .map(|a| self.standard.iter().map(|b| self.pair_monomials(a, b)).collect())
            .collect()
    }
}

fn enumerate_standard(
    k: usize,
    vars: &[usize],
    bound: &[u32],
    lts: &[&Monomial],
    cur: &mut Monomial,
    out: &mut Vec<Monomial>,
) {
    if k == vars.len() {
        out.push(cur.clone());
        return;
    }
    let v = vars[k];
    for e in 0..bound[v] {
        cur.0[v] = e;
        if lts.iter().any(|m| m.divides(cur)) {
            break;
        }
        enumerate_standard(k + 1, vars, bound, lts, cur, out);
    }
    cur.0[v] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial;

    fn p(s: &str) -> Polynomial {
        parse_polynomial(s).unwrap()
    }

    fn all(p: &Polynomial) -> Vec<usize> {
        (0..p.nvars()).collect()
    }

    fn q(a: i64, b: i64) -> Coeff {
        Coeff::new(a.into(), b.into())
    }

    #[test]
    fn jacobian() {
        let w = p("x^3+x*y^4");
        let j = jacobian_ideal(&w, &[0, 1]);
        assert_eq!(j[0], p("3*x^2+y^4").embed(w.vars().clone(), &[0, 1]));
        assert_eq!(j[1], parse_polynomial_with(&w, "4*x*y^3"));
    }

    fn parse_polynomial_with(w: &Polynomial, s: &str) -> Polynomial {
        let names: Vec<&str> = w.vars().iter().map(|s| s.as_str()).collect();
        crate::poly::parse_polynomial_with_vars(s, &names).unwrap()
    }

    #[test]
    fn groebner_small() {
        let w = p("x0^2+x1^3+x2^6");
        let o = TermOrder::new(vec![3, 2, 1]);
        let g = groebner(&jacobian_ideal(&w, &[0, 1, 2]), &o);
        assert_eq!(g.len(), 3);
        let x = p("x^2+y + y^2");
        let names = x.vars().clone();
        let gens = vec![
            Polynomial::from_terms(names.clone(), [(Monomial(vec![2, 0]), q(1, 1)), (Monomial(vec![0, 1]), q(1, 1))]),
            Polynomial::from_terms(names.clone(), [(Monomial(vec![0, 2]), q(1, 1))]),
        ];
        let g = groebner(&gens, &TermOrder::new(vec![1, 2]));
        let mut lts: Vec<Monomial> = g
            .iter()
            .map(|b| b.terms().keys().max_by(|a, c| TermOrder::new(vec![1, 2]).cmp(a, c)).unwrap().clone())
            .collect();
        lts.sort();
        assert_eq!(lts, vec![Monomial(vec![0, 2]), Monomial(vec![2, 0])]);
        assert!(groebner(&[], &o).is_empty());
    }

    #[test]
    fn milnor_numbers() {
        let e = p("x0^2+x1^3+x2^6");
        let r = MilnorRing::new(&e, &all(&e)).unwrap();
        assert_eq!(r.mu(), 10);
        assert_eq!(r.socle(), &Monomial(vec![0, 1, 4]));
        let k = p("y0^2+y1^6+y2^6+y3^6");
        assert_eq!(MilnorRing::new(&k, &all(&k)).unwrap().mu(), 125);
        let d = p("x^2*y");
        assert_eq!(MilnorRing::new(&d, &all(&d)).unwrap_err(), Error::Degenerate);
        let c = p("x^3+x*y^4");
        // chain x^3 + x y^4 has μ = 3·4 - ... checked against the weight formula Π(1/q - 1)
        assert_eq!(MilnorRing::new(&c, &all(&c)).unwrap().mu(), 10);
        let l = p("x^2*y+y^3*x");
        assert_eq!(MilnorRing::new(&l, &all(&l)).unwrap().mu(), 6);
    }

    #[test]
    fn normal_forms() {
        let c = p("x^3");
        let r = MilnorRing::new(&c, &[0]).unwrap();
        assert!(r.normal_form(&p("x^4")).is_zero());
        let e = p("x0^2+x1^3+x2^6");
        let re = MilnorRing::new(&e, &all(&e)).unwrap();
        let m = Polynomial::monomial(e.vars().clone(), Monomial(vec![0, 1, 4]));
        assert_eq!(re.normal_form(&m), m);
        let w = p("x^3+x*y^4");
        let rw = MilnorRing::new(&w, &all(&w)).unwrap();
        for g in jacobian_ideal(&w, &[0, 1]) {
            assert!(rw.normal_form(&g.mul(&p("x*y + y^2").embed(w.vars().clone(), &[0, 1]))).is_zero());
        }
    }

    #[test]
    fn hessians() {
        let c = p("x^3");
        assert_eq!(hessian(&c, &[0]), p("6*x"));
        let e = p("x0^2+x1^3+x2^6");
        assert_eq!(hessian(&e, &[0, 1, 2]), parse_polynomial_with(&e, "360*x1*x2^4"));
        assert_eq!(hessian(&e, &[]), Polynomial::constant(e.vars().clone(), q(1, 1)));
    }

    #[test]
    fn pairing() {
        let c = p("x^3");
        let r = MilnorRing::new(&c, &[0]).unwrap();
        let one = Polynomial::constant(c.vars().clone(), q(1, 1));
        assert_eq!(r.residue_pairing(&one, &p("x")).unwrap(), q(1, 3));
        assert_eq!(r.residue_pairing(&one, &one).unwrap(), q(0, 1));
    }

    #[test]
    fn empty_ring() {
        let e = p("x0^2+x1^3");
        let r = MilnorRing::new(&e, &[]).unwrap();
        assert_eq!(r.mu(), 1);
        let one = Polynomial::constant(e.vars().clone(), q(1, 1));
        assert_eq!(r.residue_pairing(&one, &one).unwrap(), q(1, 1));
    }
}
