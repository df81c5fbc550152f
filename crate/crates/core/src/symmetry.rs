//! Finite diagonal symmetry groups inside (ℚ/ℤ)ⁿ.

use std::cmp::Ordering;
use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use num::integer::{gcd, lcm};
use num::rational::Ratio;
use num::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::{exponent_matrix, transpose, Polynomial, WeightSystem};

pub type Q = Ratio<i64>;

const DEFAULT_CAP: usize = 1_000_000;
static CAP: AtomicUsize = AtomicUsize::new(0);

/// Largest group the library will enumerate. `LGMIRROR_MAX_GROUP` overrides the default.
pub fn max_group_order() -> usize {
    match CAP.load(AtomicOrdering::Relaxed) {
        0 => std::env::var("LGMIRROR_MAX_GROUP").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_CAP),
        c => c,
    }
}

pub fn set_max_group_order(cap: usize) {
    CAP.store(cap, AtomicOrdering::Relaxed);
}

/// Element of (ℚ/ℤ)ⁿ stored as numerators over the minimal common denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    den: u64,
    num: Vec<u64>,
}

impl GroupElement {
    pub fn identity(n: usize) -> Self {
        GroupElement { den: 1, num: vec![0; n] }
    }

    /// Components `nums[i] / den`, reduced mod 1.
    pub fn from_fractions(nums: &[i64], den: u64) -> Self {
        assert!(den > 0);
        let d = den as i64;
        let mut num: Vec<u64> = nums.iter().map(|&a| a.rem_euclid(d) as u64).collect();
        let g = num.iter().fold(den, |g, &a| gcd(g, a));
        for a in num.iter_mut() {
            *a /= g;
        }
        GroupElement { den: den / g, num }
    }

    pub fn from_rationals(q: &[Q]) -> Self {
        let den = q.iter().fold(1i64, |l, x| lcm(l, *x.denom())) as u64;
        let nums: Vec<i64> = q.iter().map(|x| x.numer() * (den as i64 / x.denom())).collect();
        GroupElement::from_fractions(&nums, den)
    }

    pub fn n(&self) -> usize {
        self.num.len()
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn numerators(&self) -> &[u64] {
        &self.num
    }

    pub fn component(&self, i: usize) -> Q {
        Q::new(self.num[i] as i64, self.den as i64)
    }

    pub fn components(&self) -> Vec<Q> {
        (0..self.n()).map(|i| self.component(i)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.den == 1
    }

    /// Order of the cyclic subgroup generated by this element.
    pub fn order(&self) -> u64 {
        self.den
    }

    pub fn add(&self, other: &GroupElement) -> GroupElement {
        let l = lcm(self.den, other.den);
        let (a, b) = (l / self.den, l / other.den);
        let nums: Vec<i64> = self.num.iter().zip(&other.num).map(|(x, y)| (x * a + y * b) as i64).collect();
        GroupElement::from_fractions(&nums, l)
    }

    pub fn neg(&self) -> GroupElement {
        let nums: Vec<i64> = self.num.iter().map(|&x| -(x as i64)).collect();
        GroupElement::from_fractions(&nums, self.den)
    }

    pub fn scale(&self, k: i64) -> GroupElement {
        let nums: Vec<i64> = self.num.iter().map(|&x| (x as i64) * k.rem_euclid(self.den as i64)).collect();
        GroupElement::from_fractions(&nums, self.den)
    }

    /// Σ g_i with representatives in [0, 1).
    pub fn age(&self) -> Q {
        Q::new(self.num.iter().sum::<u64>() as i64, self.den as i64)
    }

    /// `I_g`: indices with component 0.
    pub fn fixed_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.num[i] == 0).collect()
    }

    pub fn n_fixed(&self) -> usize {
        self.num.iter().filter(|&&x| x == 0).count()
    }

    /// Components at `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> GroupElement {
        let nums: Vec<i64> = idx.iter().map(|&i| self.num[i] as i64).collect();
        GroupElement::from_fractions(&nums, self.den)
    }

    pub fn concat(&self, other: &GroupElement) -> GroupElement {
        let l = lcm(self.den, other.den);
        let mut nums: Vec<i64> = self.num.iter().map(|&x| (x * (l / self.den)) as i64).collect();
        nums.extend(other.num.iter().map(|&x| (x * (l / other.den)) as i64));
        GroupElement::from_fractions(&nums, l)
    }

    /// Σ_i c_i g_i mod 1 for integer coefficients.
    pub fn pair_integer(&self, c: &[i64]) -> Q {
        let s: i64 = self.num.iter().zip(c).map(|(&x, &y)| x as i64 * y).sum();
        Q::new(s.rem_euclid(self.den as i64), self.den as i64)
    }

    /// Σ_i g_i v_i mod 1 for rational coefficients.
    pub fn pair_rational(&self, v: &[Q]) -> Q {
        let s: Q = self.num.iter().zip(v).map(|(&x, y)| Q::new(x as i64, self.den as i64) * y).sum();
        s - s.floor()
    }
}

impl Ord for GroupElement {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.num.iter().zip(&other.num) {
            let l = (*a as u128) * other.den as u128;
            let r = (*b as u128) * self.den as u128;
            match l.cmp(&r) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.num.len().cmp(&other.num.len())
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = (0..self.n())
            .map(|i| {
                let q = self.component(i);
                if q.is_zero() {
                    "0".to_string()
                } else {
                    format!("{}/{}", q.numer(), q.denom())
                }
            })
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse { pos: 0, msg: format!("bad rational '{s}'") };
    match s.split_once('/') {
        Some((a, b)) => {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            if b == 0 {
                return Err(bad());
            }
            Ok(Q::new(a, b))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn parse_group_element(text: &str) -> Result<GroupElement> {
    let q: Vec<Q> = text.split(',').map(parse_rational).collect::<Result<_>>()?;
    Ok(GroupElement::from_rationals(&q))
}

/// Semicolon-separated generators, each a comma-separated list of rationals.
pub fn parse_generators(text: &str) -> Result<Vec<GroupElement>> {
    text.split(';').filter(|s| !s.trim().is_empty()).map(parse_group_element).collect()
}

pub fn format_generators(gens: &[GroupElement]) -> String {
    gens.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(";")
}

/// Finite subgroup of (ℚ/ℤ)ⁿ with its full element list (sorted).
#[derive(Clone, Debug)]
pub struct SymmetryGroup {
    n: usize,
    generators: Vec<GroupElement>,
    elements: Vec<GroupElement>,
    set: HashSet<GroupElement>,
}

impl PartialEq for SymmetryGroup {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.elements == other.elements
    }
}

impl Eq for SymmetryGroup {}

impl SymmetryGroup {
    /// Smallest subgroup containing `gens`.
    pub fn span(n: usize, gens: &[GroupElement]) -> Result<Self> {
        for g in gens {
            if g.n() != n {
                return Err(Error::Invalid(format!("generator {g} has {} components, expected {n}", g.n())));
            }
        }
        let cap = max_group_order();
        let mut set: HashSet<GroupElement> = HashSet::new();
        let id = GroupElement::identity(n);
        set.insert(id.clone());
        let mut queue = VecDeque::from([id]);
        let gens: Vec<GroupElement> = gens.iter().filter(|g| !g.is_identity()).cloned().collect();
        while let Some(x) = queue.pop_front() {
            for g in &gens {
                let y = x.add(g);
                if set.insert(y.clone()) {
                    if set.len() > cap {
                        return Err(Error::GroupTooLarge { order: set.len() as u128, cap });
                    }
                    queue.push_back(y);
                }
            }
        }
        let mut elements: Vec<GroupElement> = set.iter().cloned().collect();
        elements.sort();
        Ok(SymmetryGroup { n, generators: gens, elements, set })
    }

    /// Group given by an explicit element list, checked for closure.
    pub fn from_elements(n: usize, elements: Vec<GroupElement>) -> Result<Self> {
        let set: HashSet<GroupElement> = elements.iter().cloned().collect();
        if !set.contains(&GroupElement::identity(n)) {
            return Err(Error::NotSubgroup("identity missing".into()));
        }
        let generators = minimal_generators(n, &elements)?;
        for g in &generators {
            for x in &elements {
                if !set.contains(&x.add(g)) {
                    return Err(Error::NotSubgroup(format!("{x} + {g} not in set")));
                }
            }
        }
        let mut elements: Vec<GroupElement> = set.iter().cloned().collect();
        elements.sort();
        Ok(SymmetryGroup { n, generators, elements, set })
    }

    /// Subgroup of `self` cut out by a predicate; the predicate must define a subgroup.
    pub fn filter<F: Fn(&GroupElement) -> bool + Sync>(&self, f: F) -> Result<Self> {
        let elements: Vec<GroupElement> = self.elements.iter().filter(|g| f(g)).cloned().collect();
        SymmetryGroup::from_elements(self.n, elements)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.set.contains(g)
    }

    pub fn is_subgroup_of(&self, other: &SymmetryGroup) -> bool {
        self.generators.iter().all(|g| other.contains(g))
    }

    /// Same generators, re-chosen as a small generating set.
    pub fn with_minimal_generators(mut self) -> Result<Self> {
        self.generators = minimal_generators(self.n, &self.elements)?;
        Ok(self)
    }
}

/// Greedy generating set: repeatedly add an element of largest order not yet spanned.
fn minimal_generators(n: usize, elements: &[GroupElement]) -> Result<Vec<GroupElement>> {
    let mut by_order: Vec<&GroupElement> = elements.iter().collect();
    by_order.sort_by(|a, b| b.order().cmp(&a.order()).then_with(|| a.cmp(b)));
    let mut gens = Vec::new();
    let mut current: HashSet<GroupElement> = [GroupElement::identity(n)].into_iter().collect();
    for g in by_order {
        if current.len() == elements.len() {
            break;
        }
        if !current.contains(g) {
            gens.push(g.clone());
            current = SymmetryGroup::span(n, &gens)?.set;
        }
    }
    Ok(gens)
}

/// `{g : A·g ∈ ℤᵐ}` for the exponent matrix of `p`, via Smith normal form.
pub fn gmax(p: &Polynomial) -> Result<SymmetryGroup> {
    let n = p.nvars();
    let rows: Vec<Vec<i64>> = p.exponent_rows().iter().map(|r| r.iter().map(|&a| a as i64).collect()).collect();
    if linalg::rank_i64(&rows, n) < n {
        return Err(Error::RankDeficient);
    }
    let (d, v) = linalg::smith_normal_form(&rows, n);
    let order: u128 = d.iter().map(|&x| x as u128).product();
    let cap = max_group_order();
    if order > cap as u128 {
        return Err(Error::GroupTooLarge { order, cap });
    }
    let gens: Vec<(GroupElement, u64)> = (0..n)
        .filter(|&k| d[k] > 1)
        .map(|k| {
            let col: Vec<i64> = (0..n).map(|i| v[i][k] as i64).collect();
            (GroupElement::from_fractions(&col, d[k] as u64), d[k] as u64)
        })
        .collect();
    // Mixed-radix enumeration of Π ℤ/d_k.
    let mut elements = vec![GroupElement::identity(n)];
    for (g, dk) in &gens {
        let mut next = Vec::with_capacity(elements.len() * *dk as usize);
        for x in &elements {
            let mut y = x.clone();
            for _ in 0..*dk {
                next.push(y.clone());
                y = y.add(g);
            }
        }
        elements = next;
    }
    let set: HashSet<GroupElement> = elements.iter().cloned().collect();
    debug_assert_eq!(set.len(), elements.len());
    elements.sort();
    Ok(SymmetryGroup { n, generators: gens.into_iter().map(|(g, _)| g).collect(), elements, set })
}

/// `j_W = (q_1, …, q_n)`.
pub fn j_element(ws: &WeightSystem) -> GroupElement {
    let nums: Vec<i64> = ws.weights.iter().map(|&w| w as i64).collect();
    GroupElement::from_fractions(&nums, ws.degree)
}

pub fn age(g: &GroupElement) -> Q {
    g.age()
}

pub fn fixed_indices(g: &GroupElement) -> Vec<usize> {
    g.fixed_indices()
}

pub fn sl_subgroup(g: &SymmetryGroup) -> Result<SymmetryGroup> {
    g.filter(|x| x.age().is_integer())
}

pub fn is_a_admissible(g: &SymmetryGroup, ws: &WeightSystem) -> bool {
    g.contains(&j_element(ws))
}

pub fn is_b_admissible(g: &SymmetryGroup) -> bool {
    g.generators().iter().all(|x| x.age().is_integer())
}

/// Dual group `{g ∈ G^max(Wᵀ) : g·A_W·hᵀ ∈ ℤ for all h ∈ G}`.
pub fn transpose_group(g: &SymmetryGroup, w: &Polynomial) -> Result<SymmetryGroup> {
    let wt = transpose(w)?;
    let a = exponent_matrix(w).map_err(|e| Error::NotInvertible(e.to_string()))?;
    let big = gmax(&wt)?;
    // v_h = A·hᵀ for each generator h.
    let vs: Vec<Vec<Q>> = g
        .generators()
        .iter()
        .map(|h| {
            (0..a.len())
                .map(|i| a[i].iter().enumerate().map(|(k, &x)| h.component(k) * x).sum::<Q>())
                .collect()
        })
        .collect();
    big.filter(|x| vs.iter().all(|v| x.pair_rational(v).is_zero()))
}

#[derive(Clone, Debug)]
pub struct CosetDecomposition {
    pub subgroup_order: usize,
    pub representatives: Vec<GroupElement>,
}

/// Coset representatives of `h` in `g`, each the least element of its coset.
pub fn cosets(g: &SymmetryGroup, h: &SymmetryGroup) -> Result<CosetDecomposition> {
    if g.n() != h.n() || !h.elements().iter().all(|x| g.contains(x)) {
        return Err(Error::NotSubgroup("subgroup not contained in group".into()));
    }
    let mut seen: HashSet<GroupElement> = HashSet::new();
    let mut reps = Vec::new();
    for x in g.elements() {
        if seen.contains(x) {
            continue;
        }
        reps.push(x.clone());
        for y in h.elements() {
            seen.insert(x.add(y));
        }
    }
    Ok(CosetDecomposition { subgroup_order: h.order(), representatives: reps })
}

/// Exact value of a rational as f64, for diagnostics only.
pub fn to_f64(q: &Q) -> f64 {
    q.numer().to_f64().unwrap() / q.denom().to_f64().unwrap()
}
