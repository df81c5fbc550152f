//! A- and B-model state spaces, built sector by sector, and their bigraded tables.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;
use serde_json::json;

use crate::error::{Error, Result};
use crate::milnor::MilnorRing;
use crate::poly::{weight_system, Monomial, Polynomial, WeightSystem};
use crate::symmetry::{is_a_admissible, is_b_admissible, j_element, GroupElement, SymmetryGroup, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flavor {
    A,
    B,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", match self {
            Flavor::A => "A",
            Flavor::B => "B",
        })
    }
}

/// `⌈m; g⌉`: a monomial on `Fix(g)` times the implicit volume form of `Fix(g)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SectorElement {
    pub sector: GroupElement,
    pub monomial: Monomial,
    pub flavor: Flavor,
}

impl fmt::Display for SectorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}; {}]", self.monomial.0, self.sector)
    }
}

/// Milnor rings of `W|_I` keyed by the fixed set `I`, graded by the weights of `W`.
pub struct RingCache {
    poly: Polynomial,
    weights: Vec<u64>,
    map: RwLock<HashMap<Vec<usize>, Arc<MilnorRing>>>,
}

impl RingCache {
    pub fn new(poly: &Polynomial, ws: &WeightSystem) -> Self {
        RingCache { poly: poly.clone(), weights: ws.weights.clone(), map: RwLock::new(HashMap::new()) }
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn get(&self, fixed: &[usize]) -> Result<Arc<MilnorRing>> {
        if let Some(r) = self.map.read().unwrap().get(fixed) {
            return Ok(r.clone());
        }
        let r = Arc::new(MilnorRing::with_weights(&self.poly, fixed, &self.weights)?);
        self.map.write().unwrap().insert(fixed.to_vec(), r.clone());
        Ok(r)
    }

    /// Build all rings for the given fixed sets in parallel.
    pub fn warm(&self, sets: &[Vec<usize>]) -> Result<()> {
        let missing: Vec<&Vec<usize>> = {
            let m = self.map.read().unwrap();
            sets.iter().filter(|s| !m.contains_key(*s)).collect()
        };
        let built: Vec<(Vec<usize>, Arc<MilnorRing>)> = missing
            .par_iter()
            .map(|s| Ok(((*s).clone(), Arc::new(MilnorRing::with_weights(&self.poly, s, &self.weights)?))))
            .collect::<Result<_>>()?;
        self.map.write().unwrap().extend(built);
        Ok(())
    }
}

/// `Σ_{j∈I_g} (a_j + 1)·h_j mod 1`; zero iff `e` is `h`-invariant.
pub fn action_weight(h: &GroupElement, e: &SectorElement) -> Q {
    action_weight_raw(h, &e.sector.fixed_indices(), &e.monomial)
}

pub fn action_weight_raw(h: &GroupElement, fixed: &[usize], m: &Monomial) -> Q {
    let mut c = vec![0i64; h.n()];
    for &j in fixed {
        c[j] = m.0[j] as i64 + 1;
    }
    h.pair_integer(&c)
}

/// `deg m = Σ_{j∈I_g} (a_j + 1) q_j`, counting the volume form.
pub fn degree_with_form(m: &Monomial, fixed: &[usize], ws: &WeightSystem) -> Q {
    fixed.iter().map(|&j| ws.q(j) * (m.0[j] as i64 + 1)).sum()
}

pub fn a_bidegree(e: &SectorElement, ws: &WeightSystem) -> (Q, Q) {
    let fixed = e.sector.fixed_indices();
    let deg = degree_with_form(&e.monomial, &fixed, ws);
    let shift = e.sector.age() - j_element(ws).age();
    (deg + shift, Q::from_integer(fixed.len() as i64) - deg + shift)
}

pub fn b_bidegree(e: &SectorElement, ws: &WeightSystem) -> (Q, Q) {
    let fixed = e.sector.fixed_indices();
    let deg = degree_with_form(&e.monomial, &fixed, ws);
    let aj = j_element(ws).age();
    (deg + e.sector.age() - aj, deg + e.sector.neg().age() - aj)
}

pub fn bidegree(e: &SectorElement, ws: &WeightSystem) -> (Q, Q) {
    match e.flavor {
        Flavor::A => a_bidegree(e, ws),
        Flavor::B => b_bidegree(e, ws),
    }
}

fn sector_from_ring(ring: &MilnorRing, group: &SymmetryGroup, g: &GroupElement, flavor: Flavor) -> Vec<SectorElement> {
    let fixed = g.fixed_indices();
    ring.standard_monomials()
        .iter()
        .filter(|m| group.generators().iter().all(|h| action_weight_raw(h, &fixed, m) == Q::from_integer(0)))
        .map(|m| SectorElement { sector: g.clone(), monomial: m.clone(), flavor })
        .collect()
}

/// Invariant standard monomials of the Milnor ring of `W_g`.
pub fn build_sector(w: &Polynomial, group: &SymmetryGroup, g: &GroupElement, flavor: Flavor) -> Result<Vec<SectorElement>> {
    let ws = weight_system(w)?;
    let ring = MilnorRing::with_weights(w, &g.fixed_indices(), &ws.weights)?;
    Ok(sector_from_ring(&ring, group, g, flavor))
}

pub struct StateSpace {
    pub poly: Polynomial,
    pub weights: WeightSystem,
    pub group: SymmetryGroup,
    pub flavor: Flavor,
    pub basis: Vec<SectorElement>,
    /// Dimension of every sector, including empty ones.
    pub sector_dims: Vec<(GroupElement, usize)>,
    index: HashMap<SectorElement, usize>,
    rings: Arc<RingCache>,
}

impl StateSpace {
    pub fn build(w: &Polynomial, group: &SymmetryGroup, flavor: Flavor) -> Result<Self> {
        let ws = weight_system(w)?;
        let rings = Arc::new(RingCache::new(w, &ws));
        Self::build_with_cache(w, group, flavor, rings)
    }

    pub fn build_with_cache(w: &Polynomial, group: &SymmetryGroup, flavor: Flavor, rings: Arc<RingCache>) -> Result<Self> {
        let ws = weight_system(w)?;
        if group.n() != w.nvars() {
            return Err(Error::Invalid("group and polynomial have different numbers of variables".into()));
        }
        match flavor {
            Flavor::A if !is_a_admissible(group, &ws) => {
                return Err(Error::NotAdmissible("A-model group must contain j_W".into()))
            }
            Flavor::B if !is_b_admissible(group) => {
                return Err(Error::NotAdmissible("B-model group must lie in SL_W".into()))
            }
            _ => {}
        }
        let sets: Vec<Vec<usize>> = {
            let s: HashSet<Vec<usize>> = group.elements().iter().map(|g| g.fixed_indices()).collect();
            let mut v: Vec<Vec<usize>> = s.into_iter().collect();
            v.sort();
            v
        };
        rings.warm(&sets)?;
        let sectors: Vec<Vec<SectorElement>> = group
            .elements()
            .par_iter()
            .map(|g| -> Result<Vec<SectorElement>> { Ok(sector_from_ring(rings.get(&g.fixed_indices())?.as_ref(), group, g, flavor)) })
            .collect::<Result<_>>()?;
        let sector_dims = group.elements().iter().zip(&sectors).map(|(g, s)| (g.clone(), s.len())).collect();
        let basis: Vec<SectorElement> = sectors.into_iter().flatten().collect();
        let index = basis.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        Ok(StateSpace { poly: w.clone(), weights: ws, group: group.clone(), flavor, basis, sector_dims, index, rings })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, e: &SectorElement) -> Option<usize> {
        self.index.get(e).copied()
    }

    pub fn contains(&self, e: &SectorElement) -> bool {
        self.index.contains_key(e)
    }

    pub fn rings(&self) -> &Arc<RingCache> {
        &self.rings
    }

    pub fn bidegree(&self, e: &SectorElement) -> (Q, Q) {
        bidegree(e, &self.weights)
    }

    pub fn table(&self) -> BigradedTable {
        poincare_table(self)
    }
}

pub fn build_state_space(w: &Polynomial, group: &SymmetryGroup, flavor: Flavor) -> Result<StateSpace> {
    StateSpace::build(w, group, flavor)
}

/// Dimensions by bidegree.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BigradedTable {
    pub entries: BTreeMap<(Q, Q), usize>,
}

impl BigradedTable {
    pub fn add(&mut self, pq: (Q, Q), k: usize) {
        if k > 0 {
            *self.entries.entry(pq).or_insert(0) += k;
        }
    }

    pub fn get(&self, p: Q, q: Q) -> usize {
        self.entries.get(&(p, q)).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.entries.values().sum()
    }

    /// Entries where the two tables disagree, as `(p, q, left, right)`.
    pub fn diff(&self, other: &BigradedTable) -> Vec<(Q, Q, usize, usize)> {
        let keys: std::collections::BTreeSet<&(Q, Q)> = self.entries.keys().chain(other.entries.keys()).collect();
        keys.into_iter()
            .filter_map(|&(p, q)| {
                let (a, b) = (self.get(p, q), other.get(p, q));
                (a != b).then_some((p, q, a, b))
            })
            .collect()
    }

    /// `(p, q) ↦ (f(p), g(q))` applied to every key.
    pub fn map_keys<F: Fn(Q, Q) -> (Q, Q)>(&self, f: F) -> BigradedTable {
        let mut t = BigradedTable::default();
        for (&(p, q), &k) in &self.entries {
            t.add(f(p, q), k);
        }
        t
    }

    pub fn to_json(&self, flavor: &str) -> serde_json::Value {
        json!({
            "flavor": flavor,
            "total": self.total(),
            "entries": self.entries.iter().map(|((p, q), k)| json!({
                "p": rational_string(p),
                "q": rational_string(q),
                "dim": k,
            })).collect::<Vec<_>>(),
        })
    }
}

pub fn rational_string(q: &Q) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

fn short(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for BigradedTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>8} {:>8} {:>6}", "p", "q", "dim")?;
        for ((p, q), k) in &self.entries {
            writeln!(f, "{:>8} {:>8} {:>6}", short(p), short(q), k)?;
        }
        write!(f, "total {}", self.total())
    }
}

pub fn poincare_table(s: &StateSpace) -> BigradedTable {
    let mut t = BigradedTable::default();
    for e in &s.basis {
        t.add(s.bidegree(e), 1);
    }
    t
}
