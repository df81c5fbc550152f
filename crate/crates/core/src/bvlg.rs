//! Borcea-Voisin Landau-Ginzburg models `(W₁ + W₂, σG)`, their mirrors and twists.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use num::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{check_cy, is_bv_form, transpose, weight_system, Coeff, Monomial, Polynomial, WeightSystem};
use crate::statespace::{BigradedTable, Flavor, SectorElement, StateSpace};
use crate::symmetry::{cosets, j_element, transpose_group, GroupElement, SymmetryGroup, Q};

#[derive(Clone, Debug)]
pub struct BVModel {
    pub w1: Polynomial,
    pub w2: Polynomial,
    /// `W₁ + W₂` on the concatenated variables.
    pub w: Polynomial,
    pub ws1: WeightSystem,
    pub ws2: WeightSystem,
    pub ws: WeightSystem,
    pub n1: usize,
    pub x0: usize,
    pub y0: usize,
    pub group: SymmetryGroup,
    pub sigma: GroupElement,
    pub sigma_group: SymmetryGroup,
}

/// `j₁ ⊕ 0` and `0 ⊕ j₂` in the coordinates of `W₁ + W₂`.
pub fn block_j(ws1: &WeightSystem, ws2: &WeightSystem) -> (GroupElement, GroupElement) {
    let j1 = j_element(ws1);
    let j2 = j_element(ws2);
    (j1.concat(&GroupElement::identity(ws2.n())), GroupElement::identity(ws1.n()).concat(&j2))
}

fn in_gmax(w: &Polynomial, g: &GroupElement) -> bool {
    w.terms().keys().all(|m| {
        let c: Vec<i64> = m.0.iter().map(|&a| a as i64).collect();
        g.pair_integer(&c) == Q::from_integer(0)
    })
}

impl BVModel {
    /// Validate `(W₁, W₂, G)` and form `σG`. `gens` are in the coordinates of `W₁ + W₂`.
    pub fn new(w1: &Polynomial, w2: &Polynomial, gens: &[GroupElement]) -> Result<Self> {
        let x0 = is_bv_form(w1).ok_or_else(|| Error::BadForm(format!("{w1}")))?;
        let y0l = is_bv_form(w2).ok_or_else(|| Error::BadForm(format!("{w2}")))?;
        let ws1 = weight_system(w1)?;
        let ws2 = weight_system(w2)?;
        if !check_cy(&ws1) {
            return Err(Error::NotCy(format!("{ws1}")));
        }
        if !check_cy(&ws2) {
            return Err(Error::NotCy(format!("{ws2}")));
        }
        let w = w1.direct_sum(w2);
        let ws = weight_system(&w)?;
        let n1 = w1.nvars();
        let n = w.nvars();
        let y0 = n1 + y0l;
        let group = SymmetryGroup::span(n, gens)?;
        let (j1, j2) = block_j(&ws1, &ws2);
        if !group.contains(&j1) || !group.contains(&j2) {
            return Err(Error::GroupOutOfRange("G does not contain J₁×J₂".into()));
        }
        for g in group.generators() {
            let a1 = g.select(&(0..n1).collect::<Vec<_>>()).age();
            let a2 = g.select(&(n1..n).collect::<Vec<_>>()).age();
            if !a1.is_integer() || !a2.is_integer() || !in_gmax(&w, g) {
                return Err(Error::GroupOutOfRange(format!("{g} is not in SL(W₁)×SL(W₂)")));
            }
        }
        let mut s = vec![0i64; n];
        s[x0] = 1;
        s[y0] = 1;
        let sigma = GroupElement::from_fractions(&s, 2);
        let mut sg = group.generators().to_vec();
        sg.push(sigma.clone());
        let sigma_group = SymmetryGroup::span(n, &sg)?;
        Ok(BVModel { w1: w1.clone(), w2: w2.clone(), w, ws1, ws2, ws, n1, x0, y0, group, sigma, sigma_group })
    }

    /// The model with `G = J₁ × J₂`.
    pub fn with_j(w1: &Polynomial, w2: &Polynomial) -> Result<Self> {
        let ws1 = weight_system(w1)?;
        let ws2 = weight_system(w2)?;
        let (j1, j2) = block_j(&ws1, &ws2);
        BVModel::new(w1, w2, &[j1, j2])
    }

    pub fn n(&self) -> usize {
        self.w.nvars()
    }

    pub fn j_group(&self) -> Result<SymmetryGroup> {
        let (j1, j2) = block_j(&self.ws1, &self.ws2);
        SymmetryGroup::span(self.n(), &[j1, j2])
    }

    /// Dimension of `X_{W₁} × X_{W₂}`: two less per hypersurface.
    pub fn cy_dimension(&self) -> i64 {
        self.n() as i64 - 4
    }

    /// `|G| = |π₁(G)|·|π₂(G)|`.
    pub fn is_product(&self) -> Result<bool> {
        let b1: Vec<usize> = (0..self.n1).collect();
        let b2: Vec<usize> = (self.n1..self.n()).collect();
        let p1 = SymmetryGroup::span(self.n1, &self.group.generators().iter().map(|g| g.select(&b1)).collect::<Vec<_>>())?;
        let p2 = SymmetryGroup::span(b2.len(), &self.group.generators().iter().map(|g| g.select(&b2)).collect::<Vec<_>>())?;
        Ok(p1.order() * p2.order() == self.group.order())
    }

    /// Coset representatives of `J₁×J₂` in `σG`: first those of `G` with trivial
    /// `x₀`, `y₀` components, then `σ` times each of them.
    pub fn coset_representatives(&self) -> Result<Vec<GroupElement>> {
        let j = self.j_group()?;
        let plain = cosets(&self.group, &j)?;
        let mut reps = Vec::new();
        for r in &plain.representatives {
            let best = j
                .elements()
                .iter()
                .map(|h| r.add(h))
                .filter(|g| g.numerators()[self.x0] == 0 && g.numerators()[self.y0] == 0)
                .min()
                .ok_or_else(|| Error::Invalid("coset without a representative fixing x0 and y0".into()))?;
            reps.push(best);
        }
        let twisted: Vec<GroupElement> = reps.iter().map(|g| g.add(&self.sigma)).collect();
        reps.extend(twisted);
        Ok(reps)
    }
}

/// `(W^T, σ(G^T))` with `G^T` the Berglund-Hübsch-Krawitz dual of `G` for `W₁ + W₂`.
pub fn mirror_pair(m: &BVModel) -> Result<BVModel> {
    let w1t = transpose(&m.w1)?;
    let w2t = transpose(&m.w2)?;
    let gt = transpose_group(&m.group, &m.w)?;
    BVModel::new(&w1t, &w2t, gt.generators())
}

/// Dual of `σG` itself; it lacks `J₁^T × J₂^T` in general.
pub fn bhk_dual_group(m: &BVModel) -> Result<SymmetryGroup> {
    transpose_group(&m.sigma_group, &m.w)
}

#[derive(Clone, Debug)]
pub struct TwistModel {
    /// `f₁ − f₂` on the variables of `W` other than `x₀`, `y₀`.
    pub poly: Polynomial,
    pub delta: u64,
    pub weights: WeightSystem,
    /// Index in `W₁ + W₂` of each variable of the twist.
    pub keep: Vec<usize>,
    pub group: SymmetryGroup,
}

fn gcd(a: u64, b: u64) -> u64 {
    num::integer::gcd(a, b)
}

/// Polynomial and weights of the twist, without the group.
pub fn twist_polynomial(w1: &Polynomial, w2: &Polynomial) -> Result<(Polynomial, u64, WeightSystem, Vec<usize>)> {
    let x0 = is_bv_form(w1).ok_or_else(|| Error::BadForm(format!("{w1}")))?;
    let y0 = is_bv_form(w2).ok_or_else(|| Error::BadForm(format!("{w2}")))?;
    let ws1 = weight_system(w1)?;
    let ws2 = weight_system(w2)?;
    let w = w1.direct_sum(&w2.scale(&-Coeff::one()));
    let n1 = w1.nvars();
    let keep: Vec<usize> = (0..w.nvars()).filter(|&i| i != x0 && i != n1 + y0).collect();
    let f = w.restrict(&keep).project(&keep);
    let (u0, v0) = (ws1.weights[x0], ws2.weights[y0]);
    let delta = gcd(u0, v0);
    let mut weights = Vec::new();
    for (i, &u) in ws1.weights.iter().enumerate() {
        if i != x0 {
            weights.push(v0 * u / delta);
        }
    }
    for (j, &v) in ws2.weights.iter().enumerate() {
        if j != y0 {
            weights.push(u0 * v / delta);
        }
    }
    let degree = num::integer::lcm(ws1.degree, ws2.degree);
    let formula = WeightSystem::new(weights, degree);
    let solved = weight_system(&f)?;
    if solved != formula {
        return Err(Error::Invalid(format!("twist weights {solved} differ from {formula}")));
    }
    Ok((f, delta, formula, keep))
}

/// Twist model `(f₁ − f₂, {(α, β) : (0, α, 0, β) ∈ σG})`.
pub fn twist(m: &BVModel) -> Result<TwistModel> {
    let (poly, delta, weights, keep) = twist_polynomial(&m.w1, &m.w2)?;
    let elements: Vec<GroupElement> = m
        .sigma_group
        .elements()
        .iter()
        .filter(|g| g.numerators()[m.x0] == 0 && g.numerators()[m.y0] == 0)
        .map(|g| g.select(&keep))
        .collect();
    let group = SymmetryGroup::from_elements(keep.len(), elements)?;
    if let Some(g) = group.generators().iter().find(|g| !in_gmax(&poly, g)) {
        return Err(Error::GroupOutOfRange(format!("{g} is not a symmetry of the twist")));
    }
    Ok(TwistModel { poly, delta, weights, keep, group })
}

/// Image of a basis element of `A(W, σG)` (or `B`) under the twist map, with its coefficient `2^{1−ε}`.
pub fn tw_map(m: &BVModel, keep: &[usize], e: &SectorElement) -> Result<(Coeff, SectorElement)> {
    let gx = e.sector.component(m.x0);
    let gy = e.sector.component(m.y0);
    let half = Q::new(1, 2);
    let zero = Q::from_integer(0);
    let coeff = if gx == zero && gy == zero {
        Coeff::from_integer(2.into())
    } else if gx == half && gy == half {
        Coeff::one()
    } else {
        return Err(Error::MalformedSector(format!("{} fixes exactly one of x0, y0", e.sector)));
    };
    if e.monomial.0[m.x0] != 0 || e.monomial.0[m.y0] != 0 {
        return Err(Error::MalformedSector(format!("{e} involves x0 or y0")));
    }
    let monomial = Monomial(keep.iter().map(|&i| e.monomial.0[i]).collect());
    Ok((coeff, SectorElement { sector: e.sector.select(keep), monomial, flavor: e.flavor }))
}

pub fn tw_a_map(m: &BVModel, keep: &[usize], e: &SectorElement) -> Result<(Coeff, SectorElement)> {
    debug_assert_eq!(e.flavor, Flavor::A);
    tw_map(m, keep, e)
}

pub fn tw_b_map(m: &BVModel, keep: &[usize], e: &SectorElement) -> Result<(Coeff, SectorElement)> {
    debug_assert_eq!(e.flavor, Flavor::B);
    tw_map(m, keep, e)
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Report {
    pub check: String,
    pub pass: bool,
    pub lhs_total: usize,
    pub rhs_total: usize,
    pub mismatches: Vec<String>,
}

impl Report {
    pub fn new(check: &str, lhs_total: usize, rhs_total: usize, mismatches: Vec<String>) -> Self {
        Report { check: check.to_string(), pass: mismatches.is_empty(), lhs_total, rhs_total, mismatches }
    }

    pub fn from_tables(check: &str, lhs: &BigradedTable, rhs: &BigradedTable) -> Self {
        let mism = lhs
            .diff(rhs)
            .into_iter()
            .map(|(p, q, a, b)| format!("({p},{q}): {a} vs {b}"))
            .collect();
        Report::new(check, lhs.total(), rhs.total(), mism)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// The state space of `(W, σG)` for the given flavor; B requires `σG ⊆ SL`.
pub fn bv_state_space(m: &BVModel, flavor: Flavor) -> Result<StateSpace> {
    StateSpace::build(&m.w, &m.sigma_group, flavor)
}

/// Every nonempty sector of `A(W, σG)` fixes both of `x₀`, `y₀` or neither.
pub fn check_all_or_nothing(m: &BVModel, space: &StateSpace) -> Vec<String> {
    let mut bad = Vec::new();
    for (g, d) in &space.sector_dims {
        if *d == 0 {
            continue;
        }
        let fx = g.numerators()[m.x0] == 0;
        let fy = g.numerators()[m.y0] == 0;
        if fx != fy {
            bad.push(format!("sector {g} fixes exactly one of x0, y0"));
        }
    }
    bad
}

pub fn verify_twist_iso(m: &BVModel, flavor: Flavor) -> Result<Report> {
    let t = twist(m)?;
    verify_twist_iso_with_group(m, flavor, &t.poly, &t.keep, &t.group)
}

/// Twist isomorphism check against an explicit twisted group (used for negative controls).
pub fn verify_twist_iso_with_group(
    m: &BVModel,
    flavor: Flavor,
    tw_poly: &Polynomial,
    keep: &[usize],
    tw_group: &SymmetryGroup,
) -> Result<Report> {
    let (src, dst) = rayon::join(|| bv_state_space(m, flavor), || StateSpace::build(tw_poly, tw_group, flavor));
    let (src, dst) = (src?, dst?);
    let mut mism = check_all_or_nothing(m, &src);
    let mut hit: HashSet<SectorElement> = HashSet::new();
    for e in &src.basis {
        match tw_map(m, keep, e) {
            Err(err) => mism.push(err.to_string()),
            Ok((_, img)) => {
                if !dst.contains(&img) {
                    mism.push(format!("image of {e} is not a basis element of the twist"));
                    continue;
                }
                if src.bidegree(e) != dst.bidegree(&img) {
                    let (a, b) = (src.bidegree(e), dst.bidegree(&img));
                    mism.push(format!("{e}: bidegree ({},{}) maps to ({},{})", a.0, a.1, b.0, b.1));
                }
                if !hit.insert(img.clone()) {
                    mism.push(format!("{img} hit twice"));
                }
            }
        }
    }
    for e in &dst.basis {
        if !hit.contains(e) {
            mism.push(format!("{e} not in the image"));
        }
    }
    let name = match flavor {
        Flavor::A => "twist_a",
        Flavor::B => "twist_b",
    };
    Ok(Report::new(name, src.dim(), dst.dim(), mism))
}

/// `tw(G^T) = (tw G)^T`.
pub fn verify_group_lemma(m: &BVModel) -> Result<Report> {
    let mirror = mirror_pair(m)?;
    let lhs = twist(&mirror)?.group;
    let t = twist(m)?;
    let rhs = transpose_group(&t.group, &t.poly)?;
    let l: HashSet<&GroupElement> = lhs.elements().iter().collect();
    let r: HashSet<&GroupElement> = rhs.elements().iter().collect();
    let mut mism: Vec<String> = l.difference(&r).map(|g| format!("{g} only in tw(G^T)")).collect();
    mism.extend(r.difference(&l).map(|g| format!("{g} only in (tw G)^T")));
    mism.sort();
    Ok(Report::new("group_lemma", lhs.order(), rhs.order(), mism))
}

/// `A(W, σG)` and `B(W^T, σ(G^T))` have equal bigraded tables.
pub fn verify_theorem1(m: &BVModel) -> Result<Report> {
    let mirror = mirror_pair(m)?;
    let (a, b) = rayon::join(|| bv_state_space(m, Flavor::A), || bv_state_space(&mirror, Flavor::B));
    Ok(Report::from_tables("theorem1", &a?.table(), &b?.table()))
}

/// Same comparison against `B(W^T, (σG)^T)`, which is the plain BHK mirror.
pub fn theorem1_against_bhk(m: &BVModel) -> Result<Report> {
    let wt = transpose(&m.w)?;
    let dual = bhk_dual_group(m)?;
    let (a, b) = rayon::join(|| bv_state_space(m, Flavor::A), || StateSpace::build(&wt, &dual, Flavor::B));
    Ok(Report::from_tables("theorem1_bhk", &a?.table(), &b?.table()))
}

/// Table comparison against `B(W^T, G^T)`, i.e. the mirror group without `σ`.
pub fn theorem1_without_sigma(m: &BVModel) -> Result<Report> {
    let mirror = mirror_pair(m)?;
    let (a, b) = rayon::join(|| bv_state_space(m, Flavor::A), || StateSpace::build(&mirror.w, &mirror.group, Flavor::B));
    Ok(Report::from_tables("theorem1_without_sigma", &a?.table(), &b?.table()))
}

/// `(σG)^T` differs from `σ(G^T)` and misses `J₁^T × J₂^T`, so the plain BHK mirror is not a BV model.
pub fn bhk_is_not_bv(m: &BVModel) -> Result<Report> {
    let mirror = mirror_pair(m)?;
    let dual = bhk_dual_group(m)?;
    let (j1, j2) = block_j(&mirror.ws1, &mirror.ws2);
    let mut mism = Vec::new();
    if dual == mirror.sigma_group {
        mism.push("(σG)^T equals σ(G^T)".to_string());
    }
    if dual.contains(&j1) && dual.contains(&j2) {
        mism.push("(σG)^T contains J₁^T×J₂^T".to_string());
    }
    if !dual.elements().iter().all(|g| mirror.sigma_group.contains(g)) {
        mism.push("(σG)^T is not contained in σ(G^T)".to_string());
    }
    Ok(Report::new("bhk_is_not_bv", dual.order(), mirror.sigma_group.order(), mism))
}

/// Count of elements of `σG` by their `(x₀, y₀)` components, for diagnostics.
pub fn slot_profile(m: &BVModel) -> BTreeMap<(u64, u64), usize> {
    let mut out = BTreeMap::new();
    for g in m.sigma_group.elements() {
        let k = (g.numerators()[m.x0] * 2 / g.den(), g.numerators()[m.y0] * 2 / g.den());
        *out.entry(k).or_insert(0) += 1;
    }
    out
}

pub fn shared_vars(m: &BVModel) -> Arc<Vec<String>> {
    m.w.vars().clone()
}
