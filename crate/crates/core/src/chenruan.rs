//! Chen-Ruan orbifold Hodge numbers of `[X_{W₁} × X_{W₂} / σG̃]` and of single
//! hypersurface quotients, computed from inertia components and Griffiths-Steenbrink.

use std::collections::{BTreeMap, BTreeSet};

use num::Zero;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::bvlg::{mirror_pair, twist, BVModel, Report};
use crate::error::{Error, Result};
use crate::poly::{weight_system, Monomial, Polynomial};
use crate::statespace::{action_weight_raw, rational_string, BigradedTable, Flavor, RingCache, StateSpace};
use crate::symmetry::{cosets, j_element, GroupElement, SymmetryGroup, Q};

fn frac(q: Q) -> Q {
    q - q.floor()
}

/// How the age of `gλ` is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AgeConvention {
    /// On the tangent space of `V_W`: ambient age minus the age of the character on `W`.
    Tangent,
    /// On the ambient `ℂ^{n+1}`, ignoring the normal direction. Wrong; kept as a control.
    Ambient,
    /// No shift at all. Wrong; kept as a control.
    Unshifted,
}

/// One factor of the product: variables, integer weights and degree.
#[derive(Clone, Debug)]
pub struct CrBlock {
    pub vars: Vec<usize>,
    pub weights: Vec<u64>,
    pub degree: u64,
}

/// Angles `θ ∈ [0,1)` for which `g·e^{2πiθ}` fixes some coordinate: `g_k + w_k θ ∈ ℤ`.
pub fn lambda_set(g: &GroupElement, weights: &[u64]) -> Vec<Q> {
    let mut out = BTreeSet::new();
    for (k, &w) in weights.iter().enumerate() {
        let gk = g.component(k);
        for t in 0..w as i64 {
            out.insert(frac((Q::from_integer(t) - gk) / Q::from_integer(w as i64)));
        }
    }
    out.into_iter().collect()
}

fn twisted(g: &GroupElement, weights: &[u64], theta: Q) -> Vec<Q> {
    weights.iter().enumerate().map(|(k, &w)| frac(g.component(k) + theta * Q::from_integer(w as i64))).collect()
}

/// Age of `g·λ` restricted to one factor, `λ = e^{2πiθ}`.
pub fn block_age_shift(g: &GroupElement, weights: &[u64], degree: u64, theta: Q, conv: AgeConvention) -> Q {
    let amb: Q = twisted(g, weights, theta).into_iter().sum();
    match conv {
        AgeConvention::Tangent => amb - frac(theta * Q::from_integer(degree as i64)),
        AgeConvention::Ambient => amb,
        AgeConvention::Unshifted => Q::zero(),
    }
}

/// `a(g) = a(g₁) + a(g₂)` for `g·(λ₁, λ₂)` in a BV model.
pub fn age_shift(m: &BVModel, g: &GroupElement, t1: Q, t2: Q) -> Q {
    let b1: Vec<usize> = (0..m.n1).collect();
    let b2: Vec<usize> = (m.n1..m.n()).collect();
    block_age_shift(&g.select(&b1), &m.ws1.weights, m.ws1.degree, t1, AgeConvention::Tangent)
        + block_age_shift(&g.select(&b2), &m.ws2.weights, m.ws2.degree, t2, AgeConvention::Tangent)
}

/// Lefschetz classes `(i, i)`, `0 ≤ i ≤ dim`, of a hypersurface or weighted projective space.
pub fn ambient_classes(dim: i64, _empty_hypersurface: bool) -> Vec<(i64, i64)> {
    (0..=dim.max(-1)).map(|i| (i, i)).collect()
}

/// Standard monomials `m` with `Σ (a_k + 1) w_k = (q + 1) d`, as `(m, q)`.
fn primitive_monomials(
    standard: &[Monomial],
    vars: &[usize],
    weight_of: impl Fn(usize) -> u64,
    degree: u64,
) -> Vec<(Monomial, i64)> {
    standard
        .iter()
        .filter_map(|m| {
            let s: u64 = vars.iter().map(|&v| (m.0[v] as u64 + 1) * weight_of(v)).sum();
            (s % degree == 0).then(|| (m.clone(), (s / degree) as i64 - 1))
        })
        .collect()
}

/// Primitive Hodge numbers `h^{D-q,q}` of the hypersurface `{W = 0}`, `D = N - 2`.
pub fn primitive_hodge(w: &Polynomial) -> Result<BTreeMap<(i64, i64), usize>> {
    let ws = weight_system(w)?;
    let vars: Vec<usize> = (0..w.nvars()).collect();
    let ring = crate::milnor::MilnorRing::with_weights(w, &vars, &ws.weights)?;
    let d = vars.len() as i64 - 2;
    let mut out = BTreeMap::new();
    for (_, q) in primitive_monomials(ring.standard_monomials(), &vars, |v| ws.weights[v], ws.degree) {
        *out.entry((d - q, q)).or_insert(0) += 1;
    }
    Ok(out)
}

#[derive(Clone, Debug)]
struct Class {
    pq: (Q, Q),
    /// Action weights under each group generator; zero for ambient classes.
    weights: Vec<Q>,
    primitive: bool,
}

/// Cohomology classes of `X_{W|_I}` (age shift included) for one block and one `θ`.
fn block_classes(
    rings: &RingCache,
    block: &CrBlock,
    gens: &[GroupElement],
    g: &GroupElement,
    theta: Q,
    conv: AgeConvention,
) -> Result<Vec<Class>> {
    let local = g.select(&block.vars);
    let tw = twisted(&local, &block.weights, theta);
    let fixed: Vec<usize> = block.vars.iter().zip(&tw).filter(|(_, t)| t.is_zero()).map(|(&v, _)| v).collect();
    if fixed.is_empty() {
        return Ok(Vec::new());
    }
    let shift = block_age_shift(&local, &block.weights, block.degree, theta, conv);
    let zero = vec![Q::zero(); gens.len()];
    let amb = |dim: i64| -> Vec<Class> {
        ambient_classes(dim, false)
            .into_iter()
            .map(|(p, q)| Class { pq: (Q::from_integer(p) + shift, Q::from_integer(q) + shift), weights: zero.clone(), primitive: false })
            .collect()
    };
    if rings.poly().restrict(&fixed).is_zero() {
        return Ok(amb(fixed.len() as i64 - 1));
    }
    if fixed.len() == 1 {
        return Ok(Vec::new());
    }
    let ring = rings.get(&fixed)?;
    let dim = fixed.len() as i64 - 2;
    let mut out = amb(dim);
    let wt = |v: usize| block.weights[block.vars.iter().position(|&u| u == v).unwrap()];
    for (m, q) in primitive_monomials(ring.standard_monomials(), &fixed, wt, block.degree) {
        out.push(Class {
            pq: (Q::from_integer(dim - q) + shift, Q::from_integer(q) + shift),
            weights: gens.iter().map(|h| action_weight_raw(h, &fixed, &m)).collect(),
            primitive: true,
        });
    }
    Ok(out)
}

/// Contribution of one inertia component `g·λ`.
#[derive(Clone, Debug, Serialize)]
pub struct CrSummand {
    pub g: String,
    pub lambda: Vec<String>,
    pub ambient: usize,
    pub primitive: usize,
}

#[derive(Clone, Debug)]
pub struct CRTable {
    pub table: BigradedTable,
    pub summands: Vec<CrSummand>,
}

impl CRTable {
    pub fn total(&self) -> usize {
        self.table.total()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = self.table.to_json("CR");
        v["sectors"] = json!(self.summands);
        v
    }
}

/// Sum over coset representatives `g` of `G/J` and angles `θ_b` per block of the
/// `G`-invariant classes of `Π_b X_{W_b|Fix(g_b λ_b)}`.
pub fn cr_table_blocks(
    w: &Polynomial,
    blocks: &[CrBlock],
    group: &SymmetryGroup,
    reps: &[GroupElement],
    conv: AgeConvention,
) -> Result<CRTable> {
    let ws = weight_system(w)?;
    let rings = RingCache::new(w, &ws);
    let gens = group.generators();
    let parts: Vec<(BigradedTable, Vec<CrSummand>)> = reps
        .par_iter()
        .map(|g| -> Result<(BigradedTable, Vec<CrSummand>)> {
            let mut per_block: Vec<Vec<(Q, Vec<Class>)>> = Vec::new();
            for b in blocks {
                let local = g.select(&b.vars);
                let mut opts = Vec::new();
                for theta in lambda_set(&local, &b.weights) {
                    let cls = block_classes(&rings, b, gens, g, theta, conv)?;
                    if !cls.is_empty() {
                        opts.push((theta, cls));
                    }
                }
                per_block.push(opts);
            }
            let mut table = BigradedTable::default();
            let mut summands = Vec::new();
            let mut choice = vec![0usize; blocks.len()];
            if per_block.iter().any(|o| o.is_empty()) {
                return Ok((table, summands));
            }
            loop {
                let lists: Vec<&Vec<Class>> = (0..blocks.len()).map(|b| &per_block[b][choice[b]].1).collect();
                let (mut amb, mut prim) = (0usize, 0usize);
                combine(&lists, 0, (Q::zero(), Q::zero()), vec![Q::zero(); gens.len()], false, &mut |pq, primitive| {
                    table.add(pq, 1);
                    if primitive {
                        prim += 1;
                    } else {
                        amb += 1;
                    }
                });
                if amb + prim > 0 {
                    summands.push(CrSummand {
                        g: g.to_string(),
                        lambda: (0..blocks.len()).map(|b| rational_string(&per_block[b][choice[b]].0)).collect(),
                        ambient: amb,
                        primitive: prim,
                    });
                }
                let mut k = 0;
                loop {
                    if k == blocks.len() {
                        return Ok((table, summands));
                    }
                    choice[k] += 1;
                    if choice[k] < per_block[k].len() {
                        break;
                    }
                    choice[k] = 0;
                    k += 1;
                }
            }
        })
        .collect::<Result<_>>()?;
    let mut table = BigradedTable::default();
    let mut summands = Vec::new();
    for (t, s) in parts {
        for (pq, k) in t.entries {
            table.add(pq, k);
        }
        summands.extend(s);
    }
    Ok(CRTable { table, summands })
}

/// Invariant tensor products of one class per block.
fn combine(lists: &[&Vec<Class>], k: usize, pq: (Q, Q), wt: Vec<Q>, prim: bool, emit: &mut dyn FnMut((Q, Q), bool)) {
    if k == lists.len() {
        if wt.iter().all(|w| w.is_integer()) {
            emit(pq, prim);
        }
        return;
    }
    for c in lists[k] {
        let next: Vec<Q> = wt.iter().zip(&c.weights).map(|(a, b)| *a + *b).collect();
        combine(lists, k + 1, (pq.0 + c.pq.0, pq.1 + c.pq.1), next, prim || c.primitive, emit);
    }
}

fn bv_blocks(m: &BVModel) -> [CrBlock; 2] {
    [
        CrBlock { vars: (0..m.n1).collect(), weights: m.ws1.weights.clone(), degree: m.ws1.degree },
        CrBlock { vars: (m.n1..m.n()).collect(), weights: m.ws2.weights.clone(), degree: m.ws2.degree },
    ]
}

/// Chen-Ruan table of `[X_{W₁} × X_{W₂} / σG̃]`.
pub fn cr_table(m: &BVModel) -> Result<CRTable> {
    cr_table_with(m, AgeConvention::Tangent)
}

pub fn cr_table_with(m: &BVModel, conv: AgeConvention) -> Result<CRTable> {
    cr_table_blocks(&m.w, &bv_blocks(m), &m.sigma_group, &m.coset_representatives()?, conv)
}

/// Chen-Ruan table of `[X_W / G̃]` for a single Calabi-Yau hypersurface, `J_W ⊆ G`.
pub fn cr_table_hypersurface(w: &Polynomial, group: &SymmetryGroup) -> Result<CRTable> {
    let ws = weight_system(w)?;
    let j = SymmetryGroup::span(w.nvars(), &[j_element(&ws)])?;
    if !j.is_subgroup_of(group) {
        return Err(Error::NotAdmissible("group must contain J_W".into()));
    }
    let reps = cosets(group, &j)?.representatives;
    let block = CrBlock { vars: (0..w.nvars()).collect(), weights: ws.weights.clone(), degree: ws.degree };
    cr_table_blocks(w, &[block], group, &reps, AgeConvention::Tangent)
}

/// `A^{p,q}(W, σG) = H^{p,q}_CR`.
pub fn verify_lgcy(m: &BVModel) -> Result<Report> {
    verify_lgcy_with(m, AgeConvention::Tangent)
}

pub fn verify_lgcy_with(m: &BVModel, conv: AgeConvention) -> Result<Report> {
    let (a, cr) = rayon::join(|| StateSpace::build(&m.w, &m.sigma_group, Flavor::A), || cr_table_with(m, conv));
    Ok(Report::from_tables("lgcy", &a?.table(), &cr?.table))
}

/// `H^{p,q}_CR(M) = H^{N-p,q}_CR(mirror)`, `N = dim X_{W₁} + dim X_{W₂}`.
pub fn verify_bv_mirror(m: &BVModel) -> Result<Report> {
    let mirror = mirror_pair(m)?;
    let n = Q::from_integer(m.cy_dimension());
    let (lhs, rhs) = rayon::join(|| cr_table(m), || cr_table(&mirror));
    let rhs = rhs?.table.map_keys(|p, q| (n - p, q));
    Ok(Report::from_tables("bv_mirror", &lhs?.table, &rhs))
}

/// `H_CR(M) = H_CR([X_{f₁-f₂} / tw G̃])`; the right side is also checked against `A(tw W, tw G)`.
pub fn verify_twist_corollary(m: &BVModel) -> Result<Report> {
    let t = twist(m)?;
    verify_twist_corollary_with_group(m, &t.poly, &t.group)
}

pub fn verify_twist_corollary_with_group(m: &BVModel, tw_poly: &Polynomial, tw_group: &SymmetryGroup) -> Result<Report> {
    let (lhs, rhs) = rayon::join(|| cr_table(m), || cr_table_hypersurface(tw_poly, tw_group));
    let (lhs, rhs) = (lhs?, rhs?);
    let mut r = Report::from_tables("twist_corollary", &lhs.table, &rhs.table);
    let a = StateSpace::build(tw_poly, tw_group, Flavor::A)?.table();
    for (p, q, x, y) in rhs.table.diff(&a) {
        r.mismatches.push(format!("CR of the twist and A(twW, twG) differ at ({p},{q}): {x} vs {y}"));
    }
    r.pass = r.mismatches.is_empty();
    Ok(r)
}
