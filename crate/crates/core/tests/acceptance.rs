//! Acceptance run: one PASS/FAIL line per criterion. Exits nonzero if any fail.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num::rational::Ratio;
use num::{BigRational, One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lgmirror::bvlg::{self, BVModel};
use lgmirror::catalog;
use lgmirror::chenruan;
use lgmirror::frobenius::{self, FrobeniusAlgebra};
use lgmirror::milnor::MilnorRing;
use lgmirror::poly::{parse_polynomial, transpose, weight_system, Polynomial};
use lgmirror::statespace::{BigradedTable, Flavor, StateSpace};
use lgmirror::symmetry::{gmax, is_b_admissible, j_element, parse_generators, transpose_group, GroupElement, SymmetryGroup};

type Q = Ratio<i64>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn ok(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn p(s: &str) -> Polynomial {
    parse_polynomial(s).unwrap()
}

const E1: &str = "x0^2+x1^3+x2^6";
const E2: &str = "x0^2+x1^4+x2^4";
const K3A: &str = "y0^2+y1^6+y2^6+y3^6";
const K3B: &str = "y0^2+y1^4+y2^8+y3^8";
const K3C: &str = "y0^2+y1^3*y2+y2^10+y3^10";

// ---------------------------------------------------------------------------
// Independent Fermat oracle: explicit Milnor bases and a closure-built group.

fn frac(q: Q) -> Q {
    q - q.floor()
}

fn close_group(n: usize, gens: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let mut seen: BTreeSet<Vec<Q>> = BTreeSet::new();
    let id = vec![Q::zero(); n];
    seen.insert(id.clone());
    let mut frontier = vec![id];
    while let Some(g) = frontier.pop() {
        for h in gens {
            let s: Vec<Q> = g.iter().zip(h).map(|(a, b)| frac(*a + *b)).collect();
            if seen.insert(s.clone()) {
                frontier.push(s);
            }
        }
    }
    seen.into_iter().collect()
}

/// State-space table of `Σ x_i^{a_i}` with the given group, by direct enumeration.
fn fermat_oracle(exps: &[i64], gens: &[Vec<Q>], flavor: Flavor) -> BigradedTable {
    let n = exps.len();
    let q: Vec<Q> = exps.iter().map(|&a| Q::new(1, a)).collect();
    let group = close_group(n, gens);
    let age = |g: &[Q]| g.iter().copied().sum::<Q>();
    let age_j: Q = q.iter().copied().sum();
    let mut t = BigradedTable::default();
    for g in &group {
        let fix: Vec<usize> = (0..n).filter(|&i| g[i].is_zero()).collect();
        let inv: Vec<Q> = g.iter().map(|&x| frac(-x)).collect();
        let mut b = vec![0i64; fix.len()];
        'odometer: loop {
            let invariant = group.iter().all(|h| fix.iter().zip(&b).map(|(&i, &e)| h[i] * (e + 1)).sum::<Q>().is_integer());
            if invariant {
                let deg: Q = fix.iter().zip(&b).map(|(&i, &e)| q[i] * (e + 1)).sum();
                let shift = age(g) - age_j;
                let pq = match flavor {
                    Flavor::A => (deg + shift, Q::from(fix.len() as i64) - deg + shift),
                    Flavor::B => (deg + shift, deg + age(&inv) - age_j),
                };
                t.add(pq, 1);
            }
            // exponents run over 0..=a_i-2
            let mut k = 0;
            loop {
                if k == fix.len() {
                    break 'odometer;
                }
                b[k] += 1;
                if b[k] <= exps[fix[k]] - 2 {
                    break;
                }
                b[k] = 0;
                k += 1;
            }
        }
    }
    t
}

fn rationals(g: &GroupElement) -> Vec<Q> {
    g.components()
}

fn int_table(entries: &[((i64, i64), usize)]) -> BigradedTable {
    let mut t = BigradedTable::default();
    for &((a, b), k) in entries {
        t.add((Q::from(a), Q::from(b)), k);
    }
    t
}

// ---------------------------------------------------------------------------
// Models

struct Model {
    label: String,
    m: BVModel,
    fermat: Option<Vec<i64>>,
}

fn models() -> Vec<Model> {
    // exponent of x_i in its pure power, if every term is one
    let fermat = |a: &str, b: &str| -> Option<Vec<i64>> {
        let w = p(a).direct_sum(&p(b));
        let mut out = vec![0i64; w.nvars()];
        for m in w.terms().keys() {
            let s = m.support();
            if s.len() != 1 {
                return None;
            }
            out[s[0]] = m.0[s[0]] as i64;
        }
        Some(out)
    };
    let mut out = Vec::new();
    for (e, en) in [(E1, "E(3,2,1;6)"), (E2, "E(2,1,1;4)")] {
        for (k, kn) in [(K3A, "K3(3,1,1,1;6)"), (K3B, "K3(4,2,1,1;8)"), (K3C, "K3(5,3,1,1;10) chain")] {
            let m = BVModel::with_j(&p(e), &p(k)).unwrap();
            out.push(Model { label: format!("{en} x {kn}"), m, fermat: fermat(e, k) });
        }
    }
    let mut gens = parse_generators("1/2,1/4,1/4,0,0,0,0;0,0,0,1/2,1/6,1/6,1/6").unwrap();
    gens.extend(parse_generators("0,1/4,3/4,0,1/6,5/6,0").unwrap());
    let m = BVModel::new(&p(E2), &p(K3A), &gens).unwrap();
    out.push(Model { label: "E(2,1,1;4) x K3(3,1,1,1;6), non-product G".into(), m, fermat: fermat(E2, K3A) });
    out
}

fn over_models<F>(ms: &[Model], f: F) -> Outcome
where
    F: Fn(&Model) -> Result<bool, String>,
{
    let mut bad = Vec::new();
    let mut slowest = Duration::ZERO;
    for m in ms {
        let t = Instant::now();
        match f(m) {
            Ok(true) => {}
            Ok(false) => bad.push(m.label.clone()),
            Err(e) => bad.push(format!("{}: {e}", m.label)),
        }
        let dt = t.elapsed();
        slowest = slowest.max(dt);
        if dt > Duration::from_secs(60) {
            bad.push(format!("{}: {:.1}s exceeds 60s", m.label, dt.as_secs_f64()));
        }
    }
    ok(bad.is_empty(), format!("{} models, slowest {:.2}s{}", ms.len(), slowest.as_secs_f64(), fail_list(&bad)))
}

fn fail_list(bad: &[String]) -> String {
    if bad.is_empty() {
        String::new()
    } else {
        format!("; failing: {}", bad.join(" | "))
    }
}

// ---------------------------------------------------------------------------
// Criteria

fn c1() -> Outcome {
    let t = Instant::now();
    let w = p(E1);
    let ws = weight_system(&w).unwrap();
    let j = j_element(&ws);
    let g = SymmetryGroup::span(3, &[j.clone()]).unwrap();
    let table = StateSpace::build(&w, &g, Flavor::A).unwrap().table();
    let expected = int_table(&[((0, 0), 1), ((1, 0), 1), ((0, 1), 1), ((1, 1), 1)]);
    let oracle = fermat_oracle(&[2, 3, 6], &[rationals(&j)], Flavor::A);
    let dt = t.elapsed();
    ok(table == expected && oracle == expected && dt < Duration::from_secs(1), format!("table {:?}, {:.3}s", table.entries.len(), dt.as_secs_f64()))
}

fn c2() -> Outcome {
    let t = Instant::now();
    let w = p(K3A);
    let j = j_element(&weight_system(&w).unwrap());
    let g = SymmetryGroup::span(4, &[j.clone()]).unwrap();
    let table = StateSpace::build(&w, &g, Flavor::A).unwrap().table();
    let one = Q::one();
    let two = Q::from(2);
    // Griffiths-Steenbrink: y1^a y2^b y3^c with a,b,c ≤ 4 and a+b+c = 6
    let gs = (0..=4).flat_map(|a| (0..=4).flat_map(move |b| (0..=4).map(move |c| a + b + c))).filter(|&s| s == 6).count();
    let oracle = fermat_oracle(&[2, 6, 6, 6], &[rationals(&j)], Flavor::A);
    let dt = t.elapsed();
    let pass = table.total() == 24
        && table.get(one, one) == 20
        && table.get(two, Q::zero()) == 1
        && table.get(Q::zero(), two) == 1
        && gs == 19
        && table.get(one, one) == gs + 1
        && oracle == table
        && dt < Duration::from_secs(5);
    ok(pass, format!("total {}, (1,1) = {} = {gs}+1, {:.3}s", table.total(), table.get(one, one), dt.as_secs_f64()))
}

fn c3(ms: &[Model]) -> Outcome {
    let mut extra = Vec::new();
    let d3 = ms.iter().any(|m| num::integer::gcd(m.m.ws1.weights[m.m.x0], m.m.ws2.weights[m.m.y0 - m.m.n1]) == 3);
    let d1 = ms.iter().any(|m| num::integer::gcd(m.m.ws1.weights[m.m.x0], m.m.ws2.weights[m.m.y0 - m.m.n1]) == 1);
    let np = ms.iter().any(|m| {
        let j = m.m.j_group().unwrap();
        !m.m.is_product().unwrap() && m.m.group.order() > j.order() && j.is_subgroup_of(&m.m.group)
    });
    if !(d3 && d1 && np) {
        extra.push(format!("coverage: delta=3 {d3}, delta=1 {d1}, non-product {np}"));
    }
    let r = over_models(ms, |m| {
        let rep = bvlg::verify_theorem1(&m.m).map_err(|e| e.to_string())?;
        // Fermat models: the A side against the enumeration oracle
        if let Some(exps) = &m.fermat {
            let gens: Vec<Vec<Q>> = m.m.sigma_group.generators().iter().map(rationals).collect();
            let lib = StateSpace::build(&m.m.w, &m.m.sigma_group, Flavor::A).map_err(|e| e.to_string())?.table();
            if lib != fermat_oracle(exps, &gens, Flavor::A) {
                return Err("A-table differs from the Fermat oracle".into());
            }
            let mir = bvlg::mirror_pair(&m.m).map_err(|e| e.to_string())?;
            let mgens: Vec<Vec<Q>> = mir.sigma_group.generators().iter().map(rationals).collect();
            let b = fermat_oracle(exps, &mgens, Flavor::B);
            if b != lib {
                return Err("B-table oracle differs".into());
            }
        }
        Ok(rep.pass)
    });
    ok(r.pass && extra.is_empty(), format!("{}{}", r.detail, fail_list(&extra)))
}

fn c4(ms: &[Model]) -> Outcome {
    let r = over_models(ms, |m| {
        let a = bvlg::verify_twist_iso(&m.m, Flavor::A).map_err(|e| e.to_string())?;
        let b = bvlg::verify_twist_iso(&m.m, Flavor::B).map_err(|e| e.to_string())?;
        Ok(a.pass && b.pass)
    });
    let m = &ms[0].m;
    let t = bvlg::twist(m).unwrap();
    let jt = j_element(&t.weights);
    let corrupted = SymmetryGroup::span(t.poly.nvars(), &[jt]).unwrap();
    let control = corrupted != t.group
        && match bvlg::verify_twist_iso_with_group(m, Flavor::A, &t.poly, &t.keep, &corrupted) {
            Ok(rep) => !rep.pass,
            Err(_) => true,
        };
    ok(r.pass && control, format!("{}; corrupted twG rejected: {control}", r.detail))
}

fn c5(ms: &[Model]) -> Outcome {
    over_models(ms, |m| Ok(bvlg::verify_group_lemma(&m.m).map_err(|e| e.to_string())?.pass))
}

fn c6(ms: &[Model]) -> Outcome {
    over_models(ms, |m| Ok(chenruan::verify_lgcy(&m.m).map_err(|e| e.to_string())?.pass))
}

fn c7(ms: &[Model]) -> Outcome {
    let mut all: Vec<Model> = Vec::new();
    for m in ms {
        all.push(Model { label: m.label.clone(), m: m.m.clone(), fermat: None });
    }
    let big = BVModel::with_j(&p(E1), &p("y0^2+y1^8+y2^8+y3^8+y4^8")).unwrap();
    let dim = big.cy_dimension();
    all.push(Model { label: "E(3,2,1;6) x (4,1,1,1,1;8)".into(), m: big, fermat: None });
    let r = over_models(&all, |m| Ok(chenruan::verify_bv_mirror(&m.m).map_err(|e| e.to_string())?.pass));
    ok(r.pass && dim > 3, format!("{}; largest N = {dim}", r.detail))
}

fn c8() -> Outcome {
    let m = BVModel::with_j(&p(E1), &p(K3A)).unwrap();
    let t2 = frobenius::verify_theorem2(&m).unwrap();
    let gl = frobenius::verify_gamma_lemma(&m).unwrap();
    let unscaled = frobenius::verify_theorem2_scaled(&m, false).unwrap();
    let wt = transpose(&m.w).unwrap();
    let bhk = FrobeniusAlgebra::new(StateSpace::build(&wt, &bvlg::bhk_dual_group(&m).unwrap(), Flavor::B).unwrap()).unwrap();
    let st = bhk.structure_table().unwrap();
    let src_ok = st.associativity_failures().is_empty()
        && st.unit_failures().is_empty()
        && st.frobenius_failures().is_empty()
        && st.gram_rank() == st.dim();
    ok(
        t2.pass && gl.pass && !unscaled.pass && src_ok,
        format!(
            "theorem2 {} ({} even elements), gamma relations {} ({} pairs), unscaled phi rejected {}, source algebra ok {src_ok}",
            t2.pass, t2.lhs_total, gl.pass, gl.lhs_total, !unscaled.pass
        ),
    )
}

fn c9() -> Outcome {
    let polys = [E1, K3A, K3C, "x0^3*x1+x1^3*x2+x2^4", "x0^2*x1+x1^3*x2+x2^3*x0", "x0^3+x1^3+x2^3"];
    let mut rng = ChaCha8Rng::seed_from_u64(20261015);
    let mut bad = Vec::new();
    let mut count = 0;
    let mut with_j = 0;
    for s in polys {
        let w = p(s);
        let ws = weight_system(&w).unwrap();
        let j = j_element(&ws);
        let big = gmax(&w).unwrap();
        let wt = transpose(&w).unwrap();
        for _ in 0..10 {
            let k = rng.gen_range(1..=2);
            let mut gens: Vec<GroupElement> = (0..k).map(|_| big.elements()[rng.gen_range(0..big.order())].clone()).collect();
            if rng.gen_bool(0.5) {
                gens.push(j.clone());
            }
            let g = SymmetryGroup::span(ws.n(), &gens).unwrap();
            let gt = transpose_group(&g, &w).unwrap();
            let gtt = transpose_group(&gt, &wt).unwrap();
            let has_j = g.contains(&j);
            with_j += has_j as usize;
            if gtt.elements() != g.elements() {
                bad.push(format!("{s}: (G^T)^T != G"));
            }
            if has_j != is_b_admissible(&gt) {
                bad.push(format!("{s}: J in G is {has_j} but G^T in SL is {}", is_b_admissible(&gt)));
            }
            count += 1;
        }
    }
    ok(bad.is_empty() && count >= 50 && with_j > 0 && with_j < count, format!("{count} subgroups over {} polynomials, {with_j} contain J{}", polys.len(), fail_list(&bad)))
}

fn det(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    let mut d = BigRational::one();
    for c in 0..n {
        let Some(r) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return BigRational::zero();
        };
        if r != c {
            m.swap(r, c);
            d = -d;
        }
        d *= m[c][c].clone();
        for r in c + 1..n {
            let f = &m[r][c] / &m[c][c];
            for k in c..n {
                let v = &m[c][k] * &f;
                m[r][k] -= v;
            }
        }
    }
    d
}

fn c10() -> Outcome {
    let mut bad = Vec::new();
    let mut fermat = 0;
    let all = catalog::enumerate_k3_systems(catalog::DEFAULT_BOUND).unwrap();
    let samples: Vec<Polynomial> = catalog::elliptic_systems()
        .into_iter()
        .chain(all)
        .filter_map(|r| r.sample)
        .filter(|s| s.exponent_rows().iter().all(|r| r.iter().filter(|&&e| e > 0).count() == 1))
        .collect();
    for s in &samples {
        let ws = weight_system(s).unwrap();
        let expected: u64 = ws.weights.iter().map(|&w| ws.degree / w - 1).product();
        let vars: Vec<usize> = (0..s.nvars()).collect();
        let mu = MilnorRing::new(s, &vars).unwrap().mu() as u64;
        if mu != expected {
            bad.push(format!("{s}: mu {mu} vs {expected}"));
        }
        fermat += 1;
    }
    for (a, b) in [(E1, K3C), ("x0^3*x1+x1^3*x2+x2^4", "y0^2*y1+y1^3*y2+y2^3*y0"), (E2, "y0^5+y1^2*y0")] {
        let (a, b) = (p(a), p(b));
        let mu = |q: &Polynomial| MilnorRing::new(q, &(0..q.nvars()).collect::<Vec<_>>()).unwrap().mu();
        if mu(&a.direct_sum(&b)) != mu(&a) * mu(&b) {
            bad.push(format!("mu not multiplicative on {a} + {b}"));
        }
    }
    let mut grams = 0;
    for s in ["x0^3", E1, K3C, "x0^2*x1+x1^3*x2+x2^3*x0", "x0^3*x1+x1^3*x2+x2^4"] {
        let w = p(s);
        let r = MilnorRing::new(&w, &(0..w.nvars()).collect::<Vec<_>>()).unwrap();
        let g = r.gram_matrix().unwrap();
        if det(g).is_zero() {
            bad.push(format!("{s}: Gram matrix singular"));
        }
        grams += 1;
    }
    // loop: mu = product of exponents
    let lp = p("x0^2*x1+x1^3*x2+x2^3*x0");
    if MilnorRing::new(&lp, &[0, 1, 2]).unwrap().mu() != 18 {
        bad.push("loop mu".into());
    }
    ok(bad.is_empty() && fermat >= 10 && grams >= 3, format!("{fermat} Fermat samples, {grams} Gram determinants nonzero{}", fail_list(&bad)))
}

fn c11() -> Outcome {
    let all = catalog::enumerate_k3_systems(catalog::DEFAULT_BOUND).unwrap();
    let bv = catalog::filter_bv(&all);
    let half = all.iter().filter(|r| r.bv_admissible).count();
    let odd: Vec<String> = catalog::half_degree_only(&all).iter().map(|r| r.system.to_string()).collect();
    ok(
        all.len() == 95 && bv.len() == 44,
        format!("{} weight systems, {} admit an invertible z^2 + f ({half} have d = 2v_i; without an invertible f: {})", all.len(), bv.len(), odd.join(" ")),
    )
}

fn main() {
    let start = Instant::now();
    let ms = models();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("elliptic sanity", Box::new(c1)),
        ("K3 sanity", Box::new(c2)),
        ("theorem 1 table equality", Box::new(|| c3(&ms))),
        ("twist bijections", Box::new(|| c4(&ms))),
        ("tw(G^T) = (tw G)^T", Box::new(|| c5(&ms))),
        ("LG/CY state-space isomorphism", Box::new(|| c6(&ms))),
        ("BV mirror symmetry of CR tables", Box::new(|| c7(&ms))),
        ("Frobenius algebra isomorphism", Box::new(c8)),
        ("duality properties", Box::new(c9)),
        ("Milnor engine", Box::new(c10)),
        ("catalog counts", Box::new(c11)),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| f())).unwrap_or_else(|_| ok(false, "panicked"));
        failed += !o.pass as usize;
        println!("[{}] {:>2} {name}: {} ({:.2}s)", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail, t.elapsed().as_secs_f64());
    }
    let total = start.elapsed();
    let fast = total < Duration::from_secs(600);
    failed += !fast as usize;
    println!("[{}] 12 wall clock: {:.1}s (limit 600s)", if fast { "PASS" } else { "FAIL" }, total.as_secs_f64());
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
