use proptest::prelude::*;

use lgmirror::milnor::MilnorRing;
use lgmirror::poly::{parse_polynomial, transpose, weight_system, Polynomial};
use lgmirror::statespace::{Flavor, StateSpace};
use lgmirror::symmetry::{gmax, is_b_admissible, j_element, transpose_group, GroupElement, SymmetryGroup};

fn fermat(exps: &[u32]) -> Polynomial {
    let s: Vec<String> = exps.iter().enumerate().map(|(i, a)| format!("x{i}^{a}")).collect();
    parse_polynomial(&s.join("+")).unwrap()
}

/// `x0^a0 x1 + x1^a1 x2 + ... + x_{n-1}^{a_{n-1}}`
fn chain(exps: &[u32]) -> Polynomial {
    let n = exps.len();
    let s: Vec<String> = (0..n)
        .map(|i| if i + 1 < n { format!("x{i}^{}*x{}", exps[i], i + 1) } else { format!("x{i}^{}", exps[i]) })
        .collect();
    parse_polynomial(&s.join("+")).unwrap()
}

fn all_vars(p: &Polynomial) -> Vec<usize> {
    (0..p.nvars()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn group_elements_form_a_group(nums in prop::collection::vec(-12i64..12, 1..5), den in 1u64..13) {
        let g = GroupElement::from_fractions(&nums, den);
        prop_assert!(g.add(&g.neg()).is_identity());
        prop_assert_eq!(g.scale(g.order() as i64), GroupElement::identity(nums.len()));
        prop_assert!(g.age() >= num::rational::Ratio::from_integer(0));
    }

    #[test]
    fn fermat_milnor_number(exps in prop::collection::vec(2u32..7, 1..4)) {
        let p = fermat(&exps);
        let mu = MilnorRing::new(&p, &all_vars(&p)).unwrap().mu();
        prop_assert_eq!(mu as u64, exps.iter().map(|&a| (a - 1) as u64).product::<u64>());
    }

    #[test]
    fn transpose_is_an_involution(exps in prop::collection::vec(2u32..5, 1..4), use_chain: bool) {
        let p = if use_chain { chain(&exps) } else { fermat(&exps) };
        let t = transpose(&p).unwrap();
        prop_assert_eq!(transpose(&t).unwrap(), p.clone());
        // μ = Π (1/q_i − 1) for both
        for w in [&p, &t] {
            let ws = weight_system(w).unwrap();
            let expected = ws.weights.iter().map(|&v| num::rational::Ratio::new(ws.degree as i64 - v as i64, v as i64)).product::<num::rational::Ratio<i64>>();
            let mu = MilnorRing::new(w, &all_vars(w)).unwrap().mu();
            prop_assert_eq!(num::rational::Ratio::from_integer(mu as i64), expected);
        }
    }

    #[test]
    fn dual_group_properties(exps in prop::collection::vec(2u32..5, 2..4), use_chain: bool, pick in prop::collection::vec(0usize..10_000, 1..3), add_j: bool) {
        let p = if use_chain { chain(&exps) } else { fermat(&exps) };
        let big = gmax(&p).unwrap();
        let j = j_element(&weight_system(&p).unwrap());
        let mut gens: Vec<GroupElement> = pick.iter().map(|&k| big.elements()[k % big.order()].clone()).collect();
        if add_j {
            gens.push(j.clone());
        }
        let g = SymmetryGroup::span(p.nvars(), &gens).unwrap();
        let gt = transpose_group(&g, &p).unwrap();
        prop_assert_eq!(g.order() * gt.order(), big.order());
        let gtt = transpose_group(&gt, &transpose(&p).unwrap()).unwrap();
        prop_assert_eq!(gtt.elements(), g.elements());
        prop_assert_eq!(g.contains(&j), is_b_admissible(&gt));
    }

    #[test]
    fn a_tables_are_hodge_symmetric(exps in prop::collection::vec(2u32..6, 2..4)) {
        let p = fermat(&exps);
        let j = j_element(&weight_system(&p).unwrap());
        let g = SymmetryGroup::span(p.nvars(), &[j]).unwrap();
        let t = StateSpace::build(&p, &g, Flavor::A).unwrap().table();
        for (&(a, b), &k) in &t.entries {
            prop_assert_eq!(t.get(b, a), k);
        }
    }
}
