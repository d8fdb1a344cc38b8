use proptest::prelude::*;

use quadham::graded::{GradedElement, Generator};
use quadham::hamiltonian::{current, evolution, extended_bracket, poisson_v, vertical_commutator, HamiltonianForm, ProjectableField};
use quadham::koszul_tate::{brst_charge, kt_delta, super_bracket, KTComplex};
use quadham::model::catalog::{coupled_degenerate, diagonal_degenerate};
use quadham::poly::{int, CoeffPoly, Rational, Var};
use quadham::split::default_sigma;

fn exps(arity: usize, max_deg: u32) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0..=max_deg, arity).prop_map(move |mut e| {
        while e.iter().sum::<u32>() > max_deg {
            let i = (0..e.len()).max_by_key(|&i| e[i]).unwrap();
            e[i] -= 1;
        }
        e
    })
}

fn poly(num_q: usize, num_p: usize, max_deg: u32) -> impl Strategy<Value = CoeffPoly> {
    let arity = 1 + num_q + num_p;
    prop::collection::vec((exps(arity, max_deg), -4i64..=4), 0..5)
        .prop_map(move |terms| CoeffPoly::from_terms(num_q, num_p, terms.into_iter().map(|(e, c)| (e, int(c)))).unwrap())
}

fn phase_triple() -> impl Strategy<Value = (CoeffPoly, CoeffPoly, CoeffPoly)> {
    (1usize..=3).prop_flat_map(|m| (poly(m, m, 3), poly(m, m, 3), poly(m, m, 3)))
}

fn vertical_pair() -> impl Strategy<Value = (Vec<CoeffPoly>, Vec<CoeffPoly>)> {
    (1usize..=3).prop_flat_map(|m| (prop::collection::vec(poly(m, 0, 2), m), prop::collection::vec(poly(m, 0, 2), m)))
}

fn generator() -> impl Strategy<Value = Generator> + Clone {
    (any::<bool>(), 1u32..=4, 0usize..2).prop_map(|(ghost, level, i)| if ghost { Generator::ghost(i, level) } else { Generator::antighost(i, level) })
}

fn antighost() -> impl Strategy<Value = Generator> + Clone {
    (1u32..=4, 0usize..2).prop_map(|(level, i)| Generator::antighost(i, level))
}

/// Single product term, hence parity-homogeneous.
fn graded_term(gen: impl Strategy<Value = Generator> + Clone + 'static) -> impl Strategy<Value = GradedElement> {
    (poly(2, 2, 2), prop::collection::vec(gen, 0..4)).prop_map(|(c, gens)| GradedElement::product(c, &gens))
}

fn graded_sum(gen: impl Strategy<Value = Generator> + Clone + 'static) -> impl Strategy<Value = GradedElement> {
    prop::collection::vec(graded_term(gen), 1..4).prop_map(|ts| ts.iter().fold(GradedElement::zero(2, 2), |acc, t| acc.checked_add(t).unwrap()))
}

fn sign(a: u32, b: u32) -> Rational {
    if (a * b).is_multiple_of(2) {
        int(1)
    } else {
        int(-1)
    }
}

fn complex(deg2: bool) -> KTComplex {
    let model = if deg2 { coupled_degenerate() } else { diagonal_degenerate() };
    KTComplex::new(&model, &default_sigma(&model).unwrap(), 4).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms((f, g, h) in phase_triple()) {
        prop_assert_eq!(&(&f + &g) + &h, &f + &(&g + &h));
        prop_assert_eq!(&(&f * &g) * &h, &f * &(&g * &h));
        prop_assert_eq!(&f * &g, &g * &f);
        prop_assert_eq!(&f * &(&g + &h), &(&f * &g) + &(&f * &h));
        prop_assert!((&f - &f).is_zero());
    }

    #[test]
    fn partial_derivatives_commute(f in poly(2, 2, 4)) {
        let vars = [Var::T, Var::Q(0), Var::Q(1), Var::P(0), Var::P(1)];
        for a in vars {
            for b in vars {
                let ab = f.differentiate(a).unwrap().differentiate(b).unwrap();
                let ba = f.differentiate(b).unwrap().differentiate(a).unwrap();
                prop_assert_eq!(ab, ba);
            }
        }
    }

    #[test]
    fn substitution_commutes_with_evaluation(f in poly(2, 2, 3), g in poly(2, 2, 2), vals in prop::collection::vec(-3i64..=3, 5)) {
        let values: Vec<Rational> = vals.iter().map(|&v| int(v)).collect();
        let composed = f.substitute(&[(Var::Q(1), g.clone())]).unwrap();
        let mut inner = values.clone();
        inner[2] = g.eval_exact(&values).unwrap();
        prop_assert_eq!(composed.eval_exact(&values).unwrap(), f.eval_exact(&inner).unwrap());
    }

    #[test]
    fn poisson_bracket_is_a_lie_bracket_and_derivation((f, g, h) in phase_triple()) {
        let br = |a: &CoeffPoly, b: &CoeffPoly| poisson_v(a, b).unwrap();
        prop_assert_eq!(br(&f, &g), -&br(&g, &f));
        prop_assert_eq!(br(&f, &(&g * &h)), &(&br(&f, &g) * &h) + &(&g * &br(&f, &h)));
        prop_assert_eq!(br(&f, &(&g + &h)), &br(&f, &g) + &br(&f, &h));
        let jacobi = &(&br(&f, &br(&g, &h)) + &br(&g, &br(&h, &f))) + &br(&h, &br(&f, &g));
        prop_assert!(jacobi.is_zero());
    }

    #[test]
    fn vertical_currents_close((u, w) in vertical_pair()) {
        let m = u.len();
        let h = HamiltonianForm::from_function(CoeffPoly::zero(m, m)).unwrap();
        let ju = current(&ProjectableField::vertical(u.clone()), &h).unwrap();
        let jw = current(&ProjectableField::vertical(w.clone()), &h).unwrap();
        let comm = vertical_commutator(&u, &w).unwrap();
        let jc = current(&ProjectableField::vertical(comm), &h).unwrap();
        prop_assert_eq!(poisson_v(&ju, &jw).unwrap(), jc);
    }

    #[test]
    fn evolution_matches_extended_bracket(hf in poly(2, 2, 3), f in poly(2, 2, 3)) {
        let h = HamiltonianForm::from_function(hf).unwrap();
        prop_assert_eq!(evolution(&f, &h).unwrap(), extended_bracket(&f, &h).unwrap());
    }

    #[test]
    fn graded_product_is_associative(x in graded_sum(generator()), y in graded_sum(generator()), z in graded_sum(generator())) {
        let l = x.graded_mul(&y).unwrap().graded_mul(&z).unwrap();
        let r = x.graded_mul(&y.graded_mul(&z).unwrap()).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn graded_product_is_graded_commutative(x in graded_term(generator()), y in graded_term(generator())) {
        prop_assume!(!x.is_zero() && !y.is_zero());
        let (px, py) = (x.parity().unwrap(), y.parity().unwrap());
        let xy = x.graded_mul(&y).unwrap();
        let yx = y.graded_mul(&x).unwrap().scale(&sign(px, py));
        prop_assert_eq!(xy, yx);
    }

    #[test]
    fn left_derivative_is_graded_leibniz(x in graded_term(generator()), y in graded_sum(generator()), g in generator()) {
        prop_assume!(!x.is_zero());
        let px = x.parity().unwrap();
        let lhs = x.graded_mul(&y).unwrap().left_derivative(&g);
        let rhs = x.left_derivative(&g).graded_mul(&y).unwrap()
            .checked_add(&x.graded_mul(&y.left_derivative(&g)).unwrap().scale(&sign(px, g.parity()))).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn left_derivatives_graded_commute(x in graded_sum(generator()), g in generator(), h in generator()) {
        let gh = x.left_derivative(&h).left_derivative(&g);
        let hg = x.left_derivative(&g).left_derivative(&h).scale(&sign(g.parity(), h.parity()));
        prop_assert_eq!(gh, hg);
    }

    #[test]
    fn differential_squares_to_zero(x in graded_sum(antighost()), deg2 in any::<bool>()) {
        let cx = complex(deg2);
        prop_assert!(kt_delta(&kt_delta(&x, &cx).unwrap(), &cx).unwrap().is_zero());
    }

    #[test]
    fn differential_lowers_antighost_number(x in graded_term(antighost()), deg2 in any::<bool>()) {
        let cx = complex(deg2);
        let dx = kt_delta(&x, &cx).unwrap();
        if let (Some(k), Some(k1)) = (x.antighost_number(), dx.antighost_number()) {
            prop_assert_eq!(k1 + 1, k);
        }
    }

    #[test]
    fn differential_is_odd_antiderivation(x in graded_term(antighost()), y in graded_sum(antighost())) {
        prop_assume!(!x.is_zero());
        let cx = complex(true);
        let d = |e: &GradedElement| kt_delta(e, &cx).unwrap();
        let lhs = d(&x.graded_mul(&y).unwrap());
        let rhs = d(&x).graded_mul(&y).unwrap()
            .checked_add(&x.graded_mul(&d(&y)).unwrap().scale(&sign(x.parity().unwrap(), 1))).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn super_bracket_antisymmetry(x in graded_term(generator()), y in graded_term(generator())) {
        prop_assume!(!x.is_zero() && !y.is_zero());
        let (px, py) = (x.parity().unwrap(), y.parity().unwrap());
        let xy = super_bracket(&x, &y).unwrap();
        let yx = super_bracket(&y, &x).unwrap().scale(&sign(px, py)).neg();
        prop_assert_eq!(xy, yx);
    }

    #[test]
    fn super_bracket_leibniz(x in graded_term(generator()), y in graded_term(generator()), z in graded_sum(generator())) {
        prop_assume!(!x.is_zero() && !y.is_zero());
        let (px, py) = (x.parity().unwrap(), y.parity().unwrap());
        let lhs = super_bracket(&x, &y.graded_mul(&z).unwrap()).unwrap();
        let rhs = super_bracket(&x, &y).unwrap().graded_mul(&z).unwrap()
            .checked_add(&y.graded_mul(&super_bracket(&x, &z).unwrap()).unwrap().scale(&sign(px, py))).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn charge_bracket_is_differential(x in graded_sum(antighost()), deg2 in any::<bool>()) {
        let cx = complex(deg2);
        let q = brst_charge(&cx).unwrap();
        prop_assert_eq!(super_bracket(&q, &x).unwrap(), kt_delta(&x, &cx).unwrap());
    }
}
