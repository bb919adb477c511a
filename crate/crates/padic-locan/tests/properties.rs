//! Property suites for the arithmetic and diagnostic invariants.

use padic_locan::banach::{BoundedOperator, Exactness, TruncatedSpace};
use padic_locan::fixtures::{
    forward_difference, random_nilres_operator, translation_operator, SplitMix64,
};
use padic_locan::iwasawa::{polydisc_eval, GroupAction, PolydiscFunction};
use padic_locan::locan::{
    algebra_closure, brute_force_word_span_rank, charpoly_witness, locan_degree, poly_apply,
    top_nilpotency, witness_split,
};
use padic_locan::mahler::{amice_detects, analytic_vectors, mahler_transform, Tail};
use padic_locan::padic::{PadicScalar, Valuation, DEFAULT_PRECISION};
use padic_locan::poly::PadicPoly;
use proptest::prelude::*;

const PRIMES: [u64; 4] = [2, 3, 5, 7];

fn arb_prime() -> impl Strategy<Value = u64> {
    prop::sample::select(&PRIMES[..])
}

fn arb_scalar(p: u64) -> impl Strategy<Value = PadicScalar> {
    (any::<i32>(), -2i64..4).prop_map(move |(n, shift)| {
        PadicScalar::from_int(p, n as i64, DEFAULT_PRECISION).shift(shift)
    })
}

proptest! {
    #[test]
    fn ultrametric_inequality((_p, a, b) in arb_prime().prop_flat_map(|p| {
        (Just(p), arb_scalar(p), arb_scalar(p))
    })) {
        let sum = a.add(&b).unwrap();
        let lower = a.valuation().lower_bound().min(b.valuation().lower_bound());
        prop_assert!(sum.valuation().lower_bound() >= lower);
        // Equality when the valuations differ and both are certain.
        if let (Valuation::Finite { v: va }, Valuation::Finite { v: vb }) =
            (a.valuation(), b.valuation())
        {
            if va != vb {
                prop_assert_eq!(sum.valuation(), Valuation::finite(va.min(vb)));
            }
        }
    }

    #[test]
    fn multiplication_is_valuation_additive((_p, a, b) in arb_prime().prop_flat_map(|p| {
        (Just(p), arb_scalar(p), arb_scalar(p))
    })) {
        let prod = a.mul(&b).unwrap();
        match (a.valuation(), b.valuation()) {
            (Valuation::Finite { v: va }, Valuation::Finite { v: vb }) => {
                prop_assert_eq!(prod.valuation(), Valuation::finite(va + vb));
            }
            _ => prop_assert!(!prod.valuation().is_finite()),
        }
    }

    #[test]
    fn multiplication_associates_and_commutes((_p, a, b, c) in arb_prime().prop_flat_map(|p| {
        (Just(p), arb_scalar(p), arb_scalar(p), arb_scalar(p))
    })) {
        let ab_c = a.mul(&b).unwrap().mul(&c).unwrap();
        let a_bc = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(ab_c.agrees_with(&a_bc));
        prop_assert!(a.mul(&b).unwrap().agrees_with(&b.mul(&a).unwrap()));
    }

    #[test]
    fn addition_associates((_p, a, b, c) in arb_prime().prop_flat_map(|p| {
        (Just(p), arb_scalar(p), arb_scalar(p), arb_scalar(p))
    })) {
        let ab_c = a.add(&b).unwrap().add(&c).unwrap();
        let a_bc = a.add(&b.add(&c).unwrap()).unwrap();
        prop_assert!(ab_c.agrees_with(&a_bc));
    }

    #[test]
    fn scalar_encoding_round_trips((p, a) in arb_prime().prop_flat_map(|p| {
        (Just(p), arb_scalar(p))
    })) {
        let repr = a.to_repr();
        let back = PadicScalar::from_repr(p, &repr).unwrap();
        prop_assert_eq!(a, back);
    }

    #[test]
    fn poly_eval_is_a_ring_homomorphism(
        (p, f, g, x) in arb_prime().prop_flat_map(|p| {
            (
                Just(p),
                prop::collection::vec(-50i64..50, 1..6),
                prop::collection::vec(-50i64..50, 1..6),
                -20i64..20,
            )
        })
    ) {
        let fp = PadicPoly::from_ints(p, &f, DEFAULT_PRECISION);
        let gp = PadicPoly::from_ints(p, &g, DEFAULT_PRECISION);
        let xs = PadicScalar::from_int(p, x, DEFAULT_PRECISION);
        let sum_eval = fp.add(&gp).unwrap().eval(&xs).unwrap();
        let eval_sum = fp.eval(&xs).unwrap().add(&gp.eval(&xs).unwrap()).unwrap();
        prop_assert!(sum_eval.agrees_with(&eval_sum));
        let prod_eval = fp.mul(&gp).unwrap().eval(&xs).unwrap();
        let eval_prod = fp.eval(&xs).unwrap().mul(&gp.eval(&xs).unwrap()).unwrap();
        prop_assert!(prod_eval.agrees_with(&eval_prod));
    }

    #[test]
    fn operator_norm_is_submultiplicative(
        (p, seed1, seed2, d) in (arb_prime(), any::<u64>(), any::<u64>(), 1usize..4)
    ) {
        let t = random_nilres_operator(p, d, seed1, DEFAULT_PRECISION);
        let s = random_nilres_operator(p, d, seed2, DEFAULT_PRECISION);
        let comp = t.compose(&s).unwrap();
        let bound = t.norm_valuation().lower_bound() + s.norm_valuation().lower_bound();
        prop_assert!(comp.norm_valuation().lower_bound() >= bound);
    }

    #[test]
    fn reduction_is_a_ring_homomorphism(
        (p, seed1, seed2, d, n) in (arb_prime(), any::<u64>(), any::<u64>(), 1usize..4, 1u32..4)
    ) {
        let t = random_nilres_operator(p, d, seed1, DEFAULT_PRECISION);
        let s = random_nilres_operator(p, d, seed2, DEFAULT_PRECISION);
        let lhs = t.compose(&s).unwrap().reduce(n).unwrap();
        let rhs = t.reduce(n).unwrap().matrix.mul(&s.reduce(n).unwrap().matrix).unwrap();
        prop_assert_eq!(lhs.matrix, rhs);
    }

    #[test]
    fn certification_matches_norm_bound(
        (p, seed, d, k) in (arb_prime(), any::<u64>(), 1usize..4, 0i64..4)
    ) {
        let t = random_nilres_operator(p, d, seed, DEFAULT_PRECISION);
        prop_assert_eq!(t.certify_image(k), t.norm_valuation().at_least(k));
    }

    #[test]
    fn contraction_degree_equals_residue_index(
        (p, seed, d) in (arb_prime(), any::<u64>(), 1usize..5)
    ) {
        let t = random_nilres_operator(p, d, seed, DEFAULT_PRECISION);
        let degree = locan_degree(&t).unwrap();
        let index = top_nilpotency(&t).unwrap();
        prop_assert!(degree.is_some() && index.is_some());
        prop_assert_eq!(degree.unwrap(), index.unwrap());
        // The characteristic polynomial always witnesses, and its mod-p
        // split certifies T^k ≡ 0 with k at least the index.
        let cert = charpoly_witness(&t).unwrap();
        prop_assert!(poly_apply(&cert.witness_poly, &t).unwrap().certify_image(1));
        let split = witness_split(&t, &cert.witness_poly).unwrap();
        prop_assert!(split.power >= index.unwrap());
        prop_assert!(split.power_annihilates_mod_p);
    }

    #[test]
    fn closure_rank_bounded_by_minimal_poly_degrees(
        (p, seed, d) in (arb_prime(), any::<u64>(), 2usize..5)
    ) {
        // Commuting family: a seeded nilres operator and a scalar shift of
        // its square. Rank ≤ product of the residue minimal-poly degrees.
        let t = random_nilres_operator(p, d, seed, DEFAULT_PRECISION);
        let t2 = t.compose(&t).unwrap();
        let gens = vec![t.clone(), t2.clone()];
        let img = algebra_closure(&gens, 1).unwrap();
        let deg1 = t.reduce(1).unwrap().matrix.minimal_poly_mod_p().len() - 1;
        let deg2 = t2.reduce(1).unwrap().matrix.minimal_poly_mod_p().len() - 1;
        prop_assert!(img.rank <= deg1.max(1) * deg2.max(1));
        // And the brute-force oracle agrees with the Howell computation.
        let oracle = brute_force_word_span_rank(p, d, &img.generator_residues);
        prop_assert_eq!(img.rank, oracle);
    }

    #[test]
    fn polydisc_eval_is_a_ring_homomorphism(
        (p, coeffs1, coeffs2) in (prop::sample::select(&[2u64, 3][..]),
            prop::collection::vec((0u32..3, 0u32..3, -9i64..9), 1..4),
            prop::collection::vec((0u32..3, 0u32..3, -9i64..9), 1..4))
    ) {
        let action = GroupAction::new(vec![translation_operator(p, 2, DEFAULT_PRECISION)]).unwrap();
        let n = action.minimal_uniform_exponent().unwrap().unwrap();
        let build = |terms: &[(u32, u32, i64)]| {
            let mut f = PolydiscFunction::new(p, 1);
            for &(u, s, c) in terms {
                f.add_term(vec![u], vec![s], PadicScalar::from_int(p, c, DEFAULT_PRECISION)).unwrap();
            }
            f
        };
        let f = build(&coeffs1);
        let g = build(&coeffs2);
        let fg = f.mul(&g).unwrap();
        let lhs = polydisc_eval(&fg, &action, n).unwrap();
        let rhs = polydisc_eval(&f, &action, n).unwrap()
            .compose(&polydisc_eval(&g, &action, n).unwrap()).unwrap();
        prop_assert!(lhs.agrees_with(&rhs));
        let sum = f.add(&g).unwrap();
        let lhs = polydisc_eval(&sum, &action, n).unwrap();
        let rhs = polydisc_eval(&f, &action, n).unwrap()
            .add(&polydisc_eval(&g, &action, n).unwrap()).unwrap();
        prop_assert!(lhs.agrees_with(&rhs));
        // Norm contract: the image norm is bounded by the Gauss norm.
        let ev = polydisc_eval(&f, &action, n).unwrap();
        prop_assert!(ev.norm_valuation().lower_bound() >= f.gauss_valuation().lower_bound());
    }

    #[test]
    fn mahler_round_trip_and_shift_law(
        (p, samples) in (arb_prime(), prop::collection::vec(-100i64..100, 2..12))
    ) {
        let scalars: Vec<PadicScalar> =
            samples.iter().map(|&x| PadicScalar::from_int(p, x, DEFAULT_PRECISION)).collect();
        let series = mahler_transform(&scalars).unwrap();
        for (k, s) in scalars.iter().enumerate() {
            prop_assert!(series.eval_at_integer(k as u64).unwrap().agrees_with(s));
        }
        // Shift law: coefficients of Δf are the shifted coefficients of f.
        let diffs: Vec<PadicScalar> = (0..scalars.len() - 1)
            .map(|i| scalars[i + 1].sub(&scalars[i]).unwrap())
            .collect();
        if !diffs.is_empty() {
            let dseries = mahler_transform(&diffs).unwrap();
            for n in 0..dseries.coeffs.len() {
                prop_assert!(dseries.coeffs[n].agrees_with(&series.coeffs[n + 1]));
            }
        }
    }

    #[test]
    fn mahler_transform_is_linear(
        (p, f, g) in (arb_prime(),
            prop::collection::vec(-50i64..50, 4..10),
            prop::collection::vec(-50i64..50, 4..10))
    ) {
        let len = f.len().min(g.len());
        let fs: Vec<PadicScalar> =
            f[..len].iter().map(|&x| PadicScalar::from_int(p, x, DEFAULT_PRECISION)).collect();
        let gs: Vec<PadicScalar> =
            g[..len].iter().map(|&x| PadicScalar::from_int(p, x, DEFAULT_PRECISION)).collect();
        let sum: Vec<PadicScalar> =
            fs.iter().zip(&gs).map(|(a, b)| a.add(b).unwrap()).collect();
        let sf = mahler_transform(&fs).unwrap();
        let sg = mahler_transform(&gs).unwrap();
        let ss = mahler_transform(&sum).unwrap();
        for n in 0..len {
            let combined = sf.coeffs[n].add(&sg.coeffs[n]).unwrap();
            prop_assert!(ss.coeffs[n].agrees_with(&combined));
        }
    }

    #[test]
    fn sup_norm_identity_for_polynomial_samples(
        (p, coeffs) in (arb_prime(), prop::collection::vec(-40i64..40, 1..6))
    ) {
        // Samples of a polynomial of degree < len at 0..=len+3: the binomial
        // basis is orthonormal, so min val(a_n) = min val(f(k)) exactly.
        let degree = coeffs.len();
        let m = degree + 3;
        let eval = |x: i64| -> i64 { coeffs.iter().rev().fold(0i64, |acc, &c| acc * x + c) };
        let samples: Vec<PadicScalar> =
            (0..=m as i64).map(|x| PadicScalar::from_int(p, eval(x), DEFAULT_PRECISION)).collect();
        let mut series = mahler_transform(&samples).unwrap();
        series.tail = Tail::Zero;
        let lhs = series.sup_valuation();
        let mut rhs: Option<Valuation> = None;
        for s in &samples {
            let v = s.valuation();
            rhs = Some(match rhs {
                None => v,
                Some(r) => r.min_with(v),
            });
        }
        let rhs = rhs.unwrap();
        match (lhs, rhs) {
            (Valuation::Finite { v: a }, Valuation::Finite { v: b }) => prop_assert_eq!(a, b),
            (a, b) => prop_assert_eq!(a.is_finite(), b.is_finite()),
        }
    }

    #[test]
    fn amice_detection_is_monotone_in_level(
        (p, vals) in (prop::sample::select(&[2u64, 3, 5][..]),
            prop::collection::vec(0i64..6, 8..20))
    ) {
        // Synthetic coefficient valuations: a_n = p^(vals[n]).
        let coeffs: Vec<PadicScalar> = vals
            .iter()
            .map(|&v| PadicScalar::one(p, DEFAULT_PRECISION).shift(v))
            .collect();
        let series = padic_locan::mahler::MahlerSeries { prime: p, coeffs, tail: Tail::Unknown };
        for h in 0..4u32 {
            if amice_detects(&series, h).is_some() {
                for h2 in h + 1..=4 {
                    prop_assert!(amice_detects(&series, h2).is_some(),
                        "detected at {h} but not at {h2}");
                }
                break;
            }
        }
    }

    #[test]
    fn mahler_level_implies_lattice_certificate_with_slack(
        (p, v0, v1, v2) in (prop::sample::select(&[2u64, 3][..]), -8i64..8, -8i64..8, -8i64..8)
    ) {
        // Polynomial vectors under translation: orbits are polynomial in the
        // step, so the Mahler level is 0; the lattice criterion must hold at
        // level 0 + 1 (one level of slack).
        let g = translation_operator(p, 2, DEFAULT_PRECISION);
        let v = vec![
            PadicScalar::from_int(p, v0, DEFAULT_PRECISION),
            PadicScalar::from_int(p, v1, DEFAULT_PRECISION),
            PadicScalar::from_int(p, v2, DEFAULT_PRECISION),
        ];
        let report = analytic_vectors(&g, &v, 0, 12).unwrap();
        if let Some(level) = report.mahler_level {
            let slack = analytic_vectors(&g, &v, level + 1, 12).unwrap();
            prop_assert!(slack.lattice_certified,
                "level {level} detected but lattice fails at {}", level + 1);
        }
    }

    #[test]
    fn power_fix_certificate_never_violates_implication(
        (p, seed, d, m) in (arb_prime(), any::<u64>(), 1usize..4, 0u32..3)
    ) {
        // g = 1 + (seeded nilres): unit residue, so the certificate is
        // well-posed; the implication must never be violated.
        let t = random_nilres_operator(p, d, seed, DEFAULT_PRECISION);
        let id = BoundedOperator::identity(t.space.clone(), DEFAULT_PRECISION);
        let g = id.add(&t).unwrap();
        if p.pow(m) <= 64 {
            let rep = padic_locan::iwasawa::power_fix_certificate(&g, m);
            prop_assert!(rep.is_ok(), "implication violated: {:?}", rep.err());
        }
    }

    #[test]
    fn fixture_determinism(seed in any::<u64>()) {
        let a = random_nilres_operator(5, 3, seed, DEFAULT_PRECISION);
        let b = random_nilres_operator(5, 3, seed, DEFAULT_PRECISION);
        prop_assert_eq!(a.matrix, b.matrix);
        let mut r1 = SplitMix64::new(seed);
        let mut r2 = SplitMix64::new(seed);
        for _ in 0..8 {
            prop_assert_eq!(r1.next_u64(), r2.next_u64());
        }
    }
}

#[test]
fn filtration_exact_diagnostics_restrict_to_subtruncations() {
    // Deterministic spot-check across primes and sizes.
    for p in PRIMES {
        let big = forward_difference(p, 6, DEFAULT_PRECISION);
        let small = forward_difference(p, 3, DEFAULT_PRECISION);
        let big_deg = locan_degree(&big).unwrap();
        let small_deg = locan_degree(&small).unwrap();
        // Contraction degree grows with the truncation but restriction of
        // powers is exact on the principal block.
        assert!(big_deg >= small_deg);
        let big_sq = big.compose(&big).unwrap().principal_block(4).unwrap();
        let small_sq = small.compose(&small).unwrap();
        assert!(big_sq.agrees_with(&small_sq));
    }
}

#[test]
fn approximate_operators_are_flagged() {
    let space = TruncatedSpace::poly_degrees(3, 2);
    let op = BoundedOperator::from_int_matrix(
        space,
        &[vec![1, 0, 0], vec![1, 1, 0], vec![0, 1, 1]],
        DEFAULT_PRECISION,
        Exactness::Approximate,
    )
    .unwrap();
    assert_eq!(op.exactness, Exactness::Approximate);
    let composed = op.compose(&op).unwrap();
    assert_eq!(composed.exactness, Exactness::Approximate);
}
