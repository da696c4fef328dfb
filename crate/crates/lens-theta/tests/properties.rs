use lens_theta::algebra::*;
use lens_theta::forms::build::*;
use lens_theta::forms::{circle_product_mean, Factor, FormExpr, Lin};
use lens_theta::gluing::*;
use lens_theta::numtheory::*;
use lens_theta::Q;
use num_integer::Integer;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn coprime() -> impl Strategy<Value = (i64, i64)> {
    (1i64..400, -800i64..800).prop_filter("coprime", |(p, q)| q.gcd(p) == 1)
}

fn factor() -> impl Strategy<Value = Factor> {
    let pt = 1u32..4;
    let pair = (1u32..4, 1u32..4).prop_filter("distinct", |(i, j)| i != j);
    prop_oneof![
        pt.clone().prop_map(|i| Factor::Mu(b(i))),
        pt.clone().prop_map(|i| Factor::Psi(b(i))),
        pt.prop_map(|i| Factor::Dt(b(i))),
        pair.clone().prop_map(|(i, j)| Factor::EtaD(b(i), b(j))),
        pair.clone().prop_map(|(i, j)| Factor::DeltaD(b(i), b(j))),
        pair.clone().prop_map(|(i, j)| eta_c(b(i), b(j))),
        pair.prop_map(|(i, j)| delta_c(b(i), b(j))),
    ]
}

fn expr() -> impl Strategy<Value = FormExpr> {
    prop::collection::vec((prop::collection::vec(factor(), 0..4), -3i64..4), 1..4).prop_map(|terms| {
        let mut e = FormExpr::zero();
        for (fs, c) in terms {
            if let Ok(t) = FormExpr::product(int(c), fs) {
                e = e.add(&t);
            }
        }
        e
    })
}

fn saw_f64(x: f64) -> f64 {
    let f = x - x.floor();
    if f == 0.0 {
        0.0
    } else {
        f - 0.5
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn d_squared_vanishes(e in expr()) {
        prop_assert!(e.differential().differential().is_zero());
    }

    #[test]
    fn regularize_is_idempotent(e in expr()) {
        let r = e.regularize();
        prop_assert_eq!(r.regularize(), r);
    }

    #[test]
    fn differential_is_a_derivation(x in expr(), y in expr()) {
        let Ok(xy) = x.wedge(&y) else { return Ok(()) };
        let Ok(a) = x.differential().wedge(&y) else { return Ok(()) };
        // x is not homogeneous in general, so split it by parity
        let mut even = FormExpr::zero();
        let mut odd = FormExpr::zero();
        for (fs, c) in x.terms() {
            let t = FormExpr::product(c.clone(), fs.clone()).unwrap();
            if fs.iter().filter(|f| f.is_odd()).count() % 2 == 0 { even = even.add(&t) } else { odd = odd.add(&t) }
        }
        let sign_part = even.wedge(&y.differential()).unwrap().sub(&odd.wedge(&y.differential()).unwrap());
        prop_assert_eq!(xy.differential(), a.add(&sign_part));
    }

    #[test]
    fn dedekind_methods_agree((p, q) in coprime()) {
        prop_assert_eq!(dedekind_sum_direct(q, p).unwrap(), dedekind_sum_fast(q, p).unwrap());
    }

    #[test]
    fn dedekind_symmetries((p, q) in coprime()) {
        let s = dedekind_sum_direct(q, p).unwrap();
        prop_assert_eq!(dedekind_sum_direct(-q, p).unwrap(), -s.clone());
        prop_assert_eq!(dedekind_sum_direct(q + 7 * p, p).unwrap(), s.clone());
        let inv = q.extended_gcd(&p).x;
        prop_assert_eq!(dedekind_sum_direct(inv, p).unwrap(), s.clone());
        // 6p·s(q,p) is an integer
        prop_assert!((s * int(6 * p)).is_integer());
    }

    #[test]
    fn reciprocity_beyond_machine_range(p in 1i64 << 40..1i64 << 62, q in 1i64 << 30..1i64 << 62) {
        prop_assume!(p.gcd(&q) == 1);
        let lhs = dedekind_sum_fast(q, p).unwrap() + dedekind_sum_fast(p, q).unwrap();
        prop_assert_eq!(lhs, reciprocity_rhs(q, p));
    }

    #[test]
    fn sawtooth_is_odd_and_periodic(n in -500i64..500, d in 1i64..50) {
        let x = rat(n, d);
        prop_assert_eq!(sawtooth(&(-x.clone())), -sawtooth(&x));
        prop_assert_eq!(sawtooth(&(x.clone() + Q::one())), sawtooth(&x));
        prop_assert!((to_f64(&sawtooth(&x)) - saw_f64(n as f64 / d as f64)).abs() < 1e-12);
    }

    #[test]
    fn canonical_matrix_and_twists_are_unimodular((p, q) in coprime(), k in -20i64..20, left in any::<bool>()) {
        let g = canonical_mn(p, q).unwrap();
        prop_assert_eq!(g.det(), 1);
        let side = if left { TwistSide::Left } else { TwistSide::Right };
        let t = dehn_twist(g, side, k);
        prop_assert_eq!(t.det(), 1);
        prop_assert_eq!(t.p, p);
        prop_assert_eq!(dehn_twist(t, side, -k), g);
    }

    #[test]
    fn framing_shift((p, q) in coprime(), k in -20i64..20, left in any::<bool>()) {
        let e = int(2);
        let g = canonical_mn(p, q).unwrap();
        let side = if left { TwistSide::Left } else { TwistSide::Right };
        let w0 = two_loop_weight_mt(&LensSpace { matrix: g }, &e).unwrap();
        let w1 = two_loop_weight_mt(&LensSpace { matrix: dehn_twist(g, side, k) }, &e).unwrap();
        prop_assert_eq!(w1 - w0, e * rat(k, 12));
    }

    #[test]
    fn pullback_preserves_torus_volume((p, q) in coprime(), k in -5i64..5) {
        let g = dehn_twist(canonical_mn(p, q).unwrap(), TwistSide::Right, k);
        let x = bd(1);
        let vol = prod(Q::one(), vec![Factor::Dt(x), Factor::Dtheta(x)]);
        prop_assert_eq!(pullback_boundary(&vol, g).unwrap(), vol.clone());
        // ∫ dt ∧ φ*dt = p
        let e = f(Factor::Dt(x)).wedge(&pullback_boundary(&f(Factor::Dt(x)), g).unwrap()).unwrap();
        prop_assert_eq!(torus_integral(&e).unwrap(), int(p));
    }

    #[test]
    fn circle_product_mean_matches_riemann_sum(a in 1i64..8, bb in -8i64..8) {
        prop_assume!(bb != 0);
        let n = 840 * 4;
        let mut s = 0.0;
        for i in 0..n {
            let x = (i as f64 + 0.5) / n as f64;
            s += saw_f64(a as f64 * x) * saw_f64(bb as f64 * x);
        }
        prop_assert!((s / n as f64 - to_f64(&circle_product_mean(a, bb))).abs() < 1e-4);
    }

    #[test]
    fn shifted_mean_reduces_to_plain_mean(a in 1i64..8, bb in 1i64..8) {
        prop_assert_eq!(shifted_circle_product_mean(a, &Q::zero(), bb, &Q::zero()), circle_product_mean(a, bb));
    }

    #[test]
    fn k_sum_is_periodic((p, q) in (1i64..60, -60i64..60).prop_filter("coprime", |(p, q)| q.gcd(p) == 1)) {
        let m = canonical_mn(p, q).unwrap().m;
        let a = nmt_k_sum(p, q, m).value;
        prop_assert!((a - nmt_k_sum(p, q + p, m).value).abs() < 1e-10);
        prop_assert!((a - nmt_k_sum(p, q, m - p).value).abs() < 1e-10);
    }

    #[test]
    fn manin_input_reduces_nmt((p, q) in coprime()) {
        let l = LensSpace::new(p, q).unwrap();
        let e = int(2);
        let (x, r) = two_loop_weight_nmt(&l, &e, &Q::zero(), Variant::SeffEq).unwrap();
        prop_assert_eq!(x, two_loop_weight_mt(&l, &e).unwrap());
        prop_assert_eq!(r.value, 0.0);
    }

    #[test]
    fn e_is_basis_independent(a in -5i64..6, bb in -5i64..6, c in -5i64..6, d in -5i64..6) {
        prop_assume!(a * d - bb * c != 0);
        let sc = example_double_constants();
        let gl = vec![vec![int(a), int(bb)], vec![int(c), int(d)]];
        let moved = change_split_basis(&sc, &gl).unwrap();
        prop_assert!(moved.is_valid());
        prop_assert_eq!(coeff_e(&moved), int(2));
        prop_assert!(coeff_e_prime(&moved).is_zero());
    }
}

#[test]
fn lin_diff_is_antisymmetric() {
    let l = Lin::diff(b(1), b(2));
    assert_eq!(Lin::diff(b(2), b(1)), l.scale(-1));
}
