use std::sync::Arc;

use blm::dependence::{tp2_check, tp_order_check, Kernel, DEFAULT_TRIALS, DETERMINANT_TOL};
use blm::moments::{exy, mgf, product_moment};
use blm::orders::{compare_blm, slepian_check, univariate_order, Holds, Relation};
use blm::quadrature::{integrate_quadrant, QuadOptions};
use blm::simulate::{estimate, sample_blm, sample_gmo, Functional, RngStream};
use blm::univariate::{Exponential, Lomax, Weibull};
use blm::{
    block_basu, freund, from_hazards, generalized_marshall_olkin, make_blm, marshall_olkin, BlmDistribution,
    FreundParams, Grid, MarginalRef, ModelSpec, MoParams, Side, ValidationMode,
};
use proptest::prelude::*;

fn rate() -> impl Strategy<Value = f64> {
    0.2f64..3.0
}

fn mo(l1: f64, l2: f64, l12: f64) -> BlmDistribution {
    marshall_olkin(MoParams::new(l1, l2, l12).unwrap()).unwrap()
}

/// One of the closed-form families, chosen by `kind`.
fn family(kind: u8, a: f64, b: f64, c: f64, d: f64) -> BlmDistribution {
    match kind % 3 {
        0 => mo(a, b, c),
        1 => block_basu(a, b, c).unwrap(),
        _ => freund(FreundParams::new(a, b, c, d).unwrap()).unwrap(),
    }
}

fn exp_ref(rate: f64) -> MarginalRef {
    Arc::new(Exponential::new(rate).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lack_of_memory_identity(kind in 0u8..3, a in rate(), b in rate(), c in rate(), d in rate(),
                               x in 0.0f64..3.0, y in 0.0f64..3.0, t in 0.0f64..2.0) {
        let law = family(kind, a, b, c, d);
        let lhs = law.survival(x + t, y + t);
        let rhs = law.survival(x, y) * (-law.theta() * t).exp();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300), "{lhs} vs {rhs}");
    }

    #[test]
    fn difference_law_sums_to_one(kind in 0u8..3, a in rate(), b in rate(), c in rate(), d in rate()) {
        let law = family(kind, a, b, c, d);
        let total = law.diff_tail(0.0, Side::XMinusY).unwrap()
            + law.diff_tail(0.0, Side::YMinusX).unwrap()
            + law.atom_mass();
        prop_assert!((total - 1.0).abs() < 1e-12, "{total}");
    }

    #[test]
    fn survival_monotone_with_margins(kind in 0u8..3, a in rate(), b in rate(), c in rate(), d in rate(),
                                      x in 0.0f64..3.0, y in 0.0f64..3.0, dx in 0.0f64..1.0, dy in 0.0f64..1.0) {
        let law = family(kind, a, b, c, d);
        let s = law.survival(x, y);
        prop_assert!(law.survival(x + dx, y) <= s + 1e-15);
        prop_assert!(law.survival(x, y + dy) <= s + 1e-15);
        prop_assert!((law.survival(x, 0.0) - law.marginal_x().survival(x)).abs() < 1e-14);
        prop_assert!((law.survival(0.0, y) - law.marginal_y().survival(y)).abs() < 1e-14);
    }

    #[test]
    fn shock_model_equals_generic_construction(a in rate(), b in rate(), c in rate(),
                                               x in 0.0f64..4.0, y in 0.0f64..4.0) {
        let direct = mo(a, b, c);
        let generic = make_blm(exp_ref(a + c), exp_ref(b + c), a + b + c, ValidationMode::Strict).unwrap();
        let shocks = generalized_marshall_olkin(exp_ref(a), exp_ref(b), exp_ref(c)).unwrap();
        let s = direct.survival(x, y);
        prop_assert!((s - generic.survival(x, y)).abs() <= 1e-14);
        prop_assert!((s - shocks.survival(x, y)).abs() <= 1e-14);
        let dec = direct.decompose();
        prop_assert!((dec.weight_s - c / (a + b + c)).abs() < 1e-15);
        prop_assert!((dec.weight_ac + dec.weight_s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn moments_symmetric_for_equal_margins(a in rate(), c in rate(), i in 1u32..5, j in 1u32..5) {
        let law = mo(a, a, c);
        let (u, v) = (product_moment(&law, i, j).unwrap(), product_moment(&law, j, i).unwrap());
        prop_assert!((u - v).abs() <= 1e-14 * u.abs());
    }

    #[test]
    fn exy_bound(kind in 0u8..3, a in rate(), b in rate(), c in rate(), d in rate()) {
        let law = family(kind, a, b, c, d);
        let v = exy(&law).unwrap();
        let (ex, ey) = (law.marginal_x().mean().unwrap(), law.marginal_y().mean().unwrap());
        let theta = law.theta();
        prop_assert!(v >= 1.0 / (theta * theta) * (1.0 - 1e-12));
        prop_assert!(v <= (ex + ey).powi(2) * (1.0 + 1e-12));
    }

    #[test]
    fn mgf_diverges_at_pole(a in rate(), b in rate(), c in rate()) {
        // exponential margins with rates above θ/2 keep the ray s = t inside both
        // marginal domains up to the joint pole s + t = θ
        let law = make_blm(exp_ref(a + b + c), exp_ref(a + b + c), a + b + c, ValidationMode::Permissive).unwrap();
        let theta = law.theta();
        let mut last = 1.0;
        for k in 1..8 {
            let h = 0.5 * theta * (1.0 - 10f64.powi(-k));
            let v = mgf(&law, h, h).unwrap();
            prop_assert!(v > last);
            last = v;
        }
        prop_assert!(last > 1e5);
        prop_assert!(mgf(&law, 0.5 * theta, 0.5 * theta).is_err());
    }

    #[test]
    fn lr_implies_weaker_orders(a in 0.3f64..3.0, b in 0.3f64..3.0, shape in 0.5f64..3.0) {
        let grid: Vec<f64> = (1..40).map(|i| i as f64 * 0.1).collect();
        let pairs: [(MarginalRef, MarginalRef); 2] = [
            (exp_ref(a), exp_ref(b)),
            (Arc::new(Weibull::new(shape, a).unwrap()), Arc::new(Weibull::new(shape, b).unwrap())),
        ];
        for (f, g) in pairs {
            let lr = univariate_order(&*f, &*g, Relation::Lr, &grid).unwrap();
            if lr.holds == Holds::Yes {
                for r in [Relation::St, Relation::Hr, Relation::Rh] {
                    let v = univariate_order(&*f, &*g, r, &grid).unwrap();
                    prop_assert!(v.holds != Holds::No, "{:?} fails where lr holds", r);
                }
            }
        }
    }

    #[test]
    fn concordance_tracks_theta(l12a in 0.05f64..0.95, l12b in 0.05f64..0.95) {
        let (d1, d2) = (mo(1.0 - l12a, 1.0 - l12a, l12a), mo(1.0 - l12b, 1.0 - l12b, l12b));
        let g = Grid::for_rate(2.0, 12).unwrap();
        let v = compare_blm(&d1, &d2, Relation::Concordance, &g).unwrap();
        if (l12a - l12b).abs() > 1e-3 {
            prop_assert_eq!(v.holds == Holds::Yes, d1.theta() >= d2.theta());
        }
        let s = slepian_check(&d1, &d2, &g).unwrap();
        prop_assert!(s.holds != Holds::No, "{:?}", s);
    }

    #[test]
    fn lt_order_from_marginal_lt_order(a in rate(), b in rate(), c in rate(), da in 0.0f64..1.0, db in 0.0f64..1.0) {
        // same θ, margins Exp(λ) with larger rates first: L₁ ≥ L₂ pointwise
        let theta = a + b + c;
        let (fx1, fy1) = (a + c + da * b, b + c + db * a);
        let d1 = make_blm(exp_ref(fx1), exp_ref(fy1), theta, ValidationMode::Strict).unwrap();
        let d2 = make_blm(exp_ref(a + c), exp_ref(b + c), theta, ValidationMode::Strict).unwrap();
        let g = Grid::for_rate(theta, 8).unwrap();
        let v = compare_blm(&d1, &d2, Relation::Lt, &g).unwrap();
        prop_assert!(v.holds != Holds::No, "{:?}", v);
    }

    #[test]
    fn positive_scaling_keeps_tp2(a in rate(), b in rate(), c in rate(), p in 0.1f64..2.0, q in 0.1f64..2.0) {
        let law = mo(a, b, c);
        let g = Grid::for_rate(law.theta(), 12).unwrap();
        let k = Kernel::survival(&law);
        let base = tp2_check(&k, &g, DETERMINANT_TOL).unwrap();
        let scaled = tp2_check(&k.scaled(move |x| (p * x).exp(), move |y| 1.0 + q * y), &g, DETERMINANT_TOL).unwrap();
        prop_assert_eq!(base.verdict, scaled.verdict);
    }

    #[test]
    fn spec_round_trip(kind in 0u8..3, a in rate(), b in rate(), c in rate(), d in rate(),
                       x in 0.0f64..3.0, y in 0.0f64..3.0) {
        let law = family(kind, a, b, c, d);
        let spec = ModelSpec::from_blm(&law).unwrap();
        let back = ModelSpec::from_json(&spec.to_json()).unwrap().build(ValidationMode::Strict).unwrap();
        prop_assert!((back.survival(x, y) - law.survival(x, y)).abs() <= 1e-14);
    }
}

#[test]
fn density_mass_is_one_minus_atom() {
    let laws = [
        mo(1.0, 2.0, 0.5),
        block_basu(1.0, 1.0, 1.0).unwrap(),
        freund(FreundParams::new(1.5, 1.5, 2.0, 2.0).unwrap()).unwrap(),
    ];
    for law in laws {
        let theta = law.theta();
        let q = integrate_quadrant(
            |u, v| law.density(u / theta, v / theta).unwrap_or(0.0) / (theta * theta),
            QuadOptions::with_tolerance(1e-12, 1e-9),
        )
        .unwrap();
        assert!((q.value - (1.0 - law.atom_mass())).abs() < 1e-6, "{}: {}", law.label(), q.value);
    }
}

#[test]
fn density_tp_implies_distribution_tp() {
    let laws = [
        block_basu(1.5, 1.5, 0.7).unwrap(),
        freund(FreundParams::new(1.0, 1.0, 2.5, 2.5).unwrap()).unwrap(),
    ];
    for law in laws {
        let g = Grid::for_rate(law.theta(), 14).unwrap();
        for r in 2..=4 {
            if tp_order_check(&Kernel::density(&law), &g, r, DETERMINANT_TOL, DEFAULT_TRIALS).unwrap().passed() {
                for k in [Kernel::cdf(&law), Kernel::survival(&law)] {
                    let rep = tp_order_check(&k, &g, r, DETERMINANT_TOL, DEFAULT_TRIALS).unwrap();
                    assert!(rep.passed(), "{} TP{r}: {:?}", k.label(), rep.witness);
                }
            }
        }
    }
}

#[test]
fn shock_model_with_general_shocks_is_tp4() {
    let shocks: [[MarginalRef; 3]; 3] = [
        [Arc::new(Weibull::new(2.0, 1.0).unwrap()), exp_ref(1.0), Arc::new(Lomax::new(2.0, 1.0).unwrap())],
        [Arc::new(Lomax::new(3.0, 2.0).unwrap()), Arc::new(Weibull::new(0.7, 1.5).unwrap()), exp_ref(0.5)],
        [exp_ref(2.0), exp_ref(0.3), Arc::new(Weibull::new(1.5, 0.8).unwrap())],
    ];
    let g = Grid::geometric(0.05, 4.0, 14).unwrap();
    for [a, b, c] in shocks {
        let d = generalized_marshall_olkin(a, b, c).unwrap();
        let rep = tp_order_check(&Kernel::gmo_survival(&d), &g, 4, DETERMINANT_TOL, DEFAULT_TRIALS).unwrap();
        assert!(rep.passed(), "{}: {:?}", d.label(), rep.witness);
    }
}

fn hazard_laws() -> Vec<BlmDistribution> {
    vec![
        from_hazards(Arc::new(|x: f64| 1.0 / (1.0 + x)), Arc::new(|x: f64| 1.0 / (1.0 + x)), 2.0).unwrap(),
        from_hazards(Arc::new(|x: f64| 1.0 + (-x).exp()), Arc::new(|x: f64| 1.0 + (-x).exp()), 3.0).unwrap(),
    ]
}

#[test]
fn sampler_survival_matches_closed_form() {
    let mut laws = vec![
        mo(1.0, 2.0, 0.5),
        block_basu(1.0, 1.0, 1.0).unwrap(),
        freund(FreundParams::new(1.5, 1.5, 2.0, 2.0).unwrap()).unwrap(),
    ];
    laws.extend(hazard_laws());
    for (i, law) in laws.iter().enumerate() {
        let batch = sample_blm(law, 100_000, &mut RngStream::new(78, i as u64)).unwrap();
        let theta = law.theta();
        for a in 0..5 {
            for b in 0..5 {
                let (x, y) = (a as f64 * 0.4 / theta, b as f64 * 0.4 / theta);
                let e = estimate(&batch, Functional::Survival { x, y }).unwrap();
                let target = law.survival(x, y);
                let se = e.std_error.max((target * (1.0 - target) / batch.n as f64).sqrt());
                assert!((e.value - target).abs() <= 3.0 * se, "{} at ({x}, {y}): {e:?} vs {target}", law.label());
            }
        }
    }
}

#[test]
fn atom_fractions() {
    for (i, (a, b, c)) in [(1.0, 1.0, 1.0), (0.5, 2.0, 0.3), (2.0, 0.4, 1.7)].into_iter().enumerate() {
        let law = mo(a, b, c);
        let batch = sample_blm(&law, 50_000, &mut RngStream::new(5, i as u64)).unwrap();
        let e = estimate(&batch, Functional::AtomFraction).unwrap();
        assert!(e.within(law.atom_mass(), 3.0), "{e:?} vs {}", law.atom_mass());
    }
    let bb = block_basu(1.0, 2.0, 0.5).unwrap();
    let batch = sample_blm(&bb, 50_000, &mut RngStream::new(5, 9)).unwrap();
    assert_eq!(estimate(&batch, Functional::AtomFraction).unwrap().value, 0.0);
}

#[test]
fn samplers_are_reproducible() {
    let law = block_basu(1.0, 2.0, 0.5).unwrap();
    let a = sample_blm(&law, 1000, &mut RngStream::new(42, 3)).unwrap();
    let b = sample_blm(&law, 1000, &mut RngStream::new(42, 3)).unwrap();
    assert_eq!(a, b);
    let g = generalized_marshall_olkin(exp_ref(1.0), Arc::new(Lomax::new(2.0, 1.0).unwrap()), exp_ref(0.5)).unwrap();
    let a = sample_gmo(&g, 1000, &mut RngStream::new(42, 3)).unwrap();
    let b = sample_gmo(&g, 1000, &mut RngStream::new(42, 3)).unwrap();
    assert_eq!(a.pairs, b.pairs);
}
