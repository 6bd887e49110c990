use ccgeo::calc::random::{random_field, random_form, random_polynomial};
use ccgeo::calc::{rat, Point, RatMatrix};
use ccgeo::flows::{flow_point, GaugeKind, GaugeSpec};
use ccgeo::involutivity::{bracket_form, noninvolutive_at};
use ccgeo::metrics::{
    anisotropic_gauge, derived_set, eta_distance, mean_value_point, EtaContext, EtaOptions, PolygonalCurve,
};
use ccgeo::structures::{complement_projections, hormander_step, resolve_structure, Region};
use ccgeo::tangency::{
    box_counting_dimension, contact_deficiency, dyadic_scales, metric_jacobian, SeminormSample, SurfaceGraph,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Invertible 2×2 integer matrix with determinant ±1 or ±2.
fn small_invertible() -> impl Strategy<Value = [i64; 4]> {
    prop::array::uniform4(-2i64..=2).prop_filter("invertible", |m| {
        let d = m[0] * m[3] - m[1] * m[2];
        d != 0
    })
}

fn to_ratmat(m: [i64; 4]) -> RatMatrix {
    RatMatrix::from_rows(&[vec![rat(m[0], 1), rat(m[1], 1)], vec![rat(m[2], 1), rat(m[3], 1)]])
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn bracket_antisymmetry_and_jacobi(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (x, y, z) = (random_field(&mut r, 3, 3, 2), random_field(&mut r, 3, 3, 2), random_field(&mut r, 3, 3, 2));
        let xy = x.bracket(&y).unwrap();
        prop_assert!((&xy + &y.bracket(&x).unwrap()).is_zero());
        let j = &(&x.bracket(&y.bracket(&z).unwrap()).unwrap() + &y.bracket(&z.bracket(&x).unwrap()).unwrap())
            + &z.bracket(&xy).unwrap();
        prop_assert!(j.is_zero());
    }

    #[test]
    fn exterior_derivative_squares_to_zero(seed in any::<u64>(), degree in 0usize..3) {
        let mut r = rng(seed);
        let w = random_form(&mut r, 4, degree, 3, 3);
        prop_assert!(w.exterior_derivative().unwrap().exterior_derivative().unwrap().is_zero());
    }

    #[test]
    fn bracket_is_a_derivation_in_the_weights(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (x, y) = (random_field(&mut r, 3, 2, 2), random_field(&mut r, 3, 2, 2));
        let (f, g) = (random_polynomial(&mut r, 3, 2, 2), random_polynomial(&mut r, 3, 2, 2));
        let res = ccgeo::calc::identities::weighted_commutator_residual(&x, &y, &f, &g).unwrap();
        prop_assert!(res.is_zero());
    }

    #[test]
    fn verdicts_survive_frame_changes(m in small_invertible(), px in -2i64..=2, py in -2i64..=2) {
        let s = resolve_structure("heisenberg1").unwrap();
        let t = s.reparametrize_frame(&to_ratmat(m)).unwrap();
        let p = Point::Exact(vec![rat(px, 1), rat(py, 2), rat(1, 3)]);
        prop_assert_eq!(noninvolutive_at(&s, &p).unwrap().verdict, noninvolutive_at(&t, &p).unwrap().verdict);
        let (a, b) = (bracket_form(&s, &p).unwrap(), bracket_form(&t, &p).unwrap());
        prop_assert_eq!(a.transform(&to_ratmat(m)), b);
        let hs = hormander_step(s.distribution(), &p, 4).unwrap();
        let ht = hormander_step(t.distribution(), &p, 4).unwrap();
        prop_assert_eq!(hs, ht);
    }

    #[test]
    fn deficiency_is_frame_invariant(m in small_invertible(), u in -1.0f64..1.0, v in -1.0f64..1.0) {
        let s = resolve_structure("heisenberg1").unwrap();
        let t = s.reparametrize_frame(&to_ratmat(m)).unwrap();
        for surf in [SurfaceGraph::saddle(), SurfaceGraph::plane()] {
            let a = contact_deficiency(&s, &surf, &[u, v]).unwrap().delta;
            let b = contact_deficiency(&t, &surf, &[u, v]).unwrap().delta;
            prop_assert!((a - b).abs() <= 1e-10, "{} vs {}", a, b);
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }

    #[test]
    fn projection_pair_invariants(x in prop::array::uniform3(-2.0f64..2.0)) {
        for name in ["heisenberg1", "engel"] {
            let s = resolve_structure(name).unwrap();
            let p: Vec<f64> = x.iter().copied().chain(std::iter::repeat(0.3)).take(s.n()).collect();
            let pp = complement_projections(&s, &p).unwrap();
            let n = s.n();
            let id = nalgebra::DMatrix::<f64>::identity(n, n);
            prop_assert!((&pp.pv + &pp.pw - &id).norm() < 1e-10);
            prop_assert!((&pp.pv * &pp.pv - &pp.pv).norm() < 1e-10);
            prop_assert!((&pp.pv * &pp.pw).norm() < 1e-10);
            let f = s.frame_matrix(&p);
            for j in 0..s.k() {
                prop_assert!((&pp.pv * f.column(j) - f.column(j)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn flow_semigroup(a in 0.0f64..0.5, b in 0.0f64..0.5, u in prop::array::uniform2(-1.0f64..1.0)) {
        let s = resolve_structure("engel").unwrap();
        let x = [0.1, -0.2, 0.3, 0.0];
        let whole = flow_point(&s, &x, &u, a + b, 1e-3).unwrap().point;
        let half = flow_point(&s, &x, &u, a, 1e-3).unwrap().point;
        let two = flow_point(&s, &half, &u, b, 1e-3).unwrap().point;
        for (p, q) in whole.iter().zip(&two) {
            prop_assert!((p - q).abs() < 1e-9);
        }
    }

    #[test]
    fn gauges_are_monotone(rho in 0.01f64..1.0, lambda in 0.0f64..1.0, t in prop::array::uniform3(-1.0f64..1.0)) {
        let g = GaugeSpec::new(GaugeKind::Box(rho), vec![1, 1, 2]).unwrap();
        let bigger = GaugeSpec::new(GaugeKind::Box(rho * 1.5), vec![1, 1, 2]).unwrap();
        if g.contains(&t) {
            prop_assert!(bigger.contains(&t));
            let scaled: Vec<f64> = t.iter().map(|v| v * lambda).collect();
            prop_assert!(g.contains(&scaled));
        }
        let s = resolve_structure("heisenberg1").unwrap();
        let y = [t[0] * 0.1, t[1] * 0.1, t[2] * 0.1];
        let g1 = anisotropic_gauge(&s, &[0.0; 3], &y, 1.0).unwrap();
        let g2 = anisotropic_gauge(&s, &[0.0; 3], &y, 2.0).unwrap();
        // |w|^{1/η} grows with η below 1
        prop_assert!(g1 <= g2 + 1e-15);
    }

    #[test]
    fn mean_value_on_closed_polygons(
        v in prop::collection::vec(prop::array::uniform2(-1.0f64..1.0), 2..6),
        w in prop::array::uniform2(-1.0f64..1.0),
        st in prop::array::uniform2(0.0f64..1.0),
    ) {
        let mut verts: Vec<Vec<f64>> = v.iter().map(|p| p.to_vec()).collect();
        verts.push(verts[0].clone());
        let m = verts.len();
        let times: Vec<f64> = (0..m).map(|i| i as f64 / (m - 1) as f64).collect();
        let c = PolygonalCurve::new(verts.clone(), times.clone()).unwrap();
        let (a, b) = (c.point_at(st[0]), c.point_at(st[1]));
        let gap = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        prop_assert!(gap <= c.lipschitz() * (st[0] - st[1]).abs() + 1e-12);
        let t = mean_value_point(&c, &w);
        prop_assert!(t.is_some());
        let scalar: Vec<Vec<f64>> = verts.iter().map(|p| vec![p[0] * w[0] + p[1] * w[1]]).collect();
        let sc = PolygonalCurve::new(scalar, times).unwrap();
        prop_assert!(derived_set(&sc, t.unwrap()).unwrap().contains(&[0.0], 1e-12));
    }

    #[test]
    fn jacobian_is_homogeneous(c in 0.1f64..5.0, a in 0.2f64..3.0) {
        let s = SeminormSample::from_fn(2, 128, |u| ((a * u[0]).powi(2) + u[1].powi(2)).sqrt()).unwrap();
        let j = metric_jacobian(&s, 2).unwrap();
        prop_assert!((j - a).abs() < 1e-9);
        prop_assert!((metric_jacobian(&s.scaled(c), 2).unwrap() - c * c * j).abs() < 1e-9 * c * c * j);
    }

    #[test]
    fn box_dimension_is_translation_invariant(i in -192i32..192, j in -192i32..192) {
        // dyadic shifts keep every coordinate exact
        let (dx, dy) = (i as f64 / 64.0, j as f64 / 64.0);
        let line: Vec<Vec<f64>> = (0..129).map(|i| vec![i as f64 / 128.0, 0.5 * i as f64 / 128.0]).collect();
        let moved: Vec<Vec<f64>> = line.iter().map(|p| vec![p[0] + dx, p[1] + dy]).collect();
        let s = dyadic_scales(1.0, 4);
        let a = box_counting_dimension(&line, &s).unwrap().dimension;
        let b = box_counting_dimension(&moved, &s).unwrap().dimension;
        prop_assert!((a - b).abs() < 1e-12, "{} {}", a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn eta_distance_metric_axioms(x in prop::array::uniform3(-0.2f64..0.2), y in prop::array::uniform3(-0.2f64..0.2)) {
        let s = resolve_structure("heisenberg1").unwrap();
        let ctx = EtaContext::new(&s, 1.5, 0.55, Region { center: vec![0.0; 3], radius: 4.0 }).unwrap();
        let o = EtaOptions { budget: 3, restarts: 2, ..Default::default() };
        let same = eta_distance(&ctx, &x, &x, &o).unwrap();
        prop_assert_eq!(same.upper, 0.0);
        let a = eta_distance(&ctx, &x, &y, &o).unwrap();
        let b = eta_distance(&ctx, &y, &x, &o).unwrap();
        prop_assert!(a.lower <= a.upper);
        if x != y {
            prop_assert!(a.lower > 0.0);
        }
        // the true values coincide, so the brackets overlap
        prop_assert!(a.lower <= b.upper + 1e-12 && b.lower <= a.upper + 1e-12);
    }

}
