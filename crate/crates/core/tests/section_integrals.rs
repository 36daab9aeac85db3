use approx::assert_relative_eq;
use piezobeam::{table1, Layup, Material, MaterialKind, Section};
use proptest::prelude::*;

fn reference_layup() -> Layup {
    let db = table1::<f64>();
    Layup::from_materials(&db["PZT-5A"], &db["glass"], 200e-6, 500e-6, 6e-3).unwrap()
}

fn piezo(
    c11: f64,
    c13: f64,
    c33: f64,
    e31: f64,
    e33: f64,
    eps11: f64,
    eps33: f64,
    rho: f64,
) -> Material {
    Material {
        kind: MaterialKind::Piezoelectric,
        c33: Some(c33),
        e31,
        e33,
        eps11,
        eps33,
        ..Material::elastic("p", c11, c13, rho)
    }
}

/// First moment of the modulus about `z`, written out layer by layer.
fn first_moment(l: &Layup, z: f64) -> f64 {
    let (c1, h1, c2, h2) = (l.piezo.cbar11, l.piezo.h, l.substrate.cbar11, l.substrate.h);
    c1 * ((h1 - z).powi(2) - z * z) / 2.0 + c2 * (z * z - (h2 + z).powi(2)) / 2.0
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (f(mid) > 0.0) == (fa > 0.0) {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

#[test]
fn quadrature_matches_closed_form_on_every_field() {
    let layup = reference_layup();
    let exact = layup.section();
    let quad = layup.quadrature_check(1024);
    let scale = exact.a11 * (layup.h1() + layup.h2());
    for ((name, a), (_, b)) in exact.fields().iter().zip(quad.fields()) {
        if *name == "B11" {
            assert!(
                a.abs() <= scale * 1e-12 && b.abs() <= scale * 1e-12,
                "B11 {a:e} {b:e}"
            );
        } else {
            assert_relative_eq!(*a, b, max_relative = 1e-10);
        }
    }
}

#[test]
fn reference_section_values() {
    let s = reference_layup().section();
    assert_relative_eq!(s.z0, -1.91956e-4, max_relative = 1e-5);
    assert_relative_eq!(s.d11, 2.946566, max_relative = 1e-6);
    assert_relative_eq!(s.dbar, 2.964580, max_relative = 1e-6);
    assert_relative_eq!(s.rho0, 2.715, max_relative = 1e-12);
    assert!(s.eta1 < 0.0);
}

#[test]
fn neutral_axis_is_the_zero_of_the_first_moment() {
    let layup = reference_layup();
    let z = bisect(|z| first_moment(&layup, z), -layup.h2(), layup.h1());
    assert_relative_eq!(layup.neutral_axis(), z, max_relative = 1e-12);
}

fn thickness() -> impl Strategy<Value = f64> {
    1e-5..2e-3f64
}

fn layup_strategy() -> impl Strategy<Value = Layup> {
    (
        thickness(),
        thickness(),
        5e10..2e11f64,
        0.1..0.9f64,
        0.5..1.5f64,
        -20.0..-1.0f64,
        5.0..30.0f64,
        1e-9..2e-8f64,
        1e-9..2e-8f64,
        1000.0..9000.0f64,
        1000.0..9000.0f64,
        3e10..3e11f64,
    )
        .prop_map(
            |(h1, h2, c11, frac13, frac33, e31, e33, eps11, eps33, rho1, rho2, c_sub)| {
                let c33 = c11 * frac33;
                let c13 = frac13 * (c11 * c33).sqrt();
                let p = piezo(c11, c13, c33, e31, e33, eps11, eps33, rho1);
                let s = Material::elastic("s", c_sub, 0.3 * c_sub, rho2);
                Layup::from_materials(&p, &s, h1, h2, 1e-2).unwrap()
            },
        )
}

proptest! {
    #[test]
    fn stretching_bending_coupling_vanishes(layup in layup_strategy()) {
        let s = layup.section();
        let scale = s.a11 * (layup.h1() + layup.h2());
        prop_assert!(s.b11.abs() <= scale * 1e-12);
        let z = bisect(|z| first_moment(&layup, z), -layup.h2(), layup.h1());
        prop_assert!((s.z0 - z).abs() <= 1e-12 * (layup.h1() + layup.h2()));
    }

    #[test]
    fn neutral_axis_minimises_bending_stiffness(layup in layup_strategy(), shift in -1.0..1.0f64) {
        // parallel axis: D(z) = D11 + A11 (z - z0)^2
        let s = layup.section();
        let z = s.z0 + shift * layup.h1();
        let (c1, h1, c2, h2) = (layup.piezo.cbar11, layup.h1(), layup.substrate.cbar11, layup.h2());
        let d_about = c1 * ((h1 - z).powi(3) + z.powi(3)) / 3.0 + c2 * ((-z).powi(3) + (h2 + z).powi(3)) / 3.0;
        prop_assert!(d_about >= s.d11 * (1.0 - 1e-12));
        prop_assert!(((d_about - s.d11) - s.a11 * (z - s.z0).powi(2)).abs() <= 1e-9 * d_about);
    }

    #[test]
    fn electric_stiffening_is_nonnegative(layup in layup_strategy()) {
        let s = layup.section();
        prop_assert!(s.electric_stiffening() >= 0.0);
        prop_assert!(s.dbar >= s.d11);
        prop_assert!(s.eta1 <= 0.0);
    }

    #[test]
    fn quadrature_agrees_on_random_layups(layup in layup_strategy()) {
        let exact = layup.section();
        let quad = layup.quadrature_check(64);
        for ((name, a), (_, b)) in exact.fields().iter().zip(quad.fields()) {
            if *name != "B11" {
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(b.abs()), "{name}: {a:e} vs {b:e}");
            }
        }
    }

    #[test]
    fn thickness_scaling(layup in layup_strategy(), t in 0.1..10.0f64) {
        let s = layup.section();
        let mut scaled = layup;
        scaled.piezo.h *= t;
        scaled.substrate.h *= t;
        let r = scaled.section();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-10 * a.abs().max(b.abs());
        prop_assert!(close(r.z0, s.z0 * t));
        prop_assert!(close(r.a11, s.a11 * t));
        prop_assert!(close(r.d11, s.d11 * t.powi(3)));
        prop_assert!(close(r.f, s.f * t.powi(3)));
        prop_assert!(close(r.rho0, s.rho0 * t));
        prop_assert!(close(r.rho2, s.rho2 * t.powi(3)));
        prop_assert!(close(r.eta1, s.eta1 * t * t));
        prop_assert!(close(r.eta2, s.eta2));
    }

    #[test]
    fn reduction_bounds(c11 in 5e10..2e11f64, frac13 in 0.0..0.95f64, frac33 in 0.5..1.5f64,
                        e31 in -20.0..20.0f64, e33 in -30.0..30.0f64, eps in 1e-9..2e-8f64) {
        let c33 = c11 * frac33;
        let c13 = frac13 * (c11 * c33).sqrt();
        let m = piezo(c11, c13, c33, e31, e33, eps, eps, 5000.0);
        let r = m.reduce(1e-4).unwrap();
        prop_assert!(r.cbar11 <= c11 && r.cbar11 > 0.0);
        prop_assert!(r.epsbar33 >= eps);
        prop_assert!((r.ebar31 - (e31 - c13 / c33 * e33)).abs() <= 1e-12 * (e31.abs() + e33.abs()));
    }

    #[test]
    fn reduction_is_covariant_under_unit_scaling(a in 0.1..10.0f64, b in 0.1..10.0f64) {
        // stiffness scaled by a, piezoelectric constants by b, permittivities by b^2/a
        let base = piezo(1.21e11, 7.52e10, 1.11e11, -5.4, 15.8, 8.1e-9, 7.3e-9, 7750.0);
        let scaled = piezo(base.c11 * a, base.c13 * a, 1.11e11 * a, base.e31 * b, base.e33 * b,
                           base.eps11 * b * b / a, base.eps33 * b * b / a, 7750.0);
        let (r0, r1) = (base.reduce(1e-4).unwrap(), scaled.reduce(1e-4).unwrap());
        prop_assert!((r1.cbar11 - a * r0.cbar11).abs() <= 1e-12 * r1.cbar11);
        prop_assert!((r1.ebar31 - b * r0.ebar31).abs() <= 1e-12 * r1.ebar31.abs());
        prop_assert!((r1.epsbar33 - b * b / a * r0.epsbar33).abs() <= 1e-12 * r1.epsbar33);
    }
}

#[test]
fn identical_elastic_layers_put_the_axis_at_mid_thickness() {
    let m = Material::elastic("steel", 2.1e11, 0.0, 7800.0);
    let layup = Layup::from_materials(&m, &m, 3e-4, 7e-4, 1e-2).unwrap();
    let s: Section = layup.section();
    assert_relative_eq!(s.z0, (3e-4 - 7e-4) / 2.0, max_relative = 1e-12);
    // homogeneous rectangle: c h^3 / 12
    assert_relative_eq!(s.d11, 2.1e11 * 1e-3f64.powi(3) / 12.0, max_relative = 1e-12);
    assert_eq!(s.f, 0.0);
    assert_eq!(s.dbar, s.d11);
}
