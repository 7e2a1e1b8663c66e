use std::f64::consts::TAU;

use proptest::prelude::*;

use ptorsion::diagnostics::traces::{BoundaryTraces, TraceSample};
use ptorsion::diagnostics::{bound_ii, bound_iii, newton_gap, newton_gap2, sbt_tolerances, stability_bound};
use ptorsion::geometry::DomainSpec;
use ptorsion::pipeline::{run, RunConfig};
use ptorsion::Error;

use nalgebra::{DMatrix, Matrix2};

fn report(spec: DomainSpec, p: f64, h: f64) -> ptorsion::diagnostics::DeficitReport {
    run(&RunConfig::new(spec, p, h)).unwrap().report
}

#[test]
fn p_function_is_flat_on_the_disk() {
    let r = report(DomainSpec::Disk { r: 1.0 }, 2.0, 0.05);
    let pf = r.p_function;
    assert!((pf.max - 0.25).abs() < 0.005 && (pf.min - 0.25).abs() < 0.005, "{pf:?}");
    assert!((pf.max - pf.min) / pf.max < 0.02);
}

#[test]
fn p_function_peaks_on_the_ellipse_boundary() {
    for p in [1.5, 2.0] {
        let r = report(DomainSpec::Ellipse { a: 2.0, b: 1.0 }, p, 0.05);
        assert!(r.p_function.argmax_on_boundary, "p = {p}: {:?}", r.p_function);
        assert!(r.p_function.max > r.p_function.interior_max);
    }
}

#[test]
fn p_nu_changes_sign_on_the_ellipse() {
    // P = 0.4 - 0.06 x^2 + 0.24 y^2 for p = 2, so P_nu = -0.24 at (2,0)
    // and 0.48 at (0,1).
    let r = report(DomainSpec::Ellipse { a: 2.0, b: 1.0 }, 2.0, 0.05);
    assert!((r.p_function.p_nu_min + 0.24).abs() < 0.03, "{:?}", r.p_function);
    assert!((r.p_function.p_nu_max - 0.48).abs() < 0.03, "{:?}", r.p_function);
}

#[test]
fn trace_residual_is_small_and_shrinks_for_p_below_two() {
    let coarse = report(DomainSpec::Ellipse { a: 2.0, b: 1.0 }, 1.5, 0.1);
    let fine = report(DomainSpec::Ellipse { a: 2.0, b: 1.0 }, 1.5, 0.05);
    assert!(fine.trace_equation_residual_max <= 0.15, "{}", fine.trace_equation_residual_max);
    assert!(fine.trace_equation_residual_max < coarse.trace_equation_residual_max);
    assert!(fine.trace_equation_residual_mean < coarse.trace_equation_residual_mean);
}

#[test]
fn trace_residual_at_p_two_sits_at_a_floor() {
    // The polygonal boundary leaves an O(1) error in recovered second
    // derivatives at boundary vertices, so the residual stops shrinking
    // at about one percent.
    let fine = report(DomainSpec::Ellipse { a: 2.0, b: 1.0 }, 2.0, 0.05);
    assert!(fine.trace_equation_residual_max <= 0.05, "{}", fine.trace_equation_residual_max);
    assert!(fine.trace_equation_residual_mean <= 0.015, "{}", fine.trace_equation_residual_mean);
}

#[test]
fn disk_traces_match_the_oracle() {
    let r = report(DomainSpec::Disk { r: 1.0 }, 2.0, 0.05);
    assert!((r.boundary_gradient.mean - 0.5).abs() < 0.005);
    assert!(r.boundary_gradient.std < 0.005);
}

#[test]
fn sbt_deviations_grow_with_eccentricity() {
    let devs: Vec<[f64; 5]> = [0.0, 0.2, 0.4, 0.6]
        .into_iter()
        .map(|e| {
            let r = report(DomainSpec::ellipse_with_area(TAU, e).unwrap(), 1.5, 0.05);
            *r.sbt.deviations().unwrap()
        })
        .map(|d| d.as_array())
        .collect();
    for k in 0..5 {
        assert!(devs.windows(2).all(|w| w[1][k] >= w[0][k]), "statement {k}: {devs:?}");
    }
    let tol = sbt_tolerances(ptorsion::diagnostics::default_tol_deficit(0.05)).as_array();
    // At e = 0 (a disk of radius sqrt 2) the geometric statements and the
    // deficit hold to tolerance; the trace-based b and e sit just above it.
    for k in [0, 2, 3] {
        assert!(devs[0][k] <= tol[k], "statement {k}: {:?}", devs[0]);
    }
    assert!(devs[0][1] <= 2.0 * tol[1] && devs[0][4] <= 2.0 * tol[4], "{:?}", devs[0]);
    assert!(devs[3].iter().zip(&tol).all(|(d, t)| d > t), "{:?}", devs[3]);
}

#[test]
fn annulus_refuses_the_sbt_block_only() {
    let r = report(DomainSpec::Annulus { r1: 1.0, r2: 2.0 }, 2.0, 0.1);
    assert!(r.sbt.deviations().is_none());
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["sbt"], "unsupported");
    assert!(json["I_p"].as_f64().unwrap().is_finite());
}

#[test]
fn report_has_the_documented_fields() {
    let r = report(DomainSpec::Disk { r: 1.0 }, 1.5, 0.1);
    let json = serde_json::to_value(&r).unwrap();
    for key in [
        "p",
        "domain",
        "h",
        "I_p",
        "excluded_area",
        "identity",
        "bound_ii",
        "bound_iii",
        "stability_bound",
        "H0",
        "R0",
        "H_L1_dev",
        "grad_bounds",
        "sbt",
        "status",
    ] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    for key in ["lhs", "rhs", "rel_gap"] {
        assert!(json["identity"].get(key).is_some());
    }
    for key in ["lower", "upper", "min_observed", "max_observed"] {
        assert!(json["grad_bounds"].get(key).is_some());
    }
    for key in ["dev_a", "dev_b", "dev_c", "dev_d", "dev_e"] {
        assert!(json["sbt"].get(key).is_some());
    }
}

#[test]
fn invalid_delta_crit_is_rejected() {
    let mut cfg = RunConfig::new(DomainSpec::Disk { r: 1.0 }, 2.0, 0.2);
    cfg.delta_crit = 0.0;
    assert!(matches!(run(&cfg), Err(Error::InvalidParameter(_))));
}

#[test]
fn stability_bound_vanishes_on_the_disk() {
    assert_eq!(stability_bound(1.5, 2.0, 1.0, 0.0), 0.0);
}

fn traces(samples: &[(f64, f64, f64)]) -> BoundaryTraces {
    BoundaryTraces {
        samples: samples
            .iter()
            .enumerate()
            .map(|(i, &(u_nu, h, weight))| TraceSample {
                edge: i,
                point: [0.0, 0.0],
                u_nu,
                u_nunu: 0.0,
                laplacian: 0.0,
                h,
                weight,
                u_nu_triangle: u_nu,
            })
            .collect(),
    }
}

proptest! {
    #[test]
    fn bound_ii_is_linear_in_the_weights(
        rows in prop::collection::vec((-2.0f64..-0.01, 0.1f64..3.0, 0.001f64..0.1), 1..40),
        p in 1.05f64..2.0,
    ) {
        let once = traces(&rows);
        let doubled: Vec<_> = rows.iter().map(|&(u, h, w)| (u, h, 2.0 * w)).collect();
        let twice = traces(&doubled);
        let (a, b) = (bound_ii(&once, p), bound_ii(&twice, p));
        prop_assert!((b - 2.0 * a).abs() <= 1e-12 * a.abs().max(1.0));
        let (c, d) = (bound_iii(&once, 1.0, p), bound_iii(&twice, 1.0, p));
        prop_assert!((d - 2.0 * c).abs() <= 1e-12 * c.abs().max(1.0));
    }

    #[test]
    fn newton_gap_is_nonnegative_and_matches_the_definition(
        entries in prop::collection::vec(-1e3f64..1e3, 9),
    ) {
        let a = DMatrix::from_row_slice(3, 3, &entries);
        let g = newton_gap(&a);
        let direct = a.norm_squared() - a.trace().powi(2) / 3.0;
        prop_assert!(g >= 0.0);
        prop_assert!((g - direct).abs() <= 1e-10 * a.norm_squared().max(1.0));
    }

    #[test]
    fn newton_gap2_agrees_with_the_general_form(
        a in -1e3f64..1e3, b in -1e3f64..1e3, c in -1e3f64..1e3, d in -1e3f64..1e3,
    ) {
        let m = Matrix2::new(a, b, c, d);
        let g = newton_gap(&DMatrix::from_row_slice(2, 2, &[a, b, c, d]));
        prop_assert!((newton_gap2(&m) - g).abs() <= 1e-12 * m.norm_squared().max(1.0));
    }

    #[test]
    fn newton_gap_vanishes_on_scalar_matrices(k in -1e6f64..1e6, n in 1usize..7) {
        let a = DMatrix::<f64>::identity(n, n) * k;
        prop_assert!(newton_gap(&a) <= 1e-12 * a.norm_squared().max(1.0));
    }
}
