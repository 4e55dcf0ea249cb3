//! Worked examples with independently computed expected values.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use conifold_core::conifold_model::{
    check_compatible, cutoff_eta, neck_convergence_check, parametric_connect_sum, presets, CompatCondition, Component,
    ConifoldModel, EndSpec, InterpolationRule, Profile, Terminal,
};
use conifold_core::experiments::{parse_run_file, ExperimentKind, Summary, SweepResult};
use conifold_core::link_spectra::{sphere_multiplicity, Link};
use conifold_core::spectral_laplace::{
    assemble_mode_operator, cone_consistency_residual, harmonic_basis_cone, invertibility_constant,
    kernel_dimension_scan, poincare_constant, restricted_invertibility_compact, weight_crossing_kernel, ClosureWeights,
    CompactOptions, SolverOptions,
};
use conifold_core::weight_calculus::{
    classify_weight_region, conjugate_exponents, exceptional_set, exceptional_weights, index_change, is_fredholm,
    ConifoldKind, EndDesc, EndKind,
};
use conifold_core::weighted_calc::{
    bump_family, embedding_constant_estimate, holder_check, banach_algebra_check, rescaling_invariance_check,
    weighted_ck_norm, weighted_sobolev_norm, BetaChoice, FamilyOptions, GridOptions, Mode, ModeFunction, RadialGrid,
    WeightSpec,
};
use conifold_core::ConifoldError;

fn s2() -> Link {
    Link::unit_sphere(2).unwrap()
}

fn s3() -> Link {
    Link::unit_sphere(3).unwrap()
}

fn binom(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Harmonic polynomials of degree n in d+1 variables: all polynomials minus |x|^2 times degree n-2.
fn harmonic_count(n: u64, d: u64) -> u64 {
    let all = |k: u64| binom(k + d, d);
    all(n) - if n >= 2 { all(n - 2) } else { 0 }
}

/// Roots of g^2 + (m-2) g - e by the textbook formula.
fn quadratic_roots(m: usize, e: f64) -> (f64, f64) {
    let b = m as f64 - 2.0;
    let d = (b * b + 4.0 * e).sqrt();
    ((-b + d) / 2.0, (-b - d) / 2.0)
}

fn grid_for(model: &ConifoldModel, per_region: usize) -> RadialGrid {
    RadialGrid::for_component(&model.components()[0], &GridOptions { per_region, ..GridOptions::default() }).unwrap()
}

fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

// ---------------------------------------------------------------- link spectra

#[test]
fn sphere_spectra_match_harmonic_polynomial_counts() {
    let got = s2().eigenvalues_below(7.0);
    let want: Vec<(f64, u64)> = (0..3).map(|n| ((n * (n + 1)) as f64, harmonic_count(n, 2))).collect();
    assert_eq!(got, want);
    assert_eq!(got, vec![(0.0, 1), (2.0, 3), (6.0, 5)]);

    let got = s3().eigenvalues_below(3.5);
    assert_eq!(got, vec![(0.0, (0u64 + 1).pow(2)), (3.0, (1u64 + 1).pow(2))]);
    for n in 0..6u64 {
        assert_eq!(s3().eigenvalues_below(50.0)[n as usize].0, (n * (n + 2)) as f64);
    }
}

#[test]
fn any_link_below_zero_has_only_constants() {
    for l in [s2(), s3(), Link::flat_torus(vec![1.0, 2.0]).unwrap()] {
        assert_eq!(l.eigenvalues_below(0.0), vec![(0.0, 1)]);
    }
}

#[test]
fn sphere_multiplicity_examples() {
    assert_eq!(sphere_multiplicity(1, 2), 3);
    assert_eq!(sphere_multiplicity(2, 3), 9);
    for d in 2..8 {
        assert_eq!(sphere_multiplicity(0, d), 1);
        for n in 0..10 {
            assert_eq!(sphere_multiplicity(n, d), harmonic_count(n, d));
        }
    }
}

#[test]
fn custom_spectrum_is_ingested_verbatim() {
    let l = Link::from_csv_str("e,mult\n0,1\n2,3\n", "inline", 2, None).unwrap();
    assert_eq!(l.eigenvalues_below(100.0), vec![(0.0, 1), (2.0, 3)]);
}

// ---------------------------------------------------------------- weight calculus

fn pairs(ws: &[conifold_core::weight_calculus::ExceptionalWeight]) -> Vec<(f64, u64)> {
    ws.iter().map(|w| (w.gamma, w.mult)).collect()
}

#[test]
fn exceptional_weights_of_s2_cone() {
    let got = pairs(&exceptional_weights(&s2(), 3, (-4.0, 3.0)).unwrap());
    let mut want = Vec::new();
    for n in 0..6u64 {
        let (gp, gm) = quadratic_roots(3, (n * (n + 1)) as f64);
        for g in [gm, gp] {
            if (-4.0..=3.0).contains(&g) {
                want.push((g, harmonic_count(n, 2)));
            }
        }
    }
    want.sort_by(|a, b| a.0.total_cmp(&b.0));
    assert_eq!(got.len(), want.len());
    for (a, b) in got.iter().zip(&want) {
        assert_relative_eq!(a.0, b.0, epsilon = 1e-12);
        assert_eq!(a.1, b.1);
    }
    let inner: Vec<(f64, u64)> = got.iter().copied().filter(|p| p.0 > -3.5 && p.0 < 2.5).collect();
    assert_eq!(inner, vec![(-3.0, 5), (-2.0, 3), (-1.0, 1), (0.0, 1), (1.0, 3), (2.0, 5)]);
}

#[test]
fn constants_give_zero_and_two_minus_m() {
    for (link, m) in [(s2(), 3), (s3(), 4), (Link::unit_sphere(5).unwrap(), 6)] {
        let ws = pairs(&exceptional_weights(&link, m, (2.0 - m as f64 - 0.5, 0.5)).unwrap());
        assert!(ws.contains(&(0.0, 1)));
        assert!(ws.contains(&(2.0 - m as f64, 1)));
    }
}

#[test]
fn exceptional_weights_of_s3_cone_on_unit_interval() {
    let ws = pairs(&exceptional_weights(&s3(), 4, (0.0, 2.0)).unwrap());
    let inside: Vec<(f64, u64)> = ws.iter().copied().filter(|p| p.0 < 2.0).collect();
    assert_eq!(inside, vec![(0.0, 1), (1.0, 4)]);
    // The closed interval also reaches e = 8: gamma = 2 with the 9 quadratic harmonics.
    assert_eq!(ws.last(), Some(&(2.0, harmonic_count(2, 3))));
}

#[test]
fn fredholm_examples() {
    let exc = vec![exceptional_set(&s2(), 3, (-10.0, 10.0), 0).unwrap()];
    assert!(is_fredholm(&[-0.5], &exc, 1e-9).unwrap());
    assert!(!is_fredholm(&[0.0], &exc, 1e-9).unwrap());
    assert!(!is_fredholm(&[1.0 - 1e-12], &exc, 1e-9).unwrap());
}

#[test]
fn index_change_examples() {
    let ac = [EndDesc { kind: EndKind::AC, link: s2() }];
    let cs = [EndDesc { kind: EndKind::CS, link: s2() }];
    // Crossing gamma = 0 (mult 1) and gamma = 1 (mult 3).
    assert_eq!(index_change(&[-0.5], &[1.5], &ac, 3, 1e-9).unwrap(), 1 + 3);
    assert_eq!(index_change(&[0.7], &[0.7], &ac, 3, 1e-9).unwrap(), 0);
    assert_eq!(index_change(&[0.5], &[-0.5], &cs, 3, 1e-9).unwrap(), 1);
}

#[test]
fn region_classification_examples() {
    let f = classify_weight_region(ConifoldKind::AC, &[-0.5], &s2(), 3, 1e-9).unwrap();
    assert_eq!((f.injective, f.surjective, f.index, f.kernel_dim), (Some(true), Some(true), Some(0), Some(0)));

    let f = classify_weight_region(ConifoldKind::Compact, &[], &s2(), 3, 1e-9).unwrap();
    assert_eq!((f.kernel_dim, f.index), (Some(1), Some(0)));

    let f = classify_weight_region(ConifoldKind::AC, &[1.5], &s2(), 3, 1e-9).unwrap();
    let ac = [EndDesc { kind: EndKind::AC, link: s2() }];
    let from_a = index_change(&[-0.5], &[1.5], &ac, 3, 1e-9).unwrap();
    assert_eq!(f.surjective, Some(true));
    assert_eq!(f.kernel_dim, Some(from_a));
    assert_eq!(f.kernel_dim, Some(4));
}

#[test]
fn conjugate_exponent_examples() {
    let c = conjugate_exponents(2.0, 4, 1).unwrap();
    assert_eq!((c.p_prime, c.p_star), (Some(2.0), Some(4.0)));
    assert_eq!(conjugate_exponents(1.0, 3, 2).unwrap().p_star_l, Some(3.0));
    assert_eq!(conjugate_exponents(2.0, 4, 2).unwrap().p_star_l, None);
}

// ---------------------------------------------------------------- conifold models

fn cone_host(beta: f64) -> ConifoldModel {
    presets::exact_cone(beta, 2.0, 2.0, true).unwrap()
}

#[test]
fn compatibility_examples() {
    let partner = |beta: f64, r: f64| presets::hyperboloid(1.0, beta, r, (false, true)).unwrap();
    assert!(check_compatible(&cone_host(-0.5), &partner(-0.5, 1.0)).pass);

    let rep = check_compatible(&cone_host(-0.5), &partner(-0.4, 1.0));
    assert_eq!(rep.failures(), vec![CompatCondition::WeightsMatch]);

    let rep = check_compatible(&cone_host(-0.5), &partner(-0.5, 3.0));
    assert_eq!(rep.failures(), vec![CompatCondition::RadiusOrdering]);
}

#[test]
fn dumbbell_member_has_expected_neck_and_band() {
    let member = presets::dumbbell(-0.5).unwrap().member(0.01).unwrap();
    let g = member.components()[0].glue().unwrap();
    // Partner radius 1, host epsilon 2, tau 1/2.
    assert_relative_eq!(g.neck().0, 0.01 * 1.0, epsilon = 1e-15);
    assert_relative_eq!(g.neck().1, 2.0);
    assert_relative_eq!(g.band().0, 0.1, epsilon = 1e-15);
    assert_relative_eq!(g.band().1, 0.2, epsilon = 1e-15);
}

#[test]
fn gluing_rejects_neck_past_the_band() {
    let host = presets::exact_cone(-0.5, 5.0, 6.0, true).unwrap();
    let partner = presets::hyperboloid(1.0, -0.5, 4.0, (false, true)).unwrap();
    // t R_hat = 2 exceeds t^tau = 0.707.
    let err = parametric_connect_sum(&host, &partner, &[0.5], 0.5, InterpolationRule::QuinticLog).unwrap_err();
    assert!(matches!(err, ConifoldError::GluingParameter(_)), "{err}");
}

fn marked_ac_cone() -> ConifoldModel {
    let c = Component::new(
        s2(),
        Terminal::End(EndSpec::cs(1.0, -0.5, 1.0)),
        Terminal::End(EndSpec::ac(-1.0, -0.5, 1.0).marked()),
        0.0,
        f64::INFINITY,
        Profile::ExactCone,
    )
    .unwrap();
    ConifoldModel::new("cone_ac_marked", 3, vec![c]).unwrap()
}

#[test]
fn gluing_exact_cones_gives_the_cone() {
    for rule in [InterpolationRule::QuinticLog, InterpolationRule::SmoothLog] {
        let glued = parametric_connect_sum(&cone_host(-0.5), &marked_ac_cone(), &[0.01], 0.5, rule).unwrap();
        let comp = &glued.components()[0];
        for i in 1..400 {
            let x = 1e-3 * 1.03f64.powi(i);
            let (f, f1, f2) = comp.warp(x);
            assert_relative_eq!(f, x, max_relative = 1e-13);
            assert_relative_eq!(f1, 1.0, epsilon = 1e-12);
            assert!(f2.abs() < 1e-9 / x, "f'' = {f2} at {x}");
        }
        for row in neck_convergence_check(&glued, 2, presets::CUT_B).unwrap() {
            assert!(row.sup < 1e-12, "{row:?}");
        }
    }
}

#[test]
fn cutoff_examples() {
    let (a, b) = (presets::CUT_A, presets::CUT_B);
    let c = cutoff_eta(1e-2, a, b).unwrap();
    let (lo, hi) = c.transition();
    assert_relative_eq!(c.eval(lo).0, 0.0, epsilon = 1e-12);
    assert_relative_eq!(c.eval(hi).0, 1.0, epsilon = 1e-12);
    for r in [lo * 0.5, lo * 0.99, hi * 1.01, hi * 3.0] {
        let (_, d1, d2) = c.eval(r);
        assert_eq!((d1, d2), (0.0, 0.0));
    }
    let m2 = cutoff_eta(1e-2, a, b).unwrap().derivative_maxima(20000).0;
    let m4 = cutoff_eta(1e-4, a, b).unwrap().derivative_maxima(20000).0;
    let expected = (1e-4f64).ln() / (1e-2f64).ln();
    assert_relative_eq!(m2 / m4, expected, max_relative = 0.1);
}

#[test]
fn dumbbell_neck_defects_decrease() {
    let fam = presets::dumbbell(-0.5).unwrap();
    let sups: Vec<Vec<f64>> = [1e-1, 1e-2, 1e-3]
        .iter()
        .map(|&t| {
            let member = fam.member(t).unwrap();
            neck_convergence_check(&member, 1, fam.b).unwrap().iter().map(|r| r.sup).collect()
        })
        .collect();
    for j in 0..2 {
        assert!(sups[0][j] > sups[1][j] && sups[1][j] > sups[2][j], "j = {j}: {sups:?}");
    }
}

#[test]
fn rescaling_examples() {
    let cone = presets::exact_cone(-0.5, 1.0, 1.0, false).unwrap().rescale(0.3).unwrap();
    for x in [0.01, 0.5, 7.0] {
        assert_relative_eq!(cone.components()[0].warp(x).0, x, max_relative = 1e-15);
    }
    let hyp = presets::hyperboloid(1.0, -0.5, 1.0, (false, false)).unwrap();
    let two = hyp.rescale(2.0).unwrap();
    let twice = hyp.rescale(0.5).unwrap().rescale(0.25).unwrap();
    let once = hyp.rescale(0.125).unwrap();
    for x in [-5.0, -0.3, 0.0, 0.2, 3.0] {
        assert_relative_eq!(two.components()[0].warp(x).0, (x * x + 4.0f64).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(twice.components()[0].warp(x).0, once.components()[0].warp(x).0, max_relative = 1e-14);
    }
}

// ---------------------------------------------------------------- weighted calculus

#[test]
fn weighted_l2_of_a_bump_on_the_cone() {
    let model = presets::exact_cone(0.0, 1.0, 1.0, false).unwrap();
    let grid = grid_for(&model, 2000);
    let s = 0.7;
    let phi = move |r: f64| r.powf(s) * bump((r - 1.5) / 0.5);
    let u = ModeFunction::radial(&model, 0, grid, &phi).unwrap();
    let got = weighted_sobolev_norm(&u, &model, &WeightSpec::constant(2.0, 0, 0.0)).unwrap();
    let want = (4.0 * PI * simpson(|r| phi(r).powi(2) / r, 1.0, 2.0, 20000)).sqrt();
    assert_relative_eq!(got, want, max_relative = 1e-6);
}

#[test]
fn weight_minus_m_over_p_is_the_standard_norm() {
    // |rho^(m/p) u|^p rho^-m = |u|^p.
    let model = presets::capped_hyperboloid(-0.5).unwrap();
    let grid = grid_for(&model, 2000);
    let phi = |x: f64| bump((x - 1.0) / 0.8);
    let u = ModeFunction::radial(&model, 0, grid, &phi).unwrap();
    for p in [2.0, 3.0] {
        let got = weighted_sobolev_norm(&u, &model, &WeightSpec::constant(p, 0, -3.0 / p)).unwrap();
        let integral = simpson(|x| phi(x).abs().powf(p) * (x * x + 1.0), 0.2, 1.8, 20000);
        assert_relative_eq!(got, (4.0 * PI * integral).powf(1.0 / p), max_relative = 1e-6);
    }
}

#[test]
fn zero_function_has_zero_norm() {
    let model = presets::capped_hyperboloid(-0.5).unwrap();
    let grid = grid_for(&model, 200);
    let u = ModeFunction::radial(&model, 0, grid, &|_| 0.0).unwrap();
    assert_eq!(weighted_sobolev_norm(&u, &model, &WeightSpec::constant(2.0, 2, -0.5)).unwrap(), 0.0);
}

#[test]
fn ck_norm_examples() {
    for model in [presets::capped_hyperboloid(-0.5).unwrap(), presets::exact_cone(-0.5, 1.0, 1.0, false).unwrap()] {
        let grid = grid_for(&model, 500);
        let one = ModeFunction::radial(&model, 0, grid, &|_| 1.0).unwrap();
        let rep = weighted_ck_norm(&one, &model, 2, BetaChoice::Constant(0.0)).unwrap();
        // Derivatives of a constant vanish up to difference-quotient roundoff.
        assert_relative_eq!(rep.value, 1.0, max_relative = 1e-10);
        assert!(!rep.diverges);
    }

    let cone = presets::exact_cone(-0.5, 1.0, 1.0, false).unwrap();
    let grid = grid_for(&cone, 500);
    let gamma = 1.3;
    let u = ModeFunction::radial(&cone, 0, grid, &|r| r.powf(gamma)).unwrap();
    // sup |r^-gamma r^gamma| = 1, flat at both ends.
    let rep = weighted_ck_norm(&u, &cone, 0, BetaChoice::Constant(gamma)).unwrap();
    assert_relative_eq!(rep.value, 1.0, max_relative = 1e-12);
    assert!(!rep.diverges, "{rep:?}");
    // A weight below the growth rate: r^(gamma - beta) grows on the AC end.
    let rep = weighted_ck_norm(&u, &cone, 0, BetaChoice::Constant(gamma - 0.5)).unwrap();
    assert!(rep.diverges, "{rep:?}");
    assert!(rep.end_slopes.iter().any(|s| (s - 0.5).abs() < 1e-6), "{rep:?}");
}

#[test]
fn rescaling_identities() {
    let model = presets::capped_hyperboloid(-0.5).unwrap();
    let grid = grid_for(&model, 1000);
    let u = ModeFunction::single(
        0,
        grid.clone(),
        vec![Mode { e: 0.0, values: grid.x.iter().map(|&x| bump((x - 2.0) / 1.5)).collect() }],
    );
    let scaled = WeightSpec::constant(2.0, 2, 0.0);
    let weighted = WeightSpec::constant(2.0, 2, -0.5);
    assert!(rescaling_invariance_check(&u, &model, &scaled, 3.0).unwrap() <= 1e-10);
    assert!(rescaling_invariance_check(&u, &model, &weighted, 0.1).unwrap() <= 1e-10);
    assert_eq!(rescaling_invariance_check(&u, &model, &weighted, 1.0).unwrap(), 0.0);
}

#[test]
fn holder_examples() {
    let model = presets::dumbbell(-0.5).unwrap().member(1e-2).unwrap();
    let grid = grid_for(&model, 1000);
    let u = ModeFunction::single(
        0,
        grid.clone(),
        vec![Mode { e: 2.0, values: grid.x.iter().map(|&x| bump((x - 1.0) / 0.7)).collect() }],
    );
    let h = holder_check(&u, &u, &model, 2.0, -0.3, -0.3).unwrap();
    assert_relative_eq!(h.lhs, h.rhs, max_relative = 1e-10);
    assert!(!h.violated);
    let zero = u.scaled(0.0);
    let h = holder_check(&zero, &u, &model, 3.0, 0.2, -1.0).unwrap();
    assert_eq!(h.lhs, 0.0);
    assert!(!h.violated);
}

#[test]
fn algebra_examples() {
    let model = presets::spindle(-0.5).unwrap().member(1e-1).unwrap();
    let grid = grid_for(&model, 500);
    let one = ModeFunction::radial(&model, 0, grid.clone(), &|_| 1.0).unwrap();
    let r = banach_algebra_check(&one, &one, &model, 4.0, 1, 0.0, 0.0).unwrap();
    let norm_one = conifold_core::weighted_calc::pointwise_sobolev_norm(&one, &model, &WeightSpec::constant(4.0, 1, 0.0)).unwrap();
    assert_relative_eq!(r.rhs_ratio, 1.0 / norm_one, max_relative = 1e-10);
    let v = one.scaled(0.0);
    assert_eq!(banach_algebra_check(&one, &v, &model, 4.0, 1, 0.0, 0.0).unwrap().lhs, 0.0);
}

#[test]
fn embedding_ratio_is_flat_along_a_cone() {
    // m = 5, p = 2: p* = 10/3. Bumps of fixed width in log r are rescalings of each other.
    let link = Link::unit_sphere(4).unwrap();
    let comp = Component::new(
        link,
        Terminal::End(EndSpec::cs(1.0, -0.5, 1.0)),
        Terminal::End(EndSpec::ac(-1.0, -0.5, 1.0)),
        0.0,
        f64::INFINITY,
        Profile::ExactCone,
    )
    .unwrap();
    let cone = ConifoldModel::new("cone_s4", 5, vec![comp]).unwrap();
    let grid = grid_for(&cone, 2000);
    let fam = bump_family(&cone, 0, &grid, &FamilyOptions { centres: 8, ..FamilyOptions::default() }).unwrap();
    let rep = embedding_constant_estimate(&cone, 2.0, BetaChoice::Constant(-0.5), &fam).unwrap();
    let max = rep.ratios.iter().cloned().fold(0.0, f64::max);
    let min = rep.ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(max / min <= 1.02, "{:?}", rep.ratios);

    let zero = fam[0].scaled(0.0);
    assert!(embedding_constant_estimate(&cone, 2.0, BetaChoice::Constant(-0.5), &[zero]).is_err());
}

// ---------------------------------------------------------------- spectral Laplace

#[test]
fn harmonic_basis_examples() {
    for (link, m, e) in [(s2(), 3, 2.0), (s3(), 4, 3.0), (s2(), 3, 0.0), (s3(), 4, 0.0)] {
        let b = harmonic_basis_cone(&link, m, e).unwrap();
        let (gp, gm) = quadratic_roots(m, e);
        assert_relative_eq!(b.gamma_plus, gp, epsilon = 1e-12);
        assert_relative_eq!(b.gamma_minus, gm, epsilon = 1e-12);
    }
    let b = harmonic_basis_cone(&s2(), 3, 2.0).unwrap();
    assert_eq!((b.gamma_plus, b.gamma_minus, b.mult), (1.0, -2.0, 3));
    let b = harmonic_basis_cone(&s3(), 4, 3.0).unwrap();
    assert_eq!((b.gamma_plus, b.gamma_minus, b.mult), (1.0, -3.0, 4));
    let b = harmonic_basis_cone(&s3(), 4, 0.0).unwrap();
    assert_eq!((b.gamma_plus, b.gamma_minus, b.mult), (0.0, -2.0, 1));
}

#[test]
fn cone_harmonics_are_annihilated_to_second_order() {
    for (m, e, gamma) in [(3usize, 0.0, -1.0), (3, 2.0, 1.0), (4, 0.0, -2.0)] {
        let link = Link::unit_sphere(m - 1).unwrap();
        let coarse = cone_consistency_residual(&link, m, e, gamma, 1.0 / 200.0).unwrap();
        let fine = cone_consistency_residual(&link, m, e, gamma, 1.0 / 400.0).unwrap();
        assert!(coarse < 1e-3, "{coarse}");
        assert!((3.5..4.5).contains(&(coarse / fine)), "m={m} e={e}: {coarse} / {fine}");
    }
}

#[test]
fn constants_are_annihilated_in_the_interior() {
    let models = [presets::capped_hyperboloid(-0.5).unwrap(), presets::dumbbell(-0.5).unwrap().member(1e-2).unwrap()];
    for model in models {
        let grid = grid_for(&model, 400);
        let parity = conifold_core::spectral_laplace::sectors(&model.components()[0])[0];
        let op = assemble_mode_operator(&model, &grid, 0.0, parity, ClosureWeights::Model).unwrap();
        let au = op.apply_full(&vec![1.0; grid.len()]);
        let interior = au[1..au.len() - 1].iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(interior < 1e-6, "{interior}");
    }
}

fn small_opts() -> SolverOptions {
    SolverOptions { grid: GridOptions { per_region: 1000, ..GridOptions::default() }, max_eigenvalue: 12.0, ..SolverOptions::default() }
}

#[test]
fn invertibility_constant_is_positive_and_grid_stable() {
    let member = presets::dumbbell(-0.5).unwrap().member(0.1).unwrap();
    let coarse = invertibility_constant(&member, &small_opts()).unwrap().constant;
    let fine = invertibility_constant(&member, &SolverOptions { max_eigenvalue: 12.0, ..SolverOptions::default() })
        .unwrap()
        .constant;
    assert!(coarse > 0.0 && coarse.is_finite());
    assert_relative_eq!(coarse, fine, max_relative = 0.02);
}

#[test]
fn exceptional_weight_is_refused() {
    let member = presets::dumbbell(0.0).unwrap().member(0.1).unwrap();
    assert!(invertibility_constant(&member, &small_opts()).is_err());
}

#[test]
fn spindle_constrained_constant_is_positive() {
    let member = presets::spindle(-0.5).unwrap().member(0.1).unwrap();
    let r = restricted_invertibility_compact(&member, &CompactOptions::default(), &small_opts()).unwrap();
    assert!(r.constrained > 1e-2, "{r:?}");
    assert!(r.unconstrained_mode0 < 1e-8, "{r:?}");
}

#[test]
fn poincare_examples() {
    let member = presets::dumbbell(-0.5).unwrap().member(0.1).unwrap();
    let c = poincare_constant(&member, &small_opts()).unwrap().constant;
    assert!(c.is_finite() && c >= 1.0);
    // Constants lie in the space when the weights are positive.
    let member = presets::dumbbell(0.5).unwrap().member(0.1).unwrap();
    assert!(matches!(poincare_constant(&member, &small_opts()), Err(ConifoldError::WeightConditions(_))));
}

#[test]
fn crossing_examples() {
    let opts = SolverOptions { max_eigenvalue: 12.0, ..SolverOptions::default() };
    let capped = presets::capped_hyperboloid(-0.5).unwrap();
    let r = weight_crossing_kernel(&capped, 0.0, 0.0, &opts).unwrap();
    let vals = &r.kernel_candidate.pieces[0].modes[0].values;
    let dev = vals.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    assert!(dev < 1e-4, "{dev}");
    assert!(r.decay_report.decay_ok && r.decay_report.residual_ok, "{:?}", r.decay_report);

    let r = weight_crossing_kernel(&capped, 1.0, 2.0, &opts).unwrap();
    assert!(r.decay_report.slope <= 1.0 - 2.0 + 0.2, "{:?}", r.decay_report);

    let cone = presets::exact_cone(-0.5, 1.0, 1.0, false).unwrap();
    let r = weight_crossing_kernel(&cone, 1.0, 2.0, &opts).unwrap();
    let piece = &r.kernel_candidate.pieces[0];
    for (x, v) in piece.grid.x.iter().zip(&piece.modes[0].values) {
        assert_eq!(*v, *x);
    }
}

#[test]
fn kernel_dimensions_match_index_arithmetic() {
    let model = presets::capped_hyperboloid(-0.5).unwrap();
    let rows = kernel_dimension_scan(&model, &[-0.5, 0.5, 1.5], &SolverOptions { max_eigenvalue: 12.0, ..SolverOptions::default() }).unwrap();
    let ac = [EndDesc { kind: EndKind::AC, link: s2() }];
    for row in rows {
        let want = index_change(&[-0.5], &[row.beta], &ac, 3, 1e-9).unwrap();
        assert_eq!(row.dim as i64, want, "beta = {}", row.beta);
        assert!(!row.ambiguous);
    }
}

// ---------------------------------------------------------------- experiments

#[test]
fn unknown_experiment_is_a_config_error() {
    let err = parse_run_file(r#"{"experiment": "time_travel"}"#).unwrap_err();
    assert!(matches!(err, ConifoldError::Config(_)));
}

fn tiny_result(rows: Vec<Vec<f64>>) -> SweepResult {
    SweepResult {
        experiment: ExperimentKind::PoincareUniformity,
        label: "tiny".into(),
        model: Some("m".into()),
        seed: 3,
        columns: vec!["t".into(), "constant".into()],
        rows,
        summary: Summary::new(Some(1.5), Some(f64::NAN), vec![]),
        notes: vec!["n".into()],
    }
}

#[test]
fn empty_rows_give_a_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let r = tiny_result(vec![]);
    r.emit(&[conifold_core::experiments::EmitFormat::Csv], dir.path()).unwrap();
    assert_eq!(std::fs::read_to_string(dir.path().join("tiny.csv")).unwrap(), "t,constant\n");
}

#[test]
fn json_round_trips() {
    let r = tiny_result(vec![vec![0.1, 2.5], vec![0.01, f64::NAN]]);
    let back = SweepResult::from_json(&r.to_json().unwrap()).unwrap();
    assert_eq!(back.to_json().unwrap(), r.to_json().unwrap());
    assert_eq!(back.rows[0], r.rows[0]);
    assert!(back.rows[1][1].is_nan());
    assert_eq!(back.summary.max_min_ratio, Some(1.5));
}

#[test]
fn region_atlas_reproduces_the_weight_plane_picture() {
    let r = conifold_core::experiments::region_atlas(ConifoldKind::CSAC, &s2(), 3, 0.5, (-3.0, 2.0)).unwrap();
    let class_at = |b1: f64, b2: f64| {
        r.rows.iter().find(|row| row[0] == b1 && row[1] == b2).map(|row| conifold_core::experiments::class_name(row[2])).unwrap()
    };
    // mu on the CS end, lambda on the AC end; both in (2 - m, 0) is an isomorphism.
    assert_eq!(class_at(-0.5, -0.5), "isomorphism");
    assert_eq!(class_at(-0.5, 0.5), "surjective");
    assert_eq!(class_at(0.5, -0.5), "injective");
    assert_eq!(class_at(0.5, 0.5), "fredholm");
    assert_eq!(class_at(0.0, -0.5), "exceptional");
    assert!(r.summary.pass);
}
