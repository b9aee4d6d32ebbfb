use cpz_core::encode::{verify_certificate, Encoding, InclusionCertificate};
use cpz_core::fixtures::{illustrative_example, random_cz_pair, scaled_example, unit_square};
use cpz_core::oracle::{audit_inclusion, falsify_inclusion, membership_distance, OracleOptions};
use cpz_core::sampling::sample_points;
use cpz_core::set::{Matrix, Vector};
use cpz_core::solve::{check_inclusion, Method, SolveOptions, Status};
use cpz_core::ConPolyZonotope;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Evaluates the six inclusion conditions directly from their definition,
/// using nalgebra's own pseudo-inverse. Returns the largest equality
/// residual and the largest left-hand side of the two bound rows.
fn conditions(inner: &ConPolyZonotope, outer: &ConPolyZonotope, cert: &InclusionCertificate) -> (f64, f64) {
    let InclusionCertificate { center_shift: gamma, generator_map: big_gamma, row_map: pi, constraint_map: psi_m, constraint_shift: psi } =
        cert;
    let mut eq = (&inner.center - (&outer.center + &outer.generators * gamma)).amax();
    eq = eq.max((&inner.generators - &outer.generators * big_gamma).amax());
    if outer.has_constraints() {
        eq = eq.max((pi * &inner.constraint_generators - &outer.constraint_generators * psi_m).amax());
        eq = eq.max((pi * &inner.constraint_rhs - (&outer.constraint_rhs - &outer.constraint_generators * psi)).amax());
    }
    let bound = |exponents: &nalgebra::DMatrix<i64>, shift: &Vector, map: &Matrix| {
        if exponents.ncols() == 0 {
            return f64::NEG_INFINITY;
        }
        let mu = shift.abs() + map.abs() * Vector::from_element(map.ncols(), 1.0);
        let pinv = exponents.transpose().map(|v| v as f64).pseudo_inverse(1e-12).unwrap();
        let logs = mu.map(f64::ln);
        // Zero coefficients drop out even when a bound is exactly zero.
        (0..pinv.nrows())
            .map(|r| (0..pinv.ncols()).filter(|&c| pinv[(r, c)] != 0.0).map(|c| pinv[(r, c)] * logs[c]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let ineq = bound(&outer.exponents, gamma, big_gamma).max(bound(&outer.constraint_exponents, psi, psi_m));
    (eq, ineq)
}

fn forward_and_reverse() -> [(usize, usize, bool); 6] {
    [(1, 2, true), (1, 3, true), (2, 3, true), (2, 1, false), (3, 1, false), (3, 2, false)]
}

#[test]
fn experiment_verdicts_with_cor1() {
    let opts = SolveOptions::default();
    for (i, j, holds) in forward_and_reverse() {
        let (inner, outer) = (scaled_example(i), scaled_example(j));
        let out = check_inclusion(&inner, &outer, Method::Cor1, &opts).unwrap();
        assert_eq!(out.is_feasible(), holds, "P{i} in P{j}");
        assert_eq!(out.encoding, Encoding::Cor1);
        if let Some(cert) = &out.certificate {
            let alpha = cert.alpha().expect("cor1 returns the split");
            assert!(alpha.check_split(&outer).passes(opts.tol_eq, opts.tol_ineq));
            let (eq, ineq) = conditions(&inner, &outer, cert.base());
            assert!(eq <= 1e-8 && ineq <= 1e-8, "P{i} in P{j}: {eq:e} {ineq:e}");
        } else {
            assert!(out.report.as_ref().is_some_and(|r| !r.passed()));
        }
    }
}

#[test]
fn reversed_experiment_pairs_have_witnesses() {
    let opts = OracleOptions::default();
    for (i, j, holds) in forward_and_reverse() {
        if holds {
            continue;
        }
        let (inner, outer) = (scaled_example(i), scaled_example(j));
        let w = falsify_inclusion(&inner, &outer, 10_000, &opts).unwrap().expect("a witness");
        assert!(w.outer_distance > opts.outside_margin);
        assert!(w.revalidate(&inner, &outer, &opts));
    }
}

/// A certificate for P2 in P1 found by the prop1 search. It satisfies the
/// six conditions exactly, yet P2 is not contained in P1: the bound rows
/// do not imply the monomial bounds they are meant to encode.
fn accepted_certificate_for_false_inclusion() -> InclusionCertificate {
    InclusionCertificate {
        center_shift: Vector::from_row_slice(&[
            -0.011015766122032426,
            0.015336299234615974,
            -0.0027003331953647067,
            -0.016470040847905234,
        ]),
        generator_map: Matrix::from_row_slice(
            4,
            4,
            &[
                1.090224875689904,
                -1.0281235720857247,
                -0.1384273576440127,
                -2.126394666950753,
                0.03923094093532159,
                0.05584606694114996,
                0.010399799571603141,
                0.08494458025684831,
                -0.011465440946321237,
                1.3021178851598054,
                1.4689061126841447,
                1.2759063041836907,
                -0.0375732352228304,
                0.01696342005264795,
                -0.09301697325975984,
                0.006801859384137909,
            ],
        ),
        row_map: Matrix::from_element(1, 1, 0.38872393066348676),
        constraint_map: Matrix::from_row_slice(
            3,
            3,
            &[
                0.026210985032139936,
                0.1709938081487856,
                0.5281467271657849,
                0.367292951632078,
                -0.026566981049555502,
                0.04737707860742327,
                0.08348981890441812,
                0.316479948123111,
                -0.15430068821942183,
            ],
        ),
        constraint_shift: Vector::from_row_slice(&[0.25287807627145875, 0.4052899518622952, 0.44572712882962595]),
    }
}

#[test]
fn exact_conditions_accept_a_false_inclusion() {
    let (p1, p2) = (scaled_example(1), scaled_example(2));
    let cert = accepted_certificate_for_false_inclusion();
    let report = verify_certificate(&p2, &p1, &cert, 1e-8, 1e-8).unwrap();
    assert!(report.passed(), "{:?}", report.failed_conditions());
    let (eq, ineq) = conditions(&p2, &p1, &cert);
    assert!(eq <= 1e-12, "equality residual {eq:e}");
    assert!(ineq < -1e-6, "bound {ineq:e}");
    // Some generator bound exceeds 1, so the outer monomials are not all
    // within the unit box.
    assert!(report.mu_e_bound.max() > 4.0);
    let w = falsify_inclusion(&p2, &p1, 2_000, &OracleOptions::default()).unwrap().expect("a witness");
    assert!(w.outer_distance > 0.1);
}

#[test]
fn prop1_proves_self_inclusion() {
    let set = illustrative_example();
    let out = check_inclusion(&set, &set, Method::Prop1, &SolveOptions::default()).unwrap();
    assert_eq!(out.status, Status::Feasible);
    assert_eq!(out.restarts_used, 1);
    let (eq, ineq) = conditions(&set, &set, out.certificate.as_ref().unwrap().base());
    assert!(eq <= 1e-12 && ineq <= 1e-12);
}

#[test]
fn auto_uses_the_linear_program_for_zonotopes() {
    let sq = unit_square();
    let half = sq.scale_columns(&[0.5, 0.5], &[]).unwrap();
    let out = check_inclusion(&half, &sq, Method::Auto, &SolveOptions::default()).unwrap();
    assert_eq!(out.encoding, Encoding::CzLp);
    assert!(out.is_feasible());
    let ex = illustrative_example();
    let out = check_inclusion(&ex, &ex, Method::Auto, &SolveOptions::default()).unwrap();
    assert_eq!(out.encoding, Encoding::Cor1);
}

#[test]
fn scaled_squares_are_proven_by_every_method() {
    let sq = unit_square();
    let opts = SolveOptions::default();
    for delta in [0.5, 0.7, 0.9] {
        let inner = sq.scale_columns(&[delta, delta], &[]).unwrap();
        for method in [Method::CzLp, Method::Cor1, Method::Prop1] {
            let out = check_inclusion(&inner, &sq, method, &opts).unwrap();
            assert!(out.is_feasible(), "delta {delta} with {method}");
        }
        let outer = sq.scale_columns(&[delta, delta], &[]).unwrap();
        let out = check_inclusion(&sq, &outer, Method::CzLp, &opts).unwrap();
        assert_eq!(out.status, Status::NotProven, "square in {delta} square");
    }
}

#[test]
fn linear_and_nonlinear_tests_agree_on_constrained_zonotopes() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let opts = SolveOptions::default();
    for _ in 0..10 {
        let (inner, outer) = random_cz_pair(&mut rng, 3, 4, 0.8);
        let lp = check_inclusion(&inner, &outer, Method::CzLp, &opts).unwrap();
        let nlp = check_inclusion(&inner, &outer, Method::Cor1, &opts).unwrap();
        assert!(lp.is_feasible() && nlp.is_feasible());
        for out in [&lp, &nlp] {
            let (eq, ineq) = conditions(&inner, &outer, out.certificate.as_ref().unwrap().base());
            assert!(eq <= 1e-8 && ineq <= 1e-8, "{eq:e} {ineq:e}");
        }
        let audit = audit_inclusion(&inner, &outer, 500, &OracleOptions::default()).unwrap();
        assert!(audit.max_distance <= 1e-3, "{}", audit.max_distance);
    }
}

#[test]
fn oracle_finds_sampled_members_of_the_example() {
    let set = illustrative_example();
    let drawn = sample_points(&set, 1000, 1e-8, 42);
    assert_eq!(drawn.len(), 1000);
    let opts = OracleOptions { seed: 42, ..OracleOptions::default() };
    for sample in &drawn.samples {
        let d = membership_distance(&sample.point, &set, &opts);
        assert!(d <= 1e-3, "distance {d} at {:?}", sample.point);
    }
}
