use matorth::numkernel::{norm, relative, solve_sylvester, Matrix};
use matorth::orthopoly::{monic_sequence, orthogonality_defect, verify_eigen};
use matorth::symmetry::{catalog, mass_conditions, moment_equation_residual, Branch, CatalogOptions};
use matorth::weights::Family;
use matorth::{DiffOperator, MatrixPolynomial};
use proptest::prelude::*;

fn poly(size: usize, max_deg: usize) -> impl Strategy<Value = MatrixPolynomial> {
    prop::collection::vec(prop::collection::vec(-2.0..2.0_f64, size * size), 1..=max_deg + 1).prop_map(
        move |cs| {
            let coeffs = cs.into_iter().map(|c| Matrix::from_row_slice(size, size, &c)).collect();
            MatrixPolynomial::new(size, coeffs).unwrap()
        },
    )
}

fn operator(size: usize) -> impl Strategy<Value = DiffOperator> {
    let n = DiffOperator::unknown_count(size, 2);
    prop::collection::vec(-2.0..2.0_f64, n)
        .prop_map(move |c| DiffOperator::from_coefficient_vector(size, 2, &c).unwrap())
}

fn branch() -> impl Strategy<Value = Branch> {
    prop_oneof![Just(Branch::Plus), Just(Branch::Minus)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn product_rule(p in poly(2, 3), q in poly(2, 3), t in -2.0..2.0_f64) {
        let lhs = p.mul(&q).unwrap().derivative();
        let rhs = p.derivative().mul(&q).unwrap().add(&p.mul(&q.derivative()).unwrap()).unwrap();
        let diff = lhs.sub(&rhs).unwrap().max_abs_coeff();
        prop_assert!(diff <= 1e-12 * (1.0 + lhs.max_abs_coeff()));
        let at = p.mul(&q).unwrap().eval(t);
        let prod = p.eval(t) * q.eval(t);
        prop_assert!((at - &prod).amax() <= 1e-11 * (1.0 + prod.amax()));
    }

    #[test]
    fn adjoint_is_an_involution(p in poly(3, 4)) {
        prop_assert_eq!(p.adjoint().adjoint(), p);
    }

    #[test]
    fn eigenvalue_is_leading_coefficient(d in operator(2), p in poly(2, 5)) {
        let n = p.degree().unwrap_or(0);
        let mut coeffs = p.coeffs().to_vec();
        coeffs.resize(n + 1, Matrix::zeros(2, 2));
        coeffs[n] = Matrix::identity(2, 2);
        let monic = MatrixPolynomial::new(2, coeffs).unwrap();
        let image = d.right_apply(&monic).unwrap();
        let lead = image.coeff(n);
        let want = d.eigenvalue(n);
        prop_assert!((lead - &want).amax() <= 1e-12 * (1.0 + want.amax()));
        prop_assert!(image.degree().is_none_or(|k| k <= n));
    }

    #[test]
    fn coefficient_vector_round_trip(d in operator(3)) {
        let v = d.to_coefficient_vector(2);
        let back = DiffOperator::from_coefficient_vector(3, 2, &v).unwrap();
        prop_assert_eq!(back.to_coefficient_vector(2), v);
    }

    #[test]
    fn sylvester_residual(
        a in prop::collection::vec(-1.0..1.0_f64, 9),
        b in prop::collection::vec(-1.0..1.0_f64, 9),
        c in prop::collection::vec(-1.0..1.0_f64, 9),
    ) {
        let shift = Matrix::identity(3, 3) * 4.0;
        let a = Matrix::from_row_slice(3, 3, &a) + &shift;
        let b = Matrix::from_row_slice(3, 3, &b) + &shift;
        let c = Matrix::from_row_slice(3, 3, &c);
        let x = solve_sylvester(&a, &b, &c).unwrap();
        let r = norm(&(&a * &x + &x * &b - &c));
        prop_assert!(relative(r, (norm(&a) + norm(&b)) * norm(&x) + norm(&c)) < 1e-13);
    }

    #[test]
    fn atom_moments_are_linear(
        a in 0.2..3.0_f64,
        gamma in 0.1..5.0_f64,
        zeta in 0.0..5.0_f64,
        t0 in -2.0..2.0_f64,
        br in branch(),
    ) {
        let fam = Family::Hermite { a };
        let e = catalog(&fam, t0, br, &CatalogOptions::default()).unwrap();
        let w = fam.weight().unwrap();
        let wt = w.with_atom(t0, e.mass.clone(), gamma, zeta).unwrap();
        for n in 0..=12 {
            let want = w.moment(n).unwrap() * gamma + &e.mass * (zeta * t0.powi(n as i32));
            let got = wt.moment(n).unwrap();
            prop_assert!((got - &want).amax() <= 1e-12 * (1.0 + want.amax()));
        }
    }

    #[test]
    fn hermite_cone_is_symmetric(
        a in 0.2..3.0_f64,
        gamma in 0.1..5.0_f64,
        zeta in 0.0..5.0_f64,
        t0 in -3.0..3.0_f64,
        br in branch(),
    ) {
        let fam = Family::Hermite { a };
        let e = catalog(&fam, t0, br, &CatalogOptions::default()).unwrap();
        prop_assert!(mass_conditions(&e.operator, t0, &e.mass, 1e-10).unwrap().verdict);
        let w = fam.weight().unwrap().with_atom(t0, e.mass, gamma, zeta).unwrap();
        let r = moment_equation_residual(&w, &e.operator, 24).unwrap();
        prop_assert!(r.max_residual < 1e-10, "residual {:e}", r.max_residual);
    }

    #[test]
    fn laguerre_cone_is_symmetric(
        a in 0.3..2.0_f64,
        alpha in -0.5..2.0_f64,
        zeta in 0.0..3.0_f64,
        t0 in -2.0..3.0_f64,
        br in branch(),
    ) {
        let fam = Family::Laguerre { a, alpha };
        let e = catalog(&fam, t0, br, &CatalogOptions::default()).unwrap();
        let w = fam.weight().unwrap().with_atom(t0, e.mass, 1.0, zeta).unwrap();
        let r = moment_equation_residual(&w, &e.operator, 16).unwrap();
        prop_assert!(r.max_residual < 1e-9, "residual {:e}", r.max_residual);
    }

    #[test]
    fn orthogonal_eigenfunctions(
        a in 0.3..2.0_f64,
        zeta in 0.0..3.0_f64,
        t0 in -1.5..1.5_f64,
        br in branch(),
    ) {
        let fam = Family::Hermite { a };
        let e = catalog(&fam, t0, br, &CatalogOptions::default()).unwrap();
        let w = fam.weight().unwrap().with_atom(t0, e.mass, 1.0, zeta).unwrap();
        let s = monic_sequence(&w, 8).unwrap();
        prop_assert!(orthogonality_defect(&s).unwrap() < 1e-9);
        prop_assert!(verify_eigen(&s, &e.operator).unwrap().verdict);
    }
}
