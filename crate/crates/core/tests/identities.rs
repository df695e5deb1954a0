//! Randomized structural identities of the differential calculus layer:
//! the two halves of the differential, the contraction homotopy, and the
//! derivation laws of total derivatives.

use jetvar_core::forms::{from_holonomic, Form};
use jetvar_core::jetalg::{Expr, JetCoordinate, JetSpec};
use jetvar_core::multiindex::{self, MultiIndex};
use jetvar_core::inverse::fiber_homotopy;
use num::{BigInt, BigRational};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ------------------------------------------------------------
// corpus builders
// ------------------------------------------------------------

fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let numerator = loop {
        let k = rng.gen_range(-3i64..=3);
        if k != 0 {
            break k;
        }
    };
    let denominator = rng.gen_range(1i64..=2);
    BigRational::new(BigInt::from(numerator), BigInt::from(denominator))
}

fn random_index(rng: &mut ChaCha8Rng, n: usize, order: u32) -> MultiIndex {
    let all = multiindex::enumerate_upto(n, order);
    all[rng.gen_range(0..all.len())].clone()
}

fn random_expr(rng: &mut ChaCha8Rng, n: usize, m: usize, order: u32) -> Expr {
    let mut out = Expr::zero();
    for _ in 0..rng.gen_range(1..=3) {
        let mut term = Expr::constant(random_rational(rng));
        for _ in 0..rng.gen_range(0..=2) {
            let coord = if rng.gen_range(0..3) == 0 {
                Expr::base_var(rng.gen_range(0..n))
            } else {
                Expr::field_var(rng.gen_range(0..m), random_index(rng, n, order))
            };
            term = &term * &coord;
        }
        out = &out + &term;
    }
    out
}

/// A random form of the given degree with a random mix of contact and base
/// factors in every term.
fn random_form(rng: &mut ChaCha8Rng, n: usize, m: usize, order: u32, degree: usize) -> Form {
    let mut out = Form::zero(degree);
    'terms: for _ in 0..rng.gen_range(1..=3) {
        let max_contact = degree;
        let min_contact = degree.saturating_sub(n);
        let contact = rng.gen_range(min_contact..=max_contact);
        let mut covs = Vec::new();
        let mut tries = 0;
        while covs.len() < contact {
            let i = rng.gen_range(0..m);
            let p = random_index(rng, n, order);
            let cov = jetvar_core::forms::BasisCovector::theta(i, p);
            if !covs.contains(&cov) {
                covs.push(cov);
            }
            tries += 1;
            if tries > 40 {
                continue 'terms;
            }
        }
        let mut dirs: Vec<usize> = (0..n).collect();
        for _ in 0..(degree - contact) {
            let k = rng.gen_range(0..dirs.len());
            covs.push(jetvar_core::forms::BasisCovector::Dx(dirs.remove(k)));
        }
        out = &out + &Form::from_term(covs, random_expr(rng, n, m, order));
    }
    out
}

// ------------------------------------------------------------
// differential identities
// ------------------------------------------------------------

#[test]
fn differential_identities_on_random_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE);
    let mut count = 0;
    for _ in 0..10 {
        for n in 1..=2usize {
            for m in 1..=2usize {
                for degree in 0..=(n + 1) {
                    let a = random_form(&mut rng, n, m, 2, degree);
                    let d = a.exterior_d(n);
                    assert!(d.exterior_d(n).is_zero(), "d^2 != 0");
                    assert!(a.d_h(n).d_h(n).is_zero(), "d_h^2 != 0");
                    assert!(a.d_v().d_v().is_zero(), "d_v^2 != 0");
                    let anti = &a.d_h(n).d_v() + &a.d_v().d_h(n);
                    assert!(anti.is_zero(), "halves do not anticommute");
                    assert_eq!(&a.d_h(n) + &a.d_v(), d, "halves do not sum to d");
                    count += 1;
                }
            }
        }
    }
    assert!(count >= 120);
}

#[test]
fn horizontalization_is_an_idempotent_projection() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 1..=2usize {
        for degree in 0..=(n + 1) {
            for _ in 0..10 {
                let a = random_form(&mut rng, n, 2, 2, degree);
                let h = a.horizontalize(n);
                assert_eq!(h.horizontalize(n), h);
                // the contact pieces sum back to the form
                let mut sum = Form::zero(degree);
                for (_, piece) in a.contact_split() {
                    sum = &sum + &piece;
                }
                assert_eq!(sum, a);
                // the floor component is horizontal for low degree
                if degree <= n {
                    assert!(h.contact_component(0) == h);
                }
            }
        }
    }
}

fn random_base_poly(rng: &mut ChaCha8Rng, degree: u32) -> Expr {
    let mut out = Expr::zero();
    for _ in 0..rng.gen_range(1..=3) {
        let mut term = Expr::constant(random_rational(rng));
        for _ in 0..rng.gen_range(0..=degree) {
            term = &term * &Expr::base_var(0);
        }
        out = &out + &term;
    }
    out
}

#[test]
fn contact_forms_vanish_along_prolonged_sections() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let spec = JetSpec::new(1, 1);
    for _ in 0..20 {
        // any form with a contact factor in every term
        let theta_part = Form::theta(0, random_index(&mut rng, 1, 2))
            .scale(&random_expr(&mut rng, 1, 1, 2));
        let section = [random_base_poly(&mut rng, 3)];
        assert!(theta_part.pullback_section(&spec, &section).is_zero());

        // the holonomic covector pulls back to the next derivative of the section
        let p = random_index(&mut rng, 1, 2);
        let dy = from_holonomic(0, &p);
        let pulled = dy.pullback_section(&spec, &section);
        let mut expect = section[0].clone();
        for _ in 0..=p.degree() {
            expect = expect.partial(&JetCoordinate::Base(0));
        }
        assert_eq!(pulled, Form::dx(0).scale(&expect));
    }
}

// ------------------------------------------------------------
// contraction homotopy
// ------------------------------------------------------------

#[test]
fn homotopy_defect_restricts_to_the_zero_section() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF1BE5);
    for n in 1..=2usize {
        let spec = JetSpec::new(n, 2);
        let zeros = vec![Expr::zero(); 2];
        for degree in 1..=(n + 1) {
            for _ in 0..15 {
                let a = random_form(&mut rng, n, 2, 2, degree);
                let parts = fiber_homotopy(&a, n).unwrap();
                assert_eq!(parts.defect, a.pullback_section(&spec, &zeros));
            }
        }
    }
}

#[test]
fn contact_supported_closed_forms_are_reconstructed_exactly() {
    // differentials of contact-supported forms stay contact supported, so
    // the homotopy identity has no defect on them
    let mut rng = ChaCha8Rng::seed_from_u64(0xC10AD);
    for n in 1..=2usize {
        for degree in 1..=n {
            for _ in 0..15 {
                let seed = random_form(&mut rng, n, 2, 1, degree);
                let contact_only = {
                    let mut out = Form::zero(degree);
                    for (c, piece) in seed.contact_split() {
                        if c >= 1 {
                            out = &out + &piece;
                        }
                    }
                    out
                };
                let a = contact_only.exterior_d(n);
                if a.is_zero() {
                    continue;
                }
                let parts = fiber_homotopy(&a, n).unwrap();
                assert!(parts.defect.is_zero());
            }
        }
    }
}

// ------------------------------------------------------------
// total derivative laws
// ------------------------------------------------------------

#[test]
fn iterated_derivatives_follow_the_weighted_leibniz_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1E1B);
    let n = 2;
    for _ in 0..12 {
        let f = random_expr(&mut rng, n, 2, 1);
        let g = random_expr(&mut rng, n, 2, 1);
        let p = random_index(&mut rng, n, 2);
        let product = (&f * &g).total_derivative_multi(&p);
        let mut expanded = Expr::zero();
        for (q, t) in multiindex::splittings(&p) {
            let weight = BigRational::from_integer(BigInt::from(q.multinomial(&t)));
            let piece = &f.total_derivative_multi(&q) * &g.total_derivative_multi(&t);
            expanded = &expanded + &piece.scale(&weight);
        }
        assert_eq!(product, expanded);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn total_derivatives_commute(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_expr(&mut rng, 2, 2, 2);
        let ab = f.total_derivative(0).total_derivative(1);
        let ba = f.total_derivative(1).total_derivative(0);
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn total_derivative_is_a_derivation(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_expr(&mut rng, 1, 2, 2);
        let g = random_expr(&mut rng, 1, 2, 2);
        let left = (&f * &g).total_derivative(0);
        let right = &(&f.total_derivative(0) * &g) + &(&f * &g.total_derivative(0));
        prop_assert_eq!(left, right);
    }

    #[test]
    fn graded_lex_is_a_total_order_with_degree_first(a in proptest::collection::vec(0u32..4, 2), b in proptest::collection::vec(0u32..4, 2)) {
        let p = MultiIndex::from_entries(a);
        let q = MultiIndex::from_entries(b);
        if p.degree() < q.degree() {
            prop_assert!(p < q);
        }
        if p == q {
            prop_assert!(p.cmp(&q) == std::cmp::Ordering::Equal);
        } else {
            prop_assert!(p.cmp(&q) != std::cmp::Ordering::Equal);
        }
    }
}
