//! Inverse problem of the calculus of variations: homotopy operators,
//! Lagrangian reconstruction, and null densities.
//!
//! The fiber contraction scales the chart fibers toward the zero section and
//! integrates the Liouville contraction along the scaling; on polynomial
//! coefficients the parameter integral collapses to the rational weight
//! `1/(fiber degree + contact factors)` per term, so the operator is exact.
//! Contracting commutes with the count of what it cannot see: the part of a
//! form with no contact factor and no fiber dependence survives untouched,
//! and the homotopy identity returns exactly the restriction of the form to
//! the zero section as its defect.

use crate::forms::{BasisCovector, Form};
use crate::jetalg::{Expr, JetCoordinate, JetSpec, Monomial};
use crate::multiindex::{self, MultiIndex};
use crate::solve;
use crate::varcalc::{self, HelmholtzTensor, Lagrangian, SourceForm};
use num::{BigInt, BigRational, One};

#[derive(Debug, thiserror::Error)]
pub enum InverseError {
    #[error("source form fails the Helmholtz conditions: {tensor}")]
    NotVariational { tensor: HelmholtzTensor },
    #[error("density is not variationally trivial: {source_form}")]
    NotTrivial { source_form: SourceForm },
    #[error("homotopy needs a form of positive degree")]
    ZeroDegree,
    #[error("no density of order at most {cap} reproduces the source form (best found: order {achieved})")]
    OrderCap { cap: u32, achieved: u32 },
    #[error("internal invariant violated: {what}")]
    Internal { what: String },
}

fn internal(what: impl Into<String>) -> InverseError {
    InverseError::Internal { what: what.into() }
}

// ============================================================
// Fiber homotopy
// ============================================================

/// Contraction `K a` and the homotopy defect `a - d(K a) - K(d a)`, which
/// equals the restriction of `a` to the zero section. In particular the
/// defect vanishes on closed forms that are supported on the contact part
/// of the cobasis, the shape everything downstream feeds in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberHomotopy {
    pub contraction: Form,
    pub defect: Form,
}

/// Apply the contraction `K` and report the homotopy defect. `n` is the
/// number of base directions of the chart the form lives on.
pub fn fiber_homotopy(a: &Form, n: usize) -> Result<FiberHomotopy, InverseError> {
    if a.degree() == 0 {
        return Err(InverseError::ZeroDegree);
    }
    let contraction = fiber_contraction(a);
    let reconstructed = &contraction.exterior_d(n) + &fiber_contraction(&a.exterior_d(n));
    let defect = a - &reconstructed;
    Ok(FiberHomotopy { contraction, defect })
}

/// The raw contraction: per term, drop one contact factor with its
/// alternating sign, multiply by the jet coordinate the factor tracks, and
/// weight each monomial by `1/(fiber degree + contact factors)`.
fn fiber_contraction(a: &Form) -> Form {
    let mut out = Form::zero(a.degree().saturating_sub(1));
    for (key, coeff) in a.terms() {
        let contact_factors = key.iter().filter(|c| c.is_contact()).count() as u32;
        if contact_factors == 0 {
            continue;
        }
        for (s, cov) in key.iter().enumerate() {
            let BasisCovector::Theta { field, index } = cov else {
                continue;
            };
            let y = Monomial::var(JetCoordinate::field(*field, index.clone()));
            let mut new_coeff = Expr::zero();
            for (mono, c) in coeff.terms() {
                let weight = BigRational::new(
                    BigInt::one(),
                    BigInt::from(mono.fiber_degree() + contact_factors),
                );
                let mut scaled = c * &weight;
                if s % 2 == 1 {
                    scaled = -scaled;
                }
                new_coeff = &new_coeff + &Expr::from_monomial(mono.times(&y), scaled);
            }
            let reduced: Vec<BasisCovector> = key
                .iter()
                .enumerate()
                .filter(|(t, _)| *t != s)
                .map(|(_, c)| c.clone())
                .collect();
            out = &out + &Form::from_term(reduced, new_coeff);
        }
    }
    out
}

// ============================================================
// Lagrangian reconstruction
// ============================================================

/// Radially integrated density `sum_i y^i E_i` with the weight `1/(fiber
/// degree + 1)` per monomial.
fn vainberg_density(e: &SourceForm) -> Expr {
    let n = e.spec().n();
    let mut density = Expr::zero();
    for (i, component) in e.components().iter().enumerate() {
        let y = Monomial::var(JetCoordinate::field(i, MultiIndex::zero(n)));
        for (mono, c) in component.terms() {
            let weight = BigRational::new(BigInt::one(), BigInt::from(mono.fiber_degree() + 1));
            density = &density + &Expr::from_monomial(mono.times(&y), c * &weight);
        }
    }
    density
}

/// Straight-line reconstruction of a density from a locally variational
/// source form; the result has the order of the source form.
pub fn volterra_vainberg(e: &SourceForm) -> Result<Lagrangian, InverseError> {
    let tensor = varcalc::helmholtz(e);
    if !tensor.is_zero() {
        return Err(InverseError::NotVariational { tensor });
    }
    Ok(Lagrangian::new(e.spec().clone(), vainberg_density(e)))
}

/// A density together with the order the straight-line reconstruction would
/// have produced for the same source form.
#[derive(Clone, Debug)]
pub struct MinimalLagrangian {
    pub lagrangian: Lagrangian,
    pub volterra_vainberg_order: u32,
}

fn el_matches(spec: &JetSpec, density: &Expr, e: &SourceForm) -> bool {
    let candidate = Lagrangian::new(spec.clone(), density.clone());
    varcalc::euler_lagrange(&candidate).components() == e.components()
}

/// Coefficient of the volume form of a purely horizontal `n`-form.
fn horizontal_density(form: &Form, spec: &JetSpec) -> Result<Expr, InverseError> {
    let n = spec.n();
    if form.degree() != n || &form.horizontalize(n) != form {
        return Err(internal("expected a purely horizontal density form"));
    }
    let volume_key: Vec<BasisCovector> = (0..n).map(BasisCovector::Dx).collect();
    Ok(form.coefficient(&volume_key))
}

/// All monomials over the chart with jet order at most `k`, fiber degree at
/// most `y_cap` and base degree at most `x_cap`, in canonical order.
fn ansatz_monomials(spec: &JetSpec, k: u32, y_cap: u32, x_cap: u32) -> Vec<Monomial> {
    let n = spec.n();
    let mut coords: Vec<JetCoordinate> = (0..n).map(JetCoordinate::Base).collect();
    for i in 0..spec.m() {
        for p in multiindex::enumerate_upto(n, k) {
            coords.push(JetCoordinate::field(i, p));
        }
    }
    let mut out = Vec::new();
    let mut stack: Vec<(JetCoordinate, u32)> = Vec::new();
    fn recurse(
        coords: &[JetCoordinate],
        pos: usize,
        x_left: u32,
        y_left: u32,
        stack: &mut Vec<(JetCoordinate, u32)>,
        out: &mut Vec<Monomial>,
    ) {
        if pos == coords.len() {
            let mono = stack
                .iter()
                .fold(Monomial::one(), |acc, (c, e)| {
                    let mut single = Monomial::one();
                    for _ in 0..*e {
                        single = single.times(&Monomial::var(c.clone()));
                    }
                    acc.times(&single)
                });
            out.push(mono);
            return;
        }
        let budget = match &coords[pos] {
            JetCoordinate::Base(_) => x_left,
            JetCoordinate::Field { .. } => y_left,
        };
        for e in 0..=budget {
            if e > 0 {
                stack.push((coords[pos].clone(), e));
            }
            let (nx, ny) = match &coords[pos] {
                JetCoordinate::Base(_) => (x_left - e, y_left),
                JetCoordinate::Field { .. } => (x_left, y_left - e),
            };
            recurse(coords, pos + 1, nx, ny, stack, out);
            if e > 0 {
                stack.pop();
            }
        }
    }
    recurse(&coords, 0, x_cap, y_cap, &mut stack, &mut out);
    out.sort();
    out.dedup();
    out
}

/// Search for a density of jet order exactly at most `k` whose source form
/// is `e`, by solving the linear system over a bounded monomial ansatz.
fn solve_order(spec: &JetSpec, e: &SourceForm, k: u32, candidate: &Expr) -> Option<Expr> {
    let y_cap = (e.fiber_degree() + 1).max(candidate.fiber_degree());
    let x_cap = (e.base_degree() + k + 1).max(candidate.base_degree());
    let monomials = ansatz_monomials(spec, k, y_cap, x_cap);
    let columns: Vec<Vec<Expr>> = monomials
        .iter()
        .map(|m| {
            let l = Lagrangian::new(spec.clone(), Expr::from_monomial(m.clone(), BigRational::one()));
            varcalc::euler_lagrange(&l).components().to_vec()
        })
        .collect();
    let coeffs = solve::solve_linear(&columns, e.components())?;
    let mut density = Expr::zero();
    for (m, c) in monomials.iter().zip(&coeffs) {
        density = &density + &Expr::from_monomial(m.clone(), c.clone());
    }
    Some(density)
}

/// Reconstruct a density of least jet order for a locally variational
/// source form.
///
/// The homotopy pipeline produces a verified candidate (contract the source
/// form and its differential, horizontalize, check the round trip, fall
/// back to the straight-line density if the contracted one misses); orders
/// strictly below the candidate's are then searched exactly, lowest first,
/// and the first hit wins. `order_cap` bounds the acceptable order; it
/// defaults to `2 * order(E) + 1`, which the straight-line density always
/// satisfies.
pub fn minimal_lagrangian(
    e: &SourceForm,
    order_cap: Option<u32>,
) -> Result<MinimalLagrangian, InverseError> {
    let tensor = varcalc::helmholtz(e);
    if !tensor.is_zero() {
        return Err(InverseError::NotVariational { tensor });
    }
    let spec = e.spec().clone();
    let n = spec.n();

    let vv_density = vainberg_density(e);
    let volterra_vainberg_order = vv_density.order();

    // homotopy pipeline: alpha is exact up to contact terms, so contracting
    // alpha and the contact part of d(alpha) yields a horizontal density
    let alpha = e.to_form();
    let beta = fiber_contraction(&alpha.exterior_d(n));
    let gamma = fiber_contraction(&(&alpha - &beta));
    let mut candidate = horizontal_density(&gamma, &spec)?;
    if !el_matches(&spec, &candidate, e) {
        candidate = -&candidate;
        if !el_matches(&spec, &candidate, e) {
            candidate = vv_density.clone();
            if !el_matches(&spec, &candidate, e) {
                return Err(internal("no reconstruction reproduced the source form"));
            }
        }
    }

    let cap = order_cap.unwrap_or(2 * e.order() + 1);
    let candidate_order = candidate.order();
    let search_top = candidate_order.min(cap + 1);
    let search_bottom = e.order().div_ceil(2);
    let mut density = candidate;
    for k in search_bottom..search_top {
        if let Some(found) = solve_order(&spec, e, k, &density) {
            density = found;
            break;
        }
    }
    if density.order() > cap {
        return Err(InverseError::OrderCap {
            cap,
            achieved: density.order(),
        });
    }
    Ok(MinimalLagrangian {
        lagrangian: Lagrangian::new(spec, density),
        volterra_vainberg_order,
    })
}

// ============================================================
// Null densities
// ============================================================

/// A density is variationally trivial when its source form vanishes.
pub fn is_variationally_trivial(l: &Lagrangian) -> bool {
    varcalc::euler_lagrange(l).is_zero()
}

/// Fiber degree of a monomial counted over jet coordinates of exactly the
/// given index degree.
fn group_degree(mono: &Monomial, index_degree: u32) -> u32 {
    mono.factors()
        .iter()
        .filter(|(c, _)| match c {
            JetCoordinate::Field { index, .. } => index.degree() == index_degree,
            JetCoordinate::Base(_) => false,
        })
        .map(|(_, e)| e)
        .sum()
}

/// Horizontal potential of a variationally trivial density: a horizontal
/// `(n-1)`-form `sigma` with `d_h sigma = L omega` and order at most the
/// order of `L`.
///
/// Over one base direction the potential is peeled off exactly: a trivial
/// density is affine in its top derivatives, radial integration over the
/// next-lower jet group splits off a total derivative, and the order drops
/// by at least one each round. Over several base directions the components
/// of `sigma` are found by an exact linear solve over a bounded ansatz.
pub fn trivial_primitive(l: &Lagrangian) -> Result<Form, InverseError> {
    let e = varcalc::euler_lagrange(l);
    if !e.is_zero() {
        return Err(InverseError::NotTrivial { source_form: e });
    }
    let spec = l.spec().clone();
    let n = spec.n();

    let sigma = if n == 1 {
        let mut rest = l.density().clone();
        let mut sigma = Expr::zero();
        loop {
            let k = rest.order();
            if k == 0 {
                break;
            }
            let mut g = Expr::zero();
            for i in 0..spec.m() {
                let top = JetCoordinate::field(i, MultiIndex::from_entries(vec![k]));
                let slope = rest.partial(&top);
                if slope.order() >= k {
                    return Err(internal("trivial density is not affine in its top derivatives"));
                }
                let y = Monomial::var(JetCoordinate::field(i, MultiIndex::from_entries(vec![k - 1])));
                for (mono, c) in slope.terms() {
                    let weight = BigRational::new(
                        BigInt::one(),
                        BigInt::from(group_degree(mono, k - 1) + 1),
                    );
                    g = &g + &Expr::from_monomial(mono.times(&y), c * &weight);
                }
            }
            rest = &rest - &g.total_derivative(0);
            sigma = &sigma + &g;
            if rest.order() >= k {
                return Err(internal("peeling did not lower the order"));
            }
        }
        if rest.fiber_degree() != 0 {
            return Err(internal("order-zero remainder still depends on the fibers"));
        }
        sigma = &sigma + &rest.integrate_base(0);
        Form::from_expr(sigma)
    } else {
        let order = l.order();
        let y_cap = l.density().fiber_degree();
        let x_cap = l.density().base_degree() + 1;
        let monomials = ansatz_monomials(&spec, order, y_cap, x_cap);
        let mut columns = Vec::with_capacity(n * monomials.len());
        for lambda in 0..n {
            for m in &monomials {
                let col = Expr::from_monomial(m.clone(), BigRational::one()).total_derivative(lambda);
                columns.push(vec![col]);
            }
        }
        let target = vec![l.density().clone()];
        let coeffs = solve::solve_linear(&columns, &target)
            .ok_or_else(|| internal("no polynomial potential within the ansatz bounds"))?;
        let mut out = Form::zero(n - 1);
        for lambda in 0..n {
            let mut component = Expr::zero();
            for (j, m) in monomials.iter().enumerate() {
                let c = &coeffs[lambda * monomials.len() + j];
                component = &component + &Expr::from_monomial(m.clone(), c.clone());
            }
            out = &out + &Form::omega_lambda(n, lambda).scale(&component);
        }
        out
    };

    if &sigma.d_h(n) != &l.to_form() {
        return Err(internal("potential does not reproduce the density"));
    }
    Ok(sigma)
}
