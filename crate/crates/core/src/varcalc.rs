//! First and second variation of horizontal densities.
//!
//! The central operation splits a one-contact form of top horizontal degree
//! into a source part (only zero-index contact factors) minus the horizontal
//! differential of a momentum; the source part is unique, the momentum is
//! gauge dependent and three gauges are provided. Everything downstream is
//! built on that splitting: Euler-Lagrange expressions are the source part
//! of the vertical differential of the density, and the Helmholtz tensor is
//! the obstruction to a source form being such a source part.
//!
//! Sign conventions: a source form is written `E_i theta^i ^ omega`, a
//! momentum `p^lambda_i,q theta^i_q ^ omega_lambda`, and the splitting reads
//! `alpha = E - d_h p`.

use crate::forms::{BasisCovector, Form};
use crate::jetalg::{Expr, JetCoordinate, JetSpec};
use crate::multiindex::{self, MultiIndex};
use num::{BigInt, BigRational, One};
use std::collections::BTreeMap;
use std::fmt;

// ============================================================
// Types
// ============================================================

/// Momentum gauge for the source/divergence splitting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gauge {
    /// Closed-form momentum for inputs with contact indices of degree at
    /// most one.
    Natural,
    /// Symmetrized second-order momentum; its antisymmetric residue
    /// vanishes by construction.
    Quasisymmetric,
    /// Graded-lex peeling; works at every order.
    LexPeel,
}

impl fmt::Display for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self {
            Gauge::Natural => "natural",
            Gauge::Quasisymmetric => "quasisym",
            Gauge::LexPeel => "lex",
        };
        f.write_str(label)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum VarError {
    #[error("expected a one-contact form of degree n+1; offending term: {term}")]
    SourceShape { term: String },
    #[error("expected two-contact terms with a zero-index factor; offending term: {term}")]
    SecondVariationShape { term: String },
    #[error("{got} source components for a chart with {expected} fields")]
    ComponentCount { got: usize, expected: usize },
    #[error("gauge `{gauge}` handles contact indices of degree at most {limit}, found {found}")]
    GaugeOrder { gauge: Gauge, limit: u32, found: u32 },
    #[error("component {what} must depend on base coordinates only")]
    SectionShape { what: String },
    #[error("integration box has {got} axes for a chart with {expected} base directions")]
    DomainDimension { got: usize, expected: usize },
    #[error("integration box is degenerate on axis {axis}")]
    DegenerateBox { axis: usize },
    #[error("internal invariant violated: {what}")]
    Internal { what: String },
}

/// Horizontal density `L omega`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lagrangian {
    spec: JetSpec,
    density: Expr,
}

impl Lagrangian {
    pub fn new(spec: JetSpec, density: Expr) -> Self {
        Lagrangian { spec, density }
    }

    pub fn spec(&self) -> &JetSpec {
        &self.spec
    }

    pub fn density(&self) -> &Expr {
        &self.density
    }

    pub fn order(&self) -> u32 {
        self.density.order()
    }

    /// The full horizontal form `L omega`.
    pub fn to_form(&self) -> Form {
        Form::volume(self.spec.n()).scale(&self.density)
    }
}

/// One-contact source form `E_i theta^i ^ omega`, one component per field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceForm {
    spec: JetSpec,
    components: Vec<Expr>,
}

impl SourceForm {
    pub fn new(spec: JetSpec, components: Vec<Expr>) -> Result<Self, VarError> {
        if components.len() != spec.m() {
            return Err(VarError::ComponentCount {
                got: components.len(),
                expected: spec.m(),
            });
        }
        Ok(SourceForm { spec, components })
    }

    pub fn spec(&self) -> &JetSpec {
        &self.spec
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Expr {
        &self.components[i]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Expr::is_zero)
    }

    pub fn order(&self) -> u32 {
        self.components.iter().map(Expr::order).max().unwrap_or(0)
    }

    pub fn fiber_degree(&self) -> u32 {
        self.components.iter().map(Expr::fiber_degree).max().unwrap_or(0)
    }

    pub fn base_degree(&self) -> u32 {
        self.components.iter().map(Expr::base_degree).max().unwrap_or(0)
    }

    /// Assemble `E_i theta^i ^ omega`.
    pub fn to_form(&self) -> Form {
        let n = self.spec.n();
        let mut out = Form::zero(n + 1);
        for (i, e) in self.components.iter().enumerate() {
            if e.is_zero() {
                continue;
            }
            let theta = Form::theta(i, MultiIndex::zero(n));
            out = &out + &theta.wedge(&Form::volume(n)).scale(e);
        }
        out
    }
}

impl fmt::Display for SourceForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .components
            .iter()
            .enumerate()
            .map(|(i, e)| format!("E_{} = {}", i + 1, e.format_with(&self.spec)))
            .collect();
        f.write_str(&parts.join("; "))
    }
}

/// Gauge-dependent momentum `p`, a one-contact form of horizontal degree
/// `n - 1` satisfying `alpha = E - d_h p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Momentum {
    form: Form,
    gauge: Gauge,
}

impl Momentum {
    pub fn form(&self) -> &Form {
        &self.form
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }
}

/// Helmholtz obstruction tensor `H^p_ij`, stored sparsely. The zero-index
/// block is antisymmetric in `(i, j)`; the tensor vanishes identically
/// exactly when the source form is locally variational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HelmholtzTensor {
    spec: JetSpec,
    components: BTreeMap<(MultiIndex, usize, usize), Expr>,
}

impl HelmholtzTensor {
    pub fn spec(&self) -> &JetSpec {
        &self.spec
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> impl Iterator<Item = (&(MultiIndex, usize, usize), &Expr)> {
        self.components.iter()
    }

    pub fn get(&self, p: &MultiIndex, i: usize, j: usize) -> Expr {
        self.components
            .get(&(p.clone(), i, j))
            .cloned()
            .unwrap_or_else(Expr::zero)
    }

    /// Assemble the obstruction two-form `H^p_ij theta^i_p ^ theta^j ^
    /// omega`.
    pub fn to_form(&self) -> Form {
        let n = self.spec.n();
        let mut out = Form::zero(n + 2);
        for ((p, i, j), h) in &self.components {
            let t1 = Form::theta(*i, p.clone());
            let t2 = Form::theta(*j, MultiIndex::zero(n));
            out = &out + &t1.wedge(&t2).wedge(&Form::volume(n)).scale(h);
        }
        out
    }
}

impl fmt::Display for HelmholtzTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .components
            .iter()
            .map(|((p, i, j), h)| {
                let entries: Vec<String> =
                    p.entries().iter().map(|k| k.to_string()).collect();
                format!(
                    "H^{{({})}}_{{{}{}}} = {}",
                    entries.join(","),
                    i + 1,
                    j + 1,
                    h.format_with(&self.spec)
                )
            })
            .collect();
        f.write_str(&parts.join("; "))
    }
}

// ============================================================
// Source / momentum splitting
// ============================================================

/// Read the coefficients `alpha^p_i` out of a one-contact form of degree
/// `n + 1`. Keys are stored with the contact factor last, so the
/// `theta ^ omega` orientation costs `(-1)^n`.
fn one_contact_coefficients(
    alpha: &Form,
    spec: &JetSpec,
) -> Result<BTreeMap<(usize, MultiIndex), Expr>, VarError> {
    let n = spec.n();
    let mut out: BTreeMap<(usize, MultiIndex), Expr> = BTreeMap::new();
    for (key, coeff) in alpha.terms() {
        let thetas: Vec<_> = key.iter().filter(|c| c.is_contact()).collect();
        if alpha.degree() != n + 1 || thetas.len() != 1 {
            return Err(VarError::SourceShape {
                term: render_term(key, coeff, spec),
            });
        }
        let BasisCovector::Theta { field, index } = thetas[0] else {
            unreachable!("filtered on contact factors");
        };
        let signed = if n % 2 == 1 { -coeff } else { coeff.clone() };
        let entry = out.entry((*field, index.clone())).or_insert_with(Expr::zero);
        *entry = &*entry + &signed;
    }
    out.retain(|_, c| !c.is_zero());
    Ok(out)
}

fn render_term(key: &[BasisCovector], coeff: &Expr, spec: &JetSpec) -> String {
    let covs: Vec<String> = key.iter().map(|c| c.format_with(spec)).collect();
    if covs.is_empty() {
        coeff.format_with(spec)
    } else {
        format!("({})*{}", coeff.format_with(spec), covs.join("^"))
    }
}

/// `theta^i_q ^ omega_lambda` scaled by `c`.
fn momentum_term(spec: &JetSpec, i: usize, q: &MultiIndex, lambda: usize, c: &Expr) -> Form {
    Form::theta(i, q.clone())
        .wedge(&Form::omega_lambda(spec.n(), lambda))
        .scale(c)
}

/// Split a one-contact form of degree `n + 1` as `alpha = E - d_h p`.
///
/// `E` is assembled by pushing `alpha + d_h p` back together and checking
/// that only zero-index contact factors survive; the closed-form expression
/// for `E` through iterated total derivatives is kept to the test suite as
/// an independent check.
pub fn kolar_decompose(
    alpha: &Form,
    spec: &JetSpec,
    gauge: Gauge,
) -> Result<(SourceForm, Momentum), VarError> {
    let n = spec.n();
    let coeffs = one_contact_coefficients(alpha, spec)?;
    let top = coeffs.keys().map(|(_, p)| p.degree()).max().unwrap_or(0);

    let momentum_form = match gauge {
        Gauge::Natural => {
            if top > 1 {
                return Err(VarError::GaugeOrder {
                    gauge,
                    limit: 1,
                    found: top,
                });
            }
            let mut p_form = Form::zero(n);
            for ((i, p), c) in &coeffs {
                if p.degree() != 1 {
                    continue;
                }
                let lambda = p.support().next().expect("degree-one index");
                p_form = &p_form + &momentum_term(spec, *i, &MultiIndex::zero(n), lambda, c);
            }
            p_form
        }
        Gauge::Quasisymmetric => {
            if top > 2 {
                return Err(VarError::GaugeOrder {
                    gauge,
                    limit: 2,
                    found: top,
                });
            }
            // symmetric representative of the degree-two block
            let half = BigRational::new(BigInt::one(), BigInt::from(2));
            let mut sym: BTreeMap<(usize, usize, usize), Expr> = BTreeMap::new();
            for ((i, p), c) in &coeffs {
                if p.degree() != 2 {
                    continue;
                }
                let dirs: Vec<usize> = p
                    .support()
                    .flat_map(|l| std::iter::repeat(l).take(p.entry(l) as usize))
                    .collect();
                let (mu, lambda) = (dirs[0], dirs[1]);
                if mu == lambda {
                    sym.insert((*i, mu, lambda), c.clone());
                } else {
                    sym.insert((*i, mu, lambda), c.scale(&half));
                    sym.insert((*i, lambda, mu), c.scale(&half));
                }
            }
            let mut p_form = Form::zero(n);
            for i in 0..spec.m() {
                for lambda in 0..n {
                    let first = coeffs
                        .get(&(i, MultiIndex::unit(n, lambda)))
                        .cloned()
                        .unwrap_or_else(Expr::zero);
                    let mut c = first;
                    for mu in 0..n {
                        if let Some(a) = sym.get(&(i, mu, lambda)) {
                            c = &c - &a.total_derivative(mu);
                        }
                    }
                    if !c.is_zero() {
                        p_form =
                            &p_form + &momentum_term(spec, i, &MultiIndex::zero(n), lambda, &c);
                    }
                    for mu in 0..n {
                        if let Some(a) = sym.get(&(i, mu, lambda)) {
                            p_form =
                                &p_form + &momentum_term(spec, i, &MultiIndex::unit(n, mu), lambda, a);
                        }
                    }
                }
            }
            p_form
        }
        Gauge::LexPeel => {
            let mut residual: BTreeMap<(usize, MultiIndex), Expr> = coeffs.clone();
            let mut p_form = Form::zero(n);
            loop {
                let Some((i, p)) = residual
                    .iter()
                    .filter(|((_, p), _)| p.degree() >= 1)
                    .map(|((i, p), _)| (*i, p.clone()))
                    .max_by(|(ia, pa), (ib, pb)| pa.cmp(pb).then(ia.cmp(ib)))
                else {
                    break;
                };
                let c = residual.remove(&(i, p.clone())).expect("key just found");
                if c.is_zero() {
                    continue;
                }
                let lambda = p.support().last().expect("positive degree");
                let q = p.lowered(lambda).expect("support direction");
                p_form = &p_form + &momentum_term(spec, i, &q, lambda, &c);
                let down = residual.entry((i, q)).or_insert_with(Expr::zero);
                *down = &*down - &c.total_derivative(lambda);
            }
            p_form
        }
    };

    // reassemble: alpha + d_h p must be a pure source form
    let source_form = &alpha.clone() + &momentum_form.d_h(n);
    let source_coeffs = one_contact_coefficients(&source_form, spec)?;
    let mut components = vec![Expr::zero(); spec.m()];
    for ((i, p), c) in source_coeffs {
        if !p.is_zero() {
            return Err(VarError::Internal {
                what: format!(
                    "momentum gauge `{gauge}` left a contact index of degree {}",
                    p.degree()
                ),
            });
        }
        components[i] = c;
    }
    let source = SourceForm {
        spec: spec.clone(),
        components,
    };
    let momentum = Momentum {
        form: momentum_form,
        gauge,
    };
    Ok((source, momentum))
}

/// Source and momentum of the vertical differential of `L omega`.
pub fn first_variation(
    l: &Lagrangian,
    gauge: Gauge,
) -> Result<(SourceForm, Momentum), VarError> {
    kolar_decompose(&l.to_form().d_v(), &l.spec, gauge)
}

/// Euler-Lagrange source form of a horizontal density.
pub fn euler_lagrange(l: &Lagrangian) -> SourceForm {
    let (source, _) = first_variation(l, Gauge::LexPeel)
        .expect("the vertical differential of a density is always one-contact");
    source
}

// ============================================================
// Helmholtz obstruction
// ============================================================

/// Helmholtz tensor of a source form. Vanishes identically exactly when
/// some density has this source form as its Euler-Lagrange expression.
pub fn helmholtz(e: &SourceForm) -> HelmholtzTensor {
    let spec = e.spec.clone();
    let n = spec.n();
    let m = spec.m();
    let s = e.order();
    let half = BigRational::new(BigInt::one(), BigInt::from(2));

    // raw skew pairing C^p_ij, antisymmetrized on the zero-index block
    let mut raw: BTreeMap<(MultiIndex, usize, usize), Expr> = BTreeMap::new();
    for p in multiindex::enumerate_upto(n, s) {
        for i in 0..m {
            for j in 0..m {
                let direct = e.components[j].partial(&JetCoordinate::field(i, p.clone()));
                let mut reflected = Expr::zero();
                for q in multiindex::enumerate_upto(n, s - p.degree()) {
                    let pq = p.plus(&q);
                    let slope = e.components[i].partial(&JetCoordinate::field(j, pq.clone()));
                    if slope.is_zero() {
                        continue;
                    }
                    let mut w = BigRational::from_integer(BigInt::from(p.multinomial(&q)));
                    if pq.degree() % 2 == 1 {
                        w = -w;
                    }
                    reflected = &reflected + &slope.total_derivative_multi(&q).scale(&w);
                }
                let c = (&direct - &reflected).scale(&half);
                if !c.is_zero() {
                    raw.insert((p.clone(), i, j), c);
                }
            }
        }
    }

    let mut components: BTreeMap<(MultiIndex, usize, usize), Expr> = BTreeMap::new();
    for ((p, i, j), c) in &raw {
        if !p.is_zero() {
            components.insert((p.clone(), *i, *j), c.clone());
        }
    }
    // the zero-index block enters the obstruction form only through its
    // antisymmetric part; store that part so the tensor is honest about it
    let zero_index = MultiIndex::zero(n);
    for i in 0..m {
        for j in 0..m {
            let cij = raw
                .get(&(zero_index.clone(), i, j))
                .cloned()
                .unwrap_or_else(Expr::zero);
            let cji = raw
                .get(&(zero_index.clone(), j, i))
                .cloned()
                .unwrap_or_else(Expr::zero);
            let h = (&cij - &cji).scale(&half);
            if !h.is_zero() {
                components.insert((zero_index.clone(), i, j), h);
            }
        }
    }

    HelmholtzTensor { spec, components }
}

pub fn is_locally_variational(e: &SourceForm) -> bool {
    helmholtz(e).is_zero()
}

// ============================================================
// Second variation
// ============================================================

/// Canonical representative and residual of a two-contact form of degree
/// `n + 2` whose terms all carry a zero-index contact factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecondVariation {
    /// Source-like projection `H`.
    pub canonical: Form,
    /// `G = H - beta`; exact by construction, kept so callers can verify.
    pub residual: Form,
}

/// Extract the coefficients `beta^p_ij` of `beta = beta^p_ij theta^i_p ^
/// theta^j ^ omega` and build the canonical skew representative
/// `H = (1/2) Htilde^p_ij theta^i_p ^ theta^j ^ omega` with
/// `Htilde^p_ij = beta^p_ij - sum_q (-1)^{|p+q|} ((p+q)! / (p! q!)) J_q
/// beta^{p+q}_ji`.
pub fn second_variation(beta: &Form, spec: &JetSpec) -> Result<SecondVariation, VarError> {
    let n = spec.n();
    let half = BigRational::new(BigInt::one(), BigInt::from(2));

    let mut coeffs: BTreeMap<(MultiIndex, usize, usize), Expr> = BTreeMap::new();
    let mut put = |p: MultiIndex, i: usize, j: usize, c: Expr| {
        let entry = coeffs.entry((p, i, j)).or_insert_with(Expr::zero);
        *entry = &*entry + &c;
    };
    for (key, coeff) in beta.terms() {
        let thetas: Vec<_> = key
            .iter()
            .filter_map(|c| match c {
                BasisCovector::Theta { field, index } => Some((*field, index.clone())),
                BasisCovector::Dx(_) => None,
            })
            .collect();
        if beta.degree() != n + 2 || thetas.len() != 2 {
            return Err(VarError::SecondVariationShape {
                term: render_term(key, coeff, spec),
            });
        }
        // canonical key order puts the two contact factors last, and moving
        // the pair across the n base factors is an even permutation, so the
        // stored coefficient is already the one of theta ^ theta ^ omega
        let (i1, p1) = thetas[0].clone();
        let (i2, p2) = thetas[1].clone();
        match (p1.is_zero(), p2.is_zero()) {
            (false, true) => put(p1, i1, i2, coeff.clone()),
            (true, false) => put(p2, i2, i1, -coeff),
            (true, true) => {
                put(p1, i1, i2, coeff.scale(&half));
                put(p2, i2, i1, -&coeff.scale(&half));
            }
            (false, false) => {
                return Err(VarError::SecondVariationShape {
                    term: render_term(key, coeff, spec),
                });
            }
        }
    }
    coeffs.retain(|_, c| !c.is_zero());

    let s = coeffs.keys().map(|(p, _, _)| p.degree()).max().unwrap_or(0);
    let m = spec.m();
    let mut canonical = Form::zero(n + 2);
    for p in multiindex::enumerate_upto(n, s) {
        for i in 0..m {
            for j in 0..m {
                let direct = coeffs
                    .get(&(p.clone(), i, j))
                    .cloned()
                    .unwrap_or_else(Expr::zero);
                let mut reflected = Expr::zero();
                for q in multiindex::enumerate_upto(n, s - p.degree()) {
                    let pq = p.plus(&q);
                    let Some(b) = coeffs.get(&(pq.clone(), j, i)) else {
                        continue;
                    };
                    let mut w = BigRational::from_integer(BigInt::from(p.multinomial(&q)));
                    if pq.degree() % 2 == 1 {
                        w = -w;
                    }
                    reflected = &reflected + &b.total_derivative_multi(&q).scale(&w);
                }
                let h = (&direct - &reflected).scale(&half);
                if h.is_zero() {
                    continue;
                }
                let t1 = Form::theta(i, p.clone());
                let t2 = Form::theta(j, MultiIndex::zero(n));
                canonical = &canonical + &t1.wedge(&t2).wedge(&Form::volume(n)).scale(&h);
            }
        }
    }

    let residual = &canonical - beta;
    Ok(SecondVariation { canonical, residual })
}

// ============================================================
// Numeric first variation
// ============================================================

/// Finite-difference and source-pairing values of the first variation along
/// a concrete section; agreement of the two is the numeric cross-check of
/// the symbolic Euler-Lagrange computation.
#[derive(Clone, Copy, Debug)]
pub struct NumericFirstVariation {
    /// Central finite difference of the action in the variation direction.
    pub finite_difference: f64,
    /// Grid integral of the Euler-Lagrange components against the
    /// variation.
    pub source_pairing: f64,
}

/// Both sides of the first-variation identity for a polynomial section and
/// variation over a coordinate box, by composite Simpson quadrature with
/// `intervals` subdivisions per axis.
///
/// The variation is used as given; for the identity to hold it should
/// vanish to high enough order on the boundary of the box.
pub fn numeric_first_variation(
    l: &Lagrangian,
    section: &[Expr],
    variation: &[Expr],
    domain: &[(f64, f64)],
    intervals: usize,
) -> Result<NumericFirstVariation, VarError> {
    let spec = &l.spec;
    let n = spec.n();
    let m = spec.m();
    if domain.len() != n {
        return Err(VarError::DomainDimension {
            got: domain.len(),
            expected: n,
        });
    }
    for (axis, (a, b)) in domain.iter().enumerate() {
        if !(a < b) {
            return Err(VarError::DegenerateBox { axis });
        }
    }
    for (what, list) in [("section", section), ("variation", variation)] {
        if list.len() != m {
            return Err(VarError::ComponentCount {
                got: list.len(),
                expected: m,
            });
        }
        for (i, c) in list.iter().enumerate() {
            if c.fiber_degree() != 0 {
                return Err(VarError::SectionShape {
                    what: format!("{what}[{}]", i + 1),
                });
            }
        }
    }

    // exact prolongation: substitute each jet coordinate by the matching
    // partial of the shifted section, with the shift an exact rational
    let eps = BigRational::new(BigInt::one(), BigInt::from(1000));
    let shifted = |direction: &BigRational| -> Vec<Expr> {
        section
            .iter()
            .zip(variation)
            .map(|(s, v)| s + &v.scale(direction))
            .collect()
    };
    let prolong = |f: &Expr, s: &[Expr]| -> Expr {
        let mut map: BTreeMap<JetCoordinate, Expr> = BTreeMap::new();
        for coord in f.coordinates() {
            let JetCoordinate::Field { field, index } = &coord else {
                continue;
            };
            let mut value = s[*field].clone();
            for lambda in 0..index.width() {
                for _ in 0..index.entry(lambda) {
                    value = value.partial(&JetCoordinate::Base(lambda));
                }
            }
            map.insert(coord.clone(), value);
        }
        f.substitute(&map)
    };

    let plus = prolong(&l.density, &shifted(&eps));
    let minus = prolong(&l.density, &shifted(&-eps.clone()));
    let slope = (&plus - &minus).scale(&BigRational::new(BigInt::from(500), BigInt::one()));
    let finite_difference = simpson(&slope, domain, intervals);

    let e = euler_lagrange(l);
    let mut pairing_density = Expr::zero();
    for i in 0..m {
        let on_section = prolong(&e.components[i], section);
        pairing_density = &pairing_density + &(&on_section * &variation[i]);
    }
    let source_pairing = simpson(&pairing_density, domain, intervals);

    Ok(NumericFirstVariation {
        finite_difference,
        source_pairing,
    })
}

/// Composite Simpson rule over a box, tensorized one axis at a time.
/// `f` must depend on base coordinates only.
fn simpson(f: &Expr, domain: &[(f64, f64)], intervals: usize) -> f64 {
    let steps = intervals.max(2);
    let steps = steps + steps % 2;
    let mut point = vec![0.0; domain.len()];
    simpson_axis(f, domain, steps, 0, &mut point)
}

fn simpson_axis(f: &Expr, domain: &[(f64, f64)], steps: usize, axis: usize, point: &mut [f64]) -> f64 {
    if axis == domain.len() {
        return f.eval_f64(|coord| match coord {
            JetCoordinate::Base(lambda) => point[*lambda],
            JetCoordinate::Field { .. } => f64::NAN,
        });
    }
    let (a, b) = domain[axis];
    let h = (b - a) / steps as f64;
    let mut acc = 0.0;
    for k in 0..=steps {
        point[axis] = a + h * k as f64;
        let w = if k == 0 || k == steps {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * simpson_axis(f, domain, steps, axis + 1, point);
    }
    acc * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::Zero;

    fn spec1() -> JetSpec {
        JetSpec::new(1, 1)
    }

    fn mi(entries: &[u32]) -> MultiIndex {
        MultiIndex::from_entries(entries.to_vec())
    }

    fn u(p: &[u32]) -> Expr {
        Expr::field_var(0, mi(p))
    }

    #[test]
    fn splitting_a_first_order_term() {
        // u_x theta_x ^ dx = (-u_xx) theta ^ dx - d_h(u_x theta)
        let spec = spec1();
        let alpha = Form::theta(0, mi(&[1])).wedge(&Form::dx(0)).scale(&u(&[1]));
        for gauge in [Gauge::Natural, Gauge::Quasisymmetric, Gauge::LexPeel] {
            let (e, p) = kolar_decompose(&alpha, &spec, gauge).unwrap();
            assert_eq!(e.components(), &[-&u(&[2])]);
            assert_eq!(p.form(), &Form::theta(0, mi(&[0])).scale(&u(&[1])));
            // defining identity
            let back = &e.to_form() - &p.form().d_h(1);
            assert_eq!(back, alpha);
        }
    }

    #[test]
    fn splitting_a_second_order_term() {
        // u_xx theta_xx ^ dx: source u_xxxx theta ^ dx, quasisymmetric
        // momentum -u_xxx theta + u_xx theta_x
        let spec = spec1();
        let alpha = Form::theta(0, mi(&[2])).wedge(&Form::dx(0)).scale(&u(&[2]));
        let (e, p) = kolar_decompose(&alpha, &spec, Gauge::Quasisymmetric).unwrap();
        assert_eq!(e.components(), &[u(&[4])]);
        let expect = &Form::theta(0, mi(&[0])).scale(&-&u(&[3]))
            + &Form::theta(0, mi(&[1])).scale(&u(&[2]));
        assert_eq!(p.form(), &expect);

        let (e2, p2) = kolar_decompose(&alpha, &spec, Gauge::LexPeel).unwrap();
        assert_eq!(e2.components(), e.components());
        let back = &e2.to_form() - &p2.form().d_h(1);
        assert_eq!(back, alpha);

        // the closed-form gauge for first-order inputs refuses this one
        let err = kolar_decompose(&alpha, &spec, Gauge::Natural).unwrap_err();
        assert!(matches!(err, VarError::GaugeOrder { limit: 1, found: 2, .. }));
    }

    #[test]
    fn euler_lagrange_of_the_free_density() {
        let spec = spec1();
        let l = Lagrangian::new(spec, &Expr::rational(1, 2) * &u(&[1]).pow(2));
        let e = euler_lagrange(&l);
        assert_eq!(e.components(), &[-&u(&[2])]);
    }

    #[test]
    fn euler_lagrange_of_the_oscillator() {
        let spec = spec1();
        let density = &(&Expr::rational(1, 2) * &u(&[1]).pow(2))
            - &(&Expr::rational(1, 2) * &u(&[0]).pow(2));
        let l = Lagrangian::new(spec, density);
        let e = euler_lagrange(&l);
        let expect = -&(&u(&[2]) + &u(&[0]));
        assert_eq!(e.components(), &[expect]);
    }

    #[test]
    fn total_divergences_have_no_source() {
        // u + x u_x = D_x(x u)
        let spec = spec1();
        let density = &u(&[0]) + &(&Expr::base_var(0) * &u(&[1]));
        let e = euler_lagrange(&Lagrangian::new(spec, density));
        assert!(e.is_zero());
    }

    #[test]
    fn helmholtz_flags_a_bare_first_derivative() {
        let spec = spec1();
        let e = SourceForm::new(spec, vec![u(&[1])]).unwrap();
        let h = helmholtz(&e);
        assert!(!h.is_zero());
        assert_eq!(h.get(&mi(&[1]), 0, 0), Expr::one());
        assert_eq!(h.get(&mi(&[0]), 0, 0), Expr::zero());
        assert!(!is_locally_variational(&e));
    }

    #[test]
    fn helmholtz_accepts_a_second_derivative_source() {
        let spec = spec1();
        let e = SourceForm::new(spec, vec![-&u(&[2])]).unwrap();
        assert!(helmholtz(&e).is_zero());
    }

    #[test]
    fn zero_index_block_stays_antisymmetric() {
        // E = x u_x is not variational; the obstruction shows up away from
        // the zero-index block, which antisymmetrizes to zero here
        let spec = spec1();
        let e = SourceForm::new(spec, vec![&Expr::base_var(0) * &u(&[1])]).unwrap();
        let h = helmholtz(&e);
        assert!(!h.is_zero());
        assert_eq!(h.get(&mi(&[0]), 0, 0), Expr::zero());
        assert_eq!(h.get(&mi(&[1]), 0, 0), Expr::base_var(0));
    }

    #[test]
    fn second_variation_matches_the_obstruction_tensor() {
        let spec = spec1();
        for components in [
            vec![u(&[1])],
            vec![-&(&u(&[2]) + &u(&[0]))],
            vec![&u(&[0]) * &u(&[1])],
        ] {
            let e = SourceForm::new(spec.clone(), components).unwrap();
            let beta = e.to_form().exterior_d(1).contact_component(2);
            let sv = second_variation(&beta, &spec).unwrap();
            assert_eq!(sv.canonical, helmholtz(&e).to_form());
            // the residual bookkeeping identity
            assert_eq!(&sv.canonical - &beta, sv.residual);
        }
    }

    #[test]
    fn numeric_first_variation_agrees_with_the_source_pairing() {
        let spec = spec1();
        let l = Lagrangian::new(spec, &Expr::rational(1, 2) * &u(&[1]).pow(2));
        let section = vec![Expr::base_var(0).pow(2)];
        let one_minus_x2 = &Expr::one() - &Expr::base_var(0).pow(2);
        let variation = vec![one_minus_x2.pow(2)];
        let got = numeric_first_variation(&l, &section, &variation, &[(-1.0, 1.0)], 400).unwrap();
        let scale = got.finite_difference.abs().max(1.0);
        assert!(
            (got.finite_difference - got.source_pairing).abs() <= 1e-6 * scale,
            "finite difference {} vs pairing {}",
            got.finite_difference,
            got.source_pairing
        );
    }

    #[test]
    fn degenerate_boxes_are_rejected() {
        let spec = spec1();
        let l = Lagrangian::new(spec, u(&[1]));
        let err = numeric_first_variation(&l, &[u(&[0]).scale(&BigRational::zero())], &[Expr::zero()], &[(1.0, 1.0)], 10)
            .unwrap_err();
        assert!(matches!(err, VarError::DegenerateBox { axis: 0 }));
    }
}
