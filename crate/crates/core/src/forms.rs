//! Differential forms on a jet chart, written in the adapted cobasis
//! `{dx^lambda, theta^i_p}` with `theta^i_p = dy^i_p - y^i_{p+mu} dx^mu`.
//!
//! A form is a map from strictly increasing covector lists to nonzero
//! polynomial coefficients; the list length equals the form degree, and a
//! degree-zero form stores its single coefficient under the empty list.
//! Working in this cobasis makes the two halves of the exterior
//! differential separately computable term by term:
//!
//! - `d_h` replaces `d` on coefficients by total derivatives against
//!   `dx^lambda` and acts on the cobasis by `d_h theta^i_p =
//!   -theta^i_{p+lambda} ^ dx^lambda`, `d_h dx = 0`;
//! - `d_v` differentiates coefficients against each occurring jet
//!   coordinate, wedging in `theta^i_p`, and kills the cobasis.
//!
//! Their sum is the full differential of the pulled-back form, with the
//! jet-order bump of the coefficients handled implicitly by the polynomial
//! representation. Both square to zero and anticommute; the test suite
//! exercises these identities on randomized forms.

use crate::jetalg::{Expr, JetCoordinate, JetSpec};
use crate::multiindex::MultiIndex;
use num::BigRational;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

// ============================================================
// Covectors
// ============================================================

/// One factor of the adapted cobasis. The derived order sorts all `dx`
/// before all `theta`, which puts the keys of a term in the orientation
/// `dx^1 ^ ... ^ theta ...`; extraction helpers account for the sign when a
/// different orientation is conventional.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasisCovector {
    Dx(usize),
    Theta { field: usize, index: MultiIndex },
}

impl BasisCovector {
    pub fn theta(field: usize, index: MultiIndex) -> Self {
        BasisCovector::Theta { field, index }
    }

    pub fn is_contact(&self) -> bool {
        matches!(self, BasisCovector::Theta { .. })
    }

    /// Lowest jet order on which the covector is defined: `|p| + 1` for
    /// `theta^i_p`, zero for `dx`.
    pub fn jet_order(&self) -> u32 {
        match self {
            BasisCovector::Dx(_) => 0,
            BasisCovector::Theta { index, .. } => index.degree() + 1,
        }
    }

    pub fn format_with(&self, spec: &JetSpec) -> String {
        match self {
            BasisCovector::Dx(lambda) => format!("dx({})", spec.base_name(*lambda)),
            BasisCovector::Theta { field, index } => {
                let name = spec.fiber_name(*field);
                if index.is_zero() {
                    format!("theta({name})")
                } else {
                    let mut subs = Vec::new();
                    for lambda in 0..index.width() {
                        for _ in 0..index.entry(lambda) {
                            subs.push(spec.base_name(lambda));
                        }
                    }
                    format!("theta({name}; {})", subs.join(","))
                }
            }
        }
    }
}

/// Sort a covector list, counting transpositions. `None` means a repeated
/// factor, i.e. the wedge is zero.
fn sort_covectors(mut covs: Vec<BasisCovector>) -> Option<(Vec<BasisCovector>, bool)> {
    let mut flip = false;
    // insertion sort; lists are short and mostly sorted already
    for k in 1..covs.len() {
        let mut j = k;
        while j > 0 && covs[j - 1] > covs[j] {
            covs.swap(j - 1, j);
            flip = !flip;
            j -= 1;
        }
    }
    if covs.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((covs, flip))
}

// ============================================================
// Forms
// ============================================================

/// Exterior form of a fixed degree in the adapted cobasis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Form {
    degree: usize,
    terms: BTreeMap<Vec<BasisCovector>, Expr>,
}

impl Form {
    pub fn zero(degree: usize) -> Self {
        Form { degree, terms: BTreeMap::new() }
    }

    /// Degree-zero form with the given coefficient.
    pub fn from_expr(coeff: Expr) -> Self {
        let mut out = Form::zero(0);
        out.insert(Vec::new(), coeff);
        out
    }

    /// `dx^lambda`.
    pub fn dx(lambda: usize) -> Self {
        let mut out = Form::zero(1);
        out.insert(vec![BasisCovector::Dx(lambda)], Expr::one());
        out
    }

    /// `theta^field_index`.
    pub fn theta(field: usize, index: MultiIndex) -> Self {
        let mut out = Form::zero(1);
        out.insert(vec![BasisCovector::theta(field, index)], Expr::one());
        out
    }

    /// The base volume `omega = dx^1 ^ ... ^ dx^n`, coefficient one.
    pub fn volume(n: usize) -> Self {
        let mut out = Form::zero(n);
        out.insert((0..n).map(BasisCovector::Dx).collect(), Expr::one());
        out
    }

    /// `omega_lambda`, the contraction of the volume with the `lambda`-th
    /// coordinate vector field: the volume with `dx^lambda` removed and the
    /// sign of moving the contraction into place. For `n = 1` this is the
    /// constant function one.
    pub fn omega_lambda(n: usize, lambda: usize) -> Self {
        assert!(lambda < n, "direction {lambda} out of range for {n} base directions");
        let covs: Vec<_> = (0..n).filter(|&k| k != lambda).map(BasisCovector::Dx).collect();
        let sign = if lambda % 2 == 0 { Expr::one() } else { -&Expr::one() };
        let mut out = Form::zero(n - 1);
        out.insert(covs, sign);
        out
    }

    /// A single term `coeff * covs`, with the factor list brought to
    /// canonical order; a repeated factor gives the zero form.
    pub fn from_term(covs: Vec<BasisCovector>, coeff: Expr) -> Self {
        let degree = covs.len();
        let mut out = Form::zero(degree);
        match sort_covectors(covs) {
            Some((key, flip)) => {
                let signed = if flip { -&coeff } else { coeff };
                out.insert(key, signed);
            }
            None => {}
        }
        out
    }

    fn insert(&mut self, key: Vec<BasisCovector>, coeff: Expr) {
        debug_assert_eq!(key.len(), self.degree);
        debug_assert!(key.windows(2).all(|w| w[0] < w[1]));
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = &*o.get() + &coeff;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<BasisCovector>, &Expr)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, key: &[BasisCovector]) -> Expr {
        self.terms.get(key).cloned().unwrap_or_else(Expr::zero)
    }

    /// Lowest jet order the form is defined on: the maximum of the
    /// coefficient orders and the covector orders.
    pub fn order(&self) -> u32 {
        self.terms
            .iter()
            .map(|(key, coeff)| {
                key.iter()
                    .map(BasisCovector::jet_order)
                    .max()
                    .unwrap_or(0)
                    .max(coeff.order())
            })
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&self, c: &Expr) -> Form {
        let mut out = Form::zero(self.degree);
        for (key, coeff) in &self.terms {
            out.insert(key.clone(), coeff * c);
        }
        out
    }

    pub fn scale_rational(&self, c: &BigRational) -> Form {
        self.scale(&Expr::constant(c.clone()))
    }

    pub fn wedge(&self, other: &Form) -> Form {
        let mut out = Form::zero(self.degree + other.degree);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let mut covs = Vec::with_capacity(ka.len() + kb.len());
                covs.extend(ka.iter().cloned());
                covs.extend(kb.iter().cloned());
                if let Some((key, flip)) = sort_covectors(covs) {
                    let prod = ca * cb;
                    out.insert(key, if flip { -&prod } else { prod });
                }
            }
        }
        out
    }

    // --------------------------------------------------------
    // Differentials
    // --------------------------------------------------------

    /// Horizontal differential: `d_h(c W) = J_lambda(c) dx^lambda ^ W +
    /// c d_h(W)` where the cobasis differentiates by `d_h dx = 0` and
    /// `d_h theta^i_p = -theta^i_{p+lambda} ^ dx^lambda`, summed over the
    /// directions of the chart it is applied in. The number of directions is
    /// taken from `n`.
    pub fn d_h(&self, n: usize) -> Form {
        let mut out = Form::zero(self.degree + 1);
        for (key, coeff) in &self.terms {
            for lambda in 0..n {
                // coefficient part
                let dc = coeff.total_derivative(lambda);
                if !dc.is_zero() {
                    let mut covs = Vec::with_capacity(key.len() + 1);
                    covs.push(BasisCovector::Dx(lambda));
                    covs.extend(key.iter().cloned());
                    if let Some((sorted, flip)) = sort_covectors(covs) {
                        out.insert(sorted, if flip { -&dc } else { dc });
                    }
                }
                // cobasis part
                for (s, cov) in key.iter().enumerate() {
                    let BasisCovector::Theta { field, index } = cov else {
                        continue;
                    };
                    let mut covs = Vec::with_capacity(key.len() + 1);
                    covs.extend(key[..s].iter().cloned());
                    covs.push(BasisCovector::theta(*field, index.raised(lambda)));
                    covs.push(BasisCovector::Dx(lambda));
                    covs.extend(key[s + 1..].iter().cloned());
                    if let Some((sorted, flip)) = sort_covectors(covs) {
                        // d_h(theta) enters with its own minus sign and the
                        // (-1)^(s) of moving d past the first s factors
                        let negate = (s % 2 == 0) ^ flip;
                        let signed = if negate { -coeff } else { coeff.clone() };
                        out.insert(sorted, signed);
                    }
                }
            }
        }
        out
    }

    /// Vertical differential: wedges `theta^i_p` against the partial of each
    /// coefficient in the jet coordinate `y^i_p`; the cobasis is closed.
    pub fn d_v(&self) -> Form {
        let mut out = Form::zero(self.degree + 1);
        for (key, coeff) in &self.terms {
            for coord in coeff.coordinates() {
                let JetCoordinate::Field { field, index } = coord else {
                    continue;
                };
                let slope = coeff.partial(&JetCoordinate::Field {
                    field,
                    index: index.clone(),
                });
                if slope.is_zero() {
                    continue;
                }
                let mut covs = Vec::with_capacity(key.len() + 1);
                covs.push(BasisCovector::theta(field, index));
                covs.extend(key.iter().cloned());
                if let Some((sorted, flip)) = sort_covectors(covs) {
                    out.insert(sorted, if flip { -&slope } else { slope });
                }
            }
        }
        out
    }

    /// Full exterior differential of the pulled-back form; in this cobasis
    /// it is exactly `d_h + d_v`.
    pub fn exterior_d(&self, n: usize) -> Form {
        &self.d_h(n) + &self.d_v()
    }

    // --------------------------------------------------------
    // Contact structure
    // --------------------------------------------------------

    /// Number of `theta` factors of a canonical key.
    fn contact_count(key: &[BasisCovector]) -> usize {
        key.iter().filter(|c| c.is_contact()).count()
    }

    /// Split into contact-homogeneous pieces, keyed by the number of
    /// `theta` factors.
    pub fn contact_split(&self) -> BTreeMap<usize, Form> {
        let mut out: BTreeMap<usize, Form> = BTreeMap::new();
        for (key, coeff) in &self.terms {
            let c = Form::contact_count(key);
            out.entry(c)
                .or_insert_with(|| Form::zero(self.degree))
                .insert(key.clone(), coeff.clone());
        }
        out
    }

    /// The piece with exactly `c` contact factors.
    pub fn contact_component(&self, c: usize) -> Form {
        let mut out = Form::zero(self.degree);
        for (key, coeff) in &self.terms {
            if Form::contact_count(key) == c {
                out.insert(key.clone(), coeff.clone());
            }
        }
        out
    }

    /// Horizontalization over an `n`-dimensional base: for degree at most
    /// `n` the purely horizontal part, for higher degree the component with
    /// the fewest possible `theta` factors (`degree - n` of them; anything
    /// lower carries a repeated `dx` and is already absent).
    pub fn horizontalize(&self, n: usize) -> Form {
        let floor = self.degree.saturating_sub(n);
        self.contact_component(floor)
    }

    /// A form is contact when it vanishes along every prolonged section.
    /// For degree at most `n` that is the vanishing of the horizontal part;
    /// every form of degree above `n` is contact because the base has
    /// nothing of that degree to pull back onto.
    pub fn is_contact(&self, n: usize) -> bool {
        self.degree > n || self.horizontalize(n).is_zero()
    }

    /// Pull back along the prolongation of the polynomial section
    /// `y^i = s_i(x)`: jet coordinates in the coefficients become the
    /// corresponding partials of `s_i`, each `theta` factor dies, `dx`
    /// stays.
    ///
    /// Panics if a section component involves non-base coordinates or
    /// `section.len() != m`.
    pub fn pullback_section(&self, spec: &JetSpec, section: &[Expr]) -> Form {
        assert_eq!(section.len(), spec.m(), "one section component per field");
        for s in section {
            assert!(
                s.order() == 0 && s.fiber_degree() == 0,
                "section components must depend on base coordinates only"
            );
        }
        let mut replacement: BTreeMap<JetCoordinate, Expr> = BTreeMap::new();
        let mut out = Form::zero(self.degree);
        for (key, coeff) in &self.terms {
            if key.iter().any(BasisCovector::is_contact) {
                continue;
            }
            for coord in coeff.coordinates() {
                let JetCoordinate::Field { field, index } = &coord else {
                    continue;
                };
                if !replacement.contains_key(&coord) {
                    let mut value = section[*field].clone();
                    for lambda in 0..index.width() {
                        for _ in 0..index.entry(lambda) {
                            value = value.partial(&JetCoordinate::Base(lambda));
                        }
                    }
                    replacement.insert(coord.clone(), value);
                }
            }
            out.insert(key.clone(), coeff.substitute(&replacement));
        }
        out
    }

    pub fn format_with(&self, spec: &JetSpec) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (key, coeff) in &self.terms {
            // present contact factors first; keys store them last, and the
            // move across the dx block costs one sign per crossed pair
            let thetas: Vec<_> = key.iter().filter(|c| c.is_contact()).cloned().collect();
            let dxs: Vec<_> = key.iter().filter(|c| !c.is_contact()).cloned().collect();
            let flip = (thetas.len() * dxs.len()) % 2 == 1;
            let shown = if flip { -coeff } else { coeff.clone() };
            let rendered_coeff = shown.format_with(spec);
            // a single negative product surrenders its sign to the join so
            // the output stays inside the expression grammar
            let (negative, coeff_text) = match rendered_coeff.strip_prefix('-') {
                Some(rest) if is_single_product(&rendered_coeff) => (true, rest.to_string()),
                _ => (false, rendered_coeff),
            };
            let covs: Vec<String> = thetas
                .iter()
                .chain(&dxs)
                .map(|c| c.format_with(spec))
                .collect();
            let body = if key.is_empty() {
                coeff_text
            } else {
                let wedge = covs.join("^");
                if coeff_text == "1" {
                    wedge
                } else if is_single_product(&coeff_text) {
                    format!("{coeff_text}*{wedge}")
                } else {
                    format!("({coeff_text})*{wedge}")
                }
            };
            parts.push((negative, body));
        }
        let mut out = String::new();
        for (k, (negative, body)) in parts.iter().enumerate() {
            if k == 0 {
                if *negative {
                    out.push('-');
                }
            } else if *negative {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            out.push_str(body);
        }
        out
    }
}

/// True when the canonical rendering of a coefficient is a single signed
/// product, so it can prefix a wedge without parentheses.
fn is_single_product(rendered: &str) -> bool {
    !rendered.contains(" + ") && !rendered.contains(" - ")
}

impl Add for &Form {
    type Output = Form;
    fn add(self, rhs: &Form) -> Form {
        assert_eq!(self.degree, rhs.degree, "degree mismatch in form sum");
        let mut out = self.clone();
        for (key, coeff) in &rhs.terms {
            out.insert(key.clone(), coeff.clone());
        }
        out
    }
}

impl Sub for &Form {
    type Output = Form;
    fn sub(self, rhs: &Form) -> Form {
        self + &(-rhs)
    }
}

impl Neg for &Form {
    type Output = Form;
    fn neg(self) -> Form {
        let mut out = Form::zero(self.degree);
        for (key, coeff) in &self.terms {
            out.insert(key.clone(), -coeff);
        }
        out
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Form(degree {}, {} terms)", self.degree, self.terms.len())
    }
}

/// `dy^i_p` rewritten in the adapted cobasis:
/// `theta^i_p + y^i_{p+lambda} dx^lambda`. The chart width is read off the
/// multi-index.
pub fn from_holonomic(field: usize, index: &MultiIndex) -> Form {
    let n = index.width();
    let mut out = Form::theta(field, index.clone());
    for lambda in 0..n {
        let coeff = Expr::field_var(field, index.raised(lambda));
        out = &out + &Form::dx(lambda).scale(&coeff);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetalg::Expr;

    fn mi(entries: &[u32]) -> MultiIndex {
        MultiIndex::from_entries(entries.to_vec())
    }

    fn u_var(p: &[u32]) -> Expr {
        Expr::field_var(0, mi(p))
    }

    #[test]
    fn holonomic_covector_splits_into_contact_plus_horizontal() {
        // du = theta + u_x dx on one base direction
        let du = from_holonomic(0, &mi(&[0]));
        let expect = &Form::theta(0, mi(&[0])) + &Form::dx(0).scale(&u_var(&[1]));
        assert_eq!(du, expect);

        // du = theta + u_x dx + u_y dy on two
        let du2 = from_holonomic(0, &mi(&[0, 0]));
        let expect2 = &(&Form::theta(0, mi(&[0, 0])) + &Form::dx(0).scale(&u_var(&[1, 0])))
            + &Form::dx(1).scale(&u_var(&[0, 1]));
        assert_eq!(du2, expect2);
    }

    #[test]
    fn contact_covectors_differentiate_into_the_next_order() {
        // d theta = -theta_x ^ dx
        let dtheta = Form::theta(0, mi(&[0])).exterior_d(1);
        let expect = -&Form::theta(0, mi(&[1])).wedge(&Form::dx(0));
        assert_eq!(dtheta, expect);
    }

    #[test]
    fn horizontal_and_vertical_pieces_of_a_horizontal_term() {
        // d(u_x dx) = theta_x ^ dx, all of it vertical
        let a = Form::dx(0).scale(&u_var(&[1]));
        let expect = Form::theta(0, mi(&[1])).wedge(&Form::dx(0));
        assert_eq!(a.exterior_d(1), expect);
        assert_eq!(a.d_v(), expect);
        assert!(a.d_h(1).is_zero());
    }

    #[test]
    fn horizontal_differential_of_a_function() {
        // d_h(x u) = (u + x u_x) dx
        let f = Form::from_expr(&Expr::base_var(0) * &u_var(&[0]));
        let coeff = &u_var(&[0]) + &(&Expr::base_var(0) * &u_var(&[1]));
        assert_eq!(f.d_h(1), Form::dx(0).scale(&coeff));
    }

    #[test]
    fn wedging_kills_the_horizontal_shadow() {
        // du ^ dx = theta ^ dx
        let got = from_holonomic(0, &mi(&[0])).wedge(&Form::dx(0));
        assert_eq!(got, Form::theta(0, mi(&[0])).wedge(&Form::dx(0)));
    }

    #[test]
    fn volume_contractions() {
        let n = 2;
        let omega = Form::volume(n);
        for lambda in 0..n {
            let w = Form::omega_lambda(n, lambda);
            // dx^mu ^ omega_lambda = delta^mu_lambda omega
            for mu in 0..n {
                let got = Form::dx(mu).wedge(&w);
                if mu == lambda {
                    assert_eq!(got, omega);
                } else {
                    assert!(got.is_zero());
                }
            }
        }
        // n = 1: the contraction is the constant one
        let w = Form::omega_lambda(1, 0);
        assert_eq!(w, Form::from_expr(Expr::one()));
    }

    #[test]
    fn horizontalization_is_the_contact_floor() {
        let n = 1;
        let mixed = &Form::dx(0).scale(&Expr::base_var(0)) + &Form::theta(0, mi(&[0]));
        let h = mixed.horizontalize(n);
        assert_eq!(h, Form::dx(0).scale(&Expr::base_var(0)));
        assert_eq!(h.horizontalize(n), h);
        assert!(!mixed.is_contact(n));
        assert!(Form::theta(0, mi(&[0])).is_contact(n));

        // above the base dimension every form is contact, and the floor
        // component is the whole form
        let top = Form::theta(0, mi(&[1])).wedge(&Form::dx(0));
        assert!(top.is_contact(n));
        assert_eq!(top.horizontalize(n), top);
    }

    #[test]
    fn contact_split_groups_by_theta_count() {
        let a = &Form::theta(0, mi(&[0])).wedge(&Form::theta(0, mi(&[1])))
            + &Form::theta(0, mi(&[2])).wedge(&Form::dx(0));
        let split = a.contact_split();
        assert_eq!(split.len(), 2);
        assert!(split[&1].terms.len() == 1 && split[&2].terms.len() == 1);
    }

    #[test]
    fn differential_squares_to_zero_on_a_mixed_form() {
        let a = &Form::dx(0).scale(&(&u_var(&[1]) * &u_var(&[0])))
            + &Form::theta(0, mi(&[0])).scale(&Expr::base_var(0));
        assert!(a.exterior_d(1).exterior_d(1).is_zero());
        assert!(a.d_h(1).d_h(1).is_zero());
        assert!(a.d_v().d_v().is_zero());
        let mixed = &a.d_h(1).d_v() + &a.d_v().d_h(1);
        assert!(mixed.is_zero());
    }

    #[test]
    fn section_pullback_kills_contact_terms_and_chains_coefficients() {
        let spec = JetSpec::new(1, 1);
        // pull back du along u = x^2: theta dies, u_x dx becomes 2x dx
        let du = from_holonomic(0, &mi(&[0]));
        let got = du.pullback_section(&spec, &[Expr::base_var(0).pow(2)]);
        let expect = Form::dx(0).scale(&(&Expr::from_integer(2) * &Expr::base_var(0)));
        assert_eq!(got, expect);
    }

    #[test]
    fn rendering_round_trips_through_the_constructors() {
        let spec = JetSpec::new(1, 1);
        let a = Form::theta(0, mi(&[1])).wedge(&Form::dx(0)).scale(&u_var(&[1]));
        assert_eq!(a.format_with(&spec), "u_{x}*theta(u; x)^dx(x)");
    }
}
