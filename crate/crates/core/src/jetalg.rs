//! Coordinates and exact polynomial expressions on a finite-order jet chart.
//!
//! A chart has `n` base coordinates `x^lambda` and `m` field components
//! `y^i`; the jet coordinates are `y^i_p` for multi-indices `p`, with
//! `y^i_0` the field itself. [`Expr`] is a polynomial in finitely many of
//! these coordinates over `BigRational`, stored as a map from canonically
//! ordered monomials to nonzero coefficients, so equality of expressions is
//! exactly syntactic equality of the stored maps.
//!
//! Total derivatives act on expressions by the chain rule over the
//! coordinates that actually occur, raising each jet index by one direction;
//! on polynomials this is exact and closes within [`Expr`].

use crate::multiindex::MultiIndex;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

// ============================================================
// Chart description
// ============================================================

/// Names and dimensions of a jet chart. Purely descriptive: expressions do
/// not carry a reference to it, they only use it for validated construction
/// and for printing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetSpec {
    base: Vec<String>,
    fiber: Vec<String>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum JetError {
    #[error("chart needs at least one base and one fiber coordinate")]
    EmptyChart,
    #[error("coordinate name `{0}` declared twice")]
    DuplicateName(String),
}

impl JetSpec {
    /// Chart with default names: base `x, y, z, x4, ...`, fiber
    /// `u, v, w, u4, ...`.
    pub fn new(n: usize, m: usize) -> Self {
        let base = (0..n)
            .map(|k| match k {
                0 => "x".to_string(),
                1 => "y".to_string(),
                2 => "z".to_string(),
                _ => format!("x{}", k + 1),
            })
            .collect();
        let fiber = (0..m)
            .map(|k| match k {
                0 => "u".to_string(),
                1 => "v".to_string(),
                2 => "w".to_string(),
                _ => format!("u{}", k + 1),
            })
            .collect();
        JetSpec { base, fiber }
    }

    pub fn with_names(base: Vec<String>, fiber: Vec<String>) -> Result<Self, JetError> {
        if base.is_empty() || fiber.is_empty() {
            return Err(JetError::EmptyChart);
        }
        let mut seen = BTreeSet::new();
        for name in base.iter().chain(&fiber) {
            if !seen.insert(name.clone()) {
                return Err(JetError::DuplicateName(name.clone()));
            }
        }
        Ok(JetSpec { base, fiber })
    }

    /// Number of base directions.
    pub fn n(&self) -> usize {
        self.base.len()
    }

    /// Number of field components.
    pub fn m(&self) -> usize {
        self.fiber.len()
    }

    pub fn base_name(&self, lambda: usize) -> &str {
        &self.base[lambda]
    }

    pub fn fiber_name(&self, i: usize) -> &str {
        &self.fiber[i]
    }

    pub fn base_index(&self, name: &str) -> Option<usize> {
        self.base.iter().position(|b| b == name)
    }

    pub fn fiber_index(&self, name: &str) -> Option<usize> {
        self.fiber.iter().position(|f| f == name)
    }
}

// ============================================================
// Coordinates and monomials
// ============================================================

/// One coordinate of the jet chart. Ordering puts all base coordinates
/// before all jet coordinates, and jet coordinates sort by field component
/// first, then by graded-lex multi-index; this is the order in which factors
/// are listed inside a monomial and in printed output.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum JetCoordinate {
    /// `x^lambda`, zero-based direction.
    Base(usize),
    /// `y^field` differentiated `index` times.
    Field { field: usize, index: MultiIndex },
}

impl JetCoordinate {
    pub fn field(field: usize, index: MultiIndex) -> Self {
        JetCoordinate::Field { field, index }
    }

    /// Jet order of the coordinate: `|p|` for `y^i_p`, zero for base
    /// coordinates.
    pub fn order(&self) -> u32 {
        match self {
            JetCoordinate::Base(_) => 0,
            JetCoordinate::Field { index, .. } => index.degree(),
        }
    }

    pub fn format_with(&self, spec: &JetSpec) -> String {
        match self {
            JetCoordinate::Base(lambda) => spec.base_name(*lambda).to_string(),
            JetCoordinate::Field { field, index } => {
                let name = spec.fiber_name(*field);
                if index.is_zero() {
                    name.to_string()
                } else {
                    let mut subs = Vec::new();
                    for lambda in 0..index.width() {
                        for _ in 0..index.entry(lambda) {
                            subs.push(spec.base_name(lambda));
                        }
                    }
                    format!("{}_{{{}}}", name, subs.join(","))
                }
            }
        }
    }
}

/// Product of coordinate powers. Invariants: factors strictly increasing in
/// the coordinate order, all powers at least one; the empty list is the
/// constant monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    factors: Vec<(JetCoordinate, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { factors: Vec::new() }
    }

    pub fn var(coord: JetCoordinate) -> Self {
        Monomial { factors: vec![(coord, 1)] }
    }

    pub fn is_constant(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[(JetCoordinate, u32)] {
        &self.factors
    }

    /// Total degree, counting multiplicities.
    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|(_, e)| e).sum()
    }

    /// Degree in the jet coordinates only.
    pub fn fiber_degree(&self) -> u32 {
        self.factors
            .iter()
            .filter(|(c, _)| matches!(c, JetCoordinate::Field { .. }))
            .map(|(_, e)| e)
            .sum()
    }

    /// Degree in the base coordinates only.
    pub fn base_degree(&self) -> u32 {
        self.degree() - self.fiber_degree()
    }

    /// Highest jet order among the factors; zero for base-only monomials.
    pub fn order(&self) -> u32 {
        self.factors.iter().map(|(c, _)| c.order()).max().unwrap_or(0)
    }

    pub fn power_of(&self, coord: &JetCoordinate) -> u32 {
        self.factors
            .iter()
            .find(|(c, _)| c == coord)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    /// Merge product of two monomials.
    pub fn times(&self, other: &Monomial) -> Monomial {
        let mut factors = Vec::with_capacity(self.factors.len() + other.factors.len());
        let mut a = self.factors.iter().peekable();
        let mut b = other.factors.iter().peekable();
        loop {
            match (a.peek(), b.peek()) {
                (Some((ca, ea)), Some((cb, eb))) => match ca.cmp(cb) {
                    std::cmp::Ordering::Less => {
                        factors.push((ca.clone(), *ea));
                        a.next();
                    }
                    std::cmp::Ordering::Greater => {
                        factors.push((cb.clone(), *eb));
                        b.next();
                    }
                    std::cmp::Ordering::Equal => {
                        factors.push((ca.clone(), ea + eb));
                        a.next();
                        b.next();
                    }
                },
                (Some(_), None) => {
                    factors.extend(a.by_ref().cloned());
                    break;
                }
                (None, Some(_)) => {
                    factors.extend(b.by_ref().cloned());
                    break;
                }
                (None, None) => break,
            }
        }
        Monomial { factors }
    }

    /// Divide out one power of `coord`; `None` if it does not occur.
    fn divided_by(&self, coord: &JetCoordinate) -> Option<Monomial> {
        let pos = self.factors.iter().position(|(c, _)| c == coord)?;
        let mut factors = self.factors.clone();
        if factors[pos].1 == 1 {
            factors.remove(pos);
        } else {
            factors[pos].1 -= 1;
        }
        Some(Monomial { factors })
    }

    pub fn format_with(&self, spec: &JetSpec) -> String {
        if self.factors.is_empty() {
            return "1".to_string();
        }
        self.factors
            .iter()
            .map(|(c, e)| {
                let base = c.format_with(spec);
                if *e == 1 {
                    base
                } else {
                    format!("{base}^{e}")
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.factors.cmp(&other.factors))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

// ============================================================
// Expressions
// ============================================================

/// Polynomial in jet coordinates with `BigRational` coefficients. The map
/// never stores a zero coefficient, so `is_zero` and `==` are structural.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Expr {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Expr {
    pub fn zero() -> Self {
        Expr { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Expr::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        Expr { terms }
    }

    pub fn from_integer(k: i64) -> Self {
        Expr::constant(BigRational::from_integer(BigInt::from(k)))
    }

    /// `a / b` as a constant.
    pub fn rational(a: i64, b: i64) -> Self {
        Expr::constant(BigRational::new(BigInt::from(a), BigInt::from(b)))
    }

    pub fn var(coord: JetCoordinate) -> Self {
        Expr::from_monomial(Monomial::var(coord), BigRational::one())
    }

    /// `x^lambda` as an expression.
    pub fn base_var(lambda: usize) -> Self {
        Expr::var(JetCoordinate::Base(lambda))
    }

    /// `y^field_index` as an expression.
    pub fn field_var(field: usize, index: MultiIndex) -> Self {
        Expr::var(JetCoordinate::field(field, index))
    }

    pub fn from_monomial(m: Monomial, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Expr { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, BigRational)>>(iter: I) -> Self {
        let mut out = Expr::zero();
        for (m, c) in iter {
            out.add_term(m, c);
        }
        out
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    /// The constant term.
    pub fn constant_part(&self) -> BigRational {
        self.coefficient(&Monomial::one())
    }

    /// Distinct coordinates occurring with nonzero coefficient.
    pub fn coordinates(&self) -> BTreeSet<JetCoordinate> {
        let mut out = BTreeSet::new();
        for m in self.terms.keys() {
            for (c, _) in m.factors() {
                out.insert(c.clone());
            }
        }
        out
    }

    /// Highest jet order occurring; zero for constants and base-only
    /// expressions.
    pub fn order(&self) -> u32 {
        self.terms.keys().map(Monomial::order).max().unwrap_or(0)
    }

    pub fn fiber_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::fiber_degree).max().unwrap_or(0)
    }

    pub fn base_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::base_degree).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &BigRational) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Expr {
        let mut out = Expr::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Partial derivative with respect to a single chart coordinate.
    pub fn partial(&self, coord: &JetCoordinate) -> Expr {
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            let e = m.power_of(coord);
            if e == 0 {
                continue;
            }
            let reduced = m.divided_by(coord).expect("power checked above");
            out.add_term(reduced, c * BigRational::from_integer(BigInt::from(e)));
        }
        out
    }

    /// Total derivative in direction `lambda`: the partial in `x^lambda`
    /// plus the chain-rule sum over every jet coordinate that occurs, each
    /// contributing its index raised by `lambda`.
    pub fn total_derivative(&self, lambda: usize) -> Expr {
        let mut out = self.partial(&JetCoordinate::Base(lambda));
        for coord in self.coordinates() {
            let JetCoordinate::Field { field, index } = &coord else {
                continue;
            };
            let slope = self.partial(&coord);
            if slope.is_zero() {
                continue;
            }
            let raised = Expr::field_var(*field, index.raised(lambda));
            out = &out + &(&raised * &slope);
        }
        out
    }

    /// Iterated total derivative `J_p`, one direction at a time.
    pub fn total_derivative_multi(&self, p: &MultiIndex) -> Expr {
        let mut out = self.clone();
        for lambda in 0..p.width() {
            for _ in 0..p.entry(lambda) {
                out = out.total_derivative(lambda);
            }
        }
        out
    }

    /// Antiderivative in `x^lambda`, monomial by monomial.
    pub fn integrate_base(&self, lambda: usize) -> Expr {
        let coord = JetCoordinate::Base(lambda);
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            let e = m.power_of(&coord);
            let bumped = m.times(&Monomial::var(coord.clone()));
            out.add_term(bumped, c / BigRational::from_integer(BigInt::from(e + 1)));
        }
        out
    }

    /// Substitute expressions for coordinates; coordinates absent from the
    /// map stay themselves.
    pub fn substitute(&self, map: &BTreeMap<JetCoordinate, Expr>) -> Expr {
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            let mut term = Expr::constant(c.clone());
            for (coord, e) in m.factors() {
                let factor = match map.get(coord) {
                    Some(replacement) => replacement.pow(*e),
                    None => Expr::var(coord.clone()).pow(*e),
                };
                term = &term * &factor;
            }
            out = &out + &term;
        }
        out
    }

    /// Exact rational evaluation at a point given coordinate values.
    pub fn eval<F: Fn(&JetCoordinate) -> BigRational>(&self, value: F) -> BigRational {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut prod = c.clone();
            for (coord, e) in m.factors() {
                let v = value(coord);
                for _ in 0..*e {
                    prod *= &v;
                }
            }
            acc += prod;
        }
        acc
    }

    /// Floating-point evaluation; used only by the numeric quadrature layer.
    pub fn eval_f64<F: Fn(&JetCoordinate) -> f64>(&self, value: F) -> f64 {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut prod = c.to_f64().unwrap_or(f64::NAN);
            for (coord, e) in m.factors() {
                prod *= value(coord).powi(*e as i32);
            }
            acc += prod;
        }
        acc
    }

    pub fn format_with(&self, spec: &JetSpec) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            if k == 0 {
                if negative {
                    out.push('-');
                }
            } else if negative {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            let coeff_is_one = mag.is_one();
            if m.is_constant() {
                out.push_str(&mag.to_string());
            } else if coeff_is_one {
                out.push_str(&m.format_with(spec));
            } else {
                out.push_str(&format!("{}*{}", mag, m.format_with(spec)));
            }
        }
        out
    }
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        let mut out = Expr::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.times(mb), ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for Expr {
    /// Debug-oriented rendering with positional names `x0..`, `y0..`; use
    /// [`Expr::format_with`] for chart names.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let widest = self
            .terms
            .keys()
            .flat_map(|m| m.factors())
            .filter_map(|(c, _)| match c {
                JetCoordinate::Base(l) => Some(l + 1),
                JetCoordinate::Field { .. } => None,
            })
            .max()
            .unwrap_or(1);
        let spec = JetSpec {
            base: (0..widest).map(|k| format!("x{k}")).collect(),
            fiber: (0..64).map(|k| format!("y{k}")).collect(),
        };
        f.write_str(&self.format_with(&spec))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(p: &[u32]) -> Expr {
        Expr::field_var(0, MultiIndex::from_entries(p.to_vec()))
    }

    fn x() -> Expr {
        Expr::base_var(0)
    }

    #[test]
    fn total_derivative_of_a_square() {
        // D_x(u^2) = 2 u u_x
        let f = u(&[0]).pow(2);
        let expect = &Expr::from_integer(2) * &(&u(&[0]) * &u(&[1]));
        assert_eq!(f.total_derivative(0), expect);
    }

    #[test]
    fn total_derivative_is_a_derivation_with_base_part() {
        // D_x(x * u_x) = u_x + x * u_xx
        let f = &x() * &u(&[1]);
        let expect = &u(&[1]) + &(&x() * &u(&[2]));
        assert_eq!(f.total_derivative(0), expect);
    }

    #[test]
    fn iterated_derivative_matches_single_step() {
        // J_(1)(u * u) = 2 u u_x
        let f = &u(&[0]) * &u(&[0]);
        let got = f.total_derivative_multi(&MultiIndex::from_entries(vec![1]));
        assert_eq!(got, f.total_derivative(0));
    }

    #[test]
    fn mixed_total_derivatives_commute() {
        let spec_width = 2;
        let f = &(&Expr::base_var(1) * &u(&[2, 1]).pow(2)) + &u(&[0, 0]).pow(3);
        let a = f.total_derivative(0).total_derivative(1);
        let b = f.total_derivative(1).total_derivative(0);
        assert_eq!(a, b);
        assert_eq!(a.order(), f.order() + spec_width);
    }

    #[test]
    fn partial_sees_only_the_exact_coordinate() {
        let f = &u(&[1]).pow(2) + &u(&[0]);
        assert_eq!(
            f.partial(&JetCoordinate::field(0, MultiIndex::from_entries(vec![1]))),
            &Expr::from_integer(2) * &u(&[1])
        );
        assert_eq!(
            f.partial(&JetCoordinate::field(0, MultiIndex::from_entries(vec![2]))),
            Expr::zero()
        );
    }

    #[test]
    fn canonical_rendering_matches_the_input_grammar() {
        let spec = JetSpec::new(1, 1);
        let l = &Expr::rational(1, 2) * &u(&[1]).pow(2);
        assert_eq!(l.format_with(&spec), "1/2*u_{x}^2");
        let e = -&u(&[2]);
        assert_eq!(e.format_with(&spec), "-u_{x,x}");
        let mixed = &(&Expr::rational(1, 2) * &u(&[1]).pow(2)) - &(&Expr::rational(1, 2) * &u(&[0]).pow(2));
        assert_eq!(mixed.format_with(&spec), "-1/2*u^2 + 1/2*u_{x}^2");
    }

    #[test]
    fn substitution_then_evaluation_is_exact() {
        // substitute u -> x^2 into u * u_x-free part and evaluate
        let mut map = BTreeMap::new();
        map.insert(
            JetCoordinate::field(0, MultiIndex::from_entries(vec![0])),
            x().pow(2),
        );
        let f = &u(&[0]).pow(2) + &x();
        let g = f.substitute(&map);
        let expect = &x().pow(4) + &x();
        assert_eq!(g, expect);
        let at_two = g.eval(|c| match c {
            JetCoordinate::Base(0) => BigRational::from_integer(BigInt::from(2)),
            _ => BigRational::zero(),
        });
        assert_eq!(at_two, BigRational::from_integer(BigInt::from(18)));
    }

    #[test]
    fn antiderivative_inverts_the_base_partial() {
        let f = &(&x().pow(2) * &u(&[0])) + &Expr::from_integer(3);
        let g = f.integrate_base(0);
        assert_eq!(g.partial(&JetCoordinate::Base(0)), f);
    }

    #[test]
    fn order_and_degrees() {
        let f = &(&x() * &u(&[2])) + &u(&[0]).pow(3);
        assert_eq!(f.order(), 2);
        assert_eq!(f.fiber_degree(), 3);
        assert_eq!(f.base_degree(), 1);
        assert_eq!(Expr::from_integer(5).order(), 0);
    }
}
