//! Command results and their three renderings. Text uses the parser's own
//! grammar, JSON follows the fixed field order of the serde structs below,
//! and latex presents contact covectors and horizontal volumes in script
//! notation.

use jetvar_core::forms::{BasisCovector, Form};
use jetvar_core::inverse::MinimalLagrangian;
use jetvar_core::jetalg::{Expr, JetCoordinate, JetSpec};
use jetvar_core::multiindex::MultiIndex;
use jetvar_core::varcalc::{HelmholtzTensor, Momentum, SourceForm};
use num::{One, Signed};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Latex,
}

#[derive(Debug)]
pub enum Report {
    Source {
        e: SourceForm,
    },
    Helmholtz {
        tensor: HelmholtzTensor,
    },
    Minimal {
        result: MinimalLagrangian,
    },
    Momentum {
        momentum: Momentum,
        spec: JetSpec,
    },
    Primitive {
        trivial: bool,
        primitive: Option<Form>,
        source: SourceForm,
        spec: JetSpec,
    },
    Check {
        results: Vec<(String, bool)>,
    },
}

impl Report {
    pub fn failed_checks(&self) -> bool {
        match self {
            Report::Check { results } => results.iter().any(|(_, pass)| !pass),
            _ => false,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.render_text(),
            Format::Json => self.render_json(),
            Format::Latex => self.render_latex(),
        }
    }

    // ---------- text ----------

    fn render_text(&self) -> String {
        match self {
            Report::Source { e } => source_lines(e).join("\n"),
            Report::Helmholtz { tensor } => {
                if tensor.is_zero() {
                    "variational".to_string()
                } else {
                    let parts: Vec<String> = tensor
                        .components()
                        .map(|((p, i, j), c)| {
                            format!(
                                "{} = {}",
                                helmholtz_label(p, *i, *j),
                                c.format_with(tensor.spec())
                            )
                        })
                        .collect();
                    format!("non-variational; {}", parts.join("; "))
                }
            }
            Report::Minimal { result } => format!(
                "L = {}\norder = {}\nvolterra_vainberg_order = {}",
                result
                    .lagrangian
                    .density()
                    .format_with(result.lagrangian.spec()),
                result.lagrangian.order(),
                result.volterra_vainberg_order
            ),
            Report::Momentum { momentum, spec } => format!(
                "gauge = {}\np = {}",
                momentum.gauge(),
                momentum.form().format_with(spec)
            ),
            Report::Primitive {
                trivial,
                primitive,
                source,
                spec,
            } => {
                if *trivial {
                    let g = primitive.as_ref().expect("primitive present when trivial");
                    format!("trivial; primitive = {}", g.format_with(spec))
                } else {
                    format!("non-trivial; {}", source_lines(source).join("; "))
                }
            }
            Report::Check { results } => results
                .iter()
                .map(|(name, pass)| {
                    format!("{name}: {}", if *pass { "pass" } else { "fail" })
                })
                .collect::<Vec<_>>()
                .join("\n"),
        }
    }

    // ---------- json ----------

    fn render_json(&self) -> String {
        match self {
            Report::Source { e } => {
                let body = SourceJson {
                    source_form: SourceBody {
                        e: nonzero_components(e),
                    },
                };
                serde_json::to_string(&body).expect("serializable")
            }
            Report::Helmholtz { tensor } => {
                let components = tensor
                    .components()
                    .map(|((p, i, j), c)| HelmholtzComponentJson {
                        p: p.entries().to_vec(),
                        i: i + 1,
                        j: j + 1,
                        expr: c.format_with(tensor.spec()),
                    })
                    .collect();
                let body = HelmholtzJson {
                    helmholtz: HelmholtzBody {
                        components,
                        variational: tensor.is_zero(),
                    },
                };
                serde_json::to_string(&body).expect("serializable")
            }
            Report::Minimal { result } => {
                let body = LagrangianJson {
                    lagrangian: LagrangianBody {
                        density: result
                            .lagrangian
                            .density()
                            .format_with(result.lagrangian.spec()),
                        order: result.lagrangian.order(),
                        volterra_vainberg_order: result.volterra_vainberg_order,
                    },
                };
                serde_json::to_string(&body).expect("serializable")
            }
            Report::Momentum { momentum, spec } => {
                let terms = one_contact_terms(momentum.form(), spec.n())
                    .into_iter()
                    .map(|(i, q, lambda, c)| MomentumTermJson {
                        i: i + 1,
                        q: q.entries().to_vec(),
                        lambda: lambda + 1,
                        expr: c.format_with(spec),
                    })
                    .collect();
                let body = MomentumJson {
                    momentum: MomentumBody {
                        gauge: momentum.gauge().to_string(),
                        terms,
                    },
                };
                serde_json::to_string(&body).expect("serializable")
            }
            Report::Primitive {
                trivial,
                primitive,
                source,
                spec,
            } => {
                let sigma = primitive.as_ref().map(|g| {
                    horizontal_codim_one_terms(g, spec.n())
                        .into_iter()
                        .map(|(lambda, c)| SigmaTermJson {
                            lambda: lambda + 1,
                            expr: c.format_with(spec),
                        })
                        .collect()
                });
                let body = PrimitiveJson {
                    primitive: PrimitiveBody {
                        trivial: *trivial,
                        sigma,
                        e: if *trivial {
                            None
                        } else {
                            Some(nonzero_components(source))
                        },
                    },
                };
                serde_json::to_string(&body).expect("serializable")
            }
            // verdict listing, not a result object; keep the text shape
            Report::Check { .. } => self.render_text(),
        }
    }

    // ---------- latex ----------

    fn render_latex(&self) -> String {
        match self {
            Report::Source { e } => latex_form(&e.to_form(), e.spec()),
            Report::Helmholtz { tensor } => {
                if tensor.is_zero() {
                    "\\text{variational}".to_string()
                } else {
                    tensor
                        .components()
                        .map(|((p, i, j), c)| {
                            format!(
                                "{} = {}",
                                helmholtz_label(p, *i, *j),
                                latex_expr(c, tensor.spec())
                            )
                        })
                        .collect::<Vec<_>>()
                        .join(";\\ ")
                }
            }
            Report::Minimal { result } => format!(
                "{}\n% order = {}, volterra_vainberg_order = {}",
                latex_form(&result.lagrangian.to_form(), result.lagrangian.spec()),
                result.lagrangian.order(),
                result.volterra_vainberg_order
            ),
            Report::Momentum { momentum, spec } => format!(
                "{}\n% gauge = {}",
                latex_form(momentum.form(), spec),
                momentum.gauge()
            ),
            Report::Primitive {
                trivial,
                primitive,
                source,
                spec,
            } => {
                if *trivial {
                    let g = primitive.as_ref().expect("primitive present when trivial");
                    latex_form(g, spec)
                } else {
                    format!(
                        "\\text{{non-trivial:}}\\ {}",
                        latex_form(&source.to_form(), source.spec())
                    )
                }
            }
            Report::Check { .. } => self.render_text(),
        }
    }
}

// ---------- shared pieces ----------

fn source_lines(e: &SourceForm) -> Vec<String> {
    (0..e.spec().m())
        .map(|i| format!("E_{} = {}", i + 1, e.component(i).format_with(e.spec())))
        .collect()
}

fn nonzero_components(e: &SourceForm) -> Vec<ComponentJson> {
    (0..e.spec().m())
        .filter(|&i| !e.component(i).is_zero())
        .map(|i| ComponentJson {
            i: i + 1,
            expr: e.component(i).format_with(e.spec()),
        })
        .collect()
}

fn helmholtz_label(p: &MultiIndex, i: usize, j: usize) -> String {
    let entries: Vec<String> = p.entries().iter().map(|k| k.to_string()).collect();
    format!("H^{{({})}}_{{{}{}}}", entries.join(","), i + 1, j + 1)
}

/// Reads `(i, q, lambda, c)` with `c` the coefficient of `theta^i_q ^
/// omega_lambda` off a one-contact `n`-form. Canonical keys store the
/// contact factor after the `n - 1` base covectors, so the orientation
/// costs `(-1)^{lambda + n - 1}`.
fn one_contact_terms(form: &Form, n: usize) -> Vec<(usize, MultiIndex, usize, Expr)> {
    let mut out = Vec::new();
    for (key, stored) in form.terms() {
        let theta = key.iter().find_map(|cov| match cov {
            BasisCovector::Theta { field, index } => Some((*field, index.clone())),
            BasisCovector::Dx(_) => None,
        });
        let (i, q) = match theta {
            Some(t) => t,
            None => continue,
        };
        let present: Vec<usize> = key
            .iter()
            .filter_map(|cov| match cov {
                BasisCovector::Dx(d) => Some(*d),
                _ => None,
            })
            .collect();
        let lambda = (0..n).find(|d| !present.contains(d)).unwrap_or(0);
        let c = if (lambda + n - 1) % 2 == 1 {
            -stored
        } else {
            stored.clone()
        };
        out.push((i, q, lambda, c));
    }
    out
}

/// Reads `(lambda, sigma^lambda)` off a horizontal `(n - 1)`-form written
/// as `sigma^lambda omega_lambda`. A zero-form is the single `lambda = 0`
/// component.
fn horizontal_codim_one_terms(form: &Form, n: usize) -> Vec<(usize, Expr)> {
    if n == 1 {
        let c = form.coefficient(&[]);
        if c.is_zero() {
            return Vec::new();
        }
        return vec![(0, c)];
    }
    let mut out = Vec::new();
    for (key, stored) in form.terms() {
        let present: Vec<usize> = key
            .iter()
            .filter_map(|cov| match cov {
                BasisCovector::Dx(d) => Some(*d),
                _ => None,
            })
            .collect();
        let lambda = match (0..n).find(|d| !present.contains(d)) {
            Some(l) => l,
            None => continue,
        };
        let c = if lambda % 2 == 1 { -stored } else { stored.clone() };
        out.push((lambda, c));
    }
    out
}

// ---------- json schema ----------

#[derive(Serialize)]
struct ComponentJson {
    i: usize,
    expr: String,
}

#[derive(Serialize)]
struct SourceBody {
    #[serde(rename = "E")]
    e: Vec<ComponentJson>,
}

#[derive(Serialize)]
struct SourceJson {
    source_form: SourceBody,
}

#[derive(Serialize)]
struct HelmholtzComponentJson {
    p: Vec<u32>,
    i: usize,
    j: usize,
    expr: String,
}

#[derive(Serialize)]
struct HelmholtzBody {
    components: Vec<HelmholtzComponentJson>,
    variational: bool,
}

#[derive(Serialize)]
struct HelmholtzJson {
    helmholtz: HelmholtzBody,
}

#[derive(Serialize)]
struct LagrangianBody {
    density: String,
    order: u32,
    volterra_vainberg_order: u32,
}

#[derive(Serialize)]
struct LagrangianJson {
    lagrangian: LagrangianBody,
}

#[derive(Serialize)]
struct MomentumTermJson {
    i: usize,
    q: Vec<u32>,
    lambda: usize,
    expr: String,
}

#[derive(Serialize)]
struct MomentumBody {
    gauge: String,
    terms: Vec<MomentumTermJson>,
}

#[derive(Serialize)]
struct MomentumJson {
    momentum: MomentumBody,
}

#[derive(Serialize)]
struct SigmaTermJson {
    lambda: usize,
    expr: String,
}

#[derive(Serialize)]
struct PrimitiveBody {
    trivial: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<Vec<SigmaTermJson>>,
    #[serde(rename = "E", skip_serializing_if = "Option::is_none")]
    e: Option<Vec<ComponentJson>>,
}

#[derive(Serialize)]
struct PrimitiveJson {
    primitive: PrimitiveBody,
}

// ---------- latex ----------

fn latex_rational(c: &num::BigRational) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("\\tfrac{{{}}}{{{}}}", c.numer(), c.denom())
    }
}

fn latex_coordinate(coord: &JetCoordinate, spec: &JetSpec) -> String {
    match coord {
        JetCoordinate::Base(lambda) => spec.base_name(*lambda).to_string(),
        JetCoordinate::Field { field, index } => {
            let name = spec.fiber_name(*field);
            if index.is_zero() {
                name.to_string()
            } else {
                format!("{}_{{{}}}", name, subscript_names(index, spec))
            }
        }
    }
}

fn subscript_names(index: &MultiIndex, spec: &JetSpec) -> String {
    let mut out = String::new();
    for lambda in 0..index.width() {
        for _ in 0..index.entry(lambda) {
            out.push_str(spec.base_name(lambda));
        }
    }
    out
}

pub fn latex_expr(e: &Expr, spec: &JetSpec) -> String {
    let mut parts: Vec<(bool, String)> = Vec::new();
    for (m, c) in e.terms() {
        let negative = c.is_negative();
        let mag = c.abs();
        let monomial = if m.is_constant() {
            latex_rational(&mag)
        } else {
            let factors: Vec<String> = m
                .factors()
                .iter()
                .map(|(coord, pow)| {
                    let base = latex_coordinate(coord, spec);
                    if *pow == 1 {
                        base
                    } else {
                        format!("{base}^{{{pow}}}")
                    }
                })
                .collect();
            let body = factors.join(" ");
            if mag.is_one() {
                body
            } else {
                format!("{} {}", latex_rational(&mag), body)
            }
        };
        parts.push((negative, monomial));
    }
    join_signed(parts)
}

fn join_signed(parts: Vec<(bool, String)>) -> String {
    if parts.is_empty() {
        return "0".to_string();
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

/// Renders a form with contact covectors first, folding the permutation
/// sign and the `omega_lambda` orientation into the coefficient. The full
/// base block prints as `\omega`, a codimension-one block as
/// `\omega_{lambda}`.
pub fn latex_form(form: &Form, spec: &JetSpec) -> String {
    if form.degree() == 0 {
        return latex_expr(&form.coefficient(&[]), spec);
    }
    let n = spec.n();
    let mut parts: Vec<(bool, String)> = Vec::new();
    for (key, stored) in form.terms() {
        let thetas: Vec<(usize, &MultiIndex)> = key
            .iter()
            .filter_map(|cov| match cov {
                BasisCovector::Theta { field, index } => Some((*field, index)),
                BasisCovector::Dx(_) => None,
            })
            .collect();
        let dxs: Vec<usize> = key
            .iter()
            .filter_map(|cov| match cov {
                BasisCovector::Dx(d) => Some(*d),
                _ => None,
            })
            .collect();
        let mut flip = (thetas.len() * dxs.len()) % 2 == 1;
        let mut factors: Vec<String> = Vec::new();
        for (field, index) in &thetas {
            if index.is_zero() {
                factors.push(format!("\\vartheta^{{{}}}", field + 1));
            } else {
                factors.push(format!(
                    "\\vartheta^{{{}}}_{{{}}}",
                    field + 1,
                    subscript_names(index, spec)
                ));
            }
        }
        if dxs.len() == n {
            factors.push("\\omega".to_string());
        } else if dxs.len() == n - 1 {
            let lambda = (0..n).find(|d| !dxs.contains(d)).expect("missing direction");
            if lambda % 2 == 1 {
                flip = !flip;
            }
            factors.push(format!("\\omega_{{{}}}", lambda + 1));
        } else {
            for d in &dxs {
                factors.push(format!("\\mathrm{{d}}x^{{{}}}", d + 1));
            }
        }
        let covector = factors.join("\\wedge");
        let coeff = if flip { -stored } else { stored.clone() };
        let negative = coeff.terms().count() == 1
            && coeff.terms().next().map(|(_, c)| c.is_negative()).unwrap_or(false);
        let magnitude = if negative { -&coeff } else { coeff.clone() };
        let body = if magnitude == Expr::one() {
            covector
        } else if magnitude.terms().count() == 1 {
            format!("{}\\,{}", latex_expr(&magnitude, spec), covector)
        } else {
            format!("\\left({}\\right)\\,{}", latex_expr(&magnitude, spec), covector)
        };
        parts.push((negative, body));
    }
    join_signed(parts)
}
