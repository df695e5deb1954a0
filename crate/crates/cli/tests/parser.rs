//! Grammar coverage: canonical round trips, reported error positions, and
//! the semantic rules of the dialect.

use jetvar_cli::error::CliError;
use jetvar_cli::parser::{parse_problem, parse_value};
use jetvar_core::forms::{from_holonomic, Form};
use jetvar_core::jetalg::{Expr, JetSpec};
use jetvar_core::multiindex::MultiIndex;

fn spec1() -> JetSpec {
    JetSpec::new(1, 1)
}

fn scalar(text: &str, spec: &JetSpec) -> Expr {
    parse_value(text, spec)
        .expect("parses")
        .into_scalar()
        .expect("scalar")
}

fn form(text: &str, spec: &JetSpec) -> Form {
    parse_value(text, spec)
        .expect("parses")
        .into_form()
        .expect("form")
}

fn parse_error(text: &str, spec: &JetSpec) -> String {
    match parse_value(text, spec) {
        Err(e) => e.to_string(),
        Ok(_) => panic!("expected a parse error for {text:?}"),
    }
}

#[test]
fn oscillator_density_parses_to_the_expected_polynomial() {
    let spec = spec1();
    let got = scalar("1/2*u_{x}^2 - 1/2*u^2", &spec);
    let ux = Expr::field_var(0, MultiIndex::unit(1, 0));
    let u = Expr::field_var(0, MultiIndex::zero(1));
    let expect = &(&ux * &ux).scale(&num::BigRational::new(1.into(), 2.into()))
        - &(&u * &u).scale(&num::BigRational::new(1.into(), 2.into()));
    assert_eq!(got, expect);
}

#[test]
fn repeated_subscripts_build_the_multi_index() {
    let spec = JetSpec::new(2, 1);
    let got = scalar("u_{x,x,y}", &spec);
    assert_eq!(got, Expr::field_var(0, MultiIndex::from_entries(vec![2, 1])));
}

#[test]
fn dangling_caret_reports_the_caret_column() {
    let spec = spec1();
    let msg = parse_error("1/2*u_{x}^", &spec);
    assert!(
        msg.starts_with("syntax error at column 9"),
        "got: {msg}"
    );
}

#[test]
fn later_lines_report_line_and_column() {
    let err = parse_problem("base x;\nfiber u;\nlagrangian = 1/2*u_{x}^;\n")
        .expect_err("dangling caret");
    let msg = err.to_string();
    assert!(msg.contains("line 3"), "got: {msg}");
}

#[test]
fn unknown_identifiers_are_rejected_by_name() {
    let spec = spec1();
    let msg = parse_error("u + v", &spec);
    assert!(msg.contains("unknown identifier 'v'"), "got: {msg}");
}

#[test]
fn subscripts_must_name_base_variables() {
    let spec = spec1();
    let msg = parse_error("u_{u}", &spec);
    assert!(msg.contains("not a base variable"), "got: {msg}");
}

#[test]
fn natural_powers_fold_and_forms_refuse_them() {
    let spec = spec1();
    assert_eq!(scalar("2^3", &spec), Expr::rational(8, 1));
    assert_eq!(scalar("u^0", &spec), Expr::one());
    let msg = parse_error("dx(x)^2", &spec);
    assert!(msg.contains("wedge"), "got: {msg}");
}

#[test]
fn wedge_and_scaling_build_the_expected_form() {
    let spec = spec1();
    let got = form("u_{x}*theta(u; x)^dx(x)", &spec);
    let expect = Form::theta(0, MultiIndex::unit(1, 0))
        .wedge(&Form::dx(0))
        .scale(&Expr::field_var(0, MultiIndex::unit(1, 0)));
    assert_eq!(got, expect);
}

#[test]
fn holonomic_covectors_expand_on_entry() {
    let spec = spec1();
    let got = form("dy(u; x)", &spec);
    assert_eq!(got, from_holonomic(0, &MultiIndex::unit(1, 0)));
    // contact plus horizontal pieces
    let split = &Form::theta(0, MultiIndex::unit(1, 0))
        + &Form::dx(0).scale(&Expr::field_var(0, MultiIndex::from_entries(vec![2])));
    assert_eq!(got, split);
}

#[test]
fn mismatched_degrees_cannot_add() {
    let spec = spec1();
    let msg = parse_error("dx(x) + dx(x)^theta(u)", &spec);
    assert!(msg.contains("cannot add"), "got: {msg}");
    let msg = parse_error("u + dx(x)", &spec);
    assert!(msg.contains("cannot add"), "got: {msg}");
}

#[test]
fn canonical_printing_round_trips() {
    let spec = JetSpec::new(2, 2);
    for text in [
        "u_{x,y}",
        "-v + u_{x}^2*v_{y}",
        "1/3*x^2*y - 2*u*v_{x,x}",
        "x*y*u_{x,x,y}^3",
    ] {
        let e = scalar(text, &spec);
        let printed = e.format_with(&spec);
        assert_eq!(scalar(&printed, &spec), e, "round trip of {text:?}");
    }
    for text in [
        "u*theta(u; x)^dx(x)",
        "theta(u)^theta(v; x,y)",
        "(u + x)*dx(x)^dx(y)",
    ] {
        let f = form(text, &spec);
        let printed = f.format_with(&spec);
        assert_eq!(form(&printed, &spec), f, "round trip of {text:?}");
    }
}

#[test]
fn problem_files_collect_chart_bindings_and_payloads() {
    let text = "\
# harmonic oscillator
base x;
fiber u;
let k = 1/2;
lagrangian = k*u_{x}^2;
E_1 = u_{x};
alpha = u*theta(u; x)^dx(x);
";
    let problem = parse_problem(text).expect("parses");
    assert_eq!(problem.spec.n(), 1);
    assert_eq!(problem.spec.m(), 1);
    let ux = Expr::field_var(0, MultiIndex::unit(1, 0));
    assert_eq!(
        problem.lagrangian,
        Some((&ux * &ux).scale(&num::BigRational::new(1.into(), 2.into())))
    );
    assert_eq!(problem.source, Some(vec![ux.clone()]));
    assert!(problem.alpha.is_some());
}

#[test]
fn source_component_sugar_fills_gaps_with_zero() {
    let text = "base x;\nfiber u, v;\nE_2 = v;\n";
    let problem = parse_problem(text).expect("parses");
    assert_eq!(
        problem.source,
        Some(vec![Expr::zero(), Expr::field_var(1, MultiIndex::zero(1))])
    );
}

#[test]
fn declarations_guard_against_duplicates_and_reserved_words() {
    let err = parse_problem("base x;\nfiber x;\n").expect_err("duplicate");
    assert!(err.to_string().contains("declared twice"), "{err}");
    let err = parse_problem("base theta;\nfiber u;\n").expect_err("reserved");
    assert!(err.to_string().contains("reserved"), "{err}");
    let err = parse_problem("base x;\nfiber u;\nlet u = 1;\n").expect_err("shadow");
    assert!(err.to_string().contains("already a coordinate"), "{err}");
}

#[test]
fn expressions_need_a_declared_chart() {
    let err = parse_problem("lagrangian = u;\n").expect_err("no chart");
    assert!(
        err.to_string().contains("declare base and fiber variables first"),
        "{err}"
    );
}

#[test]
fn parse_failures_map_to_the_input_exit_code() {
    let err = parse_problem("base x;\nfiber u;\nlagrangian = ;\n").expect_err("empty rhs");
    assert_eq!(err.exit_code(), 2);
    let precondition = CliError::Precondition {
        message: "x".into(),
    };
    assert_eq!(precondition.exit_code(), 3);
    let internal = CliError::Internal {
        message: "x".into(),
    };
    assert_eq!(internal.exit_code(), 4);
}
