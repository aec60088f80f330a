use conmod::expr::{parse_expr, print_expr, BinOp, Builtin, EvalError, Expr, Var};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-20i32..20).prop_map(|n| Expr::constant(f64::from(n))),
        (-400i32..400).prop_map(|n| Expr::constant(f64::from(n) / 16.0)),
        Just(Expr::var(Var::X)),
    ]
}

fn op() -> impl Strategy<Value = BinOp> {
    prop_oneof![
        Just(BinOp::Add),
        Just(BinOp::Sub),
        Just(BinOp::Mul),
        Just(BinOp::Div),
        Just(BinOp::Pow),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::neg),
            (op(), inner.clone(), inner.clone()).prop_map(|(o, l, r)| Expr::binary(o, l, r)),
            (prop::sample::select(Builtin::ALL.to_vec()), inner).prop_map(|(f, a)| Expr::call(f, a)),
        ]
    })
}

const GRID: [f64; 7] = [-2.5, -1.0, -0.3, 0.0, 0.7, 1.5, 3.0];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn print_then_parse_agrees_on_grid(e in expr()) {
        let text = print_expr(&e);
        let back = parse_expr(&text).unwrap_or_else(|err| panic!("`{text}` did not parse: {err}"));
        for x in GRID {
            match (e.eval_x(x), back.eval_x(x)) {
                (Ok(a), Ok(b)) if a.is_finite() && b.is_finite() => {
                    prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{text} at {x}: {a} vs {b}");
                }
                (Err(EvalError::MathDomain(_)), Err(EvalError::MathDomain(_))) => {}
                (a, b) => {
                    // overflow and domain edges must at least agree on being non-finite
                    let bad = |r: &Result<f64, EvalError>| r.as_ref().map_or(true, |v| !v.is_finite());
                    prop_assert!(bad(&a) && bad(&b), "{text} at {x}: {a:?} vs {b:?}");
                }
            }
        }
    }

    #[test]
    fn printing_is_a_fixed_point(e in expr()) {
        let once = print_expr(&e);
        let twice = print_expr(&parse_expr(&once).unwrap());
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn arbitrary_text_never_panics(s in "[-+*/^()x0-9. a-z]{0,24}") {
        match parse_expr(&s) {
            Ok(e) => { let _ = e.eval_x(1.0); }
            Err(err) => prop_assert!(err.offset <= s.len()),
        }
    }

    #[test]
    fn evaluation_is_pure(e in expr(), x in -3.0f64..3.0) {
        let a = e.eval_x(x);
        let b = e.eval_x(x);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())),
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }
}

#[test]
fn precedence_and_associativity() {
    assert_eq!(parse_expr("2+3*4").unwrap().eval_x(0.0), Ok(14.0));
    assert_eq!(parse_expr("2^3^2").unwrap().eval_x(0.0), Ok(512.0));
    assert_eq!(parse_expr("-x^2").unwrap().eval_x(3.0), Ok(-9.0));
    assert_eq!(parse_expr("10-4-3").unwrap().eval_x(0.0), Ok(3.0));
}

#[test]
fn syntax_errors_carry_offsets() {
    assert_eq!(parse_expr("2+*3").unwrap_err().offset, 2);
    assert_eq!(parse_expr("(x+1").unwrap_err().offset, 4);
    assert!(parse_expr("foo(x)").is_err());
}
