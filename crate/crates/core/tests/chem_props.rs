use conmod::packs::chem::{
    balance, balance_with, elem_balance_matrix, format_balanced, molar_mass, parse_formula, parse_reaction,
    BalanceProblem, ChemError, ElementTable, Formula,
};
use conmod::Exec;
use proptest::prelude::*;

const SYMBOLS: [&str; 6] = ["H", "C", "N", "O", "Cl", "Fe"];

fn table() -> ElementTable {
    ElementTable::builtin()
}

fn formula() -> impl Strategy<Value = Formula> {
    prop::collection::vec((prop::sample::select(SYMBOLS.to_vec()), 1u32..5), 1..4).prop_map(|parts| {
        let text: String = parts.iter().map(|(s, n)| format!("{s}{n}")).collect();
        parse_formula(&text, &table()).unwrap()
    })
}

fn reaction() -> impl Strategy<Value = (Vec<Formula>, Vec<Formula>)> {
    (
        prop::collection::vec(formula(), 1..3),
        prop::collection::vec(formula(), 1..3),
    )
}

/// All positive vectors with the given length and sum.
fn compositions(n: usize, total: u32, out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>) {
    if cur.len() + 1 == n {
        if total >= 1 {
            cur.push(total);
            out.push(cur.clone());
            cur.pop();
        }
        return;
    }
    let left = (n - cur.len() - 1) as u32;
    for c in 1..=total.saturating_sub(left) {
        cur.push(c);
        compositions(n, total - c, out, cur);
        cur.pop();
    }
}

/// Smallest-sum balancing vector with sum at most `limit`, by enumeration.
fn brute_force(problem: &BalanceProblem, limit: u32) -> Option<Vec<u32>> {
    let n = problem.columns();
    for total in n as u32..=limit {
        let mut all = Vec::new();
        compositions(n, total, &mut all, &mut Vec::new());
        if let Some(c) = all.into_iter().find(|c| problem.is_balanced_by(c)) {
            return Some(c);
        }
    }
    None
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn balanced_coefficients_are_sound_primitive_and_minimal((ins, outs) in reaction()) {
        let problem = elem_balance_matrix(&ins, &outs);
        let oracle = brute_force(&problem, 12);
        match balance(&ins, &outs) {
            Ok(cs) => {
                prop_assert!(problem.is_balanced_by(&cs));
                prop_assert!(cs.iter().all(|&c| c >= 1));
                prop_assert_eq!(cs.iter().copied().fold(0, gcd), 1);
                let sum: u32 = cs.iter().sum();
                match oracle {
                    Some(o) => prop_assert_eq!(sum, o.iter().sum::<u32>()),
                    None => prop_assert!(sum > 12),
                }
            }
            Err(e) => {
                let infeasible = matches!(e, ChemError::Infeasible { .. });
                prop_assert!(infeasible);
                prop_assert!(oracle.is_none());
            }
        }
    }

    #[test]
    fn exec_modes_agree((ins, outs) in reaction()) {
        let results: Vec<_> = Exec::all().iter().map(|&e| balance_with(&ins, &outs, e)).collect();
        prop_assert!(results.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn molar_mass_is_additive(a in formula(), b in formula()) {
        let t = table();
        let joined = parse_formula(&format!("{}{}", a.label(), b.label()), &t).unwrap();
        let sum = molar_mass(&a, &t).unwrap() + molar_mass(&b, &t).unwrap();
        prop_assert!((molar_mass(&joined, &t).unwrap() - sum).abs() < 1e-9 * sum);
    }

    #[test]
    fn formula_labels_round_trip(f in formula()) {
        prop_assert_eq!(parse_formula(&f.label(), &table()).unwrap(), f);
    }

    #[test]
    fn formatted_reactions_reparse((ins, outs) in reaction()) {
        if let Ok(cs) = balance(&ins, &outs) {
            let text = format_balanced(&ins, &outs, &cs);
            // strip the coefficients and parse the bare reaction again
            let bare: String = text
                .split(' ')
                .filter(|w| !w.chars().all(|c| c.is_ascii_digit()))
                .collect::<Vec<_>>()
                .join(" ");
            let back = parse_reaction(&bare, &table()).unwrap();
            prop_assert_eq!(back.ins, ins);
            prop_assert_eq!(back.outs, outs);
        }
    }

    #[test]
    fn malformed_reactions_never_panic(s in "[A-Za-z0-9+>\\- ]{0,20}") {
        match parse_reaction(&s, &table()) {
            Ok(r) => { let _ = balance(&r.ins, &r.outs); }
            Err(ChemError::Syntax { offset, .. } | ChemError::UnknownElement { offset, .. }) => {
                prop_assert!(offset <= s.len());
            }
            Err(e) => prop_assert!(false, "unexpected {e:?}"),
        }
    }
}

const KNOWN: [(&str, &[u32]); 20] = [
    ("H2 + O2 -> H2O", &[2, 1, 2]),
    ("CO2 + H2O -> C6H12O6 + O2", &[6, 6, 1, 6]),
    ("CH4 + O2 -> CO2 + H2O", &[1, 2, 1, 2]),
    ("NO2 -> NO3 + NO", &[2, 1, 1]),
    ("N2 + H2 -> NH3", &[1, 3, 2]),
    ("Fe + Cl2 -> FeCl3", &[2, 3, 2]),
    ("Fe + O2 -> Fe2O3", &[4, 3, 2]),
    ("C3H8 + O2 -> CO2 + H2O", &[1, 5, 3, 4]),
    ("H2 + Cl2 -> HCl", &[1, 1, 2]),
    ("NH3 + O2 -> NO + H2O", &[4, 5, 4, 6]),
    ("C2H6 + O2 -> CO2 + H2O", &[2, 7, 4, 6]),
    ("FeCl2 + Cl2 -> FeCl3", &[2, 1, 2]),
    ("CO + O2 -> CO2", &[2, 1, 2]),
    ("NO + O2 -> NO2", &[2, 1, 2]),
    ("H2O2 -> H2O + O2", &[2, 2, 1]),
    ("C2H5OH + O2 -> CO2 + H2O", &[1, 3, 2, 3]),
    ("Fe2O3 + CO -> Fe + CO2", &[1, 3, 2, 3]),
    ("N2O5 -> NO2 + O2", &[2, 4, 1]),
    ("CH4 + Cl2 -> CCl4 + HCl", &[1, 4, 1, 4]),
    ("C6H12O6 -> C2H5OH + CO2", &[1, 2, 2]),
];

#[test]
fn known_reactions() {
    let t = table();
    for (text, expected) in KNOWN {
        let r = parse_reaction(text, &t).unwrap();
        assert_eq!(balance(&r.ins, &r.outs).unwrap(), expected, "{text}");
        assert!(elem_balance_matrix(&r.ins, &r.outs).is_balanced_by(expected));
    }
}

#[test]
fn infeasible_reactions() {
    let t = table();
    for text in ["H2 -> O2", "H2 + O2 -> H2", "NO -> NO2"] {
        let r = parse_reaction(text, &t).unwrap();
        assert!(
            matches!(balance(&r.ins, &r.outs), Err(ChemError::Infeasible { .. })),
            "{text}"
        );
    }
}

#[test]
fn parse_errors() {
    let t = table();
    assert!(matches!(
        parse_reaction("H2 + O2 H2O", &t),
        Err(ChemError::Syntax { .. })
    ));
    assert!(matches!(
        parse_reaction("H2 -> O2 -> H2O", &t),
        Err(ChemError::Syntax { offset: 9, .. })
    ));
    assert!(matches!(
        parse_reaction("Xx -> H2", &t),
        Err(ChemError::UnknownElement { offset: 0, .. })
    ));
    assert!(matches!(
        parse_formula("H0", &t),
        Err(ChemError::Syntax { offset: 1, .. })
    ));
    assert!(matches!(
        parse_formula("h2", &t),
        Err(ChemError::Syntax { offset: 0, .. })
    ));
    assert_eq!(parse_formula("HOH", &t).unwrap().label(), "H2O");
}

#[test]
fn element_file_extends_builtins() {
    let extra = ElementTable::parse("# extra\nNa 22.99\n\nS 32.06\n").unwrap();
    let t = table().merged(&extra);
    let f = parse_formula("Na2SO4", &t).unwrap();
    let expected = 2.0 * 22.99 + 32.06 + 4.0 * 15.999;
    assert!((molar_mass(&f, &t).unwrap() - expected).abs() < 1e-9);
    assert!(matches!(
        ElementTable::parse("Na -1"),
        Err(ChemError::ElementFile { line: 1, .. })
    ));
    assert!(matches!(
        ElementTable::parse("H 1\nna 3"),
        Err(ChemError::ElementFile { line: 2, .. })
    ));
}
