use std::collections::BTreeSet;

use conmod::packs::{chem, eng, math, phys};
use conmod::{AttributeKind, ConceptType, FunctionDef, Model, ModelError, Value};
use proptest::prelude::*;

fn builtins() -> Vec<Model> {
    let table = chem::ElementTable::builtin();
    vec![
        math::function_instances().unwrap(),
        math::inverse_model().unwrap(),
        math::transforms_model().unwrap(),
        chem::reactions_model(&table).unwrap(),
        chem::network_model(&table).unwrap(),
        phys::ball_model().unwrap(),
        eng::rov_model().unwrap(),
    ]
}

fn schema() -> Model {
    Model::new()
        .register_type(
            ConceptType::new("Node")
                .attribute("weight", AttributeKind::Float)
                .attribute("tags", AttributeKind::list_of(AttributeKind::String))
                .function(FunctionDef::native(
                    "double",
                    &["k"],
                    "def double(self, k): ...",
                    |m, i, a| {
                        let w = m.get_attribute(i, "weight")?.as_f64().unwrap();
                        Ok(Value::Float(w * 2.0 * a[0].as_f64().unwrap_or(1.0)))
                    },
                )),
        )
        .unwrap()
        .register_type(
            ConceptType::new("Link")
                .extends("Node")
                .attribute("target", AttributeKind::ref_to("Node"))
                .attribute(
                    "pair",
                    AttributeKind::tuple_of([AttributeKind::Int, AttributeKind::Bool]),
                ),
        )
        .unwrap()
        .with_instance(
            "n",
            "Node",
            [("weight", Value::Float(1.5)), ("tags", Value::List(vec![]))],
        )
        .unwrap()
}

/// Candidate bindings for a Link, both well- and ill-typed.
fn any_value() -> impl Strategy<Value = Value> {
    prop_oneof![
        any::<i16>().prop_map(|n| Value::Int(i64::from(n))),
        (-100.0f64..100.0).prop_map(Value::Float),
        "[a-z]{0,3}".prop_map(Value::Str),
        any::<bool>().prop_map(Value::Bool),
        prop::sample::select(vec!["n", "missing"]).prop_map(Value::reference),
        prop::collection::vec("[a-z]{0,2}".prop_map(Value::Str), 0..3).prop_map(Value::List),
        prop::collection::vec(any::<i8>().prop_map(|n| Value::Int(i64::from(n))), 0..3).prop_map(Value::List),
        (any::<i8>(), any::<bool>()).prop_map(|(a, b)| Value::Tuple(vec![Value::Int(i64::from(a)), Value::Bool(b)])),
    ]
}

fn bindings() -> impl Strategy<Value = Vec<(String, Value)>> {
    let names = prop::sample::select(vec!["weight", "tags", "target", "pair", "bogus"]);
    prop::collection::vec((names.prop_map(str::to_string), any_value()), 0..6).prop_map(|mut v| {
        let mut seen = BTreeSet::new();
        v.retain(|(k, _)| seen.insert(k.clone()));
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn validate_agrees_with_construction(b in bindings()) {
        let m = schema();
        let built = m.new_instance("l", "Link", b.clone());
        let unchecked = m.insert_unchecked("l", "Link", b);
        let violations = unchecked.validate();
        prop_assert_eq!(built.is_ok(), violations.is_empty(), "{:?} / {:?}", built, violations);
    }

    #[test]
    fn adding_instances_never_changes_existing_ones(w in -50.0f64..50.0, n in 1usize..6) {
        let mut m = schema();
        let before = m.get_attribute(m.instance("n").unwrap(), "weight").unwrap();
        let snapshot = m.clone();
        for i in 0..n {
            m = m.with_instance(format!("k{i}"), "Node", [("weight", Value::Float(w)), ("tags", Value::List(vec![]))]).unwrap();
        }
        prop_assert_eq!(m.get_attribute(m.instance("n").unwrap(), "weight").unwrap(), before.clone());
        prop_assert_eq!(snapshot.instances().count(), 1);
        prop_assert_eq!(snapshot.get_attribute(snapshot.instance("n").unwrap(), "weight").unwrap(), before);
    }

    #[test]
    fn invoke_is_pure(k in -10.0f64..10.0) {
        let m = schema();
        let n = m.instance("n").unwrap();
        let a = m.invoke(n, "double", &[Value::Float(k)]).unwrap();
        let b = m.invoke(n, "double", &[Value::Float(k)]).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(m.validate().is_empty());
    }
}

#[test]
fn reflection_lists_each_attribute_once() {
    for m in builtins() {
        for t in m.types() {
            let attrs = m.attributes(t.name()).unwrap();
            let names: Vec<&str> = attrs.iter().map(|a| a.name.as_str()).collect();
            let unique: BTreeSet<&str> = names.iter().copied().collect();
            assert_eq!(names.len(), unique.len(), "{}: {names:?}", t.name());
            for ancestor in m.lineage(t.name()).unwrap() {
                for (name, _) in ancestor.own_attributes() {
                    assert!(unique.contains(name.as_str()), "{} lost {name}", t.name());
                }
            }
        }
    }
}

#[test]
fn builtins_are_stable_under_repeated_reads() {
    for m in builtins() {
        assert!(m.validate().is_empty());
        for inst in m.instances() {
            for attr in m.attributes(inst.type_name()).unwrap() {
                let a = m.get_attribute(inst, &attr.name);
                let b = m.get_attribute(inst, &attr.name);
                assert_eq!(a, b, "{}.{}", inst.id(), attr.name);
            }
        }
    }
}

#[test]
fn construction_errors_name_the_problem() {
    let m = schema();
    assert!(matches!(
        m.new_instance("l", "Link", [("weight", Value::Float(1.0))]),
        Err(ModelError::MissingAttribute { .. })
    ));
    assert!(matches!(
        m.with_instance(
            "n",
            "Node",
            [("weight", Value::Float(1.0)), ("tags", Value::List(vec![]))]
        ),
        Err(ModelError::DuplicateInstance(_))
    ));
    let dangling = m.new_instance(
        "l",
        "Link",
        [
            ("weight", Value::Int(2)),
            ("tags", Value::List(vec![])),
            ("target", Value::reference("ghost")),
            ("pair", Value::Tuple(vec![Value::Int(1), Value::Bool(true)])),
        ],
    );
    assert!(matches!(dangling, Err(ModelError::DanglingReference { .. })));
    let widened = m
        .new_instance(
            "l",
            "Link",
            [
                ("weight", Value::Int(2)),
                ("tags", Value::List(vec![])),
                ("target", Value::reference("n")),
                ("pair", Value::Tuple(vec![Value::Int(1), Value::Bool(true)])),
            ],
        )
        .unwrap();
    assert_eq!(widened.stored("weight"), Some(&Value::Float(2.0)));
}
