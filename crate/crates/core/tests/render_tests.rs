use std::path::PathBuf;

use conmod::packs::phys::{self, Vec2};
use conmod::registry::{self, BuildContext, ModelRegistry};
use conmod::render::{
    animate, frame_times, instance_diagram, narrative, narrative_sentences, sample_plot, to_svg, type_diagram,
    DiagramDoc, Shape,
};
use conmod::Model;
use quick_xml::events::Event;
use quick_xml::Reader;

fn build(id: &str) -> Model {
    ModelRegistry::builtin().build(id, &BuildContext::default()).unwrap()
}

fn all_svgs(m: &Model) -> Vec<String> {
    let mut out = vec![to_svg(&type_diagram(m).unwrap()), to_svg(&instance_diagram(m).unwrap())];
    if let Ok(doc) = registry::wireframe(m) {
        out.push(to_svg(&doc));
    }
    out
}

fn assert_well_formed(svg: &str) {
    let mut reader = Reader::from_str(svg);
    let mut depth = 0i32;
    loop {
        match reader.read_event() {
            Ok(Event::Start(_)) => depth += 1,
            Ok(Event::End(_)) => depth -= 1,
            Ok(Event::Eof) => break,
            Ok(_) => {}
            Err(e) => panic!("malformed at {}: {e}", reader.buffer_position()),
        }
    }
    assert_eq!(depth, 0, "unbalanced elements");
}

fn golden(name: &str, actual: &str) {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "golden", name].iter().collect();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap();
    assert!(
        expected == actual,
        "{name} differs from its snapshot; rerun with UPDATE_GOLDEN=1 if intended"
    );
}

#[test]
fn rendering_is_deterministic_and_well_formed() {
    for id in ModelRegistry::builtin().ids() {
        let (a, b) = (all_svgs(&build(id)), all_svgs(&build(id)));
        assert_eq!(a, b, "{id}");
        for svg in &a {
            assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"), "{id}");
            assert_well_formed(svg);
        }
    }
}

#[test]
fn golden_snapshots() {
    golden(
        "functions_types.svg",
        &to_svg(&type_diagram(&build("functions")).unwrap()),
    );
    golden(
        "network_instances.svg",
        &to_svg(&instance_diagram(&build("network")).unwrap()),
    );
    golden(
        "rov_wireframe.svg",
        &to_svg(&registry::wireframe(&build("rov")).unwrap()),
    );
}

#[test]
fn every_type_and_visible_instance_is_drawn_once() {
    for id in ModelRegistry::builtin().ids() {
        let m = build(id);
        let types = type_diagram(&m).unwrap();
        types.check().unwrap();
        for t in m.types() {
            assert!(
                types.find(&format!("type:{}", t.name())).is_some(),
                "{id}: {}",
                t.name()
            );
        }
        let insts = instance_diagram(&m).unwrap();
        insts.check().unwrap();
        let drawn = insts.elements.iter().filter(|i| i.id.starts_with("inst:")).count();
        let elements = m.instances().filter(|i| i.type_name() == "Element").count();
        assert_eq!(drawn, m.instances().count() - elements, "{id}");
    }
}

#[test]
fn plot_samples_increase() {
    let m = build("ball");
    let (fns, range) = registry::graph_functions(&m, "b").unwrap();
    let spec = registry::plot_spec(&m, "b", &fns, range, 100).unwrap();
    let data = sample_plot(&spec).unwrap();
    assert_eq!(data.series.len(), 3);
    for s in &data.series {
        let xs: Vec<f64> = s.segments.iter().flatten().map(|p| p.0).collect();
        assert_eq!(xs.len(), 100);
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
    }
}

fn line_length(doc: &DiagramDoc, id: &str) -> f64 {
    match &doc.find(id).unwrap().shape {
        Shape::Line { points, .. } => {
            let (a, b) = (points[0], points[points.len() - 1]);
            (b.x - a.x).hypot(b.y - a.y)
        }
        other => panic!("{id} is {other:?}"),
    }
}

#[test]
fn ball_animation() {
    let m = build("ball");
    let spec = registry::animation_spec(&m, "b", None, 60).unwrap();
    let frames = animate(&m, &spec).unwrap();
    assert_eq!(frames.len(), 60);
    let times = frame_times((0.0, 10.0), 60);
    for (k, t) in times.iter().enumerate() {
        assert_eq!(*t, k as f64 * 10.0 / 59.0);
    }
    match &frames[0].find("shape:0").unwrap().shape {
        Shape::Circle { center, .. } => assert_eq!((center.x, center.y), (0.0, 0.0)),
        other => panic!("{other:?}"),
    }
    let b = phys::ball_of(&m, m.instance("b").unwrap()).unwrap();
    let apex = b.v0().y / 9.8;
    let at_apex = registry::animation_spec(&m, "b", Some((0.0, apex)), 2).unwrap();
    let ends = animate(&m, &at_apex).unwrap();
    let (start, top) = (line_length(&ends[0], "shape:1"), line_length(&ends[1], "shape:1"));
    assert!(top < 1e-3 * start, "{top} vs {start}");
    assert_eq!(b.position(0.0), Vec2::ZERO);
}

#[test]
fn narratives() {
    assert_eq!(
        narrative_sentences(&build("reactions")).unwrap()[0],
        "2 NO2 react to produce 1 NO3 and 1 NO."
    );
    assert_eq!(
        narrative(&build("network")).unwrap(),
        "2 NO2 react to produce 1 NO3 and 1 NO.\n1 NO3 and 1 CO react to produce 1 NO2 and 1 CO2."
    );
    assert!(narrative(&build("rov")).is_err());
}
