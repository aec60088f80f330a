//! Type and instance diagrams on a deterministic layered grid.
//!
//! Nodes are layered by edge depth (parents and referrers above), so
//! edges mostly point between rows. Within a layer nodes keep
//! registration order and wrap after a fixed column count.

use super::diagram::{ArrowHead, Color, DiagramDoc, Item, Paint, Point, Shape};
use super::svg::text_extent;
use super::RenderError;
use crate::model::{AttributeKind, ConceptInstance, ConceptType, DisplayDirective, Model, ModelError, Value};
use crate::template::{keys, ResolvedProps, Target, Template, TemplateValue};

const FONT_SIZE: f64 = 12.0;
const CALLOUT_FONT_SIZE: f64 = 11.0;
const MARGIN: f64 = 20.0;
const GAP: f64 = 60.0;
const CALLOUT_GAP: f64 = 14.0;
const COLUMNS: usize = 4;
const MIN_BOX_WIDTH: f64 = 120.0;

#[derive(Debug, Clone, Copy, PartialEq)]
enum NodeKind {
    Rectangle,
    Square,
    Circle,
}

struct Node {
    id: String,
    kind: NodeKind,
    fill: Paint,
    corner_radius: f64,
    font_size: f64,
    lines: Vec<String>,
    callouts: Vec<(String, Vec<String>)>,
}

impl Node {
    fn shape_size(&self) -> (f64, f64) {
        let (w, h) = text_extent(&self.lines, self.font_size);
        match self.kind {
            NodeKind::Rectangle => (w.max(MIN_BOX_WIDTH), h),
            NodeKind::Square => {
                let s = w.max(h);
                (s, s)
            }
            NodeKind::Circle => {
                let d = (w * w + h * h).sqrt();
                (d, d)
            }
        }
    }

    fn callout_sizes(&self) -> Vec<(f64, f64)> {
        self.callouts
            .iter()
            .map(|(_, lines)| text_extent(lines, CALLOUT_FONT_SIZE))
            .collect()
    }

    fn cell_size(&self) -> (f64, f64) {
        let (mut w, mut h) = self.shape_size();
        for (cw, ch) in self.callout_sizes() {
            w = w.max(cw);
            h += CALLOUT_GAP + ch;
        }
        (w, h)
    }
}

struct Edge {
    id: String,
    from: usize,
    to: usize,
    arrow: ArrowHead,
}

fn style_node(id: String, props: &ResolvedProps) -> Result<Node, RenderError> {
    let kind = match props.text(keys::NAME).as_deref() {
        Some("Circle") => NodeKind::Circle,
        Some("Square") => NodeKind::Square,
        _ => NodeKind::Rectangle,
    };
    let fill = if let Some(c) = props.text(keys::GRADIENT_COLOR) {
        Paint::Gradient(Color::parse(&c)?)
    } else if let Some(c) = props.text(keys::FILL) {
        Paint::Solid(Color::parse(&c)?)
    } else {
        Paint::Solid(Color::named("white"))
    };
    Ok(Node {
        id,
        kind,
        fill,
        corner_radius: props.number(keys::CORNER_RADIUS).unwrap_or(0.0),
        font_size: props.number(keys::FONT_SIZE).unwrap_or(FONT_SIZE),
        lines: props.lines(keys::TEXT).unwrap_or_default(),
        callouts: Vec::new(),
    })
}

fn base_template(text: TemplateValue) -> Template {
    Template::new()
        .with(keys::NAME, TemplateValue::text("Rectangle"))
        .with(keys::CORNER_RADIUS, TemplateValue::number(6.0))
        .with(keys::GRADIENT_COLOR, TemplateValue::text("Snow"))
        .with(keys::TEXT, text)
}

/// Default look of a concept type: name, attributes, and functions.
pub(crate) fn default_type_template() -> Template {
    base_template(TemplateValue::fn1(|model, target| {
        let t = target
            .concept_type()
            .ok_or_else(|| ModelError::Failed("type template applied to an instance".into()))?;
        type_label(model, t).map(|lines| Value::List(lines.into_iter().map(Value::Str).collect()))
    }))
}

/// Default look of an instance: `id: Type` then one line per attribute.
pub(crate) fn default_instance_template() -> Template {
    base_template(TemplateValue::fn1(|model, target| {
        let inst = target
            .instance()
            .ok_or_else(|| ModelError::Failed("instance template applied to a type".into()))?;
        instance_label(model, inst).map(|lines| Value::List(lines.into_iter().map(Value::Str).collect()))
    }))
}

fn type_label(model: &Model, t: &ConceptType) -> Result<Vec<String>, ModelError> {
    let mut lines = vec![t.name().to_string()];
    for attr in model.attributes(t.name())? {
        lines.push(format!("{}: {}", attr.name, attr.kind));
    }
    for (_, f) in model.functions(t.name())? {
        lines.push(f.signature());
    }
    Ok(lines)
}

/// `hide: true` drops the whole node from instance diagrams.
fn hides_node(props: &ResolvedProps) -> bool {
    props.value(keys::HIDE) == Some(Value::Bool(true))
}

fn hidden_attributes(props: &ResolvedProps) -> Vec<String> {
    match props.value(keys::HIDE) {
        Some(Value::List(items)) => items.iter().filter_map(|v| v.as_str().map(str::to_string)).collect(),
        Some(Value::Str(s)) => vec![s],
        _ => Vec::new(),
    }
}

fn instance_label(model: &Model, inst: &ConceptInstance) -> Result<Vec<String>, ModelError> {
    let hidden = instance_props_hidden(model, inst)?;
    let mut lines = vec![format!("{}: {}", inst.id(), inst.type_name())];
    for attr in model.attributes(inst.type_name())? {
        if hidden.contains(&attr.name) {
            continue;
        }
        let v = model.get_attribute(inst, &attr.name)?;
        lines.push(format!("{} = {}", attr.name, v));
    }
    Ok(lines)
}

/// Reads only the literal `hide` entry so labels can consult it without
/// resolving the whole template.
fn instance_props_hidden(model: &Model, inst: &ConceptInstance) -> Result<Vec<String>, ModelError> {
    let t = instance_template(model, inst.type_name())?;
    Ok(match t.get(keys::HIDE) {
        Some(TemplateValue::Literal(Value::List(items))) => {
            items.iter().filter_map(|v| v.as_str().map(str::to_string)).collect()
        }
        Some(TemplateValue::Literal(Value::Str(s))) => vec![s.clone()],
        _ => Vec::new(),
    })
}

/// Default, then class templates, then instance templates, root to leaf.
fn instance_template(model: &Model, type_name: &str) -> Result<Template, ModelError> {
    Ok(default_instance_template()
        .merge(&model.effective_class_template(type_name)?)
        .merge(&model.effective_instance_template(type_name)?))
}

/// One box per concept type, with inheritance and reference edges.
pub fn type_diagram(model: &Model) -> Result<DiagramDoc, RenderError> {
    let types: Vec<&ConceptType> = model.types().collect();
    let mut nodes = Vec::with_capacity(types.len());
    for t in &types {
        let template = default_type_template().merge(&model.effective_class_template(t.name())?);
        let props = template
            .apply(model, Target::Type(t), None)
            .map_err(|source| RenderError::Template {
                target: t.name().to_string(),
                source,
            })?;
        nodes.push(style_node(format!("type:{}", t.name()), &props)?);
    }
    let index = |name: &str| types.iter().position(|t| t.name() == name);
    let mut edges = Vec::new();
    for (i, t) in types.iter().enumerate() {
        if let Some(p) = t.parent().and_then(index) {
            edges.push(Edge {
                id: format!("inherit:{}->{}", t.name(), types[p].name()),
                from: i,
                to: p,
                arrow: ArrowHead::Hollow,
            });
        }
        let mut targets: Vec<&str> = Vec::new();
        for (_, kind) in t.own_attributes() {
            for r in kind.referenced_types() {
                if r != t.name() && !targets.contains(&r) {
                    targets.push(r);
                }
            }
        }
        for r in targets {
            if let Some(j) = index(r) {
                edges.push(Edge {
                    id: format!("ref:{}->{}", t.name(), r),
                    from: i,
                    to: j,
                    arrow: ArrowHead::Open,
                });
            }
        }
    }
    // parents sit above children, referrers above what they reference
    let downward: Vec<Edge> = edges
        .iter()
        .map(|e| match e.arrow {
            ArrowHead::Hollow => Edge {
                id: String::new(),
                from: e.to,
                to: e.from,
                arrow: e.arrow,
            },
            _ => Edge {
                id: String::new(),
                ..*e
            },
        })
        .collect();
    let levels = reference_levels(nodes.len(), &downward);
    Ok(assemble(nodes, &levels, edges))
}

/// Longest path depth of each node. Edges are taken in order and any
/// edge that would close a cycle is ignored.
fn reference_levels(n: usize, edges: &[Edge]) -> Vec<usize> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let reaches = |adj: &Vec<Vec<usize>>, from: usize, to: usize| {
        let mut seen = vec![false; n];
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            if !std::mem::replace(&mut seen[v], true) {
                stack.extend(&adj[v]);
            }
        }
        false
    };
    for e in edges {
        if e.from != e.to && !reaches(&adj, e.to, e.from) && !adj[e.from].contains(&e.to) {
            adj[e.from].push(e.to);
        }
    }
    let mut level = vec![0usize; n];
    // a DAG settles within n passes
    for _ in 0..n {
        let mut changed = false;
        for from in 0..n {
            for &to in &adj[from] {
                if level[from] + 1 > level[to] {
                    level[to] = level[from] + 1;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    level
}

fn format_args(args: &[Value]) -> String {
    args.iter().map(Value::to_string).collect::<Vec<_>>().join(", ")
}

/// One shape per instance styled by its merged templates, reference
/// edges between instances, and callouts for method/eval directives.
pub fn instance_diagram(model: &Model) -> Result<DiagramDoc, RenderError> {
    let mut instances: Vec<&ConceptInstance> = Vec::new();
    let mut nodes = Vec::new();
    let mut hidden = Vec::new();
    for inst in model.instances() {
        let template = instance_template(model, inst.type_name())?;
        let props = template
            .apply(model, Target::Instance(inst), None)
            .map_err(|source| RenderError::Template {
                target: inst.id().to_string(),
                source,
            })?;
        if hides_node(&props) {
            continue;
        }
        instances.push(inst);
        hidden.push(hidden_attributes(&props));
        nodes.push(style_node(format!("inst:{}", inst.id()), &props)?);
    }
    let index = |id: &str| instances.iter().position(|i| i.id().as_str() == id);

    for (k, d) in model.directives().iter().enumerate() {
        let describe = || format!("#{k} on `{}`", d.instance());
        let Some(i) = index(d.instance().as_str()) else {
            if model.instance(d.instance().as_str()).is_some() {
                continue;
            }
            return Err(RenderError::Directive {
                directive: describe(),
                source: ModelError::UnknownInstance(d.instance().to_string()),
            });
        };
        let inst = instances[i];
        match d {
            DisplayDirective::ShowMethod { function, .. } => {
                let (_, def) =
                    model
                        .find_function(inst.type_name(), function)
                        .ok_or_else(|| RenderError::Directive {
                            directive: describe(),
                            source: ModelError::UnknownFunction {
                                type_name: inst.type_name().to_string(),
                                function: function.clone(),
                            },
                        })?;
                let lines = def.source_text.lines().map(str::to_string).collect();
                nodes[i].callouts.push((format!("method:{}:{k}", inst.id()), lines));
            }
            DisplayDirective::ShowEval { function, args, .. } => {
                let result = model
                    .invoke(inst, function, args)
                    .map_err(|source| RenderError::Directive {
                        directive: describe(),
                        source,
                    })?;
                let line = format!("{}.{}({}) = {}", inst.id(), function, format_args(args), result);
                nodes[i].callouts.push((format!("eval:{}:{k}", inst.id()), vec![line]));
            }
            DisplayDirective::ShowGraph { .. } | DisplayDirective::Animate { .. } => {}
        }
    }

    let mut edges = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        let mut targets: Vec<usize> = Vec::new();
        for attr in model.attributes(inst.type_name())? {
            if hidden[i].contains(&attr.name) || matches!(attr.kind, AttributeKind::Computed { .. }) {
                continue;
            }
            if let Some(v) = inst.stored(&attr.name) {
                for r in v.references() {
                    if let Some(j) = index(r.as_str()) {
                        if j != i && !targets.contains(&j) {
                            targets.push(j);
                        }
                    }
                }
            }
        }
        for j in targets {
            edges.push(Edge {
                id: format!("ref:{}->{}", inst.id(), instances[j].id()),
                from: i,
                to: j,
                arrow: ArrowHead::Open,
            });
        }
    }
    let levels = reference_levels(nodes.len(), &edges);
    Ok(assemble(nodes, &levels, edges))
}

fn placed_shape(node: &Node, x: f64, y: f64) -> Shape {
    let (w, h) = node.shape_size();
    match node.kind {
        NodeKind::Rectangle | NodeKind::Square => Shape::Box {
            origin: Point::new(x, y),
            width: w,
            height: h,
            corner_radius: node.corner_radius,
            fill: node.fill.clone(),
            lines: node.lines.clone(),
            font_size: node.font_size,
        },
        NodeKind::Circle => Shape::Circle {
            center: Point::new(x + w / 2.0, y + h / 2.0),
            radius: w / 2.0,
            fill: node.fill.clone(),
            label: node.lines.clone(),
            font_size: node.font_size,
        },
    }
}

/// Point on the shape's outline in the direction of `toward`.
fn boundary(shape: &Shape, toward: Point) -> Point {
    match shape {
        Shape::Circle { center, radius, .. } => {
            let (dx, dy) = (toward.x - center.x, toward.y - center.y);
            let len = (dx * dx + dy * dy).sqrt();
            if len == 0.0 {
                *center
            } else {
                Point::new(center.x + radius * dx / len, center.y + radius * dy / len)
            }
        }
        Shape::Box {
            origin, width, height, ..
        } => {
            let c = Point::new(origin.x + width / 2.0, origin.y + height / 2.0);
            let (dx, dy) = (toward.x - c.x, toward.y - c.y);
            if dx == 0.0 && dy == 0.0 {
                return c;
            }
            let tx = if dx == 0.0 {
                f64::INFINITY
            } else {
                (width / 2.0) / dx.abs()
            };
            let ty = if dy == 0.0 {
                f64::INFINITY
            } else {
                (height / 2.0) / dy.abs()
            };
            let s = tx.min(ty);
            Point::new(c.x + dx * s, c.y + dy * s)
        }
        other => other.bounds().0,
    }
}

fn center(shape: &Shape) -> Point {
    let (lo, hi) = shape.bounds();
    Point::new((lo.x + hi.x) / 2.0, (lo.y + hi.y) / 2.0)
}

/// Grid cell `(row, column)` of every node: layers in increasing order,
/// each wrapped after [`COLUMNS`] nodes.
fn grid_cells(levels: &[usize]) -> Vec<(usize, usize)> {
    let mut cells = vec![(0, 0); levels.len()];
    let mut row = 0;
    let max = levels.iter().copied().max().unwrap_or(0);
    for level in 0..=max {
        let members: Vec<usize> = (0..levels.len()).filter(|&i| levels[i] == level).collect();
        for (k, &i) in members.iter().enumerate() {
            cells[i] = (row + k / COLUMNS, k % COLUMNS);
        }
        row += members.len().div_ceil(COLUMNS);
    }
    cells
}

fn assemble(nodes: Vec<Node>, levels: &[usize], edges: Vec<Edge>) -> DiagramDoc {
    if nodes.is_empty() {
        return DiagramDoc::new(2.0 * MARGIN, 2.0 * MARGIN);
    }
    let cells = grid_cells(levels);
    let cols = cells.iter().map(|c| c.1).max().unwrap_or(0) + 1;
    let rows = cells.iter().map(|c| c.0).max().unwrap_or(0) + 1;
    let sizes: Vec<(f64, f64)> = nodes.iter().map(Node::cell_size).collect();
    let mut col_w = vec![0.0f64; cols];
    let mut row_h = vec![0.0f64; rows];
    for (&(r, c), (w, h)) in cells.iter().zip(&sizes) {
        col_w[c] = col_w[c].max(*w);
        row_h[r] = row_h[r].max(*h);
    }
    let col_x: Vec<f64> = col_w
        .iter()
        .scan(MARGIN, |x, w| {
            let here = *x;
            *x += w + GAP;
            Some(here)
        })
        .collect();
    let row_y: Vec<f64> = row_h
        .iter()
        .scan(MARGIN, |y, h| {
            let here = *y;
            *y += h + GAP;
            Some(here)
        })
        .collect();
    let width = MARGIN * 2.0 + col_w.iter().sum::<f64>() + GAP * (cols - 1) as f64;
    let height = MARGIN * 2.0 + row_h.iter().sum::<f64>() + GAP * (rows - 1) as f64;

    let mut doc = DiagramDoc::new(width, height);
    let mut shapes = Vec::with_capacity(nodes.len());
    let mut callouts = Vec::new();
    for (i, node) in nodes.iter().enumerate() {
        let (r, c) = cells[i];
        let (x, y) = (col_x[c], row_y[r]);
        let shape = placed_shape(node, x, y);
        let (sw, sh) = node.shape_size();
        let mut cy = y + sh;
        for ((id, lines), (_, ch)) in node.callouts.iter().zip(node.callout_sizes()) {
            cy += CALLOUT_GAP;
            callouts.push(Item::new(
                format!("link:{id}"),
                Shape::Line {
                    points: vec![Point::new(x + sw / 2.0, cy - CALLOUT_GAP), Point::new(x + sw / 2.0, cy)],
                    stroke: Color::named("gray"),
                    arrow: ArrowHead::None,
                    dashed: true,
                },
            ));
            callouts.push(Item::new(
                id.clone(),
                Shape::TextBlock {
                    origin: Point::new(x, cy),
                    lines: lines.clone(),
                    font_size: CALLOUT_FONT_SIZE,
                    color: Color::named("darkslategray"),
                },
            ));
            cy += ch;
        }
        shapes.push(shape);
    }
    for (node, shape) in nodes.iter().zip(&shapes) {
        doc.elements.push(Item::new(node.id.clone(), shape.clone()));
    }
    for e in edges {
        let (a, b) = (&shapes[e.from], &shapes[e.to]);
        let start = boundary(a, center(b));
        let end = boundary(b, center(a));
        doc.elements.push(Item::new(
            e.id,
            Shape::Line {
                points: vec![start, end],
                stroke: Color::named("black"),
                arrow: e.arrow,
                dashed: false,
            },
        ));
    }
    doc.elements.extend(callouts);
    doc
}
