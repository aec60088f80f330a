//! PVC pipe geometry, ROV mass properties, and wireframe projection.
//!
//! Orientation is an Euler triple in degrees. The pipe direction is the
//! +z unit vector rotated about x, then y, then z. `rotate` adds angle
//! triples component-wise, which is not the same as composing rotations.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use thiserror::Error;

use crate::model::{
    AttributeKind, ConceptInstance, ConceptType, DisplayDirective, FunctionDef, Model, ModelError, Value,
};
use crate::render::{ArrowHead, Color, DiagramDoc, Item, Paint, Point, Shape, WorldBounds};
use crate::template::{keys, Template, TemplateValue};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_value(self) -> Value {
        Value::Vector(vec![self.x, self.y, self.z])
    }

    pub fn from_value(v: &Value) -> Option<Vec3> {
        match v.as_vector()?.as_slice() {
            [x, y, z] => Some(Vec3::new(*x, *y, *z)),
            _ => None,
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngError {
    #[error("{field} must be positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("{0} has a non-finite component")]
    NonFinite(&'static str),
    #[error("an ROV needs at least one pipe")]
    EmptyBody,
}

/// Unit direction for Euler angles in degrees, applied x, y, z.
pub fn direction(axis: Vec3) -> Vec3 {
    let (sa, ca) = axis.x.to_radians().sin_cos();
    let (sb, cb) = axis.y.to_radians().sin_cos();
    let (sc, cc) = axis.z.to_radians().sin_cos();
    // Rx·ez
    let (x, y, z) = (0.0, -sa, ca);
    // Ry
    let (x, z) = (x * cb + z * sb, -x * sb + z * cb);
    // Rz
    let (x, y) = (x * cc - y * sc, x * sc + y * cc);
    Vec3::new(x, y, z)
}

/// A solid cylinder: `p0` is the center of one end face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PVCPipe {
    p0: Vec3,
    length: f64,
    radius: f64,
    density: f64,
    axis: Vec3,
}

impl PVCPipe {
    pub fn new(p0: Vec3, length: f64, radius: f64, density: f64, axis: Vec3) -> Result<PVCPipe, EngError> {
        for (field, value) in [("length", length), ("radius", radius), ("density", density)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(EngError::NonPositive { field, value });
            }
        }
        if !p0.is_finite() {
            return Err(EngError::NonFinite("p0"));
        }
        if !axis.is_finite() {
            return Err(EngError::NonFinite("axis"));
        }
        Ok(PVCPipe {
            p0,
            length,
            radius,
            density,
            axis,
        })
    }

    pub fn p0(&self) -> Vec3 {
        self.p0
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn axis(&self) -> Vec3 {
        self.axis
    }

    pub fn shift(&self, v: Vec3) -> PVCPipe {
        PVCPipe {
            p0: self.p0 + v,
            ..*self
        }
    }

    pub fn rotate(&self, angles: Vec3) -> PVCPipe {
        PVCPipe {
            axis: self.axis + angles,
            ..*self
        }
    }

    pub fn direction(&self) -> Vec3 {
        direction(self.axis)
    }

    /// The far end's center.
    pub fn p1(&self) -> Vec3 {
        self.p0 + self.direction() * self.length
    }

    pub fn mass(&self) -> f64 {
        self.density * PI * self.radius * self.radius * self.length
    }

    pub fn center(&self) -> Vec3 {
        self.p0 + self.direction() * (self.length / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rov {
    body: Vec<PVCPipe>,
}

impl Rov {
    pub fn new(body: Vec<PVCPipe>) -> Result<Rov, EngError> {
        if body.is_empty() {
            return Err(EngError::EmptyBody);
        }
        Ok(Rov { body })
    }

    pub fn body(&self) -> &[PVCPipe] {
        &self.body
    }

    pub fn shift(&self, v: Vec3) -> Rov {
        Rov {
            body: self.body.iter().map(|p| p.shift(v)).collect(),
        }
    }

    pub fn mass(&self) -> f64 {
        self.body.iter().map(PVCPipe::mass).sum()
    }

    pub fn center_of_mass(&self) -> Vec3 {
        let weighted = self.body.iter().fold(Vec3::ZERO, |acc, p| acc + p.center() * p.mass());
        weighted * (1.0 / self.mass())
    }

    /// About the vertical axis through the center of mass, pipes as thin rods.
    pub fn moment_of_inertia(&self) -> f64 {
        let com = self.center_of_mass();
        self.body
            .iter()
            .map(|p| {
                let m = p.mass();
                let dz = p.direction().z;
                let sin2 = (1.0 - dz * dz).max(0.0);
                let c = p.center();
                let d2 = (c.x - com.x).powi(2) + (c.y - com.y).powi(2);
                m * p.length * p.length / 12.0 * sin2 + m * d2
            })
            .sum()
    }
}

// ---- wireframe ------------------------------------------------------------------

const WIRE_WIDTH: f64 = 480.0;
const WIRE_HEIGHT: f64 = 360.0;

/// Cavalier projection onto the drawing plane.
pub fn project(p: Vec3) -> Point {
    Point::new(p.x - 0.5 * p.z, p.y - 0.25 * p.z)
}

/// Each pipe as its projected axis with end ticks, plus a COM marker.
pub fn project_wireframe(rov: &Rov) -> DiagramDoc {
    let segments: Vec<(Point, Point)> = rov.body.iter().map(|p| (project(p.p0), project(p.p1()))).collect();
    let com = project(rov.center_of_mass());
    let mut lo = com;
    let mut hi = com;
    for (a, b) in &segments {
        for q in [a, b] {
            lo = Point::new(lo.x.min(q.x), lo.y.min(q.y));
            hi = Point::new(hi.x.max(q.x), hi.y.max(q.y));
        }
    }
    let extent = (hi.x - lo.x).max(hi.y - lo.y).max(1e-9);
    let tick = 0.03 * extent;
    let pad = 0.1 * extent;
    let mut doc = DiagramDoc::new(WIRE_WIDTH, WIRE_HEIGHT);
    doc.world = Some(WorldBounds {
        min: Point::new(lo.x - pad, lo.y - pad),
        max: Point::new(hi.x + pad, hi.y + pad),
    });
    let stroke = Color::named("steelblue");
    for (i, (a, b)) in segments.iter().enumerate() {
        doc.elements.push(Item::new(
            format!("pipe:{i}"),
            Shape::Line {
                points: vec![*a, *b],
                stroke: stroke.clone(),
                arrow: ArrowHead::None,
                dashed: false,
            },
        ));
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        let len = dx.hypot(dy);
        // perpendicular in the drawing plane; a pipe seen end-on gets a horizontal tick
        let (nx, ny) = if len > 1e-12 { (-dy / len, dx / len) } else { (1.0, 0.0) };
        for (k, end) in [a, b].into_iter().enumerate() {
            doc.elements.push(Item::new(
                format!("pipe:{i}:end:{k}"),
                Shape::Line {
                    points: vec![
                        Point::new(end.x - nx * tick, end.y - ny * tick),
                        Point::new(end.x + nx * tick, end.y + ny * tick),
                    ],
                    stroke: stroke.clone(),
                    arrow: ArrowHead::None,
                    dashed: false,
                },
            ));
        }
    }
    doc.elements.push(Item::new(
        "com",
        Shape::Circle {
            center: com,
            radius: tick,
            fill: Paint::Solid(Color::named("crimson")),
            label: Vec::new(),
            font_size: 11.0,
        },
    ));
    doc
}

// ---- concept layer -------------------------------------------------------------

fn failed(msg: impl fmt::Display) -> ModelError {
    ModelError::Failed(msg.to_string())
}

fn vec3_of(v: &Value, what: &str) -> Result<Vec3, ModelError> {
    Vec3::from_value(v).ok_or_else(|| failed(format!("{what} must be a 3-vector, got {v}")))
}

fn number(model: &Model, inst: &ConceptInstance, name: &str) -> Result<f64, ModelError> {
    model
        .get_attribute(inst, name)?
        .as_f64()
        .ok_or_else(|| failed(format!("`{}.{name}` is not a number", inst.id())))
}

pub fn pipe_of(model: &Model, inst: &ConceptInstance) -> Result<PVCPipe, ModelError> {
    PVCPipe::new(
        vec3_of(&model.get_attribute(inst, "p0")?, "p0")?,
        number(model, inst, "length")?,
        number(model, inst, "radius")?,
        number(model, inst, "density")?,
        vec3_of(&model.get_attribute(inst, "axis")?, "axis")?,
    )
    .map_err(failed)
}

pub fn rov_of(model: &Model, inst: &ConceptInstance) -> Result<Rov, ModelError> {
    let body = model.get_attribute(inst, "body")?;
    let pipes = body
        .as_list()
        .ok_or_else(|| failed("body must be a list"))?
        .iter()
        .map(|p| pipe_of(model, model.deref(p)?))
        .collect::<Result<Vec<_>, _>>()?;
    Rov::new(pipes).map_err(failed)
}

/// `(p0, length, radius, density, axis)`, the field order of the type.
pub fn pipe_fields(p: &PVCPipe) -> Vec<(&'static str, Value)> {
    vec![
        ("p0", p.p0.to_value()),
        ("length", Value::Float(p.length)),
        ("radius", Value::Float(p.radius)),
        ("density", Value::Float(p.density)),
        ("axis", p.axis.to_value()),
    ]
}

fn pipe_tuple(p: &PVCPipe) -> Value {
    Value::Tuple(pipe_fields(p).into_iter().map(|(_, v)| v).collect())
}

pub fn pipe_type() -> ConceptType {
    ConceptType::new("PVCPipe")
        .attribute("p0", AttributeKind::Vector(3))
        .attribute("length", AttributeKind::Float)
        .attribute("radius", AttributeKind::Float)
        .attribute("density", AttributeKind::Float)
        .attribute("axis", AttributeKind::Vector(3))
        .function(FunctionDef::native(
            "shift",
            &["v"],
            "def shift(self, v):\n    return PVCPipe(self.p0 + v, self.length, self.r, self.density, self.axis)",
            |model, inst, args| Ok(pipe_tuple(&pipe_of(model, inst)?.shift(vec3_of(&args[0], "v")?))),
        ))
        .function(FunctionDef::native(
            "rotate",
            &["a"],
            "def rotate(self, a):\n    return PVCPipe(self.p0, self.length, self.r, self.density, self.axis + a)",
            |model, inst, args| Ok(pipe_tuple(&pipe_of(model, inst)?.rotate(vec3_of(&args[0], "a")?))),
        ))
        .function(FunctionDef::native(
            "mass",
            &[],
            "def mass(self):\n    return self.density * pi * self.r**2 * self.length",
            |model, inst, _| Ok(Value::Float(pipe_of(model, inst)?.mass())),
        ))
        .function(FunctionDef::native(
            "center",
            &[],
            "def center(self):\n    return self.p0 + self.length / 2 * direction(self.axis)",
            |model, inst, _| Ok(pipe_of(model, inst)?.center().to_value()),
        ))
        .class_template(Template::new().with(keys::GRADIENT_COLOR, TemplateValue::text("LightGray")))
}

pub fn rov_type() -> ConceptType {
    ConceptType::new("ROV")
        .attribute("body", AttributeKind::list_of(AttributeKind::ref_to("PVCPipe")))
        .function(FunctionDef::native(
            "mass",
            &[],
            "def mass(self):\n    return sum(p.mass() for p in self.body)",
            |model, inst, _| Ok(Value::Float(rov_of(model, inst)?.mass())),
        ))
        .function(FunctionDef::native(
            "center_of_mass",
            &[],
            "def center_of_mass(self):\n    return v_sum(p.mass() * p.center() for p in self.body) / self.mass()",
            |model, inst, _| Ok(rov_of(model, inst)?.center_of_mass().to_value()),
        ))
        .function(FunctionDef::native(
            "moment_of_inertia",
            &[],
            "def moment_of_inertia(self):\n    # vertical axis through the center of mass, thin rods\n    return sum(rod_term(p) + p.mass() * horizontal_dist(p.center(), com)**2 for p in self.body)",
            |model, inst, _| Ok(Value::Float(rov_of(model, inst)?.moment_of_inertia())),
        ))
        .class_template(Template::new().with(keys::GRADIENT_COLOR, TemplateValue::text("LightSkyBlue")))
}

/// The four-pipe demo frame: two pipes along x, two along y, one pair
/// raised 3 m above the other.
pub fn demo_pipes() -> Vec<(&'static str, PVCPipe)> {
    let p1 = PVCPipe::new(Vec3::ZERO, 1.0, 0.02, 1400.0, Vec3::new(0.0, 90.0, 0.0)).expect("valid demo pipe");
    let p2 = p1.shift(Vec3::new(0.0, 0.0, 3.0));
    let c1 = p1.rotate(Vec3::new(0.0, 0.0, 90.0));
    let c2 = c1.shift(Vec3::new(0.0, 0.0, 3.0));
    vec![("p1", p1), ("p2", p2), ("c1", c1), ("c2", c2)]
}

pub fn rov_model() -> Result<Model, ModelError> {
    let mut model = Model::new().register_type(pipe_type())?.register_type(rov_type())?;
    let mut body = Vec::new();
    for (id, pipe) in demo_pipes() {
        model = model.with_instance(id, "PVCPipe", pipe_fields(&pipe))?;
        body.push(Value::reference(id));
    }
    model = model.with_instance("rov", "ROV", [("body", Value::List(body))])?;
    for function in ["mass", "center_of_mass", "moment_of_inertia"] {
        model = model.with_directive(DisplayDirective::ShowEval {
            instance: "rov".into(),
            function: function.into(),
            args: vec![],
        });
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Vec3, b: Vec3) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn directions() {
        assert!(close(direction(Vec3::ZERO), Vec3::new(0.0, 0.0, 1.0)));
        assert!(close(direction(Vec3::new(0.0, 90.0, 0.0)), Vec3::new(1.0, 0.0, 0.0)));
        assert!(close(direction(Vec3::new(0.0, 90.0, 90.0)), Vec3::new(0.0, 1.0, 0.0)));
        assert!(close(direction(Vec3::new(90.0, 0.0, 0.0)), Vec3::new(0.0, -1.0, 0.0)));
    }

    #[test]
    fn pipe_properties() {
        let p = PVCPipe::new(Vec3::ZERO, 1.0, 0.02, 1400.0, Vec3::ZERO).unwrap();
        assert!((p.mass() - 1.7593).abs() < 1e-4);
        let long = PVCPipe::new(Vec3::ZERO, 2.0, 0.02, 1400.0, Vec3::ZERO).unwrap();
        assert_eq!(long.center(), Vec3::new(0.0, 0.0, 1.0));
        let fat = PVCPipe::new(Vec3::ZERO, 1.0, 0.04, 1400.0, Vec3::ZERO).unwrap();
        assert!((fat.mass() / p.mass() - 4.0).abs() < 1e-12);
        assert_eq!(p.shift(Vec3::ZERO), p);
        assert_eq!(p.shift(Vec3::new(0.0, 0.0, 3.0)).p0(), Vec3::new(0.0, 0.0, 3.0));
        assert!(PVCPipe::new(Vec3::ZERO, 0.0, 0.02, 1400.0, Vec3::ZERO).is_err());
    }

    #[test]
    fn single_pipe_rov() {
        let p = PVCPipe::new(Vec3::ZERO, 1.0, 0.02, 1400.0, Vec3::new(0.0, 90.0, 0.0)).unwrap();
        let r = Rov::new(vec![p]).unwrap();
        assert!(close(r.center_of_mass(), p.center()));
        assert!((r.moment_of_inertia() - p.mass() / 12.0).abs() < 1e-12);
        assert!(Rov::new(vec![]).is_err());
    }

    #[test]
    fn projection() {
        let p = PVCPipe::new(Vec3::ZERO, 2.0, 0.02, 1400.0, Vec3::ZERO).unwrap();
        let doc = project_wireframe(&Rov::new(vec![p]).unwrap());
        match &doc.find("pipe:0").unwrap().shape {
            Shape::Line { points, .. } => {
                assert_eq!(points[0], Point::new(0.0, 0.0));
                assert_eq!(points[1], Point::new(-1.0, -0.5));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(doc.check().is_ok());
    }

    #[test]
    fn demo_model() {
        let m = rov_model().unwrap();
        assert!(m.validate().is_empty());
        let rov = m.instance("rov").unwrap();
        let mass = m.invoke(rov, "mass", &[]).unwrap().as_f64().unwrap();
        assert!((mass - 4.0 * 1400.0 * PI * 0.0004).abs() < 1e-9);
    }
}
