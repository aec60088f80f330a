//! Point-mass kinematics under constant forces.
//!
//! Velocity and position are integrals of acceleration and velocity,
//! evaluated numerically with composite Simpson (200 subintervals), so
//! `position` costs about 200² force evaluations.

use std::convert::Infallible;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

use crate::model::{
    AttributeKind, ConceptInstance, ConceptType, DisplayDirective, FunctionDef, Model, ModelError, Value,
};
use crate::numeric::{simpson_vec, SIMPSON_INTERVALS};
use crate::template::{keys, Target, Template, TemplateValue};

/// Ball radius in world units for the animation.
pub const BALL_RADIUS: f64 = 12.0;
/// Velocity arrows are drawn at this many world units per m/s.
pub const ARROW_SCALE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Vec2 {
        Vec2 { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    fn to_array(self) -> [f64; 2] {
        [self.x, self.y]
    }

    fn from_array([x, y]: [f64; 2]) -> Vec2 {
        Vec2 { x, y }
    }

    pub fn to_value(self) -> Value {
        Value::Vector(vec![self.x, self.y])
    }

    pub fn from_value(v: &Value) -> Option<Vec2> {
        match v.as_vector()?.as_slice() {
            [x, y] => Some(Vec2::new(*x, *y)),
            _ => None,
        }
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, k: f64) -> Vec2 {
        Vec2::new(self.x / k, self.y / k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl std::iter::Sum for Vec2 {
    fn sum<I: Iterator<Item = Vec2>>(iter: I) -> Vec2 {
        iter.fold(Vec2::ZERO, Add::add)
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhysError {
    #[error("mass must be positive, got {0}")]
    NonPositiveMass(f64),
    #[error("{0} has a non-finite component")]
    NonFinite(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    mass: f64,
    p0: Vec2,
    v0: Vec2,
    forces: Vec<Vec2>,
}

impl Ball {
    pub fn new(mass: f64, p0: Vec2, v0: Vec2, forces: Vec<Vec2>) -> Result<Ball, PhysError> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(PhysError::NonPositiveMass(mass));
        }
        if !p0.is_finite() {
            return Err(PhysError::NonFinite("p0"));
        }
        if !v0.is_finite() {
            return Err(PhysError::NonFinite("v0"));
        }
        if !forces.iter().all(|f| f.is_finite()) {
            return Err(PhysError::NonFinite("forces"));
        }
        Ok(Ball { mass, p0, v0, forces })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn p0(&self) -> Vec2 {
        self.p0
    }

    pub fn v0(&self) -> Vec2 {
        self.v0
    }

    pub fn forces(&self) -> &[Vec2] {
        &self.forces
    }

    pub fn net_force(&self) -> Vec2 {
        self.forces.iter().copied().sum()
    }

    /// `F/m`; the time argument is kept so all three share a signature.
    pub fn acceleration(&self, _time: f64) -> Vec2 {
        self.net_force() / self.mass
    }

    /// `v0 + ∫₀ᵗ a`.
    pub fn velocity(&self, time: f64) -> Vec2 {
        self.v0 + integrate(|t| self.acceleration(t), time)
    }

    /// `p0 + ∫₀ᵗ v`.
    pub fn position(&self, time: f64) -> Vec2 {
        self.p0 + integrate(|t| self.velocity(t), time)
    }
}

fn integrate(f: impl Fn(f64) -> Vec2, time: f64) -> Vec2 {
    let r: Result<[f64; 2], Infallible> = simpson_vec(|t| Ok(f(t).to_array()), 0.0, time, SIMPSON_INTERVALS);
    match r {
        Ok(v) => Vec2::from_array(v),
        Err(never) => match never {},
    }
}

// ---- concept layer -------------------------------------------------------------

fn failed(msg: impl fmt::Display) -> ModelError {
    ModelError::Failed(msg.to_string())
}

fn vec2_attr(model: &Model, inst: &ConceptInstance, name: &str) -> Result<Vec2, ModelError> {
    let v = model.get_attribute(inst, name)?;
    Vec2::from_value(&v).ok_or_else(|| failed(format!("`{}.{name}` must be a 2-vector, got {v}", inst.id())))
}

/// Decodes a Ball instance into the typed form.
pub fn ball_of(model: &Model, inst: &ConceptInstance) -> Result<Ball, ModelError> {
    let mass = model
        .get_attribute(inst, "mass")?
        .as_f64()
        .ok_or_else(|| failed(format!("`{}.mass` must be a number", inst.id())))?;
    let forces = model.get_attribute(inst, "forces")?;
    let forces = forces
        .as_list()
        .ok_or_else(|| failed("forces must be a list"))?
        .iter()
        .map(|f| Vec2::from_value(f).ok_or_else(|| failed(format!("force {f} must be a 2-vector"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ball::new(
        mass,
        vec2_attr(model, inst, "p0")?,
        vec2_attr(model, inst, "v0")?,
        forces,
    )
    .map_err(failed)
}

fn time_arg(args: &[Value]) -> Result<f64, ModelError> {
    args[0]
        .as_f64()
        .ok_or_else(|| failed(format!("time must be a number, got {}", args[0].kind_name())))
}

fn vector_fn(name: &str, source_text: &str, f: fn(&Ball, f64) -> Vec2) -> FunctionDef {
    FunctionDef::native(name, &["time"], source_text, move |model, inst, args| {
        Ok(f(&ball_of(model, inst)?, time_arg(args)?).to_value())
    })
}

fn component_fn(name: &str, of: &'static str, f: fn(&Ball, f64) -> Vec2, y: bool) -> FunctionDef {
    let axis = if y { 'y' } else { 'x' };
    let source_text = format!("def {name}(self, time):\n    return self.{of}(time).{axis}");
    FunctionDef::native(name, &["time"], &source_text, move |model, inst, args| {
        let v = f(&ball_of(model, inst)?, time_arg(args)?);
        Ok(Value::Float(if y { v.y } else { v.x }))
    })
}

pub fn ball_type() -> ConceptType {
    let mut t = ConceptType::new("Ball")
        .attribute("mass", AttributeKind::Float)
        .attribute("p0", AttributeKind::Vector(2))
        .attribute("v0", AttributeKind::Vector(2))
        .attribute("forces", AttributeKind::list_of(AttributeKind::Vector(2)))
        .function(FunctionDef::native(
            "net_force",
            &[],
            "def net_force(self):\n    return v_sum(self.forces)",
            |model, inst, _| Ok(ball_of(model, inst)?.net_force().to_value()),
        ))
        .function(vector_fn(
            "acceleration",
            "def acceleration(self, time):\n    return self.net_force() / self.mass",
            Ball::acceleration,
        ))
        .function(vector_fn(
            "velocity",
            "def velocity(self, time):\n    return self.v0 + v_integrate(self.acceleration, time)",
            Ball::velocity,
        ))
        .function(vector_fn(
            "position",
            "def position(self, time):\n    return self.p0 + v_integrate(self.velocity, time)",
            Ball::position,
        ));
    for (prefix, of, f) in [
        ("p", "position", Ball::position as fn(&Ball, f64) -> Vec2),
        ("v", "velocity", Ball::velocity),
        ("a", "acceleration", Ball::acceleration),
    ] {
        t = t
            .function(component_fn(&format!("{prefix}_x"), of, f, false))
            .function(component_fn(&format!("{prefix}_y"), of, f, true));
    }
    t.class_template(Template::new().with(keys::GRADIENT_COLOR, TemplateValue::text("LightSteelBlue")))
        .narrative("{id} is a ball of mass {mass} starting at {p0} with velocity {v0}.")
}

fn ball_at(model: &Model, target: Target<'_>) -> Result<Ball, ModelError> {
    let inst = target
        .instance()
        .ok_or_else(|| failed("ball templates apply to instances"))?;
    ball_of(model, inst)
}

fn point(v: Vec2) -> Value {
    v.to_value()
}

/// The ball as a circle plus its vertical and horizontal velocity arrows.
pub fn ball_templates() -> Vec<Template> {
    let circle = Template::new()
        .with(keys::NEW, TemplateValue::text("shape"))
        .with(
            keys::ORIGIN,
            TemplateValue::fn2(|model, target, t| {
                let b = ball_at(model, target)?;
                let p = b.position(t);
                Ok(point(p))
            }),
        )
        .with(keys::RADIUS, TemplateValue::number(BALL_RADIUS))
        .with(keys::FILL, TemplateValue::text("crimson"));
    let arrow = |stroke: &'static str, vertical: bool| {
        Template::new()
            .with(keys::NEW, TemplateValue::text("line"))
            .with(
                keys::POINT_LIST,
                TemplateValue::fn2(move |model, target, t| {
                    let b = ball_at(model, target)?;
                    let p = b.position(t);
                    let v = b.velocity(t);
                    let d = if vertical {
                        Vec2::new(0.0, v.y * ARROW_SCALE)
                    } else {
                        Vec2::new(v.x * ARROW_SCALE, 0.0)
                    };
                    Ok(Value::List(vec![point(p), point(p + d)]))
                }),
            )
            .with(keys::STROKE, TemplateValue::text(stroke))
    };
    vec![circle, arrow("blue", true), arrow("green", false)]
}

/// Ball `b` under gravity with a graph of `a_y`, `v_y`, `p_y` and an
/// animation over ten seconds.
pub fn ball_model() -> Result<Model, ModelError> {
    Ok(Model::new()
        .register_type(ball_type())?
        .with_instance(
            "b",
            "Ball",
            [
                ("mass", Value::Float(1.0)),
                ("p0", Value::Vector(vec![0.0, 0.0])),
                ("v0", Value::Vector(vec![3.0, 10.0])),
                ("forces", Value::List(vec![Value::Vector(vec![0.0, -9.8])])),
            ],
        )?
        .with_directive(DisplayDirective::ShowGraph {
            instance: "b".into(),
            functions: vec!["a_y".into(), "v_y".into(), "p_y".into()],
            range: (0.0, 10.0),
        })
        .with_directive(DisplayDirective::Animate {
            instance: "b".into(),
            range: (0.0, 10.0),
            templates: ball_templates(),
        }))
}
