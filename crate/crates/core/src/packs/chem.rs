//! Elements, molecules, reactions, and reaction balancing.
//!
//! Balancing finds the positive integer coefficient vector with the
//! smallest sum that the element balance matrix sends to zero. When the
//! matrix has a one-dimensional nullspace the answer is read off the
//! exact rational basis vector; otherwise a bounded branch-and-bound
//! search enumerates coefficient vectors by increasing sum.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use thiserror::Error;

use crate::exec::Exec;
use crate::model::{format_number, AttributeKind, ConceptInstance, ConceptType, InstanceId, Model, ModelError, Value};
use crate::template::{keys, Target, Template, TemplateValue};

/// Upper bound on each coefficient in the branch-and-bound search.
pub const MAX_COEFFICIENT: u32 = 30;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChemError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown element `{symbol}` at offset {offset}")]
    UnknownElement { symbol: String, offset: usize },
    #[error("no positive integer coefficients up to {bound} balance the reaction")]
    Infeasible { bound: u32 },
    #[error("element file line {line}: {message}")]
    ElementFile { line: usize, message: String },
}

fn syntax(offset: usize, message: impl Into<String>) -> ChemError {
    ChemError::Syntax {
        offset,
        message: message.into(),
    }
}

// ---- element table ---------------------------------------------------------

/// Atomic masses in g/mol keyed by symbol, in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementTable {
    entries: Vec<(String, f64)>,
}

const BUILTIN_ELEMENTS: [(&str, f64); 6] = [
    ("H", 1.008),
    ("C", 12.011),
    ("N", 14.007),
    ("O", 15.999),
    ("Cl", 35.5),
    ("Fe", 56.0),
];

fn is_symbol(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase())
        && match chars.next() {
            None => true,
            Some(c) => c.is_ascii_lowercase() && chars.next().is_none(),
        }
}

impl ElementTable {
    pub fn builtin() -> ElementTable {
        ElementTable {
            entries: BUILTIN_ELEMENTS.iter().map(|&(s, m)| (s.to_string(), m)).collect(),
        }
    }

    pub fn empty() -> ElementTable {
        ElementTable { entries: Vec::new() }
    }

    /// Parses `Symbol Mass` records, one per line. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<ElementTable, ChemError> {
        let mut table = ElementTable::empty();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| ChemError::ElementFile { line: i + 1, message };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [symbol, mass] = fields.as_slice() else {
                return Err(err(format!("expected `Symbol Mass`, got `{line}`")));
            };
            if !is_symbol(symbol) {
                return Err(err(format!("`{symbol}` is not an element symbol")));
            }
            let mass: f64 = mass
                .parse()
                .map_err(|_| err(format!("`{mass}` is not a decimal number")))?;
            if !(mass.is_finite() && mass > 0.0) {
                return Err(err(format!("atomic mass must be positive, got {mass}")));
            }
            table.insert(symbol, mass);
        }
        Ok(table)
    }

    pub fn insert(&mut self, symbol: &str, mass: f64) {
        match self.entries.iter_mut().find(|(s, _)| s == symbol) {
            Some(slot) => slot.1 = mass,
            None => self.entries.push((symbol.to_string(), mass)),
        }
    }

    /// `self` with every entry of `other` added or replacing.
    pub fn merged(&self, other: &ElementTable) -> ElementTable {
        let mut out = self.clone();
        for (s, m) in &other.entries {
            out.insert(s, *m);
        }
        out
    }

    pub fn mass(&self, symbol: &str) -> Option<f64> {
        self.entries.iter().find(|(s, _)| s == symbol).map(|(_, m)| *m)
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.mass(symbol).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(s, m)| (s.as_str(), *m))
    }
}

impl Default for ElementTable {
    fn default() -> Self {
        ElementTable::builtin()
    }
}

// ---- formulas and reactions --------------------------------------------------

/// Element symbols with atom counts, in first-appearance order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    pub parts: Vec<(String, u32)>,
}

impl Formula {
    /// Display label: symbols followed by counts above one, e.g. `FeCl2`.
    pub fn label(&self) -> String {
        self.parts
            .iter()
            .map(|(s, n)| if *n == 1 { s.clone() } else { format!("{s}{n}") })
            .collect()
    }

    pub fn count(&self, symbol: &str) -> u32 {
        self.parts.iter().find(|(s, _)| s == symbol).map_or(0, |(_, n)| *n)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// `Formula := (Symbol Count?)+`. A repeated symbol adds to its count.
pub fn parse_formula(text: &str, table: &ElementTable) -> Result<Formula, ChemError> {
    parse_formula_at(text, 0, table)
}

fn parse_formula_at(text: &str, base: usize, table: &ElementTable) -> Result<Formula, ChemError> {
    let bytes = text.as_bytes();
    if bytes.is_empty() {
        return Err(syntax(base, "expected a formula"));
    }
    let mut parts: Vec<(String, u32)> = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let start = i;
        let c = bytes[i];
        if !c.is_ascii_uppercase() {
            let found = text[i..].chars().next().unwrap_or(' ');
            return Err(syntax(base + i, format!("expected an element symbol, found `{found}`")));
        }
        i += 1;
        if i < bytes.len() && bytes[i].is_ascii_lowercase() {
            i += 1;
        }
        let symbol = &text[start..i];
        if !table.contains(symbol) {
            return Err(ChemError::UnknownElement {
                symbol: symbol.to_string(),
                offset: base + start,
            });
        }
        let digits = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let count = if digits == i {
            1
        } else {
            match text[digits..i].parse::<u32>() {
                Ok(n) if n >= 1 => n,
                Ok(_) => return Err(syntax(base + digits, "atom count must be at least 1")),
                Err(_) => return Err(syntax(base + digits, "atom count is too large")),
            }
        };
        match parts.iter_mut().find(|(s, _)| s == symbol) {
            Some(slot) => {
                slot.1 = slot
                    .1
                    .checked_add(count)
                    .ok_or_else(|| syntax(base + digits, "atom count is too large"))?
            }
            None => parts.push((symbol.to_string(), count)),
        }
    }
    Ok(Formula { parts })
}

/// Species on each side, without coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnbalancedReaction {
    pub ins: Vec<Formula>,
    pub outs: Vec<Formula>,
}

/// `Side -> Side` where `Side := Formula (+ Formula)*`.
pub fn parse_reaction(text: &str, table: &ElementTable) -> Result<UnbalancedReaction, ChemError> {
    let arrows: Vec<usize> = text.match_indices("->").map(|(i, _)| i).collect();
    let arrow = match arrows.as_slice() {
        [a] => *a,
        [] => return Err(syntax(text.len(), "expected `->` between reactants and products")),
        [_, second, ..] => return Err(syntax(*second, "more than one `->`")),
    };
    let ins = parse_side(&text[..arrow], 0, table)?;
    let outs = parse_side(&text[arrow + 2..], arrow + 2, table)?;
    Ok(UnbalancedReaction { ins, outs })
}

fn parse_side(side: &str, base: usize, table: &ElementTable) -> Result<Vec<Formula>, ChemError> {
    let mut out = Vec::new();
    let mut offset = 0;
    for term in side.split('+') {
        let lead = term.len() - term.trim_start().len();
        let trimmed = term.trim();
        if trimmed.is_empty() {
            return Err(syntax(base + offset + lead.min(term.len()), "expected a formula"));
        }
        out.push(parse_formula_at(trimmed, base + offset + lead, table)?);
        offset += term.len() + 1;
    }
    Ok(out)
}

/// `2 H2 + 1 O2 -> 2 H2O`; coefficients are always printed.
pub fn format_balanced(ins: &[Formula], outs: &[Formula], coefficients: &[u32]) -> String {
    assert_eq!(
        coefficients.len(),
        ins.len() + outs.len(),
        "one coefficient per species"
    );
    let side = |fs: &[Formula], cs: &[u32]| {
        fs.iter()
            .zip(cs)
            .map(|(f, c)| format!("{c} {}", f.label()))
            .collect::<Vec<_>>()
            .join(" + ")
    };
    format!(
        "{} -> {}",
        side(ins, &coefficients[..ins.len()]),
        side(outs, &coefficients[ins.len()..])
    )
}

pub fn molar_mass(formula: &Formula, table: &ElementTable) -> Result<f64, ChemError> {
    formula.parts.iter().try_fold(0.0, |acc, (s, n)| {
        table
            .mass(s)
            .map(|m| acc + f64::from(*n) * m)
            .ok_or_else(|| ChemError::UnknownElement {
                symbol: s.clone(),
                offset: 0,
            })
    })
}

// ---- balancing -------------------------------------------------------------

/// Element rows by molecule columns; inputs count positive, outputs
/// negative. Rows follow first appearance, columns are ins then outs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalanceProblem {
    pub elements: Vec<String>,
    pub matrix: Vec<Vec<i64>>,
    pub inputs: usize,
}

impl BalanceProblem {
    pub fn columns(&self) -> usize {
        self.matrix.first().map_or(0, Vec::len)
    }

    /// `matrix · c`, exactly.
    pub fn residual(&self, coefficients: &[u32]) -> Vec<i64> {
        self.matrix
            .iter()
            .map(|row| row.iter().zip(coefficients).map(|(a, c)| a * i64::from(*c)).sum())
            .collect()
    }

    pub fn is_balanced_by(&self, coefficients: &[u32]) -> bool {
        coefficients.len() == self.columns() && self.residual(coefficients).iter().all(|&r| r == 0)
    }
}

pub fn elem_balance_matrix(ins: &[Formula], outs: &[Formula]) -> BalanceProblem {
    let species: Vec<(&Formula, i64)> = ins.iter().map(|f| (f, 1)).chain(outs.iter().map(|f| (f, -1))).collect();
    let mut elements: Vec<String> = Vec::new();
    for (f, _) in &species {
        for (s, _) in &f.parts {
            if !elements.contains(s) {
                elements.push(s.clone());
            }
        }
    }
    let matrix = elements
        .iter()
        .map(|e| species.iter().map(|(f, sign)| sign * i64::from(f.count(e))).collect())
        .collect();
    BalanceProblem {
        elements,
        matrix,
        inputs: ins.len(),
    }
}

type Q = Ratio<i128>;

/// Basis of the rational nullspace, one vector per free column.
pub fn nullspace(problem: &BalanceProblem) -> Vec<Vec<Q>> {
    let n = problem.columns();
    let mut m: Vec<Vec<Q>> = problem
        .matrix
        .iter()
        .map(|row| row.iter().map(|&a| Q::from_integer(i128::from(a))).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..m.len()).find(|&i| m[i][c] != Q::from_integer(0)) else {
            continue;
        };
        m.swap(r, p);
        let lead = m[r][c];
        for x in m[r].iter_mut() {
            *x /= lead;
        }
        for i in 0..m.len() {
            if i != r && m[i][c] != Q::from_integer(0) {
                let factor = m[i][c];
                let pivot_row = m[r].clone();
                for (x, p) in m[i].iter_mut().zip(&pivot_row) {
                    *x -= factor * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    (0..n)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Q::from_integer(0); n];
            v[free] = Q::from_integer(1);
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[row][free];
            }
            v
        })
        .collect()
}

/// The exact answer when the nullspace is one-dimensional and its basis
/// vector can be made strictly positive; `None` otherwise.
pub fn balance_nullspace(problem: &BalanceProblem) -> Option<Vec<u32>> {
    let basis = nullspace(problem);
    let [v] = basis.as_slice() else {
        return None;
    };
    let lcm = v.iter().fold(1i128, |acc, q| acc.lcm(q.denom()));
    let ints: Vec<i128> = v.iter().map(|q| (q * lcm).to_integer()).collect();
    let g = ints.iter().fold(0i128, |acc, x| acc.gcd(x));
    if g == 0 {
        return None;
    }
    let sign = if ints[0] < 0 { -1 } else { 1 };
    ints.iter()
        .map(|x| {
            let y = sign * x / g;
            (y > 0).then(|| u32::try_from(y).ok()).flatten()
        })
        .collect()
}

/// Smallest-sum positive vector with every coefficient at most
/// [`MAX_COEFFICIENT`]; ties go to the lexicographically smallest.
pub fn balance_search(problem: &BalanceProblem, exec: Exec) -> Option<Vec<u32>> {
    let n = problem.columns();
    if n == 0 {
        return None;
    }
    let max = MAX_COEFFICIENT as usize;
    for total in n..=n * max {
        let found = exec.find_map_first(max, |i| {
            let first = i as u32 + 1;
            let rest = total as i64 - i64::from(first);
            if rest < (n - 1) as i64 || rest > ((n - 1) * max) as i64 {
                return None;
            }
            let mut coeffs = vec![first];
            let mut partial: Vec<i64> = problem.matrix.iter().map(|row| row[0] * i64::from(first)).collect();
            search(problem, 1, rest, &mut coeffs, &mut partial).then_some(coeffs)
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Extends `coeffs` (columns `0..k`) with columns `k..` summing to `rest`.
fn search(problem: &BalanceProblem, k: usize, rest: i64, coeffs: &mut Vec<u32>, partial: &mut [i64]) -> bool {
    let n = problem.columns();
    let m = (n - k) as i64;
    if m == 0 {
        return rest == 0 && partial.iter().all(|&p| p == 0);
    }
    let hi = i64::from(MAX_COEFFICIENT).min(rest - (m - 1));
    if hi < 1 {
        return false;
    }
    // every row must still be able to return to zero
    for (row, p) in problem.matrix.iter().zip(partial.iter()) {
        let (mut lo_sum, mut hi_sum) = (0i64, 0i64);
        let (mut a_min, mut a_max) = (i64::MAX, i64::MIN);
        for &a in &row[k..] {
            if a >= 0 {
                lo_sum += a;
                hi_sum += a * hi;
            } else {
                lo_sum += a * hi;
                hi_sum += a;
            }
            a_min = a_min.min(a);
            a_max = a_max.max(a);
        }
        let lo_b = lo_sum.max(a_min * rest);
        let hi_b = hi_sum.min(a_max * rest);
        if -p < lo_b || -p > hi_b {
            return false;
        }
    }
    let lo = if m == 1 { rest } else { 1 };
    let hi = if m == 1 { rest.min(hi) } else { hi };
    for c in lo..=hi {
        for (row, p) in problem.matrix.iter().zip(partial.iter_mut()) {
            *p += row[k] * c;
        }
        coeffs.push(c as u32);
        if search(problem, k + 1, rest - c, coeffs, partial) {
            return true;
        }
        coeffs.pop();
        for (row, p) in problem.matrix.iter().zip(partial.iter_mut()) {
            *p -= row[k] * c;
        }
    }
    false
}

pub fn balance(ins: &[Formula], outs: &[Formula]) -> Result<Vec<u32>, ChemError> {
    balance_with(ins, outs, Exec::default())
}

/// Nullspace route for one-dimensional nullspaces, search otherwise.
pub fn balance_with(ins: &[Formula], outs: &[Formula], exec: Exec) -> Result<Vec<u32>, ChemError> {
    let problem = elem_balance_matrix(ins, outs);
    if ins.is_empty() || outs.is_empty() {
        return Err(ChemError::Infeasible { bound: MAX_COEFFICIENT });
    }
    let found = match nullspace(&problem).len() {
        0 => None,
        1 => balance_nullspace(&problem),
        _ => balance_search(&problem, exec),
    };
    found.ok_or(ChemError::Infeasible { bound: MAX_COEFFICIENT })
}

// ---- concept types -----------------------------------------------------------

fn failed(e: impl fmt::Display) -> ModelError {
    ModelError::Failed(e.to_string())
}

fn list<'a>(v: &'a Value, what: &str) -> Result<&'a [Value], ModelError> {
    v.as_list()
        .ok_or_else(|| ModelError::Failed(format!("{what} must be a list, got {v}")))
}

/// The formula of a Molecule instance with each element's stored mass.
pub fn formula_of(model: &Model, molecule: &ConceptInstance) -> Result<(Formula, ElementTable), ModelError> {
    let value = model.get_attribute(molecule, "formula")?;
    let mut parts = Vec::new();
    let mut table = ElementTable::empty();
    for item in list(&value, "formula")? {
        let Some([el, n]) = item.as_tuple() else {
            return Err(ModelError::Failed(format!(
                "formula entry {item} is not (Element, Int)"
            )));
        };
        let el = model.deref(el)?;
        let symbol = model.get_attribute(el, "name")?;
        let symbol = symbol
            .as_str()
            .ok_or_else(|| failed("element name must be text"))?
            .to_string();
        let mass = model
            .get_attribute(el, "atomic_mass")?
            .as_f64()
            .ok_or_else(|| failed("atomic mass must be a number"))?;
        let n = n
            .as_i64()
            .filter(|n| *n >= 1)
            .and_then(|n| u32::try_from(n).ok())
            .ok_or_else(|| ModelError::Failed(format!("atom count {n} must be a positive integer")))?;
        table.insert(&symbol, mass);
        parts.push((symbol, n));
    }
    Ok((Formula { parts }, table))
}

fn side_of(model: &Model, inst: &ConceptInstance, attr: &str) -> Result<Vec<(u32, Formula)>, ModelError> {
    let value = model.get_attribute(inst, attr)?;
    list(&value, attr)?
        .iter()
        .map(|item| {
            let Some([c, m]) = item.as_tuple() else {
                return Err(ModelError::Failed(format!(
                    "{attr} entry {item} is not (Int, Molecule)"
                )));
            };
            let c = c
                .as_i64()
                .and_then(|c| u32::try_from(c).ok())
                .ok_or_else(|| ModelError::Failed(format!("coefficient {c} must be a non-negative integer")))?;
            Ok((c, formula_of(model, model.deref(m)?)?.0))
        })
        .collect()
}

fn species_of(model: &Model, inst: &ConceptInstance, attr: &str) -> Result<Vec<Formula>, ModelError> {
    let value = model.get_attribute(inst, attr)?;
    list(&value, attr)?
        .iter()
        .map(|m| Ok(formula_of(model, model.deref(m)?)?.0))
        .collect()
}

fn phrase(side: &[(u32, Formula)]) -> String {
    let terms: Vec<String> = side.iter().map(|(c, f)| format!("{c} {}", f.label())).collect();
    match terms.as_slice() {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

fn reaction_label(model: &Model, inst: &ConceptInstance) -> Result<String, ModelError> {
    let r = side_of(model, inst, "reactants")?;
    let p = side_of(model, inst, "products")?;
    let ins: Vec<Formula> = r.iter().map(|(_, f)| f.clone()).collect();
    let outs: Vec<Formula> = p.iter().map(|(_, f)| f.clone()).collect();
    let cs: Vec<u32> = r.iter().chain(&p).map(|(c, _)| *c).collect();
    Ok(format_balanced(&ins, &outs, &cs))
}

fn gradient(color: &str) -> Template {
    Template::new().with(keys::GRADIENT_COLOR, TemplateValue::text(color))
}

fn hide(names: &[&str]) -> TemplateValue {
    TemplateValue::Literal(Value::List(names.iter().map(|n| Value::str(*n)).collect()))
}

fn label_text(attr: &'static str) -> TemplateValue {
    TemplateValue::fn1(move |model, target| {
        let inst = target.instance().ok_or_else(|| failed("label applies to instances"))?;
        model.get_attribute(inst, attr)
    })
}

fn instance_of<'a>(target: &Target<'a>) -> Result<&'a ConceptInstance, ModelError> {
    match *target {
        Target::Instance(i) => Ok(i),
        Target::Type(_) => Err(failed("expected an instance")),
    }
}

/// Element, Molecule, Reaction, UnbalancedReaction, and Network.
pub fn chem_types() -> Result<Model, ModelError> {
    let element = ConceptType::new("Element")
        .attribute("name", AttributeKind::String)
        .attribute("atomic_mass", AttributeKind::Float)
        .class_template(gradient("LightBlue"))
        .instance_template(Template::new().with(keys::HIDE, TemplateValue::Literal(Value::Bool(true))))
        .narrative("");
    let molecule = ConceptType::new("Molecule")
        .attribute(
            "formula",
            AttributeKind::list_of(AttributeKind::tuple_of([
                AttributeKind::ref_to("Element"),
                AttributeKind::Int,
            ])),
        )
        .computed("label", AttributeKind::String, |model, inst| {
            Ok(Value::str(formula_of(model, inst)?.0.label()))
        })
        .computed("molar_mass", AttributeKind::Float, |model, inst| {
            let (f, table) = formula_of(model, inst)?;
            molar_mass(&f, &table).map(Value::Float).map_err(failed)
        })
        .class_template(gradient("Khaki"))
        .instance_template(
            Template::new()
                .with(keys::TEXT, label_text("label"))
                .with(keys::HIDE, hide(&["formula"])),
        )
        .narrative("");
    let reaction_side = || {
        AttributeKind::list_of(AttributeKind::tuple_of([
            AttributeKind::Int,
            AttributeKind::ref_to("Molecule"),
        ]))
    };
    let reaction = ConceptType::new("Reaction")
        .attribute("products", reaction_side())
        .attribute("reactants", reaction_side())
        .computed("reactant_phrase", AttributeKind::String, |model, inst| {
            Ok(Value::str(phrase(&side_of(model, inst, "reactants")?)))
        })
        .computed("product_phrase", AttributeKind::String, |model, inst| {
            Ok(Value::str(phrase(&side_of(model, inst, "products")?)))
        })
        .computed("equation", AttributeKind::String, |model, inst| {
            reaction_label(model, inst).map(Value::Str)
        })
        .computed("balanced", AttributeKind::Bool, |model, inst| {
            let r = side_of(model, inst, "reactants")?;
            let p = side_of(model, inst, "products")?;
            let ins: Vec<Formula> = r.iter().map(|(_, f)| f.clone()).collect();
            let outs: Vec<Formula> = p.iter().map(|(_, f)| f.clone()).collect();
            let cs: Vec<u32> = r.iter().chain(&p).map(|(c, _)| *c).collect();
            Ok(Value::Bool(elem_balance_matrix(&ins, &outs).is_balanced_by(&cs)))
        })
        .class_template(gradient("Salmon"))
        .instance_template(
            Template::new()
                .with(
                    keys::TEXT,
                    TemplateValue::fn1(|model, target| {
                        let inst = instance_of(&target)?;
                        Ok(Value::List(vec![
                            Value::str(format!("{}: Reaction", inst.id())),
                            model.get_attribute(inst, "equation")?,
                        ]))
                    }),
                )
                .with(keys::HIDE, hide(&["reactant_phrase", "product_phrase"])),
        )
        .narrative("{reactant_phrase} react to produce {product_phrase}.");
    let unbalanced = ConceptType::new("UnbalancedReaction")
        .attribute("ins", AttributeKind::list_of(AttributeKind::ref_to("Molecule")))
        .attribute("outs", AttributeKind::list_of(AttributeKind::ref_to("Molecule")))
        .computed(
            "coefficients",
            AttributeKind::list_of(AttributeKind::Int),
            |model, inst| {
                let ins = species_of(model, inst, "ins")?;
                let outs = species_of(model, inst, "outs")?;
                let cs = balance(&ins, &outs).map_err(failed)?;
                Ok(Value::List(cs.into_iter().map(|c| Value::Int(i64::from(c))).collect()))
            },
        )
        .computed("balanced", AttributeKind::String, |model, inst| {
            let ins = species_of(model, inst, "ins")?;
            let outs = species_of(model, inst, "outs")?;
            let cs = balance(&ins, &outs).map_err(failed)?;
            Ok(Value::str(format_balanced(&ins, &outs, &cs)))
        })
        .class_template(gradient("Wheat"))
        .narrative("{id} balances as {balanced}.");
    let network = ConceptType::new("Network")
        .attribute("reactions", AttributeKind::list_of(AttributeKind::ref_to("Reaction")))
        .class_template(gradient("LightGreen"))
        .narrative("");
    Model::new()
        .register_type(element)?
        .register_type(molecule)?
        .register_type(reaction)?
        .register_type(unbalanced)?
        .register_type(network)
}

/// Adds elements and molecules parsed from formula text, naming element
/// instances by symbol and molecules by label.
pub struct ChemBuilder {
    model: Model,
    table: ElementTable,
}

impl ChemBuilder {
    pub fn new(model: Model, table: ElementTable) -> ChemBuilder {
        ChemBuilder { model, table }
    }

    fn element(&mut self, symbol: &str) -> Result<InstanceId, ModelError> {
        let id = InstanceId::from(symbol);
        if self.model.instance(symbol).is_none() {
            let mass = self.table.mass(symbol).ok_or_else(|| {
                failed(ChemError::UnknownElement {
                    symbol: symbol.into(),
                    offset: 0,
                })
            })?;
            self.model = self.model.with_instance(
                id.clone(),
                "Element",
                [("name", Value::str(symbol)), ("atomic_mass", Value::Float(mass))],
            )?;
        }
        Ok(id)
    }

    /// Instance id of the molecule, created on first use.
    pub fn molecule(&mut self, formula: &str) -> Result<InstanceId, ModelError> {
        let f = parse_formula(formula, &self.table).map_err(failed)?;
        let label = f.label();
        let mut id = label.clone();
        if let Some(existing) = self.model.instance(&id) {
            if existing.type_name() == "Molecule" {
                return Ok(existing.id().clone());
            }
            id = format!("{label}_m");
            if self.model.instance(&id).is_some() {
                return Ok(InstanceId::from(id));
            }
        }
        let mut entries = Vec::new();
        for (s, n) in &f.parts {
            let el = self.element(s)?;
            entries.push(Value::Tuple(vec![Value::Ref(el), Value::Int(i64::from(*n))]));
        }
        self.model = self
            .model
            .with_instance(id.as_str(), "Molecule", [("formula", Value::List(entries))])?;
        Ok(InstanceId::from(id))
    }

    /// A Reaction instance from `(coefficient, formula)` sides.
    pub fn reaction(
        &mut self,
        id: &str,
        reactants: &[(i64, &str)],
        products: &[(i64, &str)],
    ) -> Result<(), ModelError> {
        let mut side = |terms: &[(i64, &str)]| -> Result<Value, ModelError> {
            let mut out = Vec::new();
            for (c, f) in terms {
                out.push(Value::Tuple(vec![Value::Int(*c), Value::Ref(self.molecule(f)?)]));
            }
            Ok(Value::List(out))
        };
        let r = side(reactants)?;
        let p = side(products)?;
        self.model = self
            .model
            .with_instance(id, "Reaction", [("products", p), ("reactants", r)])?;
        Ok(())
    }

    pub fn unbalanced(&mut self, id: &str, ins: &[&str], outs: &[&str]) -> Result<(), ModelError> {
        let mut side = |fs: &[&str]| -> Result<Value, ModelError> {
            fs.iter()
                .map(|f| self.molecule(f).map(Value::Ref))
                .collect::<Result<_, _>>()
                .map(Value::List)
        };
        let i = side(ins)?;
        let o = side(outs)?;
        self.model = self
            .model
            .with_instance(id, "UnbalancedReaction", [("ins", i), ("outs", o)])?;
        Ok(())
    }

    pub fn add(&mut self, id: &str, type_name: &str, bindings: Vec<(&str, Value)>) -> Result<(), ModelError> {
        self.model = self.model.with_instance(id, type_name, bindings)?;
        Ok(())
    }

    pub fn finish(self) -> Model {
        self.model
    }
}

/// FeCl2, a balanced reaction, and an unbalanced one.
pub fn reactions_model(table: &ElementTable) -> Result<Model, ModelError> {
    let mut b = ChemBuilder::new(chem_types()?, table.clone());
    b.molecule("FeCl2")?;
    b.reaction("R1", &[(2, "NO2")], &[(1, "NO3"), (1, "NO")])?;
    b.unbalanced("water", &["H2", "O2"], &["H2O"])?;
    Ok(b.finish())
}

/// Two coupled reactions in a network.
pub fn network_model(table: &ElementTable) -> Result<Model, ModelError> {
    let mut b = ChemBuilder::new(chem_types()?, table.clone());
    b.reaction("R1", &[(2, "NO2")], &[(1, "NO3"), (1, "NO")])?;
    b.reaction("R2", &[(1, "NO3"), (1, "CO")], &[(1, "NO2"), (1, "CO2")])?;
    b.add(
        "Net",
        "Network",
        vec![(
            "reactions",
            Value::List(vec![Value::reference("R1"), Value::reference("R2")]),
        )],
    )?;
    Ok(b.finish())
}

impl fmt::Display for UnbalancedReaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |fs: &[Formula]| fs.iter().map(Formula::label).collect::<Vec<_>>().join(" + ");
        write!(f, "{} -> {}", side(&self.ins), side(&self.outs))
    }
}

/// Atom counts per element, for callers that want a map view.
pub fn atom_counts(formula: &Formula) -> BTreeMap<String, u32> {
    formula.parts.iter().cloned().collect()
}

/// `format_number` for masses, re-exported for CLI output.
pub fn format_mass(m: f64) -> String {
    format_number(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> ElementTable {
        ElementTable::builtin()
    }

    fn f(s: &str) -> Formula {
        parse_formula(s, &table()).unwrap()
    }

    #[test]
    fn formulas() {
        assert_eq!(f("FeCl2").parts, vec![("Fe".into(), 1), ("Cl".into(), 2)]);
        assert_eq!(f("C6H12O6").label(), "C6H12O6");
        assert_eq!(
            f("CH3COOH").parts,
            vec![("C".into(), 2), ("H".into(), 4), ("O".into(), 2)]
        );
        assert!(matches!(
            parse_formula("Xx2", &table()),
            Err(ChemError::UnknownElement { offset: 0, .. })
        ));
        assert!(matches!(
            parse_formula("H0", &table()),
            Err(ChemError::Syntax { offset: 1, .. })
        ));
        assert!(matches!(
            parse_formula("2H", &table()),
            Err(ChemError::Syntax { offset: 0, .. })
        ));
        assert!(matches!(parse_formula("", &table()), Err(ChemError::Syntax { .. })));
    }

    #[test]
    fn reactions_parse_with_offsets() {
        let r = parse_reaction("H2 + O2 -> H2O", &table()).unwrap();
        assert_eq!(r.to_string(), "H2 + O2 -> H2O");
        assert!(matches!(
            parse_reaction("H2 O2", &table()),
            Err(ChemError::Syntax { offset: 5, .. })
        ));
        assert!(matches!(
            parse_reaction("H2 + -> H2O", &table()),
            Err(ChemError::Syntax { offset: 5, .. })
        ));
        assert!(matches!(
            parse_reaction("H2 -> Qq", &table()),
            Err(ChemError::UnknownElement { offset: 6, .. })
        ));
    }

    #[test]
    fn matrix_layout() {
        let p = elem_balance_matrix(&[f("NO2")], &[f("NO3"), f("NO")]);
        assert_eq!(p.elements, vec!["N", "O"]);
        assert_eq!(p.matrix, vec![vec![1, -1, -1], vec![2, -3, -1]]);
        let p = elem_balance_matrix(&[f("H2"), f("O2")], &[f("H2O")]);
        assert_eq!(p.matrix, vec![vec![2, 0, -2], vec![0, 2, -1]]);
    }

    #[test]
    fn balancing() {
        assert_eq!(balance(&[f("H2"), f("O2")], &[f("H2O")]), Ok(vec![2, 1, 2]));
        assert_eq!(balance(&[f("NO2")], &[f("NO3"), f("NO")]), Ok(vec![2, 1, 1]));
        assert_eq!(balance(&[f("Fe"), f("Cl2")], &[f("FeCl2")]), Ok(vec![1, 1, 1]));
        assert_eq!(
            balance(&[f("CO2"), f("H2O")], &[f("C6H12O6"), f("O2")]),
            Ok(vec![6, 6, 1, 6])
        );
        assert!(matches!(
            balance(&[f("H2")], &[f("O2")]),
            Err(ChemError::Infeasible { .. })
        ));
    }

    #[test]
    fn routes_agree_and_search_handles_wide_nullspaces() {
        let p = elem_balance_matrix(&[f("H2"), f("O2")], &[f("H2O")]);
        assert_eq!(balance_search(&p, Exec::Sequential), balance_nullspace(&p));
        // two independent sub-reactions: H2 -> H2 twice over
        let p = elem_balance_matrix(&[f("H2"), f("O2")], &[f("H2"), f("O2")]);
        assert_eq!(nullspace(&p).len(), 2);
        assert_eq!(balance_search(&p, Exec::Sequential), Some(vec![1, 1, 1, 1]));
        assert_eq!(balance_search(&p, Exec::default()), Some(vec![1, 1, 1, 1]));
    }

    #[test]
    fn masses_and_formatting() {
        let t = ElementTable::parse("Fe 56\nCl 35.5\n").unwrap();
        assert_eq!(molar_mass(&parse_formula("FeCl2", &t).unwrap(), &t), Ok(127.0));
        assert!((molar_mass(&f("H2O"), &table()).unwrap() - 18.015).abs() < 1e-9);
        assert_eq!(
            format_balanced(&[f("H2"), f("O2")], &[f("H2O")], &[2, 1, 2]),
            "2 H2 + 1 O2 -> 2 H2O"
        );
        assert!(ElementTable::parse("Fe fifty").is_err());
        assert!(ElementTable::parse("fe 5").is_err());
        assert!(ElementTable::parse("Fe -1").is_err());
    }

    #[test]
    fn models() {
        let m = reactions_model(&table()).unwrap();
        assert!(m.validate().is_empty());
        let fecl2 = m.instance("FeCl2").unwrap();
        assert_eq!(m.get_attribute(fecl2, "molar_mass"), Ok(Value::Float(127.0)));
        let water = m.instance("water").unwrap();
        assert_eq!(
            m.get_attribute(water, "balanced"),
            Ok(Value::str("2 H2 + 1 O2 -> 2 H2O"))
        );
        let n = network_model(&table()).unwrap();
        assert!(n.validate().is_empty());
        let r1 = n.instance("R1").unwrap();
        assert_eq!(n.get_attribute(r1, "balanced"), Ok(Value::Bool(true)));
        assert_eq!(n.get_attribute(r1, "product_phrase"), Ok(Value::str("1 NO3 and 1 NO")));
    }
}
