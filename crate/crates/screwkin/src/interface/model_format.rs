//! Line/field-structured mechanism description format.
//!
//! ```text
//! # comment
//! format_version: 1
//! convention: spatial            # or body_fixed, jfr
//! name: rcm
//!
//! param d2 = 0.4                 # value is an expression over earlier params
//!
//! body arm1
//!   parent: ground               # or the name of any other body
//!   joint: revolute              # revolute | prismatic | helical
//!   axis: 0 0 1                  # three expressions, unit vector
//!   point: -d2 0 0               # a point on the joint axis (default 0 0 0)
//!   ref_rot: 1 0 0 0 1 0 0 0 1   # nine expressions row-major (default identity)
//!   ref_pos: -x1 0 z1            # three expressions (default 0 0 0)
//! ```
//!
//! Numeric fields take whitespace-separated expressions (no spaces inside an
//! expression). `pitch:` is required for helical joints and rejected
//! otherwise. Which pose fields apply depends on the convention: `ref_*`
//! frames the body in the world (spatial), `rel_*` relative to the parent
//! (body_fixed), `pred_*`/`succ_*` place the two joint frames (jfr); the
//! joint axis and point are resolved in that convention's frame. Parsing
//! collects every problem with line/column positions instead of stopping at
//! the first.

use super::expr::eval_expr;
use crate::liegroup::{Pose, Rotation, Vec3};
use crate::mbsmodel::{
    BodyFixedModel, JfrModel, JointBodyFixedData, JointJfrData, JointKind, JointSpatialData,
    MbsModel, Topology,
};
use crate::screws::{make_unit_screw, Pitch, ScrewGeometry};
use nalgebra::{Matrix3, Vector3};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl Diagnostic {
    fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        Diagnostic {
            line,
            col,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    Jfr,
    BodyFixed,
    Spatial,
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Convention::Jfr => "jfr",
            Convention::BodyFixed => "body_fixed",
            Convention::Spatial => "spatial",
        };
        f.pad(s)
    }
}

/// One whitespace-free value token with its source position.
#[derive(Debug, Clone)]
pub struct Field {
    pub raw: String,
    pub line: usize,
    pub col: usize,
}

/// One `key: values...` line inside a body block.
#[derive(Debug, Clone)]
pub struct Entry {
    pub key: String,
    pub values: Vec<Field>,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone)]
pub struct ParamDecl {
    pub name: String,
    pub value: Field,
    pub line: usize,
}

#[derive(Debug, Clone)]
pub struct BodyDecl {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl BodyDecl {
    fn entry(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }
}

/// Parsed document: structure and raw expression text, before parameter
/// substitution. Equality ignores source positions, so a document printed
/// and re-parsed compares equal.
#[derive(Debug, Clone)]
pub struct ModelDocument {
    pub format_version: u32,
    pub convention: Convention,
    pub name: Option<String>,
    pub params: Vec<ParamDecl>,
    pub bodies: Vec<BodyDecl>,
}

impl PartialEq for ModelDocument {
    fn eq(&self, other: &Self) -> bool {
        self.format_version == other.format_version
            && self.convention == other.convention
            && self.name == other.name
            && self.params.len() == other.params.len()
            && self
                .params
                .iter()
                .zip(&other.params)
                .all(|(a, b)| a.name == b.name && a.value.raw == b.value.raw)
            && self.bodies.len() == other.bodies.len()
            && self.bodies.iter().zip(&other.bodies).all(|(a, b)| {
                a.name == b.name
                    && a.entries.len() == b.entries.len()
                    && a.entries.iter().zip(&b.entries).all(|(x, y)| {
                        x.key == y.key
                            && x.values.len() == y.values.len()
                            && x.values.iter().zip(&y.values).all(|(u, v)| u.raw == v.raw)
                    })
            })
    }
}

impl ModelDocument {
    /// Canonical text form; parsing it reproduces the document.
    pub fn print(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("format_version: {}\n", self.format_version));
        s.push_str(&format!("convention: {}\n", self.convention));
        if let Some(name) = &self.name {
            s.push_str(&format!("name: {name}\n"));
        }
        if !self.params.is_empty() {
            s.push('\n');
            for p in &self.params {
                s.push_str(&format!("param {} = {}\n", p.name, p.value.raw));
            }
        }
        for b in &self.bodies {
            s.push('\n');
            s.push_str(&format!("body {}\n", b.name));
            for e in &b.entries {
                let vals: Vec<&str> = e.values.iter().map(|f| f.raw.as_str()).collect();
                s.push_str(&format!("  {}: {}\n", e.key, vals.join(" ")));
            }
        }
        s
    }
}

/// Model plus its source document and the evaluated parameter set.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub model: MbsModel,
    pub doc: ModelDocument,
    pub params: BTreeMap<String, f64>,
}

const BODY_KEYS: &[&str] = &[
    "parent", "joint", "pitch", "axis", "point", "ref_rot", "ref_pos", "rel_rot", "rel_pos",
    "pred_rot", "pred_pos", "succ_rot", "succ_pos",
];

/// Tokenizes one line into (1-based column, token) pairs, dropping comments.
fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let line = match line.find('#') {
        Some(k) => &line[..k],
        None => line,
    };
    let mut out = Vec::new();
    let mut col = 1;
    for piece in line.split_inclusive(char::is_whitespace) {
        let token = piece.trim_end_matches(char::is_whitespace);
        if !token.is_empty() {
            out.push((col, token));
        }
        col += piece.chars().count();
    }
    out
}

/// Syntax-level parse. Collects every diagnostic; returns the document only
/// if the header (format version and convention) was usable.
pub fn parse_document(text: &str) -> Result<ModelDocument, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut format_version: Option<u32> = None;
    let mut convention: Option<Convention> = None;
    let mut name: Option<String> = None;
    let mut params: Vec<ParamDecl> = Vec::new();
    let mut bodies: Vec<BodyDecl> = Vec::new();

    for (lineno, raw_line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let tokens = tokenize(raw_line);
        if tokens.is_empty() {
            continue;
        }
        let (col0, head) = tokens[0];
        match head {
            "format_version:" => match tokens.get(1).map(|(_, t)| t.parse::<u32>()) {
                Some(Ok(v)) => format_version = Some(v),
                _ => diags.push(Diagnostic::new(
                    lineno,
                    col0,
                    "format_version needs an integer",
                )),
            },
            "convention:" => match tokens.get(1).map(|(_, t)| *t) {
                Some("jfr") => convention = Some(Convention::Jfr),
                Some("body_fixed") => convention = Some(Convention::BodyFixed),
                Some("spatial") => convention = Some(Convention::Spatial),
                Some(other) => diags.push(Diagnostic::new(
                    lineno,
                    tokens[1].0,
                    format!("unknown convention '{other}' (expected jfr, body_fixed, or spatial)"),
                )),
                None => diags.push(Diagnostic::new(lineno, col0, "convention needs a value")),
            },
            "name:" => match tokens.get(1) {
                Some((_, t)) => name = Some(t.to_string()),
                None => diags.push(Diagnostic::new(lineno, col0, "name needs a value")),
            },
            "param" => {
                if tokens.len() == 4 && tokens[2].1 == "=" {
                    let pname = tokens[1].1.to_string();
                    if params.iter().any(|p| p.name == pname) {
                        diags.push(Diagnostic::new(
                            lineno,
                            tokens[1].0,
                            format!("duplicate parameter '{pname}'"),
                        ));
                    }
                    params.push(ParamDecl {
                        name: pname,
                        value: Field {
                            raw: tokens[3].1.to_string(),
                            line: lineno,
                            col: tokens[3].0,
                        },
                        line: lineno,
                    });
                } else {
                    diags.push(Diagnostic::new(
                        lineno,
                        col0,
                        "expected 'param <name> = <expr>'",
                    ));
                }
            }
            "body" => match tokens.get(1) {
                Some((_, t)) => {
                    if bodies.iter().any(|b| b.name == *t) {
                        diags.push(Diagnostic::new(
                            lineno,
                            tokens[1].0,
                            format!("duplicate body '{t}'"),
                        ));
                    }
                    bodies.push(BodyDecl {
                        name: t.to_string(),
                        line: lineno,
                        entries: Vec::new(),
                    })
                }
                None => diags.push(Diagnostic::new(lineno, col0, "body needs a name")),
            },
            key if key.ends_with(':') => {
                let key_name = &key[..key.len() - 1];
                if !BODY_KEYS.contains(&key_name) {
                    diags.push(Diagnostic::new(
                        lineno,
                        col0,
                        format!("unknown field '{key_name}'"),
                    ));
                    continue;
                }
                let values: Vec<Field> = tokens[1..]
                    .iter()
                    .map(|(c, t)| Field {
                        raw: t.to_string(),
                        line: lineno,
                        col: *c,
                    })
                    .collect();
                match bodies.last_mut() {
                    Some(b) => {
                        if b.entries.iter().any(|e| e.key == key_name) {
                            diags.push(Diagnostic::new(
                                lineno,
                                col0,
                                format!("duplicate field '{key_name}' in body '{}'", b.name),
                            ));
                        }
                        b.entries.push(Entry {
                            key: key_name.to_string(),
                            values,
                            line: lineno,
                            col: col0,
                        })
                    }
                    None => diags.push(Diagnostic::new(
                        lineno,
                        col0,
                        format!("field '{key_name}' appears before any body"),
                    )),
                }
            }
            other => {
                diags.push(Diagnostic::new(
                    lineno,
                    col0,
                    format!("unrecognized line '{other}'"),
                ));
            }
        }
    }

    match format_version {
        None => diags.push(Diagnostic::new(1, 1, "missing format_version")),
        Some(1) => {}
        Some(v) => diags.push(Diagnostic::new(
            1,
            1,
            format!("unsupported format_version {v}"),
        )),
    }
    if convention.is_none() {
        diags.push(Diagnostic::new(1, 1, "missing convention"));
    }
    if let (Some(fv), Some(conv)) = (format_version, convention) {
        if fv == 1 && diags.is_empty() {
            return Ok(ModelDocument {
                format_version: fv,
                convention: conv,
                name,
                params,
                bodies,
            });
        }
        if fv == 1 {
            // Structure is usable; report the collected problems.
            diags.sort_by_key(|d| (d.line, d.col));
            return Err(diags);
        }
    }
    diags.sort_by_key(|d| (d.line, d.col));
    Err(diags)
}

struct BodySlot<'a> {
    decl: &'a BodyDecl,
    parent_name: Option<&'a str>,
}

/// Semantic pass: evaluates parameters and fields, orders bodies so that
/// parents precede children, builds the convention-specific model, and
/// converts it to the canonical spatial form.
pub fn build_model(
    doc: &ModelDocument,
    overrides: &BTreeMap<String, f64>,
) -> Result<(MbsModel, BTreeMap<String, f64>), Vec<Diagnostic>> {
    let mut diags: Vec<Diagnostic> = Vec::new();

    for key in overrides.keys() {
        if !doc.params.iter().any(|p| &p.name == key) {
            diags.push(Diagnostic::new(
                0,
                0,
                format!("override for undeclared parameter '{key}'"),
            ));
        }
    }

    // Parameters evaluate in declaration order over their predecessors.
    let mut params: BTreeMap<String, f64> = BTreeMap::new();
    for p in &doc.params {
        let value = match overrides.get(&p.name) {
            Some(v) => *v,
            None => match eval_expr(&p.value.raw, &params) {
                Ok(v) => v,
                Err(e) => {
                    diags.push(Diagnostic::new(
                        p.value.line,
                        p.value.col + e.offset,
                        e.message,
                    ));
                    0.0
                }
            },
        };
        params.insert(p.name.clone(), value);
    }

    if doc.bodies.is_empty() {
        diags.push(Diagnostic::new(0, 0, "no bodies declared"));
        diags.sort_by_key(|d| (d.line, d.col));
        return Err(diags);
    }

    // Resolve parent names and order bodies topologically (stable in
    // declaration order); unknown parents and cycles are reported.
    let slots: Vec<BodySlot> = doc
        .bodies
        .iter()
        .map(|b| {
            let parent_name = match b.entry("parent") {
                Some(e) if e.values.len() == 1 => Some(e.values[0].raw.as_str()),
                Some(e) => {
                    diags.push(Diagnostic::new(
                        e.line,
                        e.col,
                        "parent needs exactly one name",
                    ));
                    None
                }
                None => {
                    diags.push(Diagnostic::new(
                        b.line,
                        1,
                        format!("body '{}' has no parent field", b.name),
                    ));
                    None
                }
            };
            BodySlot {
                decl: b,
                parent_name,
            }
        })
        .collect();

    let name_index: BTreeMap<&str, usize> = doc
        .bodies
        .iter()
        .enumerate()
        .map(|(k, b)| (b.name.as_str(), k))
        .collect();
    for s in &slots {
        if let Some(p) = s.parent_name {
            if p != "ground" && !name_index.contains_key(p) {
                let e = s.decl.entry("parent").unwrap();
                diags.push(Diagnostic::new(
                    e.line,
                    e.col,
                    format!("unknown parent '{p}'"),
                ));
            }
        }
    }

    let mut order: Vec<usize> = Vec::with_capacity(slots.len());
    let mut placed = vec![false; slots.len()];
    loop {
        let mut advanced = false;
        for (k, s) in slots.iter().enumerate() {
            if placed[k] {
                continue;
            }
            let ready = match s.parent_name {
                None => true, // already diagnosed; treat as ground to continue
                Some("ground") => true,
                Some(p) => match name_index.get(p) {
                    Some(&pk) => placed[pk],
                    None => true, // unknown parent already diagnosed
                },
            };
            if ready {
                placed[k] = true;
                order.push(k);
                advanced = true;
            }
        }
        if order.len() == slots.len() {
            break;
        }
        if !advanced {
            for (k, s) in slots.iter().enumerate() {
                if !placed[k] {
                    diags.push(Diagnostic::new(
                        s.decl.line,
                        1,
                        format!("body '{}' is part of a parent cycle", s.decl.name),
                    ));
                }
            }
            break;
        }
    }

    // Field evaluation continues even when the topology is broken, so one
    // pass reports as much as possible; the model is only built when clean.

    // Field evaluation helpers.
    let eval_field = |f: &Field, diags: &mut Vec<Diagnostic>| -> f64 {
        match eval_expr(&f.raw, &params) {
            Ok(v) => {
                if !v.is_finite() {
                    diags.push(Diagnostic::new(
                        f.line,
                        f.col,
                        format!("non-finite value from '{}'", f.raw),
                    ));
                }
                v
            }
            Err(e) => {
                diags.push(Diagnostic::new(f.line, f.col + e.offset, e.message));
                0.0
            }
        }
    };
    let vec3_field =
        |decl: &BodyDecl, key: &str, default: Vec3, diags: &mut Vec<Diagnostic>| -> Vec3 {
            match decl.entry(key) {
                None => default,
                Some(e) if e.values.len() == 3 => Vector3::new(
                    eval_field(&e.values[0], diags),
                    eval_field(&e.values[1], diags),
                    eval_field(&e.values[2], diags),
                ),
                Some(e) => {
                    diags.push(Diagnostic::new(
                        e.line,
                        e.col,
                        format!("{key} needs 3 values, got {}", e.values.len()),
                    ));
                    default
                }
            }
        };
    let rot_field = |decl: &BodyDecl, key: &str, diags: &mut Vec<Diagnostic>| -> Rotation {
        match decl.entry(key) {
            None => Rotation::identity(),
            Some(e) if e.values.len() == 9 => {
                let v: Vec<f64> = e.values.iter().map(|f| eval_field(f, diags)).collect();
                let m = Matrix3::from_row_slice(&v);
                match Rotation::new(m) {
                    Ok(r) => r,
                    Err(err) => {
                        diags.push(Diagnostic::new(e.line, e.col, err.to_string()));
                        Rotation::identity()
                    }
                }
            }
            Some(e) => {
                diags.push(Diagnostic::new(
                    e.line,
                    e.col,
                    format!("{key} needs 9 values, got {}", e.values.len()),
                ));
                Rotation::identity()
            }
        }
    };

    let n = order.len();
    let mut parents = Vec::with_capacity(n);
    let mut names = Vec::with_capacity(n);
    let mut final_index: BTreeMap<&str, usize> = BTreeMap::new();
    for (new_i, &k) in order.iter().enumerate() {
        let s = &slots[k];
        final_index.insert(s.decl.name.as_str(), new_i + 1);
        let parent = match s.parent_name {
            Some("ground") | None => 0,
            Some(p) => *final_index.get(p).unwrap_or(&0),
        };
        parents.push(parent);
        names.push(s.decl.name.clone());
    }

    // Per-joint geometry in the declared convention.
    enum JointRaw {
        Spatial(JointSpatialData),
        BodyFixed(JointBodyFixedData),
        Jfr(JointJfrData),
    }
    let mut joints: Vec<JointRaw> = Vec::with_capacity(n);
    for &k in &order {
        let decl = slots[k].decl;
        let kind = match decl.entry("joint") {
            Some(e) if e.values.len() == 1 => match e.values[0].raw.as_str() {
                "revolute" => Some(JointKind::Revolute),
                "prismatic" => Some(JointKind::Prismatic),
                "helical" => Some(JointKind::Helical),
                other => {
                    diags.push(Diagnostic::new(
                        e.values[0].line,
                        e.values[0].col,
                        format!("unknown joint kind '{other}'"),
                    ));
                    None
                }
            },
            Some(e) => {
                diags.push(Diagnostic::new(
                    e.line,
                    e.col,
                    "joint needs exactly one kind",
                ));
                None
            }
            None => {
                diags.push(Diagnostic::new(
                    decl.line,
                    1,
                    format!("body '{}' has no joint field", decl.name),
                ));
                None
            }
        };
        let pitch_entry = decl.entry("pitch");
        let pitch = match (kind, pitch_entry) {
            (Some(JointKind::Helical), Some(e)) if e.values.len() == 1 => {
                Pitch::Finite(eval_field(&e.values[0], &mut diags))
            }
            (Some(JointKind::Helical), Some(e)) => {
                diags.push(Diagnostic::new(
                    e.line,
                    e.col,
                    "pitch needs exactly one value",
                ));
                Pitch::Finite(0.0)
            }
            (Some(JointKind::Helical), None) => {
                diags.push(Diagnostic::new(
                    decl.line,
                    1,
                    format!("helical joint of '{}' needs a pitch", decl.name),
                ));
                Pitch::Finite(0.0)
            }
            (Some(k), Some(e)) => {
                diags.push(Diagnostic::new(
                    e.line,
                    e.col,
                    format!("pitch is not allowed for a {k} joint"),
                ));
                k.pitch_for(0.0)
            }
            (Some(k), None) => k.pitch_for(0.0),
            (None, _) => Pitch::Finite(0.0),
        };

        let axis = match decl.entry("axis") {
            Some(_) => vec3_field(decl, "axis", Vector3::new(0.0, 0.0, 1.0), &mut diags),
            None => {
                diags.push(Diagnostic::new(
                    decl.line,
                    1,
                    format!("body '{}' has no axis field", decl.name),
                ));
                Vector3::new(0.0, 0.0, 1.0)
            }
        };
        let point = vec3_field(decl, "point", Vector3::zeros(), &mut diags);

        let screw = match make_unit_screw(&ScrewGeometry { axis, point, pitch }) {
            Ok(s) => s,
            Err(e) => {
                let (line, col) = decl
                    .entry("axis")
                    .map(|en| (en.line, en.col))
                    .unwrap_or((decl.line, 1));
                diags.push(Diagnostic::new(line, col, e.to_string()));
                make_unit_screw(&ScrewGeometry {
                    axis: Vector3::new(0.0, 0.0, 1.0),
                    point: Vector3::zeros(),
                    pitch: Pitch::Finite(0.0),
                })
                .unwrap()
            }
        };

        let check_fields = |allowed: &[&str], diags: &mut Vec<Diagnostic>| {
            for e in &decl.entries {
                let common = ["parent", "joint", "pitch", "axis", "point"];
                if !common.contains(&e.key.as_str()) && !allowed.contains(&e.key.as_str()) {
                    diags.push(Diagnostic::new(
                        e.line,
                        e.col,
                        format!(
                            "field '{}' does not belong to the {} convention",
                            e.key, doc.convention
                        ),
                    ));
                }
            }
        };

        match doc.convention {
            Convention::Spatial => {
                check_fields(&["ref_rot", "ref_pos"], &mut diags);
                let a = Pose::new(
                    rot_field(decl, "ref_rot", &mut diags),
                    vec3_field(decl, "ref_pos", Vector3::zeros(), &mut diags),
                );
                joints.push(JointRaw::Spatial(JointSpatialData { a, y: screw }));
            }
            Convention::BodyFixed => {
                check_fields(&["rel_rot", "rel_pos"], &mut diags);
                let b = Pose::new(
                    rot_field(decl, "rel_rot", &mut diags),
                    vec3_field(decl, "rel_pos", Vector3::zeros(), &mut diags),
                );
                joints.push(JointRaw::BodyFixed(JointBodyFixedData { b, x: screw }));
            }
            Convention::Jfr => {
                check_fields(
                    &["pred_rot", "pred_pos", "succ_rot", "succ_pos"],
                    &mut diags,
                );
                let s_pred = Pose::new(
                    rot_field(decl, "pred_rot", &mut diags),
                    vec3_field(decl, "pred_pos", Vector3::zeros(), &mut diags),
                );
                let s_succ = Pose::new(
                    rot_field(decl, "succ_rot", &mut diags),
                    vec3_field(decl, "succ_pos", Vector3::zeros(), &mut diags),
                );
                joints.push(JointRaw::Jfr(JointJfrData {
                    s_pred,
                    s_succ,
                    z: screw,
                }));
            }
        }
    }

    if !diags.is_empty() {
        diags.sort_by_key(|d| (d.line, d.col));
        return Err(diags);
    }

    let topo = Topology::new(parents, Some(names));
    let model = match doc.convention {
        Convention::Spatial => MbsModel::from_parts_unchecked(
            topo,
            joints
                .into_iter()
                .map(|j| match j {
                    JointRaw::Spatial(d) => d,
                    _ => unreachable!(),
                })
                .collect(),
        ),
        Convention::BodyFixed => BodyFixedModel {
            topo,
            joints: joints
                .into_iter()
                .map(|j| match j {
                    JointRaw::BodyFixed(d) => d,
                    _ => unreachable!(),
                })
                .collect(),
        }
        .to_spatial(),
        Convention::Jfr => JfrModel {
            topo,
            joints: joints
                .into_iter()
                .map(|j| match j {
                    JointRaw::Jfr(d) => d,
                    _ => unreachable!(),
                })
                .collect(),
        }
        .to_body_fixed()
        .to_spatial(),
    };

    let report = model.validate();
    if !report.is_ok() {
        for issue in &report.issues {
            let line = doc.bodies.get(issue.body - 1).map(|b| b.line).unwrap_or(0);
            diags.push(Diagnostic::new(line, 1, issue.message.clone()));
        }
        diags.sort_by_key(|d| (d.line, d.col));
        return Err(diags);
    }

    Ok((model, params))
}

/// Full pipeline: parse, evaluate, build, validate.
pub fn parse_model(text: &str) -> Result<LoadedModel, Vec<Diagnostic>> {
    parse_model_with_params(text, &BTreeMap::new())
}

pub fn parse_model_with_params(
    text: &str,
    overrides: &BTreeMap<String, f64>,
) -> Result<LoadedModel, Vec<Diagnostic>> {
    let doc = parse_document(text)?;
    let (model, params) = build_model(&doc, overrides)?;
    Ok(LoadedModel { model, doc, params })
}
