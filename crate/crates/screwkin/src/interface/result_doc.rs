//! Result documents: JSON with every float printed at 17 significant digits
//! so the text encoding is lossless and byte-stable across runs.

use crate::kinematics::OpCount;
use crate::liegroup::{Pose, Screw};
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use std::io;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BodyPoseOut {
    pub body: usize,
    pub name: String,
    /// Row-major 3x3 rotation.
    pub rot: Vec<Vec<f64>>,
    pub pos: Vec<f64>,
}

impl BodyPoseOut {
    pub fn from_pose(body: usize, name: &str, pose: &Pose) -> Self {
        let m = pose.rot.matrix();
        BodyPoseOut {
            body,
            name: name.to_string(),
            rot: (0..3)
                .map(|r| (0..3).map(|c| m[(r, c)]).collect())
                .collect(),
            pos: pose.pos.iter().copied().collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TwistOut {
    pub body: usize,
    pub name: String,
    pub ang: Vec<f64>,
    pub lin: Vec<f64>,
}

impl TwistOut {
    pub fn from_screw(body: usize, name: &str, s: &Screw) -> Self {
        TwistOut {
            body,
            name: name.to_string(),
            ang: s.ang.iter().copied().collect(),
            lin: s.lin.iter().copied().collect(),
        }
    }

    pub fn to_screw(&self) -> Screw {
        Screw::new(
            nalgebra::Vector3::new(self.ang[0], self.ang[1], self.ang[2]),
            nalgebra::Vector3::new(self.lin[0], self.lin[1], self.lin[2]),
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct JacobianOut {
    pub body: usize,
    pub rep: String,
    /// Joints on the ground-to-body path (columns outside are zero).
    pub support: Vec<usize>,
    /// Dense 6 x n matrix, row-major.
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SystemOut {
    pub rep: String,
    /// 6n x n system Jacobian, row-major.
    pub j: Vec<Vec<f64>>,
    /// 6n x 6n transport matrix A, row-major.
    pub a: Vec<Vec<f64>>,
    /// 6n x n block-diagonal joint screw matrix X, row-major.
    pub x: Vec<Vec<f64>>,
    /// Nilpotent companion (I - D)^-1 = A where applicable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_or_t: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RatesOut {
    pub qdot: Vec<f64>,
    pub residual_norm: f64,
    pub consistent: bool,
    /// Largest component gap to the dense least-squares solution.
    pub lsq_discrepancy: f64,
    pub residual: Vec<TwistOut>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
pub struct OpCountOut {
    pub prep_adjoint: usize,
    pub prep_rot: usize,
    pub sweep_adjoint: usize,
    pub sweep_shift: usize,
    pub sweep_block: usize,
    pub screw_scale: usize,
    pub screw_add: usize,
}

impl From<OpCount> for OpCountOut {
    fn from(c: OpCount) -> Self {
        OpCountOut {
            prep_adjoint: c.prep_adjoint,
            prep_rot: c.prep_rot,
            sweep_adjoint: c.sweep_adjoint,
            sweep_shift: c.sweep_shift,
            sweep_block: c.sweep_block,
            screw_scale: c.screw_scale,
            screw_add: c.screw_add,
        }
    }
}

/// Output of one CLI command: input echo plus the requested results.
/// Fields that a command does not produce stay absent.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
pub struct ResultDocument {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qdot: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rep: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bodies: Option<Vec<BodyPoseOut>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub twists: Option<Vec<TwistOut>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jacobians: Option<Vec<JacobianOut>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rates: Option<RatesOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub op_counts: Option<Vec<(String, OpCountOut)>>,
    /// Wall-clock seconds; the only field allowed to vary between runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_s: Option<f64>,
}

impl ResultDocument {
    pub fn new(command: &str, n: usize) -> Self {
        ResultDocument {
            tool: "screwkin".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            n,
            ..Default::default()
        }
    }
}

struct SigFigFormatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl<'a> Formatter for SigFigFormatter<'a> {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        // 17 significant digits round-trip any f64 exactly.
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_array(writer)
    }

    fn end_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object(writer)
    }

    fn end_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_object_value(writer)
    }
}

/// Serializes with 17-significant-digit floats, trailing newline included.
pub fn to_json_string(doc: &ResultDocument) -> String {
    let mut out = Vec::new();
    let fmt = SigFigFormatter {
        inner: PrettyFormatter::new(),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut out, fmt);
    doc.serialize(&mut ser).expect("result document serializes");
    out.push(b'\n');
    String::from_utf8(out).expect("json is utf8")
}

pub fn from_json_str(text: &str) -> Result<ResultDocument, serde_json::Error> {
    serde_json::from_str(text)
}

/// Dense matrix rows for the row-major JSON encoding.
pub fn matrix_rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| m.row(r).iter().copied().collect())
        .collect()
}

/// Comma-separated values of a dense matrix, one line per row.
pub fn matrix_csv(m: &nalgebra::DMatrix<f64>) -> String {
    let mut s = String::new();
    for r in 0..m.nrows() {
        let row: Vec<String> = m.row(r).iter().map(|v| format!("{v:.16e}")).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_print_at_17_significant_digits_and_round_trip() {
        let mut doc = ResultDocument::new("fk", 1);
        doc.q = Some(vec![0.4, -1.0 / 3.0, 1e-17]);
        let text = to_json_string(&doc);
        assert!(text.contains("4.0000000000000002e-1"));
        let back = from_json_str(&text).unwrap();
        assert_eq!(back.q.as_ref().unwrap()[0].to_bits(), (0.4f64).to_bits());
        assert_eq!(
            back.q.as_ref().unwrap()[1].to_bits(),
            (-1.0f64 / 3.0).to_bits()
        );
        assert_eq!(back.q.as_ref().unwrap()[2].to_bits(), (1e-17f64).to_bits());
    }

    #[test]
    fn serialization_is_byte_stable() {
        let mut doc = ResultDocument::new("twists", 2);
        doc.rep = Some("spatial".to_string());
        doc.twists = Some(vec![TwistOut {
            body: 1,
            name: "a".into(),
            ang: vec![0.1, 0.2, 0.3],
            lin: vec![-0.4, 0.5, -0.6],
        }]);
        assert_eq!(to_json_string(&doc), to_json_string(&doc.clone()));
    }

    #[test]
    fn absent_fields_are_omitted() {
        let doc = ResultDocument::new("fk", 3);
        let text = to_json_string(&doc);
        assert!(!text.contains("qdot"));
        assert!(!text.contains("rates"));
        assert!(!text.contains("timing_s"));
    }
}
