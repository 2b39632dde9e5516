//! Run configuration and the JSON report envelope.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

use crate::citation::Citation;
use crate::error::{Error, Result};
use crate::space::Exponent;
use crate::tolerance::Tolerances;

pub const MIN_GRID_DENSITY: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub tolerances: Tolerances,
    pub grid_density: usize,
    pub p_values: Vec<Exponent>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            tolerances: Tolerances::default(),
            grid_density: 1_000_000,
            p_values: vec![
                Exponent::new(1.5).expect("valid"),
                Exponent::TWO,
                Exponent::new(3.0).expect("valid"),
            ],
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.tolerances.is_valid() {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if self.grid_density < MIN_GRID_DENSITY {
            return Err(Error::InvalidArgument(format!(
                "grid density must be at least {MIN_GRID_DENSITY}"
            )));
        }
        if self.p_values.is_empty() {
            return Err(Error::InvalidArgument("p_values must not be empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub verdicts: Value,
    pub citations: Vec<Citation>,
    /// Wall-clock seconds; left out unless requested so output stays byte-stable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<f64>,
}

impl Report {
    /// Citations are sorted and deduplicated; an empty list becomes `plumbing`.
    pub fn new<I: Serialize, V: Serialize>(
        command: &str,
        inputs: &I,
        verdicts: &V,
        citations: impl IntoIterator<Item = Citation>,
    ) -> Result<Self> {
        let mut citations: Vec<Citation> = citations.into_iter().collect();
        citations.sort();
        citations.dedup();
        if citations.is_empty() {
            citations.push(Citation::Plumbing);
        }
        let to_value = |v: serde_json::Result<Value>| v.map_err(|e| Error::InvalidArgument(e.to_string()));
        Ok(Self {
            command: command.to_string(),
            inputs: to_value(serde_json::to_value(inputs))?,
            verdicts: to_value(serde_json::to_value(verdicts))?,
            citations,
            timing: None,
        })
    }

    pub fn to_json(&self) -> String {
        to_json_string(self)
    }
}

/// Pretty-printed JSON with every float written as 17 significant digits.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits::default());
    value
        .serialize(&mut ser)
        .expect("in-memory serialization does not fail");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

#[derive(Default)]
struct FixedDigits {
    pretty: PrettyFormatter<'static>,
}

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_object_key(w, first)
    }

    fn end_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object_key(w)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object_value(w)
    }
}

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    InputError = 1,
    AssertionFailure = 2,
    OracleDiscrepancy = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}
