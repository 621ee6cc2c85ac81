//! CSV tables of spectral states and JSON reports, all floats at 17 significant digits.
//!
//! A state table has one row per `(index, mode)`: the row index of the state,
//! the independent variable (`l`, `p` or `t`), the integer wavevector
//! `k1..kd`, then `{field}{component}_re` and `_im` for every component
//! (`u1.. theta` for Boussinesq, `u1.. b1..` for MHD).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use borel_flow::{Complex64, FlowState, Model, Problem};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::CliError;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn table_err(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::Table { path: path.to_path_buf(), msg: msg.to_string() }
}

fn component_names(problem: Problem, dim: usize) -> Vec<String> {
    let mut names: Vec<String> = (1..=dim).map(|c| format!("u{c}")).collect();
    match problem {
        Problem::Boussinesq => names.push("theta".into()),
        Problem::Mhd => names.extend((1..=dim).map(|c| format!("b{c}"))),
    }
    names
}

pub fn state_header(problem: Problem, dim: usize, var: &str) -> Vec<String> {
    let mut h = vec!["index".to_string(), var.to_string()];
    h.extend((1..=dim).map(|c| format!("k{c}")));
    for n in component_names(problem, dim) {
        h.push(format!("{n}_re"));
        h.push(format!("{n}_im"));
    }
    h
}

pub fn write_states_csv(path: &Path, var: &str, values: &[f64], states: &[FlowState]) -> Result<(), CliError> {
    let first = states.first().ok_or_else(|| table_err(path, "no states to write"))?;
    let lat = *first.lattice();
    let dim = lat.dim();
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let csv_err = |e: csv::Error| table_err(path, e);
    w.write_record(state_header(first.problem(), dim, var)).map_err(csv_err)?;
    let mut row: Vec<String> = Vec::new();
    for (i, (&x, s)) in values.iter().zip(states).enumerate() {
        for m in 0..lat.len() {
            row.clear();
            row.push(i.to_string());
            row.push(fmt_f64(x));
            let n = lat.multi_index(m);
            row.extend(n[..dim].iter().map(|v| v.to_string()));
            for f in s.fields() {
                for a in f.amplitude(m) {
                    row.push(fmt_f64(a.re));
                    row.push(fmt_f64(a.im));
                }
            }
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    w.flush().map_err(io_err(path))
}

/// Reads a table written by [`write_states_csv`] back into states of `model`.
pub fn read_states_csv(path: &Path, model: &Model) -> Result<(Vec<f64>, Vec<FlowState>), CliError> {
    let lat = *model.lattice();
    let dim = lat.dim();
    let mut r = csv::Reader::from_path(path).map_err(|e| table_err(path, e))?;
    let header: Vec<String> = r.headers().map_err(|e| table_err(path, e))?.iter().map(String::from).collect();
    if header.len() < 2 || header[2..] != state_header(model.problem(), dim, &header[1])[2..] {
        return Err(table_err(path, "header does not match the configured problem"));
    }
    let mut values: Vec<f64> = Vec::new();
    let mut states: Vec<FlowState> = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| table_err(path, e))?;
        let bad = |what: &str| table_err(path, format!("row {}: bad {what}", line + 2));
        let idx: usize = rec[0].parse().map_err(|_| bad("index"))?;
        let x: f64 = rec[1].parse().map_err(|_| bad("variable"))?;
        if idx == states.len() {
            values.push(x);
            states.push(model.zero_state());
        } else if idx + 1 != states.len() || values[idx] != x {
            return Err(bad("index order"));
        }
        let n: Vec<i64> = (0..dim).map(|c| rec[2 + c].parse().map_err(|_| bad("wavevector"))).collect::<Result<_, _>>()?;
        let m = lat.index_of(&n).ok_or_else(|| bad("wavevector"))?;
        let mut col = 2 + dim;
        let state = states.last_mut().expect("pushed above");
        for f in state.fields_mut() {
            for a in f.amplitude_mut(m) {
                let re: f64 = rec[col].parse().map_err(|_| bad("amplitude"))?;
                let im: f64 = rec[col + 1].parse().map_err(|_| bad("amplitude"))?;
                *a = Complex64::new(re, im);
                col += 2;
            }
        }
    }
    Ok((values, states))
}

/// Pretty JSON whose floats use the fixed scientific format.
struct SciFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for SciFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("report types serialize infallibly");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    std::fs::write(path, to_json(value)).map_err(io_err(path))
}
