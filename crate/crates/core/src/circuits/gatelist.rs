//! Plain-text gate lists: one instruction per line as
//! `name | angles | targets`, comma-separated inside each field.
//!
//! ```text
//! # qubits 7
//! # measured 1,2,3,4,5,6
//! # auxiliary 0
//! # trotter_order 1
//! ansatz_reduced8 | 0.10000000000000001,… | 1,0
//! bond | 1,0.20000000000000001,0.10000000000000001 | 3,4
//! measure_reset |  | 6
//! ```
//!
//! Angles are written with 17 significant digits so a round trip through
//! text reproduces every gate matrix bit for bit.

use super::{CostCircuit, GateSpec, Op};
use crate::ansatz::Template;
use crate::error::{invalid, Error, Result};
use crate::qcore::Axis;
use crate::tfim::TrotterOrder;
use std::fmt::Write as _;

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn join<T, F: Fn(&T) -> String>(items: &[T], f: F) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(",")
}

fn gate_name(spec: &GateSpec) -> String {
    match spec {
        GateSpec::Ansatz {
            template, adjoint, ..
        } => {
            format!(
                "ansatz_{}{}",
                template.name(),
                if *adjoint { "_dg" } else { "" }
            )
        }
        GateSpec::Bond { .. } => "bond".into(),
        GateSpec::Rot { axis, .. } => format!("r{}", axis.symbol().to_ascii_lowercase()),
        GateSpec::X => "x".into(),
    }
}

fn gate_angles(spec: &GateSpec) -> Vec<f64> {
    match spec {
        GateSpec::Ansatz { angles, .. } => angles.clone(),
        GateSpec::Bond { j, g, tau } => vec![*j, *g, *tau],
        GateSpec::Rot { angle, .. } => vec![*angle],
        GateSpec::X => vec![],
    }
}

/// Serialises the circuit.
pub fn write_gate_list(circ: &CostCircuit) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# qubits {}", circ.qubit_count);
    let _ = writeln!(
        out,
        "# measured {}",
        join(&circ.measured, |q| q.to_string())
    );
    let _ = writeln!(
        out,
        "# auxiliary {}",
        join(&circ.auxiliary, |q| q.to_string())
    );
    if let Some(order) = circ.trotter_order {
        let _ = writeln!(out, "# trotter_order {}", order.as_int());
    }
    for op in &circ.ops {
        match op {
            Op::Gate { spec, targets, .. } => {
                let angles = join(&gate_angles(spec), |a| fmt_f64(*a));
                let _ = writeln!(
                    out,
                    "{} | {} | {}",
                    gate_name(spec),
                    angles,
                    join(targets, |q| q.to_string())
                );
            }
            Op::MeasureReset { qubit } => {
                let _ = writeln!(out, "measure_reset |  | {qubit}");
            }
        }
    }
    out
}

fn parse_list<T: std::str::FromStr>(field: &str, line: usize) -> Result<Vec<T>> {
    let field = field.trim();
    if field.is_empty() {
        return Ok(vec![]);
    }
    field
        .split(',')
        .map(|tok| {
            tok.trim().parse().map_err(|_| {
                Error::InvalidArgument(format!("line {line}: cannot parse '{}'", tok.trim()))
            })
        })
        .collect()
}

fn parse_spec(name: &str, angles: Vec<f64>, line: usize) -> Result<GateSpec> {
    let want = |n: usize| -> Result<()> {
        if angles.len() == n {
            Ok(())
        } else {
            invalid(format!(
                "line {line}: gate '{name}' takes {n} angle(s), got {}",
                angles.len()
            ))
        }
    };
    let spec = match name {
        "bond" => {
            want(3)?;
            GateSpec::Bond {
                j: angles[0],
                g: angles[1],
                tau: angles[2],
            }
        }
        "x" => {
            want(0)?;
            GateSpec::X
        }
        "rx" | "ry" | "rz" => {
            want(1)?;
            let axis = match name {
                "rx" => Axis::X,
                "ry" => Axis::Y,
                _ => Axis::Z,
            };
            GateSpec::Rot {
                axis,
                angle: angles[0],
            }
        }
        _ => {
            let rest = name.strip_prefix("ansatz_").ok_or_else(|| {
                Error::InvalidArgument(format!("line {line}: unknown gate '{name}'"))
            })?;
            let (tname, adjoint) = match rest.strip_suffix("_dg") {
                Some(t) => (t, true),
                None => (rest, false),
            };
            let template = Template::from_name(tname).ok_or_else(|| {
                Error::InvalidArgument(format!("line {line}: unknown template '{tname}'"))
            })?;
            want(template.n_params())?;
            GateSpec::Ansatz {
                template,
                angles,
                adjoint,
            }
        }
    };
    Ok(spec)
}

/// Parses text produced by [`write_gate_list`].
pub fn parse_gate_list(text: &str) -> Result<CostCircuit> {
    let mut qubits = None;
    let mut measured = vec![];
    let mut auxiliary = vec![];
    let mut order = None;
    let mut body = vec![];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(header) = trimmed.strip_prefix('#') {
            let mut parts = header.trim().splitn(2, ' ');
            let key = parts.next().unwrap_or("");
            let value = parts.next().unwrap_or("").trim();
            match key {
                "qubits" => {
                    qubits = Some(value.parse::<usize>().map_err(|_| {
                        Error::InvalidArgument(format!("line {line}: bad qubit count '{value}'"))
                    })?)
                }
                "measured" => measured = parse_list(value, line)?,
                "auxiliary" => auxiliary = parse_list(value, line)?,
                "trotter_order" => {
                    let n: u32 = value.parse().map_err(|_| {
                        Error::InvalidArgument(format!("line {line}: bad trotter order"))
                    })?;
                    order = Some(TrotterOrder::from_int(n)?);
                }
                _ => {}
            }
            continue;
        }
        body.push((line, trimmed));
    }
    let qubits =
        qubits.ok_or_else(|| Error::InvalidArgument("missing '# qubits' header".into()))?;
    let mut circ = CostCircuit::new(qubits)?;
    circ.trotter_order = order;
    for (line, text) in body {
        let fields: Vec<&str> = text.split('|').collect();
        if fields.len() != 3 {
            return invalid(format!("line {line}: expected 'name | angles | targets'"));
        }
        let name = fields[0].trim();
        let angles: Vec<f64> = parse_list(fields[1], line)?;
        let targets: Vec<usize> = parse_list(fields[2], line)?;
        if name == "measure_reset" {
            if !angles.is_empty() || targets.len() != 1 {
                return invalid(format!(
                    "line {line}: measure_reset takes no angles and one target"
                ));
            }
            circ.push_measure_reset(targets[0])?;
        } else {
            circ.push_gate(parse_spec(name, angles, line)?, &targets)?;
        }
    }
    circ.set_auxiliary(auxiliary)?;
    circ.set_measured(measured)?;
    Ok(circ)
}
