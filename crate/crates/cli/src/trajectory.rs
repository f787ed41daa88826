//! Trajectory tables: one row per time step with the echo, shot count,
//! cost and all ansatz angles, and the quench in the header.

use std::path::Path;

use qmps_core::ansatz::{AnsatzParams, Template};
use qmps_core::evolve::{InitScheme, Trajectory, TrajectoryPoint};
use qmps_core::tfim::{QuenchSpec, TrotterOrder};

use crate::error::{CliError, Result};
use crate::table::{format_float, Table};

const FIXED_COLUMNS: [&str; 6] = [
    "step",
    "time",
    "echo",
    "cumulative_shots",
    "cost",
    "converged",
];

pub fn to_table(traj: &Trajectory, template: Template) -> Table {
    let s = &traj.spec;
    let angle_names: Vec<String> = (0..template.n_params())
        .map(|i| format!("phi{i}"))
        .collect();
    let mut columns: Vec<&str> = FIXED_COLUMNS.to_vec();
    columns.extend(angle_names.iter().map(String::as_str));
    let mut t = Table::new(&columns)
        .with_meta("template", template.name())
        .with_meta("j", format_float(s.j))
        .with_meta("g0", format_float(s.g0))
        .with_meta("g1", format_float(s.g1))
        .with_meta("dt", format_float(s.dt))
        .with_meta("t_max", format_float(s.t_max))
        .with_meta("trotter_order", s.trotter_order.as_int())
        .with_meta("seed", traj.seed)
        .with_meta("init_scheme", traj.init.map_or("exact", InitScheme::name));
    if let Some(f) = &traj.failure {
        t = t.with_meta("failure", f.replace('\n', " "));
    }
    for p in &traj.points {
        let mut row = vec![
            p.step as f64,
            p.time,
            p.echo,
            p.cumulative_shots as f64,
            p.cost,
            if p.converged { 1.0 } else { 0.0 },
        ];
        row.extend_from_slice(p.params.angles());
        t.push_row(row);
    }
    t
}

/// A trajectory read back from a table, with its template.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredTrajectory {
    pub template: Template,
    pub trajectory: Trajectory,
}

pub fn from_table(t: &Table, origin: &Path) -> Result<StoredTrajectory> {
    let err = |message: String| CliError::Parse {
        path: origin.to_path_buf(),
        message,
    };
    let meta = |k: &str| {
        t.meta(k)
            .ok_or_else(|| err(format!("header is missing '{k}'")))
    };
    let num = |k: &str| -> Result<f64> {
        meta(k)?
            .parse()
            .map_err(|_| err(format!("header '{k}' is not a number")))
    };
    let template =
        Template::from_name(meta("template")?).ok_or_else(|| err("unknown template".into()))?;
    let order = meta("trotter_order")?
        .parse()
        .map_err(|_| err("bad trotter_order".into()))?;
    let spec = QuenchSpec {
        j: num("j")?,
        g0: num("g0")?,
        g1: num("g1")?,
        dt: num("dt")?,
        t_max: num("t_max")?,
        trotter_order: TrotterOrder::from_int(order).map_err(|e| err(e.to_string()))?,
    };
    let seed = meta("seed")?.parse().map_err(|_| err("bad seed".into()))?;
    let init = match meta("init_scheme")? {
        "exact" => None,
        name => Some(
            InitScheme::from_name(name)
                .ok_or_else(|| err(format!("unknown init scheme '{name}'")))?,
        ),
    };
    let n = template.n_params();
    if t.columns.len() != FIXED_COLUMNS.len() + n
        || t.columns[..FIXED_COLUMNS.len()] != FIXED_COLUMNS
    {
        return Err(err("not a trajectory table".into()));
    }
    let points = t
        .rows
        .iter()
        .map(|r| {
            Ok(TrajectoryPoint {
                step: r[0] as usize,
                time: r[1],
                echo: r[2],
                cumulative_shots: r[3] as u64,
                cost: r[4],
                converged: r[5] != 0.0,
                params: AnsatzParams::new(template, r[FIXED_COLUMNS.len()..].to_vec())?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let failure = t.meta("failure").map(str::to_string);
    Ok(StoredTrajectory {
        template,
        trajectory: Trajectory {
            spec,
            seed,
            init,
            points,
            failure,
        },
    })
}

pub fn read(path: &Path) -> Result<StoredTrajectory> {
    from_table(&Table::read(path)?, path)
}
