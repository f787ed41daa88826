//! Trajectory comparison: RMS echo deviation and, for reduced8, how much of
//! the parameter distance a gauge rotation and a reparametrisation explain.

use qmps_core::ansatz::{align, angle_distance, Template};
use qmps_core::evolve::rms_deviation;
use qmps_core::tfim::QuenchSpec;
use qmps_core::Error;

use crate::error::Result;
use crate::table::{format_float, Table};
use crate::trajectory::StoredTrajectory;

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub table: Table,
    pub rms_echo_deviation: f64,
    pub raw: f64,
    pub gauge: f64,
    pub reparam: f64,
    pub residual: f64,
    pub steps: usize,
}

impl CompareReport {
    pub fn summary_lines(&self) -> Vec<String> {
        vec![
            format!("steps compared: {}", self.steps),
            format!(
                "rms echo deviation: {}",
                format_float(self.rms_echo_deviation)
            ),
            format!(
                "parameter distance (summed over steps): {}",
                format_float(self.raw)
            ),
            format!("  explained by gauge: {}", format_float(self.gauge)),
            format!(
                "  explained by reparametrisation: {}",
                format_float(self.reparam)
            ),
            format!("  residual: {}", format_float(self.residual)),
        ]
    }
}

/// Compares the steps both trajectories cover. The quench and time step
/// must agree; `t_max` may differ.
pub fn compare(a: &StoredTrajectory, b: &StoredTrajectory) -> Result<CompareReport> {
    let same_grid = |x: &QuenchSpec| QuenchSpec { t_max: 0.0, ..*x };
    if same_grid(&a.trajectory.spec) != same_grid(&b.trajectory.spec) {
        return Err(Error::InvalidArgument(format!(
            "trajectories use different quenches: {:?} vs {:?}",
            a.trajectory.spec, b.trajectory.spec
        ))
        .into());
    }
    if a.template != b.template {
        return Err(Error::InvalidArgument(format!(
            "trajectories use different templates: {} vs {}",
            a.template.name(),
            b.template.name()
        ))
        .into());
    }
    let (pa, pb) = (&a.trajectory.points, &b.trajectory.points);
    let steps = pa.len().min(pb.len());
    let echoes = |p: &[qmps_core::evolve::TrajectoryPoint]| {
        p[..steps].iter().map(|x| x.echo).collect::<Vec<_>>()
    };
    let rms = rms_deviation(&echoes(pa), &echoes(pb))?;
    let decompose = a.template == Template::Reduced8;
    let mut table = Table::new(&[
        "step",
        "time",
        "echo_a",
        "echo_b",
        "echo_difference",
        "raw_distance",
        "gauge_component",
        "reparam_component",
        "residual",
        "gauge_angle",
        "reparam_defect",
    ])
    .with_meta("template", a.template.name())
    .with_meta("rms_echo_deviation", format_float(rms));
    if !decompose {
        table = table.with_meta("decomposition", "unavailable for this template");
    }
    let (mut raw, mut gauge, mut reparam, mut residual) = (0.0, 0.0, 0.0, 0.0);
    for (x, y) in pa[..steps].iter().zip(&pb[..steps]) {
        let row_tail = if decompose {
            let al = align(&x.params, &y.params)?;
            raw += al.raw;
            gauge += al.gauge_component();
            reparam += al.reparam_component();
            residual += al.after_reparam;
            [
                al.raw,
                al.gauge_component(),
                al.reparam_component(),
                al.after_reparam,
                al.gauge_angle,
                al.reparam_defect,
            ]
        } else {
            let d = angle_distance(&y.params, &x.params);
            raw += d;
            [d, f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN]
        };
        let mut row = vec![x.step as f64, x.time, x.echo, y.echo, y.echo - x.echo];
        row.extend_from_slice(&row_tail);
        table.push_row(row);
    }
    if !decompose {
        (gauge, reparam, residual) = (f64::NAN, f64::NAN, f64::NAN);
    }
    for (k, v) in [
        ("sum_raw_distance", raw),
        ("sum_gauge", gauge),
        ("sum_reparam", reparam),
        ("sum_residual", residual),
    ] {
        table = table.with_meta(k, format_float(v));
    }
    Ok(CompareReport {
        table,
        rms_echo_deviation: rms,
        raw,
        gauge,
        reparam,
        residual,
        steps,
    })
}
