use qmps_core::ansatz::{align, params_tensor, reparametrise_best_effort, AnsatzParams};
use qmps_core::evolve::{
    ensemble_run, evolve_exact_from, evolve_stochastic, ground_state_optimize, rms_deviation,
    ExactOptions, Trajectory,
};
use qmps_core::tfim::{loschmidt_ed_curve, loschmidt_ff_curve, QuenchSpec, TrotterOrder};
use qmps_core::transfer::overlap_density;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{CliError, Result};
use crate::table::{format_float, Table};
use crate::trajectory;

/// What a finished experiment hands back for writing.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub total_shots: u64,
    pub failure: Option<String>,
    pub results: Vec<(String, f64)>,
}

pub fn execute(config: &ExperimentConfig) -> Result<Outcome> {
    let mut outcome = match config.kind {
        ExperimentKind::Quench => quench(config),
        ExperimentKind::ExactInAnsatz => exact_in_ansatz(config),
        ExperimentKind::Ensemble => ensemble(config),
        ExperimentKind::OracleCurve => oracle_curve(config),
        ExperimentKind::GaugeAnalysis => gauge_analysis(config),
        ExperimentKind::TrotterStudy => trotter_study(config),
    }?;
    outcome
        .table
        .meta
        .insert(0, ("kind".into(), config.kind.name().into()));
    Ok(outcome)
}

fn ground(config: &ExperimentConfig, spec: &QuenchSpec) -> Result<AnsatzParams> {
    Ok(ground_state_optimize(spec.j, spec.g0, config.template()?)?)
}

fn exact_run(spec: &QuenchSpec, ground: &AnsatzParams) -> Result<Trajectory> {
    Ok(evolve_exact_from(spec, ground, &ExactOptions::default())?)
}

fn common_rms(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    let n = a.points.len().min(b.points.len());
    Ok(rms_deviation(&a.echoes()[..n], &b.echoes()[..n])?)
}

fn quench(config: &ExperimentConfig) -> Result<Outcome> {
    let spec = config.quench_spec()?;
    let g = ground(config, &spec)?;
    let traj = evolve_stochastic(&spec, &g, &config.stochastic_options(config.seeds()[0])?)?;
    let reference = exact_run(&spec, &g)?;
    let results = vec![
        (
            "rms_vs_exact_in_ansatz".into(),
            common_rms(&traj, &reference)?,
        ),
        (
            "final_echo".into(),
            traj.points.last().map_or(f64::NAN, |p| p.echo),
        ),
    ];
    Ok(Outcome {
        table: trajectory::to_table(&traj, config.template()?),
        total_shots: traj.total_shots(),
        failure: traj.failure.clone(),
        results,
    })
}

fn exact_in_ansatz(config: &ExperimentConfig) -> Result<Outcome> {
    let spec = config.quench_spec()?;
    let traj = exact_run(&spec, &ground(config, &spec)?)?;
    let (t_peak, peak) =
        traj.points
            .iter()
            .map(|p| (p.time, p.echo))
            .fold(
                (0.0, f64::NEG_INFINITY),
                |m, x| if x.1 > m.1 { x } else { m },
            );
    Ok(Outcome {
        table: trajectory::to_table(&traj, config.template()?),
        total_shots: 0,
        failure: traj.failure.clone(),
        results: vec![
            ("max_echo".into(), peak),
            ("time_of_max_echo".into(), t_peak),
        ],
    })
}

fn ensemble(config: &ExperimentConfig) -> Result<Outcome> {
    let spec = config.quench_spec()?;
    let g = ground(config, &spec)?;
    let stats = ensemble_run(
        &spec,
        &g,
        &config.stochastic_options(config.seeds()[0])?,
        config.seeds(),
    )?;
    let seed_columns: Vec<String> = config
        .seeds()
        .iter()
        .map(|s| format!("echo_seed_{s}"))
        .collect();
    let mut columns = vec!["time", "mean", "variance", "min", "max", "envelope_width"];
    columns.extend(seed_columns.iter().map(String::as_str));
    let mut table = Table::new(&columns).with_meta("runs", stats.runs.len());
    let width = stats.envelope_width();
    for (i, &w) in width.iter().enumerate() {
        let mut row = vec![
            stats.times[i],
            stats.mean[i],
            stats.variance[i],
            stats.min[i],
            stats.max[i],
            w,
        ];
        row.extend(stats.runs.iter().map(|r| r.points[i].echo));
        table.push_row(row);
    }
    let failure = stats
        .runs
        .iter()
        .find_map(|r| r.failure.as_ref().map(|f| format!("seed {}: {f}", r.seed)));
    let half = stats.variance.len() / 2;
    let mean_of = |v: &[f64]| {
        if v.is_empty() {
            f64::NAN
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    let results = vec![
        (
            "mean_variance_first_half".into(),
            mean_of(&stats.variance[1..half.max(1)]),
        ),
        (
            "mean_variance_second_half".into(),
            mean_of(&stats.variance[half..]),
        ),
        ("mean_envelope_width".into(), mean_of(&width)),
    ];
    Ok(Outcome {
        table,
        total_shots: stats.runs.iter().map(Trajectory::total_shots).sum(),
        failure,
        results,
    })
}

fn grid(spec: &QuenchSpec) -> Vec<f64> {
    (0..=spec.n_steps()).map(|k| spec.time(k)).collect()
}

fn oracle_curve(config: &ExperimentConfig) -> Result<Outcome> {
    let spec = config.quench_spec()?;
    let times = grid(&spec);
    let ff = loschmidt_ff_curve(spec.j, spec.g0, spec.g1, &times, config.oracle.k_points)?;
    let ed = loschmidt_ed_curve(spec.j, spec.g0, spec.g1, config.oracle.ed_sites, &times)?;
    let mut table =
        Table::new(&["time", "echo_ff", "echo_ed"]).with_meta("ed_sites", config.oracle.ed_sites);
    let mut worst = 0.0f64;
    for i in 0..times.len() {
        table.push_row(vec![times[i], ff[i], ed[i]]);
        worst = worst.max((ff[i] - ed[i]).abs());
    }
    Ok(Outcome {
        table,
        total_shots: 0,
        failure: None,
        results: vec![("max_abs_ff_minus_ed".into(), worst)],
    })
}

fn trotter_study(config: &ExperimentConfig) -> Result<Outcome> {
    let spec = config.quench_spec()?;
    let ref_dt = config.trotter.reference_dt;
    let stride = (spec.dt / ref_dt).round();
    if (stride * ref_dt - spec.dt).abs() > 1e-9 * spec.dt {
        return Err(CliError::Config(
            "trotter.reference_dt: quench.dt must be a whole multiple of it".into(),
        ));
    }
    let g = ground(config, &spec)?;
    let second = exact_run(&spec, &g)?;
    let first_coarse = exact_run(
        &QuenchSpec {
            trotter_order: TrotterOrder::First,
            ..spec
        },
        &g,
    )?;
    let reference = exact_run(
        &QuenchSpec {
            trotter_order: TrotterOrder::First,
            dt: ref_dt,
            ..spec
        },
        &g,
    )?;
    let ff = loschmidt_ff_curve(
        spec.j,
        spec.g0,
        spec.g1,
        &grid(&spec),
        config.oracle.k_points,
    )?;
    let mut table = Table::new(&[
        "time",
        "echo_second_order",
        "echo_first_order_coarse",
        "echo_first_order_reference",
        "echo_ff",
    ])
    .with_meta("reference_dt", format_float(ref_dt));
    let (mut worst_second, mut worst_first) = (0.0f64, 0.0f64);
    for (k, p) in second.points.iter().enumerate() {
        let coarse = first_coarse.points.get(k).map_or(f64::NAN, |q| q.echo);
        let fine = reference
            .points
            .get(k * stride as usize)
            .map_or(f64::NAN, |q| q.echo);
        worst_second = worst_second.max((p.echo - fine).abs());
        worst_first = worst_first.max((coarse - fine).abs());
        table.push_row(vec![p.time, p.echo, coarse, fine, ff[k]]);
    }
    let failure = [&second, &first_coarse, &reference]
        .iter()
        .find_map(|t| t.failure.clone());
    Ok(Outcome {
        table,
        total_shots: 0,
        failure,
        results: vec![
            ("max_deviation_second_order".into(), worst_second),
            ("max_deviation_first_order_coarse".into(), worst_first),
        ],
    })
}

fn gauge_analysis(config: &ExperimentConfig) -> Result<Outcome> {
    let spec = config.quench_spec()?;
    let g = ground(config, &spec)?;
    let other = match &config.gauge.trajectory {
        Some(path) => {
            let stored = trajectory::read(path)?;
            if stored.trajectory.spec != spec || stored.template != config.template()? {
                return Err(CliError::Config(format!(
                    "gauge.trajectory: {} was produced for a different quench or template",
                    path.display()
                )));
            }
            stored.trajectory
        }
        None => evolve_stochastic(&spec, &g, &config.stochastic_options(config.seeds()[0])?)?,
    };
    let reference = exact_run(&spec, &g)?;
    let mut table = Table::new(&[
        "step",
        "time",
        "gauge_angle",
        "phi7",
        "reparam_defect",
        "sweep_max_defect",
        "fidelity_raw",
        "fidelity_aligned",
        "raw_distance",
        "after_gauge",
        "after_reparam",
    ]);
    let n = config.gauge.sweep_points;
    let mut worst_sweep = 0.0f64;
    for (r, o) in reference.points.iter().zip(&other.points) {
        let a = align(&r.params, &o.params)?;
        let phi7 = o.params.angles()[7];
        let mut sweep = 0.0f64;
        for k in 1..n {
            let target = phi7 + std::f64::consts::TAU * k as f64 / n as f64;
            sweep = sweep.max(reparametrise_best_effort(&o.params, target)?.defect);
        }
        worst_sweep = worst_sweep.max(sweep);
        let ref_tensor = params_tensor(&r.params);
        let raw_fid = overlap_density(&ref_tensor, &params_tensor(&o.params))?;
        let aligned_fid = overlap_density(&ref_tensor, &params_tensor(&a.aligned))?;
        table.push_row(vec![
            r.step as f64,
            r.time,
            a.gauge_angle,
            a.phi7,
            a.reparam_defect,
            sweep,
            raw_fid,
            aligned_fid,
            a.raw,
            a.after_gauge,
            a.after_reparam,
        ]);
    }
    let sum = |c: &str| table.column(c).map_or(f64::NAN, |v| v.iter().sum());
    let results = vec![
        ("max_sweep_defect".into(), worst_sweep),
        ("sum_raw_distance".into(), sum("raw_distance")),
        ("sum_after_gauge".into(), sum("after_gauge")),
        ("sum_after_reparam".into(), sum("after_reparam")),
    ];
    Ok(Outcome {
        table,
        total_shots: other.total_shots(),
        failure: other.failure.clone(),
        results,
    })
}
