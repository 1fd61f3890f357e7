//! Integrations, convergence studies and the reproductions of the
//! published experiments on `y' = [[-25, 25], [25, -25]] y`.

use mprk_core::stability::boundary_asymptote;
use mprk_core::{
    boundary_f, classify, critical_time_step, integrate, mprk22_step, raster_region, Linear2x2Pds,
    ScaledStepPoint, SchemeParams, StateVector, Trajectory, Variant,
};

use crate::config::IntegrationJob;
use crate::error::{CliError, Result};
use crate::output::{
    csv_document, exact_solution_csv, fmt_f64, region_csv, trajectory_csv, OutputFile,
    CONVERGENCE_HEADER,
};

pub const TEST_RATE: f64 = 25.0;
/// Initial state far from equilibrium.
pub const Y0_FAR: [f64; 2] = [0.998, 0.002];
/// Initial state `y* + 1e-3 (1, -1)`.
pub const Y0_NEAR: [f64; 2] = [0.501, 0.499];
/// Offset between the critical step and the two sampled steps.
pub const CRITICAL_OFFSET: f64 = 0.1;

pub const FIG4_ALPHAS: [f64; 2] = [1.0, 2.0];
pub const FIG4_STEPS: [f64; 2] = [4.0, 20.0];
pub const FIG4_N_STEPS: usize = 50;
pub const CRITICAL_ALPHAS: [f64; 2] = [0.5, 0.8];
pub const FIG678_N_STEPS: usize = 200;
pub const REGION_ALPHAS: [f64; 5] = [0.5, 0.6, 0.7, 0.8, 0.9];
pub const REGION_Z_MIN: f64 = -50.0;
pub const REGION_RESOLUTION: usize = 100;
pub const EXACT_T_END: f64 = 0.2;
pub const EXACT_SAMPLES: usize = 1001;
pub const CONVERGENCE_T_END: f64 = 0.1;
pub const CONVERGENCE_K: std::ops::RangeInclusive<u32> = 4..=10;

pub fn test_problem() -> Linear2x2Pds {
    Linear2x2Pds::new(TEST_RATE, TEST_RATE).expect("valid rates")
}

fn state(y: [f64; 2]) -> StateVector {
    StateVector::new(y.to_vec()).expect("finite")
}

/// `n_steps` steps of the generic MPRK22 integrator on the 2x2 problem.
pub fn simulate(
    problem: &Linear2x2Pds,
    y0: &StateVector,
    params: SchemeParams,
    dt: f64,
    n_steps: usize,
) -> Result<Trajectory> {
    let a = problem.to_linear_pds();
    let system = a.production_system();
    Ok(integrate(
        |y, dt, p| mprk22_step(&system, y, dt, p),
        y0,
        dt,
        n_steps,
        params,
    )?)
}

pub fn run_integration(job: &IntegrationJob) -> Result<String> {
    let traj = simulate(&job.problem, &job.y0, job.params, job.dt, job.n_steps)?;
    trajectory_csv(&job.problem, &traj)
}

/// Experiments reproducible by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum NamedExperiment {
    ExactSolution,
    Fig4,
    Fig6,
    Fig7,
    Fig8,
    RegionFig2,
    PointsFig5,
    Convergence,
}

impl NamedExperiment {
    pub const ALL: [NamedExperiment; 8] = [
        NamedExperiment::ExactSolution,
        NamedExperiment::Fig4,
        NamedExperiment::Fig6,
        NamedExperiment::Fig7,
        NamedExperiment::Fig8,
        NamedExperiment::RegionFig2,
        NamedExperiment::PointsFig5,
        NamedExperiment::Convergence,
    ];
}

fn scheme(alpha: f64, variant: Variant) -> SchemeParams {
    SchemeParams::new(alpha, variant).expect("alpha >= 1/2")
}

fn trajectory_file(
    name: String,
    y0: [f64; 2],
    params: SchemeParams,
    dt: f64,
    n: usize,
) -> Result<OutputFile> {
    let problem = test_problem();
    let traj = simulate(&problem, &state(y0), params, dt, n)?;
    Ok(OutputFile {
        name,
        contents: trajectory_csv(&problem, &traj)?,
    })
}

/// `Δt*_α - 0.1`, `Δt*_α` and `Δt*_α + 0.1` for the test problem.
pub fn critical_steps(alpha: f64) -> Result<[f64; 3]> {
    let dt_star = critical_time_step(TEST_RATE, TEST_RATE, alpha)?;
    Ok([
        dt_star - CRITICAL_OFFSET,
        dt_star,
        dt_star + CRITICAL_OFFSET,
    ])
}

/// Produces the files of one named experiment.
pub fn run_named(experiment: NamedExperiment) -> Result<Vec<OutputFile>> {
    let mut files = Vec::new();
    match experiment {
        NamedExperiment::ExactSolution => {
            let times: Vec<f64> = (0..EXACT_SAMPLES)
                .map(|k| EXACT_T_END * k as f64 / (EXACT_SAMPLES - 1) as f64)
                .collect();
            files.push(OutputFile {
                name: "exact_solution.csv".into(),
                contents: exact_solution_csv(&test_problem(), &state(Y0_FAR), &times)?,
            });
        }
        NamedExperiment::Fig4 => {
            for alpha in FIG4_ALPHAS {
                for dt in FIG4_STEPS {
                    for variant in Variant::ALL {
                        let name = format!("fig4_alpha{alpha}_dt{dt}_{variant}.csv");
                        files.push(trajectory_file(
                            name,
                            Y0_FAR,
                            scheme(alpha, variant),
                            dt,
                            FIG4_N_STEPS,
                        )?);
                    }
                }
            }
        }
        NamedExperiment::Fig6 | NamedExperiment::Fig7 => {
            let (tag, pick) = if experiment == NamedExperiment::Fig6 {
                ("fig6", 0)
            } else {
                ("fig7", 2)
            };
            for alpha in CRITICAL_ALPHAS {
                let dt = critical_steps(alpha)?[pick];
                for variant in Variant::ALL {
                    let name = format!("{tag}_alpha{alpha}_{variant}.csv");
                    files.push(trajectory_file(
                        name,
                        Y0_FAR,
                        scheme(alpha, variant),
                        dt,
                        FIG678_N_STEPS,
                    )?);
                }
            }
        }
        NamedExperiment::Fig8 => {
            for alpha in CRITICAL_ALPHAS {
                let dt = critical_steps(alpha)?[2];
                let variant = Variant::NonConservativeStages;
                let name = format!("fig8_alpha{alpha}_{variant}.csv");
                files.push(trajectory_file(
                    name,
                    Y0_NEAR,
                    scheme(alpha, variant),
                    dt,
                    FIG678_N_STEPS,
                )?);
            }
        }
        NamedExperiment::RegionFig2 => {
            for alpha in REGION_ALPHAS {
                files.push(region_file(format!("region_fig2_alpha{alpha}.csv"), alpha)?);
                files.push(OutputFile {
                    name: format!("boundary_fig2_alpha{alpha}.csv"),
                    contents: boundary_csv(alpha)?,
                });
            }
        }
        NamedExperiment::PointsFig5 => {
            files.push(OutputFile {
                name: "points_fig5.csv".into(),
                contents: fig5_points_csv()?,
            });
            for alpha in CRITICAL_ALPHAS {
                files.push(region_file(format!("region_fig5_alpha{alpha}.csv"), alpha)?);
            }
        }
        NamedExperiment::Convergence => {
            for alpha in [0.5, 1.0] {
                for variant in Variant::ALL {
                    let table = run_convergence(
                        scheme(alpha, variant),
                        CONVERGENCE_T_END,
                        &halving_steps(CONVERGENCE_T_END, CONVERGENCE_K),
                    )?;
                    files.push(OutputFile {
                        name: format!("convergence_alpha{alpha}_{variant}.csv"),
                        contents: table.to_csv(),
                    });
                }
            }
        }
    }
    Ok(files)
}

fn region_file(name: String, alpha: f64) -> Result<OutputFile> {
    let raster = raster_region(alpha, REGION_Z_MIN, REGION_RESOLUTION)?;
    Ok(OutputFile {
        name,
        contents: region_csv(&raster),
    })
}

/// The curve `z_b = f(z_a)` on the raster columns where it exists.
fn boundary_csv(alpha: f64) -> Result<String> {
    let asymptote = boundary_asymptote(alpha)?;
    let mut rows = Vec::new();
    for k in 0..REGION_RESOLUTION {
        let z_a = REGION_Z_MIN - REGION_Z_MIN * (k as f64 / REGION_RESOLUTION as f64);
        if z_a < asymptote {
            rows.push(vec![fmt_f64(z_a), fmt_f64(boundary_f(z_a, alpha)?)]);
        }
    }
    Ok(csv_document(&["z_a", "z_b"], rows))
}

/// The three diagonal points `-25 dt (1, 1)` for `dt` in `critical_steps`.
pub fn fig5_points_csv() -> Result<String> {
    let mut rows = Vec::new();
    for alpha in CRITICAL_ALPHAS {
        for (label, dt) in ["dt1", "dt_star", "dt2"]
            .into_iter()
            .zip(critical_steps(alpha)?)
        {
            let pt = ScaledStepPoint::from_step(dt, TEST_RATE, TEST_RATE);
            let verdict = classify(pt, alpha, Variant::NonConservativeStages);
            rows.push(vec![
                fmt_f64(alpha),
                label.to_string(),
                fmt_f64(dt),
                fmt_f64(pt.z_a),
                fmt_f64(pt.z_b),
                fmt_f64(verdict.r_value),
                u8::from(verdict.stable).to_string(),
                u8::from(verdict.on_boundary).to_string(),
            ]);
        }
    }
    Ok(csv_document(
        &[
            "alpha",
            "label",
            "dt",
            "z_a",
            "z_b",
            "r0",
            "stable",
            "on_boundary",
        ],
        rows,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub error: f64,
    /// `log(err_prev / err) / log(dt_prev / dt)`; absent on the first row.
    pub observed_order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub params: SchemeParams,
    pub t_end: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Least-squares slope of `log(error)` against `log(dt)`.
    pub fn fitted_order(&self) -> Option<f64> {
        if self.rows.len() < 2 {
            return None;
        }
        let n = self.rows.len() as f64;
        let xs: Vec<f64> = self.rows.iter().map(|r| r.dt.ln()).collect();
        let ys: Vec<f64> = self.rows.iter().map(|r| r.error.ln()).collect();
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        Some(sxy / sxx)
    }

    pub fn to_csv(&self) -> String {
        csv_document(
            &CONVERGENCE_HEADER,
            self.rows.iter().map(|r| {
                vec![
                    fmt_f64(r.dt),
                    fmt_f64(r.error),
                    r.observed_order.map(fmt_f64).unwrap_or_default(),
                ]
            }),
        )
    }
}

/// `t_end / 2^k` for each `k`.
pub fn halving_steps(t_end: f64, ks: impl IntoIterator<Item = u32>) -> Vec<f64> {
    ks.into_iter()
        .map(|k| t_end / f64::from(1u32 << k))
        .collect()
}

/// Max-norm error at `t_end` against the analytic solution, from
/// `y0 = (0.998, 0.002)`, for every step size in `dt_list`. Each step size
/// must divide `t_end` into a whole number of steps.
pub fn run_convergence(
    params: SchemeParams,
    t_end: f64,
    dt_list: &[f64],
) -> Result<ConvergenceTable> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(CliError::Usage(format!(
            "t_end must be positive, got {t_end}"
        )));
    }
    let problem = test_problem();
    let y0 = state(Y0_FAR);
    let exact = problem.exact_solution(&y0, t_end)?;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(dt_list.len());
    for &dt in dt_list {
        let n = (t_end / dt).round();
        if !(dt > 0.0) || n < 1.0 || (n * dt - t_end).abs() > 1e-9 * t_end {
            return Err(CliError::Usage(format!(
                "step size {dt} does not divide t_end = {t_end} into whole steps"
            )));
        }
        let traj = simulate(&problem, &y0, params, dt, n as usize)?;
        let last = traj.last();
        let error = (last[0] - exact[0]).abs().max((last[1] - exact[1]).abs());
        let observed_order = rows
            .last()
            .map(|prev| (prev.error / error).ln() / (prev.dt / dt).ln());
        rows.push(ConvergenceRow {
            dt,
            error,
            observed_order,
        });
    }
    Ok(ConvergenceTable {
        params,
        t_end,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig5_steps_match_closed_forms() {
        let [dt1, dt_star, dt2] = critical_steps(0.5).unwrap();
        assert!((dt_star - (17f64.sqrt() + 3.0) / 50.0).abs() < 1e-10);
        assert!((dt1 - 0.0424).abs() < 1e-4 && (dt2 - 0.2424).abs() < 1e-4);
        let dt2 = critical_steps(0.8).unwrap()[2];
        assert!((dt2 - 0.481).abs() < 1e-3);
    }

    #[test]
    fn single_step_size_has_no_order() {
        let table =
            run_convergence(scheme(1.0, Variant::ConservativeStages), 0.1, &[0.1 / 16.0]).unwrap();
        assert_eq!(table.rows.len(), 1);
        assert!(table.rows[0].observed_order.is_none());
        assert!(table.fitted_order().is_none());
        assert!(table.to_csv().lines().nth(1).unwrap().ends_with(','));
    }

    #[test]
    fn rejects_step_sizes_that_do_not_divide_the_interval() {
        let err =
            run_convergence(scheme(1.0, Variant::ConservativeStages), 0.1, &[0.03]).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
