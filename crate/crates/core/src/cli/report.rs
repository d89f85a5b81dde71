//! Machine-readable outputs: `report.json`, `energy.csv`, `bc_table.csv`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::boundary::BcRow;
use crate::coeffs::Axis;
use crate::energy::{conserved_integrals, EnergyBalanceReport};
use crate::error::Degeneracy;
use crate::sbp::{GridKind, Order};
use crate::solver::{CaseConfig, SolutionHistory};
use crate::Result;

/// Relative energy-balance residual accepted by `audit`.
pub const AUDIT_TOLERANCE: f64 = 1e-12;

/// Round-trip decimal form with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub const ENERGY_HEADER: &str =
    "step,time,energy,rate_measured,surface_inviscid,surface_viscous,residual";

pub fn energy_csv(times: &[f64], rows: &[EnergyBalanceReport]) -> String {
    let mut s = String::from(ENERGY_HEADER);
    s.push('\n');
    for (k, (t, r)) in times.iter().zip(rows).enumerate() {
        let _ = writeln!(
            s,
            "{k},{},{},{},{},{},{}",
            num(*t),
            num(r.energy),
            num(r.rate_measured),
            num(r.surface_inviscid),
            num(r.surface_viscous),
            num(r.residual)
        );
    }
    s
}

pub const BC_HEADER: &str = "gamma,u_n_sign,Mn_sq,beta,entry_1,entry_2,entry_3,entry_4,entry_5,entry_6,entry_7,bc_count,dense_bc_count,degenerate";

fn degeneracy_tag(d: Option<Degeneracy>) -> &'static str {
    match d {
        None => "",
        Some(Degeneracy::StationaryNormalFlow) => "u_n_zero",
        Some(Degeneracy::BetaRoot) => "beta_zero",
    }
}

/// Degenerate rows leave the sign and count columns empty.
pub fn bc_table_csv(rows: &[BcRow]) -> String {
    let mut s = String::from(BC_HEADER);
    s.push('\n');
    for r in rows {
        let beta = r.beta.map(num).unwrap_or_default();
        let signs: Vec<String> = match r.signs {
            Some(sg) => sg.iter().map(|v| v.to_string()).collect(),
            None => vec![String::new(); 7],
        };
        let opt = |v: Option<usize>| v.map(|c| c.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            num(r.gamma),
            r.u_n_sign,
            num(r.mach_n_sq),
            beta,
            signs.join(","),
            opt(r.count),
            opt(r.dense_negative),
            degeneracy_tag(r.degeneracy)
        );
    }
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct GridSummary {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    pub kind: GridKind,
    pub order: Order,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepRow {
    pub step: usize,
    pub time: f64,
    #[serde(flatten)]
    pub balance: EnergyBalanceReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub steps: usize,
    pub dt: f64,
    pub final_time: f64,
    pub max_abs_residual: f64,
    pub max_relative_residual: f64,
    /// `(E_final - E_0) / E_0` for the `P x H` norm.
    pub energy_drift: f64,
    pub mass_drift: f64,
    pub total_energy_drift: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    /// Rerunning with this config reproduces the case.
    pub config: CaseConfig,
    pub grid: GridSummary,
    pub gamma: f64,
    pub mu: f64,
    pub lambda_visc: f64,
    pub kappa: f64,
    pub alpha_sq: f64,
    pub steps: Vec<StepRow>,
    pub summary: RunSummary,
    pub warnings: Vec<String>,
    /// Absent in reproducible mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
}

fn rel_change(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        b - a
    } else {
        (b - a) / a.abs()
    }
}

impl RunReport {
    pub fn build(command: &str, config: &CaseConfig, hist: &SolutionHistory) -> Result<Self> {
        let grid = config.grid()?;
        let gas = config.gas()?;
        let (nx, ny) = grid.shape();
        let steps: Vec<StepRow> = hist
            .times
            .iter()
            .zip(&hist.energy)
            .enumerate()
            .map(|(step, (&time, &balance))| StepRow {
                step,
                time,
                balance,
            })
            .collect();
        let max_abs_residual = hist
            .energy
            .iter()
            .fold(0.0f64, |a, r| a.max(r.residual.abs()));
        let max_relative_residual = hist
            .energy
            .iter()
            .fold(0.0f64, |a, r| a.max(r.relative_residual()));
        let energy_drift = match (hist.energy.first(), hist.energy.last()) {
            (Some(a), Some(b)) => rel_change(a.energy, b.energy),
            _ => 0.0,
        };
        let (m0, e0) = conserved_integrals(&hist.snapshots[0].1, &grid, &gas);
        let (m1, e1) = conserved_integrals(hist.final_field(), &grid, &gas);
        Ok(RunReport {
            command: command.to_string(),
            config: config.clone(),
            grid: GridSummary {
                nx,
                ny,
                hx: grid.op(Axis::X).h(),
                hy: grid.op(Axis::Y).h(),
                kind: config.kind,
                order: config.order,
            },
            gamma: gas.gamma,
            mu: gas.mu,
            lambda_visc: gas.lambda_visc,
            kappa: gas.kappa,
            alpha_sq: config.alpha_sq,
            steps,
            summary: RunSummary {
                steps: hist.times.len() - 1,
                dt: hist.dt,
                final_time: *hist.times.last().expect("initial time"),
                max_abs_residual,
                max_relative_residual,
                energy_drift,
                mass_drift: rel_change(m0, m1),
                total_energy_drift: rel_change(e0, e1),
                tolerance: AUDIT_TOLERANCE,
                passed: max_relative_residual <= AUDIT_TOLERANCE,
            },
            warnings: hist.warnings.clone(),
            elapsed_seconds: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::sweep;
    use crate::state::GasParams;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(0.1), "1.0000000000000001e-1");
    }

    #[test]
    fn energy_csv_shape() {
        let r = EnergyBalanceReport {
            energy: 2.0,
            rate_measured: 0.5,
            surface_inviscid: -0.25,
            surface_viscous: 0.25,
            residual: 0.0,
        };
        let s = energy_csv(&[0.0, 0.1], &[r, r]);
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], ENERGY_HEADER);
        assert!(lines[2].starts_with("1,1.0000000000000001e-1,2.0000000000000000e0,"));
        assert_eq!(lines[2].split(',').count(), 7);
    }

    #[test]
    fn bc_table_marks_degenerate_rows() {
        let g = GasParams::inviscid(1.4).unwrap();
        let m = crate::boundary::critical_mach_sq(&g);
        let rows = sweep(&g, &[0.25, m], &[1]).unwrap();
        let s = bc_table_csv(&rows);
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].ends_with(",3,3,"));
        assert!(lines[2].ends_with(",,,beta_zero"));
        for l in &lines {
            assert_eq!(l.split(',').count(), 14);
        }
    }
}
