//! Run configuration, CSV output and the subcommand bodies used by the binary.

pub mod config;
pub mod csv;

use std::fs;
use std::path::{Path, PathBuf};

use crate::analysis::{
    convergence_study, extrapolated_study, validate_levels, verify_suite, AuditReport, Probe, Regime,
};
use crate::error::{Error, Result};
use crate::model::{derive_constants, to_prices};
use crate::schemes::{solve_forward, RunDiagnostics};

pub use config::{emit_config, parse_config, GridChoice, LeftBcChoice, RunConfig};

pub const DEFAULT_CONVERGE_LEVELS: &[usize] = &[30, 60, 120, 240, 480, 960];
pub const DEFAULT_EXTRAPOLATE_LEVELS: &[usize] = &[10, 20, 40, 80, 160, 320, 640];

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

/// Comma-separated doubling sequence, e.g. `30,60,120`.
pub fn parse_levels(text: &str) -> Result<Vec<usize>> {
    let levels = text
        .split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<usize>()
                .ok()
                .filter(|&n| n >= 2)
                .ok_or_else(|| Error::param("levels", format!("`{t}` is not an integer >= 2")))
        })
        .collect::<Result<Vec<_>>>()?;
    validate_levels(&levels)?;
    Ok(levels)
}

pub fn write_output(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `out.csv` -> `out_trajectory.csv`.
pub fn trajectory_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}_trajectory.csv"))
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub table: String,
    /// Every level as `(t, S, p, q)` rows when trajectory capture is on.
    pub trajectory: Option<String>,
    pub diagnostics: RunDiagnostics,
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<SolveOutput> {
    cfg.validate()?;
    let params = &cfg.params;
    let dc = derive_constants(params)?;
    let (grid, tg) = cfg.build_grids()?;
    let run = solve_forward(params, &grid, &tg, &cfg.scheme_config())?;

    // t = 0 is the last level, t = T the first.
    let (p0, q0) = to_prices(&run.final_state.u, &run.final_state.v, 0.0, params, &dc);
    let first = match &run.trajectory {
        Some(t) => t[0].clone(),
        None => crate::schemes::Stepper::new(
            &crate::schemes::ForwardProblem::from_params(params)?,
            &grid,
            &tg,
            &cfg.scheme_config(),
        )
        .initial_state(),
    };
    let (p_t, q_t) = to_prices(&first.u, &first.v, params.horizon, params, &dc);
    let table = csv::solve_table(grid.nodes(), &p0, &q0, &p_t, &q_t);

    let trajectory = run.trajectory.as_ref().map(|levels| {
        let mut rows = Vec::with_capacity(levels.len() * grid.len());
        for state in levels {
            let t = (params.horizon - tg.tau(state.step_index)).max(0.0);
            let (p, q) = to_prices(&state.u, &state.v, t, params, &dc);
            for (i, &s) in grid.nodes().iter().enumerate() {
                rows.push((t, s, p[i], q[i]));
            }
        }
        csv::trajectory_table(&rows)
    });
    Ok(SolveOutput {
        table,
        trajectory,
        diagnostics: run.diagnostics,
    })
}

pub fn cmd_converge(cfg: &RunConfig, levels: &[usize]) -> Result<String> {
    cfg.validate()?;
    let probes = [Probe::AtStrike(Regime::Liquid), Probe::AtStrike(Regime::Illiquid)];
    let study = convergence_study(&cfg.study_setup(), levels, &probes)?;
    Ok(csv::converge_table(&study.tables[0], &study.tables[1]))
}

pub fn cmd_extrapolate(cfg: &RunConfig, levels: &[usize]) -> Result<String> {
    cfg.validate()?;
    let study = extrapolated_study(&cfg.study_setup(), levels, &Probe::AtStrike(Regime::Liquid), 1)?;
    Ok(csv::extrapolate_table(&study.rows))
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<AuditReport> {
    cfg.validate()?;
    let (grid, tg) = cfg.build_grids()?;
    verify_suite(&cfg.params, &grid, &tg, &cfg.scheme_config())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_lists() {
        assert_eq!(parse_levels("30,60, 120").unwrap(), vec![30, 60, 120]);
        assert!(parse_levels("30,61").is_err());
        assert!(parse_levels("30,x").is_err());
        assert!(parse_levels("1,2").is_err());
        assert!(parse_levels("").is_err());
    }

    #[test]
    fn trajectory_file_name() {
        assert_eq!(trajectory_path(Path::new("out/run.csv")), PathBuf::from("out/run_trajectory.csv"));
    }

    #[test]
    fn solve_terminal_rows() {
        let cfg = RunConfig {
            intervals: 30,
            ..Default::default()
        };
        let out = cmd_solve(&cfg).unwrap();
        let lines: Vec<&str> = out.table.lines().collect();
        assert_eq!(lines[0], csv::SOLVE_HEADER);
        assert_eq!(lines.len(), 32);
        let first: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
        let last: Vec<f64> = lines[31].split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(first[0], 0.0);
        assert_eq!((first[3], first[4]), (0.0, 0.0));
        assert_eq!(last[0], 5.0);
        assert_eq!((last[3], last[4]), (3.0, 3.0));
        assert!(out.trajectory.is_none());
    }

    #[test]
    fn solve_trajectory_covers_every_level() {
        let cfg = RunConfig {
            intervals: 10,
            capture_trajectory: true,
            ..Default::default()
        };
        let (_, tg) = cfg.build_grids().unwrap();
        let out = cmd_solve(&cfg).unwrap();
        let traj = out.trajectory.unwrap();
        assert_eq!(traj.lines().count(), 1 + (tg.steps + 1) * 11);
    }

    #[test]
    fn converge_two_levels_has_empty_ratio_columns() {
        let cfg = RunConfig::default();
        let csv = cmd_converge(&cfg, &[30, 60]).unwrap();
        for line in csv.lines().skip(1) {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells.len(), 9);
            assert_eq!(cells[3], "");
            assert_eq!(cells[4], "");
        }
    }
}
