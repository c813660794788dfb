//! The five study commands, each producing a table plus a check verdict.

use num_complex::Complex64;

use coulomb_core::fluct::{self, TestFunction};
use coulomb_core::potential::{self, Potential, RadialPotential};
use coulomb_core::{edge, opkernel, Error};

use crate::config::{self, RunConfig};
use crate::output::{sig17, Table};
use crate::{CliError, CommonArgs};

pub struct CommandOutput {
    pub table: Table,
    /// Why the run's check failed, when it did; drives exit code 1.
    pub check_failure: Option<String>,
}

impl CommandOutput {
    fn passing(table: Table) -> Self {
        Self {
            table,
            check_failure: None,
        }
    }
}

fn build_radial(cfg: &RunConfig, command: &str) -> Result<RadialPotential, CliError> {
    match cfg.potential.build()? {
        Potential::Radial(pot) => Ok(pot),
        Potential::Elliptic(_) => Err(CliError::Config(format!(
            "{command} supports radial-poly potentials only"
        ))),
    }
}

fn resolve_n_list(cfg: &RunConfig, args: &CommonArgs, default: &[usize]) -> Vec<usize> {
    if !args.n.is_empty() {
        args.n.clone()
    } else {
        cfg.n_list.clone().unwrap_or_else(|| default.to_vec())
    }
}

fn resolve_t_grid(cfg: &RunConfig, args: &CommonArgs) -> Result<Vec<f64>, CliError> {
    let t_min = args.t_min.or(cfg.t_min).unwrap_or(-2.5);
    let t_max = args.t_max.or(cfg.t_max).unwrap_or(2.5);
    let t_step = args.t_step.or(cfg.t_step).unwrap_or(0.25);
    config::t_grid(t_min, t_max, t_step)
}

fn window_constant(cfg: &RunConfig, args: &CommonArgs) -> f64 {
    args.m.or(cfg.m).unwrap_or(1.0)
}

/// A warning metadata line when the grid leaves the expansion window of the
/// smallest requested `n`; the study itself still runs.
fn window_warning(table: &mut Table, t_grid: &[f64], n_min: usize, m: f64) {
    let window = m * (n_min as f64).ln().sqrt();
    if t_grid.iter().any(|t| t.abs() > window) {
        table.push_meta(
            "warning",
            format!("t grid leaves the window |t| <= {window:.3} of n = {n_min}; values there carry no accuracy claim"),
        );
    }
}

fn parse_test_function(label: &str) -> Result<TestFunction, CliError> {
    if label == "1" {
        return Ok(TestFunction::monomial(0));
    }
    let power: Option<u32> = label.strip_prefix("r^").and_then(|p| p.parse().ok());
    match power {
        Some(p) if p >= 2 && p % 2 == 0 => Ok(TestFunction::monomial(p / 2)),
        _ => Err(CliError::Config(format!(
            "unknown test function label '{label}' (use \"1\" or an even power like \"r^4\")"
        ))),
    }
}

pub fn density(cfg: &RunConfig, args: &CommonArgs) -> Result<CommandOutput, CliError> {
    let pot = cfg.potential.build()?;
    let n = *resolve_n_list(cfg, args, &[64])
        .first()
        .ok_or_else(|| CliError::Config("n_list must not be empty".into()))?;
    let mut table = Table::new("density", &pot.label());
    table.push_meta("n", n.to_string());
    table.set_columns(&["r", "R_n"]);

    let (grid, mass) = match &pot {
        Potential::Radial(pot) => {
            let radius = potential::droplet_radius(pot)?;
            let grid = resolve_r_grid(cfg, radius)?;
            let basis = opkernel::radial_norms(pot, n)?;
            let truncation = args.c.or(cfg.c);
            if let Some(c) = truncation {
                table.push_meta("truncation_c", sig17(c));
            }
            for &r in &grid {
                let value = match truncation {
                    Some(c) => opkernel::truncated_density(&basis, pot, r, c)?,
                    None => opkernel::density_radial(&basis, pot, r)?,
                };
                table.push_row(vec![sig17(r), sig17(value)]);
            }
            (grid, opkernel::kernel_mass(&basis, pot)?)
        }
        Potential::Elliptic(pot) => {
            let kernel = opkernel::EllipticKernel::new(pot.tau(), n)?;
            let grid = resolve_r_grid(cfg, 1.0 + pot.tau())?;
            for &r in &grid {
                let value = kernel.density(Complex64::new(r, 0.0))?;
                table.push_row(vec![sig17(r), sig17(value)]);
            }
            (grid, kernel.mass()?)
        }
    };
    let _ = grid;
    table.push_meta("mass", sig17(mass));
    table.push_meta("mass_rel_defect", sig17((mass - n as f64).abs() / n as f64));
    Ok(CommandOutput::passing(table))
}

fn resolve_r_grid(cfg: &RunConfig, boundary: f64) -> Result<Vec<f64>, CliError> {
    match &cfg.r_grid {
        Some(grid) => {
            if grid.is_empty() {
                return Err(CliError::Config("r_grid must not be empty".into()));
            }
            for &r in grid {
                if !r.is_finite() || r < 0.0 {
                    return Err(CliError::Config(format!(
                        "r_grid entries must be finite and nonnegative, got {r}"
                    )));
                }
            }
            Ok(grid.clone())
        }
        None => Ok((0..=60)
            .map(|k| 1.5 * boundary * f64::from(k) / 60.0)
            .collect()),
    }
}

pub fn edge_check(cfg: &RunConfig, args: &CommonArgs) -> Result<CommandOutput, CliError> {
    let pot = build_radial(cfg, "edge-check")?;
    let n_list = resolve_n_list(cfg, args, &[256, 1024, 4096]);
    let t_grid = resolve_t_grid(cfg, args)?;
    let m = window_constant(cfg, args);

    let study = edge::residual_study(&pot, &n_list, &t_grid, m)?;
    let mut table = Table::new("edge-check", pot.label());
    table.push_meta(
        "n_list",
        n_list
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(" "),
    );
    table.push_meta("window_m", sig17(m));
    window_warning(&mut table, &t_grid, n_list[0], m);
    for (n, gap) in &study.report.max_abs_gap {
        table.push_meta(format!("max_abs_gap_{n}"), sig17(*gap));
    }
    for (n, gap) in &study.report.deep_bulk_gap {
        table.push_meta(format!("deep_bulk_gap_{n}"), sig17(*gap));
    }
    let decay = match study.report.decay {
        Some(flag) => flag.to_string(),
        None => "none (n range too short for a decay comparison)".to_string(),
    };
    table.push_meta("decay", decay);
    table.adopt_csv(&edge::profiles_to_csv(&study.profiles));

    let check_failure = (study.report.decay == Some(false)).then(|| {
        format!(
            "edge residual gap did not halve from n = {} to n = {}",
            n_list[0],
            n_list[n_list.len() - 1]
        )
    });
    Ok(CommandOutput {
        table,
        check_failure,
    })
}

pub fn fluct_check(cfg: &RunConfig, args: &CommonArgs) -> Result<CommandOutput, CliError> {
    let pot = build_radial(cfg, "fluct-check")?;
    let labels = cfg
        .f_list
        .clone()
        .unwrap_or_else(|| vec!["1".into(), "r^2".into(), "r^4".into()]);
    let n_list = resolve_n_list(cfg, args, &[64, 1024]);

    let mut table = Table::new("fluct-check", pot.label());
    table.set_columns(&[
        "pot_label",
        "f_label",
        "n",
        "expected_fluct",
        "rho_half",
        "gap",
    ]);
    let mut failures = Vec::new();
    for label in &labels {
        let f = parse_test_function(label)?;
        let report = fluct::fluct_convergence(&pot, &f, &n_list)?;
        table.push_meta(format!("rho_half_{label}"), sig17(report.rho_half));
        table.push_meta(format!("decay_{label}"), report.decay.to_string());
        for row in &report.rows {
            table.push_row(vec![
                report.pot_label.clone(),
                report.f_label.clone(),
                row.n.to_string(),
                sig17(row.expected),
                sig17(report.rho_half),
                sig17(row.gap),
            ]);
        }
        if !report.decay {
            failures.push(label.clone());
        }
    }
    let check_failure = (!failures.is_empty())
        .then(|| format!("fluctuation gap did not close for {}", failures.join(", ")));
    Ok(CommandOutput {
        table,
        check_failure,
    })
}

pub fn convergence(cfg: &RunConfig, args: &CommonArgs) -> Result<CommandOutput, CliError> {
    let pot = build_radial(cfg, "convergence")?;
    let n_list = resolve_n_list(cfg, args, &[256, 1024, 4096]);
    if n_list.is_empty() {
        return Err(CliError::Config("n_list must not be empty".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config(format!(
            "n_list must be strictly ascending, got {n_list:?}"
        )));
    }
    let t0 = cfg.t0.unwrap_or(0.0);
    let m = window_constant(cfg, args);
    let edge_data = potential::edge_data_radial(&pot)?;
    let c0 = edge::c_correction(&edge_data, t0);

    let mut table = Table::new("convergence", pot.label());
    table.push_meta("t0", sig17(t0));
    table.push_meta("C", sig17(c0));
    window_warning(&mut table, &[t0], n_list[0], m);
    table.set_columns(&["n", "t", "D_n", "C", "gap"]);
    let mut gaps = Vec::new();
    for &n in &n_list {
        let basis = opkernel::radial_norms(&pot, n)?;
        let expansion = edge::edge_expansion(&edge_data, n, t0, m);
        let r = edge::rescale_point(&edge_data, n, t0).norm();
        let exact = opkernel::density_radial(&basis, &pot, r)?;
        let scale = (n as f64 * edge_data.delta_q).sqrt();
        let d = (exact - expansion.leading) / scale;
        let gap = (d - c0).abs();
        gaps.push(gap);
        table.push_row(vec![
            n.to_string(),
            sig17(t0),
            sig17(d),
            sig17(c0),
            sig17(gap),
        ]);
    }
    let decreasing = match gaps.len() {
        1 => "none (single n)".to_string(),
        _ => gaps.windows(2).all(|w| w[1] < w[0]).to_string(),
    };
    table.push_meta("decreasing", decreasing.clone());

    let check_failure = (decreasing == "false")
        .then(|| "the distance to the predicted constant did not decrease with n".to_string());
    Ok(CommandOutput {
        table,
        check_failure,
    })
}

pub fn oracle_verify(
    cfg: &RunConfig,
    _args: &CommonArgs,
    corrupt: bool,
) -> Result<CommandOutput, CliError> {
    match cfg.potential.build()? {
        Potential::Radial(pot) => {
            let radius = potential::droplet_radius(&pot)?;
            let mut table = Table::new("oracle-verify", pot.label());
            table.set_columns(&["n", "r", "density", "oracle", "rel_err"]);
            if corrupt {
                table.push_meta("corrupt_norms", "1e-6");
            }
            let tolerance = 1e-8;
            let mut worst = 0.0f64;
            for n in [2usize, 4, 8] {
                let mut basis = opkernel::radial_norms(&pot, n)?;
                if corrupt {
                    basis = basis.with_perturbed_norms(1e-6);
                }
                let weight_pot = pot.clone();
                let oracle =
                    opkernel::gram_oracle(move |z: Complex64| weight_pot.q(z.norm()), radius, n)?;
                for frac in [0.15, 0.45, 0.75, 1.0, 1.15, 1.35] {
                    let r = frac * radius;
                    let fast = opkernel::density_radial(&basis, &pot, r)?;
                    let brute = oracle.density(Complex64::new(r, 0.0));
                    let rel = (fast - brute).abs() / brute.abs();
                    worst = worst.max(rel);
                    table.push_row(vec![
                        n.to_string(),
                        sig17(r),
                        sig17(fast),
                        sig17(brute),
                        sig17(rel),
                    ]);
                }
            }
            table.push_meta("max_rel_err", sig17(worst));
            table.push_meta("tolerance", sig17(tolerance));
            let check_failure = (worst > tolerance).then(|| {
                format!("density disagrees with the Gram oracle: max relative error {worst:.3e}")
            });
            Ok(CommandOutput {
                table,
                check_failure,
            })
        }
        Potential::Elliptic(pot) => {
            if corrupt {
                return Err(CliError::Config(
                    "the corrupt-norms control applies to radial-poly potentials only".into(),
                ));
            }
            let mut table = Table::new("oracle-verify", &pot.label());
            table.set_columns(&["n", "r", "density", "oracle", "rel_err"]);
            let n = 8;
            let kernel = match opkernel::EllipticKernel::new(pot.tau(), n) {
                Ok(kernel) => kernel,
                // a gate mismatch is a failed verification, not a bad config
                Err(Error::Validation(msg)) => {
                    table.push_meta("oracle_gate", "failed");
                    return Ok(CommandOutput {
                        table,
                        check_failure: Some(format!("elliptic oracle gate failed: {msg}")),
                    });
                }
                Err(err) => return Err(err.into()),
            };
            table.push_meta("oracle_gate", "passed");
            let tolerance = 1e-7;
            let weight_pot = pot;
            let oracle =
                opkernel::gram_oracle(move |z: Complex64| weight_pot.q(z), 1.0 + pot.tau(), n)?;
            let mut worst = 0.0f64;
            for frac in [0.0, 0.2, 0.45, 0.7, 0.9, 1.05] {
                let r = frac * (1.0 + pot.tau());
                let fast = kernel.density(Complex64::new(r, 0.0))?;
                let brute = oracle.density(Complex64::new(r, 0.0));
                let rel = (fast - brute).abs() / brute.abs().max(1e-300);
                worst = worst.max(rel);
                table.push_row(vec![
                    n.to_string(),
                    sig17(r),
                    sig17(fast),
                    sig17(brute),
                    sig17(rel),
                ]);
            }
            let mass = kernel.mass()?;
            table.push_meta("mass", sig17(mass));
            table.push_meta("mass_rel_defect", sig17((mass - n as f64).abs() / n as f64));
            table.push_meta("max_rel_err", sig17(worst));
            table.push_meta("tolerance", sig17(tolerance));
            let check_failure = (worst > tolerance).then(|| {
                format!("elliptic density disagrees with the Gram oracle: max relative error {worst:.3e}")
            });
            Ok(CommandOutput {
                table,
                check_failure,
            })
        }
    }
}
