use std::f64::consts::PI;

use dephase_core::kernels::witness;
use dephase_core::singlemode::tau_ent_single;
use dephase_core::{
    bloch_cut_entangled, bloch_cut_separable, classify, count_transitions, decoherence_time, ent_bound,
    gamma, gamma_integral, phase_diagram, sep_bound, separable_fraction, separable_fraction_monte_carlo, Error,
    FockSystem, Kernel, ModeSpec, RegionLabel,
};
use rayon::prelude::*;

use crate::params::{require, Params, Spacing};
use crate::table::{Cell, Table};
use crate::{CliError, Command};

pub struct Output {
    pub table: Table,
    pub summary: Option<String>,
}

impl From<Table> for Output {
    fn from(table: Table) -> Self {
        Self { table, summary: None }
    }
}

/// Per-command defaults, chosen to reproduce the standard figures.
pub fn defaults(command: &Command) -> Params {
    let base = Params {
        kappa: Some(1e-3),
        omega_c: Some(1.0),
        omega_q: Some(0.0),
        seed: Some(0),
        ..Default::default()
    };
    match command {
        Command::Rate(_) => Params {
            temperature: Some(100.0),
            time_min: Some(0.0),
            time_max: Some(50.0),
            time_count: Some(201),
            time_spacing: Some(Spacing::Linear),
            ..base
        },
        Command::PhaseDiagram(_) => Params {
            r: Some(0.98),
            temp_min: Some(0.05),
            temp_max: Some(10.0),
            temp_count: Some(200),
            temp_spacing: Some(Spacing::Log),
            time_min: Some(1e-2),
            time_max: Some(1e4),
            time_count: Some(400),
            time_spacing: Some(Spacing::Log),
            with_tau_dec: Some(false),
            ..base
        },
        Command::Fraction(_) => Params {
            temp_min: Some(0.1),
            temp_max: Some(10.0),
            temp_count: Some(21),
            temp_spacing: Some(Spacing::Log),
            mc_samples: Some(1_000_000),
            ..base
        },
        Command::BlochCut(_) => Params {
            kappa: Some(1.0),
            temp_min: Some(0.1),
            temp_max: Some(10.0),
            temp_count: Some(5),
            temp_spacing: Some(Spacing::Log),
            z_count: Some(101),
            ..base
        },
        Command::Oscillations(_) => Params {
            r: Some(0.95),
            temperature: Some(0.3),
            time_min: Some(0.25),
            time_max: Some(500.0),
            time_count: Some(2000),
            time_spacing: Some(Spacing::Linear),
            ..base
        },
        Command::SingleMode(_) => Params {
            r: Some(0.75),
            z: Some(0.2),
            g: Some(0.2),
            omega: Some(1.0),
            temp_min: Some(0.1),
            temp_max: Some(2.5),
            temp_count: Some(25),
            temp_spacing: Some(Spacing::Linear),
            scan_points: Some(2000),
            ..base
        },
    }
}

pub fn execute(command: &Command, p: &Params) -> Result<Output, CliError> {
    match command {
        Command::Rate(_) => rate(p).map(Output::from),
        Command::PhaseDiagram(_) => phase(p).map(Output::from),
        Command::Fraction(_) => fraction(p).map(Output::from),
        Command::BlochCut(_) => bloch_cut(p).map(Output::from),
        Command::Oscillations(_) => oscillations(p),
        Command::SingleMode(_) => single_mode(p).map(Output::from),
    }
}

fn rate(p: &Params) -> Result<Table, CliError> {
    let bath = p.bath()?;
    let cfg = p.quadrature()?;
    let times = p.time_axis()?;
    let rows: Vec<Vec<Cell>> = times
        .par_iter()
        .map(|&t| -> Result<Vec<Cell>, Error> {
            let big = gamma_integral(&bath, t, &cfg)?;
            Ok(vec![t.into(), gamma(&bath, t, &cfg)?.into(), big.into(), (-big).exp().into()])
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&["t", "gamma", "Gamma", "abs_D"]);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

fn tau_dec_or_none(result: Result<f64, Error>) -> Result<Option<f64>, Error> {
    match result {
        Ok(t) => Ok(Some(t)),
        Err(Error::NoDecoherence { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn phase(p: &Params) -> Result<Table, CliError> {
    let temperatures = p.temperature_axis()?;
    let times = p.time_axis()?;
    let bath = p.bath_template(temperatures[0])?;
    let state = p.state()?;
    let cfg = p.quadrature()?;
    let with_tau = p.with_tau_dec.unwrap_or(false);

    let diagram = phase_diagram(&bath, &state, &temperatures, &times, &cfg)?;
    let tau: Vec<Option<f64>> = if with_tau {
        temperatures
            .par_iter()
            .map(|&t| tau_dec_or_none(bath.at_temperature(t).and_then(|b| decoherence_time(&b, &cfg))))
            .collect::<Result<_, _>>()?
    } else {
        Vec::new()
    };
    let mut table = Table::new(if with_tau {
        &["T", "t", "label", "tau_dec"]
    } else {
        &["T", "t", "label"]
    });
    for (i, &temperature) in temperatures.iter().enumerate() {
        for (j, &t) in times.iter().enumerate() {
            let mut row = vec![temperature.into(), t.into(), Cell::Text(diagram.label(i, j).as_str())];
            if with_tau {
                row.push(tau[i].into());
            }
            table.push(row);
        }
    }
    Ok(table)
}

fn fraction(p: &Params) -> Result<Table, CliError> {
    let temperatures = p.temperature_axis()?;
    let bath = p.bath_template(temperatures[0])?;
    let cfg = p.quadrature()?;
    let samples = require(p.mc_samples, "mc_samples")?;
    if samples == 0 {
        return Err(CliError::Config("`mc_samples` must be positive".into()));
    }
    let seed = p.seed.unwrap_or(0);
    for &t in &temperatures {
        bath.at_temperature(t)?;
    }
    let rows: Vec<Vec<Cell>> = temperatures
        .par_iter()
        .map(|&temperature| -> Result<Vec<Cell>, Error> {
            let b = bath.at_temperature(temperature)?;
            let f = separable_fraction(&b, &cfg)?;
            let mc = separable_fraction_monte_carlo(&b, samples, seed, &cfg)?;
            Ok(vec![temperature.into(), f.into(), mc.fraction.into(), mc.stderr_at(f).into()])
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&["T", "fraction", "fraction_mc", "mc_stderr"]);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

/// Midpoints of `count` equal slices of `(-1, 1)`.
fn cut_axis(count: usize) -> Vec<f64> {
    (0..count).map(|k| -1.0 + (2 * k + 1) as f64 / count as f64).collect()
}

fn bloch_cut(p: &Params) -> Result<Table, CliError> {
    let temperatures = p.temperature_axis()?;
    let bath = p.bath_template(temperatures[0])?;
    let cfg = p.quadrature()?;
    let z_count = require(p.z_count, "z_count")?;
    if z_count == 0 {
        return Err(CliError::Config("`z_count` must be positive".into()));
    }
    for &t in &temperatures {
        bath.at_temperature(t)?;
    }
    let z_axis = cut_axis(z_count);
    let curves: Vec<_> = temperatures
        .par_iter()
        .map(|&temperature| -> Result<_, Error> {
            let b = bath.at_temperature(temperature)?;
            Ok((bloch_cut_separable(&b, &z_axis, &cfg)?, bloch_cut_entangled(&b, &z_axis, &cfg)?))
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&["T", "z", "rho_sep", "rho_ent"]);
    for (sep, ent) in curves {
        for (a, b) in sep.points.iter().zip(&ent.points) {
            table.push(vec![sep.temperature.into(), a.z.into(), a.rho_perp.into(), b.rho_perp.into()]);
        }
    }
    Ok(table)
}

fn witness_or_inf(kernel: Kernel, bath: &dephase_core::BathSpec, t: f64, cfg: &dephase_core::QuadratureConfig) -> Result<f64, Error> {
    match witness(kernel, bath, t, cfg) {
        Err(Error::Overflow { .. }) => Ok(f64::INFINITY),
        other => other,
    }
}

fn oscillations(p: &Params) -> Result<Output, CliError> {
    let bath = p.bath()?;
    let state = p.state()?;
    let cfg = p.quadrature()?;
    let times = p.time_axis()?;
    if let Some(t) = times.iter().find(|t| t.is_nan() || **t < 0.0) {
        return Err(CliError::Config(format!("`times` must be nonnegative, got {t}")));
    }
    let (sb, eb) = (sep_bound(&state), ent_bound(&state));
    let rows: Vec<(f64, f64, f64, RegionLabel)> = times
        .par_iter()
        .map(|&t| -> Result<_, Error> {
            Ok((
                t,
                witness_or_inf(Kernel::S, &bath, t, &cfg)?,
                witness_or_inf(Kernel::E, &bath, t, &cfg)?,
                classify(&bath, t, &state, &cfg)?,
            ))
        })
        .collect::<Result<_, _>>()?;
    let labels: Vec<RegionLabel> = rows.iter().map(|r| r.3).collect();
    let mut table = Table::new(&["t", "S", "E", "sep_bound", "ent_bound", "label"]);
    for (t, s, e, label) in rows {
        table.push(vec![t.into(), s.into(), e.into(), sb.into(), eb.into(), Cell::Text(label.as_str())]);
    }
    let unknown = labels.iter().filter(|l| **l == RegionLabel::Unknown).count();
    Ok(Output {
        table,
        summary: Some(format!(
            "alternations: {} (T = {}, {} of {} points UNKNOWN)",
            count_transitions(&labels),
            bath.temperature(),
            unknown,
            labels.len()
        )),
    })
}

/// Largest relative deviation between paired crossing lists; infinite when
/// the lists differ in length, `None` when either is empty.
pub fn max_relative_deviation(numeric: &[f64], analytic: &[f64]) -> Option<f64> {
    if numeric.is_empty() || analytic.is_empty() {
        return None;
    }
    if numeric.len() != analytic.len() {
        return Some(f64::INFINITY);
    }
    Some(
        numeric
            .iter()
            .zip(analytic)
            .filter(|(_, a)| **a > 0.0)
            .map(|(n, a)| (n - a).abs() / a)
            .fold(0.0, f64::max),
    )
}

fn single_mode(p: &Params) -> Result<Table, CliError> {
    let temperatures = p.temperature_axis()?;
    let state = p.state()?;
    let omega = require(p.omega, "omega")?;
    let g = require(p.g, "g")?;
    let omega_q = p.omega_q.unwrap_or(0.0);
    let scan_points = require(p.scan_points, "scan_points")?;
    let t_max = p.time_max.unwrap_or(2.0 * PI / omega);
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(CliError::Config(format!("`time_max` must be positive, got {t_max}")));
    }
    let modes: Vec<ModeSpec> = temperatures
        .iter()
        .map(|&t| ModeSpec::new(omega, g, t, p.n_trunc))
        .collect::<Result<_, _>>()?;

    let mut table = Table::new(&["T", "tau_crit_list", "tau_ent_list", "max_rel_dev"]);
    for mode in modes {
        let numeric = FockSystem::new(mode, omega_q)?.tau_crit(&state, t_max, scan_points)?;
        let analytic = tau_ent_single(&state, &mode, t_max);
        let dev = max_relative_deviation(&numeric, &analytic);
        table.push(vec![
            mode.temperature().into(),
            Cell::List(numeric),
            Cell::List(analytic),
            dev.into(),
        ]);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cut_axis_is_symmetric_and_open() {
        let z = cut_axis(5);
        for (got, want) in z.iter().zip([-0.8, -0.4, 0.0, 0.4, 0.8]) {
            assert!((got - want).abs() < 1e-15);
        }
        for k in 0..5 {
            assert!((z[k] + z[4 - k]).abs() < 1e-15);
            assert!(z[k].abs() < 1.0);
        }
        assert!(z[2].abs() < 1e-15);
    }

    #[test]
    fn deviation_rules() {
        assert_eq!(max_relative_deviation(&[], &[1.0]), None);
        assert_eq!(max_relative_deviation(&[1.0], &[1.0, 2.0]), Some(f64::INFINITY));
        let d = max_relative_deviation(&[1.01, 1.98], &[1.0, 2.0]).unwrap();
        assert!((d - 0.01).abs() < 1e-12);
        assert_eq!(max_relative_deviation(&[1e-7, 2.0], &[0.0, 2.0]), Some(0.0));
    }
}
