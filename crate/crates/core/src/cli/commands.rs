//! Subcommand implementations. Each builds a [`Table`] which is then written
//! in the requested format.
//!
//! Output columns:
//!
//! * `simulate`: `scheme, mc_mean, mc_std_error, trials, seed`
//! * `asymptotic`: the closed forms valid for the topology, then `note`
//! * `compare`: one row per reference distance with both closed forms, the
//!   path gains, the crossover distance and the ordering
//! * `optimize`: `r_c_m, r_a_opt_m, r_a_opt_ratio, chi0, is_maximum`, plus
//!   `snr_db, brute_force_r_a_m, brute_force_ratio` with `--sweep`
//! * `sweep`: see [`crate::montecarlo::sweep()`]

use std::fs;
use std::io::Write;
use std::path::Path;

use super::config::{self, Format, Resolved, DEFAULT_PRECISION, DEFAULT_R0_M};
use super::output::{format_sig, write_csv, write_json, Table};
use super::{CliError, Command, Common};
use crate::asymptotic::{
    compare_schemes, crossover_distance, path_gain, se_asymptotic, se_cmimo_asymptotic, se_high_snr,
};
use crate::circular::{
    avg_se_urban, avg_se_urban_cmimo, brute_force_ring_radius, optimal_ring_radius, ring_distance_moment,
    se_circular_cmimo, se_circular_dmimo,
};
use crate::montecarlo::{run_trials, sweep, Cell, Reference, SweepOptions};
use crate::params::{db_to_linear, Scenario, SystemParams, Topology, UserPosition};

type CliResult<T> = Result<T, CliError>;

/// Grid step, relative to the cell radius, of the brute-force ring search.
pub const BRUTE_FORCE_STEP: f64 = 1e-3;

struct Settings {
    seed: u64,
    workers: Option<usize>,
    format: Format,
    precision: usize,
    out: Option<std::path::PathBuf>,
}

fn settings(common: &Common, resolved: Option<&Resolved>) -> Settings {
    Settings {
        seed: common.seed.or(resolved.and_then(|r| r.seed)).unwrap_or(0),
        workers: common.workers.or(resolved.and_then(|r| r.workers)),
        format: common.format.or(resolved.and_then(|r| r.format)).unwrap_or_default(),
        precision: resolved.map_or(DEFAULT_PRECISION, |r| r.precision),
        out: common.out.clone().or(resolved.and_then(|r| r.out.clone())),
    }
}

fn load(path: &Path) -> CliResult<Resolved> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    config::parse(&text)
        .and_then(|c| c.resolve())
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn require_config(common: &Common) -> CliResult<Resolved> {
    match &common.config {
        Some(p) => load(p),
        None => Err(CliError::Config("--config is required".into())),
    }
}

/// Runs one subcommand end to end.
pub fn run(command: &Command) -> CliResult<()> {
    let (common, resolved) = match command {
        Command::Simulate(c) | Command::Asymptotic(c) | Command::Compare(c) | Command::Sweep(c) => {
            (c, Some(require_config(c)?))
        }
        Command::Optimize { common, .. } => (common, common.config.as_deref().map(load).transpose()?),
    };
    let s = settings(common, resolved.as_ref());
    if s.workers == Some(0) {
        return Err(CliError::Config("--workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(s.workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Numeric(format!("cannot start worker threads: {e}")))?;
    let table = pool.install(|| match command {
        Command::Simulate(_) => simulate(resolved.as_ref().expect("loaded"), s.seed),
        Command::Asymptotic(_) => asymptotic(resolved.as_ref().expect("loaded")),
        Command::Compare(_) => compare(resolved.as_ref().expect("loaded")),
        Command::Sweep(_) => sweep_command(resolved.as_ref().expect("loaded"), s.seed),
        Command::Optimize { r_c_m, sweep, .. } => optimize(resolved.as_ref(), *r_c_m, *sweep),
    })?;
    emit(&table, &s)
}

fn emit(table: &Table, s: &Settings) -> CliResult<()> {
    let mut buf = Vec::new();
    match s.format {
        Format::Csv => write_csv(table, s.precision, &mut buf),
        Format::Json => write_json(table, &mut buf),
    }
    .map_err(|e| CliError::Io(format!("cannot format output: {e}")))?;
    match &s.out {
        Some(path) => fs::write(path, &buf).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(&buf)
            .map_err(|e| CliError::Io(format!("cannot write output: {e}"))),
    }
}

fn simulate(r: &Resolved, seed: u64) -> CliResult<Table> {
    if r.trials == 0 {
        return Err(CliError::Config("simulate needs at least one trial".into()));
    }
    let est = run_trials(&r.scenario, r.trials, seed)?;
    let mut t = Table::new(
        ["scheme", "mc_mean", "mc_std_error", "trials", "seed"]
            .map(String::from)
            .to_vec(),
    );
    t.push(vec![
        Cell::Text(r.scenario.scheme().label().into()),
        Cell::Num(est.mean),
        Cell::Num(est.std_error),
        Cell::Int(est.trials),
        Cell::Int(est.seed),
    ]);
    Ok(t)
}

/// Single-row table assembled column by column.
#[derive(Default)]
struct Row {
    columns: Vec<String>,
    cells: Vec<Cell>,
    notes: Vec<String>,
}

impl Row {
    fn num(&mut self, name: &str, v: crate::Result<f64>) -> CliResult<()> {
        self.columns.push(name.into());
        self.cells.push(Cell::Num(v?));
        Ok(())
    }

    fn finish(mut self) -> Table {
        self.columns.push("note".into());
        self.cells.push(if self.notes.is_empty() {
            Cell::Empty
        } else {
            Cell::Text(self.notes.join("; "))
        });
        let mut t = Table::new(self.columns);
        t.push(self.cells);
        t
    }
}

fn asymptotic(r: &Resolved) -> CliResult<Table> {
    let p = &r.scenario.params;
    let topo = &r.scenario.topology;
    let mut row = Row::default();
    match topo {
        Topology::Centralized { .. } => {
            row.num("cmimo_closed_form", se_asymptotic(p, topo))?;
            row.num("cmimo_high_snr", se_high_snr(p, topo))?;
        }
        Topology::DistributedExplicit { .. } => {
            row.num("dmimo_closed_form", se_asymptotic(p, topo))?;
            row.num("dmimo_high_snr", se_high_snr(p, topo))?;
            let delta = path_gain(p, topo)?;
            row.num("delta", Ok(delta))?;
            row.num(
                "crossover_d_m",
                crossover_distance(p.n_r, p.nu, delta).map(|d| d * r.r0_m),
            )?;
        }
        Topology::Circular { r_c, r_a, user } => {
            if let UserPosition::Fixed { r_u, .. } = user {
                if *r_a > 0.0 {
                    row.num("ring_moment", ring_distance_moment(*r_u, *r_a, p.nu))?;
                    row.num("dmimo_ring_closed_form", se_circular_dmimo(p, *r_u, *r_a))?;
                    row.num("dmimo_closed_form", se_asymptotic(p, topo))?;
                    row.num("dmimo_high_snr", se_high_snr(p, topo))?;
                }
                row.num("cmimo_closed_form", se_circular_cmimo(p, *r_u))?;
            }
            if p.nu == 4.0 {
                row.num("dmimo_avg_closed_form", avg_se_urban(p, *r_c, *r_a))?;
                row.num("cmimo_avg_closed_form", avg_se_urban_cmimo(p, *r_c))?;
            } else {
                row.notes
                    .push(format!("user-averaged closed form requires nu = 4, got {}", p.nu));
            }
        }
    }
    Ok(row.finish())
}

fn compare(r: &Resolved) -> CliResult<Table> {
    let p = &r.scenario.params;
    let topo = &r.scenario.topology;
    let refs_m: Vec<f64> = match topo {
        Topology::Centralized { .. } => {
            return Err(CliError::Config(
                "compare needs a distributed or circular topology".into(),
            ))
        }
        Topology::Circular {
            user: UserPosition::Random,
            ..
        } => return Err(CliError::Config("compare needs a fixed user position".into())),
        Topology::Circular {
            user: UserPosition::Fixed { r_u, .. },
            ..
        } if r.references_m.is_empty() => vec![r_u * r.r0_m],
        _ if r.references_m.is_empty() => {
            return Err(CliError::Config("compare needs reference_d_m".into()));
        }
        _ => r.references_m.clone(),
    };
    let delta = path_gain(p, topo)?;
    let crossover_m = crossover_distance(p.n_r, p.nu, delta)? * r.r0_m;
    let dmimo = se_asymptotic(p, topo)?;
    let mut t = Table::new(
        [
            "reference_d_m",
            "cmimo_closed_form",
            "dmimo_closed_form",
            "cmimo_path_gain",
            "delta",
            "crossover_d_m",
            "ordering",
        ]
        .map(String::from)
        .to_vec(),
    );
    for d_m in refs_m {
        let d = d_m / r.r0_m;
        t.push(vec![
            Cell::Num(d_m),
            Cell::Num(se_cmimo_asymptotic(p, d)?),
            Cell::Num(dmimo),
            Cell::Num(p.n_r as f64 * d.powf(-p.nu)),
            Cell::Num(delta),
            Cell::Num(crossover_m),
            Cell::Text(compare_schemes(p.n_r, d, p.nu, delta)?.label().into()),
        ]);
    }
    Ok(t)
}

fn optimize(r: Option<&Resolved>, r_c_flag: Option<f64>, with_sweep: bool) -> CliResult<Table> {
    let r0 = r.map_or(DEFAULT_R0_M, |r| r.r0_m);
    let r_c_m = match (r_c_flag, r.map(|r| &r.scenario.topology)) {
        (Some(v), _) => v,
        (None, Some(Topology::Circular { r_c, .. })) => r_c * r0,
        _ => return Err(CliError::Config("optimize needs --r-c-m or a circular config".into())),
    };
    if !(r_c_m.is_finite() && r_c_m > 0.0) {
        return Err(CliError::Config(format!("cell radius must be positive, got {r_c_m}")));
    }
    let base = match r {
        Some(r) => r.scenario.params.clone(),
        None => SystemParams {
            n_t: 1,
            n_r: 100,
            snr: 10.0,
            nu: 4.0,
            omega: 1.0,
            alpha: vec![10.0],
            theta_t: 0.0,
            theta_r: 0.0,
        },
    };
    let opt = optimal_ring_radius(r_c_m / r0)?;
    let mut columns: Vec<String> = ["r_c_m", "r_a_opt_m", "r_a_opt_ratio", "chi0", "is_maximum"]
        .map(String::from)
        .to_vec();
    let fixed = vec![
        Cell::Num(r_c_m),
        Cell::Num(opt.r_a_opt * r0),
        Cell::Num(opt.r_a_opt * r0 / r_c_m),
        Cell::Num(opt.chi0),
        Cell::Text(opt.is_maximum.to_string()),
    ];
    let note = if base.nu == 4.0 {
        Cell::Empty
    } else {
        Cell::Text(format!("the optimum assumes nu = 4; config has nu = {}", base.nu))
    };
    if !with_sweep {
        columns.push("note".into());
        let mut t = Table::new(columns);
        let mut row = fixed;
        row.push(note);
        t.push(row);
        return Ok(t);
    }
    if base.nu != 4.0 {
        return Err(CliError::Config(format!(
            "--sweep searches the nu = 4 average and needs nu = 4, got {}",
            base.nu
        )));
    }
    columns.extend(["snr_db", "brute_force_r_a_m", "brute_force_ratio", "note"].map(String::from));
    let mut t = Table::new(columns);
    for snr_db in [0.0, 10.0, 20.0] {
        let mut p = base.clone();
        p.snr = db_to_linear(snr_db);
        let found = brute_force_ring_radius(&p, r_c_m / r0, BRUTE_FORCE_STEP)?;
        let mut row = fixed.clone();
        row.extend([
            Cell::Num(snr_db),
            Cell::Num(found * r0),
            Cell::Num(found * r0 / r_c_m),
            note.clone(),
        ]);
        t.push(row);
    }
    Ok(t)
}

fn sweep_command(r: &Resolved, seed: u64) -> CliResult<Table> {
    let plan = r
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep needs a 'sweep' block in the config".into()))?;
    let references = r
        .references_m
        .iter()
        .map(|d_m| Reference {
            label: format!("d={}m", format_sig(*d_m, 6)),
            d: d_m / r.r0_m,
        })
        .collect();
    let opts = SweepOptions {
        trials: r.trials,
        seed,
        references,
    };
    let base: &Scenario = &r.scenario;
    let mut table = sweep(base, plan.axis, &plan.grid, &opts)?;
    if plan.config_axis != plan.axis.name() {
        let cells = plan.config_grid.iter().map(|v| Cell::Num(*v)).collect();
        table.insert_column(0, plan.config_axis.clone(), cells)?;
    }
    Ok(table.into())
}
