//! One-dimensional parameter sweeps pairing Monte Carlo estimates with the
//! matching closed forms.
//!
//! The columns depend on the base topology:
//!
//! * co-located array: Monte Carlo, large-array limit, high-SNR form;
//! * distributed array with explicit distances: the same for the distributed
//!   array, the crossover distance, and for each reference distance a
//!   co-located array's Monte Carlo estimate, limit and the ordering;
//! * circular cell, fixed user: ring array (Monte Carlo, ring limit,
//!   finite-sum limit) and a co-located array at the cell center;
//! * circular cell, random user: user-averaged Monte Carlo and the
//!   user-averaged closed form (urban exponent only), for both arrays.
//!
//! Every grid point uses the same seed. A point whose scenario fails
//! validation, or whose closed form does not apply, leaves those cells empty
//! and explains why in the `note` column.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{run_trials, SEEstimate};
use crate::asymptotic::{
    compare_schemes, crossover_distance, path_gain, se_asymptotic, se_cmimo_asymptotic, se_high_snr,
};
use crate::circular::{avg_se_urban, avg_se_urban_cmimo, se_circular_cmimo, se_circular_dmimo};
use crate::error::{Error, Result};
use crate::params::{db_to_linear, theta_from_spacing, Scenario, Topology, UserPosition};

/// Parameter varied along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SweepAxis {
    /// Transmit SNR in dB.
    SnrDb,
    /// Antenna ring radius of a circular cell.
    RingRadius,
    /// Distance of a co-located array.
    CentralDistance,
    /// Transmit antenna spacing over coherence distance.
    SpacingT,
    /// Receive antenna spacing over coherence distance.
    SpacingR,
    /// Number of receive antennas.
    NumRx,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 6] = [
        SweepAxis::SnrDb,
        SweepAxis::RingRadius,
        SweepAxis::CentralDistance,
        SweepAxis::SpacingT,
        SweepAxis::SpacingR,
        SweepAxis::NumRx,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::SnrDb => "snr_db",
            SweepAxis::RingRadius => "r_a",
            SweepAxis::CentralDistance => "d",
            SweepAxis::SpacingT => "spacing_t",
            SweepAxis::SpacingR => "spacing_r",
            SweepAxis::NumRx => "n_r",
        }
    }

    /// Rejects axes that make no sense for the base topology.
    pub fn check(self, base: &Scenario) -> Result<()> {
        let ok = match (self, &base.topology) {
            (SweepAxis::RingRadius, Topology::Circular { .. }) => true,
            (SweepAxis::RingRadius, _) => false,
            (SweepAxis::CentralDistance, Topology::Centralized { .. }) => true,
            (SweepAxis::CentralDistance, _) => false,
            (SweepAxis::NumRx, Topology::DistributedExplicit { .. }) => false,
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(vec![format!(
                "sweep axis '{}' does not apply to this topology",
                self.name()
            )]))
        }
    }

    /// Base scenario with this axis set to `value`, re-validated.
    pub fn apply(self, base: &Scenario, value: f64) -> Result<Scenario> {
        self.check(base)?;
        match self {
            SweepAxis::SnrDb => base.with_params(|p| p.snr = db_to_linear(value)),
            SweepAxis::SpacingT => base.with_params(|p| p.theta_t = theta_from_spacing(value)),
            SweepAxis::SpacingR => base.with_params(|p| p.theta_r = theta_from_spacing(value)),
            SweepAxis::NumRx => {
                if !(value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64) {
                    return Err(Error::Validation(vec![format!(
                        "number of receive antennas must be a positive integer, got {value}"
                    )]));
                }
                base.with_params(|p| p.n_r = value as usize)
            }
            SweepAxis::RingRadius => match &base.topology {
                Topology::Circular { r_c, user, .. } => base.with_topology(Topology::Circular {
                    r_c: *r_c,
                    r_a: value,
                    user: user.clone(),
                }),
                _ => unreachable!("checked above"),
            },
            SweepAxis::CentralDistance => base.with_topology(Topology::Centralized { d: value }),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepAxis::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            let names: Vec<&str> = SweepAxis::ALL.iter().map(|a| a.name()).collect();
            Error::Validation(vec![format!(
                "unknown sweep axis '{s}', expected one of {}",
                names.join(", ")
            )])
        })
    }
}

/// A co-located comparison array at distance `d`, shown under `label`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reference {
    pub label: String,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOptions {
    /// Monte Carlo trials per point and series; zero skips simulation.
    pub trials: u64,
    pub seed: u64,
    /// Co-located comparisons for distributed topologies.
    pub references: Vec<Reference>,
}

/// One table cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

/// Result of a sweep: a header and one row per grid point. The first column
/// is the axis value and the last is `note`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl SweepTable {
    /// Numeric value in `column` for each row, `None` where empty.
    pub fn column(&self, column: &str) -> Option<Vec<Option<f64>>> {
        let j = self.columns.iter().position(|c| c == column)?;
        Some(
            self.rows
                .iter()
                .map(|r| match r[j] {
                    Cell::Num(x) => Some(x),
                    Cell::Int(n) => Some(n as f64),
                    _ => None,
                })
                .collect(),
        )
    }

    /// Inserts a column at position `at`, one cell per row.
    pub fn insert_column(&mut self, at: usize, name: impl Into<String>, cells: Vec<Cell>) -> Result<()> {
        if cells.len() != self.rows.len() || at > self.columns.len() {
            return Err(Error::Dimension("column does not fit the table".into()));
        }
        self.columns.insert(at, name.into());
        for (row, c) in self.rows.iter_mut().zip(cells) {
            row.insert(at, c);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Layout {
    Colocated,
    Distributed,
    RingFixed,
    RingRandom,
}

fn layout_of(topology: &Topology) -> Layout {
    match topology {
        Topology::Centralized { .. } => Layout::Colocated,
        Topology::DistributedExplicit { .. } => Layout::Distributed,
        Topology::Circular {
            user: UserPosition::Random,
            ..
        } => Layout::RingRandom,
        Topology::Circular { .. } => Layout::RingFixed,
    }
}

fn mc_columns(prefix: &str, suffix: &str) -> [String; 2] {
    [
        format!("{prefix}_mc_mean{suffix}"),
        format!("{prefix}_mc_std_error{suffix}"),
    ]
}

fn columns(layout: Layout, refs: &[Reference]) -> Vec<String> {
    let mut c = Vec::new();
    match layout {
        Layout::Colocated => {
            c.extend(mc_columns("cmimo", ""));
            c.extend(["cmimo_closed_form".into(), "cmimo_high_snr".into()]);
        }
        Layout::Distributed => {
            c.extend(mc_columns("dmimo", ""));
            c.extend([
                "dmimo_closed_form".into(),
                "dmimo_high_snr".into(),
                "crossover_d".into(),
            ]);
            for r in refs {
                let suffix = format!("@{}", r.label);
                c.extend(mc_columns("cmimo", &suffix));
                c.push(format!("cmimo_closed_form{suffix}"));
                c.push(format!("ordering{suffix}"));
            }
        }
        Layout::RingFixed => {
            c.extend(mc_columns("dmimo", ""));
            c.extend(["dmimo_ring_closed_form".into(), "dmimo_closed_form".into()]);
            c.extend(mc_columns("cmimo", ""));
            c.push("cmimo_closed_form".into());
        }
        Layout::RingRandom => {
            c.extend(mc_columns("dmimo", ""));
            c.push("dmimo_avg_closed_form".into());
            c.extend(mc_columns("cmimo", ""));
            c.push("cmimo_avg_closed_form".into());
        }
    }
    c
}

struct RowBuilder<'a> {
    cells: Vec<Cell>,
    notes: Vec<String>,
    opts: &'a SweepOptions,
}

impl RowBuilder<'_> {
    fn num(&mut self, v: Result<f64>) {
        match v {
            Ok(x) => self.cells.push(Cell::Num(x)),
            Err(e) => {
                self.cells.push(Cell::Empty);
                let msg = e.to_string();
                if !self.notes.contains(&msg) {
                    self.notes.push(msg);
                }
            }
        }
    }

    fn text(&mut self, v: Result<String>) {
        match v {
            Ok(s) => self.cells.push(Cell::Text(s)),
            Err(e) => {
                self.cells.push(Cell::Empty);
                self.notes.push(e.to_string());
            }
        }
    }

    fn mc(&mut self, scenario: Result<Scenario>) {
        if self.opts.trials == 0 {
            self.cells.extend([Cell::Empty, Cell::Empty]);
            return;
        }
        match scenario.and_then(|s| run_trials(&s, self.opts.trials, self.opts.seed)) {
            Ok(SEEstimate { mean, std_error, .. }) => self.cells.extend([Cell::Num(mean), Cell::Num(std_error)]),
            Err(e) => {
                self.num(Err(e));
                self.cells.push(Cell::Empty);
            }
        }
    }
}

fn colocated_at(s: &Scenario, d: f64) -> Result<Scenario> {
    s.with_topology(Topology::Centralized { d })
}

fn fill_row(layout: Layout, s: &Scenario, b: &mut RowBuilder<'_>) {
    let p = &s.params;
    match layout {
        Layout::Colocated => {
            b.mc(Ok(s.clone()));
            b.num(se_asymptotic(p, &s.topology));
            b.num(se_high_snr(p, &s.topology));
        }
        Layout::Distributed => {
            b.mc(Ok(s.clone()));
            b.num(se_asymptotic(p, &s.topology));
            b.num(se_high_snr(p, &s.topology));
            let delta = path_gain(p, &s.topology);
            b.num(delta.clone().and_then(|dl| crossover_distance(p.n_r, p.nu, dl)));
            for r in &b.opts.references.clone() {
                b.mc(colocated_at(s, r.d));
                b.num(se_cmimo_asymptotic(p, r.d));
                b.text(
                    delta
                        .clone()
                        .and_then(|dl| compare_schemes(p.n_r, r.d, p.nu, dl))
                        .map(|o| o.label().to_string()),
                );
            }
        }
        Layout::RingFixed => {
            let Topology::Circular {
                r_c,
                r_a,
                user: UserPosition::Fixed { r_u, phi },
            } = s.topology
            else {
                unreachable!("layout follows the topology");
            };
            b.mc(Ok(s.clone()));
            b.num(se_circular_dmimo(p, r_u, r_a));
            b.num(se_asymptotic(p, &s.topology));
            let center = s.with_topology(Topology::Circular {
                r_c,
                r_a: 0.0,
                user: UserPosition::Fixed { r_u, phi },
            });
            b.mc(center);
            b.num(se_circular_cmimo(p, r_u));
        }
        Layout::RingRandom => {
            let Topology::Circular { r_c, r_a, .. } = s.topology else {
                unreachable!("layout follows the topology");
            };
            b.mc(Ok(s.clone()));
            b.num(avg_se_urban(p, r_c, r_a));
            b.mc(s.with_topology(Topology::Circular {
                r_c,
                r_a: 0.0,
                user: UserPosition::Random,
            }));
            b.num(avg_se_urban_cmimo(p, r_c));
        }
    }
}

/// Evaluates the base scenario at every grid value of `axis`.
///
/// Fails only when the axis does not apply to the base topology; problems
/// at individual points are recorded in the table.
pub fn sweep(base: &Scenario, axis: SweepAxis, grid: &[f64], opts: &SweepOptions) -> Result<SweepTable> {
    axis.check(base)?;
    let layout = layout_of(&base.topology);
    let mut header = vec![axis.name().to_string()];
    let body = columns(layout, &opts.references);
    let width = body.len();
    header.extend(body);
    header.push("note".into());

    let mut rows = Vec::with_capacity(grid.len());
    for &v in grid {
        let mut b = RowBuilder {
            cells: Vec::with_capacity(width),
            notes: Vec::new(),
            opts,
        };
        match axis.apply(base, v) {
            Ok(s) => fill_row(layout, &s, &mut b),
            Err(e) => {
                b.cells.resize(width, Cell::Empty);
                b.notes.push(e.to_string());
            }
        }
        debug_assert_eq!(b.cells.len(), width);
        let mut row = vec![Cell::Num(v)];
        row.extend(b.cells);
        row.push(if b.notes.is_empty() {
            Cell::Empty
        } else {
            Cell::Text(b.notes.join("; "))
        });
        rows.push(row);
    }
    Ok(SweepTable {
        axis,
        columns: header,
        rows,
    })
}
