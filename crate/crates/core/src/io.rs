//! File formats: snapshot and density CSVs, JSON manifests.
//!
//! Floats in CSV files are written as `{:.16e}` (17 significant digits),
//! which round-trips every `f64` exactly.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{LabError, Result};
use crate::kernel::CutoffSchedule;
use crate::measure::DensityEstimate;
use crate::rng::SeedLineage;
use crate::sim::{Ensemble, Trajectory};
use crate::vec2::Vec2;

pub const SNAPSHOT_COLUMNS: [&str; 6] = ["replica", "t", "particle", "vx", "vy", "running_max"];

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(path: &Path, e: csv::Error) -> LabError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => LabError::io(path, io),
        other => LabError::Parse(format!("{}: {other:?}", path.display())),
    }
}

fn create(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
        }
    }
    let f = File::create(path).map_err(|e| LabError::io(path, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(f)))
}

fn write_ensemble<W: Write>(w: &mut csv::Writer<W>, e: &Ensemble, path: &Path) -> Result<()> {
    let replica = e.lineage.replica.to_string();
    let t = fmt(e.time);
    for (i, (v, m)) in e.velocities.iter().zip(&e.running_max).enumerate() {
        w.write_record([
            replica.as_str(),
            t.as_str(),
            &i.to_string(),
            &fmt(v.x),
            &fmt(v.y),
            &fmt(*m),
        ])
        .map_err(|err| csv_err(path, err))?;
    }
    Ok(())
}

/// One row per particle per snapshot, `t = 0` included, replicas in order.
pub fn write_snapshots_csv(path: &Path, trajectories: &[Trajectory]) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(SNAPSHOT_COLUMNS).map_err(|e| csv_err(path, e))?;
    for tr in trajectories {
        write_ensemble(&mut w, &tr.initial, path)?;
        for s in &tr.snapshots {
            write_ensemble(&mut w, s, path)?;
        }
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

/// All particles of one replica at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotGroup {
    pub replica: u64,
    pub t: f64,
    pub velocities: Vec<Vec2>,
    pub running_max: Vec<f64>,
}

impl SnapshotGroup {
    pub fn to_ensemble(&self, master_seed: u64) -> Result<Ensemble> {
        let mut e = Ensemble::from_velocities(self.velocities.clone(), SeedLineage::new(master_seed, self.replica))?;
        e.time = self.t;
        e.running_max = self.running_max.clone();
        Ok(e)
    }
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| LabError::Parse(format!("missing column `{name}`")))
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, name: &str, line: u64) -> Result<T> {
    let raw = rec.get(idx).unwrap_or("");
    raw.trim()
        .parse()
        .map_err(|_| LabError::Parse(format!("line {line}: bad value `{raw}` in column `{name}`")))
}

/// Reads a snapshot CSV, grouped by `(t, replica)` in increasing order.
pub fn read_snapshots_csv(path: &Path) -> Result<Vec<SnapshotGroup>> {
    let f = File::open(path).map_err(|e| LabError::io(path, e))?;
    let mut r = csv::Reader::from_reader(std::io::BufReader::new(f));
    let headers = r.headers().map_err(|e| csv_err(path, e))?.clone();
    let idx: Vec<usize> = SNAPSHOT_COLUMNS
        .iter()
        .map(|c| column(&headers, c))
        .collect::<Result<_>>()?;
    let mut groups: BTreeMap<(u64, u64), SnapshotGroup> = BTreeMap::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = k as u64 + 2;
        let replica: u64 = field(&rec, idx[0], "replica", line)?;
        let t: f64 = field(&rec, idx[1], "t", line)?;
        let vx: f64 = field(&rec, idx[3], "vx", line)?;
        let vy: f64 = field(&rec, idx[4], "vy", line)?;
        let m: f64 = field(&rec, idx[5], "running_max", line)?;
        // non-negative times order correctly by their bit patterns
        let g = groups.entry((t.to_bits(), replica)).or_insert_with(|| SnapshotGroup {
            replica,
            t,
            velocities: Vec::new(),
            running_max: Vec::new(),
        });
        g.velocities.push(Vec2::new(vx, vy));
        g.running_max.push(m);
    }
    Ok(groups.into_values().collect())
}

/// Density estimate as `x,y,density` rows.
pub fn write_density_csv(path: &Path, est: &DensityEstimate) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(["x", "y", "density"]).map_err(|e| csv_err(path, e))?;
    for (p, v) in est.points() {
        w.write_record([fmt(p.x), fmt(p.y), fmt(v)]).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

/// Generic numeric table with a header row.
pub fn write_table_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(|&x| fmt(x))).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
        }
    }
    let mut text = serde_json::to_string_pretty(value).map_err(|e| LabError::Parse(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| LabError::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaRecord {
    pub lineage: SeedLineage,
    pub events: u64,
    pub accepted: u64,
}

/// Everything needed to reproduce and audit a `simulate` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: RunConfig,
    pub schedule: CutoffSchedule,
    /// `N · λ_rate`, the total candidate-event rate of one replica.
    pub total_rate: f64,
    pub replicas: Vec<ReplicaRecord>,
    pub wall_clock_seconds: f64,
}

impl Manifest {
    pub fn new(config: &RunConfig, schedule: CutoffSchedule, trajectories: &[Trajectory], seconds: f64) -> Self {
        Manifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            schedule,
            total_rate: config.sim.n as f64 * schedule.rate,
            replicas: trajectories
                .iter()
                .map(|t| ReplicaRecord {
                    lineage: t.snapshots.last().map_or(t.initial.lineage, |s| s.lineage),
                    events: t.events,
                    accepted: t.accepted,
                })
                .collect(),
            wall_clock_seconds: seconds,
        }
    }
}
