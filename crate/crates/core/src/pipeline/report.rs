//! Energy reports and the cross-run comparison table.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dmet::SolverKind;
use crate::error::{EmberError, Result};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FragmentRow {
    pub label: String,
    pub n_orb: usize,
    pub n_elec: usize,
    pub qubits: usize,
    /// Dimension of the number- and spin-conserving determinant space.
    pub ss_dim: u128,
    /// Full Fock-space dimension, `4^o`.
    pub hs_dim: u128,
    pub energy: f64,
    pub electrons: f64,
    /// Determinants actually diagonalized at the final `μ`.
    pub subspace_dim: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EnergyReport {
    pub molecule: String,
    pub solver: SolverKind,
    pub e_hf: f64,
    pub e_tot: f64,
    pub e_dmet_sqd: Option<f64>,
    pub e_dmet_fci: Option<f64>,
    pub delta_e: Option<f64>,
    pub mu_star: f64,
    pub n_err: f64,
    pub n_iterations: usize,
    pub fragments: Vec<FragmentRow>,
    /// Not serialized so reports stay byte-identical across runs.
    #[serde(skip)]
    pub wall_seconds: f64,
}

impl EnergyReport {
    /// Re-derive `delta_e` from the two energies.
    pub fn refresh_delta(&mut self) {
        self.delta_e = match (self.e_dmet_fci, self.e_dmet_sqd) {
            (Some(a), Some(b)) => Some((a - b).abs()),
            _ => None,
        };
    }

    pub fn to_json(&self) -> Result<String> {
        let mut r = self.clone();
        r.refresh_delta();
        serde_json::to_string_pretty(&r).map_err(|e| EmberError::Invalid(e.to_string()))
    }

    pub fn from_json(text: &str, source: &str) -> Result<Self> {
        let mut r: EnergyReport = serde_json::from_str(text).map_err(|e| EmberError::parse(source, e.to_string()))?;
        r.refresh_delta();
        Ok(r)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
        w.write_record([
            "molecule",
            "solver",
            "fragment",
            "n_orb",
            "n_elec",
            "qubits",
            "ss_dim",
            "hs_dim",
            "e_fragment",
            "n_fragment",
            "subspace_dim",
            "e_tot",
            "mu_star",
            "n_iterations",
            "wall_seconds",
        ])
        .map_err(|e| csv_err(path, e))?;
        for f in &self.fragments {
            w.write_record([
                self.molecule.clone(),
                self.solver.to_string(),
                f.label.clone(),
                f.n_orb.to_string(),
                f.n_elec.to_string(),
                f.qubits.to_string(),
                f.ss_dim.to_string(),
                f.hs_dim.to_string(),
                format!("{:.12}", f.energy),
                format!("{:.12}", f.electrons),
                f.subspace_dim.to_string(),
                format!("{:.12}", self.e_tot),
                format!("{:.12e}", self.mu_star),
                self.n_iterations.to_string(),
                format!("{:.3}", self.wall_seconds),
            ])
            .map_err(|e| csv_err(path, e))?;
        }
        w.flush().map_err(|e| EmberError::io(path, e))
    }
}

pub(crate) fn csv_err(path: &Path, e: csv::Error) -> EmberError {
    EmberError::io(path, std::io::Error::other(e.to_string()))
}

/// Molecule-level comparison of exact and sampled runs.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub molecule: String,
    pub e_dmet_fci: Option<f64>,
    pub e_dmet_sqd: Option<f64>,
    pub mu_fci: Option<f64>,
    pub mu_sqd: Option<f64>,
}

impl ComparisonRow {
    pub fn delta_e(&self) -> Option<f64> {
        Some((self.e_dmet_fci? - self.e_dmet_sqd?).abs())
    }
}

fn opt(v: Option<f64>, f: impl Fn(f64) -> String) -> String {
    v.map(f).unwrap_or_default()
}

pub fn format_delta(d: f64) -> String {
    format!("{d:.3e}")
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub reports: Vec<PathBuf>,
}

impl Comparison {
    pub fn table(&self) -> String {
        let mut out = format!("{:<10} {:>20} {:>20} {:>11}\n", "molecule", "E_DMET-FCI", "E_DMET-SQD", "dE");
        for r in &self.rows {
            out.push_str(&format!(
                "{:<10} {:>20} {:>20} {:>11}\n",
                r.molecule,
                opt(r.e_dmet_fci, |v| format!("{v:.10}")),
                opt(r.e_dmet_sqd, |v| format!("{v:.10}")),
                opt(r.delta_e(), format_delta),
            ));
        }
        out
    }

    pub fn write_csv(&self, comparison: &Path, series: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(comparison).map_err(|e| csv_err(comparison, e))?;
        w.write_record(["molecule", "e_dmet_fci", "e_dmet_sqd", "delta_e", "mu_fci", "mu_sqd"])
            .map_err(|e| csv_err(comparison, e))?;
        for r in &self.rows {
            w.write_record([
                r.molecule.clone(),
                opt(r.e_dmet_fci, |v| format!("{v:.12}")),
                opt(r.e_dmet_sqd, |v| format!("{v:.12}")),
                opt(r.delta_e(), format_delta),
                opt(r.mu_fci, |v| format!("{v:.12e}")),
                opt(r.mu_sqd, |v| format!("{v:.12e}")),
            ])
            .map_err(|e| csv_err(comparison, e))?;
        }
        w.flush().map_err(|e| EmberError::io(comparison, e))?;

        let mut w = csv::Writer::from_path(series).map_err(|e| csv_err(series, e))?;
        w.write_record(["molecule", "delta_e"]).map_err(|e| csv_err(series, e))?;
        for r in &self.rows {
            w.write_record([r.molecule.clone(), opt(r.delta_e(), |v| format!("{v:.6e}"))])
                .map_err(|e| csv_err(series, e))?;
        }
        w.flush().map_err(|e| EmberError::io(series, e))
    }
}

/// `report.json` files in `dir` and its immediate subdirectories, sorted.
fn find_reports(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    let read = |d: &Path| std::fs::read_dir(d).map_err(|e| EmberError::io(d, e));
    for entry in read(dir)? {
        let p = entry.map_err(|e| EmberError::io(dir, e))?.path();
        if p.is_dir() {
            let r = p.join("report.json");
            if r.is_file() {
                found.push(r);
            }
        } else if p.file_name().is_some_and(|n| n == "report.json") {
            found.push(p);
        }
    }
    found.sort();
    Ok(found)
}

/// Merge every report under `dir` into one row per molecule.
pub fn compare_reports(dir: &Path) -> Result<Comparison> {
    let paths = find_reports(dir)?;
    if paths.is_empty() {
        return Err(EmberError::Invalid(format!("no reports found under {}", dir.display())));
    }
    let mut rows: BTreeMap<String, ComparisonRow> = BTreeMap::new();
    for p in &paths {
        let text = std::fs::read_to_string(p).map_err(|e| EmberError::io(p, e))?;
        let r = EnergyReport::from_json(&text, &p.display().to_string())?;
        let row = rows.entry(r.molecule.clone()).or_insert_with(|| ComparisonRow {
            molecule: r.molecule.clone(),
            e_dmet_fci: None,
            e_dmet_sqd: None,
            mu_fci: None,
            mu_sqd: None,
        });
        match r.solver {
            SolverKind::Fci => {
                row.e_dmet_fci = Some(r.e_tot);
                row.mu_fci = Some(r.mu_star);
            }
            SolverKind::Sqd => {
                row.e_dmet_sqd = Some(r.e_tot);
                row.mu_sqd = Some(r.mu_star);
                if row.e_dmet_fci.is_none() {
                    row.e_dmet_fci = r.e_dmet_fci;
                }
            }
        }
    }
    Ok(Comparison { rows: rows.into_values().collect(), reports: paths })
}
