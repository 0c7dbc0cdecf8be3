//! End-to-end orchestration: mean field, embedding, impurity solves, μ loop.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::dmet::{DmetState, DmetSystem, FciSolver, ImpuritySolver, MuStep, SolverKind, SqdSolver};
use crate::error::{EmberError, Result};
use crate::integrals::{fcidump_text, read_bundle, IntegralBundle};
use crate::meanfield::{lowdin_localize, run_rhf, FragmentationPlan, ScfOptions, ScfResult};
use crate::pipeline::config::{Fragmentation, RunConfig};
use crate::pipeline::dims::DimsRow;
use crate::pipeline::report::{csv_err, EnergyReport, FragmentRow};

/// Part I: RHF, Löwdin localization, fragment plan; then bath construction.
pub fn build_system(
    bundle: &IntegralBundle,
    fragmentation: &Fragmentation,
    scf: &ScfOptions,
    eps_occ: f64,
) -> Result<(ScfResult, DmetSystem)> {
    let res = run_rhf(bundle, scf).map_err(|e| e.in_part("I", "mean field"))?;
    if !res.converged {
        return Err(EmberError::NoConvergence { what: "RHF", iterations: res.n_iter, residual: res.commutator_norm }
            .in_part("I", "mean field"));
    }
    let (plan, sys) = lowdin_localize(bundle, &res).map_err(|e| e.in_part("I", "localization"))?;
    let plan = match fragmentation {
        Fragmentation::PerAtom => plan,
        Fragmentation::Explicit(lists) => {
            let labels = (0..lists.len()).map(|i| format!("F{i}")).collect();
            FragmentationPlan::with_fragments(plan.lowdin_transform, lists.clone(), labels)
                .map_err(|e| e.in_part("I", "fragmentation"))?
        }
    };
    let sys = DmetSystem::new(sys, plan, eps_occ)?;
    Ok((res, sys))
}

pub fn dims_rows(sys: &DmetSystem) -> Vec<DimsRow> {
    sys.models.iter().map(|m| DimsRow::new(m.label.clone(), m.base.n_orb, m.base.n_elec_imp)).collect()
}

/// Sizes of every impurity without solving anything.
pub fn cmd_dims(
    bundle_path: &Path,
    fragmentation: &Fragmentation,
    scf: &ScfOptions,
    eps_occ: f64,
) -> Result<Vec<DimsRow>> {
    let bundle = read_bundle(bundle_path)?;
    let (_, sys) = build_system(&bundle, fragmentation, scf, eps_occ)?;
    Ok(dims_rows(&sys))
}

/// FCIDUMP text of impurity `fragment` at zero chemical potential.
pub fn cmd_export_fcidump(
    bundle_path: &Path,
    fragment: usize,
    fragmentation: &Fragmentation,
    scf: &ScfOptions,
    eps_occ: f64,
) -> Result<String> {
    let bundle = read_bundle(bundle_path)?;
    let (_, sys) = build_system(&bundle, fragmentation, scf, eps_occ)?;
    let m = sys
        .models
        .get(fragment)
        .ok_or_else(|| EmberError::IndexOutOfRange(format!("fragment {fragment} of {}", sys.n_fragments())))?;
    Ok(fcidump_text(&m.base))
}

fn solver_for(kind: SolverKind, cfg: &RunConfig) -> Box<dyn ImpuritySolver> {
    match kind {
        SolverKind::Fci => Box::new(FciSolver { tol: cfg.sqd.davidson_tol }),
        SolverKind::Sqd => Box::new(SqdSolver { sampler: cfg.sampler.clone(), sqd: cfg.sqd.clone() }),
    }
}

pub struct RunOutput {
    pub report: EnergyReport,
    pub state: DmetState,
    pub run_dir: PathBuf,
}

fn fragment_rows(sys: &DmetSystem, st: &DmetState) -> Vec<FragmentRow> {
    dims_rows(sys)
        .into_iter()
        .enumerate()
        .map(|(i, d)| FragmentRow {
            label: d.label,
            n_orb: d.n_orb,
            n_elec: d.n_elec,
            qubits: d.qubits,
            ss_dim: d.ss_dim,
            hs_dim: d.hs_dim,
            energy: st.fragment_energies[i],
            electrons: st.fragment_electrons[i],
            subspace_dim: st.final_eval.solutions[i].subspace_dim,
        })
        .collect()
}

fn write_mu_trace(path: &Path, history: &[MuStep]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for s in history {
        w.serialize(s).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| EmberError::io(path, e))
}

fn write_diagnostics(dir: &Path, sys: &DmetSystem, st: &DmetState) -> Result<()> {
    for (i, sol) in st.final_eval.solutions.iter().enumerate() {
        if sol.diagnostics.is_empty() {
            continue;
        }
        let path = dir.join(format!("diagnostics_{i}.csv"));
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
        w.write_record(["fragment", "iteration", "batch", "n_unique", "n_proj", "energy", "best"])
            .map_err(|e| csv_err(&path, e))?;
        for r in &sol.diagnostics {
            w.write_record([
                sys.models[i].label.clone(),
                r.iteration.to_string(),
                r.batch.to_string(),
                r.n_unique.to_string(),
                r.n_proj.to_string(),
                format!("{:.12}", r.energy),
                format!("{:.12}", r.best),
            ])
            .map_err(|e| csv_err(&path, e))?;
        }
        w.flush().map_err(|e| EmberError::io(&path, e))?;
    }
    Ok(())
}

/// Solve, then write `report.json`, `report.csv`, `mu_trace.csv` and
/// per-impurity diagnostics under `output_dir/<molecule>_<solver>/`.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunOutput> {
    let cfg = cfg.clone().normalized();
    cfg.validate()?;
    let t0 = Instant::now();
    let bundle = read_bundle(&cfg.bundle_path).map_err(|e| e.in_part("I", "integral bundle"))?;
    let molecule = cfg.label.clone().unwrap_or_else(|| bundle.formula_label());
    let (scf, sys) = build_system(&bundle, &cfg.fragmentation, &cfg.scf, cfg.dmet.eps_occ)?;
    let kind = cfg.dmet.solver;

    let st = sys.solve_chemical_potential(solver_for(kind, &cfg).as_ref(), &cfg.dmet)?;
    let mut report = EnergyReport {
        molecule: molecule.clone(),
        solver: kind,
        e_hf: scf.e_hf,
        e_tot: st.e_tot,
        e_dmet_sqd: None,
        e_dmet_fci: None,
        delta_e: None,
        mu_star: st.mu_glob,
        n_err: st.n_err,
        n_iterations: st.iterations(),
        fragments: fragment_rows(&sys, &st),
        wall_seconds: 0.0,
    };
    match kind {
        SolverKind::Fci => report.e_dmet_fci = Some(st.e_tot),
        SolverKind::Sqd => {
            report.e_dmet_sqd = Some(st.e_tot);
            if cfg.compare_fci {
                let exact = sys.solve_chemical_potential(solver_for(SolverKind::Fci, &cfg).as_ref(), &cfg.dmet)?;
                report.e_dmet_fci = Some(exact.e_tot);
            }
        }
    }
    report.refresh_delta();
    report.wall_seconds = t0.elapsed().as_secs_f64();

    let run_dir = cfg.output_dir.join(format!("{molecule}_{kind}"));
    std::fs::create_dir_all(&run_dir).map_err(|e| EmberError::io(&run_dir, e))?;
    let json = report.to_json()?;
    let path = run_dir.join("report.json");
    std::fs::write(&path, json + "\n").map_err(|e| EmberError::io(&path, e))?;
    report.write_csv(&run_dir.join("report.csv"))?;
    write_mu_trace(&run_dir.join("mu_trace.csv"), &st.history)?;
    write_diagnostics(&run_dir, &sys, &st)?;
    Ok(RunOutput { report, state: st, run_dir })
}
