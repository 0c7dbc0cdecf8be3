//! Global chemical-potential self-consistency.

use serde::{Deserialize, Serialize};

use crate::dmet::bath::{build_bath, BathDecomposition, DEFAULT_EPS_OCC};
use crate::dmet::embedding::{build_impurity_model, ImpurityModel};
use crate::dmet::energy::fragment_energy;
use crate::dmet::solvers::{ImpuritySolution, ImpuritySolver};
use crate::error::{EmberError, Result};
use crate::linalg::DenseEri;
use crate::meanfield::{FragmentationPlan, LocalizedSystem};
use crate::par;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    #[default]
    Fci,
    Sqd,
}

impl std::str::FromStr for SolverKind {
    type Err = EmberError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fci" => Ok(SolverKind::Fci),
            "sqd" => Ok(SolverKind::Sqd),
            _ => Err(EmberError::Invalid(format!("unknown solver '{s}' (expected fci or sqd)"))),
        }
    }
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolverKind::Fci => "fci",
            SolverKind::Sqd => "sqd",
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DmetOptions {
    pub eps_occ: f64,
    /// Convergence threshold on `|N_tot − N_true|`.
    pub eps_conv: f64,
    pub max_mu_iter: usize,
    pub solver: SolverKind,
    pub mu_init: f64,
    /// Second secant point offset.
    pub mu_step: f64,
    pub mu_max: f64,
}

impl Default for DmetOptions {
    fn default() -> Self {
        DmetOptions {
            eps_occ: DEFAULT_EPS_OCC,
            eps_conv: 1.48e-8,
            max_mu_iter: 50,
            solver: SolverKind::Fci,
            mu_init: 0.0,
            mu_step: 1e-4,
            mu_max: 10.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MuStep {
    pub iter: usize,
    pub mu: f64,
    pub n_tot: f64,
    pub n_err: f64,
    pub e_tot: f64,
}

/// Everything evaluated at one `μ`.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub mu: f64,
    pub fragment_energies: Vec<f64>,
    pub fragment_electrons: Vec<f64>,
    pub e_tot: f64,
    pub n_err: f64,
    pub solutions: Vec<ImpuritySolution>,
}

#[derive(Clone, Debug)]
pub struct DmetState {
    pub mu_glob: f64,
    pub fragment_energies: Vec<f64>,
    pub fragment_electrons: Vec<f64>,
    pub e_tot: f64,
    pub n_err: f64,
    pub history: Vec<MuStep>,
    pub final_eval: Evaluation,
}

impl DmetState {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }
}

/// Fragments, baths, and zero-μ impurity models for one molecule.
pub struct DmetSystem {
    pub sys: LocalizedSystem,
    pub plan: FragmentationPlan,
    pub baths: Vec<BathDecomposition>,
    pub models: Vec<ImpurityModel>,
    eris: Vec<DenseEri>,
}

impl DmetSystem {
    pub fn new(sys: LocalizedSystem, plan: FragmentationPlan, eps_occ: f64) -> Result<Self> {
        let mut baths = Vec::new();
        let mut models = Vec::new();
        for (f, label) in plan.fragments.iter().zip(&plan.labels) {
            let bath = build_bath(&sys.dm, f, eps_occ).map_err(|e| e.in_part("II", format!("bath for {label}")))?;
            let model =
                build_impurity_model(&sys, &bath, label).map_err(|e| e.in_part("II", format!("impurity {label}")))?;
            baths.push(bath);
            models.push(model);
        }
        let eris = models.iter().map(|m| m.base.eri_imp.to_dense()).collect();
        Ok(DmetSystem { sys, plan, baths, models, eris })
    }

    pub fn n_fragments(&self) -> usize {
        self.models.len()
    }

    /// Solve every impurity at `μ` and assemble the totals.
    pub fn evaluate(&self, mu: f64, solver: &dyn ImpuritySolver) -> Result<Evaluation> {
        let results = par::map_range(self.models.len(), |y| {
            let model = &self.models[y];
            let sol = solver
                .solve(&model.shifted(mu), y)
                .map_err(|e| e.in_part("III", format!("impurity {} {} solver failure", model.label, solver.name())))?;
            let (e, n) =
                fragment_energy(model, &self.eris[y], &sol.rdms).map_err(|e| e.in_part("IV", model.label.clone()))?;
            Ok::<_, EmberError>((e, n, sol))
        });
        let mut fragment_energies = Vec::new();
        let mut fragment_electrons = Vec::new();
        let mut solutions = Vec::new();
        for r in results {
            let (e, n, s) = r?;
            fragment_energies.push(e);
            fragment_electrons.push(n);
            solutions.push(s);
        }
        let e_tot = self.sys.e_nuc + fragment_energies.iter().sum::<f64>();
        let n_err = fragment_electrons.iter().sum::<f64>() - self.sys.n_elec as f64;
        Ok(Evaluation { mu, fragment_energies, fragment_electrons, e_tot, n_err, solutions })
    }

    /// Secant iteration on `f(μ) = N_tot(μ) − N_true`.
    pub fn solve_chemical_potential(&self, solver: &dyn ImpuritySolver, opts: &DmetOptions) -> Result<DmetState> {
        let mut history = Vec::new();
        let n_true = self.sys.n_elec as f64;
        let run = |mu: f64, history: &mut Vec<MuStep>| -> Result<Evaluation> {
            let ev = self.evaluate(mu, solver)?;
            let step = MuStep { iter: history.len(), mu, n_tot: ev.n_err + n_true, n_err: ev.n_err, e_tot: ev.e_tot };
            log::info!("mu iter {} mu={:.10} n_err={:.3e} e_tot={:.10}", step.iter, mu, ev.n_err, ev.e_tot);
            history.push(step);
            Ok(ev)
        };
        let finish = |ev: Evaluation, history: Vec<MuStep>| DmetState {
            mu_glob: ev.mu,
            fragment_energies: ev.fragment_energies.clone(),
            fragment_electrons: ev.fragment_electrons.clone(),
            e_tot: ev.e_tot,
            n_err: ev.n_err,
            history,
            final_eval: ev,
        };
        let pairs = |h: &[MuStep]| h.iter().map(|s| (s.mu, s.n_err)).collect::<Vec<_>>();

        let mut prev = run(opts.mu_init, &mut history).map_err(|e| e.in_part("VI", "mu iteration 0"))?;
        if prev.n_err.abs() < opts.eps_conv {
            return Ok(finish(prev, history));
        }
        let mut cur = run(opts.mu_init + opts.mu_step, &mut history)?;
        while history.len() < opts.max_mu_iter {
            if cur.n_err.abs() < opts.eps_conv {
                return Ok(finish(cur, history));
            }
            let slope = (cur.n_err - prev.n_err) / (cur.mu - prev.mu);
            let next = cur.mu - cur.n_err / slope;
            if !next.is_finite() || (next - cur.mu).abs() < 1e-14 {
                return Err(EmberError::SecantStall { mu: cur.mu, n_err: cur.n_err, history: pairs(&history) });
            }
            if next.abs() > opts.mu_max {
                return Err(EmberError::Divergence { mu: next, history: pairs(&history) });
            }
            prev = cur;
            cur = run(next, &mut history)?;
        }
        if cur.n_err.abs() < opts.eps_conv {
            return Ok(finish(cur, history));
        }
        Err(EmberError::NoConvergence {
            what: "chemical potential",
            iterations: opts.max_mu_iter,
            residual: cur.n_err.abs(),
        })
    }
}
