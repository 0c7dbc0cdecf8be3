//! Run configuration (TOML).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dmet::{DmetOptions, SamplerOptions, SamplerSource, SolverKind};
use crate::error::{EmberError, Result};
use crate::meanfield::ScfOptions;
use crate::sqd::SqdOptions;

/// How orbitals are grouped into fragments.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FragmentationSpec", into = "FragmentationSpec")]
pub enum Fragmentation {
    /// One fragment per atom.
    #[default]
    PerAtom,
    /// Explicit orbital index lists in the localized basis.
    Explicit(Vec<Vec<usize>>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum FragmentationSpec {
    Name(String),
    Orbitals(Vec<Vec<usize>>),
}

impl TryFrom<FragmentationSpec> for Fragmentation {
    type Error = String;
    fn try_from(s: FragmentationSpec) -> std::result::Result<Self, String> {
        match s {
            FragmentationSpec::Name(n) if n == "per_atom" => Ok(Fragmentation::PerAtom),
            FragmentationSpec::Name(n) => {
                Err(format!("unknown fragmentation '{n}' (expected \"per_atom\" or orbital lists)"))
            }
            FragmentationSpec::Orbitals(v) => Ok(Fragmentation::Explicit(v)),
        }
    }
}

impl From<Fragmentation> for FragmentationSpec {
    fn from(f: Fragmentation) -> Self {
        match f {
            Fragmentation::PerAtom => FragmentationSpec::Name("per_atom".into()),
            Fragmentation::Explicit(v) => FragmentationSpec::Orbitals(v),
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("ember-out")
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub bundle_path: PathBuf,
    /// Molecule label for reports; defaults to the bundle's formula.
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub fragmentation: Fragmentation,
    /// Overrides `dmet.solver` when present.
    #[serde(default)]
    pub solver: Option<SolverKind>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Sets both `sampler.seed` and `sqd.seed` when present.
    #[serde(default)]
    pub seed: Option<u64>,
    /// With the sampled solver, also run the exact solver and report the difference.
    #[serde(default)]
    pub compare_fci: bool,
    #[serde(default)]
    pub scf: ScfOptions,
    #[serde(default)]
    pub sampler: SamplerOptions,
    #[serde(default)]
    pub sqd: SqdOptions,
    #[serde(default)]
    pub dmet: DmetOptions,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl RunConfig {
    pub fn new(bundle_path: impl Into<PathBuf>) -> Self {
        RunConfig {
            bundle_path: bundle_path.into(),
            label: None,
            fragmentation: Fragmentation::PerAtom,
            solver: None,
            output_dir: default_output_dir(),
            seed: None,
            compare_fci: false,
            scf: ScfOptions::default(),
            sampler: SamplerOptions::default(),
            sqd: SqdOptions::default(),
            dmet: DmetOptions::default(),
        }
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| EmberError::parse(source, e.to_string()))
    }

    /// Load a config file; relative paths are taken relative to its directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| EmberError::io(path, e))?;
        let mut cfg = Self::parse(&text, &path.display().to_string())?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.bundle_path = resolve(base, &cfg.bundle_path);
        cfg.output_dir = resolve(base, &cfg.output_dir);
        let fix = |s: &mut Option<String>| {
            if let Some(v) = s {
                *v = resolve(base, Path::new(v.as_str())).display().to_string();
            }
        };
        fix(&mut cfg.sampler.file);
        fix(&mut cfg.sampler.amplitudes);
        Ok(cfg)
    }

    pub fn effective_solver(&self) -> SolverKind {
        self.solver.unwrap_or(self.dmet.solver)
    }

    /// Fold the top-level seed and solver into the module sections.
    pub fn normalized(mut self) -> Self {
        if let Some(s) = self.seed {
            self.sampler.seed = s;
            self.sqd.seed = s;
        }
        self.dmet.solver = self.effective_solver();
        self.solver = Some(self.dmet.solver);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(EmberError::Invalid(m));
        if !self.bundle_path.is_file() {
            return bad(format!("bundle {} does not exist", self.bundle_path.display()));
        }
        if let Fragmentation::Explicit(f) = &self.fragmentation {
            if f.is_empty() {
                return bad("empty fragment list".into());
            }
        }
        let s = &self.sampler;
        if s.shots == 0 {
            return bad("sampler.shots must be positive".into());
        }
        if !(0.0..=1.0).contains(&s.noise_p) {
            return bad(format!("sampler.noise_p = {} outside [0, 1]", s.noise_p));
        }
        if s.source == SamplerSource::File && s.file.is_none() {
            return bad("sampler.source = \"file\" needs sampler.file".into());
        }
        for p in [&s.file, &s.amplitudes].into_iter().flatten() {
            if !p.contains("{frag}") && !Path::new(p).is_file() {
                return bad(format!("{p} does not exist"));
            }
        }
        if self.sqd.batches == 0 || self.sqd.batch_cap == 0 {
            return bad("sqd.batches and sqd.batch_cap must be positive".into());
        }
        if [self.sqd.davidson_tol, self.dmet.eps_conv].iter().any(|t| t.is_nan() || *t <= 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.dmet.max_mu_iter < 2 {
            return bad("dmet.max_mu_iter must be at least 2".into());
        }
        Ok(())
    }
}
