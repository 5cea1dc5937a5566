use std::path::PathBuf;

use stable_krylov::{Method, PreconditionerKind, SolveOptions, StepPolicy};

use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Hilbert,
    Random,
    File,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Hilbert => "hilbert",
            Family::Random => "random",
            Family::File => "file",
        }
    }
}

/// The matrices a sweep runs over.
#[derive(Debug, Clone, PartialEq)]
pub enum Instances {
    Hilbert {
        n_values: Vec<usize>,
    },
    Random {
        n: usize,
        cond_values: Vec<f64>,
        indefinite: bool,
    },
    Files {
        paths: Vec<PathBuf>,
    },
}

/// Per-run solver settings; `None` keeps the library default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveOverrides {
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub maxiter: Option<usize>,
    pub preconditioner: PreconditionerKind,
    pub check_invariants: bool,
}

impl SolveOverrides {
    pub fn options(&self, policy: StepPolicy) -> SolveOptions {
        let mut opts = SolveOptions::with_policy(policy);
        if let Some(rtol) = self.rtol {
            opts.rtol = rtol;
        }
        if let Some(atol) = self.atol {
            opts.atol = atol;
        }
        opts.maxiter = self.maxiter;
        opts.preconditioner = self.preconditioner;
        opts.invariant_checks = self.check_invariants;
        opts
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub instances: Instances,
    pub trials: u32,
    pub base_seed: u64,
    pub methods: Vec<Method>,
    pub policies: Vec<StepPolicy>,
    pub overrides: SolveOverrides,
    /// Adds a dense LU solve per trial, reported as method `lu`, policy `direct`.
    pub lu_baseline: bool,
    /// Record wall-clock time in `elapsed_s`. Off by default so that reruns
    /// are byte-identical.
    pub timing: bool,
    /// Worker threads; `None` uses the available parallelism.
    pub threads: Option<usize>,
    pub out_dir: PathBuf,
}

pub const DEFAULT_TRIALS: u32 = 10;
pub const DEFAULT_SEED: u64 = 20_250_101;
pub const DEFAULT_RANDOM_N: usize = 200;
pub const DEFAULT_CONDS: [f64; 4] = [1e2, 1e6, 1e10, 1e13];

/// Files above this order are not densified for the LU baseline.
pub const LU_DENSE_LIMIT: usize = 2000;

pub fn default_hilbert_sizes() -> Vec<usize> {
    (1..=20).chain([50, 100, 200, 300, 500]).collect()
}

pub fn all_policies() -> Vec<StepPolicy> {
    vec![
        StepPolicy::Classic,
        StepPolicy::line_search(),
        StepPolicy::two_dim(),
    ]
}

impl ExperimentConfig {
    fn base(instances: Instances) -> Self {
        Self {
            instances,
            trials: DEFAULT_TRIALS,
            base_seed: DEFAULT_SEED,
            methods: Method::ALL.to_vec(),
            policies: all_policies(),
            overrides: SolveOverrides::default(),
            lu_baseline: false,
            timing: false,
            threads: None,
            out_dir: PathBuf::from("results"),
        }
    }

    pub fn hilbert(n_values: Vec<usize>) -> Self {
        Self {
            lu_baseline: true,
            ..Self::base(Instances::Hilbert { n_values })
        }
    }

    pub fn random(n: usize, cond_values: Vec<f64>) -> Self {
        Self::base(Instances::Random {
            n,
            cond_values,
            indefinite: false,
        })
    }

    pub fn files(paths: Vec<PathBuf>) -> Self {
        Self {
            lu_baseline: true,
            ..Self::base(Instances::Files { paths })
        }
    }

    pub fn default_hilbert() -> Self {
        Self::hilbert(default_hilbert_sizes())
    }

    pub fn default_random() -> Self {
        Self::random(DEFAULT_RANDOM_N, DEFAULT_CONDS.to_vec())
    }

    pub fn family(&self) -> Family {
        match self.instances {
            Instances::Hilbert { .. } => Family::Hilbert,
            Instances::Random { .. } => Family::Random,
            Instances::Files { .. } => Family::File,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: &str| Err(BenchError::Config(msg.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.methods.is_empty() {
            return bad("no methods selected");
        }
        if self.policies.is_empty() {
            return bad("no policies selected");
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1");
        }
        match &self.instances {
            Instances::Hilbert { n_values } => {
                if n_values.is_empty() || n_values.contains(&0) {
                    return bad("hilbert sizes must be non-empty and positive");
                }
            }
            Instances::Random { n, cond_values, .. } => {
                if *n == 0 {
                    return bad("random n must be positive");
                }
                if cond_values.is_empty() || cond_values.iter().any(|c| !(*c >= 1.0)) {
                    return bad("condition numbers must be non-empty and >= 1");
                }
            }
            Instances::Files { paths } => {
                if paths.is_empty() {
                    return bad("no matrix files given");
                }
            }
        }
        Ok(())
    }
}

/// The two sweeps making up the default benchmark.
pub fn default_configs() -> Vec<ExperimentConfig> {
    vec![
        ExperimentConfig::default_hilbert(),
        ExperimentConfig::default_random(),
    ]
}
