//! Sweeps over matrix families.
//!
//! A sweep is split into jobs, one per (matrix cell, trial). Jobs run on a
//! small thread pool; each job's rows land in its own slot, so the output
//! order is the config order no matter which job finishes first.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use stable_krylov::linalg::vector::norm2;
use stable_krylov::linalg::{cond2, lu_factor, residual, CsrMatrix, DenseMatrix, LinearOperator};
use stable_krylov::matgen::{hilbert, random_rhs, random_symmetric_cond, RandomMatrixSpec};
use stable_krylov::mmio::read_matrix_market;
use stable_krylov::rng::derive_seed;
use stable_krylov::{krylov_solve, Method, StepPolicy};

use crate::config::{ExperimentConfig, Family, Instances, LU_DENSE_LIMIT};
use crate::rows::ResultRow;
use crate::BenchError;

/// Hilbert matrices beyond this order have eigenvalues below double
/// resolution, so no condition number is reported for them.
pub const HILBERT_COND_LIMIT: usize = 10;

/// Seed of the right-hand side for a random-family trial whose matrix seed
/// is `seed`.
pub fn random_rhs_seed(seed: u64) -> u64 {
    derive_seed(seed, 0, 1)
}

struct Instance<'a> {
    family: Family,
    a: &'a dyn LinearOperator,
    dense: Option<&'a DenseMatrix>,
    cond: Option<f64>,
    seed: u64,
    b: Vec<f64>,
}

fn solve_rows(cfg: &ExperimentConfig, inst: &Instance<'_>) -> Result<Vec<ResultRow>, BenchError> {
    let n = inst.b.len();
    let row = |method: &str, policy: &str| ResultRow {
        family: inst.family.as_str().to_string(),
        n,
        cond: inst.cond,
        method: method.to_string(),
        policy: policy.to_string(),
        seed: inst.seed,
        solution_norm: f64::NAN,
        residual_norm: f64::NAN,
        iterations: 0,
        termination: String::new(),
        elapsed_s: 0.0,
        fallbacks: 0,
    };
    let mut out = Vec::with_capacity(cfg.methods.len() * cfg.policies.len() + 1);
    for &method in &cfg.methods {
        for &policy in &cfg.policies {
            let rep = krylov_solve(inst.a, &inst.b, method, &cfg.overrides.options(policy))?;
            out.push(ResultRow {
                solution_norm: norm2(&rep.x),
                residual_norm: rep.final_true_residual,
                iterations: rep.iterations,
                termination: rep.termination.as_str().to_string(),
                elapsed_s: if cfg.timing {
                    rep.elapsed.as_secs_f64()
                } else {
                    0.0
                },
                fallbacks: rep.fallback_count,
                ..row(method.name(), policy.name())
            });
        }
    }
    if let Some(dense) = inst.dense.filter(|_| cfg.lu_baseline) {
        let start = std::time::Instant::now();
        let solved = lu_factor(dense).and_then(|f| f.solve(&inst.b));
        let elapsed = start.elapsed().as_secs_f64();
        let mut r = row("lu", "direct");
        match solved {
            Ok(x) => {
                r.residual_norm = norm2(&residual(dense, &inst.b, &x));
                r.solution_norm = norm2(&x);
                r.termination = "converged".into();
            }
            Err(_) => r.termination = "breakdown".into(),
        }
        if cfg.timing {
            r.elapsed_s = elapsed;
        }
        out.push(r);
    }
    Ok(out)
}

/// Runs `count` jobs on up to `threads` workers and concatenates their rows
/// in job order.
fn run_jobs<F>(count: usize, threads: usize, job: F) -> Result<Vec<ResultRow>, BenchError>
where
    F: Fn(usize) -> Result<Vec<ResultRow>, BenchError> + Sync,
{
    let slots: Mutex<Vec<Option<Result<Vec<ResultRow>, BenchError>>>> =
        Mutex::new((0..count).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = threads.clamp(1, count.max(1));
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= count {
                    break;
                }
                let result = job(k);
                slots.lock().unwrap()[k] = Some(result);
            });
        }
    });
    let mut rows = Vec::new();
    for slot in slots.into_inner().unwrap() {
        rows.extend(slot.expect("every job ran")?);
    }
    Ok(rows)
}

fn thread_count(cfg: &ExperimentConfig) -> usize {
    cfg.threads
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn run_hilbert_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, BenchError> {
    cfg.validate()?;
    let Instances::Hilbert { n_values } = &cfg.instances else {
        return Err(BenchError::Config("expected a hilbert config".into()));
    };
    let mut mats = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let h = hilbert(n)?;
        let cond = if n <= HILBERT_COND_LIMIT {
            Some(cond2(&h)?)
        } else {
            None
        };
        mats.push((h, cond));
    }
    let trials = cfg.trials as usize;
    run_jobs(mats.len() * trials, thread_count(cfg), |k| {
        let (cell, trial) = (k / trials, k % trials);
        let (a, cond) = &mats[cell];
        let seed = derive_seed(cfg.base_seed, trial as u32, cell as u32);
        solve_rows(
            cfg,
            &Instance {
                family: Family::Hilbert,
                a,
                dense: Some(a),
                cond: *cond,
                seed,
                b: random_rhs(a.rows(), seed),
            },
        )
    })
}

pub fn run_random_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, BenchError> {
    cfg.validate()?;
    let Instances::Random {
        n,
        cond_values,
        indefinite,
    } = &cfg.instances
    else {
        return Err(BenchError::Config("expected a random config".into()));
    };
    let trials = cfg.trials as usize;
    run_jobs(cond_values.len() * trials, thread_count(cfg), |k| {
        let (cell, trial) = (k / trials, k % trials);
        let c = cond_values[cell];
        let seed = derive_seed(cfg.base_seed, trial as u32, cell as u32);
        let spec = if *indefinite {
            RandomMatrixSpec::indefinite(*n, c, seed)
        } else {
            RandomMatrixSpec::spd(*n, c, seed)
        };
        let a = random_symmetric_cond(&spec)?;
        solve_rows(
            cfg,
            &Instance {
                family: Family::Random,
                a: &a,
                dense: Some(&a),
                cond: Some(c),
                seed,
                b: random_rhs(*n, random_rhs_seed(seed)),
            },
        )
    })
}

pub fn load_matrix(path: &Path) -> Result<CsrMatrix, BenchError> {
    let file = File::open(path).map_err(|e| BenchError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    read_matrix_market(BufReader::new(file)).map_err(|e| BenchError::Matrix {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn run_file_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, BenchError> {
    cfg.validate()?;
    let Instances::Files { paths } = &cfg.instances else {
        return Err(BenchError::Config("expected a file config".into()));
    };
    let mut mats = Vec::with_capacity(paths.len());
    for path in paths {
        let csr = load_matrix(path)?;
        if csr.rows() != csr.cols() {
            return Err(BenchError::Config(format!(
                "{}: matrix is {}x{}, not square",
                path.display(),
                csr.rows(),
                csr.cols()
            )));
        }
        let dense = (cfg.lu_baseline && csr.rows() <= LU_DENSE_LIMIT).then(|| csr.to_dense());
        mats.push((csr, dense));
    }
    let trials = cfg.trials as usize;
    run_jobs(mats.len() * trials, thread_count(cfg), |k| {
        let (cell, trial) = (k / trials, k % trials);
        let (csr, dense) = &mats[cell];
        let seed = derive_seed(cfg.base_seed, trial as u32, cell as u32);
        solve_rows(
            cfg,
            &Instance {
                family: Family::File,
                a: csr,
                dense: dense.as_ref(),
                cond: None,
                seed,
                b: random_rhs(csr.rows(), seed),
            },
        )
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, BenchError> {
    match cfg.family() {
        Family::Hilbert => run_hilbert_sweep(cfg),
        Family::Random => run_random_sweep(cfg),
        Family::File => run_file_experiment(cfg),
    }
}

/// Method list from a comma-separated string such as `cg,gmres:30`.
pub fn parse_methods(s: &str) -> Result<Vec<Method>, BenchError> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(Method::ALL.to_vec());
    }
    s.split(',')
        .map(|m| m.parse().map_err(BenchError::Config))
        .collect()
}

pub fn parse_policies(s: &str) -> Result<Vec<StepPolicy>, BenchError> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(crate::config::all_policies());
    }
    s.split(',')
        .map(|p| p.trim().parse().map_err(BenchError::Config))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(n_values: Vec<usize>) -> ExperimentConfig {
        ExperimentConfig {
            trials: 3,
            methods: vec![Method::Cg, Method::gmres()],
            ..ExperimentConfig::hilbert(n_values)
        }
    }

    #[test]
    fn rows_follow_config_order() {
        let rows = run_hilbert_sweep(&small(vec![3, 4])).unwrap();
        // 2 sizes × 3 trials × (2 methods × 3 policies + lu)
        assert_eq!(rows.len(), 2 * 3 * 7);
        assert_eq!(rows[0].n, 3);
        assert_eq!((rows[0].method.as_str(), rows[0].policy.as_str()), ("cg", "classic"));
        assert_eq!((rows[6].method.as_str(), rows[6].policy.as_str()), ("lu", "direct"));
        assert_eq!(rows[21].n, 4);
        assert!(rows.iter().all(|r| r.cond.is_some()));
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let one = run_hilbert_sweep(&ExperimentConfig {
            threads: Some(1),
            ..small(vec![2, 6])
        })
        .unwrap();
        let four = run_hilbert_sweep(&ExperimentConfig {
            threads: Some(4),
            ..small(vec![2, 6])
        })
        .unwrap();
        assert_eq!(format!("{one:?}"), format!("{four:?}"));
    }

    #[test]
    fn one_by_one_system_is_solved() {
        let cfg = ExperimentConfig {
            overrides: crate::config::SolveOverrides {
                rtol: Some(1e-12),
                ..Default::default()
            },
            ..ExperimentConfig::hilbert(vec![1])
        };
        let rows = run_hilbert_sweep(&cfg).unwrap();
        let mean_b: f64 = (0..cfg.trials)
            .map(|t| norm2(&random_rhs(1, derive_seed(cfg.base_seed, t, 0))))
            .sum::<f64>()
            / cfg.trials as f64;
        let summary = crate::rows::summarize(&rows);
        for s in &summary {
            assert!(s.mean_residual_norm <= 1e-12 * mean_b, "{}", s.series());
        }
    }

    #[test]
    fn unit_condition_converges_quickly() {
        let cfg = ExperimentConfig {
            trials: 2,
            ..ExperimentConfig::random(40, vec![1.0])
        };
        for r in run_random_sweep(&cfg).unwrap() {
            assert_eq!(r.termination, "converged", "{}", r.series());
            assert!(r.iterations <= 3, "{} took {}", r.series(), r.iterations);
        }
    }

    #[test]
    fn seeds_are_distinct_across_cells_and_trials() {
        let rows = run_hilbert_sweep(&small(vec![2, 3, 4])).unwrap();
        let mut seeds: Vec<u64> = rows.iter().map(|r| r.seed).collect();
        seeds.dedup();
        let unique: std::collections::HashSet<u64> = seeds.iter().copied().collect();
        assert_eq!(unique.len(), 9);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = small(vec![3]);
        cfg.trials = 0;
        assert!(run_hilbert_sweep(&cfg).is_err());
        let mut cfg = small(vec![3]);
        cfg.methods.clear();
        assert!(run_hilbert_sweep(&cfg).is_err());
        assert!(run_random_sweep(&small(vec![3])).is_err());
    }

    #[test]
    fn method_and_policy_lists() {
        assert_eq!(parse_methods("all").unwrap().len(), 7);
        assert_eq!(
            parse_methods("cg,gmres:5").unwrap(),
            vec![Method::Cg, Method::Gmres { restart: 5 }]
        );
        assert!(parse_methods("cg,nope").is_err());
        assert_eq!(parse_policies("classic, twodim").unwrap().len(), 2);
    }
}
