//! Subcommand bodies. Each reads the resolved config and writes records.

use num_bigint::BigInt;
use num_rational::BigRational;
use pam_core::chaos::log_gamma_n;
use pam_core::initial::j0_with_error;
use pam_core::mc::{chaos_norm_estimate_direct, verify_psi_bound, verify_term_bound, McBudget};
use pam_core::moments::bound_table;
use pam_core::params::admissible_grid;
use pam_core::paths::{enumerate_exponent_vectors, expand_and_verify_identity, for_each_exponent_vector, path_of};
use pam_core::simplex::{brute_force, check_conditions, closed_form, OracleMethod, SimplexIntegralSpec};
use pam_core::Params;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::RunConfig;
use crate::criteria;
use crate::output::{Cell, Sink};
use crate::CliError;

/// Largest `n` the `paths` and `gamma-scan` commands accept.
pub const MAX_LIST_N: usize = 20;
/// Relative disagreement tolerated between closed form and oracle.
pub const DIRICHLET_TOL: f64 = 1e-6;
/// Ordered time tuples per `mc-verify` comparison of `ψ(t,t)`.
pub const PSI_TUPLES: usize = 10;
/// Stream reserved for the psi comparison time tuples, away from the sampling batches.
const PSI_STREAM: u64 = 1 << 62;

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn dispatch(command: &str, cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    match command {
        "paths" => paths(cfg, sink),
        "identity" => identity(cfg, sink),
        "gamma-scan" => gamma_scan(cfg, sink),
        "dirichlet" => dirichlet(cfg, sink),
        "j0" => j0_table(cfg, sink),
        "bound-table" => bound(cfg, sink),
        "mc-verify" => mc_verify(cfg, sink),
        "selfcheck" => selfcheck(cfg, sink),
        other => Err(CliError::Usage(format!("unknown command {other}"))),
    }
}

fn digits(a: &[u8]) -> String {
    a.iter().map(|d| char::from(b'0' + d)).collect()
}

fn ints<T: Copy + Into<i64>>(v: &[T]) -> Cell {
    Cell::Ints(v.iter().map(|&x| x.into()).collect())
}

fn check_n(name: &str, n: usize, max: usize) -> Result<usize, CliError> {
    if (1..=max).contains(&n) {
        Ok(n)
    } else {
        Err(CliError::Usage(format!("{name} = {n} outside 1..={max}")))
    }
}

fn paths(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let n = check_n("n", cfg.n.unwrap_or(4), MAX_LIST_N)?;
    for a in enumerate_exponent_vectors(n).map_err(usage)? {
        let heights: Vec<i64> = path_of(&a).heights().iter().map(|&h| h as i64).collect();
        sink.record(&[("n", Cell::Int(n as i64)), ("a", ints(a.as_slice())), ("path_heights", Cell::Ints(heights))])?;
    }
    Ok(())
}

/// Positive rational with numerator and denominator in `1..1000`.
pub fn random_rational(rng: &mut impl Rng) -> BigRational {
    BigRational::new(BigInt::from(rng.random_range(1..1000_i64)), BigInt::from(rng.random_range(1..1000_i64)))
}

fn identity(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let orders: Vec<usize> = match cfg.n {
        Some(n) => vec![n],
        None => (2..=12).collect(),
    };
    let count = cfg.count.unwrap_or(200);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
    let mut failed = Vec::new();
    for n in orders {
        let mut mismatches = 0;
        for _ in 0..count {
            let xs: Vec<BigRational> = (0..n).map(|_| random_rational(&mut rng)).collect();
            let (lhs, rhs) = expand_and_verify_identity(&xs).map_err(usage)?;
            mismatches += usize::from(lhs != rhs);
        }
        let mut size = 0_u64;
        for_each_exponent_vector(n, |_| size += 1).map_err(usage)?;
        let size_ok = size == 1 << (n - 1);
        if mismatches > 0 || !size_ok {
            failed.push(n);
        }
        sink.record(&[
            ("n", Cell::Int(n as i64)),
            ("inputs", Cell::Int(count as i64)),
            ("mismatches", Cell::Int(mismatches as i64)),
            ("card_a_n", Cell::Int(size as i64)),
            ("pass", Cell::Bool(mismatches == 0 && size_ok)),
        ])?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("identity mismatch at n = {failed:?}")))
    }
}

fn scan_params(cfg: &RunConfig, grid: usize) -> Result<Vec<Params>, CliError> {
    if cfg.h0.is_some() || cfg.h.is_some() {
        Ok(vec![cfg.params()?])
    } else {
        Ok(admissible_grid(grid, grid))
    }
}

fn gamma_scan(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let n_max = check_n("n_max", cfg.n_max.unwrap_or(8), MAX_LIST_N)?;
    let grid = cfg.grid.unwrap_or(5).max(1);
    for p in scan_params(cfg, grid)? {
        for n in 1..=n_max {
            for a in enumerate_exponent_vectors(n).map_err(usage)? {
                let lg = log_gamma_n(&a, &p).map_err(usage)?;
                sink.record(&[
                    ("n", Cell::Int(n as i64)),
                    ("H0", Cell::Float(p.h0())),
                    ("H", Cell::Float(p.h())),
                    ("a", Cell::Text(digits(a.as_slice()))),
                    ("gamma_n", Cell::Float(lg.exp())),
                    ("log_gamma_n", Cell::Float(lg)),
                ])?;
            }
        }
    }
    Ok(())
}

fn dirichlet(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let t = match cfg.t.as_deref() {
        None => 1.0,
        Some([t]) => *t,
        Some(_) => return Err(CliError::Usage("dirichlet takes a single t".into())),
    };
    let alphas = cfg.alphas.clone().unwrap_or_else(|| vec![1.0]);
    let betas = cfg.betas.clone().unwrap_or_else(|| vec![1.0]);
    let spec = SimplexIntegralSpec::new(t, alphas, betas);
    check_conditions(&spec).map_err(usage)?;
    let cf = closed_form(&spec).map_err(usage)?;
    let mut report = json!({
        "t": t,
        "alphas": spec.alphas,
        "betas": spec.betas,
        "value": cf.value,
        "log_value": cf.log_value,
    });
    let mut agree = true;
    if cfg.oracle.unwrap_or(false) {
        let method = if spec.n() <= 3 {
            OracleMethod::NestedQuadrature { rel_tol: 1e-10, max_level: 10 }
        } else {
            OracleMethod::MonteCarlo { samples: 1_000_000, seed: cfg.seed.unwrap_or(0), target_rel_err: 1e-3 }
        };
        let o = brute_force(&spec, method).map_err(usage)?;
        let rel = ((o.estimate - cf.value) / cf.value).abs();
        // sampling oracles are judged on their own error bar
        let tol = DIRICHLET_TOL.max(4.0 * o.error_bound / cf.value.abs());
        agree = rel <= tol;
        report["oracle"] = json!({
            "estimate": o.estimate,
            "error_bound": o.error_bound,
            "converged": o.converged,
            "rel_diff": rel,
            "tolerance": tol,
            "agree": agree,
        });
    }
    sink.json(&report)?;
    if agree {
        Ok(())
    } else {
        Err(CliError::Failed("closed form and oracle disagree".into()))
    }
}

fn j0_table(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let measure = cfg.measure()?;
    let x = cfg.x.unwrap_or(0.0);
    for t in cfg.times(&[1.0]) {
        let v = j0_with_error(t, x, &measure).map_err(usage)?;
        sink.record(&[
            ("t", Cell::Float(t)),
            ("x", Cell::Float(x)),
            ("j0", Cell::Float(v.value)),
            ("error_estimate", Cell::Float(v.error_estimate)),
            ("oracle_grade", Cell::Bool(v.oracle_grade)),
        ])?;
    }
    Ok(())
}

fn bound(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let params = cfg.params()?;
    let measure = cfg.measure()?;
    let ps = cfg.p.clone().unwrap_or_else(|| vec![2.0]);
    let ts = cfg.times(&[1.0, 2.0, 4.0, 8.0]);
    let table = bound_table(&ps, &ts, cfg.x.unwrap_or(0.0), &params, &measure, cfg.c.unwrap_or(1.0)).map_err(usage)?;
    for r in &table.rows {
        sink.record(&[
            ("t", Cell::Float(r.t)),
            ("p", Cell::Float(r.p)),
            ("series_value", Cell::Float(r.series_value)),
            ("envelope_value", Cell::Float(r.envelope_value)),
            ("C1", Cell::Float(table.fit.c1)),
            ("C2", Cell::Float(table.fit.c2)),
            ("log_series_value", Cell::Float(r.log_series_value)),
            ("log_envelope_value", Cell::Float(r.log_envelope_value)),
            ("truncation_index", Cell::Int(r.truncation_index as i64)),
        ])?;
    }
    Ok(())
}

/// `count` strictly ordered `n`-tuples in `(0, t)`.
pub fn random_ordered_times(n: usize, t: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(PSI_STREAM);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut v: Vec<f64> = (0..n).map(|_| t * rng.random::<f64>()).collect();
        v.sort_by(f64::total_cmp);
        if v[0] > 0.0 && v.windows(2).all(|w| w[0] < w[1]) {
            out.push(v);
        }
    }
    out
}

fn mc_verify(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let params = cfg.params()?;
    let measure = cfg.measure()?;
    let n = cfg.n.unwrap_or(1);
    let x = cfg.x.unwrap_or(0.0);
    let seed = cfg.seed.unwrap_or(0);
    let budget = McBudget::new(cfg.samples.unwrap_or(200_000), cfg.workers.unwrap_or(1));
    let mut all_pass = true;
    let mut points = Vec::new();
    for t in cfg.times(&[1.0]) {
        let report = verify_term_bound(n, t, x, &params, &measure, &budget, seed).map_err(usage)?;
        let direct = chaos_norm_estimate_direct(n, t, x, &params, &measure, &budget, seed).map_err(usage)?;
        let mut checks = Vec::with_capacity(PSI_TUPLES);
        let mut psi_pass = true;
        for times in random_ordered_times(n, t, PSI_TUPLES, seed) {
            let c = verify_psi_bound(&times, t, x, &params, &measure).map_err(usage)?;
            psi_pass &= c.pass;
            checks.push(json!({ "times": times, "check": c }));
        }
        all_pass &= report.pass && psi_pass;
        points.push(json!({
            "t": t,
            "term_bound": report,
            "direct_estimate": direct,
            "psi_checks": checks,
            "psi_pass": psi_pass,
        }));
    }
    sink.json(&json!({
        "n": n,
        "x": x,
        "H0": params.h0(),
        "H": params.h(),
        "b_H0": params.lhs_constant(),
        "measure": measure,
        "samples": budget.samples,
        "workers": budget.workers,
        "seed": seed,
        "points": points,
        "pass": all_pass,
    }))?;
    if all_pass {
        Ok(())
    } else {
        Err(CliError::Failed("estimate above bound or psi(t,t) comparison failed".into()))
    }
}

fn selfcheck(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let workers = cfg.workers.unwrap_or(1);
    let runner = move || criteria::mc_verify_in_process(workers);
    let mut failed = Vec::new();
    for id in criteria::IDS {
        let o = criteria::evaluate(id, workers, &runner);
        sink.text(&o.line())?;
        if !o.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("criteria {failed:?}")))
    }
}
