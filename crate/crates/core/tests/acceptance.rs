//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use outlier_order::cli;
use outlier_order::estimation::{estimate_alpha_from_data, estimate_alpha_from_frequency};
use outlier_order::lln::scaling_exponent_experiment;
use outlier_order::probability::{
    boundary_ratio, check_theorem_conditions, exact_probability, joint_oracle_probability, limit_probability,
    mc_probability,
};
use outlier_order::{make_exponential, make_half_cauchy, make_half_normal, make_pareto, make_symmetric_stable, Seed};
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// |P_n - kappa^alpha| < 1e-8 on the full Pareto grid.
fn pareto_exactness() -> Outcome {
    let mut worst: f64 = 0.0;
    for alpha in [0.5, 1.0, 1.5, 2.0] {
        let fam = make_pareto(alpha, 1.0).unwrap();
        for kappa in [0.25, 0.5, 0.75] {
            for n in [2, 10, 100, 1_000, 10_000] {
                let p = exact_probability(&fam, n, kappa).map_err(|e| e.to_string())?;
                let err = (p.value - kappa.powf(alpha)).abs();
                if err >= 1e-8 {
                    return Err(format!("alpha={alpha} kappa={kappa} n={n}: error {err:.3e}"));
                }
                worst = worst.max(err);
            }
        }
    }
    Ok(format!("60 cases, max error {worst:.3e} < 1e-8"))
}

/// Half-Cauchy, kappa = 0.5: P_n moves monotonically toward 0.5 and
/// |P_1e4 - 0.5| < |P_10 - 0.5| / 10.
fn half_cauchy_convergence() -> Outcome {
    let fam = make_half_cauchy(1.0).unwrap();
    let ns = [10, 100, 1_000, 10_000];
    let ps: Vec<f64> = ns
        .iter()
        .map(|&n| exact_probability(&fam, n, 0.5).map(|r| r.value))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let errs: Vec<f64> = ps.iter().map(|p| (p - 0.5).abs()).collect();
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    let same_side = ps.iter().all(|&p| p > 0.5) || ps.iter().all(|&p| p < 0.5);
    let tenfold = errs[3] < errs[0] / 10.0;
    check(
        decreasing && same_side && tenfold,
        format!(
            "P_n = [{}], |P_n - 0.5| = [{}]",
            ps.iter().map(|p| format!("{p:.8}")).collect::<Vec<_>>().join(", "),
            errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

/// Quadrature, joint-density oracle and Monte Carlo (1e5 trials, 3 SE)
/// agree pairwise on Pareto and half-Cauchy for n <= 8.
fn cross_method_agreement() -> Outcome {
    let families = [
        make_pareto(1.5, 1.0).unwrap(),
        make_pareto(1.0, 1.0).unwrap(),
        make_half_cauchy(1.0).unwrap(),
    ];
    let kappa = 0.5;
    let mut lines = Vec::new();
    for (fi, fam) in families.iter().enumerate() {
        for n in [2, 4, 8] {
            let q = exact_probability(fam, n, kappa).map_err(|e| e.to_string())?;
            let o = joint_oracle_probability(fam, n, kappa).map_err(|e| e.to_string())?;
            let seed = Seed(0x5eed_0000 + (fi * 100 + n) as u64);
            let m = mc_probability(fam, n, kappa, 100_000, seed, 0.95).map_err(|e| e.to_string())?;
            let qo = (q.value - o.value).abs() <= q.error_estimate + o.error_estimate + 1e-12;
            let qm = (q.value - m.value).abs() <= 3.0 * m.error_estimate + q.error_estimate;
            let om = (o.value - m.value).abs() <= 3.0 * m.error_estimate + o.error_estimate;
            let line = format!("{fam} n={n}: quad {:.10} oracle {:.10} mc {:.5}±{:.5}", q.value, o.value, m.value, m.error_estimate);
            if !(qo && qm && om) {
                return Err(line);
            }
            lines.push(line);
        }
    }
    Ok(format!("{} configurations agree; e.g. {}", lines.len(), lines[2]))
}

/// Round trip to 1e-12, and 95% CI coverage of alpha = 1.5 in at least 180
/// of 200 Pareto replications (1e5 values, n = 100, kappa = 0.5).
fn estimator_round_trip_and_coverage() -> Outcome {
    for alpha in [0.3, 0.6, 1.0, 1.5, 1.9] {
        for kappa in [0.2, 0.5, 0.8] {
            let p = limit_probability(kappa, alpha).unwrap();
            let est = estimate_alpha_from_frequency(p, kappa, 1000, 0.95).map_err(|e| e.to_string())?;
            if (est.alpha_hat - alpha).abs() >= 1e-12 {
                return Err(format!("round trip alpha={alpha} kappa={kappa}: {}", est.alpha_hat));
            }
        }
    }
    let fam = make_pareto(1.5, 1.0).unwrap();
    let base = Seed(20_240_601);
    let covered = (0..200u64)
        .into_par_iter()
        .map(|r| {
            let data = fam.sample(100_000, base.derive(r)).unwrap();
            let est = estimate_alpha_from_data(&data, 100, 0.5, 0.95).unwrap();
            usize::from(est.ci.0 <= 1.5 && 1.5 <= est.ci.1)
        })
        .sum::<usize>();
    check(covered >= 180, format!("round trip exact to 1e-12; coverage {covered}/200 (need >= 180)"))
}

/// Light tails: P_1e4(0.5) < 0.01 and the boundary ratio at large x < 1e-3.
fn light_tail_control() -> Outcome {
    let mut parts = Vec::new();
    for (fam, x) in [(make_exponential(1.0).unwrap(), 20.0), (make_half_normal(1.0).unwrap(), 10.0)] {
        let p = exact_probability(&fam, 10_000, 0.5).map_err(|e| e.to_string())?;
        let r = boundary_ratio(&fam, 0.5, x).map_err(|e| e.to_string())?;
        let part = format!("{fam}: P = {:.3e}, ratio(x={x}) = {r:.3e}", p.value);
        if !(p.value < 0.01 && r < 1e-3) {
            return Err(part);
        }
        parts.push(part);
    }
    Ok(parts.join("; "))
}

/// Pareto: the by-parts integrand vanishes within 1e-10 and the lower-edge
/// probe decays to 0.
fn condition_probe_sanity() -> Outcome {
    let mut worst: f64 = 0.0;
    for alpha in [0.5, 1.0, 1.5, 2.0] {
        for kappa in [0.25, 0.5, 0.75] {
            let fam = make_pareto(alpha, 1.0).unwrap();
            let rep = check_theorem_conditions(&fam, kappa, 100, (0.0, 1e3), 1000).map_err(|e| e.to_string())?;
            worst = worst.max(rep.integrand_max_abs).max(rep.integrand_integral);
            if !(rep.integrand_max_abs < 1e-10 && rep.integrand_integral < 1e-10 && rep.zero_limit_ok) {
                return Err(format!("{fam} kappa={kappa}: {rep:?}"));
            }
            if (rep.boundary_ratio_limit - kappa.powf(alpha)).abs() > 1e-9 {
                return Err(format!("{fam} kappa={kappa}: boundary ratio {}", rep.boundary_ratio_limit));
            }
        }
    }
    Ok(format!("12 cases, max |g| or ∫|g| = {worst:.3e}, edge probe decays"))
}

/// Slope of ln median |mean| vs ln n within 0.15 of 1/alpha - 1.
fn lln_scaling() -> Outcome {
    let mut parts = Vec::new();
    for (alpha, seed) in [(0.6, 601), (1.0, 1001), (1.5, 1501)] {
        let fam = make_symmetric_stable(alpha, 1.0).unwrap();
        let exp = scaling_exponent_experiment(&fam, &[1_000, 10_000, 100_000], 200, Seed(seed)).map_err(|e| e.to_string())?;
        let theory = 1.0 / alpha - 1.0;
        let part = format!("alpha={alpha}: slope {:.4} (theory {theory:.4})", exp.slope);
        let sign_ok = match alpha {
            a if a < 1.0 => exp.slope > 0.0,
            a if a > 1.0 => exp.slope < 0.0,
            _ => true,
        };
        if !((exp.slope - theory).abs() <= 0.15 && sign_ok) {
            return Err(part);
        }
        parts.push(part);
    }
    Ok(parts.join("; "))
}

fn cli_output(args: &[&str]) -> Result<Vec<u8>, String> {
    let mut out = Vec::new();
    let mut stdin: &[u8] = &[];
    cli::run(std::iter::once("outlier-order").chain(args.iter().copied()), &mut stdin, &mut out)
        .map_err(|e| format!("{args:?}: {e}"))?;
    Ok(out)
}

/// Monte Carlo commands repeated with the same seed give byte-identical
/// output for 1 and 4 worker threads.
fn reproducibility() -> Outcome {
    let runs: [&[&str]; 4] = [
        &["prob-mc", "--dist", "pareto:alpha=1.5,xm=1", "--n", "100", "--trials", "20000", "--seed", "7"],
        &["prob-mc", "--dist", "stable:alpha=0.6", "--n", "50", "--trials", "20000", "--seed", "8", "--format", "csv"],
        &["estimate-alpha", "--dist", "pareto:alpha=1.5", "--total", "100000", "--n", "100", "--seed", "9"],
        &["lln-demo", "--dist", "stable:alpha=0.6", "--seed", "10", "--mode", "experiment", "--ns", "100,1000", "--replications", "100"],
    ];
    for args in runs {
        let mut outputs = Vec::new();
        for threads in ["1", "4", "1", "4"] {
            let mut full = args.to_vec();
            full.extend(["--threads", threads]);
            outputs.push(cli_output(&full)?);
        }
        if outputs.windows(2).any(|w| w[0] != w[1]) {
            return Err(format!("{} differs across runs", args[0]));
        }
    }
    Ok("4 commands x {1, 4 threads} x 2 repeats byte-identical".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 Pareto exactness", pareto_exactness),
        ("2 half-Cauchy convergence", half_cauchy_convergence),
        ("3 cross-method agreement", cross_method_agreement),
        ("4 estimator round trip and coverage", estimator_round_trip_and_coverage),
        ("5 light-tail control", light_tail_control),
        ("6 condition probe sanity", condition_probe_sanity),
        ("7 LLN scaling", lln_scaling),
        ("8 reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  criterion {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name} ({secs:.1}s): {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
