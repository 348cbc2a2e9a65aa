//! Acceptance suite. Prints one PASS/FAIL line per criterion (with the
//! evidence behind it) and exits non-zero if any criterion fails.
//!
//! Run a subset with `cargo test -p robust-lowrank-validation --test
//! acceptance -- 4 7`.

use std::error::Error;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use robust_lowrank::init::beta_default;
use robust_lowrank::linalg::{frob_inner, gaussian_matrix, random_orthogonal, sigma_r};
use robust_lowrank::metrics::{check_lemma31, dist_to_orbit, recovery_report};
use robust_lowrank::objectives::{
    f_subgrad, f_value, g_subgrad, g_value, lambda_recommended, max_outlier_ratio, sharpness_psd,
    weakconvexity_general, weakconvexity_psd, L1Psd, RegularityParams,
};
use robust_lowrank::operators::{
    estimate_rip_delta, gaussian_operator, generate_problem, mean_abs_gaussian,
    symmetric_gaussian_operator, ProblemConfig, ProblemInstance,
};
use robust_lowrank::rng::{tag, Stream};
use robust_lowrank::solver::{
    dist0_bar, mu0_max, rho_lower, subgm, SolveOptions, Status, StepSchedule,
};
use robust_lowrank_experiments::commands::{
    landscape, phase, psd_instance, ratecurve, riprobe, stepgrid,
};
use robust_lowrank_experiments::config::Scale;
use robust_lowrank_experiments::pool::default_workers;
use robust_lowrank_validation::{evaluate, Check, Verdict};

type Body = Result<Vec<Check>, Box<dyn Error>>;

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn stream(seed: u64, index: u64) -> Stream {
    Stream::new(seed, tag::PERTURB, index)
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn criterion_1() -> Body {
    let mut checks = Vec::new();

    let mut worst_adjoint: f64 = 0.0;
    for t in 0..200u64 {
        let mut s = stream(1, t);
        let ops = [
            gaussian_operator(6, 5, 30, t)?,
            symmetric_gaussian_operator(6, 30, t)?,
        ];
        for op in &ops {
            let x = gaussian_matrix(op.n1(), op.n2(), 1.0, &mut s);
            let v = DVector::from_fn(op.m(), |_, _| s.normal());
            let lhs = op.apply(&x)?.dot(&v);
            let rhs = frob_inner(&x, &op.adjoint(&v)?);
            let scale = op.apply(&x)?.norm() * v.norm();
            worst_adjoint = worst_adjoint.max((lhs - rhs).abs() / scale);
        }
    }
    checks.push(Check::new(
        "adjoint identity, 400 draws",
        worst_adjoint <= 1e-10,
        format!("worst relative gap {worst_adjoint:.2e}"),
    ));

    let psd = generate_problem(&ProblemConfig::psd(20, 2, 0.2, 320, 11))?;
    let gen = generate_problem(&ProblemConfig::general(20, 15, 2, 0.2, 280, 12))?;
    let lambda = 0.3;
    let (mut worst_f, mut worst_g): (f64, f64) = (0.0, 0.0);
    for t in 0..200u64 {
        let mut s = stream(2, t);
        let r = random_orthogonal(2, &mut s);
        let u = gaussian_matrix(20, 2, 1.0, &mut s);
        worst_f = worst_f.max(rel_gap(f_value(&psd, &u)?, f_value(&psd, &(&u * &r))?));
        let w = gaussian_matrix(35, 2, 1.0, &mut s);
        worst_g = worst_g.max(rel_gap(
            g_value(&gen, &w, lambda)?,
            g_value(&gen, &(&w * &r), lambda)?,
        ));
    }
    checks.push(Check::new(
        "orbit invariance of f, 200 draws",
        worst_f <= 1e-12,
        format!("worst relative gap {worst_f:.2e}"),
    ));
    checks.push(Check::new(
        "orbit invariance of g, 200 draws",
        worst_g <= 1e-12,
        format!("worst relative gap {worst_g:.2e}"),
    ));

    let mut worst_meas: f64 = 0.0;
    for inst in [&psd, &gen] {
        worst_meas = worst_meas.max(inst.measurement_residual()? / inst.y.amax());
    }
    checks.push(Check::new(
        "measurement consistency y = A(X*) + s*",
        worst_meas <= 1e-10,
        format!("worst relative residual {worst_meas:.2e}"),
    ));

    let mut worst_bal: f64 = 0.0;
    for seed in 0..100u64 {
        let inst = generate_problem(&ProblemConfig::general(
            8,
            6,
            2 + (seed % 3) as usize,
            0.0,
            10,
            seed,
        ))?;
        let (u, v) = inst.balanced_ground_truth();
        let scale = inst.xstar.norm();
        let gram = (u.transpose() * &u - v.transpose() * &v).norm() / scale;
        let recon = (&u * v.transpose() - &inst.xstar).norm() / scale;
        worst_bal = worst_bal.max(gram).max(recon);
    }
    checks.push(Check::new(
        "balanced factors: U^T U = V^T V and U V^T = X*, 100 instances",
        worst_bal <= 1e-10,
        format!("worst relative error {worst_bal:.2e}"),
    ));

    let (mut holds, mut near) = (0, 0);
    let draws = 10_000u64;
    for t in 0..draws {
        let mut s = stream(3, t);
        let n = 3 + s.below(8);
        let r = 1 + s.below(n.min(4));
        let ustar = gaussian_matrix(n, r, 1.0 + 2.0 * s.uniform(), &mut s);
        let u = if t % 2 == 0 {
            gaussian_matrix(n, r, 1.0, &mut s)
        } else {
            // Close to the orbit, where the inequality is tightest.
            near += 1;
            let eps = 10f64.powf(-4.0 * s.uniform());
            &ustar * random_orthogonal(r, &mut s) + gaussian_matrix(n, r, eps, &mut s)
        };
        if check_lemma31(&u, &ustar)?.holds {
            holds += 1;
        }
    }
    checks.push(Check::new(
        "Procrustes lower bound, 10^4 draws",
        holds == draws,
        format!("{holds}/{draws} hold ({near} near-orbit draws)"),
    ));
    Ok(checks)
}

fn criterion_2() -> Body {
    Ok(vec![
        Check::close(
            "sharpness_psd(0.3, 0.05, 1)",
            sharpness_psd(0.3, 0.05, 1.0)?,
            0.18127,
            1e-4,
        ),
        Check::close(
            "weakconvexity_psd(0.05)",
            weakconvexity_psd(0.05),
            1.69577,
            1e-4,
        ),
        Check::close(
            "max_outlier_ratio(0.05)",
            max_outlier_ratio(0.05),
            0.433145,
            1e-4,
        ),
        Check::close(
            "lambda_recommended(0.3, 0.05)",
            lambda_recommended(0.3, 0.05),
            0.099577,
            1e-4,
        ),
        Check::close("beta_default(5, 1)", beta_default(5, 1.0), 6.1357, 1e-4),
        Check::close(
            "rho_lower(1, 1, 1, 0.255, 0.3)",
            rho_lower(1.0, 1.0, 1.0, 0.255, 0.3)?,
            0.52678,
            1e-4,
        ),
    ])
}

fn criterion_3() -> Body {
    let mut cfg = riprobe::RiprobeConfig::defaults(Scale::Small, 0);
    cfg.n = 30;
    cfg.r = 2;
    let points = riprobe::run(&cfg, default_workers())?;
    let first = points.first().ok_or("empty probe")?;
    let last = points.last().ok_or("empty probe")?;
    let c = mean_abs_gaussian();
    let trend: Vec<String> = points
        .iter()
        .map(|p| format!("{}:{:.4}", p.m_over_nr, p.median_delta_hat))
        .collect();
    Ok(vec![
        Check::new(
            "mean normalized l1 norm at m = 10nr",
            (last.median_mean - c).abs() <= 0.05,
            format!("{:.5} vs sqrt(2/pi) = {c:.5} (tol 0.05)", last.median_mean),
        ),
        Check::new(
            "delta_hat at m = 10nr",
            last.median_delta_hat <= 0.15,
            format!("{:.4} <= 0.15", last.median_delta_hat),
        ),
        Check::new(
            "delta_hat decreases from 2nr to 10nr",
            last.median_delta_hat < first.median_delta_hat,
            format!("medians by m/(nr): {}", trend.join(", ")),
        ),
    ])
}

fn criterion_4() -> Body {
    let (p, seed) = (0.2, 0);
    let inst = psd_instance(20, 2, 8.0, p, seed)?;
    let delta = estimate_rip_delta(&inst.operator, 2, 200, seed)?.delta_hat;
    let params = RegularityParams::psd(p, delta, sigma_r(&inst.xstar, 2), inst.ustar.norm())?;
    let (alpha, tau, kappa) = (params.alpha, params.tau, params.kappa);

    let mut s = stream(4, 0);
    let e = gaussian_matrix(20, 2, 1.0, &mut s);
    let u0 = &inst.ustar + &e * (0.5 * alpha / tau / e.norm());
    let dist0 = dist_to_orbit(&u0, &inst.ustar)?;
    let mu0 = mu0_max(alpha, tau, kappa, dist0);
    let rho = rho_lower(alpha, tau, kappa, mu0, dist0)?.max(0.9);
    let dbar = dist0_bar(alpha, kappa, mu0, dist0);
    let iters = ((1e-10 / dbar).ln() / rho.ln()).ceil() as usize;

    let objective = L1Psd::from_instance(&inst)?;
    let ustar = &inst.ustar;
    let opts = SolveOptions::new(iters).distance(|u| dist_to_orbit(u, ustar).unwrap_or(f64::NAN));
    let trace = subgm(
        &objective,
        &u0,
        &StepSchedule::Geometric { mu0, rho },
        &opts,
    )?;

    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for rec in &trace.records {
        let d = rec.dist.unwrap_or(f64::NAN);
        let bound = rho.powi(rec.k as i32) * dbar;
        worst = worst.max(d / bound);
        if !(d <= bound * (1.0 + 1e-9)) {
            violations += 1;
        }
    }
    let report = recovery_report(&(&trace.x * trace.x.transpose()), &inst.xstar, 1e-6)?;
    Ok(vec![
        Check::new(
            "setup",
            dist0 < 2.0 * alpha / tau && trace.status == Status::MaxIters,
            format!(
                "delta_hat {delta:.4}, alpha {alpha:.4}, tau {tau:.4}, kappa {kappa:.3}, \
                 dist0 {dist0:.4} (ball {:.4}), mu0 {mu0:.3e}, rho {rho:.5}, K {iters}",
                2.0 * alpha / tau
            ),
        ),
        Check::new(
            "dist_k <= rho^k dist0_bar at every iteration",
            violations == 0,
            format!(
                "{violations} violations over {} records; max ratio {worst:.3}",
                trace.records.len()
            ),
        ),
        Check::new(
            "terminal relative error <= 1e-6",
            report.success,
            format!("{:.3e}", report.rel_error),
        ),
    ])
}

fn stepgrid_checks(scale: Scale, label: &str) -> Body {
    let cfg = stepgrid::StepgridConfig::defaults(scale, 0);
    let workers = default_workers();
    let run = |mu0s: Vec<f64>, rhos: Vec<f64>| {
        let mut c = cfg.clone();
        c.mu0s = mu0s;
        c.rhos = rhos;
        stepgrid::run(&c, workers)
    };
    let mut checks = Vec::new();
    for cell in run(vec![10.0], vec![0.93, 0.96, 0.99])? {
        checks.push(Check::new(
            format!("{label}: mu0 = 10, rho = {} diverges", cell.rho),
            cell.status == Status::Diverged,
            format!(
                "status {:?}, final dist {:.3e}",
                cell.status, cell.final_dist
            ),
        ));
    }
    for cell in run(vec![1.0], vec![0.93, 0.96, 0.99])? {
        checks.push(Check::new(
            format!("{label}: mu0 = 1, rho = {} succeeds", cell.rho),
            cell.final_dist <= 1e-5,
            format!("final dist {:.3e} <= 1e-5", cell.final_dist),
        ));
    }
    for cell in run(vec![0.1], vec![0.95, 0.99])? {
        checks.push(Check::new(
            format!("{label}: mu0 = 0.1, rho = {} fails", cell.rho),
            !(cell.final_dist <= 1e-5),
            format!("final dist {:.3e} > 1e-5", cell.final_dist),
        ));
    }
    Ok(checks)
}

fn criterion_5() -> Body {
    let mut checks = stepgrid_checks(Scale::Paper, "paper")?;
    let start = Instant::now();
    checks.extend(stepgrid_checks(Scale::Small, "small")?);
    let small = start.elapsed().as_secs_f64();
    checks.push(Check::new(
        "small variant runtime <= 60 s",
        small <= 60.0,
        format!("{small:.2} s"),
    ));
    Ok(checks)
}

fn criterion_6() -> Body {
    let cfg = phase::PhaseConfig::defaults(Scale::Small, 0);
    let cells = phase::run(&cfg, default_workers())?.subgm;
    let rate = |p: f64, m: f64| phase::lookup(&cells, p, m).unwrap_or(f64::NAN);
    let mut checks = Vec::new();
    let mut cell_check = |name: String, p: f64, m: f64, ok: fn(f64) -> bool| {
        let v = rate(p, m);
        checks.push(Check::new(name, ok(v), format!("success rate {v:.2}")));
    };
    for p in [0.0, 0.05] {
        cell_check(format!("m = 2nr, p = {p:.2}: rate >= 0.8"), p, 2.0, |v| {
            v >= 0.8
        });
    }
    for i in 0..=9 {
        let p = i as f64 * 0.05;
        cell_check(format!("m = 7nr, p = {p:.2}: rate >= 0.8"), p, 7.0, |v| {
            v >= 0.8
        });
    }
    for p in [0.45, 0.5] {
        cell_check(format!("m = 2nr, p = {p:.2}: rate <= 0.2"), p, 2.0, |v| {
            v <= 0.2
        });
    }
    let (along_p, along_m) = phase::max_inversions(&cells);
    checks.push(Check::new(
        "at most one frontier inversion per row and column",
        along_p <= 1 && along_m <= 1,
        format!("rows (along p) {along_p}, columns (along m) {along_m}"),
    ));
    Ok(checks)
}

fn criterion_7() -> Body {
    let cfg = landscape::LandscapeConfig::defaults(0);
    let panels = landscape::run(&cfg)?;
    let mut checks = Vec::new();
    for panel in &panels {
        let detail = format!("argmax ({:.3}, {:.3})", panel.argmax.0, panel.argmax.1);
        match panel.loss {
            robust_lowrank::objectives::Loss::L1 => checks.push(Check::new(
                format!("p = {:.2}: -log f peaks at +-U*", panel.p),
                panel.at_truth,
                detail,
            )),
            robust_lowrank::objectives::Loss::L2 if (panel.p - 0.10).abs() < 1e-12 => {
                checks.push(Check::new(
                    "p = 0.10: -log xi does not peak at +-U*",
                    !panel.at_truth,
                    detail,
                ))
            }
            _ => {}
        }
    }
    Ok(checks)
}

const SAMPLES: u64 = 1000;

/// Pairs mixing independent Gaussian draws with local perturbations.
fn sample_pair(s: &mut Stream, t: u64, center: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let (n, r) = center.shape();
    if t % 2 == 0 {
        (gaussian_matrix(n, r, 1.0, s), gaussian_matrix(n, r, 1.0, s))
    } else {
        let x = center + gaussian_matrix(n, r, s.uniform(), s);
        let step = 10f64.powf(-3.0 * s.uniform());
        let y = &x + gaussian_matrix(n, r, step, s);
        (x, y)
    }
}

fn weak_convexity_check(
    name: String,
    center: &DMatrix<f64>,
    tau: f64,
    seed: u64,
    value: impl Fn(&DMatrix<f64>) -> robust_lowrank::Result<f64>,
    subgrad: impl Fn(&DMatrix<f64>) -> robust_lowrank::Result<DMatrix<f64>>,
) -> Result<Check, Box<dyn Error>> {
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for t in 0..SAMPLES {
        let mut s = stream(seed, t);
        let (x, y) = sample_pair(&mut s, t, center);
        let d = subgrad(&x)?;
        let diff = &y - &x;
        let q = diff.norm_squared();
        let slack = value(&y)? - value(&x)? - frob_inner(&d, &diff) + 0.5 * tau * q;
        worst = worst.min(slack / q);
        if slack < -1e-12 * (1.0 + value(&x)?.abs()) {
            violations += 1;
        }
    }
    Ok(Check::new(
        name,
        violations == 0,
        format!("{violations}/{SAMPLES} violations, tau_hat {tau:.4}, min slack/|dx|^2 {worst:.4}"),
    ))
}

fn psd_suite(p: f64, seed: u64) -> Result<Vec<Check>, Box<dyn Error>> {
    let inst: ProblemInstance = psd_instance(20, 2, 8.0, p, seed)?;
    let delta = estimate_rip_delta(&inst.operator, 2, 200, seed)?.delta_hat;
    let sr = sigma_r(&inst.xstar, 2);
    let alpha = sharpness_psd(p, delta, sr)?;
    // Same constant with sigma_r^{1/2}, the power a correct Procrustes bound
    // supports; reported for comparison only.
    let alpha_half = sharpness_psd(p, delta, sr.sqrt())?;
    let f_star = f_value(&inst, &inst.ustar)?;
    let scale = inst.ustar.norm();
    let (mut violations, mut violations_half) = (0, 0);
    let mut worst = f64::INFINITY;
    for t in 0..SAMPLES {
        let mut s = stream(80 + seed, t);
        let e = gaussian_matrix(20, 2, 1.0, &mut s);
        let radius = scale * (1.0 - s.uniform());
        let u = &inst.ustar * random_orthogonal(2, &mut s) + &e * (radius / e.norm());
        let d = dist_to_orbit(&u, &inst.ustar)?;
        let gap = f_value(&inst, &u)? - f_star;
        worst = worst.min(gap / d);
        if gap < alpha * d {
            violations += 1;
        }
        if gap < alpha_half * d {
            violations_half += 1;
        }
    }
    let sharp = Check::new(
        format!("p = {p:.1}: sharpness f - f* >= alpha_hat dist"),
        violations == 0,
        format!(
            "{violations}/{SAMPLES} violations; delta_hat {delta:.4}, sigma_r {sr:.3}, \
             alpha_hat {alpha:.4}, min gap/dist {worst:.4}; \
             with sigma_r^(1/2) (alpha {alpha_half:.4}): {violations_half} violations"
        ),
    );
    let tau = weakconvexity_psd(delta);
    let wc = weak_convexity_check(
        format!("p = {p:.1}: weak convexity of f"),
        &inst.ustar,
        tau,
        90 + seed,
        |u| f_value(&inst, u),
        |u| f_subgrad(&inst, u),
    )?;
    Ok(vec![sharp, wc])
}

fn criterion_8() -> Body {
    let mut checks = Vec::new();
    for p in [0.0, 0.1, 0.2] {
        checks.extend(psd_suite(p, 0)?);
    }
    let p = 0.2;
    let inst = generate_problem(&ProblemConfig::general(20, 20, 2, p, 320, 5))?;
    let delta = estimate_rip_delta(&inst.operator, 2, 200, 5)?.delta_hat;
    let lambda = lambda_recommended(p, delta);
    let tau = weakconvexity_general(delta, lambda);
    checks.push(weak_convexity_check(
        format!("p = {p:.1}: weak convexity of g (lambda {lambda:.4})"),
        &inst.wstar(),
        tau,
        95,
        |w| g_value(&inst, w, lambda),
        |w| g_subgrad(&inst, w, lambda),
    )?);
    Ok(checks)
}

fn criterion_9() -> Body {
    let points = ratecurve::run(&ratecurve::RatecurveConfig::default())?;
    let min = ratecurve::minimum(&points).ok_or("no admissible point")?;
    let near_zero = rho_lower(1.0, 1.0, 1.0, 1e-4, 0.3)?;
    Ok(vec![
        Check::new(
            "curve minimum within mu0 in [0.25, 0.26]",
            (0.25..=0.26).contains(&min.mu0),
            format!(
                "minimum rho_lower {:.5} at mu0 = {:.3}",
                min.rho_lower.unwrap_or(f64::NAN),
                min.mu0
            ),
        ),
        Check::new(
            "rho_lower > 0.99 at mu0 = 1e-4",
            near_zero > 0.99,
            format!("{near_zero:.6}"),
        ),
    ])
}

fn main() {
    let filters: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let criteria: [(u32, &str, u64, fn() -> Body); 9] = [
        (1, "exactness identities", 10, criterion_1),
        (2, "closed-form parameter values", 1, criterion_2),
        (3, "RIP probe at n = 30, r = 2", 30, criterion_3),
        (4, "linear convergence inside the basin", 30, criterion_4),
        (
            5,
            "step-grid outcomes (paper and small scale)",
            660,
            criterion_5,
        ),
        (6, "phase transition at small scale", 300, criterion_6),
        (7, "landscape argmax locations", 10, criterion_7),
        (8, "weak convexity and sharpness suites", 120, criterion_8),
        (9, "schedule rate curve", 1, criterion_9),
    ];
    let mut verdicts: Vec<Verdict> = Vec::new();
    for (id, title, limit, body) in criteria {
        if !filters.is_empty() && !filters.contains(&id) {
            continue;
        }
        let v = evaluate(id, title, secs(limit), body);
        println!("{}", v.render());
        verdicts.push(v);
    }
    let failed: Vec<u32> = verdicts
        .iter()
        .filter(|v| !v.pass())
        .map(|v| v.id)
        .collect();
    println!(
        "\nacceptance: {} passed, {} failed{}",
        verdicts.len() - failed.len(),
        failed.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(" (criteria {failed:?})")
        }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
