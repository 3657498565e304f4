//! Subcommand implementations. Each returns its records in a fixed order.

use std::f64::consts::LN_2;
use std::time::Instant;

use dynpair::families::{
    coc_pairing_exact, i_of_t, lattes_pairing_quadrature, quad_pairing_bounds, smyth_constant,
    QuadratureResult,
};
use dynpair::heights::canonical_height_with_cap;
use dynpair::pairing::{
    has_standard_height, pairing_converged_with, pairing_estimate_with, PairingEstimate,
};
use dynpair::verify::{
    check_family_inequalities_with, check_height_diff_with, equivalence_spot_check, sample_points,
    sharpness_probe, Consistency, Outcome as CaseOutcome, VerificationReport,
};
use dynpair::{standard_height, IntPolynomial, ProjPointQ, RationalMap};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::config::RunConfig;
use crate::output::Record;
use crate::spec::{parse_coeff_list, parse_map, parse_point, parse_range, parse_rational};
use crate::{CliError, Command, FamilyCommand, Outcome, VerifyCommand};

fn log(verbose: bool, start: Instant, what: &str) {
    if verbose {
        eprintln!("dynpair: {what} ({:.3} s)", start.elapsed().as_secs_f64());
    }
}

fn map_arg(words: &[String]) -> Result<RationalMap, CliError> {
    Ok(parse_map(&words.join(" "))?)
}

fn ok(records: Vec<Record>) -> Outcome {
    Outcome { records, ok: true }
}

pub fn dispatch(cmd: &Command, cfg: &RunConfig, verbose: bool) -> Result<Outcome, CliError> {
    match cmd {
        Command::Height {
            map,
            point,
            max_iterations,
        } => height(&map_arg(map)?, &parse_point(point)?, *max_iterations, cfg),
        Command::Pairing {
            phi,
            psi,
            n,
            symmetry,
            ..
        } => {
            let range = match n {
                Some(s) => parse_range(s)?,
                None => (1, cfg.n_max),
            };
            let symmetry = *symmetry || cfg.k_explicit && cfg.k == crate::spec::KRule::EqualsN;
            pairing(
                &map_arg(phi)?,
                &map_arg(psi)?,
                range,
                symmetry,
                cfg,
                verbose,
            )
        }
        Command::Family(f) => family(f, cfg, verbose),
        Command::Verify(v) => verify(v, cfg, verbose),
        Command::Mahler { poly } => mahler(poly, cfg),
    }
}

fn height(
    map: &RationalMap,
    p: &ProjPointQ,
    max_iterations: usize,
    cfg: &RunConfig,
) -> Result<Outcome, CliError> {
    let h = canonical_height_with_cap(map, p, cfg.tol, max_iterations)?;
    Ok(ok(vec![Record::new("height", "orbit series")
        .with("map", map.to_string())
        .with("point", p.to_string())
        .with("tol", cfg.tol)
        .with("value", h.value)
        .with("error_bound", h.error_bound)
        .with("iterations", h.iterations_used)]))
}

fn estimate_record(
    kind: &str,
    phi: &RationalMap,
    psi: &RationalMap,
    est: &PairingEstimate,
) -> Record {
    Record::new("pairing", "periodic-point estimator")
        .with("kind", kind)
        .with("phi", phi.to_string())
        .with("psi", psi.to_string())
        .with("n", est.n)
        .with("k", est.k)
        .with("form_degree", est.form_degree)
        .with("value", est.value)
        .with("error_bound", est.error_bound)
}

fn pairing(
    phi: &RationalMap,
    psi: &RationalMap,
    range: (u32, u32),
    symmetry: bool,
    cfg: &RunConfig,
    verbose: bool,
) -> Result<Outcome, CliError> {
    let opts = cfg.pairing_options();
    let schedule = cfg.k.schedule(range);
    let start = Instant::now();
    let est = pairing_converged_with(phi, psi, &schedule, cfg.stability_tol, &opts)?;
    log(verbose, start, "schedule done");
    let mut records: Vec<Record> = est
        .history
        .iter()
        .map(|h| {
            Record::new("pairing", "periodic-point estimator")
                .with("kind", "history")
                .with("n", h.n)
                .with("k", h.k)
                .with("value", h.value)
                .with("error_bound", h.error_bound)
        })
        .collect();
    records.push(
        estimate_record("estimate", phi, psi, &est)
            .with("k_forced_zero", has_standard_height(phi))
            .with("stable", est.stable)
            .with("stability_tol", cfg.stability_tol),
    );
    if symmetry {
        let &(n, k) = schedule.last().expect("nonempty range");
        let backward = pairing_converged_with(psi, phi, &[(n, k)], cfg.stability_tol, &opts)?;
        log(verbose, start, "swapped order done");
        records.push(
            Record::new("pairing", "periodic-point estimator, both orders")
                .with("kind", "symmetry")
                .with("n", n)
                .with("forward", est.value)
                .with("forward_k", est.k)
                .with("backward", backward.value)
                .with("backward_k", backward.k)
                .with("gap", (est.value - backward.value).abs())
                .with("error_bound", est.error_bound + backward.error_bound),
        );
    }
    Ok(ok(records))
}

fn quadrature(q: &QuadratureResult) -> serde_json::Value {
    serde_json::json!({"value": q.value, "error_estimate": q.error_estimate, "evaluations": q.evaluations})
}

fn family(cmd: &FamilyCommand, cfg: &RunConfig, verbose: bool) -> Result<Outcome, CliError> {
    let start = Instant::now();
    match cmd {
        FamilyCommand::Coc { alpha } => {
            let a = parse_rational(alpha)?;
            let value = coc_pairing_exact(&a, cfg.tol)?;
            let h = standard_height(&ProjPointQ::from_rational(&a)).value;
            Ok(ok(vec![Record::new(
                "family",
                "closed form h_st(alpha) + I(|alpha|)",
            )
            .with("family", "coc")
            .with("alpha", a.to_string())
            .with("h_st_alpha", h)
            .with("i_term", value - h)
            .with("value", value)
            .with("error_bound", cfg.tol)]))
        }
        FamilyCommand::Quad { c, n, k, slack } => {
            let cq = parse_rational(c)?;
            let (lo, hi) = quad_pairing_bounds(&cq);
            let psi = RationalMap::quad(&cq);
            let est = pairing_estimate_with(
                &RationalMap::squaring(),
                &psi,
                *n,
                *k,
                &cfg.pairing_options(),
            )?;
            log(verbose, start, "estimate done");
            let within = est.value >= lo - slack - est.error_bound
                && est.value <= hi + slack + est.error_bound;
            let records = vec![
                Record::new("family", "closed-form bounds")
                    .with("family", "quad")
                    .with("kind", "bounds")
                    .with("c", cq.to_string())
                    .with("lower", lo)
                    .with("upper", hi),
                Record::new("family", "periodic-point estimator")
                    .with("family", "quad")
                    .with("kind", "estimate")
                    .with("c", cq.to_string())
                    .with("n", est.n)
                    .with("k", est.k)
                    .with("value", est.value)
                    .with("error_bound", est.error_bound)
                    .with("slack", slack)
                    .with("within_bounds", within),
            ];
            Ok(Outcome {
                records,
                ok: within,
            })
        }
        FamilyCommand::Lattes {
            a,
            b,
            estimate,
            n,
            k,
        } => {
            let q = lattes_pairing_quadrature(*a, *b, cfg.tol.max(1e-12))?;
            log(verbose, start, "quadrature done");
            let lower = 0.5 * ((*a as f64) * (*b as f64)).ln();
            let err = q.pairing.error_estimate;
            let bound_holds = q.pairing.value >= lower - err;
            let theta_nonnegative = q.data.theta.value >= -q.data.theta.error_estimate;
            let mut records = vec![Record::new("family", "quadrature: theta + log sqrt(ab)")
                .with("family", "lattes")
                .with("kind", "quadrature")
                .with("a", a)
                .with("b", b)
                .with("value", q.pairing.value)
                .with("error_bound", err)
                .with("theta", quadrature(&q.data.theta))
                .with("c_p", quadrature(&q.data.c_p))
                .with("logplus_integral", quadrature(&q.data.logplus_integral))
                .with("vanishing_integral", quadrature(&q.vanishing_integral))
                .with("lower_bound", lower)
                .with("bound_holds", bound_holds)
                .with("theta_nonnegative", theta_nonnegative)];
            if *estimate {
                let psi = RationalMap::lattes(*a, *b)?;
                let est = pairing_estimate_with(
                    &RationalMap::squaring(),
                    &psi,
                    *n,
                    *k,
                    &cfg.pairing_options(),
                )?;
                log(verbose, start, "estimate done");
                records.push(
                    Record::new("family", "periodic-point estimator")
                        .with("family", "lattes")
                        .with("kind", "estimate")
                        .with("a", a)
                        .with("b", b)
                        .with("n", est.n)
                        .with("k", est.k)
                        .with("value", est.value)
                        .with("error_bound", est.error_bound)
                        .with("difference", (est.value - q.pairing.value).abs()),
                );
            }
            Ok(Outcome {
                records,
                ok: bound_holds && theta_nonnegative,
            })
        }
        FamilyCommand::Smyth => Ok(ok(vec![Record::new(
            "family",
            "L-series (3 sqrt 3 / 4 pi) L(2, chi_3)",
        )
        .with("family", "smyth")
        .with("value", smyth_constant(cfg.tol))
        .with("error_bound", cfg.tol)])),
        FamilyCommand::I { t } => {
            let q = i_of_t(*t, cfg.tol)?;
            Ok(ok(vec![Record::new("family", "adaptive Gauss-Kronrod")
                .with("family", "i")
                .with("t", t)
                .with("value", q.value)
                .with("error_bound", q.error_estimate)
                .with("evaluations", q.evaluations)]))
        }
    }
}

fn report_records(suite: &str, report: &VerificationReport, cases: bool) -> (Vec<Record>, bool) {
    let count = |o: CaseOutcome| report.cases.iter().filter(|c| c.outcome == o).count();
    let ok = match report.verdict {
        Some(v) => v != Consistency::Inconsistent,
        None => report.all_pass,
    };
    let mut records = vec![Record::new("verify", "sampled inequality check")
        .with("suite", suite)
        .with("name", &report.name)
        .with("cases", report.cases.len())
        .with("passed", count(CaseOutcome::Pass))
        .with("failed", count(CaseOutcome::Fail))
        .with("inconclusive", count(CaseOutcome::Inconclusive))
        .with("tight", report.tight_cases())
        .with("min_margin", report.min_margin())
        .with("all_pass", report.all_pass)
        .with("verdict", report.verdict)
        .with("ok", ok)];
    if cases {
        let mut sorted: Vec<_> = report.cases.iter().collect();
        sorted.sort_by(|x, y| x.input.cmp(&y.input));
        records.extend(sorted.into_iter().map(|c| {
            Record::default()
                .with("command", "verify-case")
                .with("suite", suite)
                .with("input", &c.input)
                .with("lhs", c.lhs)
                .with("rhs", c.rhs)
                .with("margin", c.margin)
                .with("slack", c.slack)
                .with("tight", c.tight)
                .with("outcome", c.outcome)
        }));
    }
    (records, ok)
}

fn verify(cmd: &VerifyCommand, cfg: &RunConfig, verbose: bool) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let (records, ok) = match cmd {
        VerifyCommand::HeightDiff {
            psi,
            pairing,
            points,
            max_height,
            cases,
        } => {
            let psi = map_arg(psi)?;
            let (value, error, method) = match pairing {
                Some(v) => (*v, 0.0, "given"),
                None => {
                    // Truncation is not bounded, so the spread of the last
                    // schedule values stands in for it.
                    let sched: Vec<_> = (1..=cfg.n_max).map(|n| (n, 0)).collect();
                    let est = pairing_converged_with(
                        &RationalMap::squaring(),
                        &psi,
                        &sched,
                        cfg.stability_tol,
                        &cfg.pairing_options(),
                    )?;
                    let tail = &est.history[est.history.len().saturating_sub(3)..];
                    let hi = tail.iter().map(|h| h.value).fold(f64::MIN, f64::max);
                    let lo = tail.iter().map(|h| h.value).fold(f64::MAX, f64::min);
                    (
                        est.value,
                        est.error_bound + (hi - lo),
                        "periodic-point estimator",
                    )
                }
            };
            log(verbose, start, "pairing ready");
            let sample = sample_points(Some(&psi), *points, *max_height, cfg.seed);
            let report = check_height_diff_with(&psi, value, error, &sample, cfg.tol)?;
            let (mut records, ok) = report_records("height-diff", &report, *cases);
            records[0].set("pairing", value);
            records[0].set("pairing_error", error);
            records[0].set("pairing_method", method);
            (records, ok)
        }
        VerifyCommand::Families { points, cases } => {
            let report = check_family_inequalities_with(*points, cfg.tol, cfg.seed)?;
            report_records("families", &report, *cases)
        }
        VerifyCommand::Sharpness { cases } => {
            let probe = sharpness_probe(cfg.tol)?;
            let (mut records, ok) = report_records("sharpness", &probe.report, *cases);
            records[0].set("margin", probe.margin);
            records[0].set("gap", probe.gap);
            records[0].set("smyth", smyth_constant(cfg.tol));
            records[0].set("log2", LN_2);
            (records, ok)
        }
        VerifyCommand::Equivalence {
            phi,
            psi,
            n_max,
            cases,
        } => {
            let report = equivalence_spot_check(&map_arg(phi)?, &map_arg(psi)?, *n_max)?;
            report_records("equivalence", &report, *cases)
        }
    };
    log(verbose, start, "verification done");
    Ok(Outcome { records, ok })
}

/// Clears denominators: `m(f) = m(L f) - log L`.
fn mahler(poly: &str, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let coeffs = parse_coeff_list(poly)?;
    if coeffs.iter().all(Zero::is_zero) {
        return Err(CliError::Usage(
            "the zero polynomial has no Mahler measure".into(),
        ));
    }
    let lcm = coeffs
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = coeffs
        .iter()
        .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
        .collect();
    let f = IntPolynomial::new(ints);
    let m = dynpair::mahler::log_mahler_with_target(&f, cfg.target_radius)?;
    let log_lcm = dynpair::util::log_abs(&lcm);
    Ok(ok(vec![Record::new("mahler", "certified complex roots")
        .with("poly", poly.trim())
        .with("degree", f.degree())
        .with("denominator", lcm.to_string())
        .with("value", m.value - log_lcm)
        .with(
            "error_bound",
            m.error_bound + log_lcm * f64::EPSILON,
        )]))
}
