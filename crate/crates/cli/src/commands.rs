//! Subcommand implementations.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use cyclab_core::families::{
    probe_diverges, remark_a_difference, remark_a_limit_directions, remark_a_point, remark_a_probe,
    remark_b_point, remark_b_sides, remark_b_violation, remark_c_exponents, remark_d_convergence,
    remark_d_limit, remark_d_point, RemarkAFamily, RemarkBFamily, RemarkDFamily,
};
use cyclab_core::numerics::{
    critical_alpha, eval_sum, eval_sum_hp, eval_terms, gamma_wide, is_feasible, is_on_boundary,
    log_product, reverse_alpha_floor, EvalPoint, Margin,
};
use cyclab_core::propositions::{check_report, ExponentKind};
use cyclab_core::search::{
    bisect_alpha_n_case2, bisect_alpha_n_reverse, family_seeds, fuzz, search, BisectConfig,
    FuzzConfig, FuzzRegion, FuzzSummary, SearchConfig, Target, ThresholdEstimate,
};
use cyclab_core::{CheckOptions, CheckReport, Error, PredicateId};
use serde::Serialize;

use crate::parse::{parse_grid, parse_number, parse_point, parse_target, parse_usizes};
use crate::report::{
    DirectionProbe, Entry, EvalEntry, RemarkAEntry, RemarkBEntry, RemarkCEntry, RemarkDEntry,
    SweepRow, CSV_HEADER,
};
use crate::{Command, GlobalArgs, Outcome, EXIT_OK, EXIT_VIOLATION};

pub fn dispatch(cmd: &Command, global: &GlobalArgs) -> Result<Outcome> {
    match cmd {
        Command::Eval(a) => cmd_eval(a, global),
        Command::Verify(a) => cmd_verify(a, global),
        Command::Family(a) => cmd_family(a, global),
        Command::Bisect(a) => cmd_bisect(a, global),
        Command::Sweep(a) => cmd_sweep(a, global),
    }
}

fn options(global: &GlobalArgs) -> CheckOptions {
    CheckOptions {
        precision: global.precision.into(),
        force: global.force,
        ..CheckOptions::default()
    }
}

fn config_echo<A: Serialize>(args: &A, global: &GlobalArgs) -> serde_json::Value {
    serde_json::json!({ "global": global, "args": args })
}

fn describe(m: &Margin) -> String {
    format!(
        "{:?} (margin {:e}, tolerance {:e}, {:?})",
        m.verdict, m.value, m.tolerance, m.precision
    )
    .to_lowercase()
}

fn exit_for(violations: usize) -> i32 {
    if violations > 0 {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    }
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        bail!(Error::Domain(format!("{name} must be finite, got {v}")))
    }
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    /// Coordinates, comma separated; decimals or ratios such as `3/2`.
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: String,
}

fn cmd_eval(args: &EvalArgs, global: &GlobalArgs) -> Result<Outcome> {
    let p = parse_point(&args.x)?;
    let alpha = finite("alpha", parse_number(&args.alpha)?)?;
    let n = p.n();
    let opts = options(global);
    let terms = eval_terms(&p, alpha);
    let sum = eval_sum(&p, alpha);
    let (sum_extended, mut note) = match eval_sum_hp(&p, alpha) {
        Ok(s) => (s.to_string(), None),
        Err(Error::PrecisionExhausted { value, bound }) => (
            format!("{value:e}"),
            Some(format!(
                "extended sum {value:e} is within its error bound {bound:e}"
            )),
        ),
        Err(e) => return Err(e.into()),
    };
    let feasible = is_feasible(&p);
    let in_prop2 = n >= 2 && alpha >= reverse_alpha_floor(n) && alpha <= 1.0;
    let which = if alpha >= 1.0 && (feasible || opts.force) {
        Some(PredicateId::Prop1)
    } else if (in_prop2 && feasible) || (opts.force && n >= 2) {
        Some(PredicateId::Prop2)
    } else {
        note.get_or_insert_with(|| {
            if feasible {
                format!("no claim is made for alpha = {alpha} at n = {n}")
            } else {
                "the point is infeasible (product of coordinates < 1), so no claim is made".into()
            }
        });
        None
    };
    let claim = which
        .map(|id| check_report(id, &p, alpha, None, &opts))
        .transpose()?;

    let mut lines = Vec::new();
    for (i, t) in terms.iter().enumerate() {
        lines.push(format!("term[{i}] = {t:.17e}"));
    }
    lines.push(format!("sum = {sum:.17}"));
    lines.push(format!("sum (extended) = {sum_extended}"));
    lines.push(format!(
        "log product = {:e}, feasible = {feasible}",
        log_product(&p)
    ));
    match &claim {
        Some(c) => lines.push(format!("{}: {}", c.predicate, describe(&c.margin))),
        None => lines.push(format!("no verdict: {}", note.clone().unwrap_or_default())),
    }
    let violations = claim
        .as_ref()
        .map_or(0, |c| c.margin.is_violated() as usize);
    let entry = EvalEntry {
        on_boundary: is_on_boundary(&p),
        log_product: log_product(&p),
        point: p,
        alpha,
        terms,
        sum,
        sum_extended,
        feasible,
        claim,
        note,
    };
    Ok(Outcome {
        config: config_echo(args, global),
        results: vec![Entry::Eval(entry)],
        lines,
        exit_code: exit_for(violations),
    })
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionArg {
    Mixed,
    Boundary,
    Interior,
}

impl From<RegionArg> for FuzzRegion {
    fn from(r: RegionArg) -> FuzzRegion {
        match r {
            RegionArg::Mixed => FuzzRegion::Mixed,
            RegionArg::Boundary => FuzzRegion::Boundary,
            RegionArg::Interior => FuzzRegion::Interior,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub n: usize,
    /// Exponent: a number, a list `a,b,c`, or a grid `start:stop:step`.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Exponent for the power-sum predicates, same syntax as `--alpha`.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    /// Predicate name (prop1, prop2, ineq2 … ineq9, amgm_age_g, prop2_step,
    /// ineq3_reversed).
    #[arg(long)]
    pub pred: Option<String>,
    /// Shorthand for `--pred prop1` / `--pred prop2`.
    #[arg(long)]
    pub prop: Option<u8>,
    #[arg(long, default_value_t = 100_000)]
    pub count: usize,
    /// Also fuzz every step of the proof that applies at each alpha.
    #[arg(long)]
    pub chain: bool,
    /// Add the case boundary 2 + 1/(n-1) to the alpha grid.
    #[arg(long)]
    pub include_critical: bool,
    #[arg(long, default_value_t = 5.0)]
    pub log_range: f64,
    #[arg(long, value_enum, default_value_t = RegionArg::Mixed)]
    pub region: RegionArg,
}

fn resolve_target(pred: &Option<String>, prop: Option<u8>) -> Result<Target> {
    match (pred, prop) {
        (Some(_), Some(_)) => bail!(Error::Domain("use either --pred or --prop".into())),
        (Some(p), None) => parse_target(p),
        (None, Some(1)) => Ok(PredicateId::Prop1.into()),
        (None, Some(2)) => Ok(PredicateId::Prop2.into()),
        (None, Some(k)) => bail!(Error::Domain(format!("--prop must be 1 or 2, got {k}"))),
        (None, None) => Ok(PredicateId::Prop1.into()),
    }
}

fn exponent_kind(target: Target) -> ExponentKind {
    match target {
        Target::Predicate(p) => p.exponent_kind(),
        Target::PowerSumReversal => ExponentKind::Beta,
    }
}

fn exponent_grid(
    target: Target,
    alpha: &Option<String>,
    beta: &Option<String>,
) -> Result<Vec<f64>> {
    let grid = match (exponent_kind(target), alpha, beta) {
        (ExponentKind::Alpha, Some(a), None) => parse_grid(a)?,
        (ExponentKind::Beta, None, Some(b)) => parse_grid(b)?,
        (ExponentKind::Alpha, _, _) => {
            bail!(Error::Domain(format!(
                "{target} takes --alpha (and not --beta)"
            )))
        }
        (ExponentKind::Beta, _, _) => {
            bail!(Error::Domain(format!(
                "{target} takes --beta (and not --alpha)"
            )))
        }
    };
    for &e in &grid {
        finite("exponent", e)?;
    }
    Ok(grid)
}

/// The proof steps that apply at `alpha`, with their exponents.
pub fn chain_cells(n: usize, alpha: f64) -> Vec<(Target, f64)> {
    use PredicateId::*;
    let crit = critical_alpha(n);
    // 2 − α_c is 1/(1−n) exactly; the rounded difference can fall one ulp
    // outside the β range.
    let beta = if alpha == crit {
        reverse_alpha_floor(n)
    } else {
        2.0 - alpha
    };
    let mut cells = Vec::new();
    if alpha <= crit {
        cells.push((Ineq2.into(), alpha));
        cells.push((Ineq3.into(), beta));
        if (0.0..=1.0).contains(&beta) {
            cells.push((Ineq4.into(), beta));
            cells.push((Ineq5.into(), beta));
        }
        if beta <= 0.0 {
            cells.push((Ineq6.into(), beta));
            cells.push((Ineq7.into(), beta));
        }
    }
    if alpha >= crit && n >= 2 {
        cells.push((Ineq8.into(), alpha));
        cells.push((Ineq9.into(), alpha));
        cells.push((AmGmAgeG.into(), alpha));
    }
    cells.push((Prop1.into(), alpha));
    cells
}

fn fuzz_line(s: &FuzzSummary) -> String {
    format!(
        "{} n={} exponent={}: {} points, {} checks, min margin {:e}, {} violations, {} inconclusive",
        s.target, s.n, s.exponent, s.points, s.evaluations, s.min_margin, s.violations, s.inconclusive
    )
}

fn witness_line(label: &str, point: &EvalPoint, index: Option<usize>, m: &Margin) -> String {
    let at = index.map(|i| format!(" at index {i}")).unwrap_or_default();
    format!(
        "  {label}{at}: {}; ln x = [{}]",
        describe(m),
        point.witness_strings().join(", ")
    )
}

fn cmd_verify(args: &VerifyArgs, global: &GlobalArgs) -> Result<Outcome> {
    if args.n == 0 {
        bail!(Error::Domain("n must be at least 1".into()));
    }
    let target = resolve_target(&args.pred, args.prop)?;
    let mut grid = exponent_grid(target, &args.alpha, &args.beta)?;
    if args.include_critical {
        let c = critical_alpha(args.n);
        if c.is_finite() && !grid.contains(&c) {
            grid.push(c);
        }
    }
    let cells: Vec<(Target, f64)> = if args.chain {
        if target != Target::Predicate(PredicateId::Prop1) {
            bail!(Error::Domain("--chain verifies the proof of prop1".into()));
        }
        grid.iter().flat_map(|&a| chain_cells(args.n, a)).collect()
    } else {
        grid.iter().map(|&e| (target, e)).collect()
    };
    let cfg = FuzzConfig {
        n: args.n,
        count: args.count,
        log_range: args.log_range,
        seed: global.seed,
        region: args.region.into(),
        opts: options(global),
    };
    let mut results = Vec::new();
    let mut lines = Vec::new();
    let mut violations = 0;
    for (t, e) in cells {
        let s = fuzz(t, e, &cfg)?;
        lines.push(fuzz_line(&s));
        if let Some(w) = &s.first_violation {
            lines.push(witness_line("witness", &w.point, w.index, &w.margin));
        }
        violations += s.violations;
        results.push(Entry::Fuzz(s));
    }
    lines.push(if violations == 0 {
        "no confirmed violations".to_string()
    } else {
        format!("{violations} confirmed violations")
    });
    Ok(Outcome {
        config: config_echo(args, global),
        results,
        lines,
        exit_code: exit_for(violations),
    })
}

// ---------------------------------------------------------------------------
// family
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RemarkArg {
    A,
    B,
    C,
    D,
}

#[derive(Debug, Args, Serialize)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub remark: RemarkArg,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Family parameter; a list is allowed for remark a.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Exponent sequence, e.g. `-10,-20,-40` for remark d.
    #[arg(long, allow_hyphen_values = true)]
    pub alphas: Option<String>,
    /// Fuzzed points for the remark c clearance.
    #[arg(long, default_value_t = 10_000)]
    pub count: usize,
}

fn cmd_family(args: &FamilyArgs, global: &GlobalArgs) -> Result<Outcome> {
    let forced = CheckOptions {
        force: true,
        ..options(global)
    };
    let mut results = Vec::new();
    let mut lines = Vec::new();
    match args.remark {
        RemarkArg::A => {
            let beta = finite(
                "beta",
                parse_number(args.beta.as_deref().context("remark a needs --beta")?)?,
            )?;
            let xs = parse_grid(args.x.as_deref().unwrap_or("2"))?;
            for x in xs {
                let f = RemarkAFamily { n: args.n, x, beta };
                let point = remark_a_point(&f)?;
                let difference = remark_a_difference(&f);
                let check = check_report(PredicateId::Ineq3, &point, beta, None, &forced)?;
                let directions = remark_a_limit_directions(args.n, beta);
                let probes: Vec<DirectionProbe> = directions
                    .iter()
                    .map(|&d| {
                        let values = remark_a_probe(args.n, beta, d);
                        DirectionProbe {
                            direction: d,
                            diverges: probe_diverges(d, &values),
                            values,
                        }
                    })
                    .collect();
                lines.push(format!(
                    "n={} beta={beta} x={x}: D = {difference} (sum x - sum x^beta: {})",
                    args.n,
                    describe(&check.margin)
                ));
                for pr in &probes {
                    let vals: Vec<String> = pr
                        .values
                        .iter()
                        .map(|(x, d)| format!("D({x}) = {d:e}"))
                        .collect();
                    lines.push(format!(
                        "  {:?}: {} (diverges: {})",
                        pr.direction,
                        vals.join(", "),
                        pr.diverges
                    ));
                }
                results.push(Entry::RemarkA(RemarkAEntry {
                    n: args.n,
                    x,
                    beta,
                    point,
                    difference,
                    check,
                    directions,
                    probes,
                }));
            }
        }
        RemarkArg::B => {
            let alphas = match (&args.alpha, &args.alphas) {
                (Some(a), None) => parse_grid(a)?,
                (None, Some(a)) => parse_grid(a)?,
                (None, None) => vec![1.2, 1.1, 1.05],
                _ => bail!(Error::Domain("use either --alpha or --alphas".into())),
            };
            for alpha in alphas {
                let f = RemarkBFamily { n: args.n, alpha };
                let rest = remark_b_point(&f)?;
                let sides = remark_b_sides(&f)?;
                let margin = remark_b_violation(args.n, alpha, &forced)?;
                let check = CheckReport {
                    predicate: PredicateId::Ineq9,
                    index: None,
                    exponent_kind: ExponentKind::Alpha,
                    exponent: alpha,
                    point: rest.clone(),
                    margin,
                };
                lines.push(format!(
                    "n={} alpha={alpha}: A = {}, G = {}, lhs = {:e}, rhs = {}, ineq9 {}",
                    args.n,
                    sides.a,
                    sides.g,
                    sides.lhs,
                    sides.rhs,
                    describe(&margin)
                ));
                results.push(Entry::RemarkB(RemarkBEntry {
                    n: args.n,
                    alpha,
                    gamma: gamma_wide(args.n, alpha).to_f64(),
                    rest,
                    sides,
                    check,
                }));
            }
        }
        RemarkArg::C => {
            if args.n < 2 {
                bail!(Error::Domain("remark c needs n >= 2".into()));
            }
            let exponents = remark_c_exponents(args.n);
            let cfg = FuzzConfig {
                opts: options(global),
                ..FuzzConfig::new(args.n, args.count, global.seed)
            };
            let clearance = fuzz(PredicateId::Ineq8, exponents.alpha, &cfg)?;
            lines.push(format!(
                "n={}: alpha = {}, beta = {}, gamma = {}",
                args.n, exponents.alpha, exponents.beta, exponents.gamma
            ));
            lines.push(fuzz_line(&clearance));
            results.push(Entry::RemarkC(RemarkCEntry {
                n: args.n,
                exponents,
                clearance,
            }));
        }
        RemarkArg::D => {
            let x = finite("x", parse_number(args.x.as_deref().unwrap_or("1.2"))?)?;
            let alphas = parse_grid(
                args.alphas
                    .as_deref()
                    .or(args.alpha.as_deref())
                    .unwrap_or("-10,-20,-40"),
            )?;
            let point = remark_d_point(&RemarkDFamily { n: args.n, x })?;
            let limit = remark_d_limit(args.n, x);
            let rows = remark_d_convergence(args.n, x, &alphas)?;
            let checks = alphas
                .iter()
                .map(|&a| check_report(PredicateId::Prop2, &point, a, None, &forced))
                .collect::<cyclab_core::Result<Vec<_>>>()?;
            lines.push(format!("n={} x={x}: limit n-1-x^n/(n-1) = {limit}", args.n));
            lines.push(format!(
                "{:>12} {:>22} {:>14}",
                "alpha", "sum", "sum - limit"
            ));
            for r in &rows {
                lines.push(format!("{:>12} {:>22.15} {:>14.3e}", r.alpha, r.sum, r.gap));
            }
            for c in &checks {
                lines.push(format!(
                    "reversed inequality at alpha={}: {}",
                    c.exponent,
                    describe(&c.margin)
                ));
            }
            results.push(Entry::RemarkD(RemarkDEntry {
                n: args.n,
                x,
                point,
                limit,
                limit_positive: limit > 0.0,
                rows,
                checks,
            }));
        }
    }
    let violations = crate::count_violations(&results);
    Ok(Outcome {
        config: config_echo(args, global),
        results,
        lines,
        exit_code: exit_for(violations),
    })
}

// ---------------------------------------------------------------------------
// bisect
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseArg {
    #[value(name = "2", alias = "case2")]
    Case2,
    Reverse,
}

#[derive(Debug, Args, Serialize)]
pub struct BisectArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long = "case", value_enum)]
    pub case: CaseArg,
    #[arg(long, default_value_t = 0.01)]
    pub tol: f64,
    /// Search evaluations per probe.
    #[arg(long, default_value_t = 100_000)]
    pub budget: usize,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    /// Fuzzed points behind each clearance record.
    #[arg(long, default_value_t = 10_000)]
    pub clearance: usize,
}

fn threshold_lines(e: &ThresholdEstimate) -> Vec<String> {
    let w = &e.witness_lo;
    let c = &e.clearance_hi;
    vec![
        format!(
            "n={} {:?}: bracket [{}, {}] (width {:e}, {} probes)",
            e.n,
            e.case,
            e.bracket.0,
            e.bracket.1,
            e.width(),
            e.probes.len()
        ),
        witness_line("violation at alpha_lo", &w.best_point, w.best_index, &w.best_margin),
        format!(
            "  clearance at alpha_hi: search min margin {:e} over {} evaluations; fuzz {} points, {} violations",
            c.search.best_margin.value, c.search.evaluations, c.fuzz.points, c.fuzz.violations
        ),
        format!("  {}", e.note),
    ]
}

fn cmd_bisect(args: &BisectArgs, global: &GlobalArgs) -> Result<Outcome> {
    let cfg = BisectConfig {
        tolerance: args.tol,
        budget: args.budget,
        restarts: args.restarts,
        clearance_count: args.clearance,
        seed: global.seed,
        opts: options(global),
    };
    let estimate = match args.case {
        CaseArg::Case2 => bisect_alpha_n_case2(args.n, &cfg)?,
        CaseArg::Reverse => bisect_alpha_n_reverse(args.n, &cfg)?,
    };
    Ok(Outcome {
        config: config_echo(args, global),
        lines: threshold_lines(&estimate),
        results: vec![Entry::Threshold(estimate)],
        exit_code: EXIT_OK,
    })
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    /// Dimensions: a list `2,3,4` or a range `2..4`.
    #[arg(long)]
    pub n: String,
    /// Exponent grid `start:stop:step` or a list.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: String,
    #[arg(long)]
    pub pred: Option<String>,
    #[arg(long)]
    pub prop: Option<u8>,
    /// Fuzzed points per cell.
    #[arg(long, default_value_t = 10_000)]
    pub count: usize,
    /// Search evaluations per cell, seeded with the family points (0 to skip).
    #[arg(long, default_value_t = 20_000)]
    pub search_budget: usize,
    /// CSV output path.
    #[arg(long)]
    pub out: PathBuf,
}

fn cmd_sweep(args: &SweepArgs, global: &GlobalArgs) -> Result<Outcome> {
    let target = resolve_target(&args.pred, args.prop)?;
    let ns = parse_usizes(&args.n)?;
    let grid = parse_grid(&args.alpha)?;
    if ns.is_empty() || grid.is_empty() {
        bail!(Error::Domain("empty sweep grid".into()));
    }
    for &e in &grid {
        finite("exponent", e)?;
    }
    let file = File::create(&args.out)
        .map_err(|e| Error::Domain(format!("cannot write {}: {e}", args.out.display())))?;
    let mut csv = BufWriter::new(file);
    writeln!(csv, "{CSV_HEADER}")?;

    // Cells outside a predicate's hypotheses are part of the picture.
    let opts = CheckOptions {
        force: true,
        ..options(global)
    };
    let mut results = Vec::new();
    let mut lines = vec![CSV_HEADER.to_string()];
    let mut violations = 0;
    for &n in &ns {
        for &e in &grid {
            let f = fuzz(
                target,
                e,
                &FuzzConfig {
                    opts,
                    ..FuzzConfig::new(n, args.count, global.seed)
                },
            )?;
            let mut row = SweepRow {
                n,
                alpha: e,
                predicate: target,
                min_margin: f.min_margin,
                violations: f.violations,
                evaluations: f.evaluations,
            };
            if args.search_budget > 0 {
                let cfg = SearchConfig {
                    budget: args.search_budget,
                    restarts: 8,
                    seed: global.seed,
                    seeds: family_seeds(target, n, e),
                    opts,
                    ..SearchConfig::default()
                };
                let s = search(target, e, n, &cfg)?;
                row.min_margin = row.min_margin.min(s.best_margin.value);
                row.violations += s.found_violation() as usize;
                row.evaluations += s.evaluations;
            }
            violations += row.violations;
            writeln!(csv, "{}", row.csv_line())?;
            lines.push(row.csv_line());
            results.push(Entry::Sweep(row));
        }
    }
    csv.flush()?;
    lines.push(format!(
        "wrote {} rows to {}",
        results.len(),
        args.out.display()
    ));
    Ok(Outcome {
        config: config_echo(args, global),
        results,
        lines,
        exit_code: exit_for(violations),
    })
}
