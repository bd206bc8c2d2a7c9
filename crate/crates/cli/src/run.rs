use std::fs;
use std::io::{BufWriter, Write};
use std::sync::Arc;

use aclab_core::checkers::{default_lip_radii, default_steps, dir_derivative, dirichlet_energy, lip_at, Scan};
use aclab_core::hierarchy::Hierarchy;
use aclab_core::witness::{
    greedy_search, oracle_max, refute_0ac, refute_half_ac, refute_product_1ac, refute_strong0ac, HalfAcOptions,
    ProductOptions, Sampling, SearchBudget, ZeroAcOptions,
};
use aclab_core::zoo::{dsl, scalar::parse_q2_point};
use aclab_core::{AcClassSpec, ClassKind, Error, FunctionSpec, Point, Rat, Value, WitnessReport};
use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;

use crate::args::{
    ClassArgs, EvalArgs, Format, HierarchyArgs, Method, OracleArgs, RefuteArgs, ScanArgs, ScanKind, SearchArgs,
};

/// What a command hands back to `main`.
pub enum Done {
    Ok,
    Report(Box<WitnessReport>),
}

pub fn parse_spec(src: &str) -> Result<FunctionSpec> {
    dsl::parse(src).with_context(|| format!("in function spec {src:?}"))
}

/// `1ac` gets exponent `n`; `1ac^3` keeps its own.
pub fn parse_class(src: &str, n: usize) -> Result<AcClassSpec> {
    let class = if src.contains('^') {
        src.parse()
    } else {
        AcClassSpec::parse_with_exponent(src, n as u32)
    };
    class.with_context(|| format!("in class {src:?}"))
}

fn parse_levels(src: &str) -> Result<(usize, usize)> {
    let (a, b) = src
        .split_once(':')
        .ok_or_else(|| anyhow!("levels must look like m0:M, got {src:?}"))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn write_report(out: &mut dyn Write, rep: &WitnessReport, format: Format) -> Result<()> {
    match format {
        Format::Json => write_json(out, rep),
        Format::Tsv => {
            writeln!(out, "# method\t{}", rep.method)?;
            writeln!(out, "# verdict\t{}", rep.verdict)?;
            writeln!(out, "# sum_measure\t{}", rep.sum_measure)?;
            match &rep.sum_osc_exact {
                Some(x) => writeln!(out, "# sum_osc\t{x}")?,
                None => writeln!(out, "# sum_osc\t{}\t+-{}", fmt_float(rep.sum_osc), fmt_float(rep.sum_osc_err))?,
            }
            writeln!(out, "a\tb")?;
            for s in &rep.family {
                writeln!(out, "{}\t{}", s.a, s.b)?;
            }
            Ok(())
        }
    }
}

/// Plain decimals for ordinary magnitudes, scientific notation otherwise.
fn fmt_float(x: f64) -> String {
    if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn read_points(args: &EvalArgs) -> Result<Vec<String>> {
    let mut points = args.points.clone();
    if let Some(path) = &args.points_file {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        points.extend(
            text.lines()
                .map(|l| l.split('#').next().unwrap_or("").trim())
                .filter(|l| !l.is_empty())
                .map(str::to_string),
        );
    }
    if points.is_empty() {
        bail!("no points given; use --point or --points-file");
    }
    Ok(points)
}

#[derive(Serialize)]
struct EvalRow {
    point: String,
    value: Option<String>,
    approx: Option<f64>,
    err: Option<f64>,
    error: Option<String>,
}

pub fn eval(args: &EvalArgs, format: Format, out: &mut dyn Write) -> Result<Done> {
    let spec = parse_spec(&args.spec)?;
    let mut rows = Vec::new();
    for src in read_points(args)? {
        let value: Result<Value, Error> = if args.q2 {
            parse_q2_point(&src).and_then(|p| spec.eval_q2(&p))
        } else {
            src.parse::<Point>().and_then(|p| spec.eval(&p))
        };
        rows.push(match value {
            Ok(v) => EvalRow {
                point: src,
                value: Some(v.as_exact().map_or_else(|| fmt_float(v.approx), Rat::to_string)),
                approx: Some(v.approx),
                err: Some(v.err),
                error: None,
            },
            // Poles mark the row; anything else is a usage error.
            Err(Error::Pole(msg)) => EvalRow {
                point: src,
                value: None,
                approx: None,
                err: None,
                error: Some(format!("pole: {msg}")),
            },
            Err(e) => return Err(anyhow::Error::new(e).context(format!("at point {src}"))),
        });
    }
    match format {
        Format::Json => write_json(out, &rows)?,
        Format::Tsv => {
            writeln!(out, "point\tvalue\tapprox\terr")?;
            for r in &rows {
                match (&r.value, &r.error) {
                    (Some(v), _) => {
                        let (approx, err) = (r.approx.unwrap_or(f64::NAN), r.err.unwrap_or(f64::NAN));
                        writeln!(out, "{}\t{v}\t{}\t{}", r.point, fmt_float(approx), fmt_float(err))?
                    }
                    (None, e) => writeln!(out, "{}\tpole\t\t{}", r.point, e.as_deref().unwrap_or(""))?,
                }
            }
        }
    }
    Ok(Done::Ok)
}

fn budget(search: &SearchArgs) -> SearchBudget {
    SearchBudget {
        candidates: search.candidates,
        iterations: search.iterations,
        rounds: search.rounds,
        seed: search.seed,
        sampling: search.grid.map_or(Sampling::Random, |r| Sampling::Grid { r }),
        max_family: search.max_family,
    }
}

/// The method `auto` stands for, given the class and what else was supplied.
pub fn resolve_method(args: &RefuteArgs, spec: &FunctionSpec, class: &AcClassSpec) -> Method {
    if args.method != Method::Auto {
        return args.method;
    }
    match (&class.kind, spec) {
        (ClassKind::StrongZeroAc, _) if args.pair.is_some() => Method::Strong0ac,
        (ClassKind::ZeroAc, _) if args.pair.is_some() => Method::ZeroAc,
        (ClassKind::AlphaAc(_), FunctionSpec::Hierarchy { .. }) => Method::HalfAc,
        (ClassKind::OneAc, FunctionSpec::Product { .. }) => Method::Product,
        _ => Method::Greedy,
    }
}

/// The pair's own steepness `|f(a) - f(b)| / |a - b|_1`, rounded down.
fn pair_ratio(spec: &FunctionSpec, a: &Point, b: &Point) -> Result<Rat> {
    let gap = spec.eval(a)?.sub(&spec.eval(b)?).abs();
    let dist = a.l1_dist(b);
    if dist.is_zero() {
        bail!("the pair's points coincide");
    }
    Ok(match gap.as_exact() {
        Some(g) => g / &dist,
        None => {
            let lower = (gap.approx - gap.err) * (1.0 - 1e-12) / dist.to_f64();
            Rat::from_f64(lower.max(0.0)).unwrap_or_else(Rat::zero)
        }
    })
}

pub fn refute(args: &RefuteArgs, format: Format, out: &mut dyn Write) -> Result<Done> {
    let spec = parse_spec(&args.spec)?;
    let class = parse_class(&args.class.class, spec.dim())?;
    let ClassArgs {
        delta,
        epsilon,
        domain,
        ..
    } = &args.class;
    let need_pair = || args.pair.clone().ok_or_else(|| anyhow!("this method needs --pair a:b"));
    let method = resolve_method(args, &spec, &class);
    let report = match method {
        Method::Strong0ac => {
            let pair = need_pair()?;
            refute_strong0ac(&spec, &pair.a, &pair.b, delta, epsilon.clone())?
        }
        Method::ZeroAc => {
            let pair = need_pair()?;
            let ratio = match &args.ratio {
                Some(r) => r.clone(),
                None => pair_ratio(&spec, &pair.a, &pair.b)?,
            };
            let mut opts = ZeroAcOptions::new(ratio, delta.clone());
            opts.epsilon = epsilon.clone();
            refute_0ac(&spec, &pair.a, &pair.b, &opts)?
        }
        Method::Product => {
            let mut opts = ProductOptions::new(delta.clone(), args.k);
            opts.tau = args.tau.clone();
            opts.t = args.t.clone();
            opts.epsilon = epsilon.clone();
            opts.class = Some(class);
            refute_product_1ac(&spec, &opts)?
        }
        Method::HalfAc => {
            let FunctionSpec::Hierarchy { hierarchy, upto } = &spec else {
                bail!("analytic:half-ac needs a hierarchy spec such as hierarchy(depth=5)");
            };
            let (first, last) = match &args.levels {
                Some(l) => parse_levels(l)?,
                None => (2, *upto),
            };
            let opts = HalfAcOptions {
                first_level: first,
                last_level: last,
                delta: Some(delta.clone()),
                epsilon: epsilon.clone(),
            };
            refute_half_ac(hierarchy, &opts)?
        }
        Method::Greedy => greedy_search(&spec, &class, delta, epsilon.clone(), &budget(&args.search), domain.as_ref())?,
        Method::Oracle => {
            let r = args.search.grid.ok_or_else(|| anyhow!("the oracle needs --grid r"))?;
            oracle_max(&spec, &class, delta, epsilon.clone(), r, args.search.oracle_k, domain.as_ref(), args.search.cap)?
        }
        Method::Auto => unreachable!("resolved above"),
    };
    write_report(out, &report, format)?;
    Ok(Done::Report(Box::new(report)))
}

pub fn oracle(args: &OracleArgs, format: Format, out: &mut dyn Write) -> Result<Done> {
    let spec = parse_spec(&args.spec)?;
    let class = parse_class(&args.class.class, spec.dim())?;
    let c = &args.class;
    let report = oracle_max(&spec, &class, &c.delta, c.epsilon.clone(), args.grid, args.k, c.domain.as_ref(), args.cap)?;
    write_report(out, &report, format)?;
    Ok(Done::Report(Box::new(report)))
}

pub fn hierarchy(args: &HierarchyArgs, format: Format, out: &mut dyn Write) -> Result<Done> {
    let h = Arc::new(Hierarchy::build_unit(args.depth, args.cap)?);
    if let Some(path) = &args.squares {
        let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        h.write_squares_jsonl(args.depth, &mut w)?;
        w.flush()?;
    }
    if let Some(levels) = &args.witness {
        let (first, last) = parse_levels(levels)?;
        let opts = HalfAcOptions {
            first_level: first,
            last_level: last,
            delta: None,
            epsilon: None,
        };
        let report = refute_half_ac(&h, &opts)?;
        write_report(out, &report, format)?;
        return Ok(Done::Report(Box::new(report)));
    }
    if args.stats || args.squares.is_none() {
        let stats = (1..=args.depth).map(|m| h.level_stats(m)).collect::<Result<Vec<_>, _>>()?;
        match format {
            Format::Json => write_json(out, &stats)?,
            Format::Tsv => {
                writeln!(out, "level\tcount\tomega\tcount_omega_sq\ttotal_measure\tmeasure_bound")?;
                for s in &stats {
                    writeln!(
                        out,
                        "{}\t{}\t{}\t{}\t{}\t{}",
                        s.level, s.count, s.omega, s.count_omega_sq, s.total_measure, s.measure_bound
                    )?;
                }
            }
        }
    }
    Ok(Done::Ok)
}

pub fn scan(args: &ScanArgs, format: Format, out: &mut dyn Write) -> Result<Done> {
    let spec = parse_spec(&args.spec)?;
    let need_point = || args.point.clone().ok_or_else(|| anyhow!("this scan needs --point"));
    let scan: Scan = match args.kind {
        ScanKind::Lip => {
            let radii = args.schedule.clone().unwrap_or_else(default_lip_radii);
            lip_at(&spec, &need_point()?, &radii, args.samples, args.factor.unwrap_or(2.0))?
        }
        ScanKind::Dirderiv => {
            let dir = args.dir.clone().ok_or_else(|| anyhow!("dirderiv needs --dir"))?;
            let steps = args.schedule.clone().unwrap_or_else(default_steps);
            dir_derivative(&spec, &need_point()?, &dir.0, &steps, args.tol)?
        }
        ScanKind::Energy => {
            let rect = args.rect.clone().ok_or_else(|| anyhow!("energy needs --rect a:b"))?;
            dirichlet_energy(&spec, &rect, args.levels, args.factor.unwrap_or(1.2))?
        }
    };
    match format {
        Format::Json => write_json(out, &scan)?,
        Format::Tsv => scan.write_tsv(&mut *out)?,
    }
    Ok(Done::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_exponent_defaults_to_dimension() {
        assert_eq!(parse_class("1ac", 3).unwrap().exponent, 3);
        assert_eq!(parse_class("alpha:1/2^4", 2).unwrap().exponent, 4);
        assert!(parse_class("nonsense", 2).is_err());
    }

    #[test]
    fn level_ranges() {
        assert_eq!(parse_levels("2:5").unwrap(), (2, 5));
        assert!(parse_levels("2-5").is_err());
    }

    #[test]
    fn float_formatting() {
        assert_eq!(fmt_float(0.0), "0");
        assert_eq!(fmt_float(0.5), "0.5");
        assert_eq!(fmt_float(2e-20), "2e-20");
    }
}
