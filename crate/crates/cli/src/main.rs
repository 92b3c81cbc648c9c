//! `robinsym`: command line front end of the symmetrization laboratory.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or a solver
//! gives up, 2 on usage and configuration errors.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use robinsym::compare::{convergence_study, full_suite, ComparisonReport, ConvergenceRow, SuiteConfig};
use robinsym::fem::{FieldSummary, RobinSystem};
use robinsym::geometry::{
    isoperimetric_constant, isoperimetric_ratio, parse_vertices, symmetrized_disk, weighted_area,
    weighted_perimeter, Shape, WeightedDomain,
};
use robinsym::io::{parse_key_values, to_json, write_file, write_json};
use robinsym::mesh::triangulate;
use robinsym::radial::{radial_eigen, solve_symmetrized_on, DEFAULT_EIGEN_GRID, DEFAULT_GRID};
use robinsym::rearrange::{decreasing_rearrangement, distribution_function, rearranged_source_on};
use robinsym::source::Source;
use robinsym::Error;

#[derive(Parser, Debug)]
#[command(name = "robinsym", version, about = "Weighted Schwarz symmetrization of the Robin Laplacian")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Weighted area, perimeter, symmetrized radius and isoperimetric ratio
    Measure(CommonArgs),
    /// Solve the Robin problem and write the nodal field
    Solve(CommonArgs),
    /// Rearrange the source and the solution, solve on the symmetrized disk
    Symmetrize(CommonArgs),
    /// First eigenvalue on the domain and on its symmetrized disk
    Eigen(CommonArgs),
    /// Run the comparison suite; exit 1 if any check fails
    Compare(CommonArgs),
    /// Refinement study of the torsion problem (default domain: disk)
    Convergence(ConvergenceArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct CommonArgs {
    /// key=value file; flags given on the command line take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// square | rectangle[:w:h] | ngon:n:r | lshape | disk
    #[arg(long)]
    shape: Option<String>,
    /// polygon vertex file, one "x y" pair per line
    #[arg(long)]
    vertices: Option<PathBuf>,
    /// weight exponent in (-2, 0]
    #[arg(long, allow_negative_numbers = true)]
    l: Option<f64>,
    /// Robin parameter
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    /// source: one | nonradial | gaussian | zero | const:c
    #[arg(long)]
    f: Option<String>,
    /// mesh size
    #[arg(long, allow_negative_numbers = true)]
    h: Option<f64>,
    /// levels of distribution functions
    #[arg(long)]
    levels: Option<usize>,
    /// cells of radial grids
    #[arg(long)]
    grid: Option<usize>,
    /// seed of the random subsets
    #[arg(long)]
    seed: Option<u64>,
    /// output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct ConvergenceArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// number of meshes (the first plus uniform refinements)
    #[arg(long, default_value_t = 3)]
    refinements: usize,
    /// skip the eigenvalue column
    #[arg(long)]
    no_eigen: bool,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Check(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Argument(_) | Error::Parse(_) | Error::Io(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Check(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Resolved run parameters.
#[derive(Debug, Clone)]
struct RunConfig {
    name: String,
    domain: WeightedDomain,
    l: f64,
    beta: f64,
    source: Source,
    source_given: bool,
    h: f64,
    levels: usize,
    grid: Option<usize>,
    seed: u64,
    out: PathBuf,
}

const KNOWN_KEYS: [&str; 10] = ["shape", "vertices", "l", "beta", "f", "h", "levels", "grid", "seed", "out"];

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, Failure> {
    value
        .parse()
        .map_err(|_| Failure::Usage(format!("invalid value {value:?} for {key}")))
}

impl RunConfig {
    fn resolve(args: &CommonArgs, default_shape: Shape) -> Result<Self, Failure> {
        let file: BTreeMap<String, String> = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
                parse_key_values(&text)?
            }
            None => BTreeMap::new(),
        };
        if let Some(key) = file.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(Failure::Usage(format!("unknown configuration key {key:?}")));
        }
        fn pick<T: std::str::FromStr + Clone>(
            flag: &Option<T>,
            file: &BTreeMap<String, String>,
            key: &str,
        ) -> Result<Option<T>, Failure> {
            match flag {
                Some(v) => Ok(Some(v.clone())),
                None => file.get(key).map(|v| parse_value(key, v)).transpose(),
            }
        }
        let l = pick(&args.l, &file, "l")?.unwrap_or(0.0);
        let beta = pick(&args.beta, &file, "beta")?.unwrap_or(1.0);
        let h = pick(&args.h, &file, "h")?.unwrap_or(0.1);
        let levels = pick(&args.levels, &file, "levels")?.unwrap_or(robinsym::rearrange::DEFAULT_LEVELS);
        let grid = pick(&args.grid, &file, "grid")?;
        let seed = pick(&args.seed, &file, "seed")?.unwrap_or(42);
        let out = pick(&args.out, &file, "out")?.unwrap_or_else(|| PathBuf::from("out"));
        let source_text: Option<String> = pick(&args.f, &file, "f")?;
        let source_given = source_text.is_some();
        let source: Source = source_text.as_deref().unwrap_or("one").parse()?;
        if !(h > 0.0) {
            return Err(Failure::Usage(format!("mesh size must be positive, got {h}")));
        }
        if levels < 2 {
            return Err(Failure::Usage("levels must be at least 2".into()));
        }
        let vertices: Option<PathBuf> = pick(&args.vertices, &file, "vertices")?;
        let shape_text: Option<String> = pick(&args.shape, &file, "shape")?;
        let (name, shape) = match (vertices, shape_text) {
            (Some(_), Some(_)) => {
                return Err(Failure::Usage("give either a shape or a vertex file, not both".into()))
            }
            (Some(path), None) => {
                let text = fs::read_to_string(&path)
                    .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
                let name = path
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "polygon".into());
                (name, Shape::Polygon(parse_vertices(&text)?))
            }
            (None, Some(s)) => {
                let shape: Shape = s.parse()?;
                (shape.name(), shape)
            }
            (None, None) => (default_shape.name(), default_shape),
        };
        let domain = WeightedDomain::from_shape(&shape, l, beta)?;
        Ok(Self {
            name,
            domain,
            l,
            beta,
            source,
            source_given,
            h,
            levels,
            grid,
            seed,
            out,
        })
    }

    fn output_dir(&self) -> Result<&Path, Failure> {
        fs::create_dir_all(&self.out)
            .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", self.out.display())))?;
        Ok(&self.out)
    }
}

fn cmd_measure(cfg: &RunConfig) -> Result<(), Failure> {
    let area = weighted_area(&cfg.domain)?;
    let perimeter = weighted_perimeter(&cfg.domain)?;
    let disk = symmetrized_disk(area, cfg.l, cfg.beta)?;
    let report = json!({
        "domain": cfg.name,
        "l": cfg.l,
        "area_l": area,
        "perimeter": perimeter,
        "r_sharp": disk.radius,
        "isoperimetric_ratio": isoperimetric_ratio(&cfg.domain)?,
        "C_l": isoperimetric_constant(cfg.l),
    });
    write_json(cfg.output_dir()?.join("measure.json"), &report)?;
    print!("{}", to_json(&report));
    Ok(())
}

fn cmd_solve(cfg: &RunConfig) -> Result<(), Failure> {
    let mesh = Arc::new(triangulate(&cfg.domain, cfg.h)?);
    let system = RobinSystem::new(mesh.clone(), &cfg.domain)?;
    let u = system.solve(cfg.source.as_fn())?;
    let summary = FieldSummary::of(&u, &system.rules);
    let dir = cfg.output_dir()?;
    write_file(dir.join("field.csv"), |w| u.write_csv(w))?;
    let report = json!({
        "domain": cfg.name,
        "l": cfg.l,
        "beta": cfg.beta,
        "h": cfg.h,
        "f": cfg.source.to_string(),
        "nodes": mesh.num_nodes(),
        "triangles": mesh.num_triangles(),
        "min": summary.min,
        "max": summary.max,
        "L1": summary.l1,
        "L2": summary.l2,
    });
    write_json(dir.join("solve.json"), &report)?;
    print!("{}", to_json(&report));
    Ok(())
}

fn cmd_symmetrize(cfg: &RunConfig) -> Result<(), Failure> {
    let mesh = Arc::new(triangulate(&cfg.domain, cfg.h)?);
    let system = RobinSystem::new(mesh.clone(), &cfg.domain)?;
    let u = system.solve(cfg.source.as_fn())?;
    let fstar = rearranged_source_on(&system.rules, mesh.num_triangles(), cfg.source.as_fn(), cfg.levels)?;
    let disk = symmetrized_disk(weighted_area(&cfg.domain)?, cfg.l, cfg.beta)?;
    let v = solve_symmetrized_on(&fstar, &disk, cfg.grid.unwrap_or(DEFAULT_GRID))?;
    let mu = distribution_function(&u, cfg.l, cfg.levels);
    let ustar = decreasing_rearrangement(&mu);
    let dir = cfg.output_dir()?;
    write_file(dir.join("distribution.csv"), |w| mu.write_csv(w))?;
    write_file(dir.join("u_star.csv"), |w| ustar.write_csv(w))?;
    write_file(dir.join("f_star.csv"), |w| fstar.write_csv(w))?;
    write_file(dir.join("v.csv"), |w| v.write_csv(w))?;
    let scalars = v.scalars(None);
    write_json(dir.join("radial.json"), &scalars)?;
    print!("{}", to_json(&scalars));
    Ok(())
}

fn cmd_eigen(cfg: &RunConfig) -> Result<(), Failure> {
    let mesh = Arc::new(triangulate(&cfg.domain, cfg.h)?);
    let fem = RobinSystem::new(mesh.clone(), &cfg.domain)?.smallest_eigenpair()?;
    let disk = symmetrized_disk(weighted_area(&cfg.domain)?, cfg.l, cfg.beta)?;
    let radial = radial_eigen(&disk, cfg.grid.unwrap_or(DEFAULT_EIGEN_GRID))?;
    let dir = cfg.output_dir()?;
    write_file(dir.join("eigenfunction.csv"), |w| fem.field.write_csv(w))?;
    write_file(dir.join("radial_eigenfunction.csv"), |w| radial.field.write_csv(w))?;
    let report = json!({
        "domain": cfg.name,
        "l": cfg.l,
        "beta": cfg.beta,
        "h": cfg.h,
        "nodes": mesh.num_nodes(),
        "lambda": fem.lambda,
        "residual": fem.residual,
        "lambda_sharp": radial.lambda,
        "lambda_sharp_coarse": radial.lambda_coarse,
        "lambda_sharp_fine": radial.lambda_fine,
        "ratio": fem.lambda / radial.lambda,
        "R": disk.radius,
    });
    write_json(dir.join("eigen.json"), &report)?;
    print!("{}", to_json(&report));
    Ok(())
}

fn cmd_compare(cfg: &RunConfig) -> Result<(), Failure> {
    let sources = match (cfg.source_given, cfg.source) {
        (true, Source::One) | (false, _) => vec![Source::One, Source::Nonradial],
        (true, f) => vec![Source::One, f],
    };
    let config = SuiteConfig {
        h: cfg.h,
        n_levels: cfg.levels,
        radial_grid: cfg.grid.unwrap_or(DEFAULT_GRID),
        seed: cfg.seed,
        ls: vec![cfg.l],
        betas: vec![cfg.beta],
        sources,
        ..SuiteConfig::default()
    };
    let reports: Vec<ComparisonReport> = full_suite(&cfg.name, &cfg.domain, &config);
    write_json(cfg.output_dir()?.join("compare.json"), &reports)?;
    let mut failing = Vec::new();
    let mut total = 0;
    for r in &reports {
        total += r.checks.len();
        let tag = r.source.as_deref().unwrap_or("-");
        for c in r.failing() {
            failing.push(format!("{} [f={tag}]: {} (lhs {}, rhs {}, margin {})", r.domain, c.name, c.lhs, c.rhs, c.margin));
        }
        for e in &r.errors {
            failing.push(format!("{} [f={tag}]: error: {e}", r.domain));
        }
    }
    for r in &reports {
        for c in &r.checks {
            println!(
                "{} {} f={} {}: lhs={} rhs={} margin={}",
                if c.pass { "PASS" } else { "FAIL" },
                r.domain,
                r.source.as_deref().unwrap_or("-"),
                c.name,
                c.lhs,
                c.rhs,
                c.margin
            );
        }
    }
    println!("{} checks, {} failing", total, failing.len());
    if failing.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("failing checks:\n  {}", failing.join("\n  "))))
    }
}

fn convergence_csv(rows: &[ConvergenceRow], with_eigen: bool) -> String {
    let mut out = String::from("h,nodes,error_max,error_l2");
    if with_eigen {
        out.push_str(",lambda");
    }
    let with_order = rows.len() > 1;
    if with_order {
        out.push_str(",order,order_max");
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{},{},{}", r.h, r.nodes, r.error_max, r.error_l2));
        if with_eigen {
            out.push_str(&format!(",{}", r.lambda.map(|v| v.to_string()).unwrap_or_default()));
        }
        if with_order {
            let fmt = |o: Option<f64>| o.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(",{},{}", fmt(r.order), fmt(r.order_max)));
        }
        out.push('\n');
    }
    out
}

fn cmd_convergence(args: &ConvergenceArgs) -> Result<(), Failure> {
    let cfg = RunConfig::resolve(&args.common, Shape::disk())?;
    if args.refinements == 0 {
        return Err(Failure::Usage("at least one mesh level is required".into()));
    }
    let with_eigen = !args.no_eigen;
    let rows = convergence_study(&cfg.domain, cfg.h, args.refinements, with_eigen)?;
    let table = convergence_csv(&rows, with_eigen);
    write_file(cfg.output_dir()?.join("convergence.csv"), |w| {
        std::io::Write::write_all(w, table.as_bytes())
    })?;
    print!("{table}");
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Measure(a) => cmd_measure(&RunConfig::resolve(a, Shape::Square)?),
        Command::Solve(a) => cmd_solve(&RunConfig::resolve(a, Shape::Square)?),
        Command::Symmetrize(a) => cmd_symmetrize(&RunConfig::resolve(a, Shape::Square)?),
        Command::Eigen(a) => cmd_eigen(&RunConfig::resolve(a, Shape::Square)?),
        Command::Compare(a) => cmd_compare(&RunConfig::resolve(a, Shape::Square)?),
        Command::Convergence(a) => cmd_convergence(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Check(m) => eprintln!("{m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
