//! Command definitions and their implementations.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use ckc::closure::link_directions;
use ckc::cube::{
    cube_to_diagonals, three_long_links, to_u, CubePoint, HypothesisCheck, LongLinkRule,
};
use ckc::diagonal::{
    decompose, membership_zan_stein, monte_carlo_volume, planar_area, DiagonalSpace,
};
use ckc::{DiagonalVector, LinkLengths};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::pipeline::{sample_many, sample_one};
use crate::record::{fmt_f64, parse_records, write_json_lines, write_records_csv, Record};

/// Largest chain for which `diagspace` tabulates points.
pub const MAX_TABULATED_LINKS: usize = 8;

#[derive(Debug, Parser)]
#[command(
    name = "ckc",
    version,
    about = "Random closed kinematic chains via diagonal lengths"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample closed configurations.
    Sample(SampleArgs),
    /// Check the closure residual of stored records.
    Verify(VerifyArgs),
    /// Describe the diagonal space and tabulate membership.
    Diagspace(DiagspaceArgs),
    /// Evaluate the cube parametrization.
    Gamma(GammaArgs),
    /// Export link directions of one closed configuration.
    Directions(DirectionsArgs),
    /// Time the sampling pipeline over chain sizes.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct LinkArgs {
    /// Comma-separated link lengths.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub links: Option<Vec<f64>>,
    /// File with link lengths separated by commas or whitespace.
    #[arg(long)]
    pub links_file: Option<PathBuf>,
    /// N links of length one.
    #[arg(long, value_name = "N")]
    pub unit_links: Option<usize>,
}

impl LinkArgs {
    pub fn resolve(&self) -> CliResult<LinkLengths> {
        let a = if let Some(v) = &self.links {
            v.clone()
        } else if let Some(path) = &self.links_file {
            let text = fs::read_to_string(path)?;
            text.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|e| CliError::Input(format!("{t}: {e}")))
                })
                .collect::<CliResult<_>>()?
        } else if let Some(n) = self.unit_links {
            vec![1.0; n]
        } else {
            return Err(CliError::Input("no links given".into()));
        };
        Ok(LinkLengths::new(a)?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub links: LinkArgs,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest accepted residual relative to the total link length.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// JSON file with one record or an array of records.
    pub input: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct DiagspaceArgs {
    #[command(flatten)]
    pub links: LinkArgs,
    /// Estimate the area by Monte Carlo (five links only).
    #[arg(long)]
    pub area: bool,
    /// Monte-Carlo points for the area estimate.
    #[arg(long, default_value_t = 1_000_000)]
    pub points: usize,
    /// Grid resolution per axis (up to five links) for the CSV table.
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    /// Random box points for the CSV table (six or more links).
    #[arg(long, default_value_t = 10_000)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV file for the membership table.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GammaArgs {
    #[command(flatten)]
    pub links: LinkArgs,
    /// Random cube points.
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    /// Evaluate a regular grid with this many points per axis instead.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Evaluate even without three long links.
    #[arg(long)]
    pub force: bool,
    /// Accept pairs summing to exactly half the total length.
    #[arg(long)]
    pub non_strict: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DirectionsArgs {
    #[command(flatten)]
    pub links: LinkArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "1000,10000,100000,1000000"
    )]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Parses arguments and runs the command, writing the report to `stdout`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            write!(stdout, "{}", e.render())?;
            return Ok(());
        }
        Err(e) => return Err(CliError::Input(e.render().to_string())),
    };
    match cli.command {
        Command::Sample(a) => cmd_sample(&a, stdout),
        Command::Verify(a) => cmd_verify(&a, stdout),
        Command::Diagspace(a) => cmd_diagspace(&a, stdout),
        Command::Gamma(a) => cmd_gamma(&a, stdout),
        Command::Directions(a) => cmd_directions(&a, stdout),
        Command::Bench(a) => cmd_bench(&a, stdout),
    }
}

fn open_output(
    path: &Option<PathBuf>,
    stdout: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> CliResult<()>,
) -> CliResult<()> {
    match path {
        Some(p) => {
            let mut file = std::io::BufWriter::new(fs::File::create(p)?);
            f(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => f(stdout),
    }
}

pub fn cmd_sample(args: &SampleArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let links = args.links.resolve()?;
    let samples = sample_many(&links, args.seed, args.count)?;
    let records: Vec<Record> = samples
        .iter()
        .map(|s| Record::from_sample(&links, s))
        .collect();
    let worst = records.iter().map(|r| r.residual).fold(0.0, f64::max);
    open_output(&args.output.out, stdout, |w| match args.output.format {
        Format::Json => write_json_lines(w, &records),
        Format::Csv => write_records_csv(w, &records),
    })?;
    if worst > args.tol * links.total() {
        return Err(CliError::Verification(format!(
            "largest residual {worst:e} exceeds {:e}",
            args.tol * links.total()
        )));
    }
    Ok(())
}

pub fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let text = fs::read_to_string(&args.input)?;
    let records = parse_records(&text)?;
    let mut failed = 0;
    for (i, r) in records.iter().enumerate() {
        let rep = r.check()?;
        let ok = rep.passes(args.tol);
        failed += usize::from(!ok);
        writeln!(
            stdout,
            "record {i}: n = {}, absolute = {:e}, relative = {:e}, {}",
            r.links.len(),
            rep.absolute,
            rep.relative,
            if ok { "ok" } else { "FAIL" }
        )?;
    }
    if failed > 0 {
        return Err(CliError::Verification(format!(
            "{failed} of {} records",
            records.len()
        )));
    }
    Ok(())
}

pub fn cmd_diagspace(args: &DiagspaceArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let links = args.links.resolve()?;
    let n = links.len();
    writeln!(stdout, "links: {links}")?;
    writeln!(stdout, "{}", decompose(&links))?;
    let space = DiagonalSpace::new(&links);
    let bx = space.bounding_box();
    for (i, iv) in bx.iter().enumerate() {
        writeln!(stdout, "box L_{}: {iv}", i + 2)?;
    }
    if args.area {
        if n != 5 {
            return Err(CliError::Input(format!("area needs five links, got {n}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        let mc = monte_carlo_volume(&links, args.points, &mut rng);
        writeln!(
            stdout,
            "area (monte carlo, {} points): {mc:.6}",
            args.points
        )?;
        writeln!(stdout, "area (exact): {:.6}", planar_area(&links)?)?;
    }
    if let Some(path) = &args.out {
        if n > MAX_TABULATED_LINKS {
            return Err(CliError::Input(format!(
                "dimension too large to tabulate: {n} links (at most {MAX_TABULATED_LINKS})"
            )));
        }
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = (2..=n - 2).map(|j| format!("L_{j}")).collect();
        header.extend(["in_p", "in_q", "in_ds"].map(String::from));
        w.write_record(&header)?;
        let dec = decompose(&links);
        let mut row = |v: &[f64]| -> CliResult<()> {
            let d = DiagonalVector::from_variable(&links, v)?;
            let (p, q) = (dec.in_polytope(&d, 0.0), dec.in_cuboid(&d, 0.0));
            let mut rec: Vec<String> = v.iter().map(|&x| fmt_f64(x)).collect();
            rec.extend([p, q, p && q].map(|b| u8::from(b).to_string()));
            w.write_record(&rec)?;
            Ok(())
        };
        if n <= 5 {
            for v in grid_points(
                &bx.iter().map(|iv| (iv.lo, iv.hi)).collect::<Vec<_>>(),
                args.grid,
            ) {
                row(&v)?;
            }
        } else {
            use rand::Rng;
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            for _ in 0..args.count {
                let v: Vec<f64> = bx
                    .iter()
                    .map(|iv| rng.random_range(iv.lo..=iv.hi))
                    .collect();
                row(&v)?;
            }
        }
        w.flush()?;
    }
    Ok(())
}

/// Regular grid over a box, `per_axis` points per axis, last axis fastest.
fn grid_points(ranges: &[(f64, f64)], per_axis: usize) -> Vec<Vec<f64>> {
    let axis = |(lo, hi): (f64, f64)| -> Vec<f64> {
        if per_axis <= 1 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..per_axis)
                .map(|i| lo + (hi - lo) * i as f64 / (per_axis - 1) as f64)
                .collect()
        }
    };
    let mut out = vec![Vec::new()];
    for &r in ranges {
        let xs = axis(r);
        out = out
            .into_iter()
            .flat_map(|p| {
                xs.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

#[derive(Debug, Serialize)]
struct GammaRow {
    s: Vec<f64>,
    u: Vec<f64>,
    diagonals: Vec<f64>,
    member: bool,
}

pub fn cmd_gamma(args: &GammaArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let links = args.links.resolve()?;
    let n = links.len();
    let rule = if args.non_strict {
        LongLinkRule::NonStrict
    } else {
        LongLinkRule::Strict
    };
    let check = HypothesisCheck {
        rule,
        force: args.force,
    };
    let long = three_long_links(&links, rule);
    if long.is_none() && !args.force {
        return Err(ckc::CkcError::NoLongLinks.into());
    }
    let dim = n - 3;
    let points: Vec<CubePoint> = match args.grid {
        Some(g) => {
            let total = (g as f64).powi(dim as i32);
            if total > 1e7 {
                return Err(CliError::Input(format!(
                    "grid of {total} points is too large"
                )));
            }
            grid_points(&vec![(-1.0, 1.0); dim], g)
                .into_iter()
                .map(CubePoint::new)
                .collect::<Result<_, _>>()?
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            (0..args.count)
                .map(|_| CubePoint::random(dim, &mut rng))
                .collect()
        }
    };
    let eps = 1e-12 * links.total();
    let mut rows = Vec::with_capacity(points.len());
    for (i, s) in points.iter().enumerate() {
        let d = cube_to_diagonals(&links, s, check, args.seed.wrapping_add(i as u64))?;
        rows.push(GammaRow {
            s: s.as_slice().to_vec(),
            u: to_u(&links, &d)?.as_slice().to_vec(),
            member: membership_zan_stein(&links, &d, eps),
            diagonals: d.as_slice().to_vec(),
        });
    }
    let members = rows.iter().filter(|r| r.member).count();
    writeln!(
        stdout,
        "links: {links}; three long links: {}; points: {}; members: {members}",
        long.map(|l| format!("{:?}", l.indices))
            .unwrap_or_else(|| "none".into()),
        rows.len()
    )?;
    if let Some(path) = &args.output.out {
        match args.output.format {
            Format::Json => {
                let mut f = std::io::BufWriter::new(fs::File::create(path)?);
                write_json_lines(&mut f, &rows)?;
                f.flush()?;
            }
            Format::Csv => {
                let mut w = csv::Writer::from_path(path)?;
                let mut header: Vec<String> = (2..=n - 2).map(|j| format!("s_{j}")).collect();
                header.extend((2..=n - 2).map(|j| format!("U_{j}")));
                header.extend((1..n).map(|j| format!("L_{j}")));
                header.push("member".into());
                w.write_record(&header)?;
                for r in &rows {
                    let mut rec: Vec<String> =
                        r.s.iter()
                            .chain(&r.u)
                            .chain(&r.diagonals)
                            .map(|&x| fmt_f64(x))
                            .collect();
                    rec.push(u8::from(r.member).to_string());
                    w.write_record(&rec)?;
                }
                w.flush()?;
            }
        }
    }
    if members < rows.len() && long.is_some() {
        return Err(CliError::Verification(format!(
            "{} cube points left the diagonal space",
            rows.len() - members
        )));
    }
    Ok(())
}

pub fn cmd_directions(args: &DirectionsArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let links = args.links.resolve()?;
    let s = sample_one(&links, args.seed)?;
    let dirs = link_directions(&s.closed);
    let balance = s.closed.balance(&links).norm();
    open_output(&args.out, stdout, |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["index", "x", "y", "z", "length"])?;
        for (j, d) in dirs.iter().enumerate() {
            c.write_record([
                (j + 1).to_string(),
                fmt_f64(d.x),
                fmt_f64(d.y),
                fmt_f64(d.z),
                fmt_f64(links.get(j + 1)),
            ])?;
        }
        c.flush()?;
        Ok(())
    })?;
    if args.out.is_some() {
        writeln!(stdout, "balance norm: {balance:e}")?;
    }
    Ok(())
}

/// Least-squares line `t = slope·n + intercept` and its `R²`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r2 = if sxx > 0.0 && syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    (slope, my - slope * mx, r2)
}

pub fn cmd_bench(args: &BenchArgs, stdout: &mut dyn Write) -> CliResult<()> {
    writeln!(
        stdout,
        "{:>10} {:>12} {:>14}",
        "links", "seconds", "rel_residual"
    )?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &n in &args.sizes {
        let links = LinkLengths::unit(n)?;
        let t = Instant::now();
        let s = sample_one(&links, args.seed)?;
        let secs = t.elapsed().as_secs_f64();
        writeln!(
            stdout,
            "{n:>10} {secs:>12.4} {:>14.3e}",
            s.closed.residual / links.total()
        )?;
        xs.push(n as f64);
        ys.push(secs);
    }
    if xs.len() >= 2 {
        let (slope, icpt, r2) = linear_fit(&xs, &ys);
        writeln!(
            stdout,
            "fit: seconds = {slope:.3e} * n + {icpt:.3e}, r^2 = {r2:.4}"
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_enumerates_product() {
        let g = grid_points(&[(0.0, 1.0), (2.0, 4.0)], 3);
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], vec![0.0, 2.0]);
        assert_eq!(g[1], vec![0.0, 3.0]);
        assert_eq!(g[8], vec![1.0, 4.0]);
    }

    #[test]
    fn fit_recovers_line() {
        let (s, b, r2) = linear_fit(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]);
        assert!((s - 2.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parse_errors_are_input_errors() {
        let mut out = Vec::new();
        let e = run(["ckc", "sample", "--links", "1,x,1"], &mut out).unwrap_err();
        assert_eq!(e.exit_code(), 1);
        let e = run(["ckc", "sample", "--links", "5,1,1"], &mut out).unwrap_err();
        assert_eq!(e.exit_code(), 3);
    }
}
