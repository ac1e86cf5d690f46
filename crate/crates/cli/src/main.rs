//! `minksplit` command-line front end.
//!
//! Exit codes: 0 success, 1 input error, 2 infeasible (empty fiber or
//! point outside the sum), 3 solver non-convergence.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use minksplit::gallery::{self, Verdict};
use minksplit::geometry::{minkowski_sum_with, ConvexBody, SumOptions};
use minksplit::linmaps::{make_sum_map, transversality_check_body, ProductMap, Transversality};
use minksplit::splitting::continuity_report;
use minksplit::{io, Error, FiberSpec, Point, SelectionRule, SplitOptions};

#[derive(Parser)]
#[command(name = "minksplit", version, about = "Continuous splitting for Minkowski sums and fiber diagnostics")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a body or map and check its invariants.
    Validate { file: PathBuf },
    /// Minkowski sum of two bodies, written as a polytope.
    Sum {
        a: PathBuf,
        b: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Support directions for sums with an ellipsoid.
        #[arg(long)]
        directions: Option<usize>,
    },
    /// Split one point `c = L(a, b)`.
    Split {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Anchor of the min-norm selection in the joint space (default 0).
        #[arg(long, allow_hyphen_values = true)]
        anchor: Option<String>,
    },
    /// Split every sample of a sampled map (CSV `id,adj,v0,...`).
    SplitMap {
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        samples: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Per-edge jump report.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Anchor each sample at the previous selection.
        #[arg(long)]
        tracking: bool,
    },
    /// Fiber distances from a body point over a list of targets.
    Probe {
        #[arg(long)]
        body: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long)]
        targets: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Named bodies and their experiments.
    Gallery {
        which: GalleryBody,
        /// Spiral or polygon resolution.
        #[arg(long, default_value_t = gallery::DEFAULT_SPIRAL_N)]
        n: usize,
        /// Ambient dimension of the Schauder truncation.
        #[arg(long, default_value_t = 10)]
        dim: usize,
        #[arg(long, default_value_t = gallery::DEFAULT_DELTA)]
        delta: f64,
        #[arg(long, default_value_t = gallery::DEFAULT_PATH_SAMPLES)]
        samples: usize,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write the body as JSON.
        #[arg(long)]
        body_out: Option<PathBuf>,
    },
    /// Check that no boundary segment of the body is parallel to the kernel.
    Transversal {
        #[arg(long)]
        body: PathBuf,
        #[arg(long)]
        map: PathBuf,
    },
}

#[derive(Args)]
struct Pair {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// Product map JSON.
    #[arg(long, conflicts_with = "sum", required_unless_present = "sum")]
    map: Option<PathBuf>,
    /// Use `L(a, b) = a + b`.
    #[arg(long)]
    sum: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum GalleryBody {
    Spiral,
    Remark2,
    Schauder,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot write {}", path.display()))?,
    ))
}

fn body(path: &Path) -> Result<ConvexBody> {
    io::parse_body(&read(path)?).with_context(|| path.display().to_string())
}

fn tolerance() -> Result<f64> {
    match std::env::var(minksplit::TOL_ENV) {
        Err(_) => Ok(minksplit::DEFAULT_TOL),
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(t) if t.is_finite() && t > 0.0 => Ok(t),
            _ => bail!(Error::InvalidInput(format!("{} must be a positive number, got {s:?}", minksplit::TOL_ENV))),
        },
    }
}

impl Pair {
    fn load(&self) -> Result<(ConvexBody, ConvexBody, ProductMap)> {
        let (a, b) = (body(&self.a)?, body(&self.b)?);
        let l = match &self.map {
            Some(p) => io::parse_product_map(&read(p)?).with_context(|| p.display().to_string())?,
            None => {
                if a.dim() != b.dim() {
                    bail!(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
                }
                make_sum_map(a.dim())?
            }
        };
        Ok((a, b, l))
    }
}

fn run(cli: Cli) -> Result<()> {
    let tol = tolerance()?;
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Validate { file } => {
            let doc = io::parse_document(&read(&file)?)?;
            match &doc {
                io::Document::Body(ConvexBody::Polytope(p)) => writeln!(
                    out,
                    "ok polytope dim={} affine_dim={} vertices={}",
                    p.dim(),
                    p.affine_dim(),
                    p.num_vertices()
                )?,
                io::Document::Body(ConvexBody::Ellipsoid(e)) => writeln!(out, "ok ellipsoid dim={}", e.dim())?,
                io::Document::LinearMap(l) => {
                    writeln!(out, "ok linear_map {}x{} kernel_dim={}", l.rows(), l.cols(), l.kernel_dim())?
                }
                io::Document::ProductMap(l) => {
                    let (n1, n2) = l.factor_dims();
                    writeln!(out, "ok product_map rows={} factors={n1}+{n2}", l.left().nrows())?
                }
            }
        }
        Command::Sum { a, b, output, directions } => {
            let s = minkowski_sum_with(&body(&a)?, &body(&b)?, SumOptions { directions, seed: cli.seed })?;
            let mut w = create(&output)?;
            writeln!(w, "{}", io::body_to_json(&s.body))?;
            w.flush()?;
            writeln!(out, "hausdorff_gap={:e}", s.hausdorff_gap)?;
        }
        Command::Split { pair, point, anchor } => {
            let (a, b, l) = pair.load()?;
            let c = io::parse_point(&point)?;
            let rule = match anchor {
                Some(s) => SelectionRule::min_norm_to(io::parse_point(&s)?),
                None => SelectionRule::origin(a.dim() + b.dim()),
            };
            let s = minksplit::split(&a, &b, &l, &c, &rule, tol)?;
            writeln!(out, "a={} b={}", s.a, s.b)?;
            writeln!(out, "residual={:e} body_violation={:e}", s.residual, s.body_violation)?;
        }
        Command::SplitMap { pair, samples, output, report, tracking } => {
            let (a, b, l) = pair.load()?;
            let f = io::read_sampled_map_csv(BufReader::new(
                File::open(&samples).with_context(|| format!("cannot read {}", samples.display()))?,
            ))?;
            let rule = SelectionRule::origin(a.dim() + b.dim());
            let splits = minksplit::split_sampled_map(&a, &b, &l, &f, &rule, SplitOptions { tol, tracking })?;
            let rep = continuity_report(&splits, &f.edges, &l)?;
            io::write_splits_csv(create(&output)?, &f.ids, &splits)?;
            if let Some(p) = report {
                io::write_continuity_csv(create(&p)?, &rep)?;
            }
            writeln!(out, "samples={} max_jump={} max_fiber_jump={}", f.len(), rep.max_jump, rep.max_fiber_jump)?;
        }
        Command::Probe { body: bp, map, at, targets, output } => {
            let c = body(&bp)?;
            let l = io::parse_linear_map(&read(&map)?)?;
            let z = io::parse_point(&at)?;
            let ys = io::read_points_csv(BufReader::new(
                File::open(&targets).with_context(|| format!("cannot read {}", targets.display()))?,
            ))?;
            let r = gallery::openness_probe(&c.into(), &l, &z, &ys, tol)?;
            io::write_probe_csv(create(&output)?, &r)?;
            let infeasible = r.targets.iter().filter(|t| t.dist.is_none()).count();
            match r.verdict {
                Verdict::OpenAt => writeln!(out, "verdict=open_at infeasible_targets={infeasible}")?,
                Verdict::NotOpenAt { epsilon } => {
                    writeln!(out, "verdict=not_open_at epsilon={epsilon} infeasible_targets={infeasible}")?
                }
            }
        }
        Command::Gallery { which, n, dim, delta, samples, output, body_out } => match which {
            GalleryBody::Spiral | GalleryBody::Remark2 => {
                let c = match which {
                    GalleryBody::Spiral => gallery::spiral_body(n)?,
                    _ => gallery::remark2_body(n)?,
                };
                if let Some(p) = body_out {
                    writeln!(create(&p)?, "{}", io::body_to_json(&c.clone().into()))?;
                }
                let exp = gallery::polygon_path_experiment(&c, n, delta, samples, tol)?;
                io::write_path_csv(create(&output)?, &exp)?;
                let spec = FiberSpec::new(ConvexBody::from(c), gallery::vertical_projection(), Point::from_slice(&[1.0, 0.0])?)?;
                let diam = minksplit::fiber_diameter(&spec, 20, cli.seed, tol)?;
                writeln!(
                    out,
                    "first_z={} last_z={} max_jump={} max_fiber_jump={} fiber_diameter_over_(1,0)={}",
                    exp.first()[2],
                    exp.last()[2],
                    exp.report.max_jump,
                    exp.report.max_fiber_jump,
                    diam
                )?;
            }
            GalleryBody::Schauder => {
                let c = gallery::schauder_body(dim)?;
                if let Some(p) = body_out {
                    writeln!(create(&p)?, "{}", io::body_to_json(&c.clone().into()))?;
                }
                schauder_table(&c, dim, cli.seed, tol, create(&output)?)?;
                writeln!(out, "dim={dim} vertices={}", c.num_vertices())?;
            }
        },
        Command::Transversal { body: bp, map } => {
            let c = body(&bp)?;
            let l = io::parse_linear_map(&read(&map)?)?;
            match transversality_check_body(&c, &l)? {
                Transversality::Pass => writeln!(out, "pass")?,
                Transversality::Fail { facet, direction, chord } => {
                    write!(out, "fail facet={facet} direction={direction}")?;
                    if let Some((p, q)) = chord {
                        write!(out, " chord={p}-{q}")?;
                    }
                    writeln!(out)?;
                }
            }
        }
    }
    Ok(())
}

const LAMBDAS: [f64; 3] = [0.1, 0.5, 1.0];

/// One row per `n = 2..=N`: fiber diameters over `±eₙ/n`, `dist(e₁, fiber)`,
/// and the measured distance of `λe₁ + eₙ/n` to the body next to the bound.
fn schauder_table(c: &minksplit::Polytope, dim: usize, seed: u64, tol: f64, w: impl Write) -> Result<()> {
    let l = gallery::schauder_map(dim)?;
    let body = ConvexBody::from(c.clone());
    let e1 = Point::unit(dim, 0);
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["n", "target_norm", "diameter_plus", "diameter_minus", "dist_e1"].iter().map(|s| s.to_string()).collect::<Vec<_>>();
    for lam in LAMBDAS {
        header.push(format!("bound_{lam}"));
        header.push(format!("dist_{lam}"));
    }
    wtr.write_record(&header)?;
    for k in 2..=dim {
        let plus = FiberSpec::new(body.clone(), l.clone(), gallery::schauder_target(dim, k, 1.0)?)?;
        let minus = plus.with_target(gallery::schauder_target(dim, k, -1.0)?)?;
        let mut row = vec![
            k.to_string(),
            (1.0 / k as f64).to_string(),
            minksplit::fiber_diameter(&plus, 10, seed, tol)?.to_string(),
            minksplit::fiber_diameter(&minus, 10, seed, tol)?.to_string(),
            minksplit::dist_to_fiber(&e1, &plus, tol)?.to_string(),
        ];
        for lam in LAMBDAS {
            let mut z = gallery::schauder_generator(dim, k, false).into_vector();
            z[0] += lam;
            row.push(gallery::lemma25_bound(lam, k, 1.0, 1.0)?.to_string());
            row.push(body.distance(&Point::from(z))?.to_string());
        }
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.chain().find_map(|c| c.downcast_ref::<Error>()).map(Error::root) {
        Some(Error::EmptyFiber { .. }) => 2,
        Some(Error::NonConvergence { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
