//! Subcommand wiring. Exit codes: 0 success, 2 configuration error,
//! 3 format/file error, 4 verification failure. Logs go to stderr; data goes
//! to files or stdout.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fz_core::basis::{FZIndex, Truncation};
use fz_core::descriptor::Descriptor;
use fz_core::error::FzError;
use fz_core::grid::{self, GridFunction};
use fz_core::lattice::shells_up_to;
use fz_core::{checks, conv, io, kernels, transform};
use rand::{Rng, SeedableRng};

#[derive(Parser)]
#[command(
    name = "fzc",
    version,
    about = "Fourier-Zernike expansions and disk convolutions"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a built-in function onto a binary grid file.
    Sample(SampleArgs),
    /// Expand a grid file into Fourier-Zernike coefficients.
    Expand(ExpandArgs),
    /// Convolve two inputs and write the coefficients of the result.
    Convolve(ConvolveArgs),
    /// Evaluate a coefficient file on a grid or at random disk points.
    Reconstruct(ReconstructArgs),
    /// Run the library invariant suites and report pass/fail.
    Verify(VerifyArgs),
    /// Build (and cache) one convolution kernel table.
    KernelTable(KernelTableArgs),
    /// Render a grid file as an 8-bit PGM image.
    Plot(PlotArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// Descriptor, e.g. zero | disk_indicator:0.5 | gauss_bump:0.15,0,0 |
    /// poly_bump:3,1 | cosine_hat:2
    #[arg(long = "fn")]
    function: String,
    /// Half-width of the sampling square.
    #[arg(long)]
    a: f64,
    /// Samples per axis (power of two).
    #[arg(long)]
    n: usize,
    /// Declared support radius; defaults to a.
    #[arg(long)]
    support: Option<f64>,
    #[arg(long)]
    out: PathBuf,
    /// Also write a CSV dump next to the grid.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ExpandArgs {
    #[arg(long)]
    grid: PathBuf,
    #[arg(long)]
    kmax: u32,
    #[arg(long = "nmax")]
    n_max: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ConvolveArgs {
    /// Left input: grid file path or descriptor string.
    #[arg(long)]
    f1: String,
    /// Right input: grid file path or descriptor string.
    #[arg(long)]
    f2: String,
    /// Half-width of the outer square (inputs must fit in the a/2 disk).
    #[arg(long)]
    a: f64,
    /// Samples per axis when sampling descriptors.
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long)]
    kmax: u32,
    #[arg(long = "nmax")]
    n_max: u32,
    /// Support radius for sampled descriptors; defaults to a/2.
    #[arg(long)]
    support: Option<f64>,
    #[arg(long, value_parser = ["spectral", "polar", "kernels", "brute"], default_value = "spectral")]
    route: String,
    /// Radial quadrature size for the polar route.
    #[arg(long, default_value_t = 256)]
    quad_r: usize,
    /// Angular quadrature size for the polar route.
    #[arg(long, default_value_t = 512)]
    quad_theta: usize,
    /// Kernel cache directory for the kernels route.
    #[arg(long)]
    kernel_dir: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long)]
    coeffs: PathBuf,
    /// Write an FZG1 grid of the partial sum with this many samples per axis.
    #[arg(long)]
    grid_out: Option<PathBuf>,
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Write a CSV of evaluations at seeded random disk points.
    #[arg(long)]
    points_out: Option<PathBuf>,
    #[arg(long, default_value_t = 512)]
    num_points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name; omit to run everything.
    #[arg(long)]
    suite: Option<String>,
}

#[derive(Args)]
struct KernelTableArgs {
    /// Left index as "n,m".
    #[arg(long)]
    left: String,
    /// Right index as "n,m".
    #[arg(long)]
    right: String,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    kmax: u32,
    #[arg(long = "nmax")]
    n_max: u32,
    /// Cache directory.
    #[arg(long)]
    dir: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    grid: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn exit_code_for(err: &FzError) -> ExitCode {
    match err {
        FzError::Format(_) | FzError::Io(_) => ExitCode::from(3),
        _ => ExitCode::from(2),
    }
}

pub fn run() -> ExitCode {
    let cli = Cli::parse();
    init_thread_pool();
    let result = match cli.cmd {
        Cmd::Sample(args) => cmd_sample(args),
        Cmd::Expand(args) => cmd_expand(args),
        Cmd::Convolve(args) => cmd_convolve(args),
        Cmd::Reconstruct(args) => cmd_reconstruct(args),
        Cmd::Verify(args) => return cmd_verify(args),
        Cmd::KernelTable(args) => cmd_kernel_table(args),
        Cmd::Plot(args) => cmd_plot(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}

/// FZC_THREADS caps internal parallelism; 0 or unset means automatic.
fn init_thread_pool() {
    #[cfg(feature = "parallel")]
    {
        if let Ok(text) = std::env::var("FZC_THREADS") {
            match text.trim().parse::<usize>() {
                Ok(0) => {}
                Ok(t) => {
                    let _ = rayon::ThreadPoolBuilder::new()
                        .num_threads(t)
                        .build_global();
                }
                Err(_) => eprintln!("warning: ignoring unparsable FZC_THREADS={text:?}"),
            }
        }
    }
}

fn check_common(a: f64, n: usize, kmax: u32, n_max: u32) -> fz_core::Result<Truncation> {
    if !(a > 0.0) {
        return Err(FzError::Domain(format!(
            "half-width a must be positive, got {a}"
        )));
    }
    if !n.is_power_of_two() {
        return Err(FzError::Domain(format!(
            "N must be a power of two, got {n}"
        )));
    }
    if kmax as usize > n / 2 - 1 {
        return Err(FzError::Domain(format!(
            "kmax = {kmax} violates kmax <= N/2 - 1 for N = {n}"
        )));
    }
    Truncation::new(n_max)
}

fn cmd_sample(args: SampleArgs) -> fz_core::Result<()> {
    let desc = Descriptor::parse(&args.function)?;
    let support = args.support.unwrap_or(args.a);
    if !(args.a > 0.0) {
        return Err(FzError::Domain(format!(
            "half-width a must be positive, got {}",
            args.a
        )));
    }
    let g = grid::sample_function(&desc, args.a, args.n, support)?;
    io::write_grid(&args.out, &g)?;
    eprintln!(
        "sampled {} at N={} on [-{},{}]^2, support {}, mass {:.6e}",
        desc,
        args.n,
        args.a,
        args.a,
        support,
        g.mass().norm()
    );
    if let Some(csv) = args.csv {
        io::write_grid_csv(&csv, &g)?;
    }
    Ok(())
}

fn cmd_expand(args: ExpandArgs) -> fz_core::Result<()> {
    let g = io::read_grid(&args.grid)?;
    let trunc = check_common(g.a(), g.n(), args.kmax, args.n_max)?;
    let table = grid::fourier_coeffs(&g, args.kmax)?;
    if g.is_real() {
        let defect = table.hermitian_defect();
        eprintln!("real grid: Fourier table Hermitian within {defect:.3e}");
    }
    let coeffs = transform::fz_from_fourier(&table, trunc)?;
    io::write_coeffs_json(&args.out, &coeffs)?;
    eprintln!(
        "expanded {} -> {} coefficients, n_max {}, largest |C| = {:.6e}",
        args.grid.display(),
        coeffs.coeffs().len(),
        args.n_max,
        coeffs.max_abs()
    );
    Ok(())
}

enum ConvInput {
    Grid(Box<GridFunction>),
    Analytic(Descriptor),
}

fn load_conv_input(text: &str) -> fz_core::Result<ConvInput> {
    let path = Path::new(text);
    if path.is_file() {
        Ok(ConvInput::Grid(Box::new(io::read_grid(path)?)))
    } else {
        Ok(ConvInput::Analytic(Descriptor::parse(text)?))
    }
}

fn as_outer_grid(
    input: &ConvInput,
    a: f64,
    n: usize,
    support: f64,
) -> fz_core::Result<GridFunction> {
    match input {
        ConvInput::Grid(g) => {
            if g.a() != a {
                return Err(FzError::Geometry(format!(
                    "grid half-width {} does not match --a {a}",
                    g.a()
                )));
            }
            Ok((**g).clone())
        }
        ConvInput::Analytic(desc) => grid::sample_function(desc, a, n, support),
    }
}

fn cmd_convolve(args: ConvolveArgs) -> fz_core::Result<()> {
    let trunc = check_common(args.a, args.n, args.kmax, args.n_max)?;
    let b = args.a / 2.0;
    let support = args.support.unwrap_or(b);
    if support > b {
        return Err(FzError::Domain(format!(
            "support {support} exceeds a/2 = {b}; convolution inputs must fit the half-radius disk"
        )));
    }
    let in1 = load_conv_input(&args.f1)?;
    let in2 = load_conv_input(&args.f2)?;

    let coeffs = match args.route.as_str() {
        "spectral" => {
            let g1 = as_outer_grid(&in1, args.a, args.n, support)?;
            let g2 = as_outer_grid(&in2, args.a, args.n, support)?;
            check_support_pair(&g1, &g2, b)?;
            let t1 = grid::fourier_coeffs(&g1, args.kmax)?;
            let t2 = grid::fourier_coeffs(&g2, args.kmax)?;
            conv::conv_fz_coeffs(&t1, &t2, trunc)?
        }
        "polar" => {
            let (d1, d2) = match (&in1, &in2) {
                (ConvInput::Analytic(d1), ConvInput::Analytic(d2)) => (d1, d2),
                _ => {
                    return Err(FzError::Domain(
                        "the polar route integrates analytic descriptors; pass descriptors, not grid files".into(),
                    ))
                }
            };
            let t1 =
                grid::polar_fourier_coeffs(d1, b, args.a, args.kmax, args.quad_r, args.quad_theta)?;
            let t2 =
                grid::polar_fourier_coeffs(d2, b, args.a, args.kmax, args.quad_r, args.quad_theta)?;
            let shells = shells_up_to(args.kmax)?;
            conv::conv_fz_coeffs_polar(&t1, &t2, &shells, trunc)?
        }
        "kernels" => {
            let c1 = inner_coefficients(&in1, args.a, args.n, support, args.kmax, trunc)?;
            let c2 = inner_coefficients(&in2, args.a, args.n, support, args.kmax, trunc)?;
            let store = match &args.kernel_dir {
                Some(dir) => kernels::KernelStore::on_disk(dir.clone(), args.a, args.kmax, trunc)?,
                None => kernels::KernelStore::in_memory(args.a, args.kmax, trunc),
            };
            kernels::convolve_via_kernels(&c1, &c2, &store, trunc)?
        }
        "brute" => {
            let g1 = as_outer_grid(&in1, args.a, args.n, support)?;
            let g2 = as_outer_grid(&in2, args.a, args.n, support)?;
            let out = conv::brute_force_convolution(&g1, &g2)?;
            let table = grid::fourier_coeffs(&out, args.kmax)?;
            transform::fz_from_fourier(&table, trunc)?
        }
        other => return Err(FzError::Domain(format!("unknown route {other:?}"))),
    };
    io::write_coeffs_json(&args.out, &coeffs)?;
    eprintln!(
        "convolved via {} route: n_max {}, largest |C| = {:.6e}",
        args.route,
        args.n_max,
        coeffs.max_abs()
    );
    Ok(())
}

fn check_support_pair(g1: &GridFunction, g2: &GridFunction, b: f64) -> fz_core::Result<()> {
    for (tag, g) in [("--f1", g1), ("--f2", g2)] {
        let leak = g.max_abs_outside(b);
        if leak > 1e-12 {
            return Err(FzError::SupportViolation(format!(
                "{tag} carries magnitude {leak:.3e} outside the disk of radius {b}"
            )));
        }
    }
    Ok(())
}

/// Coefficients of an input on the inner disk of radius b = a/2, for the
/// kernel route.
fn inner_coefficients(
    input: &ConvInput,
    a: f64,
    n: usize,
    support: f64,
    kmax: u32,
    trunc: Truncation,
) -> fz_core::Result<transform::FZCoeffTable> {
    let b = a / 2.0;
    let inner = match input {
        ConvInput::Analytic(desc) => grid::sample_function(desc, b, n / 2, support.min(b))?,
        ConvInput::Grid(g) => {
            if g.a() != a {
                return Err(FzError::Geometry(format!(
                    "grid half-width {} does not match --a {a}",
                    g.a()
                )));
            }
            grid::extract_central_half(g)?
        }
    };
    let inner_kmax = kmax.min((inner.n() / 2 - 1) as u32);
    if inner_kmax < kmax {
        eprintln!("note: inner-disk expansion capped at kmax = {inner_kmax} (half-size grid)");
    }
    let table = grid::fourier_coeffs(&inner, inner_kmax)?;
    transform::fz_from_fourier(&table, trunc)
}

fn cmd_reconstruct(args: ReconstructArgs) -> fz_core::Result<()> {
    let table = io::read_coeffs_json(&args.coeffs)?;
    if args.grid_out.is_none() && args.points_out.is_none() {
        return Err(FzError::Domain(
            "nothing to do: pass --grid-out and/or --points-out".into(),
        ));
    }
    if let Some(out) = &args.grid_out {
        if !args.n.is_power_of_two() {
            return Err(FzError::Domain(format!(
                "N must be a power of two, got {}",
                args.n
            )));
        }
        let a = table.a();
        let n = args.n;
        let h = 2.0 * a / n as f64;
        let mut points = Vec::new();
        let mut mask = Vec::new();
        for i2 in 0..n {
            let y = -a + (i2 as f64 + 0.5) * h;
            for i1 in 0..n {
                let x = -a + (i1 as f64 + 0.5) * h;
                let r = x.hypot(y);
                if r <= a {
                    points.push((r, y.atan2(x)));
                    mask.push(true);
                } else {
                    mask.push(false);
                }
            }
        }
        let vals = transform::reconstruct(&table, &points)?;
        let mut cells = Vec::with_capacity(n * n);
        let mut it = vals.into_iter();
        for keep in mask {
            cells.push(if keep {
                it.next().unwrap()
            } else {
                fz_core::Complex64::new(0.0, 0.0)
            });
        }
        let g = GridFunction::from_values(a, n, a, cells)?;
        io::write_grid(out, &g)?;
        eprintln!("reconstructed grid {} at N={}", out.display(), n);
    }
    if let Some(out) = &args.points_out {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
        let a = table.a();
        let points: Vec<(f64, f64)> = (0..args.num_points)
            .map(|_| {
                let u: f64 = rng.gen();
                let v: f64 = rng.gen();
                (a * u.sqrt(), std::f64::consts::TAU * v)
            })
            .collect();
        let vals = transform::reconstruct(&table, &points)?;
        let mut text = String::from("r,theta,re,im\n");
        for ((r, t), v) in points.iter().zip(&vals) {
            text.push_str(&format!("{r:.16e},{t:.16e},{:.16e},{:.16e}\n", v.re, v.im));
        }
        std::fs::write(out, text)?;
        eprintln!(
            "evaluated {} seeded points to {}",
            args.num_points,
            out.display()
        );
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> ExitCode {
    let results = match &args.suite {
        None => checks::run_all(),
        Some(name) => match checks::run_suite(name) {
            Ok(r) => r,
            Err(err) => {
                eprintln!("error: {err}");
                return ExitCode::from(2);
            }
        },
    };
    let mut all_pass = true;
    for c in &results {
        all_pass &= c.passed;
        println!(
            "{{\"suite\": \"{}\", \"check\": \"{}\", \"status\": \"{}\", \"metric\": {:.6e}, \"threshold\": {:.6e}}}",
            c.suite,
            c.name,
            if c.passed { "pass" } else { "fail" },
            c.metric,
            c.threshold
        );
    }
    eprintln!(
        "{} checks, {} failed",
        results.len(),
        results.iter().filter(|c| !c.passed).count()
    );
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(4)
    }
}

fn parse_index(text: &str) -> fz_core::Result<FZIndex> {
    let (n, m) = text
        .split_once(',')
        .ok_or_else(|| FzError::Domain(format!("index must be \"n,m\", got {text:?}")))?;
    let n: u32 = n
        .trim()
        .parse()
        .map_err(|_| FzError::Domain(format!("bad degree in index {text:?}")))?;
    let m: i32 = m
        .trim()
        .parse()
        .map_err(|_| FzError::Domain(format!("bad order in index {text:?}")))?;
    FZIndex::new(n, m)
}

fn cmd_kernel_table(args: KernelTableArgs) -> fz_core::Result<()> {
    let left = parse_index(&args.left)?;
    let right = parse_index(&args.right)?;
    let trunc = Truncation::new(args.n_max)?;
    if !(args.a > 0.0) || args.kmax == 0 {
        return Err(FzError::Domain("need a > 0 and kmax >= 1".into()));
    }
    let store = kernels::KernelStore::on_disk(args.dir.clone(), args.a, args.kmax, trunc)?;
    let table = store.get_or_build(left, right)?;
    eprintln!(
        "kernel {left} (*) {right}: {} output coefficients cached under {}",
        table.coeffs().iter().filter(|c| c.norm() > 0.0).count(),
        args.dir.display()
    );
    Ok(())
}

fn cmd_plot(args: PlotArgs) -> fz_core::Result<()> {
    let g = io::read_grid(&args.grid)?;
    let (lo, hi) = io::write_pgm(&args.out, &g)?;
    let sidecar = args.out.with_extension("pgm.txt");
    io::write_pgm_sidecar(&sidecar, &g, lo, hi)?;
    eprintln!(
        "plotted {} -> {} (range [{lo:.6e}, {hi:.6e}], sidecar {})",
        args.grid.display(),
        args.out.display(),
        sidecar.display()
    );
    Ok(())
}
