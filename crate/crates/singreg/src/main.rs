//! Command-line front end: correlation functions, regularized potentials,
//! verification reports, oracle comparisons, and figure data.
//!
//! Exit codes: 0 success, 2 usage or configuration problems, 3 numerical
//! failures (domain, degeneracy, non-convergence), 4 I/O failures.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use singreg::factor::{BoundaryData, SeriesInput};
use singreg::oracle::{self, OdeSettings};
use singreg::series::{self, ShortRangeExpansion};
use singreg::{CorrelationModel, Error, MaterialRegistry, PotentialSpec, Result};

const REGISTRY_ENV: &str = "SINGREG_REGISTRY";

#[derive(Parser)]
#[command(
    name = "singreg",
    version,
    about = "Regularizing correlation functions for strongly singular pair potentials"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate the correlation function g(x) as CSV
    Correlation(CurveArgs),
    /// Tabulate the regularized potential g(x)·v(x) as CSV
    Regularized(CurveArgs),
    /// Run the verification battery for one model and print a report
    Verify(VerifyArgs),
    /// Compare closed-form log-derivatives against the ODE oracle (CSV)
    Oracle(OracleArgs),
    /// Write the figure data files (CSV, byte-deterministic)
    Figures(FiguresArgs),
    /// List the effective material registry
    Materials(MaterialsArgs),
    /// Train a factor approximant on the model's short-range series
    Approximant(ApproximantArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PotentialArg {
    Lj,
    Power,
    Table,
}

#[derive(Args)]
struct ModelArgs {
    /// Material id from the registry (conflicts with --lambda)
    #[arg(long)]
    material: Option<String>,
    /// Potential shape when no material is given
    #[arg(long, value_enum, default_value = "lj")]
    potential: PotentialArg,
    /// Singularity exponent n (required for --potential power and table)
    #[arg(long)]
    n: Option<f64>,
    /// CSV file of `x,v` samples for --potential table
    #[arg(long)]
    table_file: Option<PathBuf>,
    /// Registered core strength s0 for tabulated potentials
    #[arg(long)]
    s0: Option<f64>,
    /// Coupling Λ (conflicts with --material)
    #[arg(long, conflicts_with = "material")]
    lambda: Option<f64>,
    /// Extra registry file merged over the built-in materials
    /// (falls back to the SINGREG_REGISTRY environment variable)
    #[arg(long)]
    registry: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    /// First grid point
    #[arg(long, default_value_t = 0.1)]
    x_min: f64,
    /// Last grid point
    #[arg(long, default_value_t = 10.0)]
    x_max: f64,
    /// Number of grid points
    #[arg(long, default_value_t = 200)]
    steps: usize,
    /// Log-spaced grid instead of linear
    #[arg(long)]
    log: bool,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Spatial dimension of the integrability check
    #[arg(long, short = 'd', default_value_t = 3)]
    dimension: u32,
    /// Relative tolerance for cutoff convergence
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Print only the divergent bare-integral ladder
    #[arg(long)]
    bare_only: bool,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// First grid point (ODE starts here, initialized from the series)
    #[arg(long, default_value_t = 0.2)]
    x_min: f64,
    /// Last grid point
    #[arg(long, default_value_t = 0.5)]
    x_max: f64,
    /// Number of grid points
    #[arg(long, default_value_t = 16)]
    steps: usize,
    /// Truncation order of the short-range series
    #[arg(long, default_value_t = 8)]
    order: usize,
    /// Also print an asymptotic affine fit over A:B to stderr
    #[arg(long, value_parser = parse_window)]
    window: Option<(f64, f64)>,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FiguresArgs {
    /// Output directory for fig1.csv .. fig4.csv
    #[arg(long, default_value = "figures")]
    out: PathBuf,
    /// Worker threads; the bytes written do not depend on this
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Extra registry file merged over the built-in materials
    #[arg(long)]
    registry: Option<PathBuf>,
}

#[derive(Args)]
struct MaterialsArgs {
    /// Extra registry file merged over the built-in materials
    #[arg(long)]
    registry: Option<PathBuf>,
}

#[derive(Args)]
struct ApproximantArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Number of factors to train
    #[arg(long, default_value_t = 1)]
    factors: usize,
    /// Truncation order of the training series
    #[arg(long)]
    order: Option<usize>,
    /// Multistart seed
    #[arg(long, default_value_t = 17)]
    seed: u64,
    /// Also print the series coefficients the training consumed
    #[arg(long)]
    dump_series: bool,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_window(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected A:B, got '{s}'"))?;
    let a: f64 = a
        .trim()
        .parse()
        .map_err(|_| format!("bad window start '{a}'"))?;
    let b: f64 = b
        .trim()
        .parse()
        .map_err(|_| format!("bad window end '{b}'"))?;
    if !(a < b) {
        return Err(format!("window start must be below its end, got {a}:{b}"));
    }
    Ok((a, b))
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        let code = match e {
            Error::Config(_) => 2,
            Error::Io(_) => 4,
            Error::Domain(_) | Error::Degenerate(_) | Error::Convergence(_) => 3,
        };
        std::process::exit(code);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Correlation(a) => curve(a, Column::G),
        Cmd::Regularized(a) => curve(a, Column::PhiReg),
        Cmd::Verify(a) => verify(a),
        Cmd::Oracle(a) => oracle_compare(a),
        Cmd::Figures(a) => figures(a),
        Cmd::Materials(a) => materials(a),
        Cmd::Approximant(a) => approximant(a),
    }
}

fn load_registry(flag: Option<&Path>) -> Result<MaterialRegistry> {
    let mut reg = MaterialRegistry::built_in();
    if let Some(path) = flag {
        reg.load_file(path)?;
    } else if let Ok(env_path) = std::env::var(REGISTRY_ENV) {
        if !env_path.is_empty() {
            reg.load_file(Path::new(&env_path))?;
        }
    }
    Ok(reg)
}

/// Turn model flags into a correlation model plus a short label.
fn resolve_model(args: &ModelArgs) -> Result<(CorrelationModel, String)> {
    if let Some(id) = &args.material {
        if args.n.is_some() || args.table_file.is_some() || args.s0.is_some() {
            return Err(Error::Config(
                "--material already fixes the potential; drop --n/--table-file/--s0".into(),
            ));
        }
        let reg = load_registry(args.registry.as_deref())?;
        let m = reg.lookup(id)?;
        return Ok((m.model()?, format!("{} ({})", m.id, m.display_name)));
    }
    let lambda = args
        .lambda
        .ok_or_else(|| Error::Config("give either --material or --lambda".into()))?;
    let pspec = match args.potential {
        PotentialArg::Lj => {
            if args.n.is_some_and(|n| n != 12.0) {
                return Err(Error::Config("the lj shape has n = 12".into()));
            }
            PotentialSpec::lennard_jones()
        }
        PotentialArg::Power => {
            let n = args
                .n
                .ok_or_else(|| Error::Config("--potential power needs --n".into()))?;
            PotentialSpec::power_law(n)?
        }
        PotentialArg::Table => {
            let path = args
                .table_file
                .as_ref()
                .ok_or_else(|| Error::Config("--potential table needs --table-file".into()))?;
            let n = args
                .n
                .ok_or_else(|| Error::Config("--potential table needs --n".into()))?;
            let text = std::fs::read_to_string(path)?;
            let points = singreg::potentials::parse_table(&text)?;
            match args.s0 {
                Some(s0) => PotentialSpec::tabulated_with_s0(&points, n, s0)?,
                None => PotentialSpec::tabulated(&points, n)?,
            }
        }
    };
    let label = match args.potential {
        PotentialArg::Lj => format!("lj, lambda = {lambda}"),
        PotentialArg::Power => format!("power n = {}, lambda = {lambda}", pspec.n()),
        PotentialArg::Table => format!("table n = {}, lambda = {lambda}", pspec.n()),
    };
    Ok((CorrelationModel::build(pspec, lambda)?, label))
}

fn make_grid(g: &GridArgs) -> Result<Vec<f64>> {
    if g.log {
        singreg::grid::logspace(g.x_min, g.x_max, g.steps)
    } else {
        singreg::grid::linspace(g.x_min, g.x_max, g.steps)
    }
}

fn write_out(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, content)?;
        }
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

enum Column {
    G,
    PhiReg,
}

fn curve(args: CurveArgs, col: Column) -> Result<()> {
    let (model, _) = resolve_model(&args.model)?;
    let xs = make_grid(&args.grid)?;
    let mut out = String::with_capacity(xs.len() * 48);
    out.push_str(match col {
        Column::G => "x,g\n",
        Column::PhiReg => "x,phi_reg\n",
    });
    for &x in &xs {
        let y = match col {
            Column::G => model.g(x)?,
            Column::PhiReg => model.phi_reg(x)?,
        };
        out.push_str(&format!("{x:.16e},{y:.16e}\n"));
    }
    write_out(args.out.as_deref(), &out)
}

fn verify(args: VerifyArgs) -> Result<()> {
    use std::fmt::Write as _;
    let (model, label) = resolve_model(&args.model)?;
    let mut out = String::new();
    let p = model.pspec();

    if args.bare_only {
        writeln!(
            out,
            "bare integral ladder for {label} (d = {})",
            args.dimension
        )
        .unwrap();
        let report = model.verify_integrability(args.dimension, args.tol)?;
        for (x_min, v) in &report.bare_values {
            writeln!(out, "  x_min = {x_min:.6e}: {v:.16e}").unwrap();
        }
        if let Some(rate) = report.bare_rate {
            writeln!(out, "  last halving ratio = {rate:.6e}").unwrap();
        }
        return write_out(args.out.as_deref(), &out);
    }

    writeln!(out, "model: {label}").unwrap();
    writeln!(
        out,
        "constants: n = {}, mu = {}, alpha = {}, s0 = {}",
        p.n(),
        model.mu(),
        model.alpha(),
        model.s0()
    )
    .unwrap();
    writeln!(
        out,
        "factor constant A = {:.16e} (A/lambda = {:.16e})",
        model.a(),
        model.a() / model.lambda()
    )
    .unwrap();

    // slow variation of s² against the bare core over the short-range window
    let sv_grid = singreg::grid::logspace(1e-3, 0.7, 200)?;
    let sv = p.slow_variation_check(&sv_grid)?;
    writeln!(
        out,
        "slow variation: max |d(s^2)/dx| / |d(x^-n)/dx| = {:.6e} at x = {:.6e} \
         over [1e-3, 0.7] ({})",
        sv.max,
        sv.argmax,
        if sv.max < 0.01 {
            "under 0.01"
        } else {
            "NOT under 0.01"
        }
    )
    .unwrap();

    writeln!(out, "g(1) = {:.16e}", model.g(1.0)?).unwrap();

    let report = model.verify_integrability(args.dimension, args.tol)?;
    writeln!(
        out,
        "integrability (d = {}, tol = {:.1e}): converged = {}, value = {:.16e}",
        args.dimension, args.tol, report.converged, report.value
    )
    .unwrap();
    for (x_min, v) in &report.values {
        writeln!(out, "  x_min = {x_min:.6e}: {v:.16e}").unwrap();
    }
    writeln!(
        out,
        "  tail beyond x = {}: {:.6e} (error bound {:.3e}){}",
        report.x_max,
        report.tail,
        report.tail_error_bound,
        report
            .tail_note
            .as_deref()
            .map(|n| format!("; {n}"))
            .unwrap_or_default()
    )
    .unwrap();
    writeln!(out, "bare contrast (same cutoffs):").unwrap();
    for (x_min, v) in &report.bare_values {
        writeln!(out, "  x_min = {x_min:.6e}: {v:.16e}").unwrap();
    }
    if let Some(rate) = report.bare_rate {
        writeln!(
            out,
            "  last halving ratio = {:.6e} (a divergent core grows like x_min^-(n-d))",
            rate
        )
        .unwrap();
    }

    let sm_grid = singreg::grid::logspace(0.3, 3.0, 400)?;
    let sm = model.smallness_diagnostic(&sm_grid)?;
    writeln!(
        out,
        "smallness g(1-g) over [0.3, 3]: max = {:.6e} at x = {:.6e}, \
         min = {:.6e} at x = {:.6e}",
        sm.max, sm.argmax, sm.min, sm.argmin
    )
    .unwrap();

    write_out(args.out.as_deref(), &out)?;

    // success means the regularized ladder settled and the bare one did not;
    // the bare gate only applies to analytic kinds (no tail note), where the
    // core really is non-integrable
    if !report.converged {
        return Err(Error::Convergence(format!(
            "regularized integral did not converge to rel {:.1e} under cutoff halving",
            args.tol
        )));
    }
    if report.tail_note.is_none() && report.bare_converged {
        return Err(Error::Convergence(
            "bare integral converged under cutoff halving; expected divergence".into(),
        ));
    }
    Ok(())
}

fn oracle_compare(args: OracleArgs) -> Result<()> {
    // the oracle needs the potential even when the closed-form model is
    // degenerate (n = 4), so resolve the pieces, not the model
    let (pspec, lambda) = if let Some(id) = &args.model.material {
        if args.model.n.is_some() || args.model.table_file.is_some() || args.model.s0.is_some() {
            return Err(Error::Config(
                "--material already fixes the potential; drop --n/--table-file/--s0".into(),
            ));
        }
        let reg = load_registry(args.model.registry.as_deref())?;
        let m = reg.lookup(id)?;
        (m.potential.clone(), m.lambda)
    } else {
        let lambda = args
            .model
            .lambda
            .ok_or_else(|| Error::Config("give either --material or --lambda".into()))?;
        (raw_pspec(&args.model)?, lambda)
    };

    let xs = singreg::grid::linspace(args.x_min, args.x_max, args.steps)?;
    let expansion = ShortRangeExpansion::new(&pspec, lambda, args.order)?;
    let sol = oracle::solve_from_series(&pspec, lambda, args.order, &xs, OdeSettings::default())?;
    let model = match CorrelationModel::build(pspec.clone(), lambda) {
        Ok(m) => Some(m),
        Err(Error::Degenerate(msg)) => {
            eprintln!("note: {msg}; approximant columns omitted");
            None
        }
        Err(e) => return Err(e),
    };

    let mut out = String::new();
    out.push_str(match model {
        Some(_) => {
            "x,logderiv_ode,logderiv_series,logderiv_approx,rel_diff_series,rel_diff_approx\n"
        }
        None => "x,logderiv_ode,logderiv_series,rel_diff_series\n",
    });
    for (i, &x) in xs.iter().enumerate() {
        let u_ode = sol.log_derivative_at(i)?;
        let u_series = expansion.log_derivative(&pspec, x)?;
        let rd_series = (u_series - u_ode).abs() / u_ode.abs();
        match &model {
            Some(m) => {
                let u_approx = m.log_derivative(x)?;
                let rd_approx = (u_approx - u_ode).abs() / u_ode.abs();
                out.push_str(&format!(
                    "{x:.16e},{u_ode:.16e},{u_series:.16e},{u_approx:.16e},\
                     {rd_series:.16e},{rd_approx:.16e}\n"
                ));
            }
            None => {
                out.push_str(&format!(
                    "{x:.16e},{u_ode:.16e},{u_series:.16e},{rd_series:.16e}\n"
                ));
            }
        }
    }
    if let Some((a, b)) = args.window {
        let (slope, intercept) = sol.asymptotic_probe((a, b))?;
        eprintln!(
            "asymptotic fit over [{a}, {b}]: slope = {slope:.16e}, intercept = {intercept:.16e}"
        );
    }
    write_out(args.out.as_deref(), &out)
}

fn raw_pspec(args: &ModelArgs) -> Result<PotentialSpec> {
    match args.potential {
        PotentialArg::Lj => Ok(PotentialSpec::lennard_jones()),
        PotentialArg::Power => {
            let n = args
                .n
                .ok_or_else(|| Error::Config("--potential power needs --n".into()))?;
            PotentialSpec::power_law(n)
        }
        PotentialArg::Table => {
            let path = args
                .table_file
                .as_ref()
                .ok_or_else(|| Error::Config("--potential table needs --table-file".into()))?;
            let n = args
                .n
                .ok_or_else(|| Error::Config("--potential table needs --n".into()))?;
            let text = std::fs::read_to_string(path)?;
            let points = singreg::potentials::parse_table(&text)?;
            match args.s0 {
                Some(s0) => PotentialSpec::tabulated_with_s0(&points, n, s0),
                None => PotentialSpec::tabulated(&points, n),
            }
        }
    }
}

fn figures(args: FiguresArgs) -> Result<()> {
    if args.threads == 0 || args.threads > 64 {
        return Err(Error::Config(format!(
            "--threads must be in 1..=64, got {}",
            args.threads
        )));
    }
    let reg = load_registry(args.registry.as_deref())?;
    let heliums = ["he3", "he4", "he6"];
    let hydrogens = ["h_pol", "d_pol", "t_pol"];
    let models = |ids: &[&str]| -> Result<Vec<CorrelationModel>> {
        ids.iter().map(|id| reg.lookup(id)?.model()).collect()
    };
    let he = models(&heliums)?;
    let hy = models(&hydrogens)?;

    let g_grid = singreg::grid::logspace(0.3, 10.0, 500)?;
    let phi_grid = singreg::grid::linspace(0.5, 3.0, 500)?;

    std::fs::create_dir_all(&args.out)?;
    let jobs: [(&str, &[CorrelationModel], &[&str], &[f64], bool); 4] = [
        ("fig1.csv", &he, &heliums, &g_grid, false),
        ("fig2.csv", &hy, &hydrogens, &g_grid, false),
        ("fig3.csv", &he, &heliums, &phi_grid, true),
        ("fig4.csv", &hy, &hydrogens, &phi_grid, true),
    ];
    for (name, models, ids, grid, phi) in jobs {
        let rows = compute_rows(models, grid, args.threads, phi)?;
        let mut out = String::with_capacity(grid.len() * 72);
        out.push_str(&format!("x,{}\n", ids.join(",")));
        for (x, row) in grid.iter().zip(&rows) {
            out.push_str(&format!("{x:.16e}"));
            for v in row {
                out.push_str(&format!(",{v:.16e}"));
            }
            out.push('\n');
        }
        let path = args.out.join(name);
        std::fs::write(&path, &out)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Evaluate every model on every grid point. Work is split into contiguous
/// index chunks so the result (and therefore the serialized bytes) does not
/// depend on the thread count.
fn compute_rows(
    models: &[CorrelationModel],
    grid: &[f64],
    threads: usize,
    phi: bool,
) -> Result<Vec<Vec<f64>>> {
    let mut rows: Vec<Vec<f64>> = vec![Vec::new(); grid.len()];
    let chunk = grid.len().div_ceil(threads);
    let results: Vec<Result<()>> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (xs_chunk, rows_chunk) in grid.chunks(chunk).zip(rows.chunks_mut(chunk)) {
            handles.push(scope.spawn(move || -> Result<()> {
                for (x, row) in xs_chunk.iter().zip(rows_chunk.iter_mut()) {
                    *row = models
                        .iter()
                        .map(|m| if phi { m.phi_reg(*x) } else { m.g(*x) })
                        .collect::<Result<Vec<f64>>>()?;
                }
                Ok(())
            }));
        }
        handles
            .into_iter()
            .map(|h| h.join().expect("figure worker panicked"))
            .collect()
    });
    for r in results {
        r?;
    }
    Ok(rows)
}

fn materials(args: MaterialsArgs) -> Result<()> {
    let reg = load_registry(args.registry.as_deref())?;
    print!("{}", reg.describe());
    Ok(())
}

fn approximant(args: ApproximantArgs) -> Result<()> {
    use std::fmt::Write as _;
    let (model, label) = resolve_model(&args.model)?;
    let n_factors = args.factors;
    if n_factors == 0 {
        return Err(Error::Config("--factors must be at least 1".into()));
    }
    let order = args.order.unwrap_or(2 * n_factors + 2);
    let p = model.pspec();
    let coeffs = series::series_coefficients(p.n(), model.lambda(), model.s0(), order)?;

    let mut out = String::new();
    writeln!(out, "model: {label}").unwrap();
    if args.dump_series {
        for (i, a) in coeffs.iter().enumerate() {
            writeln!(out, "a_{i} = {a:.16e}").unwrap();
        }
    }
    let input = SeriesInput {
        coeffs: coeffs.clone(),
        prefactor_power: 0.5 * model.alpha(),
        prefactor_amplitude: None,
    };
    let boundary = BoundaryData {
        amplitude: 1.0,
        exponent: 0.0,
    };
    let fa = singreg::factor::train(&input, Some(&boundary), n_factors, args.seed)?;
    writeln!(out, "trained in y = x^(n/2-1) with boundary (1, 0):").unwrap();
    out.push_str(&fa.to_record());
    let (amp, power) = fa.large_x_behavior();
    writeln!(
        out,
        "large-x behavior: amplitude = {amp:.16e}, power = {power:.16e}"
    )
    .unwrap();
    if n_factors == 1 {
        let a_trained = fa.factors()[0].0;
        writeln!(
            out,
            "closed-form A = {:.16e}, trained A = {:.16e}, |diff| = {:.3e}",
            model.a(),
            a_trained,
            (model.a() - a_trained).abs()
        )
        .unwrap();
    }
    // re-expansion against the training series: the orders the training
    // actually pinned must come back to rounding; later orders measure the
    // genuine truncation error of an N-factor form
    let re = fa.taylor(order);
    let fitted = 2 * n_factors - 1;
    let mut worst = 0.0f64;
    for (a, b) in coeffs.iter().zip(&re).take(fitted + 1) {
        worst = worst.max((a - b).abs());
    }
    writeln!(
        out,
        "re-expansion residual through fitted order {fitted} = {worst:.3e}"
    )
    .unwrap();
    if let (Some(a), Some(b)) = (coeffs.get(fitted + 1), re.get(fitted + 1)) {
        writeln!(
            out,
            "first unfitted order {}: series {a:.6e}, approximant {b:.6e}",
            fitted + 1
        )
        .unwrap();
    }
    write_out(args.out.as_deref(), &out)
}
