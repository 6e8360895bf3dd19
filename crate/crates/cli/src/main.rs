use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use misodof::alpha::{parse_rational, Rational};
use misodof::channel::CsitQuality;
use misodof::dofcalc::{dof_symbolic, from_json, to_json, validate, SchemeSpec};
use misodof::region::{
    achievability_cross_check, contains, export_json, resolve_region, standard_alpha_grid,
    vertex_table,
};
use misodof::schemes::resolve_scheme;
use misodof::sim::{run_sweep, SweepConfig, UserSel};
use misodof::Error;

#[derive(Parser)]
#[command(
    name = "misodof",
    version,
    about = "DoF analysis, region checks and rate sweeps for MISO broadcast schemes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the exact per-user and total DoF of a scheme.
    Analyze {
        /// Built-in scheme name (x1, x2:0, x3:4, x4:5:1, x5, mat:3, zf:3, zf-perfect:3, tdma:3)
        /// or a path to a scheme JSON file.
        scheme: String,
        /// Also evaluate at this α (e.g. 1/2).
        #[arg(long)]
        alpha: Option<String>,
    },
    /// Run the validator on a scheme file or built-in name.
    Validate { scheme: String },
    /// Print region vertices, or test whether a point is a member.
    Region {
        /// theorem1, theorem1-verbatim or theorem3
        region: String,
        /// α value, or a comma-separated list for the vertex table.
        #[arg(long)]
        alpha: Option<String>,
        /// Comma-separated DoF tuple to test, e.g. 1,1/2,1/2.
        #[arg(long)]
        point: Option<String>,
        /// Emit the region and its vertex table as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run a Monte Carlo sweep described by a config file.
    Simulate {
        config: PathBuf,
        /// Overrides the config's output path.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check that a scheme's DoF lies in a region and name the vertex it hits.
    CrossCheck {
        scheme: String,
        region: String,
        /// Comma-separated α grid; defaults to 0, 1/10, ..., 1.
        #[arg(long)]
        alphas: Option<String>,
    },
    /// Write a scheme as a JSON document.
    ExportScheme {
        scheme: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Errors the user must fix (exit 2) versus negative answers (exit 1).
enum Failure {
    Usage(String),
    Negative,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

/// `println!` that tolerates a closed stdout (e.g. piped into `head`).
macro_rules! out {
    ($($t:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze { scheme, alpha } => analyze(&scheme, alpha.as_deref()),
        Command::Validate { scheme } => run_validate(&scheme),
        Command::Region {
            region,
            alpha,
            point,
            json,
        } => region_cmd(&region, alpha.as_deref(), point.as_deref(), json),
        Command::Simulate { config, output } => simulate(&config, output),
        Command::CrossCheck {
            scheme,
            region,
            alphas,
        } => cross_check(&scheme, &region, alphas.as_deref()),
        Command::ExportScheme { scheme, output } => export_scheme(&scheme, output.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Negative) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn fmt_q(r: &Rational) -> String {
    r.to_string()
}

fn load_scheme(arg: &str) -> Result<SchemeSpec, Failure> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(Error::from)?;
        return Ok(from_json(&text)?);
    }
    Ok(resolve_scheme(arg)?)
}

fn parse_list(s: &str) -> Result<Vec<Rational>, Failure> {
    s.split(',')
        .map(|p| parse_rational(p.trim()).map_err(Failure::from))
        .collect()
}

fn quality(a: &Rational) -> Result<CsitQuality, Failure> {
    Ok(CsitQuality::new(a.clone())?)
}

fn analyze(name: &str, alpha: Option<&str>) -> Outcome {
    let scheme = load_scheme(name)?;
    let dof = match dof_symbolic(&scheme) {
        Ok(d) => d,
        Err(Error::InvalidScheme { .. }) => {
            for v in &validate(&scheme).violations {
                out!("{v}");
            }
            return Err(Failure::Negative);
        }
        Err(e) => return Err(e.into()),
    };
    let alpha = alpha.map(parse_rational).transpose()?;
    if let Some(a) = &alpha {
        quality(a)?;
    }
    out!(
        "{} (K={}, N={}, {} slots)",
        scheme.name,
        scheme.k,
        scheme.n,
        dof.slot_count
    );
    let show = |label: String, d: &misodof::AffineAlpha| match &alpha {
        Some(a) => out!(
            "{label}: {} = {} at α={}",
            d.pretty(),
            fmt_q(&d.eval(a)),
            fmt_q(a)
        ),
        None => out!("{label}: {}", d.pretty()),
    };
    for (u, d) in dof.users().iter().enumerate() {
        show(format!("user {u}"), d);
    }
    show("total".into(), &dof.total);
    Ok(())
}

fn run_validate(name: &str) -> Outcome {
    let scheme = load_scheme(name)?;
    let report = validate(&scheme);
    if report.is_valid() {
        out!("{}: valid", scheme.name);
        return Ok(());
    }
    for v in &report.violations {
        out!("{v}");
    }
    out!("{}: {} violation(s)", scheme.name, report.violations.len());
    Err(Failure::Negative)
}

fn region_cmd(name: &str, alpha: Option<&str>, point: Option<&str>, json: bool) -> Outcome {
    let region = resolve_region(name)?;
    if let Some(point) = point {
        let Some(alpha) = alpha else {
            return Err(Failure::Usage("--point needs --alpha".into()));
        };
        let alphas = parse_list(alpha)?;
        let [a] = alphas.as_slice() else {
            return Err(Failure::Usage(
                "--point takes a single --alpha value".into(),
            ));
        };
        let pt = parse_list(point)?;
        if contains(&region, &pt, &quality(a)?)? {
            out!("inside");
            return Ok(());
        }
        out!("outside");
        return Err(Failure::Negative);
    }
    let alphas = match alpha {
        Some(a) => parse_list(a)?,
        None => standard_alpha_grid(),
    };
    for a in &alphas {
        quality(a)?;
    }
    if json {
        out!("{}", export_json(&region, &alphas)?);
        return Ok(());
    }
    out!("{} (K={}, {:?})", region.name, region.k, region.mode);
    for (a, row) in vertex_table(&region, &alphas) {
        out!("α={}", fmt_q(&a));
        for (n, coords) in row {
            out!("  {n}: ({})", coords.join(", "));
        }
    }
    Ok(())
}

fn simulate(config: &Path, output: Option<PathBuf>) -> Outcome {
    let text = std::fs::read_to_string(config).map_err(Error::from)?;
    let mut cfg = SweepConfig::parse(&text)?;
    if output.is_some() {
        cfg.output = output;
    }
    let report = run_sweep(&cfg)?;
    let mut out = std::io::stdout().lock();
    if cfg.output.is_none() {
        let _ = out.write_all(report.to_csv().as_bytes());
    }
    for s in &report.slopes {
        let who = match s.user {
            UserSel::User(u) => format!("user {u}"),
            UserSel::Total => "total".into(),
        };
        let _ = writeln!(
            out,
            "# slope α={} {who}: {:.4} (predicted {}, residual {:.4}, window {}..{} dB)",
            fmt_q(&s.alpha),
            s.slope,
            fmt_q(&s.predicted),
            s.residual,
            s.window_db.0,
            s.window_db.1
        );
    }
    for f in &report.failures {
        let _ = writeln!(
            out,
            "# failed α={} snr={} dB: {}",
            fmt_q(&f.alpha),
            f.snr_db,
            f.message
        );
    }
    Ok(())
}

fn cross_check(scheme: &str, region: &str, alphas: Option<&str>) -> Outcome {
    let scheme = load_scheme(scheme)?;
    let region = resolve_region(region)?;
    let grid = match alphas {
        Some(a) => parse_list(a)?,
        None => standard_alpha_grid(),
    };
    let report = achievability_cross_check(&scheme, &region, &grid)?;
    for row in &report.rows {
        let dof: Vec<String> = row.dof.iter().map(fmt_q).collect();
        out!(
            "α={}: ({}) {}{}",
            fmt_q(&row.alpha),
            dof.join(", "),
            if row.inside { "inside" } else { "outside" },
            if row.vertices.is_empty() {
                String::new()
            } else {
                format!(" = {}", row.vertices.join(" = "))
            }
        );
    }
    if !report.all_inside() {
        out!("{} leaves {}", report.scheme, report.region);
        return Err(Failure::Negative);
    }
    match report.common_vertex() {
        Some(v) => out!("matches vertex {v}"),
        None => out!("inside {} (no single named vertex)", report.region),
    }
    Ok(())
}

fn export_scheme(scheme: &str, output: Option<&Path>) -> Outcome {
    let scheme = load_scheme(scheme)?;
    let text = to_json(&scheme);
    match output {
        Some(p) => std::fs::write(p, text + "\n").map_err(Error::from)?,
        None => out!("{text}"),
    }
    Ok(())
}
