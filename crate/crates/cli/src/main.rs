use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use polyvem::bench::verify::{self, Family, Report};
use polyvem::bench::{
    analytical_bar_displacement_with_factor, run, BenchmarkPreset, MaterialConfig, MeshSpec, SimulationConfig,
    DEFAULT_OMEGA_FACTOR,
};
use polyvem::mesh::save_mesh;
use polyvem::Error;

/// Exit code for a verification suite with failing checks.
const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(name = "polyvem", version, about = "Virtual element solver for finite-strain elastodynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation from a JSON configuration.
    Run {
        config: PathBuf,
        /// Override the output directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Generate a mesh from an inline JSON spec or a spec file.
    Mesh {
        spec: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run a verification suite.
    Verify {
        #[command(subcommand)]
        suite: Suite,
    },
    /// Evaluate analytical reference solutions.
    Analytic {
        #[command(subcommand)]
        problem: Analytic,
    },
    /// Print or write the configuration of a benchmark preset.
    Preset {
        name: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Suite {
    /// Linear patch test.
    Patch {
        #[arg(long)]
        dim: Option<usize>,
        /// Element family, or `all`.
        #[arg(long, default_value = "all")]
        mesh: String,
    },
    /// Residual and tangent against central finite differences.
    Fd {
        /// Comma-separated element families, or `all`.
        #[arg(long, default_value = "all")]
        elements: String,
        #[arg(long, default_value_t = 10)]
        states: usize,
    },
    /// Mass integration schemes against brute-force quadrature.
    Mass {
        /// Accepted for compatibility; all schemes are always compared.
        #[arg(long)]
        schemes: bool,
    },
}

#[derive(Subcommand)]
enum Analytic {
    /// Longitudinal bar displacement series.
    Bar(BarArgs),
}

#[derive(Args)]
struct BarArgs {
    #[arg(long, num_args = 1.., required = true)]
    x: Vec<f64>,
    #[arg(long, num_args = 1.., required = true)]
    t: Vec<f64>,
    #[arg(long, default_value_t = 2.0e4)]
    v0: f64,
    /// Wave speed; defaults to the table material.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, default_value_t = 30.0)]
    length: f64,
    #[arg(long, default_value_t = 2000)]
    n_terms: usize,
    #[arg(long, default_value_t = DEFAULT_OMEGA_FACTOR)]
    omega_factor: f64,
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn families(spec: &str, dim: Option<usize>) -> Result<Vec<Family>, Error> {
    let mut out = Vec::new();
    for name in spec.split(',').map(str::trim) {
        if name == "all" {
            out.extend(Family::ALL);
        } else {
            out.push(Family::from_name(name).ok_or_else(|| {
                let known: Vec<_> = Family::ALL.iter().map(|f| f.name()).collect();
                Error::Validation(format!("unknown element family `{name}` (known: {})", known.join(", ")))
            })?);
        }
    }
    if let Some(d) = dim {
        if d != 2 && d != 3 {
            return Err(Error::Validation(format!("dimension must be 2 or 3, got {d}")));
        }
        out.retain(|f| f.dim() == d);
    }
    if out.is_empty() {
        return Err(Error::Validation("no element family selected".into()));
    }
    Ok(out)
}

fn mesh_spec(spec: &str) -> Result<MeshSpec, Error> {
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        std::fs::read_to_string(spec)?
    };
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        location: format!("{}:{}", e.line(), e.column()),
        message: e.to_string(),
    })
}

fn report(r: Report) -> Result<(), Failure> {
    println!("{r}");
    if r.passed() {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn preset(name: &str) -> Result<BenchmarkPreset, Error> {
    BenchmarkPreset::from_name(name).ok_or_else(|| {
        let known: Vec<_> = BenchmarkPreset::ALL.iter().map(|p| p.name()).collect();
        Error::Validation(format!("unknown preset `{name}` (known: {})", known.join(", ")))
    })
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, output } => {
            let mut cfg = SimulationConfig::load(&config)?;
            if let Some(dir) = output {
                cfg.output.directory = dir;
            }
            let (result, files) = run(&cfg)?;
            let s = &result.summary;
            println!(
                "{}: {} elements, {} dofs, {} steps, {} Newton iterations (max {}), {:.2} s",
                s.name, s.elements, s.dofs, s.steps, s.newton_iterations, s.max_newton_iterations, s.wall_time_s
            );
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        Command::Mesh { spec, output } => {
            let mesh = mesh_spec(&spec)?.generate()?;
            save_mesh(&mesh, &output)?;
            println!(
                "wrote {} ({} nodes, {} elements)",
                output.display(),
                mesh.n_nodes(),
                mesh.elements.len()
            );
        }
        Command::Verify { suite } => match suite {
            Suite::Patch { dim, mesh } => report(verify::verify_patch(&families(&mesh, dim)?)?)?,
            Suite::Fd { elements, states } => {
                if states == 0 {
                    return Err(Error::Validation("--states must be at least 1".into()).into());
                }
                report(verify::verify_fd(&families(&elements, None)?, states)?)?
            }
            Suite::Mass { .. } => report(verify::verify_mass()?)?,
        },
        Command::Analytic {
            problem: Analytic::Bar(a),
        } => {
            let c = a.c.unwrap_or_else(|| MaterialConfig::table().wave_speed());
            if a.n_terms == 0 || !(c > 0.0) || !(a.length > 0.0) || !(a.omega_factor > 0.0) {
                return Err(Error::Validation("n-terms, c, length and omega-factor must be positive".into()).into());
            }
            println!("x,t,u");
            for &x in &a.x {
                for &t in &a.t {
                    let u = analytical_bar_displacement_with_factor(x, t, a.v0, c, a.length, a.n_terms, a.omega_factor);
                    println!("{x:.12e},{t:.12e},{u:.12e}");
                }
            }
        }
        Command::Preset { name, output } => {
            let json = preset(&name)?.config().to_json();
            match output {
                Some(p) => write_text(&p, &json)?,
                None => println!("{json}"),
            }
        }
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            let solver = matches!(
                e,
                Error::InvertedElement { .. } | Error::NewtonDiverged { .. } | Error::SingularSystem { .. }
            );
            ExitCode::from(if solver { EXIT_SOLVER } else { EXIT_VALIDATION })
        }
    }
}
