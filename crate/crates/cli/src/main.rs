use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use frobtwist::io::{self, ChainMapFile, ComplexFile, IsoReport, OracleReport, ViolationFile, WeightFile};
use frobtwist::{
    build_theta_iso, check_weight, complex_of, construct, homology_snf, oracle_solve_with_cap, parse_pd, theta_map,
    verify_chain_map, verify_iso, AlgebraElement, AlgebraError, CubeError, DiagramError, FrobeniusAlgebra,
    LinkDiagram, OracleError, PartialAssignment,
};

/// Twisting weights and twisted Frobenius complexes of link diagrams.
#[derive(Parser, Debug)]
#[command(name = "frobtwist", version)]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct RunConfig {
    /// Refuse diagrams with more crossings than this
    #[arg(long, global = true, default_value_t = 16, value_parser = clap::value_parser!(u32).range(1..=64))]
    max_crossings: u32,
    /// Refuse oracle runs on diagrams with more crossings than this
    #[arg(long, global = true, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..=64))]
    oracle_cap: u32,
    /// Write the JSON result to this file
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the JSON result on stdout instead of a summary
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Construct a twisting weight and verify it
    Weight { pd: String },
    /// Check a weight file against a diagram
    Check { pd: String, weight: PathBuf },
    /// Decide existence of a weight extending optional pins
    Oracle {
        pd: String,
        #[arg(long)]
        pins: Option<String>,
    },
    /// Verify the comparison isomorphism between C(D;A^θ) and C(D;A)
    Iso {
        pd: String,
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        /// Also write the chain map with both complexes here
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Homology over ℤ of C(D;A), or of C(D;A^θ) when θ is given
    Homology {
        pd: String,
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
        /// Also write the complex here
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct AlgebraArgs {
    /// `kh`, `lee`, or a path to an algebra JSON file
    #[arg(long)]
    algebra: String,
}

enum Failure {
    Checked(String),
    Input(anyhow::Error),
    Guard(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Checked(_) => 1,
            Failure::Input(_) => 2,
            Failure::Guard(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Checked(m) | Failure::Guard(m) => f.write_str(m),
            Failure::Input(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

type Outcome = Result<Output, Failure>;

/// What a successful or checked-false run produces.
struct Output {
    json: Value,
    summary: String,
    ok: bool,
}

fn corpus_dir() -> PathBuf {
    std::env::var_os("FROBTWIST_CORPUS")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus"))
}

/// A path as given, else a name looked up in the corpus (with `ext` appended if needed).
fn resolve_input(name: &str, ext: &str) -> anyhow::Result<PathBuf> {
    let direct = PathBuf::from(name);
    if direct.is_file() {
        return Ok(direct);
    }
    let dir = corpus_dir();
    for candidate in [dir.join(name), dir.join(format!("{name}{ext}"))] {
        if candidate.is_file() {
            return Ok(candidate);
        }
    }
    Err(anyhow!("no such file `{name}` (corpus directory {})", dir.display()))
}

fn read(name: &str, ext: &str) -> anyhow::Result<String> {
    let path = resolve_input(name, ext)?;
    fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))
}

fn load_diagram(name: &str, cfg: &RunConfig) -> Result<LinkDiagram, Failure> {
    let text = read(name, ".pd")?;
    let d = match parse_pd(&text) {
        Ok(d) => d,
        Err(e @ DiagramError::TooManyCrossings(_)) => return Err(Failure::Guard(e.to_string())),
        Err(e) => return Err(Failure::Input(anyhow!(e).context(format!("parsing {name}")))),
    };
    if d.crossing_count() > cfg.max_crossings as usize {
        return Err(Failure::Guard(format!(
            "{} crossings exceeds --max-crossings {}",
            d.crossing_count(),
            cfg.max_crossings
        )));
    }
    Ok(d)
}

fn load_algebra(spec: &str) -> anyhow::Result<FrobeniusAlgebra> {
    match spec {
        "kh" | "lee" => Ok(FrobeniusAlgebra::builtin(spec)?),
        path => {
            let text = fs::read_to_string(path).with_context(|| format!("reading algebra {path}"))?;
            let a = io::parse_algebra(&text)?;
            let failures = a.validate_axioms();
            if !failures.is_empty() {
                return Err(anyhow!("algebra {path} fails the axioms: {failures:?}"));
            }
            Ok(a)
        }
    }
}

fn load_theta(a: &FrobeniusAlgebra, text: &str) -> anyhow::Result<AlgebraElement> {
    let theta = io::parse_theta(text)?;
    if theta.0.len() != a.rank() {
        return Err(anyhow!("θ has {} coordinates, the algebra has rank {}", theta.0.len(), a.rank()));
    }
    if a.invert(&theta)?.is_none() {
        return Err(AlgebraError::NotInvertible(theta).into());
    }
    Ok(theta)
}

fn cube_failure(e: CubeError) -> Failure {
    match e {
        CubeError::Linalg(_) => Failure::Guard(e.to_string()),
        other => Failure::Input(other.into()),
    }
}

fn cmd_weight(cfg: &RunConfig, pd: &str) -> Outcome {
    let d = load_diagram(pd, cfg)?;
    let nu = construct(&d).map_err(|e| Failure::Input(e.into()))?;
    let report = check_weight(&d, &nu).map_err(|e| Failure::Input(e.into()))?;
    let file = io::weight_to_file(&d, &nu).map_err(|e| Failure::Input(e.into()))?;
    Ok(Output {
        json: serde_json::to_value(file).unwrap(),
        summary: format!("{} states, {} violations", 1usize << d.crossing_count(), report.len()),
        ok: report.is_empty(),
    })
}

fn cmd_check(cfg: &RunConfig, pd: &str, weight: &Path) -> Outcome {
    let d = load_diagram(pd, cfg)?;
    let text = fs::read_to_string(weight).with_context(|| format!("reading {}", weight.display()))?;
    let file: WeightFile = serde_json::from_str(&text).context("parsing weight")?;
    let nu = io::weight_from_file(&d, &file).context("loading weight")?;
    let report = check_weight(&d, &nu).map_err(|e| Failure::Input(e.into()))?;
    let summary = match report.violations.first() {
        None => "weight satisfies every condition".to_string(),
        Some(v) => format!(
            "{} violations, first at state {} crossing {} ({}: {} ≠ {})",
            report.len(),
            v.state.to_bits(),
            v.crossing,
            v.kind,
            v.lhs,
            v.rhs
        ),
    };
    Ok(Output { json: serde_json::to_value(ViolationFile::from(&report)).unwrap(), summary, ok: report.is_empty() })
}

fn cmd_oracle(cfg: &RunConfig, pd: &str, pins: Option<&str>) -> Outcome {
    let d = load_diagram(pd, cfg)?;
    let pins = match pins {
        None => PartialAssignment::new(),
        Some(p) => {
            let file: WeightFile = serde_json::from_str(&read(p, ".json")?).context("parsing pins")?;
            io::pins_from_file(&d, &file).context("loading pins")?
        }
    };
    let solution = match oracle_solve_with_cap(&d, &pins, cfg.oracle_cap as usize) {
        Ok(s) => s,
        Err(e @ (OracleError::TooLarge { .. } | OracleError::Linalg(_))) => return Err(Failure::Guard(e.to_string())),
        Err(e) => return Err(Failure::Input(e.into())),
    };
    let report = match &solution {
        Some(nu) => OracleReport {
            status: "feasible".into(),
            weight: Some(io::weight_to_file(&d, nu).map_err(|e| Failure::Input(e.into()))?),
        },
        None => OracleReport { status: "infeasible".into(), weight: None },
    };
    Ok(Output {
        summary: format!("{} ({} pins)", report.status, pins.len()),
        ok: solution.is_some(),
        json: serde_json::to_value(report).unwrap(),
    })
}

fn write_json(path: &Path, value: &Value) -> anyhow::Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n").with_context(|| format!("writing {}", path.display()))
}

fn cmd_iso(cfg: &RunConfig, pd: &str, algebra: &str, theta: &str, dump: Option<&Path>) -> Outcome {
    let d = load_diagram(pd, cfg)?;
    let a = load_algebra(algebra)?;
    let theta = load_theta(&a, theta)?;
    let nu = construct(&d).map_err(|e| Failure::Input(e.into()))?;
    let f = match build_theta_iso(&d, &a, &theta, &nu) {
        Ok(f) => f,
        Err(CubeError::NotAChainMap) => theta_map(&d, &a, &theta, &nu).map_err(cube_failure)?,
        Err(e) => return Err(cube_failure(e)),
    };
    let chain_map = verify_chain_map(&f).map_err(cube_failure)?;
    let iso = verify_iso(&f).map_err(cube_failure)?;
    let homology_twisted = homology_snf(&f.source).map_err(cube_failure)?;
    let homology = homology_snf(&f.target).map_err(cube_failure)?;
    let homology_equal = homology_twisted == homology;
    if let Some(path) = dump {
        write_json(path, &serde_json::to_value(ChainMapFile::from(&f)).unwrap())?;
    }
    let report = IsoReport { theta: theta.0.clone(), chain_map, iso, homology_twisted, homology, homology_equal };
    Ok(Output {
        summary: format!("θ = {theta}: chain map {chain_map}, isomorphism {iso}, equal homology {homology_equal}"),
        ok: iso && homology_equal,
        json: serde_json::to_value(report).unwrap(),
    })
}

fn cmd_homology(cfg: &RunConfig, pd: &str, algebra: &str, theta: Option<&str>, dump: Option<&Path>) -> Outcome {
    let d = load_diagram(pd, cfg)?;
    let mut a = load_algebra(algebra)?;
    if let Some(t) = theta {
        let theta = load_theta(&a, t)?;
        a = a.twist(&theta).map_err(|e| Failure::Input(e.into()))?;
    }
    let c = complex_of(&d, &a).map_err(cube_failure)?;
    let h = homology_snf(&c).map_err(cube_failure)?;
    if let Some(path) = dump {
        write_json(path, &serde_json::to_value(ComplexFile::from(&c)).unwrap())?;
    }
    let summary = h
        .iter()
        .map(|g| {
            let torsion: String = g.torsion.iter().map(|t| format!(" ⊕ ℤ/{t}")).collect();
            format!("H^{} = ℤ^{}{torsion}", g.degree, g.rank)
        })
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Output { json: io::homology_to_json(&h), summary, ok: true })
}

fn run(cli: &Cli) -> Outcome {
    let cfg = &cli.config;
    match &cli.command {
        Command::Weight { pd } => cmd_weight(cfg, pd),
        Command::Check { pd, weight } => cmd_check(cfg, pd, weight),
        Command::Oracle { pd, pins } => cmd_oracle(cfg, pd, pins.as_deref()),
        Command::Iso { pd, algebra, theta, dump } => cmd_iso(cfg, pd, &algebra.algebra, theta, dump.as_deref()),
        Command::Homology { pd, algebra, theta, dump } => {
            cmd_homology(cfg, pd, &algebra.algebra, theta.as_deref(), dump.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|out| {
        if let Some(path) = &cli.config.out {
            write_json(path, &out.json)?;
        }
        if cli.config.json {
            println!("{}", serde_json::to_string_pretty(&out.json).unwrap());
        } else {
            println!("{}", out.summary);
        }
        if out.ok {
            Ok(())
        } else {
            Err(Failure::Checked(out.summary))
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !matches!(f, Failure::Checked(_)) {
                eprintln!("error: {f}");
            }
            ExitCode::from(f.code())
        }
    }
}
