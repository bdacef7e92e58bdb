//! Command-line front end: game files, presets, subcommands and reports.

use std::fmt::Write as _;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equilibrium::{find_equilibria, EquilibriumError, EquilibriumReport, SearchVerdict};
use crate::fta::{
    boundary_winding, h2_endpoint_check, locate_root_clusters, FtaError, H2Check, Polynomial, RootCluster, WindingOutcome,
    DEFAULT_SAMPLES,
};
use crate::game::{default_eps, Game, GameError};
use crate::homology::{homology, is_acyclic, HomologyError, HomologyResult};
use crate::obstruction::{
    antipodal_witness, certify_game, AntipodalWitness, ExistenceVerdict, ObstructionError, ObstructionReport,
};
use crate::spaces::{triangulate, SpaceError, SpaceKind, SpaceSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OBSTRUCTION: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_COMPUTATION: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("game file, line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
    #[error(transparent)]
    Obstruction(#[from] ObstructionError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error(transparent)]
    Fta(#[from] FtaError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Parse { .. } | CliError::Game(_) | CliError::Space(_) => {
                EXIT_INPUT
            }
            _ => EXIT_COMPUTATION,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub players: Vec<String>,
    pub spaces: Vec<SpaceSpec>,
    pub utilities: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

impl GameFile {
    pub fn build(&self) -> Result<Game, CliError> {
        let spaces = self.spaces.iter().map(SpaceSpec::build).collect::<Result<Vec<_>, _>>()?;
        let utilities: Vec<&str> = self.utilities.iter().map(String::as_str).collect();
        Ok(Game::from_expressions(self.players.clone(), spaces, &utilities)?)
    }
}

pub fn parse_game_document(text: &str) -> Result<GameFile, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn parse_game_file(text: &str) -> Result<Game, CliError> {
    parse_game_document(text)?.build()
}

pub const PRESETS: [&str; 2] = ["torus-mismatch", "circle-coordination"];

fn circle_spec(n: usize) -> SpaceSpec {
    SpaceSpec {
        kind: SpaceKind::Circle,
        resolution: Some(n),
        factors: Vec::new(),
    }
}

/// Argmax ties in the presets are exact up to rounding of the circle
/// embedding, so both tolerances sit just above rounding level.
const PRESET_TOLERANCES: Tolerances = Tolerances {
    eps: Some(1e-9),
    tol: Some(1e-9),
    lipschitz: None,
};

pub fn preset(name: &str, resolution: Option<usize>) -> Option<GameFile> {
    let (n, utilities) = match name {
        "torus-mismatch" => (resolution.unwrap_or(32), ["-norm(x1 - x2)", "-norm(x1 + x2)"]),
        "circle-coordination" => (resolution.unwrap_or(16), ["-norm(x1 - x2)", "-norm(x1 - x2)"]),
        _ => return None,
    };
    Some(GameFile {
        players: vec!["x1".into(), "x2".into()],
        spaces: vec![circle_spec(n), circle_spec(n)],
        utilities: utilities.iter().map(|s| s.to_string()).collect(),
        tolerances: Some(PRESET_TOLERANCES),
    })
}

#[derive(Debug, Parser)]
#[command(name = "nashtopo", version, about = "Pure-strategy equilibria and topological existence certificates")]
pub struct Cli {
    /// Print the machine-readable report instead of the summary.
    #[arg(long, global = true)]
    pub json: bool,
    /// Leave wall time out of the report so identical inputs give identical bytes.
    #[arg(long, global = true)]
    pub no_timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Demo {
    Torus,
    Coordination,
    Antipodal,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Grid search for pure equilibria; certifies existence or obstruction when none is found.
    Solve {
        /// Game file (JSON) or preset name.
        game: String,
        /// Best-response slack; defaults to the game file, else 2·L·spacing.
        #[arg(long)]
        eps: Option<f64>,
        /// Residual cutoff for listing equilibria; defaults to eps.
        #[arg(long)]
        tol: Option<f64>,
        /// Override the resolution of every factor.
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Best-response certificates, Lefschetz number and existence verdict.
    Certify {
        /// Game file (JSON) or preset name.
        game: String,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Integral homology of a triangulated space.
    Homology {
        /// JSON space spec, or shorthand such as `circle:8*interval:5`.
        #[arg(long)]
        space: String,
    },
    /// Root certificates and localization for a complex polynomial.
    Fta {
        /// Coefficients constant term first, `re,im` pairs separated by `;`.
        #[arg(long, allow_hyphen_values = true)]
        coeffs: String,
        /// Contour radius; defaults to twice the Cauchy bound.
        #[arg(long)]
        radius: Option<f64>,
        /// Diameter below which a localization rectangle is a leaf.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Winding certificate only, no localization.
        #[arg(long)]
        verify_only: bool,
    },
    /// Worked examples.
    Demo {
        #[arg(value_enum)]
        which: Demo,
        /// Circle resolution (torus and antipodal 32, coordination 16 by default).
        #[arg(long)]
        resolution: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    EquilibriumFound,
    ExistenceCertified,
    RootsCertified,
    ObstructionDetected,
    Inconclusive,
    Computed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedTolerances {
    pub eps: f64,
    pub tol: f64,
    pub lipschitz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomologySection {
    pub space: SpaceSpec,
    pub simplex_counts: Vec<usize>,
    pub euler_characteristic: i64,
    pub homology: HomologyResult,
    pub acyclic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FtaSection {
    pub coefficients: Vec<[f64; 2]>,
    pub degree: usize,
    pub cauchy_bound: f64,
    pub radius: f64,
    pub certificate: WindingOutcome,
    pub h2: Option<H2Check>,
    pub roots: Option<Vec<RootCluster>>,
    /// Largest `|P|` over the returned roots.
    pub max_root_modulus: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub invocation: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game: Option<GameFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ResolvedTolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equilibrium: Option<EquilibriumReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obstruction: Option<ObstructionReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homology: Option<HomologySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fta: Option<FtaSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub antipodal: Option<AntipodalWitness>,
    pub verdict: Verdict,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl RunReport {
    fn new(command: &str, invocation: &[String]) -> Self {
        RunReport {
            command: command.into(),
            invocation: invocation.to_vec(),
            game: None,
            tolerances: None,
            equilibrium: None,
            obstruction: None,
            homology: None,
            fta: None,
            antipodal: None,
            verdict: Verdict::Computed,
            exit_code: EXIT_OK,
            wall_time_ms: None,
        }
    }

    fn conclude(&mut self) {
        let found = self
            .equilibrium
            .as_ref()
            .is_some_and(|e| e.verdict == SearchVerdict::Found);
        let existence = self.obstruction.as_ref().map(|o| o.verdict);
        self.verdict = match existence {
            _ if found => Verdict::EquilibriumFound,
            Some(ExistenceVerdict::GuaranteedExistence | ExistenceVerdict::FixedPointByLefschetz) => {
                Verdict::ExistenceCertified
            }
            Some(ExistenceVerdict::ObstructionDetected) => Verdict::ObstructionDetected,
            _ => Verdict::Inconclusive,
        };
        self.exit_code = exit_code_for(self.verdict);
    }
}

pub fn exit_code_for(verdict: Verdict) -> i32 {
    match verdict {
        Verdict::EquilibriumFound | Verdict::ExistenceCertified | Verdict::RootsCertified | Verdict::Computed => EXIT_OK,
        Verdict::ObstructionDetected => EXIT_OBSTRUCTION,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

/// Result of one invocation: what `main` prints and returns.
#[derive(Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub report: Option<RunReport>,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the command line `args` (program name first).
pub fn run(args: &[String]) -> Outcome {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    exit_code: EXIT_INPUT,
                    report: None,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    exit_code: EXIT_OK,
                    report: None,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let started = Instant::now();
    match execute(&cli, &args[1.min(args.len())..]) {
        Ok(mut report) => {
            if !cli.no_timing {
                report.wall_time_ms = Some(started.elapsed().as_secs_f64() * 1e3);
            }
            let stdout = if cli.json {
                serde_json::to_string_pretty(&report).expect("reports serialize") + "\n"
            } else {
                render(&report)
            };
            Outcome {
                exit_code: report.exit_code,
                report: Some(report),
                stdout,
                stderr: String::new(),
            }
        }
        Err(e) => Outcome {
            exit_code: e.exit_code(),
            report: None,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn load_game(source: &str, resolution: Option<usize>) -> Result<GameFile, CliError> {
    if let Some(g) = preset(source, resolution) {
        return Ok(g);
    }
    let text = std::fs::read_to_string(source).map_err(|e| CliError::Io {
        path: source.into(),
        message: if PRESETS.contains(&source) {
            e.to_string()
        } else {
            format!("{e} (presets: {})", PRESETS.join(", "))
        },
    })?;
    let mut file = parse_game_document(&text)?;
    if let Some(n) = resolution {
        file.spaces = file
            .spaces
            .iter()
            .map(|s| s.build().and_then(|sp| sp.with_resolution(n)).map(|sp| sp.spec()))
            .collect::<Result<_, _>>()?;
    }
    Ok(file)
}

fn resolve_tolerances(game: &Game, file: Option<Tolerances>, eps: Option<f64>, tol: Option<f64>) -> Result<ResolvedTolerances, CliError> {
    let file = file.unwrap_or_default();
    let eps = match eps.or(file.eps) {
        Some(e) => e,
        None => default_eps(game, file.lipschitz)?,
    };
    let tol = tol.or(file.tol).unwrap_or(eps);
    for (name, v) in [("eps", eps), ("tol", tol)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(CliError::Usage(format!("{name} must be a finite nonnegative number, got {v}")));
        }
    }
    Ok(ResolvedTolerances {
        eps,
        tol,
        lipschitz: file.lipschitz,
    })
}

fn game_report(command: &str, invocation: &[String], file: GameFile, eps: Option<f64>, tol: Option<f64>, always_certify: bool) -> Result<RunReport, CliError> {
    let game = file.build()?;
    let t = resolve_tolerances(&game, file.tolerances, eps, tol)?;
    let search = find_equilibria(&game, t.eps, t.tol)?;
    let mut report = RunReport::new(command, invocation);
    if always_certify || search.verdict == SearchVerdict::NoneAtResolution {
        report.obstruction = Some(certify_game(&game, t.eps, &search)?);
    }
    report.equilibrium = Some(search);
    report.tolerances = Some(t);
    report.game = Some(file);
    report.conclude();
    Ok(report)
}

fn execute(cli: &Cli, invocation: &[String]) -> Result<RunReport, CliError> {
    match &cli.command {
        Command::Solve {
            game,
            eps,
            tol,
            resolution,
        } => game_report("solve", invocation, load_game(game, *resolution)?, *eps, *tol, false),
        Command::Certify {
            game,
            eps,
            tol,
            resolution,
        } => game_report("certify", invocation, load_game(game, *resolution)?, *eps, *tol, true),
        Command::Homology { space } => {
            let spec = parse_space_arg(space)?;
            let mut report = RunReport::new("homology", invocation);
            report.homology = Some(homology_section(spec)?);
            Ok(report)
        }
        Command::Fta {
            coeffs,
            radius,
            tol,
            verify_only,
        } => {
            let p = parse_coefficients(coeffs)?;
            let mut report = RunReport::new("fta", invocation);
            let section = fta_section(&p, *radius, *tol, *verify_only)?;
            report.verdict = if section.degree == 0 {
                Verdict::Inconclusive
            } else {
                Verdict::RootsCertified
            };
            report.exit_code = exit_code_for(report.verdict);
            report.fta = Some(section);
            Ok(report)
        }
        Command::Demo { which, resolution } => {
            let (command, file) = match which {
                Demo::Torus => ("demo torus", preset("torus-mismatch", *resolution).expect("preset")),
                Demo::Coordination => ("demo coordination", preset("circle-coordination", *resolution).expect("preset")),
                Demo::Antipodal => ("demo antipodal", antipodal_game_file(resolution.unwrap_or(32))),
            };
            let mut report = game_report(command, invocation, file, None, None, true)?;
            if *which == Demo::Antipodal {
                report.antipodal = Some(antipodal_witness(resolution.unwrap_or(32))?);
            }
            Ok(report)
        }
    }
}

/// Fixed points of the antipodal map as equilibria: player 1 copies player
/// 2, player 2 goes opposite player 1.
fn antipodal_game_file(n: usize) -> GameFile {
    GameFile {
        players: vec!["x1".into(), "x2".into()],
        spaces: vec![circle_spec(n), circle_spec(n)],
        utilities: vec!["-norm(x1 - x2)".into(), "-norm(-x1 - x2)".into()],
        tolerances: Some(PRESET_TOLERANCES),
    }
}

/// JSON spec, or `kind:n` factors joined by `*`.
pub fn parse_space_arg(text: &str) -> Result<SpaceSpec, CliError> {
    let text = text.trim();
    if text.starts_with('{') {
        return serde_json::from_str(text).map_err(|e| CliError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        });
    }
    let mut factors = Vec::new();
    for part in text.split('*') {
        let (kind, n) = part
            .trim()
            .split_once(':')
            .ok_or_else(|| CliError::Usage(format!("space factor '{part}' is not of the form kind:resolution")))?;
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad resolution in '{part}'")))?;
        let kind = match kind.trim() {
            "interval" => SpaceKind::Interval,
            "circle" => SpaceKind::Circle,
            "torus" => {
                factors.push(circle_spec(n));
                SpaceKind::Circle
            }
            other => return Err(CliError::Space(SpaceError::UnsupportedSpace(other.to_string()))),
        };
        factors.push(SpaceSpec {
            kind,
            resolution: Some(n),
            factors: Vec::new(),
        });
    }
    Ok(if factors.len() == 1 {
        factors.pop().expect("one factor")
    } else {
        SpaceSpec {
            kind: SpaceKind::Product,
            resolution: None,
            factors,
        }
    })
}

pub fn homology_section(spec: SpaceSpec) -> Result<HomologySection, CliError> {
    let space = spec.build()?;
    let complex = triangulate(&space)?;
    let h = homology(&complex)?;
    Ok(HomologySection {
        space: spec,
        simplex_counts: (0..=complex.top_dim()).map(|d| complex.count(d)).collect(),
        euler_characteristic: complex.euler_characteristic(),
        acyclic: is_acyclic(&h),
        homology: h,
    })
}

/// `re,im` pairs (or bare reals) separated by `;`, constant term first.
pub fn parse_coefficients(text: &str) -> Result<Polynomial, CliError> {
    let mut out = Vec::new();
    for part in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let nums: Vec<&str> = part.split(',').map(str::trim).collect();
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad coefficient '{part}'")))
        };
        let c = match nums.as_slice() {
            [re] => Complex64::new(parse(re)?, 0.0),
            [re, im] => Complex64::new(parse(re)?, parse(im)?),
            _ => return Err(CliError::Usage(format!("coefficient '{part}' is not a re,im pair"))),
        };
        out.push(c);
    }
    Polynomial::new(out).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn fta_section(p: &Polynomial, radius: Option<f64>, tol: f64, verify_only: bool) -> Result<FtaSection, CliError> {
    let cauchy = p.cauchy_bound();
    let radius = radius.unwrap_or(2.0 * cauchy);
    let certificate = boundary_winding(p, radius, DEFAULT_SAMPLES)?;
    let (h2, roots) = if p.degree() == 0 {
        (None, None)
    } else if verify_only {
        (Some(h2_endpoint_check(p, Some(radius.max(2.0 * cauchy)), DEFAULT_SAMPLES)?), None)
    } else {
        (
            Some(h2_endpoint_check(p, Some(radius.max(2.0 * cauchy)), DEFAULT_SAMPLES)?),
            Some(locate_root_clusters(p, radius, tol)?),
        )
    };
    let max_root_modulus = roots.as_ref().map(|rs| {
        rs.iter()
            .map(|r| p.eval(Complex64::new(r.center[0], r.center[1])).norm())
            .fold(0.0, f64::max)
    });
    Ok(FtaSection {
        coefficients: p.coefficients().iter().map(|c| [c.re, c.im]).collect(),
        degree: p.degree(),
        cauchy_bound: cauchy,
        radius,
        certificate,
        h2,
        roots,
        max_root_modulus,
    })
}

fn fmt_coords(coords: &[Vec<f64>]) -> String {
    coords
        .iter()
        .map(|c| {
            let inner: Vec<String> = c.iter().map(|v| format!("{v:.4}")).collect();
            format!("({})", inner.join(", "))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Human-readable summary.
pub fn render(r: &RunReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "command: {}", r.command);
    if let Some(t) = &r.tolerances {
        let _ = writeln!(s, "eps = {:e}, tol = {:e}", t.eps, t.tol);
    }
    if let Some(e) = &r.equilibrium {
        let _ = writeln!(
            s,
            "grid {:?}, {} profiles scanned: {:?}, {} equilibria",
            e.grid_sizes,
            e.profiles_scanned,
            e.verdict,
            e.equilibria.len()
        );
        for p in e.equilibria.iter().take(20) {
            let _ = writeln!(s, "  {:?} {} residual {:.3e}", p.profile, fmt_coords(&p.coords), p.residual);
        }
        if e.equilibria.len() > 20 {
            let _ = writeln!(s, "  ... {} more (see --json)", e.equilibria.len() - 20);
        }
        let m = &e.min_residual;
        let _ = writeln!(s, "minimum residual {:.6} at {:?}, gaps {:?}", m.residual, m.profile, m.gaps);
    }
    if let Some(o) = &r.obstruction {
        for p in &o.players {
            let _ = writeln!(
                s,
                "player {}: single-valued {}, acyclic-valued {}, {:?} {}",
                p.player,
                p.single_valued,
                p.acyclic_valued,
                p.null_homotopy.verdict,
                p.null_homotopy
                    .degrees
                    .as_ref()
                    .map(|d| format!("degrees {:?}", d.entries))
                    .unwrap_or_default()
            );
        }
        match o.lefschetz {
            Some(l) => {
                let _ = writeln!(s, "Lefschetz number {l}");
            }
            None => {
                let _ = writeln!(s, "Lefschetz number unavailable");
            }
        }
        let _ = writeln!(s, "existence: {:?}", o.verdict);
        for a in o.assumptions.iter().chain(&o.notes) {
            let _ = writeln!(s, "  note: {a}");
        }
    }
    if let Some(w) = &r.antipodal {
        let _ = writeln!(
            s,
            "antipodal map on circle({}): {} grid fixed points, min |x - (-x)| = {:.6}, winding {}, circle betti {:?}",
            w.resolution,
            w.grid_fixed_points.len(),
            w.min_residual,
            w.winding,
            w.circle_homology.betti
        );
    }
    if let Some(h) = &r.homology {
        let _ = writeln!(
            s,
            "simplices per dimension {:?}, Euler characteristic {}",
            h.simplex_counts, h.euler_characteristic
        );
        let _ = writeln!(s, "betti {:?}, torsion {:?}, acyclic {}", h.homology.betti, h.homology.torsion, h.acyclic);
    }
    if let Some(f) = &r.fta {
        let _ = writeln!(s, "degree {}, Cauchy bound {:.6}", f.degree, f.cauchy_bound);
        match &f.certificate {
            WindingOutcome::Certified(c) => {
                let _ = writeln!(
                    s,
                    "winding {} on radius {} ({} samples, min |P| {:.3e})",
                    c.winding, f.radius, c.samples, c.min_modulus
                );
            }
            WindingOutcome::RootOnContour(z) => {
                let _ = writeln!(s, "root on the contour at {} {:+}i", z[0], z[1]);
            }
        }
        if let Some(h) = &f.h2 {
            let _ = writeln!(s, "leading term winding {}, homotopy end winding {}", h.leading_winding, h.homotopy_winding);
        }
        if let Some(roots) = &f.roots {
            for c in roots {
                let _ = writeln!(s, "  root {:.10} {:+.10}i  multiplicity {}", c.center[0], c.center[1], c.multiplicity);
            }
        }
    }
    let _ = writeln!(s, "verdict: {:?} (exit {})", r.verdict, r.exit_code);
    if let Some(t) = r.wall_time_ms {
        let _ = writeln!(s, "wall time {t:.1} ms");
    }
    s
}
