//! `skewdyn`: certificates, witnesses, exponents and entropy estimates for
//! the built-in systems or user-supplied cocycles.
//!
//! Exit codes: 0 success, 1 refutation evidence (a distinguishable negative
//! outcome), 2 bad configuration or input, 3 budget exhausted.

mod commands;
mod config;
mod examples;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "skewdyn",
    version,
    about = "Semigroup actions, skew products and linear cocycles over the full shift"
)]
struct Cli {
    /// JSON config; top-level keys apply to all commands, objects keyed by
    /// command name to that command only. Flags override the file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for CSV files and the text report [default: skewdyn-out]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

macro_rules! params {
    ($(#[$m:meta])* $name:ident { $($(#[$fm:meta])* $field:ident : $ty:ty),* $(,)? }) => {
        $(#[$m])*
        #[derive(Args, Serialize, Deserialize, Default, Clone, Debug)]
        #[serde(deny_unknown_fields, default)]
        pub struct $name {
            $($(#[$fm])* pub $field: Option<$ty>,)*
        }
    };
}

params!(HitArgs {
    /// Semigroup preset [default: golden-rotation]
    #[arg(long)]
    preset: String,
    /// Base ball radius [default: 0.1]
    #[arg(long)]
    eps: f64,
    /// Longest transition word searched [default: 100]
    #[arg(long)]
    k_max: usize,
    /// Net resolution, at most eps/8 [default: eps/8]
    #[arg(long)]
    delta: f64,
    /// Frontier cap per word length [default: 50000]
    #[arg(long)]
    beam: usize,
});

params!(CoverArgs {
    /// Semigroup preset [default: golden-rotation]
    #[arg(long)] preset: String,
    /// Ball radius [default: 0.1]
    #[arg(long)] eps: f64,
    /// Longest route [default: 1000]
    #[arg(long)] k_max: usize,
    /// Net resolution, at most eps/8 [default: eps/8]
    #[arg(long)] delta: f64,
    /// Allowed generators, 1-based [default: all]
    #[arg(long, value_delimiter = ',')] generators: Vec<usize>,
});

params!(TransArgs {
    /// Semigroup preset [default: morse-smale-rotation]
    #[arg(long)] preset: String,
    /// Shadowed generator, 1-based [default: last]
    #[arg(long)] shadowed: usize,
    /// Source center coordinates [default: 0]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] x1: Vec<f64>,
    /// Source dynamic-ball length [default: 1]
    #[arg(long)] n1: usize,
    /// Target center coordinates [default: 0.5]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] x2: Vec<f64>,
    /// Target dynamic-ball length [default: 1]
    #[arg(long)] n2: usize,
    /// Dynamic-ball radius [default: 0.05]
    #[arg(long)] eps: f64,
    /// Longest transition searched [default: 1000]
    #[arg(long)] k_max: usize,
});

params!(IrrArgs {
    /// Semigroup preset [default: double-well-rotation]
    #[arg(long)] preset: String,
    /// Observable: cos (cos 2πx₁) or sin (sin 2πx₁) [default: cos]
    #[arg(long)] observable: String,
    /// First target [default: 0]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] x1: Vec<f64>,
    /// Limit average at the first target [default: ψ(x1)]
    #[arg(long, allow_hyphen_values = true)] i1: f64,
    /// Second target [default: 0.5]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] x2: Vec<f64>,
    /// Limit average at the second target [default: ψ(x2)]
    #[arg(long, allow_hyphen_values = true)] i2: f64,
    /// First block length [default: 1]
    #[arg(long)] n1: usize,
    /// Ball radius [default: 0.03]
    #[arg(long)] eps: f64,
    /// Number of blocks [default: 8]
    #[arg(long)] depth: usize,
    /// auto, shrinking or trapping [default: auto]
    #[arg(long)] mode: String,
    /// Schedule ratio threshold [default: 0.2]
    #[arg(long)] threshold: f64,
    /// Shadowed generator, 1-based [default: last]
    #[arg(long)] shadowed: usize,
    /// Most rows of the trace CSV; longer traces are strided [default: 100000]
    #[arg(long)] trace_rows: usize,
});

params!(LyapArgs {
    /// Cocycle preset [default: different-types-A]
    #[arg(long)]
    preset: String,
    /// Cocycle text file (d κ, then κ row-major matrices)
    #[arg(long)]
    cocycle_file: String,
    /// Inline cocycle text
    #[arg(long)]
    cocycle: String,
    /// Driving sequence: `random` or a period such as `1 2 2` [default: random]
    #[arg(long)]
    omega: String,
    /// Product length [default: 5000]
    #[arg(long)]
    n: usize,
});

params!(DirTraceArgs {
    /// Cocycle preset [default: different-types-A]
    #[arg(long)] preset: String,
    /// Cocycle text file
    #[arg(long)] cocycle_file: String,
    /// Inline cocycle text
    #[arg(long)] cocycle: String,
    /// Direction [default: (1, 1, …)]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] v: Vec<f64>,
    /// Driving sequence: `random` or a period [default: random]
    #[arg(long)] omega: String,
    /// Trace length [default: 5000]
    #[arg(long)] n: usize,
    /// Most rows of the trace CSV [default: 100000]
    #[arg(long)] trace_rows: usize,
});

params!(DomArgs {
    /// Cocycle preset [default: different-types-B]
    #[arg(long)] preset: String,
    /// Cocycle text file
    #[arg(long)] cocycle_file: String,
    /// Inline cocycle text
    #[arg(long)] cocycle: String,
    /// Dimension of F when E, F come from eigenvectors of generator 1 [default: 1]
    #[arg(long)] f_dim: usize,
    /// Basis of E, column-major (d × dim E)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] e: Vec<f64>,
    /// Basis of F, column-major (d × dim F)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] f: Vec<f64>,
    /// Largest k tried [default: 20]
    #[arg(long)] k_max: usize,
});

params!(ConesArgs {
    /// Cocycle preset [default: constant-hyperbolic]
    #[arg(long)]
    preset: String,
    /// Cocycle text file
    #[arg(long)]
    cocycle_file: String,
    /// Inline cocycle text
    #[arg(long)]
    cocycle: String,
    /// Generator whose matrix is used, 1-based [default: 1]
    #[arg(long)]
    generator: usize,
    /// Number of contracting directions [default: d/2]
    #[arg(long)]
    stable_dim: usize,
    /// Sampled vectors per cone [default: 10000]
    #[arg(long)]
    samples: usize,
    /// Longest iterate checked [default: 30]
    #[arg(long)]
    n_max: usize,
});

params!(AccArgs {
    /// Cocycle preset [default: irreducible-vs-accessible-A]
    #[arg(long)]
    preset: String,
    /// Cocycle text file
    #[arg(long)]
    cocycle_file: String,
    /// Inline cocycle text
    #[arg(long)]
    cocycle: String,
    /// Base ball radius in projective space [default: 0.1]
    #[arg(long)]
    eps: f64,
    /// Longest word searched [default: 100]
    #[arg(long)]
    k_max: usize,
    /// Net resolution, at most eps/8 [default: eps/8]
    #[arg(long)]
    delta: f64,
});

params!(IrrDirArgs {
    /// Cocycle preset [default: different-types-B]
    #[arg(long)] preset: String,
    /// Cocycle text file
    #[arg(long)] cocycle_file: String,
    /// Inline cocycle text
    #[arg(long)] cocycle: String,
    /// Direction [default: (1, 1, …)]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] v: Vec<f64>,
    /// Number of blocks [default: 6]
    #[arg(long)] depth: usize,
    /// auto, frequency or cones [default: auto]
    #[arg(long)] plan: String,
    /// Schedule ratio threshold [default: 0.1]
    #[arg(long)] threshold: f64,
    /// Checkpoint slack beyond the block rates [default: 0.05]
    #[arg(long)] tolerance: f64,
    /// First block length [default: 10]
    #[arg(long)] n1: u64,
    /// Most rows of the trace CSV [default: 100000]
    #[arg(long)] trace_rows: usize,
});

params!(RotArgs {
    /// Cocycle preset (2 × 2)
    #[arg(long)] preset: String,
    /// Cocycle text file
    #[arg(long)] cocycle_file: String,
    /// Inline cocycle text
    #[arg(long)] cocycle: String,
    /// Generator of the cocycle, 1-based [default: 1]
    #[arg(long)] generator: usize,
    /// Matrix entries, row-major
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] matrix: Vec<f64>,
    /// Rotation angle in radians, used when no matrix is given
    #[arg(long, allow_hyphen_values = true)] angle: f64,
    /// Iterations [default: 100000]
    #[arg(long)] n_iter: usize,
});

params!(SpecArgs {
    /// Cocycle preset [default: different-types-B]
    #[arg(long)] preset: String,
    /// Cocycle text file
    #[arg(long)] cocycle_file: String,
    /// Inline cocycle text
    #[arg(long)] cocycle: String,
    /// Periodic words, e.g. `1;2;1 2` [default: each generator and 1 2]
    #[arg(long, value_delimiter = ';')] words: Vec<String>,
    /// Largest exponent deviation counted as equal [default: 1e-6]
    #[arg(long)] tolerance: f64,
});

params!(SympArgs {
    /// First angle in radians [default: 2π(√2−1)]
    #[arg(long, allow_hyphen_values = true)]
    theta1: f64,
    /// Second angle in radians [default: 2π(√3−1)]
    #[arg(long, allow_hyphen_values = true)]
    theta2: f64,
    /// Largest |m| + |n| scanned [default: 50]
    #[arg(long)]
    order: usize,
});

params!(EntArgs {
    /// Preset: a semigroup or shift-2 [default: cat-map]
    #[arg(long)] preset: String,
    /// Generator iterated by `top` and `katok`, 1-based [default: 1]
    #[arg(long)] symbol: usize,
    /// Driving period for a non-autonomous `top` estimate, e.g. `1 2`
    #[arg(long)] word: String,
    /// ε grid [default: 0.25,0.125]
    #[arg(long, value_delimiter = ',')] eps: Vec<f64>,
    /// n grid [default: 1..=8]
    #[arg(long, value_delimiter = ',')] n: Vec<usize>,
    /// Candidate net spacing [default: min ε / 4]
    #[arg(long)] resolution: f64,
    /// Lebesgue samples for `katok` [default: 200000]
    #[arg(long)] samples: usize,
    /// Uncovered fraction for `katok` [default: 0.1]
    #[arg(long)] rho: f64,
    /// Largest exhaustive word set [default: 4096]
    #[arg(long)] word_cap: usize,
    /// Sampled words beyond the cap [default: 64]
    #[arg(long)] word_samples: usize,
});

#[derive(Subcommand)]
enum EntropyCmd {
    /// Bowen (or word-driven) separated sets
    Top(EntArgs),
    /// Separation by any word of length < n
    Glw(EntArgs),
    /// Average of per-word separated counts
    Bufetov(EntArgs),
    /// Dynamic-ball covers of 1 − ρ of Lebesgue samples
    Katok(EntArgs),
}

#[derive(Subcommand)]
enum Command {
    /// Certify or refute frequent hitting times
    HittingCertify(HitArgs),
    /// Covering time of ε-balls
    CoveringTime(CoverArgs),
    /// Minimal transition time between two dynamic balls
    TransitionTime(TransArgs),
    /// Construct and audit an irregular point
    Irregular(IrrArgs),
    /// Lyapunov spectrum and top product growth
    Lyapunov(LyapArgs),
    /// Running exponent of one direction
    DirectionTrace(DirTraceArgs),
    /// Domination index of a splitting
    Domination(DomArgs),
    /// Unstable and stable cones of a hyperbolic matrix
    Cones(ConesArgs),
    /// Strong projective accessibility
    Accessibility(AccArgs),
    /// A driving word with oscillating exponent of one direction
    IrregularDirection(IrrDirArgs),
    /// Rotation number of a 2 × 2 matrix
    RotationNumber(RotArgs),
    /// Periodic spectra and the rigidity verdict
    Spectrum(SpecArgs),
    /// Resonance scan of a symplectic center
    SymplecticCheck(SympArgs),
    /// Entropy estimates over (n, ε) grids
    #[command(subcommand)]
    Entropy(EntropyCmd),
    /// Reproduce the worked example for a preset or example group
    Examples {
        /// Preset or group name (see list-presets)
        name: String,
    },
    /// List built-in presets
    ListPresets,
}

/// Outcome of a command, mapped to the exit status.
pub enum Outcome {
    Success,
    Refuted,
}

pub struct Fail {
    pub code: u8,
    pub message: String,
}

impl Fail {
    pub fn config(message: impl Into<String>) -> Self {
        Fail { code: 2, message: message.into() }
    }
}

impl From<skewdyn::Error> for Fail {
    fn from(e: skewdyn::Error) -> Self {
        use skewdyn::Error as E;
        let code = match e {
            E::BudgetExceeded(_)
            | E::NetTooLarge { .. }
            | E::DepthOverflow { .. }
            | E::PrecisionExhausted { .. }
            | E::TransitionNotFound { .. }
            | E::ThresholdNotReached { .. } => 3,
            E::NotDominated { .. } => 1,
            _ => 2,
        };
        Fail { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Self {
        Fail { code: 2, message: format!("i/o error: {e}") }
    }
}

pub const SECTIONS: &[&str] = &[
    "hitting-certify",
    "covering-time",
    "transition-time",
    "irregular",
    "lyapunov",
    "direction-trace",
    "domination",
    "cones",
    "accessibility",
    "irregular-direction",
    "rotation-number",
    "spectrum",
    "symplectic-check",
    "entropy",
];

fn all_keys() -> Vec<String> {
    let mut k = config::keys_of::<HitArgs>();
    k.extend(config::keys_of::<CoverArgs>());
    k.extend(config::keys_of::<TransArgs>());
    k.extend(config::keys_of::<IrrArgs>());
    k.extend(config::keys_of::<LyapArgs>());
    k.extend(config::keys_of::<DirTraceArgs>());
    k.extend(config::keys_of::<DomArgs>());
    k.extend(config::keys_of::<ConesArgs>());
    k.extend(config::keys_of::<AccArgs>());
    k.extend(config::keys_of::<IrrDirArgs>());
    k.extend(config::keys_of::<RotArgs>());
    k.extend(config::keys_of::<SpecArgs>());
    k.extend(config::keys_of::<SympArgs>());
    k.extend(config::keys_of::<EntArgs>());
    k.sort();
    k.dedup();
    k
}

fn run(cli: Cli) -> Result<Outcome, Fail> {
    let cfg = match &cli.config {
        Some(p) => Some(config::load(p).map_err(Fail::config)?),
        None => None,
    };
    let seed = match cli.seed {
        Some(s) => s,
        None => config::global_u64(cfg.as_ref(), "seed").map_err(Fail::config)?.unwrap_or(0),
    };
    let out = match cli.out {
        Some(p) => p,
        None => config::global_str(cfg.as_ref(), "out")
            .map_err(Fail::config)?
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("skewdyn-out")),
    };
    let known = all_keys();
    let ctx = |name: &str| commands::Ctx::new(name, seed, out.clone());
    macro_rules! go {
        ($args:expr, $section:expr, $f:path, $name:expr) => {{
            let (p, echo) = config::merge(&$args, cfg.as_ref(), $section, SECTIONS, &known).map_err(Fail::config)?;
            $f(&mut ctx($name), &p, &echo)
        }};
    }
    match cli.command {
        Command::HittingCertify(a) => go!(a, "hitting-certify", commands::hitting_certify, "hitting-certify"),
        Command::CoveringTime(a) => go!(a, "covering-time", commands::covering, "covering-time"),
        Command::TransitionTime(a) => go!(a, "transition-time", commands::transition, "transition-time"),
        Command::Irregular(a) => go!(a, "irregular", commands::irregular, "irregular"),
        Command::Lyapunov(a) => go!(a, "lyapunov", commands::lyapunov, "lyapunov"),
        Command::DirectionTrace(a) => go!(a, "direction-trace", commands::direction_trace, "direction-trace"),
        Command::Domination(a) => go!(a, "domination", commands::domination, "domination"),
        Command::Cones(a) => go!(a, "cones", commands::cones, "cones"),
        Command::Accessibility(a) => go!(a, "accessibility", commands::accessibility, "accessibility"),
        Command::IrregularDirection(a) => {
            go!(a, "irregular-direction", commands::irregular_direction, "irregular-direction")
        }
        Command::RotationNumber(a) => go!(a, "rotation-number", commands::rotation, "rotation-number"),
        Command::Spectrum(a) => go!(a, "spectrum", commands::spectrum, "spectrum"),
        Command::SymplecticCheck(a) => go!(a, "symplectic-check", commands::symplectic, "symplectic-check"),
        Command::Entropy(kind) => {
            let (a, k) = match kind {
                EntropyCmd::Top(a) => (a, skewdyn::EntropyKind::Topological),
                EntropyCmd::Glw(a) => (a, skewdyn::EntropyKind::Glw),
                EntropyCmd::Bufetov(a) => (a, skewdyn::EntropyKind::Bufetov),
                EntropyCmd::Katok(a) => (a, skewdyn::EntropyKind::Katok),
            };
            let (p, echo) = config::merge(&a, cfg.as_ref(), "entropy", SECTIONS, &known).map_err(Fail::config)?;
            commands::entropy(&mut ctx(&format!("entropy-{k}")), k, &p, &echo)
        }
        Command::Examples { name } => examples::run(&name, seed, &out),
        Command::ListPresets => {
            for (name, summary) in skewdyn::list_presets() {
                println!("{name:<30} {summary}");
            }
            Ok(Outcome::Success)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Refuted) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
