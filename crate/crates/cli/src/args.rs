use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Clone, Parser)]
#[command(
    name = "rmlab",
    version,
    about = "Reed-Muller layer entropy and decoding experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Output file. Defaults to `$RMLAB_OUTPUT_DIR/<command>.<ext>` when that
    /// variable is set, and to stdout otherwise.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Worker threads (0 = all cores). Results do not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Record wall-clock time in the output header.
    #[arg(long, global = true)]
    pub stamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Layer entropies f_{m,r}, cumulative a_{m,r} and per-monomial averages.
    Entropies(EntropiesArgs),
    /// Per-monomial conditional entropies and Bhattacharyya parameters.
    PerSet(NoiseArgs),
    /// The balance identity linking a_{m+1,r} to pairs of m-layers.
    Balance(LayerArgs),
    /// Entropy doubling of each layer, by two independent computations.
    Doubling(PairArgs),
    /// min(f, C - f) against 140 times the doubling.
    FrGap(PairArgs),
    /// Ruzsa distance to subspaces before and after random affine maps.
    PermInvariance(PermArgs),
    /// Invariant subspaces and orbit distances of a monomial layer.
    Symmetry(SymmetryArgs),
    /// Propagated upper bounds on a_{m,r}.
    Recurrence(RecurrenceArgs),
    /// Nearest-subspace factors for random pairs.
    Pfr(FrArgs),
    /// Conditional nearest-subspace factors for random conditioned pairs.
    Cefr(FrArgs),
    /// Minimal-dimension subspaces satisfying the projection inequality.
    Conjecture(ConjectureArgs),
    /// Exact check of the error-split identities.
    ErrorSplit(ErrorSplitArgs),
    /// Monte-Carlo bit-error rate of a decoder.
    DecodeBench(DecodeArgs),
    /// How often the transmitted codeword is among the L most likely.
    ListContainment(ContainmentArgs),
    /// Run the acceptance checks.
    Verify(VerifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Entropies(_) => "entropies",
            Command::PerSet(_) => "per-set",
            Command::Balance(_) => "balance",
            Command::Doubling(_) => "doubling",
            Command::FrGap(_) => "fr-gap",
            Command::PermInvariance(_) => "perm-invariance",
            Command::Symmetry(_) => "symmetry",
            Command::Recurrence(_) => "recurrence",
            Command::Pfr(_) => "pfr",
            Command::Cefr(_) => "cefr",
            Command::Conjecture(_) => "conjecture",
            Command::ErrorSplit(_) => "error-split",
            Command::DecodeBench(_) => "decode-bench",
            Command::ListContainment(_) => "list-containment",
            Command::Verify(_) => "verify",
        }
    }

    pub fn default_format(&self) -> Format {
        match self {
            Command::Symmetry(_)
            | Command::Pfr(_)
            | Command::Cefr(_)
            | Command::Conjecture(_)
            | Command::ErrorSplit(_)
            | Command::Verify(_) => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NoiseArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub delta: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EntropiesArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub delta: f64,
    /// Estimate by sampling instead of exact enumeration.
    #[arg(long)]
    pub mc_samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LayerArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub delta: f64,
    /// Single layer; all layers when omitted.
    #[arg(long)]
    pub r: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PairArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub r: Option<usize>,
    /// Allow m = 4 (slow).
    #[arg(long)]
    pub allow_m4: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PermArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = 50)]
    pub instances: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SymmetryArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub r: usize,
    /// Orbit states explored per subspace.
    #[arg(long, default_value_t = rmlab::symmetry::DEFAULT_ORBIT_BUDGET)]
    pub budget: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileArg {
    Capacity,
    RStar,
    BelowRStar,
}

impl From<ProfileArg> for rmlab::analysis::RateProfile {
    fn from(p: ProfileArg) -> Self {
        use rmlab::analysis::RateProfile;
        match p {
            ProfileArg::Capacity => RateProfile::Capacity,
            ProfileArg::RStar => RateProfile::RStar,
            ProfileArg::BelowRStar => RateProfile::BelowRStar,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RecurrenceArgs {
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 60)]
    pub m_max: usize,
    #[arg(long, value_enum, default_value_t = ProfileArg::Capacity)]
    pub profile: ProfileArg,
    /// First m of the trend check.
    #[arg(long, default_value_t = 10)]
    pub trend_from: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FrArgs {
    /// Largest ambient dimension; each instance draws k from 1..=k.
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 200)]
    pub pairs: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConjectureArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    /// Comma-separated values of c1.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
    pub c1: Vec<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ErrorSplitArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderArg {
    Bitmap,
    Ml,
    Punctured,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DecodeArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub delta: f64,
    /// Degraded noise level; selects the punctured decoder by default.
    #[arg(long)]
    pub delta_prime: Option<f64>,
    /// List size for the punctured decoder: a number or `full`.
    #[arg(long = "L", default_value = "full")]
    pub list: String,
    #[arg(long, value_enum)]
    pub decoder: Option<DecoderArg>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Decode even when the rate is not below 1 - h(delta').
    #[arg(long)]
    pub force_rate: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ContainmentArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub delta: f64,
    /// Comma-separated list sizes.
    #[arg(long = "L", value_delimiter = ',', default_value = "1,4,16,64")]
    pub lists: Vec<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyProfile {
    Quick,
    Full,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = VerifyProfile::Quick)]
    pub profile: VerifyProfile,
    /// Run only these criteria (comma-separated numbers).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u8>,
    /// Add a check that feeds an out-of-range noise level past the guard.
    #[arg(long)]
    pub inject_fault: bool,
}
