use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const CONVENTIONS: &str = "\
Conventions:
  Group elements are indexed 0..|G|-1 in the order listed by `hchan group show`
  (s3: e, (123), (132), (12), (23), (13); z{n}: 0..n-1; products: lexicographic).
  Weights, function values and basis vectors of l2(G) follow this order.
  Entropies, capacities and output entropies are in bits (log base 2).
  Choi matrix: J = sum_ij E_ij (x) Phi(E_ij), unnormalized (trace = input
  dimension), input factor first; PPT tests transpose the output factor.
  Complex numbers in JSON are [re, im]; floats are printed in the shortest form
  that parses back to the same f64.
  Literals: comma-separated expressions over decimals, rationals, i, sqrt(q),
  + - * / and parentheses, evaluated exactly and converted to f64 once.
  Groups: z{n}, z2^{n}, z{a}xz{b}..., s3, s4, d{n}, d4-semidirect, or a JSON file.

Tolerances:
  --tol (default 1e-10) is the pass threshold of `channel check` and `duality`.
  Trace preservation of Kraus input: 1e-10. Fixed-point kernels and algebra
  tests: 1e-9. Eigenvalues in [-1e-10, 0) are clipped to 0 before entropies.

Exit codes: 0 success, 2 validation error, 3 numerical failure,
64 unknown subcommand. Errors are a JSON object {\"error\": {...}} on stderr.
Every successful run writes a RunManifest (see `hchan replay --help`).";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(
    name = "hchan",
    version,
    about = "Quantum channels built from finite groups: construction, fixed points, geometry, entropies",
    after_help = CONVENTIONS,
    propagate_version = true
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Write the document to PATH instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Output format; csv only for bloch-orbit and aqbc-search.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for stochastic commands (aqbc-search, capacity, moe, noiseless).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Pass threshold where a command documents one.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Manifest path (default: <out>.manifest.json, else
    /// $HCHAN_MANIFEST_DIR or .hchan/manifests).
    #[arg(long, global = true, value_name = "PATH")]
    pub manifest: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build or inspect a group.
    #[command(subcommand)]
    Group(GroupCmd),
    /// Construct or inspect channels.
    #[command(subcommand)]
    Channel(ChannelCmd),
    /// Extremality of the Schur channel of φ, with the AQBC certificate.
    #[command(after_help = CONVENTIONS)]
    Extremality(PhiInput),
    /// Bloch vectors of the orbit π(s)*ξ, one row per group element.
    #[command(after_help = CONVENTIONS)]
    BlochOrbit(PhiInput),
    /// Sample unit vectors of a representation and certify extreme,
    /// non-random-unitary Schur channels.
    #[command(after_help = CONVENTIONS)]
    AqbcSearch(AqbcArgs),
    /// One-shot quantum capacity of the Schur channel of φ (bits).
    #[command(after_help = CONVENTIONS)]
    Capacity(CapacityArgs),
    /// Minimum output entropy upper bound by multi-start ascent (bits).
    #[command(after_help = CONVENTIONS)]
    Moe(MoeArgs),
    /// Entanglement-breaking verdict for Θ(μ) or Θ̂(φ).
    #[command(after_help = CONVENTIONS)]
    EbTest(SourceArgs),
    /// Fixed-point space, algebra test and its predicted generators.
    #[command(after_help = CONVENTIONS)]
    Fixpoints(SourceArgs),
    /// Structure decomposition of the fixed-point algebra and its noiseless blocks.
    #[command(after_help = CONVENTIONS)]
    Noiseless(SourceArgs),
    /// Abelian Fourier duality residual between Θ(μ) and Θ̂(μ̂); passes below --tol.
    #[command(after_help = CONVENTIONS)]
    Duality(MeasureInput),
    /// Re-run a manifest and compare the output hash; exit 3 on mismatch.
    #[command(after_help = CONVENTIONS)]
    Replay(ReplayArgs),
}

#[derive(Subcommand, Debug)]
pub enum GroupCmd {
    /// Validate a group and emit its multiplication table document.
    #[command(after_help = CONVENTIONS)]
    Build(GroupArg),
    /// Summary: labels in index order, element orders, inverses, irreps.
    #[command(after_help = CONVENTIONS)]
    Show(GroupArg),
}

#[derive(Subcommand, Debug)]
pub enum ChannelCmd {
    /// Θ(μ): Kraus operators √μ(s) r_s (right translations).
    #[command(after_help = CONVENTIONS)]
    Theta(MeasureInput),
    /// Θ̂(φ): the Schur multiplier by the Gram matrix [φ(s⁻¹t)].
    #[command(after_help = CONVENTIONS)]
    ThetaHat(PhiInput),
    /// Weyl-covariant channel on Z_d with weights q indexed by s·d + t.
    #[command(after_help = CONVENTIONS)]
    Weyl(WeylArgs),
    /// outer ∘ inner for two channel documents.
    #[command(after_help = CONVENTIONS)]
    Compose(ComposeArgs),
    /// Residuals, Choi rank, unitary-conjugation and PPT tests; the
    /// bistochastic verdict uses --tol.
    #[command(after_help = CONVENTIONS)]
    Check(CheckArgs),
}

#[derive(Args, Debug, Clone)]
pub struct GroupArg {
    /// Alias or group JSON file.
    #[arg(long)]
    pub group: String,
}

#[derive(Args, Debug, Clone)]
pub struct MeasureInput {
    /// Alias or group JSON file.
    #[arg(long)]
    pub group: String,
    /// `haar`, a weight list in element order, or a measure JSON file.
    #[arg(long)]
    pub measure: String,
}

#[derive(Args, Debug, Clone, Default)]
pub struct PhiArgs {
    /// φ values in element order, or a function JSON file.
    #[arg(long, conflicts_with_all = ["irrep", "rep", "xi"])]
    pub phi: Option<String>,
    /// Catalog irrep: label, `<k>d` (first of dimension k), index, or `regular`.
    #[arg(long, conflicts_with = "rep")]
    pub irrep: Option<String>,
    /// Representation JSON file.
    #[arg(long, value_name = "FILE")]
    pub rep: Option<PathBuf>,
    /// Unit vector ξ; φ(s) = ⟨π(s)ξ, ξ⟩.
    #[arg(long, allow_hyphen_values = true)]
    pub xi: Option<String>,
}

impl PhiArgs {
    pub fn is_given(&self) -> bool {
        self.phi.is_some() || self.irrep.is_some() || self.rep.is_some()
    }
}

#[derive(Args, Debug, Clone)]
pub struct PhiInput {
    /// Alias or group JSON file.
    #[arg(long)]
    pub group: String,
    #[command(flatten)]
    pub phi: PhiArgs,
}

#[derive(Args, Debug, Clone)]
pub struct SourceArgs {
    /// Alias or group JSON file.
    #[arg(long)]
    pub group: Option<String>,
    /// Use Θ(μ): `haar`, weights, or a measure JSON file.
    #[arg(long, conflicts_with_all = ["phi", "irrep", "rep", "channel"])]
    pub measure: Option<String>,
    #[command(flatten)]
    pub phi: PhiArgs,
    /// Channel JSON file (fixpoints and noiseless only).
    #[arg(long, value_name = "FILE", conflicts_with_all = ["phi", "irrep", "rep"])]
    pub channel: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct AqbcArgs {
    /// Alias or group JSON file.
    #[arg(long)]
    pub group: String,
    /// Catalog irrep: label, `<k>d`, index, or `regular`.
    #[arg(long, conflicts_with = "rep")]
    pub irrep: Option<String>,
    /// Representation JSON file.
    #[arg(long, value_name = "FILE")]
    pub rep: Option<PathBuf>,
    /// Number of random samples.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Skip the refinement of rank-deficient samples.
    #[arg(long)]
    pub no_refine: bool,
    /// Vectors evaluated before the random samples (repeatable).
    #[arg(long, value_name = "VECTOR", allow_hyphen_values = true)]
    pub inject: Vec<String>,
}

#[derive(Args, Debug, Clone)]
pub struct CapacityArgs {
    #[command(flatten)]
    pub input: PhiInput,
    /// Random restarts on top of the uniform and vertex starts.
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    /// Iteration cap per start.
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    /// Stop when the duality gap of a start falls below this (bits).
    #[arg(long, default_value_t = 1e-9)]
    pub gap_tol: f64,
}

#[derive(Args, Debug, Clone)]
pub struct MoeArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Random restarts on top of the basis and uniform starts.
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
    /// Iteration cap per start.
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
}

#[derive(Args, Debug, Clone)]
pub struct WeylArgs {
    #[arg(long)]
    pub d: usize,
    /// d² weights, entry s·d + t for the pair (s, t).
    #[arg(long)]
    pub q: String,
}

#[derive(Args, Debug, Clone)]
pub struct ComposeArgs {
    #[arg(long, value_name = "FILE")]
    pub outer: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub inner: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct CheckArgs {
    /// Channel JSON file.
    pub channel: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct ReplayArgs {
    /// Manifest written by a previous run.
    pub manifest: PathBuf,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Group(GroupCmd::Build(_)) => "group build",
            Command::Group(GroupCmd::Show(_)) => "group show",
            Command::Channel(ChannelCmd::Theta(_)) => "channel theta",
            Command::Channel(ChannelCmd::ThetaHat(_)) => "channel theta-hat",
            Command::Channel(ChannelCmd::Weyl(_)) => "channel weyl",
            Command::Channel(ChannelCmd::Compose(_)) => "channel compose",
            Command::Channel(ChannelCmd::Check(_)) => "channel check",
            Command::Extremality(_) => "extremality",
            Command::BlochOrbit(_) => "bloch-orbit",
            Command::AqbcSearch(_) => "aqbc-search",
            Command::Capacity(_) => "capacity",
            Command::Moe(_) => "moe",
            Command::EbTest(_) => "eb-test",
            Command::Fixpoints(_) => "fixpoints",
            Command::Noiseless(_) => "noiseless",
            Command::Duality(_) => "duality",
            Command::Replay(_) => "replay",
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, Command::AqbcSearch(_) | Command::Capacity(_) | Command::Moe(_) | Command::Noiseless(_))
    }

    pub fn supports_csv(&self) -> bool {
        matches!(self, Command::BlochOrbit(_) | Command::AqbcSearch(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn every_subcommand_help_documents_conventions() {
        let mut root = Cli::command();
        root.build();
        let mut stack: Vec<clap::Command> = root.get_subcommands().cloned().collect();
        let mut leaves = 0;
        while let Some(mut cmd) = stack.pop() {
            if cmd.get_name() == "help" {
                continue;
            }
            if cmd.has_subcommands() {
                stack.extend(cmd.get_subcommands().cloned());
                continue;
            }
            leaves += 1;
            let help = cmd.render_long_help().to_string();
            for needle in ["bits", "Choi", "element", "Tolerances", "1e-10"] {
                assert!(help.contains(needle), "{} help lacks {needle}", cmd.get_name());
            }
        }
        assert_eq!(leaves, 17);
    }

    #[test]
    fn parses_spec_examples() {
        let cli = Cli::try_parse_from(["hchan", "extremality", "--group", "s3", "--irrep", "2d", "--xi", "i/sqrt(10),3/sqrt(10)"])
            .unwrap();
        assert_eq!(cli.command.name(), "extremality");
        let cli = Cli::try_parse_from(["hchan", "channel", "theta", "--group", "z2", "--measure", "1,0"]).unwrap();
        assert_eq!(cli.command.name(), "channel theta");
        let cli = Cli::try_parse_from(["hchan", "bloch-orbit", "--group", "s3", "--irrep", "2d", "--xi", "1,0", "--format", "csv"])
            .unwrap();
        assert_eq!(cli.global.format, Format::Csv);
        assert!(Cli::try_parse_from(["hchan", "extremality", "--group", "s3", "--phi", "1", "--irrep", "2d"]).is_err());
    }
}
