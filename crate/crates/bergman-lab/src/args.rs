use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "bergman-lab", version, about = "Numerical laboratory for Bergman-type integral operators on the unit ball")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output format (svg is accepted by `diagram` only)
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write to this file instead of standard output
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Seed for every stochastic step; recorded in the output
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Omit the timestamp field so repeated runs are byte-identical
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
    Text,
}

#[derive(Debug, Args)]
pub struct Order {
    /// Complex dimension d of the ball
    #[arg(long)]
    pub d: usize,
    /// Kernel order α: a decimal, or a fraction "a/b" for exact classification
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide boundedness and compactness of K_α: L^p → L^q
    Classify {
        #[command(flatten)]
        order: Order,
        /// Source exponent: integer, decimal, fraction or "inf"
        #[arg(long)]
        p: String,
        /// Target exponent: integer, decimal, fraction or "inf"
        #[arg(long)]
        q: String,
    },
    /// Emit the type diagram over the unit square of (1/p, 1/q)
    Diagram {
        #[command(flatten)]
        order: Order,
        /// Grid points per axis (at least 8)
        #[arg(long, default_value_t = 33)]
        resolution: usize,
    },
    /// Exact norm or closed-form upper bound; with --s, the bilinear-form constant
    Norm {
        #[command(flatten)]
        order: Order,
        #[arg(long)]
        p: String,
        #[arg(long, required_unless_present = "s")]
        q: Option<String>,
        /// Exponent of the second function in ∫∫ f(w) g(z) |1−⟨z,w⟩|^{−α}
        #[arg(long, conflicts_with = "q")]
        s: Option<String>,
    },
    /// Hilbert–Schmidt trace Tr(K_α* K_α)
    Trace {
        #[command(flatten)]
        order: Order,
        /// Truncation of the eigenvalue-square series cross-check (d = 1)
        #[arg(long, default_value_t = 1_000_000)]
        truncation: usize,
    },
    /// Eigenvalues and L² norm of K_α on the disc
    Spectrum {
        #[command(flatten)]
        order: Order,
        /// Number of eigenvalues to list
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Truncation used for the norm and the squared sum
        #[arg(long, default_value_t = 100_000)]
        truncation: usize,
    },
    /// Sum of squared disc eigenvalues against its Gamma closed form
    Identity {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value_t = 1_000_000)]
        truncation: usize,
    },
    /// ∫ (1−|w|²)^γ |1−⟨z,w⟩|^{−2β} dv(w) at |z|² = r
    Integral {
        #[arg(long)]
        d: usize,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        gamma: f64,
        /// Squared modulus |z|² in [0, 1]
        #[arg(long)]
        r: f64,
        /// Also estimate by Monte Carlo with this many samples
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Randomized and empirical verification runs
    Verify {
        #[command(flatten)]
        order: Order,
        #[arg(long, value_enum, default_value_t = VerifyMode::Hls)]
        mode: VerifyMode,
        /// Source exponent (hls, probe)
        #[arg(long)]
        p: Option<String>,
        /// Second function exponent (hls)
        #[arg(long)]
        s: Option<String>,
        /// Target exponent (probe)
        #[arg(long)]
        q: Option<String>,
        /// Number of random trials (hls, weak)
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Bump depths k (bumps)
        #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2, 3, 4, 5, 6, 7, 8])]
        ks: Vec<u32>,
        /// Monte Carlo samples per distribution function (bumps)
        #[arg(long, default_value_t = 1 << 18)]
        samples: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyMode {
    /// Bilinear form against the closed-form constant
    Hls,
    /// Weak-type constant over random bump mixtures
    Weak,
    /// Weak and strong norms along bumps concentrating at the sphere
    Bumps,
    /// Empirical boundedness probe compared with the classifier
    Probe,
}
