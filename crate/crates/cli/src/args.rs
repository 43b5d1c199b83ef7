//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use orthopair_core::config::DEFAULT_TOL;
use orthopair_core::continuation::DEFAULT_STEP;
use orthopair_core::tangent::DEFAULT_RANK_TOL;

const FILE_FORMATS: &str = "\
Input files:
  pair file      {\"format\":\"bases\",\"n\":N,\"e_basis\":M,\"f_basis\":M}
                 (columns of each matrix are the basis vectors) or
                 {\"format\":\"projectors\",\"p\":[M,...],\"q\":[M,...]}
  Hadamard file  {\"n\":N,\"phases\":[[...],...]}, the (N-1)x(N-1) free phases
                 in radians of the dephased Hadamard matrix H, whose first row
                 and column are all ones. The unitary transition matrix is
                 H/sqrt(N): every entry has modulus 1/sqrt(N).
  graph file     {\"vertices\":V,\"edges\":[[a,b],...]} or {\"bipartite\":[k,n]}
Complex entries are [re, im] pairs, matrices row-major nested arrays.
All indices (subsets, graph vertices) are 1-based.

Exit status: 0 ok, 1 fail, 2 indeterminate, 3 usage or input error.";

#[derive(Debug, Parser)]
#[command(name = "orthopair", version, about = "Orthogonal pairs, mutually unbiased bases and complex Hadamard matrices", after_help = FILE_FORMATS)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Residual tolerance for pass/fail decisions.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Seed for randomized commands (required by sample and complement).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Precision::Double)]
    pub precision: Precision,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Precision {
    Double,
    /// Double-double arithmetic (about 31 significant digits).
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    /// The full pair as a B_{n,n} point.
    Bnn,
    /// P = sum of the chosen p's together with all q's, as an A(n) point.
    A6,
    /// Three p's and three q's as a point of the complete bipartite graph algebra.
    X33,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the coordinate/Fourier pair in dimension n.
    StandardPair {
        #[arg(long)]
        n: usize,
        /// Exchange Fourier columns 3 and 4 (the point x0 at n = 6).
        #[arg(long)]
        swap34: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report every relation residual of a pair or Hadamard file.
    Verify { file: PathBuf },
    /// Invariants u1, u2, u3 of a p-triple sum against a q-triple, and z1, z2.
    Invariants {
        file: PathBuf,
        #[arg(long, default_value = "1,2,3")]
        p: String,
        #[arg(long, default_value = "1,2,3")]
        q: String,
    },
    /// Moduli tangent dimension at a configuration.
    Tangent {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Model::Bnn)]
        model: Model,
        /// p-subset for a6 and x33 (default 1,2,3).
        #[arg(long)]
        p: Option<String>,
        /// q-triple for x33 (default 1,2,3).
        #[arg(long)]
        q: Option<String>,
        /// Relative singular-value cut for numerical rank.
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        rank_tol: f64,
        /// Also report the rank of the invariant map on the tangent (x33 only).
        #[arg(long)]
        fiber: bool,
    },
    /// Defect of a complex Hadamard matrix in dephased coordinates.
    Defect {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        rank_tol: f64,
    },
    /// Trace the family from a point along directions of the tangent frame.
    Trace {
        start: PathBuf,
        /// Four comma-separated frame coordinates; repeatable. Defaults to
        /// the four coordinate directions.
        #[arg(long = "direction", allow_hyphen_values = true)]
        directions: Vec<String>,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 1e-2)]
        step: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random walk on the family keeping points with distinct canonical forms.
    Sample {
        start: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = DEFAULT_STEP)]
        step: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decide whether a configuration is equivalent to a Hermitian one.
    Membership {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        rank_tol: f64,
    },
    /// Trace identity between a p-triple and a q-triple.
    Identity {
        file: PathBuf,
        #[arg(long, default_value = "1,2,3")]
        p: String,
        #[arg(long, default_value = "1,2,3")]
        q: String,
        /// Product over the three cyclic pairs instead of all ordered pairs.
        #[arg(long)]
        unordered: bool,
    },
    /// Complete P = sum of the chosen p's by new projectors unbiased to every q.
    Complement {
        file: PathBuf,
        #[arg(long, default_value = "1,2,3")]
        p: String,
    },
    /// Convert a Hermitian pair file into a dephased Hadamard file.
    ToHadamard {
        pair: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the idempotent relations of a graph on p1..pn, q1..qn.
    TlCheck {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        pair: PathBuf,
        /// Edge parameter (default 1/n).
        #[arg(long)]
        r: Option<f64>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::StandardPair { .. } => "standard-pair",
            Command::Verify { .. } => "verify",
            Command::Invariants { .. } => "invariants",
            Command::Tangent { .. } => "tangent",
            Command::Defect { .. } => "defect",
            Command::Trace { .. } => "trace",
            Command::Sample { .. } => "sample",
            Command::Membership { .. } => "membership",
            Command::Identity { .. } => "identity",
            Command::Complement { .. } => "complement",
            Command::ToHadamard { .. } => "to-hadamard",
            Command::TlCheck { .. } => "tl-check",
        }
    }

    pub fn supports_extended(&self) -> bool {
        matches!(
            self,
            Command::StandardPair { .. }
                | Command::Verify { .. }
                | Command::Invariants { .. }
                | Command::Identity { .. }
                | Command::Defect { .. }
        )
    }
}
