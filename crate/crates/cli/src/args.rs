//! Command-line grammar and value parsers.

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context};
use catcoh::asymmetry::EigenConvention;
use catcoh::{QubitGate, C64};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "catcoh", version, about = "Experiments on a coherence reservoir reused across many qubits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One use of the reservoir: qubit state, reservoir fidelity, error to target.
    SingleUse(SingleUseArgs),
    /// Measurement statistics of the sequentially prepared qubits.
    Probs(SweepArgs),
    /// Distinguishing two reservoir phases from the qubits they prepared.
    Discriminate(DiscriminateArgs),
    /// Asymmetry of N single-use output qubits against its bound.
    Fig1(Fig1Args),
    /// Trace norm of the repeatability error.
    Fig2(Fig2Args),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EigConvention {
    /// `1 − 1/(2L)` and `1/(2L)`.
    #[value(name = "eq12")]
    Eq12,
    /// `1 − 1/L` and `1/L`.
    #[value(name = "appendixA")]
    AppendixA,
}

impl EigConvention {
    pub fn name(self) -> &'static str {
        match self {
            Self::Eq12 => "eq12",
            Self::AppendixA => "appendixA",
        }
    }

    pub fn to_core(self) -> EigenConvention {
        match self {
            Self::Eq12 => EigenConvention::SingleUse,
            Self::AppendixA => EigenConvention::InverseLength,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SingleUseArgs {
    /// Reservoir lengths, comma separated.
    #[arg(long = "L", value_parser = parse_lengths, default_value = "1,2,10,100")]
    pub lengths: LengthList,
    /// Gate column `a,b` with `U|0⟩ ∝ a|0⟩ + b|1⟩`; complex parts like `0.6+0.8i`.
    #[arg(long, value_parser = parse_gate, default_value = "1,1")]
    pub gate: GateSpec,
    /// Plain text when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long = "L", value_parser = parse_lengths, default_value = "1000")]
    pub lengths: LengthList,
    /// `a..b` (inclusive), a single value, or a comma list.
    #[arg(long = "N", value_parser = parse_range, default_value = "1..16")]
    pub n: NRange,
    /// Keep every k-th value of the N range.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub stride: u64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct DiscriminateArgs {
    #[arg(long = "L", value_parser = parse_lengths, default_value = "8")]
    pub lengths: LengthList,
    #[arg(long = "N", value_parser = parse_range, default_value = "1..6")]
    pub n: NRange,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub stride: u64,
    /// Reservoir phase of the first hypothesis, radians.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta1: f64,
    /// Reservoir phase of the second hypothesis, radians.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2, allow_negative_numbers = true)]
    pub theta2: f64,
    /// Only `json` is available for this report.
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct Fig1Args {
    #[arg(long = "L", value_parser = parse_lengths, default_value = "12,17,27")]
    pub lengths: LengthList,
    #[arg(long = "N", value_parser = parse_range, default_value = "1..200")]
    pub n: NRange,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub stride: u64,
    /// Single-qubit spectrum attached to each L.
    #[arg(long = "eig-convention", value_enum, default_value = "eq12")]
    pub eig_convention: EigConvention,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct Fig2Args {
    #[arg(long = "L", value_parser = parse_lengths, default_value = "20,50,100,200")]
    pub lengths: LengthList,
    #[arg(long = "N", value_parser = parse_range, default_value = "1..10")]
    pub n: NRange,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub stride: u64,
    #[arg(long, value_parser = parse_gate, default_value = "1,1")]
    pub gate: GateSpec,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LengthList(pub Vec<usize>);

impl LengthList {
    pub fn stamp(&self) -> String {
        join(&self.0)
    }
}

fn join(v: &[usize]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn parse_lengths(s: &str) -> anyhow::Result<LengthList> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let l: usize = part.trim().parse().with_context(|| format!("bad L value `{part}`"))?;
        if l == 0 {
            bail!("L must be at least 1");
        }
        out.push(l);
    }
    Ok(LengthList(out))
}

/// The N values requested, before striding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NRange {
    text: String,
    values: Vec<usize>,
}

impl NRange {
    pub fn values(&self, stride: u64) -> Vec<usize> {
        self.values.iter().copied().step_by(stride as usize).collect()
    }

    pub fn stamp(&self) -> &str {
        &self.text
    }
}

fn parse_range(s: &str) -> anyhow::Result<NRange> {
    let s = s.trim();
    let values: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().with_context(|| format!("bad range start in `{s}`"))?;
        let b: usize = b.trim().trim_start_matches('=').parse().with_context(|| format!("bad range end in `{s}`"))?;
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|p| p.trim().parse::<usize>().with_context(|| format!("bad N value `{p}`")))
            .collect::<anyhow::Result<_>>()?
    };
    if values.is_empty() {
        bail!("N range `{s}` is empty");
    }
    if values.contains(&0) {
        bail!("N must be at least 1");
    }
    Ok(NRange { text: s.to_string(), values })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateSpec {
    text: String,
    pub gate: QubitGate,
}

impl GateSpec {
    pub fn stamp(&self) -> &str {
        &self.text
    }
}

/// `a,b` normalised to a unit vector, then completed to a unitary.
fn parse_gate(s: &str) -> anyhow::Result<GateSpec> {
    let (a, b) = s.split_once(',').context("gate must be a pair `a,b`")?;
    let a = C64::from_str(a.trim()).map_err(|e| anyhow::anyhow!("bad complex `{a}`: {e}"))?;
    let b = C64::from_str(b.trim()).map_err(|e| anyhow::anyhow!("bad complex `{b}`: {e}"))?;
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        bail!("gate column must be a nonzero finite vector");
    }
    let (a, b) = (a / norm, b / norm);
    let gate = QubitGate::from_column(a, b)?;
    Ok(GateSpec { text: s.trim().to_string(), gate })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1..4").unwrap().values(1), vec![1, 2, 3, 4]);
        assert_eq!(parse_range("1..=4").unwrap().values(2), vec![1, 3]);
        assert_eq!(parse_range("7").unwrap().values(1), vec![7]);
        assert_eq!(parse_range("2,4,16").unwrap().values(1), vec![2, 4, 16]);
        assert!(parse_range("5..3").is_err());
        assert!(parse_range("0..3").is_err());
        assert!(parse_range("a").is_err());
    }

    #[test]
    fn lengths() {
        assert_eq!(parse_lengths("12,17, 27").unwrap().0, vec![12, 17, 27]);
        assert!(parse_lengths("0").is_err());
        assert!(parse_lengths("").is_err());
    }

    #[test]
    fn default_gate_is_hadamard_like() {
        assert!(parse_gate("1,1").unwrap().gate.prepares_plus());
        let g = parse_gate("0.6,0.8i").unwrap().gate;
        assert!((g.u10 - C64::new(0.0, 0.8)).norm() < 1e-15);
        assert!(parse_gate("0,0").is_err());
        assert!(parse_gate("1").is_err());
    }
}
