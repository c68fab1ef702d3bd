//! Subcommand bodies. Each returns the full output document as a string so
//! that nothing is written when a sweep point fails.

use std::f64::consts::FRAC_1_SQRT_2;

use anyhow::{bail, Context, Result};
use catcoh::asymmetry::{AsymmetryReport, WignerCache};
use catcoh::channels::{ground_projector, lambda_channel, phi_channel};
use catcoh::correlations::{p_seq_approx, SequenceStats};
use catcoh::discrimination::{exact_report, naive_report, trace_distance, DiscriminationReport};
use catcoh::repeatability::RepeatabilityResult;
use catcoh::{Error, HermitianMatrix, ReservoirState, C64};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{DiscriminateArgs, Fig1Args, Fig2Args, Format, SingleUseArgs, SweepArgs};
use crate::format::{fmt_g, to_json, Csv, JsonDocument};

const SCHEMA_VERSION: u32 = 1;
/// Largest N accepted by `fig1`.
pub const FIG1_MAX_N: usize = 256;

fn grid(lengths: &[usize], ns: &[usize]) -> Vec<(usize, usize)> {
    lengths.iter().flat_map(|&l| ns.iter().map(move |&n| (l, n))).collect()
}

fn fmt_c(z: C64) -> String {
    if z.im == 0.0 {
        fmt_g(z.re)
    } else {
        let sign = if z.im < 0.0 { '-' } else { '+' };
        format!("{}{sign}{}i", fmt_g(z.re), fmt_g(z.im.abs()))
    }
}

#[derive(Serialize)]
struct SingleUseConfig<'a> {
    lengths: &'a [usize],
    gate: &'a str,
}

#[derive(Serialize)]
struct SingleUseRow {
    length: usize,
    /// Row-major, each entry `[re, im]`.
    rho_s: [[[f64; 2]; 2]; 2],
    plus_population: f64,
    reservoir_fidelity: f64,
    trace_distance_to_target: f64,
}

pub fn single_use(args: &SingleUseArgs) -> Result<String> {
    let gate = args.gate.gate;
    let target = HermitianMatrix::projector(&[gate.u00, gate.u10]);
    let plus = C64::new(FRAC_1_SQRT_2, 0.0);
    let mut rows = Vec::new();
    for &l in &args.lengths.0 {
        let eta = ReservoirState::eta(l, 0, 0.0, 1)?;
        let rho_s = phi_channel(&eta, &gate, &ground_projector())?;
        let sigma = lambda_channel(&eta, &gate, &ground_projector())?;
        let entry = |i, j| {
            let z: C64 = rho_s.get(i, j);
            [z.re, z.im]
        };
        rows.push((
            rho_s.clone(),
            SingleUseRow {
                length: l,
                rho_s: [[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]],
                plus_population: rho_s.expectation(&[plus, plus])?,
                reservoir_fidelity: sigma.fidelity_with(&eta),
                trace_distance_to_target: trace_distance(&rho_s, &target)?,
            },
        ));
    }
    let stamp = format!("catcoh single-use L={} gate={}", args.lengths.stamp(), args.gate.stamp());
    Ok(match args.format {
        None => {
            let mut s = String::new();
            for (rho, r) in &rows {
                s += &format!("L = {}\n", r.length);
                s += &format!(
                    "  rho_S = [[{}, {}], [{}, {}]]\n",
                    fmt_c(rho.get(0, 0)),
                    fmt_c(rho.get(0, 1)),
                    fmt_c(rho.get(1, 0)),
                    fmt_c(rho.get(1, 1))
                );
                s += &format!("  <+|rho_S|+> = {}\n", fmt_g(r.plus_population));
                s += &format!("  reservoir fidelity = {}\n", fmt_g(r.reservoir_fidelity));
                s += &format!("  trace distance to target = {}\n", fmt_g(r.trace_distance_to_target));
            }
            s
        }
        Some(Format::Csv) => {
            let mut csv = Csv::new(
                &stamp,
                &["L", "rho00", "rho01_re", "rho01_im", "rho11", "plus_population", "reservoir_fidelity", "trace_distance"],
            );
            for (_, r) in &rows {
                csv.row(&[
                    r.length.to_string(),
                    fmt_g(r.rho_s[0][0][0]),
                    fmt_g(r.rho_s[0][1][0]),
                    fmt_g(r.rho_s[0][1][1]),
                    fmt_g(r.rho_s[1][1][0]),
                    fmt_g(r.plus_population),
                    fmt_g(r.reservoir_fidelity),
                    fmt_g(r.trace_distance_to_target),
                ]);
            }
            csv.finish()
        }
        Some(Format::Json) => {
            let rows: Vec<_> = rows.into_iter().map(|(_, r)| r).collect();
            let config = SingleUseConfig { lengths: &args.lengths.0, gate: args.gate.stamp() };
            to_json(&JsonDocument { schema_version: SCHEMA_VERSION, command: "single-use", config: &config, rows: &rows })
        }
    })
}

#[derive(Serialize)]
struct SweepConfig<'a> {
    lengths: &'a [usize],
    n_range: &'a str,
    stride: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    eig_convention: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gate: Option<&'a str>,
}

#[derive(Serialize)]
struct ProbsRow {
    n_qubits: usize,
    length: usize,
    n: usize,
    p_seq_exact: f64,
    p_seq_approx: Option<f64>,
    p_count_exact: f64,
    product_p_seq: f64,
    product_p_count: f64,
}

pub fn probs(args: &SweepArgs) -> Result<String> {
    let points = grid(&args.lengths.0, &args.n.values(args.stride));
    let stats: Vec<SequenceStats> = points
        .par_iter()
        .map(|&(l, n)| SequenceStats::compute(n, l).with_context(|| format!("N={n}, L={l}")))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for s in &stats {
        for n in 0..=s.n_qubits {
            rows.push(ProbsRow {
                n_qubits: s.n_qubits,
                length: s.length,
                n,
                p_seq_exact: s.p_seq[n],
                p_seq_approx: p_seq_approx(n, s.n_qubits, s.length).ok(),
                p_count_exact: s.p_count[n],
                product_p_seq: s.product_p_seq[n],
                product_p_count: s.product_p_count[n],
            });
        }
    }
    let config = SweepConfig {
        lengths: &args.lengths.0,
        n_range: args.n.stamp(),
        stride: args.stride,
        eig_convention: None,
        gate: None,
    };
    Ok(match args.format {
        Format::Json => to_json(&JsonDocument { schema_version: SCHEMA_VERSION, command: "probs", config: &config, rows: &rows }),
        Format::Csv => {
            let stamp = format!("catcoh probs L={} N={} stride={}", args.lengths.stamp(), args.n.stamp(), args.stride);
            let mut csv = Csv::new(
                &stamp,
                &["N", "L", "n", "p_seq_exact", "p_seq_approx", "p_count_exact", "product_p_seq", "product_p_count"],
            );
            for r in &rows {
                csv.row(&[
                    r.n_qubits.to_string(),
                    r.length.to_string(),
                    r.n.to_string(),
                    fmt_g(r.p_seq_exact),
                    r.p_seq_approx.map(fmt_g).unwrap_or_default(),
                    fmt_g(r.p_count_exact),
                    fmt_g(r.product_p_seq),
                    fmt_g(r.product_p_count),
                ]);
            }
            csv.finish()
        }
    })
}

#[derive(Serialize)]
struct DiscriminateConfig<'a> {
    lengths: &'a [usize],
    n_range: &'a str,
    stride: u64,
    theta1: f64,
    theta2: f64,
}

#[derive(Serialize)]
struct ErrorField {
    kind: &'static str,
    message: String,
}

#[derive(Serialize)]
struct DiscriminateRow {
    #[serde(flatten)]
    report: DiscriminationReport,
    /// Set when the exact branch could not be evaluated.
    error: Option<ErrorField>,
}

pub fn discriminate(args: &DiscriminateArgs) -> Result<String> {
    if args.format != Format::Json {
        bail!("discriminate only writes JSON");
    }
    let points = grid(&args.lengths.0, &args.n.values(args.stride));
    let rows: Vec<DiscriminateRow> = points
        .par_iter()
        .map(|&(l, n)| -> Result<DiscriminateRow> {
            match exact_report(args.theta1, args.theta2, l, n) {
                Ok(report) => Ok(DiscriminateRow { report, error: None }),
                Err(e @ Error::Capacity { .. }) => Ok(DiscriminateRow {
                    report: naive_report(args.theta1, args.theta2, l, n)?,
                    error: Some(ErrorField { kind: "capacity", message: e.to_string() }),
                }),
                Err(e) => Err(anyhow::Error::new(e).context(format!("N={n}, L={l}"))),
            }
        })
        .collect::<Result<_>>()?;
    let config = DiscriminateConfig {
        lengths: &args.lengths.0,
        n_range: args.n.stamp(),
        stride: args.stride,
        theta1: args.theta1,
        theta2: args.theta2,
    };
    Ok(to_json(&JsonDocument { schema_version: SCHEMA_VERSION, command: "discriminate", config: &config, rows: &rows }))
}

#[derive(Serialize)]
struct Fig1Row {
    length: usize,
    n_qubits: usize,
    a_exact: f64,
    a_approx: f64,
    a_bound: f64,
}

pub fn fig1(args: &Fig1Args) -> Result<String> {
    let ns = args.n.values(args.stride);
    let max_n = ns.iter().copied().max().unwrap_or(1);
    if max_n > FIG1_MAX_N {
        bail!("fig1 supports N up to {FIG1_MAX_N}, got {max_n}");
    }
    let cache = WignerCache::new(max_n as u32)?;
    let convention = args.eig_convention.to_core();
    let rows: Vec<Fig1Row> = grid(&args.lengths.0, &ns)
        .par_iter()
        .map(|&(l, n)| {
            let r = AsymmetryReport::compute(n, l, convention, &cache, false).with_context(|| format!("N={n}, L={l}"))?;
            Ok(Fig1Row { length: l, n_qubits: n, a_exact: r.a_exact, a_approx: r.a_approx, a_bound: r.a_bound })
        })
        .collect::<Result<_>>()?;
    let config = SweepConfig {
        lengths: &args.lengths.0,
        n_range: args.n.stamp(),
        stride: args.stride,
        eig_convention: Some(args.eig_convention.name()),
        gate: None,
    };
    Ok(match args.format {
        Format::Json => to_json(&JsonDocument { schema_version: SCHEMA_VERSION, command: "fig1", config: &config, rows: &rows }),
        Format::Csv => {
            let stamp = format!(
                "catcoh fig1 L={} N={} stride={} eig-convention={}",
                args.lengths.stamp(),
                args.n.stamp(),
                args.stride,
                args.eig_convention.name()
            );
            let mut csv = Csv::new(&stamp, &["L", "N", "A_exact", "A_approx", "A_bound"]);
            for r in &rows {
                csv.row(&[r.length.to_string(), r.n_qubits.to_string(), fmt_g(r.a_exact), fmt_g(r.a_approx), fmt_g(r.a_bound)]);
            }
            csv.finish()
        }
    })
}

#[derive(Serialize)]
struct Fig2Row {
    length: usize,
    n_qubits: usize,
    xi_exact: f64,
    xi_approx: f64,
}

pub fn fig2(args: &Fig2Args) -> Result<String> {
    let gate = args.gate.gate;
    let rows: Vec<Fig2Row> = grid(&args.lengths.0, &args.n.values(args.stride))
        .par_iter()
        .map(|&(l, n)| {
            let r = RepeatabilityResult::compute(n, l, &gate, false).with_context(|| format!("N={n}, L={l}"))?;
            Ok(Fig2Row { length: l, n_qubits: n, xi_exact: r.trace_norm_exact, xi_approx: r.trace_norm_approx })
        })
        .collect::<Result<_>>()?;
    let config = SweepConfig {
        lengths: &args.lengths.0,
        n_range: args.n.stamp(),
        stride: args.stride,
        eig_convention: None,
        gate: Some(args.gate.stamp()),
    };
    Ok(match args.format {
        Format::Json => to_json(&JsonDocument { schema_version: SCHEMA_VERSION, command: "fig2", config: &config, rows: &rows }),
        Format::Csv => {
            let stamp = format!(
                "catcoh fig2 L={} N={} stride={} gate={}",
                args.lengths.stamp(),
                args.n.stamp(),
                args.stride,
                args.gate.stamp()
            );
            let mut csv = Csv::new(&stamp, &["L", "N", "xi_exact", "xi_approx"]);
            for r in &rows {
                csv.row(&[r.length.to_string(), r.n_qubits.to_string(), fmt_g(r.xi_exact), fmt_g(r.xi_approx)]);
            }
            csv.finish()
        }
    })
}
