use harmonic_channels::channel::{duality_check, theta, theta_hat, weyl_covariant, QuantumChannel};
use harmonic_channels::fixpoints::{
    fixed_point_space, harmonic_functions, is_algebra, noiseless_subsystems, noiseless_subsystems_theta,
    verify_fix_theta, verify_fix_theta_hat, AlgebraReport, FixComparison,
};
use harmonic_channels::group::{FiniteGroup, ProbabilityMeasure};
use harmonic_channels::io::{vector_to_json, ChannelJson, ComplexPair, GroupJson};
use harmonic_channels::rep::{irrep_catalog, PositiveDefiniteFunction};
use harmonic_channels::schur::{
    aqbc_search, bloch_vectors, correlation_matrix, export_bloch_orbit, is_maximally_extreme, AqbcConfig,
    AqbcReport, ExportFormat, MaxExtremeCertificate,
};
use harmonic_channels::spectra::{
    choi_ppt, eb_test, min_output_entropy, moe_theta_hat_restricted, moe_theta_restricted, schur_capacity_with,
    CapacityConfig, EbInput, MoeConfig, PptReport,
};
use serde::Serialize;

use crate::cli::{
    AqbcArgs, CapacityArgs, ChannelCmd, CheckArgs, Cli, Command, Format, GroupCmd, MeasureInput, MoeArgs, PhiArgs,
    PhiInput, SourceArgs,
};
use crate::error::{CliError, CliResult};
use crate::inputs::{parse_vector, pdf_from_vector, Inputs, RepSelector};

fn json<T: Serialize>(v: &T) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn require_seed(cli: &Cli) -> CliResult<u64> {
    cli.global
        .seed
        .ok_or_else(|| CliError::validation(format!("{} is stochastic and requires --seed", cli.command.name())))
}

/// Runs the command and returns the document text. Files read are recorded in
/// `inputs`; nothing is written.
pub fn execute(cli: &Cli, inputs: &mut Inputs) -> CliResult<String> {
    if cli.global.format == Format::Csv && !cli.command.supports_csv() {
        return Err(CliError::validation(format!("--format csv is not available for {}", cli.command.name())));
    }
    if cli.command.is_stochastic() {
        require_seed(cli)?;
    }
    let tol = cli.global.tol;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(CliError::validation("--tol must be a positive number"));
    }
    match &cli.command {
        Command::Group(GroupCmd::Build(a)) => json(&GroupJson::from_group(&inputs.group(&a.group)?.0)),
        Command::Group(GroupCmd::Show(a)) => group_show(&inputs.group(&a.group)?),
        Command::Channel(c) => channel(c, cli, inputs),
        Command::Extremality(a) => extremality(a, inputs),
        Command::BlochOrbit(a) => bloch_orbit(a, cli.global.format, inputs),
        Command::AqbcSearch(a) => aqbc(a, require_seed(cli)?, cli.global.format, inputs),
        Command::Capacity(a) => capacity(a, require_seed(cli)?, inputs),
        Command::Moe(a) => moe(a, require_seed(cli)?, inputs),
        Command::EbTest(a) => eb(a, inputs),
        Command::Fixpoints(a) => fixpoints(a, inputs),
        Command::Noiseless(a) => noiseless(a, require_seed(cli)?, inputs),
        Command::Duality(a) => duality(a, tol, inputs),
        Command::Replay(_) => Err(CliError::validation("replay cannot be nested")),
    }
}

#[derive(Serialize)]
struct IrrepSummary {
    label: String,
    dim: usize,
}

#[derive(Serialize)]
struct GroupSummary {
    name: String,
    order: usize,
    family: String,
    abelian: bool,
    identity: usize,
    labels: Vec<String>,
    element_orders: Vec<usize>,
    inverses: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cyclic_factors: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    irreps: Option<Vec<IrrepSummary>>,
}

fn group_show((g, name): &(FiniteGroup, String)) -> CliResult<String> {
    let irreps = irrep_catalog(g)
        .ok()
        .map(|cat| cat.into_iter().map(|p| IrrepSummary { dim: p.dim(), label: p.label }).collect());
    json(&GroupSummary {
        name: name.clone(),
        order: g.order(),
        family: g.family().to_string(),
        abelian: g.is_abelian(),
        identity: g.identity(),
        labels: g.labels().to_vec(),
        element_orders: g.elements().map(|s| g.element_order(s)).collect(),
        inverses: g.elements().map(|s| g.inv(s)).collect(),
        cyclic_factors: g.cyclic_factors().map(|f| f.to_vec()),
        irreps,
    })
}

fn phi_from(g: &FiniteGroup, a: &PhiArgs, inputs: &mut Inputs) -> CliResult<PositiveDefiniteFunction> {
    if let Some(spec) = &a.phi {
        return inputs.pdf_values(g, spec);
    }
    let sel = match (&a.irrep, &a.rep) {
        (Some(l), None) => RepSelector::Irrep(l.clone()),
        (None, Some(p)) => RepSelector::File(p.clone()),
        _ => return Err(CliError::validation("give --phi, or --irrep/--rep together with --xi")),
    };
    let xi = a.xi.as_deref().ok_or_else(|| CliError::validation("--xi is required with --irrep/--rep"))?;
    let pi = inputs.rep(g, &sel)?;
    pdf_from_vector(&pi, xi)
}

fn channel(c: &ChannelCmd, cli: &Cli, inputs: &mut Inputs) -> CliResult<String> {
    let ch = match c {
        ChannelCmd::Theta(a) => {
            let (g, _) = inputs.group(&a.group)?;
            theta(&inputs.measure(&g, &a.measure)?, &g)?
        }
        ChannelCmd::ThetaHat(a) => {
            let (g, _) = inputs.group(&a.group)?;
            theta_hat(&phi_from(&g, &a.phi, inputs)?, &g)?
        }
        ChannelCmd::Weyl(a) => {
            if a.d == 0 {
                return Err(CliError::validation("--d must be positive"));
            }
            let q = ProbabilityMeasure::new(crate::expr::parse_real_list(&a.q)?)?;
            weyl_covariant(&q, a.d)?
        }
        ChannelCmd::Compose(a) => {
            let outer = inputs.channel(&a.outer)?;
            let inner = inputs.channel(&a.inner)?;
            outer.compose(&inner)?
        }
        ChannelCmd::Check(a) => return check(a, cli.global.tol, inputs),
    };
    json(&ChannelJson::from_channel(&ch))
}

#[derive(Serialize)]
struct CheckReport {
    dim_in: usize,
    dim_out: usize,
    kraus_count: usize,
    choi_rank: usize,
    tp_residual: f64,
    unital_residual: f64,
    tol: f64,
    bistochastic: bool,
    unitary_conjugation: bool,
    ppt: PptReport,
}

fn check(a: &CheckArgs, tol: f64, inputs: &mut Inputs) -> CliResult<String> {
    let ch = inputs.channel(&a.channel)?;
    let tp = ch.tp_residual();
    let un = ch.unital_residual();
    json(&CheckReport {
        dim_in: ch.dim_in(),
        dim_out: ch.dim_out(),
        kraus_count: ch.kraus().len(),
        choi_rank: ch.choi_rank(),
        tp_residual: tp,
        unital_residual: un,
        tol,
        bistochastic: ch.dim_in() == ch.dim_out() && tp <= tol && un <= tol,
        unitary_conjugation: ch.is_unitary_conjugation().is_some(),
        ppt: choi_ppt(&ch),
    })
}

#[derive(Serialize)]
struct ExtremalityReport {
    verdict: &'static str,
    #[serde(flatten)]
    certificate: MaxExtremeCertificate,
    r_squared: usize,
}

fn extremality(a: &PhiInput, inputs: &mut Inputs) -> CliResult<String> {
    let (g, _) = inputs.group(&a.group)?;
    let phi = phi_from(&g, &a.phi, inputs)?;
    let cert = is_maximally_extreme(&phi, &g)?;
    json(&ExtremalityReport {
        verdict: if cert.extreme { "maximally-extreme" } else { "not-extreme" },
        r_squared: cert.rank * cert.rank,
        certificate: cert,
    })
}

fn bloch_orbit(a: &PhiInput, format: Format, inputs: &mut Inputs) -> CliResult<String> {
    let (g, name) = inputs.group(&a.group)?;
    let phi = phi_from(&g, &a.phi, inputs)?;
    let orbit = bloch_vectors(&correlation_matrix(&phi, &g)?);
    let fmt = match format {
        Format::Csv => ExportFormat::Csv,
        Format::Json => ExportFormat::Json,
    };
    let mut s = export_bloch_orbit(&orbit, g.labels(), &name, fmt)?;
    if !s.ends_with('\n') {
        s.push('\n');
    }
    Ok(s)
}

fn aqbc(a: &AqbcArgs, seed: u64, format: Format, inputs: &mut Inputs) -> CliResult<String> {
    let (g, _) = inputs.group(&a.group)?;
    let sel = match (&a.irrep, &a.rep) {
        (Some(l), None) => RepSelector::Irrep(l.clone()),
        (None, Some(p)) => RepSelector::File(p.clone()),
        _ => return Err(CliError::validation("give --irrep or --rep")),
    };
    let pi = inputs.rep(&g, &sel)?;
    let injected = a.inject.iter().map(|s| parse_vector(s)).collect::<CliResult<Vec<_>>>()?;
    let report = aqbc_search(&g, &pi, &AqbcConfig { seed, n_samples: a.samples, refine: !a.no_refine, injected })?;
    match format {
        Format::Json => json(&report),
        Format::Csv => Ok(aqbc_csv(&report, pi.dim())),
    }
}

fn aqbc_csv(r: &AqbcReport, dim: usize) -> String {
    let mut s = format!(
        "# samples: {}\n# certificates: {}\n# rejections: {}\nsample_index,rank,span_dim,affine_span_dim,refined",
        r.samples,
        r.certificates.len(),
        r.rejections.len()
    );
    for k in 1..=dim {
        s.push_str(&format!(",xi{k}_re,xi{k}_im"));
    }
    s.push('\n');
    for c in &r.certificates {
        s.push_str(&format!("{},{},{},{},{}", c.sample_index, c.rank, c.span_dim, c.affine_span_dim, c.refined));
        for z in &c.xi {
            s.push_str(&format!(",{:.16e},{:.16e}", z[0], z[1]));
        }
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct DiagonalWitness {
    state: &'static str,
    diagonal: Vec<f64>,
}

#[derive(Serialize)]
struct CapacityReport {
    units: &'static str,
    value: f64,
    argmax: Vec<f64>,
    gap: f64,
    iterations: usize,
    witness: DiagonalWitness,
}

fn capacity(a: &CapacityArgs, seed: u64, inputs: &mut Inputs) -> CliResult<String> {
    let (g, _) = inputs.group(&a.input.group)?;
    let phi = phi_from(&g, &a.input.phi, inputs)?;
    let config = CapacityConfig { seed, random_restarts: a.restarts, max_iter: a.max_iter, gap_tol: a.gap_tol };
    let r = schur_capacity_with(&phi, &g, &config)?;
    // Coherent information is attained at the diagonal state with weights μ(s⁻¹).
    let diagonal = g.elements().map(|s| r.argmax[g.inv(s)]).collect();
    json(&CapacityReport {
        units: "bits",
        value: r.value,
        gap: r.gap,
        iterations: r.iterations,
        witness: DiagonalWitness { state: "diagonal", diagonal },
        argmax: r.argmax,
    })
}

#[derive(Serialize)]
struct PureWitness {
    state: &'static str,
    vector: Vec<ComplexPair>,
}

#[derive(Serialize)]
struct MoeReport {
    units: &'static str,
    value: f64,
    witness: PureWitness,
    #[serde(skip_serializing_if = "Option::is_none")]
    restricted_formula: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gap: Option<f64>,
}

enum Source {
    Theta(FiniteGroup, ProbabilityMeasure),
    ThetaHat(FiniteGroup, PositiveDefiniteFunction),
    Channel(QuantumChannel),
}

fn source(a: &SourceArgs, inputs: &mut Inputs, allow_channel: bool) -> CliResult<Source> {
    if let Some(p) = &a.channel {
        if !allow_channel {
            return Err(CliError::validation("--channel is not accepted here; give --measure or φ"));
        }
        return Ok(Source::Channel(inputs.channel(p)?));
    }
    let spec = a.group.as_deref().ok_or_else(|| CliError::validation("--group is required"))?;
    let (g, _) = inputs.group(spec)?;
    if let Some(m) = &a.measure {
        let mu = inputs.measure(&g, m)?;
        return Ok(Source::Theta(g, mu));
    }
    if a.phi.is_given() {
        let phi = phi_from(&g, &a.phi, inputs)?;
        return Ok(Source::ThetaHat(g, phi));
    }
    Err(CliError::validation("give --measure, a φ (--phi or --irrep/--rep with --xi), or --channel"))
}

fn moe(a: &MoeArgs, seed: u64, inputs: &mut Inputs) -> CliResult<String> {
    let (ch, formula) = match source(&a.source, inputs, true)? {
        Source::Theta(g, mu) => (theta(&mu, &g)?, Some(moe_theta_restricted(&mu))),
        Source::ThetaHat(g, phi) => (theta_hat(&phi, &g)?, Some(moe_theta_hat_restricted(&phi, &g))),
        Source::Channel(ch) => (ch, None),
    };
    let cfg = MoeConfig { restarts: a.restarts, seed, max_iter: a.max_iter, extra_starts: Vec::new() };
    let r = min_output_entropy(&ch, &cfg);
    json(&MoeReport {
        units: "bits",
        value: r.upper_bound,
        witness: PureWitness { state: "pure", vector: vector_to_json(&r.witness_vector()) },
        gap: formula.map(|f| r.upper_bound - f),
        restricted_formula: formula,
    })
}

fn eb(a: &SourceArgs, inputs: &mut Inputs) -> CliResult<String> {
    match source(a, inputs, false)? {
        Source::Theta(g, mu) => json(&eb_test(EbInput::Theta(&mu), &g)?),
        Source::ThetaHat(g, phi) => json(&eb_test(EbInput::ThetaHat(&phi), &g)?),
        Source::Channel(_) => unreachable!("rejected by source()"),
    }
}

#[derive(Serialize)]
struct FixReport {
    dim: usize,
    algebra: AlgebraReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_by_prediction: Option<FixComparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    harmonic_functions: Option<Vec<Vec<f64>>>,
}

fn fixpoints(a: &SourceArgs, inputs: &mut Inputs) -> CliResult<String> {
    let (ch, cmp, harmonic) = match source(a, inputs, true)? {
        Source::Theta(g, mu) => (theta(&mu, &g)?, Some(verify_fix_theta(&mu, &g)?), Some(harmonic_functions(&mu, &g)?)),
        Source::ThetaHat(g, phi) => (theta_hat(&phi, &g)?, Some(verify_fix_theta_hat(&phi, &g)?), None),
        Source::Channel(ch) => (ch, None, None),
    };
    let fix = fixed_point_space(&ch)?;
    json(&FixReport {
        dim: fix.dim(),
        algebra: is_algebra(&fix),
        generated_by_prediction: cmp,
        harmonic_functions: harmonic,
    })
}

fn noiseless(a: &SourceArgs, seed: u64, inputs: &mut Inputs) -> CliResult<String> {
    let report = match source(a, inputs, true)? {
        Source::Theta(g, mu) => noiseless_subsystems_theta(&mu, &g, seed)?,
        Source::ThetaHat(g, phi) => noiseless_subsystems(&theta_hat(&phi, &g)?, seed)?,
        Source::Channel(ch) => noiseless_subsystems(&ch, seed)?,
    };
    json(&report)
}

#[derive(Serialize)]
struct DualityReport {
    residual: f64,
    tol: f64,
    holds: bool,
}

fn duality(a: &MeasureInput, tol: f64, inputs: &mut Inputs) -> CliResult<String> {
    let (g, _) = inputs.group(&a.group)?;
    let mu = inputs.measure(&g, &a.measure)?;
    let residual = duality_check(&mu, &g)?;
    json(&DualityReport { residual, tol, holds: residual <= tol })
}
