mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use rand::Rng;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use reliable_spanner::euclidean::{build_bounded_spread_spanner, build_hd_spanner, HdConfig, Variant};
use reliable_spanner::expander::{
    build_bipartite_verified, build_reliable_connectivity, build_strong_expander, build_strong_verified,
    connectivity_after_failures, Verification,
};
use reliable_spanner::harness::{
    certify, generate_attack, loss_curve, loss_curve_csv, AttackKind, AttackSpec, CertifyOptions, Construction,
    DEFAULT_PAIR_BUDGET,
};
use reliable_spanner::io::{format_edges, format_vertex_set, parse_edges, parse_points, parse_vertex_set};
use reliable_spanner::lso::{build_ordering_family_with, check_lso_property, DEFAULT_EXTRA_BITS};
use reliable_spanner::rng::StreamKey;
use reliable_spanner::shadow::{
    check_shadow_bounds, cone_mark_unsafe, shadow_1d_sided, shadow_balls_oracle, shadow_quadtree, ShadowSide,
};
use reliable_spanner::spanner1d::{build_g_theta, build_h, GThetaParams, Mode, H_XI};
use reliable_spanner::quadtree::Quadtree;
use reliable_spanner::{Graph, Points, Threshold, VertexSet};

use manifest::{beside, RunManifest};

#[derive(Parser)]
#[command(name = "spanner", version, about = "Vertex-failure reliable spanners: build, attack, certify")]
struct Cli {
    /// Worker cap (recorded in manifests).
    #[arg(long, global = true, env = "SPANNER_THREADS", default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a spanner and write its edge list.
    #[command(subcommand)]
    Build(BuildCmd),
    /// Build an expander and write its edge list.
    #[command(subcommand)]
    Expander(ExpanderCmd),
    /// Compute a shadow of a failure set.
    #[command(subcommand)]
    Shadow(ShadowCmd),
    /// Generate a failure set.
    Attack(AttackArgs),
    /// Certify a built graph against a failure set.
    Certify(CertifyArgs),
    /// Aggregate certification over many attacks into a CSV.
    LossCurve(LossCurveArgs),
    /// Locality-sensitive ordering families.
    #[command(subcommand)]
    Lso(LsoCmd),
}

#[derive(Args, Serialize)]
struct OutArg {
    /// Output file (stdout when omitted); a manifest is written beside it.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BuildCmd {
    /// Block-tree spanner on the line.
    #[command(name = "1d-const")]
    OneDConst(OneDConstArgs),
    /// Shifted-interval spanner on the line.
    #[command(name = "1d-theta")]
    OneDTheta(OneDThetaArgs),
    /// Spanner from locality-sensitive orderings.
    Hd(HdArgs),
    /// Quadtree and WSPD spanner for bounded spread.
    BoundedSpread(BoundedSpreadArgs),
}

#[derive(Args, Serialize)]
struct OneDConstArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = H_XI)]
    xi: f64,
    /// Override the expander sampling constant.
    #[arg(long)]
    constant: Option<u64>,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Faithful,
    Experimental,
}

#[derive(Args, Serialize)]
struct OneDThetaArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    theta: f64,
    #[arg(long, default_value_t = 512.0)]
    c: f64,
    #[arg(long, value_enum, default_value = "faithful")]
    mode: ModeArg,
    #[arg(long)]
    expander_constant: Option<u64>,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum VariantArg {
    Simple,
    Improved,
}

#[derive(Args, Serialize)]
struct HdArgs {
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    theta: f64,
    #[arg(long, value_enum, default_value = "improved")]
    variant: VariantArg,
    #[arg(long)]
    c2: Option<f64>,
    #[arg(long)]
    extra_bits: Option<u32>,
    #[arg(long, default_value_t = 512.0)]
    c: f64,
    #[arg(long, value_enum, default_value = "faithful")]
    mode: ModeArg,
    #[arg(long)]
    expander_constant: Option<u64>,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Serialize)]
struct BoundedSpreadArgs {
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    theta: f64,
    #[arg(long)]
    constant: Option<u64>,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Subcommand)]
enum ExpanderCmd {
    Bipartite(BipartiteArgs),
    Strong(StrongArgs),
    /// Reliable-connectivity graph.
    Reliable(ReliableArgs),
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    /// `none`, `exhaustive` or `sampled:K`.
    #[arg(long, default_value = "none")]
    verify: String,
    /// Resampling attempts when verification fails.
    #[arg(long, default_value_t = 20)]
    attempts: u32,
}

#[derive(Args, Serialize)]
struct BipartiteArgs {
    #[arg(long)]
    left: usize,
    #[arg(long)]
    right: usize,
    #[arg(long)]
    xi: f64,
    #[arg(long)]
    constant: Option<u64>,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    verify: VerifyArgs,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Serialize)]
struct StrongArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    alpha: u64,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    constant: Option<u64>,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    verify: VerifyArgs,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Serialize)]
struct ReliableArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    theta: f64,
    #[arg(long)]
    constant: Option<u64>,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    verify: VerifyArgs,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Subcommand)]
enum ShadowCmd {
    #[command(name = "1d")]
    OneD(ShadowOneDArgs),
    Quadtree(ShadowPointsArgs),
    Balls(ShadowPointsArgs),
    Cones(ShadowPointsArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SideArg {
    Left,
    Right,
    Both,
}

#[derive(Args, Serialize)]
struct ShadowOneDArgs {
    #[arg(long)]
    n: usize,
    /// Threshold as `p/q` or a decimal.
    #[arg(long)]
    alpha: String,
    #[arg(long)]
    bad: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    side: SideArg,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Serialize)]
struct ShadowPointsArgs {
    #[arg(long)]
    points: PathBuf,
    /// Threshold (γ for the quadtree) as `p/q` or a decimal.
    #[arg(long, alias = "gamma")]
    alpha: String,
    #[arg(long)]
    bad: PathBuf,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Serialize)]
struct GraphInputs {
    /// Edge list (checked against the manifest's vertex count).
    #[arg(long)]
    graph: PathBuf,
    /// Manifest written by `build` or `expander`.
    #[arg(long)]
    meta: PathBuf,
    /// Point set; defaults to the one recorded in the manifest.
    #[arg(long)]
    points: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct AttackArgs {
    #[command(flatten)]
    inputs: GraphInputs,
    #[arg(long)]
    kind: String,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Serialize)]
struct CertifyArgs {
    #[command(flatten)]
    inputs: GraphInputs,
    #[arg(long)]
    bad: PathBuf,
    /// Pair budget when pairs are sampled.
    #[arg(long, default_value_t = DEFAULT_PAIR_BUDGET)]
    pairs: u64,
    #[arg(long, default_value_t = 0)]
    pair_seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Serialize)]
struct LossCurveArgs {
    #[command(flatten)]
    inputs: GraphInputs,
    #[arg(long)]
    kind: String,
    /// Comma-separated attack sizes.
    #[arg(long, value_delimiter = ',')]
    ks: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Subcommand)]
enum LsoCmd {
    /// Family summary, one ordering, or a point set sorted by it.
    Inspect(LsoInspectArgs),
    /// Witness rate over random pairs.
    Check(LsoCheckArgs),
}

#[derive(Args, Serialize)]
struct LsoInspectArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    sigma: f64,
    #[arg(long, default_value_t = DEFAULT_EXTRA_BITS)]
    extra_bits: u32,
    #[arg(long)]
    id: Option<usize>,
    /// Sort these points (normalized) by ordering `--id`.
    #[arg(long, requires = "id")]
    points: Option<PathBuf>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Serialize)]
struct LsoCheckArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    sigma: f64,
    #[arg(long, default_value_t = DEFAULT_EXTRA_BITS)]
    extra_bits: u32,
    #[arg(long, default_value_t = 10_000)]
    pairs: usize,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

fn parse_threshold(s: &str) -> Result<Threshold> {
    Ok(match s.split_once('/') {
        Some((p, q)) => Threshold::new(p.trim().parse()?, q.trim().parse()?)?,
        None => Threshold::from_f64(s.trim().parse()?)?,
    })
}

fn parse_verify(s: &str) -> Result<Verification> {
    Ok(match s {
        "none" => Verification::None,
        "exhaustive" => Verification::Exhaustive,
        _ => match s.strip_prefix("sampled:") {
            Some(k) => Verification::Sampled(k.parse().context("sampled:K needs an integer K")?),
            None => bail!("--verify must be none, exhaustive or sampled:K"),
        },
    })
}

fn mode(m: ModeArg) -> Mode {
    match m {
        ModeArg::Faithful => Mode::Faithful,
        ModeArg::Experimental => Mode::Experimental,
    }
}

/// Writes `content` to the output (or stdout) and the manifest beside it.
fn emit(out: &OutArg, content: &str, manifest: &RunManifest) -> Result<()> {
    match &out.output {
        Some(path) => {
            fs::write(path, content).with_context(|| format!("writing {}", path.display()))?;
            fs::write(beside(path), serde_json::to_string_pretty(manifest)? + "\n")?;
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn read_points(manifest: &mut RunManifest, path: &Path) -> Result<Points> {
    let text = manifest.input("points", path)?;
    Ok(parse_points(&text)?)
}

fn run_build(cmd: BuildCmd, threads: usize) -> Result<()> {
    match cmd {
        BuildCmd::OneDConst(a) => {
            let h = build_h::<f64>(a.n, a.xi, a.seed, a.constant)?;
            let mut m = RunManifest::new(&a, threads)?.seed("seed", a.seed);
            m.construction = Some(Construction::of_h(&h));
            m.details = json!({
                "edges": h.graph.edge_count(),
                "n_padded": h.n_padded,
                "constant": h.constant,
                "budget": h.budget,
                "mode": if h.experimental { "experimental" } else { "faithful" },
            });
            emit(&a.out, &format_edges(&h.graph), &m)
        }
        BuildCmd::OneDTheta(a) => {
            let params = GThetaParams {
                theta: a.theta,
                c: a.c,
                mode: mode(a.mode),
                expander_constant: a.expander_constant,
            };
            let g = build_g_theta::<f64>(a.n, params, a.seed)?;
            let mut m = RunManifest::new(&a, threads)?.seed("seed", a.seed);
            m.construction = Some(Construction::of_g_theta(&g));
            m.details = json!({
                "edges": g.graph.edge_count(),
                "mode": params.mode,
                "layout": g.layout,
                "expander_constant": g.expander_constant,
                "budget": g.budget,
                "expanders": g.expanders,
                "regime": if g.layout.degenerate() { "degenerate" } else { "general" },
            });
            emit(&a.out, &format_edges(&g.graph), &m)
        }
        BuildCmd::Hd(a) => {
            let mut m = RunManifest::new(&a, threads)?.seed("seed", a.seed);
            let points = read_points(&mut m, &a.points)?;
            let variant = match a.variant {
                VariantArg::Simple => Variant::Simple,
                VariantArg::Improved => Variant::Improved,
            };
            let mut cfg = HdConfig::new(a.eps, a.theta, variant);
            if let Some(c2) = a.c2 {
                cfg.c2 = c2;
            }
            if let Some(e) = a.extra_bits {
                cfg.extra_bits = e;
            }
            cfg.c = a.c;
            cfg.mode = mode(a.mode);
            cfg.expander_constant = a.expander_constant;
            let s = build_hd_spanner(&points, cfg, a.seed)?;
            m.construction = Some(Construction::of_hd(&s, points.dim()));
            m.details = json!({
                "edges": s.graph.edge_count(),
                "config": s.config,
                "parameters": s.params,
                "regime": s.regime,
                "sub_big_n": s.sub_big_n,
            });
            emit(&a.out, &format_edges(&s.graph), &m)
        }
        BuildCmd::BoundedSpread(a) => {
            let mut m = RunManifest::new(&a, threads)?.seed("seed", a.seed);
            let points = read_points(&mut m, &a.points)?;
            let s = build_bounded_spread_spanner(&points, a.eps, a.theta, a.seed, a.constant)?;
            m.construction = Some(Construction::of_bounded_spread(&s, points.dim(), a.eps, a.theta));
            m.details = json!({
                "edges": s.graph.edge_count(),
                "spread": points.spread(),
                "quadtree_nodes": s.tree.len(),
                "wspd_pairs": s.pairs.len(),
                "separation": s.separation,
                "xi": s.xi,
                "constant": s.constant,
                "sibling_expanders": s.sibling_expanders,
                "mode": if s.experimental { "experimental" } else { "faithful" },
            });
            emit(&a.out, &format_edges(&s.graph), &m)
        }
    }
}

/// Exhaustive or sampled check of the reliable-connectivity property.
fn verify_reliable(g: &Graph, theta: f64, verification: Verification, seed: u64) -> Result<serde_json::Value> {
    let n = g.n();
    let failures: Box<dyn Iterator<Item = VertexSet>> = match verification {
        Verification::None => return Ok(json!({ "kind": "none" })),
        Verification::Exhaustive => {
            if n > 20 {
                bail!("exhaustive reliable-connectivity check is limited to n <= 20");
            }
            Box::new((0u32..1 << n).map(move |mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect()))
        }
        Verification::Sampled(k) => {
            let mut rng = StreamKey::root(seed).child(reliable_spanner::rng::tags::PAIRS).rng();
            Box::new((0..k).map(move |_| {
                let size = rng.gen_range(0..=n / 2);
                rand::seq::index::sample(&mut rng, n, size).into_iter().collect()
            }))
        }
    };
    let mut checked = 0u64;
    for bad in failures {
        checked += 1;
        let (largest, target) = connectivity_after_failures(g, &bad, theta);
        if (largest as f64) < target - 1e-9 {
            return Ok(json!({ "pass": false, "checked": checked, "violation": bad }));
        }
    }
    Ok(json!({ "pass": true, "checked": checked }))
}

fn run_expander(cmd: ExpanderCmd, threads: usize) -> Result<bool> {
    match cmd {
        ExpanderCmd::Bipartite(a) => {
            let verification = parse_verify(&a.verify.verify)?;
            let (ex, check) = build_bipartite_verified::<f64>(
                a.left,
                a.right,
                a.xi,
                a.seed,
                a.constant,
                verification,
                a.verify.attempts,
            )?;
            let mut m = RunManifest::new(&a, threads)?.seed("seed", a.seed);
            m.details = json!({
                "edges": ex.graph.edge_count(),
                "constant": ex.constant,
                "samples": [ex.samples_left, ex.samples_right],
                "budget": ex.budget(),
                "attempts": ex.attempts,
                "verification": verification,
                "result": check,
            });
            emit(&a.out, &format_edges(&ex.graph), &m)?;
            Ok(check.pass)
        }
        ExpanderCmd::Strong(a) => {
            let verification = parse_verify(&a.verify.verify)?;
            let (ex, check) = match verification {
                Verification::None => (build_strong_expander::<f64>(a.n, a.alpha, a.beta, a.seed, a.constant)?, None),
                Verification::Exhaustive => {
                    let (ex, c) = build_strong_verified::<f64>(a.n, a.alpha, a.beta, a.seed, a.constant, a.verify.attempts)?;
                    (ex, Some(c))
                }
                Verification::Sampled(_) => bail!("strong expanders support only exhaustive verification"),
            };
            let pass = check.as_ref().is_none_or(|c| c.pass);
            let mut m = RunManifest::new(&a, threads)?.seed("seed", a.seed);
            m.details = json!({
                "edges": ex.graph.edge_count(),
                "constant": ex.constant,
                "budget": ex.budget(),
                "attempts": ex.attempts,
                "verification": verification,
                "result": check,
            });
            emit(&a.out, &format_edges(&ex.graph), &m)?;
            Ok(pass)
        }
        ExpanderCmd::Reliable(a) => {
            let verification = parse_verify(&a.verify.verify)?;
            let ex = build_reliable_connectivity::<f64>(a.n, a.theta, a.seed, a.constant)?;
            let result = verify_reliable(&ex.graph, a.theta, verification, a.seed)?;
            let pass = result.get("pass").and_then(|p| p.as_bool()).unwrap_or(true);
            let mut m = RunManifest::new(&a, threads)?.seed("seed", a.seed);
            m.construction = Some(Construction::of_reliable(&ex, a.theta));
            m.details = json!({
                "edges": ex.graph.edge_count(),
                "alpha": ex.alpha,
                "beta": ex.beta,
                "constant": ex.constant,
                "budget": ex.budget(),
                "verification": verification,
                "result": result,
            });
            emit(&a.out, &format_edges(&ex.graph), &m)?;
            Ok(pass)
        }
    }
}

fn run_shadow(cmd: ShadowCmd, threads: usize) -> Result<()> {
    match cmd {
        ShadowCmd::OneD(a) => {
            let mut m = RunManifest::new(&a, threads)?;
            let bad = parse_vertex_set(&m.input("bad", &a.bad)?)?;
            let alpha = parse_threshold(&a.alpha)?;
            let side = match a.side {
                SideArg::Left => ShadowSide::Left,
                SideArg::Right => ShadowSide::Right,
                SideArg::Both => ShadowSide::Both,
            };
            let s = shadow_1d_sided(a.n, &bad, alpha, side)?;
            let bounds = check_shadow_bounds(&s, &bad, alpha);
            let out = json!({ "members": s.members, "witnesses": s.witnesses, "bound_checks": bounds });
            emit(&a.out, &(serde_json::to_string_pretty(&out)? + "\n"), &m)
        }
        ShadowCmd::Quadtree(a) => {
            let mut m = RunManifest::new(&a, threads)?;
            let points = read_points(&mut m, &a.points)?;
            let bad = parse_vertex_set(&m.input("bad", &a.bad)?)?.within(points.len())?;
            let gamma = parse_threshold(&a.alpha)?;
            let tree = Quadtree::build(&points)?;
            let s = shadow_quadtree(&tree, &bad, gamma);
            let bound = bad.len() as f64 * gamma.den() as f64 / gamma.num() as f64;
            let out = json!({
                "members": s.members,
                "witnesses": s.witnesses,
                "bound_checks": { "size": s.len(), "failed": bad.len(), "bound": bound, "holds": s.len() as f64 <= bound },
            });
            emit(&a.out, &(serde_json::to_string_pretty(&out)? + "\n"), &m)
        }
        ShadowCmd::Balls(a) => {
            let mut m = RunManifest::new(&a, threads)?;
            let points = read_points(&mut m, &a.points)?;
            let bad = parse_vertex_set(&m.input("bad", &a.bad)?)?;
            let alpha = parse_threshold(&a.alpha)?;
            let s = shadow_balls_oracle(&points, &bad, alpha)?;
            let out = json!({
                "members": s.members,
                "witnesses": s.witnesses,
                "bound_checks": { "size": s.len(), "failed": bad.len() },
            });
            emit(&a.out, &(serde_json::to_string_pretty(&out)? + "\n"), &m)
        }
        ShadowCmd::Cones(a) => {
            let mut m = RunManifest::new(&a, threads)?;
            let points = read_points(&mut m, &a.points)?;
            let bad = parse_vertex_set(&m.input("bad", &a.bad)?)?;
            let alpha = parse_threshold(&a.alpha)?;
            let f = cone_mark_unsafe(&points, &bad, alpha)?;
            let cones = reliable_spanner::shadow::cone_count(points.dim())?;
            let bound = bad.len() as f64 * (1.0 + cones as f64 * alpha.ceil_inverse() as f64);
            let out = json!({
                "members": f,
                "witnesses": [],
                "bound_checks": { "size": f.len(), "failed": bad.len(), "bound": bound, "holds": f.len() as f64 <= bound },
            });
            emit(&a.out, &(serde_json::to_string_pretty(&out)? + "\n"), &m)
        }
    }
}

struct Loaded {
    manifest: RunManifest,
    graph: Graph,
    points: Option<Points>,
}

/// Reads graph, manifest and (for Euclidean constructions) the points.
fn load(inputs: &GraphInputs, record: &mut RunManifest) -> Result<Loaded> {
    let manifest = RunManifest::load(&inputs.meta)?;
    record.input("meta", &inputs.meta)?;
    let meta = manifest.construction()?.clone();
    let graph: Graph = parse_edges(&record.input("graph", &inputs.graph)?)?;
    if graph.n() != meta.n() {
        bail!("graph has {} vertices, manifest says {}", graph.n(), meta.n());
    }
    let points = if meta.is_euclidean() {
        let path = match &inputs.points {
            Some(p) => p.clone(),
            None => manifest.inputs.get("points").map(|f| f.path.clone()).context("--points is required")?,
        };
        let p = read_points(record, &path)?;
        if let (Some(f), Some(rec)) = (manifest.inputs.get("points"), record.inputs.get("points")) {
            if f.sha256 != rec.sha256 {
                log::warn!("points file differs from the one used at build time");
            }
        }
        Some(p)
    } else {
        None
    };
    Ok(Loaded { manifest, graph, points })
}

fn run_attack(a: AttackArgs, threads: usize) -> Result<()> {
    let mut m = RunManifest::new(&a, threads)?.seed("seed", a.seed);
    let l = load(&a.inputs, &mut m)?;
    let kind: AttackKind = a.kind.parse()?;
    let spec = AttackSpec { kind, k: a.k, seed: a.seed };
    let bad = generate_attack(&spec, l.manifest.construction()?, l.points.as_ref())?;
    m.details = json!({ "attack": spec, "size": bad.len() });
    emit(&a.out, &format_vertex_set(&bad), &m)
}

fn run_certify(a: CertifyArgs, threads: usize) -> Result<bool> {
    let mut m = RunManifest::new(&a, threads)?.seed("pair_seed", a.pair_seed);
    let l = load(&a.inputs, &mut m)?;
    let bad = parse_vertex_set(&m.input("bad", &a.bad)?)?;
    let options = CertifyOptions { pair_budget: a.pairs, seed: a.pair_seed };
    let mut report = certify(&l.graph, l.manifest.construction()?, &bad, l.points.as_ref(), options)?;
    let attack = m.inputs.get("bad").map(|f| f.path.clone());
    if let (Some(path), Some(spec)) = (attack, sibling_attack(&a.bad)) {
        log::info!("attack spec from {}", path.display());
        report.attack = Some(spec);
    }
    m.details = json!({ "pass": report.pass, "harmed": report.harmed_size, "bound": report.bound });
    emit(&a.out, &(serde_json::to_string_pretty(&report)? + "\n"), &m)?;
    if !report.pass {
        eprintln!(
            "certification failed: |B+| = {} (bound {}), {} failing pairs outside B+",
            report.harmed_size, report.bound, report.failing_outside
        );
    }
    Ok(report.pass)
}

/// Attack spec from the manifest written beside a failure-set file.
fn sibling_attack(bad: &Path) -> Option<AttackSpec> {
    let m = RunManifest::load(&beside(bad)).ok()?;
    serde_json::from_value(m.details.get("attack")?.clone()).ok()
}

fn run_loss_curve(a: LossCurveArgs, threads: usize) -> Result<()> {
    let mut m = RunManifest::new(&a, threads)?.seed("seed", a.seed);
    let l = load(&a.inputs, &mut m)?;
    let kind: AttackKind = a.kind.parse()?;
    let rows = loss_curve(&l.graph, l.manifest.construction()?, l.points.as_ref(), kind, &a.ks, a.trials, a.seed)?;
    emit(&a.out, &loss_curve_csv(&rows), &m)
}

fn run_lso(cmd: LsoCmd, threads: usize) -> Result<()> {
    match cmd {
        LsoCmd::Inspect(a) => {
            let mut m = RunManifest::new(&a, threads)?;
            let family = build_ordering_family_with(a.d, a.sigma, a.extra_bits)?;
            let mut out = json!({ "family": family });
            if let Some(id) = a.id {
                if id >= family.len() {
                    bail!("ordering id {id} out of range (family has {})", family.len());
                }
                let ord = family.get(id);
                if let Some(path) = &a.points {
                    let points = read_points(&mut m, path)?.normalized().points;
                    out["order"] = json!(ord.sort(&points));
                }
                out["ordering"] = json!(ord);
            }
            emit(&a.out, &(serde_json::to_string_pretty(&out)? + "\n"), &m)
        }
        LsoCmd::Check(a) => {
            let m = RunManifest::new(&a, threads)?.seed("seed", a.seed);
            let family = build_ordering_family_with(a.d, a.sigma, a.extra_bits)?;
            let mut rng = StreamKey::root(a.seed).child(reliable_spanner::rng::tags::PAIRS).rng();
            let mut hits = 0;
            let mut missing = Vec::new();
            for i in 0..a.pairs {
                let p: Vec<f64> = (0..a.d).map(|_| rng.gen::<f64>()).collect();
                let q: Vec<f64> = (0..a.d).map(|_| rng.gen::<f64>()).collect();
                match check_lso_property(&family, &p, &q, a.samples, None, a.seed ^ i as u64) {
                    Some(_) => hits += 1,
                    None if missing.len() < 10 => missing.push((p, q)),
                    None => {}
                }
            }
            let out = json!({
                "m": family.len(),
                "pairs": a.pairs,
                "witnessed": hits,
                "rate": hits as f64 / a.pairs.max(1) as f64,
                "unwitnessed_examples": missing,
            });
            emit(&a.out, &(serde_json::to_string_pretty(&out)? + "\n"), &m)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let threads = cli.threads.max(1);
    match cli.command {
        Command::Build(c) => run_build(c, threads).map(|_| true),
        Command::Expander(c) => run_expander(c, threads),
        Command::Shadow(c) => run_shadow(c, threads).map(|_| true),
        Command::Attack(a) => run_attack(a, threads).map(|_| true),
        Command::Certify(a) => run_certify(a, threads),
        Command::LossCurve(a) => run_loss_curve(a, threads).map(|_| true),
        Command::Lso(c) => run_lso(c, threads).map(|_| true),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
