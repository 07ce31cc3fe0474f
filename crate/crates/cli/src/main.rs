use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use fbp::algebra::{builtin, tuples, FiniteAlgebra};
use fbp::cantor::{example_2_3_report, orbit_witness, piecewise_glue, EPHomeo, PointContext, TailClopen, Word};
use fbp::factor::{bergman_growth, cell_action, good_partition, pigeonhole_factor, verify_factors, GoodPartition};
use fbp::fraisse::{back_and_forth, extend_weak_homogeneity, limit_chain, PowerClass, PowerEmbedding};
use fbp::free::{loop_ring_split, pattern_context, theta_class_is_power_truncation, verify_fk_decomposition, FreeData};
use fbp::json::{self as fj, AlgebraJson, ContextJson, ElementJson, EmbeddingJson, HomeoJson, TailClopenJson};
use fbp::power::{PowerContext, PowerElement};
use fbp::{random, Error, Result};

#[derive(Parser, Debug)]
#[command(name = "fbp", version, about = "Filtered Boolean powers over Cantor space")]
struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every sampled construction.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Size budget for enumerations and closures.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    budget: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct AlgArgs {
    /// Algebra as a JSON file with `carrier` and `ops`.
    #[arg(long, conflicts_with = "builtin")]
    alg: Option<PathBuf>,
    /// Name of a built-in algebra.
    #[arg(long, default_value = "gf2-idempotent-reduct")]
    builtin: String,
}

#[derive(Args, Debug, Clone)]
struct CtxArgs {
    /// Comma-separated filter idempotents at the points `1^i 0^ω`; defaults to all idempotents.
    #[arg(long)]
    filters: Option<String>,
    /// Context as a JSON file with `points` and `filters`.
    #[arg(long, conflicts_with = "filters")]
    context: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simplicity, abelianness, idempotents, automorphisms and a Mal'cev term.
    InspectAlgebra {
        #[command(flatten)]
        alg: AlgArgs,
    },
    /// Builds a power context and enumerates its elements of a given depth.
    BuildPower {
        #[command(flatten)]
        alg: AlgArgs,
        #[command(flatten)]
        ctx: CtxArgs,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        /// Include the elements in the report.
        #[arg(long)]
        list: bool,
    },
    /// Amalgamates two embeddings out of a common power.
    Amalgamate {
        #[command(flatten)]
        alg: AlgArgs,
        /// First embedding as JSON; defaults to the identity on `A^1`.
        #[arg(long)]
        phi: Option<PathBuf>,
        /// Second embedding as JSON; defaults to the identity on `A^1`.
        #[arg(long)]
        psi: Option<PathBuf>,
    },
    /// Extends sampled embeddings into a power along `A^u → A^v`.
    ExtendHomogeneity {
        #[command(flatten)]
        alg: AlgArgs,
        #[command(flatten)]
        ctx: CtxArgs,
        /// Embedding as JSON; defaults to every embedding `A^1 → A^2`.
        #[arg(long)]
        phi: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Builds the limit chain and a back-and-forth against a moved copy.
    FraisseChain {
        #[command(flatten)]
        alg: AlgArgs,
        #[command(flatten)]
        ctx: CtxArgs,
        /// Number of chain stages.
        #[arg(long, default_value_t = 10)]
        depth: usize,
        #[arg(long, default_value_t = 4)]
        steps: usize,
    },
    /// The free algebra of finite rank and its decomposition.
    FreeAlgebra {
        #[command(flatten)]
        alg: AlgArgs,
        #[arg(long, default_value_t = 2)]
        rank: usize,
    },
    /// Merges points whose filters share an automorphism orbit.
    ReduceIdempotents {
        #[command(flatten)]
        alg: AlgArgs,
        #[command(flatten)]
        ctx: CtxArgs,
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// The point-swapping homeomorphism of the punctured two-point space.
    #[command(name = "demo-example-2-3")]
    DemoExample23 {
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Factors a point-fixing homeomorphism through a good partition.
    FactorHomeo {
        /// Homeomorphism as JSON; defaults to a seeded random one.
        #[arg(long)]
        sigma: Option<PathBuf>,
        /// JSON list of `n + 2` tail clopens; defaults to the standard partition.
        #[arg(long)]
        partition: Option<PathBuf>,
        /// Number of distinguished points.
        #[arg(long, default_value_t = 1)]
        points: usize,
    },
    /// Word-ball growth of homeomorphisms acting on the cylinders of a depth.
    BergmanGrowth {
        #[arg(long, default_value_t = 3)]
        depth: usize,
        /// JSON list of homeomorphisms; defaults to adjacent swaps of point-free cylinders.
        #[arg(long)]
        gens: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        points: usize,
        #[arg(long, default_value_t = 8)]
        steps: usize,
    },
}

struct Report {
    body: Value,
    verified: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(r) => {
            let mut body = r.body;
            body["verified"] = Value::Bool(r.verified);
            let text = serde_json::to_string_pretty(&body).expect("report serializes");
            if let Err(e) = emit(cli.out.as_deref(), &text) {
                eprintln!("{}", json!({ "error": e.to_string() }));
                return ExitCode::from(2);
            }
            if r.verified {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": e.to_string() }));
            ExitCode::from(2)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> std::io::Result<()> {
    match out {
        Some(p) => fs::write(p, format!("{text}\n")),
        None => writeln!(std::io::stdout().lock(), "{text}"),
    }
}

fn run(cli: &Cli) -> Result<Report> {
    let (seed, budget) = (cli.seed, cli.budget);
    match &cli.command {
        Command::InspectAlgebra { alg } => inspect_algebra(&load_alg(alg)?, budget),
        Command::BuildPower { alg, ctx, depth, list } => build_power(&load_ctx(&load_alg(alg)?, ctx)?, *depth, *list, budget),
        Command::Amalgamate { alg, phi, psi } => amalgamate(&load_alg(alg)?, phi.as_deref(), psi.as_deref()),
        Command::ExtendHomogeneity { alg, ctx, phi, samples } => {
            let a = load_alg(alg)?;
            extend_homogeneity(&a, &load_ctx(&a, ctx)?, phi.as_deref(), *samples, seed)
        }
        Command::FraisseChain { alg, ctx, depth, steps } => {
            let a = load_alg(alg)?;
            fraisse_chain(&a, &load_ctx(&a, ctx)?, *depth, *steps, seed)
        }
        Command::FreeAlgebra { alg, rank } => free_algebra(&load_alg(alg)?, *rank, budget),
        Command::ReduceIdempotents { alg, ctx, depth } => reduce(&load_ctx(&load_alg(alg)?, ctx)?, *depth, budget),
        Command::DemoExample23 { depth } => demo_example_2_3(*depth),
        Command::FactorHomeo { sigma, partition, points } => factor_homeo(*points, sigma.as_deref(), partition.as_deref(), seed),
        Command::BergmanGrowth { depth, gens, points, steps } => growth(*points, *depth, gens.as_deref(), *steps),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_alg(a: &AlgArgs) -> Result<Arc<FiniteAlgebra>> {
    let alg = match &a.alg {
        Some(p) => fj::from_str::<AlgebraJson>(&read(p)?)?.to_algebra()?,
        None => builtin::by_name(&a.builtin)?,
    };
    Ok(Arc::new(alg))
}

fn load_ctx(alg: &Arc<FiniteAlgebra>, c: &CtxArgs) -> Result<Arc<PowerContext>> {
    if let Some(p) = &c.context {
        return fj::from_str::<ContextJson>(&read(p)?)?.to_context(alg);
    }
    let filters = match &c.filters {
        Some(s) => s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad filter `{t}`"))))
            .collect::<Result<Vec<_>>>()?,
        None => alg.idempotents(),
    };
    PowerContext::standard(alg, &filters)
}

fn inspect_algebra(alg: &Arc<FiniteAlgebra>, budget: usize) -> Result<Report> {
    let simple = alg.is_simple();
    let abelian = alg.is_abelian()?;
    let idempotents = alg.idempotents();
    let auts = alg.automorphisms(budget)?;
    let subalgebras = alg.proper_subalgebras(budget)?;
    let malcev = alg.find_malcev_term(budget)?;
    let auts_ok = auts.iter().all(|m| alg.is_endomorphism(&m.map));
    let idems_ok = idempotents.iter().all(|&e| alg.subalgebra_generated(&[e]) == vec![e]);
    let malcev_ok = malcev.as_ref().is_none_or(|t| alg.is_malcev_term(t));
    Ok(Report {
        body: json!({
            "command": "inspect-algebra",
            "size": alg.size(),
            "ops": alg.ops().iter().map(|o| json!({ "name": o.name, "arity": o.arity })).collect::<Vec<_>>(),
            "simple": simple,
            "abelian": abelian,
            "idempotents": idempotents,
            "aut_order": auts.len(),
            "automorphisms": auts.iter().map(|m| m.map.clone()).collect::<Vec<_>>(),
            "proper_subalgebras": subalgebras,
            "malcev_term": malcev.as_ref().map(|t| t.display(alg).to_string()),
        }),
        verified: auts_ok && idems_ok && malcev_ok,
    })
}

fn build_power(ctx: &Arc<PowerContext>, depth: usize, list: bool, budget: usize) -> Result<Report> {
    let elems = ctx.elements_at_depth(depth, budget)?;
    let points = ctx.points();
    let filtered = elems.iter().all(|f| (0..ctx.n()).all(|i| f.value_at(&points.point(i)) == ctx.filters()[i]));
    let mut sorted: Vec<&PowerElement> = elems.iter().collect();
    sorted.sort_by_key(|f| f.cells());
    sorted.dedup();
    let round_trip = elems.iter().all(|f| ElementJson::from_element(f).to_element(ctx).as_ref() == Ok(f));
    let mut body = json!({
        "command": "build-power",
        "context": ContextJson::from_context(ctx),
        "depth": depth,
        "count": elems.len(),
        "distinct": sorted.len() == elems.len(),
        "filters_respected": filtered,
        "json_round_trip": round_trip,
    });
    if list {
        body["elements"] = json!(elems.iter().map(ElementJson::from_element).collect::<Vec<_>>());
    }
    Ok(Report { verified: filtered && round_trip && sorted.len() == elems.len(), body })
}

fn load_embedding(class: &PowerClass, path: Option<&Path>) -> Result<PowerEmbedding> {
    match path {
        Some(p) => fj::from_str::<EmbeddingJson>(&read(p)?)?.to_embedding(class),
        None => Ok(class.identity(1)),
    }
}

fn amalgamate(alg: &Arc<FiniteAlgebra>, phi: Option<&Path>, psi: Option<&Path>) -> Result<Report> {
    let class = PowerClass::new(alg.clone())?;
    let phi = load_embedding(&class, phi)?;
    let psi = load_embedding(&class, psi)?;
    let am = class.amalgamate(&phi, &psi)?;
    let ok = class.commutes_exhaustively(&am.phi_prime, &phi, &am.psi_prime, &psi);
    Ok(Report {
        body: json!({
            "command": "amalgamate",
            "phi": EmbeddingJson::from_embedding(&class, &phi),
            "psi": EmbeddingJson::from_embedding(&class, &psi),
            "m": am.m,
            "phi_prime": EmbeddingJson::from_embedding(&class, &am.phi_prime),
            "psi_prime": EmbeddingJson::from_embedding(&class, &am.psi_prime),
            "commutes": ok,
        }),
        verified: ok,
    })
}

fn extend_homogeneity(alg: &Arc<FiniteAlgebra>, ctx: &Arc<PowerContext>, phi: Option<&Path>, samples: usize, seed: u64) -> Result<Report> {
    let class = PowerClass::new(alg.clone())?;
    let phis = match phi {
        Some(p) => vec![load_embedding(&class, Some(p))?],
        None => class.all_embeddings(1, 2),
    };
    let mut rng = random::seeded(seed);
    let mut checked = 0usize;
    let mut failures = Vec::new();
    for phi in &phis {
        for _ in 0..samples {
            let psi = random::bp_embedding(ctx, phi.u(), &mut rng)?;
            let ext = extend_weak_homogeneity(&class, phi, &psi)?;
            for a in tuples(alg.size(), phi.u()) {
                checked += 1;
                if ext.apply(&class.apply(phi, &a))? != psi.apply(&a)? {
                    failures.push(json!({ "phi": EmbeddingJson::from_embedding(&class, phi), "tuple": a }));
                }
            }
        }
    }
    Ok(Report {
        verified: failures.is_empty(),
        body: json!({
            "command": "extend-homogeneity",
            "context": ContextJson::from_context(ctx),
            "embeddings": phis.len(),
            "samples_per_embedding": samples,
            "tuples_checked": checked,
            "failures": failures,
        }),
    })
}

fn fraisse_chain(alg: &Arc<FiniteAlgebra>, ctx: &Arc<PowerContext>, count: usize, steps: usize, seed: u64) -> Result<Report> {
    let class = PowerClass::new(alg.clone())?;
    let chain = limit_chain(&class, ctx, count)?;
    let mut rng = random::seeded(seed);
    let h = random::point_fixing_homeo(ctx.points(), &mut rng, 2)?;
    let moved = chain.pushed(&h)?;
    let commutes = chain.commutes(&class)? && moved.commutes(&class)?;
    let trace = back_and_forth(&class, &chain, &moved, steps)?;
    let stages: Vec<Value> = chain
        .stages
        .iter()
        .map(|s| json!({ "depth": s.depth, "rank": s.embedding.u(), "cells": s.cells.iter().map(Word::to_string).collect::<Vec<_>>() }))
        .collect();
    let trace_json: Vec<Value> = trace.iter().map(|t| json!({ "forth": t.forth, "stage": t.stage, "rank": t.left.u() })).collect();
    Ok(Report {
        verified: commutes && trace.len() == steps,
        body: json!({
            "command": "fraisse-chain",
            "context": ContextJson::from_context(ctx),
            "stages": stages,
            "links": chain.links.iter().map(|l| EmbeddingJson::from_embedding(&class, l)).collect::<Vec<_>>(),
            "commutes": commutes,
            "moved_by": HomeoJson::from_homeo(&h),
            "trace": trace_json,
        }),
    })
}

fn free_algebra(alg: &Arc<FiniteAlgebra>, rank: usize, budget: usize) -> Result<Report> {
    let data = FreeData::new(alg, rank, budget)?;
    let fk = verify_fk_decomposition(&data)?;
    let mut verified = fk.verified;
    let mut classes = Vec::new();
    let idems = alg.idempotents();
    let mut patterns: Vec<Vec<usize>> = Vec::new();
    for e in 0..data.free.len() {
        let pattern = data.free.restrict(e, &data.s);
        if data.s.is_empty() || patterns.contains(&pattern) || pattern.iter().any(|v| !idems.contains(v)) {
            continue;
        }
        patterns.push(pattern);
        let ctx = pattern_context(&data, e)?;
        let w = theta_class_is_power_truncation(&data, e, &ctx)?;
        verified &= w.verified();
        classes.push(json!({
            "idempotent": e,
            "filters": ctx.filters(),
            "class_size": w.class.len(),
            "exponent": w.exponent,
            "bijective": w.bijective,
            "homomorphism": w.homomorphism,
        }));
    }
    let split = match loop_ring_split(&data) {
        Ok((_, _, r)) => {
            verified &= r.verified;
            json!(r)
        }
        Err(Error::NotLoopOrRing) => Value::Null,
        Err(e) => return Err(e),
    };
    Ok(Report {
        verified,
        body: json!({
            "command": "free-algebra",
            "rank": rank,
            "size": data.free.len(),
            "transversal": data.r,
            "decomposition": fk,
            "theta_classes": classes,
            "split": split,
        }),
    })
}

fn reduce(ctx: &Arc<PowerContext>, depth: usize, budget: usize) -> Result<Report> {
    let red = fbp::power::reduce_idempotents(ctx)?;
    let elems = ctx.elements_at_depth(depth, budget)?;
    let alg = ctx.alg();
    let mut round_trip = true;
    let mut homomorphism = true;
    let images: Vec<PowerElement> = elems.iter().map(|f| red.apply(f)).collect::<Result<_>>()?;
    for (f, g) in elems.iter().zip(&images) {
        round_trip &= red.invert(g)? == *f;
    }
    for (op, o) in alg.ops().iter().enumerate() {
        for idx in tuples(elems.len(), o.arity).take(4096) {
            let args: Vec<&PowerElement> = idx.iter().map(|&i| &elems[i]).collect();
            let img: Vec<&PowerElement> = idx.iter().map(|&i| &images[i]).collect();
            homomorphism &= red.apply(&PowerElement::apply_op_in(ctx, op, &args)?)? == PowerElement::apply_op_in(red.target(), op, &img)?;
        }
    }
    Ok(Report {
        verified: round_trip && homomorphism,
        body: json!({
            "command": "reduce-idempotents",
            "source": ContextJson::from_context(red.source()),
            "target": ContextJson::from_context(red.target()),
            "target_of": red.target_of(),
            "homeo": HomeoJson::from_homeo(red.homeo()),
            "elements_checked": elems.len(),
            "round_trip": round_trip,
            "homomorphism": homomorphism,
        }),
    })
}

fn demo_example_2_3(depth: usize) -> Result<Report> {
    let r = example_2_3_report(depth)?;
    let witnesses: Vec<Value> = r
        .witnesses
        .iter()
        .map(|w| {
            json!({
                "neighborhood": w.neighborhood.to_string(),
                "near": w.near.iter().map(|(c, i)| json!({ "cell": c.to_string(), "image": i.to_string() })).collect::<Vec<_>>(),
            })
        })
        .collect();
    let clustered = !r.witnesses.is_empty() && r.witnesses.iter().all(|w| w.near.len() == 2);
    Ok(Report {
        verified: !r.extends_to_x && r.involution && clustered,
        body: json!({
            "command": "demo-example-2-3",
            "depth": depth,
            "extends_to_X": r.extends_to_x,
            "involution": r.involution,
            "cluster_evidence": witnesses,
        }),
    })
}

fn load_partition(ctx: &Arc<PointContext>, path: Option<&Path>) -> Result<GoodPartition> {
    match path {
        Some(p) => {
            let blocks = fj::from_str::<Vec<TailClopenJson>>(&read(p)?)?.iter().map(|b| b.to_clopen(ctx)).collect::<Result<Vec<_>>>()?;
            let part = GoodPartition { ctx: ctx.clone(), blocks };
            if !part.is_valid()? {
                return Err(Error::BadContext("partition is not n + 2 good clopens".into()));
            }
            Ok(part)
        }
        None => good_partition(ctx),
    }
}

fn factor_homeo(points: usize, sigma: Option<&Path>, partition: Option<&Path>, seed: u64) -> Result<Report> {
    let ctx = Arc::new(PointContext::standard(points));
    let sigma = match sigma {
        Some(p) => fj::from_str::<HomeoJson>(&read(p)?)?.to_homeo(&ctx)?,
        None => random::point_fixing_homeo(&ctx, &mut random::seeded(seed), 3)?,
    };
    let part = load_partition(&ctx, partition)?;
    let r = pigeonhole_factor(&sigma, &part)?;
    let n = ctx.n();
    let mut c = TailClopen::empty(&ctx);
    for (t, b) in part.blocks[..=n].iter().enumerate() {
        if t != r.i {
            c = c.union(b)?;
        }
    }
    let ok = verify_factors(&sigma, &part.blocks[r.i], &c, &r.factors)?;
    Ok(Report {
        verified: ok,
        body: json!({
            "command": "factor-homeo",
            "points": n,
            "sigma": HomeoJson::from_homeo(&sigma),
            "i": r.i,
            "j": r.j,
            "failures": r.failures,
            "sigma1": HomeoJson::from_homeo(&r.factors.sigma1),
            "sigma2": HomeoJson::from_homeo(&r.factors.sigma2),
            "sigma3": HomeoJson::from_homeo(&r.factors.sigma3),
        }),
    })
}

fn default_gens(ctx: &Arc<PointContext>, depth: usize) -> Result<Vec<EPHomeo>> {
    let free: Vec<Word> = Word::all_of_length(depth).into_iter().filter(|w| (0..ctx.n()).all(|i| !ctx.point(i).starts_with(w))).collect();
    free.windows(2)
        .map(|p| {
            let x = TailClopen::cylinder(ctx, &p[0]);
            let y = TailClopen::cylinder(ctx, &p[1]);
            let h = orbit_witness(&x, &y)?;
            piecewise_glue(ctx, &[(x, h.clone()), (y, h.inverse())])
        })
        .collect()
}

fn growth(points: usize, depth: usize, gens: Option<&Path>, steps: usize) -> Result<Report> {
    let ctx = Arc::new(PointContext::standard(points));
    let homeos = match gens {
        Some(p) => fj::from_str::<Vec<HomeoJson>>(&read(p)?)?.iter().map(|h| h.to_homeo(&ctx)).collect::<Result<Vec<_>>>()?,
        None => default_gens(&ctx, depth)?,
    };
    let perms: Vec<Vec<usize>> = homeos.iter().map(|h| cell_action(h, depth)).collect::<Result<_>>()?;
    let g = bergman_growth(&perms, steps)?;
    let monotone = g.sizes.windows(2).all(|p| p[0] <= p[1]);
    let bounded = g.sizes.iter().all(|&s| s <= g.group_order);
    Ok(Report {
        verified: monotone && bounded,
        body: json!({
            "command": "bergman-growth",
            "points": points,
            "depth": depth,
            "growth": g,
            "monotone": monotone,
            "bounded": bounded,
        }),
    })
}
