mod input;
mod report;
mod reproduce;

use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use k3e_core::classify::candidates::{self, CandidateList, FilterConfig, StepConfig};
use k3e_core::classify::catalog;
use k3e_core::classify::census::{self, CensusCaps, Main10Verdict, RootGenusMemo};
use k3e_core::classify::rank3;
use k3e_core::classify::roots::{parse_group, RootSystem};
use k3e_core::discriminant::DiscriminantForm;
use k3e_core::enumeration::{minimum, root_rank, roots};
use k3e_core::genus::{GenusCache, GenusCaps, NEIGHBOR_PRIMES};
use k3e_core::isometry::is_isometric;
use k3e_core::enumeration::reduce;
use serde_json::json;

use report::{finish, Failure, Outcome, EXIT_CAP, EXIT_DIFF};

#[derive(Parser)]
#[command(name = "k3e", version, about = "Lattice computations for K3 surfaces of zero entropy")]
struct Cli {
    /// Exit with code 5 when caps prevent a definite answer.
    #[arg(long, global = true)]
    strict: bool,
    /// Seed for randomized steps.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect a lattice.
    Lattice {
        #[command(subcommand)]
        cmd: LatticeCmd,
    },
    /// Picard rank three, NS = U + <-2k>.
    Rank3 {
        #[command(subcommand)]
        cmd: Rank3Cmd,
    },
    /// Nefness of an isotropic class.
    Nef { ns: String, divisor: String },
    /// Nef isotropic classes with E.F = beta, gamma reduced mod beta.
    Fibrations {
        ns: String,
        #[arg(long)]
        beta: i64,
        /// Also search a section for each nef class.
        #[arg(long)]
        sections: bool,
    },
    /// Search a section of the fibration induced by a divisor.
    Sections {
        ns: String,
        divisor: String,
        /// Bound on the y coordinate (default |det L|).
        #[arg(long)]
        bound: Option<i64>,
        /// Bound on the L coordinates (default 2 |det L|).
        #[arg(long)]
        z_bound: Option<i64>,
    },
    Genus {
        #[command(subcommand)]
        cmd: GenusCmd,
    },
    /// Recompute a table and diff it against the embedded values.
    Reproduce {
        /// delta-r, rank2-candidates, L1, fibration-counts or root-discriminants
        table: String,
        /// Restrict fibration-counts to one Picard rank.
        #[arg(long)]
        picard: Option<usize>,
    },
    Pipeline {
        #[command(subcommand)]
        cmd: PipelineCmd,
    },
    Catalog {
        #[command(subcommand)]
        cmd: CatalogCmd,
    },
    /// The genus cache directory (K3E_CACHE, default ./k3e-cache).
    Cache {
        #[command(subcommand)]
        cmd: CacheCmd,
    },
}

#[derive(Subcommand)]
enum LatticeCmd {
    /// Rank, determinant, minimum, roots and discriminant form.
    Info { lattice: String },
}

#[derive(Subcommand)]
enum Rank3Cmd {
    Classify {
        k: Option<i64>,
        /// CSV over k = 2..=max instead of one verdict.
        #[arg(long)]
        scan: Option<i64>,
    },
}

#[derive(Args, Clone)]
struct GenusOpts {
    #[arg(long, default_value = "2,3,5")]
    primes: String,
    /// Most classes to collect.
    #[arg(long, default_value_t = 64)]
    cap: usize,
    /// Most neighbor computations.
    #[arg(long, default_value_t = 4096)]
    steps: usize,
    #[arg(long)]
    no_cache: bool,
}

#[derive(Subcommand)]
enum GenusCmd {
    Explore {
        lattice: String,
        #[command(flatten)]
        opts: GenusOpts,
    },
    Unique {
        lattice: String,
        #[command(flatten)]
        opts: GenusOpts,
    },
}

#[derive(Subcommand)]
enum PipelineCmd {
    /// Candidate list of rank n+1 from the rank-n list.
    Candidates {
        #[arg(long)]
        from_rank: usize,
        /// Catalog of rank n+1 (default: the embedded one).
        #[arg(long)]
        catalog: Option<String>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 8)]
        height: i64,
        /// Skip the second-fibration filter on the result.
        #[arg(long)]
        no_filter: bool,
    },
    /// Root-overlattices of a root lattice with a given torsion group.
    Overlattices {
        root: String,
        #[arg(long, default_value = "trivial")]
        group: String,
        /// Look for a genus-mate of minimum 2 that is not a root-overlattice.
        #[arg(long)]
        verify: bool,
    },
    /// Admissible groups, census and verdicts for one root lattice.
    Census { root: String },
}

#[derive(Subcommand)]
enum CatalogCmd {
    /// Even definite lattices of a rank, b = 1, alone in their genus.
    Generate {
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        max_det: i64,
        /// Write the catalog file here.
        #[arg(long)]
        out: Option<String>,
    },
    /// Recheck the uniqueness flags of a catalog file.
    Check { file: String },
}

#[derive(Subcommand)]
enum CacheCmd {
    Info,
    Clear,
}

fn genus_caps(o: &GenusOpts) -> GenusCaps {
    GenusCaps { classes: o.cap, steps: o.steps }
}

fn cache_stats(c: &GenusCache) -> report::CacheStats {
    report::CacheStats { dir: cache_dir(), hits: c.hits, misses: c.misses }
}

fn cache_dir() -> String {
    std::env::var("K3E_CACHE").unwrap_or_else(|_| "k3e-cache".into())
}

fn lattice_info(arg: &str) -> Result<Outcome, Failure> {
    let l = input::lattice(arg)?;
    let form = DiscriminantForm::of(&l);
    let mut info = json!({
        "name": l.name(),
        "gram": l.gram(),
        "rank": l.rank(),
        "determinant": l.determinant(),
        "definiteness": l.definiteness(),
        "scale_divisor": l.primitive_scale_divisor(),
        "discriminant_form": form,
    });
    if l.is_definite() {
        let r = roots(&l)?;
        info["minimum"] = json!(minimum(&l)?);
        info["roots"] = json!(2 * r.len());
        info["root_rank"] = json!(root_rank(&l)?);
    }
    Outcome::new(json!({"lattice": arg}), info)
}

fn rank3_classify(k: Option<i64>, scan: Option<i64>) -> Result<Option<Outcome>, Failure> {
    if let Some(max) = scan {
        if max < 2 {
            return Err(Failure::precondition("--scan needs a bound of at least 2"));
        }
        println!("k,zero_entropy,condition_c,prime_power,fibration_classes");
        for k in 2..=max {
            let v = rank3::classify_fast(k)?;
            println!("{},{},{},{},{}", v.k, v.zero_entropy, v.condition_c, v.prime_power, v.fibration_classes);
        }
        return Ok(None);
    }
    let k = k.ok_or_else(|| Failure::parse("give k or --scan"))?;
    let v = rank3::classify(k)?;
    let mut out = Outcome::new(json!({"k": k}), &v)?;
    if let Some(w) = &v.witness {
        out = out.witness(w)?;
    }
    Ok(Some(out))
}

fn genus_explore(arg: &str, opts: &GenusOpts, unique: bool, strict: bool) -> Result<Outcome, Failure> {
    let l = input::lattice(arg)?;
    let primes = input::primes(&opts.primes)?;
    for p in &primes {
        if !NEIGHBOR_PRIMES.contains(p) {
            return Err(Failure::precondition(format!("prime {} not supported; use 2, 3 or 5", p)));
        }
    }
    let caps = genus_caps(opts);
    let mut cache = GenusCache::from_env();
    let ex = if opts.no_cache { k3e_core::genus::genus_explore(&l, &primes, caps)? } else { cache.explore(&l, &primes, caps)? };
    let classes: Vec<serde_json::Value> = ex
        .classes
        .iter()
        .map(|c| {
            Ok(json!({
                "gram": c.gram(),
                "minimum": minimum(c)?,
                "roots": 2 * roots(c)?.len(),
                "root_rank": root_rank(c)?,
            }))
        })
        .collect::<Result<_, Failure>>()?;
    let inputs = json!({"lattice": arg, "primes": primes, "cap": opts.cap, "steps": opts.steps});
    let mut out = if unique {
        let seed = reduce(&l)?.0;
        let verdict = if ex.classes.len() > 1 {
            let mut other = None;
            for c in &ex.classes {
                if is_isometric(c, &seed)?.is_none() {
                    other = Some(c.clone());
                    break;
                }
            }
            json!({"verdict": "false", "witness": other})
        } else if ex.complete {
            json!({"verdict": "true"})
        } else {
            json!({"verdict": "unknown"})
        };
        let definite = verdict["verdict"] != "unknown";
        let mut o = Outcome::new(inputs, json!({"uniqueness": verdict, "classes": ex.classes.len(), "complete": ex.complete, "method": ex.method}))?;
        if let Some(w) = verdict.get("witness") {
            o = o.witness(w)?;
        }
        if strict && !definite {
            o.exit = EXIT_CAP;
        }
        o
    } else {
        let mut o = Outcome::new(
            inputs,
            json!({"classes": classes, "count": ex.classes.len(), "complete": ex.complete, "primes_used": ex.primes_used, "steps": ex.steps, "method": ex.method}),
        )?;
        if strict && !ex.complete {
            o.exit = EXIT_CAP;
        }
        o
    };
    if !opts.no_cache {
        out.cache = Some(cache_stats(&cache));
    }
    Ok(out)
}

fn pipeline_candidates(from: usize, catalog_path: Option<&str>, step: StepConfig, filter: bool) -> Result<Outcome, Failure> {
    if from < 2 {
        return Err(Failure::precondition("--from-rank must be at least 2"));
    }
    let fcfg = FilterConfig::default();
    let mut list: CandidateList = candidates::fibration_filter(&candidates::rank2_candidates()?, fcfg)?;
    for n in 3..=from {
        let next = candidates::candidate_step(&list, &candidates::checked_catalog(n)?, step)?;
        list = candidates::fibration_filter(&next, fcfg)?;
    }
    let target = from + 1;
    let cat = match catalog_path {
        Some(p) => {
            let all = input::catalog_file(p)?;
            let of_rank: Vec<_> = all.into_iter().filter(|l| l.rank() == target).collect();
            if of_rank.is_empty() {
                return Err(Failure::precondition(format!("catalog {} has no lattices of rank {}", p, target)));
            }
            let bad = catalog::spot_check(&of_rank)?;
            if !bad.is_empty() {
                return Err(Failure::precondition(format!("catalog entries not alone in their genus: {}", bad.join(", "))));
            }
            of_rank
        }
        None => candidates::checked_catalog(target)?,
    };
    let next = candidates::candidate_step(&list, &cat, step)?;
    let result = if filter { candidates::fibration_filter(&next, fcfg)? } else { next };
    let mut out = Outcome::new(
        json!({"from_rank": from, "catalog": catalog_path.unwrap_or("embedded"), "trials": step.trials, "height": step.height, "filter": filter}),
        json!({"rank": result.rank, "survivors": result.lattices.len(), "list": &result}),
    )?;
    for r in result.provenance.iter().filter(|r| r.eliminated.is_some()) {
        out = out.witness(json!({"lattice": r.lattice, "elimination": r.eliminated}))?;
    }
    out.seed = Some(step.seed);
    Ok(out)
}

fn pipeline_overlattices(root: &str, group: &str, verify: bool, strict: bool) -> Result<Outcome, Failure> {
    let r = RootSystem::parse(root)?;
    let g = parse_group(group)?;
    let caps = CensusCaps::default();
    let c = census::overlattice_census(&r, &g, caps)?;
    let mut verdicts = Vec::new();
    let mut unknown = false;
    if verify {
        let mut memo = RootGenusMemo::default();
        let ade = census::ade(std::slice::from_ref(&r), caps.genus, &mut memo)?;
        for m in &c.overlattices {
            let v = census::main10_verify(&r, &m.glue, &m.lattice, &ade, caps)?;
            unknown |= matches!(v, Main10Verdict::Unknown { .. });
            verdicts.push(v);
        }
    }
    let mut out = Outcome::new(json!({"root": root, "group": group, "verify": verify}), json!({"census": &c, "main10": verdicts}))?;
    for v in &verdicts {
        if let Main10Verdict::Witness { .. } = v {
            out = out.witness(v)?;
        }
    }
    if strict && unknown {
        out.exit = EXIT_CAP;
    }
    Ok(out)
}

fn pipeline_census(root: &str, strict: bool) -> Result<Outcome, Failure> {
    let r = RootSystem::parse(root)?;
    let mut memo = RootGenusMemo::default();
    let rep = census::run_seed(&r, CensusCaps::default(), &mut memo)?;
    let unknown = rep.records.iter().any(|x| matches!(x.verdict, Main10Verdict::Unknown { .. }));
    let mut out = Outcome::new(json!({"root": root}), &rep)?;
    for rec in &rep.records {
        if let Main10Verdict::Witness { .. } = rec.verdict {
            out = out.witness(&rec.verdict)?;
        }
    }
    if strict && unknown {
        out.exit = EXIT_CAP;
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<Option<(String, Outcome)>, Failure> {
    let strict = cli.strict;
    let (name, out) = match cli.command {
        Command::Lattice { cmd: LatticeCmd::Info { lattice } } => ("lattice info", lattice_info(&lattice)?),
        Command::Rank3 { cmd: Rank3Cmd::Classify { k, scan } } => match rank3_classify(k, scan)? {
            Some(o) => ("rank3 classify", o),
            None => return Ok(None),
        },
        Command::Nef { ns, divisor } => {
            let s = input::ns(&ns)?;
            let e = input::divisor(&divisor)?;
            let v = s.is_nef_isotropic(&e)?;
            let mut o = Outcome::new(json!({"ns": ns, "divisor": e}), &v)?;
            if let Some(w) = &v.witness {
                o = o.witness(json!({"curve": w, "intersection": v.intersection}))?;
            }
            ("nef", o)
        }
        Command::Fibrations { ns, beta, sections } => {
            let s = input::ns(&ns)?;
            if beta < 1 {
                return Err(Failure::precondition("beta must be positive"));
            }
            let all = s.find_fibrations(beta, sections)?;
            let nef: Vec<_> = all.iter().filter(|c| c.verdict.is_nef()).collect();
            let v = json!({"beta": beta, "candidates": all.len(), "count": nef.len(), "classes": nef});
            ("fibrations", Outcome::new(json!({"ns": ns, "beta": beta, "sections": sections}), v)?)
        }
        Command::Sections { ns, divisor, bound, z_bound } => {
            let s = input::ns(&ns)?;
            let e = input::divisor(&divisor)?;
            let mut b = s.default_section_bounds();
            if let Some(y) = bound {
                b.y_max = y;
            }
            if let Some(z) = z_bound {
                b.z_max = z;
            }
            let r = s.find_section(&e, b)?;
            let mut o = Outcome::new(json!({"ns": ns, "divisor": e, "bounds": b}), &r)?;
            if let Some(sec) = &r.section {
                o = o.witness(sec)?;
            } else if strict {
                o.exit = EXIT_CAP;
            }
            ("sections", o)
        }
        Command::Genus { cmd: GenusCmd::Explore { lattice, opts } } => ("genus explore", genus_explore(&lattice, &opts, false, strict)?),
        Command::Genus { cmd: GenusCmd::Unique { lattice, opts } } => ("genus unique", genus_explore(&lattice, &opts, true, strict)?),
        Command::Reproduce { table, picard } => {
            let rep = reproduce::run(&table, picard)?;
            let mismatches = rep.mismatches;
            let mut o = Outcome::new(json!({"table": table, "picard": picard}), &rep)?;
            if mismatches > 0 {
                o.exit = EXIT_DIFF;
            }
            ("reproduce", o)
        }
        Command::Pipeline { cmd } => match cmd {
            PipelineCmd::Candidates { from_rank, catalog, trials, height, no_filter } => {
                let step = StepConfig { seed: cli.seed, trials, height };
                ("pipeline candidates", pipeline_candidates(from_rank, catalog.as_deref(), step, !no_filter)?)
            }
            PipelineCmd::Overlattices { root, group, verify } => ("pipeline overlattices", pipeline_overlattices(&root, &group, verify, strict)?),
            PipelineCmd::Census { root } => ("pipeline census", pipeline_census(&root, strict)?),
        },
        Command::Catalog { cmd } => match cmd {
            CatalogCmd::Generate { rank, max_det, out } => {
                let entries = catalog::generate(rank, max_det)?;
                if let Some(path) = &out {
                    let mut text = String::from("[\n");
                    for (i, e) in entries.iter().enumerate() {
                        text.push_str("  ");
                        text.push_str(&serde_json::to_string(e)?);
                        text.push_str(if i + 1 < entries.len() { ",\n" } else { "\n" });
                    }
                    text.push_str("]\n");
                    std::fs::write(path, text).map_err(|e| Failure::parse(format!("cannot write {}: {}", path, e)))?;
                }
                let v = json!({"rank": rank, "max_det": max_det, "count": entries.len(), "entries": entries});
                ("catalog generate", Outcome::new(json!({"rank": rank, "max_det": max_det, "out": out}), v)?)
            }
            CatalogCmd::Check { file } => {
                let entries = input::catalog_file(&file)?;
                let bad = catalog::spot_check(&entries)?;
                let checked = entries.iter().filter(|l| l.rank() <= 6 && l.determinant().abs() <= 200).count();
                let mut o = Outcome::new(json!({"file": file}), json!({"entries": entries.len(), "checked": checked, "not_unique": bad}))?;
                if !bad.is_empty() {
                    o.exit = report::EXIT_PRECONDITION;
                }
                ("catalog check", o)
            }
        },
        Command::Cache { cmd } => {
            let dir = cache_dir();
            let files: Vec<std::path::PathBuf> = std::fs::read_dir(&dir)
                .map(|it| it.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.extension().is_some_and(|x| x == "json")).collect())
                .unwrap_or_default();
            let removed = if matches!(cmd, CacheCmd::Clear) {
                for f in &files {
                    std::fs::remove_file(f).map_err(|e| Failure::parse(format!("cannot remove {}: {}", f.display(), e)))?;
                }
                files.len()
            } else {
                0
            };
            let name = if removed > 0 || matches!(cmd, CacheCmd::Clear) { "cache clear" } else { "cache info" };
            (name, Outcome::new(json!({"dir": dir}), json!({"entries": files.len() - removed, "removed": removed}))?)
        }
    };
    Ok(Some((name.to_string(), out)))
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let start = Instant::now();
    let cli = Cli::parse();
    let seed = cli.seed;
    match run(cli) {
        Ok(None) => {}
        Ok(Some((name, mut out))) => {
            if out.seed.is_none() && name.starts_with("pipeline") {
                out.seed = Some(seed);
            }
            let exit = out.exit;
            let rep = finish(&name, start, out);
            println!("{}", serde_json::to_string_pretty(&rep).expect("report serializes"));
            if exit != 0 {
                std::process::exit(exit);
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            std::process::exit(f.code);
        }
    }
}
