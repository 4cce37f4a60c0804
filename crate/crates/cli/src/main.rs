use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use mcg_core::audit::{run_suite, AuditConfig, AuditReport, SUITES};
use mcg_core::coding::BitSeq;
use mcg_core::explorer::{dichotomy_search, maximality_probe, ProbeOutcome};
use mcg_core::inj::Injection;
use mcg_core::orders::OrderContext;
use mcg_core::periodic::{run_glue, EdotOrbits, FilePartition, OrbitSource, Singletons};
use mcg_core::recognizer::{in_u, membership_search, Matcher, MemberOutcome, Prefix, TripleSpace};
use mcg_core::semaphore::{PsiNode, Semaphore, Universe};
use mcg_core::sparse::{b0_upto, theta_state};
use mcg_core::surgery::{verify_local_permutation, Edot, GeneratorSeed};
use mcg_core::tower::{Mode, Tower, TowerConfig};
use mcg_core::words::{OmegaWord, SeedTriple, Sign};
use mcg_core::Error;
use num_bigint::BigUint;

/// Exit status when a check fails.
const EXIT_CHECK: u8 = 1;
/// Exit status for usage errors: bad arguments, unknown suites, malformed input files.
const EXIT_USAGE: u8 = 2;
/// Exit status when an answer lies beyond the configured caps.
const EXIT_CAPACITY: u8 = 3;

#[derive(Parser)]
#[command(name = "mcg", version, about = "Pointwise evaluation and audits for the interval-partition permutation tower")]
struct Cli {
    /// Tower config file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    /// Sampling seed for every randomized check; goes before the subcommand.
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
    /// Append line-delimited JSON records here.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Faithful,
    Scaled,
}

#[derive(Subcommand)]
enum Cmd {
    #[command(subcommand)]
    Tower(TowerCmd),
    #[command(subcommand)]
    Sparse(SparseCmd),
    #[command(subcommand)]
    Orders(OrdersCmd),
    #[command(subcommand)]
    Semaphore(SemaphoreCmd),
    #[command(subcommand)]
    Edot(EdotCmd),
    /// Decide membership of an interval-length prefix in U.
    Recognize {
        #[arg(long)]
        prefix: PathBuf,
        /// Restrict recovery to these bit sequences, one per line.
        #[arg(long)]
        alphabet: Option<PathBuf>,
    },
    /// Search for a word over generators agreeing with a finite injection.
    Member {
        #[arg(long)]
        h: PathBuf,
        #[arg(long)]
        word_bound: usize,
        #[arg(long)]
        horizon: u64,
        /// Extra generator seeds, one `[x ; c0 ; c1]` per line.
        #[arg(long)]
        pool: Option<PathBuf>,
    },
    #[command(subcommand)]
    Explore(ExploreCmd),
    #[command(subcommand)]
    Periodic(PeriodicCmd),
    /// Run an invariant suite, or `all`.
    Audit {
        suite: String,
        /// Multiply every sample count.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
}

#[derive(Subcommand)]
enum TowerCmd {
    Build {
        #[arg(long)]
        level: usize,
    },
    Eval {
        #[arg(long)]
        word: String,
        #[arg(long)]
        point: BigUint,
    },
    Audit,
}

#[derive(Subcommand)]
enum SparseCmd {
    Theta {
        #[arg(long)]
        g: String,
        #[arg(long)]
        n: usize,
    },
    B0 {
        #[arg(long)]
        g: String,
        #[arg(long)]
        c0: String,
        #[arg(long)]
        c1: String,
        /// Report members in intervals up to the one holding this point.
        #[arg(long)]
        upto: BigUint,
    },
}

#[derive(Subcommand)]
enum OrdersCmd {
    Check {
        #[arg(long)]
        f: PathBuf,
        /// Lines `m m2`.
        #[arg(long)]
        pairs: PathBuf,
    },
}

#[derive(Subcommand)]
enum SemaphoreCmd {
    /// Node file: `target = INJ`, `k = N`, then one `letter = [x ; d0 ; d1] ±1` per letter.
    Psi {
        #[arg(long)]
        node: PathBuf,
    },
    B {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        p0: String,
        #[arg(long)]
        p1: String,
        #[arg(long)]
        upto: BigUint,
        #[arg(long, default_value_t = 1)]
        word_len: usize,
    },
}

#[derive(Subcommand)]
enum EdotCmd {
    Eval {
        #[arg(long)]
        seed: PathBuf,
        #[arg(long)]
        point: BigUint,
    },
    Audit {
        #[arg(long)]
        seed: PathBuf,
        #[arg(long)]
        window: u64,
    },
}

#[derive(Subcommand)]
enum ExploreCmd {
    Dichotomy {
        #[arg(long)]
        g: String,
        #[arg(long)]
        depth: usize,
    },
    Maximality {
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        word_bound: usize,
        #[arg(long)]
        horizon: u64,
        /// Generator seeds, one per line; defaults to the tower alphabet.
        #[arg(long)]
        seeds: Option<PathBuf>,
        /// Agreements required; defaults to every point of the horizon in dom g.
        #[arg(long)]
        threshold: Option<usize>,
    },
}

#[derive(Subcommand)]
enum PeriodicCmd {
    Glue {
        /// Partition file, or `singletons`.
        #[arg(long)]
        orbits: String,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Generators `[x ; c0 ; c1]`, one per line, whose ė-orbits replace the partition.
        #[arg(long)]
        edot: Option<PathBuf>,
    },
}

/// How a command ended.
enum Outcome {
    Ok,
    CheckFailed,
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn seed_lines(text: &str) -> anyhow::Result<Vec<GeneratorSeed>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.parse::<GeneratorSeed>().map_err(anyhow::Error::from))
        .collect()
}

fn digits(v: &BigUint) -> String {
    let s = v.to_string();
    if s.len() > 40 {
        format!("{}…({} digits)", &s[..12], s.len())
    } else {
        s
    }
}

struct Ctx {
    tower: Tower,
    audit: AuditConfig,
    report: Option<PathBuf>,
}

impl Ctx {
    fn emit(&self, line: serde_json::Value) -> anyhow::Result<()> {
        self.emit_raw(&format!("{line}\n"))
    }

    fn emit_raw(&self, text: &str) -> anyhow::Result<()> {
        if let Some(p) = &self.report {
            use std::io::Write;
            let mut f = fs::OpenOptions::new().create(true).append(true).open(p).with_context(|| format!("opening {}", p.display()))?;
            f.write_all(text.as_bytes())?;
        }
        Ok(())
    }

    fn audit_report(&self, rep: &AuditReport) -> anyhow::Result<Outcome> {
        for c in &rep.checks {
            println!("{:?} {} [{}] {}", c.status, c.name, c.bound, c.detail);
            if let Some(cx) = &c.counterexample {
                println!("    counterexample (seed {}): {cx}", rep.seed);
            }
        }
        println!("suite {}: {}", rep.suite, if rep.ok() { "ok" } else { "FAILED" });
        self.emit_raw(&rep.to_json_lines())?;
        Ok(if rep.ok() { Outcome::Ok } else { Outcome::CheckFailed })
    }
}

fn build_ctx(cli: &Cli) -> anyhow::Result<Ctx> {
    let mut cfg = match &cli.config {
        Some(p) => TowerConfig::parse(&read(p)?)?,
        None => TowerConfig::default(),
    };
    if let Some(m) = cli.mode {
        cfg.mode = match m {
            ModeArg::Faithful => Mode::Faithful,
            ModeArg::Scaled => Mode::Scaled,
        };
    }
    cfg.rng_seed = cli.seed;
    let audit = AuditConfig { seed: cli.seed, mode: cfg.mode, ..AuditConfig::default() };
    Ok(Ctx { tower: Tower::new(cfg), audit, report: cli.report.clone() })
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let ctx = build_ctx(&cli)?;
    let t = &ctx.tower;
    match cli.cmd {
        Cmd::Tower(TowerCmd::Build { level }) => {
            let lv = t.level(level)?;
            let dict = t.dictionary_available(level)?;
            println!("level {level}: start {} size {} end {}", digits(&lv.start), digits(&lv.size), digits(&lv.end()));
            match lv.perm_level() {
                Some(pl) => println!("  permutation group of degree {}, padding S_{}", pl.degree(), pl.k),
                None => println!("  cyclic group"),
            }
            println!("  dictionary: {}", if dict { "available" } else { "unavailable" });
            ctx.emit(serde_json::json!({"command": "tower build", "level": level, "start": lv.start.to_string(), "size": lv.size.to_string(), "dictionary": dict}))?;
        }
        Cmd::Tower(TowerCmd::Eval { word, point }) => {
            let w: OmegaWord = word.parse()?;
            let v = t.eval_e(&w, &point)?;
            println!("{v}");
            ctx.emit(serde_json::json!({"command": "tower eval", "word": w.to_string(), "point": point.to_string(), "value": v.to_string()}))?;
        }
        Cmd::Tower(TowerCmd::Audit) => return ctx.audit_report(&run_suite("tower", &ctx.audit)?),
        Cmd::Sparse(SparseCmd::Theta { g, n }) => {
            let g: Injection = g.parse()?;
            let st = theta_state(t, &g, t.max_level())?;
            match st.anchors.get(n) {
                Some(a) => println!("ϑ({n}) = {} in I_{} (ξ = {})", digits(&a.point), a.level, a.xi),
                None => println!("ϑ({n}) undefined or not computable: {:?}", st.stop),
            }
            ctx.emit(serde_json::json!({"command": "sparse theta", "g": g.to_string(), "n": n, "value": st.anchors.get(n).map(|a| a.point.to_string())}))?;
        }
        Cmd::Sparse(SparseCmd::B0 { g, c0, c1, upto }) => {
            let g: Injection = g.parse()?;
            let (c0, c1): (BitSeq, BitSeq) = (c0.parse()?, c1.parse()?);
            let lvl = t.interval_of(&upto)?;
            let b0 = b0_upto(t, &g, &c0, &c1, lvl)?;
            let pts: Vec<String> = b0.iter().map(|b| b.anchor.point.to_string()).collect();
            println!("B₀ up to I_{lvl}: {}", if pts.is_empty() { "∅".into() } else { pts.join(" ") });
            ctx.emit(serde_json::json!({"command": "sparse b0", "upto_level": lvl, "members": pts}))?;
        }
        Cmd::Orders(OrdersCmd::Check { f, pairs }) => {
            let f: Injection = read(&f)?.trim().parse()?;
            let ord = OrderContext::new(t, &f);
            for line in read(&pairs)?.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
                let v: Vec<&str> = line.split_whitespace().collect();
                if v.len() != 2 {
                    return Err(Error::parse(format!("pair line `{line}`")).into());
                }
                let (m, m2): (BigUint, BigUint) = (v[0].parse()?, v[1].parse()?);
                let (l0, l1) = (ord.less0(&m, &m2)?, ord.less1(&m, &m2)?);
                println!("{m} {m2}: <0 {l0} <1 {l1}");
                ctx.emit(serde_json::json!({"command": "orders check", "m": m.to_string(), "m2": m2.to_string(), "less0": l0, "less1": l1}))?;
            }
        }
        Cmd::Semaphore(SemaphoreCmd::Psi { node }) => {
            let node = parse_node(t, &read(&node)?)?;
            let sem = Semaphore::new(t);
            let psi = sem.psi(&node)?;
            let bits: String = psi.iter().map(|&b| if b { '1' } else { '0' }).collect();
            println!("ψ = {bits}");
            ctx.emit(serde_json::json!({"command": "semaphore psi", "k": node.k, "psi": bits}))?;
        }
        Cmd::Semaphore(SemaphoreCmd::B { f, p0, p1, upto, word_len }) => {
            let f: Injection = read(&f)?.trim().parse()?;
            let (p0, p1): (BitSeq, BitSeq) = (p0.parse()?, p1.parse()?);
            let lvl = t.interval_of(&upto)?;
            let mut seeds = t.config.alphabet.clone();
            seeds.push(Arc::new(SeedTriple::new(mcg_core::coding::BitStream::Chi(f.clone()), "periodic: ∅ / 1".parse()?, "periodic: ∅ / 1".parse()?)));
            let u = Universe { targets: vec![Injection::identity(), f.clone()], seeds, max_word_len: word_len, max_k: 0 };
            let sem = Semaphore::new(t);
            let b = sem.b_targeted(&u, &f, &p0, &p1, lvl)?;
            let show = |v: &[BigUint]| v.iter().map(|p| p.to_string()).collect::<Vec<_>>();
            println!("B₀: {:?}\nB:  {:?}\nsearch bound k ≤ {}", show(&b.b0), show(&b.kept), b.bound);
            for r in &b.removals {
                println!("  removed {} by target {} word {:?} letter {} at k = {}", r.m, r.target, r.word, r.j, r.k);
            }
            ctx.emit(serde_json::json!({"command": "semaphore b", "b0": show(&b.b0), "b": show(&b.kept), "bound": b.bound}))?;
        }
        Cmd::Edot(EdotCmd::Eval { seed, point }) => {
            let seed: GeneratorSeed = read(&seed)?.parse()?;
            let ed = Edot::plain(t, seed);
            let v = ed.eval(&point)?;
            println!("ė({point}) = {} (case {})", v.value, v.case.number());
            ctx.emit(serde_json::json!({"command": "edot eval", "point": point.to_string(), "value": v.value.to_string(), "case": v.case.number()}))?;
        }
        Cmd::Edot(EdotCmd::Audit { seed, window }) => {
            let seed: GeneratorSeed = read(&seed)?.parse()?;
            let ed = Edot::plain(t, seed.clone());
            let rep = verify_local_permutation(&ed, window)?;
            println!(
                "window {window}: injective {} unhit {} exclusivity violations {} coincidences {} slack intervals {} cases {:?}",
                rep.injective,
                rep.unhit.len(),
                rep.exclusivity_violations.len(),
                rep.coincidences,
                rep.slack_used,
                rep.case_counts
            );
            let ok = rep.ok();
            ctx.emit(serde_json::json!({"command": "edot audit", "seed": seed.to_string(), "sampling_seed": ctx.audit.seed, "window": window, "ok": ok,
                "collision": rep.collision.map(|(a, b)| [a.to_string(), b.to_string()]), "unhit": rep.unhit.iter().map(|p| p.to_string()).collect::<Vec<_>>()}))?;
            return Ok(if ok { Outcome::Ok } else { Outcome::CheckFailed });
        }
        Cmd::Recognize { prefix, alphabet } => {
            let p = Prefix::parse(t, &read(&prefix)?)?;
            let space = match alphabet {
                Some(a) => TripleSpace::Restricted(
                    read(&a)?.lines().map(str::trim).filter(|l| !l.is_empty()).map(|l| l.parse()).collect::<Result<Vec<_>, _>>()?,
                ),
                None => TripleSpace::Full,
            };
            let sem = Semaphore::new(t);
            let u = Universe::empty();
            let m = Matcher::new(&sem, &u);
            let v = in_u(&m, &p, &space)?;
            println!("interval length k = {}: {}", p.k, if v.accepted { "accepted" } else { "rejected" });
            if let Some(w) = &v.witness {
                println!("  x̄ = {} d̄⁰ = {} d̄¹ = {} ḡ = {:?}", w.triple.x, w.triple.d0, w.triple.d1, w.gbar);
            }
            ctx.emit(serde_json::json!({"command": "recognize", "k": p.k, "accepted": v.accepted, "recovered": v.recovered, "gbar_candidates": v.gbar_bound}))?;
        }
        Cmd::Member { h, word_bound, horizon, pool } => {
            let h: Injection = read(&h)?.trim().parse()?;
            let pool = match pool {
                Some(p) => seed_lines(&read(&p)?)?,
                None => vec![],
            };
            match membership_search(t, &h, &pool, word_bound, horizon)? {
                MemberOutcome::Witness(w) => {
                    let seeds: Vec<String> = w.seeds.iter().map(|s| s.to_string()).collect();
                    println!("witness word {:?} over [{}]", w.word, seeds.join(" , "));
                    ctx.emit(serde_json::json!({"command": "member", "found": true, "word": format!("{:?}", w.word), "seeds": seeds}))?;
                }
                MemberOutcome::Inconclusive { words_tried } => {
                    println!("inconclusive after {words_tried} words");
                    ctx.emit(serde_json::json!({"command": "member", "found": false, "words_tried": words_tried}))?;
                }
            }
        }
        Cmd::Explore(ExploreCmd::Dichotomy { g, depth }) => {
            let g: Injection = g.parse()?;
            let out = dichotomy_search(t, &g, depth)?;
            println!("{:?} over {} anchors", out.kind, out.bound);
            if !out.chain.is_empty() {
                println!("  chain {}", out.chain.iter().map(digits).collect::<Vec<_>>().join(" <0 "));
            }
            if let (Some(d0), Some(d1)) = (&out.d0, &out.d1) {
                println!("  d0 = {d0} d1 = {d1} sub-case {:?}", out.sub_case);
            }
            ctx.emit(serde_json::json!({"command": "explore dichotomy", "kind": format!("{:?}", out.kind), "bound": out.bound}))?;
        }
        Cmd::Explore(ExploreCmd::Maximality { g, word_bound, horizon, seeds, threshold }) => {
            let g: Injection = read(&g)?.trim().parse()?;
            let seeds = match seeds {
                Some(p) => seed_lines(&read(&p)?)?,
                None => t.config.alphabet.iter().map(|s| GeneratorSeed::new((**s).clone())).collect::<Result<Vec<_>, _>>()?,
            };
            let in_dom = (0..horizon).filter(|&p| g.in_dom(&BigUint::from(p))).count();
            let threshold = threshold.unwrap_or(in_dom);
            match maximality_probe(t, &g, &seeds, word_bound, horizon, threshold)? {
                ProbeOutcome::Found { word, agreements } => {
                    println!("word {word:?} agrees on {agreements} points");
                    ctx.emit(serde_json::json!({"command": "explore maximality", "found": true, "word": format!("{word:?}"), "agreements": agreements}))?;
                }
                ProbeOutcome::Inconclusive { words_tried, best } => {
                    println!("inconclusive after {words_tried} words; best agreement {best}");
                    ctx.emit(serde_json::json!({"command": "explore maximality", "found": false, "best": best}))?;
                }
            }
        }
        Cmd::Periodic(PeriodicCmd::Glue { orbits, steps, emit, edot }) => {
            let mut src: Box<dyn OrbitSource> = match (&edot, orbits.as_str()) {
                (Some(p), _) => {
                    let gens = seed_lines(&read(p)?)?.into_iter().map(|s| Edot::plain(t, s)).collect();
                    Box::new(EdotOrbits::new(gens, 1 << 14))
                }
                (None, "singletons") => Box::new(Singletons),
                (None, path) => Box::new(FilePartition::parse(&read(Path::new(path))?)?),
            };
            let (h, rep) = run_glue(src.as_mut(), steps, 1 << 48)?;
            println!(
                "{}: {} steps, |h| = {}, least point missing from dom ∪ range {}, orbit-joining pairs {}, checks {}",
                src.name(),
                rep.steps,
                h.len(),
                rep.min_missing,
                rep.mixing_pairs,
                if rep.ok() { "ok" } else { "FAILED" }
            );
            if let Some(p) = emit {
                fs::write(&p, h.to_text()).with_context(|| format!("writing {}", p.display()))?;
            }
            ctx.emit(serde_json::json!({"command": "periodic glue", "source": src.name(), "steps": rep.steps, "ok": rep.ok(), "min_missing": rep.min_missing}))?;
            return Ok(if rep.ok() { Outcome::Ok } else { Outcome::CheckFailed });
        }
        Cmd::Audit { suite, scale } => {
            let cfg = AuditConfig { scale, ..ctx.audit.clone() };
            let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite.as_str()] };
            let mut all_ok = true;
            for name in names {
                let rep = run_suite(name, &cfg)?;
                all_ok &= matches!(ctx.audit_report(&rep)?, Outcome::Ok);
            }
            return Ok(if all_ok { Outcome::Ok } else { Outcome::CheckFailed });
        }
    }
    Ok(Outcome::Ok)
}

fn parse_node(t: &Tower, text: &str) -> anyhow::Result<PsiNode> {
    let mut target = None;
    let mut k = None;
    let mut letters = vec![];
    for line in text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty()) {
        let (key, value) = line.split_once('=').ok_or_else(|| anyhow!("node line `{line}` needs `key = value`"))?;
        match key.trim() {
            "target" => target = Some(value.trim().parse::<Injection>()?),
            "k" => k = Some(value.trim().parse::<usize>()?),
            "letter" => {
                let v = value.trim();
                let close = v.rfind(']').ok_or_else(|| anyhow!("letter needs `[x ; d0 ; d1] ±1`"))?;
                let seed: SeedTriple = v[..=close].parse()?;
                let sign = match v[close + 1..].trim() {
                    "-1" | "-" => Sign::Neg,
                    "" | "+1" | "1" | "+" => Sign::Pos,
                    other => return Err(anyhow!("bad exponent `{other}`")),
                };
                letters.push((Arc::new(seed), sign));
            }
            other => return Err(anyhow!("unknown node key `{other}`")),
        }
    }
    let target = target.ok_or_else(|| anyhow!("node file needs `target = …`"))?;
    let k = k.ok_or_else(|| anyhow!("node file needs `k = …`"))?;
    Ok(PsiNode::from_seeds(t, &target, k, &letters)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(EXIT_CHECK),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = match e.downcast_ref::<Error>() {
                Some(Error::Capacity(_)) => EXIT_CAPACITY,
                _ => EXIT_USAGE,
            };
            ExitCode::from(code)
        }
    }
}
