use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use twistlat::cx::{from_ivec, rel_err, C64};
use twistlat::decomp::JordanData;
use twistlat::fock::{self, FockModule, ModuleSpec};
use twistlat::group::{group_checks, GroupCtx};
use twistlat::input::Setup;
use twistlat::lattice::{verify_epsilon, IVec};
use twistlat::report::{all_pass, Check};
use twistlat::{presets, specfun, structure, vertexop, Error, Result};

#[derive(Parser)]
#[command(name = "twistlat", version, about = "Twisted logarithmic lattice modules", arg_required_else_help = true)]
struct Cli {
    /// Input document (JSON), or a bundled name: example-6.1, example-6.2, hyperbolic-identity.
    #[arg(long, global = true)]
    input: Option<String>,
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Overrides the cutoff weight of the input's module section.
    #[arg(long, global = true)]
    cutoff: Option<f64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Jordan–Chevalley data of φ.
    Decompose,
    /// Sign cocycle on the basis, its consistency checks and η.
    Cocycle,
    /// b, a(ζ), c for λ and μ, and the pair constants B, C.
    Constants {
        #[arg(long)]
        lambda: String,
        #[arg(long)]
        mu: String,
    },
    GroupCheck,
    /// Basis size and weight histogram of the truncated module.
    FockBuild,
    /// Mode table (m, j, Frobenius norm) of Y(e^λ, z) on the truncated basis.
    Vertexop {
        #[arg(long)]
        lambda: String,
        /// Keep modes with |Re m| ≤ order.
        #[arg(long, default_value_t = 3.0)]
        order: f64,
    },
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
    SpecfunSelftest,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Suite {
    Specfun,
    Group,
    Fock,
    Vertexop,
    All,
}

fn load(cli: &Cli) -> Result<Setup> {
    let name = cli.input.as_deref().ok_or_else(|| Error::BadInput("--input is required for this command".into()))?;
    let path = PathBuf::from(name);
    if path.exists() {
        let text = std::fs::read_to_string(&path).map_err(|e| Error::BadInput(format!("{name}: {e}")))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(name);
        Setup::from_json(&text, stem)
    } else if let Some(text) = presets::by_name(name) {
        Setup::from_json(text, name)
    } else {
        Err(Error::BadInput(format!("{name}: no such file or bundled input")))
    }
}

fn module(cli: &Cli, setup: &Setup, jd: JordanData) -> Result<FockModule> {
    let spec = ModuleSpec::from_setup(setup)?;
    let rep = spec.rep(&jd, setup)?;
    let mut config = spec.config();
    if let Some(c) = cli.cutoff {
        config.cutoff = c;
    }
    FockModule::build(setup, jd, rep, config, cli.seed)
}

fn cpx(z: C64) -> Value {
    json!([z.re + 0.0, z.im + 0.0])
}

fn cmat(m: &twistlat::cx::CMat) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| cpx(m[(i, j)])).collect())).collect())
}

fn basis_pairs(setup: &Setup) -> Vec<(IVec, IVec)> {
    let d = setup.lattice.rank();
    let mut out = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            out.push((setup.lattice.basis(i), setup.lattice.basis(j)));
        }
    }
    out
}

fn c_table(setup: &Setup, jd: &JordanData) -> Result<Value> {
    let labels = &setup.lattice.labels;
    let mut rows = Vec::new();
    for (a, b) in basis_pairs(setup) {
        let i = a.iter().position(|&x| x == 1).unwrap_or(0);
        let j = b.iter().position(|&x| x == 1).unwrap_or(0);
        let pc = structure::pair_constants(jd, &setup.lattice, &a, &b)?;
        rows.push(json!({"lambda": labels[i], "mu": labels[j], "B": cpx(pc.b), "C": cpx(pc.c)}));
    }
    Ok(Value::Array(rows))
}

fn suite_checks(cli: &Cli, setup: &Setup, suite: Suite) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let want = |s: Suite| suite == s || suite == Suite::All;
    if want(Suite::Specfun) {
        checks.extend(specfun::selftest(cli.seed)?);
    }
    if want(Suite::Group) {
        let jd = setup.jordan()?;
        let rep = verify_epsilon(&setup.eps, &setup.lattice, 200, cli.seed);
        checks.push(Check::flag("cocycle-consistency", "epsilon", rep.pass()));
        checks.extend(structure::structure_checks(&jd, &setup.lattice, cli.seed, 50)?);
        let ctx = GroupCtx::new(setup, jd, cli.seed)?;
        checks.extend(group_checks(&ctx, cli.seed, 100));
    }
    if want(Suite::Fock) || want(Suite::Vertexop) {
        let fm = module(cli, setup, setup.jordan()?)?;
        if want(Suite::Fock) {
            checks.extend(fock::fock_checks(&fm, cli.tol));
        }
        if want(Suite::Vertexop) {
            checks.extend(vertexop::vertexop_checks(&fm, &setup.phi, cli.tol));
            checks.push(vertexop::locality_check(&fm.jd, &setup.lattice, &basis_pairs(setup), 1e-6)?);
        }
    }
    Ok(checks)
}

fn checks_report(checks: &[Check]) -> Value {
    json!({"checks": checks, "pass": all_pass(checks)})
}

fn vertex_table(fm: &FockModule, lam: &[i64], order: f64) -> Result<Value> {
    let vd = vertexop::VertexData::new(fm, lam)?;
    let cut = fm.config.cutoff + 1e-9;
    // (z-exponent key, j) → Σ|entry|²
    let mut acc: BTreeMap<(fock::ExpKey, usize), f64> = BTreeMap::new();
    for m in fm.basis.iter().filter(|m| fm.weight(m) <= cut) {
        let mut st = fock::new_state();
        st.insert(m.clone(), C64::new(1.0, 0.0));
        for (key, zs) in vertexop::apply_vertex(fm, &vd, &st, fm.cap) {
            for (j, s) in zs.iter().enumerate() {
                let n2: f64 = s.iter().filter(|(o, _)| fm.weight(o) <= cut).map(|(_, v)| v.norm_sqr()).sum();
                if n2 > 0.0 {
                    *acc.entry((key, j)).or_default() += n2;
                }
            }
        }
    }
    let rows: Vec<Value> = acc
        .into_iter()
        .filter_map(|((key, j), n2)| {
            // z^{−m−1}
            let m = -key.value() - C64::new(1.0, 0.0);
            (m.re.abs() <= order + 1e-9 && n2.sqrt() > 1e-14).then(|| json!({"m": cpx(m), "j": j, "norm": n2.sqrt()}))
        })
        .collect();
    Ok(json!({"lambda": lam, "cutoff": fm.config.cutoff, "modes": rows}))
}

fn run(cli: &Cli) -> Result<(Value, bool)> {
    let t0 = Instant::now();
    let (mut body, pass) = match &cli.cmd {
        Cmd::SpecfunSelftest => {
            let c = specfun::selftest(cli.seed)?;
            (checks_report(&c), all_pass(&c))
        }
        Cmd::Decompose => {
            let setup = load(cli)?;
            let jd = setup.jordan()?;
            let blocks: Vec<Value> = jd
                .blocks
                .iter()
                .map(|b| {
                    json!({"eigenvalue": cpx(b.eigenvalue), "alpha0": cpx(b.alpha0), "alpha0_prime": cpx(b.alpha0_prime),
                           "sign_class": b.sign_class, "dim": b.dim})
                })
                .collect();
            let res: BTreeMap<&str, f64> = jd.residuals().into_iter().collect();
            let pass = res.values().all(|&r| r <= jd.tol);
            (
                json!({"blocks": blocks, "nilpotency_index": jd.nilpotency_index, "sigma": cmat(&jd.sigma),
                       "N": cmat(&jd.nilp), "residuals": res, "pass": pass}),
                pass,
            )
        }
        Cmd::Cocycle => {
            let setup = load(cli)?;
            let d = setup.lattice.rank();
            let table: Vec<Vec<i8>> = (0..d)
                .map(|i| (0..d).map(|j| setup.eps.eval(&setup.lattice.basis(i), &setup.lattice.basis(j))).collect())
                .collect();
            let rep = verify_epsilon(&setup.eps, &setup.lattice, 200, cli.seed);
            let eta = setup.eta(cli.seed)?;
            (
                json!({"labels": setup.lattice.labels, "epsilon": table, "eta_basis": eta.basis,
                       "trials": rep.trials, "failures": rep.failures, "pass": rep.pass()}),
                rep.pass(),
            )
        }
        Cmd::Constants { lambda, mu } => {
            let setup = load(cli)?;
            let jd = setup.jordan()?;
            let lam = setup.parse_vector(lambda)?;
            let mu = setup.parse_vector(mu)?;
            let (lv, mv) = (from_ivec(&lam), from_ivec(&mu));
            let tc = |v| {
                let t = structure::twist_constants(&jd, v);
                json!({"b": cpx(t.b), "a": t.a_poly.iter().map(|&z| cpx(z)).collect::<Vec<_>>(), "c": cpx(t.c)})
            };
            let pc = structure::pair_constants(&jd, &setup.lattice, &lam, &mu)?;
            let oracle = structure::b_oracle(&jd, &lv, &mv, 10_000);
            let res = rel_err(oracle, pc.b);
            let pass = res <= 1e-6;
            (
                json!({"lambda": {"coords": lam, "constants": tc(&lv)}, "mu": {"coords": mu, "constants": tc(&mv)},
                       "B": cpx(pc.b), "C": cpx(pc.c), "B_oracle_residual": res, "pass": pass}),
                pass,
            )
        }
        Cmd::GroupCheck => {
            let setup = load(cli)?;
            let ctx = GroupCtx::new(&setup, setup.jordan()?, cli.seed)?;
            let c = group_checks(&ctx, cli.seed, 100);
            (checks_report(&c), all_pass(&c))
        }
        Cmd::FockBuild => {
            let setup = load(cli)?;
            let fm = module(cli, &setup, setup.jordan()?)?;
            let hist: Vec<Value> = fm.weight_histogram().into_iter().map(|(w, n)| json!({"weight": w, "states": n})).collect();
            (json!({"cutoff": fm.config.cutoff, "basis_size": fm.basis.len(), "histogram": hist, "pass": true}), true)
        }
        Cmd::Vertexop { lambda, order } => {
            let setup = load(cli)?;
            let fm = module(cli, &setup, setup.jordan()?)?;
            let lam = setup.parse_vector(lambda)?;
            (vertex_table(&fm, &lam, *order)?, true)
        }
        Cmd::Verify { suite } => {
            let setup = load(cli)?;
            let c = suite_checks(cli, &setup, *suite)?;
            let mut v = checks_report(&c);
            v["constants"] = c_table(&setup, &setup.jordan()?)?;
            (v, all_pass(&c))
        }
    };
    if let Some(name) = &cli.input {
        body["input"] = json!(name);
    }
    body["seed"] = json!(cli.seed);
    body["environment"] = json!({"version": env!("CARGO_PKG_VERSION"), "threads": rayon::current_num_threads()});
    body["timing_ms"] = json!(t0.elapsed().as_millis() as u64);
    Ok((body, pass))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("TWISTLAT_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match run(&cli) {
        Ok((body, pass)) => {
            let text = serde_json::to_string_pretty(&body).expect("serializable report") + "\n";
            match &cli.out {
                Some(p) => {
                    if let Err(e) = std::fs::write(p, text) {
                        eprintln!("cannot write {}: {e}", p.display());
                        return ExitCode::FAILURE;
                    }
                }
                None => print!("{text}"),
            }
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("{}", json!({"error": e.name(), "message": e.to_string()}));
            ExitCode::FAILURE
        }
    }
}
