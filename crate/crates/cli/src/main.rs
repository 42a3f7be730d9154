mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use egdeg::degree::kronecker_degree;
use egdeg::factory::CatalogMap;
use egdeg::linalg::{to_vec, Vector};
use egdeg::numerics::with_pool;
use egdeg::perturbation::verify_partition;
use egdeg::quotient_degree::stratum_degrees;
use egdeg::theta::{first_perturbation, theta};
use egdeg::verify::{results_json, run_suite, Suite};
use serde_json::{json, Value};

use config::{Invalid, Problem, RunConfig, SCHEMA};

/// Equivariant gradient degree of local maps under finite orthogonal groups.
#[derive(Parser)]
#[command(name = "egdeg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Orbit types of Ω and the components and quotient labels of each stratum.
    Strata { config: PathBuf },
    /// The invariant Θ of the configured map, with the recursion trace.
    Theta { config: PathBuf },
    /// Intersection numbers per stratum component, and the degree on a box.
    Degree { config: PathBuf },
    /// Tubes, radii and partition statistics of the perturbation layers.
    PerturbTrace { config: PathBuf },
    /// Runs an acceptance suite.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
        /// Where to write the machine-readable results.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Config whose numerics block overrides the defaults.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    All,
    Axioms,
    Degree,
    Partition,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::All => Suite::All,
            SuiteArg::Axioms => Suite::Axioms,
            SuiteArg::Degree => Suite::Degree,
            SuiteArg::Partition => Suite::Partition,
        }
    }
}

enum Failure {
    Invalid(String),
    Numerics(String),
    Verify,
}

impl From<Invalid> for Failure {
    fn from(e: Invalid) -> Self {
        Failure::Invalid(e.0)
    }
}

impl From<egdeg::Error> for Failure {
    fn from(e: egdeg::Error) -> Self {
        if e.is_numerics() {
            Failure::Numerics(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match with_pool(|| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("{}", json!({ "schema": SCHEMA, "error": "validation", "message": msg }));
            ExitCode::from(2)
        }
        Err(Failure::Numerics(msg)) => {
            eprintln!("{}", json!({ "schema": SCHEMA, "error": "numerics", "message": msg }));
            ExitCode::from(3)
        }
        Err(Failure::Verify) => ExitCode::from(4),
    }
}

fn load(path: &PathBuf) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    Ok(RunConfig::parse(&text)?)
}

fn emit(cfg: &RunConfig, mut report: Value) -> Result<(), Failure> {
    report["schema"] = json!(SCHEMA);
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    match &cfg.output {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| Failure::Invalid(format!("{p}: {e}"))),
        None => {
            // a closed pipe is not an error of ours
            let _ = writeln!(std::io::stdout(), "{text}");
            Ok(())
        }
    }
}

fn need_map(p: &Problem) -> Result<&egdeg::local_map::LocalGradientMap, Failure> {
    p.map.as_ref().ok_or_else(|| Failure::Invalid("config has no potential block".into()))
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Strata { config } => {
            let cfg = load(&config)?;
            let p = cfg.problem()?;
            emit(&cfg, strata_report(&p))
        }
        Command::Theta { config } => {
            let cfg = load(&config)?;
            let p = cfg.problem()?;
            let (mut t, trace) = theta(&p.setting, need_map(&p)?)?;
            let mut report = json!({});
            if let Some(entry) = &p.entry {
                // circle entries carry the labels of the circle action
                if matches!(entry.map, CatalogMap::Circle { .. }) {
                    t = entry.compute(&cfg.numerics)?;
                }
                report["catalog"] = json!({
                    "name": entry.name,
                    "expected": entry.expected,
                    "provenance": entry.provenance,
                    "matches": t == entry.expected,
                });
            }
            let tv = serde_json::to_value(&t).expect("theta serializes");
            report["theta11"] = tv["theta11"].clone();
            report["entries"] = tv["entries"].clone();
            report["trace"] = serde_json::to_value(&trace).expect("trace serializes");
            emit(&cfg, report)
        }
        Command::Degree { config } => {
            let cfg = load(&config)?;
            let p = cfg.problem()?;
            let f = need_map(&p)?;
            let num = &p.setting.num;
            let mut strata = Vec::new();
            for st in p.setting.strata.values() {
                let sd = stratum_degrees(f, st, num)?;
                let quotients: Vec<Value> = (0..st.quotients.len())
                    .map(|q| {
                        let value = sd.quotient_value(st, q)?;
                        Ok(json!({ "name": st.quotients[q].name, "stabilizer": st.quotients[q].stabilizer, "value": value }))
                    })
                    .collect::<Result<_, egdeg::Error>>()?;
                strata.push(json!({
                    "orbit_type": st.label,
                    "dim": st.dim(),
                    "component_degrees": sd.component_degrees,
                    "quotients": quotients,
                    "zeros": sd.zeros,
                    "unresolved": sd.unresolved.len(),
                    "boundary_min": sd.boundary_min,
                }));
            }
            let mut report = json!({ "strata": strata });
            if let Some(b) = &cfg.degree_box {
                if b.lo.len() != f.dim || b.hi.len() != f.dim || b.lo.iter().zip(&b.hi).any(|(l, h)| l >= h) {
                    return Err(Failure::Invalid("box: lo and hi must have the map's dimension with lo < hi".into()));
                }
                let nan = Vector::from_element(f.dim, f64::NAN);
                let deg = kronecker_degree(&|z: &Vector| f.grad(z).unwrap_or_else(|_| nan.clone()), &b.lo, &b.hi)?;
                report["box"] = json!({ "lo": b.lo, "hi": b.hi, "degree": deg });
            }
            emit(&cfg, report)
        }
        Command::PerturbTrace { config } => {
            let cfg = load(&config)?;
            let p = cfg.problem()?;
            let f = need_map(&p)?;
            let (_, trace) = theta(&p.setting, f)?;
            let mut report = json!({ "layers": trace.steps });
            if let Some(step) = first_perturbation(&p.setting, f)? {
                let stats = verify_partition(&step.family, p.setting.num.samples, &p.setting.num)?;
                report["first_layer"] = json!({
                    "step": step.step,
                    "orbit_type": step.tube.class_label,
                    "whole": step.tube.whole,
                    "centers": step.tube.centers().map(to_vec).collect::<Vec<_>>(),
                    "rho": step.tube.rho,
                    "eps": step.tube.eps,
                    "shell_margin": step.tube.margin,
                    "partition": stats,
                });
            }
            emit(&cfg, report)
        }
        Command::Verify { suite, out, config } => {
            let num = match &config {
                Some(c) => load(c)?.numerics,
                None => Default::default(),
            };
            let suite = Suite::from(suite);
            let results = run_suite(suite, &num, egdeg::numerics::workers());
            for r in &results {
                println!("{}", r.line());
                for f in &r.result.failures {
                    println!("    {f}");
                }
            }
            let text = results_json(suite, &results);
            if let Some(out) = out {
                std::fs::write(&out, text + "\n").map_err(|e| Failure::Invalid(format!("{}: {e}", out.display())))?;
            }
            if results.iter().all(|r| r.passed()) {
                Ok(())
            } else {
                Err(Failure::Verify)
            }
        }
    }
}

fn strata_report(p: &Problem) -> Value {
    let s = &p.setting;
    let types: Vec<Value> = s
        .iso
        .classes
        .iter()
        .zip(&s.iso.dims)
        .zip(&s.iso.witnesses)
        .enumerate()
        .map(|(i, ((&c, &d), w))| {
            json!({ "position": i, "orbit_type": s.lattice.label(c), "dim": d, "witness": to_vec(w) })
        })
        .collect();
    let strata: Vec<Value> = s
        .iso
        .classes
        .iter()
        .filter_map(|c| s.strata.get(c))
        .map(|st| {
            let components: Vec<Value> = st
                .components
                .iter()
                .enumerate()
                .map(|(i, c)| json!({ "index": i, "label": c.label, "quotient": st.quotient_name(st.component_quotient[i]) }))
                .collect();
            let quotients: Vec<Value> = st
                .quotients
                .iter()
                .map(|q| json!({ "name": q.name, "members": q.members, "stabilizer": q.stabilizer }))
                .collect();
            json!({ "orbit_type": st.label, "dim": st.dim(), "components": components, "quotients": quotients })
        })
        .collect();
    json!({
        "group_order": s.group.order(),
        "dim": s.dim(),
        "orbit_types": types,
        "strata": strata,
        "warnings": s.iso.warnings,
    })
}
