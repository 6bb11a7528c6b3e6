use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use coefred::embedding::{assign_coefficients, chain_expand, Embedding, HardwareGraph};
use coefred::harness::{
    scaling_survey, select_chain_strength, survey_csv, SurveyInstance, SweepJob,
};
use coefred::io::{ising_to_json, read_model, write_qubo_text};
use coefred::model::AUX_BASE;
use coefred::problems::{mkp_check, mkp_parse, qap_check, qap_parse};
use coefred::reduction::{bce_encode, iem_reduce, perturbed_penalty, Domain, LinearConstraint};
use coefred::sampling::{ExactSampler, NoiseDistribution, NoiseModel, NoisySampler, SimulatedAnnealer};
use coefred::{AcceptRanges, Error, Sampler, SampleSet, Var};
use serde::Deserialize;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "coefred", version, about = "Coefficient reduction and noisy-annealer experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply a coefficient-reduction method.
    Reduce {
        #[command(subcommand)]
        method: Reduce,
    },
    /// Embed a model and write the physical Ising JSON.
    Embed {
        model: PathBuf,
        #[arg(long)]
        chain_strength: f64,
        /// Embedding JSON; requires --hardware.
        #[arg(long, requires = "hardware")]
        embedding: Option<PathBuf>,
        #[arg(long)]
        hardware: Option<PathBuf>,
        /// Generate a synthetic chain embedding instead of reading one.
        #[arg(long, conflicts_with = "embedding")]
        chain_length: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Sample a model and write the sample-set CSV.
    Sample {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = SamplerKind::Sa)]
        sampler: SamplerKind,
        #[arg(long, default_value_t = 100)]
        reads: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        sweeps: u32,
        #[arg(long)]
        beta_start: Option<f64>,
        #[arg(long)]
        beta_end: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        temperature: f64,
        /// Relative control-error level; enables rescale-plus-noise.
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long, default_value_t = 0)]
        noise_seed: u64,
        #[arg(long)]
        uniform_noise: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run a chain-strength sweep from a JSON config and write the results CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Scaling factors before and after embedding for a list of models.
    Survey {
        models: Vec<PathBuf>,
        /// Use a synthetic chain embedding instead of the Pegasus estimate.
        #[arg(long, requires = "chain_strength")]
        chain_length: Option<usize>,
        #[arg(long)]
        chain_strength: Option<f64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Feasibility and objective of each sample against a problem instance.
    Check {
        #[arg(long, value_enum)]
        kind: ProblemKind,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        samples: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Reduce {
    /// Interaction extension: split couplings above the bound.
    Iem {
        model: PathBuf,
        #[arg(long)]
        bound: f64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Bounded-coefficient encoding of an integer range.
    Bce {
        #[arg(long, allow_hyphen_values = true)]
        lower: i64,
        #[arg(long, allow_hyphen_values = true)]
        upper: i64,
        #[arg(long)]
        mu: i64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Perturbed penalty of a linear constraint, as QUBO text.
    Alm {
        /// JSON `{"terms": [[var, coef], ...], "constant": c, "domain": "binary"|"spin"}`
        /// for `g = sum coef * var - c`.
        #[arg(long)]
        constraint: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        eps: f64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplerKind {
    Exact,
    Sa,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemKind {
    Mkp,
    Qap,
}

#[derive(Deserialize)]
struct ConstraintFile {
    terms: Vec<(u64, f64)>,
    constant: f64,
    #[serde(default = "binary")]
    domain: Domain,
}

fn binary() -> Domain {
    Domain::Binary
}

/// Failure classes mapped to exit codes.
enum Failure {
    Input(anyhow::Error),
    Infeasible(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<Error>() {
            Some(Error::NoPlateau { .. }) => Failure::Infeasible(e),
            _ => Failure::Input(e),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn reduce(method: Reduce) -> Result<(), Failure> {
    match method {
        Reduce::Iem { model, bound, out } => {
            let m = read_model(&read(&model)?)?;
            let r = iem_reduce(&m, bound)?;
            emit(out.as_deref(), &(r.to_json()? + "\n"))?;
        }
        Reduce::Bce { lower, upper, mu, out } => {
            let enc = bce_encode(lower, upper, mu)?;
            let json = serde_json::to_string_pretty(&enc).map_err(Error::from)?;
            emit(out.as_deref(), &(json + "\n"))?;
        }
        Reduce::Alm { constraint, lambda, eps, out } => {
            let c: ConstraintFile = serde_json::from_str(&read(&constraint)?).map_err(Error::from)?;
            let g = LinearConstraint::new(c.terms.into_iter().map(|(v, b)| (Var(v), b)), c.constant, c.domain)?;
            let q = perturbed_penalty(&g, lambda, eps)?;
            emit(out.as_deref(), &write_qubo_text(&q))?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn embed(
    model: &Path,
    chain_strength: f64,
    embedding: Option<PathBuf>,
    hardware: Option<PathBuf>,
    chain_length: Option<usize>,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let logical = read_model(&read(model)?)?;
    let (hw, emb) = match (embedding, hardware, chain_length) {
        (Some(e), Some(h), _) => (
            HardwareGraph::from_json(&read(&h)?)?,
            Embedding::from_json(&read(&e)?)?,
        ),
        (None, _, Some(len)) => chain_expand(&logical, len, seed)?,
        _ => {
            return Err(Failure::Input(anyhow::anyhow!(
                "give either --embedding with --hardware, or --chain-length"
            )))
        }
    };
    let embedded = assign_coefficients(&logical, &emb, &hw, chain_strength)?;
    emit(out, &(ising_to_json(&embedded.physical)? + "\n"))?;
    Ok(())
}

/// Variables of a sample file for a problem with `n` decision bits: the bits
/// come first by id, anything after them is auxiliary.
fn problem_samples(text: &str, n: usize) -> anyhow::Result<SampleSet> {
    let width = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with("assignment"))
        .and_then(|l| l.split(',').next())
        .map_or(n, str::len);
    if width < n {
        anyhow::bail!("samples have {width} spins, the instance needs {n}");
    }
    let vars = (0..n as u64).map(Var).chain((0..(width - n) as u64).map(|k| Var(AUX_BASE + k)));
    Ok(SampleSet::from_csv(vars.collect(), text)?)
}

fn check(kind: ProblemKind, instance: &Path, samples: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let text = read(instance)?;
    let sample_text = read(samples)?;
    let mut csv = String::from("index,feasible,objective,occurrences\n");
    let rows: Vec<(bool, f64, u64)> = match kind {
        ProblemKind::Mkp => {
            let inst = mkp_parse(&text)?;
            let s = problem_samples(&sample_text, inst.n)?;
            (0..s.len())
                .map(|i| {
                    let c = mkp_check(&inst, &inst.item_bits(&s.assignment(i))?)?;
                    Ok((c.feasible, c.objective, s.records()[i].occurrences))
                })
                .collect::<coefred::Result<_>>()?
        }
        ProblemKind::Qap => {
            let inst = qap_parse(&text)?;
            let s = problem_samples(&sample_text, inst.n * inst.n)?;
            (0..s.len())
                .map(|i| {
                    let c = qap_check(&inst, &inst.bits_from(&s.assignment(i))?)?;
                    Ok((c.feasible, c.objective, s.records()[i].occurrences))
                })
                .collect::<coefred::Result<_>>()?
        }
    };
    for (i, (feasible, objective, occ)) in rows.into_iter().enumerate() {
        let _ = writeln!(csv, "{i},{feasible},{objective},{occ}");
    }
    emit(out, &csv)?;
    Ok(())
}

fn sweep(config: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let job = SweepJob::from_json(&read(config)?)?;
    let base = config.parent().unwrap_or(Path::new("."));
    let report = job.run(base)?;
    for f in &report.outcome.failures {
        eprintln!("cell skipped (seed {}): {}", f.embedding_seed, f.message);
    }
    emit(out, &report.csv)?;
    if job.config.plateau_threshold.is_some() || !report.outcome.pooled.is_empty() {
        let chosen = select_chain_strength(&report.outcome.pooled, job.config.selection_rule())?;
        eprintln!("selected chain strength: {chosen}");
    }
    Ok(())
}

fn survey(models: &[PathBuf], chain_length: Option<usize>, chain_strength: Option<f64>, out: Option<&Path>) -> Result<(), Failure> {
    let mut instances = Vec::new();
    for path in models {
        let model = read_model(&read(path)?)?;
        let embedded = match (chain_length, chain_strength) {
            (Some(len), Some(cs)) => {
                let (hw, emb) = chain_expand(&model, len, 0)?;
                Some(assign_coefficients(&model, &emb, &hw, cs)?)
            }
            _ => None,
        };
        let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        instances.push(SurveyInstance { name, model, embedded });
    }
    let rows = scaling_survey(&instances, &AcceptRanges::dwave())?;
    emit(out, &survey_csv(&rows))?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Reduce { method } => reduce(method),
        Command::Embed {
            model,
            chain_strength,
            embedding,
            hardware,
            chain_length,
            seed,
            out,
        } => embed(&model, chain_strength, embedding, hardware, chain_length, seed, out.as_deref()),
        Command::Sample {
            model,
            sampler,
            reads,
            seed,
            sweeps,
            beta_start,
            beta_end,
            temperature,
            noise,
            noise_seed,
            uniform_noise,
            out,
        } => {
            let m = read_model(&read(&model)?)?;
            let inner: Box<dyn Sampler> = match sampler {
                SamplerKind::Exact => Box::new(ExactSampler { temperature }),
                SamplerKind::Sa => {
                    let mut sa = SimulatedAnnealer::auto(sweeps);
                    if let (Some(b0), Some(b1)) = (beta_start, beta_end) {
                        sa.schedule = coefred::sampling::BetaSchedule::Geometric {
                            beta_start: b0,
                            beta_end: b1,
                        };
                    }
                    Box::new(sa)
                }
            };
            let samples = match noise {
                None => inner.sample(&m, reads, seed)?,
                Some(sigma) => {
                    let mut nm = NoiseModel::gaussian(sigma, noise_seed);
                    if uniform_noise {
                        nm.distribution = NoiseDistribution::Uniform;
                    }
                    NoisySampler::new(AcceptRanges::dwave(), nm, inner).sample(&m, reads, seed)?
                }
            };
            emit(out.as_deref(), &samples.to_csv())?;
            Ok(())
        }
        Command::Sweep { config, out } => sweep(&config, out.as_deref()),
        Command::Survey {
            models,
            chain_length,
            chain_strength,
            out,
        } => survey(&models, chain_length, chain_strength, out.as_deref()),
        Command::Check {
            kind,
            instance,
            samples,
            out,
        } => check(kind, &instance, &samples, out.as_deref()),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
fn execute<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            2
        }
        Err(Failure::Infeasible(e)) => {
            eprintln!("error: {e:#}");
            3
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(execute(std::env::args_os()))
}

#[cfg(test)]
mod tests {
    use super::execute;
    use std::fs;
    use std::path::PathBuf;
    use tempfile::TempDir;

    const TRIVIAL: &str = r#"{"h": {}, "J": [[0, 1, 8.0], [1, 2, 1.0]], "offset": 0}"#;

    struct Dir(TempDir);

    impl Dir {
        fn new() -> Self {
            Dir(tempfile::tempdir().unwrap())
        }

        fn path(&self, name: &str) -> String {
            self.0.path().join(name).display().to_string()
        }

        fn write(&self, name: &str, text: &str) -> String {
            fs::write(self.path(name), text).unwrap();
            self.path(name)
        }

        fn read(&self, name: &str) -> String {
            fs::read_to_string(self.path(name)).unwrap()
        }
    }

    fn run(args: &[&str]) -> u8 {
        execute(std::iter::once("coefred").chain(args.iter().copied()))
    }

    fn fixture(name: &str) -> String {
        PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("../core/fixtures")
            .join(name)
            .display()
            .to_string()
    }

    #[test]
    fn usage_errors_exit_1() {
        assert_eq!(run(&["frobnicate"]), 1);
        assert_eq!(run(&["reduce", "iem"]), 1);
        assert_eq!(run(&["--version"]), 0);
    }

    #[test]
    fn bad_input_exits_2() {
        let d = Dir::new();
        let bad = d.write("bad.txt", "2 1\n1 x 3\n");
        assert_eq!(run(&["reduce", "iem", &bad, "--bound", "1"]), 2);
        assert_eq!(run(&["sample", &d.path("missing.json")]), 2);
        assert_eq!(run(&["reduce", "bce", "--lower", "0", "--upper", "5", "--mu", "9"]), 2);
    }

    #[test]
    fn reduce_iem_writes_aux_section() {
        let d = Dir::new();
        let m = d.write("m.json", TRIVIAL);
        assert_eq!(run(&["reduce", "iem", &m, "--bound", "2", "-o", &d.path("r.json")]), 0);
        let v: serde_json::Value = serde_json::from_str(&d.read("r.json")).unwrap();
        // |8| / 2 needs 3 extra spins, |1| none
        assert_eq!(v["aux"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn reduce_bce_and_alm() {
        let d = Dir::new();
        let enc = d.path("enc.json");
        assert_eq!(run(&["reduce", "bce", "--lower", "0", "--upper", "191", "--mu", "64", "-o", &enc]), 0);
        let v: serde_json::Value = serde_json::from_str(&d.read("enc.json")).unwrap();
        assert_eq!(v["coefficients"], serde_json::json!([1, 2, 4, 8, 16, 32, 64, 64]));

        let g = d.write("g.json", r#"{"terms": [[0, 1], [1, 1], [2, 1]], "constant": 1}"#);
        let q = d.path("q.txt");
        assert_eq!(run(&["reduce", "alm", "--constraint", &g, "--lambda", "1", "--eps", "0.25", "-o", &q]), 0);
        // (x0 + x1 + x2 - 1)^2 - 0.5 (x0 + x1 + x2 - 1) with x^2 = x
        let text = d.read("q.txt");
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body, ["3 6", "1 1 -1.5", "1 2 2", "1 3 2", "2 2 -1.5", "2 3 2", "3 3 -1.5"]);
        assert!(text.contains("offset 1.5"));
    }

    #[test]
    fn embed_and_sample() {
        let d = Dir::new();
        let m = d.write("m.json", TRIVIAL);
        let p = d.path("p.json");
        assert_eq!(run(&["embed", &m, "--chain-strength", "16", "--chain-length", "2", "-o", &p]), 0);
        let v: serde_json::Value = serde_json::from_str(&d.read("p.json")).unwrap();
        // two logical couplings plus one intra-chain edge per variable
        assert_eq!(v["J"].as_array().unwrap().len(), 5);

        let s = d.path("s.csv");
        assert_eq!(run(&["sample", &m, "--sampler", "exact", "--reads", "10", "--seed", "3", "-o", &s]), 0);
        let csv = d.read("s.csv");
        assert!(csv.starts_with("assignment,energy,occurrences,chain_broken\n"));
        assert!(csv.lines().skip(1).all(|l| l.starts_with("+-+,") || l.starts_with("-+-,")), "{csv}");
    }

    #[test]
    fn check_qap_samples() {
        let d = Dir::new();
        let identity: String = (0..25).map(|k| if k / 5 == k % 5 { '+' } else { '-' }).collect();
        let samples = d.write(
            "s.csv",
            &format!("assignment,energy,occurrences,chain_broken\n{identity},0,2,false\n{},0,1,false\n", "-".repeat(25)),
        );
        let out = d.path("c.csv");
        assert_eq!(run(&["check", "--kind", "qap", "--instance", &fixture("nug5.dat"), "--samples", &samples, "-o", &out]), 0);
        let text = d.read("c.csv");
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows[0], "index,feasible,objective,occurrences");
        assert!(rows[1].starts_with("0,true,") && rows[1].ends_with(",2"), "{text}");
        assert!(rows[2].starts_with("1,false,"), "{text}");
    }

    #[test]
    fn survey_lists_every_model() {
        let d = Dir::new();
        let a = d.write("a.json", TRIVIAL);
        let b = d.write("b.txt", "2 3\n1 1 -6\n2 2 4\n1 2 3\n");
        assert_eq!(run(&["survey", &a, &b, "-o", &d.path("out.csv")]), 0);
        let text = d.read("out.csv");
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(1).unwrap().starts_with("a,"), "{text}");
    }

    #[test]
    fn missing_plateau_exits_3() {
        let d = Dir::new();
        let cfg = d.write(
            "cfg.json",
            &format!(
                r#"{{"instance": "w", "model": {{"kind": "mkp", "path": "{}", "lambda": 2, "mu": 512}},
  "embedding": {{"kind": "chain_expand", "chain_length": 1}},
  "chain_strength_grid": [1], "embedding_seeds": [0], "reads_per_cell": 2,
  "sampler": {{"inner": {{"kind": "sa", "sweeps": 5}}}}, "plateau_threshold": 1e12}}"#,
                fixture("weing1_like.mkp")
            ),
        );
        assert_eq!(run(&["sweep", "--config", &cfg, "-o", &d.path("r.csv")]), 3);
        assert!(d.read("r.csv").starts_with("instance,"));
    }
}
