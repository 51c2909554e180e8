use std::fs;
use std::path::Path;

use evoauto::automata::{parse_automaton, StepBudget};
use evoauto::ea::{ea_run, EaError};
use evoauto::efa::{
    make_anbn_efa, make_anbncn_efa, make_ep_mutated_efa, make_singleton_efa, named_enumerator,
    EfaError, EvolutionaryAutomaton, LevelBudget, LevelGenerator, TerminalVerdict,
};
use evoauto::lab::{
    convergence_experiment, es_rate_experiment, nfl_experiment, schema_experiment,
    ExperimentReport, LabError,
};

use crate::config::{digest, ep_alphabet, rejecting_cycle, EfaSpec, EpMutation, ExperimentConfig};
use crate::{Cli, CliError, Which};

fn load(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    match &cli.config {
        Some(path) => ExperimentConfig::load(path),
        None => Ok(ExperimentConfig::default()),
    }
}

fn efa_error(e: EfaError) -> CliError {
    match e {
        EfaError::Config(_) | EfaError::WrongClass { .. } | EfaError::AlphabetMismatch { .. } => {
            CliError::Usage(e.to_string())
        }
        other => CliError::Internal(other.to_string()),
    }
}

fn ea_error(e: EaError) -> CliError {
    match e {
        EaError::Config(_) => CliError::Usage(e.to_string()),
        other => CliError::Internal(other.to_string()),
    }
}

fn lab_error(e: LabError) -> CliError {
    match e {
        LabError::Config(_) | LabError::Input(_) => CliError::Usage(e.to_string()),
        LabError::Ea(inner) => ea_error(inner),
        other => CliError::Internal(other.to_string()),
    }
}

fn singleton(name: &str, enumerator: &str) -> Result<EvolutionaryAutomaton, CliError> {
    let (alphabet, en) = named_enumerator(enumerator)
        .ok_or_else(|| CliError::Usage(format!("unknown enumerator {enumerator:?}")))?;
    Ok(make_singleton_efa(name, alphabet, en, None))
}

fn ep_mutated(
    alphabet: &str,
    states: usize,
    seed: u64,
    mutation: EpMutation,
) -> Result<EvolutionaryAutomaton, CliError> {
    let initial = rejecting_cycle(&ep_alphabet(alphabet)?, states)?;
    make_ep_mutated_efa(seed, initial, mutation.into()).map_err(efa_error)
}

fn explicit(name: &str, files: &[String], base: &Path) -> Result<EvolutionaryAutomaton, CliError> {
    let levels = files
        .iter()
        .map(|f| {
            let path = base.join(f);
            let text = fs::read_to_string(&path).map_err(|e| {
                CliError::Usage(format!("cannot read level {}: {e}", path.display()))
            })?;
            parse_automaton(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let first = levels
        .first()
        .ok_or_else(|| CliError::Usage(format!("efa {name} lists no levels")))?;
    let (alphabet, class) = (first.input_alphabet().clone(), first.class());
    let generator = LevelGenerator::explicit(levels).map_err(efa_error)?;
    Ok(EvolutionaryAutomaton::new(name, alphabet, class, generator))
}

/// Config-defined automata shadow the built-ins of the same name.
fn resolve_efa(
    cfg: &ExperimentConfig,
    name: &str,
    seed: u64,
) -> Result<EvolutionaryAutomaton, CliError> {
    if let Some(spec) = cfg.efa.get(name) {
        return match spec {
            EfaSpec::Singleton { enumerator } => singleton(name, enumerator),
            EfaSpec::EpMutated {
                alphabet,
                states,
                seed: own,
                mutation,
            } => ep_mutated(alphabet, *states, own.unwrap_or(seed), *mutation),
            EfaSpec::Explicit { levels } => explicit(name, levels, &cfg.base_dir),
        };
    }
    match name {
        "anbn" => Ok(make_anbn_efa()),
        "anbncn" => Ok(make_anbncn_efa()),
        "ep-mutated" => ep_mutated("xy", 2, seed, EpMutation::default()),
        "unary" | "binary" | "empty" => singleton(name, name),
        other => Err(CliError::Usage(format!(
            "unknown automaton {other:?}; built-ins are anbn, anbncn, ep-mutated, unary, binary, empty"
        ))),
    }
}

pub fn accept(cli: &Cli, name: &str, word: &str) -> Result<u8, CliError> {
    let cfg = load(cli)?;
    let steps = StepBudget::new(cli.steps).map_err(|e| CliError::Usage(e.to_string()))?;
    let levels = LevelBudget::new(cli.levels).map_err(efa_error)?;
    let efa = resolve_efa(&cfg, name, cli.seed.unwrap_or(0))?.with_budget(steps);
    let word = efa
        .alphabet()
        .parse_word(word)
        .map_err(|e| CliError::Usage(format!("malformed word {word:?}: {e}")))?;
    Ok(
        match efa.terminal_accept(&word, levels).map_err(efa_error)? {
            TerminalVerdict::Accepted { level, .. } => {
                println!("ACCEPTED level={level}");
                0
            }
            TerminalVerdict::RejectedByCertificate => {
                println!("REJECTED");
                1
            }
            TerminalVerdict::Unknown {
                levels_explored, ..
            } => {
                println!("UNKNOWN levels={levels_explored}");
                2
            }
        },
    )
}

fn write_artifact(dir: &Path, file: &str, contents: &[u8]) -> Result<String, CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Internal(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(file);
    fs::write(&path, contents)
        .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))?;
    Ok(path.display().to_string())
}

pub fn run(cli: &Cli) -> Result<u8, CliError> {
    if cli.config.is_none() {
        return Err(CliError::Usage(
            "run requires --config with an [ea_run] section".into(),
        ));
    }
    let cfg = load(cli)?;
    let mut run_cfg = cfg
        .ea_run
        .ok_or_else(|| CliError::Usage("config has no [ea_run] section".into()))?;
    if let Some(seed) = cli.seed {
        run_cfg.seed = seed;
    }
    let config_digest = digest(&run_cfg);
    let alg = run_cfg.algorithm()?;
    let trace = ea_run(&alg).map_err(ea_error)?;

    let mut csv = Vec::new();
    let preamble = [
        format!("config_digest={config_digest}"),
        format!("seed={}", run_cfg.seed),
    ];
    trace.write_csv(&mut csv, &preamble).map_err(ea_error)?;
    let path = write_artifact(&cli.out, &run_cfg.output, &csv)?;

    println!("BEST_FITNESS={}", trace.best_fitness());
    println!("STOP_REASON={}", trace.stop_reason);
    println!("GENERATIONS={}", trace.final_population.generation());
    println!("CONFIG_DIGEST={config_digest}");
    println!("SEED={}", run_cfg.seed);
    println!("TRACE={path}");
    Ok(0)
}

fn experiment(
    cfg: &ExperimentConfig,
    which: Which,
    seed: Option<u64>,
) -> Result<ExperimentReport, CliError> {
    let report = match which {
        Which::Convergence => {
            let mut c = cfg.convergence.clone();
            c.first_seed = seed.unwrap_or(c.first_seed);
            convergence_experiment(&c).map(|r| r.with_digest(digest(&c)))
        }
        Which::Nfl => nfl_experiment(&cfg.nfl).map(|r| r.with_digest(digest(&cfg.nfl))),
        Which::Schema => {
            let mut c = cfg.schema.clone();
            c.seed = seed.unwrap_or(c.seed);
            schema_experiment(&c).map(|r| r.with_digest(digest(&c)))
        }
        Which::Esrate => {
            let mut c = cfg.esrate.clone();
            c.first_seed = seed.unwrap_or(c.first_seed);
            es_rate_experiment(&c).map(|r| r.with_digest(digest(&c)))
        }
        Which::All => unreachable!("expanded by the caller"),
    };
    report.map_err(lab_error)
}

pub fn verify(cli: &Cli, which: Which) -> Result<u8, CliError> {
    let cfg = load(cli)?;
    let selected = match which {
        Which::All => vec![Which::Convergence, Which::Nfl, Which::Schema, Which::Esrate],
        one => vec![one],
    };
    let mut all_pass = true;
    for w in selected {
        let report = experiment(&cfg, w, cli.seed)?;
        let path = write_artifact(
            &cli.out,
            &format!("{}_report.csv", report.name),
            report.to_csv().as_bytes(),
        )?;
        let criteria: Vec<String> = report
            .criteria
            .iter()
            .map(|c| format!("{}:{}", c.name, if c.passed { "PASS" } else { "FAIL" }))
            .collect();
        println!(
            "{} experiment={} criteria={} digest={} report={path}",
            if report.passed() { "PASS" } else { "FAIL" },
            report.name,
            criteria.join(","),
            report.config_digest
        );
        for c in report.criteria.iter().filter(|c| !c.passed) {
            eprintln!("{}: {} failed: {}", report.name, c.name, c.detail);
        }
        all_pass &= report.passed();
    }
    Ok(if all_pass { 0 } else { 1 })
}
