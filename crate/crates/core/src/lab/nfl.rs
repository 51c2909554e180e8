use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Criterion, ExperimentReport, LabError, Payload};
use crate::ea::rng::stream_rng;

/// All functions `X → Y` for `|X| ≤ 6`, `|Y| ≤ 3`.
///
/// Function `i` maps point `x` to digit `x` of `i` written in base `|Y|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NflProblem {
    domain: usize,
    codomain: usize,
}

impl NflProblem {
    pub fn new(domain: usize, codomain: usize) -> Result<Self, LabError> {
        if !(1..=6).contains(&domain) || !(1..=3).contains(&codomain) {
            return Err(LabError::Config(format!(
                "problem |X|={domain}, |Y|={codomain} outside 1 ≤ |X| ≤ 6, 1 ≤ |Y| ≤ 3"
            )));
        }
        Ok(Self { domain, codomain })
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn codomain(&self) -> usize {
        self.codomain
    }

    pub fn num_functions(&self) -> usize {
        self.codomain.pow(self.domain as u32)
    }

    pub fn function(&self, index: usize) -> Vec<u8> {
        let mut rest = index;
        (0..self.domain)
            .map(|_| {
                let v = rest % self.codomain;
                rest /= self.codomain;
                v as u8
            })
            .collect()
    }
}

/// A search procedure over `{0, …, domain-1}` that must propose a fresh
/// point every step.
pub trait SearchAlgorithm: Send + Sync {
    fn name(&self) -> String;
    fn next_point(&self, domain: usize, history: &[(usize, u8)]) -> usize;
}

fn unvisited(domain: usize, history: &[(usize, u8)]) -> impl Iterator<Item = usize> + '_ {
    (0..domain).filter(move |p| history.iter().all(|(q, _)| q != p))
}

struct Enumeration;

impl SearchAlgorithm for Enumeration {
    fn name(&self) -> String {
        "enumeration".into()
    }

    fn next_point(&self, domain: usize, history: &[(usize, u8)]) -> usize {
        unvisited(domain, history).next().unwrap_or(domain)
    }
}

struct RandomPermutation {
    seed: u64,
}

impl SearchAlgorithm for RandomPermutation {
    fn name(&self) -> String {
        format!("random-permutation:{}", self.seed)
    }

    fn next_point(&self, domain: usize, history: &[(usize, u8)]) -> usize {
        let mut order: Vec<usize> = (0..domain).collect();
        order.shuffle(&mut stream_rng(self.seed, 0));
        order[history.len().min(domain - 1)]
    }
}

/// Hill-climber on the cycle `0 → 1 → … → n-1 → 0`: steps to an unvisited
/// neighbour of the best point so far, else to the nearest unvisited point.
struct CycleClimber;

impl SearchAlgorithm for CycleClimber {
    fn name(&self) -> String {
        "cycle-climber".into()
    }

    fn next_point(&self, domain: usize, history: &[(usize, u8)]) -> usize {
        let Some(&(mut best, mut best_v)) = history.first() else {
            return 0;
        };
        for &(p, v) in history {
            if v > best_v {
                (best, best_v) = (p, v);
            }
        }
        let seen = |p: usize| history.iter().any(|(q, _)| *q == p);
        for d in 1..domain {
            for cand in [(best + d) % domain, (best + domain - d) % domain] {
                if !seen(cand) {
                    return cand;
                }
            }
        }
        domain
    }
}

/// Scans upward after a nonzero value and downward after a zero.
struct ValueSwitch;

impl SearchAlgorithm for ValueSwitch {
    fn name(&self) -> String {
        "value-switch".into()
    }

    fn next_point(&self, domain: usize, history: &[(usize, u8)]) -> usize {
        match history.last() {
            Some(&(_, 0)) => unvisited(domain, history).last().unwrap_or(domain),
            _ => unvisited(domain, history).next().unwrap_or(domain),
        }
    }
}

/// `enumeration`, `random-permutation:<seed>`, `cycle-climber`, `value-switch`.
pub fn named_algorithm(name: &str) -> Result<Arc<dyn SearchAlgorithm>, LabError> {
    match name {
        "enumeration" => Ok(Arc::new(Enumeration)),
        "cycle-climber" => Ok(Arc::new(CycleClimber)),
        "value-switch" => Ok(Arc::new(ValueSwitch)),
        _ => {
            let seed = name
                .strip_prefix("random-permutation:")
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| LabError::Config(format!("unknown search algorithm {name:?}")))?;
            Ok(Arc::new(RandomPermutation { seed }))
        }
    }
}

/// `counts[k-1][v]` is the number of functions whose best value after `k`
/// steps is `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerformanceVector {
    pub counts: Vec<Vec<u64>>,
}

/// Runs `alg` on every function of `problem`. A revisit is reported as an
/// error naming the first offending function.
pub fn performance_vector(
    problem: &NflProblem,
    alg: &dyn SearchAlgorithm,
) -> Result<PerformanceVector, String> {
    let n = problem.domain;
    let traces: Vec<Result<Vec<u8>, String>> = (0..problem.num_functions())
        .into_par_iter()
        .map(|idx| {
            let f = problem.function(idx);
            let mut history = Vec::with_capacity(n);
            let mut best = Vec::with_capacity(n);
            for step in 1..=n {
                let p = alg.next_point(n, &history);
                if p >= n || history.iter().any(|(q, _)| *q == p) {
                    return Err(format!(
                        "{} proposed point {p} at step {step} on function #{idx} after visiting {:?}",
                        alg.name(),
                        history.iter().map(|(q, _)| *q).collect::<Vec<_>>()
                    ));
                }
                history.push((p, f[p]));
                best.push(best.last().copied().unwrap_or(0).max(f[p]));
            }
            Ok(best)
        })
        .collect();
    let mut counts = vec![vec![0u64; problem.codomain]; n];
    for t in traces {
        for (k, v) in t?.into_iter().enumerate() {
            counts[k][v as usize] += 1;
        }
    }
    Ok(PerformanceVector { counts })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NflConfig {
    /// `[|X|, |Y|]` pairs.
    pub problems: Vec<[usize; 2]>,
    pub algorithms: Vec<String>,
    pub min_algorithms: usize,
}

impl Default for NflConfig {
    fn default() -> Self {
        Self {
            problems: vec![[4, 2], [5, 2]],
            algorithms: [
                "enumeration",
                "random-permutation:1",
                "random-permutation:2",
                "cycle-climber",
                "value-switch",
            ]
            .map(String::from)
            .to_vec(),
            min_algorithms: 3,
        }
    }
}

pub fn nfl_experiment(cfg: &NflConfig) -> Result<ExperimentReport, LabError> {
    let algs = cfg
        .algorithms
        .iter()
        .map(|a| named_algorithm(a))
        .collect::<Result<Vec<_>, _>>()?;
    let problems = cfg
        .problems
        .iter()
        .map(|&[x, y]| NflProblem::new(x, y))
        .collect::<Result<Vec<_>, _>>()?;
    nfl_compare(&problems, &algs, cfg.min_algorithms)
}

pub fn nfl_compare(
    problems: &[NflProblem],
    algs: &[Arc<dyn SearchAlgorithm>],
    min_algorithms: usize,
) -> Result<ExperimentReport, LabError> {
    if problems.is_empty() || algs.is_empty() {
        return Err(LabError::Config(
            "at least one problem and one algorithm are required".into(),
        ));
    }
    let mut payload = Payload::new(&[
        "domain",
        "codomain",
        "algorithm",
        "status",
        "step",
        "best_value",
        "count",
    ]);
    payload.param("min_algorithms", min_algorithms);
    let mut notes = Vec::new();
    for prob in problems {
        for alg in algs {
            let (x, y) = (prob.domain.to_string(), prob.codomain.to_string());
            match performance_vector(prob, alg.as_ref()) {
                Ok(pv) => {
                    for (k, hist) in pv.counts.iter().enumerate() {
                        for (v, c) in hist.iter().enumerate() {
                            payload.rows.push(vec![
                                x.clone(),
                                y.clone(),
                                alg.name(),
                                "ok".into(),
                                (k + 1).to_string(),
                                v.to_string(),
                                c.to_string(),
                            ]);
                        }
                    }
                }
                Err(diag) => {
                    notes.push(format!("disqualified: {diag}"));
                    payload.rows.push(vec![
                        x,
                        y,
                        alg.name(),
                        "disqualified".into(),
                        String::new(),
                        String::new(),
                        String::new(),
                    ]);
                }
            }
        }
    }
    let seeds = algs
        .iter()
        .filter_map(|a| {
            a.name()
                .strip_prefix("random-permutation:")
                .and_then(|s| s.parse().ok())
        })
        .collect();
    ExperimentReport::judged("nfl", seeds, payload, notes)
}

type Histogram = BTreeMap<(usize, usize), u64>;

pub(super) fn judge(p: &Payload) -> Result<Vec<Criterion>, LabError> {
    let [cx, cy, ca, cs, ck, cv, cc] = [
        "domain",
        "codomain",
        "algorithm",
        "status",
        "step",
        "best_value",
        "count",
    ]
    .map(|c| p.column(c));
    let (cx, cy, ca, cs, ck, cv, cc) = (cx?, cy?, ca?, cs?, ck?, cv?, cc?);
    let min_algorithms: usize = p.get("min_algorithms")?;

    let mut by_problem: BTreeMap<(usize, usize), BTreeMap<String, Option<Histogram>>> =
        BTreeMap::new();
    for row in &p.rows {
        let key = (p.cell(row, cx)?, p.cell(row, cy)?);
        let entry = by_problem.entry(key).or_default().entry(row[ca].clone());
        match row[cs].as_str() {
            "ok" => {
                let h = entry.or_insert_with(|| Some(Histogram::new()));
                if let Some(h) = h {
                    h.insert((p.cell(row, ck)?, p.cell(row, cv)?), p.cell(row, cc)?);
                }
            }
            "disqualified" => {
                entry.insert_entry(None);
            }
            other => return Err(LabError::Report(format!("unknown status {other}"))),
        }
    }

    let (mut identical, mut complete, mut enough) = (true, true, true);
    let mut details = Vec::new();
    for (&(x, y), algs) in &by_problem {
        let ok: Vec<(&String, &Histogram)> = algs
            .iter()
            .filter_map(|(n, h)| h.as_ref().map(|h| (n, h)))
            .collect();
        let functions = (y as u64).pow(x as u32);
        for (_, h) in &ok {
            for k in 1..=x {
                let total: u64 = h.range((k, 0)..(k + 1, 0)).map(|(_, c)| c).sum();
                complete &= total == functions;
            }
        }
        let same = ok.windows(2).all(|w| w[0].1 == w[1].1);
        identical &= same;
        enough &= ok.len() >= min_algorithms;
        details.push(format!(
            "|X|={x},|Y|={y}: {}/{} qualified, {}",
            ok.len(),
            algs.len(),
            if same { "identical" } else { "differ" }
        ));
    }
    let detail = details.join("; ");
    Ok(vec![
        Criterion::new("identical-performance", identical, detail.clone()),
        Criterion::new(
            "complete-enumeration",
            complete,
            "every step histogram covers all functions",
        ),
        Criterion::new(
            "qualified-algorithms",
            enough,
            format!("at least {min_algorithms} per problem; {detail}"),
        ),
    ])
}
