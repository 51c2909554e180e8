use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Criterion, ExperimentReport, LabError, Payload};
use crate::ea::rng::stream_rng;
use crate::ea::{
    FitnessFunction, Genome, Individual, Representation, SelectionKind, SelectionOperator,
    VariationOperator,
};

/// A bitstring schema over `{0, 1, #}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaSpec {
    fixed: Vec<Option<bool>>,
}

impl FromStr for SchemaSpec {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, LabError> {
        if s.is_empty() {
            return Err(LabError::Input("empty schema".into()));
        }
        let fixed = s
            .chars()
            .map(|c| match c {
                '0' => Ok(Some(false)),
                '1' => Ok(Some(true)),
                '#' => Ok(None),
                other => Err(LabError::Input(format!(
                    "schema symbol {other:?} is not 0, 1 or #"
                ))),
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { fixed })
    }
}

impl fmt::Display for SchemaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.fixed {
            f.write_str(match p {
                Some(true) => "1",
                Some(false) => "0",
                None => "#",
            })?;
        }
        Ok(())
    }
}

impl SchemaSpec {
    pub fn len(&self) -> usize {
        self.fixed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixed.is_empty()
    }

    pub fn order(&self) -> usize {
        self.fixed.iter().filter(|p| p.is_some()).count()
    }

    pub fn defining_length(&self) -> usize {
        let first = self.fixed.iter().position(Option::is_some);
        let last = self.fixed.iter().rposition(Option::is_some);
        match (first, last) {
            (Some(a), Some(b)) => b - a,
            _ => 0,
        }
    }

    pub fn matches(&self, bits: &[bool]) -> bool {
        bits.len() == self.fixed.len()
            && self
                .fixed
                .iter()
                .zip(bits)
                .all(|(p, b)| p.is_none_or(|v| v == *b))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemaConfig {
    pub length: usize,
    pub population: usize,
    pub schema: String,
    pub pc: f64,
    pub pm: f64,
    pub transitions: usize,
    pub seed: u64,
    /// Also run the `pc = pm = 0` case against the selection-only term.
    pub selection_only_check: bool,
}

impl Default for SchemaConfig {
    fn default() -> Self {
        Self {
            length: 10,
            population: 200,
            schema: "1#########".into(),
            pc: 0.6,
            pm: 0.01,
            transitions: 1000,
            seed: 1,
            selection_only_check: true,
        }
    }
}

/// Holland's lower bound on `E[m(H, t+1)]` for the canonical GA.
fn holland_bound(
    m: f64,
    fbar_h: f64,
    fbar: f64,
    (pc, pm): (f64, f64),
    n: usize,
    order: usize,
    delta: usize,
) -> f64 {
    let disruption = if n > 1 {
        pc * delta as f64 / (n - 1) as f64
    } else {
        0.0
    };
    let selection = if fbar > 0.0 { m * fbar_h / fbar } else { m };
    selection * (1.0 - disruption) * (1.0 - pm).powi(order as i32)
}

struct Case {
    label: &'static str,
    pc: f64,
    pm: f64,
    stream_base: u64,
}

fn transition(
    cfg: &SchemaConfig,
    schema: &SchemaSpec,
    start: &[Individual],
    case: &Case,
    j: u64,
) -> Result<usize, LabError> {
    let base = case.stream_base + 3 * j;
    let selection = SelectionOperator::new(SelectionKind::Proportional, false);
    let picked = selection.select(start, cfg.population, &mut stream_rng(cfg.seed, base))?;
    let variation = VariationOperator::Composite(vec![
        VariationOperator::OnePointCrossover { pc: case.pc },
        VariationOperator::BitFlip { p: case.pm },
    ]);
    let mut rngs = [
        stream_rng(cfg.seed, base + 1),
        stream_rng(cfg.seed, base + 2),
    ];
    let next = variation.apply(picked.into_iter().map(|i| i.genome).collect(), &mut rngs)?;
    Ok(next
        .iter()
        .filter(|g| g.as_bits().is_some_and(|b| schema.matches(b)))
        .count())
}

/// Estimates `E[m(H, t+1)]` from a fixed random `X[t]` by Monte Carlo over
/// independent one-generation transitions and compares it with Holland's
/// bound.
pub fn schema_experiment(cfg: &SchemaConfig) -> Result<ExperimentReport, LabError> {
    let schema: SchemaSpec = cfg.schema.parse()?;
    if schema.len() != cfg.length {
        return Err(LabError::Input(format!(
            "schema {} has length {} but genomes have length {}",
            cfg.schema,
            schema.len(),
            cfg.length
        )));
    }
    if cfg.population == 0 || cfg.transitions < 2 {
        return Err(LabError::Config(
            "population must be positive and transitions at least 2".into(),
        ));
    }
    for (name, p) in [("pc", cfg.pc), ("pm", cfg.pm)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(LabError::Config(format!(
                "{name} = {p} is not a probability"
            )));
        }
    }

    let fitness = FitnessFunction::onemax(cfg.length);
    let repr = Representation::BitString { length: cfg.length };
    let mut init = stream_rng(cfg.seed, 0);
    let start = (0..cfg.population)
        .map(|_| {
            let genome: Genome = repr.random(&mut init);
            let fitness = fitness.evaluate(&genome)?;
            Ok(Individual { genome, fitness })
        })
        .collect::<Result<Vec<_>, LabError>>()?;
    let in_h: Vec<&Individual> = start
        .iter()
        .filter(|i| i.genome.as_bits().is_some_and(|b| schema.matches(b)))
        .collect();
    let m = in_h.len();
    let fbar = start.iter().map(|i| i.fitness).sum::<f64>() / start.len() as f64;
    let fbar_h = if m == 0 {
        0.0
    } else {
        in_h.iter().map(|i| i.fitness).sum::<f64>() / m as f64
    };

    let mut cases = vec![Case {
        label: "full",
        pc: cfg.pc,
        pm: cfg.pm,
        stream_base: 1,
    }];
    if cfg.selection_only_check {
        let base = 1 + 3 * cfg.transitions as u64;
        cases.push(Case {
            label: "selection-only",
            pc: 0.0,
            pm: 0.0,
            stream_base: base,
        });
    }

    let mut payload = Payload::new(&["case", "transition", "m_next"]);
    payload.param("schema", &schema);
    payload.param("length", cfg.length);
    payload.param("order", schema.order());
    payload.param("defining_length", schema.defining_length());
    payload.param("m", m);
    payload.param("fbar_h", fbar_h);
    payload.param("fbar", fbar);
    payload.param("pc", cfg.pc);
    payload.param("pm", cfg.pm);
    for case in &cases {
        let counts = (0..cfg.transitions as u64)
            .into_par_iter()
            .map(|j| transition(cfg, &schema, &start, case, j))
            .collect::<Result<Vec<_>, _>>()?;
        for (j, c) in counts.into_iter().enumerate() {
            payload
                .rows
                .push(vec![case.label.into(), j.to_string(), c.to_string()]);
        }
    }
    let mut notes = Vec::new();
    if schema.order() == 0 {
        notes.push("all-# schema: every individual is an instance".into());
    }
    if m == 0 {
        notes.push("no instance of the schema in X[t]; the bound is 0".into());
    }
    ExperimentReport::judged("schema", vec![cfg.seed], payload, notes)
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub(super) fn judge(p: &Payload) -> Result<Vec<Criterion>, LabError> {
    let (cc, cm) = (p.column("case")?, p.column("m_next")?);
    let (n, order, delta, m): (usize, usize, usize, usize) = (
        p.get("length")?,
        p.get("order")?,
        p.get("defining_length")?,
        p.get("m")?,
    );
    let (fbar_h, fbar, pc, pm): (f64, f64, f64, f64) =
        (p.get("fbar_h")?, p.get("fbar")?, p.get("pc")?, p.get("pm")?);
    let samples = |label: &str| -> Result<Vec<f64>, LabError> {
        p.rows
            .iter()
            .filter(|r| r[cc] == label)
            .map(|r| p.cell::<f64>(r, cm))
            .collect()
    };

    let mut out = Vec::new();
    let full = samples("full")?;
    if full.len() < 2 {
        return Err(LabError::Report(
            "schema report needs at least two transitions".into(),
        ));
    }
    let bound = holland_bound(m as f64, fbar_h, fbar, (pc, pm), n, order, delta);
    let (mean, se) = mean_se(&full);
    out.push(Criterion::new(
        "holland-lower-bound",
        mean >= bound - 3.0 * se,
        format!(
            "mean {mean:.4} vs bound {bound:.4} (SE {se:.4}, M={})",
            full.len()
        ),
    ));

    let sel = samples("selection-only")?;
    if sel.len() >= 2 {
        let expected = holland_bound(m as f64, fbar_h, fbar, (0.0, 0.0), n, order, delta);
        let (mean, se) = mean_se(&sel);
        out.push(Criterion::new(
            "selection-only-match",
            (mean - expected).abs() <= 3.0 * se,
            format!("mean {mean:.4} vs m·f̄(H)/f̄ {expected:.4} (SE {se:.4})"),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::verdicts_from_csv;

    #[test]
    fn schema_statistics() {
        let h: SchemaSpec = "#1#0##".parse().unwrap();
        assert_eq!((h.order(), h.defining_length(), h.len()), (2, 2, 6));
        let all: SchemaSpec = "####".parse().unwrap();
        assert_eq!((all.order(), all.defining_length()), (0, 0));
        let ends: SchemaSpec = "1##0".parse().unwrap();
        assert_eq!(ends.defining_length(), 3);
        assert!(ends.matches(&[true, false, true, false]));
        assert!(!ends.matches(&[false, false, true, false]));
        assert!("1x#".parse::<SchemaSpec>().is_err());
        assert_eq!(h.to_string(), "#1#0##");
    }

    #[test]
    fn bound_formula() {
        // 10 instances at twice the mean fitness, δ=3 of n-1=9, order 2
        let b = holland_bound(10.0, 4.0, 2.0, (0.6, 0.1), 10, 2, 3);
        assert!((b - 20.0 * 0.8 * 0.81).abs() < 1e-12);
    }

    fn small() -> SchemaConfig {
        SchemaConfig {
            length: 6,
            population: 40,
            schema: "1##0##".into(),
            transitions: 200,
            ..Default::default()
        }
    }

    #[test]
    fn small_instance_passes_and_rejudges() {
        let r = schema_experiment(&small()).unwrap();
        assert!(r.passed(), "{:?}", r.criteria);
        assert_eq!(r.criteria.len(), 2);
        assert_eq!(verdicts_from_csv(&r.to_csv()).unwrap(), r.criteria);
    }

    #[test]
    fn all_hash_schema_always_holds_everyone() {
        let cfg = SchemaConfig {
            schema: "######".into(),
            ..small()
        };
        let r = schema_experiment(&cfg).unwrap();
        assert!(r.passed());
        assert!(r.payload.rows.iter().all(|row| row[2] == "40"));
    }

    #[test]
    fn length_mismatch_is_input_error() {
        let cfg = SchemaConfig {
            schema: "1#######".into(),
            ..small()
        };
        assert!(matches!(schema_experiment(&cfg), Err(LabError::Input(_))));
    }
}
