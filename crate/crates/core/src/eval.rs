//! Ranking metrics on the evaluation pool and dataset-level reports.
//!
//! The evaluation pool of an instance is every node not observed as
//! infected; positives are the asymptomatic nodes in it.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::epidemic::EpidemicInstance;
use crate::features::{compute_features, normalize_features, FeatureMatrix};
use crate::gcn::{forward, GcnInput, GcnModel, NormalizedAdjacency};
use crate::graph::observed_betweenness;
use crate::{Error, Result};

/// Share of the pool used by top-k precision.
pub const DEFAULT_TOP_FRACTION: f64 = 0.01;

/// Column index of observed betweenness in the raw feature matrix.
const OBSERVED_BETWEENNESS_COLUMN: usize = 7;

/// Mann–Whitney AUC over `pool`: the share of (positive, negative) pairs in
/// which the positive scores higher, ties counting one half. `None` when the
/// pool lacks either class.
pub fn auc(scores: &[f64], labels: &[f64], pool: &[usize]) -> Option<f64> {
    let mut ranked: Vec<usize> = pool.to_vec();
    ranked.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let positives = pool.iter().filter(|&&v| labels[v] > 0.5).count();
    let negatives = pool.len() - positives;
    if positives == 0 || negatives == 0 {
        return None;
    }
    // Sum of (1-based, tie-averaged) ranks of the positives, doubled to stay integral.
    let mut doubled_rank_sum: u64 = 0;
    let mut start = 0;
    while start < ranked.len() {
        let mut end = start + 1;
        while end < ranked.len() && scores[ranked[end]] == scores[ranked[start]] {
            end += 1;
        }
        let doubled_mid = (start + 1 + end) as u64;
        let group_pos = ranked[start..end].iter().filter(|&&v| labels[v] > 0.5).count() as u64;
        doubled_rank_sum += doubled_mid * group_pos;
        start = end;
    }
    let p = positives as u64;
    let doubled_u = doubled_rank_sum - p * (p + 1);
    Some(doubled_u as f64 / (2.0 * positives as f64 * negatives as f64))
}

/// Number of nodes top-k precision inspects: `fraction * pool` rounded half
/// away from zero, at least 1.
pub fn top_k_count(pool_size: usize, fraction: f64) -> usize {
    ((fraction * pool_size as f64).round() as usize).max(1)
}

/// Share of positives among the `k` highest-scoring pool nodes (ties broken
/// by ascending node id). Returns the precision and `k`.
pub fn top_k_precision(scores: &[f64], labels: &[f64], pool: &[usize], fraction: f64) -> Result<(f64, usize)> {
    if pool.is_empty() {
        return Err(Error::invalid("top-k precision over an empty pool"));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid(format!("top-k fraction {fraction} outside (0, 1]")));
    }
    let k = top_k_count(pool.len(), fraction).min(pool.len());
    let mut ranked: Vec<usize> = pool.to_vec();
    ranked.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let hits = ranked[..k].iter().filter(|&&v| labels[v] > 0.5).count();
    Ok((hits as f64 / k as f64, k))
}

/// Observed-betweenness ranking scores for an instance.
pub fn baseline_scores(inst: &EpidemicInstance) -> Vec<f64> {
    observed_betweenness(&inst.graph, &inst.observed).into_inner()
}

/// A way of scoring every node of an instance.
#[derive(Debug, Clone, Copy)]
pub enum Scorer<'a> {
    Baseline,
    Model(&'a GcnModel),
}

impl Scorer<'_> {
    pub fn default_name(&self) -> &'static str {
        match self {
            Scorer::Baseline => "observed_betweenness",
            Scorer::Model(_) => "gnn",
        }
    }
}

/// Metrics of one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMetrics {
    pub method: String,
    pub instance: usize,
    pub n: usize,
    pub theta: f64,
    pub pool_size: usize,
    pub positives: usize,
    pub k: usize,
    pub auc: Option<f64>,
    pub top_k_precision: f64,
}

/// Dataset-level means and population standard deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub method: String,
    /// Label of the evaluated dataset (free-form, usually its directory name).
    pub dataset: String,
    pub n: usize,
    pub theta: f64,
    pub instances: usize,
    /// Instances left out of the AUC statistics because their pool had a single class.
    pub auc_undefined: usize,
    pub auc_mean: f64,
    pub auc_std: f64,
    pub top_k_mean: f64,
    pub top_k_std: f64,
    pub top_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub records: Vec<InstanceMetrics>,
    pub aggregate: Aggregate,
}

/// Mean and population standard deviation; `(NaN, NaN)` for no values.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl EvalReport {
    /// Aggregates per-instance records. `n` and `theta` are taken from the
    /// first record.
    pub fn from_records(records: Vec<InstanceMetrics>, dataset: &str, top_fraction: f64) -> Result<Self> {
        let first = records.first().ok_or_else(|| Error::invalid("no instances to aggregate"))?;
        if records.iter().any(|r| r.method != first.method) {
            return Err(Error::Format("records mix several methods".into()));
        }
        let aucs: Vec<f64> = records.iter().filter_map(|r| r.auc).collect();
        let tops: Vec<f64> = records.iter().map(|r| r.top_k_precision).collect();
        let (auc_mean, auc_std) = mean_std(&aucs);
        let (top_k_mean, top_k_std) = mean_std(&tops);
        let aggregate = Aggregate {
            method: first.method.clone(),
            dataset: dataset.to_string(),
            n: first.n,
            theta: first.theta,
            instances: records.len(),
            auc_undefined: records.len() - aucs.len(),
            auc_mean,
            auc_std,
            top_k_mean,
            top_k_std,
            top_fraction,
        };
        Ok(EvalReport { records, aggregate })
    }

    /// One CSV row per instance. Column order: `method, instance, n, theta,
    /// pool_size, positives, k, auc, top_k_precision`; `auc` is empty when
    /// undefined.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Format(e.to_string()))
    }

    pub fn read_csv<R: Read>(input: R, dataset: &str, top_fraction: f64) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let records = r
            .deserialize()
            .collect::<std::result::Result<Vec<InstanceMetrics>, _>>()
            .map_err(|e| Error::Format(format!("evaluation csv: {e}")))?;
        Self::from_records(records, dataset, top_fraction)
    }
}

/// Scores of one instance for a scorer, sharing the feature computation.
struct Prepared {
    raw: FeatureMatrix,
}

fn instance_metrics(
    inst: &EpidemicInstance,
    index: usize,
    scorers: &[Scorer<'_>],
    names: &[String],
    top_fraction: f64,
) -> Result<Vec<InstanceMetrics>> {
    let needs_model = scorers.iter().any(|s| matches!(s, Scorer::Model(_)));
    let prepared = needs_model.then(|| Prepared {
        raw: compute_features(&inst.graph, &inst.observed),
    });
    let model_input = match &prepared {
        Some(p) => Some(GcnInput::new(
            NormalizedAdjacency::from_graph(&inst.graph),
            &normalize_features(&p.raw),
        )?),
        None => None,
    };
    let labels = inst.labels();
    let pool = inst.pool();
    debug_assert_eq!(pool.len(), inst.n() - inst.observed.len());
    let positives = pool.iter().filter(|&&v| labels[v] > 0.5).count();
    scorers
        .iter()
        .zip(names)
        .map(|(scorer, name)| {
            let scores = match scorer {
                Scorer::Baseline => match &prepared {
                    Some(p) => p.raw.column(OBSERVED_BETWEENNESS_COLUMN),
                    None => baseline_scores(inst),
                },
                Scorer::Model(model) => forward(model, model_input.as_ref().expect("prepared"))?.scores,
            };
            let (precision, k) = top_k_precision(&scores, &labels, &pool, top_fraction)?;
            Ok(InstanceMetrics {
                method: name.clone(),
                instance: index,
                n: inst.n(),
                theta: inst.theta,
                pool_size: pool.len(),
                positives,
                k,
                auc: auc(&scores, &labels, &pool),
                top_k_precision: precision,
            })
        })
        .collect()
}

/// Evaluates several scorers over a stream of instances, one report per
/// scorer. Instances are processed in parallel chunks; records stay in
/// stream order. `names[i]` labels the records of `scorers[i]`.
pub fn evaluate<I>(
    scorers: &[Scorer<'_>],
    names: &[String],
    instances: I,
    dataset: &str,
    top_fraction: f64,
) -> Result<Vec<EvalReport>>
where
    I: IntoIterator<Item = Result<EpidemicInstance>>,
{
    if scorers.is_empty() || scorers.len() != names.len() {
        return Err(Error::invalid("need one name per scorer and at least one scorer"));
    }
    const CHUNK: usize = 32;
    let mut per_scorer: Vec<Vec<InstanceMetrics>> = vec![Vec::new(); scorers.len()];
    let mut iter = instances.into_iter().enumerate();
    loop {
        let chunk: Vec<(usize, EpidemicInstance)> = iter
            .by_ref()
            .take(CHUNK)
            .map(|(i, r)| r.map(|inst| (i, inst)))
            .collect::<Result<_>>()?;
        if chunk.is_empty() {
            break;
        }
        let rows: Vec<Vec<InstanceMetrics>> = chunk
            .par_iter()
            .map(|(i, inst)| instance_metrics(inst, *i, scorers, names, top_fraction))
            .collect::<Result<_>>()?;
        for row in rows {
            for (slot, m) in per_scorer.iter_mut().zip(row) {
                slot.push(m);
            }
        }
    }
    if per_scorer[0].is_empty() {
        return Err(Error::invalid("empty dataset"));
    }
    per_scorer
        .into_iter()
        .map(|records| EvalReport::from_records(records, dataset, top_fraction))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng;

    fn brute_auc(scores: &[f64], labels: &[f64], pool: &[usize]) -> Option<f64> {
        let pos: Vec<usize> = pool.iter().copied().filter(|&v| labels[v] > 0.5).collect();
        let neg: Vec<usize> = pool.iter().copied().filter(|&v| labels[v] <= 0.5).collect();
        if pos.is_empty() || neg.is_empty() {
            return None;
        }
        let mut wins = 0.0;
        for &p in &pos {
            for &q in &neg {
                if scores[p] > scores[q] {
                    wins += 1.0;
                } else if scores[p] == scores[q] {
                    wins += 0.5;
                }
            }
        }
        Some(wins / (pos.len() * neg.len()) as f64)
    }

    #[test]
    fn perfect_and_tied_rankings() {
        let labels = [1.0, 1.0, 0.0, 0.0];
        let pool = [0, 1, 2, 3];
        assert_eq!(auc(&[0.9, 0.8, 0.1, 0.2], &labels, &pool), Some(1.0));
        assert_eq!(auc(&[0.3; 4], &labels, &pool), Some(0.5));
        assert_eq!(auc(&[0.3; 4], &[1.0; 4], &pool), None);
    }

    #[test]
    fn pool_restricts_the_pairs() {
        // Node 0 is a badly ranked positive but outside the pool.
        let scores = [0.0, 0.9, 0.5, 0.1];
        let labels = [1.0, 1.0, 0.0, 0.0];
        assert_eq!(auc(&scores, &labels, &[1, 2, 3]), Some(1.0));
        assert_eq!(auc(&scores, &labels, &[0, 1, 2, 3]), Some(0.5));
    }

    #[test]
    fn matches_pairwise_count_on_random_cases() {
        let mut rng = rng_from_seed(3);
        for _ in 0..200 {
            let scores: Vec<f64> = (0..20).map(|_| (rng.random_range(0..6) as f64) * 0.5).collect();
            let labels: Vec<f64> = (0..20).map(|_| if rng.random_bool(0.4) { 1.0 } else { 0.0 }).collect();
            let pool: Vec<usize> = (0..20).filter(|_| rng.random_bool(0.8)).collect();
            assert_eq!(auc(&scores, &labels, &pool), brute_auc(&scores, &labels, &pool));
        }
    }

    #[test]
    fn top_k_basics() {
        let mut scores = vec![0.0; 100];
        let mut labels = vec![0.0; 100];
        scores[42] = 5.0;
        labels[42] = 1.0;
        let pool: Vec<usize> = (0..100).collect();
        assert_eq!(top_k_precision(&scores, &labels, &pool, 0.01).unwrap(), (1.0, 1));
        let (p, k) = top_k_precision(&labels, &labels, &pool, 0.01).unwrap();
        assert_eq!((p, k), (1.0, 1));
        assert!(top_k_precision(&scores, &labels, &[], 0.01).is_err());
    }

    #[test]
    fn ties_break_by_node_id() {
        let scores = [1.0, 1.0, 1.0, 0.0];
        let labels = [0.0, 1.0, 1.0, 1.0];
        let (p, k) = top_k_precision(&scores, &labels, &[0, 1, 2, 3], 0.5).unwrap();
        assert_eq!(k, 2);
        assert_eq!(p, 0.5);
    }

    #[test]
    fn k_rounding() {
        assert_eq!(top_k_count(2940, 0.01), 29);
        assert_eq!(top_k_count(2950, 0.01), 30);
        assert_eq!(top_k_count(10, 0.01), 1);
        assert_eq!(top_k_count(9840, 0.01), 98);
    }

    fn path_instance() -> EpidemicInstance {
        EpidemicInstance {
            graph: Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap(),
            source: 0,
            beta: 0.5,
            theta: 0.5,
            t_h: 2,
            infected: vec![0, 1, 2],
            observed: vec![0, 2],
        }
    }

    #[test]
    fn baseline_ranks_the_bridge_first() {
        let inst = path_instance();
        let scores = baseline_scores(&inst);
        assert_eq!(scores, vec![0.0, 1.0, 0.0]);
        let (p, _) = top_k_precision(&scores, &inst.labels(), &inst.pool(), 0.01).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn baseline_without_observations_is_uninformative() {
        let mut inst = path_instance();
        inst.observed.clear();
        inst.infected = vec![0, 1];
        let scores = baseline_scores(&inst);
        assert_eq!(scores, vec![0.0; 3]);
        assert_eq!(auc(&scores, &inst.labels(), &inst.pool()), Some(0.5));
    }

    fn record(auc: Option<f64>, top: f64) -> InstanceMetrics {
        InstanceMetrics {
            method: "m".into(),
            instance: 0,
            n: 10,
            theta: 0.5,
            pool_size: 8,
            positives: 2,
            k: 1,
            auc,
            top_k_precision: top,
        }
    }

    #[test]
    fn aggregates() {
        let one = EvalReport::from_records(vec![record(Some(0.7), 1.0)], "d", 0.01).unwrap();
        assert_eq!((one.aggregate.auc_mean, one.aggregate.auc_std), (0.7, 0.0));
        let two = EvalReport::from_records(vec![record(Some(0.7), 1.0), record(Some(0.9), 0.0), record(None, 0.5)], "d", 0.01).unwrap();
        assert!((two.aggregate.auc_mean - 0.8).abs() < 1e-15);
        assert!((two.aggregate.auc_std - 0.1).abs() < 1e-15);
        assert_eq!(two.aggregate.auc_undefined, 1);
        assert_eq!(two.aggregate.instances, 3);
        assert!((two.aggregate.top_k_mean - 0.5).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let report = EvalReport::from_records(vec![record(Some(0.75), 1.0), record(None, 0.0)], "d", 0.01).unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("method,instance,n,theta,pool_size,positives,k,auc,top_k_precision\n"));
        let back = EvalReport::read_csv(&buf[..], "d", 0.01).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn evaluate_single_instance() {
        let reports = evaluate(
            &[Scorer::Baseline, Scorer::Model(&GcnModel::zeros(8, 2))],
            &["b".into(), "g".into()],
            vec![Ok(path_instance())],
            "tiny",
            0.01,
        )
        .unwrap();
        assert_eq!(reports.len(), 2);
        // Pool {1} holds a single class.
        assert_eq!(reports[0].aggregate.auc_undefined, 1);
        assert_eq!(reports[0].records[0].pool_size, 1);
        assert_eq!(reports[0].aggregate.top_k_std, 0.0);
        assert_eq!(reports[1].records[0].method, "g");
    }

    proptest! {
        #[test]
        fn monotone_transforms_preserve_metrics(raw in prop::collection::vec(0u8..20, 4..60), bits in prop::collection::vec(any::<bool>(), 60)) {
            let scores: Vec<f64> = raw.iter().map(|&x| x as f64).collect();
            let labels: Vec<f64> = bits[..scores.len()].iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
            let pool: Vec<usize> = (0..scores.len()).collect();
            let warped: Vec<f64> = scores.iter().map(|x| (x * 0.3).exp() * 7.0 - 2.0).collect();
            prop_assert_eq!(auc(&scores, &labels, &pool), auc(&warped, &labels, &pool));
            prop_assert_eq!(
                top_k_precision(&scores, &labels, &pool, 0.1).unwrap(),
                top_k_precision(&warped, &labels, &pool, 0.1).unwrap()
            );
        }

        #[test]
        fn reversed_scores_complement(seed: u64, len in 4usize..50) {
            let mut rng = rng_from_seed(seed);
            let scores: Vec<f64> = (0..len).map(|_| rng.random::<f64>()).collect();
            let labels: Vec<f64> = (0..len).map(|i| (i % 3 == 0) as u8 as f64).collect();
            let pool: Vec<usize> = (0..len).collect();
            let neg: Vec<f64> = scores.iter().map(|x| -x).collect();
            let a = auc(&scores, &labels, &pool).unwrap();
            let b = auc(&neg, &labels, &pool).unwrap();
            prop_assert!((a + b - 1.0).abs() < 1e-12);
        }
    }
}
