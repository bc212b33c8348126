//! Supply-chain investigation: per-node accountability tests over a directed
//! supplier graph, multi-stage top-down traversal with pruning, and the
//! budget-driven replace-vs-investigate rule.
//!
//! Edges point from buyer to supplier, so the final product is the unique
//! node nobody buys, and a node's `parents` are its consumers. Investigation
//! starts at the final product and descends only through suppliers of nodes
//! that were themselves found accountable.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::domain::{ObservationModel, Reputation, SampleBatch};
use crate::error::{Error, Result};
use crate::hypotest::{HypothesisVector, NpConfig};
use crate::stats::binomial_cdf;

/// Upper limit on decentralized tier-1 supplier counts (2^n hypothesis rows).
pub const MAX_TIER1_SUPPLIERS: usize = 20;

/// The statistical test configured for one supplier node.
///
/// For likelihood-ratio nodes, `h1` is the misinformation hypothesis and the
/// node's accountability is its posterior probability given the evidence.
/// For Neyman-Pearson nodes the accountability is the probability that a
/// healthy component would outscore the observed success count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeTest {
    Lrt {
        h0: ObservationModel,
        h1: ObservationModel,
        prior: Reputation,
    },
    NeymanPearson {
        mu0: f64,
        false_alarm_bound: f64,
        n_trials: u64,
    },
}

impl NodeTest {
    fn validate(&self) -> Result<()> {
        match self {
            Self::Lrt { h0, h1, prior } => {
                h0.validate()?;
                h1.validate()?;
                if !h0.same_space(h1) {
                    return Err(Error::MismatchedSpaces(
                        "node test hypotheses must share an observation space".into(),
                    ));
                }
                if prior.len() != 2 {
                    return Err(Error::DegeneratePrior(
                        "node tests are binary; the prior needs exactly two entries".into(),
                    ));
                }
                Ok(())
            }
            Self::NeymanPearson {
                mu0,
                false_alarm_bound,
                n_trials,
            } => {
                if !(*mu0 > 0.0 && *mu0 < 1.0) {
                    return Err(Error::Parameter {
                        name: "mu0",
                        value: *mu0,
                        constraint: "must lie strictly inside (0, 1)",
                    });
                }
                NpConfig::new(*false_alarm_bound, *n_trials).map(|_| ())
            }
        }
    }
}

/// One supplier in the chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupplyChainNode {
    pub id: String,
    /// Consumers of this node's product (empty exactly for the final product).
    #[serde(default)]
    pub parents: Vec<String>,
    /// Cost of investigating this supplier.
    pub cost: f64,
    /// Test configuration; required for any node that may be investigated.
    pub test: Option<NodeTest>,
}

/// Directed supplier graph with a unique final-product root.
#[derive(Debug, Clone)]
pub struct SupplyChainGraph {
    nodes: BTreeMap<String, SupplyChainNode>,
    children: BTreeMap<String, Vec<String>>,
    root: String,
}

impl SupplyChainGraph {
    pub fn new(nodes: Vec<SupplyChainNode>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Graph("graph has no nodes".into()));
        }
        let mut map = BTreeMap::new();
        for node in nodes {
            if node.cost < 0.0 || !node.cost.is_finite() {
                return Err(Error::Graph(format!(
                    "node `{}` has invalid investigation cost {}",
                    node.id, node.cost
                )));
            }
            if let Some(test) = &node.test {
                test.validate()?;
            }
            if map.insert(node.id.clone(), node).is_some() {
                return Err(Error::Graph("duplicate node id".into()));
            }
        }
        let mut children: BTreeMap<String, Vec<String>> =
            map.keys().map(|id| (id.clone(), Vec::new())).collect();
        let mut roots = Vec::new();
        for node in map.values() {
            if node.parents.is_empty() {
                roots.push(node.id.clone());
            }
            for parent in &node.parents {
                if !map.contains_key(parent) {
                    return Err(Error::Graph(format!(
                        "node `{}` references unknown parent `{parent}`",
                        node.id
                    )));
                }
                children
                    .get_mut(parent)
                    .expect("parent exists")
                    .push(node.id.clone());
            }
        }
        for kids in children.values_mut() {
            kids.sort();
            kids.dedup();
        }
        if roots.len() != 1 {
            return Err(Error::Graph(format!(
                "expected exactly one final-product node without parents, found {}",
                roots.len()
            )));
        }
        let graph = Self {
            nodes: map,
            children,
            root: roots.pop().expect("one root"),
        };
        graph.check_acyclic()?;
        Ok(graph)
    }

    fn check_acyclic(&self) -> Result<()> {
        // Kahn's algorithm over parent counts.
        let mut degree: BTreeMap<&str, usize> = self
            .nodes
            .values()
            .map(|n| (n.id.as_str(), n.parents.len()))
            .collect();
        let mut queue: VecDeque<&str> = degree
            .iter()
            .filter(|&(_, &d)| d == 0)
            .map(|(&id, _)| id)
            .collect();
        let mut seen = 0;
        while let Some(id) = queue.pop_front() {
            seen += 1;
            for child in &self.children[id] {
                let d = degree.get_mut(child.as_str()).expect("known node");
                *d -= 1;
                if *d == 0 {
                    queue.push_back(child);
                }
            }
        }
        if seen != self.nodes.len() {
            return Err(Error::Graph("procurement links contain a cycle".into()));
        }
        Ok(())
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    pub fn node(&self, id: &str) -> Option<&SupplyChainNode> {
        self.nodes.get(id)
    }

    pub fn node_ids(&self) -> impl Iterator<Item = &str> {
        self.nodes.keys().map(String::as_str)
    }

    /// Children (suppliers) of `id`, sorted by id.
    pub fn children(&self, id: &str) -> &[String] {
        self.children.get(id).map_or(&[], Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Accountability threshold and investigation budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvestigationPolicy {
    pub epsilon: f64,
    pub budget: f64,
}

impl InvestigationPolicy {
    pub fn new(epsilon: f64, budget: f64) -> Result<Self> {
        let policy = Self { epsilon, budget };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Parameter {
                name: "epsilon",
                value: self.epsilon,
                constraint: "accountability threshold must lie strictly inside (0, 1)",
            });
        }
        if self.budget < 0.0 || !self.budget.is_finite() {
            return Err(Error::Parameter {
                name: "budget",
                value: self.budget,
                constraint: "budget must be nonnegative",
            });
        }
        Ok(())
    }
}

/// Verdict assigned to a node during the investigation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accountable,
    Cleared,
    Skipped,
    Replaced,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Accountable => "accountable",
            Self::Cleared => "cleared",
            Self::Skipped => "skipped",
            Self::Replaced => "replaced",
        })
    }
}

/// One row of the investigation trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub node_id: String,
    /// Accountability computed for investigated nodes; absent for skipped
    /// and replaced nodes.
    pub p_a: Option<f64>,
    pub verdict: Verdict,
    /// Total investigation spend after this entry.
    pub cumulative_cost: f64,
}

/// Ordered record of one multi-stage investigation.
#[derive(Debug, Clone, PartialEq)]
pub struct InvestigationTrace {
    pub entries: Vec<TraceEntry>,
    pub total_spent: f64,
}

impl InvestigationTrace {
    pub fn verdict_of(&self, node_id: &str) -> Option<Verdict> {
        self.entries
            .iter()
            .find(|e| e.node_id == node_id)
            .map(|e| e.verdict)
    }

    /// CSV with the header `node_id,p_a,verdict,cumulative_cost`.
    pub fn to_csv(&self) -> String {
        let rows = self.entries.iter().map(|e| {
            format!(
                "{},{},{},{}",
                e.node_id,
                e.p_a.map(crate::emit::fmt_float).unwrap_or_default(),
                e.verdict,
                crate::emit::fmt_float(e.cumulative_cost)
            )
        });
        crate::emit::csv_document("node_id,p_a,verdict,cumulative_cost", rows)
    }
}

/// Replace-vs-investigate decision for the next candidate node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NextStep {
    Investigate,
    Replace,
}

/// The budget rule: replace as soon as the remaining budget cannot strictly
/// cover the next investigation, i.e. `remaining - next_cost <= 0`.
pub fn replace_or_investigate(remaining_budget: f64, next_cost: f64) -> Result<NextStep> {
    for (name, value) in [
        ("remaining_budget", remaining_budget),
        ("next_cost", next_cost),
    ] {
        if value < 0.0 || !value.is_finite() {
            return Err(Error::Parameter {
                name,
                value,
                constraint: "must be nonnegative",
            });
        }
    }
    Ok(if remaining_budget - next_cost <= 0.0 {
        NextStep::Replace
    } else {
        NextStep::Investigate
    })
}

/// Run one node's configured test on its evidence.
///
/// Returns the node's accountability `P_A^i` and the verdict
/// `accountable iff P_A^i > epsilon` (strict).
pub fn investigate_node(
    node: &SupplyChainNode,
    batch: &SampleBatch,
    policy: &InvestigationPolicy,
) -> Result<(f64, Verdict)> {
    policy.validate()?;
    let test = node
        .test
        .as_ref()
        .ok_or_else(|| Error::Graph(format!("node `{}` has no test configured", node.id)))?;
    test.validate()?;
    let p_a = match test {
        NodeTest::Lrt { h0, h1, prior } => {
            let (pi0, pi1) = (prior.prior()[0], prior.prior()[1]);
            let mut log_l0 = 0.0_f64;
            let mut log_l1 = 0.0_f64;
            for &y in batch.values() {
                log_l0 += h0.density(y).ln();
                log_l1 += h1.density(y).ln();
            }
            posterior_h1(pi0, pi1, log_l0, log_l1)?
        }
        NodeTest::NeymanPearson { mu0, n_trials, .. } => {
            if batch.len() as u64 != *n_trials {
                return Err(Error::Graph(format!(
                    "node `{}` expects {n_trials} trials, evidence has {}",
                    node.id,
                    batch.len()
                )));
            }
            let mut successes = 0u64;
            for &y in batch.values() {
                if y == 1.0 {
                    successes += 1;
                } else if y != 0.0 {
                    return Err(Error::Support { value: y });
                }
            }
            // Probability that a healthy component beats the observed score.
            1.0 - binomial_cdf(*n_trials, successes as i64, *mu0)?
        }
    };
    let verdict = if p_a > policy.epsilon {
        Verdict::Accountable
    } else {
        Verdict::Cleared
    };
    Ok((p_a, verdict))
}

/// Posterior probability of the misinformation hypothesis, evaluated stably
/// from log likelihoods.
fn posterior_h1(pi0: f64, pi1: f64, log_l0: f64, log_l1: f64) -> Result<f64> {
    let s0 = if pi0 > 0.0 {
        pi0.ln() + log_l0
    } else {
        f64::NEG_INFINITY
    };
    let s1 = if pi1 > 0.0 {
        pi1.ln() + log_l1
    } else {
        f64::NEG_INFINITY
    };
    if s0 == f64::NEG_INFINITY && s1 == f64::NEG_INFINITY {
        return Err(Error::Support { value: f64::NAN });
    }
    let m = s0.max(s1);
    let e0 = (s0 - m).exp();
    let e1 = (s1 - m).exp();
    Ok(e1 / (e0 + e1))
}

/// Multi-stage top-down investigation.
///
/// Breadth first from the final product, children in id order. A node is
/// investigated once as soon as any accountable consumer reaches it; the
/// budget rule is applied before each investigation and budget exhaustion
/// yields a `replaced` verdict rather than an error. After the walk, nodes
/// pruned by cleared consumers are recorded as `skipped`: those with a
/// cleared parent, plus those whose investigated ancestors were all cleared.
pub fn multistage_investigate(
    graph: &SupplyChainGraph,
    evidence: &BTreeMap<String, SampleBatch>,
    policy: &InvestigationPolicy,
) -> Result<InvestigationTrace> {
    policy.validate()?;
    let mut entries = Vec::new();
    let mut verdicts: BTreeMap<String, Verdict> = BTreeMap::new();
    let mut spent = 0.0_f64;

    let mut queue = VecDeque::from([graph.root().to_string()]);
    let mut enqueued: BTreeSet<String> = queue.iter().cloned().collect();
    while let Some(id) = queue.pop_front() {
        let node = graph.node(&id).expect("queued ids exist");
        match replace_or_investigate(policy.budget - spent, node.cost)? {
            NextStep::Replace => {
                verdicts.insert(id.clone(), Verdict::Replaced);
                entries.push(TraceEntry {
                    node_id: id,
                    p_a: None,
                    verdict: Verdict::Replaced,
                    cumulative_cost: spent,
                });
            }
            NextStep::Investigate => {
                let batch = evidence
                    .get(&id)
                    .ok_or_else(|| Error::Graph(format!("no evidence supplied for node `{id}`")))?;
                let (p_a, verdict) = investigate_node(node, batch, policy)?;
                spent += node.cost;
                verdicts.insert(id.clone(), verdict);
                entries.push(TraceEntry {
                    node_id: id.clone(),
                    p_a: Some(p_a),
                    verdict,
                    cumulative_cost: spent,
                });
                if verdict == Verdict::Accountable {
                    for child in graph.children(&id) {
                        if enqueued.insert(child.clone()) {
                            queue.push_back(child.clone());
                        }
                    }
                }
            }
        }
    }

    // Skip pass over the untouched remainder, in breadth-first id order.
    let mut order = VecDeque::from([graph.root().to_string()]);
    let mut seen: BTreeSet<String> = order.iter().cloned().collect();
    while let Some(id) = order.pop_front() {
        for child in graph.children(&id) {
            if seen.insert(child.clone()) {
                order.push_back(child.clone());
            }
        }
        if verdicts.contains_key(&id) {
            continue;
        }
        if is_pruned(graph, &verdicts, &id) {
            verdicts.insert(id.clone(), Verdict::Skipped);
            entries.push(TraceEntry {
                node_id: id,
                p_a: None,
                verdict: Verdict::Skipped,
                cumulative_cost: spent,
            });
        }
    }

    Ok(InvestigationTrace {
        entries,
        total_spent: spent,
    })
}

/// A node counts as pruned when a parent was investigated and cleared, or
/// when it has investigated ancestors and every one of them was cleared.
fn is_pruned(graph: &SupplyChainGraph, verdicts: &BTreeMap<String, Verdict>, id: &str) -> bool {
    let node = graph.node(id).expect("known node");
    if node
        .parents
        .iter()
        .any(|p| verdicts.get(p) == Some(&Verdict::Cleared))
    {
        return true;
    }
    let mut investigated = Vec::new();
    collect_investigated_ancestors(graph, verdicts, id, &mut BTreeSet::new(), &mut investigated);
    !investigated.is_empty() && investigated.iter().all(|v| *v == Verdict::Cleared)
}

fn collect_investigated_ancestors(
    graph: &SupplyChainGraph,
    verdicts: &BTreeMap<String, Verdict>,
    id: &str,
    visited: &mut BTreeSet<String>,
    out: &mut Vec<Verdict>,
) {
    let node = graph.node(id).expect("known node");
    for parent in &node.parents {
        if !visited.insert(parent.clone()) {
            continue;
        }
        match verdicts.get(parent) {
            Some(Verdict::Accountable) => out.push(Verdict::Accountable),
            Some(Verdict::Cleared) => out.push(Verdict::Cleared),
            _ => {}
        }
        collect_investigated_ancestors(graph, verdicts, parent, visited, out);
    }
}

/// All `2^n` tier-1 hypothesis vectors with their decimal indices.
pub fn tier1_hypotheses(n: usize) -> Result<Vec<HypothesisVector>> {
    if n == 0 || n > MAX_TIER1_SUPPLIERS {
        return Err(Error::Parameter {
            name: "n",
            value: n as f64,
            constraint: "supplier count must lie in 1..=20",
        });
    }
    (0..(1u64 << n))
        .map(|index| HypothesisVector::from_index(index, n))
        .collect()
}

/// A parsed graph document: the graph itself, per-node evidence, and policy.
#[derive(Debug, Clone)]
pub struct GraphDocument {
    pub graph: SupplyChainGraph,
    pub evidence: BTreeMap<String, SampleBatch>,
    pub policy: InvestigationPolicy,
}

#[derive(Debug, Deserialize)]
struct GraphDocumentSpec {
    policy: InvestigationPolicy,
    nodes: Vec<NodeSpec>,
}

#[derive(Debug, Deserialize)]
struct NodeSpec {
    id: String,
    #[serde(default)]
    parents: Vec<String>,
    cost: f64,
    #[serde(default)]
    test: Option<NodeTest>,
    #[serde(default)]
    evidence: Option<Vec<f64>>,
}

/// Parse the structured graph document (TOML: a `[policy]` section and a list
/// of `[[nodes]]` with id, parents, test kind and parameters, cost, and
/// optional inline evidence).
pub fn parse_graph_document(text: &str) -> Result<GraphDocument> {
    let spec: GraphDocumentSpec = toml::from_str(text)
        .map_err(|e| Error::Graph(format!("graph document does not parse: {e}")))?;
    build_graph_document(spec)
}

/// Build a graph document from an already-parsed TOML value (used when the
/// document is embedded in a larger scenario config).
pub(crate) fn graph_document_from_value(value: toml::Value) -> Result<GraphDocument> {
    let spec: GraphDocumentSpec = value
        .try_into()
        .map_err(|e| Error::Graph(format!("graph section does not parse: {e}")))?;
    build_graph_document(spec)
}

fn build_graph_document(spec: GraphDocumentSpec) -> Result<GraphDocument> {
    spec.policy.validate()?;
    let mut evidence = BTreeMap::new();
    let mut nodes = Vec::with_capacity(spec.nodes.len());
    for node in spec.nodes {
        if let Some(values) = node.evidence {
            evidence.insert(node.id.clone(), SampleBatch::new(values, 0)?);
        }
        nodes.push(SupplyChainNode {
            id: node.id,
            parents: node.parents,
            cost: node.cost,
            test: node.test,
        });
    }
    Ok(GraphDocument {
        graph: SupplyChainGraph::new(nodes)?,
        evidence,
        policy: spec.policy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypotest::decentralized_fuse;

    fn lrt_node(id: &str, parents: &[&str], cost: f64, pi1: f64) -> SupplyChainNode {
        // Identical hypotheses: the posterior equals the prior, which makes
        // the node's accountability directly controllable in tests.
        let model = ObservationModel::bernoulli(0.5).unwrap();
        SupplyChainNode {
            id: id.into(),
            parents: parents.iter().map(|s| s.to_string()).collect(),
            cost,
            test: Some(NodeTest::Lrt {
                h0: model.clone(),
                h1: model,
                prior: Reputation::binary(1.0 - pi1, pi1).unwrap(),
            }),
        }
    }

    fn one_obs() -> SampleBatch {
        SampleBatch::new(vec![1.0], 0).unwrap()
    }

    fn policy(epsilon: f64, budget: f64) -> InvestigationPolicy {
        InvestigationPolicy::new(epsilon, budget).unwrap()
    }

    #[test]
    fn tier1_table_matches_two_supplier_convention() {
        let rows = tier1_hypotheses(2).unwrap();
        assert_eq!(rows.len(), 4);
        let expected = [
            (0, vec![0, 0]),
            (1, vec![0, 1]),
            (2, vec![1, 0]),
            (3, vec![1, 1]),
        ];
        for (index, bits) in expected {
            assert_eq!(rows[index as usize].bits(), bits.as_slice());
            assert_eq!(rows[index as usize].index(), index);
        }
    }

    #[test]
    fn tier1_sizes_and_limits() {
        assert_eq!(tier1_hypotheses(1).unwrap().len(), 2);
        let rows = tier1_hypotheses(3).unwrap();
        assert_eq!(rows.len(), 8);
        assert_eq!(rows[5].bits(), &[1, 0, 1]);
        assert!(tier1_hypotheses(0).is_err());
        assert!(tier1_hypotheses(21).is_err());
    }

    #[test]
    fn investigate_node_threshold_is_strict() {
        let pol = policy(0.5, 100.0);
        let (p_a, verdict) =
            investigate_node(&lrt_node("a", &[], 1.0, 0.95), &one_obs(), &pol).unwrap();
        assert!((p_a - 0.95).abs() < 1e-12);
        assert_eq!(verdict, Verdict::Accountable);

        // Exactly epsilon clears: the comparison is strict.
        let (p_a, verdict) =
            investigate_node(&lrt_node("a", &[], 1.0, 0.5), &one_obs(), &pol).unwrap();
        assert!((p_a - 0.5).abs() < 1e-12);
        assert_eq!(verdict, Verdict::Cleared);
    }

    #[test]
    fn investigate_node_binomial_example() {
        let node = SupplyChainNode {
            id: "face".into(),
            parents: vec![],
            cost: 1.0,
            test: Some(NodeTest::NeymanPearson {
                mu0: 0.9,
                false_alarm_bound: 0.05,
                n_trials: 20,
            }),
        };
        // 12 successes out of 20: far below the healthy quantile threshold.
        let mut values = vec![1.0; 12];
        values.extend(vec![0.0; 8]);
        let batch = SampleBatch::new(values, 0).unwrap();
        let (p_a, verdict) = investigate_node(&node, &batch, &policy(0.5, 10.0)).unwrap();
        assert_eq!(verdict, Verdict::Accountable);
        // Frozen: 1 - F(12) for Binomial(20, 0.9).
        assert!((p_a - 0.999_584_364_981_154_5).abs() < 1e-12);

        // A healthy score clears.
        let healthy = SampleBatch::new(vec![1.0; 20], 0).unwrap();
        let (p_a, verdict) = investigate_node(&node, &healthy, &policy(0.5, 10.0)).unwrap();
        assert_eq!(verdict, Verdict::Cleared);
        assert!(p_a.abs() < 1e-12);
    }

    #[test]
    fn investigate_node_requires_test_and_matching_trials() {
        let bare = SupplyChainNode {
            id: "x".into(),
            parents: vec![],
            cost: 0.0,
            test: None,
        };
        assert!(matches!(
            investigate_node(&bare, &one_obs(), &policy(0.5, 1.0)),
            Err(Error::Graph(_))
        ));

        let np = SupplyChainNode {
            id: "y".into(),
            parents: vec![],
            cost: 0.0,
            test: Some(NodeTest::NeymanPearson {
                mu0: 0.9,
                false_alarm_bound: 0.05,
                n_trials: 20,
            }),
        };
        assert!(investigate_node(&np, &one_obs(), &policy(0.5, 1.0)).is_err());
    }

    #[test]
    fn replace_rule_uses_inclusive_inequality() {
        assert_eq!(
            replace_or_investigate(100.0, 30.0).unwrap(),
            NextStep::Investigate
        );
        assert_eq!(
            replace_or_investigate(30.0, 30.0).unwrap(),
            NextStep::Replace
        );
        assert_eq!(replace_or_investigate(0.0, 5.0).unwrap(), NextStep::Replace);
        assert_eq!(replace_or_investigate(0.0, 0.0).unwrap(), NextStep::Replace);
        assert!(replace_or_investigate(-1.0, 0.0).is_err());
    }

    /// Root with two branches; each branch has two leaf suppliers.
    fn two_branch_graph(
        face_pi1: f64,
        finger_pi1: f64,
    ) -> (SupplyChainGraph, BTreeMap<String, SampleBatch>) {
        let nodes = vec![
            lrt_node("lock", &[], 10.0, 0.9),
            lrt_node("face", &["lock"], 10.0, face_pi1),
            lrt_node("finger", &["lock"], 10.0, finger_pi1),
            lrt_node("camera", &["face"], 5.0, 0.9),
            lrt_node("software", &["face"], 5.0, 0.2),
            lrt_node("reader", &["finger"], 5.0, 0.9),
            lrt_node("firmware", &["finger"], 5.0, 0.9),
        ];
        let graph = SupplyChainGraph::new(nodes).unwrap();
        let evidence = graph
            .node_ids()
            .map(|id| (id.to_string(), one_obs()))
            .collect();
        (graph, evidence)
    }

    #[test]
    fn cleared_branch_subtree_is_skipped() {
        let (graph, evidence) = two_branch_graph(0.9, 0.2);
        let trace = multistage_investigate(&graph, &evidence, &policy(0.5, 1000.0)).unwrap();
        assert_eq!(trace.verdict_of("lock"), Some(Verdict::Accountable));
        assert_eq!(trace.verdict_of("face"), Some(Verdict::Accountable));
        assert_eq!(trace.verdict_of("finger"), Some(Verdict::Cleared));
        // The accountable branch is investigated all the way down.
        assert_eq!(trace.verdict_of("camera"), Some(Verdict::Accountable));
        assert_eq!(trace.verdict_of("software"), Some(Verdict::Cleared));
        // The cleared branch's suppliers are skipped, never investigated.
        assert_eq!(trace.verdict_of("reader"), Some(Verdict::Skipped));
        assert_eq!(trace.verdict_of("firmware"), Some(Verdict::Skipped));
        assert!((trace.total_spent - 40.0).abs() < 1e-12);
    }

    #[test]
    fn cleared_root_stops_everything() {
        let (graph, evidence) = two_branch_graph(0.9, 0.9);
        let mut evidence = evidence;
        // Re-point the root at a prior below epsilon.
        let graph_nodes: Vec<SupplyChainNode> = graph
            .node_ids()
            .map(|id| {
                if id == "lock" {
                    lrt_node("lock", &[], 10.0, 0.2)
                } else {
                    graph.node(id).unwrap().clone()
                }
            })
            .collect();
        let graph = SupplyChainGraph::new(graph_nodes).unwrap();
        evidence.insert("lock".into(), one_obs());
        let trace = multistage_investigate(&graph, &evidence, &policy(0.5, 1000.0)).unwrap();
        let investigated: Vec<_> = trace
            .entries
            .iter()
            .filter(|e| e.p_a.is_some())
            .map(|e| e.node_id.clone())
            .collect();
        assert_eq!(investigated, vec!["lock".to_string()]);
        assert!((trace.total_spent - 10.0).abs() < 1e-12);
        // Everything under the cleared root is pruned.
        for id in ["face", "finger", "camera", "software", "reader", "firmware"] {
            assert_eq!(trace.verdict_of(id), Some(Verdict::Skipped), "{id}");
        }
    }

    #[test]
    fn budget_smaller_than_root_cost_replaces_root() {
        let (graph, evidence) = two_branch_graph(0.9, 0.9);
        let trace = multistage_investigate(&graph, &evidence, &policy(0.5, 5.0)).unwrap();
        assert_eq!(trace.entries.len(), 1);
        assert_eq!(trace.entries[0].verdict, Verdict::Replaced);
        assert_eq!(trace.entries[0].p_a, None);
        assert_eq!(trace.total_spent, 0.0);
    }

    #[test]
    fn budget_exhaustion_mid_walk_replaces_remaining_frontier() {
        // Root (10) + face (10) fit in 25; the frontier then needs 10 more
        // with only 5 left, except the cheaper leaves (5) fail the strict
        // inequality too.
        let (graph, evidence) = two_branch_graph(0.9, 0.9);
        let trace = multistage_investigate(&graph, &evidence, &policy(0.5, 25.0)).unwrap();
        assert_eq!(trace.verdict_of("lock"), Some(Verdict::Accountable));
        assert_eq!(trace.verdict_of("face"), Some(Verdict::Accountable));
        assert_eq!(trace.verdict_of("finger"), Some(Verdict::Replaced));
        assert_eq!(trace.verdict_of("camera"), Some(Verdict::Replaced));
        assert_eq!(trace.verdict_of("software"), Some(Verdict::Replaced));
        assert!(trace.total_spent <= 25.0);
    }

    #[test]
    fn shared_supplier_investigated_once_via_any_accountable_parent() {
        // Diamond: both branches buy from the same tier-2 supplier.
        let nodes = vec![
            lrt_node("root", &[], 1.0, 0.9),
            lrt_node("left", &["root"], 1.0, 0.9),
            lrt_node("right", &["root"], 1.0, 0.2),
            lrt_node("shared", &["left", "right"], 1.0, 0.9),
        ];
        let graph = SupplyChainGraph::new(nodes).unwrap();
        let evidence: BTreeMap<String, SampleBatch> = graph
            .node_ids()
            .map(|id| (id.to_string(), one_obs()))
            .collect();
        let trace = multistage_investigate(&graph, &evidence, &policy(0.5, 100.0)).unwrap();
        // One cleared parent does not shield a node reachable through an
        // accountable one.
        assert_eq!(trace.verdict_of("shared"), Some(Verdict::Accountable));
        let shared_entries = trace
            .entries
            .iter()
            .filter(|e| e.node_id == "shared")
            .count();
        assert_eq!(shared_entries, 1);
    }

    #[test]
    fn trace_is_deterministic() {
        let (graph, evidence) = two_branch_graph(0.9, 0.2);
        let a = multistage_investigate(&graph, &evidence, &policy(0.5, 31.0)).unwrap();
        let b = multistage_investigate(&graph, &evidence, &policy(0.5, 31.0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn two_supplier_chain_fuses_like_decentralized_vector() {
        let pol = policy(0.5, 100.0);
        for (acc1, acc2) in [(false, false), (false, true), (true, false), (true, true)] {
            let pi = |acc: bool| if acc { 0.9 } else { 0.2 };
            let n1 = lrt_node("s1", &[], 1.0, pi(acc1));
            let n2 = lrt_node("s2", &[], 1.0, pi(acc2));
            let b1 = investigate_node(&n1, &one_obs(), &pol).unwrap().1;
            let b2 = investigate_node(&n2, &one_obs(), &pol).unwrap().1;
            let bits = HypothesisVector::new(vec![
                (b1 == Verdict::Accountable) as u8,
                (b2 == Verdict::Accountable) as u8,
            ])
            .unwrap();
            let expected = ((acc1 as u64) << 1) | acc2 as u64;
            assert_eq!(decentralized_fuse(&bits), expected);
        }
    }

    #[test]
    fn graph_validation_rejects_malformed_inputs() {
        // Cycle.
        let cyc = vec![
            lrt_node("root", &[], 1.0, 0.5),
            lrt_node("a", &["root", "b"], 1.0, 0.5),
            lrt_node("b", &["a"], 1.0, 0.5),
        ];
        assert!(matches!(SupplyChainGraph::new(cyc), Err(Error::Graph(_))));
        // Two roots.
        let two = vec![lrt_node("r1", &[], 1.0, 0.5), lrt_node("r2", &[], 1.0, 0.5)];
        assert!(SupplyChainGraph::new(two).is_err());
        // Unknown parent.
        let ghost = vec![
            lrt_node("r", &[], 1.0, 0.5),
            lrt_node("a", &["zzz"], 1.0, 0.5),
        ];
        assert!(SupplyChainGraph::new(ghost).is_err());
        // Negative cost.
        let mut neg = lrt_node("r", &[], 1.0, 0.5);
        neg.cost = -2.0;
        assert!(SupplyChainGraph::new(vec![neg]).is_err());
    }

    #[test]
    fn graph_document_round_trip() {
        let text = r#"
            [policy]
            epsilon = 0.5
            budget = 60.0

            [[nodes]]
            id = "lock"
            parents = []
            cost = 10.0
            evidence = [1.0, 0.0, 1.0]
            [nodes.test]
            kind = "lrt"
            prior = [0.3, 0.7]
            h0 = { kind = "bernoulli", success_prob = 0.9 }
            h1 = { kind = "bernoulli", success_prob = 0.4 }

            [[nodes]]
            id = "face"
            parents = ["lock"]
            cost = 20.0
            evidence = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
            [nodes.test]
            kind = "neyman_pearson"
            mu0 = 0.9
            false_alarm_bound = 0.05
            n_trials = 20
        "#;
        let doc = parse_graph_document(text).unwrap();
        assert_eq!(doc.graph.root(), "lock");
        assert_eq!(doc.graph.len(), 2);
        assert_eq!(doc.evidence["face"].len(), 20);
        let trace = multistage_investigate(&doc.graph, &doc.evidence, &doc.policy).unwrap();
        assert!(trace.total_spent <= doc.policy.budget);
        let csv = trace.to_csv();
        assert!(csv.starts_with("node_id,p_a,verdict,cumulative_cost\n"));
    }

    #[test]
    fn trace_csv_rows_match_entries() {
        let (graph, evidence) = two_branch_graph(0.9, 0.2);
        let trace = multistage_investigate(&graph, &evidence, &policy(0.5, 1000.0)).unwrap();
        let csv = trace.to_csv();
        assert_eq!(csv.lines().count(), 1 + trace.entries.len());
        for entry in &trace.entries {
            assert!(csv.contains(&entry.node_id));
        }
    }
}
