//! Synthetic networks and forward sampling, used for the bundled demo data
//! and for recovery tests.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::bayesnet::{Dag, ParamNetwork};
use crate::dataset::{Dataset, Role, Schema, VariableSpec};
use crate::error::{Error, Result};

/// Ancestral sampling of `n` complete records.
pub fn forward_sample<R: Rng>(net: &ParamNetwork, n: usize, rng: &mut R) -> Result<Dataset> {
    let schema = Schema::new(net.variables.clone())?;
    let order = net.dag.topological_order();
    let cards = net.cards();
    let mut rows = Vec::with_capacity(n);
    let mut a = vec![0; net.dag.len()];
    for _ in 0..n {
        for &i in &order {
            let j = net.config_index(i, &a, &cards);
            let row = &net.tables[i][j * cards[i]..(j + 1) * cards[i]];
            let u: f64 = rng.random();
            let mut acc = 0.0;
            a[i] = cards[i] - 1;
            for (k, p) in row.iter().enumerate() {
                acc += p;
                if u < acc {
                    a[i] = k;
                    break;
                }
            }
        }
        rows.push(a.clone());
    }
    Dataset::new(schema, rows)
}

/// Variables `name` with `r` numbered states; the first name is the target.
pub fn numbered_variables(names: &[&str], cards: &[usize]) -> Vec<VariableSpec> {
    names
        .iter()
        .zip(cards)
        .enumerate()
        .map(|(i, (n, &r))| VariableSpec::numbered(*n, r, if i == 0 { Role::Target } else { Role::Predictor }))
        .collect()
}

/// CPT rows drawn from a symmetric Dirichlet with the given concentration.
pub fn random_cpts<R: Rng>(dag: &Dag, variables: Vec<VariableSpec>, concentration: f64, rng: &mut R) -> Result<ParamNetwork> {
    let g = Gamma::new(concentration, 1.0).map_err(|e| Error::Invalid(format!("concentration: {e}")))?;
    let cards: Vec<usize> = variables.iter().map(VariableSpec::cardinality).collect();
    let tables = (0..dag.len())
        .map(|i| {
            let r = cards[i];
            let q: usize = dag.parents(i).iter().map(|&p| cards[p]).product();
            let mut t = Vec::with_capacity(q * r);
            for _ in 0..q {
                // floor keeps every cell strictly positive
                let row: Vec<f64> = (0..r).map(|_| g.sample(rng) + 1e-6).collect();
                let s: f64 = row.iter().sum();
                t.extend(row.into_iter().map(|x| x / s));
            }
            t
        })
        .collect();
    ParamNetwork::new(dag.clone(), variables, tables)
}

/// Each child puts `strength` on a state determined by the sum of its
/// parents' states (through a per-node permutation) and spreads the rest
/// evenly. Roots are uniform.
pub fn noisy_copy_cpts<R: Rng>(dag: &Dag, variables: Vec<VariableSpec>, strength: f64, rng: &mut R) -> Result<ParamNetwork> {
    let cards: Vec<usize> = variables.iter().map(VariableSpec::cardinality).collect();
    let tables = (0..dag.len())
        .map(|i| {
            let r = cards[i];
            let parents = dag.parents(i);
            if parents.is_empty() {
                return vec![1.0 / r as f64; r];
            }
            let mut perm: Vec<usize> = (0..r).collect();
            perm.shuffle(rng);
            noisy_table(parents.iter().map(|&p| cards[p]).collect(), r, strength, |sum| perm[sum % r])
        })
        .collect();
    ParamNetwork::new(dag.clone(), variables, tables)
}

/// Table over parent configurations (last parent fastest) where the mode is
/// `mode(sum of parent states)`.
fn noisy_table(parent_cards: Vec<usize>, r: usize, strength: f64, mode: impl Fn(usize) -> usize) -> Vec<f64> {
    let q: usize = parent_cards.iter().product();
    let rest = (1.0 - strength) / (r - 1) as f64;
    let mut t = Vec::with_capacity(q * r);
    for j in 0..q {
        let mut rem = j;
        let mut sum = 0;
        for &c in parent_cards.iter().rev() {
            sum += rem % c;
            rem /= c;
        }
        let m = mode(sum);
        t.extend((0..r).map(|k| if k == m { strength } else { rest }));
    }
    t
}

/// Random recursive tree over a shuffled node order, with
/// edges oriented away from the first node of that order.
pub fn random_tree<R: Rng>(names: &[&str], rng: &mut R) -> Result<Dag> {
    let mut order: Vec<usize> = (0..names.len()).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for k in 1..order.len() {
        let parent = order[rng.random_range(0..k)];
        edges.push((names[parent], names[order[k]]));
    }
    Dag::from_edges(names, &edges)
}

/// Random DAG: each pair in a shuffled order gets an edge with probability
/// `edge_prob`, capped at `max_parents` per node.
pub fn random_dag<R: Rng>(names: &[&str], edge_prob: f64, max_parents: usize, rng: &mut R) -> Result<Dag> {
    let mut order: Vec<usize> = (0..names.len()).collect();
    order.shuffle(rng);
    let mut dag = Dag::new(names)?;
    for b in 1..order.len() {
        for a in 0..b {
            if dag.parents(order[b]).len() < max_parents && rng.random_bool(edge_prob) {
                dag.add_edge_idx(order[a], order[b])?;
            }
        }
    }
    Ok(dag)
}

/// Names of the demonstration network's nodes; `Y` is the target.
pub const DEMO_NODES: [&str; 10] = ["Y", "Q1", "Q2", "Q3", "Q4", "Q5", "Q6", "Q7", "Q8", "Q9"];

/// Edges of the demonstration network.
pub const DEMO_EDGES: [(&str, &str); 9] = [
    ("Q1", "Y"),
    ("Q2", "Y"),
    ("Y", "Q3"),
    ("Y", "Q4"),
    ("Q3", "Q5"),
    ("Q1", "Q6"),
    ("Q2", "Q7"),
    ("Q4", "Q7"),
    ("Q8", "Q9"),
];

/// Ten 5-state variables. The target's mode is `(Q1 + Q2) mod 5`, so each
/// parent alone carries almost no information about it; Q8 and Q9 form an
/// island independent of the rest.
pub fn demo_network() -> ParamNetwork {
    let dag = Dag::from_edges(&DEMO_NODES, &DEMO_EDGES).expect("demo edges form a DAG");
    let variables = numbered_variables(&DEMO_NODES, &[5; 10]);
    let strengths = [0.7, 0.0, 0.0, 0.6, 0.55, 0.5, 0.5, 0.5, 0.0, 0.6];
    let tables = (0..dag.len())
        .map(|i| {
            let parents = dag.parents(i);
            if parents.is_empty() {
                return vec![0.2; 5];
            }
            let cards = vec![5; parents.len()];
            // fixed rotation per node so children are not plain copies
            noisy_table(cards, 5, strengths[i], |s| (s + i) % 5)
        })
        .collect();
    ParamNetwork::new(dag, variables, tables).expect("demo tables are normalized")
}
