use std::io::Write;

use crate::bayesnet::dag::Dag;
use crate::dataset::{Dataset, VariableSpec};
use crate::error::{Error, Result};

/// Dirichlet prior over every CPT row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prior {
    /// Same pseudo-count in every cell; `alpha0 = 1` is uniform on the simplex.
    Uniform { alpha0: f64 },
    /// Equivalent sample size spread as `ess / (q * r)` per cell.
    Bdeu { ess: f64 },
}

impl Default for Prior {
    fn default() -> Self {
        Prior::Uniform { alpha0: 1.0 }
    }
}

impl Prior {
    pub fn cell_alpha(&self, q: usize, r: usize) -> f64 {
        match *self {
            Prior::Uniform { alpha0 } => alpha0,
            Prior::Bdeu { ess } => ess / (q * r) as f64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let v = match *self {
            Prior::Uniform { alpha0 } => alpha0,
            Prior::Bdeu { ess } => ess,
        };
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::Invalid(format!("prior parameter must be positive, got {v}")))
        }
    }
}

/// Counts `N_jk` of a family, rows indexed by parent configuration
/// (mixed radix over `parent_cols`, last parent fastest).
pub fn family_counts(data: &Dataset, child_col: usize, parent_cols: &[usize]) -> (Vec<f64>, usize, usize) {
    let cards = data.schema().cardinalities();
    let r = cards[child_col];
    let q: usize = parent_cols.iter().map(|&p| cards[p]).product();
    let mut counts = vec![0.0; q * r];
    for row in data.rows() {
        let j = parent_cols.iter().fold(0, |acc, &p| acc * cards[p] + row[p]);
        counts[j * r + row[child_col]] += 1.0;
    }
    (counts, q, r)
}

/// Conditional probability table with Dirichlet prior and observed counts,
/// both `q x r` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    pub node: String,
    pub parent_order: Vec<String>,
    pub q: usize,
    pub r: usize,
    pub alpha: Vec<f64>,
    pub counts: Vec<f64>,
}

impl Cpt {
    pub fn posterior(&self, j: usize, k: usize) -> f64 {
        self.alpha[j * self.r + k] + self.counts[j * self.r + k]
    }

    pub fn posterior_row(&self, j: usize) -> Vec<f64> {
        (0..self.r).map(|k| self.posterior(j, k)).collect()
    }

    pub fn posterior_mean_row(&self, j: usize) -> Vec<f64> {
        let row = self.posterior_row(j);
        let s: f64 = row.iter().sum();
        row.into_iter().map(|a| a / s).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.q * self.r
    }
}

/// DAG plus one Dirichlet-count CPT per node, in DAG node order.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedNetwork {
    pub dag: Dag,
    pub variables: Vec<VariableSpec>,
    pub cpts: Vec<Cpt>,
}

/// Tallies `N_ijk` for every family and attaches the prior pseudo-counts.
pub fn fit_conjugate(dag: &Dag, data: &Dataset, prior: Prior) -> Result<FittedNetwork> {
    prior.validate()?;
    let cols: Vec<usize> = dag
        .nodes()
        .iter()
        .map(|n| data.schema().require(n))
        .collect::<Result<_>>()?;
    let variables: Vec<VariableSpec> = cols
        .iter()
        .map(|&c| data.schema().variables()[c].clone())
        .collect();
    let cpts = (0..dag.len())
        .map(|i| {
            let parent_cols: Vec<usize> = dag.parents(i).iter().map(|&p| cols[p]).collect();
            let (counts, q, r) = family_counts(data, cols[i], &parent_cols);
            Cpt {
                node: dag.nodes()[i].clone(),
                parent_order: dag.parent_names(i),
                q,
                r,
                alpha: vec![prior.cell_alpha(q, r); q * r],
                counts,
            }
        })
        .collect();
    Ok(FittedNetwork {
        dag: dag.clone(),
        variables,
        cpts,
    })
}

impl FittedNetwork {
    pub fn cards(&self) -> Vec<usize> {
        self.variables.iter().map(|v| v.cardinality()).collect()
    }

    pub fn node_index(&self, name: &str) -> Result<usize> {
        self.dag.require(name)
    }

    pub fn cpt(&self, name: &str) -> Result<&Cpt> {
        Ok(&self.cpts[self.node_index(name)?])
    }

    /// `(prod of parent cardinalities) * r_node`.
    pub fn parameter_count(&self, node: &str) -> Result<usize> {
        Ok(self.cpt(node)?.parameter_count())
    }

    /// Point-parameter network at the posterior means.
    pub fn posterior_mean(&self) -> ParamNetwork {
        let tables = self
            .cpts
            .iter()
            .map(|c| (0..c.q).flat_map(|j| c.posterior_mean_row(j)).collect())
            .collect();
        ParamNetwork {
            dag: self.dag.clone(),
            variables: self.variables.clone(),
            tables,
        }
    }

    /// Human-readable label of parent configuration `j` of `node`.
    pub fn config_label(&self, node: usize, j: usize) -> String {
        let cards = self.cards();
        let parents = self.dag.parents(node);
        let mut rem = j;
        let mut states = vec![0; parents.len()];
        for (slot, &p) in parents.iter().enumerate().rev() {
            states[slot] = rem % cards[p];
            rem /= cards[p];
        }
        parents
            .iter()
            .zip(states)
            .map(|(&p, s)| format!("{}={}", self.dag.nodes()[p], self.variables[p].states[s]))
            .collect::<Vec<_>>()
            .join(";")
    }

    /// CSV of `(node, parent_config, state, alpha_posterior)`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["node", "parent_config", "state", "alpha_posterior"])?;
        for (i, cpt) in self.cpts.iter().enumerate() {
            for j in 0..cpt.q {
                let label = self.config_label(i, j);
                for k in 0..cpt.r {
                    w.write_record([
                        cpt.node.clone(),
                        label.clone(),
                        self.variables[i].states[k].clone(),
                        format!("{}", cpt.posterior(j, k)),
                    ])?;
                }
            }
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

/// Network with fixed probability tables (`q x r` row-major per node).
#[derive(Debug, Clone, PartialEq)]
pub struct ParamNetwork {
    pub dag: Dag,
    pub variables: Vec<VariableSpec>,
    pub tables: Vec<Vec<f64>>,
}

impl ParamNetwork {
    pub fn new(dag: Dag, variables: Vec<VariableSpec>, tables: Vec<Vec<f64>>) -> Result<Self> {
        if variables.len() != dag.len() || tables.len() != dag.len() {
            return Err(Error::VariableMismatch);
        }
        for (i, v) in variables.iter().enumerate() {
            if v.name != dag.nodes()[i] {
                return Err(Error::VariableMismatch);
            }
        }
        let net = ParamNetwork {
            dag,
            variables,
            tables,
        };
        let cards = net.cards();
        for i in 0..net.dag.len() {
            let r = cards[i];
            let q: usize = net.dag.parents(i).iter().map(|&p| cards[p]).product();
            let t = &net.tables[i];
            if t.len() != q * r {
                return Err(Error::Invalid(format!(
                    "table for `{}` has {} entries, expected {}",
                    net.dag.nodes()[i],
                    t.len(),
                    q * r
                )));
            }
            for row in t.chunks(r) {
                let s: f64 = row.iter().sum();
                if row.iter().any(|&p| p < 0.0) || (s - 1.0).abs() > 1e-9 {
                    return Err(Error::Invalid(format!(
                        "table row for `{}` is not a distribution",
                        net.dag.nodes()[i]
                    )));
                }
            }
        }
        Ok(net)
    }

    pub fn cards(&self) -> Vec<usize> {
        self.variables.iter().map(|v| v.cardinality()).collect()
    }

    /// Parent configuration index of `node` under a full assignment.
    #[inline]
    pub fn config_index(&self, node: usize, assignment: &[usize], cards: &[usize]) -> usize {
        self.dag
            .parents(node)
            .iter()
            .fold(0, |acc, &p| acc * cards[p] + assignment[p])
    }

    #[inline]
    pub fn prob(&self, node: usize, assignment: &[usize], cards: &[usize]) -> f64 {
        let j = self.config_index(node, assignment, cards);
        self.tables[node][j * cards[node] + assignment[node]]
    }

    /// Probability of a full assignment.
    pub fn joint_probability(&self, assignment: &[usize]) -> f64 {
        let cards = self.cards();
        (0..self.dag.len())
            .map(|i| self.prob(i, assignment, &cards))
            .product()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Role, Schema};
    use approx::assert_abs_diff_eq;

    fn schema(cards: &[usize]) -> Schema {
        Schema::new(
            cards
                .iter()
                .enumerate()
                .map(|(i, &r)| {
                    VariableSpec::numbered(
                        ["A", "B", "C"][i],
                        r,
                        if i == 0 { Role::Target } else { Role::Predictor },
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn empty_data_gives_prior() {
        let data = Dataset::new(schema(&[2, 3]), vec![]).unwrap();
        let dag = Dag::from_edges(&["A", "B"], &[("A", "B")]).unwrap();
        let fit = fit_conjugate(&dag, &data, Prior::default()).unwrap();
        for cpt in &fit.cpts {
            assert!(cpt.counts.iter().all(|&c| c == 0.0));
            assert!(cpt.alpha.iter().all(|&a| a == 1.0));
        }
    }

    #[test]
    fn binary_root_update() {
        let data = Dataset::new(schema(&[2]).project(&["A".into()]).unwrap(), vec![vec![0], vec![0], vec![1]])
            .unwrap();
        let dag = Dag::new(&["A"]).unwrap();
        let fit = fit_conjugate(&dag, &data, Prior::default()).unwrap();
        assert_eq!(fit.cpts[0].posterior_row(0), vec![3.0, 2.0]);
        let mean = fit.cpts[0].posterior_mean_row(0);
        assert_abs_diff_eq!(mean[0], 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(mean[1], 0.4, epsilon = 1e-12);
    }

    #[test]
    fn unseen_parent_config_keeps_prior() {
        let data = Dataset::new(schema(&[2, 2]), vec![vec![0, 1], vec![0, 0]]).unwrap();
        let dag = Dag::from_edges(&["A", "B"], &[("A", "B")]).unwrap();
        let fit = fit_conjugate(&dag, &data, Prior::default()).unwrap();
        assert_eq!(fit.cpts[1].posterior_row(1), vec![1.0, 1.0]);
        assert_eq!(fit.cpts[1].posterior_row(0), vec![2.0, 2.0]);
    }

    #[test]
    fn parameter_counts() {
        let s = schema(&[10, 5, 5]);
        let data = Dataset::new(s, vec![]).unwrap();
        let root = Dag::new(&["A"]).unwrap();
        assert_eq!(fit_conjugate(&root, &data, Prior::default()).unwrap().parameter_count("A").unwrap(), 10);
        let one = Dag::from_edges(&["A", "B"], &[("A", "B")]).unwrap();
        assert_eq!(fit_conjugate(&one, &data, Prior::default()).unwrap().parameter_count("B").unwrap(), 50);
        let two = Dag::from_edges(&["A", "B", "C"], &[("B", "A")]).unwrap();
        let mut two = two;
        two.add_edge("C", "A").unwrap();
        let data = Dataset::new(schema(&[5, 5, 5]), vec![]).unwrap();
        assert_eq!(fit_conjugate(&two, &data, Prior::default()).unwrap().parameter_count("A").unwrap(), 125);
    }

    #[test]
    fn row_pseudo_counts_sum() {
        let rows = vec![vec![0, 1, 2], vec![1, 1, 0], vec![0, 0, 1], vec![0, 1, 1]];
        let data = Dataset::new(schema(&[2, 2, 3]), rows).unwrap();
        let dag = Dag::from_edges(&["A", "B", "C"], &[("A", "C"), ("B", "C")]).unwrap();
        let fit = fit_conjugate(&dag, &data, Prior::Uniform { alpha0: 0.5 }).unwrap();
        let c = &fit.cpts[2];
        for j in 0..c.q {
            let (a, b) = (j / 2, j % 2);
            let n = data.rows().iter().filter(|r| r[0] == a && r[1] == b).count() as f64;
            let s: f64 = c.posterior_row(j).iter().sum();
            assert_abs_diff_eq!(s, 0.5 * 3.0 + n, epsilon = 1e-12);
        }
    }

    #[test]
    fn export_has_one_row_per_cell() {
        let data = Dataset::new(schema(&[2, 3]), vec![vec![1, 2]]).unwrap();
        let dag = Dag::from_edges(&["A", "B"], &[("A", "B")]).unwrap();
        let fit = fit_conjugate(&dag, &data, Prior::default()).unwrap();
        let mut buf = Vec::new();
        fit.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 + 6);
        assert!(text.contains("B,A=2,3,2"));
    }
}
