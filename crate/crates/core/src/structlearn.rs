//! Candidate structure learners: greedy hill climbing over a decomposable
//! score, Chow-Liu trees, TAN, naive Bayes and an exhaustive/greedy
//! Dirichlet-score learner.

use std::collections::{HashMap, VecDeque};
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bayesnet::dag::parse_arrow;
use crate::bayesnet::{family_counts, Dag, Prior};
use crate::dataset::{strip_comment, Dataset};
use crate::error::{Error, Result};
use crate::infotheory::{conditional_mutual_information, joint2_from_data, joint3_from_data, mutual_information};
use crate::modelselect::family_log_ml;

/// Required and forbidden directed edges supplied by domain experts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeConstraints {
    pub required: Vec<(String, String)>,
    pub forbidden: Vec<(String, String)>,
}

impl EdgeConstraints {
    pub fn parse(text: &str, origin: &str) -> Result<EdgeConstraints> {
        let mut c = EdgeConstraints::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let (kind, rest) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| Error::parse(origin, lineno + 1, "expected `require|forbid A -> B`"))?;
            let (p, ch) = parse_arrow(rest.trim())
                .ok_or_else(|| Error::parse(origin, lineno + 1, "expected `A -> B`"))?;
            let edge = (p.to_string(), ch.to_string());
            match kind {
                "require" => c.required.push(edge),
                "forbid" => c.forbidden.push(edge),
                other => {
                    return Err(Error::parse(
                        origin,
                        lineno + 1,
                        format!("unknown directive `{other}`"),
                    ))
                }
            }
        }
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<EdgeConstraints> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        EdgeConstraints::parse(&text, &path.display().to_string())
    }

    pub fn is_empty(&self) -> bool {
        self.required.is_empty() && self.forbidden.is_empty()
    }

    /// Resolves names against `nodes` and checks consistency.
    fn resolve(&self, nodes: &[String]) -> Result<Resolved> {
        let idx = |n: &str| {
            nodes
                .iter()
                .position(|x| x == n)
                .ok_or_else(|| Error::Constraints(format!("unknown variable `{n}`")))
        };
        let n = nodes.len();
        let mut required = vec![vec![false; n]; n];
        let mut forbidden = vec![vec![false; n]; n];
        for (p, c) in &self.forbidden {
            forbidden[idx(p)?][idx(c)?] = true;
        }
        let mut start = Dag::new(nodes)?;
        for (p, c) in &self.required {
            let (pi, ci) = (idx(p)?, idx(c)?);
            if forbidden[pi][ci] {
                return Err(Error::Constraints(format!("{p} -> {c} both required and forbidden")));
            }
            required[pi][ci] = true;
            start
                .add_edge_idx(pi, ci)
                .map_err(|e| Error::Constraints(format!("required edges: {e}")))?;
        }
        Ok(Resolved {
            required,
            forbidden,
            start,
        })
    }

    pub fn admits(&self, dag: &Dag) -> bool {
        self.required
            .iter()
            .all(|(p, c)| match (dag.index_of(p), dag.index_of(c)) {
                (Some(p), Some(c)) => dag.has_edge(p, c),
                _ => false,
            })
            && self
                .forbidden
                .iter()
                .all(|(p, c)| match (dag.index_of(p), dag.index_of(c)) {
                    (Some(p), Some(c)) => !dag.has_edge(p, c),
                    _ => true,
                })
    }
}

struct Resolved {
    required: Vec<Vec<bool>>,
    forbidden: Vec<Vec<bool>>,
    start: Dag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateModel {
    pub label: String,
    pub dag: Dag,
    pub provenance: String,
}

impl CandidateModel {
    pub fn new(label: impl Into<String>, dag: Dag, provenance: impl Into<String>) -> Self {
        CandidateModel {
            label: label.into(),
            dag,
            provenance: provenance.into(),
        }
    }
}

/// Decomposable structure score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScoreKind {
    Bic,
    /// Log marginal likelihood under the given Dirichlet prior.
    Bd(Prior),
}

impl ScoreKind {
    pub fn name(&self) -> String {
        match self {
            ScoreKind::Bic => "bic".into(),
            ScoreKind::Bd(Prior::Uniform { alpha0 }) => format!("bd(alpha0={alpha0})"),
            ScoreKind::Bd(Prior::Bdeu { ess }) => format!("bdeu(ess={ess})"),
        }
    }
}

/// Maximized log-likelihood minus `(k/2) ln n`, `k = q (r - 1)`.
pub fn bic_family(counts: &[f64], q: usize, r: usize, n: usize) -> f64 {
    let mut ll = 0.0;
    for row in counts.chunks(r) {
        let nj: f64 = row.iter().sum();
        for &c in row {
            if c > 0.0 {
                ll += c * (c / nj).ln();
            }
        }
    }
    let penalty = if n > 0 {
        0.5 * (q * (r - 1)) as f64 * (n as f64).ln()
    } else {
        0.0
    };
    ll - penalty
}

pub fn family_score(kind: ScoreKind, data: &Dataset, child_col: usize, parent_cols: &[usize]) -> f64 {
    let (counts, q, r) = family_counts(data, child_col, parent_cols);
    match kind {
        ScoreKind::Bic => bic_family(&counts, q, r, data.n_rows()),
        ScoreKind::Bd(prior) => family_log_ml(&counts, q, r, prior),
    }
}

fn dag_columns(dag: &Dag, data: &Dataset) -> Result<Vec<usize>> {
    dag.nodes()
        .iter()
        .map(|n| data.schema().require(n))
        .collect()
}

/// Per-node family scores of `dag`, in node order.
pub fn family_scores(dag: &Dag, data: &Dataset, kind: ScoreKind) -> Result<Vec<f64>> {
    let cols = dag_columns(dag, data)?;
    Ok((0..dag.len())
        .map(|i| {
            let pcols: Vec<usize> = dag.parents(i).iter().map(|&p| cols[p]).collect();
            family_score(kind, data, cols[i], &pcols)
        })
        .collect())
}

/// Sum of family scores in node order.
pub fn score_dag(dag: &Dag, data: &Dataset, kind: ScoreKind) -> Result<f64> {
    Ok(family_scores(dag, data, kind)?.iter().sum())
}

/// BIC of `dag` (higher is better).
pub fn bic_score(dag: &Dag, data: &Dataset) -> Result<f64> {
    score_dag(dag, data, ScoreKind::Bic)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Operator {
    Add,
    Delete,
    Reverse,
}

/// Every DAG one add/delete/reverse away from `dag` that respects the
/// constraints, in (operator, parent name, child name) order.
pub fn neighbors(
    dag: &Dag,
    constraints: &EdgeConstraints,
    max_parents: Option<usize>,
) -> Result<Vec<(Operator, usize, usize, Dag)>> {
    let res = constraints.resolve(dag.nodes())?;
    Ok(neighbors_resolved(dag, &res, max_parents))
}

fn name_ordered_pairs(dag: &Dag) -> Vec<(usize, usize)> {
    let mut by_name: Vec<usize> = (0..dag.len()).collect();
    by_name.sort_by(|&a, &b| dag.nodes()[a].cmp(&dag.nodes()[b]));
    let mut out = Vec::new();
    for &p in &by_name {
        for &c in &by_name {
            if p != c {
                out.push((p, c));
            }
        }
    }
    out
}

fn neighbors_resolved(
    dag: &Dag,
    res: &Resolved,
    max_parents: Option<usize>,
) -> Vec<(Operator, usize, usize, Dag)> {
    let pairs = name_ordered_pairs(dag);
    let fits = |d: &Dag, node: usize| max_parents.is_none_or(|m| d.parents(node).len() < m);
    let mut out = Vec::new();
    for op in [Operator::Add, Operator::Delete, Operator::Reverse] {
        for &(p, c) in &pairs {
            match op {
                Operator::Add => {
                    if dag.has_edge(p, c) || dag.has_edge(c, p) || res.forbidden[p][c] || !fits(dag, c) {
                        continue;
                    }
                    let mut d = dag.clone();
                    if d.add_edge_idx(p, c).is_ok() {
                        out.push((op, p, c, d));
                    }
                }
                Operator::Delete => {
                    if !dag.has_edge(p, c) || res.required[p][c] {
                        continue;
                    }
                    let mut d = dag.clone();
                    d.remove_edge_idx(p, c).expect("edge present");
                    out.push((op, p, c, d));
                }
                Operator::Reverse => {
                    if !dag.has_edge(p, c) || res.required[p][c] || res.forbidden[c][p] || !fits(dag, p) {
                        continue;
                    }
                    let mut d = dag.clone();
                    if d.reverse_edge_idx(p, c).is_ok() {
                        out.push((op, p, c, d));
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct HillClimbOptions {
    pub score: ScoreKind,
    pub restarts: usize,
    pub seed: u64,
    pub max_parents: Option<usize>,
    /// Random operators applied before each restart.
    pub perturbation: usize,
}

impl Default for HillClimbOptions {
    fn default() -> Self {
        HillClimbOptions {
            score: ScoreKind::Bic,
            restarts: 0,
            seed: 0,
            max_parents: None,
            perturbation: 4,
        }
    }
}

const TIE_TOLERANCE: f64 = 1e-12;

struct FamilyCache<'a> {
    data: &'a Dataset,
    cols: Vec<usize>,
    kind: ScoreKind,
    cache: HashMap<(usize, Vec<usize>), f64>,
}

impl<'a> FamilyCache<'a> {
    fn score(&mut self, dag: &Dag, node: usize) -> f64 {
        let key = (node, dag.parents(node).to_vec());
        if let Some(&s) = self.cache.get(&key) {
            return s;
        }
        let pcols: Vec<usize> = key.1.iter().map(|&p| self.cols[p]).collect();
        let s = family_score(self.kind, self.data, self.cols[node], &pcols);
        self.cache.insert(key, s);
        s
    }

    fn family_vec(&mut self, dag: &Dag) -> Vec<f64> {
        (0..dag.len()).map(|i| self.score(dag, i)).collect()
    }
}

fn climb(start: Dag, res: &Resolved, max_parents: Option<usize>, cache: &mut FamilyCache) -> (Dag, f64) {
    let mut dag = start;
    let mut fam = cache.family_vec(&dag);
    let mut total: f64 = fam.iter().sum();
    loop {
        let mut best: Option<(f64, Dag, Vec<f64>)> = None;
        for (op, p, c, cand) in neighbors_resolved(&dag, res, max_parents) {
            let mut f = fam.clone();
            f[c] = cache.score(&cand, c);
            if op == Operator::Reverse {
                f[p] = cache.score(&cand, p);
            }
            let s: f64 = f.iter().sum();
            // ties within rounding keep the earlier (lexicographically smaller) move
            let better = match &best {
                None => s > total,
                Some(b) => s > b.0 + TIE_TOLERANCE * (1.0 + b.0.abs()),
            };
            if better {
                best = Some((s, cand, f));
            }
        }
        match best {
            Some((s, d, f)) => {
                dag = d;
                fam = f;
                total = s;
            }
            None => return (dag, total),
        }
    }
}

fn learn_greedy(
    data: &Dataset,
    constraints: &EdgeConstraints,
    opts: &HillClimbOptions,
) -> Result<(Dag, f64)> {
    let names = data.schema().names();
    if names.len() < 2 {
        return Err(Error::Invalid("structure learning needs at least 2 variables".into()));
    }
    let res = constraints.resolve(&names)?;
    let mut cache = FamilyCache {
        data,
        cols: (0..names.len()).collect(),
        kind: opts.score,
        cache: HashMap::new(),
    };
    let (mut best, mut best_score) = climb(res.start.clone(), &res, opts.max_parents, &mut cache);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.restarts {
        let mut d = best.clone();
        for _ in 0..opts.perturbation {
            let moves = neighbors_resolved(&d, &res, opts.max_parents);
            if moves.is_empty() {
                break;
            }
            let pick = rng.random_range(0..moves.len());
            d = moves.into_iter().nth(pick).expect("index in range").3;
        }
        let (cand, s) = climb(d, &res, opts.max_parents, &mut cache);
        if s > best_score {
            best = cand;
            best_score = s;
        }
    }
    Ok((best, best_score))
}

/// Greedy add/delete/reverse search to a local optimum of the score,
/// starting from the required edges. Best result over random restarts.
pub fn hill_climb(
    data: &Dataset,
    constraints: &EdgeConstraints,
    opts: &HillClimbOptions,
) -> Result<CandidateModel> {
    let (dag, _) = learn_greedy(data, constraints, opts)?;
    Ok(CandidateModel::new(
        "hc",
        dag,
        format!(
            "hill_climb(score={}, restarts={}, seed={}, max_parents={})",
            opts.score.name(),
            opts.restarts,
            opts.seed,
            opts.max_parents.map_or("none".into(), |m| m.to_string())
        ),
    ))
}

/// Kruskal maximum-weight spanning forest. Ties are broken by the
/// lexicographic order of the (smaller name, larger name) pair.
pub fn maximum_spanning_tree(names: &[String], weight: impl Fn(usize, usize) -> f64) -> Vec<(usize, usize)> {
    let n = names.len();
    let mut edges: Vec<(f64, &str, &str, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = if names[i] <= names[j] { (i, j) } else { (j, i) };
            edges.push((weight(i, j), &names[a], &names[b], a, b));
        }
    }
    edges.sort_by(|x, y| y.0.total_cmp(&x.0).then_with(|| (x.1, x.2).cmp(&(y.1, y.2))));
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut tree = Vec::with_capacity(n.saturating_sub(1));
    for (_, _, _, a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            tree.push((a, b));
            if tree.len() + 1 == n {
                break;
            }
        }
    }
    tree
}

/// Directs tree edges away from `root` (breadth first).
fn orient_from_root(n: usize, skeleton: &[(usize, usize)], root: usize) -> Vec<(usize, usize)> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in skeleton {
        adj[a].push(b);
        adj[b].push(a);
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    let mut roots = vec![root];
    roots.extend(0..n);
    for r in roots {
        if seen[r] {
            continue;
        }
        seen[r] = true;
        queue.push_back(r);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    out.push((u, v));
                    queue.push_back(v);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum Orientation {
    /// Direct every edge away from the named variable.
    RootAt(String),
    /// Expert-supplied directions covering every skeleton edge.
    Edges(Vec<(String, String)>),
}

impl Orientation {
    pub fn parse_edges(text: &str, origin: &str) -> Result<Orientation> {
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let (p, c) = parse_arrow(line)
                .ok_or_else(|| Error::parse(origin, lineno + 1, "expected `A -> B`"))?;
            edges.push((p.to_string(), c.to_string()));
        }
        Ok(Orientation::Edges(edges))
    }

    pub fn from_file(path: &Path) -> Result<Orientation> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Orientation::parse_edges(&text, &path.display().to_string())
    }
}

/// Undirected maximum-MI skeleton over all variables of `data`.
pub fn chow_liu_skeleton(data: &Dataset) -> Result<Vec<(usize, usize)>> {
    let names = data.schema().names();
    let n = names.len();
    let mut w = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let mi = mutual_information(&joint2_from_data(data, i, j))?;
            w[i][j] = mi;
            w[j][i] = mi;
        }
    }
    Ok(maximum_spanning_tree(&names, |i, j| w[i][j]))
}

/// Chow-Liu tree oriented from the target or from an expert edge list.
pub fn chow_liu(data: &Dataset, orientation: &Orientation) -> Result<CandidateModel> {
    let names = data.schema().names();
    if names.len() < 2 {
        return Err(Error::Invalid("chow-liu needs at least 2 variables".into()));
    }
    let skeleton = chow_liu_skeleton(data)?;
    let mut dag = Dag::new(&names)?;
    let provenance = match orientation {
        Orientation::RootAt(root) => {
            let r = data.schema().require(root)?;
            for (p, c) in orient_from_root(names.len(), &skeleton, r) {
                dag.add_edge_idx(p, c)?;
            }
            format!("chow_liu(orientation=root:{root})")
        }
        Orientation::Edges(edges) => {
            let mut pending: Vec<(usize, usize)> = skeleton.clone();
            for (p, c) in edges {
                let (pi, ci) = (
                    dag.index_of(p).ok_or_else(|| Error::Orientation(format!("unknown variable `{p}`")))?,
                    dag.index_of(c).ok_or_else(|| Error::Orientation(format!("unknown variable `{c}`")))?,
                );
                let pos = pending
                    .iter()
                    .position(|&(a, b)| (a, b) == (pi, ci) || (a, b) == (ci, pi))
                    .ok_or_else(|| Error::Orientation(format!("{p} -> {c} is not an open skeleton edge")))?;
                pending.remove(pos);
                dag.add_edge_idx(pi, ci)
                    .map_err(|e| Error::Orientation(e.to_string()))?;
            }
            if let Some(&(a, b)) = pending.first() {
                return Err(Error::Orientation(format!(
                    "no direction given for {} - {}",
                    names[a], names[b]
                )));
            }
            "chow_liu(orientation=file)".to_string()
        }
    };
    Ok(CandidateModel::new("chowliu", dag, provenance))
}

/// Tree-augmented naive Bayes: class parent of every feature plus a
/// maximum CMI(Xi, Xj | class) tree over features rooted at the
/// lexicographically first feature.
pub fn tan(data: &Dataset, class_variable: &str) -> Result<CandidateModel> {
    let names = data.schema().names();
    let class = data.schema().require(class_variable)?;
    let features: Vec<usize> = (0..names.len()).filter(|&i| i != class).collect();
    if features.len() < 2 {
        return Err(Error::Invalid("tan needs at least 2 features".into()));
    }
    let fnames: Vec<String> = features.iter().map(|&i| names[i].clone()).collect();
    let m = features.len();
    let mut w = vec![vec![0.0; m]; m];
    for a in 0..m {
        for b in a + 1..m {
            let cmi = conditional_mutual_information(&joint3_from_data(
                data,
                features[a],
                features[b],
                &[class],
            ))?;
            w[a][b] = cmi;
            w[b][a] = cmi;
        }
    }
    let tree = maximum_spanning_tree(&fnames, |a, b| w[a][b]);
    let root = (0..m).min_by(|&a, &b| fnames[a].cmp(&fnames[b])).expect("non-empty");
    let mut dag = Dag::new(&names)?;
    for &f in &features {
        dag.add_edge_idx(class, f)?;
    }
    for (p, c) in orient_from_root(m, &tree, root) {
        dag.add_edge_idx(features[p], features[c])?;
    }
    Ok(CandidateModel::new(
        "tan",
        dag,
        format!("tan(class={class_variable}, root={})", fnames[root]),
    ))
}

/// Class variable as the only parent of every feature.
pub fn naive(data: &Dataset, class_variable: &str) -> Result<CandidateModel> {
    let names = data.schema().names();
    let class = data.schema().require(class_variable)?;
    let mut dag = Dag::new(&names)?;
    for f in (0..names.len()).filter(|&i| i != class) {
        dag.add_edge_idx(class, f)?;
    }
    Ok(CandidateModel::new(
        "naive",
        dag,
        format!("naive(class={class_variable})"),
    ))
}

/// Largest variable count searched exhaustively by [`bd_learn`].
pub const EXHAUSTIVE_LIMIT: usize = 5;

/// Maximizes the log marginal likelihood: exhaustively over every DAG for
/// small variable sets, otherwise by hill climbing.
pub fn bd_learn(
    data: &Dataset,
    constraints: &EdgeConstraints,
    prior: Prior,
    opts: &HillClimbOptions,
) -> Result<CandidateModel> {
    let names = data.schema().names();
    let kind = ScoreKind::Bd(prior);
    if names.len() < 2 {
        return Err(Error::Invalid("structure learning needs at least 2 variables".into()));
    }
    let (dag, mode) = if names.len() <= EXHAUSTIVE_LIMIT {
        (exhaustive_search(data, constraints, kind)?.0, "exhaustive")
    } else {
        let opts = HillClimbOptions {
            score: kind,
            ..opts.clone()
        };
        (learn_greedy(data, constraints, &opts)?.0, "greedy")
    };
    Ok(CandidateModel::new(
        "bnsl",
        dag,
        format!("bd_learn(score={}, mode={mode})", kind.name()),
    ))
}

/// Best DAG over all parent-set assignments (`n <= 5`). Ties keep the first
/// DAG in enumeration order.
pub fn exhaustive_search(data: &Dataset, constraints: &EdgeConstraints, kind: ScoreKind) -> Result<(Dag, f64)> {
    let names = data.schema().names();
    let n = names.len();
    if n > EXHAUSTIVE_LIMIT {
        return Err(Error::Invalid(format!("exhaustive search limited to {EXHAUSTIVE_LIMIT} variables")));
    }
    let res = constraints.resolve(&names)?;
    // admissible parent masks and their family scores per node
    let mut options: Vec<Vec<(u32, f64)>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut opts = Vec::new();
        for mask in 0u32..(1 << n) {
            if mask & (1 << i) != 0 {
                continue;
            }
            let ok = (0..n).all(|p| {
                let has = mask & (1 << p) != 0;
                !(res.required[p][i] && !has) && !(res.forbidden[p][i] && has)
            });
            if ok {
                let pcols: Vec<usize> = (0..n).filter(|&p| mask & (1 << p) != 0).collect();
                opts.push((mask, family_score(kind, data, i, &pcols)));
            }
        }
        options.push(opts);
    }
    let acyclic = |masks: &[u32]| {
        let mut done = 0u32;
        for _ in 0..n {
            let mut progress = false;
            for (i, &m) in masks.iter().enumerate() {
                if done & (1 << i) == 0 && m & !done == 0 {
                    done |= 1 << i;
                    progress = true;
                }
            }
            if !progress {
                break;
            }
        }
        done.count_ones() as usize == n
    };
    let mut best: Option<(Vec<u32>, f64)> = None;
    let mut choice = vec![0usize; n];
    loop {
        let masks: Vec<u32> = (0..n).map(|i| options[i][choice[i]].0).collect();
        if acyclic(&masks) {
            let s: f64 = (0..n).map(|i| options[i][choice[i]].1).sum();
            if best.as_ref().is_none_or(|b| s > b.1) {
                best = Some((masks, s));
            }
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                let (masks, s) = best.ok_or_else(|| Error::Constraints("no admissible DAG".into()))?;
                let mut dag = Dag::new(&names)?;
                for (i, m) in masks.iter().enumerate() {
                    for p in 0..n {
                        if m & (1 << p) != 0 {
                            dag.add_edge_idx(p, i)?;
                        }
                    }
                }
                return Ok((dag, s));
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < options[pos].len() {
                break;
            }
            choice[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Role, Schema, VariableSpec};
    use crate::modelselect::log_marginal_likelihood;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn dataset(names: &[&str], cards: &[usize], rows: Vec<Vec<usize>>) -> Dataset {
        let vars = names
            .iter()
            .zip(cards)
            .enumerate()
            .map(|(i, (n, &r))| {
                VariableSpec::numbered(*n, r, if i == 0 { Role::Target } else { Role::Predictor })
            })
            .collect();
        Dataset::new(Schema::new(vars).unwrap(), rows).unwrap()
    }

    fn dependent_pair(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..n)
            .map(|_| {
                let a = rng.random_range(0..2);
                let b = if rng.random::<f64>() < 0.9 { a } else { 1 - a };
                vec![a, b]
            })
            .collect();
        dataset(&["A", "B"], &[2, 2], rows)
    }

    fn independent(n: usize, m: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let names: Vec<String> = (0..m).map(|i| format!("V{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let rows = (0..n)
            .map(|_| (0..m).map(|_| rng.random_range(0..3)).collect())
            .collect();
        dataset(&refs, &vec![3; m], rows)
    }

    #[test]
    fn bic_single_binary_node() {
        let d = dataset(&["A"], &[2], vec![vec![0], vec![0], vec![1]]);
        let s = bic_score(&Dag::new(&["A"]).unwrap(), &d).unwrap();
        let expected = 2.0 * (2.0f64 / 3.0).ln() + (1.0f64 / 3.0).ln() - 0.5 * 3f64.ln();
        assert_abs_diff_eq!(s, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(s, -2.45885, epsilon = 1e-5);
    }

    #[test]
    fn bic_penalty_prefers_empty_graph_on_independent_data() {
        let d = independent(5000, 2, 3);
        let empty = Dag::new(&["V0", "V1"]).unwrap();
        let edge = Dag::from_edges(&["V0", "V1"], &[("V0", "V1")]).unwrap();
        assert!(bic_score(&empty, &d).unwrap() > bic_score(&edge, &d).unwrap());
        // likelihood term alone never decreases with an added edge
        let ll = |dag: &Dag| {
            let f = family_scores(dag, &d, ScoreKind::Bic).unwrap();
            let cols: Vec<usize> = vec![0, 1];
            f.iter().enumerate().map(|(i, s)| {
                let (_, q, r) = family_counts(&d, cols[i], &dag.parents(i).iter().map(|&p| cols[p]).collect::<Vec<_>>());
                s + 0.5 * (q * (r - 1)) as f64 * (d.n_rows() as f64).ln()
            }).sum::<f64>()
        };
        assert!(ll(&edge) >= ll(&empty) - 1e-9);
    }

    #[test]
    fn bic_decomposes() {
        let d = independent(300, 4, 9);
        let a = Dag::from_edges(&["V0", "V1", "V2", "V3"], &[("V0", "V1"), ("V2", "V3")]).unwrap();
        let mut b = a.clone();
        b.add_edge("V1", "V2").unwrap();
        let diff = bic_score(&b, &d).unwrap() - bic_score(&a, &d).unwrap();
        let local = family_score(ScoreKind::Bic, &d, 2, &[1]) - family_score(ScoreKind::Bic, &d, 2, &[]);
        assert_abs_diff_eq!(diff, local, epsilon = 1e-9);
    }

    #[test]
    fn hill_climb_links_dependent_pair() {
        let d = dependent_pair(2000, 1);
        let hc = hill_climb(&d, &EdgeConstraints::default(), &HillClimbOptions::default()).unwrap();
        assert_eq!(hc.dag.edge_count(), 1);
        // enumerate the three two-node DAGs
        let nodes = ["A", "B"];
        let cands = [
            Dag::new(&nodes).unwrap(),
            Dag::from_edges(&nodes, &[("A", "B")]).unwrap(),
            Dag::from_edges(&nodes, &[("B", "A")]).unwrap(),
        ];
        let best = cands
            .iter()
            .map(|c| bic_score(c, &d).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert_abs_diff_eq!(bic_score(&hc.dag, &d).unwrap(), best, epsilon = 1e-9);
        // equal scores: lexicographic tie-break adds A -> B
        assert!(hc.dag.has_edge(0, 1));
    }

    #[test]
    fn hill_climb_independent_gives_empty() {
        let d = independent(4000, 3, 5);
        let hc = hill_climb(&d, &EdgeConstraints::default(), &HillClimbOptions::default()).unwrap();
        assert_eq!(hc.dag.edge_count(), 0);
    }

    #[test]
    fn whitelist_edge_kept() {
        let d = independent(1000, 3, 5);
        let c = EdgeConstraints::parse("require V2 -> V0\nforbid V0 -> V1\n", "t").unwrap();
        let hc = hill_climb(&d, &c, &HillClimbOptions::default()).unwrap();
        assert!(hc.dag.has_edge(2, 0));
        assert!(c.admits(&hc.dag));
    }

    #[test]
    fn conflicting_constraints_rejected() {
        let d = independent(10, 3, 5);
        let c = EdgeConstraints::parse("require V0 -> V1\nforbid V0 -> V1\n", "t").unwrap();
        assert!(hill_climb(&d, &c, &HillClimbOptions::default()).is_err());
        let c = EdgeConstraints::parse("require V0 -> V1\nrequire V1 -> V0\n", "t").unwrap();
        assert!(hill_climb(&d, &c, &HillClimbOptions::default()).is_err());
        assert!(EdgeConstraints::parse("allow V0 -> V1\n", "t").is_err());
    }

    #[test]
    fn hill_climb_is_locally_optimal_with_restarts() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rows = (0..600)
            .map(|_| {
                let a = rng.random_range(0..3);
                let b = (a + rng.random_range(0..2)) % 3;
                let c = if rng.random::<f64>() < 0.7 { b } else { rng.random_range(0..3) };
                let d = rng.random_range(0..2);
                vec![a, b, c, d]
            })
            .collect();
        let d = dataset(&["A", "B", "C", "D"], &[3, 3, 3, 2], rows);
        let opts = HillClimbOptions {
            restarts: 3,
            seed: 4,
            ..Default::default()
        };
        let hc = hill_climb(&d, &EdgeConstraints::default(), &opts).unwrap();
        let s = bic_score(&hc.dag, &d).unwrap();
        for (_, _, _, nb) in neighbors(&hc.dag, &EdgeConstraints::default(), None).unwrap() {
            assert!(bic_score(&nb, &d).unwrap() <= s);
        }
        let again = hill_climb(&d, &EdgeConstraints::default(), &opts).unwrap();
        assert_eq!(again.dag, hc.dag);
    }

    #[test]
    fn chow_liu_picks_heaviest_tree() {
        // X-Y strongly linked, Y-Z weaker, X-Z only through Y
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rows = (0..3000)
            .map(|_| {
                let x = rng.random_range(0..2);
                let y = if rng.random::<f64>() < 0.95 { x } else { 1 - x };
                let z = if rng.random::<f64>() < 0.8 { y } else { 1 - y };
                vec![x, y, z]
            })
            .collect();
        let d = dataset(&["X", "Y", "Z"], &[2, 2, 2], rows);
        let mi = |i, j| mutual_information(&joint2_from_data(&d, i, j)).unwrap();
        assert!(mi(0, 1) > mi(1, 2) && mi(1, 2) > mi(0, 2));
        let mut sk = chow_liu_skeleton(&d).unwrap();
        sk.iter_mut().for_each(|e| if e.0 > e.1 { *e = (e.1, e.0) });
        sk.sort();
        assert_eq!(sk, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn chow_liu_orientations() {
        let d = independent(50, 4, 1);
        let cl = chow_liu(&d, &Orientation::RootAt("V2".into())).unwrap();
        assert_eq!(cl.dag.edge_count(), 3);
        assert!(cl.dag.parents(2).is_empty());

        let sk = chow_liu_skeleton(&d).unwrap();
        let names = d.schema().names();
        let edges: Vec<(String, String)> = sk
            .iter()
            .map(|&(a, b)| (names[b].clone(), names[a].clone()))
            .collect();
        let oriented = chow_liu(&d, &Orientation::Edges(edges.clone())).unwrap();
        for (p, c) in &edges {
            assert!(oriented.dag.has_edge(oriented.dag.index_of(p).unwrap(), oriented.dag.index_of(c).unwrap()));
        }
        let short = Orientation::Edges(edges[..2].to_vec());
        assert!(matches!(chow_liu(&d, &short), Err(Error::Orientation(_))));
    }

    #[test]
    fn star_data_oriented_from_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rows = (0..2000)
            .map(|_| {
                let t = rng.random_range(0..3);
                let mut row = vec![t];
                for _ in 0..3 {
                    row.push(if rng.random::<f64>() < 0.8 { t } else { rng.random_range(0..3) });
                }
                row
            })
            .collect();
        let d = dataset(&["T", "A", "B", "C"], &[3; 4], rows);
        let cl = chow_liu(&d, &Orientation::RootAt("T".into())).unwrap();
        assert_eq!(cl.dag.named_edges(), vec![
            ("T".to_string(), "A".to_string()),
            ("T".to_string(), "B".to_string()),
            ("T".to_string(), "C".to_string()),
        ]);
    }

    #[test]
    fn tan_structure() {
        let d = independent(200, 3, 4);
        let t = tan(&d, "V0").unwrap();
        assert_eq!(
            t.dag.named_edges(),
            vec![
                ("V0".to_string(), "V1".to_string()),
                ("V0".to_string(), "V2".to_string()),
                ("V1".to_string(), "V2".to_string())
            ]
        );
        // reversing the feature arc leaves the likelihood unchanged
        let mut rev = t.dag.clone();
        rev.reverse_edge("V1", "V2").unwrap();
        let ll = |dag: &Dag| -> f64 {
            family_scores(dag, &d, ScoreKind::Bic).unwrap().iter().sum::<f64>()
        };
        // both orientations have the same free-parameter count here
        assert_abs_diff_eq!(ll(&t.dag), ll(&rev), epsilon = 1e-9);

        let d5 = independent(200, 5, 4);
        let t5 = tan(&d5, "V0").unwrap();
        for f in 1..5 {
            assert!(t5.dag.has_edge(0, f));
            assert!(t5.dag.parents(f).len() <= 2);
        }
        assert!(tan(&independent(20, 2, 1), "V0").is_err());
    }

    #[test]
    fn naive_structure() {
        let d = independent(20, 5, 1);
        let nb = naive(&d, "V3").unwrap();
        assert_eq!(nb.dag.edge_count(), 4);
        assert!(nb.dag.parents(3).is_empty());
        for f in [0, 1, 2, 4] {
            assert_eq!(nb.dag.parents(f), &[3]);
        }
    }

    #[test]
    fn bd_learn_matches_enumeration() {
        let d = dependent_pair(500, 6);
        let m = bd_learn(&d, &EdgeConstraints::default(), Prior::default(), &HillClimbOptions::default())
            .unwrap();
        let nodes = ["A", "B"];
        let cands = [
            Dag::new(&nodes).unwrap(),
            Dag::from_edges(&nodes, &[("A", "B")]).unwrap(),
            Dag::from_edges(&nodes, &[("B", "A")]).unwrap(),
        ];
        let scores: Vec<f64> = cands
            .iter()
            .map(|c| log_marginal_likelihood(c, &d, Prior::default()).unwrap())
            .collect();
        let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(log_marginal_likelihood(&m.dag, &d, Prior::default()).unwrap(), best);
        assert_eq!(m.dag.edge_count(), 1);

        let ind = independent(5000, 3, 2);
        let m = bd_learn(&ind, &EdgeConstraints::default(), Prior::default(), &HillClimbOptions::default())
            .unwrap();
        assert_eq!(m.dag.edge_count(), 0);
    }
}
