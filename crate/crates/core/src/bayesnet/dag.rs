use std::collections::VecDeque;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::dataset::strip_comment;
use crate::error::{Error, Result};

/// Directed acyclic graph over named nodes. Parent lists are kept sorted by
/// node index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dag {
    nodes: Vec<String>,
    parents: Vec<Vec<usize>>,
}

impl Dag {
    pub fn new<S: AsRef<str>>(nodes: &[S]) -> Result<Dag> {
        let nodes: Vec<String> = nodes.iter().map(|s| s.as_ref().to_string()).collect();
        for (i, n) in nodes.iter().enumerate() {
            if nodes[..i].contains(n) {
                return Err(Error::Invalid(format!("duplicate node `{n}`")));
            }
        }
        let parents = vec![Vec::new(); nodes.len()];
        Ok(Dag { nodes, parents })
    }

    pub fn from_edges<S: AsRef<str>>(nodes: &[S], edges: &[(S, S)]) -> Result<Dag> {
        let mut dag = Dag::new(nodes)?;
        for (p, c) in edges {
            dag.add_edge(p.as_ref(), c.as_ref())?;
        }
        Ok(dag)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn parents(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    pub fn parent_names(&self, node: usize) -> Vec<String> {
        self.parents[node]
            .iter()
            .map(|&p| self.nodes[p].clone())
            .collect()
    }

    pub fn children(&self, node: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&c| self.parents[c].contains(&node))
            .collect()
    }

    pub fn has_edge(&self, parent: usize, child: usize) -> bool {
        self.parents[child].contains(&parent)
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    /// Edges as index pairs, ordered by (parent, child) index.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .parents
            .iter()
            .enumerate()
            .flat_map(|(c, ps)| ps.iter().map(move |&p| (p, c)))
            .collect();
        out.sort_unstable();
        out
    }

    /// Edges as name pairs, ordered lexicographically by (parent, child).
    pub fn named_edges(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self
            .edges()
            .into_iter()
            .map(|(p, c)| (self.nodes[p].clone(), self.nodes[c].clone()))
            .collect();
        out.sort();
        out
    }

    /// True when a directed path `from ~> to` exists.
    pub fn has_path(&self, from: usize, to: usize) -> bool {
        if from == to {
            return true;
        }
        let children = self.children_lists();
        let mut seen = vec![false; self.len()];
        let mut stack = vec![from];
        while let Some(n) = stack.pop() {
            for &c in &children[n] {
                if c == to {
                    return true;
                }
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        false
    }

    fn children_lists(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.len()];
        for (c, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                ch[p].push(c);
            }
        }
        ch
    }

    pub fn add_edge_idx(&mut self, parent: usize, child: usize) -> Result<()> {
        if parent == child {
            return Err(Error::SelfLoop(self.nodes[parent].clone()));
        }
        if self.has_edge(parent, child) {
            return Err(Error::DuplicateEdge(
                self.nodes[parent].clone(),
                self.nodes[child].clone(),
            ));
        }
        if self.has_path(child, parent) {
            return Err(Error::Cycle(
                self.nodes[parent].clone(),
                self.nodes[child].clone(),
            ));
        }
        let ps = &mut self.parents[child];
        let pos = ps.partition_point(|&p| p < parent);
        ps.insert(pos, parent);
        Ok(())
    }

    /// Adds `parent -> child`; the graph is unchanged on error.
    pub fn add_edge(&mut self, parent: &str, child: &str) -> Result<()> {
        let (p, c) = (self.require(parent)?, self.require(child)?);
        self.add_edge_idx(p, c)
    }

    pub fn remove_edge_idx(&mut self, parent: usize, child: usize) -> Result<()> {
        let ps = &mut self.parents[child];
        match ps.iter().position(|&p| p == parent) {
            Some(i) => {
                ps.remove(i);
                Ok(())
            }
            None => Err(Error::MissingEdge(
                self.nodes[parent].clone(),
                self.nodes[child].clone(),
            )),
        }
    }

    pub fn remove_edge(&mut self, parent: &str, child: &str) -> Result<()> {
        let (p, c) = (self.require(parent)?, self.require(child)?);
        self.remove_edge_idx(p, c)
    }

    pub fn reverse_edge_idx(&mut self, parent: usize, child: usize) -> Result<()> {
        self.remove_edge_idx(parent, child)?;
        if let Err(e) = self.add_edge_idx(child, parent) {
            self.add_edge_idx(parent, child)
                .expect("restoring a removed edge cannot fail");
            return Err(e);
        }
        Ok(())
    }

    /// Turns `parent -> child` into `child -> parent`; unchanged on error.
    pub fn reverse_edge(&mut self, parent: &str, child: &str) -> Result<()> {
        let (p, c) = (self.require(parent)?, self.require(child)?);
        self.reverse_edge_idx(p, c)
    }

    /// Kahn's algorithm, smallest index first among ready nodes.
    pub fn topological_order(&self) -> Vec<usize> {
        let children = self.children_lists();
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: std::collections::BTreeSet<usize> =
            (0..self.len()).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(n) = ready.pop_first() {
            order.push(n);
            for &c in &children[n] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        debug_assert_eq!(order.len(), self.len(), "graph is acyclic by construction");
        order
    }

    /// Nodes in `seeds` plus all of their ancestors.
    pub fn ancestral_set(&self, seeds: &[usize]) -> Vec<bool> {
        let mut keep = vec![false; self.len()];
        let mut queue: VecDeque<usize> = seeds.iter().copied().collect();
        while let Some(n) = queue.pop_front() {
            if keep[n] {
                continue;
            }
            keep[n] = true;
            queue.extend(self.parents[n].iter().copied());
        }
        keep
    }

    /// Same graph on a relabelled or reordered node list (names must match).
    pub fn reindexed<S: AsRef<str>>(&self, nodes: &[S]) -> Result<Dag> {
        let mut out = Dag::new(nodes)?;
        if out.len() != self.len() {
            return Err(Error::VariableMismatch);
        }
        for (p, c) in self.edges() {
            out.add_edge(&self.nodes[p], &self.nodes[c])
                .map_err(|_| Error::VariableMismatch)?;
        }
        Ok(out)
    }

    pub fn same_structure(&self, other: &Dag) -> bool {
        let mut a = self.nodes.clone();
        let mut b = other.nodes.clone();
        a.sort();
        b.sort();
        a == b && self.named_edges() == other.named_edges()
    }

    /// Line format: `PARENT -> CHILD` per edge, `node NAME` for nodes.
    /// Every node is listed so isolated nodes survive the round trip.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            let _ = writeln!(out, "node {n}");
        }
        for (p, c) in self.named_edges() {
            let _ = writeln!(out, "{p} -> {c}");
        }
        out
    }

    pub fn parse(text: &str, origin: &str) -> Result<Dag> {
        let mut nodes: Vec<String> = Vec::new();
        let mut edges = Vec::new();
        let add_node = |n: &str, nodes: &mut Vec<String>| {
            if !nodes.iter().any(|x| x == n) {
                nodes.push(n.to_string());
            }
        };
        for (lineno, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix("node ") {
                let name = name.trim();
                if name.is_empty() || name.contains(char::is_whitespace) {
                    return Err(Error::parse(origin, lineno + 1, "bad node name"));
                }
                add_node(name, &mut nodes);
                continue;
            }
            let (p, c) = parse_arrow(line)
                .ok_or_else(|| Error::parse(origin, lineno + 1, "expected `A -> B`"))?;
            add_node(p, &mut nodes);
            add_node(c, &mut nodes);
            edges.push((p.to_string(), c.to_string(), lineno + 1));
        }
        let mut dag = Dag::new(&nodes)?;
        for (p, c, line) in edges {
            dag.add_edge(&p, &c)
                .map_err(|e| Error::parse(origin, line, e.to_string()))?;
        }
        Ok(dag)
    }

    pub fn from_file(path: &Path) -> Result<Dag> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Dag::parse(&text, &path.display().to_string())
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

pub(crate) fn parse_arrow(line: &str) -> Option<(&str, &str)> {
    let (p, c) = line.split_once("->")?;
    let (p, c) = (p.trim(), c.trim());
    if p.is_empty() || c.is_empty() || p.contains(char::is_whitespace) || c.contains(char::is_whitespace)
    {
        return None;
    }
    Some((p, c))
}
