//! Plug-in entropies, (conditional) mutual information, the normalized
//! scores MI' and CMI', and the feature-selection score tables.

use std::io::Write;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Shannon entropy of a count vector in nats, `0 ln 0 = 0`.
pub fn entropy(counts: &[f64]) -> Result<f64> {
    entropy_base(counts, std::f64::consts::E)
}

pub fn entropy_base(counts: &[f64], base: f64) -> Result<f64> {
    if counts.iter().any(|&c| c < 0.0 || !c.is_finite()) {
        return Err(Error::Invalid("negative or non-finite count".into()));
    }
    let total = sorted_sum(counts);
    if total <= 0.0 {
        return Err(Error::Empty("all-zero counts".into()));
    }
    Ok(plugin_entropy(counts, total) / base.ln())
}

/// Sum in ascending order, so the result does not depend on table layout
/// and MI/CMI come out exactly symmetric.
fn sorted_sum(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

fn plugin_entropy(counts: &[f64], total: f64) -> f64 {
    let mut terms: Vec<f64> = counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / total;
            -p * p.ln()
        })
        .collect();
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

/// Two-way contingency table, `counts[x * ny + y]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint2 {
    pub nx: usize,
    pub ny: usize,
    pub counts: Vec<f64>,
}

impl Joint2 {
    pub fn new(nx: usize, ny: usize, counts: Vec<f64>) -> Result<Self> {
        if counts.len() != nx * ny {
            return Err(Error::Invalid(format!(
                "table of {} cells does not match shape {nx}x{ny}",
                counts.len()
            )));
        }
        Ok(Joint2 { nx, ny, counts })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nx = rows.len();
        let ny = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ny) {
            return Err(Error::Invalid("ragged table".into()));
        }
        Joint2::new(nx, ny, rows.concat())
    }

    pub fn from_columns(xs: &[usize], ys: &[usize], nx: usize, ny: usize) -> Self {
        let mut counts = vec![0.0; nx * ny];
        for (&x, &y) in xs.iter().zip(ys) {
            counts[x * ny + y] += 1.0;
        }
        Joint2 { nx, ny, counts }
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.counts[x * self.ny + y]
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    pub fn margin_x(&self) -> Vec<f64> {
        (0..self.nx)
            .map(|x| (0..self.ny).map(|y| self.get(x, y)).sum())
            .collect()
    }

    pub fn margin_y(&self) -> Vec<f64> {
        (0..self.ny)
            .map(|y| (0..self.nx).map(|x| self.get(x, y)).sum())
            .collect()
    }

    pub fn transpose(&self) -> Joint2 {
        let mut counts = vec![0.0; self.counts.len()];
        for x in 0..self.nx {
            for y in 0..self.ny {
                counts[y * self.nx + x] = self.get(x, y);
            }
        }
        Joint2 {
            nx: self.ny,
            ny: self.nx,
            counts,
        }
    }
}

/// Three-way table over (X, Y, Z), `counts[(x * ny + y) * nz + z]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint3 {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub counts: Vec<f64>,
}

impl Joint3 {
    pub fn new(nx: usize, ny: usize, nz: usize, counts: Vec<f64>) -> Result<Self> {
        if counts.len() != nx * ny * nz {
            return Err(Error::Invalid(format!(
                "table of {} cells does not match shape {nx}x{ny}x{nz}",
                counts.len()
            )));
        }
        Ok(Joint3 { nx, ny, nz, counts })
    }

    pub fn from_columns(
        xs: &[usize],
        ys: &[usize],
        zs: &[usize],
        (nx, ny, nz): (usize, usize, usize),
    ) -> Self {
        let mut counts = vec![0.0; nx * ny * nz];
        for ((&x, &y), &z) in xs.iter().zip(ys).zip(zs) {
            counts[(x * ny + y) * nz + z] += 1.0;
        }
        Joint3 { nx, ny, nz, counts }
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.counts[(x * self.ny + y) * self.nz + z]
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    pub fn swap_xy(&self) -> Joint3 {
        let mut counts = vec![0.0; self.counts.len()];
        for x in 0..self.nx {
            for y in 0..self.ny {
                for z in 0..self.nz {
                    counts[(y * self.nx + x) * self.nz + z] = self.get(x, y, z);
                }
            }
        }
        Joint3 {
            nx: self.ny,
            ny: self.nx,
            nz: self.nz,
            counts,
        }
    }

    /// (X, Y) margin summed over Z.
    pub fn margin_xy(&self) -> Joint2 {
        let mut counts = vec![0.0; self.nx * self.ny];
        for x in 0..self.nx {
            for y in 0..self.ny {
                counts[x * self.ny + y] = (0..self.nz).map(|z| self.get(x, y, z)).sum();
            }
        }
        Joint2 {
            nx: self.nx,
            ny: self.ny,
            counts,
        }
    }

    fn margin_xz(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.nx * self.nz];
        for x in 0..self.nx {
            for y in 0..self.ny {
                for z in 0..self.nz {
                    out[x * self.nz + z] += self.get(x, y, z);
                }
            }
        }
        out
    }

    fn margin_yz(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.ny * self.nz];
        for x in 0..self.nx {
            for y in 0..self.ny {
                for z in 0..self.nz {
                    out[y * self.nz + z] += self.get(x, y, z);
                }
            }
        }
        out
    }

    fn margin_z(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.nz];
        for (i, &c) in self.counts.iter().enumerate() {
            out[i % self.nz] += c;
        }
        out
    }
}

/// Entropy decomposition of a two-way table: `(H(X), H(Y), H(X,Y))`.
fn entropies2(joint: &Joint2) -> Result<(f64, f64, f64)> {
    let total = sorted_sum(&joint.counts);
    if total <= 0.0 {
        return Err(Error::Empty("contingency table has zero total".into()));
    }
    Ok((
        plugin_entropy(&joint.margin_x(), total),
        plugin_entropy(&joint.margin_y(), total),
        plugin_entropy(&joint.counts, total),
    ))
}

/// `(H(X|Z), H(Y|Z), H(X,Y|Z))` with conditionals weighted by p(z).
fn conditional_entropies(joint: &Joint3) -> Result<(f64, f64, f64)> {
    let total = sorted_sum(&joint.counts);
    if total <= 0.0 {
        return Err(Error::Empty("contingency table has zero total".into()));
    }
    let hz = plugin_entropy(&joint.margin_z(), total);
    let hxz = plugin_entropy(&joint.margin_xz(), total);
    let hyz = plugin_entropy(&joint.margin_yz(), total);
    let hxyz = plugin_entropy(&joint.counts, total);
    Ok((hxz - hz, hyz - hz, hxyz - hz))
}

/// `MI = H(X) + H(Y) - H(X,Y)` in nats, clamped at zero against rounding.
pub fn mutual_information(joint: &Joint2) -> Result<f64> {
    let (hx, hy, hxy) = entropies2(joint)?;
    Ok((hx + hy - hxy).max(0.0))
}

pub fn mutual_information_base(joint: &Joint2, base: f64) -> Result<f64> {
    Ok(mutual_information(joint)? / base.ln())
}

/// `CMI = H(X|Z) + H(Y|Z) - H(X,Y|Z)` in nats.
pub fn conditional_mutual_information(joint: &Joint3) -> Result<f64> {
    let (hx, hy, hxy) = conditional_entropies(joint)?;
    Ok((hx + hy - hxy).max(0.0))
}

pub fn conditional_mutual_information_base(joint: &Joint3, base: f64) -> Result<f64> {
    Ok(conditional_mutual_information(joint)? / base.ln())
}

/// Symmetric uncertainty `2 MI / (H(X) + H(Y))`; zero when both margins
/// are constant.
pub fn normalized_mi(joint: &Joint2) -> Result<f64> {
    let (hx, hy, hxy) = entropies2(joint)?;
    let denom = hx + hy;
    if denom <= 0.0 {
        return Ok(0.0);
    }
    Ok((2.0 * (hx + hy - hxy) / denom).clamp(0.0, 1.0))
}

/// Conditional symmetric uncertainty `2 CMI / (H(X|Z) + H(Y|Z))`.
pub fn normalized_cmi(joint: &Joint3) -> Result<f64> {
    let (hx, hy, hxy) = conditional_entropies(joint)?;
    let denom = hx + hy;
    if denom <= 1e-15 {
        return Ok(0.0);
    }
    Ok((2.0 * (hx + hy - hxy) / denom).clamp(0.0, 1.0))
}

/// Collapses several columns into one compound column (mixed radix, last
/// column fastest). Returns the compound values and their cardinality.
pub fn compound_column(data: &Dataset, cols: &[usize]) -> (Vec<usize>, usize) {
    let cards = data.schema().cardinalities();
    let card: usize = cols.iter().map(|&c| cards[c]).product();
    let values = data
        .rows()
        .iter()
        .map(|r| cols.iter().fold(0, |acc, &c| acc * cards[c] + r[c]))
        .collect();
    (values, card)
}

pub fn joint2_from_data(data: &Dataset, x: usize, y: usize) -> Joint2 {
    let cards = data.schema().cardinalities();
    Joint2::from_columns(&data.column(x), &data.column(y), cards[x], cards[y])
}

/// Table for (X, Y | Z1..Zk) with the conditioning set treated as one
/// compound variable.
pub fn joint3_from_data(data: &Dataset, x: usize, y: usize, z: &[usize]) -> Joint3 {
    let cards = data.schema().cardinalities();
    let (zs, nz) = compound_column(data, z);
    Joint3::from_columns(
        &data.column(x),
        &data.column(y),
        &zs,
        (cards[x], cards[y], nz),
    )
}

/// `100 * (cmi' - mi') / mi'`; infinite when only the conditional score is
/// positive.
pub fn delta_percent(cmi_norm: f64, mi_norm: f64) -> f64 {
    let delta = cmi_norm - mi_norm;
    if mi_norm > 0.0 {
        100.0 * delta / mi_norm
    } else if delta > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreEntry {
    pub x: String,
    pub y: String,
    pub z: Option<String>,
    pub mi_norm: f64,
    pub cmi_norm: Option<f64>,
    pub delta: Option<f64>,
    pub perc: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Pairwise,
    Triple,
    Delta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub kind: TableKind,
    pub entries: Vec<ScoreEntry>,
}

impl ScoreTable {
    fn principal(&self, e: &ScoreEntry) -> f64 {
        match self.kind {
            TableKind::Pairwise => e.mi_norm,
            TableKind::Triple => e.cmi_norm.unwrap_or(0.0),
            TableKind::Delta => e.perc.unwrap_or(0.0),
        }
    }

    fn sort(&mut self) {
        let mut entries = std::mem::take(&mut self.entries);
        entries.sort_by(|a, b| {
            self.principal(b)
                .total_cmp(&self.principal(a))
                .then_with(|| (&a.x, &a.y, &a.z).cmp(&(&b.x, &b.y, &b.z)))
        });
        self.entries = entries;
    }

    pub fn scores(&self) -> Vec<f64> {
        self.entries.iter().map(|e| self.principal(e)).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "z", "mi_norm", "cmi_norm", "delta", "perc"])?;
        let opt = |v: Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or_default();
        for e in &self.entries {
            w.write_record([
                e.x.clone(),
                e.y.clone(),
                e.z.clone().unwrap_or_default(),
                format!("{:.6}", e.mi_norm),
                opt(e.cmi_norm),
                opt(e.delta),
                opt(e.perc),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

pub struct ScoreTables {
    pub pairwise: ScoreTable,
    pub triple: ScoreTable,
    pub delta: ScoreTable,
}

/// MI' for every unordered pair and CMI' for every (pair, z), plus the
/// delta table ranked by relative gain from conditioning.
pub fn build_score_tables(data: &Dataset, variables: &[String]) -> Result<ScoreTables> {
    if variables.len() < 2 {
        return Err(Error::Invalid("score tables need at least 2 variables".into()));
    }
    let cols: Vec<usize> = variables
        .iter()
        .map(|v| data.schema().require(v))
        .collect::<Result<_>>()?;
    let m = cols.len();
    let mut mi = vec![vec![0.0; m]; m];
    let mut pairwise = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let s = normalized_mi(&joint2_from_data(data, cols[i], cols[j]))?;
            mi[i][j] = s;
            mi[j][i] = s;
            pairwise.push(ScoreEntry {
                x: variables[i].clone(),
                y: variables[j].clone(),
                z: None,
                mi_norm: s,
                cmi_norm: None,
                delta: None,
                perc: None,
            });
        }
    }
    let mut triple = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            for k in 0..m {
                if k == i || k == j {
                    continue;
                }
                let c = normalized_cmi(&joint3_from_data(data, cols[i], cols[j], &[cols[k]]))?;
                triple.push(ScoreEntry {
                    x: variables[i].clone(),
                    y: variables[j].clone(),
                    z: Some(variables[k].clone()),
                    mi_norm: mi[i][j],
                    cmi_norm: Some(c),
                    delta: Some(c - mi[i][j]),
                    perc: Some(delta_percent(c, mi[i][j])),
                });
            }
        }
    }
    let mut pairwise = ScoreTable {
        kind: TableKind::Pairwise,
        entries: pairwise,
    };
    let mut delta = ScoreTable {
        kind: TableKind::Delta,
        entries: triple.clone(),
    };
    let mut triple = ScoreTable {
        kind: TableKind::Triple,
        entries: triple,
    };
    pairwise.sort();
    triple.sort();
    delta.sort();
    Ok(ScoreTables {
        pairwise,
        triple,
        delta,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_left", "bin_right", "count"])?;
        for (i, c) in self.counts.iter().enumerate() {
            w.write_record([
                format!("{:.6}", self.edges[i]),
                format!("{:.6}", self.edges[i + 1]),
                c.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

/// Equal-width histogram over `[min, max]`. Bins are right-closed
/// `(a, b]`, the first one also includes its left edge.
pub fn histogram(scores: &[f64], bin_count: usize) -> Result<Histogram> {
    if scores.is_empty() {
        return Err(Error::Empty("no scores to bin".into()));
    }
    if bin_count == 0 {
        return Err(Error::Invalid("bin count must be at least 1".into()));
    }
    let finite: Vec<f64> = scores.iter().copied().filter(|s| s.is_finite()).collect();
    if finite.is_empty() {
        return Err(Error::Empty("no finite scores to bin".into()));
    }
    let mut lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bin_count as f64;
    let edges: Vec<f64> = (0..=bin_count)
        .map(|i| if i == bin_count { hi } else { lo + width * i as f64 })
        .collect();
    let mut counts = vec![0; bin_count];
    for &s in &finite {
        let idx = ((s - lo) / width).ceil() as isize - 1;
        let mut idx = idx.clamp(0, bin_count as isize - 1) as usize;
        // correct for rounding against the stored edges
        while idx > 0 && s <= edges[idx] {
            idx -= 1;
        }
        while idx + 1 < bin_count && s > edges[idx + 1] {
            idx += 1;
        }
        counts[idx] += 1;
    }
    Ok(Histogram { edges, counts })
}
