//! Exact queries by enumeration over the ancestral closure of the query and
//! evidence nodes. Barren descendants sum to one and are skipped.

use crate::bayesnet::network::ParamNetwork;
use crate::error::{Error, Result};
use crate::infotheory::{entropy, Joint2};

pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// Builds a node-indexed evidence vector from `(variable, state label)`
/// pairs.
pub fn evidence_from_names(net: &ParamNetwork, pairs: &[(&str, &str)]) -> Result<Vec<Option<usize>>> {
    let mut ev = vec![None; net.dag.len()];
    for &(var, label) in pairs {
        let i = net.dag.require(var)?;
        let s = net.variables[i]
            .state_index(label)
            .ok_or_else(|| Error::UnknownState {
                variable: var.to_string(),
                value: label.to_string(),
                row: 0,
            })?;
        match ev[i] {
            Some(prev) if prev != s => return Err(Error::ContradictoryEvidence(var.to_string())),
            _ => ev[i] = Some(s),
        }
    }
    Ok(ev)
}

/// Normalized joint distribution of `vars` given `evidence`, indexed mixed
/// radix with the last variable fastest.
pub fn marginal(
    net: &ParamNetwork,
    vars: &[usize],
    evidence: &[Option<usize>],
    cap: u128,
) -> Result<Vec<f64>> {
    let mut out = unnormalized_marginal(net, vars, evidence, cap)?;
    let total: f64 = out.iter().sum();
    if total <= 0.0 {
        return Err(Error::Invalid("evidence has zero probability".into()));
    }
    out.iter_mut().for_each(|p| *p /= total);
    Ok(out)
}

/// `p(vars, evidence)` without normalization.
pub fn unnormalized_marginal(
    net: &ParamNetwork,
    vars: &[usize],
    evidence: &[Option<usize>],
    cap: u128,
) -> Result<Vec<f64>> {
    let n = net.dag.len();
    if evidence.len() != n {
        return Err(Error::Invalid(format!(
            "evidence covers {} nodes, network has {n}",
            evidence.len()
        )));
    }
    let cards = net.cards();
    if let Some((i, s)) = evidence
        .iter()
        .enumerate()
        .find_map(|(i, e)| e.filter(|&s| s >= cards[i]).map(|s| (i, s)))
    {
        return Err(Error::UnknownState {
            variable: net.dag.nodes()[i].clone(),
            value: s.to_string(),
            row: 0,
        });
    }
    let mut seeds: Vec<usize> = vars.to_vec();
    seeds.extend((0..n).filter(|&i| evidence[i].is_some()));
    let relevant = net.dag.ancestral_set(&seeds);
    let order: Vec<usize> = net
        .dag
        .topological_order()
        .into_iter()
        .filter(|&i| relevant[i])
        .collect();
    let free: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| evidence[i].is_none())
        .collect();
    let states: u128 = free.iter().map(|&i| cards[i] as u128).product();
    if states > cap {
        return Err(Error::EnumerationTooLarge { states, cap });
    }

    let out_len: usize = vars.iter().map(|&v| cards[v]).product();
    let mut out = vec![0.0; out_len];
    let mut assignment: Vec<usize> = evidence.iter().map(|e| e.unwrap_or(0)).collect();
    loop {
        let w: f64 = order
            .iter()
            .map(|&i| net.prob(i, &assignment, &cards))
            .product();
        let idx = vars.iter().fold(0, |acc, &v| acc * cards[v] + assignment[v]);
        out[idx] += w;
        // odometer over free nodes
        let mut pos = free.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            let node = free[pos];
            assignment[node] += 1;
            if assignment[node] < cards[node] {
                break;
            }
            assignment[node] = 0;
        }
    }
}

/// `p(query | evidence)` at the network's point parameters.
pub fn joint_query(
    net: &ParamNetwork,
    evidence: &[Option<usize>],
    query: usize,
    cap: u128,
) -> Result<Vec<f64>> {
    marginal(net, &[query], evidence, cap)
}

/// `S(T, V) = H(T) - H(T | V)` under the network joint, in nats.
pub fn sensitivity(net: &ParamNetwork, target: usize, predictor: usize, cap: u128) -> Result<f64> {
    if target == predictor {
        return Err(Error::Invalid("sensitivity needs two distinct variables".into()));
    }
    let cards = net.cards();
    let none = vec![None; net.dag.len()];
    let p = marginal(net, &[target, predictor], &none, cap)?;
    let joint = Joint2::new(cards[target], cards[predictor], p)?;
    let h_t = entropy(&joint.margin_x())?;
    let h_v = entropy(&joint.margin_y())?;
    let h_tv = entropy(&joint.counts)?;
    Ok(h_t - (h_tv - h_v))
}

/// `p(target, v)` for every node `v` from one enumeration pass over the
/// whole network (`out[target]` is left empty).
pub fn target_pair_marginals(net: &ParamNetwork, target: usize, cap: u128) -> Result<Vec<Vec<f64>>> {
    let n = net.dag.len();
    let cards = net.cards();
    let states: u128 = cards.iter().map(|&c| c as u128).product();
    if states > cap {
        return Err(Error::EnumerationTooLarge { states, cap });
    }
    let order = net.dag.topological_order();
    let mut out: Vec<Vec<f64>> = (0..n)
        .map(|v| if v == target { Vec::new() } else { vec![0.0; cards[target] * cards[v]] })
        .collect();
    let mut a = vec![0; n];
    // prefix[k] = product of the first k factors in topological order
    let mut prefix = vec![1.0; n + 1];
    let mut dirty = 0;
    loop {
        for k in dirty..n {
            let i = order[k];
            prefix[k + 1] = prefix[k] * net.prob(i, &a, &cards);
        }
        let w = prefix[n];
        let t = a[target];
        for (v, acc) in out.iter_mut().enumerate() {
            if v != target {
                acc[t * cards[v] + a[v]] += w;
            }
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            let node = order[pos];
            a[node] += 1;
            if a[node] < cards[node] {
                break;
            }
            a[node] = 0;
        }
        dirty = pos;
    }
}

/// Sensitivity of `target` to every other node, highest first.
pub fn sensitivity_report(net: &ParamNetwork, target: &str, cap: u128) -> Result<Vec<(String, f64)>> {
    let t = net.dag.require(target)?;
    let cards = net.cards();
    let pairs = target_pair_marginals(net, t, cap)?;
    let mut rows = (0..net.dag.len())
        .filter(|&v| v != t)
        .map(|v| {
            let joint = Joint2::new(cards[t], cards[v], pairs[v].clone())?;
            let h_t = entropy(&joint.margin_x())?;
            let h_v = entropy(&joint.margin_y())?;
            let h_tv = entropy(&joint.counts)?;
            Ok((net.dag.nodes()[v].clone(), h_t - (h_tv - h_v)))
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayesnet::dag::Dag;
    use crate::dataset::{Role, VariableSpec};
    use approx::assert_abs_diff_eq;

    fn vars(names: &[&str], cards: &[usize]) -> Vec<VariableSpec> {
        names
            .iter()
            .zip(cards)
            .map(|(n, &r)| VariableSpec::numbered(*n, r, Role::Predictor))
            .collect()
    }

    fn chain() -> ParamNetwork {
        let dag = Dag::from_edges(&["A", "B", "C"], &[("A", "B"), ("B", "C")]).unwrap();
        ParamNetwork::new(
            dag,
            vars(&["A", "B", "C"], &[2, 2, 2]),
            vec![
                vec![0.3, 0.7],
                vec![0.9, 0.1, 0.2, 0.8],
                vec![0.6, 0.4, 0.25, 0.75],
            ],
        )
        .unwrap()
    }

    #[test]
    fn root_marginal_without_evidence() {
        let net = chain();
        let p = joint_query(&net, &[None; 3], 0, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_abs_diff_eq!(p[0], 0.3, epsilon = 1e-12);
    }

    #[test]
    fn chain_query_matches_hand_sum() {
        let net = chain();
        let p = joint_query(&net, &[Some(1), None, None], 2, DEFAULT_ENUMERATION_CAP).unwrap();
        // sum_B p(C|B) p(B|A=1)
        let c0 = 0.2 * 0.6 + 0.8 * 0.25;
        assert_abs_diff_eq!(p[0], c0, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 1.0 - c0, epsilon = 1e-12);
    }

    #[test]
    fn childless_query_reads_cpt_row() {
        let net = chain();
        let p = joint_query(&net, &[None, Some(0), None], 2, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_abs_diff_eq!(p[0], 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 0.4, epsilon = 1e-12);
    }

    #[test]
    fn evidence_errors() {
        let net = chain();
        assert!(matches!(
            evidence_from_names(&net, &[("A", "1"), ("A", "2")]),
            Err(Error::ContradictoryEvidence(_))
        ));
        assert!(evidence_from_names(&net, &[("A", "9")]).is_err());
        assert!(matches!(
            joint_query(&net, &[None; 3], 2, 2),
            Err(Error::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn sensitivity_cases() {
        let dag = Dag::from_edges(&["T", "V", "W"], &[("T", "V")]).unwrap();
        let net = ParamNetwork::new(
            dag,
            vars(&["T", "V", "W"], &[2, 2, 3]),
            vec![vec![0.4, 0.6], vec![0.0, 1.0, 1.0, 0.0], vec![0.2, 0.3, 0.5]],
        )
        .unwrap();
        let h_t = entropy(&[0.4, 0.6]).unwrap();
        assert_abs_diff_eq!(sensitivity(&net, 0, 1, 1000).unwrap(), h_t, epsilon = 1e-12);
        assert_abs_diff_eq!(sensitivity(&net, 0, 2, 1000).unwrap(), 0.0, epsilon = 1e-12);
        let report = sensitivity_report(&net, "T", 1000).unwrap();
        assert_eq!(report[0].0, "V");
        assert!(report.windows(2).all(|w| w[0].1 >= w[1].1));
    }

    #[test]
    fn identical_rows_give_zero_sensitivity() {
        let dag = Dag::from_edges(&["T", "A", "B"], &[("T", "A"), ("T", "B")]).unwrap();
        let net = ParamNetwork::new(
            dag,
            vars(&["T", "A", "B"], &[2, 3, 2]),
            vec![
                vec![0.5, 0.5],
                vec![0.2, 0.3, 0.5, 0.2, 0.3, 0.5],
                vec![0.9, 0.1, 0.9, 0.1],
            ],
        )
        .unwrap();
        for (_, s) in sensitivity_report(&net, "T", 1000).unwrap() {
            assert_abs_diff_eq!(s, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn report_matches_pairwise_sensitivity() {
        let net = chain();
        let report = sensitivity_report(&net, "C", 1000).unwrap();
        for (name, s) in report {
            let v = net.dag.require(&name).unwrap();
            assert_abs_diff_eq!(s, sensitivity(&net, 2, v, 1000).unwrap(), epsilon = 1e-12);
        }
    }
}
