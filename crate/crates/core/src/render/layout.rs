//! Layer assignment by longest path with one barycenter sweep.

/// Groups nodes `0..n` into ranks so that every non-back edge points to a
/// strictly later rank. Back edges are found by depth-first search in index order.
pub(crate) fn layer(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut succ = vec![Vec::new(); n];
    for &(a, b) in edges {
        if a < n && b < n && a != b {
            succ[a].push(b);
        }
    }
    let forward = acyclic_edges(n, &succ);

    let mut indegree = vec![0usize; n];
    for &(_, b) in &forward {
        indegree[b] += 1;
    }
    let mut fwd_succ = vec![Vec::new(); n];
    let mut preds = vec![Vec::new(); n];
    for &(a, b) in &forward {
        fwd_succ[a].push(b);
        preds[b].push(a);
    }
    let mut rank = vec![0usize; n];
    let mut ready: std::collections::BTreeSet<usize> =
        (0..n).filter(|&v| indegree[v] == 0).collect();
    while let Some(v) = ready.pop_first() {
        for &w in &fwd_succ[v] {
            rank[w] = rank[w].max(rank[v] + 1);
            indegree[w] -= 1;
            if indegree[w] == 0 {
                ready.insert(w);
            }
        }
    }

    let depth = rank.iter().copied().max().map_or(0, |m| m + 1);
    let mut ranks: Vec<Vec<usize>> = vec![Vec::new(); depth];
    for v in 0..n {
        ranks[rank[v]].push(v);
    }
    let mut position = vec![0f64; n];
    for rank in ranks.iter_mut() {
        let mut keyed: Vec<(f64, usize)> = rank
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let ps: Vec<f64> = preds[v].iter().map(|&p| position[p]).collect();
                let key = if ps.is_empty() {
                    i as f64
                } else {
                    ps.iter().sum::<f64>() / ps.len() as f64
                };
                (key, v)
            })
            .collect();
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        *rank = keyed.iter().map(|&(_, v)| v).collect();
        for (i, &v) in rank.iter().enumerate() {
            position[v] = i as f64;
        }
    }
    ranks
}

/// Edges that remain after dropping those that close a cycle.
pub(crate) fn acyclic_edges(n: usize, succ: &[Vec<usize>]) -> Vec<(usize, usize)> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let mut mark = vec![Mark::New; n];
    let mut out = Vec::new();
    for root in 0..n {
        if mark[root] != Mark::New {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        mark[root] = Mark::Open;
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            if let Some(&w) = succ[v].get(*i) {
                *i += 1;
                match mark[w] {
                    Mark::Open => {}
                    Mark::Done => out.push((v, w)),
                    Mark::New => {
                        out.push((v, w));
                        mark[w] = Mark::Open;
                        stack.push((w, 0));
                    }
                }
            } else {
                mark[v] = Mark::Done;
                stack.pop();
            }
        }
    }
    out
}
