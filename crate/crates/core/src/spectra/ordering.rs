//! Fill-reducing orderings for sparse factorization.

use std::collections::VecDeque;

/// Subgraphs at or below this size are ordered by reverse Cuthill–McKee.
const LEAF_SIZE: usize = 64;

/// Nested dissection with BFS level-structure separators.
///
/// Returns `perm` with `perm[new] = old`.
pub fn nested_dissection(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut order = Vec::with_capacity(n);
    let mut local = vec![usize::MAX; n];
    let mut stack: Vec<Vec<usize>> = Vec::new();
    // split into connected components first
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut comp = vec![s];
        seen[s] = true;
        let mut k = 0;
        while k < comp.len() {
            let v = comp[k];
            k += 1;
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                }
            }
        }
        stack.push(comp);
    }
    // Post-order: each entry is a part to dissect; separators are appended
    // after both halves. Use an explicit work list of tasks.
    enum Task {
        Dissect(Vec<usize>),
        Emit(Vec<usize>),
    }
    let mut tasks: Vec<Task> = stack.into_iter().rev().map(Task::Dissect).collect();
    while let Some(task) = tasks.pop() {
        match task {
            Task::Emit(vs) => order.extend(vs),
            Task::Dissect(part) => {
                if part.len() <= LEAF_SIZE {
                    order.extend(cuthill_mckee(adj, &part, &mut local));
                    continue;
                }
                match bisect(adj, &part, &mut local) {
                    Some((left, right, sep)) => {
                        tasks.push(Task::Emit(sep));
                        for comp in components(adj, &right, &mut local).into_iter().rev() {
                            tasks.push(Task::Dissect(comp));
                        }
                        for comp in components(adj, &left, &mut local).into_iter().rev() {
                            tasks.push(Task::Dissect(comp));
                        }
                    }
                    None => order.extend(cuthill_mckee(adj, &part, &mut local)),
                }
            }
        }
    }
    debug_assert_eq!(order.len(), n);
    order
}

/// Inverse permutation.
pub fn inverse(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    inv
}

fn mark(part: &[usize], local: &mut [usize]) {
    for (i, &v) in part.iter().enumerate() {
        local[v] = i;
    }
}

fn unmark(part: &[usize], local: &mut [usize]) {
    for &v in part {
        local[v] = usize::MAX;
    }
}

/// BFS levels from `root` inside the marked part.
fn levels(adj: &[Vec<usize>], part: &[usize], local: &[usize], root: usize) -> Vec<usize> {
    let mut level = vec![usize::MAX; part.len()];
    let mut queue = VecDeque::new();
    level[local[root]] = 0;
    queue.push_back(root);
    while let Some(v) = queue.pop_front() {
        let lv = level[local[v]];
        for &w in &adj[v] {
            let lw = local[w];
            if lw != usize::MAX && level[lw] == usize::MAX {
                level[lw] = lv + 1;
                queue.push_back(w);
            }
        }
    }
    level
}

fn pseudo_peripheral(adj: &[Vec<usize>], part: &[usize], local: &[usize]) -> (usize, Vec<usize>) {
    let mut root = part[0];
    let mut lv = levels(adj, part, local, root);
    let mut depth = lv.iter().copied().max().unwrap_or(0);
    for _ in 0..8 {
        // farthest vertex of smallest degree
        let far = part
            .iter()
            .copied()
            .filter(|&v| lv[local[v]] == depth)
            .min_by_key(|&v| (adj[v].len(), v))
            .unwrap();
        let lf = levels(adj, part, local, far);
        let df = lf.iter().copied().max().unwrap_or(0);
        if df <= depth {
            break;
        }
        root = far;
        lv = lf;
        depth = df;
    }
    (root, lv)
}

fn bisect(
    adj: &[Vec<usize>],
    part: &[usize],
    local: &mut [usize],
) -> Option<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    mark(part, local);
    let (_, lv) = pseudo_peripheral(adj, part, local);
    let depth = lv.iter().copied().max().unwrap_or(0);
    if depth < 2 {
        unmark(part, local);
        return None;
    }
    let mut sizes = vec![0usize; depth + 1];
    for &l in &lv {
        sizes[l] += 1;
    }
    // separator level: balance halves, preferring small levels near the middle
    let half = part.len() / 2;
    let mut acc = 0;
    let mut mid = 1;
    for (l, s) in sizes.iter().enumerate() {
        acc += s;
        if acc >= half {
            mid = l.clamp(1, depth - 1);
            break;
        }
    }
    let lo = mid.saturating_sub(depth / 8).max(1);
    let hi = (mid + depth / 8).min(depth - 1);
    let sep_level = (lo..=hi).min_by_key(|&l| (sizes[l], l.abs_diff(mid))).unwrap();
    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut sep = Vec::new();
    for &v in part {
        let l = lv[local[v]];
        if l < sep_level {
            left.push(v);
        } else if l > sep_level {
            right.push(v);
        } else {
            sep.push(v);
        }
    }
    unmark(part, local);
    Some((left, right, sep))
}

fn components(adj: &[Vec<usize>], part: &[usize], local: &mut [usize]) -> Vec<Vec<usize>> {
    mark(part, local);
    let mut done = vec![false; part.len()];
    let mut out = Vec::new();
    for &s in part {
        if done[local[s]] {
            continue;
        }
        done[local[s]] = true;
        let mut comp = vec![s];
        let mut k = 0;
        while k < comp.len() {
            let v = comp[k];
            k += 1;
            for &w in &adj[v] {
                let lw = local[w];
                if lw != usize::MAX && !done[lw] {
                    done[lw] = true;
                    comp.push(w);
                }
            }
        }
        out.push(comp);
    }
    unmark(part, local);
    out
}

fn cuthill_mckee(adj: &[Vec<usize>], part: &[usize], local: &mut [usize]) -> Vec<usize> {
    if part.len() <= 2 {
        return part.to_vec();
    }
    mark(part, local);
    let mut visited = vec![false; part.len()];
    let mut out = Vec::with_capacity(part.len());
    let (root, _) = pseudo_peripheral(adj, part, local);
    let mut starts = vec![root];
    starts.extend(part.iter().copied());
    for s in starts {
        if visited[local[s]] {
            continue;
        }
        visited[local[s]] = true;
        let begin = out.len();
        out.push(s);
        let mut k = begin;
        while k < out.len() {
            let v = out[k];
            k += 1;
            let mut nbrs: Vec<usize> = adj[v]
                .iter()
                .copied()
                .filter(|&w| local[w] != usize::MAX && !visited[local[w]])
                .collect();
            nbrs.sort_by_key(|&w| (adj[w].len(), w));
            for w in nbrs {
                visited[local[w]] = true;
                out.push(w);
            }
        }
    }
    unmark(part, local);
    out.reverse();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nx: usize, ny: usize) -> Vec<Vec<usize>> {
        let id = |i: usize, j: usize| i * ny + j;
        let mut adj = vec![Vec::new(); nx * ny];
        for i in 0..nx {
            for j in 0..ny {
                if i + 1 < nx {
                    adj[id(i, j)].push(id(i + 1, j));
                    adj[id(i + 1, j)].push(id(i, j));
                }
                if j + 1 < ny {
                    adj[id(i, j)].push(id(i, j + 1));
                    adj[id(i, j + 1)].push(id(i, j));
                }
            }
        }
        adj
    }

    #[test]
    fn produces_a_permutation() {
        let adj = grid(30, 17);
        let p = nested_dissection(&adj);
        let mut sorted = p.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..adj.len()).collect::<Vec<_>>());
        let inv = inverse(&p);
        for (i, &v) in p.iter().enumerate() {
            assert_eq!(inv[v], i);
        }
    }

    #[test]
    fn handles_disconnected_graphs() {
        let mut adj = grid(10, 10);
        adj.push(Vec::new());
        adj.push(Vec::new());
        let p = nested_dissection(&adj);
        assert_eq!(p.len(), 102);
    }
}
