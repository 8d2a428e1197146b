//! Reverse Cuthill–McKee bandwidth reduction.

use std::collections::VecDeque;

/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(adjacency: &[Vec<usize>]) -> Vec<usize> {
    let n = adjacency.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let degree = |v: usize| adjacency[v].len();

    // Components are seeded in order of their lowest-degree unvisited vertex.
    let mut seeds: Vec<usize> = (0..n).collect();
    seeds.sort_by_key(|&v| (degree(v), v));

    for &seed in &seeds {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(adjacency, seed);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adjacency[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree(w), w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Approximate peripheral vertex of `seed`'s component by repeated BFS.
fn pseudo_peripheral(adjacency: &[Vec<usize>], seed: usize) -> usize {
    let mut current = seed;
    let mut eccentricity = 0;
    loop {
        let levels = bfs_levels(adjacency, current);
        let depth = *levels.iter().filter_map(|l| l.as_ref()).max().unwrap_or(&0);
        if depth <= eccentricity && eccentricity > 0 {
            return current;
        }
        eccentricity = depth;
        let candidate = (0..adjacency.len())
            .filter(|&v| levels[v] == Some(depth))
            .min_by_key(|&v| (adjacency[v].len(), v))
            .unwrap_or(current);
        if candidate == current {
            return current;
        }
        current = candidate;
    }
}

fn bfs_levels(adjacency: &[Vec<usize>], start: usize) -> Vec<Option<usize>> {
    let mut level = vec![None; adjacency.len()];
    level[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let next = level[v].unwrap() + 1;
        for &w in &adjacency[v] {
            if level[w].is_none() {
                level[w] = Some(next);
                queue.push_back(w);
            }
        }
    }
    level
}

/// Half-bandwidth of the symmetric pattern after permutation.
pub fn bandwidth(adjacency: &[Vec<usize>], perm: &[usize]) -> usize {
    let mut inverse = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inverse[old] = new;
    }
    let mut bw = 0;
    for (old, list) in adjacency.iter().enumerate() {
        for &w in list {
            bw = bw.max(inverse[old].abs_diff(inverse[w]));
        }
    }
    bw
}
