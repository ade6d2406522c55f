//! Assignment primitives: Hungarian algorithm and Hopcroft–Karp matching.

use std::collections::VecDeque;

use crate::scalar::Scalar;

/// Minimum-cost perfect assignment on a dense `n x n` row-major matrix.
/// Returns `assign[row] = col` and the total cost summed over the assignment.
pub(crate) fn hungarian<T: Scalar>(n: usize, cost: &[T]) -> (Vec<usize>, T) {
    assert_eq!(cost.len(), n * n);
    if n == 0 {
        return (Vec::new(), T::zero());
    }
    let inf = T::infinity();
    // 1-based potentials; p[j] = row matched to column j, 0 = none
    let mut u = vec![T::zero(); n + 1];
    let mut v = vec![T::zero(); n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![inf; n + 1];
    let mut used = vec![false; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        minv.iter_mut().for_each(|m| *m = inf);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            let row = &cost[(i0 - 1) * n..i0 * n];
            for j in 1..=n {
                if !used[j] {
                    let cur = row[j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] = u[p[j]] + delta;
                    v[j] = v[j] - delta;
                } else {
                    minv[j] = minv[j] - delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=n {
        assign[p[j] - 1] = j - 1;
    }
    let total = assign.iter().enumerate().map(|(r, &c)| cost[r * n + c]).sum();
    (assign, total)
}

/// Size of a maximum matching in a bipartite graph given as left adjacency lists.
pub(crate) fn hopcroft_karp(left: usize, right: usize, adj: &[Vec<u32>]) -> usize {
    const NIL: u32 = u32::MAX;
    let mut match_l = vec![NIL; left];
    let mut match_r = vec![NIL; right];
    let mut dist = vec![0u32; left];
    let mut matched = 0;
    loop {
        // BFS layering from free left vertices
        let mut queue = VecDeque::new();
        for l in 0..left {
            if match_l[l] == NIL {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = u32::MAX;
            }
        }
        let mut found = false;
        while let Some(l) = queue.pop_front() {
            for &r in &adj[l] {
                let m = match_r[r as usize];
                if m == NIL {
                    found = true;
                } else if dist[m as usize] == u32::MAX {
                    dist[m as usize] = dist[l] + 1;
                    queue.push_back(m as usize);
                }
            }
        }
        if !found {
            return matched;
        }
        for l in 0..left {
            if match_l[l] == NIL && augment(l, adj, &mut match_l, &mut match_r, &mut dist) {
                matched += 1;
            }
        }
    }
}

fn augment(l: usize, adj: &[Vec<u32>], match_l: &mut [u32], match_r: &mut [u32], dist: &mut [u32]) -> bool {
    for &r in &adj[l] {
        let m = match_r[r as usize];
        let ok = m == u32::MAX || (dist[m as usize] == dist[l] + 1 && augment(m as usize, adj, match_l, match_r, dist));
        if ok {
            match_l[l] = r;
            match_r[r as usize] = l as u32;
            return true;
        }
    }
    dist[l] = u32::MAX;
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_min(n: usize, cost: &[f64]) -> f64 {
        fn rec(row: usize, n: usize, cost: &[f64], used: &mut Vec<bool>) -> f64 {
            if row == n {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for c in 0..n {
                if !used[c] {
                    used[c] = true;
                    best = best.min(cost[row * n + c] + rec(row + 1, n, cost, used));
                    used[c] = false;
                }
            }
            best
        }
        rec(0, n, cost, &mut vec![false; n])
    }

    #[test]
    fn hungarian_small() {
        let cost = [4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
        let (assign, total) = hungarian(3, &cost);
        assert_eq!(total, 5.0);
        assert_eq!(assign, vec![1, 0, 2]);
        assert_eq!(hungarian::<f64>(0, &[]).1, 0.0);
    }

    #[test]
    fn hungarian_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(1..=6);
            let cost: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.0..10.0)).collect();
            let (_, total) = hungarian(n, &cost);
            assert!((total - brute_min(n, &cost)).abs() < 1e-9);
        }
    }

    #[test]
    fn hopcroft_karp_counts() {
        // left 0 -> {0,1}, left 1 -> {0}, left 2 -> {0}
        let adj = vec![vec![0, 1], vec![0], vec![0]];
        assert_eq!(hopcroft_karp(3, 2, &adj), 2);
        let adj = vec![vec![0], vec![1], vec![2]];
        assert_eq!(hopcroft_karp(3, 3, &adj), 3);
        assert_eq!(hopcroft_karp(2, 2, &[vec![], vec![]]), 0);
    }
}
