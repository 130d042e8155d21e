//! Branch-and-bound maximum independent set solver.
//!
//! Degree-0 and degree-1 vertices are taken greedily (both rules preserve
//! optimality), graphs of maximum degree two are solved in closed form, and
//! the remaining search branches on a highest-degree vertex with a greedy
//! clique cover as the upper bound. Subdivided graphs such as augmented chain
//! graphs collapse almost entirely under the pendant rule, so the branching
//! only ever touches vertices of degree three or more.

/// Size of a maximum independent set of the subgraph induced by `alive`.
pub(crate) fn mis_size(adj: &[Vec<usize>], alive: &[bool]) -> usize {
    let mut solver = Solver { adj, best: 0 };
    let mut alive = alive.to_vec();
    solver.search(&mut alive, 0);
    solver.best
}

struct Solver<'a> {
    adj: &'a [Vec<usize>],
    best: usize,
}

impl Solver<'_> {
    fn search(&mut self, alive: &mut [bool], mut count: usize) {
        count += self.reduce(alive);

        let n = alive.len();
        let mut max_deg = 0;
        let mut pivot = None;
        let mut remaining = 0;
        for v in 0..n {
            if !alive[v] {
                continue;
            }
            remaining += 1;
            let d = self.degree(v, alive);
            if pivot.is_none() || d > max_deg {
                max_deg = d;
                pivot = Some(v);
            }
        }
        let Some(pivot) = pivot else {
            self.best = self.best.max(count);
            return;
        };
        if count + remaining <= self.best {
            return;
        }
        if max_deg <= 2 {
            // After pendant reduction every vertex has degree exactly two.
            self.best = self.best.max(count + self.cycles_mis(alive));
            return;
        }
        if count + self.clique_cover_bound(alive) <= self.best {
            return;
        }

        let mut with = alive.to_vec();
        with[pivot] = false;
        for &w in &self.adj[pivot] {
            with[w] = false;
        }
        self.search(&mut with, count + 1);

        alive[pivot] = false;
        self.search(alive, count);
    }

    fn degree(&self, v: usize, alive: &[bool]) -> usize {
        self.adj[v].iter().filter(|&&w| alive[w]).count()
    }

    /// Applies the degree-0/degree-1 rules to a fixed point; returns how many
    /// vertices were taken.
    fn reduce(&self, alive: &mut [bool]) -> usize {
        let n = alive.len();
        let mut deg: Vec<usize> = (0..n)
            .map(|v| if alive[v] { self.degree(v, alive) } else { 0 })
            .collect();
        let mut stack: Vec<usize> = (0..n).rev().filter(|&v| alive[v] && deg[v] <= 1).collect();
        let mut taken = 0;
        while let Some(v) = stack.pop() {
            if !alive[v] || deg[v] > 1 {
                continue;
            }
            taken += 1;
            let mut removed = vec![v];
            if deg[v] == 1 {
                let w = *self.adj[v].iter().find(|&&w| alive[w]).expect("degree-1 vertex has a live neighbor");
                removed.push(w);
            }
            for &r in &removed {
                alive[r] = false;
            }
            for &r in &removed {
                for &x in &self.adj[r] {
                    if alive[x] {
                        deg[x] -= 1;
                        if deg[x] <= 1 {
                            stack.push(x);
                        }
                    }
                }
            }
        }
        taken
    }

    fn cycles_mis(&self, alive: &[bool]) -> usize {
        let mut seen = vec![false; alive.len()];
        let mut total = 0;
        for s in 0..alive.len() {
            if !alive[s] || seen[s] {
                continue;
            }
            let mut len = 0;
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(v) = stack.pop() {
                len += 1;
                for &w in &self.adj[v] {
                    if alive[w] && !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            total += len / 2;
        }
        total
    }

    fn clique_cover_bound(&self, alive: &[bool]) -> usize {
        let mut cliques: Vec<Vec<usize>> = Vec::new();
        for v in 0..alive.len() {
            if !alive[v] {
                continue;
            }
            let adj_v = &self.adj[v];
            match cliques
                .iter_mut()
                .find(|c| c.iter().all(|w| adj_v.binary_search(w).is_ok()))
            {
                Some(c) => c.push(v),
                None => cliques.push(vec![v]),
            }
        }
        cliques.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    fn brute(n: usize, edges: &[(usize, usize)]) -> usize {
        (0u32..1 << n)
            .filter(|m| edges.iter().all(|&(u, v)| m >> u & 1 == 0 || m >> v & 1 == 0))
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap()
    }

    #[test]
    fn cycles_and_paths() {
        for n in 3..12 {
            let cycle: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
            assert_eq!(mis_size(&adjacency(n, &cycle), &vec![true; n]), n / 2);
            let path: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
            assert_eq!(mis_size(&adjacency(n, &path), &vec![true; n]), n.div_ceil(2));
        }
    }

    #[test]
    fn petersen() {
        let edges = [
            (0, 1), (1, 2), (2, 3), (3, 4), (0, 4),
            (0, 5), (1, 6), (2, 7), (3, 8), (4, 9),
            (5, 7), (7, 9), (6, 9), (6, 8), (5, 8),
        ];
        assert_eq!(mis_size(&adjacency(10, &edges), &[true; 10]), 4);
        assert_eq!(brute(10, &edges), 4);
    }

    #[test]
    fn matches_brute_force_on_pseudo_random_graphs() {
        let mut state = 0x2545_f491_4f6c_dd1du64;
        for trial in 0..200 {
            let n = 2 + trial % 13;
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    state ^= state << 13;
                    state ^= state >> 7;
                    state ^= state << 17;
                    if state % 100 < 35 {
                        edges.push((u, v));
                    }
                }
            }
            assert_eq!(mis_size(&adjacency(n, &edges), &vec![true; n]), brute(n, &edges));
        }
    }
}
