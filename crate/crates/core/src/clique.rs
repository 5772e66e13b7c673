//! Exact maximum clique by branch and bound over bitsets.

/// Fixed-size bitset over `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits(Vec<u64>);

impl Bits {
    pub fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    pub fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    pub fn unset(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    pub fn or_assign(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    pub fn and_assign(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= b;
        }
    }

    pub fn is_subset(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }

    /// Number of elements in the intersection.
    pub fn and_count(&self, other: &Bits) -> usize {
        self.0.iter().zip(&other.0).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    pub fn from_indices(n: usize, items: impl IntoIterator<Item = usize>) -> Bits {
        let mut b = Bits::new(n);
        for i in items {
            b.set(i);
        }
        b
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * 64 + b)
            })
        })
    }
}

/// Undirected graph as adjacency bitsets.
#[derive(Clone, Debug)]
pub struct Graph {
    adj: Vec<Bits>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph {
            adj: vec![Bits::new(n); n],
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u != v {
            self.adj[u].set(v);
            self.adj[v].set(u);
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].get(v)
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].count()
    }
}

/// A maximum clique, as sorted vertex indices. Among maximum cliques the
/// search is deterministic; vertices are tried in order of decreasing degree
/// (ties by index) and bounded by greedy colouring.
pub fn max_clique(g: &Graph) -> Vec<usize> {
    let n = g.len();
    if n == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
    let mut best: Vec<usize> = vec![order[0]];
    let mut cand = Bits::new(n);
    for v in 0..n {
        cand.set(v);
    }
    let mut cur = Vec::new();
    expand(g, &order, &mut cur, cand, &mut best);
    best.sort_unstable();
    best
}

/// A maximum clique of a sparse graph given by its edge list. Each vertex is
/// solved together with its neighbours later in a degeneracy order, so the
/// dense search only ever sees small neighbourhoods.
pub fn max_clique_sparse(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in edges {
        if u != v {
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    // Degeneracy order: repeatedly remove a vertex of least remaining degree.
    let mut deg: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut queue: std::collections::BTreeSet<(usize, usize)> = (0..n).map(|v| (deg[v], v)).collect();
    let mut pos = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    while let Some((_, v)) = queue.pop_first() {
        pos[v] = order.len();
        order.push(v);
        for &u in &adj[v] {
            if pos[u] == usize::MAX {
                queue.remove(&(deg[u], u));
                deg[u] -= 1;
                queue.insert((deg[u], u));
            }
        }
    }
    let mut best: Vec<usize> = vec![0];
    for &v in &order {
        let later: Vec<usize> = adj[v].iter().copied().filter(|&u| pos[u] > pos[v]).collect();
        if later.len() < best.len() {
            continue;
        }
        let mut sub = Graph::new(later.len());
        for i in 0..later.len() {
            for j in i + 1..later.len() {
                if adj[later[i]].binary_search(&later[j]).is_ok() {
                    sub.add_edge(i, j);
                }
            }
        }
        let c = max_clique(&sub);
        if c.len() + 1 > best.len() {
            best = std::iter::once(v).chain(c.iter().map(|&i| later[i])).collect();
        }
    }
    best.sort_unstable();
    best
}

fn expand(g: &Graph, order: &[usize], cur: &mut Vec<usize>, cand: Bits, best: &mut Vec<usize>) {
    // Greedy colouring of the candidates in `order`; colour classes bound
    // the clique size reachable from each prefix.
    let verts: Vec<usize> = order.iter().copied().filter(|&v| cand.get(v)).collect();
    let mut colour_of: Vec<(usize, usize)> = Vec::with_capacity(verts.len());
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &v in &verts {
        let k = classes
            .iter()
            .position(|cls| cls.iter().all(|&u| !g.has_edge(u, v)))
            .unwrap_or(classes.len());
        if k == classes.len() {
            classes.push(Vec::new());
        }
        classes[k].push(v);
    }
    for (k, cls) in classes.iter().enumerate() {
        for &v in cls {
            colour_of.push((v, k + 1));
        }
    }
    let mut cand = cand;
    // Branch on vertices in reverse colour order.
    for &(v, colour) in colour_of.iter().rev() {
        if cur.len() + colour <= best.len() {
            return;
        }
        cur.push(v);
        let next = cand.and(&g.adj[v]);
        if next.is_empty() {
            if cur.len() > best.len() {
                *best = cur.clone();
            }
        } else {
            expand(g, order, cur, next, best);
        }
        cur.pop();
        cand.unset(v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(g: &Graph) -> usize {
        let n = g.len();
        (0u32..1 << n)
            .filter(|&m| {
                (0..n).all(|i| m >> i & 1 == 0 || (i + 1..n).all(|j| m >> j & 1 == 0 || g.has_edge(i, j)))
            })
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn small_cases() {
        assert!(max_clique(&Graph::new(0)).is_empty());
        assert_eq!(max_clique(&Graph::new(3)).len(), 1);
        let mut k4 = Graph::new(5);
        for i in 0..4 {
            for j in i + 1..4 {
                k4.add_edge(i, j);
            }
        }
        assert_eq!(max_clique(&k4), vec![0, 1, 2, 3]);
    }

    proptest! {
        #[test]
        fn matches_subset_brute_force(n in 1usize..12, edges in proptest::collection::vec((0usize..12, 0usize..12), 0..50)) {
            let mut g = Graph::new(n);
            for (u, v) in edges {
                if u < n && v < n {
                    g.add_edge(u, v);
                }
            }
            let c = max_clique(&g);
            for i in 0..c.len() {
                for j in i + 1..c.len() {
                    prop_assert!(g.has_edge(c[i], c[j]));
                }
            }
            prop_assert_eq!(c.len(), brute(&g));
        }

        #[test]
        fn sparse_matches_dense(n in 1usize..30, edges in proptest::collection::vec((0usize..30, 0usize..30), 0..120)) {
            let edges: Vec<(usize, usize)> = edges.into_iter().filter(|&(u, v)| u < n && v < n).collect();
            let mut g = Graph::new(n);
            for &(u, v) in &edges {
                g.add_edge(u, v);
            }
            let s = max_clique_sparse(n, &edges);
            for i in 0..s.len() {
                for j in i + 1..s.len() {
                    prop_assert!(g.has_edge(s[i], s[j]));
                }
            }
            prop_assert_eq!(s.len(), max_clique(&g).len());
        }
    }
}
