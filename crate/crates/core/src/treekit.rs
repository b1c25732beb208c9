//! Rooted-tree utilities and the balanced tree partition used by the
//! recursive decomposition.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("tree has no nodes")]
    Empty,
    #[error("parent of node {node} is out of range ({parent})")]
    ParentOutOfRange { node: usize, parent: usize },
    #[error("expected exactly one root, found {0}")]
    RootCount(usize),
    #[error("node {0} is not reachable from the root (cycle)")]
    Unreachable(usize),
    #[error("balanced separator needs at least 3 nodes, tree has {0}")]
    TooSmall(usize),
    #[error("node {0} has more than two children")]
    NotBinary(usize),
    #[error("cannot split at the root")]
    SplitAtRoot,
    #[error("node {0} is out of range")]
    NodeOutOfRange(usize),
    #[error("decomposition depth {depth} exceeds the height budget {budget}")]
    DepthExceeded { depth: usize, budget: usize },
}

/// A rooted tree over node ids `0..len`. Child lists are kept sorted by id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedTree {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    root: usize,
}

impl RootedTree {
    pub fn from_parents(parent: Vec<Option<usize>>) -> Result<Self, TreeError> {
        let n = parent.len();
        if n == 0 {
            return Err(TreeError::Empty);
        }
        let mut children = vec![Vec::new(); n];
        let mut roots = Vec::new();
        for (v, p) in parent.iter().enumerate() {
            match *p {
                None => roots.push(v),
                Some(p) if p >= n || p == v => {
                    return Err(TreeError::ParentOutOfRange { node: v, parent: p })
                }
                Some(p) => children[p].push(v),
            }
        }
        if roots.len() != 1 {
            return Err(TreeError::RootCount(roots.len()));
        }
        let tree = RootedTree {
            parent,
            children,
            root: roots[0],
        };
        let seen = tree.preorder().len();
        if seen != n {
            let mut reached = vec![false; n];
            for v in tree.preorder() {
                reached[v] = true;
            }
            let missing = reached.iter().position(|&r| !r).unwrap_or(0);
            return Err(TreeError::Unreachable(missing));
        }
        Ok(tree)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.children[v].is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.len() - 1
    }

    pub fn is_binary(&self) -> bool {
        self.children.iter().all(|c| c.len() <= 2)
    }

    /// Nodes in depth-first preorder, children visited in id order.
    pub fn preorder(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.len());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            order.push(v);
            for &c in self.children[v].iter().rev() {
                stack.push(c);
            }
        }
        order
    }

    /// `|Λ*(v)|` for every node.
    pub fn subtree_sizes(&self) -> Vec<usize> {
        let mut size = vec![1usize; self.len()];
        for v in self.preorder().into_iter().rev() {
            if let Some(p) = self.parent[v] {
                size[p] += size[v];
            }
        }
        size
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        let mut depth = vec![0usize; self.len()];
        let mut best = 0;
        for v in self.preorder() {
            if let Some(p) = self.parent[v] {
                depth[v] = depth[p] + 1;
                best = best.max(depth[v]);
            }
        }
        best
    }

    /// True when the tree has exactly one level of edges with at most two
    /// children at the root: the stopping case of the recursive partition.
    pub fn is_one_level(&self) -> bool {
        let k = self.children[self.root].len();
        (k == 1 || k == 2) && self.len() == k + 1
    }
}

/// A piece of a larger tree, with `origin[i]` the id in the parent tree of
/// local node `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubTree {
    pub tree: RootedTree,
    pub origin: Vec<usize>,
}

/// Walks down from the root towards the heaviest child until the subtree
/// size drops to at most `2n/3 + 1`. Ties go to the smaller child id.
///
/// For the three-node path the middle vertex is returned; for a root with
/// two leaf children the root itself (which cannot be split further).
pub fn find_balanced_separator(tree: &RootedTree) -> Result<usize, TreeError> {
    let n = tree.len();
    if n < 3 {
        return Err(TreeError::TooSmall(n));
    }
    if let Some(v) = (0..n).find(|&v| tree.children(v).len() > 2) {
        return Err(TreeError::NotBinary(v));
    }
    let size = tree.subtree_sizes();
    if n == 3 {
        let kids = tree.children(tree.root());
        return Ok(if kids.len() == 1 { kids[0] } else { tree.root() });
    }
    let mut u = tree.root();
    // |Λ*(u)| ≤ 2n/3 + 1  ⇔  3|Λ*(u)| ≤ 2n + 3
    while 3 * size[u] > 2 * n + 3 {
        let mut best = None::<usize>;
        for &c in tree.children(u) {
            best = match best {
                Some(b) if size[b] >= size[c] => Some(b),
                _ => Some(c),
            };
        }
        u = best.expect("an oversized subtree always has a child");
    }
    Ok(u)
}

/// `T2` is the subtree rooted at `v`; `T1` is everything else with `v` kept
/// as a leaf. The two edge sets partition the edges of `tree`.
pub fn split_at(tree: &RootedTree, v: usize) -> Result<(SubTree, SubTree), TreeError> {
    if v >= tree.len() {
        return Err(TreeError::NodeOutOfRange(v));
    }
    if v == tree.root() {
        return Err(TreeError::SplitAtRoot);
    }
    let mut in_lower = vec![false; tree.len()];
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        in_lower[u] = true;
        stack.extend_from_slice(tree.children(u));
    }
    let upper: Vec<usize> = (0..tree.len()).filter(|&u| !in_lower[u] || u == v).collect();
    let lower: Vec<usize> = (0..tree.len()).filter(|&u| in_lower[u]).collect();
    Ok((induced(tree, &upper, tree.root()), induced(tree, &lower, v)))
}

fn induced(tree: &RootedTree, nodes: &[usize], root: usize) -> SubTree {
    let mut local = vec![usize::MAX; tree.len()];
    for (i, &u) in nodes.iter().enumerate() {
        local[u] = i;
    }
    let parent = nodes
        .iter()
        .map(|&u| {
            if u == root {
                None
            } else {
                tree.parent(u).map(|p| local[p])
            }
        })
        .collect();
    SubTree {
        tree: RootedTree::from_parents(parent).expect("induced subtree of a tree is a tree"),
        origin: nodes.to_vec(),
    }
}

/// Height budget `⌈log n / log(3/2)⌉ + 2` for the recursive decomposition.
pub fn default_height(n: usize) -> usize {
    if n <= 1 {
        return 2;
    }
    ((n as f64).ln() / 1.5f64.ln()).ceil() as usize + 2
}

/// Depth (in edges) of the decomposition tree obtained by recursive
/// balanced partitioning down to one-level trees.
pub fn decomposition_depth(tree: &RootedTree) -> Result<usize, TreeError> {
    if tree.len() < 2 {
        return Err(TreeError::TooSmall(tree.len()));
    }
    if tree.is_one_level() {
        return Ok(0);
    }
    let v = find_balanced_separator(tree)?;
    let (t1, t2) = split_at(tree, v)?;
    Ok(1 + decomposition_depth(&t1.tree)?.max(decomposition_depth(&t2.tree)?))
}
