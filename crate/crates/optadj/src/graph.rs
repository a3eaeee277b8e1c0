//! Directed acyclic graphs over named vertices.
//!
//! A [`Dag`] is immutable once built. Vertices are addressed by their
//! declaration index; [`VertexSet`] holds indices and iterates them in
//! declaration order.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

/// Index of a vertex in its graph's declaration order.
pub type Vertex = usize;

/// An ordered set of vertex indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexSet(BTreeSet<Vertex>);

impl VertexSet {
    pub fn new() -> Self {
        Self(BTreeSet::new())
    }

    pub fn singleton(v: Vertex) -> Self {
        Self(BTreeSet::from([v]))
    }

    pub fn insert(&mut self, v: Vertex) -> bool {
        self.0.insert(v)
    }

    pub fn remove(&mut self, v: Vertex) -> bool {
        self.0.remove(&v)
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.contains(&v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = Vertex> + '_ {
        self.0.iter().copied()
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        self.0.union(&other.0).copied().collect()
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        self.0.intersection(&other.0).copied().collect()
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        self.0.difference(&other.0).copied().collect()
    }

    pub fn symmetric_difference(&self, other: &VertexSet) -> VertexSet {
        self.0.symmetric_difference(&other.0).copied().collect()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn first(&self) -> Option<Vertex> {
        self.0.first().copied()
    }

    pub fn with(&self, v: Vertex) -> VertexSet {
        let mut s = self.clone();
        s.insert(v);
        s
    }

    pub fn without(&self, v: Vertex) -> VertexSet {
        let mut s = self.clone();
        s.remove(v);
        s
    }

    pub fn to_vec(&self) -> Vec<Vertex> {
        self.iter().collect()
    }
}

impl FromIterator<Vertex> for VertexSet {
    fn from_iter<I: IntoIterator<Item = Vertex>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl Extend<Vertex> for VertexSet {
    fn extend<I: IntoIterator<Item = Vertex>>(&mut self, iter: I) {
        self.0.extend(iter)
    }
}

impl<'a> IntoIterator for &'a VertexSet {
    type Item = Vertex;
    type IntoIter = std::iter::Copied<std::collections::btree_set::Iter<'a, Vertex>>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter().copied()
    }
}

/// An immutable directed acyclic graph.
#[derive(Clone, Debug)]
pub struct Dag {
    names: Vec<String>,
    index: HashMap<String, Vertex>,
    parents: Vec<Vec<Vertex>>,
    children: Vec<Vec<Vertex>>,
    topo_pos: Vec<usize>,
}

impl PartialEq for Dag {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.parents == other.parents
    }
}

impl Eq for Dag {}

impl Dag {
    /// Builds a graph from declared vertices and edges given by name.
    ///
    /// Fails on duplicate vertices, edges with undeclared endpoints, and cycles.
    pub fn new<V, E, S>(vertices: V, edges: E) -> Result<Dag>
    where
        V: IntoIterator<Item = S>,
        E: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        let mut names = Vec::new();
        let mut index = HashMap::new();
        for v in vertices {
            let v = v.as_ref().to_string();
            if index.contains_key(&v) {
                return Err(Error::DuplicateVertex(v));
            }
            index.insert(v.clone(), names.len());
            names.push(v);
        }
        let mut pairs = Vec::new();
        for (t, h) in edges {
            let t = *index
                .get(t.as_ref())
                .ok_or_else(|| Error::UnknownVertex(t.as_ref().to_string()))?;
            let h = *index
                .get(h.as_ref())
                .ok_or_else(|| Error::UnknownVertex(h.as_ref().to_string()))?;
            pairs.push((t, h));
        }
        Self::from_indices(names, pairs)
    }

    fn from_indices(names: Vec<String>, edges: Vec<(Vertex, Vertex)>) -> Result<Dag> {
        let n = names.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for (t, h) in edges {
            if t == h {
                return Err(Error::Cycle(vec![names[t].clone(), names[t].clone()]));
            }
            parents[h].push(t);
            children[t].push(h);
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        let index = names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let mut dag = Dag {
            names,
            index,
            parents,
            children,
            topo_pos: Vec::new(),
        };
        dag.topo_pos = dag.compute_topological_positions()?;
        Ok(dag)
    }

    /// Kahn's algorithm with ties broken by declaration index.
    fn compute_topological_positions(&self) -> Result<Vec<usize>> {
        let n = self.len();
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut heap: BinaryHeap<Reverse<Vertex>> = (0..n)
            .filter(|&v| indegree[v] == 0)
            .map(Reverse)
            .collect();
        let mut pos = vec![usize::MAX; n];
        let mut next = 0;
        while let Some(Reverse(v)) = heap.pop() {
            pos[v] = next;
            next += 1;
            for &c in &self.children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    heap.push(Reverse(c));
                }
            }
        }
        if next < n {
            return Err(Error::Cycle(self.find_cycle(&pos)));
        }
        Ok(pos)
    }

    /// Walks parent links among unsorted vertices until one repeats.
    fn find_cycle(&self, pos: &[usize]) -> Vec<String> {
        let stuck = |v: Vertex| pos[v] == usize::MAX;
        let start = (0..self.len()).find(|&v| stuck(v)).unwrap_or(0);
        let mut seen = HashMap::new();
        let mut walk = Vec::new();
        let mut v = start;
        while !seen.contains_key(&v) {
            seen.insert(v, walk.len());
            walk.push(v);
            v = self.parents[v]
                .iter()
                .copied()
                .find(|&p| stuck(p))
                .unwrap_or(v);
        }
        let mut cycle: Vec<Vertex> = walk[seen[&v]..].to_vec();
        cycle.reverse();
        cycle.push(cycle[0]);
        cycle.iter().map(|&v| self.names[v].clone()).collect()
    }

    /// Parses the line-oriented DAG file format.
    ///
    /// Lines are `node <name>`, `edge <tail> <head>` or `<tail> -> <head>`;
    /// `#` starts a comment. Vertices named only in edges are declared on
    /// first use.
    pub fn parse(text: &str) -> Result<Dag> {
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<String, Vertex> = HashMap::new();
        let mut explicit: BTreeSet<String> = BTreeSet::new();
        let mut edges = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            let tokens = tokenize(line);
            let syntax = |column: usize, message: &str| Error::Syntax {
                line: lineno + 1,
                column,
                message: message.to_string(),
            };
            let mut declare = |(col, name): (usize, &str)| -> Result<Vertex> {
                if name.contains(',') || name == "->" {
                    return Err(syntax(col, "invalid vertex name"));
                }
                if let Some(&v) = index.get(name) {
                    return Ok(v);
                }
                index.insert(name.to_string(), names.len());
                names.push(name.to_string());
                Ok(names.len() - 1)
            };
            match tokens.as_slice() {
                [] => {}
                [t, (_, "->"), h] => {
                    let t = declare(*t)?;
                    let h = declare(*h)?;
                    edges.push((t, h));
                }
                [(_, "node"), v] => {
                    if !explicit.insert(v.1.to_string()) {
                        return Err(Error::DuplicateVertex(v.1.to_string()));
                    }
                    declare(*v)?;
                }
                [(_, "edge"), t, h] => {
                    let t = declare(*t)?;
                    let h = declare(*h)?;
                    edges.push((t, h));
                }
                [(_, "node"), _, (col, _), ..] | [(_, "edge"), _, _, (col, _), ..] => {
                    return Err(syntax(*col, "unexpected token"));
                }
                [(_, "node")] | [(_, "edge"), ..] => {
                    let col = line.trim_end().chars().count() + 1;
                    return Err(syntax(col, "missing vertex name"));
                }
                [_, (_, "->"), _, (col, _), ..] => return Err(syntax(*col, "unexpected token")),
                [(col, _), ..] => {
                    return Err(syntax(*col, "expected `node`, `edge` or `<tail> -> <head>`"))
                }
            }
        }
        Self::from_indices(names, edges)
    }

    /// Renders the graph in the DAG file format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for name in &self.names {
            out.push_str("node ");
            out.push_str(name);
            out.push('\n');
        }
        for (t, h) in self.edges() {
            out.push_str(&format!("{} -> {}\n", self.names[t], self.names[h]));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: Vertex) -> &str {
        &self.names[v]
    }

    pub fn vertex(&self, name: &str) -> Result<Vertex> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    /// Resolves vertex names to a set.
    pub fn set<I, S>(&self, names: I) -> Result<VertexSet>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        names.into_iter().map(|s| self.vertex(s.as_ref())).collect()
    }

    /// All vertices.
    pub fn all(&self) -> VertexSet {
        (0..self.len()).collect()
    }

    /// Names of a set, sorted lexicographically.
    pub fn labels(&self, set: &VertexSet) -> Vec<String> {
        let mut out: Vec<String> = set.iter().map(|v| self.names[v].clone()).collect();
        out.sort();
        out
    }

    /// `{a,b}` rendering with lexicographically sorted names.
    pub fn format_set(&self, set: &VertexSet) -> String {
        format!("{{{}}}", self.labels(set).join(","))
    }

    /// Edges sorted by (tail, head) declaration index.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::new();
        for (t, cs) in self.children.iter().enumerate() {
            for &h in cs {
                out.push((t, h));
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.children.iter().map(Vec::len).sum()
    }

    pub fn has_edge(&self, tail: Vertex, head: Vertex) -> bool {
        self.children[tail].binary_search(&head).is_ok()
    }

    pub fn parents(&self, v: Vertex) -> &[Vertex] {
        &self.parents[v]
    }

    pub fn children(&self, v: Vertex) -> &[Vertex] {
        &self.children[v]
    }

    pub fn parents_of(&self, s: &VertexSet) -> VertexSet {
        s.iter().flat_map(|v| self.parents[v].iter().copied()).collect()
    }

    pub fn children_of(&self, s: &VertexSet) -> VertexSet {
        s.iter().flat_map(|v| self.children[v].iter().copied()).collect()
    }

    fn closure(&self, s: &VertexSet, next: &[Vec<Vertex>]) -> VertexSet {
        let mut seen = s.clone();
        let mut queue: VecDeque<Vertex> = s.iter().collect();
        while let Some(v) = queue.pop_front() {
            for &w in &next[v] {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Ancestors of `s`, including `s` itself.
    pub fn ancestors(&self, s: &VertexSet) -> VertexSet {
        self.closure(s, &self.parents)
    }

    /// Descendants of `s`, including `s` itself.
    pub fn descendants(&self, s: &VertexSet) -> VertexSet {
        self.closure(s, &self.children)
    }

    /// Vertices that are not descendants of `s`.
    pub fn non_descendants(&self, s: &VertexSet) -> VertexSet {
        self.all().difference(&self.descendants(s))
    }

    /// Position of `v` in the graph's deterministic topological order.
    pub fn topological_position(&self, v: Vertex) -> usize {
        self.topo_pos[v]
    }

    /// Orders `subset` so that no vertex precedes one of its ancestors.
    /// Ties are broken by declaration order.
    pub fn topological_sort(&self, subset: &VertexSet) -> Vec<Vertex> {
        let mut out = subset.to_vec();
        out.sort_by_key(|&v| self.topo_pos[v]);
        out
    }

    /// Vertices d-connected to some member of `x` given `z`, excluding `z`.
    ///
    /// Bayes-ball traversal over (vertex, direction) states.
    pub fn d_connected(&self, x: &VertexSet, z: &VertexSet) -> VertexSet {
        let n = self.len();
        let anc_z = self.ancestors(z);
        // visited[v][0]: arrived from a child (moving up); [1]: from a parent.
        let mut visited = vec![[false; 2]; n];
        let mut reached = VertexSet::new();
        let mut queue: VecDeque<(Vertex, usize)> = VecDeque::new();
        for v in x {
            queue.push_back((v, 0));
        }
        while let Some((v, dir)) = queue.pop_front() {
            if visited[v][dir] {
                continue;
            }
            visited[v][dir] = true;
            let in_z = z.contains(v);
            if !in_z {
                reached.insert(v);
            }
            if dir == 0 {
                if !in_z {
                    for &p in &self.parents[v] {
                        queue.push_back((p, 0));
                    }
                    for &c in &self.children[v] {
                        queue.push_back((c, 1));
                    }
                }
            } else {
                if !in_z {
                    for &c in &self.children[v] {
                        queue.push_back((c, 1));
                    }
                }
                if anc_z.contains(v) {
                    for &p in &self.parents[v] {
                        queue.push_back((p, 0));
                    }
                }
            }
        }
        reached
    }

    /// Whether `x` and `y` are d-separated by `z`. The three sets must be
    /// pairwise disjoint.
    pub fn d_separated(&self, x: &VertexSet, y: &VertexSet, z: &VertexSet) -> Result<bool> {
        for (a, b) in [(x, y), (x, z), (y, z)] {
            if let Some(v) = a.intersection(b).first() {
                return Err(Error::Overlap(self.names[v].clone()));
            }
        }
        Ok(self.d_separated_unchecked(x, y, z))
    }

    fn d_separated_unchecked(&self, x: &VertexSet, y: &VertexSet, z: &VertexSet) -> bool {
        if x.is_empty() || y.is_empty() {
            return true;
        }
        self.d_connected(x, z).is_disjoint(y)
    }

    /// Conditional independence statement `x ⟂ y | z` read with set
    /// semantics: members of `z` are dropped from `x` and `y`, an empty side
    /// holds trivially and a shared vertex never does.
    pub fn independent(&self, x: &VertexSet, y: &VertexSet, z: &VertexSet) -> bool {
        let x = x.difference(z);
        let y = y.difference(z);
        if x.is_empty() || y.is_empty() {
            return true;
        }
        if !x.is_disjoint(&y) {
            return false;
        }
        self.d_separated_unchecked(&x, &y, z)
    }

    /// Marginalizes a vertex with a single child: its parents point to the
    /// child and the vertex is removed.
    pub fn exogenize(&self, u: Vertex) -> Result<Dag> {
        let ch = &self.children[u];
        if ch.len() != 1 {
            return Err(Error::NotSingleChild {
                vertex: self.names[u].clone(),
                children: ch.len(),
            });
        }
        let r = ch[0];
        let mut edges: Vec<(Vertex, Vertex)> = self
            .edges()
            .into_iter()
            .filter(|&(t, h)| t != u && h != u)
            .collect();
        edges.extend(self.parents[u].iter().map(|&p| (p, r)));
        let keep = self.all().without(u);
        self.rebuild(&keep, edges)
    }

    /// The subgraph on `keep` with every edge between kept vertices.
    pub fn induced_subgraph(&self, keep: &VertexSet) -> Dag {
        let edges = self.edges();
        self.rebuild(keep, edges)
            .expect("subgraph of an acyclic graph is acyclic")
    }

    /// The same vertices with the edges for which `drop` returns true removed.
    pub fn without_edges<F: Fn(Vertex, Vertex) -> bool>(&self, drop: F) -> Dag {
        let edges = self.edges().into_iter().filter(|&(t, h)| !drop(t, h)).collect();
        self.rebuild(&self.all(), edges)
            .expect("edge deletion keeps the graph acyclic")
    }

    fn rebuild(&self, keep: &VertexSet, edges: Vec<(Vertex, Vertex)>) -> Result<Dag> {
        let mut map = vec![usize::MAX; self.len()];
        let mut names = Vec::with_capacity(keep.len());
        for v in keep {
            map[v] = names.len();
            names.push(self.names[v].clone());
        }
        let edges = edges
            .into_iter()
            .filter(|&(t, h)| keep.contains(t) && keep.contains(h))
            .map(|(t, h)| (map[t], map[h]))
            .collect();
        Self::from_indices(names, edges)
    }

    /// Maps a set of this graph into `other` by vertex name.
    pub fn translate(&self, set: &VertexSet, other: &Dag) -> Result<VertexSet> {
        set.iter().map(|v| other.vertex(&self.names[v])).collect()
    }
}

/// Treatments in temporal order and a single outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    treatments: Vec<Vertex>,
    outcome: Vertex,
}

impl Query {
    /// Validates distinctness and that no treatment is an ancestor of an
    /// earlier one.
    pub fn new(g: &Dag, treatments: Vec<Vertex>, outcome: Vertex) -> Result<Query> {
        if treatments.is_empty() {
            return Err(Error::InvalidQuery("at least one treatment is required".into()));
        }
        let set: VertexSet = treatments.iter().copied().collect();
        if set.len() != treatments.len() {
            return Err(Error::InvalidQuery("treatments must be distinct".into()));
        }
        if set.contains(outcome) {
            return Err(Error::InvalidQuery(format!(
                "outcome `{}` is also a treatment",
                g.name(outcome)
            )));
        }
        for (i, &a) in treatments.iter().enumerate() {
            let anc = g.ancestors(&VertexSet::singleton(a));
            if let Some(&later) = treatments[i + 1..].iter().find(|&&b| anc.contains(b)) {
                return Err(Error::InvalidQuery(format!(
                    "treatment `{}` is an ancestor of the earlier treatment `{}`",
                    g.name(later),
                    g.name(a)
                )));
            }
        }
        Ok(Query {
            treatments,
            outcome,
        })
    }

    /// Resolves names and validates as in [`Query::new`].
    pub fn from_names<S: AsRef<str>>(g: &Dag, treatments: &[S], outcome: &str) -> Result<Query> {
        let ts = treatments
            .iter()
            .map(|t| g.vertex(t.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Query::new(g, ts, g.vertex(outcome)?)
    }

    pub fn treatments(&self) -> &[Vertex] {
        &self.treatments
    }

    pub fn treatment_set(&self) -> VertexSet {
        self.treatments.iter().copied().collect()
    }

    pub fn outcome(&self) -> Vertex {
        self.outcome
    }

    /// The single treatment, or an error for joint treatments.
    pub fn point(&self) -> Result<Vertex> {
        match self.treatments.as_slice() {
            [a] => Ok(*a),
            _ => Err(Error::JointTreatment),
        }
    }

    /// The same query expressed in another graph sharing vertex names.
    pub fn translate(&self, from: &Dag, to: &Dag) -> Result<Query> {
        let ts = self
            .treatments
            .iter()
            .map(|&t| to.vertex(from.name(t)))
            .collect::<Result<Vec<_>>>()?;
        Query::new(to, ts, to.vertex(from.name(self.outcome))?)
    }
}

impl fmt::Display for Dag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Splits a line into whitespace-separated tokens with 1-based columns.
fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    let mut col = 0;
    for (byte, ch) in line.char_indices() {
        col += 1;
        if ch.is_whitespace() {
            if let Some((b, c)) = start.take() {
                out.push((c, &line[b..byte]));
            }
        } else if start.is_none() {
            start = Some((byte, col));
        }
    }
    if let Some((b, c)) = start {
        out.push((c, &line[b..]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> Dag {
        Dag::parse("A -> M\nM -> Y\n").unwrap()
    }

    #[test]
    fn parses_minimal_graph() {
        let g = Dag::parse("node A\nnode Y\nedge A Y").unwrap();
        assert_eq!(g.names(), ["A", "Y"]);
        assert_eq!(g.edges(), vec![(0, 1)]);
    }

    #[test]
    fn reports_two_cycle() {
        match Dag::parse("edge A Y\nedge Y A") {
            Err(Error::Cycle(c)) => {
                assert_eq!(c.first(), c.last());
                assert_eq!(c.len(), 3);
            }
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn reports_longer_cycle_in_order() {
        let Err(Error::Cycle(c)) = Dag::parse("X -> A\nA -> B\nB -> C\nC -> A") else {
            panic!("expected cycle");
        };
        let g = Dag::new(["A", "B", "C"], [("A", "B"), ("B", "C")]).unwrap();
        for w in c.windows(2) {
            let t = g.vertex(&w[0]).unwrap();
            let h = g.vertex(&w[1]).unwrap();
            assert!(g.has_edge(t, h) || (w[0] == "C" && w[1] == "A"));
        }
    }

    #[test]
    fn syntax_errors_carry_position() {
        match Dag::parse("node A\n  A => Y") {
            Err(Error::Syntax { line, column, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(column, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
        match Dag::parse("A -> Y extra") {
            Err(Error::Syntax { column, .. }) => assert_eq!(column, 8),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            Dag::parse("node"),
            Err(Error::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn duplicate_and_unknown_vertices() {
        assert_eq!(
            Dag::parse("node A\nnode A"),
            Err(Error::DuplicateVertex("A".into()))
        );
        assert_eq!(
            Dag::new(["A"], [("A", "B")]),
            Err(Error::UnknownVertex("B".into()))
        );
    }

    #[test]
    fn comments_and_implicit_nodes() {
        let g = Dag::parse("# header\nnode B # trailing\nA -> B\n\n").unwrap();
        assert_eq!(g.names(), ["B", "A"]);
        assert!(g.has_edge(1, 0));
    }

    #[test]
    fn text_round_trip() {
        let g = Dag::parse("node Z\nA -> Y\nZ -> A\nZ -> Y").unwrap();
        assert_eq!(Dag::parse(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn chain_queries() {
        let g = chain();
        let a = g.set(["A"]).unwrap();
        assert_eq!(g.descendants(&a), g.all());
        assert_eq!(g.ancestors(&a), a);
        assert_eq!(g.topological_sort(&g.set(["Y", "M", "A"]).unwrap()), vec![0, 1, 2]);
        assert!(g.topological_sort(&VertexSet::new()).is_empty());
    }

    #[test]
    fn d_separation_basics() {
        let g = Dag::parse("O1 -> A\nO2 -> A\nA -> Y\nO1 -> Y\nO2 -> Y").unwrap();
        let s = |n: &[&str]| g.set(n.iter().copied()).unwrap();
        assert!(g.d_separated(&s(&["O1"]), &s(&["O2"]), &s(&[])).unwrap());
        assert!(!g.d_separated(&s(&["O1"]), &s(&["O2"]), &s(&["A"])).unwrap());
        assert!(!g.d_separated(&s(&["O1"]), &s(&["O2"]), &s(&["Y"])).unwrap());
        assert_eq!(
            g.d_separated(&s(&["O1"]), &s(&["O1"]), &s(&[])),
            Err(Error::Overlap("O1".into()))
        );
    }

    #[test]
    fn independent_uses_set_semantics() {
        let g = chain();
        let s = |n: &[&str]| g.set(n.iter().copied()).unwrap();
        assert!(!g.independent(&s(&["A", "M"]), &s(&["M"]), &s(&[])));
        assert!(g.independent(&s(&["A", "M"]), &s(&["Y"]), &s(&["M"])));
        assert!(g.independent(&s(&["M"]), &s(&["Y", "M"]), &s(&["M"])));
    }

    #[test]
    fn exogenize_relay_and_errors() {
        let g = Dag::parse("X -> U\nU -> R").unwrap();
        let h = g.exogenize(g.vertex("U").unwrap()).unwrap();
        assert_eq!(h.names(), ["X", "R"]);
        assert_eq!(h.edges(), vec![(0, 1)]);
        let front = Dag::parse("A -> M\nM -> Y\nO -> A\nO -> Y").unwrap();
        assert!(matches!(
            front.exogenize(front.vertex("O").unwrap()),
            Err(Error::NotSingleChild { children: 2, .. })
        ));
    }

    #[test]
    fn exogenize_rewires_all_parents() {
        let g = Dag::parse("P1 -> U\nP2 -> U\nU -> R\nP1 -> R").unwrap();
        let h = g.exogenize(g.vertex("U").unwrap()).unwrap();
        let r = h.vertex("R").unwrap();
        assert_eq!(h.parents(r), [h.vertex("P1").unwrap(), h.vertex("P2").unwrap()]);
        assert!(h.vertex("U").is_err());
    }

    #[test]
    fn induced_subgraph_filters_edges() {
        let g = chain();
        assert_eq!(g.induced_subgraph(&g.all()), g);
        let h = g.induced_subgraph(&g.set(["A", "Y"]).unwrap());
        assert_eq!(h.edge_count(), 0);
        assert!(g.induced_subgraph(&VertexSet::new()).is_empty());
    }
}
