//! Generation, ordering, and querying of basic commutators (the Hall basis)
//! on a finite alphabet up to a weight bound.
//!
//! Weight-1 basic commutators are the letters x1 < x2 < …. A bracket [u, v]
//! of total weight w is basic when u and v are basic, u > v, and, if
//! u = [s, t], additionally v ≥ t. The total order is by weight first and
//! lexicographically by (left, right) within a weight.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Budget, Error, Result};

/// Handle to an interned commutator inside one [`HallBasis`].
///
/// Structurally identical subtrees share one handle, so equality of handles
/// is equality of commutators. Handles from different bases must not be
/// mixed; all accessors go through the owning basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Commutator(u32);

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Node {
    /// 1-based letter index.
    Letter(u32),
    Bracket(Commutator, Commutator),
}

struct NodeData {
    node: Node,
    weight: u32,
    position: u32,
    letter_mask: u64,
    /// Occurrence count per letter (index 0 = x1).
    letter_counts: Vec<u32>,
}

/// The ordered Hall basis on `d` letters through `max_weight`, with O(1)
/// position lookup for interned elements.
pub struct HallBasis {
    letters: u32,
    max_weight: u32,
    nodes: Vec<NodeData>,
    dedup: HashMap<Node, Commutator>,
    /// Basis elements in the total order.
    elements: Vec<Commutator>,
    /// Start index of each weight layer: layer w occupies
    /// `elements[layer_start[w-1]..layer_start[w]]`.
    layer_start: Vec<usize>,
}

impl HallBasis {
    /// Generates the complete ordered basis on `d >= 1` letters through
    /// `max_weight >= 1`, weight by weight.
    pub fn generate(d: u32, max_weight: u32, budget: &Budget) -> Result<HallBasis> {
        if d < 1 || d > 64 {
            return Err(Error::Domain(format!(
                "letter count must be between 1 and 64, got {d}"
            )));
        }
        if max_weight < 1 {
            return Err(Error::Domain("max weight must be at least 1".into()));
        }
        let mut basis = HallBasis {
            letters: d,
            max_weight,
            nodes: Vec::new(),
            dedup: HashMap::new(),
            elements: Vec::new(),
            layer_start: vec![0],
        };
        for j in 1..=d {
            let mut counts = vec![0u32; d as usize];
            counts[(j - 1) as usize] = 1;
            basis.push_element(Node::Letter(j), 1, 1u64 << (j - 1), counts, budget)?;
        }
        basis.layer_start.push(basis.elements.len());

        for w in 2..=max_weight {
            // Enumerate candidates [left, right] in output order: the order
            // within a weight is lexicographic by (left, right), and both
            // components already have positions.
            let mut layer = Vec::new();
            for left_pos in 0..basis.layer_start[w as usize - 1] {
                let left = basis.elements[left_pos];
                let lw = basis.weight(left);
                debug_assert!(lw < w);
                let rw = w - lw;
                let min_right = match basis.node(left) {
                    // Condition (b): for left = [s, t] require right >= t.
                    Node::Bracket(_, t) => basis.position(t),
                    Node::Letter(_) => 0,
                };
                let (lo, hi) = basis.layer_range(rw);
                for right_pos in lo.max(min_right)..hi.min(left_pos) {
                    layer.push((left, basis.elements[right_pos]));
                }
            }
            for (left, right) in layer {
                let weight = basis.weight(left) + basis.weight(right);
                let mask = basis.data(left).letter_mask | basis.data(right).letter_mask;
                let counts = basis
                    .data(left)
                    .letter_counts
                    .iter()
                    .zip(&basis.data(right).letter_counts)
                    .map(|(a, b)| a + b)
                    .collect();
                basis.push_element(Node::Bracket(left, right), weight, mask, counts, budget)?;
            }
            basis.layer_start.push(basis.elements.len());
        }
        Ok(basis)
    }

    fn push_element(
        &mut self,
        node: Node,
        weight: u32,
        mask: u64,
        counts: Vec<u32>,
        budget: &Budget,
    ) -> Result<()> {
        if self.elements.len() >= budget.max_basis_elements {
            return Err(Error::Budget(format!(
                "basis on {} letters exceeds {} elements at weight {weight}",
                self.letters, budget.max_basis_elements,
            )));
        }
        debug_assert!(!self.dedup.contains_key(&node), "duplicate basis element");
        let id = Commutator(self.nodes.len() as u32);
        self.nodes.push(NodeData {
            node,
            weight,
            position: self.elements.len() as u32,
            letter_mask: mask,
            letter_counts: counts,
        });
        self.dedup.insert(node, id);
        self.elements.push(id);
        Ok(())
    }

    fn data(&self, c: Commutator) -> &NodeData {
        &self.nodes[c.0 as usize]
    }

    fn node(&self, c: Commutator) -> Node {
        self.data(c).node
    }

    /// Alphabet size d.
    pub fn letters(&self) -> u32 {
        self.letters
    }

    pub fn max_weight(&self) -> u32 {
        self.max_weight
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// The element at a position in the total order.
    pub fn element(&self, position: usize) -> Commutator {
        self.elements[position]
    }

    /// Position of an interned commutator in the total order.
    pub fn position(&self, c: Commutator) -> usize {
        self.data(c).position as usize
    }

    /// The 1-based letter `j` as a basis element.
    pub fn letter(&self, j: u32) -> Result<Commutator> {
        if j < 1 || j > self.letters {
            return Err(Error::Domain(format!(
                "letter index {j} outside 1..={}",
                self.letters
            )));
        }
        Ok(self.elements[(j - 1) as usize])
    }

    /// For a bracket element, its (left, right) components.
    pub fn parts(&self, c: Commutator) -> Option<(Commutator, Commutator)> {
        match self.node(c) {
            Node::Letter(_) => None,
            Node::Bracket(l, r) => Some((l, r)),
        }
    }

    /// Positions occupied by the weight-`w` layer (empty when out of range).
    pub fn layer_range(&self, w: u32) -> (usize, usize) {
        if w == 0 || w > self.max_weight {
            let n = self.elements.len();
            return if w == 0 { (0, 0) } else { (n, n) };
        }
        (
            self.layer_start[w as usize - 1],
            self.layer_start[w as usize],
        )
    }

    pub fn layer_len(&self, w: u32) -> usize {
        let (lo, hi) = self.layer_range(w);
        hi - lo
    }

    pub fn weight(&self, c: Commutator) -> u32 {
        self.data(c).weight
    }

    /// True iff letter `j` (1-based) occurs in `c`.
    pub fn contains_letter(&self, c: Commutator, j: u32) -> bool {
        j >= 1 && j <= 64 && self.data(c).letter_mask & (1u64 << (j - 1)) != 0
    }

    /// Occurrence count of letter `j` (1-based) in `c`.
    pub fn letter_count(&self, c: Commutator, j: u32) -> u32 {
        if j < 1 || j > self.letters {
            return 0;
        }
        self.data(c).letter_counts[(j - 1) as usize]
    }

    /// The total order: by weight, then letters by index, then brackets
    /// lexicographically by (left, right). Agrees with position order on
    /// basis elements.
    pub fn compare(&self, a: Commutator, b: Commutator) -> Ordering {
        if a == b {
            return Ordering::Equal;
        }
        match self.weight(a).cmp(&self.weight(b)) {
            Ordering::Equal => {}
            ord => return ord,
        }
        match (self.node(a), self.node(b)) {
            (Node::Letter(i), Node::Letter(j)) => i.cmp(&j),
            (Node::Bracket(l1, r1), Node::Bracket(l2, r2)) => match self.compare(l1, l2) {
                Ordering::Equal => self.compare(r1, r2),
                ord => ord,
            },
            // Unreachable for equal weights: only letters have weight 1.
            (Node::Letter(_), Node::Bracket(..)) => Ordering::Less,
            (Node::Bracket(..), Node::Letter(_)) => Ordering::Greater,
        }
    }

    /// The bracket [left, right] when it is itself a basis element.
    pub fn bracket_of(&self, left: Commutator, right: Commutator) -> Option<Commutator> {
        self.dedup.get(&Node::Bracket(left, right)).copied()
    }

    /// Looks up an externally built tree without interning anything new.
    /// Returns `None` when the tree is not a basis element of this basis.
    pub fn find(&self, tree: &CommutatorTree) -> Option<Commutator> {
        match tree {
            CommutatorTree::Letter(j) => self.dedup.get(&Node::Letter(*j)).copied(),
            CommutatorTree::Bracket(l, r) => {
                let l = self.find(l)?;
                let r = self.find(r)?;
                self.dedup.get(&Node::Bracket(l, r)).copied()
            }
        }
    }

    /// Materializes the tree form of an interned commutator.
    pub fn tree(&self, c: Commutator) -> CommutatorTree {
        match self.node(c) {
            Node::Letter(j) => CommutatorTree::Letter(j),
            Node::Bracket(l, r) => {
                CommutatorTree::Bracket(Box::new(self.tree(l)), Box::new(self.tree(r)))
            }
        }
    }

    /// Text rendering, e.g. `[[x2,x1],x1]`.
    pub fn render(&self, c: Commutator) -> String {
        match self.node(c) {
            Node::Letter(j) => format!("x{j}"),
            Node::Bracket(l, r) => format!("[{},{}]", self.render(l), self.render(r)),
        }
    }

    /// JSON rendering as nested arrays of letter indices, e.g. `[[2,1],1]`.
    pub fn to_json(&self, c: Commutator) -> serde_json::Value {
        match self.node(c) {
            Node::Letter(j) => serde_json::Value::from(j),
            Node::Bracket(l, r) => serde_json::Value::Array(vec![self.to_json(l), self.to_json(r)]),
        }
    }
}

/// A commutator as an explicit bracket tree over letters, independent of any
/// basis. Used for building and parsing; [`HallBasis::find`] maps trees onto
/// interned basis elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CommutatorTree {
    /// 1-based letter index.
    Letter(u32),
    Bracket(Box<CommutatorTree>, Box<CommutatorTree>),
}

impl CommutatorTree {
    pub fn letter(j: u32) -> Self {
        CommutatorTree::Letter(j)
    }

    pub fn bracket(left: CommutatorTree, right: CommutatorTree) -> Self {
        CommutatorTree::Bracket(Box::new(left), Box::new(right))
    }

    pub fn weight(&self) -> u32 {
        match self {
            CommutatorTree::Letter(_) => 1,
            CommutatorTree::Bracket(l, r) => l.weight() + r.weight(),
        }
    }

    pub fn contains_letter(&self, j: u32) -> bool {
        match self {
            CommutatorTree::Letter(i) => *i == j,
            CommutatorTree::Bracket(l, r) => l.contains_letter(j) || r.contains_letter(j),
        }
    }
}

impl PartialOrd for CommutatorTree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CommutatorTree {
    /// The same total order as [`HallBasis::compare`], on raw trees.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.weight().cmp(&other.weight()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        match (self, other) {
            (CommutatorTree::Letter(i), CommutatorTree::Letter(j)) => i.cmp(j),
            (CommutatorTree::Bracket(l1, r1), CommutatorTree::Bracket(l2, r2)) => {
                match l1.cmp(l2) {
                    Ordering::Equal => r1.cmp(r2),
                    ord => ord,
                }
            }
            (CommutatorTree::Letter(_), CommutatorTree::Bracket(..)) => Ordering::Less,
            (CommutatorTree::Bracket(..), CommutatorTree::Letter(_)) => Ordering::Greater,
        }
    }
}

impl fmt::Display for CommutatorTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommutatorTree::Letter(j) => write!(f, "x{j}"),
            CommutatorTree::Bracket(l, r) => write!(f, "[{l},{r}]"),
        }
    }
}

impl FromStr for CommutatorTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parser = TreeParser {
            bytes: s.as_bytes(),
            pos: 0,
        };
        let tree = parser.parse_tree()?;
        parser.skip_ws();
        if parser.pos != parser.bytes.len() {
            return Err(Error::Domain(format!(
                "trailing input after commutator: {:?}",
                &s[parser.pos..]
            )));
        }
        Ok(tree)
    }
}

struct TreeParser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl TreeParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn parse_tree(&mut self) -> Result<CommutatorTree> {
        self.skip_ws();
        match self.bytes.get(self.pos) {
            Some(b'[') => {
                self.pos += 1;
                let left = self.parse_tree()?;
                self.skip_ws();
                if self.bytes.get(self.pos) != Some(&b',') {
                    return Err(Error::Domain("expected ',' in bracket".into()));
                }
                self.pos += 1;
                let right = self.parse_tree()?;
                self.skip_ws();
                if self.bytes.get(self.pos) != Some(&b']') {
                    return Err(Error::Domain("expected ']' closing bracket".into()));
                }
                self.pos += 1;
                Ok(CommutatorTree::bracket(left, right))
            }
            Some(b'x') => {
                self.pos += 1;
                let start = self.pos;
                while self.bytes.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
                    self.pos += 1;
                }
                if start == self.pos {
                    return Err(Error::Domain("expected letter index after 'x'".into()));
                }
                let j: u32 = std::str::from_utf8(&self.bytes[start..self.pos])
                    .unwrap()
                    .parse()
                    .map_err(|_| Error::Domain("letter index out of range".into()))?;
                if j == 0 {
                    return Err(Error::Domain("letter indices are 1-based".into()));
                }
                Ok(CommutatorTree::Letter(j))
            }
            other => Err(Error::Domain(format!(
                "expected 'x<n>' or '[', found {:?}",
                other.map(|b| *b as char)
            ))),
        }
    }
}
