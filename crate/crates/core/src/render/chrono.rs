//! Chronology expression as a control graph.

use crate::dynamics::BehaviorExpr;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum ChronoNode {
    Start,
    End,
    Event(String),
    AltSplit,
    AltJoin,
    ParSplit,
    ParJoin,
    /// Stands in for an empty sequence.
    Skip,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct ChronoEdge {
    pub from: usize,
    pub to: usize,
    /// Loop back edge, with the guard if any.
    pub back: Option<Option<String>>,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct ChronoGraph {
    pub nodes: Vec<ChronoNode>,
    pub edges: Vec<ChronoEdge>,
}

impl ChronoGraph {
    pub fn build(expr: &BehaviorExpr) -> Self {
        let mut g = ChronoGraph::default();
        let start = g.node(ChronoNode::Start);
        let (first, last) = g.expr(expr);
        let end = g.node(ChronoNode::End);
        g.edge(start, first);
        g.edge(last, end);
        g
    }

    fn node(&mut self, n: ChronoNode) -> usize {
        self.nodes.push(n);
        self.nodes.len() - 1
    }

    fn edge(&mut self, from: usize, to: usize) {
        self.edges.push(ChronoEdge {
            from,
            to,
            back: None,
        });
    }

    fn expr(&mut self, e: &BehaviorExpr) -> (usize, usize) {
        match e {
            BehaviorExpr::Event(id) => {
                let n = self.node(ChronoNode::Event(id.to_string()));
                (n, n)
            }
            BehaviorExpr::Seq(xs) => {
                let mut ends: Option<(usize, usize)> = None;
                for x in xs {
                    let (f, l) = self.expr(x);
                    ends = Some(match ends {
                        None => (f, l),
                        Some((first, prev)) => {
                            self.edge(prev, f);
                            (first, l)
                        }
                    });
                }
                ends.unwrap_or_else(|| {
                    let n = self.node(ChronoNode::Skip);
                    (n, n)
                })
            }
            BehaviorExpr::Alt(xs) => self.fork(xs, ChronoNode::AltSplit, ChronoNode::AltJoin),
            BehaviorExpr::Par(xs) => self.fork(xs, ChronoNode::ParSplit, ChronoNode::ParJoin),
            BehaviorExpr::Loop { body, guard } => {
                let (f, l) = self.expr(body);
                self.edges.push(ChronoEdge {
                    from: l,
                    to: f,
                    back: Some(guard.clone()),
                });
                (f, l)
            }
        }
    }

    fn fork(&mut self, xs: &[BehaviorExpr], split: ChronoNode, join: ChronoNode) -> (usize, usize) {
        let s = self.node(split);
        let mut arms = Vec::with_capacity(xs.len());
        for x in xs {
            arms.push(self.expr(x));
        }
        let j = self.node(join);
        for (f, l) in arms {
            self.edge(s, f);
            self.edge(l, j);
        }
        (s, j)
    }
}
