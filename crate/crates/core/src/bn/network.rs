use super::{BnError, BooleanFunction, InputVector, OutputVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Input,
    Interior,
    Output,
}

/// One node of a feed-forward network: either an in-node, or a node whose
/// state is a function of earlier nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: usize,
    pub function: Option<BooleanFunction>,
    /// Argument node ids, in function input order.
    pub inputs: Vec<usize>,
}

impl Node {
    pub fn input(id: usize) -> Self {
        Self {
            id,
            function: None,
            inputs: Vec::new(),
        }
    }

    pub fn function(id: usize, function: BooleanFunction, inputs: Vec<usize>) -> Self {
        Self {
            id,
            function: Some(function),
            inputs,
        }
    }

    pub fn is_input(&self) -> bool {
        self.function.is_none()
    }
}

/// A validated feed-forward Boolean network whose node ids are a topological order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    nodes: Vec<Node>,
    in_nodes: Vec<usize>,
    out_nodes: Vec<usize>,
    kinds: Vec<NodeKind>,
    fanout: Vec<Vec<usize>>,
}

impl Network {
    /// Validates `nodes` (which must be listed by id, `0..n`) and the ordered
    /// out-node list.
    pub fn new(nodes: Vec<Node>, out_nodes: Vec<usize>) -> Result<Self, BnError> {
        let n = nodes.len();
        for (pos, node) in nodes.iter().enumerate() {
            if node.id != pos {
                return Err(BnError::NodeOrder {
                    position: pos,
                    id: node.id,
                });
            }
            match &node.function {
                None if !node.inputs.is_empty() => {
                    return Err(BnError::InputWithArgs { node: node.id });
                }
                Some(f) if f.arity() != node.inputs.len() => {
                    return Err(BnError::ArityMismatch {
                        node: node.id,
                        arity: f.arity(),
                        args: node.inputs.len(),
                    });
                }
                _ => {}
            }
            for (k, &arg) in node.inputs.iter().enumerate() {
                if arg >= n {
                    return Err(BnError::DanglingInput {
                        node: node.id,
                        input: arg,
                    });
                }
                if arg >= node.id {
                    return Err(BnError::Cycle {
                        node: node.id,
                        input: arg,
                    });
                }
                if node.inputs[..k].contains(&arg) {
                    return Err(BnError::RepeatedArg {
                        node: node.id,
                        input: arg,
                    });
                }
            }
        }

        let mut fanout = vec![Vec::new(); n];
        for node in &nodes {
            for &arg in &node.inputs {
                fanout[arg].push(node.id);
            }
        }

        let in_nodes: Vec<usize> = nodes.iter().filter(|v| v.is_input()).map(|v| v.id).collect();
        if in_nodes.is_empty() {
            return Err(BnError::NoInputs);
        }
        if out_nodes.is_empty() {
            return Err(BnError::NoOutputs);
        }
        let mut kinds: Vec<NodeKind> = nodes
            .iter()
            .map(|v| {
                if v.is_input() {
                    NodeKind::Input
                } else {
                    NodeKind::Interior
                }
            })
            .collect();
        for (k, &out) in out_nodes.iter().enumerate() {
            if out >= n {
                return Err(BnError::DanglingOutput { node: out });
            }
            if out_nodes[..k].contains(&out) {
                return Err(BnError::DuplicateOutput { node: out });
            }
            if kinds[out] == NodeKind::Input {
                return Err(BnError::OutputIsInput { node: out });
            }
            if !fanout[out].is_empty() {
                return Err(BnError::OutputHasFanout { node: out });
            }
            kinds[out] = NodeKind::Output;
        }

        Ok(Self {
            nodes,
            in_nodes,
            out_nodes,
            kinds,
            fanout,
        })
    }

    /// Total node count `n`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn kind(&self, id: usize) -> NodeKind {
        self.kinds[id]
    }

    pub fn in_nodes(&self) -> &[usize] {
        &self.in_nodes
    }

    pub fn out_nodes(&self) -> &[usize] {
        &self.out_nodes
    }

    /// `N`
    pub fn n_inputs(&self) -> usize {
        self.in_nodes.len()
    }

    /// `M`
    pub fn n_outputs(&self) -> usize {
        self.out_nodes.len()
    }

    /// Ids of the function nodes that take `id` as an argument, ascending.
    pub fn fanout(&self, id: usize) -> &[usize] {
        &self.fanout[id]
    }

    /// Total number of function-to-argument edges, `sum_j k_j`.
    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|v| v.inputs.len()).sum()
    }

    /// Largest in-degree over all nodes.
    pub fn max_arity(&self) -> usize {
        self.nodes.iter().map(|v| v.inputs.len()).max().unwrap_or(0)
    }

    /// Longest in-node to out-node path, counted in edges.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.len()];
        for node in &self.nodes {
            level[node.id] = node.inputs.iter().map(|&a| level[a] + 1).max().unwrap_or(0);
        }
        self.out_nodes.iter().map(|&o| level[o]).max().unwrap_or(0)
    }

    /// Evaluates every node for in-node values `x`, writing the full state
    /// into `state` (resized to `n`).
    pub fn evaluate_state(&self, x: &[bool], state: &mut Vec<bool>) -> Result<(), BnError> {
        if x.len() != self.n_inputs() {
            return Err(BnError::InputLength {
                expected: self.n_inputs(),
                found: x.len(),
            });
        }
        state.clear();
        state.resize(self.len(), false);
        let mut next_input = x.iter();
        for node in &self.nodes {
            state[node.id] = match &node.function {
                None => *next_input.next().expect("one value per in-node"),
                Some(f) => {
                    let index = node
                        .inputs
                        .iter()
                        .enumerate()
                        .fold(0usize, |acc, (i, &a)| acc | (usize::from(state[a]) << i));
                    f.eval_index(index)
                }
            };
        }
        Ok(())
    }

    /// Forward evaluation `y = f(x)`.
    pub fn eval(&self, x: &InputVector) -> Result<OutputVector, BnError> {
        let mut state = Vec::new();
        self.evaluate_state(x.bits(), &mut state)?;
        Ok(OutputVector(self.out_nodes.iter().map(|&o| state[o]).collect()))
    }

    /// Whether `f(x) = y`, reusing `state` as scratch space.
    pub fn maps_to(&self, x: &[bool], y: &[bool], state: &mut Vec<bool>) -> Result<bool, BnError> {
        if y.len() != self.n_outputs() {
            return Err(BnError::OutputLength {
                expected: self.n_outputs(),
                found: y.len(),
            });
        }
        self.evaluate_state(x, state)?;
        Ok(self.out_nodes.iter().zip(y).all(|(&o, &want)| state[o] == want))
    }

    pub fn check_output(&self, y: &OutputVector) -> Result<(), BnError> {
        if y.len() != self.n_outputs() {
            return Err(BnError::OutputLength {
                expected: self.n_outputs(),
                found: y.len(),
            });
        }
        Ok(())
    }

    /// The same topology with every function replaced by `map(node, function)`.
    pub fn map_functions(
        &self,
        mut map: impl FnMut(&Node, &BooleanFunction) -> BooleanFunction,
    ) -> Result<Self, BnError> {
        let nodes = self
            .nodes
            .iter()
            .map(|v| Node {
                id: v.id,
                function: v.function.as_ref().map(|f| map(v, f)),
                inputs: v.inputs.clone(),
            })
            .collect();
        Self::new(nodes, self.out_nodes.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn not_net() -> Network {
        Network::new(
            vec![Node::input(0), Node::function(1, BooleanFunction::not(), vec![0])],
            vec![1],
        )
        .unwrap()
    }

    /// Nodes 0..3 are inputs, 3 = AND(0,1), 4 = AND(0,2), 5 = AND(3,4) is the output.
    fn three_and_net() -> Network {
        let and = BooleanFunction::and2;
        Network::new(
            vec![
                Node::input(0),
                Node::input(1),
                Node::input(2),
                Node::function(3, and(), vec![0, 1]),
                Node::function(4, and(), vec![0, 2]),
                Node::function(5, and(), vec![3, 4]),
            ],
            vec![5],
        )
        .unwrap()
    }

    #[test]
    fn not_gate() {
        let y = not_net().eval(&"0".parse().unwrap()).unwrap();
        assert_eq!(y.to_string(), "1");
    }

    #[test]
    fn identity_wires() {
        let net = Network::new(
            vec![
                Node::input(0),
                Node::input(1),
                Node::function(2, BooleanFunction::identity(), vec![0]),
                Node::function(3, BooleanFunction::identity(), vec![1]),
            ],
            vec![2, 3],
        )
        .unwrap();
        for m in 0..4 {
            let x = InputVector::from_index(m, 2);
            assert_eq!(net.eval(&x).unwrap().bits(), x.bits());
        }
    }

    #[test]
    fn and_dag_hand_evaluation() {
        let net = three_and_net();
        assert_eq!(net.eval(&"111".parse().unwrap()).unwrap().to_string(), "1");
        assert_eq!(net.eval(&"110".parse().unwrap()).unwrap().to_string(), "0");
        assert_eq!(net.depth(), 2);
        assert_eq!(net.fanout(0), &[3, 4]);
        assert_eq!(net.kind(3), NodeKind::Interior);
        assert_eq!(net.kind(5), NodeKind::Output);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(
            not_net().eval(&"01".parse().unwrap()),
            Err(BnError::InputLength { expected: 1, found: 2 })
        ));
    }

    #[test]
    fn structural_errors() {
        let f = BooleanFunction::identity;
        let forward = Network::new(
            vec![Node::input(0), Node::function(1, f(), vec![2]), Node::function(2, f(), vec![0])],
            vec![1],
        );
        assert!(matches!(forward, Err(BnError::Cycle { node: 1, input: 2 })));
        let dangling = Network::new(vec![Node::input(0), Node::function(1, f(), vec![7])], vec![1]);
        assert!(matches!(dangling, Err(BnError::DanglingInput { .. })));
        let arity = Network::new(
            vec![Node::input(0), Node::function(1, BooleanFunction::and2(), vec![0])],
            vec![1],
        );
        assert!(matches!(arity, Err(BnError::ArityMismatch { .. })));
        let feeding_out = Network::new(
            vec![Node::input(0), Node::function(1, f(), vec![0]), Node::function(2, f(), vec![1])],
            vec![1, 2],
        );
        assert!(matches!(feeding_out, Err(BnError::OutputHasFanout { node: 1 })));
    }
}
