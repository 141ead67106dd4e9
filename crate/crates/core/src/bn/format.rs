//! The line-based `bn v1` network file format.
//!
//! ```text
//! bn v1
//! nodes <n> in <N> out <M>
//! node <id> in
//! node <id> fn <hex-truth-table> args <id> <id> ...
//! out <id> <id> ...
//! ```
//!
//! Blank lines and `#` comments are ignored. Node ids are 0-based and must
//! already be a topological order; every argument id must be smaller than
//! the id of the node using it.

use std::fmt::Write as _;

use super::{BnError, BooleanFunction, Network, Node};

const MAGIC: &str = "bn v1";

/// Renders `net` in `bn v1` form. Nodes are written in id order.
pub fn serialize_network(net: &Network) -> String {
    let mut out = String::new();
    writeln!(out, "{MAGIC}").unwrap();
    writeln!(
        out,
        "nodes {} in {} out {}",
        net.len(),
        net.n_inputs(),
        net.n_outputs()
    )
    .unwrap();
    for node in net.nodes() {
        match &node.function {
            None => writeln!(out, "node {} in", node.id).unwrap(),
            Some(f) => {
                write!(out, "node {} fn {} args", node.id, f.to_hex()).unwrap();
                for a in &node.inputs {
                    write!(out, " {a}").unwrap();
                }
                out.push('\n');
            }
        }
    }
    out.push_str("out");
    for o in net.out_nodes() {
        write!(out, " {o}").unwrap();
    }
    out.push('\n');
    out
}

/// Parses and validates a `bn v1` network.
pub fn parse_network(text: &str) -> Result<Network, BnError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (line, magic) = lines.next().ok_or(BnError::Syntax {
        line: 0,
        message: "empty file".into(),
    })?;
    if magic != MAGIC {
        return Err(syntax(line, format!("expected `{MAGIC}` header, found `{magic}`")));
    }

    let (line, header) = lines
        .next()
        .ok_or_else(|| syntax(line, "missing `nodes` line".into()))?;
    let (n, n_in, n_out) = parse_header(line, header)?;

    let mut slots: Vec<Option<Node>> = vec![None; n];
    let mut outs: Option<Vec<usize>> = None;
    let mut last_line = line;
    for (line, text) in lines {
        last_line = line;
        let mut tokens = text.split_whitespace();
        match tokens.next() {
            Some("node") => {
                let node = parse_node(line, tokens).map_err(|e| e.at(line))?;
                if node.id >= n {
                    return Err(BnError::NodeOutOfRange { node: node.id, n }.at(line));
                }
                if slots[node.id].is_some() {
                    return Err(BnError::DuplicateNode { node: node.id }.at(line));
                }
                let id = node.id;
                slots[id] = Some(node);
            }
            Some("out") => {
                if outs.is_some() {
                    return Err(syntax(line, "more than one `out` line".into()));
                }
                outs = Some(
                    tokens
                        .map(|t| parse_usize(line, t))
                        .collect::<Result<Vec<_>, _>>()?,
                );
            }
            Some(other) => return Err(syntax(line, format!("unknown record `{other}`"))),
            None => unreachable!("blank lines are filtered"),
        }
    }

    let nodes = slots
        .into_iter()
        .enumerate()
        .map(|(id, slot)| slot.ok_or(BnError::MissingNode { node: id }))
        .collect::<Result<Vec<_>, _>>()?;
    let outs = outs.ok_or_else(|| syntax(last_line, "missing `out` line".into()))?;
    let net = Network::new(nodes, outs)?;
    if net.n_inputs() != n_in || net.n_outputs() != n_out {
        return Err(BnError::HeaderMismatch {
            declared_in: n_in,
            declared_out: n_out,
            found_in: net.n_inputs(),
            found_out: net.n_outputs(),
        });
    }
    Ok(net)
}

fn parse_header(line: usize, text: &str) -> Result<(usize, usize, usize), BnError> {
    let t: Vec<&str> = text.split_whitespace().collect();
    match t.as_slice() {
        ["nodes", n, "in", i, "out", o] => Ok((
            parse_usize(line, n)?,
            parse_usize(line, i)?,
            parse_usize(line, o)?,
        )),
        _ => Err(syntax(line, format!("malformed header `{text}`"))),
    }
}

fn parse_node<'a>(line: usize, mut tokens: impl Iterator<Item = &'a str>) -> Result<Node, BnError> {
    let id = parse_usize(line, tokens.next().ok_or_else(|| syntax(line, "missing node id".into()))?)?;
    match tokens.next() {
        Some("in") => match tokens.next() {
            None => Ok(Node::input(id)),
            Some(extra) => Err(syntax(line, format!("unexpected `{extra}` after `in`"))),
        },
        Some("fn") => {
            let hex = tokens
                .next()
                .ok_or_else(|| syntax(line, "missing truth table".into()))?;
            if tokens.next() != Some("args") {
                return Err(syntax(line, "expected `args`".into()));
            }
            let args = tokens
                .map(|t| parse_usize(line, t))
                .collect::<Result<Vec<_>, _>>()?;
            if args.is_empty() {
                return Err(syntax(line, "function node without arguments".into()));
            }
            let function = BooleanFunction::from_hex(args.len(), hex)?;
            Ok(Node::function(id, function, args))
        }
        _ => Err(syntax(line, "expected `in` or `fn`".into())),
    }
}

fn parse_usize(line: usize, token: &str) -> Result<usize, BnError> {
    token
        .parse()
        .map_err(|_| syntax(line, format!("expected a non-negative integer, found `{token}`")))
}

fn syntax(line: usize, message: String) -> BnError {
    BnError::Syntax { line, message }
}

#[cfg(test)]
mod tests {
    use super::*;

    const AND_NET: &str = "bn v1\nnodes 3 in 2 out 1\nnode 0 in\nnode 1 in\nnode 2 fn 8 args 0 1\nout 2\n";

    #[test]
    fn parses_and_serializes() {
        let net = parse_network(AND_NET).unwrap();
        assert_eq!(net.n_inputs(), 2);
        assert_eq!(net.node(2).function, Some(BooleanFunction::and2()));
        assert_eq!(serialize_network(&net), AND_NET);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# an AND gate\nbn v1\n\nnodes 3 in 2 out 1\nnode 1 in\nnode 0 in # first\nnode 2 fn 8 args 0 1\nout 2";
        assert_eq!(parse_network(text).unwrap(), parse_network(AND_NET).unwrap());
    }

    #[test]
    fn forward_reference_is_a_cycle() {
        let text = "bn v1\nnodes 3 in 1 out 1\nnode 0 in\nnode 1 fn 2 args 2\nnode 2 fn 2 args 0\nout 1\n";
        assert!(matches!(parse_network(text).unwrap_err(), BnError::Cycle { node: 1, input: 2 }));
    }

    #[test]
    fn table_length_error() {
        let text = AND_NET.replace("fn 8 args", "fn 008 args");
        assert!(matches!(
            parse_network(&text).unwrap_err().root(),
            BnError::TableLength { arity: 2, .. }
        ));
    }

    #[test]
    fn distinct_diagnostics() {
        let dangling = AND_NET.replace("args 0 1", "args 0 9");
        assert!(matches!(parse_network(&dangling).unwrap_err(), BnError::DanglingInput { .. }));
        let duplicate = AND_NET.replace("node 1 in", "node 0 in");
        assert!(matches!(
            parse_network(&duplicate).unwrap_err().root(),
            BnError::DuplicateNode { node: 0 }
        ));
        let arity = AND_NET.replace("args 0 1", "args 0");
        assert!(matches!(
            parse_network(&arity).unwrap_err().root(),
            BnError::TableLength { arity: 1, .. }
        ));
        let header = AND_NET.replace("in 2 out", "in 3 out");
        assert!(matches!(parse_network(&header).unwrap_err(), BnError::HeaderMismatch { .. }));
        assert!(matches!(parse_network("bn v2\n").unwrap_err(), BnError::Syntax { line: 1, .. }));
        let missing = AND_NET.replace("node 1 in\n", "");
        assert!(matches!(parse_network(&missing).unwrap_err(), BnError::MissingNode { node: 1 }));
    }
}
