//! Reads solver output back into a [`Solution`].

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::emit::ObjectNumbering;
use crate::model::{Cell, Cost, GridSpec, Network, Pair, Solution, SpatialObject};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("malformed atom `{0}`")]
    MalformedAtom(String),
    #[error("no occ atoms for object {0}")]
    MissingObject(usize),
    #[error("cell {cell:?} of object {object} is outside the grid")]
    OutOfGrid { object: usize, cell: Cell },
}

/// Splits `name(a,b,...)` into its name and integer-or-symbol arguments.
fn split_atom(atom: &str) -> Option<(&str, Vec<&str>)> {
    let open = atom.find('(')?;
    if !atom.ends_with(')') {
        return None;
    }
    let name = &atom[..open];
    let args = atom[open + 1..atom.len() - 1].split(',').map(str::trim).collect();
    Some((name, args))
}

fn ints(atom: &str, args: &[&str], n: usize) -> Result<Vec<usize>, DecodeError> {
    if args.len() != n {
        return Err(DecodeError::MalformedAtom(atom.to_string()));
    }
    args.iter()
        .map(|a| a.parse::<usize>().map_err(|_| DecodeError::MalformedAtom(atom.to_string())))
        .collect()
}

/// The atoms of the last answer printed. Accepts raw atom lists as well as
/// the usual `Answer: k` blocks.
fn last_answer(text: &str) -> Vec<&str> {
    let mut current: Vec<&str> = Vec::new();
    let mut in_answer = false;
    let mut saw_header = false;
    let mut answers: Vec<Vec<&str>> = Vec::new();
    for line in text.lines() {
        let t = line.trim();
        if t.starts_with("Answer:") {
            if saw_header && !current.is_empty() {
                answers.push(std::mem::take(&mut current));
            }
            saw_header = true;
            in_answer = true;
            current.clear();
            continue;
        }
        if saw_header && !in_answer {
            continue;
        }
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        if t.starts_with("Optimization:")
            || t.starts_with("SATISFIABLE")
            || t.starts_with("UNSATISFIABLE")
            || t.starts_with("OPTIMUM")
            || t.starts_with("clingo")
            || t.starts_with("Reading")
            || t.starts_with("Solving")
            || t.starts_with("Models")
        {
            if saw_header {
                in_answer = false;
            }
            continue;
        }
        current.extend(t.split_whitespace());
    }
    if !current.is_empty() || answers.is_empty() {
        answers.push(current);
    }
    answers.pop().unwrap_or_default()
}

/// Decodes `occ`, `violated`, `drel` and `-drel` atoms; other atoms are ignored.
pub fn decode_answer_set(text: &str, net: &Network, grid: GridSpec) -> Result<Solution, DecodeError> {
    let ids = ObjectNumbering::new(net);
    let n = net.objects.len();
    let mut cells: BTreeMap<usize, BTreeSet<Cell>> = BTreeMap::new();
    let mut violated = BTreeSet::new();
    let mut applied: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut against: BTreeSet<(usize, usize)> = BTreeSet::new();
    let name_pair = |a: usize, b: usize, atom: &str| -> Result<Pair, DecodeError> {
        match (ids.name(a), ids.name(b)) {
            (Some(x), Some(y)) => Ok((x.to_string(), y.to_string())),
            _ => Err(DecodeError::MalformedAtom(atom.to_string())),
        }
    };
    for raw in last_answer(text) {
        let atom = raw.trim_end_matches('.');
        let Some((name, args)) = split_atom(atom) else {
            if atom.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                continue;
            }
            return Err(DecodeError::MalformedAtom(atom.to_string()));
        };
        match name {
            "occ" => {
                let v = ints(atom, &args, 4)?;
                let (u, cell) = (v[0], [v[1] as u32, v[2] as u32, v[3] as u32]);
                if u == 0 || u > n {
                    return Err(DecodeError::MalformedAtom(atom.to_string()));
                }
                if !grid.contains(cell) {
                    return Err(DecodeError::OutOfGrid { object: u, cell });
                }
                cells.entry(u).or_default().insert(cell);
            }
            "violated" => {
                let v = ints(atom, &args, 2)?;
                violated.insert(name_pair(v[0], v[1], atom)?);
            }
            "drel" => {
                let v = ints(atom, &args, 2)?;
                applied.insert((v[0], v[1]));
            }
            "-drel" => {
                let v = ints(atom, &args, 2)?;
                against.insert((v[0], v[1]));
            }
            _ => {}
        }
    }
    let mut assignment = BTreeMap::new();
    for (i, name) in net.objects.iter().enumerate() {
        let set = cells.remove(&(i + 1)).ok_or(DecodeError::MissingObject(i + 1))?;
        assignment.insert(name.clone(), SpatialObject::new(set).expect("non-empty"));
    }
    let mut dropped = BTreeSet::new();
    let mut ab_dropped = BTreeSet::new();
    for c in net.constraints.iter().filter(|c| c.relation.is_default()) {
        let key = (ids.id(&c.target).unwrap_or(0), ids.id(&c.reference).unwrap_or(0));
        let pair = c.pair();
        let ab = net.ab_marks.contains(&c.target) || net.ab_marks.contains(&c.reference);
        if ab {
            ab_dropped.insert(pair.clone());
            dropped.insert(pair);
        } else if against.contains(&key) || !applied.contains(&key) {
            dropped.insert(pair);
        }
    }
    // only non-default pairs can be violated
    violated.retain(|p: &Pair| net.hard_constraint(&p.0, &p.1).is_some());
    Ok(Solution {
        grid,
        assignment,
        cost: Cost::new(violated.len(), dropped.len() - ab_dropped.len()),
        dropped_defaults: dropped,
        ab_dropped,
        violated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_singletons() {
        let net = Network::new(&["a", "b"]);
        let sol = decode_answer_set("occ(1,1,1,1). occ(2,2,2,2).", &net, GridSpec::cube(3)).unwrap();
        assert_eq!(sol.assignment["a"].cells().iter().next(), Some(&[1, 1, 1]));
        assert_eq!(sol.assignment["b"].len(), 1);
    }

    #[test]
    fn missing_object() {
        let net = Network::new(&["a", "b"]);
        assert_eq!(
            decode_answer_set("occ(1,1,1,1).", &net, GridSpec::cube(3)),
            Err(DecodeError::MissingObject(2))
        );
    }

    #[test]
    fn malformed_and_out_of_grid() {
        let net = Network::new(&["a"]);
        assert!(matches!(
            decode_answer_set("occ(1,1,1).", &net, GridSpec::cube(3)),
            Err(DecodeError::MalformedAtom(_))
        ));
        assert!(matches!(
            decode_answer_set("occ(1,1,x,1).", &net, GridSpec::cube(3)),
            Err(DecodeError::MalformedAtom(_))
        ));
        assert_eq!(
            decode_answer_set("occ(1,4,1,1).", &net, GridSpec::cube(3)),
            Err(DecodeError::OutOfGrid {
                object: 1,
                cell: [4, 1, 1]
            })
        );
    }

    #[test]
    fn last_answer_block_wins() {
        let text = "clingo version 5\nReading from stdin\nSolving...\nAnswer: 1\nocc(1,1,1,1)\nOptimization: 1\nAnswer: 2\nocc(1,2,2,2)\nOptimization: 0\nOPTIMUM FOUND\n";
        let net = Network::new(&["a"]);
        let sol = decode_answer_set(text, &net, GridSpec::cube(3)).unwrap();
        assert!(sol.assignment["a"].contains([2, 2, 2]));
    }
}
