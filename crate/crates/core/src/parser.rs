//! The `.ncdc` network format.
//!
//! ```text
//! # marine survey
//! objects SedRock Marsh Volcano Kelp Fungi
//! rel Marsh SedRock SWB:SEB
//! disj Panel Entrance NM | NB
//! default Heating Entrance SWB
//! mandatory Panel Entrance
//! infer Fungi SedRock
//! ab Entrance
//! connected
//! grid 9 9 9
//! ```

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::model::{BasicRelation, Constraint, GridSpec, Network, Relation, SingleTile, ValidationError};

/// 1-based position in the source text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("expected {expected}, found {found}")]
    Syntax { expected: String, found: String },
    #[error("unknown tile token `{0}`")]
    UnknownTile(String),
    #[error("grid dimension must be a positive integer, found `{0}`")]
    BadGridDimension(String),
    #[error("`mandatory` names a pair without a basic or disjunctive constraint")]
    MandatoryWithoutConstraint,
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{span}: {kind}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn new(line: usize, column: usize, kind: ParseErrorKind) -> Self {
        ParseError {
            span: SourceSpan { line, column },
            kind,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Tok<'a> {
    Word(&'a str),
    Bar,
}

/// Splits one line into words and `|` separators, with 1-based columns.
fn lex(line: &str) -> Vec<(usize, Tok<'_>)> {
    let line = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() || ch == '|' {
            if let Some(s) = start.take() {
                out.push((s + 1, Tok::Word(&line[s..i])));
            }
            if ch == '|' {
                out.push((i + 1, Tok::Bar));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, Tok::Word(&line[s..])));
    }
    out
}

fn is_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct LineCursor<'a> {
    line: usize,
    toks: Vec<(usize, Tok<'a>)>,
    pos: usize,
    end_col: usize,
}

impl<'a> LineCursor<'a> {
    fn peek(&self) -> Option<(usize, Tok<'a>)> {
        self.toks.get(self.pos).copied()
    }

    fn found(&self) -> String {
        match self.peek() {
            Some((_, Tok::Word(w))) => format!("`{w}`"),
            Some((_, Tok::Bar)) => "`|`".to_string(),
            None => "end of line".to_string(),
        }
    }

    fn col(&self) -> usize {
        self.peek().map_or(self.end_col, |(c, _)| c)
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError::new(
            self.line,
            self.col(),
            ParseErrorKind::Syntax {
                expected: expected.to_string(),
                found: self.found(),
            },
        )
    }

    fn word(&mut self, expected: &str) -> Result<(usize, &'a str), ParseError> {
        match self.peek() {
            Some((c, Tok::Word(w))) => {
                self.pos += 1;
                Ok((c, w))
            }
            _ => Err(self.error(expected)),
        }
    }

    fn name(&mut self) -> Result<(usize, &'a str), ParseError> {
        match self.peek() {
            Some((c, Tok::Word(w))) if is_name(w) => {
                self.pos += 1;
                Ok((c, w))
            }
            _ => Err(self.error("object name")),
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.pos == self.toks.len() {
            Ok(())
        } else {
            Err(self.error("end of line"))
        }
    }
}

fn parse_tiles(line: usize, col: usize, word: &str) -> Result<BasicRelation, ParseError> {
    let mut bits = 0u32;
    let mut offset = 0;
    for piece in word.split(':') {
        let tile: SingleTile = piece
            .parse()
            .map_err(|_| ParseError::new(line, col + offset, ParseErrorKind::UnknownTile(piece.to_string())))?;
        bits |= 1 << tile.index();
        offset += piece.len() + 1;
    }
    Ok(BasicRelation::from_bits(bits).expect("at least one tile parsed"))
}

#[derive(Default)]
struct Builder {
    net: Network,
    known: HashSet<String>,
    hard: HashMap<(String, String), usize>,
    defaults: HashSet<(String, String)>,
    infer_seen: HashSet<(String, String)>,
}

impl Builder {
    fn touch(&mut self, name: &str) {
        if self.known.insert(name.to_string()) {
            self.net.objects.push(name.to_string());
        }
    }
}

/// Parses a network; the result always passes validation.
pub fn parse_network(text: &str) -> Result<Network, ParseError> {
    let mut b = Builder::default();
    let mut pending_mandatory: Vec<(SourceSpan, (String, String))> = Vec::new();

    for (idx, raw) in text.split('\n').enumerate() {
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let toks = lex(raw);
        if toks.is_empty() {
            continue;
        }
        let line = idx + 1;
        let mut cur = LineCursor {
            line,
            toks,
            pos: 0,
            end_col: raw.len() + 1,
        };
        let (kw_col, keyword) = cur.word("a statement keyword")?;
        match keyword {
            "objects" => {
                cur.name()?;
                cur.pos -= 1;
                while cur.peek().is_some() {
                    let (c, name) = cur.name()?;
                    if b.known.contains(name) {
                        return Err(ParseError::new(
                            line,
                            c,
                            ValidationError::DuplicateObject(name.to_string()).into(),
                        ));
                    }
                    b.touch(name);
                }
            }
            "rel" | "default" | "disj" => {
                let (tc, target) = cur.name()?;
                let (_, reference) = cur.name()?;
                let mut rels = Vec::new();
                let (c, w) = cur.word("tile list")?;
                rels.push((c, parse_tiles(line, c, w)?));
                if keyword == "disj" {
                    while cur.peek().is_some() {
                        match cur.peek() {
                            Some((_, Tok::Bar)) => cur.pos += 1,
                            _ => return Err(cur.error("`|`")),
                        }
                        let (c, w) = cur.word("tile list")?;
                        rels.push((c, parse_tiles(line, c, w)?));
                    }
                    if rels.len() < 2 {
                        return Err(cur.error("`|` and a second disjunct"));
                    }
                }
                cur.finish()?;
                let pair = (target.to_string(), reference.to_string());
                if target == reference {
                    return Err(ParseError::new(
                        line,
                        tc,
                        ValidationError::SelfConstraint(target.to_string()).into(),
                    ));
                }
                let mut seen = HashSet::new();
                for &(c, r) in &rels {
                    if !seen.insert(r) {
                        return Err(ParseError::new(
                            line,
                            c,
                            ValidationError::DuplicateDisjunct(pair.0.clone(), pair.1.clone()).into(),
                        ));
                    }
                }
                let duplicate = if keyword == "default" {
                    !b.defaults.insert(pair.clone())
                } else {
                    b.hard.contains_key(&pair)
                };
                if duplicate {
                    return Err(ParseError::new(
                        line,
                        kw_col,
                        ValidationError::DuplicateConstraint(pair.0, pair.1).into(),
                    ));
                }
                b.touch(target);
                b.touch(reference);
                let relation = match keyword {
                    "rel" => Relation::Basic(rels[0].1),
                    "default" => Relation::Default(rels[0].1),
                    _ => Relation::Disjunctive(rels.into_iter().map(|(_, r)| r).collect()),
                };
                if !relation.is_default() {
                    b.hard.insert(pair.clone(), b.net.constraints.len());
                }
                b.net.constraints.push(Constraint {
                    target: pair.0,
                    reference: pair.1,
                    relation,
                    mandatory: false,
                });
            }
            "mandatory" | "infer" => {
                let (_, target) = cur.name()?;
                let (_, reference) = cur.name()?;
                cur.finish()?;
                let pair = (target.to_string(), reference.to_string());
                if target == reference {
                    return Err(ParseError::new(
                        line,
                        kw_col,
                        ValidationError::SelfConstraint(target.to_string()).into(),
                    ));
                }
                b.touch(target);
                b.touch(reference);
                if keyword == "mandatory" {
                    pending_mandatory.push((SourceSpan { line, column: kw_col }, pair));
                } else if b.infer_seen.insert(pair.clone()) {
                    b.net.infer_requests.push(pair);
                }
            }
            "ab" => {
                let (_, name) = cur.name()?;
                cur.finish()?;
                b.touch(name);
                b.net.ab_marks.insert(name.to_string());
            }
            "connected" => {
                cur.finish()?;
                b.net.connected = true;
            }
            "grid" => {
                let mut dims = [0u32; 3];
                for d in &mut dims {
                    let (c, w) = cur.word("grid dimension")?;
                    *d = match w.parse::<u32>() {
                        Ok(v) if v > 0 => v,
                        _ => {
                            return Err(ParseError::new(
                                line,
                                c,
                                ParseErrorKind::BadGridDimension(w.to_string()),
                            ))
                        }
                    };
                }
                cur.finish()?;
                b.net.grid = Some(GridSpec::new(dims[0], dims[1], dims[2]));
            }
            _ => {
                return Err(ParseError::new(
                    line,
                    kw_col,
                    ParseErrorKind::Syntax {
                        expected: "one of objects, rel, disj, default, mandatory, infer, ab, connected, grid"
                            .to_string(),
                        found: format!("`{keyword}`"),
                    },
                ))
            }
        }
    }

    for (span, pair) in pending_mandatory {
        match b.hard.get(&pair) {
            Some(&i) => b.net.constraints[i].mandatory = true,
            None => {
                return Err(ParseError {
                    span,
                    kind: ParseErrorKind::MandatoryWithoutConstraint,
                })
            }
        }
    }

    if let Err(report) = b.net.validate() {
        let first = report.errors.into_iter().next().expect("non-empty report");
        return Err(ParseError::new(1, 1, first.into()));
    }
    Ok(b.net)
}

fn write_tiles(out: &mut String, rel: BasicRelation) {
    let _ = write!(out, "{rel}");
}

/// Canonical text; `parse_network` of the result gives back `net`.
pub fn serialize_network(net: &Network) -> String {
    let mut out = String::new();
    if !net.objects.is_empty() {
        out.push_str("objects");
        for o in &net.objects {
            out.push(' ');
            out.push_str(o);
        }
        out.push('\n');
    }
    for c in &net.constraints {
        let kw = match c.relation {
            Relation::Basic(_) => "rel",
            Relation::Disjunctive(_) => "disj",
            Relation::Default(_) => "default",
        };
        let _ = write!(out, "{kw} {} {} ", c.target, c.reference);
        for (i, d) in c.relation.disjuncts().iter().enumerate() {
            if i > 0 {
                out.push_str(" | ");
            }
            write_tiles(&mut out, *d);
        }
        out.push('\n');
        if c.mandatory {
            let _ = writeln!(out, "mandatory {} {}", c.target, c.reference);
        }
    }
    let ab: &BTreeSet<String> = &net.ab_marks;
    for a in ab {
        let _ = writeln!(out, "ab {a}");
    }
    for (t, r) in &net.infer_requests {
        let _ = writeln!(out, "infer {t} {r}");
    }
    if net.connected {
        out.push_str("connected\n");
    }
    if let Some(g) = net.grid {
        let _ = writeln!(out, "grid {} {} {}", g.m, g.n, g.p);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(s: &str) -> BasicRelation {
        s.parse().unwrap()
    }

    #[test]
    fn basic_line() {
        let net = parse_network("rel Marsh SedRock SWB:SEB").unwrap();
        assert_eq!(net.objects, vec!["Marsh", "SedRock"]);
        assert_eq!(net.constraints, vec![Constraint::basic("Marsh", "SedRock", rel("SWB:SEB"))]);
    }

    #[test]
    fn disjunctive_line() {
        let net = parse_network("disj Panel Entrance NM | NB").unwrap();
        assert_eq!(
            net.constraints[0].relation,
            Relation::Disjunctive(vec![rel("NM"), rel("NB")])
        );
        let tight = parse_network("disj Panel Entrance NM|NB").unwrap();
        assert_eq!(tight, net);
    }

    #[test]
    fn unknown_tile_has_span() {
        let err = parse_network("rel A B XYZ").unwrap_err();
        assert_eq!(err.span, SourceSpan { line: 1, column: 9 });
        assert_eq!(err.kind, ParseErrorKind::UnknownTile("XYZ".into()));
        let err = parse_network("objects A B\nrel A B NM:QQ").unwrap_err();
        assert_eq!(err.span, SourceSpan { line: 2, column: 12 });
    }

    #[test]
    fn grid_errors() {
        let err = parse_network("grid 3 0 3").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::BadGridDimension("0".into()));
        assert_eq!(err.span.column, 8);
        assert!(parse_network("grid 3 -1 3").is_err());
        assert!(parse_network("grid 3 3").is_err());
        assert_eq!(parse_network("grid 3 4 5").unwrap().grid, Some(GridSpec::new(3, 4, 5)));
    }

    #[test]
    fn comments_crlf_and_case() {
        let net = parse_network("# header\r\nobjects a b # trailing\r\nrel a b nwm:Oa\r\n").unwrap();
        assert_eq!(net.constraints[0].relation, Relation::Basic(rel("NWM:OA")));
    }

    #[test]
    fn mandatory_marks_constraint() {
        let net = parse_network("mandatory a b\ndisj a b NM | NB\n").unwrap();
        assert!(net.constraints[0].mandatory);
        let err = parse_network("default a b NM\nmandatory a b\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MandatoryWithoutConstraint);
        assert_eq!(err.span.line, 2);
    }

    #[test]
    fn validation_errors_are_located() {
        let err = parse_network("rel a a NM").unwrap_err();
        assert_eq!(err.kind, ValidationError::SelfConstraint("a".into()).into());
        let err = parse_network("rel a b NM\nrel a b SM").unwrap_err();
        assert_eq!(err.span.line, 2);
        let err = parse_network("disj a b NM | nm").unwrap_err();
        assert_eq!(err.span.column, 15);
        assert!(parse_network("objects a a").is_err());
        assert!(parse_network("disj a b NM").is_err());
    }

    #[test]
    fn syntax_errors() {
        for bad in ["frobnicate a", "rel a", "rel a b", "rel 1a b NM", "connected now", "objects", "infer a"] {
            let err = parse_network(bad).unwrap_err();
            assert!(err.span.column >= 1 && err.span.column <= bad.len() + 1, "{bad}");
        }
    }

    #[test]
    fn serialize_examples() {
        let net = Network::new(&["a", "b"]);
        assert_eq!(serialize_network(&net), "objects a b\n");
        let text = "objects Panel Entrance\ndisj Panel Entrance NM | NB\nmandatory Panel Entrance\ndefault Entrance Panel SWB:SEB\nab Entrance\ninfer Entrance Panel\nconnected\ngrid 3 3 3\n";
        let net = parse_network(text).unwrap();
        assert_eq!(serialize_network(&net), text);
    }
}
