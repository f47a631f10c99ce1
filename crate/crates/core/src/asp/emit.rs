//! Facts and rules in the standard answer-set input language.

use std::fmt::Write as _;

use crate::model::{GridSpec, Level, Network, Planar, Relation, SingleTile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Check,
    Explain,
    Infer,
}

/// Object ids are 1-based declaration positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectNumbering {
    names: Vec<String>,
}

impl ObjectNumbering {
    pub fn new(net: &Network) -> Self {
        ObjectNumbering {
            names: net.objects.clone(),
        }
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name).map(|i| i + 1)
    }

    pub fn name(&self, id: usize) -> Option<&str> {
        id.checked_sub(1).and_then(|i| self.names.get(i)).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Tile order of the published listings: middle level, then below, then above;
/// rows south to north, columns west to east.
pub fn listing_tile_order() -> Vec<SingleTile> {
    let rows = [
        [Planar::SW, Planar::S, Planar::SE],
        [Planar::W, Planar::O, Planar::E],
        [Planar::NW, Planar::N, Planar::NE],
    ];
    let mut out = Vec::with_capacity(27);
    for level in [Level::M, Level::B, Level::A] {
        for row in rows {
            for planar in row {
                out.push(SingleTile::new(planar, level));
            }
        }
    }
    out
}

fn tiles_in_listing_order(rel: crate::model::BasicRelation) -> impl Iterator<Item = SingleTile> {
    listing_tile_order().into_iter().filter(move |t| rel.contains(*t))
}

pub fn emit_facts(net: &Network) -> String {
    let ids = ObjectNumbering::new(net);
    let id = |s: &str| ids.id(s).expect("validated network");
    let mut out = String::new();
    for (i, name) in net.objects.iter().enumerate() {
        let _ = writeln!(out, "% {} = {}", i + 1, name);
    }
    if !net.objects.is_empty() {
        let _ = writeln!(out, "object(1..{}).", net.objects.len());
    }
    out.push('\n');
    for (i, t) in listing_tile_order().into_iter().enumerate() {
        let _ = write!(out, "alltiles({}).", t.asp_token());
        out.push(if i % 4 == 3 { '\n' } else { ' ' });
    }
    out.push_str("\n\n");
    for c in &net.constraints {
        let (t, r) = (id(&c.target), id(&c.reference));
        match &c.relation {
            Relation::Basic(rel) => {
                for tile in tiles_in_listing_order(*rel) {
                    let _ = write!(out, "relation({t},{r},{}). ", tile.asp_token());
                }
            }
            Relation::Disjunctive(ds) => {
                for (i, rel) in ds.iter().enumerate() {
                    for tile in tiles_in_listing_order(*rel) {
                        let _ = write!(out, "disjrelation({t},{r},{},{}). ", i + 1, tile.asp_token());
                    }
                }
            }
            Relation::Default(rel) => {
                for tile in tiles_in_listing_order(*rel) {
                    let _ = write!(out, "defaultrelation({t},{r},{}). ", tile.asp_token());
                }
            }
        }
        out.pop();
        out.push('\n');
    }
    let mandatory: Vec<_> = net.constraints.iter().filter(|c| c.mandatory).collect();
    if !mandatory.is_empty() {
        out.push('\n');
        for c in mandatory {
            let _ = writeln!(out, "mandatory({},{}).", id(&c.target), id(&c.reference));
        }
    }
    if !net.infer_requests.is_empty() {
        out.push('\n');
        for (t, r) in &net.infer_requests {
            let _ = writeln!(out, "toinfer({},{}).", id(t), id(r));
        }
    }
    if !net.ab_marks.is_empty() {
        out.push('\n');
        for a in &net.ab_marks {
            let _ = writeln!(out, "ab({}).", id(a));
        }
    }
    out
}

const AXES: [(&str, char); 3] = [("x", 'X'), ("y", 'Y'), ("z", 'Z')];

/// Aggregate condition placing `(X,Y,Z)` in `tile` of `V`, via the per-axis
/// class atoms `xcls/3`, `ycls/3`, `zcls/3`.
fn tile_condition(tile: SingleTile) -> String {
    let [cx, cy, cz] = tile.classes();
    format!("xcls(V,X,{cx}), ycls(V,Y,{cy}), zcls(V,Z,{cz})")
}

/// The 27 (C1) and 27 (C2) rule families for one relation predicate.
fn violation_families(out: &mut String, head: &str, rel: &str, exists: &str) {
    for tile in listing_tile_order() {
        let tok = tile.asp_token();
        let count = format!("#count{{ X,Y,Z : occ(U,X,Y,Z), {} }}", tile_condition(tile));
        let _ = writeln!(out, "{head}(U,V) :- {rel}(U,V,{tok}), {exists}(U,V), {count} <= 0.");
        let _ = writeln!(out, "{head}(U,V) :- {exists}(U,V), not {rel}(U,V,{tok}), {count} >= 1.");
    }
}

/// A self-contained program for `net` on `grid`: rules only, facts come from
/// [`emit_facts`].
pub fn emit_program(net: &Network, grid: GridSpec, mode: Mode) -> String {
    let has_disj = net.constraints.iter().any(|c| matches!(c.relation, Relation::Disjunctive(_)));
    let has_default = net.constraints.iter().any(|c| c.relation.is_default());
    let mut out = String::new();
    let _ = writeln!(out, "% grid {}x{}x{}", grid.m, grid.n, grid.p);
    let _ = writeln!(out, "xcoord(1..{}). ycoord(1..{}). zcoord(1..{}).", grid.m, grid.n, grid.p);
    out.push('\n');

    out.push_str("rel(U,V,R) :- relation(U,V,R).\n");
    if has_disj {
        out.push_str("disjpair(U,V) :- disjrelation(U,V,_,_).\n");
        out.push_str("{ chosen(U,V,I) : disjrelation(U,V,I,_) } = 1 :- disjpair(U,V).\n");
        out.push_str("rel(U,V,R) :- chosen(U,V,I), disjrelation(U,V,I,R).\n");
    }
    out.push_str("existrel(U,V) :- rel(U,V,R).\n\n");

    for (name, var) in AXES {
        let coord = format!("{name}coord");
        let _ = writeln!(out, "{{ inf_{name}(U,{var}) : {coord}({var}) }} = 1 :- object(U).");
        let _ = writeln!(out, "{{ sup_{name}(U,{var}) : {coord}({var}) }} = 1 :- object(U).");
        let _ = writeln!(out, ":- inf_{name}(U,{var}1), sup_{name}(U,{var}2), {var}1 > {var}2.");
    }
    out.push_str("{ occ(U,X,Y,Z) : xcoord(X), ycoord(Y), zcoord(Z) } >= 1 :- object(U).\n");
    out.push_str("xocc(U,X) :- occ(U,X,Y,Z).\n");
    out.push_str("yocc(U,Y) :- occ(U,X,Y,Z).\n");
    out.push_str("zocc(U,Z) :- occ(U,X,Y,Z).\n");
    for (name, var) in AXES {
        let _ = writeln!(out, ":- inf_{name}(U,{var}1), {name}occ(U,{var}), {var} < {var}1.");
        let _ = writeln!(out, ":- sup_{name}(U,{var}2), {name}occ(U,{var}), {var} > {var}2.");
        let _ = writeln!(out, ":- inf_{name}(U,{var}1), not {name}occ(U,{var}1).");
        let _ = writeln!(out, ":- sup_{name}(U,{var}2), not {name}occ(U,{var}2).");
    }
    // 0 below the reference's extent, 1 within, 2 above
    for (name, var) in AXES {
        let coord = format!("{name}coord");
        let _ = writeln!(out, "{name}cls(V,{var},0) :- inf_{name}(V,I), {coord}({var}), {var} < I.");
        let _ = writeln!(
            out,
            "{name}cls(V,{var},1) :- inf_{name}(V,I), sup_{name}(V,S), {coord}({var}), I <= {var}, {var} <= S."
        );
        let _ = writeln!(out, "{name}cls(V,{var},2) :- sup_{name}(V,S), {coord}({var}), {var} > S.");
    }
    out.push('\n');

    violation_families(&mut out, "violated", "rel", "existrel");
    out.push('\n');
    match mode {
        Mode::Explain => {
            out.push_str(":- violated(U,V), mandatory(U,V), existrel(U,V).\n");
            out.push_str(":~ violated(U,V), not mandatory(U,V), existrel(U,V). [1@2,U,V]\n");
        }
        Mode::Check | Mode::Infer => out.push_str(":- violated(U,V), existrel(U,V).\n"),
    }

    if has_default {
        out.push('\n');
        out.push_str("existDefRel(U,V) :- defaultrelation(U,V,R).\n");
        out.push_str("drel(U,V) :- not -drel(U,V), defaultrelation(U,V,R).\n");
        violation_families(&mut out, "violatedDef", "defaultrelation", "existDefRel");
        out.push_str("-drel(U,V) :- violatedDef(U,V), existDefRel(U,V).\n");
        out.push_str(":~ -drel(U,V), existDefRel(U,V). [1@1,U,V]\n");
        out.push_str("-drel(U,V) :- ab(V), existDefRel(U,V).\n");
        out.push_str("-drel(U,V) :- ab(U), existDefRel(U,V).\n");
    }

    if net.connected {
        out.push('\n');
        out.push_str("trg(U) :- relation(U,_,_).\n");
        if has_disj {
            out.push_str("trg(U) :- disjrelation(U,_,_,_).\n");
        }
        if has_default {
            out.push_str("trg(U) :- defaultrelation(U,_,_).\n");
        }
        out.push_str("left_side(U,Y,Z) :- trg(U), inf_x(U,X), occ(U,X,Y,Z).\n");
        out.push_str("left_border(U,Y) :- trg(U), inf_x(U,X), occ(U,X,Y,Z).\n");
        out.push_str("ymin(U,M) :- trg(U), M = #min{ Y : left_border(U,Y) }.\n");
        out.push_str("zborder(U,Z) :- left_side(U,M,Z), ymin(U,M).\n");
        out.push_str("zmin(U,M) :- trg(U), M = #min{ Z : zborder(U,Z) }.\n");
        out.push_str("stem(U,X,Y,Z) :- trg(U), inf_x(U,X), ymin(U,Y), zmin(U,Z).\n");
        out.push_str("connset(U,X,Y,Z) :- stem(U,X,Y,Z).\n");
        for (dx, dy, dz) in [("+1", "", ""), ("-1", "", ""), ("", "+1", ""), ("", "-1", ""), ("", "", "+1"), ("", "", "-1")] {
            let _ = writeln!(
                out,
                "connset(U,X{dx},Y{dy},Z{dz}) :- connset(U,X,Y,Z), occ(U,X{dx},Y{dy},Z{dz})."
            );
        }
        out.push_str(":- trg(U), occ(U,X,Y,Z), not connset(U,X,Y,Z).\n");
    }

    if mode == Mode::Infer {
        out.push('\n');
        out.push_str("known(U,V) :- existrel(U,V).\n");
        if has_default {
            out.push_str("known(U,V) :- drel(U,V).\n");
        }
        out.push_str("{ infer(U,V,R) : alltiles(R) } >= 1 :- not known(U,V), toinfer(U,V).\n");
        out.push_str("existInfer(U,V) :- infer(U,V,R).\n");
        violation_families(&mut out, "inferViolated", "infer", "existInfer");
        out.push_str(":- inferViolated(U,V), existInfer(U,V).\n");
    }

    out.push('\n');
    out.push_str("#show occ/4.\n");
    out.push_str("#show violated/2.\n");
    if has_default {
        out.push_str("#show drel/2.\n#show -drel/2.\n");
    }
    if has_disj {
        out.push_str("#show chosen/3.\n");
    }
    if mode == Mode::Infer {
        out.push_str("#show infer/3.\n");
    }
    out
}

/// Problems found by [`check_syntax`], with 1-based line numbers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxIssue {
    pub line: usize,
    pub message: String,
}

/// A shallow well-formedness check: balanced brackets, every statement
/// terminated by `.`, weak constraints followed by `[w@l,...]`, known
/// directives only.
pub fn check_syntax(program: &str) -> Result<(), Vec<SyntaxIssue>> {
    let mut issues = Vec::new();
    let mut stack: Vec<char> = Vec::new();
    let mut stmt = String::new();
    let mut stmt_line = 1;
    let mut awaiting_weight: Option<usize> = None;
    for (ln, raw) in program.lines().enumerate() {
        let line_no = ln + 1;
        let line = match raw.find('%') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let chars: Vec<char> = line.chars().collect();
        for (i, &ch) in chars.iter().enumerate() {
            if stmt.trim().is_empty() {
                stmt_line = line_no;
            }
            stmt.push(ch);
            match ch {
                '(' | '{' | '[' => stack.push(ch),
                ')' | '}' | ']' => {
                    let want = match ch {
                        ')' => '(',
                        '}' => '{',
                        _ => '[',
                    };
                    if stack.pop() != Some(want) {
                        issues.push(SyntaxIssue {
                            line: line_no,
                            message: format!("unbalanced `{ch}`"),
                        });
                        stack.clear();
                    }
                    if ch == ']' && stack.is_empty() && awaiting_weight.is_some() {
                        let body = stmt.trim();
                        if !body.starts_with('[') || !body.contains('@') {
                            issues.push(SyntaxIssue {
                                line: stmt_line,
                                message: "weak constraint weight needs `[w@level,...]`".to_string(),
                            });
                        }
                        awaiting_weight = None;
                        stmt.clear();
                    }
                }
                '.' if stack.is_empty() => {
                    let prev = i.checked_sub(1).map(|j| chars[j]);
                    let next = chars.get(i + 1).copied();
                    if prev == Some('.') || next == Some('.') {
                        continue;
                    }
                    if let Some(at) = awaiting_weight {
                        issues.push(SyntaxIssue {
                            line: at,
                            message: "weak constraint without weight".to_string(),
                        });
                        awaiting_weight = None;
                    }
                    let body = stmt.trim().to_string();
                    if let Some(msg) = check_statement(&body) {
                        issues.push(SyntaxIssue {
                            line: stmt_line,
                            message: msg,
                        });
                    }
                    if body.starts_with(":~") {
                        awaiting_weight = Some(stmt_line);
                    }
                    stmt.clear();
                }
                _ => {}
            }
        }
        stmt.push(' ');
    }
    if !stmt.trim().is_empty() || !stack.is_empty() {
        issues.push(SyntaxIssue {
            line: stmt_line,
            message: "unterminated statement".to_string(),
        });
    }
    if let Some(at) = awaiting_weight {
        issues.push(SyntaxIssue {
            line: at,
            message: "weak constraint without weight".to_string(),
        });
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(issues)
    }
}

fn check_statement(s: &str) -> Option<String> {
    if s.starts_with('#') {
        let ok = ["#show", "#const", "#minimize", "#maximize", "#include"]
            .iter()
            .any(|d| s.starts_with(d));
        return (!ok).then(|| "unknown directive".to_string());
    }
    if s.starts_with('[') {
        return Some("weight outside a weak constraint".to_string());
    }
    if s.matches(":-").count() + s.matches(":~").count() > 1 {
        return Some("more than one rule arrow".to_string());
    }
    if s == "." {
        return Some("empty statement".to_string());
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Constraint;

    #[test]
    fn listing_order_has_every_tile() {
        let order = listing_tile_order();
        assert_eq!(order.len(), 27);
        assert_eq!(order[0].asp_token(), "swm");
        assert_eq!(order[9].asp_token(), "swb");
        assert_eq!(order[26].asp_token(), "nea");
    }

    #[test]
    fn empty_network_facts() {
        let net = Network::new(&["a", "b"]);
        let facts = emit_facts(&net);
        let atoms: Vec<&str> = facts
            .lines()
            .filter(|l| !l.starts_with('%'))
            .flat_map(|l| l.split_whitespace())
            .collect();
        assert_eq!(atoms.len(), 28);
        assert_eq!(atoms[0], "object(1..2).");
        assert_eq!(atoms.iter().filter(|a| a.starts_with("alltiles(")).count(), 27);
    }

    #[test]
    fn plain_program_is_gated() {
        let net = Network::new(&["a", "b"]).with(Constraint::basic("a", "b", "NM".parse().unwrap()));
        let prog = emit_program(&net, GridSpec::cube(3), Mode::Check);
        assert!(check_syntax(&prog).is_ok(), "{:?}", check_syntax(&prog));
        assert!(!prog.contains("chosen"));
        assert!(!prog.contains("drel"));
        assert!(!prog.contains("connset"));
        assert!(!prog.contains(":~"));
        assert_eq!(prog.matches("violated(U,V) :- ").count(), 54);
    }

    #[test]
    fn syntax_checker_rejects_garbage() {
        assert!(check_syntax("a(1).\nb :- a(1\n").is_err());
        assert!(check_syntax(":~ a. [1,1]\n").is_err());
        assert!(check_syntax("a :- b :- c.\n").is_err());
        assert!(check_syntax("a(1..3).\n").is_ok());
    }
}
