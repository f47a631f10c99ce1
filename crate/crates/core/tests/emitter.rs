use std::collections::{BTreeMap, BTreeSet};

use ncdc3d::asp::{check_syntax, emit_facts, emit_program, Mode};
use ncdc3d::fixtures::{self, golden};
use ncdc3d::{grid_for, Network};

/// Facts of a listing, one string per atom, comments dropped.
fn atoms(text: &str) -> BTreeSet<String> {
    text.lines()
        .filter(|l| !l.trim_start().starts_with('%'))
        .flat_map(|l| l.split_whitespace())
        .map(str::to_string)
        .collect()
}

fn golden_without_objects(text: &str) -> BTreeSet<String> {
    atoms(text).into_iter().filter(|a| !a.starts_with("object(")).collect()
}

#[test]
fn marine_facts_match_listing() {
    let net = fixtures::by_name("marine").unwrap();
    let ours = atoms(&emit_facts(&net));
    assert_eq!(ours, atoms(golden::MARINE));
    assert!(ours.contains("relation(2,1,swb)."));
    assert!(ours.contains("toinfer(5,1)."));
}

#[test]
fn building_facts_match_listing() {
    let net = fixtures::by_name("building_b1").unwrap();
    let ours = atoms(&emit_facts(&net));
    assert_eq!(ours, atoms(golden::BUILDING));
    assert!(ours.contains("disjrelation(2,1,1,nm)."));
    assert!(ours.contains("mandatory(2,1)."));
}

/// Rewrites every numeric object id through `map`. Tile and disjunct
/// positions are left alone.
fn renumber(atom: &str, map: &BTreeMap<usize, usize>) -> String {
    let open = atom.find('(').unwrap();
    let name = &atom[..open];
    let args: Vec<&str> = atom[open + 1..atom.len() - 2].split(',').collect();
    let ids = match name {
        "relation" | "defaultrelation" | "disjrelation" | "mandatory" | "toinfer" => 2,
        _ => 0,
    };
    let args: Vec<String> = args
        .iter()
        .enumerate()
        .map(|(i, a)| if i < ids { map[&a.parse::<usize>().unwrap()].to_string() } else { a.to_string() })
        .collect();
    format!("{name}({}).", args.join(","))
}

/// Published ids of the crime-scene objects.
fn published_id(name: &str) -> usize {
    match name {
        "Body" => 1,
        "Table" => 2,
        "Teapoy" => 4,
        "Drawer" => 5,
        "Sofa" => 6,
        "Suitcase" => 7,
        "Hanger" => 8,
        "Coat" => 9,
        "Muffler" => 11,
        "PhoneBook" => 12,
        "Knife" => 13,
        "Drug" => 14,
        "Rope" => 15,
        "Balloon" => 16,
        "Whistle" => 17,
        "Bed" => 18,
        "Phone" => 19,
        "Umbrella" => 20,
        other => panic!("no published id for {other}"),
    }
}

fn renumbered(net: &Network) -> BTreeSet<String> {
    let map: BTreeMap<usize, usize> = net
        .objects
        .iter()
        .enumerate()
        .map(|(i, n)| (i + 1, published_id(n)))
        .collect();
    atoms(&emit_facts(net))
        .into_iter()
        .filter(|a| !a.starts_with("object("))
        .map(|a| renumber(&a, &map))
        .collect()
}

#[test]
fn forensics_facts_cover_listing() {
    let d1 = fixtures::by_name("forensics_d1").unwrap();
    let d2 = fixtures::by_name("forensics_d2").unwrap();
    let union: BTreeSet<String> = renumbered(&d1).union(&renumbered(&d2)).cloned().collect();
    assert_eq!(union, golden_without_objects(golden::FORENSICS));
}

#[test]
fn forensics_atom_counts() {
    let count = |text: &str, pred: &str| atoms(text).iter().filter(|a| a.starts_with(pred)).count();
    let d1 = emit_facts(&fixtures::by_name("forensics_d1").unwrap());
    let d2 = emit_facts(&fixtures::by_name("forensics_d2").unwrap());
    assert_eq!(count(&d1, "alltiles("), 27);
    // the eight camera atoms appear in both
    assert_eq!(count(&d1, "relation(") + count(&d2, "relation(") - 8, count(golden::FORENSICS, "relation("));
    assert_eq!(count(&d1, "disjrelation("), 2);
    assert_eq!(count(&d1, "defaultrelation("), 3);
    assert_eq!(count(&d2, "defaultrelation("), 3);
    assert_eq!(count(golden::FORENSICS, "defaultrelation("), 3);
}

#[test]
fn empty_network_facts() {
    let facts = atoms(&emit_facts(&Network::new(&["a", "b"])));
    assert_eq!(facts.len(), 28);
    assert!(facts.contains("object(1..2)."));
}

#[test]
fn explain_program_guards_mandatory_constraints() {
    let net = fixtures::by_name("building_b1").unwrap();
    let prog = emit_program(&net, grid_for(&net), Mode::Explain);
    assert!(prog.contains(":- violated(U,V), mandatory(U,V), existrel(U,V)."));
    assert!(prog.contains(":~ violated(U,V), not mandatory(U,V), existrel(U,V). [1@2,U,V]"));
    assert!(prog.contains("[1@1,U,V]"));
    assert!(!prog.contains(":- violated(U,V), existrel(U,V)."));
}

#[test]
fn every_program_is_well_formed() {
    for (name, text) in fixtures::ALL {
        for connected in [false, true] {
            let mut net = fixtures::load(text);
            net.connected = connected;
            for mode in [Mode::Check, Mode::Explain, Mode::Infer] {
                let prog = format!("{}{}", emit_facts(&net), emit_program(&net, grid_for(&net), mode));
                if let Err(issues) = check_syntax(&prog) {
                    panic!("{name} {mode:?} connected={connected}: {issues:?}");
                }
            }
        }
    }
}
