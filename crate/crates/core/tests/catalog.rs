//! Exhaustive cubic catalogs: regeneration entry point and integrity checks.

mod support;

use cubic_tsp::format;

/// Writes the graph6 catalog files. Run explicitly:
/// `cargo test -p cubic-tsp --test catalog regenerate -- --ignored`
#[test]
#[ignore = "writes tests/data; run on demand"]
fn regenerate_catalogs() {
    std::fs::create_dir_all(support::data_dir()).unwrap();
    for n in [4usize, 6, 8, 10, 12, 14] {
        let graphs = support::enumerate_connected_cubic(n);
        assert_eq!(graphs.len(), support::expected_count(n), "census mismatch at n = {n}");
        let mut text = String::new();
        for g in &graphs {
            text.push_str(&format::to_graph6(g).unwrap());
            text.push('\n');
        }
        std::fs::write(support::catalog_path(n), text).unwrap();
        println!("n = {n}: {} graphs", graphs.len());
    }
}

/// The shipped files agree with a fresh enumeration at the cheap sizes.
#[test]
fn catalog_files_match_enumeration_up_to_12() {
    for n in [4usize, 6, 8, 10, 12] {
        let enumerated = support::enumerate_connected_cubic(n);
        assert_eq!(enumerated.len(), support::expected_count(n));
        let from_file = support::read_catalog(n);
        assert_eq!(enumerated.len(), from_file.len(), "n = {n}");
        for (a, b) in enumerated.iter().zip(from_file.iter()) {
            assert_eq!(a, b, "n = {n}");
        }
    }
}

#[test]
fn catalog_14_has_the_census_count_and_is_sound() {
    let graphs = support::read_catalog(14);
    assert_eq!(graphs.len(), support::expected_count(14));
    for g in &graphs {
        assert_eq!(g.n(), 14);
        assert!(g.is_cubic());
        assert!(g.is_connected());
        assert!(g.is_simple());
    }
    assert!(support::all_distinct(&graphs));
}

/// Every named family member at desk scale appears in its catalog.
#[test]
fn families_are_covered_by_the_catalogs() {
    use cubic_tsp::generate;
    let family: Vec<cubic_tsp::Graph> = vec![
        generate::petersen(),
        generate::prism(4).unwrap(),
        generate::prism(5).unwrap(),
        generate::prism(6).unwrap(),
        generate::prism(7).unwrap(),
        generate::generalized_petersen(6, 2).unwrap(),
        generate::generalized_petersen(7, 2).unwrap(),
        generate::flower_snark(3).unwrap(),
    ];
    for g in family {
        let catalog = support::read_catalog(g.n());
        let found = catalog.iter().any(|c| {
            // isomorphism via the canonical-string helper
            support::all_distinct(&[c.clone(), g.clone()]) == false
        });
        assert!(found, "family member on {} vertices missing from catalog", g.n());
    }
}
