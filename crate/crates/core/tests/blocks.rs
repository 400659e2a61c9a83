mod common;

use httpdsl::binder::collect_input_variables;
use httpdsl::blocks::*;
use httpdsl::parser::parse_document;
use proptest::prelude::*;

#[test]
fn weather_palette() {
    let palette = build_palette(&[common::weather()], "Weather").unwrap();
    assert_eq!(palette.len(), 2);
    let b = palette.block("WeatherLocation").unwrap();
    assert_eq!(b.label, "WeatherLocation");
    assert_eq!(b.port_names(), ["apiKeyParam", "city"]);
    assert!(b.input_ports.iter().all(|p| p.port_type == PortType::Text));
    let branches: Vec<_> = b
        .branches
        .iter()
        .map(|br| (br.name, br.output_name.as_str(), br.output_type))
        .collect();
    assert_eq!(
        branches,
        [
            (BranchName::Success, "response", OutputType::Text),
            (BranchName::Failure, "response", OutputType::Text),
        ]
    );
    assert_eq!(palette.block("CurrentConditions").unwrap().port_names(), ["conditionsPath", "apiKeyParam"]);
}

#[test]
fn full_response_messages_output_full() {
    let doc = common::parse(&common::sample("customized.http"));
    let b = derive_block(&doc.messages[0]);
    assert!(b.branches.iter().all(|br| br.output_type == OutputType::Full));
}

#[test]
fn prelude_manifest_matches_golden() {
    let golden = include_str!("golden/rest.palette");
    let prelude = rest_prelude();
    assert_eq!(export_palette(&prelude), golden);
    assert_eq!(parse_manifest(golden).unwrap(), prelude);
}

#[test]
fn manifest_round_trip_and_errors() {
    let palette = build_palette(&[common::weather()], "Weather").unwrap();
    assert_eq!(parse_manifest(&export_palette(&palette)).unwrap(), palette);
    assert_eq!(parse_manifest("palette X\n").unwrap_err().line, 1);
    let truncated = format!("{MANIFEST_HEADER}\npalette X\nblock A\n  label A\n");
    assert!(parse_manifest(&truncated).is_err());
}

#[test]
fn duplicate_names_across_files_are_all_reported() {
    let a = parse_document(&common::sample("weather.http"), "a.http").unwrap();
    let b = parse_document(&common::sample("weather.http"), "b.http").unwrap();
    let err = build_palette(&[a, b], "P").unwrap_err();
    let names: Vec<_> = err.collisions.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(names, ["WeatherLocation", "CurrentConditions"]);
    assert_eq!((err.collisions[0].first.as_str(), err.collisions[0].second.as_str()), ("a.http", "b.http"));

    let mut prelude = rest_prelude();
    let clash = parse_document("http { name GetRequest url server a.example type GET }", "mine.http").unwrap();
    assert!(prelude.extend(build_palette(&[clash], "Mine").unwrap()).is_err());
}

proptest! {
    #[test]
    fn ports_are_the_input_variables(m in common::message()) {
        let block = derive_block(&m);
        prop_assert_eq!(block.name.as_str(), m.name.as_str());
        let ports: Vec<String> = block.port_names().into_iter().map(String::from).collect();
        prop_assert_eq!(ports, collect_input_variables(&m));
        prop_assert_eq!(block.branches.len(), 2);
    }
}
