#![allow(dead_code)]

pub mod url_corpus;

use std::collections::BTreeSet;
use std::path::PathBuf;

use httpdsl::model::*;
use httpdsl::parser::parse_document;
use proptest::prelude::*;

pub fn samples_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../samples")
}

pub fn sample(name: &str) -> String {
    std::fs::read_to_string(samples_dir().join(name)).unwrap()
}

pub fn parse(src: &str) -> RequestDocument {
    parse_document(src, "test.http").unwrap_or_else(|d| panic!("{d:?}\n{src}"))
}

pub fn weather() -> RequestDocument {
    parse_document(&sample("weather.http"), "weather.http").unwrap()
}

// ---- random documents ------------------------------------------------------

fn ident() -> impl Strategy<Value = String> {
    "[a-zA-Z][a-zA-Z0-9_]{0,8}"
}

fn env_name() -> impl Strategy<Value = String> {
    "[A-Z]{1,4}(_[A-Z]{1,3}){0,2}"
}

/// Literal text including everything that needs quoting or escaping.
fn literal() -> impl Strategy<Value = String> {
    prop_oneof![
        3 => "[a-zA-Z0-9./:_-]{1,12}",
        2 => "[a-zA-Z0-9 :/${}\"\\\\\n\t.é_-]{0,12}",
        1 => Just("input".to_string()),
        1 => Just("environment".to_string()),
        1 => Just("// not a comment".to_string()),
    ]
}

fn value() -> impl Strategy<Value = Value> {
    prop_oneof![
        3 => literal().prop_map(Value::Literal),
        1 => ident().prop_map(Value::input),
        1 => env_name().prop_map(Value::environment),
    ]
}

fn content_type() -> impl Strategy<Value = ContentTypeSpec> {
    prop_oneof![
        prop::sample::select(MediaType::ALL.to_vec()).prop_map(ContentTypeSpec::WellKnown),
        literal().prop_map(ContentTypeSpec::Custom),
        ident().prop_map(|n| ContentTypeSpec::Variable(VariableRef::input(n))),
    ]
}

fn header() -> impl Strategy<Value = Header> {
    let key = prop_oneof![
        prop::sample::select(WellKnownHeader::ALL.to_vec()).prop_map(HeaderKey::WellKnown),
        literal().prop_map(HeaderKey::Custom),
        env_name().prop_map(|n| HeaderKey::Variable(VariableRef::environment(n))),
    ];
    (key, value()).prop_map(|(k, v)| Header::new(k, v))
}

fn body() -> impl Strategy<Value = Body> {
    (
        content_type(),
        prop::sample::select(EntityKind::ALL.to_vec()),
        value(),
    )
        .prop_map(|(content_type, entity_type, payload)| Body {
            content_type,
            entity_type,
            payload,
        })
}

fn return_value() -> impl Strategy<Value = ReturnValue> {
    (
        content_type(),
        prop::sample::select(vec![ReturnForm::FullResponse, ReturnForm::PayloadText]),
    )
        .prop_map(|(expected_type, return_form)| ReturnValue {
            expected_type,
            return_form,
        })
}

fn customization() -> impl Strategy<Value = Customization> {
    let port = prop_oneof![
        (1u32..=65535).prop_map(|p| Value::literal(p.to_string())),
        value(),
    ];
    (
        prop::option::of((value(), port).prop_map(|(host, port)| ProxySpec { host, port })),
        prop::option::of(
            (value(), value()).prop_map(|(username, password)| BasicAuthSpec { username, password }),
        ),
        prop::option::of(1u64..1_000_000_000),
    )
        .prop_map(|(proxy, basic_auth, timeout_ms)| Customization {
            proxy,
            basic_auth,
            timeout_ms,
        })
}

pub fn message() -> impl Strategy<Value = HttpMessage> {
    (
        ident(),
        value(),
        prop_oneof![1 => Just(Value::literal("")), 3 => value()],
        prop::sample::select(RequestMethod::ALL.to_vec()),
        prop::collection::vec((value(), value()), 0..3),
        prop::collection::vec(header(), 0..3),
        prop::option::of(body()),
        prop::option::of(return_value()),
        prop::option::of(customization()),
    )
        .prop_map(
            |(name, server, path, method, query, headers, body, return_value, customization)| {
                let mut m = HttpMessage::new(name, AbstractUrl::new(server, path), method);
                m.query = query.into_iter().map(|(k, v)| Parameter::new(k, v)).collect();
                m.headers = headers;
                m.body = body;
                m.return_value = return_value;
                m.customization = customization;
                m
            },
        )
}

/// Documents with one to four uniquely named messages.
pub fn document() -> impl Strategy<Value = RequestDocument> {
    prop::collection::vec(message(), 1..4).prop_map(|mut messages| {
        let mut seen = BTreeSet::new();
        for (i, m) in messages.iter_mut().enumerate() {
            if !seen.insert(m.name.clone()) {
                m.name = format!("{}{i}", m.name);
                seen.insert(m.name.clone());
            }
        }
        RequestDocument {
            source_name: "gen.http".into(),
            messages,
        }
    })
}
