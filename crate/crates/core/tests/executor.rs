mod common;

use std::time::{Duration, Instant};

use httpdsl::binder::{resolve, BindingSet};
use httpdsl::executor::*;
use httpdsl::mock::{MockRoute, MockScript, MockServer, ScriptedTransport};
use httpdsl::model::{HttpMessage, RequestMethod};

fn message(src: &str) -> HttpMessage {
    common::parse(src).messages.remove(0)
}

fn plan_for(src: &str, bindings: &BindingSet) -> RequestPlan {
    build_plan(&resolve(&message(src), bindings).unwrap()).unwrap()
}

fn server(routes: Vec<MockRoute>) -> MockServer {
    MockServer::start(MockScript::new(routes)).unwrap()
}

#[test]
fn ok_response_over_tcp() {
    let mock = server(vec![MockRoute::new(Some("GET"), "/ping", 200, "ok")]);
    let plan = plan_for(
        &format!("http {{ name P url server {} path ping type GET }}", mock.url()),
        &BindingSet::new(),
    );
    let r = execute(&plan, &TcpTransport::new()).unwrap();
    assert_eq!(
        r,
        ResponseObject {
            payload: "ok".into(),
            statuscode: 200,
            succeeded: true,
            try_again: false,
            next_uri: None,
            request_type: RequestMethod::Get,
        }
    );
    let seen = mock.requests();
    assert_eq!(seen.len(), 1);
    assert_eq!(seen[0].target, "/ping");
    assert_eq!(seen[0].header("host"), Some(mock.addr().to_string().as_str()));
    assert_eq!(seen[0].header("connection"), Some("close"));
}

#[test]
fn request_line_headers_and_text_body() {
    let mock = server(vec![MockRoute::new(None, "*", 201, "")]);
    let src = format!(
        "http {{ name P url server {} path /a/b type POST param q: \"x y\" param n: input $n \
         header Accept: \"text/plain\" header \"X-Trace\": environment TRACE_ID \
         body {{ contentType text/plain entityType TEXT payload \"hé\" }} \
         customize {{ basicauth user \"u\" password \"p\" }} }}",
        mock.url()
    );
    let bindings = BindingSet::new()
        .with_input("n", "1&2")
        .with_environment(|k| (k == "TRACE_ID").then(|| "t-1".to_string()));
    let plan = plan_for(&src, &bindings);
    execute(&plan, &TcpTransport::new()).unwrap();
    let r = &mock.requests()[0];
    assert_eq!(r.method, "POST");
    assert_eq!(r.target, "/a/b?q=x%20y&n=1%262");
    assert_eq!(r.header("accept"), Some("text/plain"));
    assert_eq!(r.header("x-trace"), Some("t-1"));
    assert_eq!(r.header("content-type"), Some("text/plain"));
    assert_eq!(r.header("authorization"), Some("Basic dTpw"));
    assert_eq!(r.header("content-length"), Some("3"));
    assert_eq!(r.body, "hé".as_bytes());
}

#[test]
fn file_bytes_and_stream_bodies() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("payload.bin");
    let data: Vec<u8> = (0..100_000u32).map(|i| (i % 251) as u8).collect();
    std::fs::write(&file, &data).unwrap();
    let mock = server(vec![MockRoute::new(None, "*", 200, "")]);

    for (entity, payload) in [
        ("FILE", file.display().to_string()),
        ("STREAM", file.display().to_string()),
        ("BYTES", "AAEC/w==".to_string()),
    ] {
        let src = format!(
            "http {{ name P url server {} type PUT body {{ contentType \"application/octet-stream\" entityType {entity} payload input $p }} }}",
            mock.url()
        );
        let plan = plan_for(&src, &BindingSet::new().with_input("p", payload));
        execute(&plan, &TcpTransport::new()).unwrap();
    }
    let seen = mock.requests();
    assert_eq!(seen[0].body, data);
    assert_eq!(seen[1].body, data);
    assert_eq!(seen[1].header("transfer-encoding"), Some("chunked"));
    assert_eq!(seen[2].body, [0, 1, 2, 255]);
}

#[test]
fn stream_file_removed_before_send() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("gone.txt");
    std::fs::write(&file, "x").unwrap();
    let mock = server(vec![]);
    let src = format!(
        "http {{ name P url server {} type POST body {{ contentType text/plain entityType STREAM payload input $p }} }}",
        mock.url()
    );
    let plan = plan_for(&src, &BindingSet::new().with_input("p", file.display().to_string()));
    std::fs::remove_file(&file).unwrap();
    assert!(matches!(
        execute(&plan, &TcpTransport::new()),
        Err(TransportError::FileNotReadable { .. })
    ));
}

#[test]
fn slow_server_times_out_within_grace() {
    let mock = server(vec![MockRoute::new(None, "*", 200, "late").with_delay(600)]);
    let plan = plan_for(
        &format!("http {{ name P url server {} type GET customize {{ timeout 300 }} }}", mock.url()),
        &BindingSet::new(),
    );
    let started = Instant::now();
    let err = execute(&plan, &TcpTransport::new()).unwrap_err();
    let elapsed = started.elapsed();
    assert_eq!(err, TransportError::Timeout { timeout_ms: 300 });
    assert!(elapsed >= Duration::from_millis(300), "{elapsed:?}");
    assert!(elapsed < Duration::from_millis(550), "{elapsed:?}");
}

/// A bound but non-listening socket: connections are refused, and the port
/// cannot be handed to a concurrently starting mock server.
fn closed_port() -> (socket2::Socket, u16) {
    use socket2::{Domain, Socket, Type};
    let s = Socket::new(Domain::IPV4, Type::STREAM, None).unwrap();
    s.bind(&"127.0.0.1:0".parse::<std::net::SocketAddr>().unwrap().into()).unwrap();
    let port = s.local_addr().unwrap().as_socket().unwrap().port();
    (s, port)
}

#[test]
fn unreachable_proxy() {
    let (_reserved, port) = closed_port();
    let src = format!(
        "http {{ name P url server api.example type GET customize {{ proxy host \"127.0.0.1\" port {port} timeout 500 }} }}"
    );
    let err = execute(&plan_for(&src, &BindingSet::new()), &TcpTransport::new()).unwrap_err();
    assert!(matches!(err, TransportError::ProxyUnreachable { .. }), "{err:?}");

    // Names under .invalid never resolve.
    let src = "http { name P url server api.example type GET customize { proxy host \"proxy.invalid\" port 3128 timeout 2000 } }";
    let err = execute(&plan_for(src, &BindingSet::new()), &TcpTransport::new()).unwrap_err();
    assert!(matches!(err, TransportError::ProxyUnreachable { .. }), "{err:?}");
}

#[test]
fn refused_connection() {
    let (_reserved, port) = closed_port();
    let src = format!("http {{ name P url server 127.0.0.1:{port} type GET }}");
    let err = execute(&plan_for(&src, &BindingSet::new()), &TcpTransport::new()).unwrap_err();
    assert!(matches!(err, TransportError::ConnectionFailed { .. }), "{err:?}");
}

#[test]
fn http_through_proxy_uses_absolute_form() {
    let proxy = server(vec![MockRoute::new(Some("GET"), "/secure", 503, "busy")]);
    let src = format!(
        "http {{ name P url server http://api.example:8080 path secure type GET param a: \"1\" \
         customize {{ proxy host \"127.0.0.1\" port {} basicauth user \"u\" password \"p\" }} }}",
        proxy.addr().port()
    );
    let r = execute(&plan_for(&src, &BindingSet::new()), &TcpTransport::new()).unwrap();
    assert_eq!((r.statuscode, r.try_again, r.payload.as_str()), (503, true, "busy"));
    let seen = &proxy.requests()[0];
    assert_eq!(seen.target, "http://api.example:8080/secure?a=1");
    assert_eq!(seen.header("host"), Some("api.example:8080"));
    assert_eq!(seen.header("authorization"), Some("Basic dTpw"));
}

#[test]
fn https_through_proxy_opens_a_tunnel() {
    let proxy = server(vec![]);
    let src = format!(
        "http {{ name P url server https://secure.example type GET customize {{ proxy host \"127.0.0.1\" port {} timeout 2000 }} }}",
        proxy.addr().port()
    );
    // The mock cannot speak TLS, so the handshake fails after the tunnel.
    let err = execute(&plan_for(&src, &BindingSet::new()), &TcpTransport::new()).unwrap_err();
    assert!(matches!(err, TransportError::ConnectionFailed { .. }), "{err:?}");
    let seen = proxy.requests();
    assert_eq!(seen[0].method, "CONNECT");
    assert_eq!(seen[0].target, "secure.example:443");
}

#[test]
fn interim_response_then_close() {
    let mock = server(vec![MockRoute::new(None, "*", 103, "").with_header("Link", "</a.css>")]);
    let plan = plan_for(&format!("http {{ name P url server {} type GET }}", mock.url()), &BindingSet::new());
    let r = execute(&plan, &TcpTransport::new()).unwrap();
    assert_eq!(r.statuscode, 103);
    assert!(!r.succeeded && !r.try_again && r.next_uri.is_none());
}

#[test]
fn redirects_are_reported_not_followed() {
    let mock = server(vec![
        MockRoute::new(None, "/old", 301, "").with_header("Location", "http://h.example/x"),
        MockRoute::new(None, "*", 200, "new"),
    ]);
    let plan = plan_for(&format!("http {{ name P url server {} path old type GET }}", mock.url()), &BindingSet::new());
    let r = execute(&plan, &TcpTransport::new()).unwrap();
    assert_eq!(r.next_uri.as_deref(), Some("http://h.example/x"));
    assert!(!r.succeeded);
    assert_eq!(mock.requests().len(), 1);
}

#[test]
fn repeated_execution_is_deterministic() {
    let mock = server(vec![MockRoute::new(None, "*", 429, "slow down")]);
    let plan = plan_for(&format!("http {{ name P url server {} type DELETE }}", mock.url()), &BindingSet::new());
    let before = plan.clone();
    let t = TcpTransport::new();
    let a = execute(&plan, &t).unwrap();
    let b = execute(&plan, &t).unwrap();
    assert_eq!(a, b);
    assert_eq!(plan, before);
    assert!(a.try_again);
    assert_eq!(a.request_type, RequestMethod::Delete);
}

#[test]
fn expected_type_mismatch_is_not_an_error() {
    let mock = server(vec![MockRoute::new(None, "*", 200, "<p>").with_header("Content-Type", "text/html")]);
    let src = format!(
        "http {{ name P url server {} type GET returns {{ expect application/json as FULL_RESPONSE }} }}",
        mock.url()
    );
    let msg = message(&src);
    let result = run_message(&msg, &BindingSet::new(), &TcpTransport::new()).unwrap();
    assert_eq!(result.branch, Branch::Success);
    assert!(matches!(result.output, BranchOutput::Full(ref r) if r.payload == "<p>"));
}

#[test]
fn concurrent_sends_share_a_transport() {
    let mock = server(vec![MockRoute::new(None, "*", 200, "ok").with_delay(50)]);
    let plan = plan_for(&format!("http {{ name P url server {} type GET }}", mock.url()), &BindingSet::new());
    let transport = TcpTransport::new();
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..8).map(|_| s.spawn(|| execute(&plan, &transport))).collect();
        for h in handles {
            assert!(h.join().unwrap().unwrap().succeeded);
        }
    });
    assert_eq!(mock.requests().len(), 8);
}

#[test]
fn scripted_transport_matches_the_server() {
    let routes = vec![
        MockRoute::new(Some("GET"), "/a", 302, "").with_header("Location", "/b"),
        MockRoute::new(None, "*", 404, "none"),
    ];
    let mock = server(routes.clone());
    let scripted = ScriptedTransport::new(MockScript::new(routes));
    for path in ["a", "zzz"] {
        let plan = plan_for(
            &format!("http {{ name P url server {} path {path} type GET }}", mock.url()),
            &BindingSet::new(),
        );
        assert_eq!(
            execute(&plan, &TcpTransport::new()).unwrap(),
            execute(&plan, &scripted).unwrap()
        );
    }
    assert_eq!(scripted.sent().len(), 2);
}

#[test]
fn uncustomized_plans_carry_the_default_timeout() {
    let plan = plan_for("http { name P url server a.example type GET }", &BindingSet::new());
    assert_eq!(plan.timeout_ms, 5000);
    let plan = plan_for(
        "http { name P url server a.example type GET }",
        &BindingSet::new().with_default_timeout(1234),
    );
    assert_eq!(plan.timeout_ms, 1234);
    let plan = plan_for(
        "http { name P url server a.example type GET customize { timeout 77 } }",
        &BindingSet::new().with_default_timeout(1234),
    );
    assert_eq!(plan.timeout_ms, 77);
}
