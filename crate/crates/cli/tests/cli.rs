use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use httpdsl::mock::{MockRoute, MockScript, MockServer};

fn samples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../samples")
}

fn httpdsl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_httpdsl"))
        .args(args)
        .env_remove("HTTPDSL_TIMEOUT_MS")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_script(dir: &Path, routes: Vec<MockRoute>) -> String {
    let path = dir.join("script.json");
    fs::write(&path, serde_json::to_string(&MockScript::new(routes)).unwrap()).unwrap();
    format!("mock:{}", path.display())
}

#[test]
fn validate_samples_and_broken_files() {
    let o = httpdsl(&["validate", samples().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.http");
    fs::write(&bad, "http {\n    name A\n    url server a.x\n    type GET\n}\n").unwrap();
    let o = httpdsl(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("bad.http:3:"), "{}", stdout(&o));

    let o = httpdsl(&["validate", dir.path().join("missing.http").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn run_with_a_scripted_transport() {
    let dir = tempfile::tempdir().unwrap();
    let transport = write_script(
        dir.path(),
        vec![
            MockRoute::new(Some("GET"), "/locations/v1/cities/search", 200, "[{\"Key\":\"178556\"}]"),
            MockRoute::new(Some("GET"), "/broken", 500, "oops"),
        ],
    );
    let weather = samples().join("weather.http");
    let weather = weather.to_str().unwrap();

    let o = httpdsl(&[
        "run", weather, "WeatherLocation", "--input", "apiKeyParam=K", "--input", "city=Dortmund",
        "--transport", &transport,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "[{\"Key\":\"178556\"}]");

    let o = httpdsl(&[
        "run", weather, "CurrentConditions", "--input", "apiKeyParam=K", "--input", "conditionsPath=broken",
        "--transport", &transport, "--json",
    ]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["statuscode"], 500);
    assert_eq!(v["tryAgain"], true);

    let o = httpdsl(&["run", weather, "WeatherLocation", "--input", "apiKeyParam=K", "--transport", &transport]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--input city=VALUE"), "{}", stderr(&o));

    let o = httpdsl(&["run", weather, "Nope", "--transport", &transport]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("WeatherLocation, CurrentConditions"), "{}", stderr(&o));
}

#[test]
fn run_over_tcp() {
    let mock = MockServer::start(MockScript::new(vec![MockRoute::new(Some("GET"), "/users", 200, "[]")])).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("users.http");
    let src = fs::read_to_string(samples().join("get_users.http"))
        .unwrap()
        .replace("localhost:8080", &mock.url());
    fs::write(&file, src).unwrap();
    let o = httpdsl(&["run", file.to_str().unwrap(), "GetUsers"]);
    assert_eq!((code(&o), stdout(&o).trim()), (0, "[]"), "{}", stderr(&o));
}

#[test]
fn timeouts_exit_with_transport_code() {
    let dir = tempfile::tempdir().unwrap();
    let transport = write_script(dir.path(), vec![MockRoute::new(None, "*", 200, "late").with_delay(300)]);
    let users = samples().join("get_users.http");
    let o = Command::new(env!("CARGO_BIN_EXE_httpdsl"))
        .args(["run", users.to_str().unwrap(), "GetUsers", "--transport", &transport])
        .env("HTTPDSL_TIMEOUT_MS", "100")
        .output()
        .unwrap();
    assert_eq!(code(&o), 3, "{}", stderr(&o));

    let o = Command::new(env!("CARGO_BIN_EXE_httpdsl"))
        .args(["run", users.to_str().unwrap(), "GetUsers", "--transport", &transport])
        .env("HTTPDSL_TIMEOUT_MS", "soon")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn environment_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let transport = write_script(dir.path(), vec![MockRoute::new(Some("POST"), "/api/v2/tickets", 201, "{}")]);
    let file = samples().join("customized.http");
    let base = ["run", file.to_str().unwrap(), "CreateTicket", "--input", "ticket={}", "--transport", &transport];
    let o = Command::new(env!("CARGO_BIN_EXE_httpdsl"))
        .args(base)
        .env_remove("PROXY_HOST")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("PROXY_HOST"), "{}", stderr(&o));

    let mut args = base.to_vec();
    args.extend(["--env", "PROXY_HOST=proxy.example", "--env", "PROXY_PORT=3128"]);
    args.extend(["--env", "TICKETS_USER=u", "--env", "TICKETS_PASSWORD=p", "--json"]);
    let o = httpdsl(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("\"statuscode\":201"));
}

#[test]
fn generate_reports_and_is_rerunnable() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let weather = samples().join("weather.http");
    let o = httpdsl(&["generate", weather.to_str().unwrap(), "--out", out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("created: 10"), "{text}");
    assert!(text.contains("2 clients, 3 support units, 1 manifest"), "{text}");
    assert!(dir.path().join("httpLib/src/clients/WeatherLocation.rs").is_file());

    let o = httpdsl(&["generate", weather.to_str().unwrap(), "--out", out]);
    assert!(stdout(&o).contains("created: 0"), "{}", stdout(&o));

    let o = httpdsl(&["generate", weather.to_str().unwrap(), "--out", out, "--dialect", "cobol"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("unknown dialect"));
}

#[test]
fn blocks_export_and_collisions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("weather.palette");
    let weather = samples().join("weather.http");
    let o = httpdsl(&[
        "blocks", weather.to_str().unwrap(), "--out", out.to_str().unwrap(), "--with-rest-prelude",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("wrote 6 blocks"), "{}", stdout(&o));
    let palette = httpdsl::blocks::parse_manifest(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(palette.name, "weather");

    let copy = dir.path().join("copy.http");
    fs::copy(&weather, &copy).unwrap();
    let o = httpdsl(&["blocks", weather.to_str().unwrap(), copy.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("duplicate block name `WeatherLocation`"), "{}", stderr(&o));
}

#[test]
fn fmt_check_and_rewrite() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("messy.http");
    fs::write(&file, "http { name A url server a.example type GET }").unwrap();
    let path = file.to_str().unwrap();

    let o = httpdsl(&["fmt", "--check", path]);
    assert_eq!(code(&o), 1);
    let o = httpdsl(&["fmt", path]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        fs::read_to_string(&file).unwrap(),
        "http {\n    name A\n    url server a.example\n    type GET\n}\n"
    );
    let o = httpdsl(&["fmt", "--check", path]);
    assert_eq!(code(&o), 0);

    fs::write(&file, "http {\n    // note\n    name A\n    url server a.example\n    type GET\n}\n").unwrap();
    let o = httpdsl(&["fmt", path]);
    assert_eq!(code(&o), 2);
}
