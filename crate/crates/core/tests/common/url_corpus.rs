//! Server-URL cases for comparison against an independent URL parser.
//!
//! The cases avoid the places where the WHATWG URL standard is deliberately
//! more lenient than the RFC 1738 host grammar (underscores, leading hyphens,
//! numeric shorthand hosts, port 0, empty ports, fragments and backslashes in
//! the authority, non-HTTP schemes). Those are covered by dedicated tests.
//! What remains must be decided identically, except for top-level labels
//! whose length is outside 2..=63, which we reject and the oracle accepts.

#[derive(Clone, Debug)]
pub struct Case {
    pub server: String,
    /// Top label outside 2..=63: the known disagreement.
    pub deviation: bool,
}

fn case(server: impl Into<String>) -> Case {
    Case {
        server: server.into(),
        deviation: false,
    }
}

fn deviation(server: impl Into<String>) -> Case {
    Case {
        server: server.into(),
        deviation: true,
    }
}

/// Deterministic label generator: letters, digits and inner hyphens.
fn label(seed: usize, len: usize) -> String {
    const FIRST: &[u8] = b"abcdefghijklmnopqrstuvwxyz";
    const INNER: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789-";
    const LAST: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";
    let mut s = String::new();
    let mut x = seed.wrapping_mul(2654435761) ^ 0x9e37;
    for i in 0..len {
        x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let pick = x >> 33;
        let set = if i == 0 {
            FIRST
        } else if i + 1 == len {
            LAST
        } else {
            INNER
        };
        s.push(set[pick % set.len()] as char);
    }
    s
}

pub fn corpus() -> Vec<Case> {
    let mut out = Vec::new();

    // Top-label lengths across the whole allowed range, plus both sides.
    for len in 1..=64 {
        let tld = "x".repeat(len);
        let c = format!("host.{tld}");
        out.push(if (2..=63).contains(&len) { case(c) } else { deviation(c) });
    }

    // Multi-label hostnames with digits and inner hyphens.
    for seed in 0..40 {
        let labels = 1 + seed % 4;
        let mut parts: Vec<String> = (0..labels).map(|i| label(seed * 7 + i, 1 + (seed + i) % 12)).collect();
        parts.push(label(seed * 13 + 5, 2 + seed % 6).to_ascii_lowercase());
        // Top label must start with a letter; `label` guarantees that.
        out.push(case(parts.join(".")));
    }
    for h in [
        "localhost",
        "Example.COM",
        "a-b.example",
        "x1.y2.zz",
        "0abc.example",
        "www.dataservice.accuweather.com",
        "b--c.example",
    ] {
        out.push(case(h));
    }

    // Schemes.
    for s in ["http://", "https://", "HTTP://", "HtTpS://"] {
        out.push(case(format!("{s}api.example.org")));
        out.push(case(format!("{s}api.example.org:8443")));
    }
    out.push(case("http://api.example.org/"));

    // IPv4 octets at their edges.
    let edges = [0, 1, 9, 10, 99, 100, 199, 200, 249, 250, 255];
    for (i, e) in edges.iter().enumerate() {
        out.push(case(format!("{e}.{}.{}.{}", edges[(i + 3) % 11], edges[(i + 5) % 11], edges[(i + 7) % 11])));
        out.push(case(format!("10.{e}.0.1")));
        out.push(case(format!("192.168.{e}.1")));
    }
    for bad in ["256.1.1.1", "1.256.1.1", "1.1.1.256", "1.2.3.999", "1.2.3.4.5", "300.300.300.300"] {
        out.push(case(bad));
    }

    // Ports.
    for p in ["1", "80", "443", "8080", "65535", "00080"] {
        out.push(case(format!("svc.example:{p}")));
        out.push(case(format!("127.0.0.1:{p}")));
    }
    for p in ["65536", "70000", "99999", "8x", "-1", "1.5", "+80"] {
        out.push(case(format!("svc.example:{p}")));
    }

    // IPv6.
    for a in [
        "::", "::1", "1::", "1:2:3:4:5:6:7:8", "1::8", "1:2::7:8", "fe80::1", "FE80::ABCD",
        "::ffff:192.168.0.1", "64:ff9b::10.0.0.1", "2001:db8::", "2001:db8:0:0:0:0:2:1",
        "0:0:0:0:0:0:0:0", "1:2:3:4:5:6:1.2.3.4", "::1.2.3.4", "abcd:ef01:2345:6789:abcd:ef01:2345:6789",
    ] {
        out.push(case(format!("[{a}]")));
        out.push(case(format!("[{a}]:8080")));
    }
    for a in [
        "1::2::3", "12345::", "1:2:3:4:5:6:7:8:9", "1:2:3:4:5:6:7", ":1", "1:", "g::1",
        "::1.2.3", "::1.2.3.256", "1.2.3.4::", "::1:", "[::1]",
    ] {
        out.push(case(format!("[{a}]")));
    }
    out.push(case("[::1"));
    out.push(case("[::1]x"));

    // Characters that no host may contain.
    for c in [' ', '<', '>', '^', '|', '%'] {
        out.push(case(format!("a{c}b.example")));
        out.push(case(format!("ab.ex{c}ample")));
    }

    // Empty hosts.
    for s in ["http://", "http://:80", "https://:443"] {
        out.push(case(s));
    }

    // Userinfo.
    for u in ["user@", "user:pw@", "u%20x@", "a.b-c@", "x:@"] {
        out.push(case(format!("{u}svc.example")));
    }
    out
}

/// Oracle verdict for a server string.
pub fn oracle_accepts(server: &str) -> bool {
    let with_scheme = if server.contains("://") {
        server.to_string()
    } else {
        format!("http://{server}")
    };
    let trimmed = with_scheme.strip_suffix('/').unwrap_or(&with_scheme);
    match url::Url::parse(&format!("{trimmed}/")) {
        Ok(u) => u.host_str().is_some_and(|h| !h.is_empty()) && u.path() == "/",
        Err(_) => false,
    }
}
