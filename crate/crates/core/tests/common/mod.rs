//! Helpers shared by the integration tests: independent quadrature oracles and
//! the CLI golden-file cases.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use deflator::cli::{run, EXIT_ARBITRAGE, EXIT_INPUT, EXIT_OK, EXIT_SINGULAR};

/// Composite Simpson rule with `n` (even) subintervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64);
    }
    s * h / 3.0
}

pub fn std_normal_density(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `E g(Z)` for standard normal `Z`, integrated over `[-12, 12]` with a split at `kink`.
pub fn normal_expectation<F: Fn(f64) -> f64>(g: F, kink: f64) -> f64 {
    let kink = kink.clamp(-12.0, 12.0);
    let f = |z: f64| g(z) * std_normal_density(z);
    simpson(f, -12.0, kink, 200_000) + simpson(f, kink, 12.0, 200_000)
}

pub fn dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join(name)
}

pub fn fixture(name: &str) -> String {
    dir("fixtures").join(name).to_string_lossy().into_owned()
}

pub struct Case {
    pub golden: &'static str,
    pub args: Vec<String>,
    pub code: i32,
}

pub fn case(golden: &'static str, args: &[&str], code: i32) -> Case {
    let mut full = vec!["deflator".to_string()];
    for (i, a) in args.iter().enumerate() {
        // the second argument is always the input file
        full.push(if i == 1 { fixture(a) } else { a.to_string() });
    }
    Case { golden, args: full, code }
}

pub fn cli_cases() -> Vec<Case> {
    vec![
        case("detect_overpriced_call", &["detect", "overpriced_call.json"], EXIT_ARBITRAGE),
        case("detect_fair_binomial", &["detect", "fair_binomial.json"], EXIT_OK),
        case("detect_rate_tree", &["detect", "rate_tree.json"], EXIT_OK),
        case("detect_dead_node", &["detect", "dead_node.json"], EXIT_ARBITRAGE),
        case("price_binomial_call", &["price", "fair_binomial.json", "--payoff", "call:100"], EXIT_OK),
        case("price_rate_tree_zcb", &["price", "rate_tree.json", "--payoff", "zcb"], EXIT_OK),
        case("price_overpriced_call", &["price", "overpriced_call.json", "--payoff", "put:100"], EXIT_ARBITRAGE),
        case("price_bachelier_atm_put", &["price", "bachelier.json", "--payoff", "put:105"], EXIT_OK),
        case("price_gbm_put", &["price", "gbm.json", "--payoff", "put:100"], EXIT_OK),
        case("price_levy_gaussian_put", &["price", "levy_gaussian.json", "--payoff", "put:100"], EXIT_OK),
        case("hedge_binomial_call", &["hedge", "fair_binomial.json", "--payoff", "call:100"], EXIT_OK),
        case("hedge_bachelier_atm_call", &["hedge", "bachelier.json", "--payoff", "call:105"], EXIT_OK),
        case("hedge_rate_tree_zcb", &["hedge", "rate_tree.json", "--payoff", "zcb"], EXIT_OK),
        case("hedge_collinear", &["hedge", "collinear.json", "--payoff", "call:100"], EXIT_SINGULAR),
        case("curve_par", &["curve", "curve.txt", "--schedule", "0,0.5,1,1.5,2", "par"], EXIT_OK),
        case("curve_swap", &["curve", "curve.txt", "--schedule", "0.5,1.5;1", "swap"], EXIT_OK),
        case("curve_fra", &["curve", "curve.txt", "--schedule", "0.5,1.5;1", "fra"], EXIT_OK),
        case(
            "curve_price",
            &["curve", "curve.txt", "--schedule", "0,1,2", "price", "--coupon", "0.04"],
            EXIT_OK,
        ),
        case("curve_missing_maturity", &["curve", "curve.txt", "--schedule", "0,0.75", "par"], EXIT_INPUT),
        case("curve_zero_length", &["curve", "curve.txt", "--schedule", "0", "par"], EXIT_INPUT),
        case("detect_malformed", &["detect", "malformed.json"], EXIT_INPUT),
        case("detect_nonfinite", &["detect", "nonfinite.json"], EXIT_INPUT),
        case("detect_missing_file", &["detect", "no_such_file.json"], EXIT_INPUT),
        case("detect_model_spec", &["detect", "gbm.json"], EXIT_INPUT),
    ]
}

pub fn capture(args: &[String]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(args, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// Compare one case with its golden file; `Err` describes the mismatch.
pub fn check_golden(c: &Case) -> Result<(), String> {
    let (code, stdout, stderr) = capture(&c.args);
    if code != c.code {
        return Err(format!("{}: exit {code}, expected {} ({stderr})", c.golden, c.code));
    }
    if code != EXIT_OK && !stderr.starts_with("error: ") {
        return Err(format!("{}: no diagnostic on stderr", c.golden));
    }
    let path = dir("golden").join(format!("{}.json", c.golden));
    let expected = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if stdout != expected {
        return Err(format!("{}: output differs from golden file", c.golden));
    }
    Ok(())
}
