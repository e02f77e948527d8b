//! Golden-file tests for the command-line tool. Set `UPDATE_GOLDEN=1` to rewrite
//! the expected outputs after an intended change.

mod common;

use std::process::Command;

use common::{capture, case, check_golden, cli_cases, dir, fixture};
use deflator::cli::EXIT_OK;

#[test]
fn golden_outputs() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for c in cli_cases() {
        if update {
            let (_, stdout, _) = capture(&c.args);
            std::fs::write(dir("golden").join(format!("{}.json", c.golden)), stdout).unwrap();
            continue;
        }
        if let Err(e) = check_golden(&c) {
            panic!("{e}");
        }
    }
}

#[test]
fn reruns_are_byte_identical() {
    for c in cli_cases() {
        assert_eq!(capture(&c.args), capture(&c.args), "{}", c.golden);
    }
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_deflator");
    for (args, code) in [
        (vec!["detect".to_string(), fixture("fair_binomial.json")], 0),
        (vec!["detect".to_string(), fixture("malformed.json")], 2),
        (vec!["detect".to_string(), fixture("overpriced_call.json")], 3),
        (
            vec![
                "hedge".to_string(),
                fixture("collinear.json"),
                "--payoff".to_string(),
                "call:100".to_string(),
            ],
            4,
        ),
        (vec!["bogus".to_string()], 2),
    ] {
        let status = Command::new(exe).args(&args).output().unwrap();
        assert_eq!(status.status.code(), Some(code), "{args:?}");
    }
}

#[test]
fn reported_numbers_match_library() {
    use deflator::cone_ftap::{classify, Classification};
    use deflator::one_period::price_payoff;
    let (_, stdout, _) = capture(&case("", &["price", "fair_binomial.json", "--payoff", "call:100"], EXIT_OK).args);
    let doc: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let market = deflator::cone_ftap::OnePeriodMarket::new(vec![1.0, 100.0], vec![vec![1.05, 90.0], vec![1.05, 120.0]]).unwrap();
    let Classification::Deflator(d) = classify(&market, 1e-9).unwrap() else {
        panic!("fair market");
    };
    let p = price_payoff(&market, &d, &[0.0, 20.0]).unwrap();
    let shown = doc["prices"][0].as_f64().unwrap();
    assert_eq!(shown, format!("{p:.11e}").parse::<f64>().unwrap());
}
