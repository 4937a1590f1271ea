//! End to end runs of the ftap binary: exit codes, output files, and
//! the certificate round trips a caller would script.

mod common;

use common::{fixture, ftap, result_of};

#[test]
fn trend_instance_fails_check_na_with_a_terminal_claim() {
    let out = ftap(&["check-na", "--in", &fixture("cross_period_trend.json")]);
    assert_eq!(out.status.code(), Some(1));
    let result = result_of(&out);
    assert_eq!(result.verdict, "fails");
    assert!(result.diagnostics.iter().any(|line| line.contains("claim at 0.0: (1/2, 0)")));
}

#[test]
fn modify_reports_the_crossed_interval_at_the_root() {
    let out = ftap(&["modify", "--in", &fixture("cross_period_trend.json")]);
    assert_eq!(out.status.code(), Some(1));
    let result = result_of(&out);
    assert!(result.diagnostics.contains(&"crossed at root: lower 7/2 exceeds upper 3".to_owned()));
}

#[test]
fn interval_certificates_round_trip_through_files() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cert = dir.path().join("cert.json");
    let cert = cert.to_str().expect("utf8 path");
    let instance = fixture("binary_frictionless.json");

    let build = ftap(&["build-cps", "--in", &instance, "--out", cert]);
    assert_eq!(build.status.code(), Some(0));
    assert_eq!(result_of(&build).verdict, "built");

    let verify = ftap(&["verify-cps", "--in", &instance, "--cert", cert]);
    assert_eq!(verify.status.code(), Some(0));
    assert_eq!(result_of(&verify).verdict, "verified");
}

#[test]
fn strict_certificates_round_trip_through_files() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cert = dir.path().join("cert.json");
    let cert = cert.to_str().expect("utf8 path");
    let instance = fixture("shifted_spread.json");

    let build = ftap(&["build-scps", "--in", &instance, "--out", cert]);
    assert_eq!(build.status.code(), Some(0));

    let verify = ftap(&["verify-scps", "--in", &instance, "--cert", cert]);
    assert_eq!(verify.status.code(), Some(0));
    assert_eq!(result_of(&verify).verdict, "verified");
}

#[test]
fn cone_checks_accept_quote_instances_directly() {
    let spread = fixture("shifted_spread.json");
    let na2 = ftap(&["check-na2", "--in", &spread]);
    assert_eq!(na2.status.code(), Some(1));
    assert!(result_of(&na2).diagnostics.contains(&"escape at root: ray (-3, 2)".to_owned()));

    let nas = ftap(&["check-nas", "--in", &spread]);
    assert_eq!(nas.status.code(), Some(0));
    assert_eq!(result_of(&nas).verdict, "holds");
}

#[test]
fn a_tampered_certificate_is_rejected_with_exit_one() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cert_path = dir.path().join("cert.json");
    let instance = fixture("binary_frictionless.json");

    let build =
        ftap(&["build-cps", "--in", &instance, "--out", cert_path.to_str().expect("utf8 path")]);
    assert_eq!(build.status.code(), Some(0));

    let text = std::fs::read_to_string(&cert_path).expect("cert written");
    let bent = text.replace("\"2\"", "\"5/2\"");
    assert_ne!(text, bent, "the root price should appear in the file");
    std::fs::write(&cert_path, bent).expect("cert rewritten");

    let verify =
        ftap(&["verify-cps", "--in", &instance, "--cert", cert_path.to_str().expect("utf8 path")]);
    assert_eq!(verify.status.code(), Some(1));
    assert_eq!(result_of(&verify).verdict, "violated");
}

#[test]
fn generated_instances_feed_straight_back_into_the_checks() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("gen.json");
    let path = path.to_str().expect("utf8 path");

    let gen = ftap(&["gen", "--seed", "11", "--mode", "bidask2d", "--out", path]);
    assert_eq!(gen.status.code(), Some(0));

    let check = ftap(&["check-na", "--in", path]);
    let verdict = result_of(&check).verdict;
    assert!(verdict == "holds" || verdict == "fails");
    assert_eq!(check.status.code(), Some((verdict == "fails") as i32));
}

#[test]
fn equivalence_smoke_run_agrees_and_the_corrupt_hook_trips() {
    let clean = ftap(&["equiv", "--seed", "0", "--count", "10"]);
    assert_eq!(clean.status.code(), Some(0));
    assert_eq!(result_of(&clean).verdict, "holds");

    let corrupt = ftap(&["equiv", "--seed", "0", "--count", "10", "--corrupt-builder"]);
    assert_eq!(corrupt.status.code(), Some(2));
    let result = result_of(&corrupt);
    assert_eq!(result.verdict, "violated");
    assert!(result.diagnostics.iter().any(|line| line.contains("fails verification")));
}

#[test]
fn usage_errors_exit_sixty_four() {
    assert_eq!(ftap(&["check-na"]).status.code(), Some(64));
    assert_eq!(ftap(&["no-such-command"]).status.code(), Some(64));
    assert_eq!(ftap(&["--help"]).status.code(), Some(0));
}

#[test]
fn unreadable_input_exits_sixty_five() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{ not json").expect("file written");
    let out = ftap(&["check-na", "--in", path.to_str().expect("utf8 path")]);
    assert_eq!(out.status.code(), Some(65));

    let missing = dir.path().join("absent.json");
    let out = ftap(&["check-na", "--in", missing.to_str().expect("utf8 path")]);
    assert_eq!(out.status.code(), Some(65));
}

#[test]
fn quote_only_commands_reject_cone_instances() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("cones.json");
    let path = path.to_str().expect("utf8 path");
    let gen = ftap(&["gen", "--seed", "4", "--mode", "cones", "--out", path]);
    assert_eq!(gen.status.code(), Some(0));

    let out = ftap(&["check-na", "--in", path]);
    assert_eq!(out.status.code(), Some(65));
    let stderr = String::from_utf8(out.stderr.clone()).expect("utf8 stderr");
    assert!(stderr.contains("two-asset quote instance"));
}
