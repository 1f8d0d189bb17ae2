mod common;

use common::{stderr, uplink, write, NF_SWEEP};
use uplink_cli::config::{parse_config, Overrides};
use uplink_cli::spec::{Mode, Scenario, Scheme, SweptParam};
use uplink_cli::CliError;

fn config_error(src: &str) -> String {
    match parse_config(src, &Overrides::default()) {
        Err(CliError::Config(msg)) => msg,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn defaults_cover_the_five_masks_and_all_modes() {
    let spec = parse_config(NF_SWEEP, &Overrides::default()).unwrap();
    assert_eq!(spec.scenario, Scenario::Nonfading);
    assert_eq!(spec.schemes.len(), 5);
    assert_eq!(spec.modes, vec![Mode::Separate, Mode::Joint, Mode::Upper]);
    assert!((spec.base.power - 10.0).abs() < 1e-12);
    assert_eq!(spec.values().len(), 21);
    assert_eq!(spec.values()[20], 1.0);
}

#[test]
fn two_steps_give_the_two_endpoints() {
    let src = NF_SWEEP.replace("steps = 21", "steps = 2");
    let spec = parse_config(&src, &Overrides::default()).unwrap();
    assert_eq!(spec.values(), vec![0.0, 1.0]);
}

#[test]
fn overrides_take_precedence() {
    let o = Overrides {
        scenario: Some(Scenario::Fading),
        seed: Some(9),
        mc_samples: Some(77),
        budget: Some(3),
    };
    let spec = parse_config(NF_SWEEP, &o).unwrap();
    assert_eq!(spec.scenario, Scenario::Fading);
    assert_eq!(spec.schemes, vec![Scheme::Layers(1), Scheme::Layers(2)]);
    assert_eq!((spec.seed, spec.mc_samples, spec.budget), (9, 77, 3));
}

#[test]
fn errors_name_line_and_field() {
    let msg = config_error(&NF_SWEEP.replace("steps = 21", "steps = 1"));
    assert!(msg.contains("line 13") && msg.contains("sweep.steps"), "{msg}");

    let msg = config_error(&NF_SWEEP.replace("alpha = 0.3", "alpha = 1.3"));
    assert!(msg.contains("line 4") && msg.contains("system.alpha"), "{msg}");

    let msg = config_error(&NF_SWEEP.replace("to = 1.0", "to = 1.5"));
    assert!(msg.contains("sweep.to") && msg.contains("domain"), "{msg}");

    let msg = config_error(&NF_SWEEP.replace("param = \"p\"", "param = \"q\""));
    assert!(msg.contains("sweep.param"), "{msg}");

    let msg = config_error(&format!("{NF_SWEEP}\n[run]\nmodes = [\"common\"]\n"));
    assert!(msg.contains("run.modes") && msg.contains("line 16"), "{msg}");

    let msg = config_error(&format!("{NF_SWEEP}\n[run]\nschemes = [[2, 3]]\n"));
    assert!(msg.contains("run.schemes"), "{msg}");
}

#[test]
fn unknown_keys_and_sections_are_rejected() {
    let msg = config_error(&NF_SWEEP.replace("p_low = 0.1", "p_low = 0.1\ngamma = 2"));
    assert!(msg.contains("gamma") && msg.contains("line 8"), "{msg}");
    let msg = config_error(&format!("{NF_SWEEP}\n[extra]\nx = 1\n"));
    assert!(msg.contains("extra"), "{msg}");
}

#[test]
fn power_must_be_given_exactly_once() {
    assert!(config_error(&NF_SWEEP.replace("power_db = 10", "")).contains("power"));
    assert!(config_error(&NF_SWEEP.replace("power_db = 10", "power_db = 10\npower = 10")).contains("not both"));
    let spec = parse_config(&NF_SWEEP.replace("power_db = 10", "power = 10"), &Overrides::default()).unwrap();
    assert_eq!(spec.base.power, 10.0);
}

#[test]
fn swept_decibels_convert_to_linear_power() {
    let src = NF_SWEEP
        .replace("param = \"p\"", "param = \"P_db\"")
        .replace("to = 1.0", "to = 20.0");
    let spec = parse_config(&src, &Overrides::default()).unwrap();
    assert_eq!(spec.sweep.as_ref().unwrap().param, SweptParam::PowerDb);
    assert!((spec.params_at(20.0).power - 100.0).abs() < 1e-9);
}

#[test]
fn exit_codes_distinguish_config_and_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", &NF_SWEEP.replace("steps = 21", "steps = 1"));
    let o = uplink(dir.path(), &["nf-sweep", "--config", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("sweep.steps"));

    let o = uplink(dir.path(), &["nf-sweep", "--config", "/nonexistent/cfg.toml"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("/nonexistent/cfg.toml"));

    let o = uplink(dir.path(), &["nf-sweep", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));

    let explicit = write(dir.path(), "nf.toml", &format!("{NF_SWEEP}\n[run]\nscenario = \"nonfading\"\n"));
    let o = uplink(dir.path(), &["fading-sweep", "--config", &explicit]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("conflicts"), "{}", stderr(&o));

    let good = write(dir.path(), "good.toml", NF_SWEEP);

    let o = uplink(dir.path(), &["nf-sweep", "--config", &good, "--out", "/proc/forbidden/out.csv"]);
    assert_eq!(o.status.code(), Some(3));
}
