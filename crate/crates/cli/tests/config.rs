//! Configuration resolution: defaults, file parsing, flag precedence,
//! and rejection of malformed input.

use std::io::Write;

use dephasim_cli::{resolve, ChannelSel, Experiment, Mode, Overrides};

fn write_config(content: &str) -> tempfile::NamedTempFile {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(content.as_bytes()).unwrap();
    file
}

#[test]
fn sweep_defaults_match_the_baseline_parameter_set() {
    let cfg = resolve(Experiment::Sweep, None, &Overrides::default()).unwrap();
    assert_eq!(cfg.lambda_mhz, 2e-4);
    assert_eq!(cfg.gamma_mhz, 0.9);
    assert_eq!(cfg.omega_j_mhz, 5000.0);
    assert_eq!(cfg.ensemble, 150);
    assert_eq!(cfg.dt_us, 0.01);
    assert_eq!(cfg.tf_us, 5.0);
    assert_eq!(cfg.mode, Mode::Analytic);
    // 19-point grid bracketing the 0.1 MHz transition.
    assert_eq!(cfg.omega0_grid.len(), 19);
    assert_eq!(cfg.omega0_grid[0], 0.02);
    assert_eq!(cfg.omega0_grid[8], 0.1);
    assert_eq!(cfg.omega0_grid[18], 0.2);
    assert_eq!(cfg.steps(), 500);
}

#[test]
fn flags_override_file_which_overrides_defaults() {
    let file = write_config("omega0_mhz = 0.08\nseed = 99\nensemble = 42\n");
    let flags = Overrides {
        omega0: Some(0.13),
        ..Default::default()
    };
    let cfg = resolve(Experiment::Trajectory, Some(file.path()), &flags).unwrap();
    // Flag wins over file.
    assert_eq!(cfg.omega0_mhz, 0.13);
    // File wins over default.
    assert_eq!(cfg.seed, 99);
    assert_eq!(cfg.ensemble, 42);
    // Untouched default survives.
    assert_eq!(cfg.gamma_mhz, 0.9);
}

#[test]
fn unknown_keys_are_rejected_with_their_location() {
    let file = write_config("lambda_mhz = 1e-4\nbogus_key = 3\n");
    let err = resolve(Experiment::Sweep, Some(file.path()), &Overrides::default()).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("bogus_key"), "{msg}");
    assert!(msg.contains(":2"), "should name line 2: {msg}");
}

#[test]
fn malformed_numerics_name_the_key() {
    let file = write_config("ensemble = -5\n");
    let err = resolve(Experiment::Sweep, Some(file.path()), &Overrides::default()).unwrap_err();
    assert!(err.to_string().contains("ensemble"), "{err}");

    let file = write_config("gamma_mhz = fast\n");
    let err = resolve(Experiment::Sweep, Some(file.path()), &Overrides::default()).unwrap_err();
    assert!(err.to_string().contains("gamma_mhz"), "{err}");
}

#[test]
fn nonpositive_frequencies_are_rejected() {
    let file = write_config("omega0_mhz = 0\n");
    let err = resolve(
        Experiment::Trajectory,
        Some(file.path()),
        &Overrides::default(),
    )
    .unwrap_err();
    assert!(err.to_string().contains("omega0_mhz"), "{err}");

    let file = write_config("theta_mhz = -1\n");
    let err = resolve(Experiment::Sweep, Some(file.path()), &Overrides::default()).unwrap_err();
    assert!(err.to_string().contains("theta_mhz"), "{err}");
}

#[test]
fn experiment_key_must_match_the_subcommand() {
    let file = write_config("experiment = sweep\n");
    assert!(resolve(Experiment::Sweep, Some(file.path()), &Overrides::default()).is_ok());
    let err = resolve(
        Experiment::Channels,
        Some(file.path()),
        &Overrides::default(),
    )
    .unwrap_err();
    assert!(err.to_string().contains("sweep"), "{err}");
}

#[test]
fn grid_specs_are_expanded_and_validated() {
    let flags = Overrides {
        omega0_grid: Some("0.05:0.07:0.01".into()),
        ..Default::default()
    };
    let cfg = resolve(Experiment::Sweep, None, &flags).unwrap();
    assert_eq!(cfg.omega0_grid, vec![0.05, 0.06, 0.07]);

    for bad in ["0.05:0.07", "0.07:0.05:0.01", "0:0.1:0.01", "a:b:c"] {
        let flags = Overrides {
            omega0_grid: Some(bad.into()),
            ..Default::default()
        };
        assert!(
            resolve(Experiment::Sweep, None, &flags).is_err(),
            "grid `{bad}` should be rejected"
        );
    }
}

#[test]
fn channel_and_mode_selections_parse() {
    let flags = Overrides {
        channels: Some("sa".into()),
        mode: Some("bessel".into()),
        ..Default::default()
    };
    let cfg = resolve(Experiment::Trajectory, None, &flags).unwrap();
    assert_eq!(cfg.channels, Some(ChannelSel::Sa));
    assert_eq!(cfg.mode, Mode::Bessel);

    let flags = Overrides {
        channels: Some("x".into()),
        ..Default::default()
    };
    assert!(resolve(Experiment::Trajectory, None, &flags).is_err());
}

#[test]
fn comments_and_blank_lines_are_ignored() {
    let file = write_config("# a comment\n\n  # indented comment\nseed = 3\n");
    let cfg = resolve(Experiment::Sweep, Some(file.path()), &Overrides::default()).unwrap();
    assert_eq!(cfg.seed, 3);
}
