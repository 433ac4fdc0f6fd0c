//! One test per acceptance criterion. Each prints its report line to stderr
//! whether or not output capture is on.

use std::io::Write;

use eit_cli::acceptance;

fn criterion(id: u8) {
    let outcome = acceptance::run(id);
    let _ = writeln!(std::io::stderr(), "{outcome}");
    assert!(outcome.pass, "{outcome}");
}

#[test]
fn criterion_01_window_reshaping() {
    criterion(1);
}

#[test]
fn criterion_02_baseline_transmission() {
    criterion(2);
}

#[test]
fn criterion_03_slow_light_delay() {
    criterion(3);
}

#[test]
fn criterion_04_analytic_numeric_envelope() {
    criterion(4);
}

#[test]
fn criterion_05_phase_modulation() {
    criterion(5);
}

#[test]
fn criterion_06_broadening() {
    criterion(6);
}

#[test]
fn criterion_07_susceptibility_oracle() {
    criterion(7);
}

#[test]
fn criterion_08_integrator_properties() {
    criterion(8);
}

#[test]
fn criterion_09_scan_structure() {
    criterion(9);
}

#[test]
fn criterion_10_polarization_phases() {
    criterion(10);
}
