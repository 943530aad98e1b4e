#[path = "support/spectra_checks.rs"]
mod checks;

#[test]
fn accumulator_matches_enumeration() {
    checks::accumulator_matches_enumeration();
}

#[test]
fn repetition_matches_enumeration() {
    checks::repetition_matches_enumeration();
}

#[test]
fn partial_precoder_matches_enumeration() {
    checks::partial_precoder_matches_enumeration();
}

#[test]
fn trellis_accumulator_with_and_without_puncturing() {
    checks::trellis_accumulator_with_and_without_puncturing();
}

#[test]
fn trellis_rsc_terminated() {
    checks::trellis_rsc_terminated();
}

#[test]
fn trellis_rsc_periodic_puncturing() {
    checks::trellis_rsc_periodic_puncturing();
}

#[test]
fn uniform_concat_matches_interleaver_average() {
    checks::uniform_concat_matches_interleaver_average();
}

#[test]
fn turbo_matches_interleaver_average() {
    checks::turbo_matches_interleaver_average();
}

#[test]
fn ensembles_match_interleaver_average() {
    checks::ensembles_match_interleaver_average();
}
