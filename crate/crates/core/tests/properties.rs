//! Randomised kernel properties; the generators live in `suites`.

mod suites;

#[test]
fn canonicalization_is_idempotent() {
    suites::canonicalization_is_idempotent().unwrap();
}

#[test]
fn canonical_forms_are_reduced() {
    suites::canonical_forms_are_reduced().unwrap();
}

#[test]
fn field_axioms_hold_symbolically() {
    suites::field_axioms_hold_symbolically().unwrap();
}

#[test]
fn field_axioms_hold_numerically() {
    suites::field_axioms_hold_numerically().unwrap();
}

#[test]
fn a_reduction_is_sound() {
    suites::a_reduction_is_sound().unwrap();
}

#[test]
fn equal_expressions_agree_numerically() {
    suites::equal_expressions_agree_numerically().unwrap();
}

#[test]
fn numeric_derivatives_are_exact() {
    suites::numeric_derivatives_are_exact().unwrap();
}

#[test]
fn leibniz_rule() {
    suites::leibniz_rule().unwrap();
}

#[test]
fn space_and_time_derivatives_commute_on_shell() {
    suites::space_and_time_derivatives_commute_on_shell().unwrap();
}

#[test]
fn pullback_derivatives_are_consistent() {
    suites::pullback_derivatives_are_consistent().unwrap();
}

#[test]
fn composition_is_associative() {
    suites::composition_is_associative().unwrap();
}

#[test]
fn application_is_a_homomorphism() {
    suites::application_is_a_homomorphism().unwrap();
}

#[test]
fn adjoint_is_an_involution() {
    suites::adjoint_is_an_involution().unwrap();
}

#[test]
fn hamiltonian_operators_are_skew() {
    suites::hamiltonian_operators_are_skew().unwrap();
}

#[test]
fn printing_then_parsing_round_trips() {
    suites::printing_then_parsing_round_trips().unwrap();
}

#[test]
fn named_objects_round_trip() {
    suites::named_objects_round_trip().unwrap();
}
