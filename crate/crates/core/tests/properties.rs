mod common;

fn check(outcome: common::Outcome) {
    match outcome {
        Ok(summary) => println!("{summary}"),
        Err(failure) => panic!("{failure}"),
    }
}

#[test]
fn syndrome_round_trip_is_exhaustive_for_small_lattices() {
    check(common::syndrome_round_trip());
}

#[test]
fn isolated_errors_are_recovered_exactly() {
    check(common::isolated_error_exactness(400));
}

#[test]
fn residuals_are_closed_and_tree_independent() {
    check(common::residual_closure(300));
}

#[test]
fn final_state_is_normalized() {
    check(common::final_state_normalization(2000));
}

#[test]
fn results_do_not_depend_on_worker_count() {
    check(common::worker_determinism());
}

#[test]
fn exact_matching_agrees_with_exhaustive_search() {
    check(common::oracle_equivalence(300));
}

#[test]
fn right_up_right_is_the_best_two_by_one_path() {
    check(common::path_law());
}

#[test]
fn staircase_dominates_every_minimal_path() {
    check(common::staircase_dominance());
}
