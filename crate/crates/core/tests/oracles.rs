mod common;

#[test]
fn segment_crossing_matches_cramer_oracle() {
    let bad = common::crossing_disagreements(10_000, 11);
    assert!(
        bad.is_empty(),
        "{} disagreements, first: {}",
        bad.len(),
        bad[0]
    );
}

#[test]
fn first_order_visibility_matches_reflection_oracle() {
    let bad = common::visibility_disagreements(10_000, 12);
    assert!(
        bad.is_empty(),
        "{} disagreements, first: {}",
        bad.len(),
        bad[0]
    );
}

#[test]
fn oracles_agree_on_hand_cases() {
    use common::{crosses_oracle, reflects_oracle, IPoint};
    let p = |x, y| IPoint { x, y };
    // X shape crosses, T shape and collinear overlap do not
    assert!(crosses_oracle(p(0, 0), p(2, 2), p(0, 2), p(2, 0)));
    assert!(!crosses_oracle(p(0, 0), p(1, 1), p(0, 2), p(2, 0)));
    assert!(!crosses_oracle(p(0, 0), p(3, 0), p(1, 0), p(2, 0)));
    // wall along y = 0 from x = 0 to 4; both points above it
    assert!(reflects_oracle(p(1, 1), p(3, 1), p(0, 0), p(4, 0)));
    // reflection point exactly at the wall's end
    assert!(!reflects_oracle(p(3, 1), p(5, 1), p(0, 0), p(4, 0)));
    assert!(!reflects_oracle(p(1, 1), p(3, -1), p(0, 0), p(4, 0)));
}
