mod common;

use nfmimo::channel_db::{deserialize_db, serialize_db};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn random_databases_round_trip_bit_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for i in 0..1000 {
        let db = common::random_db(&mut rng);
        let bytes = serialize_db(&db);
        let back = deserialize_db(&bytes).unwrap_or_else(|e| panic!("db {i}: {e}"));
        assert!(
            common::db_bits_equal(&db, &back),
            "db {i} changed in a round trip"
        );
        assert_eq!(serialize_db(&back), bytes);
    }
}

#[test]
fn truncated_files_are_schema_errors() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let bytes = serialize_db(&common::random_db(&mut rng));
    for cut in [0, 1, bytes.len() / 3, bytes.len() / 2, bytes.len() - 3] {
        let err = deserialize_db(&bytes[..cut]).unwrap_err();
        assert!(err.is_input_error(), "cut at {cut}: {err}");
    }
}
