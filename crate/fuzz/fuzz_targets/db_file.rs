//! Database files: parsing never panics, and anything that parses survives a
//! write/read cycle unchanged.

#![no_main]
use libfuzzer_sys::fuzz_target;
use nfmimo::channel_db::{deserialize_db, serialize_db};

const MAX_INPUT_SIZE: usize = 256 * 1024;

fuzz_target!(|data: &[u8]| {
    if data.len() > MAX_INPUT_SIZE {
        return;
    }
    if let Ok(db) = deserialize_db(data) {
        let bytes = serialize_db(&db);
        let again = deserialize_db(&bytes).expect("written database parses");
        assert_eq!(serialize_db(&again), bytes);
    }
});
