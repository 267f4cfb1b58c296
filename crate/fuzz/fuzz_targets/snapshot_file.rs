#![no_main]
use libfuzzer_sys::fuzz_target;
use nfmimo::snapshot::{deserialize_snapshot, serialize_snapshot};

const MAX_INPUT_SIZE: usize = 256 * 1024;

fuzz_target!(|data: &[u8]| {
    if data.len() > MAX_INPUT_SIZE {
        return;
    }
    if let Ok(snap) = deserialize_snapshot(data) {
        let again =
            deserialize_snapshot(&serialize_snapshot(&snap)).expect("written snapshot parses");
        assert_eq!(again, snap);
    }
});
