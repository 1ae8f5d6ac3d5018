#![no_main]

use libfuzzer_sys::fuzz_target;
use rec_sizer::series::{read_series_csv, write_series_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(columns) = read_series_csv(data) else {
        return;
    };
    let refs: Vec<_> = columns.iter().map(|(n, s)| (n.as_str(), s)).collect();
    let mut out = Vec::new();
    write_series_csv(&mut out, &refs).expect("parsed columns can be written");
    let again = read_series_csv(out.as_slice()).expect("written columns parse");
    assert_eq!(again, columns);
});
