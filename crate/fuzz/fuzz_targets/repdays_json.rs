#![no_main]

use libfuzzer_sys::fuzz_target;
use rec_sizer::schema::{from_json, to_json, RepDaysDoc};

fuzz_target!(|data: &str| {
    let Ok(doc) = from_json::<RepDaysDoc>(data) else {
        return;
    };
    let text = to_json(&doc).expect("parsed document can be written");
    assert_eq!(from_json::<RepDaysDoc>(&text).expect("written document parses"), doc);
});
