#![no_main]

use libfuzzer_sys::fuzz_target;
use rec_sizer::lp::{parse_dump, solve_lp, write_dump};

fuzz_target!(|data: &str| {
    let Ok(lp) = parse_dump(data) else {
        return;
    };
    let text = write_dump(&lp);
    assert_eq!(write_dump(&parse_dump(&text).expect("written dump parses")), text);
    if lp.num_vars() <= 16 && lp.num_constraints() <= 16 {
        let _ = solve_lp(&lp);
    }
});
