#![no_main]

use libfuzzer_sys::fuzz_target;
use rec_sizer::series::{read_weather_csv, write_weather_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(weather) = read_weather_csv(data) else {
        return;
    };
    let mut out = Vec::new();
    write_weather_csv(&mut out, &weather).expect("parsed weather can be written");
    assert_eq!(read_weather_csv(out.as_slice()).expect("written weather parses"), weather);
});
