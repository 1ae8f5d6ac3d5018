#![no_main]

use libfuzzer_sys::fuzz_target;
use rec_sizer::config::ConfigFile;

fuzz_target!(|data: &str| {
    let Ok(file) = ConfigFile::from_toml_str(data) else {
        return;
    };
    let Ok(text) = file.to_toml_string() else {
        return;
    };
    let again = ConfigFile::from_toml_str(&text).expect("written configuration parses");
    assert_eq!(again.to_toml_string().unwrap(), text);
});
