#![no_main]

use libfuzzer_sys::fuzz_target;
use riskdiff::table::parse_json;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(table) = parse_json(text) {
        let again = parse_json(&table.to_json()).expect("exported table parses");
        assert_eq!(again, table);
    }
});
