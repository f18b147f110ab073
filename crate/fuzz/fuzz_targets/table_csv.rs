#![no_main]

use libfuzzer_sys::fuzz_target;
use riskdiff::table::parse_csv;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(table) = parse_csv(text) else {
        return;
    };
    // accepted tables must survive export and re-import unchanged
    let again = parse_csv(&table.to_csv()).expect("exported table parses");
    assert_eq!(again, table);
    let _ = table.to_study();
});
