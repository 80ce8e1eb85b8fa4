// SPDX-License-Identifier: Apache-2.0

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    // Anything that parses must survive a round trip through TOML.
    if let Ok(config) = nems_chain::io::parse_config(text) {
        let again = nems_chain::io::to_toml(&config).expect("valid config serializes");
        assert_eq!(nems_chain::io::parse_config(&again).expect("serialized config parses"), config);
    }
});
