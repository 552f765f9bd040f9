#![no_main]

use hemo1d::network::Snapshot;
use hemo1d::output::{read_snapshot, write_snapshot};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(edges) = read_snapshot(data) else {
        return;
    };
    // Anything that parses must survive a write and read back unchanged.
    let snapshot = Snapshot { t: 0.0, edges };
    let mut buf = Vec::new();
    write_snapshot(&snapshot, &mut buf).unwrap();
    let back = read_snapshot(buf.as_slice()).unwrap();
    let mut sorted = snapshot.edges.clone();
    sorted.sort_by(|a, b| a.edge_id.cmp(&b.edge_id));
    assert_eq!(back.len(), sorted.len());
    for (a, b) in sorted.iter().zip(&back) {
        assert_eq!(a.edge_id, b.edge_id);
        assert_eq!(a.x.len(), b.x.len());
    }
});
