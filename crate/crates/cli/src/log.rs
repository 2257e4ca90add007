//! Minimal stderr logging controlled by the `RAGD_BENCH_LOG` environment
//! variable: `quiet` (default), `info`, or `debug`.

fn level() -> u8 {
    match std::env::var("RAGD_BENCH_LOG").as_deref() {
        Ok("debug") => 2,
        Ok("info") => 1,
        _ => 0,
    }
}

pub fn info(msg: &str) {
    if level() >= 1 {
        eprintln!("[info] {msg}");
    }
}

pub fn debug(msg: &str) {
    if level() >= 2 {
        eprintln!("[debug] {msg}");
    }
}
