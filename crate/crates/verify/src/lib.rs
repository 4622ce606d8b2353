//! Holds the `acceptance` test target. Run it with
//! `cargo test -p page-verify --test acceptance`; it prints one pass/fail
//! line per criterion and exits non-zero if any criterion fails.
