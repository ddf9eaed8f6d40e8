//! Holds the acceptance suite; run it with `cargo test -p radial-plap-validation`.
