use std::process::exit;

fn main() {
    exit(tmesh3d::cli::run(std::env::args()));
}
