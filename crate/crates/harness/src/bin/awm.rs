fn main() {
    std::process::exit(awm_harness::cli::run(std::env::args_os()));
}
