fn main() {
    std::process::exit(weighted_advdiff::cli::run(std::env::args_os()));
}
