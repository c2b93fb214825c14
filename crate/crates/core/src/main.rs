fn main() {
    std::process::exit(lp_extremal::cli::run(std::env::args_os()));
}
